#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod field;
pub mod fmath;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quad;
pub mod solver;
pub mod sparse;
pub mod uq;
