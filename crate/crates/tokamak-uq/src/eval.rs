//! Direct and surrogate evaluators shared by the CLI, the comparisons and the Monte Carlo driver.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use tokamak_uq_core::field::{analyze, FieldError, Features};
use tokamak_uq_core::geometry::{CurrentVector, ReactorGeometry};
use tokamak_uq_core::mesh::{uniform_refine_interior, MeshError, NodalField, Projector, TriMesh};
use tokamak_uq_core::solver::{solve_from, EquilibriumSolution, ProfileParams, SolveError, SolverOptions};
use tokamak_uq_core::sparse::{BatchEval, Surrogate};
use tokamak_uq_core::uq::{McEvaluator, NoiseModel, SampleFeatures, SampleResult};

use crate::io::mesh::mesh_to_string;

/// First eight bytes of the SHA-256 of the mesh file text.
pub fn mesh_hash(m: &TriMesh) -> u64 {
    let d = Sha256::digest(mesh_to_string(m).as_bytes());
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Common mesh for a refinement depth: every in-vessel triangle refined `depth` times.
pub fn common_mesh(coarse: &TriMesh, depth: usize) -> TriMesh {
    uniform_refine_interior(coarse, depth)
}

pub fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool")
}

pub struct DirectSample {
    pub solution: EquilibriumSolution,
    /// Solution projected onto the common mesh.
    pub common: NodalField,
    /// Features of the adaptive solution itself.
    pub features: Result<Features, FieldError>,
}

/// Free-boundary solves projected onto a fixed common mesh.
pub struct DirectSolver {
    pub geometry: ReactorGeometry,
    pub coarse: Arc<TriMesh>,
    pub profile: ProfileParams,
    pub opts: SolverOptions,
    projector: Projector,
    warm: Option<NodalField>,
}

impl DirectSolver {
    pub fn new(geometry: ReactorGeometry, coarse: Arc<TriMesh>, profile: ProfileParams, opts: SolverOptions) -> Result<Self, MeshError> {
        let common = Arc::new(common_mesh(&coarse, opts.refinements));
        let projector = Projector::new(common)?;
        Ok(DirectSolver { geometry, coarse, profile, opts, projector, warm: None })
    }

    pub fn common_mesh(&self) -> &Arc<TriMesh> {
        self.projector.mesh()
    }

    /// Start later solves from `sol` restricted to the coarse vertices. Refinement
    /// only appends vertices, so the restriction is a prefix.
    pub fn set_warm_start(&mut self, sol: &EquilibriumSolution) {
        let n = self.coarse.vertex_count();
        self.warm = Some(NodalField::new(self.coarse.clone(), sol.field.values[..n].to_vec()));
    }

    pub fn clear_warm_start(&mut self) {
        self.warm = None;
    }

    pub fn solve(&self, c: &CurrentVector) -> Result<DirectSample, SolveError> {
        let solution = solve_from(&self.geometry, self.coarse.clone(), c, &self.profile, &self.opts, self.warm.as_ref())?;
        let common = self.projector.project(&solution.field).field;
        let features = analyze(&solution.field, &self.geometry);
        Ok(DirectSample { solution, common, features })
    }

    pub fn sample(&self, c: &CurrentVector) -> SampleResult {
        let t = Instant::now();
        let r = self.solve(c);
        let seconds = t.elapsed().as_secs_f64();
        match r {
            Ok(s) => SampleResult {
                monitored: Some(s.common.values),
                features: s.features.ok().map(|f| SampleFeatures::from(&f)),
                seconds,
            },
            Err(_) => SampleResult { monitored: None, features: None, seconds },
        }
    }
}

/// Direct solver driven through a parameter box, for surrogate construction
/// and Monte Carlo campaigns.
pub struct DirectEval<'a> {
    pub solver: &'a DirectSolver,
    pub noise: &'a NoiseModel,
    pub pool: &'a rayon::ThreadPool,
    /// Solver calls made so far.
    pub calls: usize,
}

impl<'a> DirectEval<'a> {
    pub fn new(solver: &'a DirectSolver, noise: &'a NoiseModel, pool: &'a rayon::ThreadPool) -> Self {
        DirectEval { solver, noise, pool, calls: 0 }
    }
}

impl BatchEval for DirectEval<'_> {
    fn eval_batch(&mut self, points: &[Vec<f64>]) -> Vec<Option<Vec<f64>>> {
        self.calls += points.len();
        let (s, nm) = (self.solver, self.noise);
        self.pool.install(|| {
            points.par_iter().map(|p| s.solve(&nm.currents_of(p)).ok().map(|r| r.common.values)).collect()
        })
    }
}

impl McEvaluator for DirectEval<'_> {
    fn evaluate(&mut self, batch: &[CurrentVector]) -> Vec<SampleResult> {
        self.calls += batch.len();
        let s = self.solver;
        self.pool.install(|| batch.par_iter().map(|c| s.sample(c)).collect())
    }
}

/// Surrogate field on the common mesh plus its feature analysis.
pub struct SurrogateEval<'a> {
    pub surrogate: &'a Surrogate,
    pub noise: &'a NoiseModel,
    pub mesh: Arc<TriMesh>,
    pub geometry: &'a ReactorGeometry,
    pub pool: &'a rayon::ThreadPool,
}

impl SurrogateEval<'_> {
    /// Field at a current vector; points outside the box are extrapolated.
    pub fn field(&self, c: &CurrentVector) -> NodalField {
        let x = self.noise.params_of(c);
        let v = self.surrogate.eval_with(&x, true).expect("parameter dimension matches the surrogate");
        NodalField::new(self.mesh.clone(), v)
    }

    pub fn sample(&self, c: &CurrentVector) -> SampleResult {
        let t = Instant::now();
        let f = self.field(c);
        let features = analyze(&f, self.geometry).ok().map(|f| SampleFeatures::from(&f));
        SampleResult { monitored: Some(f.values), features, seconds: t.elapsed().as_secs_f64() }
    }
}

impl McEvaluator for SurrogateEval<'_> {
    fn evaluate(&mut self, batch: &[CurrentVector]) -> Vec<SampleResult> {
        let s = &*self;
        self.pool.install(|| batch.par_iter().map(|c| s.sample(c)).collect())
    }
}
