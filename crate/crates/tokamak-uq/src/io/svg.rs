//! Minimal SVG plots over the machine cross-section.

use std::fmt::Write as _;

use tokamak_uq_core::geometry::{Point, ReactorGeometry};

/// Drawing in metres; y is flipped on output so that up is up.
pub struct Svg {
    lo: Point,
    hi: Point,
    scale: f64,
    body: String,
}

const PX_PER_M: f64 = 40.0;

impl Svg {
    /// Canvas framing the limiter, vessel and coils with a small margin.
    pub fn for_geometry(g: &ReactorGeometry) -> Svg {
        let mut pts: Vec<Point> = g.limiter.iter().chain(&g.vessel_outer).chain(&g.divertor).copied().collect();
        for c in &g.coils {
            pts.extend(c.corners());
        }
        if pts.is_empty() {
            pts = vec![Point::new(0.0, -g.gamma_radius), Point::new(g.gamma_radius, g.gamma_radius)];
        }
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let pad = 0.5;
        let mut s = Svg { lo: Point::new(lo.x - pad, lo.y - pad), hi: Point::new(hi.x + pad, hi.y + pad), scale: PX_PER_M, body: String::new() };
        s.outline(g);
        s
    }

    /// Canvas over an arbitrary window, about `width_px` wide.
    pub fn window(lo: Point, hi: Point, width_px: f64) -> Svg {
        Svg { lo, hi, scale: width_px / (hi.x - lo.x), body: String::new() }
    }

    /// Coils, vessel, limiter and divertor.
    pub fn outline(&mut self, g: &ReactorGeometry) {
        let s = self;
        for c in &g.coils {
            s.polyline(&c.corners(), true, "#b36b00", 1.6, Some("#f3d9b1"));
        }
        if !g.vessel_outer.is_empty() {
            s.polyline(&g.vessel_outer, true, "#555555", 1.2, None);
        }
        s.polyline(&g.limiter, true, "#222222", 1.6, None);
        if !g.divertor.is_empty() {
            s.polyline(&g.divertor, false, "#222222", 2.0, None);
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        ((p.x - self.lo.x) * self.scale, (self.hi.y - p.y) * self.scale)
    }

    /// Widths, radii and marker sizes are in pixels.
    pub fn polyline(&mut self, pts: &[Point], closed: bool, stroke: &str, width: f64, fill: Option<&str>) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|&p| self.map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            r#"<{tag} points="{}" fill="{}" stroke="{stroke}" stroke-width="{:.2}"/>"#,
            coords.join(" "),
            fill.unwrap_or("none"),
            width
        );
    }

    pub fn scatter(&mut self, pts: &[Point], color: &str, radius: f64) {
        for &p in pts {
            let (x, y) = self.map(p);
            let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{color}" fill-opacity="0.5"/>"#, radius);
        }
    }

    pub fn marker(&mut self, p: Point, color: &str, size: f64) {
        let (x, y) = self.map(p);
        let h = 0.5 * size;
        let _ = writeln!(
            self.body,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}" stroke-width="2"/>"#,
            x - h,
            y - h,
            x + h,
            y + h,
            x - h,
            y + h,
            x + h,
            y - h
        );
    }

    pub fn label(&mut self, p: Point, text: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="14">{text}</text>"#);
    }

    pub fn finish(self) -> String {
        let (w, h) = ((self.hi.x - self.lo.x) * self.scale, (self.hi.y - self.lo.y) * self.scale);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}
