//! Planar domains and their cell grids.
//!
//! All domains are bounded, convex and symmetric with respect to both
//! coordinate axes, described by the upper-boundary profile r(x₁) on [0, a]
//! with r(0) = b. Rectangles are the degenerate constant profile.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Point = [f64; 2];

/// Axis-aligned rectangle (−a, a) × (−b, b) with a ≥ b > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub a: f64,
    pub b: f64,
}

impl Rectangle {
    /// Half-widths are normalized so that a ≥ b by swapping axes.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rectangle half-widths must be positive, got ({a}, {b})"
            )));
        }
        Ok(if a >= b { Self { a, b } } else { Self { a: b, b: a } })
    }
}

/// Upper-boundary profile of a double-symmetric convex domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Profile {
    Rectangle,
    Ellipse,
    Diamond,
    /// Rectangle with semicircular caps of radius b; needs a ≥ b.
    Stadium,
    /// Tabulated (x₁, r) pairs on [0, a], linearly interpolated.
    Table { points: Vec<(f64, f64)> },
}

/// Bounded convex domain symmetric in both axes: {|x₂| < r(|x₁|), |x₁| < a}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
    #[serde(flatten)]
    pub profile: Profile,
}

const TABLE_SHAPE_TOL: f64 = 1e-9;

impl Domain {
    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        let r = Rectangle::new(a, b)?;
        Ok(Self { a: r.a, b: r.b, profile: Profile::Rectangle })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::check_half_widths(a, b)?;
        Ok(Self { a, b, profile: Profile::Ellipse })
    }

    pub fn diamond(a: f64, b: f64) -> Result<Self> {
        Self::check_half_widths(a, b)?;
        Ok(Self { a, b, profile: Profile::Diamond })
    }

    pub fn stadium(a: f64, b: f64) -> Result<Self> {
        Self::check_half_widths(a, b)?;
        Ok(Self { a, b, profile: Profile::Stadium })
    }

    /// Tabulated profile; validated nonincreasing and concave within 1e-9,
    /// with r(0) = b and support reaching x₁ = a.
    pub fn table(a: f64, b: f64, mut points: Vec<(f64, f64)>) -> Result<Self> {
        Self::check_half_widths(a, b)?;
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        if points.len() < 2 {
            return Err(Error::InvalidParameter("table profile needs >= 2 points".into()));
        }
        let first = points[0];
        let last = *points.last().unwrap();
        if first.0 != 0.0 || (first.1 - b).abs() > TABLE_SHAPE_TOL * b {
            return Err(Error::InvalidParameter("table profile must start at (0, b)".into()));
        }
        if (last.0 - a).abs() > TABLE_SHAPE_TOL * a {
            return Err(Error::InvalidParameter("table profile must end at x1 = a".into()));
        }
        let scale = b.max(1.0);
        for w in points.windows(2) {
            if w[1].1 > w[0].1 + TABLE_SHAPE_TOL * scale {
                return Err(Error::InvalidParameter("table profile must be nonincreasing".into()));
            }
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter("table profile x1 values must increase".into()));
            }
        }
        for w in points.windows(3) {
            // concavity: middle point not below the chord
            let t = (w[1].0 - w[0].0) / (w[2].0 - w[0].0);
            let chord = w[0].1 + t * (w[2].1 - w[0].1);
            if w[1].1 < chord - TABLE_SHAPE_TOL * scale {
                return Err(Error::InvalidParameter("table profile must be concave".into()));
            }
        }
        if points.iter().any(|p| p.1 < 0.0) {
            return Err(Error::InvalidParameter("table profile heights must be >= 0".into()));
        }
        Ok(Self { a, b, profile: Profile::Table { points } })
    }

    /// Re-run the constructor checks; needed after deserialization.
    pub fn validate(&self) -> Result<()> {
        match &self.profile {
            Profile::Rectangle => {
                Rectangle::new(self.a, self.b)?;
                if self.a < self.b {
                    return Err(Error::InvalidParameter(
                        "rectangle half-widths must satisfy a >= b (swap the axes)".into(),
                    ));
                }
                Ok(())
            }
            Profile::Table { points } => {
                Self::table(self.a, self.b, points.clone()).map(|_| ())
            }
            _ => Self::check_half_widths(self.a, self.b),
        }
    }

    fn check_half_widths(a: f64, b: f64) -> Result<()> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half-widths must be positive, got ({a}, {b})"
            )));
        }
        if a < b {
            return Err(Error::InvalidParameter(format!(
                "profiles assume a >= b, got ({a}, {b}); swap the axes"
            )));
        }
        Ok(())
    }

    /// Upper boundary height r(|x₁|) for |x₁| ≤ a.
    pub fn boundary_height(&self, x1_abs: f64) -> f64 {
        let x = x1_abs;
        match &self.profile {
            Profile::Rectangle => self.b,
            Profile::Ellipse => {
                let t = x / self.a;
                self.b * (1.0 - t * t).max(0.0).sqrt()
            }
            Profile::Diamond => self.b * (1.0 - x / self.a),
            Profile::Stadium => {
                let flat = self.a - self.b;
                if x <= flat {
                    self.b
                } else {
                    let d = x - flat;
                    (self.b * self.b - d * d).max(0.0).sqrt()
                }
            }
            Profile::Table { points } => {
                if x >= points.last().unwrap().0 {
                    return points.last().unwrap().1;
                }
                let idx = points.partition_point(|p| p.0 <= x);
                let (lo, hi) = (points[idx - 1], points[idx]);
                let t = (x - lo.0) / (hi.0 - lo.0);
                lo.1 + t * (hi.1 - lo.1)
            }
        }
    }

    /// Open-set membership by |x₂| < r(|x₁|).
    pub fn contains(&self, p: Point) -> bool {
        let x = p[0].abs();
        let y = p[1].abs();
        x < self.a && y < self.boundary_height(x)
    }

    /// Radius of the largest inscribed disk (centered at the origin by
    /// convexity and double symmetry).
    pub fn inradius(&self) -> f64 {
        match &self.profile {
            Profile::Rectangle | Profile::Stadium => self.b,
            Profile::Ellipse => self.b,
            Profile::Diamond => {
                self.a * self.b / (self.a * self.a + self.b * self.b).sqrt()
            }
            Profile::Table { points } => {
                let mut r = self.a;
                for w in points.windows(2) {
                    r = r.min(segment_distance(w[0], w[1]));
                }
                // profile may end above zero height; the wall x₁ = a counts
                r.min(self.a)
            }
        }
    }

    /// Largest pairwise distance; by symmetry 2 max |p| over the boundary.
    pub fn diameter(&self) -> f64 {
        match &self.profile {
            Profile::Rectangle => 2.0 * (self.a * self.a + self.b * self.b).sqrt(),
            Profile::Ellipse | Profile::Diamond | Profile::Stadium => 2.0 * self.a,
            Profile::Table { points } => {
                let m = points
                    .iter()
                    .map(|p| (p.0 * p.0 + p.1 * p.1).sqrt())
                    .fold(self.a, f64::max);
                2.0 * m
            }
        }
    }

    pub fn bounding_rectangle(&self) -> Rectangle {
        Rectangle { a: self.a, b: self.b }
    }

    /// Profile kink locations in (0, a), used as quadrature breakpoints.
    pub fn profile_breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Stadium => vec![self.a - self.b],
            Profile::Table { points } => {
                points[1..points.len() - 1].iter().map(|p| p.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Cell grid of axis-aligned squares of side h whose centers lie inside
    /// the domain. The grid is exactly closed under both axis reflections.
    pub fn mesh(&self, h: f64) -> Result<CellGrid> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {h}")));
        }
        let m = (self.a / h).ceil() as i64 + 1;
        let my = (self.b / h).ceil() as i64 + 1;
        let mut cells = Vec::new();
        for iy in -my..my {
            for ix in -m..m {
                let c = [(ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h];
                if self.contains(c) {
                    cells.push((ix, iy));
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::MeshTooCoarse { h, limit: self.inradius() });
        }
        Ok(CellGrid::from_cells(h, cells))
    }
}

fn segment_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let (px, py) = p;
    let (dx, dy) = (q.0 - px, q.1 - py);
    let len2 = dx * dx + dy * dy;
    let t = ((-px * dx - py * dy) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (px + t * dx, py + t * dy);
    (cx * cx + cy * cy).sqrt()
}

/// Square-cell grid: cell k is centered at ((ix+½)h, (iy+½)h).
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub h: f64,
    pub cells: Vec<(i64, i64)>,
    pub centers: Vec<Point>,
    index: HashMap<(i64, i64), u32>,
    reflect_x: Vec<u32>,
    reflect_y: Vec<u32>,
    rows: Vec<(i64, Vec<u32>)>,
    cols: Vec<(i64, Vec<u32>)>,
}

impl CellGrid {
    fn from_cells(h: f64, mut cells: Vec<(i64, i64)>) -> Self {
        cells.sort_unstable_by_key(|&(ix, iy)| (iy, ix));
        let centers = cells
            .iter()
            .map(|&(ix, iy)| [(ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h])
            .collect();
        let index: HashMap<_, _> = cells
            .iter()
            .enumerate()
            .map(|(k, &c)| (c, k as u32))
            .collect();
        let reflect_x = cells
            .iter()
            .map(|&(ix, iy)| *index.get(&(-1 - ix, iy)).expect("grid closed under x-reflection"))
            .collect();
        let reflect_y = cells
            .iter()
            .map(|&(ix, iy)| *index.get(&(ix, -1 - iy)).expect("grid closed under y-reflection"))
            .collect();
        let mut rows: Vec<(i64, Vec<u32>)> = Vec::new();
        for (k, &(ix, iy)) in cells.iter().enumerate() {
            match rows.last_mut() {
                Some((riy, v)) if *riy == iy => v.push(k as u32),
                _ => rows.push((iy, vec![k as u32])),
            }
            let _ = ix;
        }
        let mut cols_map: HashMap<i64, Vec<u32>> = HashMap::new();
        for (k, &(ix, _)) in cells.iter().enumerate() {
            cols_map.entry(ix).or_default().push(k as u32);
        }
        let mut cols: Vec<_> = cols_map.into_iter().collect();
        cols.sort_unstable_by_key(|&(ix, _)| ix);
        // columns keep increasing iy order because cells were sorted by (iy, ix)
        Self { h, cells, centers, index, reflect_x, reflect_y, rows, cols }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell mass h².
    pub fn mass(&self) -> f64 {
        self.h * self.h
    }

    pub fn cell_index(&self, ix: i64, iy: i64) -> Option<usize> {
        self.index.get(&(ix, iy)).map(|&k| k as usize)
    }

    pub fn reflect_x(&self, k: usize) -> usize {
        self.reflect_x[k] as usize
    }

    pub fn reflect_y(&self, k: usize) -> usize {
        self.reflect_y[k] as usize
    }

    /// Grid lines parallel to the x-axis: (iy, cell indices sorted by ix).
    pub fn rows(&self) -> &[(i64, Vec<u32>)] {
        &self.rows
    }

    /// Grid lines parallel to the y-axis: (ix, cell indices sorted by iy).
    pub fn cols(&self) -> &[(i64, Vec<u32>)] {
        &self.cols
    }

    /// Index of the cell whose center is nearest to p.
    pub fn nearest_cell(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in self.centers.iter().enumerate() {
            let d = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    /// Cell indices whose centers lie in the closed disk B(center, radius).
    pub fn cells_in_disk(&self, center: Point, radius: f64) -> Vec<usize> {
        self.centers
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                (c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2) <= radius * radius
            })
            .map(|(k, _)| k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn contains_examples() {
        let rect = Domain::rectangle(2.0, 1.0).unwrap();
        assert!(rect.contains([1.9, 0.9]));
        assert!(!rect.contains([2.0, 0.0]));
        let ell = Domain::ellipse(2.0, 1.0).unwrap();
        assert!(!ell.contains([2.0, 0.0])); // open set
        assert!(ell.contains([1.9, 0.1]));
        let dia = Domain::diamond(2.0, 1.0).unwrap();
        assert!(!dia.contains([1.0, 0.5])); // on the edge
        assert!(dia.contains([1.0, 0.49]));
    }

    #[test]
    fn inradius_examples() {
        assert_relative_eq!(Domain::rectangle(2.0, 1.0).unwrap().inradius(), 1.0);
        assert_relative_eq!(Domain::ellipse(2.0, 1.0).unwrap().inradius(), 1.0);
        assert_relative_eq!(
            Domain::diamond(2.0, 1.0).unwrap().inradius(),
            2.0 / 5f64.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(Domain::stadium(3.0, 1.0).unwrap().inradius(), 1.0);
    }

    #[test]
    fn diameter_examples() {
        assert_relative_eq!(
            Domain::rectangle(2.0, 1.0).unwrap().diameter(),
            2.0 * 5f64.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(Domain::ellipse(2.0, 1.0).unwrap().diameter(), 4.0);
    }

    #[test]
    fn mesh_unit_square_h_half_has_16_cells() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        let g = d.mesh(0.5).unwrap();
        assert_eq!(g.len(), 16);
        // symmetric under both reflections
        for k in 0..g.len() {
            let rx = g.reflect_x(k);
            assert_relative_eq!(g.centers[rx][0], -g.centers[k][0]);
            assert_relative_eq!(g.centers[rx][1], g.centers[k][1]);
        }
    }

    #[test]
    fn mesh_scaling_is_exact() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let g1 = d.mesh(0.125).unwrap();
        let d2 = Domain::ellipse(4.0, 2.0).unwrap();
        let g2 = d2.mesh(0.25).unwrap();
        assert_eq!(g1.len(), g2.len());
        for k in 0..g1.len() {
            assert_eq!(g1.cells[k], g2.cells[k]);
            assert_eq!(2.0 * g1.centers[k][0], g2.centers[k][0]);
            assert_eq!(2.0 * g1.centers[k][1], g2.centers[k][1]);
        }
    }

    #[test]
    fn mesh_area_converges() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let exact = std::f64::consts::PI * 2.0;
        let mut errs = Vec::new();
        for &h in &[0.2, 0.1, 0.05] {
            let g = d.mesh(h).unwrap();
            let area = g.len() as f64 * h * h;
            errs.push((area - exact).abs() / exact);
        }
        // trend: refinement shrinks the boundary error
        assert!(errs[2] < errs[0]);
        assert!(errs[2] < 0.02);
    }

    #[test]
    fn table_profile_validation() {
        // valid: diamond-like table
        let t = Domain::table(2.0, 1.0, vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)]);
        assert!(t.is_ok());
        // nonconcave rejected
        let t = Domain::table(2.0, 1.0, vec![(0.0, 1.0), (1.0, 0.2), (2.0, 0.0)]);
        assert!(t.is_err());
        // increasing rejected
        let t = Domain::table(2.0, 1.0, vec![(0.0, 1.0), (1.0, 1.1), (2.0, 0.0)]);
        assert!(t.is_err());
    }

    #[test]
    fn domain_config_schema_is_flat() {
        // {type, a, b, points?} round-trips
        let d: Domain = serde_json::from_str(r#"{"type":"ellipse","a":2.0,"b":1.0}"#).unwrap();
        assert_eq!(d, Domain::ellipse(2.0, 1.0).unwrap());
        let d: Domain = serde_json::from_str(
            r#"{"type":"table","a":2.0,"b":1.0,"points":[[0.0,1.0],[1.0,0.5],[2.0,0.0]]}"#,
        )
        .unwrap();
        assert!(matches!(d.profile, Profile::Table { .. }));
        let text = serde_json::to_string(&Domain::diamond(3.0, 1.0).unwrap()).unwrap();
        assert!(text.contains("\"type\":\"diamond\""), "{text}");
        let back: Domain = serde_json::from_str(&text).unwrap();
        assert_eq!(back, Domain::diamond(3.0, 1.0).unwrap());
    }

    #[test]
    fn rows_and_cols_are_grid_lines() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        let g = d.mesh(0.25).unwrap();
        assert_eq!(g.rows().len(), 8);
        assert_eq!(g.cols().len(), 8);
        for (_, row) in g.rows() {
            assert_eq!(row.len(), 8);
            for w in row.windows(2) {
                assert!(g.cells[w[0] as usize].0 < g.cells[w[1] as usize].0);
            }
        }
    }
}
