//! Funk geometry on a convex polytope: I(x, H) = log dist(x, H) over the
//! supporting hyperplanes H, which for a polytope are exactly the facets, so
//! the defining supremum is an exact finite maximum.

use crate::bifunctional::Bifunctional;
use crate::engine::SearchConfig;
use crate::error::{Error, Result};
use crate::point::{Domain, Point};

#[derive(Debug, Clone)]
pub struct Facet {
    /// Unit outward normal.
    pub normal: Vec<f64>,
    /// Offset c with <normal, v> <= c on the polytope.
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexPolytope {
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
}

impl ConvexPolytope {
    /// Builds the polytope from a vertex cloud. Planar only: the hull is the
    /// monotone chain and facets are the hull edges.
    pub fn from_vertices(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points.iter().any(|p| p.len() != 2 || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::DegeneratePolytope("malformed vertex".into()));
        }
        let hull = convex_hull_2d(&points);
        if hull.len() < 3 {
            return Err(Error::DegeneratePolytope(
                "need at least three non-collinear vertices".into(),
            ));
        }
        let n = hull.len();
        let centroid = [
            hull.iter().map(|p| p[0]).sum::<f64>() / n as f64,
            hull.iter().map(|p| p[1]).sum::<f64>() / n as f64,
        ];
        let mut facets = Vec::with_capacity(n);
        for k in 0..n {
            let a = &hull[k];
            let b = &hull[(k + 1) % n];
            let edge = [b[0] - a[0], b[1] - a[1]];
            let len = (edge[0] * edge[0] + edge[1] * edge[1]).sqrt();
            if len == 0.0 {
                return Err(Error::DegeneratePolytope("zero-length edge".into()));
            }
            // Outward normal for a counterclockwise hull.
            let mut normal = vec![edge[1] / len, -edge[0] / len];
            let mut offset = normal[0] * a[0] + normal[1] * a[1];
            if normal[0] * centroid[0] + normal[1] * centroid[1] > offset {
                normal = vec![-normal[0], -normal[1]];
                offset = -offset;
            }
            facets.push(Facet { normal, offset });
        }
        Ok(ConvexPolytope {
            vertices: hull,
            facets,
        })
    }

    /// Parses a plain-text vertex list, one whitespace-separated vector per
    /// line; empty lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut coords = Vec::new();
            for (col, tok) in trimmed.split_whitespace().enumerate() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    column: col + 1,
                    message: format!("expected a decimal, got '{tok}'"),
                })?;
                coords.push(v);
            }
            points.push(coords);
        }
        Self::from_vertices(points)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Signed distance to facet k hyperplane; positive inside.
    pub fn facet_distance(&self, x: &[f64], k: usize) -> f64 {
        let f = &self.facets[k];
        f.offset - (f.normal[0] * x[0] + f.normal[1] * x[1])
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        (0..self.facets.len()).all(|k| self.facet_distance(x, k) > 1e-12)
    }

    /// Exit point of the ray from x through y: the first facet crossing at
    /// parameter s >= 1 along x + s (y - x).
    pub fn ray_exit(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let dir = [y[0] - x[0], y[1] - x[1]];
        let mut best: Option<f64> = None;
        for f in &self.facets {
            let dn = f.normal[0] * dir[0] + f.normal[1] * dir[1];
            if dn <= 0.0 {
                continue;
            }
            let s = (f.offset - (f.normal[0] * x[0] + f.normal[1] * x[1])) / dn;
            if s > 0.0 && best.map(|b| s < b).unwrap_or(true) {
                best = Some(s);
            }
        }
        let s = best.ok_or_else(|| {
            Error::DegeneratePolytope("ray does not leave the polytope".into())
        })?;
        Ok(vec![x[0] + s * dir[0], x[1] + s * dir[1]])
    }
}

fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if pts.len() < 3 {
        return pts.iter().map(|(x, y)| vec![*x, *y]).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| vec![x, y]).collect()
}

pub struct FunkPolytope {
    poly: ConvexPolytope,
}

pub fn funk_polytope(poly: ConvexPolytope) -> FunkPolytope {
    FunkPolytope { poly }
}

impl FunkPolytope {
    pub fn polytope(&self) -> &ConvexPolytope {
        &self.poly
    }

    /// Closed-form Funk distance by ray casting: F(x, y) = log(|x-a|/|y-a|)
    /// with a the exit point of the ray from x through y.
    pub fn funk_oracle(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        let a = self.poly.ray_exit(x, y)?;
        let dxa = ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2)).sqrt();
        let dya = ((y[0] - a[0]).powi(2) + (y[1] - a[1]).powi(2)).sqrt();
        Ok((dxa / dya).ln())
    }
}

impl Bifunctional for FunkPolytope {
    fn name(&self) -> &str {
        "funk"
    }

    fn m_domain(&self) -> Domain {
        Domain::PolytopeInterior { dim: 2 }
    }

    fn n_domain(&self) -> Domain {
        Domain::FacetIndex {
            count: self.poly.facets.len(),
        }
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let x = m.as_vector()?;
        let k = n.as_facet()?;
        if k >= self.poly.facets.len() {
            return Err(Error::InvalidPoint(format!("facet index {k} out of range")));
        }
        if !self.poly.contains_interior(x) {
            return Err(Error::OutsidePolytope(m.describe()));
        }
        Ok(self.poly.facet_distance(x, k).ln())
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        let (x, y) = (x.as_vector().ok()?, y.as_vector().ok()?);
        self.funk_oracle(x, y).ok()
    }

    fn witness_grid(&self, _x: &Point, _y: &Point, _cfg: &SearchConfig) -> Vec<Point> {
        // N is the finite facet set, so the grid is all of N and the
        // witness maximum is the exact supremum.
        (0..self.poly.facets.len()).map(Point::Facet).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{distance, SearchConfig};

    fn unit_square() -> ConvexPolytope {
        ConvexPolytope::from_vertices(vec![
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn square_has_four_facets() {
        let p = unit_square();
        assert_eq!(p.facets().len(), 4);
        assert!(p.contains_interior(&[0.0, 0.0]));
        assert!(!p.contains_interior(&[1.5, 0.0]));
    }

    #[test]
    fn square_funk_log2_example() {
        let f = funk_polytope(unit_square());
        let v = f.funk_oracle(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-12);
        // reverse order exits through the opposite facet
        let r = f.funk_oracle(&[0.5, 0.0], &[0.0, 0.0]).unwrap();
        assert!((r - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(f.funk_oracle(&[0.3, 0.3], &[0.3, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn facet_supremum_matches_ray_oracle() {
        let f = funk_polytope(unit_square());
        let est = distance(
            &f,
            &Point::vector([0.0, 0.0]),
            &Point::vector([0.5, 0.0]),
            &SearchConfig::default(),
        )
        .unwrap();
        assert!((est.lower_bound - 2.0f64.ln()).abs() < 1e-12);
        assert_eq!(est.oracle_value, Some(est.oracle_value.unwrap()));
        assert!((est.oracle_value.unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn refinement_unsupported_on_facets() {
        use crate::bifunctional::{Provenance, WitnessSet};
        use crate::engine::refine_witnesses;
        let f = funk_polytope(unit_square());
        let w = WitnessSet::new(
            (0..4).map(Point::Facet).collect(),
            Provenance::User,
        )
        .unwrap();
        let out = refine_witnesses(
            &f,
            &Point::vector([0.0, 0.0]),
            &Point::vector([0.5, 0.0]),
            &w,
            &SearchConfig::default(),
        )
        .unwrap();
        assert!(!out.supported);
        assert_eq!(out.witnesses.len(), 4);
    }

    #[test]
    fn eval_outside_interior_errors() {
        let f = funk_polytope(unit_square());
        let err = f
            .eval(&Point::vector([2.0, 0.0]), &Point::Facet(0))
            .unwrap_err();
        assert!(matches!(err, Error::OutsidePolytope(_)));
    }

    #[test]
    fn text_loader_roundtrip() {
        let p = ConvexPolytope::from_text("# square\n-1 -1\n1 -1\n1 1\n-1 1\n").unwrap();
        assert_eq!(p.facets().len(), 4);
        let err = ConvexPolytope::from_text("0 0\n1 bad\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 2, .. }));
    }

    #[test]
    fn dimension_gate() {
        let err = ConvexPolytope::from_vertices(vec![vec![0.0, 0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDimension(3)));
    }
}
