//! Flat-torus model of Teichmüller space: marked flat structures are points
//! tau of the upper half plane, curves are slopes (p, q), and currents are
//! finitely supported weighted slope sets.
//!
//! Fixed coordinate conventions, selected once by the invariance property
//! suite and then frozen:
//!
//! * flat length of a slope on the unit-area torus:
//!   `len_tau(p, q) = |p + q tau| / sqrt(Im tau)`;
//! * `A = [[a, b], [c, d]]` in SL(2, Z) acts on tau by the Möbius rule
//!   `tau -> (a tau + b) / (c tau + d)` and on slope vectors by
//!   `(p, q) -> (a p - b q, -c p + d q)`.
//!
//! Under this pair `len`, `Ext` and the intersection form are all invariant
//! under the diagonal action; integer cross products are preserved exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::bifunctional::Bifunctional;
use crate::dynamics::GroupElement;
use crate::engine::SearchConfig;
use crate::error::{Error, Result};
use crate::geometries::liouville::liouville_discretize;
use crate::geometries::minsky::hyperbolic_distance;
use crate::point::{Domain, Point};

/// Spec floor for the imaginary part of a torus modulus.
pub const IM_FLOOR: f64 = 1e-12;

/// Marked flat torus, encoded by its modulus in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    tau: Complex64,
}

impl TorusPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidPoint("non-finite modulus".into()));
        }
        if im < IM_FLOOR {
            return Err(Error::InvalidPoint(format!(
                "Im(tau) = {im} below the floor {IM_FLOOR}"
            )));
        }
        Ok(TorusPoint {
            tau: Complex64::new(re, im),
        })
    }

    pub fn from_point(p: &Point) -> Result<Self> {
        let z = p.as_half_plane()?;
        TorusPoint::new(z.re, z.im)
    }

    pub fn to_point(self) -> Point {
        Point::HalfPlane(self.tau)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeAtom {
    pub p: f64,
    pub q: f64,
    pub w: f64,
}

/// Finitely supported weighted set of slopes; the desk-scale stand-in for a
/// geodesic current. Atoms with equal direction are merged (weights rescale
/// by the length ratio, so ((2,0), w) folds into ((1,0), 2w)) and the sign is
/// canonicalized to q > 0 or (q = 0, p > 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeCurrent {
    atoms: Vec<SlopeAtom>,
}

impl SlopeCurrent {
    pub fn new(atoms: Vec<(f64, f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPoint("current needs at least one atom".into()));
        }
        let mut merged: Vec<SlopeAtom> = Vec::new();
        for (p, q, w) in atoms {
            if !(p.is_finite() && q.is_finite() && w.is_finite()) {
                return Err(Error::InvalidPoint("non-finite atom".into()));
            }
            if p == 0.0 && q == 0.0 {
                return Err(Error::InvalidPoint("slope (0, 0) is not allowed".into()));
            }
            if w <= 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "weights must be strictly positive, got {w}"
                )));
            }
            let (p, q) = if q < 0.0 || (q == 0.0 && p < 0.0) {
                (-p, -q)
            } else {
                (p, q)
            };
            let mut absorbed = false;
            for a in merged.iter_mut() {
                if a.p * q - a.q * p == 0.0 && a.p * p + a.q * q > 0.0 {
                    let scale = (p * p + q * q).sqrt() / (a.p * a.p + a.q * a.q).sqrt();
                    a.w += w * scale;
                    absorbed = true;
                    break;
                }
            }
            if !absorbed {
                merged.push(SlopeAtom { p, q, w });
            }
        }
        merged.sort_by(|a, b| {
            let ka = (a.q.atan2(a.p), a.p.hypot(a.q));
            let kb = (b.q.atan2(b.p), b.p.hypot(b.q));
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(SlopeCurrent { atoms: merged })
    }

    pub fn single(p: f64, q: f64, w: f64) -> Result<Self> {
        SlopeCurrent::new(vec![(p, q, w)])
    }

    /// Weight-one current in the direction of angle theta.
    pub fn direction(theta: f64) -> Result<Self> {
        SlopeCurrent::single(theta.cos(), theta.sin(), 1.0)
    }

    pub fn atoms(&self) -> &[SlopeAtom] {
        &self.atoms
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SlopeCurrent::new(
            self.atoms
                .iter()
                .map(|a| (a.p, a.q, a.w * factor))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if a.p == 0.0 && a.q == 0.0 {
                return Err(Error::InvalidPoint("slope (0, 0) is not allowed".into()));
            }
            if a.w <= 0.0 || a.w.is_nan() {
                return Err(Error::InvalidPoint("weights must be strictly positive".into()));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("({},{}):{}", a.p, a.q, a.w))
            .collect();
        format!("current[{}]", parts.join(" "))
    }

    pub fn close_to(&self, other: &SlopeCurrent, tol: f64) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(other.atoms.iter()).all(|(a, b)| {
                (a.p - b.p).abs() <= tol && (a.q - b.q).abs() <= tol && (a.w - b.w).abs() <= tol
            })
    }
}

impl Serialize for SlopeCurrent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.atoms.len()))?;
        for a in &self.atoms {
            seq.serialize_element(&[a.p, a.q, a.w])?;
        }
        seq.end()
    }
}

/// Total flat length of the current on the unit-area torus tau.
pub fn torus_flat_length(tau: &TorusPoint, c: &SlopeCurrent) -> f64 {
    let t = tau.tau();
    let total: f64 = c
        .atoms
        .iter()
        .map(|a| a.w * Complex64::new(a.p + a.q * t.re, a.q * t.im).norm())
        .sum();
    total / t.im.sqrt()
}

/// Extremal length of the current: square of the total flat length. The flat
/// metric is extremal on the torus, for multi-slope currents as well; the
/// conformal-grid optimizer in the verification suite cross-checks this.
pub fn torus_extremal_length(tau: &TorusPoint, c: &SlopeCurrent) -> f64 {
    let l = torus_flat_length(tau, c);
    l * l
}

/// Geometric intersection number: the bilinear extension of the lattice
/// cross product |p q' - q p'|.
pub fn torus_intersection(c1: &SlopeCurrent, c2: &SlopeCurrent) -> f64 {
    let mut total = 0.0;
    for a in &c1.atoms {
        for b in &c2.atoms {
            total += a.w * b.w * (a.p * b.q - a.q * b.p).abs();
        }
    }
    total
}

/// sqrt(Ext_Z(alpha)) sqrt(Ext_Z(G)) - i(alpha, G) for a single-slope alpha;
/// nonnegative, with equality exactly when the pair is orthogonal in the
/// Z-frame.
pub fn minsky_inequality_gap(
    tau: &TorusPoint,
    alpha: &SlopeCurrent,
    g: &SlopeCurrent,
) -> Result<f64> {
    if alpha.atoms.len() != 1 {
        return Err(Error::InvalidPoint(
            "alpha must be a single-slope current".into(),
        ));
    }
    Ok(torus_flat_length(tau, alpha) * torus_flat_length(tau, g) - torus_intersection(alpha, g))
}

/// Flat length of the shortest closed geodesic: Lagrange-reduce the lattice
/// basis (1, tau) and enumerate the small coordinate window around it, which
/// always encloses the shortest vector.
pub fn torus_systole(tau: &TorusPoint) -> f64 {
    let t = tau.tau();
    let mut b1 = Complex64::new(1.0, 0.0);
    let mut b2 = t;
    for _ in 0..256 {
        if b1.norm_sqr() > b2.norm_sqr() {
            std::mem::swap(&mut b1, &mut b2);
        }
        let mu = ((b2 * b1.conj()).re / b1.norm_sqr()).round();
        b2 -= b1 * mu;
        if b2.norm_sqr() >= b1.norm_sqr() {
            break;
        }
    }
    let mut best = f64::INFINITY;
    for i in -2i32..=2 {
        for j in -2i32..=2 {
            if i == 0 && j == 0 {
                continue;
            }
            let v = b1 * (i as f64) + b2 * (j as f64);
            best = best.min(v.norm());
        }
    }
    best / t.im.sqrt()
}

pub type IntMatrix = [[i64; 2]; 2];

pub fn determinant(m: IntMatrix) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Möbius action of an integer matrix on the upper half plane.
pub fn mobius(m: IntMatrix, z: Complex64) -> Complex64 {
    let [[a, b], [c, d]] = m.map(|r| r.map(|x| x as f64));
    (z * a + b) / (z * c + d)
}

/// The slope-vector companion of [`mobius`]: (p, q) -> (a p - b q, -c p + d q).
pub fn slope_action(m: IntMatrix, p: f64, q: f64) -> (f64, f64) {
    let [[a, b], [c, d]] = m.map(|r| r.map(|x| x as f64));
    (a * p - b * q, -c * p + d * q)
}

fn apply_current(m: IntMatrix, c: &SlopeCurrent) -> Result<SlopeCurrent> {
    SlopeCurrent::new(
        c.atoms()
            .iter()
            .map(|a| {
                let (p, q) = slope_action(m, a.p, a.q);
                (p, q, a.w)
            })
            .collect(),
    )
}

fn matrix_inverse(m: IntMatrix) -> IntMatrix {
    let [[a, b], [c, d]] = m;
    [[d, -b], [-c, a]]
}

/// Mapping-class action of A in SL(2, Z). The returned element acts on
/// half-plane points by the Möbius rule and on slope currents by the frozen
/// linear rule, so one element serves every torus bifunctional.
pub fn sl2z_action(m: IntMatrix) -> Result<GroupElement> {
    let det = determinant(m);
    if det != 1 {
        return Err(Error::NotUnimodular(det));
    }
    let inv = matrix_inverse(m);
    let act = move |mat: IntMatrix, p: &Point| -> Result<Point> {
        match p {
            Point::HalfPlane(z) => Ok(Point::HalfPlane(mobius(mat, *z))),
            Point::Current(c) => Ok(Point::Current(apply_current(mat, c)?)),
            other => Err(Error::InvalidPoint(format!(
                "SL(2,Z) acts on moduli and currents, not {}",
                other.encoding_name()
            ))),
        }
    };
    let label = format!("[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1]);
    Ok(GroupElement::new(
        label,
        move |p| act(m, p),
        move |p| act(m, p),
        move |p| act(inv, p),
        move |p| act(inv, p),
    ))
}

/// Top eigenvalue of a hyperbolic element; log of it is the Teichmüller
/// translation length on the torus.
pub fn dilatation(m: IntMatrix) -> Option<f64> {
    let t = (m[0][0] + m[1][1]) as f64;
    if t.abs() <= 2.0 {
        return None;
    }
    let h = t.abs() / 2.0;
    Some(h + (h * h - 1.0).sqrt())
}

fn half_hyperbolic_oracle(x: &Point, y: &Point) -> Option<f64> {
    let (a, b) = (x.as_half_plane().ok()?, y.as_half_plane().ok()?);
    Some(0.5 * hyperbolic_distance(a, b))
}

fn direction_grid(count: usize) -> Vec<Point> {
    let count = count.max(8);
    (0..count)
        .map(|j| {
            let theta = std::f64::consts::PI * j as f64 / count as f64;
            Point::Current(SlopeCurrent::direction(theta).expect("unit direction"))
        })
        .collect()
}

fn single_atom_angle(n: &Point) -> Option<Vec<f64>> {
    let c = n.as_current().ok()?;
    match c.atoms() {
        [a] => Some(vec![a.q.atan2(a.p)]),
        _ => None,
    }
}

fn direction_from_params(params: &[f64]) -> Option<Point> {
    match params {
        [theta] if theta.is_finite() => {
            Some(Point::Current(SlopeCurrent::direction(*theta).ok()?))
        }
        _ => None,
    }
}

/// Which of the torus bifunctionals to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusKind {
    /// I(X, c) = (1/2) log Ext_X(c): the Teichmüller distance.
    E1,
    /// I(X, Z) = (1/2) log Ext_Z(L_X): the horofunction counterpart, with
    /// L_X discretized on the given number of directions.
    E2 { n_dirs: usize },
    /// I(X, c) = log of the flat length: a spectral distance.
    ThurstonLike,
}

pub fn make_torus_bifunctional(kind: TorusKind) -> Result<Box<dyn Bifunctional>> {
    Ok(match kind {
        TorusKind::E1 => Box::new(TorusExtremal),
        TorusKind::E2 { n_dirs } => Box::new(torus_e2(n_dirs)?),
        TorusKind::ThurstonLike => Box::new(TorusThurston),
    })
}

/// d_{E,1} data: I(X, c) = (1/2) log Ext_X(c) over direction currents. The
/// induced distance is the Teichmüller distance, (1/2) d_H on the torus.
pub struct TorusExtremal;

impl Bifunctional for TorusExtremal {
    fn name(&self) -> &str {
        "torus-e1"
    }

    fn m_domain(&self) -> Domain {
        Domain::UpperHalfPlane { im_floor: IM_FLOOR }
    }

    fn n_domain(&self) -> Domain {
        Domain::SlopeCurrents
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let x = TorusPoint::from_point(m)?;
        let c = n.as_current()?;
        Ok(0.5 * torus_extremal_length(&x, c).ln())
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        half_hyperbolic_oracle(x, y)
    }

    fn witness_grid(&self, _x: &Point, _y: &Point, cfg: &SearchConfig) -> Vec<Point> {
        direction_grid(cfg.initial_grid_size)
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        single_atom_angle(n)
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        direction_from_params(params)
    }
}

/// Spectral-distance data on the torus: I(X, c) = log of the flat length.
/// Same maximizing directions as d_{E,1}, hence the same (1/2) d_H oracle.
pub struct TorusThurston;

impl Bifunctional for TorusThurston {
    fn name(&self) -> &str {
        "torus-thurston"
    }

    fn m_domain(&self) -> Domain {
        Domain::UpperHalfPlane { im_floor: IM_FLOOR }
    }

    fn n_domain(&self) -> Domain {
        Domain::SlopeCurrents
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let x = TorusPoint::from_point(m)?;
        let c = n.as_current()?;
        Ok(torus_flat_length(&x, c).ln())
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        half_hyperbolic_oracle(x, y)
    }

    fn witness_grid(&self, _x: &Point, _y: &Point, cfg: &SearchConfig) -> Vec<Point> {
        direction_grid(cfg.initial_grid_size)
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        single_atom_angle(n)
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        direction_from_params(params)
    }
}

/// d_{E,2} data: the first argument enters as its discretized Liouville
/// current and the witness is the surface Z, I(X, Z) = (1/2) log Ext_Z(L_X).
/// No closed-form oracle; the Thurston-side lower bound is the contract.
pub struct TorusE2 {
    n_dirs: usize,
    cache: Mutex<HashMap<(u64, u64), Arc<SlopeCurrent>>>,
}

pub fn torus_e2(n_dirs: usize) -> Result<TorusE2> {
    if n_dirs < 8 {
        return Err(Error::Config("n_dirs must be at least 8".into()));
    }
    Ok(TorusE2 {
        n_dirs,
        cache: Mutex::new(HashMap::new()),
    })
}

impl TorusE2 {
    pub fn n_dirs(&self) -> usize {
        self.n_dirs
    }

    pub fn current_for(&self, x: &TorusPoint) -> Result<Arc<SlopeCurrent>> {
        let key = (x.tau().re.to_bits(), x.tau().im.to_bits());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let fit = liouville_discretize(x, self.n_dirs)?;
        let current = Arc::new(fit.current);
        self.cache
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&current));
        Ok(current)
    }
}

impl Bifunctional for TorusE2 {
    fn name(&self) -> &str {
        "torus-e2"
    }

    fn m_domain(&self) -> Domain {
        Domain::UpperHalfPlane { im_floor: IM_FLOOR }
    }

    fn n_domain(&self) -> Domain {
        Domain::UpperHalfPlane { im_floor: IM_FLOOR }
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let x = TorusPoint::from_point(m)?;
        let z = TorusPoint::from_point(n)?;
        let lx = self.current_for(&x)?;
        Ok(0.5 * torus_extremal_length(&z, &lx).ln())
    }

    fn witness_grid(&self, x: &Point, y: &Point, _cfg: &SearchConfig) -> Vec<Point> {
        // The sup is typically approached as Z degenerates toward a curve
        // class, so the net spreads log(Im Z) far beyond the fundamental
        // domain in both directions.
        let mut grid = Vec::new();
        for &re in &[-1.5, -0.75, 0.0, 0.75, 1.5] {
            for &lim in &[-6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0] {
                grid.push(Point::half_plane(re, f64::exp(lim)));
            }
        }
        for p in [x, y] {
            if let Ok(z) = p.as_half_plane() {
                grid.push(Point::HalfPlane(z));
            }
        }
        grid
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        let z = n.as_half_plane().ok()?;
        Some(vec![z.re, z.im.ln()])
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        match params {
            [re, lim] if re.is_finite() && lim.is_finite() => {
                let im = lim.exp();
                if im < IM_FLOOR || !im.is_finite() {
                    return None;
                }
                Some(Point::half_plane(*re, im))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(re: f64, im: f64) -> TorusPoint {
        TorusPoint::new(re, im).unwrap()
    }

    #[test]
    fn flat_length_reference_values() {
        let c = SlopeCurrent::single(1.0, 0.0, 1.0).unwrap();
        assert!((torus_flat_length(&tp(0.0, 1.0), &c) - 1.0).abs() < 1e-15);
        assert!((torus_flat_length(&tp(0.0, 2.0), &c) - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_length_is_weight_linear() {
        let c = SlopeCurrent::single(2.0, 3.0, 0.7).unwrap();
        let c2 = c.scaled(2.0).unwrap();
        let x = tp(0.3, 1.7);
        assert!((torus_flat_length(&x, &c2) - 2.0 * torus_flat_length(&x, &c)).abs() < 1e-12);
    }

    #[test]
    fn extremal_is_flat_squared_exactly() {
        let x = tp(-0.4, 0.9);
        let c = SlopeCurrent::new(vec![(1.0, 0.0, 1.0), (0.0, 1.0, 0.5), (2.0, 3.0, 0.25)])
            .unwrap();
        let l = torus_flat_length(&x, &c);
        assert_eq!(torus_extremal_length(&x, &c).to_bits(), (l * l).to_bits());
    }

    #[test]
    fn extremal_reference_values() {
        let e = torus_extremal_length(&tp(0.0, 1.0), &SlopeCurrent::single(1.0, 0.0, 1.0).unwrap());
        assert!((e - 1.0).abs() < 1e-15);
        let e2 =
            torus_extremal_length(&tp(0.0, 2.0), &SlopeCurrent::single(0.0, 1.0, 1.0).unwrap());
        assert!((e2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extremal_degree_two_homogeneity() {
        let x = tp(0.2, 1.3);
        let c = SlopeCurrent::new(vec![(1.0, 1.0, 1.0), (1.0, -1.0, 2.0)]).unwrap();
        let doubled = c.scaled(2.0).unwrap();
        let ratio = torus_extremal_length(&x, &doubled) / torus_extremal_length(&x, &c);
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn intersection_reference_values() {
        let h = SlopeCurrent::single(1.0, 0.0, 1.0).unwrap();
        let v = SlopeCurrent::single(0.0, 1.0, 1.0).unwrap();
        assert_eq!(torus_intersection(&h, &v), 1.0);
        assert_eq!(torus_intersection(&h, &h), 0.0);
    }

    #[test]
    fn intersection_is_bilinear_in_weights() {
        let a = SlopeCurrent::single(2.0, 1.0, 1.5).unwrap();
        let b = SlopeCurrent::single(1.0, 1.0, 2.0).unwrap();
        let a3 = a.scaled(3.0).unwrap();
        assert!((torus_intersection(&a3, &b) - 3.0 * torus_intersection(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn atoms_merge_by_direction() {
        let c = SlopeCurrent::new(vec![(1.0, 0.0, 1.0), (2.0, 0.0, 1.0), (-1.0, 0.0, 0.5)])
            .unwrap();
        assert_eq!(c.atoms().len(), 1);
        // (2,0,1) folds in as weight 2, (-1,0,0.5) as weight 0.5
        assert!((c.atoms()[0].w - 3.5).abs() < 1e-15);
    }

    #[test]
    fn current_rejects_invalid_atoms() {
        assert!(SlopeCurrent::new(vec![(0.0, 0.0, 1.0)]).is_err());
        assert!(SlopeCurrent::new(vec![(1.0, 0.0, 0.0)]).is_err());
        assert!(SlopeCurrent::new(vec![(1.0, 0.0, -2.0)]).is_err());
        assert!(SlopeCurrent::new(vec![]).is_err());
    }

    #[test]
    fn minsky_gap_orthogonal_equality() {
        let alpha = SlopeCurrent::single(1.0, 0.0, 1.0).unwrap();
        let g = SlopeCurrent::single(0.0, 1.0, 1.0).unwrap();
        let gap_i = minsky_inequality_gap(&tp(0.0, 1.0), &alpha, &g).unwrap();
        assert!(gap_i.abs() < 1e-15);
        let gap_2i = minsky_inequality_gap(&tp(0.0, 2.0), &alpha, &g).unwrap();
        assert!(gap_2i.abs() < 1e-15);
    }

    #[test]
    fn minsky_gap_strict_for_multicurves() {
        let alpha = SlopeCurrent::single(1.0, 0.0, 1.0).unwrap();
        let g = SlopeCurrent::new(vec![(0.0, 1.0, 1.0), (1.0, 1.0, 1.0)]).unwrap();
        let gap = minsky_inequality_gap(&tp(0.3, 1.4), &alpha, &g).unwrap();
        assert!(gap > 1e-6);
    }

    #[test]
    fn minsky_gap_requires_single_slope_alpha() {
        let alpha = SlopeCurrent::new(vec![(1.0, 0.0, 1.0), (0.0, 1.0, 1.0)]).unwrap();
        let g = SlopeCurrent::single(1.0, 1.0, 1.0).unwrap();
        assert!(minsky_inequality_gap(&tp(0.0, 1.0), &alpha, &g).is_err());
    }

    #[test]
    fn systole_reference_values() {
        assert!((torus_systole(&tp(0.0, 1.0)) - 1.0).abs() < 1e-14);
        assert!((torus_systole(&tp(0.0, 2.0)) - 1.0 / 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn systole_is_sl2z_invariant() {
        let m: IntMatrix = [[2, 1], [1, 1]];
        for (re, im) in [(0.0, 1.0), (0.3, 0.8), (-1.2, 2.5)] {
            let x = tp(re, im);
            let y = mobius(m, x.tau());
            let yp = TorusPoint::new(y.re, y.im).unwrap();
            assert!((torus_systole(&x) - torus_systole(&yp)).abs() < 1e-9);
        }
    }

    #[test]
    fn sl2z_rejects_non_unimodular() {
        assert!(matches!(
            sl2z_action([[2, 0], [0, 1]]),
            Err(Error::NotUnimodular(2))
        ));
    }

    #[test]
    fn sl2z_identity_and_parabolic() {
        let id = sl2z_action([[1, 0], [0, 1]]).unwrap();
        let z = Point::half_plane(0.3, 1.1);
        assert!(id.act_m(&z).unwrap().close_to(&z, 1e-15));
        // [[1,1],[0,1]] fixes Im(tau)
        let par = sl2z_action([[1, 1], [0, 1]]).unwrap();
        let moved = par.act_m(&z).unwrap().as_half_plane().unwrap();
        assert!((moved.im - 1.1).abs() < 1e-15);
        assert!((moved.re - 1.3).abs() < 1e-15);
    }

    #[test]
    fn invariance_of_lengths_under_frozen_convention() {
        let m: IntMatrix = [[2, 1], [1, 1]];
        let x = tp(0.37, 1.21);
        let y = mobius(m, x.tau());
        let yp = TorusPoint::new(y.re, y.im).unwrap();
        for (p, q) in [(1.0, 0.0), (0.0, 1.0), (3.0, -2.0), (0.6, 0.8)] {
            let c = SlopeCurrent::single(p, q, 1.0).unwrap();
            let (pp, qq) = slope_action(m, p, q);
            let gc = SlopeCurrent::single(pp, qq, 1.0).unwrap();
            let before = torus_extremal_length(&x, &c);
            let after = torus_extremal_length(&yp, &gc);
            assert!(
                (after / before - 1.0).abs() < 1e-12,
                "Ext not invariant for ({p},{q})"
            );
        }
    }

    #[test]
    fn intersection_invariance_is_exact_on_integer_slopes() {
        let m: IntMatrix = [[3, 2], [1, 1]];
        let c1 = SlopeCurrent::new(vec![(1.0, 0.0, 1.0), (2.0, 1.0, 2.0)]).unwrap();
        let c2 = SlopeCurrent::new(vec![(0.0, 1.0, 1.0), (1.0, -1.0, 3.0)]).unwrap();
        let g1 = apply_current(m, &c1).unwrap();
        let g2 = apply_current(m, &c2).unwrap();
        assert_eq!(torus_intersection(&g1, &g2), torus_intersection(&c1, &c2));
    }

    #[test]
    fn dilatation_values() {
        assert!((dilatation([[2, 1], [1, 1]]).unwrap() - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((dilatation([[3, 2], [1, 1]]).unwrap() - (2.0 + 3.0f64.sqrt())).abs() < 1e-15);
        assert!(dilatation([[1, 1], [0, 1]]).is_none());
    }

    #[test]
    fn e1_eval_reference() {
        let i = TorusExtremal;
        let v = i
            .eval(
                &Point::half_plane(0.0, 1.0),
                &Point::Current(SlopeCurrent::single(1.0, 0.0, 1.0).unwrap()),
            )
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn e2_is_deterministic_and_cached() {
        let i = torus_e2(16).unwrap();
        let x = Point::half_plane(0.0, 1.0);
        let z = Point::half_plane(0.2, 0.7);
        let a = i.eval(&x, &z).unwrap();
        let b = i.eval(&x, &z).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
