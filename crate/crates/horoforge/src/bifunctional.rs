//! The bifunctional abstraction and point-separation / quotient / Lipschitz
//! diagnostics.
//!
//! A bifunctional is a real-valued map I on a product M x N. Everything else
//! in this crate — distances, horofunctions, translation lengths — is derived
//! from evaluations of I, so the trait below is deliberately small: evaluate,
//! describe the two domains, optionally provide a closed-form distance oracle
//! on M, and optionally expose N as a searchable parameter space so the
//! supremum defining d_{I,M} can be refined numerically.

use crate::engine::SearchConfig;
use crate::error::{Error, Result};
use crate::point::{Domain, Point};

pub trait Bifunctional: Send + Sync {
    fn name(&self) -> &str;

    fn m_domain(&self) -> Domain;

    fn n_domain(&self) -> Domain;

    /// Raw evaluation I(m, n). Implementations may assume valid points;
    /// [`evaluate`] is the validated entry point.
    fn eval(&self, m: &Point, n: &Point) -> Result<f64>;

    /// Closed-form distance on M, when the geometry has one.
    fn oracle_distance(&self, _x: &Point, _y: &Point) -> Option<f64> {
        None
    }

    /// Initial witness candidates for estimating d(x, y). Geometries build
    /// these so that near-optimal witnesses are present by construction.
    fn witness_grid(&self, x: &Point, y: &Point, cfg: &SearchConfig) -> Vec<Point>;

    /// Coordinates of a witness in the geometry's search parametrization,
    /// or None when N is discrete and refinement is unsupported.
    fn witness_params(&self, _n: &Point) -> Option<Vec<f64>> {
        None
    }

    /// Inverse of [`witness_params`]; None when the parameters leave the
    /// valid region (the search treats that as an infeasible probe).
    fn witness_from_params(&self, _params: &[f64]) -> Option<Point> {
        None
    }
}

/// Validated evaluation of I(m, n).
pub fn evaluate(i: &dyn Bifunctional, m: &Point, n: &Point) -> Result<f64> {
    i.m_domain().validate(m).map_err(|e| tag_side(e, "M"))?;
    i.n_domain().validate(n).map_err(|e| tag_side(e, "N"))?;
    i.eval(m, n)
}

fn tag_side(e: Error, side: &'static str) -> Error {
    match e {
        Error::DomainMismatch { expected, got, .. } => Error::DomainMismatch {
            side,
            expected,
            got,
        },
        other => other,
    }
}

/// Finite subset of N used to lower-bound the supremum defining d_{I,M}.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Provenance {
    User,
    Grid,
    Refined,
}

#[derive(Debug, Clone)]
pub struct WitnessSet {
    points: Vec<Point>,
    provenance: Provenance,
}

impl WitnessSet {
    pub fn new(points: Vec<Point>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyWitnessSet);
        }
        Ok(WitnessSet { points, provenance })
    }

    pub fn user(points: Vec<Point>) -> Result<Self> {
        Self::new(points, Provenance::User)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Separation evidence for one ordered pair of sample points.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairSeparation {
    pub x_index: usize,
    pub y_index: usize,
    /// Some witness gives I(x,z) - I(y,z) > tol.
    pub condition1: bool,
    /// Index of the witness realizing the best margin.
    pub best_witness: usize,
    pub best_margin: f64,
    /// The witness-restricted slice functions differ by a non-constant
    /// amount beyond tol.
    pub condition2: bool,
    pub nonconstancy: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeparationReport {
    pub pairs: Vec<PairSeparation>,
    pub all_condition1: bool,
    pub all_condition2: bool,
    /// A pass is evidence only; a fail certifies a counterexample only for
    /// the witness-restricted problem. Always true.
    pub restricted_certificate: bool,
    pub witness_count: usize,
}

/// Checks both separation conditions on a finite sample against a finite
/// witness set.
pub fn check_separation(
    i: &dyn Bifunctional,
    sample_m: &[Point],
    witnesses: &WitnessSet,
    tol: f64,
) -> Result<SeparationReport> {
    if sample_m.len() < 2 {
        return Err(Error::InvalidPoint(
            "separation check needs at least two sample points".into(),
        ));
    }
    let mut pairs = Vec::new();
    for (xi, x) in sample_m.iter().enumerate() {
        for (yi, y) in sample_m.iter().enumerate() {
            if xi == yi {
                continue;
            }
            let diffs = witness_differences(i, x, y, witnesses)?;
            let (best_witness, best_margin) = argmax(&diffs);
            let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
            let nonconstancy = best_margin - lo;
            pairs.push(PairSeparation {
                x_index: xi,
                y_index: yi,
                condition1: best_margin > tol,
                best_witness,
                best_margin,
                condition2: nonconstancy > tol,
                nonconstancy,
            });
        }
    }
    let all_condition1 = pairs.iter().all(|p| p.condition1);
    let all_condition2 = pairs.iter().all(|p| p.condition2);
    Ok(SeparationReport {
        pairs,
        all_condition1,
        all_condition2,
        restricted_certificate: true,
        witness_count: witnesses.len(),
    })
}

/// Groups sample points whose slice functions differ by a constant on the
/// witness set, up to tol. The best-fit constant is the mean difference.
pub fn quotient_points(
    i: &dyn Bifunctional,
    sample_m: &[Point],
    witnesses: &WitnessSet,
    tol: f64,
) -> Result<Vec<Vec<usize>>> {
    let n = sample_m.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for xi in 0..n {
        for yi in (xi + 1)..n {
            let diffs = witness_differences(i, &sample_m[xi], &sample_m[yi], witnesses)?;
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let dev = diffs
                .iter()
                .map(|d| (d - mean).abs())
                .fold(0.0_f64, f64::max);
            if dev <= tol {
                let (ra, rb) = (find(&mut parent, xi), find(&mut parent, yi));
                if ra != rb {
                    parent[rb.max(ra)] = rb.min(ra);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of_root = std::collections::BTreeMap::new();
    for idx in 0..n {
        let r = find(&mut parent, idx);
        let ci = *class_of_root.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[ci].push(idx);
    }
    Ok(classes)
}

/// Worst violation of the 1-Lipschitz condition |I(x,z)-I(y,z)| <= d_sym(x,y)
/// over the given pairs and witnesses. Nonpositive means the condition holds.
pub fn lipschitz_defect(
    i: &dyn Bifunctional,
    d: &dyn Fn(&Point, &Point) -> Result<f64>,
    pairs: &[(Point, Point)],
    witnesses: &WitnessSet,
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in pairs {
        let dsym = d(x, y)?.max(d(y, x)?);
        if !dsym.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "distance not finite on pair ({}, {})",
                x.describe(),
                y.describe()
            )));
        }
        for z in witnesses.points() {
            let gap = (evaluate(i, x, z)? - evaluate(i, y, z)?).abs() - dsym;
            if gap > worst {
                worst = gap;
            }
        }
    }
    Ok(worst)
}

fn witness_differences(
    i: &dyn Bifunctional,
    x: &Point,
    y: &Point,
    witnesses: &WitnessSet,
) -> Result<Vec<f64>> {
    witnesses
        .points()
        .iter()
        .map(|z| Ok(evaluate(i, x, z)? - evaluate(i, y, z)?))
        .collect()
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.iter().enumerate() {
        if *v > best.1 {
            best = (k, *v);
        }
    }
    best
}

type EvalFn = Box<dyn Fn(&Point, &Point) -> Result<f64> + Send + Sync>;
type OracleFn = Box<dyn Fn(&Point, &Point) -> Option<f64> + Send + Sync>;
type GridFn = Box<dyn Fn(&Point, &Point, &SearchConfig) -> Vec<Point> + Send + Sync>;
type ToParamsFn = Box<dyn Fn(&Point) -> Option<Vec<f64>> + Send + Sync>;
type FromParamsFn = Box<dyn Fn(&[f64]) -> Option<Point> + Send + Sync>;

/// User-supplied bifunctional assembled from closures.
pub struct CustomBifunctional {
    name: String,
    m_domain: Domain,
    n_domain: Domain,
    eval: EvalFn,
    oracle: Option<OracleFn>,
    grid: Option<GridFn>,
    to_params: Option<ToParamsFn>,
    from_params: Option<FromParamsFn>,
}

impl CustomBifunctional {
    pub fn new(
        name: impl Into<String>,
        m_domain: Domain,
        n_domain: Domain,
        eval: impl Fn(&Point, &Point) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        CustomBifunctional {
            name: name.into(),
            m_domain,
            n_domain,
            eval: Box::new(eval),
            oracle: None,
            grid: None,
            to_params: None,
            from_params: None,
        }
    }

    pub fn with_oracle(
        mut self,
        oracle: impl Fn(&Point, &Point) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        self.oracle = Some(Box::new(oracle));
        self
    }

    pub fn with_witness_grid(
        mut self,
        grid: impl Fn(&Point, &Point, &SearchConfig) -> Vec<Point> + Send + Sync + 'static,
    ) -> Self {
        self.grid = Some(Box::new(grid));
        self
    }

    pub fn with_parametrization(
        mut self,
        to_params: impl Fn(&Point) -> Option<Vec<f64>> + Send + Sync + 'static,
        from_params: impl Fn(&[f64]) -> Option<Point> + Send + Sync + 'static,
    ) -> Self {
        self.to_params = Some(Box::new(to_params));
        self.from_params = Some(Box::new(from_params));
        self
    }
}

impl Bifunctional for CustomBifunctional {
    fn name(&self) -> &str {
        &self.name
    }

    fn m_domain(&self) -> Domain {
        self.m_domain.clone()
    }

    fn n_domain(&self) -> Domain {
        self.n_domain.clone()
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        (self.eval)(m, n)
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        self.oracle.as_ref().and_then(|f| f(x, y))
    }

    fn witness_grid(&self, x: &Point, y: &Point, cfg: &SearchConfig) -> Vec<Point> {
        match &self.grid {
            Some(f) => f(x, y, cfg),
            None => Vec::new(),
        }
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        self.to_params.as_ref().and_then(|f| f(n))
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        self.from_params.as_ref().and_then(|f| f(params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometries::euclidean::euclidean_inner;
    use crate::geometries::minsky::MinskyHalfPlane;

    #[test]
    fn evaluate_euclidean_unit_direction() {
        let i = euclidean_inner(2).unwrap();
        let v = evaluate(&i, &Point::vector([3.0, 4.0]), &Point::vector([0.0, 1.0])).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn evaluate_minsky_at_origin_parameter() {
        let i = MinskyHalfPlane;
        let v = evaluate(&i, &Point::half_plane(0.0, 1.0), &Point::Param(0.0)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn evaluate_is_pure() {
        let i = MinskyHalfPlane;
        let m = Point::half_plane(0.7, 2.3);
        let n = Point::Param(1.9);
        let a = evaluate(&i, &m, &n).unwrap();
        let b = evaluate(&i, &m, &n).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn evaluate_rejects_domain_mismatch() {
        let i = euclidean_inner(2).unwrap();
        let err = evaluate(&i, &Point::Param(1.0), &Point::vector([1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DomainMismatch { side: "M", .. }));
    }

    #[test]
    fn separation_passes_on_euclidean_axes() {
        let i = euclidean_inner(2).unwrap();
        let sample = vec![Point::vector([0.0, 0.0]), Point::vector([1.0, 0.0])];
        let w = WitnessSet::user(vec![
            Point::vector([1.0, 0.0]),
            Point::vector([0.0, 1.0]),
            Point::vector([-1.0, 0.0]),
            Point::vector([0.0, -1.0]),
        ])
        .unwrap();
        let rep = check_separation(&i, &sample, &w, 1e-9).unwrap();
        assert!(rep.all_condition1);
        assert!(rep.all_condition2);
        assert!(rep.restricted_certificate);
    }

    #[test]
    fn separation_fails_on_duplicate_point() {
        let i = euclidean_inner(2).unwrap();
        let x = Point::vector([0.5, -0.25]);
        let sample = vec![x.clone(), x];
        let w = WitnessSet::user(vec![Point::vector([1.0, 0.0]), Point::vector([0.0, 1.0])])
            .unwrap();
        let rep = check_separation(&i, &sample, &w, 1e-9).unwrap();
        assert!(!rep.all_condition1);
        assert!(rep.pairs.iter().all(|p| p.best_margin == 0.0));
    }

    #[test]
    fn quotient_splits_distinct_euclidean_points() {
        let i = euclidean_inner(2).unwrap();
        let sample = vec![Point::vector([0.0, 0.0]), Point::vector([1.0, 0.0])];
        let w = WitnessSet::user(vec![Point::vector([1.0, 0.0]), Point::vector([0.0, 1.0])])
            .unwrap();
        let classes = quotient_points(&i, &sample, &w, 1e-9).unwrap();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn quotient_collapses_constant_first_argument() {
        let i = CustomBifunctional::new(
            "constant-in-m",
            Domain::RealVector { dim: 1 },
            Domain::RealParam,
            |_, n| Ok(n.as_param()?.sin()),
        );
        let sample = vec![
            Point::vector([0.0]),
            Point::vector([1.0]),
            Point::vector([-3.0]),
        ];
        let w = WitnessSet::user(vec![Point::Param(0.0), Point::Param(1.0), Point::Param(2.0)])
            .unwrap();
        let classes = quotient_points(&i, &sample, &w, 1e-12).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0], vec![0, 1, 2]);
    }

    #[test]
    fn quotient_merges_duplicate_minsky_encodings() {
        let i = MinskyHalfPlane;
        let sample = vec![Point::half_plane(0.0, 1.0), Point::half_plane(0.0, 1.0)];
        let w = WitnessSet::user(vec![Point::Param(0.0), Point::Param(2.0)]).unwrap();
        let classes = quotient_points(&i, &sample, &w, 1e-12).unwrap();
        assert_eq!(classes.len(), 1);
    }

    #[test]
    fn self_difference_is_zero_on_any_witness_set() {
        let i = MinskyHalfPlane;
        let x = Point::half_plane(1.3, 0.4);
        let w = WitnessSet::user((0..7).map(|k| Point::Param(k as f64 - 3.0)).collect()).unwrap();
        let diffs = witness_differences(&i, &x, &x, &w).unwrap();
        assert!(diffs.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn lipschitz_defect_single_pair_self() {
        let i = euclidean_inner(2).unwrap();
        let x = Point::vector([0.3, 0.4]);
        let pairs = vec![(x.clone(), x)];
        let w = WitnessSet::user(vec![Point::vector([1.0, 0.0])]).unwrap();
        let d = |a: &Point, b: &Point| {
            let (a, b) = (a.as_vector()?, b.as_vector()?);
            Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
        };
        let defect = lipschitz_defect(&i, &d, &pairs, &w).unwrap();
        assert_eq!(defect, 0.0);
    }
}
