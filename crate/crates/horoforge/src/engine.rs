//! Computes d_{I,M}(x,y) = sup_z {I(x,z) - I(y,z)} as an exact maximum over a
//! finite witness set plus derivative-free refinement of the witnesses.
//!
//! Estimates are certified lower bounds: the reported value is always an
//! exact I-difference at the argmax witness, never an extrapolation. When the
//! geometry carries a closed-form oracle the gap to it is reported alongside.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bifunctional::{evaluate, Bifunctional, Provenance, WitnessSet};
use crate::error::{Error, Result};
use crate::point::Point;

/// Knobs for witness-grid construction and pattern-search refinement.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub initial_grid_size: usize,
    pub local_search_steps: usize,
    pub step_shrink: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            initial_grid_size: 64,
            local_search_steps: 240,
            step_shrink: 0.5,
            restarts: 2,
            seed: 0x5eed,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_grid_size == 0 || self.local_search_steps == 0 {
            return Err(Error::Config(
                "grid size and search steps must be positive".into(),
            ));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::Config("step_shrink must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A certified lower bound for d_{I,M}(x, y).
///
/// `lower_bound` equals I(x, argmax_witness) - I(y, argmax_witness) exactly.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceEstimate {
    pub lower_bound: f64,
    pub argmax_witness: Point,
    pub oracle_value: Option<f64>,
    pub refinement_iterations: usize,
    pub witness_count: usize,
    /// False when refinement exhausted its step budget while still improving;
    /// the supremum may be unbounded or out of reach of the grid.
    pub converged: bool,
}

impl DistanceEstimate {
    pub fn oracle_gap(&self) -> Option<f64> {
        self.oracle_value.map(|o| o - self.lower_bound)
    }
}

/// Exact maximum of I(x,z) - I(y,z) over the witness set. Ties break toward
/// the smallest witness index, which keeps the reduction deterministic.
pub fn distance_on_witnesses(
    i: &dyn Bifunctional,
    x: &Point,
    y: &Point,
    witnesses: &WitnessSet,
) -> Result<DistanceEstimate> {
    let mut best: Option<(usize, f64)> = None;
    for (k, z) in witnesses.points().iter().enumerate() {
        let v = evaluate(i, x, z)? - evaluate(i, y, z)?;
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((k, v)),
        }
    }
    let (k, v) = best.ok_or(Error::EmptyWitnessSet)?;
    Ok(DistanceEstimate {
        lower_bound: v,
        argmax_witness: witnesses.points()[k].clone(),
        oracle_value: None,
        refinement_iterations: 0,
        witness_count: witnesses.len(),
        converged: true,
    })
}

/// Result of refining a witness set toward the supremum.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub witnesses: WitnessSet,
    pub estimate: DistanceEstimate,
    /// False when N carries no search parametrization (discrete domains);
    /// the input is returned unchanged in that case.
    pub supported: bool,
}

/// Coordinate pattern search started from the best witnesses. The returned
/// estimate is never below the input estimate, and the whole procedure is
/// deterministic for a fixed `cfg.seed`.
pub fn refine_witnesses(
    i: &dyn Bifunctional,
    x: &Point,
    y: &Point,
    witnesses: &WitnessSet,
    cfg: &SearchConfig,
) -> Result<RefineOutcome> {
    cfg.validate()?;
    let base = distance_on_witnesses(i, x, y, witnesses)?;
    if i.witness_params(&base.argmax_witness).is_none() {
        return Ok(RefineOutcome {
            witnesses: witnesses.clone(),
            estimate: base,
            supported: false,
        });
    }

    // Rank witnesses by their difference value, best first.
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(witnesses.len());
    for (k, z) in witnesses.points().iter().enumerate() {
        scored.push((k, evaluate(i, x, z)? - evaluate(i, y, z)?));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));

    let objective = |params: &[f64]| -> Option<f64> {
        let z = i.witness_from_params(params)?;
        let a = i.eval(x, &z).ok()?;
        let b = i.eval(y, &z).ok()?;
        Some(a - b)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut total_evals = 0usize;
    let mut all_converged = true;
    let starts = cfg.restarts + 1;
    for r in 0..starts {
        let (wk, _) = scored[r % scored.len()];
        let Some(mut params) = i.witness_params(&witnesses.points()[wk]) else {
            continue;
        };
        let scale = params.iter().fold(1.0_f64, |m, p| m.max(p.abs()));
        if r > 0 {
            // Jittered restart around a top witness.
            for p in params.iter_mut() {
                *p += (rng.gen::<f64>() - 0.5) * 0.5 * scale;
            }
        }
        let res = pattern_search(
            &objective,
            &params,
            0.25 * scale,
            cfg.step_shrink,
            cfg.local_search_steps,
        );
        total_evals += res.evals;
        all_converged &= res.converged;
        if let Some(v) = res.value {
            found.push((res.params, v));
        }
    }

    let mut points = witnesses.points().to_vec();
    let mut best_val = base.lower_bound;
    let mut best_point = base.argmax_witness.clone();
    for (params, v) in found {
        if let Some(z) = i.witness_from_params(&params) {
            if !points.iter().any(|p| p.close_to(&z, 1e-14)) {
                points.push(z.clone());
            }
            if v > best_val {
                best_val = v;
                best_point = z;
            }
        }
    }
    // Recompute the certified value at the chosen witness so the invariant
    // lower_bound = I(x,w) - I(y,w) holds bit-exactly.
    let certified = evaluate(i, x, &best_point)? - evaluate(i, y, &best_point)?;
    let count = points.len();
    Ok(RefineOutcome {
        witnesses: WitnessSet::new(points, Provenance::Refined)?,
        estimate: DistanceEstimate {
            lower_bound: certified.max(base.lower_bound),
            argmax_witness: if certified >= base.lower_bound {
                best_point
            } else {
                base.argmax_witness
            },
            oracle_value: None,
            refinement_iterations: total_evals,
            witness_count: count,
            converged: all_converged,
        },
        supported: true,
    })
}

/// Grid construction, exact max, refinement, and oracle fill, in that order.
pub fn distance(
    i: &dyn Bifunctional,
    x: &Point,
    y: &Point,
    cfg: &SearchConfig,
) -> Result<DistanceEstimate> {
    i.m_domain().validate(x)?;
    i.m_domain().validate(y)?;
    let grid = WitnessSet::new(i.witness_grid(x, y, cfg), Provenance::Grid)?;
    let refined = refine_witnesses(i, x, y, &grid, cfg)?;
    let mut est = refined.estimate;
    est.oracle_value = i.oracle_distance(x, y);
    Ok(est)
}

/// max{d(x,y), d(y,x)}.
pub fn symmetrize(v_xy: f64, v_yx: f64) -> f64 {
    v_xy.max(v_yx)
}

/// I(x,y) - d_W(x,y), defined when M = N. Nonpositive up to witness
/// truncation; zero for a true metric I once y is among the witnesses.
pub fn triangle_deviation(
    i: &dyn Bifunctional,
    x: &Point,
    y: &Point,
    witnesses: &WitnessSet,
) -> Result<f64> {
    if i.m_domain() != i.n_domain() {
        return Err(Error::DomainsDiffer);
    }
    let ixy = evaluate(i, x, y)?;
    let d = distance_on_witnesses(i, x, y, witnesses)?;
    Ok(ixy - d.lower_bound)
}

type SequenceFn = Box<dyn Fn(usize) -> Result<Point> + Send + Sync>;
type MetricFn = Box<dyn Fn(&Point, &Point) -> Result<f64> + Send + Sync>;

/// Lazily evaluatable sequence together with the metric it is Cauchy for.
pub struct CauchySequence {
    points: SequenceFn,
    metric: MetricFn,
}

impl CauchySequence {
    pub fn new(
        points: impl Fn(usize) -> Result<Point> + Send + Sync + 'static,
        metric: impl Fn(&Point, &Point) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        CauchySequence {
            points: Box::new(points),
            metric: Box::new(metric),
        }
    }

    pub fn point(&self, k: usize) -> Result<Point> {
        (self.points)(k)
    }

    pub fn dist_sym(&self, a: &Point, b: &Point) -> Result<f64> {
        Ok((self.metric)(a, b)?.max((self.metric)(b, a)?))
    }
}

/// lim_k I(x_k, n) along a Cauchy sequence, estimated by successive-difference
/// stopping. The Cauchy property is checked on the tail window first.
pub fn extend_to_completion(
    i: &dyn Bifunctional,
    seq: &CauchySequence,
    witness: &Point,
    n_max: usize,
    tol: f64,
) -> Result<f64> {
    let pts: Vec<Point> = (0..=n_max).map(|k| seq.point(k)).collect::<Result<_>>()?;
    let lo = n_max / 2;
    for j in lo..=n_max {
        for (k, later) in pts.iter().enumerate().skip(j + 1) {
            let d = seq.dist_sym(&pts[j], later)?;
            if d > tol {
                return Err(Error::NotCauchy { i: j, j: k, dist: d });
            }
        }
    }
    let mut prev = evaluate(i, &pts[0], witness)?;
    for k in 1..=n_max {
        let cur = evaluate(i, &pts[k], witness)?;
        if (cur - prev).abs() < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        steps: n_max,
        residual: f64::NAN,
    })
}

pub(crate) struct PatternSearchResult {
    pub params: Vec<f64>,
    pub value: Option<f64>,
    pub evals: usize,
    pub converged: bool,
}

/// Derivative-free coordinate search maximizing `f`. Expands the step while
/// sweeps keep improving, shrinks it otherwise, and stops once the step falls
/// below a floor relative to the parameter scale.
pub(crate) fn pattern_search(
    f: &dyn Fn(&[f64]) -> Option<f64>,
    start: &[f64],
    initial_step: f64,
    shrink: f64,
    max_sweeps: usize,
) -> PatternSearchResult {
    let mut params = start.to_vec();
    let mut evals = 0usize;
    let mut best = f(&params);
    evals += 1;
    let mut step = if initial_step > 0.0 { initial_step } else { 0.25 };
    let mut converged = false;
    for _ in 0..max_sweeps {
        let floor = 1e-13 * params.iter().fold(1.0_f64, |m, p| m.max(p.abs()));
        if step < floor {
            converged = true;
            break;
        }
        let mut improved = false;
        for c in 0..params.len() {
            for dir in [1.0, -1.0] {
                let mut cand = params.clone();
                cand[c] += dir * step;
                let v = f(&cand);
                evals += 1;
                if better(v, best) {
                    params = cand;
                    best = v;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            step *= 2.0;
        } else {
            step *= shrink;
        }
    }
    PatternSearchResult {
        params,
        value: best,
        evals,
        converged,
    }
}

fn better(candidate: Option<f64>, incumbent: Option<f64>) -> bool {
    match (candidate, incumbent) {
        (Some(c), Some(b)) => c > b,
        (Some(_), None) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifunctional::Provenance;
    use crate::geometries::euclidean::euclidean_inner;
    use crate::geometries::minsky::MinskyHalfPlane;

    fn wset(points: Vec<Point>) -> WitnessSet {
        WitnessSet::new(points, Provenance::User).unwrap()
    }

    #[test]
    fn witness_max_euclidean_example() {
        let i = euclidean_inner(2).unwrap();
        let w = wset(vec![
            Point::vector([1.0, 0.0]),
            Point::vector([-1.0, 0.0]),
            Point::vector([0.0, 1.0]),
            Point::vector([0.0, -1.0]),
            Point::vector([-0.6, -0.8]),
        ]);
        let est = distance_on_witnesses(
            &i,
            &Point::vector([0.0, 0.0]),
            &Point::vector([3.0, 4.0]),
            &w,
        )
        .unwrap();
        assert!((est.lower_bound - 5.0).abs() < 1e-12);
        assert_eq!(est.argmax_witness, Point::vector([-0.6, -0.8]));
    }

    #[test]
    fn witness_max_is_zero_on_equal_points() {
        let i = MinskyHalfPlane;
        let x = Point::half_plane(0.3, 1.7);
        let w = wset(vec![Point::Param(0.0), Point::Param(-2.0), Point::Param(5.0)]);
        let est = distance_on_witnesses(&i, &x, &x, &w).unwrap();
        assert_eq!(est.lower_bound, 0.0);
    }

    #[test]
    fn witness_max_minsky_log2() {
        let i = MinskyHalfPlane;
        let est = distance_on_witnesses(
            &i,
            &Point::half_plane(0.0, 2.0),
            &Point::half_plane(0.0, 1.0),
            &wset(vec![Point::Param(0.0)]),
        )
        .unwrap();
        assert!((est.lower_bound - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn refinement_recovers_minsky_supremum_from_bad_start() {
        let i = MinskyHalfPlane;
        let x = Point::half_plane(0.0, 2.0);
        let y = Point::half_plane(0.0, 1.0);
        let w = wset(vec![Point::Param(5.0)]);
        let cfg = SearchConfig::default();
        let out = refine_witnesses(&i, &x, &y, &w, &cfg).unwrap();
        assert!(out.supported);
        assert!((out.estimate.lower_bound - 2.0f64.ln()).abs() < 1e-6);
        assert!(out.estimate.lower_bound >= distance_on_witnesses(&i, &x, &y, &w).unwrap().lower_bound);
    }

    #[test]
    fn refinement_is_deterministic_for_fixed_seed() {
        let i = MinskyHalfPlane;
        let x = Point::half_plane(0.4, 2.0);
        let y = Point::half_plane(-0.3, 0.9);
        let cfg = SearchConfig::default().with_seed(99);
        let a = distance(&i, &x, &y, &cfg).unwrap();
        let b = distance(&i, &x, &y, &cfg).unwrap();
        assert_eq!(a.lower_bound.to_bits(), b.lower_bound.to_bits());
        assert_eq!(a.refinement_iterations, b.refinement_iterations);
    }

    #[test]
    fn distance_fills_euclidean_oracle() {
        let i = euclidean_inner(2).unwrap();
        let est = distance(
            &i,
            &Point::vector([0.0, 0.0]),
            &Point::vector([3.0, 4.0]),
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(est.oracle_value, Some(5.0));
        assert!((est.lower_bound - 5.0).abs() < 1e-6);
        assert!(est.lower_bound <= 5.0 + 1e-12);
    }

    #[test]
    fn estimates_are_monotone_in_witness_set() {
        let i = MinskyHalfPlane;
        let x = Point::half_plane(0.0, 2.0);
        let y = Point::half_plane(0.5, 1.0);
        let small = wset(vec![Point::Param(3.0)]);
        let large = wset(vec![Point::Param(3.0), Point::Param(0.0), Point::Param(-1.0)]);
        let a = distance_on_witnesses(&i, &x, &y, &small).unwrap();
        let b = distance_on_witnesses(&i, &x, &y, &large).unwrap();
        assert!(b.lower_bound >= a.lower_bound);
    }

    #[test]
    fn symmetrize_is_max() {
        assert_eq!(symmetrize(2.0f64.ln(), 3.0f64.ln()), 3.0f64.ln());
        assert_eq!(symmetrize(0.0, 0.0), 0.0);
    }

    #[test]
    fn triangle_deviation_zero_for_metric_with_target_witness() {
        // I = the Euclidean distance itself, M = N.
        let i = crate::bifunctional::CustomBifunctional::new(
            "euclidean-metric",
            crate::point::Domain::RealVector { dim: 2 },
            crate::point::Domain::RealVector { dim: 2 },
            |x, y| {
                let (x, y) = (x.as_vector()?, y.as_vector()?);
                Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            },
        );
        let x = Point::vector([0.2, -1.4]);
        let y = Point::vector([1.9, 0.3]);
        let w = wset(vec![Point::vector([0.0, 0.0]), y.clone()]);
        let dev = triangle_deviation(&i, &x, &y, &w).unwrap();
        assert!(dev.abs() <= 1e-9);
    }

    #[test]
    fn triangle_deviation_strictly_negative_for_squared_distance() {
        let i = crate::bifunctional::CustomBifunctional::new(
            "squared-euclidean",
            crate::point::Domain::RealVector { dim: 2 },
            crate::point::Domain::RealVector { dim: 2 },
            |x, y| {
                let (x, y) = (x.as_vector()?, y.as_vector()?);
                Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            },
        );
        let x = Point::vector([0.0, 0.0]);
        let y = Point::vector([2.0, 0.0]);
        let w = wset(vec![Point::vector([1.0, 0.0]), Point::vector([3.0, 0.0])]);
        let dev = triangle_deviation(&i, &x, &y, &w).unwrap();
        assert!(dev < 0.0);
    }

    #[test]
    fn triangle_deviation_self_returns_self_value() {
        let i = MinskyHalfPlane;
        let err = triangle_deviation(
            &i,
            &Point::half_plane(0.0, 1.0),
            &Point::half_plane(0.0, 1.0),
            &wset(vec![Point::Param(0.0)]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DomainsDiffer));
    }

    #[test]
    fn unbounded_supremum_is_flagged_as_nonconverged() {
        // I(x, t) = t * x_0 has sup_t { I(x,t) - I(y,t) } = infinity when
        // x_0 != y_0. The engine cannot detect unboundedness; it reports a
        // growing estimate whose refinement failed to stabilize.
        use crate::bifunctional::CustomBifunctional;
        use crate::point::Domain;
        let i = CustomBifunctional::new(
            "linear-slice",
            Domain::RealVector { dim: 2 },
            Domain::RealParam,
            |x, t| Ok(t.as_param()? * x.as_vector()?[0]),
        )
        .with_witness_grid(|_, _, _| vec![Point::Param(1.0), Point::Param(-1.0)])
        .with_parametrization(
            |n| n.as_param().ok().map(|t| vec![t]),
            |p| match p {
                [t] if t.is_finite() => Some(Point::Param(*t)),
                _ => None,
            },
        );
        let est = distance(
            &i,
            &Point::vector([2.0, 0.0]),
            &Point::vector([0.0, 0.0]),
            &SearchConfig::default(),
        )
        .unwrap();
        assert!(!est.converged);
        assert!(est.lower_bound > 1e6);
    }

    #[test]
    fn completion_constant_sequence() {
        let i = euclidean_inner(2).unwrap();
        let x = Point::vector([0.25, 0.5]);
        let xc = x.clone();
        let seq = CauchySequence::new(
            move |_| Ok(xc.clone()),
            |a, b| {
                let (a, b) = (a.as_vector()?, b.as_vector()?);
                Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
            },
        );
        let lim = extend_to_completion(&i, &seq, &Point::vector([1.0, 0.0]), 20, 1e-9).unwrap();
        assert_eq!(lim, 0.25);
    }

    #[test]
    fn completion_geometric_sequence_reaches_limit() {
        let i = euclidean_inner(2).unwrap();
        let seq = CauchySequence::new(
            |k| Ok(Point::vector([1.0 - 0.5f64.powi(k as i32), 0.0])),
            |a, b| {
                let (a, b) = (a.as_vector()?, b.as_vector()?);
                Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
            },
        );
        let lim = extend_to_completion(&i, &seq, &Point::vector([1.0, 0.0]), 60, 1e-9).unwrap();
        assert!((lim - 1.0).abs() < 1e-8);
    }

    #[test]
    fn completion_rejects_alternating_sequence() {
        let i = euclidean_inner(2).unwrap();
        let seq = CauchySequence::new(
            |k| {
                Ok(if k % 2 == 0 {
                    Point::vector([0.0, 0.0])
                } else {
                    Point::vector([10.0, 0.0])
                })
            },
            |a, b| {
                let (a, b) = (a.as_vector()?, b.as_vector()?);
                Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
            },
        );
        let err =
            extend_to_completion(&i, &seq, &Point::vector([1.0, 0.0]), 16, 1e-6).unwrap_err();
        assert!(matches!(err, Error::NotCauchy { .. }));
    }
}
