//! Group actions preserving I, the induced action on horofunctions,
//! translation-length estimators, and numerical north-south dynamics
//! detection.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bifunctional::{evaluate, Bifunctional};
use crate::error::{Error, Result};
use crate::horospace::{
    horo_sup_distance, horofunction, HoroSource, Horofunction, LandmarkSet,
};
use crate::point::Point;

type PointMap = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// A pair of maps acting on M and N together with their inverses.
///
/// Whether the element actually preserves I is a property of the pair
/// (I, g); it is measured, not assumed — see [`invariance_defect`].
#[derive(Clone)]
pub struct GroupElement {
    label: String,
    fwd_m: PointMap,
    fwd_n: PointMap,
    inv_m: PointMap,
    inv_n: PointMap,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", self.label)
    }
}

impl GroupElement {
    pub fn new(
        label: impl Into<String>,
        fwd_m: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
        fwd_n: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
        inv_m: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
        inv_n: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        GroupElement {
            label: label.into(),
            fwd_m: Arc::new(fwd_m),
            fwd_n: Arc::new(fwd_n),
            inv_m: Arc::new(inv_m),
            inv_n: Arc::new(inv_n),
        }
    }

    pub fn identity() -> Self {
        let id = |p: &Point| Ok(p.clone());
        GroupElement::new("id", id, id, id, id)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            label: format!("{}^-1", self.label),
            fwd_m: Arc::clone(&self.inv_m),
            fwd_n: Arc::clone(&self.inv_n),
            inv_m: Arc::clone(&self.fwd_m),
            inv_n: Arc::clone(&self.fwd_n),
        }
    }

    /// self after other: (self . other)(p) = self(other(p)).
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let (a, b) = (self.clone(), other.clone());
        let (ai, bi) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let (ai2, bi2) = (self.clone(), other.clone());
        GroupElement::new(
            format!("{}*{}", self.label, other.label),
            move |p| a.act_m(&b.act_m(p)?),
            move |p| a2.act_n(&b2.act_n(p)?),
            move |p| bi.inv_act_m(&ai.inv_act_m(p)?),
            move |p| bi2.inv_act_n(&ai2.inv_act_n(p)?),
        )
    }

    pub fn act_m(&self, p: &Point) -> Result<Point> {
        (self.fwd_m)(p)
    }

    pub fn act_n(&self, p: &Point) -> Result<Point> {
        (self.fwd_n)(p)
    }

    pub fn inv_act_m(&self, p: &Point) -> Result<Point> {
        (self.inv_m)(p)
    }

    pub fn inv_act_n(&self, p: &Point) -> Result<Point> {
        (self.inv_n)(p)
    }

    /// g^n applied to a point of M (negative n uses the inverse).
    pub fn pow_act_m(&self, n: i64, p: &Point) -> Result<Point> {
        let mut cur = p.clone();
        for _ in 0..n.unsigned_abs() {
            cur = if n >= 0 {
                self.act_m(&cur)?
            } else {
                self.inv_act_m(&cur)?
            };
        }
        Ok(cur)
    }
}

/// max |I(g m, g n) - I(m, n)| over the samples.
pub fn invariance_defect(
    i: &dyn Bifunctional,
    g: &GroupElement,
    samples: &[(Point, Point)],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidPoint("invariance check needs samples".into()));
    }
    let mut worst = 0.0_f64;
    for (m, n) in samples {
        let before = evaluate(i, m, n)?;
        let after = evaluate(i, &g.act_m(m)?, &g.act_n(n)?)?;
        worst = worst.max((after - before).abs());
    }
    Ok(worst)
}

/// g . h(x) = h(g^{-1} x) - h(g^{-1} b), renormalized at the basepoint.
/// Requires a re-evaluatable source.
pub fn act_horofunction(
    i: &dyn Bifunctional,
    g: &GroupElement,
    h: &Horofunction,
    landmarks: &Arc<LandmarkSet>,
) -> Result<Horofunction> {
    let (witness, via) = match h.source() {
        HoroSource::Witness(z) => (z.clone(), g.clone()),
        HoroSource::Translate { witness, via } => (witness.clone(), g.compose(via)),
        HoroSource::BoundaryLimit => return Err(Error::NonReevaluatable),
    };
    let raw: Vec<f64> = landmarks
        .points()
        .iter()
        .map(|p| evaluate(i, &via.inv_act_m(p)?, &witness))
        .collect::<Result<_>>()?;
    let base = raw[landmarks.base_index()];
    let mut values: Vec<f64> = raw.iter().map(|v| v - base).collect();
    values[landmarks.base_index()] = 0.0;
    Ok(Horofunction::from_parts(
        Arc::clone(landmarks),
        values,
        Some(raw),
        HoroSource::Translate { witness, via },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TauMethod {
    #[serde(rename = "metric-subadditive")]
    MetricSubadditive,
    #[serde(rename = "functional-limsup")]
    FunctionalLimsup,
}

/// Translation-length estimate from the sampled quantities v_n = q_n / n.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationEstimate {
    pub method: TauMethod,
    /// (n, v_n) pairs, n strictly increasing.
    pub values: Vec<(u32, f64)>,
    pub extrapolated: f64,
    /// Reported uncertainty: last-two gap for the metric method, distance of
    /// the extrapolation from the last sample for the functional method.
    pub gap: f64,
}

fn check_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Config("n_list must be nonempty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::Config("n_list must be strictly increasing and positive".into()));
    }
    Ok(())
}

/// tau_d(g) from d(g^n x, x)/n. The sequence d(g^n x, x) is subadditive, so
/// the limit equals the infimum; the estimate is the minimum over sampled n.
pub fn translation_length_metric(
    dist: &dyn Fn(&Point, &Point) -> Result<f64>,
    g: &GroupElement,
    x: &Point,
    n_list: &[u32],
) -> Result<TranslationEstimate> {
    check_n_list(n_list)?;
    let mut values = Vec::with_capacity(n_list.len());
    let mut cur = x.clone();
    let mut power = 0u32;
    for &n in n_list {
        while power < n {
            cur = g.act_m(&cur)?;
            power += 1;
        }
        values.push((n, dist(&cur, x)? / n as f64));
    }
    let extrapolated = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let gap = if values.len() >= 2 {
        (values[values.len() - 1].1 - values[values.len() - 2].1).abs()
    } else {
        0.0
    };
    Ok(TranslationEstimate {
        method: TauMethod::MetricSubadditive,
        values,
        extrapolated,
        gap,
    })
}

/// tau_{I,M}(g) from I(g^n x, y)/n. Since I(g^n x, y) = n tau + c + o(1) with
/// an unknown constant c, the estimate is the difference quotient of the last
/// two cumulative values, which cancels c; the raw v_n are reported alongside.
pub fn translation_length_functional(
    i: &dyn Bifunctional,
    g: &GroupElement,
    x: &Point,
    y: &Point,
    n_list: &[u32],
) -> Result<TranslationEstimate> {
    check_n_list(n_list)?;
    let mut cumulative = Vec::with_capacity(n_list.len());
    let mut cur = x.clone();
    let mut power = 0u32;
    for &n in n_list {
        while power < n {
            cur = g.act_m(&cur)?;
            power += 1;
        }
        cumulative.push((n, evaluate(i, &cur, y)?));
    }
    let values: Vec<(u32, f64)> = cumulative
        .iter()
        .map(|(n, q)| (*n, q / *n as f64))
        .collect();
    let extrapolated = if cumulative.len() >= 2 {
        let (n1, q1) = cumulative[cumulative.len() - 2];
        let (n2, q2) = cumulative[cumulative.len() - 1];
        (q2 - q1) / (n2 - n1) as f64
    } else {
        values[0].1
    };
    let gap = (extrapolated - values[values.len() - 1].1).abs();
    Ok(TranslationEstimate {
        method: TauMethod::FunctionalLimsup,
        values,
        extrapolated,
        gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeTrajectory {
    pub probe: Point,
    pub converged: bool,
    pub steps: usize,
    pub final_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauComparison {
    pub h_plus_at_g_inv_b: f64,
    pub minus_h_minus_at_g_inv_b: f64,
    pub tau_functional_g: f64,
    pub tau_functional_g_inv: f64,
    /// |h_plus(g^-1 b) - tau_I(g^-1)|
    pub plus_gap: f64,
    /// |-h_minus(g^-1 b) - tau_I(g)|
    pub minus_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NsReport {
    pub declared: bool,
    pub reason: String,
    pub forward: Vec<ProbeTrajectory>,
    pub backward: Vec<ProbeTrajectory>,
    pub h_plus: Option<Horofunction>,
    pub h_minus: Option<Horofunction>,
    /// horo_sup_distance(h_plus, h_minus) when both exist.
    pub separation: Option<f64>,
    pub tau_comparison: Option<TauComparison>,
    /// Sampled v_n that came out negative; the theory needs nonnegative taus.
    pub negative_tau_samples: Vec<f64>,
    pub landmark_count: usize,
}

/// Iterates the probes under g and g^-1, looks for common forward and
/// backward limits of the horofunctions, and compares the fixed functions
/// against the translation-length estimates. Inconclusive outcomes are
/// reported, never raised.
pub fn detect_north_south(
    i: &dyn Bifunctional,
    g: &GroupElement,
    probes: &[Point],
    landmarks: &Arc<LandmarkSet>,
    iters: usize,
    tol: f64,
) -> Result<NsReport> {
    if probes.is_empty() {
        return Err(Error::InvalidPoint("north-south detection needs probes".into()));
    }
    // Augment the landmarks with g^-1 b so the fixed functions can be read
    // there directly.
    let b = landmarks.basepoint().clone();
    let g_inv_b = g.inv_act_m(&b)?;
    let mut pts = landmarks.points().to_vec();
    if !pts.iter().any(|p| p.close_to(&g_inv_b, 1e-12)) {
        pts.push(g_inv_b.clone());
    }
    let aug = LandmarkSet::new(pts, b.clone())?;
    let g_inv_b_idx = aug.index_of(&g_inv_b).expect("augmented landmark present");

    let run = |elem: &GroupElement| -> (Vec<ProbeTrajectory>, Vec<Horofunction>) {
        let mut trajectories = Vec::new();
        let mut limits = Vec::new();
        for probe in probes {
            let mut z = probe.clone();
            let mut prev = match horofunction(i, &z, &aug) {
                Ok(h) => h,
                Err(_) => {
                    trajectories.push(ProbeTrajectory {
                        probe: probe.clone(),
                        converged: false,
                        steps: 0,
                        final_residual: f64::INFINITY,
                    });
                    continue;
                }
            };
            let mut consecutive = 0usize;
            let mut outcome: Option<(Horofunction, usize, f64)> = None;
            let mut last_diff = f64::INFINITY;
            for k in 1..=iters {
                let stepped = elem.act_n(&z).and_then(|zz| {
                    let h = horofunction(i, &zz, &aug)?;
                    Ok((zz, h))
                });
                let (zz, h) = match stepped {
                    Ok(v) => v,
                    Err(_) => break,
                };
                z = zz;
                last_diff = horo_sup_distance(&h, &prev).unwrap_or(f64::INFINITY);
                prev = h;
                if last_diff < tol {
                    consecutive += 1;
                    if consecutive >= 3 {
                        outcome = Some((prev.clone(), k, last_diff));
                        break;
                    }
                } else {
                    consecutive = 0;
                }
            }
            match outcome {
                Some((h, steps, residual)) => {
                    trajectories.push(ProbeTrajectory {
                        probe: probe.clone(),
                        converged: true,
                        steps,
                        final_residual: residual,
                    });
                    limits.push(h);
                }
                None => trajectories.push(ProbeTrajectory {
                    probe: probe.clone(),
                    converged: false,
                    steps: iters,
                    final_residual: last_diff,
                }),
            }
        }
        (trajectories, limits)
    };

    let g_inv = g.inverse();
    let (forward, fwd_limits) = run(g);
    let (backward, bwd_limits) = run(&g_inv);

    let consensus = |limits: &[Horofunction], count: usize| -> Option<Horofunction> {
        if limits.len() != count {
            return None;
        }
        let mut worst = 0.0_f64;
        for a in 0..limits.len() {
            for b in (a + 1)..limits.len() {
                worst = worst.max(horo_sup_distance(&limits[a], &limits[b]).ok()?);
            }
        }
        if worst > tol {
            return None;
        }
        // Pointwise mean; the basepoint entry stays exactly zero.
        let n = limits[0].values().len();
        let mut mean = vec![0.0; n];
        for h in limits {
            for (k, v) in h.values().iter().enumerate() {
                mean[k] += v / limits.len() as f64;
            }
        }
        mean[aug.base_index()] = 0.0;
        Some(Horofunction::from_parts(
            Arc::clone(&aug),
            mean,
            None,
            HoroSource::BoundaryLimit,
        ))
    };

    let h_plus = consensus(&fwd_limits, probes.len());
    let h_minus = consensus(&bwd_limits, probes.len());

    let separation = match (&h_plus, &h_minus) {
        (Some(p), Some(m)) => Some(horo_sup_distance(p, m)?),
        _ => None,
    };
    let distinct = separation.map(|s| s > 10.0 * tol).unwrap_or(false);

    let mut negative_tau_samples = Vec::new();
    let tau_comparison = match (&h_plus, &h_minus) {
        (Some(hp), Some(hm)) => {
            // Orbits of b can leave the valid domain (e.g. the Im floor of
            // the torus moduli) before n = 12; back off to the largest
            // horizon that evaluates.
            let taus = (4..=12u32).rev().find_map(|n_max| {
                let n_list: Vec<u32> = (1..=n_max).collect();
                let fwd = translation_length_functional(i, g, &b, &probes[0], &n_list).ok()?;
                let bwd =
                    translation_length_functional(i, &g_inv, &b, &probes[0], &n_list).ok()?;
                Some((fwd, bwd))
            });
            let Some((tau_g, tau_g_inv)) = taus else {
                return Ok(NsReport {
                    declared: false,
                    reason: "translation estimates not evaluatable at the basepoint".into(),
                    forward,
                    backward,
                    h_plus,
                    h_minus,
                    separation,
                    tau_comparison: None,
                    negative_tau_samples,
                    landmark_count: aug.len(),
                });
            };
            for (_, v) in tau_g.values.iter().chain(tau_g_inv.values.iter()) {
                if *v < -1e-9 {
                    negative_tau_samples.push(*v);
                }
            }
            let hp_val = hp.value_at_index(g_inv_b_idx);
            let hm_val = -hm.value_at_index(g_inv_b_idx);
            Some(TauComparison {
                h_plus_at_g_inv_b: hp_val,
                minus_h_minus_at_g_inv_b: hm_val,
                tau_functional_g: tau_g.extrapolated,
                tau_functional_g_inv: tau_g_inv.extrapolated,
                plus_gap: (hp_val - tau_g_inv.extrapolated).abs(),
                minus_gap: (hm_val - tau_g.extrapolated).abs(),
            })
        }
        _ => None,
    };

    let declared = h_plus.is_some() && h_minus.is_some() && distinct;
    let reason = if declared {
        "north-south dynamics detected".into()
    } else if h_plus.is_none() && forward.iter().all(|t| t.converged) {
        "forward probe limits disagree".into()
    } else if h_plus.is_none() || h_minus.is_none() {
        "probe orbits did not converge".into()
    } else {
        "fixed functions not distinct".into()
    };

    Ok(NsReport {
        declared,
        reason,
        forward,
        backward,
        h_plus,
        h_minus,
        separation,
        tau_comparison,
        negative_tau_samples,
        landmark_count: aug.len(),
    })
}
