//! Horofunctions and the embedding of N into basepoint-normalized
//! 1-Lipschitz functions on M.
//!
//! Functions on an infinite M are represented through their values on a
//! finite landmark set, so every result here is relative to that set; reports
//! carry landmark counts to keep values comparable across runs.

use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::bifunctional::{evaluate, Bifunctional};
use crate::dynamics::GroupElement;
use crate::error::{Error, Result};
use crate::point::Point;

/// Tolerance under which two landmark points count as the same point.
pub const LANDMARK_EQ_TOL: f64 = 1e-12;

/// Finite subset of M on which horofunctions are evaluated, with a
/// distinguished basepoint that belongs to the set.
#[derive(Debug, Clone)]
pub struct LandmarkSet {
    points: Vec<Point>,
    base_index: usize,
}

impl LandmarkSet {
    /// Builds a landmark set; the basepoint is appended when missing.
    pub fn new(points: Vec<Point>, basepoint: Point) -> Result<Arc<Self>> {
        let mut points = points;
        let base_index = match points
            .iter()
            .position(|p| p.close_to(&basepoint, LANDMARK_EQ_TOL))
        {
            Some(k) => k,
            None => {
                points.push(basepoint);
                points.len() - 1
            }
        };
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                if points[a].close_to(&points[b], LANDMARK_EQ_TOL) {
                    return Err(Error::DuplicateLandmark(a, b));
                }
            }
        }
        Ok(Arc::new(LandmarkSet { points, base_index }))
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn basepoint(&self) -> &Point {
        &self.points[self.base_index]
    }

    pub fn base_index(&self) -> usize {
        self.base_index
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| q.close_to(p, LANDMARK_EQ_TOL))
    }

    fn same_as(&self, other: &LandmarkSet) -> bool {
        self.base_index == other.base_index
            && self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(other.points.iter())
                .all(|(a, b)| a.close_to(b, LANDMARK_EQ_TOL))
    }
}

/// Where a horofunction came from; witness- and translate-sourced functions
/// can be re-evaluated at arbitrary points, numeric boundary limits cannot.
#[derive(Debug, Clone)]
pub enum HoroSource {
    Witness(Point),
    BoundaryLimit,
    Translate { witness: Point, via: GroupElement },
}

impl HoroSource {
    pub fn tag(&self) -> &'static str {
        match self {
            HoroSource::Witness(_) => "witness",
            HoroSource::BoundaryLimit => "boundary-limit",
            HoroSource::Translate { .. } => "group-translate",
        }
    }
}

/// Basepoint-normalized value vector of ell_z over a landmark set.
///
/// `values[base] = 0` exactly. Witness-sourced functions also keep the raw
/// slice values I(p, z) so exact maxima over horofunctions reproduce
/// [`crate::engine::distance_on_witnesses`] bit for bit.
#[derive(Debug, Clone)]
pub struct Horofunction {
    landmarks: Arc<LandmarkSet>,
    values: Vec<f64>,
    raw: Option<Vec<f64>>,
    source: HoroSource,
}

impl Horofunction {
    pub fn landmarks(&self) -> &Arc<LandmarkSet> {
        &self.landmarks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &HoroSource {
        &self.source
    }

    pub fn value_at_index(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Evaluates the horofunction at an arbitrary point of M. Boundary-limit
    /// sources can only be read at their landmarks.
    pub fn eval_at(&self, i: &dyn Bifunctional, x: &Point) -> Result<f64> {
        match &self.source {
            HoroSource::Witness(z) => {
                let b = self.landmarks.basepoint();
                Ok(evaluate(i, x, z)? - evaluate(i, b, z)?)
            }
            HoroSource::Translate { witness, via } => {
                let b = self.landmarks.basepoint();
                let gx = via.inv_act_m(x)?;
                let gb = via.inv_act_m(b)?;
                Ok(evaluate(i, &gx, witness)? - evaluate(i, &gb, witness)?)
            }
            HoroSource::BoundaryLimit => match self.landmarks.index_of(x) {
                Some(k) => Ok(self.values[k]),
                None => Err(Error::NonReevaluatable),
            },
        }
    }

    pub(crate) fn from_parts(
        landmarks: Arc<LandmarkSet>,
        values: Vec<f64>,
        raw: Option<Vec<f64>>,
        source: HoroSource,
    ) -> Self {
        Horofunction {
            landmarks,
            values,
            raw,
            source,
        }
    }

    pub(crate) fn raw(&self) -> Option<&[f64]> {
        self.raw.as_deref()
    }
}

impl Serialize for Horofunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Horofunction", 3)?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("landmark_count", &self.landmarks.len())?;
        st.serialize_field("source", self.source.tag())?;
        st.end()
    }
}

/// ell_z = I(., z) - I(b, z) evaluated on the landmarks.
pub fn horofunction(
    i: &dyn Bifunctional,
    z: &Point,
    landmarks: &Arc<LandmarkSet>,
) -> Result<Horofunction> {
    let raw: Vec<f64> = landmarks
        .points()
        .iter()
        .map(|p| evaluate(i, p, z))
        .collect::<Result<_>>()?;
    let base = raw[landmarks.base_index()];
    let mut values: Vec<f64> = raw.iter().map(|v| v - base).collect();
    values[landmarks.base_index()] = 0.0;
    Ok(Horofunction {
        landmarks: Arc::clone(landmarks),
        values,
        raw: Some(raw),
        source: HoroSource::Witness(z.clone()),
    })
}

/// Sup distance over the landmarks; a pseudometric metrizing pointwise
/// convergence on the landmark restriction.
pub fn horo_sup_distance(h1: &Horofunction, h2: &Horofunction) -> Result<f64> {
    if !Arc::ptr_eq(&h1.landmarks, &h2.landmarks) && !h1.landmarks.same_as(&h2.landmarks) {
        return Err(Error::LandmarkMismatch);
    }
    Ok(h1
        .values
        .iter()
        .zip(h2.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbedReport {
    pub horofunctions: Vec<Horofunction>,
    /// Pairs whose horofunctions coincide on the landmarks within tol:
    /// evidence against landmark sufficiency, not against injectivity of the
    /// embedding itself.
    pub coincident_pairs: Vec<(usize, usize, f64)>,
    pub landmark_count: usize,
}

/// Embeds a sample of N and reports injectivity failures on the landmark
/// restriction.
pub fn embed_sample(
    i: &dyn Bifunctional,
    sample_n: &[Point],
    landmarks: &Arc<LandmarkSet>,
    tol: f64,
) -> Result<EmbedReport> {
    let horofunctions: Vec<Horofunction> = sample_n
        .iter()
        .map(|z| horofunction(i, z, landmarks))
        .collect::<Result<_>>()?;
    let mut coincident = Vec::new();
    for a in 0..horofunctions.len() {
        for b in (a + 1)..horofunctions.len() {
            let d = horo_sup_distance(&horofunctions[a], &horofunctions[b])?;
            if d < tol {
                coincident.push((a, b, d));
            }
        }
    }
    Ok(EmbedReport {
        horofunctions,
        coincident_pairs: coincident,
        landmark_count: landmarks.len(),
    })
}

/// Outcome of following ell_{z_k} along a sequence in N.
#[derive(Debug, Clone)]
pub enum BoundaryOutcome {
    Converged {
        horofunction: Horofunction,
        steps: usize,
    },
    Diverged {
        oscillation: f64,
        steps: usize,
    },
}

/// Iterates ell_{z_k} and returns the limit vector once successive sup
/// differences stay below tol for three consecutive steps; three guards
/// against slowly oscillating sequences.
pub fn boundary_limit(
    i: &dyn Bifunctional,
    seq: &dyn Fn(usize) -> Result<Point>,
    landmarks: &Arc<LandmarkSet>,
    tol: f64,
    k_max: usize,
) -> Result<BoundaryOutcome> {
    let mut prev = horofunction(i, &seq(0)?, landmarks)?;
    let mut consecutive = 0usize;
    let mut recent: Vec<f64> = Vec::new();
    for k in 1..=k_max {
        let cur = horofunction(i, &seq(k)?, landmarks)?;
        let diff = horo_sup_distance(&cur, &prev)?;
        recent.push(diff);
        if diff < tol {
            consecutive += 1;
            if consecutive >= 3 {
                return Ok(BoundaryOutcome::Converged {
                    horofunction: Horofunction {
                        landmarks: Arc::clone(landmarks),
                        values: cur.values,
                        raw: None,
                        source: HoroSource::BoundaryLimit,
                    },
                    steps: k,
                });
            }
        } else {
            consecutive = 0;
        }
        prev = cur;
    }
    let oscillation = recent
        .iter()
        .rev()
        .take(5)
        .cloned()
        .fold(0.0, f64::max);
    Ok(BoundaryOutcome::Diverged {
        oscillation,
        steps: k_max,
    })
}

/// Argmax and max of h(x) - h(y) over a family of horofunctions. When the
/// family is ell_z for the witnesses z of a set W this reproduces
/// `distance_on_witnesses` exactly.
pub fn attain_sup(
    x: &Point,
    y: &Point,
    family: &[Horofunction],
) -> Result<(Horofunction, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyWitnessSet);
    }
    let landmarks = family[0].landmarks();
    let ix = landmarks
        .index_of(x)
        .ok_or_else(|| Error::NotLandmark(x.describe()))?;
    let iy = landmarks
        .index_of(y)
        .ok_or_else(|| Error::NotLandmark(y.describe()))?;
    let mut best: Option<(usize, f64)> = None;
    for (k, h) in family.iter().enumerate() {
        if !Arc::ptr_eq(h.landmarks(), landmarks) && !h.landmarks().same_as(landmarks) {
            return Err(Error::LandmarkMismatch);
        }
        let v = match h.raw() {
            Some(raw) => raw[ix] - raw[iy],
            None => h.values[ix] - h.values[iy],
        };
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((k, v)),
        }
    }
    let (k, v) = best.unwrap();
    Ok((family[k].clone(), v))
}

/// Worst 1-Lipschitz violation of h over landmark pairs, measured against a
/// symmetrized landmark distance matrix d(p_idx, q_idx).
pub fn lipschitz_defect_on_landmarks(h: &Horofunction, dsym: &dyn Fn(usize, usize) -> f64) -> f64 {
    let n = h.landmarks.len();
    let mut worst = f64::NEG_INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            let defect = (h.values[a] - h.values[b]).abs() - dsym(a, b);
            if defect > worst {
                worst = defect;
            }
        }
    }
    worst
}
