//! Euclidean geometry from the inner product against unit witness vectors:
//! I(x, y) = <x, y/|y|>, whose induced distance is the Euclidean distance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bifunctional::Bifunctional;
use crate::dynamics::GroupElement;
use crate::engine::SearchConfig;
use crate::error::{Error, Result};
use crate::point::{Domain, Point};

pub struct EuclideanInner {
    dim: usize,
}

pub fn euclidean_inner(dim: usize) -> Result<EuclideanInner> {
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    Ok(EuclideanInner { dim })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl Bifunctional for EuclideanInner {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn m_domain(&self) -> Domain {
        Domain::RealVector { dim: self.dim }
    }

    fn n_domain(&self) -> Domain {
        Domain::RealVectorNonzero { dim: self.dim }
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let (x, y) = (m.as_vector()?, n.as_vector()?);
        let ny = norm(y);
        if ny == 0.0 {
            return Err(Error::InvalidPoint("zero witness vector".into()));
        }
        Ok(dot(x, y) / ny)
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        let (x, y) = (x.as_vector().ok()?, y.as_vector().ok()?);
        Some(
            x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    }

    fn witness_grid(&self, x: &Point, y: &Point, cfg: &SearchConfig) -> Vec<Point> {
        let mut grid = Vec::with_capacity(cfg.initial_grid_size + 1);
        // The normalized difference direction attains the supremum exactly.
        if let (Ok(xv), Ok(yv)) = (x.as_vector(), y.as_vector()) {
            let diff: Vec<f64> = xv.iter().zip(yv).map(|(a, b)| a - b).collect();
            if norm(&diff) > 0.0 {
                grid.push(Point::Vector(diff));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xe0c1);
        while grid.len() < cfg.initial_grid_size {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            if norm(&v) > 1e-6 {
                grid.push(Point::Vector(v));
            }
        }
        grid
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        n.as_vector().ok().map(|v| v.to_vec())
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        if params.len() != self.dim || params.iter().any(|p| !p.is_finite()) {
            return None;
        }
        if norm(params) == 0.0 {
            return None;
        }
        Some(Point::Vector(params.to_vec()))
    }
}

/// Rotation in the (i, j) coordinate plane acting on both factors.
pub fn rotation(dim: usize, i: usize, j: usize, theta: f64) -> Result<GroupElement> {
    if i >= dim || j >= dim || i == j {
        return Err(Error::Config("rotation plane indices out of range".into()));
    }
    let apply = move |v: &Point, angle: f64| -> Result<Point> {
        let v = v.as_vector()?;
        let mut out = v.to_vec();
        let (c, s) = (angle.cos(), angle.sin());
        out[i] = c * v[i] - s * v[j];
        out[j] = s * v[i] + c * v[j];
        Ok(Point::Vector(out))
    };
    Ok(GroupElement::new(
        format!("rot({i},{j};{theta})"),
        move |p| apply(p, theta),
        move |p| apply(p, theta),
        move |p| apply(p, -theta),
        move |p| apply(p, -theta),
    ))
}

/// Translation by v acting on M only; witnesses are directions and stay put.
/// The induced distance is translation-invariant even though I is not.
pub fn translation(v: Vec<f64>) -> Result<GroupElement> {
    if v.is_empty() {
        return Err(Error::Config("translation vector must be nonempty".into()));
    }
    let fwd = v.clone();
    let bwd = v.clone();
    let shift = move |p: &Point, dir: f64, vv: &[f64]| -> Result<Point> {
        let p = p.as_vector()?;
        Ok(Point::Vector(
            p.iter().zip(vv).map(|(a, b)| a + dir * b).collect(),
        ))
    };
    Ok(GroupElement::new(
        format!("translate({v:?})"),
        move |p| shift(p, 1.0, &fwd),
        |p| Ok(p.clone()),
        move |p| shift(p, -1.0, &bwd),
        |p| Ok(p.clone()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifunctional::evaluate;

    #[test]
    fn unit_direction_self_pairing() {
        let i = euclidean_inner(3).unwrap();
        let e1 = Point::vector([1.0, 0.0, 0.0]);
        assert_eq!(evaluate(&i, &e1, &e1).unwrap(), 1.0);
    }

    #[test]
    fn witness_scaling_invariance() {
        let i = euclidean_inner(2).unwrap();
        let x = Point::vector([0.3, -1.9]);
        let y = Point::vector([0.7, 0.2]);
        let y2 = Point::vector([1.4, 0.4]);
        assert!((evaluate(&i, &x, &y).unwrap() - evaluate(&i, &x, &y2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn oracle_is_norm_of_difference() {
        let i = euclidean_inner(2).unwrap();
        let d = i
            .oracle_distance(&Point::vector([0.0, 0.0]), &Point::vector([3.0, 4.0]))
            .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn zero_witness_rejected() {
        let i = euclidean_inner(2).unwrap();
        assert!(evaluate(
            &i,
            &Point::vector([1.0, 1.0]),
            &Point::vector([0.0, 0.0])
        )
        .is_err());
        assert!(i.witness_from_params(&[0.0, 0.0]).is_none());
    }
}
