//! Half-plane geometry from Minsky's product-region formula
//! I(x + iy, t) = log(y + (t + x)^2 / y), whose induced distance is the
//! hyperbolic distance on the upper half plane.

use num_complex::Complex64;

use crate::bifunctional::Bifunctional;
use crate::dynamics::GroupElement;
use crate::engine::SearchConfig;
use crate::error::{Error, Result};
use crate::point::{Domain, Point};

/// Points only need Im > 0; the floor keeps validation strict.
const IM_FLOOR: f64 = 1e-300;

pub struct MinskyHalfPlane;

pub fn hyperbolic_distance(z1: Complex64, z2: Complex64) -> f64 {
    let u = (z1 - z2).norm_sqr() / (2.0 * z1.im * z2.im);
    (1.0 + u).acosh()
}

impl Bifunctional for MinskyHalfPlane {
    fn name(&self) -> &str {
        "minsky"
    }

    fn m_domain(&self) -> Domain {
        Domain::UpperHalfPlane { im_floor: IM_FLOOR }
    }

    fn n_domain(&self) -> Domain {
        Domain::RealParam
    }

    fn eval(&self, m: &Point, n: &Point) -> Result<f64> {
        let z = m.as_half_plane()?;
        let t = n.as_param()?;
        if z.im <= 0.0 {
            return Err(Error::InvalidPoint(format!(
                "imaginary part must be positive, got {}",
                z.im
            )));
        }
        let s = t + z.re;
        Ok((z.im + s * s / z.im).ln())
    }

    fn oracle_distance(&self, x: &Point, y: &Point) -> Option<f64> {
        let (z1, z2) = (x.as_half_plane().ok()?, y.as_half_plane().ok()?);
        Some(hyperbolic_distance(z1, z2))
    }

    fn witness_grid(&self, _x: &Point, _y: &Point, cfg: &SearchConfig) -> Vec<Point> {
        // Symmetric log-spaced parameter grid. The supremum may sit at t = 0
        // or escape to |t| -> infinity, so the grid spans many decades.
        let half = (cfg.initial_grid_size / 2).max(6);
        let mut grid = vec![Point::Param(0.0)];
        for k in 0..half {
            let e = -3.0 + 11.0 * k as f64 / (half - 1) as f64;
            let t = 10f64.powf(e);
            grid.push(Point::Param(t));
            grid.push(Point::Param(-t));
        }
        grid
    }

    fn witness_params(&self, n: &Point) -> Option<Vec<f64>> {
        n.as_param().ok().map(|t| vec![t])
    }

    fn witness_from_params(&self, params: &[f64]) -> Option<Point> {
        match params {
            [t] if t.is_finite() => Some(Point::Param(*t)),
            _ => None,
        }
    }
}

/// z -> z + beta on the half plane, t -> t - beta on the parameter line;
/// this is the diagonal action that leaves I invariant.
pub fn horizontal_translation(beta: f64) -> GroupElement {
    GroupElement::new(
        format!("shift({beta})"),
        move |p| Ok(Point::HalfPlane(p.as_half_plane()? + beta)),
        move |p| Ok(Point::Param(p.as_param()? - beta)),
        move |p| Ok(Point::HalfPlane(p.as_half_plane()? - beta)),
        move |p| Ok(Point::Param(p.as_param()? + beta)),
    )
}

/// General Möbius element of PSL(2, R) acting on the half plane, with the
/// boundary parameter mapped through the identification s = -t. Only the
/// horizontal translations preserve I exactly; other elements are provided
/// for orbit experiments and report their defect honestly.
pub fn boundary_mobius(mat: [[f64; 2]; 2]) -> Result<GroupElement> {
    let [[a, b], [c, d]] = mat;
    let det = a * d - b * c;
    if det.abs() < 1e-12 {
        return Err(Error::Config("Möbius matrix must be invertible".into()));
    }
    let s = det.abs().sqrt();
    let (a, b, c, d) = (a / s, b / s, c / s, d / s);
    let fwd_z = move |p: &Point| -> Result<Point> {
        let z = p.as_half_plane()?;
        let den = c * z + d;
        if den.norm_sqr() == 0.0 {
            return Err(Error::InvalidPoint("Möbius pole".into()));
        }
        Ok(Point::HalfPlane((a * z + b) / den))
    };
    let inv_z = move |p: &Point| -> Result<Point> {
        let z = p.as_half_plane()?;
        let den = -c * z + a;
        if den.norm_sqr() == 0.0 {
            return Err(Error::InvalidPoint("Möbius pole".into()));
        }
        Ok(Point::HalfPlane((d * z - b) / den))
    };
    let fwd_t = move |p: &Point| -> Result<Point> {
        let t = p.as_param()?;
        let den = -c * t + d;
        if den == 0.0 {
            return Err(Error::InvalidPoint("boundary pole".into()));
        }
        Ok(Point::Param(-(-a * t + b) / den))
    };
    let inv_t = move |p: &Point| -> Result<Point> {
        let t = p.as_param()?;
        let den = c * t + a;
        if den == 0.0 {
            return Err(Error::InvalidPoint("boundary pole".into()));
        }
        Ok(Point::Param(-(-d * t - b) / den))
    };
    Ok(GroupElement::new(
        format!("mobius([[{a},{b}],[{c},{d}]])"),
        fwd_z,
        fwd_t,
        inv_z,
        inv_t,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifunctional::evaluate;

    #[test]
    fn value_at_i_and_zero() {
        let i = MinskyHalfPlane;
        assert_eq!(
            evaluate(&i, &Point::half_plane(0.0, 1.0), &Point::Param(0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn oracle_values() {
        let z1 = Complex64::new(0.0, 1.0);
        let z2 = Complex64::new(0.0, 2.0);
        assert!((hyperbolic_distance(z1, z2) - 2.0f64.ln()).abs() < 1e-15);
        let z3 = Complex64::new(1.0, 1.0);
        assert!((hyperbolic_distance(z1, z3) - 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn rejects_lower_half_plane() {
        let i = MinskyHalfPlane;
        assert!(evaluate(&i, &Point::half_plane(0.0, -1.0), &Point::Param(0.0)).is_err());
    }

    #[test]
    fn boundary_action_consistent_with_translation() {
        let t = horizontal_translation(1.0);
        let m = boundary_mobius([[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let p = Point::Param(0.7);
        assert!(t
            .act_n(&p)
            .unwrap()
            .close_to(&m.act_n(&p).unwrap(), 1e-12));
        let z = Point::half_plane(0.3, 1.2);
        assert!(t
            .act_m(&z)
            .unwrap()
            .close_to(&m.act_m(&z).unwrap(), 1e-12));
    }

    #[test]
    fn mobius_inverse_roundtrip() {
        let g = boundary_mobius([[0.6, 0.8], [-0.8, 0.6]]).unwrap();
        let z = Point::half_plane(0.2, 0.9);
        let back = g.inv_act_m(&g.act_m(&z).unwrap()).unwrap();
        assert!(back.close_to(&z, 1e-12));
        let t = Point::Param(1.3);
        let back_t = g.inv_act_n(&g.act_n(&t).unwrap()).unwrap();
        assert!(back_t.close_to(&t, 1e-9));
    }
}
