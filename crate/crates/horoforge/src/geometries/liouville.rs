//! Discretized Liouville-type currents on the torus: a weighted direction set
//! whose intersection pairing reproduces the flat length function of a given
//! modulus, fit by nonnegative least squares over a direction grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometries::nnls::nnls;
use crate::geometries::torus::{torus_flat_length, SlopeCurrent, TorusPoint};

#[derive(Debug, Clone)]
pub struct LiouvilleFit {
    pub current: SlopeCurrent,
    /// Max relative pairing error over the validation directions; infinite
    /// when the solver failed and the uniform fallback was used.
    pub residual: f64,
    pub n_dirs: usize,
    pub validation_dirs: usize,
}

/// Fits weights w_j >= 0 on `n_dirs` directions so that
/// i(result, theta) matches the flat length of theta on X over a denser
/// validation grid of directions.
pub fn liouville_discretize(x: &TorusPoint, n_dirs: usize) -> Result<LiouvilleFit> {
    if n_dirs < 8 {
        return Err(Error::Config("n_dirs must be at least 8".into()));
    }
    let n_val = 256.max(4 * n_dirs);
    let fit_angles: Vec<f64> = (0..n_dirs)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n_dirs as f64)
        .collect();
    let val_angles: Vec<f64> = (0..n_val)
        .map(|k| std::f64::consts::PI * (k as f64 + 0.5) / n_val as f64)
        .collect();

    // Unit direction vectors have cross product |sin(angle difference)|.
    let mut a = DMatrix::<f64>::zeros(n_val, n_dirs);
    for (k, psi) in val_angles.iter().enumerate() {
        for (j, phi) in fit_angles.iter().enumerate() {
            a[(k, j)] = (psi - phi).sin().abs();
        }
    }
    let targets: Vec<f64> = val_angles
        .iter()
        .map(|psi| {
            let c = SlopeCurrent::direction(*psi).expect("unit direction");
            torus_flat_length(x, &c)
        })
        .collect();
    let b = DVector::from_row_slice(&targets);

    let (weights, solved) = match nnls(&a, &b) {
        Some(w) => (w, true),
        None => {
            // Uniform fallback; the residual is reported as infinite so the
            // failure is visible downstream.
            let mean_b = targets.iter().sum::<f64>() / n_val as f64;
            let mean_col = 2.0 / std::f64::consts::PI;
            let w0 = mean_b / (mean_col * n_dirs as f64);
            (DVector::from_element(n_dirs, w0), false)
        }
    };

    let residual = if solved {
        let predicted = &a * &weights;
        targets
            .iter()
            .enumerate()
            .map(|(k, t)| (predicted[k] - t).abs() / t)
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let atoms: Vec<(f64, f64, f64)> = fit_angles
        .iter()
        .zip(weights.iter())
        .filter(|(_, w)| **w > 1e-12)
        .map(|(phi, w)| (phi.cos(), phi.sin(), *w))
        .collect();
    let current = if atoms.is_empty() {
        SlopeCurrent::direction(fit_angles[0])?
    } else {
        SlopeCurrent::new(atoms)?
    };

    Ok(LiouvilleFit {
        current,
        residual,
        n_dirs,
        validation_dirs: n_val,
    })
}
