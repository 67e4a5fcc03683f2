//! Nonnegative least squares by the Lawson-Hanson active-set method, run on
//! the normal equations. Problem sizes here are tiny (hundreds of rows, at
//! most a few hundred columns), so Cholesky solves on the passive set are
//! cheap and accurate enough.

use nalgebra::{DMatrix, DVector};

/// Minimizes ||A x - b|| subject to x >= 0. Returns None when the passive-set
/// solves break down (numerically singular normal matrix).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let atb = a.transpose() * b;

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * atb.amax().max(1.0);
    let max_outer = 3 * n + 16;

    for _ in 0..max_outer {
        // Gradient of 0.5||Ax - b||^2 is -(atb - gram x).
        let w = &atb - &gram * &x;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol {
                match best {
                    Some((_, bw)) if w[j] <= bw => {}
                    _ => best = Some((j, w[j])),
                }
            }
        }
        let Some((j_star, _)) = best else {
            return Some(x);
        };
        passive[j_star] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = solve_passive(&gram, &atb, &idx)?;
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                for j in 0..n {
                    if !passive[j] {
                        x[j] = 0.0;
                    }
                }
                break;
            }
            // Step back along x -> z until the first passive variable hits 0.
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                return None;
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            for &j in &idx {
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Some(x)
}

fn solve_passive(gram: &DMatrix<f64>, atb: &DVector<f64>, idx: &[usize]) -> Option<DVector<f64>> {
    let k = idx.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    let mut h = DVector::<f64>::zeros(k);
    for (r, &i) in idx.iter().enumerate() {
        h[r] = atb[i];
        for (c, &j) in idx.iter().enumerate() {
            g[(r, c)] = gram[(i, j)];
        }
    }
    // Tiny ridge keeps nearly collinear direction columns solvable.
    for d in 0..k {
        g[(d, d)] += 1e-12 * g[(d, d)].abs().max(1e-12);
    }
    g.cholesky().map(|ch| ch.solve(&h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
        (a * x - b).norm()
    }

    #[test]
    fn unconstrained_optimum_is_recovered_when_nonnegative() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let x = nnls(&a, &b).unwrap();
        // least squares solution of this system is (1, 2), already >= 0
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_component_is_clamped_to_zero() {
        // b points opposite to the second column: its coefficient must be 0.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[2.0, -3.0]);
        let x = nnls(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn beats_or_matches_dense_grid_on_small_problem() {
        let a = DMatrix::from_row_slice(
            4,
            2,
            &[0.5, 1.3, 1.1, -0.2, -0.3, 0.8, 0.9, 0.4],
        );
        let b = DVector::from_row_slice(&[1.0, 0.3, 0.5, 0.8]);
        let x = nnls(&a, &b).unwrap();
        assert!(x.iter().all(|&v| v >= 0.0));
        let r = residual(&a, &b, &x);
        let mut best = f64::INFINITY;
        for i in 0..=60 {
            for j in 0..=60 {
                let cand = DVector::from_row_slice(&[i as f64 * 0.05, j as f64 * 0.05]);
                best = best.min(residual(&a, &b, &cand));
            }
        }
        assert!(r <= best + 1e-6, "nnls {r} vs grid {best}");
    }
}
