//! Brute-force extremal-length oracle, independent of the flat formula.
//!
//! Discretizes a conformal factor rho on an n x n grid over the unit-area
//! flat torus and brackets sup_rho (sum_i w_i l_rho(gamma_i))^2 / Area(rho),
//! with curve lengths measured as the minimum of rho-integrals over the
//! straight parallel representatives of each class.
//!
//! The length term is a minimum of linear functionals of rho, so the
//! normalized supremum is a concave program over the mean-square ball, and
//! by minimax duality it equals sqrt(N) * min_lambda ||m(lambda)||_2, where
//! lambda mixes one weight distribution per class over its parallel lines
//! and m is the mixed cell-mass vector. The dual is a smooth quadratic over
//! a product of simplices; Frank-Wolfe with exact line search drives it
//! down, every dual iterate gives a certified upper bound, and the primal
//! candidate rho proportional to m gives a certified lower bound. The
//! bracket is the oracle's answer and never consults the closed form.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One homotopy class prepared for line integration: for each transverse
/// offset, the list of grid cells its straight representative crosses.
struct ClassLines {
    weight: f64,
    seg_weight: f64,
    offsets: Vec<Vec<u32>>,
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

fn build_class(
    tau: Complex64,
    p: i64,
    q: i64,
    weight: f64,
    n_grid: usize,
    n_offsets: usize,
) -> ClassLines {
    let (g, x0, y0) = egcd(p, q);
    assert!(g == 1, "oracle classes must be primitive, got ({p}, {q})");
    // (ao, bo) completes (p, q) to a unimodular basis: p*bo - q*ao = 1.
    let (ao, bo) = (-y0, x0);
    let flat_len =
        Complex64::new(p as f64 + q as f64 * tau.re, q as f64 * tau.im).norm() / tau.im.sqrt();
    let samples = 4 * n_grid * (p.unsigned_abs().max(q.unsigned_abs()).max(1) as usize);
    let mut offsets = Vec::with_capacity(n_offsets);
    for s in 0..n_offsets {
        let frac = s as f64 / n_offsets as f64;
        let (u0, v0) = (frac * ao as f64, frac * bo as f64);
        let mut cells = Vec::with_capacity(samples);
        for m in 0..samples {
            let t = (m as f64 + 0.5) / samples as f64;
            let u = (u0 + t * p as f64).rem_euclid(1.0);
            let v = (v0 + t * q as f64).rem_euclid(1.0);
            let iu = ((u * n_grid as f64) as usize).min(n_grid - 1);
            let iv = ((v * n_grid as f64) as usize).min(n_grid - 1);
            cells.push((iu * n_grid + iv) as u32);
        }
        offsets.push(cells);
    }
    ClassLines {
        weight,
        seg_weight: flat_len / samples as f64,
        offsets,
    }
}

/// Line integrals of `rho` for every offset of every class.
fn integrals(classes: &[ClassLines], rho: &[f64], out: &mut [Vec<f64>]) {
    for (i, class) in classes.iter().enumerate() {
        for (s, cells) in class.offsets.iter().enumerate() {
            let sum: f64 = cells.iter().map(|&c| rho[c as usize]).sum();
            out[i][s] = sum * class.seg_weight;
        }
    }
}

/// sum_i w_i min_s of precomputed integrals.
fn min_total(classes: &[ClassLines], ints: &[Vec<f64>]) -> f64 {
    classes
        .iter()
        .zip(ints.iter())
        .map(|(c, row)| c.weight * row.iter().cloned().fold(f64::INFINITY, f64::min))
        .sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Certified bracket for the supremum of the discretized functional.
#[derive(Debug, Clone, Copy)]
pub struct OracleRun {
    /// Value of the functional at the best primal iterate (l^2 / Area form).
    pub lower: f64,
    /// Best dual bound (same form); sup lies in [lower, upper].
    pub upper: f64,
}

fn solve(classes: &[ClassLines], ncells: usize, lambda0: Vec<Vec<f64>>, iters: usize) -> OracleRun {
    let sqrt_n = (ncells as f64).sqrt();
    // m = sum_i w_i sum_s lambda_is a_is, maintained incrementally.
    let mut m = vec![0.0f64; ncells];
    for (i, class) in classes.iter().enumerate() {
        for (s, cells) in class.offsets.iter().enumerate() {
            let coeff = class.weight * class.seg_weight * lambda0[i][s];
            if coeff == 0.0 {
                continue;
            }
            for &c in cells {
                m[c as usize] += coeff;
            }
        }
    }
    let mut ints: Vec<Vec<f64>> = classes
        .iter()
        .map(|c| vec![0.0; c.offsets.len()])
        .collect();
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut vertex = vec![0.0f64; ncells];
    for _ in 0..iters {
        // One pass serves three purposes: the primal value at rho = m
        // (lower bound), the dual value (upper bound), and the Frank-Wolfe
        // vertex (argmin line per class).
        integrals(classes, &m, &mut ints);
        let m_norm = norm2(&m);
        if m_norm == 0.0 {
            break;
        }
        let lower = min_total(classes, &ints) * sqrt_n / m_norm;
        let upper = sqrt_n * m_norm;
        debug_assert!(upper >= lower - 1e-9);
        best_lower = best_lower.max(lower);
        best_upper = best_upper.min(upper);
        if best_upper - best_lower <= 1e-6 * best_upper.abs() {
            break;
        }
        // Frank-Wolfe vertex: per class the offset with minimal <a_is, m>.
        vertex.iter_mut().for_each(|v| *v = 0.0);
        for (i, class) in classes.iter().enumerate() {
            let mut arg = 0;
            let mut best = f64::INFINITY;
            for (s, v) in ints[i].iter().enumerate() {
                if *v < best {
                    best = *v;
                    arg = s;
                }
            }
            let coeff = class.weight * class.seg_weight;
            for &c in &class.offsets[arg] {
                vertex[c as usize] += coeff;
            }
        }
        // Exact line search for the quadratic ||(1-g) m + g vertex||^2.
        let mut dot_mv = 0.0;
        let mut vv = 0.0;
        for (a, b) in m.iter().zip(vertex.iter()) {
            dot_mv += a * b;
            vv += b * b;
        }
        let mm = m_norm * m_norm;
        let denom = mm - 2.0 * dot_mv + vv;
        let gamma = if denom <= 0.0 {
            1.0
        } else {
            ((mm - dot_mv) / denom).clamp(0.0, 1.0)
        };
        if gamma == 0.0 {
            break;
        }
        for (a, b) in m.iter_mut().zip(vertex.iter()) {
            *a = (1.0 - gamma) * *a + gamma * b;
        }
    }
    OracleRun {
        lower: best_lower * best_lower,
        upper: best_upper * best_upper,
    }
}

/// Brackets sup l_rho(G)^2 / Area(rho) over conformal factors on an
/// `n_grid` x `n_grid` torus grid. `classes` are (p, q, weight) with (p, q)
/// primitive. Runs the dual descent from the uniform mixture and from a
/// seeded random mixture and returns the tightest certified bracket.
pub fn brute_force_extremal_length(
    tau: Complex64,
    classes: &[(i64, i64, f64)],
    n_grid: usize,
    iters: usize,
    seed: u64,
) -> OracleRun {
    assert!(n_grid >= 8);
    let n_offsets = 2 * n_grid;
    let prepared: Vec<ClassLines> = classes
        .iter()
        .map(|&(p, q, w)| build_class(tau, p, q, w, n_grid, n_offsets))
        .collect();
    let ncells = n_grid * n_grid;

    let uniform: Vec<Vec<f64>> = prepared
        .iter()
        .map(|c| vec![1.0 / c.offsets.len() as f64; c.offsets.len()])
        .collect();
    let run_uniform = solve(&prepared, ncells, uniform, iters);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<Vec<f64>> = prepared
        .iter()
        .map(|c| {
            let mut v: Vec<f64> = (0..c.offsets.len()).map(|_| 0.05 + rng.gen::<f64>()).collect();
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            v
        })
        .collect();
    let run_random = solve(&prepared, ncells, random, iters);

    OracleRun {
        lower: run_uniform.lower.max(run_random.lower),
        upper: run_uniform.upper.min(run_random.upper),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus_horizontal_slope() {
        // Ext_i(1,0) = 1
        let run =
            brute_force_extremal_length(Complex64::new(0.0, 1.0), &[(1, 0, 1.0)], 32, 250, 7);
        assert!(run.lower <= run.upper);
        assert!(run.lower > 0.99 && run.upper < 1.01, "bracket {run:?}");
    }

    #[test]
    fn tall_torus_horizontal_slope() {
        // Ext_2i(1,0) = 1/2
        let run =
            brute_force_extremal_length(Complex64::new(0.0, 2.0), &[(1, 0, 1.0)], 32, 250, 7);
        assert!(run.lower > 0.495 && run.upper < 0.505, "bracket {run:?}");
    }

    #[test]
    fn multicurve_total_length_squared() {
        // two orthogonal unit slopes at tau = i: (1 + 1)^2 = 4, not 2
        let run = brute_force_extremal_length(
            Complex64::new(0.0, 1.0),
            &[(1, 0, 1.0), (0, 1, 1.0)],
            32,
            400,
            7,
        );
        assert!(run.lower > 3.96 && run.upper < 4.04, "bracket {run:?}");
    }
}
