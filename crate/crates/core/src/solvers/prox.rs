use nalgebra::DMatrix;

use super::Loss;
use crate::error::{Error, Result};

/// Proximal operator of `λ·φ(· − Y)` evaluated at `X`.
///
/// * `L1`: shifted soft-threshold `Y + sign(X − Y)∘max(|X − Y| − λ, 0)`.
/// * `L2` (`‖·‖²_F`): `(X + 2λY)/(1 + 2λ)`.
/// * `L21`: per-column block shrinkage toward `Y`; a column with `X_c = Y_c` maps to `Y_c`.
pub fn prox_loss(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64, loss: Loss) -> Result<DMatrix<f64>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("prox weight {lambda} must be finite and ≥ 0")));
    }
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!(
            "prox argument is {:?}, anchor is {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(prox_unchecked(x, y, lambda, loss))
}

pub(crate) fn prox_unchecked(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64, loss: Loss) -> DMatrix<f64> {
    match loss {
        Loss::L1 => y.zip_map(x, |yv, xv| {
            let d = xv - yv;
            yv + d.signum() * (d.abs() - lambda).max(0.0)
        }),
        Loss::L2 => y + (x - y) / (1.0 + 2.0 * lambda),
        Loss::L21 => {
            let mut out = y.clone();
            for c in 0..x.ncols() {
                let d = x.column(c) - y.column(c);
                let norm = d.norm();
                if norm > 0.0 {
                    let scale = (1.0 - lambda / norm).max(0.0);
                    out.column_mut(c).axpy(scale, &d, 1.0);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LOSSES: [Loss; 3] = [Loss::L1, Loss::L2, Loss::L21];

    fn random(p: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(p, n, |_, _| rng.gen::<f64>() * 4.0 - 2.0)
    }

    #[test]
    fn zero_weight_and_anchor() {
        let x = random(4, 5, 1);
        let y = random(4, 5, 2);
        for loss in LOSSES {
            assert!((prox_loss(&x, &y, 0.0, loss).unwrap() - &x).amax() < 1e-15);
            assert!((prox_loss(&y, &y, 0.7, loss).unwrap() - &y).amax() < 1e-15);
        }
        assert!(prox_loss(&x, &y, -0.1, Loss::L1).is_err());
    }

    #[test]
    fn scalar_soft_threshold_against_grid() {
        let y = DMatrix::from_element(1, 1, 0.3);
        for (d, expect) in [(0.7, 0.3), (1.5, 0.8), (-2.0, -0.7)] {
            let x = DMatrix::from_element(1, 1, 0.3 + d);
            let out = prox_loss(&x, &y, 1.0, Loss::L1).unwrap()[(0, 0)];
            assert!((out - expect).abs() < 1e-12);
            // brute force ½(s − x)² + |s − y| on a fine grid
            let xv = 0.3 + d;
            let best = (-40_000..=40_000)
                .map(|i| i as f64 * 1e-4)
                .min_by(|a, b| {
                    let fa = 0.5 * (a - xv).powi(2) + (a - 0.3).abs();
                    let fb = 0.5 * (b - xv).powi(2) + (b - 0.3).abs();
                    fa.total_cmp(&fb)
                })
                .unwrap();
            assert!((best - out).abs() < 2e-4);
        }
    }

    #[test]
    fn prox_optimality_against_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random(5, 6, 3);
        let y = random(5, 6, 4);
        let lambda = 0.6;
        for loss in LOSSES {
            let s = prox_loss(&x, &y, lambda, loss).unwrap();
            let f = |s: &DMatrix<f64>| 0.5 * (s - &x).norm_squared() + lambda * loss.value(&(s - &y));
            let fs = f(&s);
            for _ in 0..100 {
                let pert = DMatrix::from_fn(5, 6, |_, _| (rng.gen::<f64>() - 0.5) * 1e-2);
                assert!(fs <= f(&(&s + pert)) + 1e-12);
            }
        }
    }

    #[test]
    fn l21_shrinks_whole_columns() {
        let y = DMatrix::zeros(2, 2);
        let x = DMatrix::from_column_slice(2, 2, &[3.0, 4.0, 0.3, 0.4]);
        let out = prox_loss(&x, &y, 1.0, Loss::L21).unwrap();
        assert!((out[(0, 0)] - 2.4).abs() < 1e-12 && (out[(1, 0)] - 3.2).abs() < 1e-12);
        assert_eq!(out.column(1).amax(), 0.0);
    }
}
