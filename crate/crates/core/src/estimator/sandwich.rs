//! Sandwich (robust) covariance for the fitted parameters.
//!
//! Bread: numerical Hessian of the total log-likelihood in log-parameter
//! space, central differences with step 1e-4. Meat: sum of outer products of
//! per-record score vectors, also by central differences. Standard errors
//! map back to the natural scale through the delta method for exp.

use super::likelihood::LikelihoodContext;
use super::{Dataset, FittedParams, MleResult, ModelSpec, ParamVector};
use crate::error::{Error, Result};

const FD_STEP: f64 = 1e-4;

/// Robust standard errors for a converged fit. Entries align with
/// [theta_shape, theta_scale, sigma_shape, sigma_scale, weight_0, ...];
/// fixed weights (including the top band) get `None`.
pub fn robust_se(result: &MleResult, data: &Dataset) -> Result<Vec<Option<f64>>> {
    if !result.converged {
        return Err(Error::NonConvergence(
            "robust standard errors require a converged fit".into(),
        ));
    }
    let spec = result
        .spec
        .as_ref()
        .ok_or_else(|| Error::config("fit result carries no model spec"))?;
    let ctx = LikelihoodContext::new(data, spec)?;
    robust_se_from_context(&ctx, &result.params, spec)
}

pub(crate) fn robust_se_from_context(
    ctx: &LikelihoodContext,
    params: &FittedParams,
    spec: &ModelSpec,
) -> Result<Vec<Option<f64>>> {
    let lp = ParamVector::pack(params, spec);
    let dim = lp.len();
    let names = spec.param_names();

    let total_at = |point: &[f64]| -> Result<f64> {
        let p = ParamVector::unpack(point, spec)?;
        ctx.total(&p)
    };
    let per_record_at = |point: &[f64]| -> Result<Vec<f64>> {
        let p = ParamVector::unpack(point, spec)?;
        ctx.per_record(&p)
    };

    // Hessian by central differences.
    let f0 = total_at(&lp)?;
    let mut hessian = vec![vec![0.0; dim]; dim];
    let shifted = |i: usize, s: f64, j: usize, t: f64, base: &[f64]| {
        let mut p = base.to_vec();
        p[i] += s;
        p[j] += t;
        p
    };
    for i in 0..dim {
        let fp = total_at(&shifted(i, FD_STEP, i, 0.0, &lp))?;
        let fm = total_at(&shifted(i, -FD_STEP, i, 0.0, &lp))?;
        hessian[i][i] = (fp - 2.0 * f0 + fm) / (FD_STEP * FD_STEP);
        for j in (i + 1)..dim {
            let fpp = total_at(&shifted(i, FD_STEP, j, FD_STEP, &lp))?;
            let fpm = total_at(&shifted(i, FD_STEP, j, -FD_STEP, &lp))?;
            let fmp = total_at(&shifted(i, -FD_STEP, j, FD_STEP, &lp))?;
            let fmm = total_at(&shifted(i, -FD_STEP, j, -FD_STEP, &lp))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * FD_STEP * FD_STEP);
            hessian[i][j] = v;
            hessian[j][i] = v;
        }
    }

    // Per-record scores.
    let n = ctx.n_records();
    let mut scores = vec![vec![0.0; dim]; n];
    for i in 0..dim {
        let up = per_record_at(&shifted(i, FD_STEP, i, 0.0, &lp))?;
        let down = per_record_at(&shifted(i, -FD_STEP, i, 0.0, &lp))?;
        for r in 0..n {
            scores[r][i] = (up[r] - down[r]) / (2.0 * FD_STEP);
        }
    }
    let mut meat = vec![vec![0.0; dim]; dim];
    for s in &scores {
        for i in 0..dim {
            for j in 0..dim {
                meat[i][j] += s[i] * s[j];
            }
        }
    }

    let hinv = invert(&hessian, &names)?;
    // V = H^-1 M H^-1
    let hm = matmul(&hinv, &meat);
    let cov = matmul(&hm, &hinv);

    let natural = ParamVector::pack(params, spec)
        .iter()
        .map(|lp| lp.exp())
        .collect::<Vec<_>>();
    let mut free_se = Vec::with_capacity(dim);
    for i in 0..dim {
        let v = cov[i][i];
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::numerical(format!(
                "sandwich covariance not positive definite (diagonal {v:.3e} for {})",
                names[i]
            )));
        }
        // delta method: se(exp(l)) = exp(l) * se(l)
        free_se.push(natural[i] * v.sqrt());
    }

    // Spread back over the aligned layout with None at fixed weights.
    let mut out = vec![
        Some(free_se[0]),
        Some(free_se[1]),
        Some(free_se[2]),
        Some(free_se[3]),
    ];
    let free = spec.free_bands();
    let mut k = 4;
    for (band, fixed) in spec.fixed_weights.iter().enumerate() {
        if fixed.is_some() {
            out.push(None);
        } else {
            debug_assert!(free.contains(&band));
            out.push(Some(free_se[k]));
            k += 1;
        }
    }
    Ok(out)
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting; a vanishing pivot names the
/// flat parameter direction.
fn invert(m: &[Vec<f64>], names: &[String]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let tol = scale.max(1.0) * 1e-12;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .expect("non-empty column");
        if a[pivot_row][col].abs() <= tol {
            return Err(Error::numerical(format!(
                "singular Hessian: flat direction along {}",
                names.get(col).map(String::as_str).unwrap_or("<unknown>")
            )));
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r][j] -= factor * a[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_known_matrix() {
        let names: Vec<String> = (0..2).map(|i| format!("p{i}")).collect();
        let m = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = invert(&m, &names).unwrap();
        let expect = [[3.0 / 11.0, -1.0 / 11.0], [-1.0 / 11.0, 4.0 / 11.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_names_direction() {
        let names: Vec<String> = vec!["theta_shape".into(), "theta_scale".into()];
        let m = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let err = invert(&m, &names).unwrap_err();
        assert!(format!("{err}").contains("theta_scale"), "{err}");
    }
}
