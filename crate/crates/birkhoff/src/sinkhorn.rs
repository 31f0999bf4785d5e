use crate::error::{Error, Result};
use crate::matrix::{check_doubly_stochastic, SquareMatrix};

/// Clamp threshold for negative rounding artifacts.
const NEG_CLAMP: f64 = 1e-12;

/// Alternating row/column normalization, used to pull a near-doubly
/// stochastic matrix (float drift from long Gibbs chains) back onto exact
/// margins.
pub fn sinkhorn_repair(
    m: &SquareMatrix,
    target_tol: f64,
    max_iters: usize,
) -> Result<SquareMatrix> {
    assert!(target_tol > 0.0);
    let n = m.n();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            let v = out.get(i, j);
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j, value: v });
            }
            if v < 0.0 {
                if v >= -NEG_CLAMP {
                    out.set(i, j, 0.0);
                } else {
                    return Err(Error::CorruptedState(format!(
                        "entry ({i}, {j}) = {v} is too negative for repair"
                    )));
                }
            }
        }
    }

    let mut last_violation = f64::INFINITY;
    for _ in 0..max_iters {
        let report = check_doubly_stochastic(&out, target_tol)?;
        last_violation = report.max_violation;
        if report.ok {
            return Ok(out);
        }
        for i in 0..n {
            let s = out.row_sum(i);
            for j in 0..n {
                out.set(i, j, out.get(i, j) / s);
            }
        }
        for j in 0..n {
            let s = out.col_sum(j);
            for i in 0..n {
                out.set(i, j, out.get(i, j) / s);
            }
        }
    }
    let report = check_doubly_stochastic(&out, target_tol)?;
    if report.ok {
        Ok(out)
    } else {
        Err(Error::SinkhornDiverged {
            iters: max_iters,
            violation: last_violation.min(report.max_violation),
        })
    }
}
