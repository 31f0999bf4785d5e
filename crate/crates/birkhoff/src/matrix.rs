use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense real n-by-n matrix in row-major order.
///
/// Carrier for doubly stochastic samples, the iid-exponential comparison
/// model, and derived matrices such as the recentered `sqrt(n) * (X - 1/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        assert!(n >= 1, "side length must be positive");
        assert_eq!(entries.len(), n * n, "entry count must be n*n");
        for (idx, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / n,
                    col: idx % n,
                    value: v,
                });
            }
        }
        Ok(Self { n, entries })
    }

    /// All entries 1/n; the center of the Birkhoff polytope.
    pub fn barycenter(n: usize) -> Self {
        Self {
            n,
            entries: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        compensated_sum(self.row(i))
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for i in 0..self.n {
            neumaier_step(&mut sum, &mut comp, self.get(i, j));
        }
        sum + comp
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Matrix product self * other.
    pub fn multiply(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row_k = &other.entries[k * n..(k + 1) * n];
                let out_i = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    out_i[j] += a * row_k[j];
                }
            }
        }
        SquareMatrix { n, entries: out }
    }
}

#[inline]
fn neumaier_step(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

/// Neumaier compensated summation; the margin checker needs 1e-9 to be
/// meaningful at n = 1024.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        neumaier_step(&mut sum, &mut comp, v);
    }
    sum + comp
}

/// Where the worst deviation from double stochasticity was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationSite {
    Row(usize),
    Col(usize),
    Entry(usize, usize),
}

/// Outcome of [`check_doubly_stochastic`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StochasticityReport {
    pub ok: bool,
    pub max_violation: f64,
    pub site: ViolationSite,
}

/// Checks all row sums and column sums against 1 and all entries against 0.
///
/// Non-finite entries are a hard error: they indicate corrupted chain state
/// rather than float drift.
pub fn check_doubly_stochastic(m: &SquareMatrix, tol: f64) -> Result<StochasticityReport> {
    assert!(tol > 0.0);
    let n = m.n();
    let mut worst = 0.0_f64;
    let mut site = ViolationSite::Row(0);
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j, value: v });
            }
            if v < 0.0 && -v > worst {
                worst = -v;
                site = ViolationSite::Entry(i, j);
            }
        }
    }
    for i in 0..n {
        let dev = (m.row_sum(i) - 1.0).abs();
        if dev > worst {
            worst = dev;
            site = ViolationSite::Row(i);
        }
    }
    for j in 0..n {
        let dev = (m.col_sum(j) - 1.0).abs();
        if dev > worst {
            worst = dev;
            site = ViolationSite::Col(j);
        }
    }
    Ok(StochasticityReport {
        ok: worst <= tol,
        max_violation: worst,
        site,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_barycenter_pass() {
        for n in [1, 2, 3, 7, 64, 257, 1024] {
            let r = check_doubly_stochastic(&SquareMatrix::identity(n), 1e-9).unwrap();
            assert!(r.ok, "identity n={n}: violation {}", r.max_violation);
            let r = check_doubly_stochastic(&SquareMatrix::barycenter(n), 1e-9).unwrap();
            assert!(r.ok, "barycenter n={n}: violation {}", r.max_violation);
        }
    }

    #[test]
    fn perturbed_entry_is_located() {
        let mut m = SquareMatrix::barycenter(3);
        m.set(1, 2, m.get(1, 2) + 1e-3);
        let r = check_doubly_stochastic(&m, 1e-9).unwrap();
        assert!(!r.ok);
        assert!((r.max_violation - 1e-3).abs() < 1e-12);
        assert!(matches!(r.site, ViolationSite::Row(1) | ViolationSite::Col(2)));
    }

    #[test]
    fn non_finite_entry_is_hard_error() {
        let mut m = SquareMatrix::barycenter(2);
        m.set(0, 0, f64::NAN);
        assert!(matches!(
            check_doubly_stochastic(&m, 1e-9),
            Err(Error::NonFiniteEntry { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let vals = vec![1.0, 1e-16, -1.0, 1e-16];
        assert_eq!(compensated_sum(&vals), 2e-16);
    }

    #[test]
    fn multiply_against_identity() {
        let m = SquareMatrix::from_fn(3, |i, j| (i * 3 + j) as f64);
        let id = SquareMatrix::identity(3);
        assert_eq!(m.multiply(&id), m);
        assert_eq!(id.multiply(&m), m);
    }
}
