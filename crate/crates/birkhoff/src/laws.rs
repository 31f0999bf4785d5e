use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

/// Analytic reference distributions the empirical statistics are tested
/// against.
///
/// `QuarterCircle` is the limiting singular-value law on [0, 2] with density
/// sqrt(4 - x^2) / pi; `SquaredQuarterCircle` is its image under x -> x^2,
/// supported on [0, 4] with density sqrt(x (4 - x)) / (2 pi x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReferenceLaw {
    Exp1,
    Beta { a: f64, b: f64 },
    QuarterCircle,
    SquaredQuarterCircle,
    UniformInterval { lo: f64, hi: f64 },
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::Exp1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x).exp()
                }
            }
            ReferenceLaw::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(a, b, x)
                }
            }
            ReferenceLaw::QuarterCircle => quarter_circle_cdf(x),
            ReferenceLaw::SquaredQuarterCircle => {
                if x <= 0.0 {
                    0.0
                } else {
                    quarter_circle_cdf(x.sqrt())
                }
            }
            ReferenceLaw::UniformInterval { lo, hi } => {
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::Exp1 => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
            ReferenceLaw::Beta { a, b } => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp()
                }
            }
            ReferenceLaw::QuarterCircle => {
                if !(0.0..=2.0).contains(&x) {
                    0.0
                } else {
                    (4.0 - x * x).sqrt() / std::f64::consts::PI
                }
            }
            ReferenceLaw::SquaredQuarterCircle => {
                if x <= 0.0 || x >= 4.0 {
                    0.0
                } else {
                    ((4.0 - x) / x).sqrt() / (2.0 * std::f64::consts::PI)
                }
            }
            ReferenceLaw::UniformInterval { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ReferenceLaw::Exp1 => 1.0,
            ReferenceLaw::Beta { a, b } => a / (a + b),
            // int_0^2 x sqrt(4 - x^2) / pi dx = 8 / (3 pi)
            ReferenceLaw::QuarterCircle => 8.0 / (3.0 * std::f64::consts::PI),
            // second moment of the quarter-circle law
            ReferenceLaw::SquaredQuarterCircle => 1.0,
            ReferenceLaw::UniformInterval { lo, hi } => (lo + hi) / 2.0,
        }
    }

    /// Effective support used for quadrature and binning grids. Unbounded
    /// laws are truncated where the tail mass is negligible.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ReferenceLaw::Exp1 => (0.0, 40.0),
            ReferenceLaw::Beta { .. } => (0.0, 1.0),
            ReferenceLaw::QuarterCircle => (0.0, 2.0),
            ReferenceLaw::SquaredQuarterCircle => (0.0, 4.0),
            ReferenceLaw::UniformInterval { lo, hi } => (lo, hi),
        }
    }

    /// Inverse cdf. Closed form where available, bisection otherwise.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p));
        match *self {
            ReferenceLaw::Exp1 => -(-p).ln_1p(),
            ReferenceLaw::UniformInterval { lo, hi } => lo + p * (hi - lo),
            _ => {
                let (mut lo, mut hi) = self.support();
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

fn quarter_circle_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        (x * (4.0 - x * x).sqrt() / 2.0 + 2.0 * (x / 2.0).asin()) / std::f64::consts::PI
    }
}

/// Adaptive Simpson quadrature; used to cross-check densities against cdf
/// differences.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = simpson(lo, hi, fa, fm, fb);
    recurse(&f, lo, hi, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_stream;
    use rand::Rng;

    const ALL: [ReferenceLaw; 5] = [
        ReferenceLaw::Exp1,
        ReferenceLaw::Beta { a: 2.0, b: 4.0 },
        ReferenceLaw::QuarterCircle,
        ReferenceLaw::SquaredQuarterCircle,
        ReferenceLaw::UniformInterval { lo: -1.0, hi: 3.0 },
    ];

    #[test]
    fn densities_integrate_to_one() {
        for law in ALL {
            let (lo, hi) = law.support();
            let total = adaptive_simpson(&|x| law.density(x), lo, hi, 1e-11);
            // the squared law's density ~ y^{-1/2} near 0, which limits quadrature accuracy
            assert!((total - 1.0).abs() < 1e-7, "{law:?}: integral {total}");
        }
    }

    #[test]
    fn cdf_monotone_and_normalized_on_grid() {
        for law in ALL {
            let (lo, hi) = law.support();
            let mut prev = law.cdf(lo - 1.0);
            assert!(prev.abs() < 1e-12);
            for k in 0..=500 {
                let x = lo + (hi - lo) * k as f64 / 500.0;
                let c = law.cdf(x);
                assert!(c >= prev - 1e-12, "{law:?} not monotone at {x}");
                prev = c;
            }
            assert!((law.cdf(hi + 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_matches_cdf_differences_on_random_subintervals() {
        let mut rng = seeded_stream(42, 0);
        for law in ALL {
            let (lo, hi) = law.support();
            for _ in 0..100 {
                let mut a = lo + (hi - lo) * rng.gen::<f64>();
                let mut b = lo + (hi - lo) * rng.gen::<f64>();
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                let quad = adaptive_simpson(&|x| law.density(x), a, b, 1e-11);
                let diff = law.cdf(b) - law.cdf(a);
                assert!(
                    (quad - diff).abs() < 1e-8,
                    "{law:?} on [{a}, {b}]: quad {quad} vs cdf diff {diff}"
                );
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for law in ALL {
            for k in 1..100 {
                let p = k as f64 / 100.0;
                let x = law.quantile(p);
                assert!((law.cdf(x) - p).abs() < 1e-9, "{law:?} at p={p}");
            }
        }
    }

    #[test]
    fn known_means() {
        assert!((ReferenceLaw::QuarterCircle.mean() - 0.848_826_363_156_775).abs() < 1e-12);
        assert!((ReferenceLaw::Beta { a: 2.0, b: 4.0 }.mean() - 1.0 / 3.0).abs() < 1e-15);
        // means agree with quadrature of x * density
        for law in ALL {
            let (lo, hi) = law.support();
            let m = adaptive_simpson(&|x| x * law.density(x), lo, hi, 1e-11);
            assert!((m - law.mean()).abs() < 1e-7, "{law:?}: {m} vs {}", law.mean());
        }
    }
}
