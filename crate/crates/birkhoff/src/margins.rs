use serde::{Deserialize, Serialize};

/// Row and column sums defining a transportation polytope of m-by-n
/// nonnegative matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSpec {
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
}

impl MarginSpec {
    /// Panics unless all margins are strictly positive and the two totals
    /// agree to relative 1e-12.
    pub fn new(row_sums: Vec<f64>, col_sums: Vec<f64>) -> Self {
        assert!(!row_sums.is_empty() && !col_sums.is_empty());
        assert!(
            row_sums.iter().chain(col_sums.iter()).all(|&x| x > 0.0),
            "margins must be strictly positive"
        );
        let tr: f64 = row_sums.iter().sum();
        let tc: f64 = col_sums.iter().sum();
        assert!(
            (tr - tc).abs() <= 1e-12 * tr.max(tc),
            "row total {tr} and column total {tc} disagree"
        );
        Self { row_sums, col_sums }
    }

    /// Constant margins t/m and t/n: the polytope of largest volume at
    /// fixed total mass.
    pub fn constant(m: usize, n: usize, total: f64) -> Self {
        Self::new(
            vec![total / m as f64; m],
            vec![total / n as f64; n],
        )
    }

    /// The Birkhoff polytope margins: all row and column sums 1.
    pub fn birkhoff(n: usize) -> Self {
        Self::constant(n, n, n as f64)
    }

    pub fn rows(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn cols(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn m(&self) -> usize {
        self.row_sums.len()
    }

    pub fn n(&self) -> usize {
        self.col_sums.len()
    }

    pub fn total(&self) -> f64 {
        self.row_sums.iter().sum()
    }

    /// Scale every margin by lambda > 0.
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        Self {
            row_sums: self.row_sums.iter().map(|a| a * lambda).collect(),
            col_sums: self.col_sums.iter().map(|b| b * lambda).collect(),
        }
    }

    /// Dimension of the free block (m-1)(n-1).
    pub fn free_dim(&self) -> usize {
        (self.m() - 1) * (self.n() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birkhoff_margins() {
        let s = MarginSpec::birkhoff(4);
        assert_eq!(s.rows(), &[1.0; 4]);
        assert_eq!(s.cols(), &[1.0; 4]);
        assert_eq!(s.total(), 4.0);
        assert_eq!(s.free_dim(), 9);
    }

    #[test]
    #[should_panic]
    fn mismatched_totals_panic() {
        MarginSpec::new(vec![1.0, 1.0], vec![1.0, 1.5]);
    }

    #[test]
    fn scaling_scales_total() {
        let s = MarginSpec::new(vec![1.0, 2.0], vec![1.5, 1.5]).scaled(2.0);
        assert_eq!(s.total(), 6.0);
    }
}
