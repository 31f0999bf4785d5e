/// Sorted sample with ECDF and quantile accessors; the input to every
/// distance statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "empirical distribution needs data");
        assert!(values.iter().all(|v| v.is_finite()));
        values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn mean(&self) -> f64 {
        crate::matrix::compensated_sum(&self.values) / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.len() - 1) as f64
    }

    /// Right-continuous ECDF: fraction of sample points <= x.
    pub fn ecdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        k as f64 / self.len() as f64
    }

    /// Order-statistic quantile: value at rank ceil(p * count).
    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p));
        let k = ((p * self.len() as f64).ceil() as usize).clamp(1, self.len());
        self.values[k - 1]
    }

    /// Apply a monotone map pointwise (e.g. x -> x^2 for the squared
    /// singular-value law).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_unsorted(self.values.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_steps_at_sorted_values() {
        let e = EmpiricalDistribution::from_unsorted(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(e.ecdf(0.5), 0.0);
        assert_eq!(e.ecdf(1.0), 0.25);
        assert_eq!(e.ecdf(2.0), 0.75);
        assert_eq!(e.ecdf(10.0), 1.0);
    }

    #[test]
    fn ecdf_at_kth_value_is_k_plus_one_over_count() {
        let e = EmpiricalDistribution::from_unsorted(vec![0.7, 0.2, 0.9, 0.4, 0.5]);
        for (k, &v) in e.values().iter().enumerate() {
            assert_eq!(e.ecdf(v), (k + 1) as f64 / e.len() as f64);
        }
    }

    #[test]
    fn quantile_hits_order_statistics() {
        let e = EmpiricalDistribution::from_unsorted(vec![10.0, 20.0, 30.0, 40.0]);
        assert_eq!(e.quantile(0.25), 10.0);
        assert_eq!(e.quantile(0.5), 20.0);
        assert_eq!(e.quantile(1.0), 40.0);
    }
}
