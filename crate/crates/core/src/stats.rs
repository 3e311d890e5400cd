//! Streaming estimators for Monte Carlo averages.

/// Running mean with its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn std_error(&self) -> f64 {
        let n = self.n as f64;
        let var = (self.sum_sq / n - self.mean().powi(2)).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Ratio-of-means estimator `Σ num / Σ den`, with a delta-method standard
/// error. Used for success-weighted fidelities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioAccumulator {
    n: u64,
    num: f64,
    den: f64,
    num_sq: f64,
    den_sq: f64,
    cross: f64,
}

impl RatioAccumulator {
    pub fn push(&mut self, num: f64, den: f64) {
        self.n += 1;
        self.num += num;
        self.den += den;
        self.num_sq += num * num;
        self.den_sq += den * den;
        self.cross += num * den;
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.num += other.num;
        self.den += other.den;
        self.num_sq += other.num_sq;
        self.den_sq += other.den_sq;
        self.cross += other.cross;
    }

    pub fn ratio(&self) -> f64 {
        self.num / self.den
    }

    pub fn std_error(&self) -> f64 {
        let n = self.n as f64;
        let r = self.ratio();
        let mean_den = self.den / n;
        // sample variance of (num - r * den)
        let resid_sq = self.num_sq - 2.0 * r * self.cross + r * r * self.den_sq;
        let var = (resid_sq / n).max(0.0) * n / (n - 1.0);
        (var / n).sqrt() / mean_den
    }
}
