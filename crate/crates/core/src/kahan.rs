/// Kahan–Neumaier compensated accumulator.
///
/// Keeps the running compensation separate so the total is accurate to
/// O(ε) independent of the number of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<KahanSum>().total()
}

/// Compensated running mean: after k calls to `push`, `mean()` is the
/// compensated average of the pushed terms. Pushing a constant c keeps the
/// mean at exactly c (the increment (c - mean)/k is exactly zero), which
/// plain sum/n does not guarantee.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMean {
    mean: f64,
    comp: f64,
    count: u64,
}

impl RunningMean {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = (x - self.mean) / self.count as f64;
        let t = self.mean + delta;
        if self.mean.abs() >= delta.abs() {
            self.comp += (self.mean - t) + delta;
        } else {
            self.comp += (delta - t) + self.mean;
        }
        self.mean = t;
    }

    pub fn mean(&self) -> f64 {
        self.mean + self.comp
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}
