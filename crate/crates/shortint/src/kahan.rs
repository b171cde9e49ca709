/// Kahan–Neumaier compensated accumulator.
///
/// Long mixed-sign sums (window updates over 10^8 steps, moment passes)
/// lose precision under naive accumulation; the compensation term keeps
/// the running error at a few ulps of the total.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator in; used for ordered shard merges.
    pub fn merge(&mut self, other: Kahan) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
