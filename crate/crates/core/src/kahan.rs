//! Compensated (Kahan) summation used by every probability-weighted sum.

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn new() -> Self {
        KahanSum::default()
    }

    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }

    /// Folds another compensated sum in; deterministic as long as the fold
    /// order is fixed. The effective value of a Kahan pair is `sum - comp`.
    pub(crate) fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }
}

pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}
