//! Compensated summation and batch-means standard errors.

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation: the error bound does not grow
/// with the number of terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
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

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Neumaier::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex terms, componentwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexNeumaier) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Neumaier>().value()
}

pub const DEFAULT_BATCHES: usize = 16;

/// Mean of `values` and its batch-means standard error.
///
/// The sample is cut into `batches` contiguous blocks (the last absorbs the
/// remainder) and the standard error is the spread of the block means.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = neumaier_sum(values.iter().copied()) / m as f64;
    let b = batches.min(m);
    if b < 2 {
        return (mean, f64::NAN);
    }
    let size = m / b;
    let means: Vec<f64> = (0..b)
        .map(|k| {
            let hi = if k + 1 == b { m } else { (k + 1) * size };
            let block = &values[k * size..hi];
            neumaier_sum(block.iter().copied()) / block.len() as f64
        })
        .collect();
    let centre = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - centre).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}
