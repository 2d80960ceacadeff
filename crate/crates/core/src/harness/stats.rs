//! Order-fixed compensated sums, sample moments and Pearson correlation.

use serde::{Deserialize, Serialize};

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: u64,
    pub mean: f64,
    /// Unbiased standard deviation; 0 for a single sample.
    pub std: f64,
}

impl SampleStats {
    pub fn of(xs: &[f64]) -> SampleStats {
        let n = xs.len();
        if n == 0 {
            return SampleStats { n: 0, mean: 0.0, std: 0.0 };
        }
        let mean = xs.iter().copied().collect::<NeumaierSum>().value() / n as f64;
        let std = if n > 1 {
            let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<NeumaierSum>().value();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        SampleStats { n: n as u64, mean, std }
    }
}

/// Pearson correlation; `None` when either sample has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().copied().collect::<NeumaierSum>().value() / n;
    let my = ys.iter().copied().collect::<NeumaierSum>().value() / n;
    let sxy = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect::<NeumaierSum>().value();
    let sxx = xs.iter().map(|x| (x - mx) * (x - mx)).collect::<NeumaierSum>().value();
    let syy = ys.iter().map(|y| (y - my) * (y - my)).collect::<NeumaierSum>().value();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
