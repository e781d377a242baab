//! Summary statistics for experiment tables.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean with the half-width of a two-sided 95% t interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    /// NaN with fewer than two samples.
    pub half_width: f64,
    pub count: usize,
}

impl MeanCi {
    pub fn from_samples(samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                half_width: f64::NAN,
                count,
            };
        }
        let mean = samples.iter().sum::<f64>() / count as f64;
        if count < 2 {
            return Self {
                mean,
                half_width: f64::NAN,
                count,
            };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (count - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Self {
            mean,
            half_width: t * (var / count as f64).sqrt(),
            count,
        }
    }

    pub fn contains_within(&self, target: f64, tolerance: f64) -> bool {
        (self.mean - target).abs() <= tolerance
    }
}

/// Average ranks (1-based); ties share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}
