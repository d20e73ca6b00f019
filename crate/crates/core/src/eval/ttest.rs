use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided critical value used to call a difference significant.
pub const T_CRITICAL: f64 = 1.645;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_value: f64,
    pub n: usize,
    pub sd_pooled: f64,
    pub significant: bool,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// t from summary statistics of two equal-sized samples.
///
/// The pooled deviation is `sqrt((sd_a^2 + sd_b^2) / n)`. This is not the
/// textbook pooled estimate; it is kept on purpose so that published t
/// values can be reproduced from their summaries.
pub fn t_from_summary(mean_a: f64, sd_a: f64, mean_b: f64, sd_b: f64, n: usize) -> TTestResult {
    let sd_pooled = ((sd_a * sd_a + sd_b * sd_b) / n as f64).sqrt();
    let diff = mean_a - mean_b;
    let t_value = if sd_pooled > 0.0 {
        diff / sd_pooled
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    TTestResult {
        t_value,
        n,
        sd_pooled,
        significant: is_significant(t_value),
    }
}

pub fn is_significant(t: f64) -> bool {
    t > T_CRITICAL
}

pub fn t_statistic(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::Stats(format!("sample sizes differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::Stats(format!("need at least 2 values per sample, got {}", a.len())));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Stats("samples must be finite".into()));
    }
    Ok(t_from_summary(mean(a), sample_sd(a), mean(b), sample_sd(b), a.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        let r = t_from_summary(5.0, 2.0, 3.0, 2.0, 4);
        assert!((r.sd_pooled - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.t_value - 2f64.sqrt()).abs() < 1e-12);
        assert!(!r.significant);
    }

    #[test]
    fn identical_samples() {
        let a = [90.0, 91.0, 92.5, 88.0, 90.0];
        let r = t_statistic(&a, &a).unwrap();
        assert_eq!(r.t_value, 0.0);
    }

    #[test]
    fn zero_spread() {
        let r = t_statistic(&[2.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.t_value, f64::INFINITY);
        assert!(r.significant);
        assert_eq!(t_statistic(&[1.0, 1.0], &[1.0, 1.0]).unwrap().t_value, 0.0);
    }

    #[test]
    fn threshold() {
        assert!(is_significant(1.874));
        assert!(!is_significant(1.452));
        assert!(!is_significant(T_CRITICAL));
    }

    #[test]
    fn bad_sizes() {
        assert!(t_statistic(&[1.0], &[2.0]).is_err());
        assert!(t_statistic(&[1.0, 2.0], &[2.0]).is_err());
    }
}
