//! Statistical comparisons between experimental conditions.

use crate::error::{Error, Result};
use crate::numerics::student_t_two_sided;

/// Welch's unequal-variances t-test result.
#[derive(Debug, Clone, Copy)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's t-test between two independent samples. Requires at least two
/// values per sample and non-zero variance in at least one.
pub fn welch_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<WelchResult> {
    let (na, nb) = (sample_a.len(), sample_b.len());
    if na < 2 || nb < 2 {
        return Err(Error::Stats(format!(
            "samples must have >= 2 values, got {na} and {nb}"
        )));
    }
    let (ma, va) = mean_var(sample_a);
    let (mb, vb) = mean_var(sample_b);
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            return Ok(WelchResult {
                t: 0.0,
                df: (na + nb - 2) as f64,
                p: 1.0,
            });
        }
        return Err(Error::Stats("both samples have zero variance".into()));
    }
    let sa = va / na as f64;
    let sb = vb / nb as f64;
    let t = (ma - mb) / (sa + sb).sqrt();
    // Welch-Satterthwaite degrees of freedom.
    let df = (sa + sb) * (sa + sb)
        / (sa * sa / (na as f64 - 1.0) + sb * sb / (nb as f64 - 1.0));
    let p = student_t_two_sided(t, df);
    Ok(WelchResult { t, df, p })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_unit_p() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn reference_example() {
        // (1..5) vs (2..6): t = -1.0, df = 8, p ~ 0.3466.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.t + 1.0).abs() < 1e-12, "t = {}", r.t);
        assert!((r.df - 8.0).abs() < 1e-12, "df = {}", r.df);
        assert!((r.p - 0.3466).abs() < 1e-3, "p = {}", r.p);
    }

    #[test]
    fn swapping_samples_negates_t_and_keeps_p() {
        let a = [1.0, 2.0, 3.5, 4.0, 5.5];
        let b = [2.5, 3.0, 4.5, 5.0, 6.5, 7.0];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert!((ab.t + ba.t).abs() < 1e-12);
        assert!((ab.p - ba.p).abs() < 1e-12);
    }

    #[test]
    fn p_decreases_with_larger_separation() {
        let a = [1.0, 1.1, 0.9, 1.05, 0.95];
        let near: Vec<f64> = a.iter().map(|x| x + 0.1).collect();
        let far: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        let p_near = welch_t_test(&a, &near).unwrap().p;
        let p_far = welch_t_test(&a, &far).unwrap().p;
        assert!(p_far < p_near);
        assert!((0.0..=1.0).contains(&p_near));
        assert!((0.0..=1.0).contains(&p_far));
    }

    #[test]
    fn undersized_samples_error() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
    }
}
