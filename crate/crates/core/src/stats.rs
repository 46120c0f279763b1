//! Small statistics helpers: means with standard errors and the two
//! goodness-of-fit tests used by the validation suite.

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Sample mean and standard error of the mean (0 for fewer than 2 values).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square) or sample size (KS).
    pub dof: usize,
}

/// Pearson chi-square test of integer counts against Poisson(`mean`).
/// Adjacent values are pooled so that every bin expects at least 5 counts.
pub fn chi_square_poisson(counts: &[usize], mean: f64) -> TestResult {
    let n = counts.len() as f64;
    let pois = Poisson::new(mean).expect("positive mean");
    // Upper edges (inclusive) of bins built left to right; the last bin
    // absorbs the upper tail.
    let mut edges: Vec<u64> = Vec::new();
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        acc += pois.pmf(k);
        let rest = n * pois.sf(k);
        if rest < 5.0 {
            edges.push(u64::MAX);
            break;
        }
        if n * acc >= 5.0 {
            edges.push(k);
            acc = 0.0;
        }
        k += 1;
    }
    let bins = edges.len();
    let expected: Vec<f64> = (0..bins)
        .map(|b| {
            let lower = if b == 0 { 0.0 } else { pois.cdf(edges[b - 1]) };
            let upper = if b + 1 == bins { 1.0 } else { pois.cdf(edges[b]) };
            n * (upper - lower)
        })
        .collect();
    let mut observed = vec![0.0; bins];
    for &c in counts {
        let b = edges.partition_point(|&e| e < c as u64);
        observed[b] += 1.0;
    }
    let statistic: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = bins.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).expect("dof > 0").sf(statistic);
    TestResult {
        statistic,
        p_value,
        dof,
    }
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> TestResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    TestResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        dof: xs.len(),
    }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson as PoissonDist, Uniform};

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chi_square_accepts_poisson_and_rejects_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = PoissonDist::new(100.0).unwrap();
        let good: Vec<usize> = (0..5000).map(|_| d.sample(&mut rng) as usize).collect();
        assert!(chi_square_poisson(&good, 100.0).p_value > 0.01);
        let shifted: Vec<usize> = good.iter().map(|c| c + 3).collect();
        assert!(chi_square_poisson(&shifted, 100.0).p_value < 1e-6);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..2000).map(|_| u.sample(&mut rng)).collect();
        assert!(ks_test(&xs, |x| x.clamp(0.0, 1.0)).p_value > 0.01);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(ks_test(&sq, |x| x.clamp(0.0, 1.0)).p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Critical value 1.36 gives ~5%, 1.63 gives ~1%.
        assert!((kolmogorov_sf(1.36) - 0.049).abs() < 0.002);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 0.001);
    }
}
