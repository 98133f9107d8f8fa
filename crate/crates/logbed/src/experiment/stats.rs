//! Sample statistics and the two-tailed, two-sample, unpaired Welch's t-test.
//!
//! The p-value comes from the regularized incomplete beta function,
//! evaluated by continued fractions to well below the required 1e-12
//! absolute tolerance, so no statistics dependency is needed and the
//! computation can be cross-checked against a quadrature oracle in tests.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("cannot summarize an empty sample")]
    EmptySamples,
    #[error("each sample needs at least two observations (got {0} and {1})")]
    InsufficientSamples(usize, usize),
    #[error("both sample variances are zero; the test statistic is undefined")]
    DegenerateSamples,
}

/// Sample mean and (n-1)-divisor standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Absent for n = 1, where the sample SD is undefined.
    pub sd: Option<f64>,
    pub n: usize,
}

/// Computes mean and sample standard deviation (divisor n-1).
pub fn summarize(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    let n = samples.len();
    if n == 0 {
        return Err(StatsError::EmptySamples);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = if n == 1 {
        None
    } else {
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        Some((ss / (n as f64 - 1.0)).sqrt())
    };
    Ok(SummaryStats { mean, sd, n })
}

/// Outcome of a Welch's t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchResult {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-tailed p-value.
    pub p: f64,
    pub alpha: f64,
}

impl WelchResult {
    pub fn reject(&self) -> bool {
        self.p < self.alpha
    }
}

/// Two-tailed two-sample unpaired Welch's t-test of mean equality.
pub fn welch_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<WelchResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientSamples(a.len(), b.len()));
    }
    let sa = summarize(a).expect("nonempty");
    let sb = summarize(b).expect("nonempty");
    let (va, vb) = (
        sa.sd.expect("n >= 2").powi(2),
        sb.sd.expect("n >= 2").powi(2),
    );
    if va == 0.0 && vb == 0.0 {
        return Err(StatsError::DegenerateSamples);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (qa, qb) = (va / na, vb / nb);
    let se = (qa + qb).sqrt();
    let t = (sa.mean - sb.mean) / se;
    let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    let p = student_t_two_tailed(t, df);
    Ok(WelchResult { t, df, p, alpha })
}

/// Two-tailed tail probability of Student's t with `df` degrees of freedom:
/// `P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Lanczos approximation of ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0);
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = G[0];
    for (i, g) in G.iter().enumerate().skip(1) {
        acc += g / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function I_x(a, b) by continued fractions.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;
    const MAX_ITER: usize = 400;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadrature oracle for the two-tailed t tail probability, independent
    /// of ln_gamma and the continued fraction: substituting x = sqrt(df) tan θ
    /// turns the density into cos(θ)^(df-1) on a finite interval, and the
    /// normalization constant cancels in the tail/total ratio.
    fn quadrature_two_tailed(t: f64, df: f64) -> f64 {
        let integrand = |theta: f64| theta.cos().powf(df - 1.0);
        // composite Simpson
        let simpson = |lo: f64, hi: f64, n: usize| -> f64 {
            let n = n + n % 2;
            let h = (hi - lo) / n as f64;
            let mut acc = integrand(lo) + integrand(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * integrand(lo + i as f64 * h);
            }
            acc * h / 3.0
        };
        let theta_t = (t.abs() / df.sqrt()).atan();
        let half = std::f64::consts::FRAC_PI_2;
        let tail = simpson(theta_t, half, 200_000);
        let total = simpson(0.0, half, 200_000);
        tail / total
    }

    #[test]
    fn summarize_constant_sample() {
        let s = summarize(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sd, Some(0.0));
        assert_eq!(s.n, 3);
    }

    #[test]
    fn summarize_against_direct_formula() {
        // oracle: direct evaluation of mean and (n-1) SD
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((s.mean - 2.5).abs() < 1e-15);
        let expected = (((1.5f64).powi(2) + 0.25 + 0.25 + 2.25) / 3.0).sqrt();
        assert!((s.sd.unwrap() - expected).abs() < 1e-15);
        assert!((s.sd.unwrap() - 1.2909944487358056).abs() < 1e-12);
    }

    #[test]
    fn summarize_single_sample_has_no_sd() {
        let s = summarize(&[4.2]).unwrap();
        assert_eq!(s.mean, 4.2);
        assert_eq!(s.sd, None);
    }

    #[test]
    fn summarize_rejects_empty() {
        assert_eq!(summarize(&[]).unwrap_err(), StatsError::EmptySamples);
    }

    #[test]
    fn ten_iteration_counts_reproduce_published_step_statistics() {
        // brute-force oracle: enumerate all multisets of ten small integer
        // counts with mean 5.7 and collect their SDs; the only SD that
        // rounds to 0.483 comes from seven 6s and three 5s
        let mut matching_sds = Vec::new();
        // counts[v] = multiplicity of value v, for v in 0..=10
        fn walk(counts: &mut Vec<u64>, value: usize, left: usize, out: &mut Vec<Vec<u64>>) {
            if value == 10 {
                counts[10] = left as u64;
                out.push(counts.clone());
                counts[10] = 0;
                return;
            }
            for take in 0..=left {
                counts[value] = take as u64;
                walk(counts, value + 1, left - take, out);
            }
            counts[value] = 0;
        }
        let mut all = Vec::new();
        walk(&mut vec![0; 11], 0, 10, &mut all);
        for counts in &all {
            let sum: u64 = counts.iter().enumerate().map(|(v, c)| v as u64 * c).sum();
            if sum != 57 {
                continue;
            }
            let samples: Vec<f64> = counts
                .iter()
                .enumerate()
                .flat_map(|(v, c)| std::iter::repeat(v as f64).take(*c as usize))
                .collect();
            let s = summarize(&samples).unwrap();
            let sd = s.sd.unwrap();
            if (sd - 0.483).abs() < 0.0005 {
                matching_sds.push((counts.clone(), sd));
            }
        }
        assert!(!matching_sds.is_empty());
        let sevens_and_threes: Vec<u64> = {
            let mut c = vec![0u64; 11];
            c[6] = 7;
            c[5] = 3;
            c
        };
        assert!(matching_sds.iter().any(|(c, _)| *c == sevens_and_threes));
        let (_, sd) = matching_sds
            .iter()
            .find(|(c, _)| *c == sevens_and_threes)
            .unwrap();
        assert!((sd - 0.48304589153964794).abs() < 1e-12);
    }

    #[test]
    fn identical_samples_give_t_zero_p_one() {
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.05).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
        assert!(!r.reject());
    }

    #[test]
    fn degenerate_samples_error() {
        assert_eq!(
            welch_t_test(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], 0.05).unwrap_err(),
            StatsError::DegenerateSamples
        );
    }

    #[test]
    fn short_samples_error() {
        assert!(matches!(
            welch_t_test(&[1.0], &[1.0, 2.0], 0.05),
            Err(StatsError::InsufficientSamples(1, 2))
        ));
    }

    #[test]
    fn welch_of_shifted_triples_matches_quadrature() {
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 0.05).unwrap();
        assert!((r.t - (-3.6742346141747673)).abs() < 1e-12);
        assert!((r.df - 4.0).abs() < 1e-12);
        let oracle = quadrature_two_tailed(r.t, r.df);
        assert!(
            (r.p - oracle).abs() < 1e-9,
            "p = {}, oracle = {}",
            r.p,
            oracle
        );
        assert!(r.reject());
    }

    #[test]
    fn p_values_match_quadrature_on_randomized_pairs() {
        use crate::simkernel::RngStream;
        let mut stream = RngStream::derive(2024, &["stats", "pairs"]).unwrap();
        for case in 0..20 {
            let na = 3 + stream.index(10);
            let nb = 3 + stream.index(10);
            let a: Vec<f64> = (0..na).map(|_| stream.unit_f64() * 10.0).collect();
            let b: Vec<f64> = (0..nb)
                .map(|_| stream.unit_f64() * 10.0 + stream.unit_f64())
                .collect();
            let r = welch_t_test(&a, &b, 0.05).unwrap();
            let oracle = quadrature_two_tailed(r.t, r.df);
            assert!(
                (r.p - oracle).abs() < 1e-9,
                "case {case}: p = {}, oracle = {}, t = {}, df = {}",
                r.p,
                oracle,
                r.t,
                r.df
            );
        }
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(2.0)).abs() < 1e-13);
        assert!((ln_gamma(5.0) - (24.0f64).ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn reg_inc_beta_boundaries_and_symmetry() {
        assert_eq!(reg_inc_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(reg_inc_beta(2.0, 3.0, 1.0), 1.0);
        // symmetry: I_x(a, b) = 1 - I_{1-x}(b, a)
        for &(a, b, x) in &[(2.0, 3.0, 0.3), (0.5, 0.5, 0.7), (5.0, 1.5, 0.2)] {
            let lhs = reg_inc_beta(a, b, x);
            let rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x);
            assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b} x={x}");
        }
    }
}
