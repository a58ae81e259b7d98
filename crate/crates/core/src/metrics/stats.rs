use serde::{Deserialize, Serialize};

use super::special::{f_upper_tail, student_t_two_sided};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_two_sided: f64,
    pub n: usize,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (n − 1 denominator).
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Sample Pearson correlation with a two-sided p-value from Student's t
/// with `n − 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::data(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::data(format!("correlation needs n >= 3, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::data("correlation input contains non-finite values"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::data("correlation is undefined for a constant series"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        student_t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(CorrelationResult { r, p_two_sided: p, n })
}

/// Standardized mean difference `(mean(a) − mean(b)) / s_pooled`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::data("Cohen's d needs at least 2 values per group"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    if pooled == 0.0 {
        return Err(Error::data("Cohen's d is undefined with zero pooled variance"));
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
}

/// One-way ANOVA across groups.
pub fn anova_f(groups: &[&[f64]]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::data("ANOVA needs at least 2 groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::data("ANOVA needs at least 2 values per group"));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    if ss_within == 0.0 {
        return Err(Error::data("ANOVA is undefined with zero within-group variance"));
    }
    let df_between = groups.len() - 1;
    let df_within = n - groups.len();
    let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p: f_upper_tail(f, df_between as f64, df_within as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let c = pearson(&x, &x).unwrap();
        assert_eq!(c.r, 1.0);
        assert!(c.p_two_sided < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 7.0).collect();
        assert_eq!(pearson(&x, &y).unwrap().r, -1.0);
        // sxy = 8, sxx = syy = 10
        let c = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap();
        assert!((c.r - 0.8).abs() < 1e-12);
        assert_eq!(c.n, 5);
        // sxy = 10, sxx = 10, syy = 14.8
        let c = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 6.0]).unwrap();
        assert!((c.r - 10.0 / 148f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pearson_p_value_by_hand() {
        // r = 0.8, n = 5: t = 0.8 * sqrt(3 / 0.36) = 2.3094 on 3 df
        let c = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap();
        let t = StudentsT::new(0.0, 1.0, 3.0).unwrap();
        let expected = 2.0 * t.sf(0.8 * (3.0f64 / 0.36).sqrt());
        assert!((c.p_two_sided - expected).abs() < 1e-10, "{}", c.p_two_sided);
        assert!((c.p_two_sided - 0.104_088).abs() < 1e-5);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cohens_d_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
        let b = [2.0, 2.5, 5.0, 7.0, 1.0];
        assert_eq!(cohens_d(&a, &b).unwrap(), -cohens_d(&b, &a).unwrap());
        assert!(cohens_d(&[1.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(cohens_d(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cohens_d_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = Normal::new(0.0, 1.0).unwrap();
        let b: Vec<f64> = (0..10_000).map(|_| n.sample(&mut rng)).collect();
        let a: Vec<f64> = (0..10_000).map(|_| n.sample(&mut rng) + 0.5).collect();
        let d = cohens_d(&a, &b).unwrap();
        assert!((d - 0.5).abs() < 0.05, "{d}");
    }

    fn equal_variance_t(a: &[f64], b: &[f64]) -> f64 {
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let sp2 = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
        (mean(a) - mean(b)) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt()
    }

    #[test]
    fn anova_examples() {
        let r = anova_f(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!((r.df_between, r.df_within), (1, 4));
        assert!(anova_f(&[&[1.0, 1.0], &[2.0, 2.0]]).is_err());
        assert!(anova_f(&[&[1.0, 2.0]]).is_err());

        let a = [2.1, 3.3, 1.9, 4.4, 2.8];
        let b = [3.9, 4.1, 5.6, 2.2];
        let f = anova_f(&[&a, &b]).unwrap().f;
        let t = equal_variance_t(&a, &b);
        assert!((f - t * t).abs() < 1e-9);
    }

    // A single null draw of F(2, 2997) lands in [0.5, 2] only about 47% of
    // the time, so the null behaviour is checked over replicates instead.
    #[test]
    fn anova_null_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = Normal::new(3.0, 0.6).unwrap();
        let reps = 400;
        let mut fs = Vec::with_capacity(reps);
        for _ in 0..reps {
            let groups: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..1000).map(|_| n.sample(&mut rng)).collect())
                .collect();
            let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
            fs.push(anova_f(&refs).unwrap().f);
        }
        // E[F] = d2 / (d2 - 2), Var[F] ~ 1 for d1 = 2
        let m = mean(&fs);
        assert!((m - 1.0).abs() < 4.0 / (reps as f64).sqrt(), "{m}");
        let dist = FisherSnedecor::new(2.0, 2997.0).unwrap();
        let p_band = dist.cdf(2.0) - dist.cdf(0.5);
        let hits = fs.iter().filter(|f| (0.5..=2.0).contains(*f)).count() as f64 / reps as f64;
        let se = (p_band * (1.0 - p_band) / reps as f64).sqrt();
        assert!((hits - p_band).abs() < 4.0 * se, "{hits} vs {p_band}");
        let p_values: Vec<f64> = fs.iter().map(|&f| f_upper_tail(f, 2.0, 2997.0)).collect();
        assert!((mean(&p_values) - 0.5).abs() < 0.06);
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            xy in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            a in 0.01f64..50.0,
            b in -50.0f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            if let Ok(base) = pearson(&x, &y) {
                let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let r1 = pearson(&scaled, &y).unwrap().r;
                let r2 = pearson(&neg, &y).unwrap().r;
                prop_assert!((r1 - base.r).abs() < 1e-12);
                prop_assert!((r2 + base.r).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&base.r));
                prop_assert!((0.0..=1.0).contains(&base.p_two_sided));
            }
        }

        #[test]
        fn anova_two_group_identity(
            a in proptest::collection::vec(-10.0f64..10.0, 2..20),
            b in proptest::collection::vec(-10.0f64..10.0, 2..20),
        ) {
            if let Ok(r) = anova_f(&[&a, &b]) {
                let t = equal_variance_t(&a, &b);
                prop_assert!((r.f - t * t).abs() < 1e-9 * (1.0 + r.f));
            }
        }
    }
}
