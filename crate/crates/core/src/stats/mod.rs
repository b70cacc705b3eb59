//! Rating statistics: weighted mean and standard deviation, two-tailed
//! independent t-tests (Welch or Student) and TOST equivalence testing with
//! bounds set from a standardized effect size (Cohen's d).

pub mod survey;
pub mod tdist;

use serde::Serialize;
use thiserror::Error;

use tdist::{t_quantile, t_sf};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least 2 ratings, got {n}")]
    InsufficientData { n: f64 },
    #[error("{ratings} ratings but {weights} weights")]
    LengthMismatch { ratings: usize, weights: usize },
    #[error("weight {0} is not a positive number")]
    InvalidWeight(f64),
    #[error("rating {0} is outside [1, 10]")]
    RatingOutOfRange(f64),
    #[error("invalid summary statistics (mean {mean}, std {std}, n {n})")]
    InvalidSummary { mean: f64, std: f64, n: f64 },
    #[error("both samples have zero variance (mean difference {difference})")]
    DegenerateVariance { difference: f64 },
    #[error("alpha must be in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("effect size d must be positive, got {0}")]
    InvalidEffectSize(f64),
}

pub const RATING_RANGE: (f64, f64) = (1.0, 10.0);

/// Ratings for one question with one weight per rating.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingSample {
    pub question: String,
    ratings: Vec<f64>,
    weights: Vec<f64>,
}

impl RatingSample {
    pub fn new(
        question: impl Into<String>,
        ratings: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, StatsError> {
        if ratings.len() != weights.len() {
            return Err(StatsError::LengthMismatch {
                ratings: ratings.len(),
                weights: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(StatsError::InvalidWeight(w));
        }
        if let Some(&x) = ratings
            .iter()
            .find(|x| !(RATING_RANGE.0..=RATING_RANGE.1).contains(*x))
        {
            return Err(StatsError::RatingOutOfRange(x));
        }
        Ok(RatingSample {
            question: question.into(),
            ratings,
            weights,
        })
    }

    pub fn unweighted(question: impl Into<String>, ratings: Vec<f64>) -> Result<Self, StatsError> {
        let weights = vec![1.0; ratings.len()];
        RatingSample::new(question, ratings, weights)
    }

    pub fn ratings(&self) -> &[f64] {
        &self.ratings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// Kish's effective sample size `(Σw)² / Σw²`.
    pub fn effective_n(&self) -> f64 {
        let sum: f64 = self.weights.iter().sum();
        let sq: f64 = self.weights.iter().map(|w| w * w).sum();
        if sq == 0.0 {
            0.0
        } else {
            sum * sum / sq
        }
    }
}

/// `Σ wᵢxᵢ / Σ wᵢ`.
pub fn weighted_mean(s: &RatingSample) -> Result<f64, StatsError> {
    if s.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let wsum: f64 = s.weights.iter().sum();
    let wx: f64 = s.ratings.iter().zip(&s.weights).map(|(x, w)| w * x).sum();
    let (lo, hi) = s
        .ratings
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    // rounding can push the quotient one ulp outside the data range
    Ok((wx / wsum).clamp(lo, hi))
}

/// `Σ wᵢ(xᵢ - x̄)² / ((n-1) Σ wᵢ / n)`, the weighted variance whose square
/// root is reported as the weighted standard deviation.
pub fn weighted_var(s: &RatingSample) -> Result<f64, StatsError> {
    let n = s.len();
    if n < 2 {
        return Err(StatsError::InsufficientData { n: n as f64 });
    }
    let mean = weighted_mean(s)?;
    let wsum: f64 = s.weights.iter().sum();
    let ss: f64 = s
        .ratings
        .iter()
        .zip(&s.weights)
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum();
    let n = n as f64;
    Ok(ss / ((n - 1.0) * wsum / n))
}

pub fn weighted_std(s: &RatingSample) -> Result<f64, StatsError> {
    weighted_var(s).map(f64::sqrt)
}

/// Which sample size feeds the inferential tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSize {
    /// Number of ratings.
    #[default]
    Count,
    /// Kish effective sample size of the weights.
    Kish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub n: f64,
}

impl SummaryStats {
    pub fn new(mean: f64, std: f64, n: f64) -> Self {
        SummaryStats { mean, std, n }
    }

    pub fn from_sample(s: &RatingSample, size: SampleSize) -> Result<Self, StatsError> {
        Ok(SummaryStats {
            mean: weighted_mean(s)?,
            std: weighted_std(s)?,
            n: match size {
                SampleSize::Count => s.len() as f64,
                SampleSize::Kish => s.effective_n(),
            },
        })
    }

    fn check(&self) -> Result<(), StatsError> {
        if !(self.mean.is_finite() && self.std.is_finite() && self.std >= 0.0 && self.n.is_finite()) {
            return Err(StatsError::InvalidSummary {
                mean: self.mean,
                std: self.std,
                n: self.n,
            });
        }
        // Kish n can sit a hair below 2 for nearly uniform weights
        if self.n < 2.0 - 1e-9 {
            return Err(StatsError::InsufficientData { n: self.n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n₁ + n₂ - 2` degrees of freedom.
    Student,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Welch => "welch",
            TestKind::Student => "student",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestReport {
    pub kind: TestKind,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

struct Difference {
    diff: f64,
    se: f64,
    df: f64,
}

fn difference(a: &SummaryStats, b: &SummaryStats, kind: TestKind) -> Result<Difference, StatsError> {
    a.check()?;
    b.check()?;
    let diff = a.mean - b.mean;
    if a.std == 0.0 && b.std == 0.0 {
        return Err(StatsError::DegenerateVariance { difference: diff });
    }
    let (va, vb) = (a.std * a.std, b.std * b.std);
    Ok(match kind {
        TestKind::Welch => {
            let (qa, qb) = (va / a.n, vb / b.n);
            let se2 = qa + qb;
            let df = se2 * se2 / (qa * qa / (a.n - 1.0) + qb * qb / (b.n - 1.0));
            Difference {
                diff,
                se: se2.sqrt(),
                df,
            }
        }
        TestKind::Student => {
            let df = a.n + b.n - 2.0;
            let pooled = ((a.n - 1.0) * va + (b.n - 1.0) * vb) / df;
            Difference {
                diff,
                se: (pooled * (1.0 / a.n + 1.0 / b.n)).sqrt(),
                df,
            }
        }
    })
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidAlpha(alpha))
    }
}

/// Two-tailed independent-samples t-test of `a.mean - b.mean = 0` from
/// summary statistics.
pub fn t_test(
    a: &SummaryStats,
    b: &SummaryStats,
    alpha: f64,
    kind: TestKind,
) -> Result<TestReport, StatsError> {
    check_alpha(alpha)?;
    let d = difference(a, b, kind)?;
    let t = d.diff / d.se;
    let p_value = (2.0 * t_sf(t.abs(), d.df)).min(1.0);
    Ok(TestReport {
        kind,
        t,
        df: d.df,
        p_value,
        alpha,
        reject: p_value <= alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub kind: TestKind,
    pub cohen_d: f64,
    pub alpha: f64,
    /// `a.mean - b.mean`.
    pub difference: f64,
    pub bounds: (f64, f64),
    /// The `1 - 2α` confidence interval of the difference (90% at α = 0.05).
    pub ci90: (f64, f64),
    pub df: f64,
    pub t_lower: f64,
    pub t_upper: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub equivalent: bool,
}

/// Standard deviation that converts Cohen's d into raw bounds: the pooled
/// SD for Student, the root mean square of both SDs for Welch.
pub fn standardizer(a: &SummaryStats, b: &SummaryStats, kind: TestKind) -> f64 {
    let (va, vb) = (a.std * a.std, b.std * b.std);
    match kind {
        TestKind::Welch => ((va + vb) / 2.0).sqrt(),
        TestKind::Student => (((a.n - 1.0) * va + (b.n - 1.0) * vb) / (a.n + b.n - 2.0)).sqrt(),
    }
}

/// Two one-sided tests against bounds `±d × standardizer`. Equivalence is
/// declared when the `1 - 2α` interval lies inside the bounds, which is the
/// same as both one-sided p-values being at most α.
pub fn tost(
    a: &SummaryStats,
    b: &SummaryStats,
    d: f64,
    alpha: f64,
    kind: TestKind,
) -> Result<EquivalenceReport, StatsError> {
    check_alpha(alpha)?;
    if !(d.is_finite() && d > 0.0) {
        return Err(StatsError::InvalidEffectSize(d));
    }
    let diff = difference(a, b, kind)?;
    let delta = d * standardizer(a, b, kind);
    let bounds = (-delta, delta);
    let t_lower = (diff.diff - bounds.0) / diff.se;
    let t_upper = (diff.diff - bounds.1) / diff.se;
    let p_lower = t_sf(t_lower, diff.df);
    let p_upper = t_sf(-t_upper, diff.df);
    let half = t_quantile(1.0 - alpha, diff.df) * diff.se;
    let ci90 = (diff.diff - half, diff.diff + half);
    Ok(EquivalenceReport {
        kind,
        cohen_d: d,
        alpha,
        difference: diff.diff,
        bounds,
        ci90,
        df: diff.df,
        t_lower,
        t_upper,
        p_lower,
        p_upper,
        equivalent: bounds.0 <= ci90.0 && ci90.1 <= bounds.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: &[f64], w: &[f64]) -> RatingSample {
        RatingSample::new("q", x.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(weighted_mean(&sample(&[2.0, 4.0], &[1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(weighted_mean(&sample(&[2.0, 4.0], &[3.0, 1.0])).unwrap(), 2.5);
        assert_eq!(weighted_mean(&sample(&[7.3; 5], &[1.0, 2.0, 0.5, 3.0, 1.5])).unwrap(), 7.3);
        assert_eq!(
            weighted_mean(&sample(&[], &[])).unwrap_err(),
            StatsError::EmptySample
        );
    }

    #[test]
    fn std_examples() {
        let s = weighted_std(&sample(&[2.0, 4.0], &[1.0, 1.0])).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(weighted_std(&sample(&[5.0; 4], &[1.0, 2.0, 3.0, 4.0])).unwrap(), 0.0);
        assert!(matches!(
            weighted_std(&sample(&[5.0], &[1.0])),
            Err(StatsError::InsufficientData { .. })
        ));
        let v = weighted_var(&sample(&[2.0, 4.0], &[1.0, 1.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sample_validation() {
        assert!(matches!(
            RatingSample::new("q", vec![1.0], vec![]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            RatingSample::new("q", vec![1.0], vec![0.0]),
            Err(StatsError::InvalidWeight(_))
        ));
        assert!(matches!(
            RatingSample::new("q", vec![11.0], vec![1.0]),
            Err(StatsError::RatingOutOfRange(_))
        ));
    }

    #[test]
    fn kish_effective_n() {
        assert_eq!(sample(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).effective_n(), 3.0);
        let s = sample(&[1.0, 2.0], &[1.0, 3.0]);
        assert!((s.effective_n() - 16.0 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn identical_summaries() {
        let a = SummaryStats::new(6.0, 1.5, 30.0);
        let r = t_test(&a, &a, 0.05, TestKind::Welch).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
    }

    #[test]
    fn welch_reference_value() {
        // scipy.stats.ttest_ind_from_stats(5, 1, 20, 6, 1, 20, equal_var=False)
        let a = SummaryStats::new(5.0, 1.0, 20.0);
        let b = SummaryStats::new(6.0, 1.0, 20.0);
        let r = t_test(&a, &b, 0.05, TestKind::Welch).unwrap();
        assert!((r.t - -3.162_277_660_168_379).abs() < 1e-12);
        assert!((r.df - 38.0).abs() < 1e-12);
        assert!((r.p_value - 0.003_073_007_333_677_187).abs() < 1e-12);
        assert!(r.reject);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let z = SummaryStats::new(5.0, 0.0, 10.0);
        assert_eq!(
            t_test(&z, &z, 0.05, TestKind::Welch).unwrap_err(),
            StatsError::DegenerateVariance { difference: 0.0 }
        );
        let a = SummaryStats::new(5.0, 1.0, 10.0);
        assert_eq!(
            t_test(&a, &a, 1.0, TestKind::Welch).unwrap_err(),
            StatsError::InvalidAlpha(1.0)
        );
        assert!(matches!(
            t_test(&a, &SummaryStats::new(5.0, 1.0, 1.0), 0.05, TestKind::Welch),
            Err(StatsError::InsufficientData { .. })
        ));
        assert_eq!(
            tost(&a, &a, 0.0, 0.05, TestKind::Welch).unwrap_err(),
            StatsError::InvalidEffectSize(0.0)
        );
    }

    #[test]
    fn tost_identical_summaries_large_n() {
        let a = SummaryStats::new(7.0, 2.0, 150.0);
        let r = tost(&a, &a, 0.3, 0.05, TestKind::Welch).unwrap();
        assert_eq!(r.ci90.0, -r.ci90.1);
        assert!((r.bounds.1 - 0.6).abs() < 1e-15);
        assert!(r.equivalent);
    }

    #[test]
    fn tost_verdict_follows_interval() {
        // an interval like [-1.25, 0.14] against bounds of ±0.58 is not equivalent
        let a = SummaryStats::new(6.445, 1.9333, 43.0);
        let b = SummaryStats::new(7.0, 1.9333, 43.0);
        let r = tost(&a, &b, 0.3, 0.05, TestKind::Welch).unwrap();
        assert!((r.bounds.1 - 0.58).abs() < 1e-3);
        assert!(r.ci90.0 < r.bounds.0);
        assert!(!r.equivalent);
        assert_eq!(r.equivalent, r.p_lower <= 0.05 && r.p_upper <= 0.05);
    }

    #[test]
    fn student_uses_pooled_variance() {
        let a = SummaryStats::new(5.0, 1.0, 10.0);
        let b = SummaryStats::new(6.0, 2.0, 20.0);
        let r = t_test(&a, &b, 0.05, TestKind::Student).unwrap();
        assert_eq!(r.df, 28.0);
        let pooled: f64 = (9.0 * 1.0 + 19.0 * 4.0) / 28.0;
        let se = (pooled * 0.15).sqrt();
        assert!((r.t - (-1.0 / se)).abs() < 1e-12);
        assert_eq!(r.kind, TestKind::Student);
    }
}
