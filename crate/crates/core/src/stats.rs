//! Detection metrics and correlation significance testing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CorruptionMask, FlagSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Nothing was flagged, so precision is reported as 0.
    pub precision_degenerate: bool,
    /// Nothing was corrupted, so recall is reported as 0.
    pub recall_degenerate: bool,
}

impl DetectionMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                (0.0, true)
            } else {
                (num as f64 / den as f64, false)
            }
        };
        let (precision, precision_degenerate) = ratio(tp, tp + fp);
        let (recall, recall_degenerate) = ratio(tp, tp + fn_);
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1: f1_score(precision, recall),
            precision_degenerate,
            recall_degenerate,
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn detection_metrics(flags: &FlagSet, mask: &CorruptionMask) -> Result<DetectionMetrics> {
    if let Some(max) = flags.max_index() {
        if max >= mask.len() {
            return Err(Error::ShapeMismatch(format!(
                "flag index {max} out of range for {} samples",
                mask.len()
            )));
        }
    }
    let tp = flags.iter().filter(|&z| mask.is_flipped(z)).count();
    let fp = flags.len() - tp;
    let fn_ = mask.num_flipped() - tp;
    Ok(DetectionMetrics::from_counts(tp, fp, fn_))
}

/// Product-moment correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `t = r sqrt(n - 2) / sqrt(1 - r^2)`.
pub fn t_statistic(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if r.is_nan() || r.abs() >= 1.0 {
        return Err(Error::ROutOfRange(r));
    }
    Ok(r * ((n - 2) as f64).sqrt() / (1.0 - r * r).sqrt())
}

/// Two-sided p-value `2 (1 - F(|t|; df))` of Student's t distribution.
pub fn p_two_sided(t: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidDf(df));
    }
    let a = t.abs();
    if a == 0.0 {
        return Ok(1.0);
    }
    if a.is_infinite() {
        return Ok(0.0);
    }
    let p = match df {
        1 => 2.0 / PI * (1.0 / a).atan(),
        2 => 1.0 - a / (a * a + 2.0).sqrt(),
        _ => {
            let v = df as f64;
            regularized_incomplete_beta(v / (v + a * a), v / 2.0, 0.5)
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Student's t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: usize) -> Result<f64> {
    let tail = p_two_sided(t, df)? / 2.0;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r: f64,
    pub n: usize,
    pub df: usize,
    pub t: f64,
    pub p: f64,
    pub alpha: f64,
    pub reject_null: bool,
}

pub fn correlation_report(xs: &[f64], ys: &[f64], alpha: f64) -> Result<CorrelationReport> {
    let r = pearson_r(xs, ys)?;
    let n = xs.len();
    let df = n - 2;
    let t = t_statistic(r, n)?;
    let p = p_two_sided(t, df)?;
    Ok(CorrelationReport {
        r,
        n,
        df,
        t,
        p,
        alpha,
        reject_null: p < alpha,
    })
}

/// Lanczos approximation (g = 7, 9 coefficients).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEF[1..]
        .iter()
        .enumerate()
        .fold(COEF[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// `I_x(a, b)` via the continued fraction, using the symmetry relation for
/// `x` past the mean so the fraction converges quickly.
pub(crate) fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
