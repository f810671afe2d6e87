//! Marginalization of irrationality.
//!
//! A decision process is a list of steps, each tagged rational or irrational
//! and carrying a non-negative impact weight ("power"). The process
//! satisfices when rational power divided by irrational power strictly
//! exceeds a threshold. The same ratio applied to observed versus missing
//! cells gives the information power ratio of a dataset.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Rational,
    Irrational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessStep {
    pub label: String,
    pub kind: StepKind,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionProcess {
    pub name: String,
    pub steps: Vec<ProcessStep>,
}

impl DecisionProcess {
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidInput(format!("process {:?} has no steps", self.name)));
        }
        if let Some(s) = self.steps.iter().find(|s| !(s.power >= 0.0 && s.power.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "step {:?}: power must be finite and non-negative, got {}",
                s.label, s.power
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisficing,
    NotSatisficing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityReport {
    pub rational_power: f64,
    pub irrational_power: f64,
    #[serde(with = "ratio_serde")]
    pub ratio: f64,
    pub threshold: f64,
    pub marginalizable: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationPowerReport {
    pub observed_power: f64,
    pub missing_power: f64,
    #[serde(with = "ratio_serde")]
    pub ratio: f64,
}

/// Sum of step power per kind: `(rational, irrational)`.
pub fn aggregate_powers(p: &DecisionProcess) -> (f64, f64) {
    p.steps.iter().fold((0.0, 0.0), |(r, i), s| match s.kind {
        StepKind::Rational => (r + s.power, i),
        StepKind::Irrational => (r, i + s.power),
    })
}

/// `rational / irrational`, `+inf` when only the numerator is positive.
pub fn rationality_ratio(rational_power: f64, irrational_power: f64) -> Result<f64> {
    if !(rational_power >= 0.0 && irrational_power >= 0.0) {
        return Err(Error::InvalidInput("powers must be non-negative".into()));
    }
    if rational_power == 0.0 && irrational_power == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    if irrational_power == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(rational_power / irrational_power)
}

/// Tag, aggregate and compare: marginalizable iff `ratio > threshold`.
pub fn assess_satisficing(p: &DecisionProcess, threshold: f64) -> Result<RationalityReport> {
    p.validate()?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidConfig(format!("threshold must be positive, got {threshold}")));
    }
    let (rational_power, irrational_power) = aggregate_powers(p);
    let ratio = rationality_ratio(rational_power, irrational_power)?;
    let marginalizable = ratio > threshold;
    Ok(RationalityReport {
        rational_power,
        irrational_power,
        ratio,
        threshold,
        marginalizable,
        verdict: if marginalizable {
            Verdict::Satisficing
        } else {
            Verdict::NotSatisficing
        },
    })
}

/// Observed vs missing cell power. With `weights`, each cell counts its
/// column's weight instead of 1.
pub fn information_power_ratio(d: &Dataset, weights: Option<&[f64]>) -> Result<InformationPowerReport> {
    if d.n_rows() * d.n_cols() == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(w) = weights {
        if w.len() != d.n_cols() {
            return Err(Error::ShapeMismatch {
                context: "column weights",
                expected: d.n_cols(),
                found: w.len(),
            });
        }
        if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("column weights must be positive".into()));
        }
    }
    let mut observed_power = 0.0;
    let mut missing_power = 0.0;
    for (i, &m) in d.mask().iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i % d.n_cols()]);
        if m {
            observed_power += w;
        } else {
            missing_power += w;
        }
    }
    Ok(InformationPowerReport {
        observed_power,
        missing_power,
        ratio: rationality_ratio(observed_power, missing_power)?,
    })
}

/// Finite ratios are plain JSON numbers; `+inf` is written as the string `"inf"`.
mod ratio_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("invalid ratio {s:?}"))),
        }
    }
}
