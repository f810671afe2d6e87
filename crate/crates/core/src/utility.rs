//! Expected-utility choice among alternatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityOption {
    pub label: String,
    pub impact: f64,
    pub probability: f64,
}

/// Alternatives to choose from. Probabilities need not sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub options: Vec<UtilityOption>,
}

impl UtilitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.options.is_empty() {
            return Err(Error::InvalidInput("utility spec has no options".into()));
        }
        for o in &self.options {
            if !o.impact.is_finite() {
                return Err(Error::InvalidInput(format!("option {:?}: impact is not finite", o.label)));
            }
            if !(0.0..=1.0).contains(&o.probability) {
                return Err(Error::InvalidInput(format!(
                    "option {:?}: probability {} outside [0, 1]",
                    o.label, o.probability
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub chosen_label: String,
    pub chosen_index: usize,
    pub expected_utilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_outputs: Option<Vec<f64>>,
}

/// Pick the option with the largest `impact × probability`; ties go to the
/// lowest index.
pub fn choose_rational(u: &UtilitySpec) -> Result<DecisionOutcome> {
    u.validate()?;
    let expected_utilities: Vec<f64> = u.options.iter().map(|o| o.impact * o.probability).collect();
    let mut chosen = 0;
    for (i, &eu) in expected_utilities.iter().enumerate().skip(1) {
        if eu > expected_utilities[chosen] {
            chosen = i;
        }
    }
    Ok(DecisionOutcome {
        chosen_label: u.options[chosen].label.clone(),
        chosen_index: chosen,
        expected_utilities,
        model_outputs: None,
    })
}
