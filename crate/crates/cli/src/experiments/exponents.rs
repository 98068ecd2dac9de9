use dispersive_lab::exponents::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{lib, Experiment, Outcome};
use crate::config::{config_error, EquationKind, RationalInput};
use crate::record::Status;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSelection {
    pub triple: String,
    pub beta: RationalInput,
    pub epsilon: Option<RationalInput>,
}

/// Exponent selection. For `equation = "nlw"` the regularity `s` is the
/// working value in `(0, 1/2]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub equation: EquationKind,
    pub n: u32,
    pub s: RationalInput,
    pub p: RationalInput,
    /// Fixed epsilon; the window midpoint when absent.
    pub epsilon: Option<RationalInput>,
    pub expect: Option<ExpectedSelection>,
}

impl Experiment for ExponentsConfig {
    const NAME: &'static str = "exponents";
    const ANCHOR: &'static str = "exponent selection for the contraction argument";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let s = self.s.value("s")?;
        let p = self.p.value("p")?;
        let pick = match &self.epsilon {
            Some(e) => EpsilonPick::Fixed(e.value("epsilon")?),
            None => EpsilonPick::Midpoint,
        };
        let (k, selected) = match self.equation.flow() {
            FlowOrder::Schrodinger => (2, select_schrodinger_exponents(self.n, s, p, pick)),
            FlowOrder::Wave => (1, select_wave_exponents(self.n, s, p, pick)),
        };
        let tolerance = "exact".to_string();
        let sel = match selected {
            Ok(sel) => sel,
            Err(e @ (dispersive_lab::Error::EmptyWindow { .. } | dispersive_lab::Error::OutsideRange(_))) => {
                return Ok(Outcome::new(Status::Fail, format!("no selection: {e}"), tolerance, json!({ "error": e.to_string() })));
            }
            Err(e) => return Err(lib(e)),
        };
        let class = match self.equation.flow() {
            FlowOrder::Schrodinger => in_class_s(self.n, k, &sel.triple),
            FlowOrder::Wave => in_class_w(self.n, k, &sel.triple),
        };
        let s_crit = critical_index(self.n, p).map_err(lib)?;
        let mut ok = class && sel.beta > Rational::from_integer(0);
        let mut mismatches = Vec::new();
        if let Some(exp) = &self.expect {
            let triple: ExponentTriple = match exp.triple.parse() {
                Ok(t) => t,
                Err(e) => return config_error(format!("field `expect.triple`: {e}")),
            };
            if triple != sel.triple {
                mismatches.push(format!("triple {} != {}", sel.triple, triple));
            }
            let beta = exp.beta.value("expect.beta")?;
            if beta != sel.beta {
                mismatches.push(format!("beta {} != {}", sel.beta, beta));
            }
            if let Some(e) = &exp.epsilon {
                let e = e.value("expect.epsilon")?;
                if e != sel.epsilon {
                    mismatches.push(format!("epsilon {} != {}", sel.epsilon, e));
                }
            }
            ok &= mismatches.is_empty();
        }
        let results = json!({
            "k": k,
            "epsilon": sel.epsilon.to_string(),
            "window": [sel.window.0.to_string(), sel.window.1.to_string()],
            "triple": sel.triple.to_string(),
            "beta": sel.beta.to_string(),
            "in_class": class,
            "critical_index": s_crit.to_string(),
            "mismatches": mismatches,
        });
        let summary = format!("eps {} triple {} beta {}", sel.epsilon, sel.triple, sel.beta);
        Ok(Outcome::new(Status::from_bool(ok), summary, tolerance, results))
    }
}
