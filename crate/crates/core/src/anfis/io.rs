//! Versioned text format for trained networks.
//!
//! ```toml
//! schema_version = 1
//! learning_rate = 0.01
//! consequent_bias = true
//!
//! [[inputs]]
//! name = "position_error"
//! universe = [-1.0, 1.0]
//! terms = [
//!     { label = "NB", mf = "gbell", a = 0.2857, b = 2.0, c = -1.0 },
//!     # ... seven terms, NB through PB
//! ]
//!
//! [[rules]]
//! antecedent = ["NS", "NS", "NS"]
//! p = 0.0
//! q = 0.0
//! s = 0.0
//! bias = 0.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnfisError, AnfisNetwork, Consequent, LinguisticVariable, MembershipFunction, Rule, Term, TERM_COUNT};

pub const ANFIS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    schema_version: u32,
    learning_rate: f64,
    consequent_bias: bool,
    inputs: Vec<InputDoc>,
    rules: Vec<RuleDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    name: String,
    universe: [f64; 2],
    terms: Vec<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    label: String,
    mf: String,
    a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    c: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    antecedent: [String; 3],
    p: f64,
    q: f64,
    s: f64,
    #[serde(default)]
    bias: f64,
}

fn fmt_err(msg: impl Into<String>) -> AnfisError {
    AnfisError::Format(msg.into())
}

impl AnfisNetwork {
    pub fn to_toml_string(&self) -> String {
        let doc = NetworkDoc {
            schema_version: ANFIS_SCHEMA_VERSION,
            learning_rate: self.learning_rate,
            consequent_bias: self.consequent_bias,
            inputs: self
                .inputs
                .iter()
                .map(|v| InputDoc {
                    name: v.name.clone(),
                    universe: [v.universe.0, v.universe.1],
                    terms: v
                        .terms
                        .iter()
                        .zip(Term::ALL)
                        .map(|(mf, t)| match *mf {
                            MembershipFunction::Sigmoid { a, c } => TermDoc {
                                label: t.label().into(),
                                mf: "sigmoid".into(),
                                a,
                                b: None,
                                c,
                            },
                            MembershipFunction::GBell { a, b, c } => TermDoc {
                                label: t.label().into(),
                                mf: "gbell".into(),
                                a,
                                b: Some(b),
                                c,
                            },
                        })
                        .collect(),
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleDoc {
                    antecedent: r.antecedent.map(|t| t.label().to_string()),
                    p: r.consequent.p,
                    q: r.consequent.q,
                    s: r.consequent.s,
                    bias: r.consequent.bias,
                })
                .collect(),
        };
        toml::to_string(&doc).expect("network document is always representable")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, AnfisError> {
        let doc: NetworkDoc = toml::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
        if doc.schema_version != ANFIS_SCHEMA_VERSION {
            return Err(fmt_err(format!(
                "unsupported schema_version {} (expected {ANFIS_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        if doc.inputs.len() != 3 {
            return Err(fmt_err(format!("expected 3 inputs, found {}", doc.inputs.len())));
        }
        let mut inputs = Vec::with_capacity(3);
        for input in doc.inputs {
            if input.terms.len() != TERM_COUNT {
                return Err(fmt_err(format!("{}: expected 7 terms, found {}", input.name, input.terms.len())));
            }
            let mut terms = [MembershipFunction::Sigmoid { a: 1.0, c: 0.0 }; TERM_COUNT];
            for (k, (term, expected)) in input.terms.iter().zip(Term::ALL).enumerate() {
                if Term::parse(&term.label) != Some(expected) {
                    return Err(fmt_err(format!(
                        "{}: term {k} is labelled {:?}, expected {}",
                        input.name,
                        term.label,
                        expected.label()
                    )));
                }
                terms[k] = match (term.mf.as_str(), term.b) {
                    ("sigmoid", None) => MembershipFunction::Sigmoid { a: term.a, c: term.c },
                    ("gbell", Some(b)) => MembershipFunction::GBell { a: term.a, b, c: term.c },
                    (other, _) => {
                        return Err(fmt_err(format!(
                            "{}: term {} has mf {other:?}; sigmoid takes (a, c), gbell takes (a, b, c)",
                            input.name, term.label
                        )))
                    }
                };
            }
            inputs.push(LinguisticVariable {
                name: input.name,
                universe: (input.universe[0], input.universe[1]),
                terms,
            });
        }
        let rules = doc
            .rules
            .iter()
            .map(|r| {
                let mut antecedent = [Term::ZE; 3];
                for (slot, label) in antecedent.iter_mut().zip(&r.antecedent) {
                    *slot = Term::parse(label).ok_or_else(|| fmt_err(format!("unknown term label {label:?}")))?;
                }
                Ok(Rule::new(
                    antecedent,
                    Consequent {
                        p: r.p,
                        q: r.q,
                        s: r.s,
                        bias: r.bias,
                    },
                ))
            })
            .collect::<Result<Vec<_>, AnfisError>>()?;
        let inputs: [LinguisticVariable; 3] = inputs.try_into().expect("length checked above");
        let mut net = AnfisNetwork::new(inputs, rules, doc.learning_rate)?;
        net.consequent_bias = doc.consequent_bias;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AnfisError> {
        std::fs::write(path.as_ref(), self.to_toml_string())
            .map_err(|e| fmt_err(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnfisError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| fmt_err(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }
}
