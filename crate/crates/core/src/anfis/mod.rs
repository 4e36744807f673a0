//! Three-input Takagi–Sugeno adaptive neuro-fuzzy inference.
//!
//! The forward pass has five layers:
//!
//! 1. membership degree of each input in each of its seven linguistic terms;
//! 2. rule firing strength `α_i`, the product of the rule's three antecedent degrees;
//! 3. normalised strength `β_i = α_i / Σα_j`;
//! 4. weighted rule output `β_i·z_i`, where `z_i = p·a1 + q·a2 + s·a3 + bias`;
//! 5. the sum `O = Σ β_i·z_i`.
//!
//! Training alternates a global least-squares solve for the consequents with a
//! gradient step on the premise (membership) parameters; see [`train_epoch`].

mod io;
mod membership;
mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use io::ANFIS_SCHEMA_VERSION;
pub use membership::{mf_eval, MembershipFunction, MfFamily};
pub use train::{gradient_check, premise_gradient, total_error, train_epoch, EpochReport, LeastSquaresOutcome, RIDGE_LAMBDA};

pub const TERM_COUNT: usize = 7;
pub const INPUT_COUNT: usize = 3;
/// Rule count of the full antecedent grid.
pub const FULL_GRID_RULES: usize = TERM_COUNT * TERM_COUNT * TERM_COUNT;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnfisError {
    #[error("no rule fires for input ({0}, {1}, {2})")]
    Coverage(f64, f64, f64),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),
    #[error("network file: {0}")]
    Format(String),
}

/// Linguistic term labels, negative big through positive big.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    NB,
    NM,
    NS,
    ZE,
    PS,
    PM,
    PB,
}

impl Term {
    pub const ALL: [Term; TERM_COUNT] = [Term::NB, Term::NM, Term::NS, Term::ZE, Term::PS, Term::PM, Term::PB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Term> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Term::NB => "NB",
            Term::NM => "NM",
            Term::NS => "NS",
            Term::ZE => "ZE",
            Term::PS => "PS",
            Term::PM => "PM",
            Term::PB => "PB",
        }
    }

    pub fn parse(label: &str) -> Option<Term> {
        Self::ALL.into_iter().find(|t| t.label().eq_ignore_ascii_case(label))
    }
}

/// One crisp input with seven membership functions over a closed universe.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    pub name: String,
    pub universe: (f64, f64),
    pub terms: [MembershipFunction; TERM_COUNT],
}

impl LinguisticVariable {
    /// Evenly spaced term centres across the universe. Bells get width `w/7` and shape 2;
    /// sigmoids get slope `10/w`, negated for the three negative terms.
    pub fn uniform(name: impl Into<String>, lo: f64, hi: f64, family: MfFamily) -> Result<Self, AnfisError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(AnfisError::InvalidNetwork(format!("universe [{lo}, {hi}] is empty")));
        }
        let width = hi - lo;
        let spacing = width / (TERM_COUNT - 1) as f64;
        let terms = std::array::from_fn(|k| {
            let c = if k == TERM_COUNT - 1 { hi } else { lo + spacing * k as f64 };
            match family {
                MfFamily::GBell => MembershipFunction::GBell {
                    a: width / TERM_COUNT as f64,
                    b: 2.0,
                    c,
                },
                MfFamily::Sigmoid => {
                    let slope = 10.0 / width;
                    MembershipFunction::Sigmoid {
                        a: if k < 3 { -slope } else { slope },
                        c,
                    }
                }
            }
        });
        Ok(Self {
            name: name.into(),
            universe: (lo, hi),
            terms,
        })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe.0, self.universe.1)
    }

    pub fn validate(&self) -> Result<(), AnfisError> {
        let (lo, hi) = self.universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(AnfisError::InvalidNetwork(format!("{}: universe [{lo}, {hi}] is empty", self.name)));
        }
        let mut prev = f64::NEG_INFINITY;
        for (k, mf) in self.terms.iter().enumerate() {
            if !mf.is_valid() {
                return Err(AnfisError::InvalidNetwork(format!("{}: term {k} has invalid parameters", self.name)));
            }
            let c = mf.center();
            if c < prev || c < lo || c > hi {
                return Err(AnfisError::InvalidNetwork(format!(
                    "{}: term centres must be nondecreasing inside the universe",
                    self.name
                )));
            }
            prev = c;
        }
        Ok(())
    }

    /// Restores the centre ordering/containment invariant after a parameter update.
    pub(crate) fn project(&mut self) {
        let (lo, hi) = self.universe;
        let mut prev = lo;
        for mf in self.terms.iter_mut() {
            let c = mf.center().clamp(prev, hi);
            mf.set_center(c);
            prev = c;
            if let MembershipFunction::GBell { a, b, .. } = mf {
                *a = a.max(MIN_BELL_PARAM);
                *b = b.max(MIN_BELL_PARAM);
            }
        }
    }
}

const MIN_BELL_PARAM: f64 = 1e-6;

/// Linear rule output `z = p·a1 + q·a2 + s·a3 + bias`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Consequent {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub bias: f64,
}

impl Consequent {
    pub fn constant(bias: f64) -> Self {
        Self {
            bias,
            ..Self::default()
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.p * x[0] + self.q * x[1] + self.s * x[2] + self.bias
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rule {
    pub antecedent: [Term; INPUT_COUNT],
    pub consequent: Consequent,
}

impl Rule {
    pub fn new(antecedent: [Term; INPUT_COUNT], consequent: Consequent) -> Self {
        Self { antecedent, consequent }
    }
}

/// The sixteen-rule default base: every combination of {NS, PS} on the three inputs
/// followed by every combination of {NM, PM}.
pub fn default_rules() -> Vec<Rule> {
    let mut rules = Vec::with_capacity(16);
    for pair in [[Term::NS, Term::PS], [Term::NM, Term::PM]] {
        for &t1 in &pair {
            for &t2 in &pair {
                for &t3 in &pair {
                    rules.push(Rule::new([t1, t2, t3], Consequent::default()));
                }
            }
        }
    }
    rules
}

/// All 343 antecedent combinations.
pub fn full_grid_rules() -> Vec<Rule> {
    let mut rules = Vec::with_capacity(FULL_GRID_RULES);
    for t1 in Term::ALL {
        for t2 in Term::ALL {
            for t3 in Term::ALL {
                rules.push(Rule::new([t1, t2, t3], Consequent::default()));
            }
        }
    }
    rules
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnfisNetwork {
    pub inputs: [LinguisticVariable; INPUT_COUNT],
    pub rules: Vec<Rule>,
    /// Gradient step size for the premise parameters.
    pub learning_rate: f64,
    /// Include the constant term in rule consequents.
    pub consequent_bias: bool,
}

/// Every intermediate quantity of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Inputs after clamping to their universes.
    pub inputs: [f64; INPUT_COUNT],
    /// `memberships[j][k]`: degree of input `j` in term `k`.
    pub memberships: [[f64; TERM_COUNT]; INPUT_COUNT],
    /// `α_i`
    pub firing: Vec<f64>,
    /// `β_i`
    pub normalized: Vec<f64>,
    /// `z_i`
    pub rule_outputs: Vec<f64>,
    /// `β_i·z_i`
    pub weighted: Vec<f64>,
    pub firing_sum: f64,
    /// `O`
    pub output: f64,
}

impl AnfisNetwork {
    pub fn new(inputs: [LinguisticVariable; INPUT_COUNT], rules: Vec<Rule>, learning_rate: f64) -> Result<Self, AnfisError> {
        let net = Self {
            inputs,
            rules,
            learning_rate,
            consequent_bias: true,
        };
        net.validate()?;
        Ok(net)
    }

    /// Default sixteen-rule network over the given universes with zero consequents.
    pub fn with_default_rules(universes: [(f64, f64); INPUT_COUNT], family: MfFamily) -> Result<Self, AnfisError> {
        let names = ["position_error", "speed", "acceleration"];
        let inputs = [
            LinguisticVariable::uniform(names[0], universes[0].0, universes[0].1, family)?,
            LinguisticVariable::uniform(names[1], universes[1].0, universes[1].1, family)?,
            LinguisticVariable::uniform(names[2], universes[2].0, universes[2].1, family)?,
        ];
        Self::new(inputs, default_rules(), 0.01)
    }

    /// A one-rule network whose output is the constant `value` everywhere.
    pub fn constant(universes: [(f64, f64); INPUT_COUNT], value: f64) -> Result<Self, AnfisError> {
        let mut net = Self::with_default_rules(universes, MfFamily::GBell)?;
        net.rules = vec![Rule::new([Term::ZE; 3], Consequent::constant(value))];
        Ok(net)
    }

    pub fn without_bias(mut self) -> Self {
        self.consequent_bias = false;
        for r in &mut self.rules {
            r.consequent.bias = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<(), AnfisError> {
        if self.rules.is_empty() {
            return Err(AnfisError::InvalidNetwork("at least one rule is required".into()));
        }
        if self.rules.len() > FULL_GRID_RULES {
            return Err(AnfisError::InvalidNetwork(format!(
                "{} rules exceed the {FULL_GRID_RULES}-rule grid",
                self.rules.len()
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(AnfisError::InvalidNetwork(format!("learning rate {} is invalid", self.learning_rate)));
        }
        for v in &self.inputs {
            v.validate()?;
        }
        Ok(())
    }

    pub fn universes(&self) -> [(f64, f64); INPUT_COUNT] {
        std::array::from_fn(|j| self.inputs[j].universe)
    }

    /// Clamps `x` componentwise into the input universes.
    pub fn clamp_inputs(&self, x: [f64; INPUT_COUNT]) -> [f64; INPUT_COUNT] {
        std::array::from_fn(|j| self.inputs[j].clamp(x[j]))
    }

    /// Number of free consequent coefficients per rule.
    pub fn consequent_width(&self) -> usize {
        if self.consequent_bias {
            4
        } else {
            3
        }
    }

    pub fn forward(&self, a1: f64, a2: f64, a3: f64) -> Result<ForwardTrace, AnfisError> {
        let x = self.clamp_inputs([a1, a2, a3]);
        let memberships: [[f64; TERM_COUNT]; INPUT_COUNT] =
            std::array::from_fn(|j| std::array::from_fn(|k| self.inputs[j].terms[k].eval(x[j])));
        let firing: Vec<f64> = self
            .rules
            .iter()
            .map(|r| {
                memberships[0][r.antecedent[0].index()]
                    * memberships[1][r.antecedent[1].index()]
                    * memberships[2][r.antecedent[2].index()]
            })
            .collect();
        let firing_sum: f64 = firing.iter().sum();
        if !(firing_sum > 0.0) {
            return Err(AnfisError::Coverage(a1, a2, a3));
        }
        let normalized: Vec<f64> = firing.iter().map(|a| a / firing_sum).collect();
        let rule_outputs: Vec<f64> = self.rules.iter().map(|r| r.consequent.eval(x)).collect();
        let weighted: Vec<f64> = normalized.iter().zip(&rule_outputs).map(|(b, z)| b * z).collect();
        let output = weighted.iter().sum();
        Ok(ForwardTrace {
            inputs: x,
            memberships,
            firing,
            normalized,
            rule_outputs,
            weighted,
            firing_sum,
            output,
        })
    }

    /// Crisp output only.
    pub fn output(&self, a1: f64, a2: f64, a3: f64) -> Result<f64, AnfisError> {
        Ok(self.forward(a1, a2, a3)?.output)
    }

    /// Premise parameters flattened input by input, term by term.
    pub fn premise_params(&self) -> Vec<f64> {
        self.inputs
            .iter()
            .flat_map(|v| v.terms.iter().flat_map(|mf| mf.params()))
            .collect()
    }

    pub fn set_premise_params(&mut self, params: &[f64]) {
        let mut off = 0;
        for v in self.inputs.iter_mut() {
            for mf in v.terms.iter_mut() {
                let n = mf.param_count();
                mf.set_params(&params[off..off + n]);
                off += n;
            }
        }
    }

    /// Perturbs premise parameters deterministically: centres by up to `scale` of the
    /// term spacing, bell widths and slopes by up to `scale` relative.
    pub fn jitter_premises(&mut self, seed: u64, scale: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in self.inputs.iter_mut() {
            let spacing = (v.universe.1 - v.universe.0) / (TERM_COUNT - 1) as f64;
            for mf in v.terms.iter_mut() {
                let dc = rng.random_range(-1.0..1.0) * scale * spacing;
                let da = 1.0 + rng.random_range(-1.0..1.0) * scale;
                match mf {
                    MembershipFunction::GBell { a, b, c } => {
                        *a *= da;
                        *b *= 1.0 + rng.random_range(-1.0..1.0) * scale;
                        *c += dc;
                    }
                    MembershipFunction::Sigmoid { a, c } => {
                        *a *= da;
                        *c += dc;
                    }
                }
            }
            v.project();
        }
    }
}

/// Free-function form of [`AnfisNetwork::forward`].
pub fn forward(net: &AnfisNetwork, a1: f64, a2: f64, a3: f64) -> Result<ForwardTrace, AnfisError> {
    net.forward(a1, a2, a3)
}

/// Input/target pairs for supervised training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub records: Vec<([f64; INPUT_COUNT], f64)>,
}

impl TrainingSet {
    pub fn new(records: Vec<([f64; INPUT_COUNT], f64)>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, x: [f64; INPUT_COUNT], target: f64) {
        self.records.push((x, target));
    }

    /// Checks the set is non-empty, finite and inside the network's universes.
    pub fn validate_for(&self, net: &AnfisNetwork) -> Result<(), AnfisError> {
        if self.records.is_empty() {
            return Err(AnfisError::InvalidTrainingSet("no records".into()));
        }
        for (i, (x, y)) in self.records.iter().enumerate() {
            if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(AnfisError::InvalidTrainingSet(format!("record {i} is not finite")));
            }
            for (j, v) in x.iter().enumerate() {
                let (lo, hi) = net.inputs[j].universe;
                if *v < lo || *v > hi {
                    return Err(AnfisError::InvalidTrainingSet(format!(
                        "record {i}: input {j} = {v} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }
}
