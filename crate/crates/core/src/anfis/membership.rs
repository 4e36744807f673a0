use serde::{Deserialize, Serialize};

/// Parameterised membership function. Evaluation is always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mf", rename_all = "lowercase", deny_unknown_fields)]
pub enum MembershipFunction {
    /// `1 / (1 + exp(-a(x - c)))`
    Sigmoid { a: f64, c: f64 },
    /// `1 / (1 + |(x - c)/a|^(2b))`
    #[serde(rename = "gbell")]
    GBell { a: f64, b: f64, c: f64 },
}

/// Which family to use when building default networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MfFamily {
    #[default]
    GBell,
    Sigmoid,
}

impl MembershipFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Sigmoid { a, c } => sigmoid(a * (x - c)),
            Self::GBell { a, b, c } => 1.0 / (1.0 + ((x - c) / a).abs().powf(2.0 * b)),
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            Self::Sigmoid { c, .. } | Self::GBell { c, .. } => c,
        }
    }

    pub(crate) fn set_center(&mut self, value: f64) {
        match self {
            Self::Sigmoid { c, .. } | Self::GBell { c, .. } => *c = value,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Self::Sigmoid { .. } => 2,
            Self::GBell { .. } => 3,
        }
    }

    /// Parameters in a fixed order: sigmoid `[a, c]`, bell `[a, b, c]`.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Sigmoid { a, c } => vec![a, c],
            Self::GBell { a, b, c } => vec![a, b, c],
        }
    }

    pub(crate) fn set_params(&mut self, p: &[f64]) {
        match self {
            Self::Sigmoid { a, c } => {
                *a = p[0];
                *c = p[1];
            }
            Self::GBell { a, b, c } => {
                *a = p[0];
                *b = p[1];
                *c = p[2];
            }
        }
    }

    /// Value and partial derivatives with respect to [`params`](Self::params), in the same order.
    pub fn eval_with_grad(&self, x: f64) -> (f64, [f64; 3]) {
        match *self {
            Self::Sigmoid { a, c } => {
                let mu = sigmoid(a * (x - c));
                let s = mu * (1.0 - mu);
                (mu, [s * (x - c), -a * s, 0.0])
            }
            Self::GBell { a, b, c } => {
                let u = (x - c) / a;
                let au = u.abs();
                let g = au.powf(2.0 * b);
                let mu = 1.0 / (1.0 + g);
                let dmu_dg = -mu * mu;
                if au == 0.0 {
                    return (mu, [0.0, 0.0, 0.0]);
                }
                // g = |u|^(2b), u = (x - c)/a
                let dg_da = -2.0 * b * g / a;
                let dg_db = 2.0 * g * au.ln();
                let dg_dc = -2.0 * b * g / (u * a);
                (mu, [dmu_dg * dg_da, dmu_dg * dg_db, dmu_dg * dg_dc])
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Self::Sigmoid { a, c } => a.is_finite() && c.is_finite(),
            Self::GBell { a, b, c } => a.is_finite() && b.is_finite() && c.is_finite() && a > 0.0 && b > 0.0,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Evaluates `mf` at `x`.
pub fn mf_eval(mf: &MembershipFunction, x: f64) -> f64 {
    mf.eval(x)
}
