use std::fmt;
use std::sync::Arc;

use super::path::differentiate;
use super::{domain, AnalysisError, SampledPath};
use crate::kinematics::Vec3;

/// Lagrangian `f(u, u′, t)`.
pub type Lagrangian = dyn Fn(Vec3, Vec3, f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Integrand {
    /// `½|u′|²`.
    Kinetic,
    /// `|u′|`.
    ArcLength,
    Custom(Arc<Lagrangian>),
    /// Precomputed integrand values, one per sample. Only usable for the action itself.
    Tabulated(Vec<f64>),
}

impl Integrand {
    pub fn custom(f: impl Fn(Vec3, Vec3, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    fn eval(&self, u: Vec3, du: Vec3, t: f64) -> f64 {
        match self {
            Self::Kinetic => 0.5 * du.dot(du),
            Self::ArcLength => du.norm(),
            Self::Custom(f) => f(u, du, t),
            Self::Tabulated(_) => unreachable!("tabulated integrands have no closed form"),
        }
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kinetic => f.write_str("Kinetic"),
            Self::ArcLength => f.write_str("ArcLength"),
            Self::Custom(_) => f.write_str("Custom(..)"),
            Self::Tabulated(v) => write!(f, "Tabulated({} values)", v.len()),
        }
    }
}

/// `J = ∫ f(u, u′, t) dt` by the trapezoidal rule, `u′` from finite differences.
pub fn action_integral(path: &SampledPath, f: &Integrand) -> Result<f64, AnalysisError> {
    let n = path.len();
    if n < 3 {
        return domain(format!("action needs at least 3 samples, got {n}"));
    }
    let values: Vec<f64> = match f {
        Integrand::Tabulated(v) => {
            if v.len() != n {
                return domain(format!("tabulated integrand has {} values for {n} samples", v.len()));
            }
            v.clone()
        }
        _ => {
            let du = path.derivative();
            (0..n).map(|i| f.eval(path.points()[i], du[i], path.time(i))).collect()
        }
    };
    let inner: f64 = values[1..n - 1].iter().sum();
    Ok(path.dt() * (inner + 0.5 * (values[0] + values[n - 1])))
}

/// Central-difference gradient of `g` at `x`, one component at a time.
fn gradient(x: Vec3, g: impl Fn(Vec3) -> f64) -> Vec3 {
    let mut out = [0.0; 3];
    let xs = x.to_array();
    for k in 0..3 {
        let h = 1e-5 * xs[k].abs().max(1.0);
        let (mut plus, mut minus) = (xs, xs);
        plus[k] += h;
        minus[k] -= h;
        out[k] = (g(plus.into()) - g(minus.into())) / (plus[k] - minus[k]);
    }
    out.into()
}

/// Largest Euler–Lagrange residual `|∂f/∂u − d/dt ∂f/∂u′|` over samples `2..n−2`.
/// All partials come from finite differences.
pub fn stationarity_residual(path: &SampledPath, f: &Integrand) -> Result<f64, AnalysisError> {
    let n = path.len();
    if n < 5 {
        return domain(format!("stationarity check needs at least 5 samples, got {n}"));
    }
    if matches!(f, Integrand::Tabulated(_)) {
        return domain("tabulated integrands carry no partial derivatives");
    }
    let u = path.points();
    let du = path.derivative();
    let p: Vec<Vec3> = (0..n)
        .map(|i| gradient(du[i], |v| f.eval(u[i], v, path.time(i))))
        .collect();
    let dp = differentiate(&p, path.dt());
    Ok((2..n - 2)
        .map(|i| {
            let e = gradient(u[i], |x| f.eval(x, du[i], path.time(i)));
            (e - dp[i]).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct ActionEvaluation {
    pub j: f64,
    pub lambda: f64,
    pub path: SampledPath,
    /// Zero at both endpoints.
    pub perturbation: SampledPath,
}

/// Action of `path + λ·perturbation`. The perturbation must share the sampling grid and
/// vanish exactly at both ends.
pub fn perturbed_action(
    path: &SampledPath,
    perturbation: &SampledPath,
    lambda: f64,
    f: &Integrand,
) -> Result<ActionEvaluation, AnalysisError> {
    if perturbation.len() != path.len() || perturbation.dt() != path.dt() || perturbation.t0() != path.t0() {
        return domain("perturbation must use the same sampling grid as the path");
    }
    let np = perturbation.points();
    if np[0] != Vec3::ZERO || np[np.len() - 1] != Vec3::ZERO {
        return domain("perturbation must vanish at both endpoints");
    }
    let moved: Vec<Vec3> = path.points().iter().zip(np).map(|(u, n)| *u + *n * lambda).collect();
    let moved = SampledPath::new(path.t0(), path.dt(), moved)?;
    Ok(ActionEvaluation {
        j: action_integral(&moved, f)?,
        lambda,
        path: path.clone(),
        perturbation: perturbation.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn scalar(t1: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledPath {
        SampledPath::from_fn(0.0, t1, n, |t| Vec3::new(f(t), 0.0, 0.0)).unwrap()
    }

    fn oscillator() -> Integrand {
        Integrand::custom(|u, du, _| 0.5 * du.dot(du) - 0.5 * u.dot(u))
    }

    #[test]
    fn kinetic_action_examples() {
        let line = scalar(1.0, 101, |t| t);
        assert!((action_integral(&line, &Integrand::Kinetic).unwrap() - 0.5).abs() < 1e-12);
        let still = scalar(1.0, 101, |_| 3.0);
        assert_eq!(action_integral(&still, &Integrand::Kinetic).unwrap(), 0.0);
        let s = scalar(PI, 1000, f64::sin);
        assert!((action_integral(&s, &Integrand::Kinetic).unwrap() - PI / 4.0).abs() < 1e-3);
        assert!(action_integral(&scalar(1.0, 2, |t| t), &Integrand::Kinetic).is_err());
    }

    #[test]
    fn arc_length_of_a_line() {
        let p = SampledPath::from_fn(0.0, 2.0, 50, |t| Vec3::new(3.0 * t, 4.0 * t, 0.0)).unwrap();
        assert!((action_integral(&p, &Integrand::ArcLength).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_matches_trapezoid() {
        let p = scalar(1.0, 3, |t| t);
        let j = action_integral(&p, &Integrand::Tabulated(vec![0.0, 1.0, 0.0])).unwrap();
        assert_eq!(j, 0.5);
        assert!(action_integral(&p, &Integrand::Tabulated(vec![1.0])).is_err());
        assert!(stationarity_residual(&scalar(1.0, 9, |t| t), &Integrand::Tabulated(vec![0.0; 9])).is_err());
    }

    #[test]
    fn lines_are_stationary_for_kinetic_action() {
        for n in [500, 2000] {
            let r = stationarity_residual(&scalar(1.0, n, |t| t), &Integrand::Kinetic).unwrap();
            assert!(r < 1e-6, "n={n}: {r}");
        }
    }

    #[test]
    fn parabola_residual_is_its_curvature() {
        let r = stationarity_residual(&scalar(1.0, 501, |t| t * t), &Integrand::Kinetic).unwrap();
        assert!((r - 2.0).abs() < 1e-4, "{r}");
    }

    #[test]
    fn residual_shrinks_with_sampling_on_a_stationary_path() {
        let r500 = stationarity_residual(&scalar(PI, 500, f64::sin), &oscillator()).unwrap();
        let r2000 = stationarity_residual(&scalar(PI, 2000, f64::sin), &oscillator()).unwrap();
        assert!(r2000 < r500, "{r2000} !< {r500}");
        assert!(r2000 < 1e-5);
    }

    #[test]
    fn endpoint_fixed_perturbation_has_zero_first_variation() {
        let line = scalar(1.0, 1001, |t| t);
        let n = SampledPath::from_fn(0.0, 1.0, 1001, |t| {
            let v = (PI * t).sin();
            Vec3::new(if t == 0.0 || t == 1.0 { 0.0 } else { v }, 0.0, 0.0)
        })
        .unwrap();
        let j = |l: f64| perturbed_action(&line, &n, l, &Integrand::Kinetic).unwrap().j;
        let lambda = 0.01;
        assert!(j(lambda) > j(0.0));
        assert!(((j(lambda) - j(-lambda)) / (2.0 * lambda)).abs() < 1e-6);
    }

    #[test]
    fn perturbation_must_vanish_at_ends() {
        let line = scalar(1.0, 11, |t| t);
        let bad = scalar(1.0, 11, |_| 1.0);
        assert!(perturbed_action(&line, &bad, 0.1, &Integrand::Kinetic).is_err());
    }

    proptest! {
        #[test]
        fn kinetic_action_is_convex_in_lambda(
            a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1u32..4, h in 1e-3f64..0.5,
        ) {
            let path = scalar(1.0, 201, |t| a * t * t + b * t);
            let n = SampledPath::from_fn(0.0, 1.0, 201, |t| {
                let v = (k as f64 * PI * t).sin();
                Vec3::new(if t == 0.0 || t == 1.0 { 0.0 } else { v }, 0.0, 0.0)
            }).unwrap();
            let j = |l: f64| perturbed_action(&path, &n, l, &Integrand::Kinetic).unwrap().j;
            prop_assert!(j(-h) + j(h) >= 2.0 * j(0.0) - 1e-12);
        }
    }
}
