use super::{domain, AnalysisError};
use crate::kinematics::{Trajectory, Vec3};

/// Uniformly time-sampled curve. Scalar paths store their value in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    t0: f64,
    dt: f64,
    points: Vec<Vec3>,
}

impl SampledPath {
    pub fn new(t0: f64, dt: f64, points: Vec<Vec3>) -> Result<Self, AnalysisError> {
        if points.len() < 2 {
            return domain(format!("a path needs at least 2 samples, got {}", points.len()));
        }
        if !(dt.is_finite() && dt > 0.0 && t0.is_finite()) {
            return domain(format!("sample spacing must be positive, got {dt}"));
        }
        Ok(Self { t0, dt, points })
    }

    pub fn scalar(t0: f64, dt: f64, values: &[f64]) -> Result<Self, AnalysisError> {
        Self::new(t0, dt, values.iter().map(|&v| Vec3::new(v, 0.0, 0.0)).collect())
    }

    /// `n` samples of `f` spanning `[t0, t1]` inclusive.
    pub fn from_fn(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> Vec3) -> Result<Self, AnalysisError> {
        if n < 2 || !(t1 > t0) {
            return domain(format!("need n ≥ 2 and t1 > t0, got n={n}, [{t0}, {t1}]"));
        }
        let dt = (t1 - t0) / (n - 1) as f64;
        Self::new(t0, dt, (0..n).map(|i| f(t0 + i as f64 * dt)).collect())
    }

    pub fn from_trajectory(traj: &Trajectory, n: usize) -> Result<Self, AnalysisError> {
        let d = traj.duration();
        Self::from_fn(0.0, d, n, |t| {
            traj.sample_state(t.min(d)).map(|s| s.position).unwrap_or(Vec3::ZERO)
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.points.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Linear interpolation; times outside the span clamp to the end samples.
    pub fn at(&self, t: f64) -> Vec3 {
        let s = ((t - self.t0) / self.dt).clamp(0.0, (self.points.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.points.len() - 2);
        let w = s - i as f64;
        if w == 0.0 {
            return self.points[i];
        }
        self.points[i].lerp(self.points[i + 1], w)
    }

    /// First derivative at every sample: central differences inside, second-order
    /// one-sided differences at the ends (first-order if only 2 samples).
    pub fn derivative(&self) -> Vec<Vec3> {
        differentiate(&self.points, self.dt)
    }
}

pub(crate) fn differentiate(p: &[Vec3], dt: f64) -> Vec<Vec3> {
    let n = p.len();
    if n == 2 {
        let d = (p[1] - p[0]) * (1.0 / dt);
        return vec![d, d];
    }
    let inv2 = 1.0 / (2.0 * dt);
    (0..n)
        .map(|i| {
            if i == 0 {
                (p[0] * -3.0 + p[1] * 4.0 - p[2]) * inv2
            } else if i == n - 1 {
                (p[n - 1] * 3.0 - p[n - 2] * 4.0 + p[n - 3]) * inv2
            } else {
                (p[i + 1] - p[i - 1]) * inv2
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceErrorEstimate {
    /// Value at the requested subdivision count.
    pub riemann_sum: f64,
    /// `(n, m)`: time cells and cells across the gap. The gap is integrated as a
    /// distance, so `m` is always 1.
    pub subdivisions: (usize, usize),
    /// `(n, m, value)` at `n`, `2n`, `4n`.
    pub refinement: Vec<(usize, usize, f64)>,
}

/// Area between two paths over their shared span: `∫|actual(t) − estimated(t)| dt`
/// by the midpoint rule on `n` uniform cells, with paths interpolated linearly.
pub fn surface_error(actual: &SampledPath, estimated: &SampledPath, n: usize) -> Result<SurfaceErrorEstimate, AnalysisError> {
    if n == 0 {
        return domain("need at least one subdivision");
    }
    let (a0, a1) = (actual.t0(), actual.t_end());
    let tol = 1e-9 * (a1 - a0).abs().max(1.0);
    if (estimated.t0() - a0).abs() > tol || (estimated.t_end() - a1).abs() > tol {
        return domain(format!(
            "paths cover different intervals: [{a0}, {a1}] vs [{}, {}]",
            estimated.t0(),
            estimated.t_end()
        ));
    }
    let midpoint = |cells: usize| {
        let h = (a1 - a0) / cells as f64;
        (0..cells)
            .map(|i| {
                let t = a0 + (i as f64 + 0.5) * h;
                actual.at(t).distance(estimated.at(t))
            })
            .sum::<f64>()
            * h
    };
    let refinement: Vec<_> = [n, 2 * n, 4 * n].into_iter().map(|k| (k, 1, midpoint(k))).collect();
    Ok(SurfaceErrorEstimate {
        riemann_sum: refinement[0].2,
        subdivisions: (n, 1),
        refinement,
    })
}
