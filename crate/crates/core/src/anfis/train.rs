use nalgebra::{DMatrix, DVector};

use super::{AnfisError, AnfisNetwork, ForwardTrace, TrainingSet, INPUT_COUNT, TERM_COUNT};

/// Ridge strength used when the least-squares system is rank deficient.
pub const RIDGE_LAMBDA: f64 = 1e-8;
/// Pivot ratio below which the consequent system is treated as singular.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeastSquaresOutcome {
    /// Full-rank QR solve.
    Solved,
    /// Rank deficient; solved with ridge regularisation.
    Ridge,
    /// Fewer records than free consequent coefficients; consequents left unchanged.
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    /// `Σ ½(y − O)²` after both passes.
    pub error: f64,
    /// Error after the consequent pass, before the premise step.
    pub error_after_consequents: f64,
    pub least_squares: LeastSquaresOutcome,
    pub premises_updated: bool,
}

/// One hybrid epoch: a global least-squares fit of every consequent coefficient with the
/// premises frozen, then one gradient-descent step on the premise parameters.
///
/// The premise step uses the gradient of the mean error `E/K`, so the learning rate does
/// not have to shrink with the size of the training set.
pub fn train_epoch(net: &mut AnfisNetwork, data: &TrainingSet) -> Result<EpochReport, AnfisError> {
    data.validate_for(net)?;
    let traces = traces(net, data)?;
    let least_squares = fit_consequents(net, data, &traces);
    let error_after_consequents = total_error(net, data)?;

    let (grad, _) = premise_gradient(net, data)?;
    let eta = net.learning_rate;
    let premises_updated = eta > 0.0;
    if premises_updated {
        let scale = eta / data.len() as f64;
        let params: Vec<f64> = net
            .premise_params()
            .iter()
            .zip(&grad)
            .map(|(p, g)| p - scale * g)
            .collect();
        net.set_premise_params(&params);
        for v in net.inputs.iter_mut() {
            v.project();
        }
    }
    let error = total_error(net, data)?;
    Ok(EpochReport {
        error,
        error_after_consequents,
        least_squares,
        premises_updated,
    })
}

/// `Σ_k ½(y_k − O_k)²`.
pub fn total_error(net: &AnfisNetwork, data: &TrainingSet) -> Result<f64, AnfisError> {
    let mut e = 0.0;
    for (x, y) in &data.records {
        let r = y - net.output(x[0], x[1], x[2])?;
        e += 0.5 * r * r;
    }
    Ok(e)
}

fn traces(net: &AnfisNetwork, data: &TrainingSet) -> Result<Vec<ForwardTrace>, AnfisError> {
    data.records.iter().map(|(x, _)| net.forward(x[0], x[1], x[2])).collect()
}

/// Regressor row for one record: `β_i·[a1, a2, a3, 1]` for each rule.
fn regressor_row(trace: &ForwardTrace, width: usize) -> impl Iterator<Item = f64> + '_ {
    let x = trace.inputs;
    trace.normalized.iter().flat_map(move |&b| {
        let full = [b * x[0], b * x[1], b * x[2], b];
        full.into_iter().take(width)
    })
}

pub(crate) fn design_matrix(net: &AnfisNetwork, traces: &[ForwardTrace]) -> DMatrix<f64> {
    let width = net.consequent_width();
    let cols = net.rules.len() * width;
    let mut m = DMatrix::zeros(traces.len(), cols);
    for (row, tr) in traces.iter().enumerate() {
        for (col, v) in regressor_row(tr, width).enumerate() {
            m[(row, col)] = v;
        }
    }
    m
}

fn fit_consequents(net: &mut AnfisNetwork, data: &TrainingSet, traces: &[ForwardTrace]) -> LeastSquaresOutcome {
    let width = net.consequent_width();
    let cols = net.rules.len() * width;
    if data.len() < cols {
        return LeastSquaresOutcome::Skipped;
    }
    let x = design_matrix(net, traces);
    let y = DVector::from_iterator(data.len(), data.records.iter().map(|(_, y)| *y));

    let qr = x.clone().qr();
    let r = qr.r();
    let max_pivot = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let full_rank = max_pivot > 0.0 && r.diagonal().iter().all(|v| v.abs() > RANK_TOLERANCE * max_pivot);

    let (theta, outcome) = match full_rank {
        true => {
            let qty = qr.q().transpose() * &y;
            match r.solve_upper_triangular(&qty) {
                Some(theta) if theta.iter().all(|v| v.is_finite()) => (theta, LeastSquaresOutcome::Solved),
                _ => (ridge_solve(&x, &y), LeastSquaresOutcome::Ridge),
            }
        }
        false => (ridge_solve(&x, &y), LeastSquaresOutcome::Ridge),
    };

    for (i, rule) in net.rules.iter_mut().enumerate() {
        let c = &mut rule.consequent;
        c.p = theta[i * width];
        c.q = theta[i * width + 1];
        c.s = theta[i * width + 2];
        c.bias = if width == 4 { theta[i * width + 3] } else { 0.0 };
    }
    outcome
}

fn ridge_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let xt = x.transpose();
    let mut gram = &xt * x;
    for i in 0..gram.nrows() {
        gram[(i, i)] += RIDGE_LAMBDA;
    }
    let rhs = &xt * y;
    match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
    }
}

/// Analytic `∂E/∂θ` for every premise parameter (ordered as
/// [`AnfisNetwork::premise_params`]) together with `E`.
pub fn premise_gradient(net: &AnfisNetwork, data: &TrainingSet) -> Result<(Vec<f64>, f64), AnfisError> {
    // Parameter offset of each (input, term).
    let mut offsets = [[0usize; TERM_COUNT]; INPUT_COUNT];
    let mut n_params = 0;
    for (j, v) in net.inputs.iter().enumerate() {
        for (k, mf) in v.terms.iter().enumerate() {
            offsets[j][k] = n_params;
            n_params += mf.param_count();
        }
    }
    let mut grad = vec![0.0; n_params];
    let mut error = 0.0;
    for (x, y) in &data.records {
        let tr = net.forward(x[0], x[1], x[2])?;
        let residual = y - tr.output;
        error += 0.5 * residual * residual;
        // dE/dμ_{j,k}
        let mut d_mu = [[0.0; TERM_COUNT]; INPUT_COUNT];
        for (i, rule) in net.rules.iter().enumerate() {
            let d_alpha = -residual * (tr.rule_outputs[i] - tr.output) / tr.firing_sum;
            if d_alpha == 0.0 {
                continue;
            }
            let mu: [f64; INPUT_COUNT] = std::array::from_fn(|j| tr.memberships[j][rule.antecedent[j].index()]);
            for j in 0..INPUT_COUNT {
                let others: f64 = (0..INPUT_COUNT).filter(|&m| m != j).map(|m| mu[m]).product();
                d_mu[j][rule.antecedent[j].index()] += d_alpha * others;
            }
        }
        for j in 0..INPUT_COUNT {
            for k in 0..TERM_COUNT {
                if d_mu[j][k] == 0.0 {
                    continue;
                }
                let mf = &net.inputs[j].terms[k];
                let (_, dp) = mf.eval_with_grad(tr.inputs[j]);
                for (m, d) in dp.iter().take(mf.param_count()).enumerate() {
                    grad[offsets[j][k] + m] += d_mu[j][k] * d;
                }
            }
        }
    }
    Ok((grad, error))
}

/// Largest relative deviation between the analytic premise gradient and central finite
/// differences with step `1e-6·max(1, |θ|)`.
///
/// Relative deviation is `|g − g_fd| / max(|g|, |g_fd|, 1e-8)`. The check takes no step,
/// so the learning rate has no influence on it.
pub fn gradient_check(net: &AnfisNetwork, data: &TrainingSet) -> Result<f64, AnfisError> {
    if data.is_empty() {
        return Err(AnfisError::InvalidTrainingSet("no records".into()));
    }
    let (grad, _) = premise_gradient(net, data)?;
    let base = net.premise_params();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &theta) in base.iter().enumerate() {
        let h = 1e-6 * theta.abs().max(1.0);
        let mut p = base.clone();
        p[i] = theta + h;
        probe.set_premise_params(&p);
        let up = total_error(&probe, data)?;
        p[i] = theta - h;
        probe.set_premise_params(&p);
        let down = total_error(&probe, data)?;
        let fd = (up - down) / (2.0 * h);
        let denom = grad[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((grad[i] - fd).abs() / denom);
    }
    Ok(worst)
}
