//! Maximum-likelihood estimation under the EI-penalised loss.
//!
//! The optimiser works on the per-trajectory mean of the loss,
//! `(−LL − λ·EI) / N`; the minimiser is the same as for the total, but step
//! sizes stay meaningful across dataset sizes. With minibatches the
//! likelihood term is averaged over the batch and the penalty is charged at
//! the batch's share of the training set, so one epoch applies it once.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Split;
use crate::evaluator::{evaluate, flatten, trainable_mask, unflatten, Evaluation, Scenario};
use crate::linalg::{DenseMatrix, Lu};
use crate::math::sqrt;
use crate::model::ModelParams;
use crate::optim::{Optimizer, OptimizerKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub weight_decay: f64,
    /// Trajectories per step; `None` is full batch.
    pub batch_size: Option<usize>,
    pub max_epochs: usize,
    /// Early-stopping patience on the validation loss.
    pub patience: Option<usize>,
    pub lambda: f64,
    pub seed: u64,
    /// Stop once the full-batch mean gradient has max-norm below this.
    pub tolerance: Option<f64>,
}

impl EstimationConfig {
    /// Full-batch SGD, learning rate 0.1, 1000 iterations.
    pub fn toy() -> Self {
        Self {
            optimizer: OptimizerKind::Sgd,
            lr: 0.1,
            weight_decay: 0.0,
            batch_size: None,
            max_epochs: 1000,
            patience: None,
            lambda: 0.0,
            seed: 42,
            tolerance: None,
        }
    }

    /// AdamW (lr 1e-5, decay 1e-5), batches of 1000, patience 10, at most
    /// 200 epochs.
    pub fn large_scale() -> Self {
        Self {
            optimizer: OptimizerKind::AdamW,
            lr: 1e-5,
            weight_decay: 1e-5,
            batch_size: Some(1000),
            max_epochs: 200,
            patience: Some(10),
            lambda: 0.0,
            seed: 42,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidConfig(format!("weight decay must be nonnegative, got {}", self.weight_decay)));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if self.patience == Some(0) {
            return Err(Error::InvalidConfig("patience must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-trajectory training loss over the epoch's batches.
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
    /// Training log-likelihood accumulated over the epoch's batches.
    pub ll: f64,
    pub ei: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    /// Last epoch run (1-based).
    pub stopped_epoch: usize,
    /// Epoch whose parameters are returned.
    pub best_epoch: usize,
    pub converged: bool,
    /// Full training-set evaluation at the returned parameters.
    pub train: Evaluation,
    pub validation: Option<Evaluation>,
}

fn split_selection(scenarios: &[Scenario], which: Split) -> Vec<Vec<usize>> {
    scenarios
        .iter()
        .map(|s| {
            s.trajectories.iter().enumerate().filter(|(_, t)| t.split == which).map(|(i, _)| i).collect()
        })
        .collect()
}

fn count(sel: &[Vec<usize>]) -> usize {
    sel.iter().map(Vec::len).sum()
}

/// Fits `init` on the training trajectories of `scenarios`.
pub fn fit(scenarios: &[Scenario], init: &ModelParams, config: &EstimationConfig) -> Result<FitResult> {
    fit_with_observer(scenarios, init, config, &mut |_| {})
}

pub fn fit_with_observer(
    scenarios: &[Scenario],
    init: &ModelParams,
    config: &EstimationConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<FitResult> {
    config.validate()?;
    for s in scenarios {
        init.validate(&s.graph, &s.features)?;
    }
    let train_sel = split_selection(scenarios, Split::Train);
    let val_sel = split_selection(scenarios, Split::Validation);
    let n_train = count(&train_sel);
    let n_val = count(&val_sel);
    if n_train == 0 {
        return Err(Error::InvalidConfig("no training trajectories".into()));
    }
    let mut pool: Vec<(usize, usize)> =
        train_sel.iter().enumerate().flat_map(|(s, idx)| idx.iter().map(move |&i| (s, i))).collect();
    let batch = config.batch_size.unwrap_or(n_train).min(n_train);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut x = flatten(init);
    let mask = trainable_mask(init);
    let mut opt = Optimizer::new(config.optimizer, config.lr, config.weight_decay, x.len());
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut converged = false;
    let mut stopped = 0;
    let mut current = init.clone();

    for epoch in 1..=config.max_epochs {
        stopped = epoch;
        if batch < n_train {
            pool.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        let mut ll_sum = 0.0;
        let mut grad_inf = 0.0f64;
        for chunk in pool.chunks(batch) {
            let mut sel = vec![Vec::new(); scenarios.len()];
            for &(s, i) in chunk {
                sel[s].push(i);
            }
            let nb = chunk.len() as f64;
            let share = nb / n_train as f64;
            let ev = evaluate(scenarios, &current, config.lambda * share, Some(&sel), true)?;
            if !ev.loss.is_finite() {
                return Err(Error::Diverged { epoch, detail: format!("loss is {} at phi = {:?}", ev.loss, current.phi) });
            }
            let grad: Vec<f64> =
                ev.gradient.expect("gradient requested").to_flat(current.kind).iter().map(|g| g / nb).collect();
            if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, detail: format!("gradient coordinate {i} is not finite") });
            }
            grad_inf = grad.iter().zip(&mask).filter(|(_, &m)| m).fold(grad_inf, |m, (g, _)| m.max(g.abs()));
            loss_sum += ev.loss;
            ll_sum += ev.ll;
            opt.step(&mut x, &grad, &mask);
            current = unflatten(init, &x)?;
        }
        let ei = crate::evaluator::ei_penalty(&current);
        let validation_loss = if n_val > 0 && config.patience.is_some() {
            let ev = evaluate(scenarios, &current, 0.0, Some(&val_sel), false)?;
            Some(-ev.ll / n_val as f64 - config.lambda * ei / n_train as f64)
        } else {
            None
        };
        let record = EpochRecord { epoch, train_loss: loss_sum / n_train as f64, validation_loss, ll: ll_sum, ei };
        observer(&record);
        history.push(record);
        if let (Some(vl), Some(patience)) = (validation_loss, config.patience) {
            if !vl.is_finite() {
                return Err(Error::Diverged { epoch, detail: "validation loss is not finite".into() });
            }
            if best.as_ref().is_none_or(|(b, _, _)| vl < *b) {
                best = Some((vl, epoch, x.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    converged = true;
                    break;
                }
            }
        }
        if let Some(tol) = config.tolerance {
            if batch == n_train && grad_inf < tol {
                converged = true;
                break;
            }
        }
    }
    let (best_epoch, params) = match best {
        Some((_, e, bx)) => (e, unflatten(init, &bx)?),
        None => (stopped, current),
    };
    let train = evaluate(scenarios, &params, config.lambda, Some(&train_sel), false)?;
    let validation = if n_val > 0 { Some(evaluate(scenarios, &params, config.lambda, Some(&val_sel), false)?) } else { None };
    Ok(FitResult { params, history, stopped_epoch: stopped, best_epoch, converged, train, validation })
}

/// Per-coefficient standard errors from the observed information of the
/// systematic coefficients, holding every other parameter fixed.
///
/// The Hessian of `−LL` is formed by central differences of the analytic
/// gradient. Frozen coefficients get no standard error.
pub fn standard_errors(
    scenarios: &[Scenario],
    params: &ModelParams,
    selection: Option<&[Vec<usize>]>,
) -> Result<Vec<(String, f64)>> {
    let free: Vec<usize> = (0..params.phi.len()).filter(|&q| !params.frozen[q]).collect();
    let n_obs = match selection {
        Some(s) => count(s),
        None => scenarios.iter().map(|s| s.trajectories.len()).sum(),
    };
    let k = free.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut hess = DenseMatrix::zeros(k, k);
    for (j, &qj) in free.iter().enumerate() {
        let step = 1e-5 * params.phi[qj].abs().max(1.0);
        let mut up = params.clone();
        up.phi[qj] += step;
        let mut down = params.clone();
        down.phi[qj] -= step;
        let gu = evaluate(scenarios, &up, 0.0, selection, true)?.gradient.expect("gradient requested");
        let gd = evaluate(scenarios, &down, 0.0, selection, true)?.gradient.expect("gradient requested");
        for (i, &qi) in free.iter().enumerate() {
            hess[(i, j)] = (gu.d_phi[qi] - gd.d_phi[qi]) / (2.0 * step);
        }
    }
    let sym = DenseMatrix::from_fn(k, k, |i, j| 0.5 * (hess[(i, j)] + hess[(j, i)]));
    let threshold = 1e-8 * (n_obs as f64).max(1.0);
    let singular = || {
        Error::Singular(format!(
            "observed information for ({}) is singular or indefinite; review identifiability of these coefficients",
            free.iter().map(|&q| params.phi_names[q].as_str()).collect::<Vec<_>>().join(", ")
        ))
    };
    let lu = Lu::factor(&sym).map_err(|_| singular())?;
    if lu.min_pivot_ratio() * sym.max_abs() < threshold {
        return Err(singular());
    }
    let inv = lu.inverse();
    let mut out = Vec::with_capacity(k);
    for (i, &q) in free.iter().enumerate() {
        let var = inv[(i, i)];
        if !(var > 0.0 && var.is_finite()) {
            return Err(singular());
        }
        out.push((params.phi_names[q].clone(), sqrt(var)));
    }
    Ok(out)
}
