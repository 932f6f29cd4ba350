//! End-to-end reproduction of the illustrative example: RL, Res-RL and
//! ResDGCN-RL fitted on both observation periods of the seven-node network,
//! compared with the published estimates and choice probabilities.

use std::fmt::Write as _;
use std::time::Instant;

use reclogit_core::estimation::{fit, EstimationConfig};
use reclogit_core::evaluator::{Predictor, Scenario};
use reclogit_core::fixture::{self, TOY_COUNTS_AFTER, TOY_COUNTS_BEFORE, TOY_FEATURE};
use reclogit_core::{ModelKind, ModelParams};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Paths reported in the probability table (path 3 uses the closed link).
pub const REPORTED_PATHS: [usize; 3] = [1, 2, 4];

/// Published estimates `(β_t, LL)`; ResDGCN-RL also reports `[α, β, γ]`.
pub const PAPER_RL: (f64, f64) = (-1.000, -248.491);
pub const PAPER_RESRL: (f64, f64) = (-0.608, -229.416);
pub const PAPER_RESDGCN: (f64, [f64; 3], f64) = (-0.863, [0.994, 0.997, 0.996], -229.112);

/// Published predicted probabilities (percent) for paths 1, 2, 4.
pub const PAPER_PROB_RL: ([f64; 3], [f64; 3]) = ([25.00, 25.00, 25.00], [33.33, 33.33, 33.33]);
pub const PAPER_PROB_RESRL: ([f64; 3], [f64; 3]) = ([21.18, 14.05, 45.77], [23.85, 24.60, 51.55]);
pub const PAPER_PROB_RESDGCN: ([f64; 3], [f64; 3]) = ([19.00, 14.00, 48.00], [25.00, 24.00, 51.00]);

#[derive(Debug, Clone, Serialize)]
pub struct ToyModelResult {
    pub model: &'static str,
    pub beta_t: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub ll: f64,
    pub seconds: f64,
    /// Predicted probabilities of paths 1, 2, 4 before and after the closure.
    pub before: [f64; 3],
    pub after: [f64; 3],
    #[serde(skip)]
    pub params: ModelParams,
}

impl ToyModelResult {
    /// `after / before − 1` for each reported path.
    pub fn relative_change(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.after[i] / self.before[i] - 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToyCheck {
    pub name: String,
    pub measured: String,
    pub target: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToyReport {
    pub observed_before: [f64; 3],
    pub observed_after: [f64; 3],
    pub models: Vec<ToyModelResult>,
    pub checks: Vec<ToyCheck>,
    pub error: Option<String>,
}

pub fn toy_scenarios() -> Result<Vec<Scenario>> {
    let fx = fixture::toy_fixture();
    Ok(vec![
        Scenario::new("before", fx.graph, fx.features, fx.before)?,
        Scenario::new("after", fx.after_graph, fx.after_features, fx.after)?,
    ])
}

/// The stated starting point: `β_t = −1`, zero residual weights,
/// `α = β = γ = 1`.
pub fn toy_init(kind: ModelKind) -> ModelParams {
    let p = ModelParams::new(kind, &[(TOY_FEATURE, -1.0)]);
    if kind.has_residual() {
        p.with_zero_layers(1, fixture::TOY_LINKS.len())
    } else {
        p
    }
}

fn observed(counts: &[usize; 4]) -> [f64; 3] {
    let total: usize = counts.iter().sum();
    REPORTED_PATHS.map(|p| counts[p - 1] as f64 / total as f64)
}

pub fn fit_toy_model(scenarios: &[Scenario], kind: ModelKind, config: &EstimationConfig) -> Result<ToyModelResult> {
    let started = Instant::now();
    let result = fit(scenarios, &toy_init(kind), config)?;
    let seconds = started.elapsed().as_secs_f64();
    let p = result.params;
    let probs = |s: &Scenario| -> Result<[f64; 3]> {
        let pred = Predictor::new(s, &p)?;
        let mut out = [0.0; 3];
        for (i, &path) in REPORTED_PATHS.iter().enumerate() {
            out[i] = pred.path_log_probability(&fixture::toy_path(path))?.exp();
        }
        Ok(out)
    };
    let dgcn = kind == ModelKind::ResDgcnRl;
    Ok(ToyModelResult {
        model: kind.name(),
        beta_t: p.phi[0],
        alpha: dgcn.then_some(p.alpha),
        beta: dgcn.then_some(p.beta),
        gamma: dgcn.then_some(p.gamma),
        ll: result.train.ll,
        seconds,
        before: probs(&scenarios[0])?,
        after: probs(&scenarios[1])?,
        params: p,
    })
}

fn check(name: &str, measured: String, target: &str, pass: bool) -> ToyCheck {
    ToyCheck { name: name.into(), measured, target: target.into(), pass }
}

fn checks(report: &ToyReport) -> Vec<ToyCheck> {
    let mut out = Vec::new();
    let find = |m: &str| report.models.iter().find(|r| r.model == m);
    if let Some(rl) = find("rl") {
        out.push(check("RL beta_t", format!("{:.4}", rl.beta_t), "-1.000 ± 0.01", (rl.beta_t - PAPER_RL.0).abs() <= 0.01));
        out.push(check("RL log-likelihood", format!("{:.3}", rl.ll), "-248.491 ± 0.01", (rl.ll - PAPER_RL.1).abs() <= 0.01));
        out.push(check("RL runtime", format!("{:.3} s", rl.seconds), "< 5 s", rl.seconds < 5.0));
    }
    if let Some(res) = find("resrl") {
        out.push(check("Res-RL log-likelihood", format!("{:.3}", res.ll), "in [-231, -228]", (-231.0..=-228.0).contains(&res.ll)));
        out.push(check("Res-RL beta_t", format!("{:.4}", res.beta_t), "-0.608 ± 0.10", (res.beta_t - PAPER_RESRL.0).abs() <= 0.10));
        let rc = res.relative_change();
        let gap = (rc[0] - rc[2]).abs() * 100.0;
        out.push(check("Res-RL paths 1/4 equal change", format!("{gap:.2e} pp"), "<= 0.1 pp", gap <= 0.1));
    }
    if let Some(dg) = find("resdgcnrl") {
        out.push(check("ResDGCN-RL log-likelihood", format!("{:.3}", dg.ll), "in [-231, -228]", (-231.0..=-228.0).contains(&dg.ll)));
        if let Some(res) = find("resrl") {
            out.push(check(
                "ResDGCN-RL LL vs Res-RL",
                format!("{:.3} vs {:.3}", dg.ll, res.ll),
                ">= Res-RL - 0.5",
                dg.ll >= res.ll - 0.5,
            ));
        }
        let worst = (0..3)
            .flat_map(|i| {
                [(dg.before[i] - report.observed_before[i]).abs(), (dg.after[i] - report.observed_after[i]).abs()]
            })
            .fold(0.0f64, f64::max)
            * 100.0;
        out.push(check("ResDGCN-RL probabilities", format!("max gap {worst:.3} pp"), "<= 1.0 pp", worst <= 1.0));
        for (label, got, want) in [
            ("alpha", dg.alpha, PAPER_RESDGCN.1[0]),
            ("beta", dg.beta, PAPER_RESDGCN.1[1]),
            ("gamma", dg.gamma, PAPER_RESDGCN.1[2]),
        ] {
            let got = got.unwrap_or(f64::NAN);
            out.push(check(
                &format!("ResDGCN-RL {label}"),
                format!("{got:.4}"),
                &format!("{want} ± 0.05"),
                (got - want).abs() <= 0.05,
            ));
        }
        out.push(check("ResDGCN-RL runtime", format!("{:.3} s", dg.seconds), "< 60 s", dg.seconds < 60.0));
    }
    out
}

/// Fits the three models. A training failure stops the run; the models
/// fitted so far are kept in the report.
pub fn reproduce_toy() -> (ToyReport, Option<CliError>) {
    let mut report = ToyReport {
        observed_before: observed(&TOY_COUNTS_BEFORE),
        observed_after: observed(&TOY_COUNTS_AFTER),
        models: Vec::new(),
        checks: Vec::new(),
        error: None,
    };
    let mut failure = None;
    match toy_scenarios() {
        Ok(scenarios) => {
            for kind in [ModelKind::Rl, ModelKind::ResRl, ModelKind::ResDgcnRl] {
                log::info!("fitting {} on the illustrative example", kind.name());
                match fit_toy_model(&scenarios, kind, &EstimationConfig::toy()) {
                    Ok(r) => report.models.push(r),
                    Err(e) => {
                        let e = match e {
                            CliError::Model(m) if m.is_input_error() => CliError::Model(m),
                            other => CliError::Numeric(format!("{} training failed: {other}", kind.name())),
                        };
                        report.error = Some(e.to_string());
                        failure = Some(e);
                        break;
                    }
                }
            }
        }
        Err(e) => {
            report.error = Some(e.to_string());
            failure = Some(e);
        }
    }
    report.checks = checks(&report);
    (report, failure)
}

fn pct(x: f64) -> String {
    format!("{:6.2}%", 100.0 * x)
}

/// Side-by-side text tables against the published values.
pub fn render(report: &ToyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Estimates (fitted / published)");
    let _ = writeln!(s, "{:<12} {:>20} {:>20} {:>20}", "parameter", "RL", "Res-RL", "ResDGCN-RL");
    let get = |m: &str| report.models.iter().find(|r| r.model == m);
    let cell = |v: Option<f64>, paper: Option<f64>| match (v, paper) {
        (Some(v), Some(p)) => format!("{v:.3} / {p:.3}"),
        (None, Some(p)) => format!("- / {p:.3}"),
        _ => "--".to_string(),
    };
    let rows: [(&str, [Option<f64>; 3], [Option<f64>; 3]); 5] = [
        (
            "beta_t",
            [get("rl").map(|r| r.beta_t), get("resrl").map(|r| r.beta_t), get("resdgcnrl").map(|r| r.beta_t)],
            [Some(PAPER_RL.0), Some(PAPER_RESRL.0), Some(PAPER_RESDGCN.0)],
        ),
        ("alpha", [None, None, get("resdgcnrl").and_then(|r| r.alpha)], [None, None, Some(PAPER_RESDGCN.1[0])]),
        ("beta", [None, None, get("resdgcnrl").and_then(|r| r.beta)], [None, None, Some(PAPER_RESDGCN.1[1])]),
        ("gamma", [None, None, get("resdgcnrl").and_then(|r| r.gamma)], [None, None, Some(PAPER_RESDGCN.1[2])]),
        (
            "LL",
            [get("rl").map(|r| r.ll), get("resrl").map(|r| r.ll), get("resdgcnrl").map(|r| r.ll)],
            [Some(PAPER_RL.1), Some(PAPER_RESRL.1), Some(PAPER_RESDGCN.2)],
        ),
    ];
    for (name, got, paper) in rows {
        let _ = writeln!(
            s,
            "{:<12} {:>20} {:>20} {:>20}",
            name,
            cell(got[0], paper[0]),
            cell(got[1], paper[1]),
            cell(got[2], paper[2])
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Choice probabilities before -> after closing 4-5 (published in brackets)");
    let papers = [("rl", PAPER_PROB_RL), ("resrl", PAPER_PROB_RESRL), ("resdgcnrl", PAPER_PROB_RESDGCN)];
    for (i, path) in REPORTED_PATHS.iter().enumerate() {
        let _ = write!(
            s,
            "path {path}  observed {} -> {}",
            pct(report.observed_before[i]),
            pct(report.observed_after[i])
        );
        for (m, (pb, pa)) in papers {
            match get(m) {
                Some(r) => {
                    let _ = write!(
                        s,
                        " | {m} {} -> {} [{:.2}% -> {:.2}%]",
                        pct(r.before[i]),
                        pct(r.after[i]),
                        pb[i],
                        pa[i]
                    );
                }
                None => {
                    let _ = write!(s, " | {m} -");
                }
            }
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s);
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{} {}: {} (target {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.target
        );
    }
    if let Some(e) = &report.error {
        let _ = writeln!(s, "stopped: {e}");
    }
    s
}
