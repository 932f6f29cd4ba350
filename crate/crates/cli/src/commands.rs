//! Subcommand implementations. Each one records its inputs and outputs in a
//! [`RunManifest`] that is written even when the command fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use reclogit_core::estimation::{fit_with_observer, standard_errors};
use reclogit_core::evaluator::{ei_penalty, Predictor, Scenario};
use reclogit_core::metrics::evaluate_metrics;
use reclogit_core::solver::{default_max_steps, expected_link_flow, most_probable_route};
use reclogit_core::{fixture, network, Error, ModelKind, ModelParams, Split, Trajectory, TrajectorySet};
use serde_json::{json, Value};

use crate::cli::{
    Cli, Command, EstimateArgs, EvaluateArgs, FlowArgs, NetworkArgs, PredictArgs, ProximityArgs, SplitArg,
    DEFAULT_SEED,
};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{
    align_phi, csv_error, load_network, load_params, load_trajectories, open, params_to_json, record_line,
    save_params, write_link_values, write_network, write_trajectories, NetworkData, NetworkFormat, TrajectoryLayout,
};
use crate::manifest::RunManifest;
use crate::toy;

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Estimate(_) => "estimate",
        Command::Evaluate(_) => "evaluate",
        Command::Flow(_) => "flow",
        Command::Predict(_) => "predict",
        Command::ReproduceToy => "reproduce-toy",
        Command::ExportProximities(_) => "export-proximities",
        Command::ExportToy => "export-toy",
    }
}

/// Runs one command and writes its manifest to the output directory.
pub fn run(cli: &Cli, arguments: Vec<String>) -> Result<()> {
    let mut manifest =
        RunManifest::start(command_name(&cli.command), arguments, cli.seed.unwrap_or(DEFAULT_SEED), cli.threads);
    let result = dispatch(cli, &mut manifest);
    manifest.finish(result.as_ref().err());
    match manifest.write(&cli.out) {
        Ok(path) => log::info!("manifest written to {}", path.display()),
        Err(e) => log::error!("could not write the run manifest: {e}"),
    }
    result
}

fn dispatch(cli: &Cli, m: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    match &cli.command {
        Command::Estimate(a) => estimate(cli, a, m),
        Command::Evaluate(a) => evaluate(cli, a, m),
        Command::Flow(a) => flow(cli, a, m),
        Command::Predict(a) => predict(cli, a, m),
        Command::ReproduceToy => reproduce_toy(cli, m),
        Command::ExportProximities(a) => export_proximities(cli, a, m),
        Command::ExportToy => export_toy(cli, m),
    }
}

fn write_json(path: &Path, value: &Value, m: &mut RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?;
    m.output(path);
    Ok(())
}

fn finite_json(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Loads the network and closes the links named by `--remove`.
fn load_net(args: &NetworkArgs, m: &mut RunManifest) -> Result<NetworkData> {
    m.input("network", &args.network)?;
    let format = match &args.nodes {
        Some(nodes) => {
            m.input("nodes", nodes)?;
            NetworkFormat::LinkTableWithNodes { nodes: nodes.clone() }
        }
        None => NetworkFormat::LinkTable,
    };
    let mut net = load_network(&args.network, &format)?;
    for id in &args.remove {
        let k = net.resolve_link(id)?;
        log::info!("closing link {id}");
        net = net.without_link(k)?;
    }
    log::info!("network: {} links, {} transitions", net.graph.link_count(), net.graph.edge_count());
    Ok(net)
}

fn load_config(path: &Path, m: &mut RunManifest) -> Result<RunConfig> {
    m.input("config", path)?;
    let cfg = RunConfig::load(path)?;
    for f in cfg.referenced_files() {
        m.input("transition_feature", &f)?;
    }
    Ok(cfg)
}

fn effective_seed(cli: &Cli, cfg: &RunConfig, m: &mut RunManifest) -> u64 {
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    m.seed = seed;
    seed
}

fn scenario(name: &str, net: &NetworkData, cfg: &RunConfig, trajs: TrajectorySet) -> Result<Scenario> {
    let features = cfg.build_features(net, &net.graph)?;
    let mut s = Scenario::new(name, net.graph.clone(), features, trajs)?;
    if cfg.uses_link_size() {
        s = s.with_link_size(&cfg.link_size_params()?)?;
    }
    Ok(s)
}

/// Loads fitted parameters and lines them up with the configured features.
fn fitted_params(path: &Path, cfg: &RunConfig, flag: Option<ModelKind>, m: &mut RunManifest) -> Result<ModelParams> {
    m.input("params", path)?;
    let p = align_phi(&load_params(path)?, &cfg.feature_names())?;
    if let Some(k) = flag {
        if k != p.kind {
            return Err(CliError::Input(format!(
                "--model {} does not match the parameter file ({})",
                k.name(),
                p.kind.name()
            )));
        }
    }
    Ok(p)
}

fn selection(scn: &Scenario, which: Split) -> Vec<Vec<usize>> {
    vec![scn.trajectories.iter().enumerate().filter(|(_, t)| t.split == which).map(|(i, _)| i).collect()]
}

fn estimate(cli: &Cli, a: &EstimateArgs, m: &mut RunManifest) -> Result<()> {
    let cfg = load_config(&a.config, m)?;
    let seed = effective_seed(cli, &cfg, m);
    let kind = cfg.model_kind(a.model.map(Into::into))?;
    let est = cfg.estimation(seed)?;
    let net = load_net(&a.net, m)?;
    m.input("trajectories", &a.trajs)?;
    let mut loaded = load_trajectories(&a.trajs, &net)?;
    if !loaded.has_splits {
        if let Some(s) = cfg.split {
            loaded.set.assign_splits(s.train, s.validation, seed)?;
        }
    }
    let counts = [Split::Train, Split::Validation, Split::Test]
        .map(|s| loaded.set.iter().filter(|t| t.split == s).count());
    log::info!("trajectories: {} train, {} validation, {} test", counts[0], counts[1], counts[2]);
    if counts[0] == 0 {
        return Err(CliError::Input("no training trajectories".into()));
    }
    let prior = match &a.params {
        Some(p) => {
            m.input("init_params", p)?;
            Some(load_params(p)?)
        }
        None => None,
    };
    let scn = scenario("data", &net, &cfg, loaded.set)?;
    let init = cfg.initial_params(kind, net.graph.link_count(), prior.as_ref())?;
    log::info!("estimating {} ({} layers, lambda {})", kind.name(), init.layers(), cfg.lambda);

    let started = Instant::now();
    let scenarios = [scn];
    let every = (est.max_epochs / 20).max(1);
    let result = fit_with_observer(&scenarios, &init, &est, &mut |r| {
        if r.epoch == 1 || r.epoch % every == 0 {
            log::info!(
                "epoch {:>5}: train loss {:.6}{}",
                r.epoch,
                r.train_loss,
                r.validation_loss.map(|v| format!(", validation loss {v:.6}")).unwrap_or_default()
            );
        } else {
            log::debug!("epoch {:>5}: train loss {:.6}", r.epoch, r.train_loss);
        }
    })?;
    let seconds = started.elapsed().as_secs_f64();
    log::info!(
        "finished after {} epochs ({:.2} s): LL {:.4}, best epoch {}",
        result.stopped_epoch,
        seconds,
        result.train.ll,
        result.best_epoch
    );

    let (se, se_error) = if cfg.standard_errors {
        let sel = selection(&scenarios[0], Split::Train);
        match standard_errors(&scenarios, &result.params, Some(&sel)) {
            Ok(v) => (v, None),
            Err(e @ Error::Singular(_)) => {
                log::warn!("standard errors unavailable: {e}");
                (Vec::new(), Some(e.to_string()))
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        (Vec::new(), None)
    };

    let params_path = cli.out.join("params.json");
    save_params(&params_path, &result.params)?;
    m.output(&params_path);

    let history_path = cli.out.join("history.csv");
    let mut w = csv::Writer::from_path(&history_path).map_err(|e| csv_error(&history_path, e))?;
    w.write_record(["epoch", "train_loss", "validation_loss", "ll", "ei"]).map_err(|e| csv_error(&history_path, e))?;
    for r in &result.history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.validation_loss.map(|v| v.to_string()).unwrap_or_default(),
            r.ll.to_string(),
            r.ei.to_string(),
        ])
        .map_err(|e| csv_error(&history_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&history_path, e))?;
    m.output(&history_path);

    let p = &result.params;
    let coefficients: Vec<Value> = p
        .phi_names
        .iter()
        .enumerate()
        .map(|(q, n)| {
            let se = se.iter().find(|(s, _)| s == n).map(|(_, v)| *v);
            json!({
                "name": n,
                "estimate": finite_json(p.phi[q]),
                "std_error": se.map(finite_json),
                "t_stat": se.map(|s| finite_json(p.phi[q] / s)),
                "frozen": p.frozen[q],
            })
        })
        .collect();
    let report = json!({
        "model": kind.name(),
        "layers": p.layers(),
        "lambda": cfg.lambda,
        "seed": seed,
        "links": net.graph.link_count(),
        "trajectories": {"train": counts[0], "validation": counts[1], "test": counts[2]},
        "optimizer": format!("{:?}", est.optimizer),
        "lr": est.lr,
        "weight_decay": est.weight_decay,
        "batch_size": est.batch_size,
        "coefficients": coefficients,
        "alpha": (kind == ModelKind::ResDgcnRl).then_some(p.alpha),
        "beta": (kind == ModelKind::ResDgcnRl).then_some(p.beta),
        "gamma": (kind == ModelKind::ResDgcnRl).then_some(p.gamma),
        "nrl_gamma": p.nrl_names.iter().zip(&p.nrl_gamma).map(|(n, g)| json!({"name": n, "estimate": g})).collect::<Vec<_>>(),
        "log_likelihood": result.train.ll,
        "ei": ei_penalty(p),
        "loss": result.train.loss,
        "validation": result.validation.as_ref().map(|v| json!({"log_likelihood": v.ll, "loss": v.loss, "n": v.n_trajectories})),
        "stopped_epoch": result.stopped_epoch,
        "best_epoch": result.best_epoch,
        "converged": result.converged,
        "std_errors_error": se_error,
        "seconds": seconds,
        "history": result.history.iter().map(|r| json!({
            "epoch": r.epoch, "train_loss": r.train_loss, "validation_loss": r.validation_loss, "ll": r.ll, "ei": r.ei
        })).collect::<Vec<_>>(),
        "params": params_to_json(p)?,
    });
    write_json(&cli.out.join("fit_report.json"), &report, m)?;
    println!("{}", serde_json::to_string(&json!({
        "model": kind.name(), "log_likelihood": result.train.ll,
        "coefficients": report["coefficients"], "stopped_epoch": result.stopped_epoch,
    })).expect("serialises"));
    Ok(())
}

fn evaluate(cli: &Cli, a: &EvaluateArgs, m: &mut RunManifest) -> Result<()> {
    let cfg = load_config(&a.config, m)?;
    effective_seed(cli, &cfg, m);
    let params = fitted_params(&a.params, &cfg, a.model.map(Into::into), m)?;
    let net = load_net(&a.net, m)?;
    m.input("trajectories", &a.trajs)?;
    let loaded = load_trajectories(&a.trajs, &net)?;
    let split_name = match a.split {
        SplitArg::All => "all",
        SplitArg::Train => "train",
        SplitArg::Validation => "validation",
        SplitArg::Test => "test",
    };
    let wanted = |t: &Trajectory| match a.split {
        SplitArg::All => true,
        SplitArg::Train => t.split == Split::Train,
        SplitArg::Validation => t.split == Split::Validation,
        SplitArg::Test => t.split == Split::Test,
    };
    let set = TrajectorySet::new(loaded.set.iter().filter(|t| wanted(t)).cloned().collect());
    if set.is_empty() {
        return Err(CliError::Input(format!("no trajectories in split '{split_name}'")));
    }
    let scn = scenario("data", &net, &cfg, set)?;
    let trajs: Vec<&Trajectory> = scn.trajectories.iter().collect();
    let report = evaluate_metrics(&scn, &params, &trajs, cfg.jsd_grouping(), true)?;
    log::info!(
        "{}: LL {:.4}, ACP {:.4}, JSD {:.4}, BLEU {:.4} over {} trajectories",
        params.kind.name(),
        report.ll,
        report.acp,
        report.jsd,
        report.bleu,
        report.n_trajectories
    );
    let summary = json!({
        "model": params.kind.name(),
        "split": split_name,
        "n_trajectories": report.n_trajectories,
        "log_likelihood": report.ll,
        "acp": report.acp,
        "jsd": report.jsd,
        "bleu": report.bleu,
        "route_failures": report.route_failures,
        "jsd_grouping": format!("{:?}", cfg.jsd_grouping()),
    });
    write_json(&cli.out.join("metrics.json"), &summary, m)?;

    let row_path = cli.out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&row_path).map_err(|e| csv_error(&row_path, e))?;
    let err = |e| csv_error(&row_path, e);
    w.write_record(["model", "split", "n_trajectories", "ll", "acp", "jsd", "bleu", "route_failures"]).map_err(err)?;
    w.write_record([
        params.kind.name().to_string(),
        split_name.to_string(),
        report.n_trajectories.to_string(),
        report.ll.to_string(),
        report.acp.to_string(),
        report.jsd.to_string(),
        report.bleu.to_string(),
        report.route_failures.to_string(),
    ])
    .map_err(err)?;
    w.flush().map_err(|e| CliError::io(&row_path, e))?;
    m.output(&row_path);

    let per_path = cli.out.join("per_trajectory.csv");
    let mut w = csv::Writer::from_path(&per_path).map_err(|e| csv_error(&per_path, e))?;
    let err = |e| csv_error(&per_path, e);
    w.write_record(["traj_id", "ll", "probability", "jsd", "bleu", "route_complete"]).map_err(err)?;
    for r in report.per_trajectory.iter().flatten() {
        w.write_record([
            r.id.clone(),
            r.ll.to_string(),
            r.probability.to_string(),
            r.jsd.map(|x| x.to_string()).unwrap_or_default(),
            r.bleu.to_string(),
            r.route_complete.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(&per_path, e))?;
    m.output(&per_path);
    println!("{}", serde_json::to_string(&summary).expect("serialises"));
    Ok(())
}

fn flow(cli: &Cli, a: &FlowArgs, m: &mut RunManifest) -> Result<()> {
    let cfg = load_config(&a.config, m)?;
    effective_seed(cli, &cfg, m);
    let params = fitted_params(&a.params, &cfg, a.model.map(Into::into), m)?;
    let net = load_net(&a.net, m)?;
    let o = net.resolve_link(&a.origin)?;
    let d = net.resolve_link(&a.destination)?;
    let scn = scenario("network", &net, &cfg, TrajectorySet::new(Vec::new()))?;
    let pred = Predictor::new(&scn, &params)?;
    let cm = pred.choice(o, d).map_err(|e| diagnose(e, &net, &a.destination))?;
    let fv = expected_link_flow(&net.graph, &cm, o).map_err(|e| diagnose(e, &net, &a.destination))?;

    // Balance of (I − Pᵀ) F = G, and the demand reaching the destination.
    let mut balance = 0.0f64;
    for a_link in 0..net.graph.link_count() {
        let mut rhs = if a_link == o { 1.0 } else { 0.0 };
        for (k, e) in net.graph.incoming(a_link) {
            rhs += cm.p[e] * fv.flow[k];
        }
        balance = balance.max((fv.flow[a_link] - rhs).abs());
    }
    let inflow = fv.destination_inflow();
    let conservation = (inflow - 1.0).abs();
    if conservation > 1e-8 {
        log::warn!("flow conservation residual {conservation:e} exceeds 1e-8");
    }

    let flow_path = cli.out.join("flow.csv");
    write_link_values(&flow_path, "flow", &net.link_ids, &fv.flow)?;
    m.output(&flow_path);
    let choice_path = cli.out.join("choice.csv");
    let mut w = csv::Writer::from_path(&choice_path).map_err(|e| csv_error(&choice_path, e))?;
    let err = |e| csv_error(&choice_path, e);
    w.write_record(["from_link", "to_link", "probability"]).map_err(err)?;
    for (e, (k, next)) in net.graph.edges().enumerate() {
        w.write_record([net.link_ids[k].as_str(), net.link_ids[next].as_str(), &cm.p[e].to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(&choice_path, e))?;
    m.output(&choice_path);
    let check = json!({
        "model": params.kind.name(),
        "origin": a.origin,
        "destination": a.destination,
        "destination_inflow": inflow,
        "conservation_residual": conservation,
        "balance_residual": balance,
        "pass": conservation < 1e-8 && balance < 1e-8,
    });
    write_json(&cli.out.join("flow_check.json"), &check, m)?;
    println!("{}", serde_json::to_string(&check).expect("serialises"));
    Ok(())
}

/// Rephrases reachability failures in terms of link ids.
fn diagnose(e: Error, net: &NetworkData, destination: &str) -> CliError {
    match e {
        Error::Unreachable { from, .. } => CliError::Numeric(format!(
            "destination '{destination}' cannot be reached from '{}'{}",
            net.link_ids[from],
            if net.graph.predecessors(net.link_index(destination).unwrap_or(0)).is_empty() {
                "; no link leads into the destination"
            } else {
                ""
            }
        )),
        other => other.into(),
    }
}

fn read_ods(path: &Path) -> Result<Vec<(u64, String, String)>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |n: &str| {
        headers.iter().position(|h| h == n).ok_or_else(|| CliError::parse(path, 1, format!("missing column '{n}'")))
    };
    let (oc, dc) = (col("origin")?, col("destination")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        out.push((record_line(&rec), rec[oc].to_string(), rec[dc].to_string()));
    }
    Ok(out)
}

fn predict(cli: &Cli, a: &PredictArgs, m: &mut RunManifest) -> Result<()> {
    let cfg = load_config(&a.config, m)?;
    effective_seed(cli, &cfg, m);
    let params = fitted_params(&a.params, &cfg, a.model.map(Into::into), m)?;
    let net = load_net(&a.net, m)?;
    let ods = match (&a.ods, &a.origin, &a.destination) {
        (Some(p), _, _) => {
            m.input("ods", p)?;
            read_ods(p)?
        }
        (None, Some(o), Some(d)) => vec![(0, o.clone(), d.clone())],
        _ => return Err(CliError::Input("give --ods FILE or both --origin and --destination".into())),
    };
    let mut resolved = Vec::with_capacity(ods.len());
    for (line, o, d) in &ods {
        let find = |id: &str| {
            net.link_index(id).ok_or_else(|| match &a.ods {
                Some(p) => CliError::parse(p, *line, format!("unknown link id '{id}'")),
                None => CliError::Input(format!("unknown link id '{id}'")),
            })
        };
        resolved.push((find(o)?, find(d)?));
    }
    let scn = scenario("network", &net, &cfg, TrajectorySet::new(Vec::new()))?;
    let pred = Predictor::new(&scn, &params)?;
    let max_steps = a.max_steps.unwrap_or_else(|| default_max_steps(&net.graph));
    let path = cli.out.join("routes.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let err = |e| csv_error(&path, e);
    w.write_record(["origin", "destination", "route", "log_probability", "status"]).map_err(err)?;
    let ids = |r: &[usize]| r.iter().map(|&k| net.link_ids[k].as_str()).collect::<Vec<_>>().join(";");
    for ((_, o_id, d_id), &(o, d)) in ods.iter().zip(&resolved) {
        let (route, lp, status) = match pred.choice(o, d).and_then(|cm| {
            most_probable_route(&net.graph, &cm, o, max_steps)
                .and_then(|r| reclogit_core::solver::path_log_probability(&net.graph, &r, &cm).map(|lp| (r, lp)))
        }) {
            Ok((r, lp)) => (ids(&r), lp.to_string(), "complete"),
            Err(Error::IncompleteRoute { partial }) => (ids(&partial), String::new(), "incomplete"),
            Err(Error::Unreachable { .. }) | Err(Error::ValueUndefined { .. }) => {
                (String::new(), String::new(), "unreachable")
            }
            Err(e) => return Err(e.into()),
        };
        w.write_record([o_id.as_str(), d_id.as_str(), &route, &lp, status]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    m.output(&path);
    Ok(())
}

fn reproduce_toy(cli: &Cli, m: &mut RunManifest) -> Result<()> {
    let (report, failure) = toy::reproduce_toy();
    let text = toy::render(&report);
    print!("{text}");
    let txt = cli.out.join("toy_report.txt");
    std::fs::write(&txt, &text).map_err(|e| CliError::io(&txt, e))?;
    m.output(&txt);
    let value = serde_json::to_value(&report).expect("report serialises");
    write_json(&cli.out.join("toy_report.json"), &value, m)?;
    for r in &report.models {
        let p = cli.out.join(format!("toy_{}_params.json", r.model));
        save_params(&p, &r.params)?;
        m.output(&p);
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn export_proximities(cli: &Cli, a: &ProximityArgs, m: &mut RunManifest) -> Result<()> {
    let net = load_net(&a.net, m)?;
    let prox = network::build_proximities(&net.graph);
    let path = cli.out.join("proximities.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let err = |e| csv_error(&path, e);
    w.write_record(["from_link", "to_link", "first", "second_in", "second_out"]).map_err(err)?;
    for k in 0..prox.dim() {
        for e in prox.row_entries(k) {
            w.write_record([
                net.link_ids[k].as_str(),
                net.link_ids[e.col].as_str(),
                &e.first.to_string(),
                &e.second_in.to_string(),
                &e.second_out.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    m.output(&path);
    Ok(())
}

/// Network and trajectory files of the illustrative example, plus a
/// configuration that estimates RL from `β_t = −1`.
pub fn toy_network_data() -> NetworkData {
    let fx = fixture::toy_fixture();
    NetworkData {
        link_ids: fixture::TOY_LINKS.iter().map(|(t, h, _)| format!("{t}-{h}")).collect(),
        node_ids: (0..fx.graph.node_count()).map(|i| i.to_string()).collect(),
        columns: vec![(fixture::TOY_FEATURE.to_string(), fixture::toy_travel_times())],
        graph: fx.graph,
    }
}

pub const TOY_CONFIG: &str = r#"{
  "features": [
    {"name": "travel_time", "source": "link", "unit": "min", "nonnegative": true}
  ],
  "init": {"phi": {"travel_time": -1.0}},
  "M": 1,
  "lambda": 0.0,
  "standard_errors": true
}
"#;

fn export_toy(cli: &Cli, m: &mut RunManifest) -> Result<()> {
    let net = toy_network_data();
    let fx = fixture::toy_fixture();
    let files: [(&str, PathBuf); 4] = [
        ("network", cli.out.join("toy.csv")),
        ("before", cli.out.join("toy_before.csv")),
        ("after", cli.out.join("toy_after.csv")),
        ("config", cli.out.join("toy_config.json")),
    ];
    write_network(&files[0].1, &net)?;
    write_trajectories(&files[1].1, &fx.before, &net.link_ids, TrajectoryLayout::Long, false)?;
    write_trajectories(&files[2].1, &fx.after, &net.link_ids, TrajectoryLayout::Long, false)?;
    std::fs::write(&files[3].1, TOY_CONFIG).map_err(|e| CliError::io(&files[3].1, e))?;
    for (_, p) in &files {
        m.output(p);
    }
    Ok(())
}
