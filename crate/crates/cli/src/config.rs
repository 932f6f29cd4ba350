//! Run configuration (JSON).
//!
//! Only `features` is required. Everything else falls back to the toy
//! protocol (full-batch SGD, learning rate 0.1, 1000 epochs) unless
//! `"protocol": "large_scale"` selects the minibatch AdamW defaults.
//!
//! ```json
//! {
//!   "features": [
//!     {"name": "travel_time", "source": "link", "unit": "min", "nonnegative": true},
//!     {"name": "right_turn", "source": "transition", "file": "right_turns.csv"},
//!     {"name": "link_constant", "source": "constant"},
//!     {"name": "uturn", "source": "uturn"}
//!   ],
//!   "init": {"phi": {"travel_time": -1.0, "uturn": -20.0}, "frozen": ["uturn"]},
//!   "lambda": 0.0,
//!   "M": 1
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use reclogit_core::estimation::EstimationConfig;
use reclogit_core::evaluator::LINK_SIZE;
use reclogit_core::metrics::JsdGrouping;
use reclogit_core::optim::OptimizerKind;
use reclogit_core::{FeatureSource, FeatureSpec, FeatureTensor, LinkGraph, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::io::{csv_error, open, record_line, NetworkData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    Link,
    Constant,
    Uturn,
    Transition,
    LinkSize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub name: String,
    pub source: SourceName,
    /// Network column for `link` features; defaults to the feature name.
    #[serde(default)]
    pub column: Option<String>,
    /// `from_link,to_link,value` CSV for `transition` features, relative to
    /// the configuration file.
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub nonnegative: bool,
}

/// A link attribute entering the NRL scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeConfig {
    pub name: String,
    #[serde(default)]
    pub column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    Toy,
    LargeScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerName {
    Sgd,
    #[serde(alias = "adamw")]
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingName {
    #[default]
    Predecessor,
    PredecessorDestination,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    #[serde(default)]
    pub validation: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default)]
    pub phi: Map<String, Value>,
    #[serde(default)]
    pub frozen: Vec<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(default)]
    pub nrl_gamma: Map<String, Value>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<String>,
    pub features: Vec<FeatureConfig>,
    #[serde(default)]
    pub nrl_attributes: Vec<AttributeConfig>,
    /// Fixed coefficients used to compute the link-size attribute.
    #[serde(default)]
    pub link_size_fixed: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub protocol: Protocol,
    pub optimizer: Option<OptimizerName>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    /// `null` or absent keeps the protocol default; 0 means full batch.
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub seed: Option<u64>,
    /// Random train/validation/test assignment, used only when the
    /// trajectory file has no `split` column.
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub jsd_grouping: GroupingName,
    #[serde(default = "yes")]
    pub standard_errors: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn num(what: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Input(format!("'{what}' must be a finite number, got {v}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("configuration: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CliError::Input(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if self.features.is_empty() {
            return Err(CliError::Input("no features configured".into()));
        }
        for (i, f) in self.features.iter().enumerate() {
            if self.features[..i].iter().any(|g| g.name == f.name) {
                return Err(CliError::Input(format!("feature '{}' is listed twice", f.name)));
            }
            if f.source == SourceName::Transition && f.file.is_none() {
                return Err(CliError::Input(format!("transition feature '{}' needs a 'file'", f.name)));
            }
        }
        if self.features.iter().filter(|f| f.source == SourceName::LinkSize).count() > 1 {
            return Err(CliError::Input("at most one link_size feature".into()));
        }
        if let Some(s) = self.split {
            if !(0.0..=1.0).contains(&s.train) || !(0.0..=1.0).contains(&s.validation) || s.train + s.validation > 1.0 {
                return Err(CliError::Input(format!("split fractions {}/{} are invalid", s.train, s.validation)));
            }
        }
        for name in self.init.phi.keys().chain(&self.init.frozen) {
            if !self.features.iter().any(|f| &f.name == name) {
                return Err(CliError::Input(format!("init names unknown feature '{name}'")));
            }
        }
        Ok(())
    }

    /// Model from the command line, else from the configuration, else RL.
    pub fn model_kind(&self, flag: Option<ModelKind>) -> Result<ModelKind> {
        if let Some(k) = flag {
            return Ok(k);
        }
        match &self.model {
            Some(s) => ModelKind::parse(s).ok_or_else(|| CliError::Input(format!("unknown model '{s}'"))),
            None => Ok(ModelKind::Rl),
        }
    }

    pub fn layers(&self, kind: ModelKind) -> usize {
        if kind.has_residual() {
            self.m.unwrap_or(1)
        } else {
            0
        }
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn uses_link_size(&self) -> bool {
        self.features.iter().any(|f| f.source == SourceName::LinkSize)
            || self.nrl_attributes.iter().any(|a| a.name == LINK_SIZE)
    }

    pub fn jsd_grouping(&self) -> JsdGrouping {
        match self.jsd_grouping {
            GroupingName::Predecessor => JsdGrouping::Predecessor,
            GroupingName::PredecessorDestination => JsdGrouping::PredecessorDestination,
        }
    }

    /// Files the configuration reads besides the network and trajectories.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        self.features.iter().filter_map(|f| f.file.as_ref()).map(|p| self.base_dir.join(p)).collect()
    }

    fn column<'n>(&self, net: &'n NetworkData, feature: &str, column: &str) -> Result<&'n [f64]> {
        net.column(column).ok_or_else(|| {
            CliError::Input(format!(
                "feature '{feature}' needs column '{column}', which the network file does not have (columns: {})",
                net.columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", ")
            ))
        })
    }

    fn load_transitions(&self, net: &NetworkData, file: &Path) -> Result<Vec<(usize, usize, f64)>> {
        let path = self.base_dir.join(file);
        let mut rdr = open(&path)?;
        let headers = rdr.headers().map_err(|e| csv_error(&path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["from_link", "to_link", "value"] {
            return Err(CliError::parse(&path, 1, "header must be from_link,to_link,value"));
        }
        let lookup = net.link_lookup();
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&path, e))?;
            let line = record_line(&rec);
            let link = |s: &str| {
                lookup.get(s).copied().ok_or_else(|| CliError::parse(&path, line, format!("unknown link id '{s}'")))
            };
            let (k, a) = (link(&rec[0])?, link(&rec[1])?);
            let x: f64 = rec[2]
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| CliError::parse(&path, line, format!("'{}' is not a finite number", &rec[2])))?;
            if !net.graph.has_transition(k, a) {
                return Err(CliError::parse(&path, line, format!("'{}' does not follow '{}'", &rec[1], &rec[0])));
            }
            out.push((k, a, x));
        }
        Ok(out)
    }

    /// Feature specifications resolved against the network columns.
    pub fn feature_specs(&self, net: &NetworkData) -> Result<Vec<FeatureSpec>> {
        self.features
            .iter()
            .map(|f| {
                let source = match f.source {
                    SourceName::Link => {
                        let col = f.column.as_deref().unwrap_or(&f.name);
                        FeatureSource::Link(self.column(net, &f.name, col)?.to_vec())
                    }
                    SourceName::Constant => FeatureSource::Constant,
                    SourceName::Uturn => FeatureSource::UTurn,
                    SourceName::Transition => {
                        FeatureSource::Transition(self.load_transitions(net, f.file.as_deref().expect("checked"))?)
                    }
                    SourceName::LinkSize => FeatureSource::LinkSize,
                };
                let spec = FeatureSpec::new(&f.name, &f.unit, source);
                Ok(if f.nonnegative { spec.nonnegative() } else { spec })
            })
            .collect()
    }

    /// Feature tensor on `graph` (the network graph or a counterfactual),
    /// with the NRL scale attributes attached.
    pub fn build_features(&self, net: &NetworkData, graph: &LinkGraph) -> Result<FeatureTensor> {
        let mut t = FeatureTensor::build(graph, self.feature_specs(net)?)?;
        for a in &self.nrl_attributes {
            if a.name == LINK_SIZE {
                continue;
            }
            let col = a.column.as_deref().unwrap_or(&a.name);
            t = t.with_link_attribute(&a.name, self.column(net, &a.name, col)?.to_vec());
        }
        Ok(t)
    }

    /// Coefficients that generate the link-size attribute.
    pub fn link_size_params(&self) -> Result<ModelParams> {
        let fixed = self.link_size_fixed.as_ref().ok_or_else(|| {
            CliError::Input("a link_size attribute is used but 'link_size_fixed' is not configured".into())
        })?;
        for name in fixed.keys() {
            if !self.features.iter().any(|f| &f.name == name) {
                return Err(CliError::Input(format!("link_size_fixed names unknown feature '{name}'")));
            }
        }
        let phi: Vec<(&str, f64)> =
            self.features.iter().map(|f| (f.name.as_str(), fixed.get(&f.name).copied().unwrap_or(0.0))).collect();
        Ok(ModelParams::new(ModelKind::Rl, &phi))
    }

    /// Starting point of an estimation. `prior` (an earlier fit) supplies
    /// the coefficients it shares with this run; residual layers, α, β, γ
    /// carry over only between runs of the same model and depth.
    pub fn initial_params(&self, kind: ModelKind, links: usize, prior: Option<&ModelParams>) -> Result<ModelParams> {
        let mut phi = Vec::new();
        for f in &self.features {
            let v = match self.init.phi.get(&f.name) {
                Some(v) => num(&f.name, v)?,
                None => 0.0,
            };
            phi.push((f.name.as_str(), v));
        }
        let mut p = ModelParams::new(kind, &phi).with_zero_layers(self.layers(kind), links);
        for name in &self.init.frozen {
            p = p.freeze(name);
        }
        if kind == ModelKind::Nrl {
            let mut g = Vec::new();
            for a in &self.nrl_attributes {
                let v = match self.init.nrl_gamma.get(&a.name) {
                    Some(v) => num(&a.name, v)?,
                    None => 0.0,
                };
                g.push((a.name.as_str(), v));
            }
            p = p.with_nrl(&g);
        }
        p.alpha = self.init.alpha.unwrap_or(1.0);
        p.beta = self.init.beta.unwrap_or(1.0);
        p.gamma = self.init.gamma.unwrap_or(1.0);
        p.mu = self.init.mu.unwrap_or(1.0);
        if let Some(prior) = prior {
            for (i, name) in p.phi_names.clone().iter().enumerate() {
                if let Some(j) = prior.phi_names.iter().position(|n| n == name) {
                    p.phi[i] = prior.phi[j];
                    p.frozen[i] |= prior.frozen[j];
                }
            }
            if kind == ModelKind::Nrl {
                for (i, name) in p.nrl_names.clone().iter().enumerate() {
                    if let Some(j) = prior.nrl_names.iter().position(|n| n == name) {
                        p.nrl_gamma[i] = prior.nrl_gamma[j];
                    }
                }
            }
            if prior.kind == kind && prior.theta.len() == p.theta.len() {
                p.theta = prior.theta.clone();
                p.alpha = prior.alpha;
                p.beta = prior.beta;
                p.gamma = prior.gamma;
            }
            p.mu = prior.mu;
        }
        Ok(p)
    }

    pub fn estimation(&self, seed: u64) -> Result<EstimationConfig> {
        let mut c = match self.protocol {
            Protocol::Toy => EstimationConfig::toy(),
            Protocol::LargeScale => EstimationConfig::large_scale(),
        };
        if let Some(o) = self.optimizer {
            c.optimizer = match o {
                OptimizerName::Sgd => OptimizerKind::Sgd,
                OptimizerName::Adam => OptimizerKind::AdamW,
            };
        }
        if let Some(x) = self.lr {
            c.lr = x;
        }
        if let Some(x) = self.weight_decay {
            c.weight_decay = x;
        }
        if let Some(b) = self.batch_size {
            c.batch_size = if b == 0 { None } else { Some(b) };
        }
        if let Some(x) = self.max_epochs {
            c.max_epochs = x;
        }
        if self.patience.is_some() {
            c.patience = self.patience;
        }
        if self.tolerance.is_some() {
            c.tolerance = self.tolerance;
        }
        c.lambda = self.lambda;
        c.seed = seed;
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn readme_example_parses() {
        let readme = include_str!("../../../README.md");
        let start = readme.find("```json\n").unwrap() + 8;
        let end = start + readme[start..].find("```").unwrap();
        let cfg = RunConfig::from_json(&readme[start..end]).unwrap();
        assert_eq!(cfg.layers(ModelKind::ResDgcnRl), 2);
        assert_eq!(cfg.feature_names(), ["travel_time", "right_turn", "link_constant", "uturn"]);
    }

    #[test]
    fn negative_lambda_rejected() {
        let e = RunConfig::from_json(r#"{"features": [{"name": "tt", "source": "link"}], "lambda": -0.1}"#)
            .unwrap_err();
        assert_eq!(e.exit_code(), crate::error::EXIT_INPUT);
        assert!(e.to_string().contains("lambda"));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::from_json(r#"{"features": [{"name": "tt", "source": "link"}], "lamda": 1}"#).is_err());
    }

    #[test]
    fn overrides_apply_to_protocol() {
        let cfg = RunConfig::from_json(
            r#"{"features": [{"name": "tt", "source": "link"}], "protocol": "large_scale", "batch_size": 0, "lr": 0.01}"#,
        )
        .unwrap();
        let e = cfg.estimation(7).unwrap();
        assert_eq!(e.batch_size, None);
        assert_eq!(e.lr, 0.01);
        assert_eq!(e.patience, Some(10));
        assert_eq!(e.seed, 7);
    }
}
