//! Link-table network files.
//!
//! ```text
//! link_id,tail_node,head_node,travel_time,length
//! 0-1,0,1,0,0.3
//! ```
//!
//! Node ids are arbitrary strings; when no node file is given they are
//! numbered in order of first appearance. Every column after `head_node` is
//! a numeric link attribute that the run configuration can turn into a
//! feature.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use reclogit_core::{Link, LinkGraph};

use super::{csv_error, open, record_line};
use crate::error::{CliError, Result};

const REQUIRED: [&str; 3] = ["link_id", "tail_node", "head_node"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkFormat {
    /// Link table only; nodes are whatever the links mention.
    LinkTable,
    /// Link table plus a `node_id` file. Links naming an undeclared node are
    /// rejected.
    LinkTableWithNodes { nodes: PathBuf },
}

#[derive(Debug, Clone)]
pub struct NetworkData {
    pub graph: LinkGraph,
    pub link_ids: Vec<String>,
    pub node_ids: Vec<String>,
    /// Numeric attribute columns in file order.
    pub columns: Vec<(String, Vec<f64>)>,
}

impl NetworkData {
    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.link_ids.iter().position(|l| l == id)
    }

    /// Map from link id to index, for bulk lookups.
    pub fn link_lookup(&self) -> HashMap<&str, usize> {
        self.link_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn resolve_link(&self, id: &str) -> Result<usize> {
        self.link_index(id)
            .ok_or_else(|| CliError::Input(format!("unknown link id '{id}'")))
    }

    /// Same network with `link` removed from the transition structure.
    pub fn without_link(&self, link: usize) -> Result<Self> {
        Ok(Self { graph: self.graph.remove_link(link)?, ..self.clone() })
    }
}

fn load_nodes(path: &Path) -> Result<Vec<String>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "node_id")
        .ok_or_else(|| CliError::parse(path, 1, "missing column 'node_id'"))?;
    let mut seen = HashMap::new();
    let mut ids = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = record_line(&rec);
        let id = rec.get(col).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::parse(path, line, "empty node id"));
        }
        if seen.insert(id.clone(), line).is_some() {
            return Err(CliError::parse(path, line, format!("duplicate node id '{id}'")));
        }
        ids.push(id);
    }
    Ok(ids)
}

pub fn load_network(path: &Path, format: &NetworkFormat) -> Result<NetworkData> {
    let declared = match format {
        NetworkFormat::LinkTable => None,
        NetworkFormat::LinkTableWithNodes { nodes } => Some(load_nodes(nodes)?),
    };
    let mut node_ids: Vec<String> = declared.clone().unwrap_or_default();
    let mut node_index: HashMap<String, usize> =
        node_ids.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    for (i, want) in REQUIRED.iter().enumerate() {
        if headers.get(i) != Some(*want) {
            return Err(CliError::parse(
                path,
                1,
                format!("header must start with {}, found '{}'", REQUIRED.join(","), headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
    }
    let attr_names: Vec<String> = headers.iter().skip(3).map(String::from).collect();
    for (i, name) in attr_names.iter().enumerate() {
        if name.is_empty() || attr_names[..i].contains(name) || REQUIRED.contains(&name.as_str()) {
            return Err(CliError::parse(path, 1, format!("bad or repeated column name '{name}'")));
        }
    }

    let mut link_ids = Vec::new();
    let mut seen_links: HashMap<String, u64> = HashMap::new();
    let mut links = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); attr_names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = record_line(&rec);
        if rec.len() != headers.len() {
            return Err(CliError::parse(path, line, format!("expected {} fields, found {}", headers.len(), rec.len())));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(CliError::parse(path, line, "empty link id"));
        }
        if let Some(first) = seen_links.insert(id.to_string(), line) {
            return Err(CliError::parse(path, line, format!("duplicate link id '{id}' (first on line {first})")));
        }
        let mut node = |name: &str| -> Result<usize> {
            if name.is_empty() {
                return Err(CliError::parse(path, line, "empty node id"));
            }
            if let Some(&i) = node_index.get(name) {
                return Ok(i);
            }
            if declared.is_some() {
                return Err(CliError::parse(path, line, format!("link '{id}' references undeclared node '{name}'")));
            }
            node_ids.push(name.to_string());
            node_index.insert(name.to_string(), node_ids.len() - 1);
            Ok(node_ids.len() - 1)
        };
        let tail = node(&rec[1])?;
        let head = node(&rec[2])?;
        if tail == head {
            return Err(CliError::parse(path, line, format!("link '{id}' starts and ends at node '{}'", &rec[1])));
        }
        for (j, name) in attr_names.iter().enumerate() {
            let raw = &rec[3 + j];
            let x: f64 = raw
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| CliError::parse(path, line, format!("column '{name}': '{raw}' is not a finite number")))?;
            columns[j].push(x);
        }
        link_ids.push(id.to_string());
        links.push(Link { tail, head });
    }
    if links.is_empty() {
        return Err(CliError::parse(path, 1, "network has no links"));
    }
    let graph = LinkGraph::new(node_ids.len(), links)?;
    Ok(NetworkData { graph, link_ids, node_ids, columns: attr_names.into_iter().zip(columns).collect() })
}

pub fn write_network(path: &Path, net: &NetworkData) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = REQUIRED.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    header.extend(net.columns.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (k, link) in net.graph.links().iter().enumerate() {
        let mut row = vec![net.link_ids[k].clone(), net.node_ids[link.tail].clone(), net.node_ids[link.head].clone()];
        row.extend(net.columns.iter().map(|(_, v)| v[k].to_string()));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `link_id,value` rows for a per-link vector.
pub fn write_link_values(path: &Path, header: &str, link_ids: &[String], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["link_id", header]).map_err(|e| csv_error(path, e))?;
    for (id, v) in link_ids.iter().zip(values) {
        w.write_record([id.as_str(), &v.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
