//! Trajectory files, in one of two layouts:
//!
//! ```text
//! traj_id,seq,link_id[,split]        one row per visited link
//! traj_id,links[,split]              links joined with ';'
//! ```
//!
//! The long layout is read as a stream: rows of a trajectory must be
//! contiguous and `seq` must increase within it. Every trajectory is checked
//! against the graph as soon as it is complete, so errors carry the line of
//! the offending row.

use std::collections::HashSet;
use std::path::Path;

use reclogit_core::{LinkGraph, Split, Trajectory, TrajectorySet};

use super::{csv_error, open, record_line, NetworkData};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryLayout {
    Long,
    Wide,
}

#[derive(Debug, Clone)]
pub struct LoadedTrajectories {
    pub set: TrajectorySet,
    pub layout: TrajectoryLayout,
    /// Whether the file carried a `split` column.
    pub has_splits: bool,
}

struct Pending {
    id: String,
    links: Vec<usize>,
    lines: Vec<u64>,
    last_seq: i64,
    split: Split,
}

fn check(path: &Path, graph: &LinkGraph, ids: &[String], p: &Pending) -> Result<()> {
    for (i, &k) in p.links.iter().enumerate() {
        if graph.is_removed(k) {
            return Err(CliError::parse(
                path,
                p.lines[i],
                format!("trajectory '{}' uses closed link '{}'", p.id, ids[k]),
            ));
        }
    }
    for (i, w) in p.links.windows(2).enumerate() {
        if !graph.has_transition(w[0], w[1]) {
            return Err(CliError::parse(
                path,
                p.lines[i + 1],
                format!("trajectory '{}': link '{}' does not follow link '{}'", p.id, ids[w[1]], ids[w[0]]),
            ));
        }
    }
    Ok(())
}

fn parse_split(path: &Path, line: u64, raw: &str) -> Result<Split> {
    Split::parse(raw).ok_or_else(|| CliError::parse(path, line, format!("unknown split '{raw}'")))
}

/// Reads and validates trajectories against `net.graph`.
pub fn load_trajectories(path: &Path, net: &NetworkData) -> Result<LoadedTrajectories> {
    load_trajectories_on(path, net, &net.graph)
}

/// Like [`load_trajectories`] but validates against another graph over the
/// same links (a counterfactual).
pub fn load_trajectories_on(path: &Path, net: &NetworkData, graph: &LinkGraph) -> Result<LoadedTrajectories> {
    let lookup = net.link_lookup();
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("traj_id").ok_or_else(|| CliError::parse(path, 1, "missing column 'traj_id'"))?;
    let split_col = col("split");
    let layout = if col("seq").is_some() { TrajectoryLayout::Long } else { TrajectoryLayout::Wide };
    let link = |line: u64, raw: &str| -> Result<usize> {
        lookup
            .get(raw)
            .copied()
            .ok_or_else(|| CliError::parse(path, line, format!("unknown link id '{raw}'")))
    };

    let mut out = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    match layout {
        TrajectoryLayout::Long => {
            let seq_col = col("seq").expect("checked above");
            let link_col = col("link_id").ok_or_else(|| CliError::parse(path, 1, "missing column 'link_id'"))?;
            let mut current: Option<Pending> = None;
            let finish = |p: Pending, out: &mut Vec<Trajectory>| -> Result<()> {
                check(path, graph, &net.link_ids, &p)?;
                out.push(Trajectory { id: p.id, links: p.links, split: p.split });
                Ok(())
            };
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let line = record_line(&rec);
                let id = &rec[id_col];
                let seq: i64 = rec[seq_col]
                    .parse()
                    .map_err(|_| CliError::parse(path, line, format!("seq '{}' is not an integer", &rec[seq_col])))?;
                let k = link(line, &rec[link_col])?;
                let split = match split_col {
                    Some(c) => parse_split(path, line, &rec[c])?,
                    None => Split::Train,
                };
                match &mut current {
                    Some(p) if p.id == id => {
                        if seq <= p.last_seq {
                            return Err(CliError::parse(path, line, format!("seq {seq} does not increase in trajectory '{id}'")));
                        }
                        if split != p.split {
                            return Err(CliError::parse(path, line, format!("trajectory '{id}' changes split")));
                        }
                        p.links.push(k);
                        p.lines.push(line);
                        p.last_seq = seq;
                    }
                    _ => {
                        if let Some(p) = current.take() {
                            finish(p, &mut out)?;
                        }
                        if id.is_empty() {
                            return Err(CliError::parse(path, line, "empty trajectory id"));
                        }
                        if !seen.insert(id.to_string()) {
                            return Err(CliError::parse(path, line, format!("rows of trajectory '{id}' are not contiguous")));
                        }
                        current = Some(Pending { id: id.to_string(), links: vec![k], lines: vec![line], last_seq: seq, split });
                    }
                }
            }
            if let Some(p) = current.take() {
                finish(p, &mut out)?;
            }
        }
        TrajectoryLayout::Wide => {
            let links_col = col("links")
                .or_else(|| col("link_ids"))
                .ok_or_else(|| CliError::parse(path, 1, "expected a 'seq' column (long layout) or a 'links' column"))?;
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let line = record_line(&rec);
                let id = &rec[id_col];
                if id.is_empty() {
                    return Err(CliError::parse(path, line, "empty trajectory id"));
                }
                if !seen.insert(id.to_string()) {
                    return Err(CliError::parse(path, line, format!("duplicate trajectory id '{id}'")));
                }
                let raw = &rec[links_col];
                if raw.is_empty() {
                    return Err(CliError::parse(path, line, format!("trajectory '{id}' has no links")));
                }
                let links = raw.split(';').map(|s| link(line, s.trim())).collect::<Result<Vec<_>>>()?;
                let split = match split_col {
                    Some(c) => parse_split(path, line, &rec[c])?,
                    None => Split::Train,
                };
                let p = Pending { id: id.to_string(), lines: vec![line; links.len()], links, last_seq: 0, split };
                check(path, graph, &net.link_ids, &p)?;
                out.push(Trajectory { id: p.id, links: p.links, split });
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::parse(path, 1, "file contains no trajectories"));
    }
    Ok(LoadedTrajectories { set: TrajectorySet::new(out), layout, has_splits: split_col.is_some() })
}

pub fn write_trajectories(
    path: &Path,
    set: &TrajectorySet,
    link_ids: &[String],
    layout: TrajectoryLayout,
    with_splits: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = match layout {
        TrajectoryLayout::Long => vec!["traj_id", "seq", "link_id"],
        TrajectoryLayout::Wide => vec!["traj_id", "links"],
    };
    if with_splits {
        header.push("split");
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for t in set.iter() {
        let split = t.split.name();
        match layout {
            TrajectoryLayout::Long => {
                for (i, &k) in t.links.iter().enumerate() {
                    let seq = i.to_string();
                    let mut row = vec![t.id.as_str(), &seq, &link_ids[k]];
                    if with_splits {
                        row.push(split);
                    }
                    w.write_record(&row).map_err(|e| csv_error(path, e))?;
                }
            }
            TrajectoryLayout::Wide => {
                let joined = t.links.iter().map(|&k| link_ids[k].as_str()).collect::<Vec<_>>().join(";");
                let mut row = vec![t.id.as_str(), &joined];
                if with_splits {
                    row.push(split);
                }
                w.write_record(&row).map_err(|e| csv_error(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
