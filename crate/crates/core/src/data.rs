//! Observed link sequences.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::network::LinkGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" | "training" => Some(Split::Train),
            "validation" | "valid" | "val" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// One observed route: link indices from origin link to destination link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub id: String,
    pub links: Vec<usize>,
    pub split: Split,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, links: Vec<usize>) -> Self {
        Self { id: id.into(), links, split: Split::Train }
    }

    pub fn origin(&self) -> usize {
        self.links[0]
    }

    pub fn destination(&self) -> usize {
        self.links[self.links.len() - 1]
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn step_count(&self) -> usize {
        self.links.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Self {
        Self { trajectories }
    }

    /// Builds a set after checking every step against the graph.
    pub fn validated(trajectories: Vec<Trajectory>, graph: &LinkGraph) -> Result<Self> {
        let set = Self { trajectories };
        set.validate(graph)?;
        Ok(set)
    }

    pub fn validate(&self, graph: &LinkGraph) -> Result<()> {
        for (n, t) in self.trajectories.iter().enumerate() {
            validate_trajectory(n, t, graph)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn split(&self, which: Split) -> TrajectorySet {
        Self { trajectories: self.trajectories.iter().filter(|t| t.split == which).cloned().collect() }
    }

    /// Randomly labels trajectories with the given train/validation fractions;
    /// the rest become test.
    pub fn assign_splits(&mut self, train: f64, validation: f64, seed: u64) -> Result<()> {
        if !(0.0..=1.0).contains(&train) || !(0.0..=1.0).contains(&validation) || train + validation > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "split fractions {train}/{validation} do not partition the data"
            )));
        }
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = libm::round(train * n as f64) as usize;
        let n_val = (libm::round(validation * n as f64) as usize).min(n - n_train);
        for (rank, &i) in order.iter().enumerate() {
            self.trajectories[i].split = if rank < n_train {
                Split::Train
            } else if rank < n_train + n_val {
                Split::Validation
            } else {
                Split::Test
            };
        }
        Ok(())
    }
}

pub fn validate_trajectory(n: usize, t: &Trajectory, graph: &LinkGraph) -> Result<()> {
    if t.links.is_empty() {
        return Err(Error::MalformedTrajectory { trajectory: n, detail: "no links".into() });
    }
    for &l in &t.links {
        graph.check_link(l).map_err(|_| Error::MalformedTrajectory {
            trajectory: n,
            detail: format!("unknown link index {l}"),
        })?;
    }
    for (s, (k, a)) in t.steps().enumerate() {
        if !graph.has_transition(k, a) {
            return Err(Error::InfeasibleStep { trajectory: n, step: s, from: k, to: a });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn removed_link_trajectory_fails_validation() {
        let fx = fixture::toy_fixture();
        let path3 = fixture::toy_path(3);
        let t = Trajectory::new("p3", path3);
        assert!(validate_trajectory(0, &t, &fx.graph).is_ok());
        assert!(matches!(
            validate_trajectory(0, &t, &fx.after_graph),
            Err(Error::InfeasibleStep { .. })
        ));
    }

    #[test]
    fn splits_partition() {
        let mut set = fixture::toy_fixture().before;
        set.assign_splits(0.7, 0.2, 1).unwrap();
        let (a, b, c) = (set.split(Split::Train).len(), set.split(Split::Validation).len(), set.split(Split::Test).len());
        assert_eq!(a + b + c, set.len());
        assert_eq!((a, b, c), (70, 20, 10));
        assert!(set.assign_splits(0.9, 0.2, 1).is_err());
    }
}
