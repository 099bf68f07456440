//! Wall-crossing series and the rank recursion for `DT(r, l)`.
//!
//! `DT(r, l)` for `r >= 2` is a sum over walls: ordered splittings of the
//! rank, residue classes of the first Chern classes of the pieces on the
//! blow-up, and trees on the pieces. Each wall contributes its `U`-series
//! times theta factors from the blow-up formula times lower-rank series.

mod cache;
mod recursion;
mod wall;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NSVec;
use crate::joyce::{Digraph, Tree, DEFAULT_MAX_PARTS};

pub use cache::{Cache, CACHE_VERSION};
pub use recursion::{dt_series, walls, DTRecord, Engine};
pub use wall::{
    ambient_gram, blowup_factor, s_series, s_series_bruteforce, s_series_theta_data, u_series,
    u_series_bruteforce,
};

/// One piece of a wall: its rank and the residue of its class modulo the
/// rank (an element of `ns_box(r)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Part {
    pub r: i64,
    pub beta_bar: NSVec,
}

impl Part {
    pub fn new(r: i64, x: i64, y: i64) -> Self {
        Part {
            r,
            beta_bar: NSVec::new(x, y),
        }
    }
}

/// A summand of the rank recursion. The total class is `(l, 1 - l)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WallData {
    pub l: i64,
    pub parts: Vec<Part>,
    pub graph: Tree,
}

impl WallData {
    pub fn rank(&self) -> i64 {
        self.parts.iter().map(|p| p.r).sum()
    }

    pub fn validate(&self) -> Result<()> {
        check_parts(&self.parts)?;
        if self.graph.m != self.parts.len() || !self.graph.is_valid() {
            return Err(Error::InvalidInput(format!(
                "graph {:?} is not a tree on {} vertices",
                self.graph.edges,
                self.parts.len()
            )));
        }
        Ok(())
    }
}

fn check_parts(parts: &[Part]) -> Result<()> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("a wall needs at least one part".into()));
    }
    for p in parts {
        let ok = p.r >= 1 && (0..p.r).contains(&p.beta_bar.x) && (0..p.r).contains(&p.beta_bar.y);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "part ({}, {}) is not a residue modulo its rank",
                p.r, p.beta_bar
            )));
        }
    }
    Ok(())
}

/// The data of an `S`-series: grouped pieces and a directed graph whose
/// edges may repeat, form loops, or leave the graph disconnected.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupedWall {
    pub l: i64,
    pub groups: Vec<Part>,
    pub weight_graph: Digraph,
}

impl GroupedWall {
    pub fn rank(&self) -> i64 {
        self.groups.iter().map(|p| p.r).sum()
    }

    pub fn validate(&self) -> Result<()> {
        check_parts(&self.groups)?;
        let m = self.groups.len();
        if self.weight_graph.m != m || self.weight_graph.edges.iter().any(|&(i, j)| i > j || j >= m) {
            return Err(Error::InvalidInput(format!(
                "graph {:?} does not fit {m} groups",
                self.weight_graph.edges
            )));
        }
        Ok(())
    }
}

impl From<&WallData> for GroupedWall {
    fn from(w: &WallData) -> Self {
        GroupedWall {
            l: w.l,
            groups: w.parts.clone(),
            weight_graph: Digraph::from(&w.graph),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub max_rank: i64,
    pub max_parts: usize,
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_rank: 4,
            max_parts: DEFAULT_MAX_PARTS,
            jobs: 0,
            cache_dir: None,
        }
    }
}
