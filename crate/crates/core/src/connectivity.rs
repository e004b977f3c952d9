//! The interface shared by every structure, plus a factory.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dtree::DTree;
use crate::euler::{Hdt, Hk, Hks};
use crate::graph::{EdgeClass, EdgeKey, GraphError, GraphModel, VertexId};
use crate::hierarchy::ClusterForest;
use crate::lct::LinkCutForest;
use crate::memory::MemoryModel;

/// Failures of the raw forest operations (link, cut, reroot, root lookup).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertices {0} and {1} are already connected")]
    AlreadyConnected(VertexId, VertexId),
    #[error("({0}, {1}) is not a tree edge")]
    NotTreeEdge(VertexId, VertexId),
}

/// Result of one update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateOutcome {
    NewTreeEdge,
    NewNonTreeEdge,
    DuplicateIgnored,
    NonTreeRemoved,
    SplitReconnected(EdgeKey),
    SplitPermanent,
    MissingIgnored,
}

impl UpdateOutcome {
    /// Change in the number of connected components caused by this update.
    pub fn component_delta(&self) -> isize {
        match self {
            UpdateOutcome::NewTreeEdge => -1,
            UpdateOutcome::SplitPermanent => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureStats {
    pub node_count: usize,
    pub max_height: usize,
    pub level_histogram: Vec<usize>,
    pub memory_bytes: u64,
}

pub trait ConnectivityStructure: Send {
    fn name(&self) -> &'static str;

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError>;

    /// Absent edges and self-loops yield [`UpdateOutcome::MissingIgnored`].
    fn delete_edge(&mut self, u: VertexId, v: VertexId) -> UpdateOutcome;

    /// Identifier of the component containing `u`, `None` for unknown ids.
    /// Two vertices are connected iff their ids are equal at the same moment.
    fn component_id(&mut self, u: VertexId) -> Option<usize>;

    fn connected(&mut self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return true;
        }
        match (self.component_id(u), self.component_id(v)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Make `v` (and every smaller id) exist as an isolated vertex.
    fn ensure_vertex(&mut self, v: VertexId);

    fn graph(&self) -> &GraphModel;

    fn classify_edge(&self, u: VertexId, v: VertexId) -> EdgeClass {
        match EdgeKey::new(u, v) {
            Ok(k) => self.graph().classify(k),
            Err(_) => EdgeClass::Absent,
        }
    }

    fn vertex_count(&self) -> usize {
        self.graph().vertex_count()
    }

    fn node_count(&self) -> usize;

    fn max_height(&mut self) -> usize;

    fn memory_bytes(&self, model: &MemoryModel) -> u64;

    /// Full structural self-check. Expensive; meant for tests.
    fn audit(&mut self) -> Result<(), String>;

    /// The cheaper shape part of [`audit`](Self::audit): height bounds for
    /// cluster forests, tour decoding for Euler-tour forests.
    fn shape_audit(&mut self) -> Result<(), String> {
        Ok(())
    }

    fn stats(&mut self, model: &MemoryModel) -> StructureStats {
        StructureStats {
            node_count: self.node_count(),
            max_height: self.max_height(),
            level_histogram: self.graph().level_histogram(),
            memory_bytes: self.memory_bytes(model),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureKind {
    DTree,
    Lct,
    Hks,
    Hk,
    Hdt,
    St,
    Stv,
    Lt,
    Ltv,
    Lzt,
}

impl StructureKind {
    pub const ALL: [StructureKind; 10] = [
        StructureKind::DTree,
        StructureKind::Lct,
        StructureKind::Hks,
        StructureKind::Hk,
        StructureKind::Hdt,
        StructureKind::St,
        StructureKind::Stv,
        StructureKind::Lt,
        StructureKind::Ltv,
        StructureKind::Lzt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::DTree => "D-tree",
            StructureKind::Lct => "LCT",
            StructureKind::Hks => "HKS",
            StructureKind::Hk => "HK",
            StructureKind::Hdt => "HDT",
            StructureKind::St => "ST",
            StructureKind::Stv => "STV",
            StructureKind::Lt => "LT",
            StructureKind::Ltv => "LTV",
            StructureKind::Lzt => "LzT",
        }
    }

    /// Structures that keep edge levels and follow the level push-down rule.
    pub fn is_leveled(&self) -> bool {
        matches!(
            self,
            StructureKind::Hk
                | StructureKind::Hdt
                | StructureKind::St
                | StructureKind::Stv
                | StructureKind::Lt
                | StructureKind::Ltv
                | StructureKind::Lzt
        )
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown structure `{0}`")]
pub struct UnknownStructure(pub String);

impl FromStr for StructureKind {
    type Err = UnknownStructure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "d-tree" | "dtree" => StructureKind::DTree,
            "lct" => StructureKind::Lct,
            "hks" => StructureKind::Hks,
            "hk" => StructureKind::Hk,
            "hdt" => StructureKind::Hdt,
            "st" => StructureKind::St,
            "stv" => StructureKind::Stv,
            "lt" => StructureKind::Lt,
            "ltv" => StructureKind::Ltv,
            "lzt" => StructureKind::Lzt,
            _ => return Err(UnknownStructure(s.to_string())),
        };
        Ok(kind)
    }
}

/// Construction parameters shared by the factory.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Seeds treap priorities and the HK sampler.
    pub seed: u64,
    /// Buffer threshold for lazy local trees.
    pub beta: usize,
    /// Vertices created up front.
    pub vertices: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            seed: 0,
            beta: 2,
            vertices: 0,
        }
    }
}

pub fn build(kind: StructureKind, opts: &BuildOptions) -> Box<dyn ConnectivityStructure> {
    let mut s: Box<dyn ConnectivityStructure> = match kind {
        StructureKind::DTree => Box::new(DTree::new()),
        StructureKind::Lct => Box::new(LinkCutForest::new()),
        StructureKind::Hks => Box::new(Hks::new(opts.seed)),
        StructureKind::Hk => Box::new(Hk::new(opts.seed)),
        StructureKind::Hdt => Box::new(Hdt::new(opts.seed)),
        StructureKind::St => Box::new(ClusterForest::st()),
        StructureKind::Stv => Box::new(ClusterForest::stv()),
        StructureKind::Lt => Box::new(ClusterForest::lt()),
        StructureKind::Ltv => Box::new(ClusterForest::ltv()),
        StructureKind::Lzt => Box::new(ClusterForest::lzt(opts.beta)),
    };
    if opts.vertices > 0 {
        s.ensure_vertex(opts.vertices - 1);
    }
    s
}
