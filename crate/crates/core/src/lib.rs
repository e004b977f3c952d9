//! Fully dynamic connectivity structures behind one interface.

pub mod connectivity;
pub mod datasets;
pub mod dtree;
pub mod euler;
pub mod graph;
pub mod harness;
pub mod hierarchy;
pub mod lct;
pub mod memory;
pub mod oracle;
pub mod reference;
mod util;
pub mod verify;
pub mod workload;

pub use connectivity::{
    build, BuildOptions, ConnectivityStructure, ForestError, StructureKind, StructureStats,
    UnknownStructure, UpdateOutcome,
};
pub use dtree::DTree;
pub use euler::{Hdt, Hk, Hks, SampleError};
pub use graph::{EdgeClass, EdgeKey, EdgeKind, GraphError, VertexId};
pub use hierarchy::ClusterForest;
pub use lct::LinkCutForest;
pub use memory::MemoryModel;
pub use oracle::OracleGraph;
pub use reference::ReferenceForest;
