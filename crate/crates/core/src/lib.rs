pub mod chain;
pub mod error;
pub mod lipschitz;
pub mod metric;
pub mod oracle;
pub mod partition;
pub mod ranking;
pub mod rng;
pub mod textio;
pub mod tree;

pub use error::{Error, Result};
pub use metric::{MetricKind, MetricSpace, PointSet, Validation};
pub use tree::{LabeledTree, SizeAncestorIndex, TreeQueryIndex};
pub mod eval;
