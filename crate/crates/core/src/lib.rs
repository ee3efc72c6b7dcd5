//! Enumeration and classification of topological (n_k) configurations.
//!
//! The sweep enumerates candidate incidence structures that admit a
//! pseudoline realization; `reduce` collapses them into combinatorial
//! equivalence classes; `oracle` holds slow independent checkers.

pub mod error;
pub mod fixtures;
pub mod incidence;
pub mod oracle;
pub mod partitions;
pub mod reduce;
pub mod sweep;
pub mod wiring;

pub use error::{DrawError, IncidenceError, OracleError, PartitionError, ReduceError, SweepError};
pub use incidence::{Configuration, ConfigurationRecord, VerifyReport};
pub use reduce::{are_isomorphic, automorphism_count, is_self_dual, reduce_all, EquivalenceClass};
pub use partitions::{PartitionTable, SegmentTuple};
pub use sweep::{Event, SweepOptions, SweepOutput, SweepRecord, SweepState};
