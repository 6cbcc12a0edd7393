pub mod bits;
pub mod code;
mod codec;
pub mod database;
pub mod dictionary;
pub mod error;
pub mod ingest;
pub mod ntriples;
pub mod ontology;
pub mod query;
pub mod sparql;
pub mod stats;
pub mod store;
pub mod synth;
pub mod term;
pub mod wavelet;

pub use bits::{BitVector, BitVectorBuilder};
pub use code::PrefixCode;
pub use database::{BuildOptions, BuildReport, Database};
pub use dictionary::{DictPolicy, Dictionary};
pub use error::{Error, Result};
pub use ontology::{Element, Hierarchy, Ontology, PropertyClass};
pub use query::{Entailment, ExecStats, PlanMode, QueryOptions, QueryResult};
pub use sparql::{parse_query, Query};
pub use stats::DatasetStats;
pub use store::{EncodedTriple, Object, ObjectPattern, TriplePattern, TripleStore};
pub use wavelet::{CodeTree, WaveletTree};
