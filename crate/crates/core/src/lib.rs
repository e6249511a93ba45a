//! Monochromatic t-tight Berge-path partitions of edge-coloured complete
//! k-graphs.
//!
//! * [`partition::cover_prefix`] covers a prefix `[n]` of the vertices with at
//!   most `s` monochromatic t-tight Berge-paths of different colours when the
//!   edges carry `s(k-t+1)` colours.
//! * [`adversary`] builds the `s(k-t+1)+1` colouring no `s` such paths can
//!   cover, and decides small instances exhaustively.
//! * [`hypergraph::verify_family`] checks any claimed family from the
//!   definitions alone.

pub mod adversary;
pub mod cli;
pub mod combin;
pub mod error;
pub mod hypergraph;
pub mod oracle;
pub mod partition;
pub mod ramsey;

pub use error::{Error, Result};
pub use hypergraph::{verify_berge_path, verify_family, BergePath, Colour, Edge, Params, Vertex, VerifyReport};
pub use oracle::{make_random_oracle, ColouringOracle, ColouringSpec};
pub use partition::{cover_prefix, Certificate, CoverConfig};
