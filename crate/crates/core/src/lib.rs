//! Fast exponential and normal variates from a modified ziggurat whose layers
//! sit entirely beneath the density.
//!
//! Most draws cost one 64-bit word, one compare, one table load and one
//! multiply. The few that land outside the layers pick an overhang slot from
//! an alias table and finish with a short rejection step.
//!
//! ```
//! use zigfast::{ExpSampler, NormalSampler};
//!
//! let mut exp = ExpSampler::from_seed(7);
//! let mut normal = NormalSampler::from_seed(7);
//! let x = exp.sample();
//! let z = normal.sample();
//! assert!(x >= 0.0 && z.is_finite());
//! ```

pub mod alias;
pub mod bench;
pub mod density;
pub mod error;
pub mod exp;
pub mod format;
pub mod normal;
pub mod numeric;
pub mod pathstats;
pub mod quality;
pub mod sampler;
pub mod stats;
pub mod tables;
pub mod traditional;
pub mod uniform;
pub mod ziggurat;

pub use alias::AliasTable;
pub use density::{Density, DensityKind};
pub use error::{AliasError, FormatError, SamplerError, SourceError, TableError};
pub use exp::ExpSampler;
pub use normal::NormalSampler;
pub use quality::QualityReport;
pub use sampler::{Algorithm, Distribution, Generator, SamplerPair};
pub use tables::{solve_layers, ZigguratTables};
pub use uniform::{UniformSource, Xoshiro256pp};
pub use ziggurat::{PathCounts, Ziggurat};
