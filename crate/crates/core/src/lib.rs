//! Normal approximation of triangle counts in Erdős–Rényi graphs.
//!
//! The crate bundles the pieces needed to study how fast the standardized
//! triangle count of `G(n, p)` approaches the standard normal law in the
//! Kolmogorov metric:
//!
//! * [`graph`]: bitset graphs, triangle counts, centred indicators and local sums.
//! * [`sampler`]: counter-based reproducible `G(n, p)` and proxy-model sampling.
//! * [`moments`]: exact moments, regime rates and the proxy model's closed forms.
//! * [`special`], [`bounds`]: Dawson's function, quadrature and bound evaluators.
//! * [`cstats`]: complex variance and covariance on finite probability spaces.
//! * [`oracle`]: exhaustive enumeration of all graphs on up to seven vertices.
//! * [`coupling`]: the Stein coupling, its extension and Monte Carlo r-term estimates.
//! * [`patterns`]: four-triangle overlap patterns and their moment/covariance checks.
//! * [`experiment`]: empirical Kolmogorov distances, rate fits and result records.

pub mod bounds;
pub mod coupling;
pub mod cstats;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod moments;
pub mod oracle;
pub mod patterns;
pub mod sampler;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{EdgeId, Graph, TripleId};
pub use sampler::{sample_gnp, sample_proxy, ProxyVariant, SamplerConfig};
