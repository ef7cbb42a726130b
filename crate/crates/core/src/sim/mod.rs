//! Desk-scale simulation of the quantize, reconcile and hash scheme.

pub mod bounds;
pub mod codebook;
pub mod discrete;
pub mod hash;
pub mod protocol;
pub mod quantize;

pub use bounds::{achievable_rate_bound, error_bound, ErrorBound, ErrorBoundInput, RateBound};
pub use codebook::{wz_decode, wz_encode, Codebook, TypicalityRule, TypicalityTable};
pub use discrete::{discretize_gaussian, sample_quantized, DiscreteSource, GaussianModel, QuantizerBank};
pub use hash::toeplitz_hash;
pub use protocol::{run_protocol, Auxiliary, LeakageMode, MetricsReport, ProtocolConfig, ProtocolSetup};
pub use quantize::{build_quantizer, Quantizer};
