//! Desk-scale execution of the key-agreement protocol: channel sampling,
//! reliability exchange and distillation, bin-coding reconciliation,
//! Toeplitz privacy amplification, and exact small-n security checks.

pub mod binning;
pub mod channel;
pub mod distill;
pub mod protocol;
pub mod reconcile;
pub mod rng;
pub mod security;
pub mod toeplitz;

pub use binning::{bin_encode, decode_in_bin, Decoder, SideInfo, SwCode, MAX_DECODE_LEN};
pub use channel::{sample_round, Round};
pub use distill::{distill, Distilled};
pub use protocol::{run_protocol, KeyOutcome, ProtocolConfig, ProtocolSetup, Transcript};
pub use reconcile::{reconciliation_error_rate, ReconcileConfig, ReconcileStats};
pub use rng::run_seed;
pub use security::{entropy_security_floor, estimate_security, SecurityConfig, SecurityEstimate};
pub use toeplitz::{toeplitz_hash, ToeplitzHash};
