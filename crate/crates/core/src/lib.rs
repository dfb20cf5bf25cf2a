//! Coded elastic computing for distributed matrix multiplication.
//!
//! Three schemes are modelled side by side:
//!
//! * **CEC**: one `(K, N_max)` polynomial code per worker task; with `N`
//!   workers each task is cut into `N` subtasks and every worker runs `S` of
//!   them, chosen cyclically.
//! * **MLCEC**: same codes, but set `m` is chosen by `d_m` workers with
//!   `d_1 <= ... <= d_N`, so later sets get more helpers.
//! * **BICEC**: one `(K, S * N_max)` code over fine-grained subtasks; workers
//!   simply run their `S` subtasks in order until `K` are done overall.
//!
//! [`codec`] holds the codes, [`allocation`] the task selection,
//! [`simkernel`] the timing model, [`verify`] the functional pipeline and
//! [`harness`] the experiment driver.

pub mod allocation;
pub mod codec;
pub mod error;
pub mod field;
pub mod harness;
pub mod matrix;
pub mod simkernel;
pub mod verify;

pub use allocation::{AllocationMatrix, DSequence, Scheme, SchemeParams};
pub use codec::{EncodedBlock, MatrixDims, MdsCode, Partition};
pub use error::{Error, Result};
pub use field::{Field, PrimeField, Real};
pub use matrix::Matrix;
pub use simkernel::{ElasticTimeline, TrialMetrics, WorkerProfile};
pub use verify::CompletionRecord;
