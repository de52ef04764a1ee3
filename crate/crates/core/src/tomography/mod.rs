//! State and process tomography from single-scan spectra.

pub mod aaqst;
pub mod counts;
pub mod process;

pub use aaqst::{acquire, build_plan, reconstruct, Reconstruction, TomographyPlan};
pub use counts::{count_table, min_experiments, CountRow};
pub use process::{beta_tensor, process_fidelity, sspt, ChiMatrix, ProcessMap, SsptConfig, SsptRun};
