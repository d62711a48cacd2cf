//! Decay fits, closed-form exponents, Gagliardo–Nirenberg checks and
//! parameter scans.

pub mod exponents;
mod fit;
pub mod gn;
pub mod scan;
mod series;

pub use exponents::{admissible_range, ell, exponent_catalog, p_crit, theta_gn, ExponentReport};
pub use fit::{fit_decay, DecayFit, DecayModel};
pub use gn::{gn_ratio, gn_verify, GnReport, GnSpec};
pub use scan::{run_scan, CellResult, Outcome, ScanConfig, ScanResult};
pub use series::{lm_name, NormSeries, Track};
