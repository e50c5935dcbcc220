pub mod io;
pub mod mechkin;
pub mod metrics;
pub mod optimizer;
pub mod ranking;
pub mod reparam;
