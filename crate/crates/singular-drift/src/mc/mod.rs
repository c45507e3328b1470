//! Monte Carlo machinery for the singular-drift diffusion: a shared
//! Euler–Maruyama engine with origin-aware adaptive stepping, estimators
//! for survival and exit probabilities (direct, Feynman–Kac weighted, and
//! tilted/importance-sampled), an ordered coupling for drift comparisons,
//! and the tail-exponent fitter consuming survival curves.
//!
//! Reproducibility contract: every path owns a counter-based RNG stream
//! (`ChaCha8Rng::seed_from_u64(seed)` + `set_stream(path_index)`), paths
//! are simulated in parallel with rayon but collected in index order, and
//! all statistics are reduced sequentially afterwards. Estimates are
//! therefore bit-identical across worker counts and across reruns with
//! the same seed.

pub mod coupling;
pub mod engine;
pub mod estimators;
pub mod tailfit;
pub mod tilt;

pub use coupling::{coupled_compare, CoupleReport, ORDERING_TOL};
pub use engine::{run_paths, simulate_path, PathRecord, SimConfig, DRIFT_CAP_SIGMAS, DT_SCALE};
pub use estimators::{fk_survival, survival_probability, two_sided_exit_mc, Estimate};
pub use tailfit::{fit_tail_exponent, TailFit};
pub use tilt::tilted_survival;
