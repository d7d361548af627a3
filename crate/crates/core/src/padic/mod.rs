//! Exact and capped-precision p-adic arithmetic.

pub mod capped;
pub mod logcmp;
pub mod newton;
pub mod poly;
pub mod rational;

pub use capped::{precision_cap, with_precision, CappedPadic, DEFAULT_PRECISION};
pub use logcmp::{log_rational, vp_compare_log_threshold, LogExpr};
pub use newton::{hensel_root, hensel_root_exact, newton_polygon, NewtonPolygon, Segment};
pub use poly::{poly_slope, Poly, Valued};
pub use rational::{q, qf, vp, ExtQ, Q};
