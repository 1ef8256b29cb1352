//! Numerical tolerances shared by every predicate in the crate.

/// Relative tolerance for norm equalities.
pub const TAU_EQ: f64 = 1e-9;
/// Argument tolerance for one-dimensional convex minimization.
pub const TAU_OPT: f64 = 1e-10;
/// Probe step for strong Birkhoff-James orthogonality, relative to `‖x‖/‖y‖`.
pub const TAU_PROBE: f64 = 1e-6;
/// Relative gap below the top singular value that still counts as attaining.
pub const TAU_GAP: f64 = 1e-8;
/// Radius under which two refined maximizers are merged.
pub const TAU_DEDUP: f64 = 1e-5;
/// Default number of sphere samples for two-dimensional domains.
pub const DEFAULT_RESOLUTION: usize = 4096;

/// `a == b` up to `TAU_EQ`, relative to the larger magnitude (floored at 1).
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TAU_EQ * a.abs().max(b.abs()).max(1.0)
}

/// `a >= b` up to `TAU_EQ`.
pub fn approx_ge(a: f64, b: f64) -> bool {
    a >= b - TAU_EQ * a.abs().max(b.abs()).max(1.0)
}
