//! Global limits.

/// Hard upper bound on `n`: adjacency rows are single `u64` words.
pub const HARD_MAX_N: usize = 64;

/// Default bound on the number of group elements ever materialized.
pub const DEFAULT_ORDER_CAP: usize = 500_000;

/// Environment variable that lowers the working bound on `n`.
pub const MAX_N_ENV: &str = "CIRC_MAX_N";

/// The working bound on `n`: `CIRC_MAX_N` if set and valid, clamped to
/// [`HARD_MAX_N`].
pub fn max_n() -> usize {
    match std::env::var(MAX_N_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => k.min(HARD_MAX_N),
            _ => {
                log::warn!("ignoring malformed {MAX_N_ENV}={v:?}");
                HARD_MAX_N
            }
        },
        Err(_) => HARD_MAX_N,
    }
}
