//! Counter-based random streams.
//!
//! Every path gets its own ChaCha8 stream keyed by the master seed and
//! addressed by `(batch, path index)`, so a path's draws do not depend on how
//! paths are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Batch tag for the paths started at the threshold.
pub const BATCH_AT_THRESHOLD: u64 = 0;
/// Batch tag for the independent paths started above the threshold.
pub const BATCH_ABOVE_THRESHOLD: u64 = 1;
/// Batch tag for uncontrolled paths run to the trapping time.
pub const BATCH_TRAPPING: u64 = 2;

const PATH_BITS: u32 = 48;

pub fn path_rng(master_seed: u64, batch: u64, path: u64) -> ChaCha8Rng {
    debug_assert!(path < 1 << PATH_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((batch << PATH_BITS) | path);
    rng
}

/// Uniform variate in the open interval (0, 1).
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
