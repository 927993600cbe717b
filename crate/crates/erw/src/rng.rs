//! Per-replication random streams.
//!
//! Replication `i` of an experiment seeded with `master` draws from ChaCha8
//! keyed by `master` on stream `i`. Streams never overlap, and a
//! replication's numbers do not depend on how work is split across
//! threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn replication_rng(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}
