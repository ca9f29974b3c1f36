//! Reproducible per-replica random streams.
//!
//! Every replica `i` of an experiment seeded with `s` draws from ChaCha8
//! keyed by `s` on stream `i`. Streams never overlap, so results depend only
//! on `(seed, replica)` and not on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type ReplicaRng = ChaCha8Rng;

/// The random stream owned by `replica` under `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Runs `f` once per replica in parallel and returns results in replica order.
pub fn replicate<T, F>(seed: u64, replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ReplicaRng, u64) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| f(&mut replica_rng(seed, i), i))
        .collect()
}
