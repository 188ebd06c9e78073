//! Seed derivation and deterministic parallelism.
//!
//! Every stochastic operation in this crate takes a `u64` seed and expands it
//! into a [`ChaCha8Rng`] stream. Sub-tasks (episodes, transitions, stages)
//! derive their own seeds from a parent seed plus a tag, so results do not
//! depend on execution order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over a byte slice. Stable across platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `(root, tag)`.
pub fn derive_seed(root: u64, tag: &str) -> u64 {
    splitmix64(root ^ fnv1a64(tag.as_bytes()))
}

/// Derives a child seed from `(root, tag, index)`; used for per-episode and
/// per-transition streams.
pub fn derive_indexed(root: u64, tag: &str, index: u64) -> u64 {
    splitmix64(derive_seed(root, tag) ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Applies `f` to every index in `0..n`, splitting the range over `workers`
/// scoped threads. `f` must be a pure function of its index; results are
/// written by index, so the output is identical for any worker count.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1);
    if workers == 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(workers);
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (c, part) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = c * chunk;
                for (off, slot) in part.iter_mut().enumerate() {
                    *slot = Some(f(base + off));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}
