//! Seeded, platform-independent randomness.
//!
//! Everything random in this crate draws from ChaCha8 streams derived from a
//! user-supplied 64-bit seed. One operation = one root stream; where an
//! operation has independently drawable parts (block pairs in the SBM
//! generator, restarts in the decomposition search), each part gets its own
//! child stream addressed by `(domain, index)`. Results are therefore
//! identical no matter how the parts are scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// Stream-id namespaces, one per independently parallelizable draw site.
#[derive(Debug, Clone, Copy)]
pub enum StreamDomain {
    /// Whole-operation sequential stream.
    Root = 0,
    /// One stream per unordered block pair of an SBM draw.
    SbmBlockPair = 1,
    /// One stream per restart of the decomposition search.
    Restart = 2,
    /// Reference/target sampling.
    Sampling = 3,
}

/// Root stream for a sequential operation.
pub fn root_rng(seed: u64) -> ChaCha8Rng {
    child_rng(seed, StreamDomain::Root, 0)
}

/// Child stream `index` within `domain`, derived from `seed`.
///
/// The stream id packs the domain tag into the top byte, so indices up to
/// 2^56 - 1 never collide across domains.
pub fn child_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 56));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
