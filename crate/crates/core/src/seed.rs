//! Seed derivation. Every table, query and shot draws from its own generator
//! derived from `(master_seed, stream, index)`, so datasets are reproducible
//! regardless of generation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type GenRng = ChaCha8Rng;

pub const STREAM_TABLE: u64 = 0x7461_626c_6573;
pub const STREAM_QUERY: u64 = 0x7175_6572_7973;
pub const STREAM_SHOTS: u64 = 0x7368_6f74_7300;
pub const STREAM_PLACEMENT: u64 = 0x706c_6163_6500;
pub const STREAM_UNSEEN_TABLE: u64 = 0x756e_7365_656e;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(master ^ mix64(stream)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}
