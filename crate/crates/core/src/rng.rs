//! Named, index-addressed random streams.
//!
//! Every random draw in the toolkit comes from a stream derived from one master
//! seed plus a component name and a list of indices (image, epoch, ...). Two
//! components never share a stream, so changing how many numbers one of them
//! consumes leaves the others untouched, and per-image streams make parallel
//! and serial execution identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const POLICY: &str = "policy";
pub const INIT: &str = "init";
pub const SHUFFLE: &str = "shuffle";
pub const DROPOUT: &str = "dropout";
pub const SPLIT: &str = "split";
pub const DATA: &str = "data";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives the 64-bit seed of a named sub-stream.
pub fn derive_seed(master: u64, name: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(fnv1a(name)));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn stream(master: u64, name: &str, indices: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, name, indices))
}
