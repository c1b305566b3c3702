//! Seed streams.
//!
//! Every random draw in the pipeline comes from a ChaCha8 stream keyed by a
//! 64-bit seed. Child seeds are derived with SplitMix64 so that independent
//! purposes (topology, scenario, observers, ...) never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` for a named purpose and an index.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(parent);
    for b in tag.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// Exponential variate with the given mean, by inversion.
pub fn sample_exp<R: rand::Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    // random::<f64>() is in [0, 1), so 1 - u is in (0, 1]
    let u: f64 = rng.random();
    -mean * libm::log(1.0 - u)
}
