use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded deterministic random source.
///
/// Backed by ChaCha8, a counter-based generator, so independent streams can be
/// derived from `(seed, domain, index)` without touching the parent state.
/// Draw sequences are identical on every platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_for(seed: u64, domain: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(domain.wrapping_add(0x5851_F42D_4C95_7F2D));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::from_seed(key_for(seed, 0)),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for `(domain, index)` under this source's seed.
    /// The result does not depend on how many draws were made from `self`.
    pub fn fork(&self, domain: u64, index: u64) -> RandomSource {
        let mut inner = ChaCha8Rng::from_seed(key_for(self.seed, domain.wrapping_add(1)));
        inner.set_stream(index);
        RandomSource {
            seed: self.seed,
            inner,
        }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
