//! Reproducible random streams keyed by `(master_seed, experiment, trajectory)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub experiment: u64,
    pub trajectory: u64,
    sub: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit id for a string label (FNV-1a).
pub fn label_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(master_seed: u64, experiment: u64, trajectory: u64) -> Self {
        Self { master_seed, experiment, trajectory, sub: 0 }
    }

    /// Same lane for a different trajectory index.
    pub fn with_trajectory(&self, trajectory: u64) -> Self {
        Self { trajectory, ..*self }
    }

    /// An independent child stream of the same lane.
    pub fn sub(&self, k: u64) -> Self {
        Self { sub: splitmix64(self.sub ^ splitmix64(k.wrapping_add(1))), ..*self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut state = splitmix64(self.master_seed);
        state = splitmix64(state ^ self.experiment);
        state = splitmix64(state ^ self.sub);
        for chunk in seed.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.trajectory);
        rng
    }
}
