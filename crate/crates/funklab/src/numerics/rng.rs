//! Counter-based random number stream.
//!
//! Every sample is a pure hash of `(seed, stream, counter)`, so the
//! sequence is identical no matter how sample indices are partitioned
//! across threads or in what order they are drawn.

/// A keyed, counter-addressable random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    /// User-chosen base seed.
    pub seed: u64,
    /// Stream index separating independent substreams of one seed.
    pub stream: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

// SplitMix64 finalizer: a bijective avalanche on 64 bits.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    /// Creates the stream with the given seed and stream index.
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// The raw 64-bit word at a counter position.
    pub fn word_at(&self, counter: u64) -> u64 {
        let a = mix(self.seed.wrapping_add(GAMMA));
        let b = mix(a ^ self.stream.wrapping_mul(GAMMA).wrapping_add(1));
        mix(b ^ counter.wrapping_mul(GAMMA).wrapping_add(2))
    }

    /// Uniform double in [0, 1) at a counter position.
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.word_at(counter) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// A pair of independent uniforms at one counter position.
    pub fn uniform_pair_at(&self, counter: u64) -> (f64, f64) {
        (self.uniform_at(2 * counter), self.uniform_at(2 * counter + 1))
    }

    /// Standard normal deviate at a counter position (Box-Muller).
    pub fn normal_at(&self, counter: u64) -> f64 {
        let (u1, u2) = self.uniform_pair_at(counter);
        let u1 = if u1 > 0.0 { u1 } else { f64::EPSILON };
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Generalized Gaussian deviate with density proportional to
    /// `exp(-|t|^p)`, `p >= 1`, at a counter position.
    ///
    /// Uses Marsaglia-Tsang Gamma(1/p + 1) sampling with a uniform
    /// boost and a signed power transform. Each counter consumes a
    /// private block of 1024 word positions, so callers should keep
    /// these draws on their own stream index.
    pub fn gen_gaussian_at(&self, counter: u64, p: f64) -> f64 {
        let shape = 1.0 / p;
        let d = (shape + 1.0) - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        let block = counter.wrapping_mul(1024);
        let mut g = d; // fallback; rejection virtually always ends early
        for attempt in 0..64_u64 {
            let idx = block + 8 * attempt;
            let u1 = self.uniform_at(idx).max(f64::EPSILON);
            let u2 = self.uniform_at(idx + 1);
            let x = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v3 = v * v * v;
            let u = self.uniform_at(idx + 2).max(f64::EPSILON);
            if u.ln() < 0.5 * x * x + d - d * v3 + d * v3.ln() {
                g = d * v3;
                break;
            }
        }
        let ub = self.uniform_at(block + 520).max(f64::EPSILON);
        let gamma_shape = g * ub.powf(1.0 / shape);
        let sign = if self.word_at(block + 521) & 1 == 0 { 1.0 } else { -1.0 };
        sign * gamma_shape.powf(shape)
    }
}
