//! Deterministic random number generation.
//!
//! A single fixed 64-bit generator (SplitMix64) drives all randomness so that
//! runs are reproducible from a master seed. Substreams (per path, per block)
//! are derived by mixing the master seed with the substream index, which keeps
//! parallel workers independent of scheduling order.

/// SplitMix64 generator (Steele, Lea, Flood 2014). Full 64-bit state, 2^64
/// period, passes BigCrush; more than adequate for Monte Carlo sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Substream generator for `(seed, index)`, e.g. one stream per path.
    ///
    /// Both inputs are spread across all 64 bits before combining: with a
    /// plain `seed ^ index` the set {seed ^ i : i < n} is the same set of
    /// integers for any small seed, which would make ensemble statistics
    /// seed-invariant.
    pub fn substream(seed: u64, index: u64) -> Self {
        let spread_index = index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self::new(mix(mix(seed) ^ spread_index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in the open interval (0, 1): 53-bit mantissa, offset half an ulp
    /// so that 0 is never returned (the normal inverse CDF needs u > 0).
    pub fn next_open01(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_open01()
    }

    /// Log-uniform in [lo, hi); both bounds must be positive.
    pub fn next_log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && hi > lo);
        (self.next_range(lo.ln(), hi.ln())).exp()
    }

    /// Uniform integer in [0, n) via 128-bit widening multiply.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via inverse CDF.
    pub fn next_standard_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_open01())
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}

/// One round of the SplitMix64 output function; used to derive substream seeds.
pub fn mix(seed: u64) -> u64 {
    SplitMix64::new(seed).next_u64()
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error < 1.15e-9 over the full
/// domain), chosen over pair-generating methods so that one uniform maps to
/// one normal deterministically.
#[allow(clippy::excessive_precision)] // published coefficient table
pub fn inverse_normal_cdf(u: f64) -> f64 {
    assert!(u > 0.0 && u < 1.0, "inverse_normal_cdf domain is (0,1)");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const U_LOW: f64 = 0.02425;

    if u < U_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - U_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
