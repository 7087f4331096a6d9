//! Small shared utilities: deterministic RNG, log-domain arithmetic helpers,
//! least-squares fitting and an order-preserving parallel map.

use rayon::prelude::*;

/// SplitMix64: tiny deterministic generator used for reproducible test and
/// sampling streams. Identical output on every platform for a given seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn next_range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }
}

/// FNV-1a 64-bit hash, rendered as hex. Used to stamp artifacts with a
/// cheap content fingerprint.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// log(e^a + e^b) computed without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Signed log-domain value: `sign * e^ln_abs` with sign in {-1, 0, 1}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

#[allow(clippy::should_implement_trait)]
impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    /// Signed addition in log domain. Cancellation of nearly equal terms
    /// loses relative precision, as with ordinary floating point.
    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return SignedLog::new(self.sign, log_add_exp(self.ln_abs, other.ln_abs));
        }
        // opposite signs: subtract magnitudes
        if self.ln_abs == other.ln_abs {
            return SignedLog::ZERO;
        }
        let (big, small) = if self.ln_abs > other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let diff = big.ln_abs + (-(small.ln_abs - big.ln_abs).exp()).ln_1p();
        SignedLog::new(big.sign, diff)
    }
}

/// Ordinary least squares fit of y against x. Returns (slope, intercept,
/// residual RMS).
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Map `f` over `items` on `threads` workers, preserving input order.
/// The output is identical to the sequential map for any thread count.
pub fn par_map_ordered<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    if threads <= 1 || items.len() < 2 {
        return items.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| items.into_par_iter().map(f).collect())
}

/// Format a float with 12 significant digits in scientific notation
/// ('.' decimal separator, locale independent).
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn signed_log_roundtrip() {
        for &x in &[3.5, -2.0, 0.0, 1e-200, -1e200] {
            let s = SignedLog::from_f64(x);
            let back = s.to_f64();
            if x == 0.0 {
                assert_eq!(back, 0.0);
            } else {
                assert!((back - x).abs() <= 1e-12 * x.abs());
            }
        }
        let a = SignedLog::from_f64(5.0);
        let b = SignedLog::from_f64(-3.0);
        assert!((a.add(b).to_f64() - 2.0).abs() < 1e-12);
        assert!((a.mul(b).to_f64() + 15.0).abs() < 1e-12);
    }

    #[test]
    fn ols_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (m, b, r) = ols_fit(&xs, &ys);
        assert!((m - 2.5).abs() < 1e-12);
        assert!((b + 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn par_map_matches_sequential() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = par_map_ordered(items.clone(), 1, |x| x * x % 97);
        let par = par_map_ordered(items, 8, |x| x * x % 97);
        assert_eq!(seq, par);
    }
}
