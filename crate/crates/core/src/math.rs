//! Log-domain and reduction helpers shared by the density models and the EM.

/// `ln(Σ exp(x_i))` with max-shift. Terms whose shifted exponent falls below
/// `floor` are dropped; pass `0.0` to keep every term.
pub fn log_sum_exp_floored(values: &[f64], floor: f64) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    for &v in values {
        let e = (v - max).exp();
        if e >= floor {
            acc += e;
        }
    }
    max + acc.ln()
}

#[inline]
pub fn log_sum_exp(values: &[f64]) -> f64 {
    log_sum_exp_floored(values, 0.0)
}

/// `ln(x)` with `ln(0) = -inf`, used for probability masses that may be
/// structurally zero.
#[inline]
pub fn ln_mass(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `p * ln(q)` with the convention `0 * ln(0) = 0`.
#[inline]
pub fn xlogy(p: f64, log_q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * log_q
    }
}

/// Fixed-order pairwise summation. The split points depend only on the
/// length, so the result is reproducible regardless of how the inputs were
/// produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        let mut s = 0.0;
        for &v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`, without materializing when small.
pub fn pairwise_sum_by(n: usize, f: impl Fn(usize) -> f64 + Copy) -> f64 {
    fn rec(lo: usize, hi: usize, f: impl Fn(usize) -> f64 + Copy) -> f64 {
        if hi - lo <= 8 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Derives an independent seed for sub-stream `stream` of `base`
/// (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
