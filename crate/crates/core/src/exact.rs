//! Exact evaluation of `d > n·√D` for integer `d`, `D` and a finite `n > 0`.
//!
//! `n` is a dyadic rational `m·2^e`, so after squaring both sides the test
//! is an integer comparison `d²·2^(-2e) > m²·D`, done here in 256 bits.

use core::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct U256 {
    hi: u128,
    lo: u128,
}

impl U256 {
    const ZERO: U256 = U256 { hi: 0, lo: 0 };

    fn mul(a: u128, b: u128) -> U256 {
        const MASK: u128 = u64::MAX as u128;
        let (a0, a1) = (a & MASK, a >> 64);
        let (b0, b1) = (b & MASK, b >> 64);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
        let lo = (p00 & MASK) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        U256 { hi, lo }
    }

    fn bits(self) -> u32 {
        if self.hi != 0 {
            256 - self.hi.leading_zeros()
        } else {
            128 - self.lo.leading_zeros()
        }
    }

    /// `None` on overflow.
    fn shl(self, s: u32) -> Option<U256> {
        if self == U256::ZERO {
            return Some(self);
        }
        if self.bits() + s > 256 {
            return None;
        }
        Some(match s {
            0 => self,
            1..=127 => U256 {
                hi: (self.hi << s) | (self.lo >> (128 - s)),
                lo: self.lo << s,
            },
            _ => U256 {
                hi: self.lo << (s - 128),
                lo: 0,
            },
        })
    }

    fn cmp(&self, other: &U256) -> Ordering {
        (self.hi, self.lo).cmp(&(other.hi, other.lo))
    }
}

/// Ordering of `a·2^s` against `b`.
fn cmp_shifted(a: U256, s: u64, b: U256) -> Ordering {
    match u32::try_from(s).ok().and_then(|s| a.shl(s)) {
        Some(x) => x.cmp(&b),
        // a ≠ 0 here, and a·2^s ≥ 2^256 > b
        None => Ordering::Greater,
    }
}

/// `x = m·2^e` with `m` odd, for finite `x > 0`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i64;
    (m, e)
}

/// `d > n·√big_d`, exactly. Requires finite `n > 0`.
pub(crate) fn exceeds(d: i128, big_d: u128, n: f64) -> bool {
    debug_assert!(n.is_finite() && n > 0.0);
    if d <= 0 {
        return false;
    }
    if big_d == 0 {
        return true;
    }
    let (m, e) = decompose(n);
    let d = d as u128;
    let lhs = U256::mul(d, d);
    let m2 = (m as u128) * (m as u128);
    let rhs = U256::mul(m2, big_d);
    if e >= 0 {
        // lhs > rhs·2^(2e)
        cmp_shifted(rhs, 2 * e as u64, lhs) == Ordering::Less
    } else {
        cmp_shifted(lhs, (-2 * e) as u64, rhs) == Ordering::Greater
    }
}
