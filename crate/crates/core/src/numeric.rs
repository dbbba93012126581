//! Shortest-path counts and dependency values in two numeric modes.
//!
//! Path counts can be exponential in `n`, so payloads carry them either as
//! exact big integers or as a fixed-width floating-point approximation whose
//! relative error per value is at most 2^-53. Dependency accumulators follow
//! the same mode so that float-mode message sizes stay bounded by a constant
//! multiple of the vertex-id width.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// How path counts (and the values derived from them) are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaMode {
    /// Arbitrary-precision integers; payload cost is the exact bit length.
    Exact,
    /// Sign/mantissa/exponent encoding with a fixed per-graph width.
    Float,
}

/// A shortest-path count in the active [`SigmaMode`].
#[derive(Clone, Debug, PartialEq)]
pub enum Sigma {
    Exact(BigUint),
    Float(f64),
}

impl Sigma {
    pub fn zero(mode: SigmaMode) -> Self {
        match mode {
            SigmaMode::Exact => Sigma::Exact(BigUint::zero()),
            SigmaMode::Float => Sigma::Float(0.0),
        }
    }

    pub fn one(mode: SigmaMode) -> Self {
        match mode {
            SigmaMode::Exact => Sigma::Exact(BigUint::one()),
            SigmaMode::Float => Sigma::Float(1.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Sigma::Exact(x) => x.is_zero(),
            Sigma::Float(x) => *x == 0.0,
        }
    }

    pub fn add_assign(&mut self, other: &Sigma) {
        match (self, other) {
            (Sigma::Exact(a), Sigma::Exact(b)) => *a += b,
            (Sigma::Float(a), Sigma::Float(b)) => *a += b,
            _ => panic!("mixed sigma modes in one run"),
        }
    }

    /// Transmitted size in bits for a graph on `n` vertices.
    ///
    /// Exact mode pays the true binary length (1 bit for σ = 1); float mode
    /// pays the fixed width [`float_sigma_bits`] regardless of magnitude.
    pub fn bits(&self, n: usize) -> u64 {
        match self {
            Sigma::Exact(x) => x.bits().max(1),
            Sigma::Float(_) => float_sigma_bits(n),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Sigma::Exact(x) => x.to_f64().unwrap_or(f64::INFINITY),
            Sigma::Float(x) => *x,
        }
    }

    /// Decimal rendering; exact values print in full.
    pub fn to_decimal_string(&self) -> String {
        match self {
            Sigma::Exact(x) => x.to_string(),
            Sigma::Float(x) => format!("{x}"),
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            Sigma::Exact(x) => Some(x),
            Sigma::Float(_) => None,
        }
    }
}

/// A dependency accumulator `δ` or an accumulation message `(1+δ)/σ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Dependency {
    Exact(BigRational),
    Float(f64),
}

impl Dependency {
    pub fn zero(mode: SigmaMode) -> Self {
        match mode {
            SigmaMode::Exact => Dependency::Exact(BigRational::zero()),
            SigmaMode::Float => Dependency::Float(0.0),
        }
    }

    /// The accumulation message `(1 + delta) / sigma`.
    pub fn accumulation_message(delta: &Dependency, sigma: &Sigma) -> Dependency {
        match (delta, sigma) {
            (Dependency::Exact(d), Sigma::Exact(s)) => {
                let s = BigRational::from_integer(BigInt::from(s.clone()));
                Dependency::Exact((BigRational::one() + d) / s)
            }
            (Dependency::Float(d), Sigma::Float(s)) => Dependency::Float((1.0 + d) / s),
            _ => panic!("mixed numeric modes in one run"),
        }
    }

    /// The receiver-side update `delta += sigma * message`.
    pub fn add_scaled(&mut self, sigma: &Sigma, message: &Dependency) {
        match (self, sigma, message) {
            (Dependency::Exact(d), Sigma::Exact(s), Dependency::Exact(m)) => {
                *d += BigRational::from_integer(BigInt::from(s.clone())) * m;
            }
            (Dependency::Float(d), Sigma::Float(s), Dependency::Float(m)) => *d += s * m,
            _ => panic!("mixed numeric modes in one run"),
        }
    }

    pub fn add(&mut self, other: &Dependency) {
        match (self, other) {
            (Dependency::Exact(a), Dependency::Exact(b)) => *a += b,
            (Dependency::Float(a), Dependency::Float(b)) => *a += b,
            _ => panic!("mixed numeric modes in one run"),
        }
    }

    /// Transmitted size in bits. Exact rationals pay sign plus both magnitude
    /// lengths; floats pay the same fixed width as float path counts.
    pub fn bits(&self, n: usize) -> u64 {
        match self {
            Dependency::Exact(q) => {
                1 + q.numer().abs().to_biguint().map_or(1, |x| x.bits().max(1))
                    + q.denom().abs().to_biguint().map_or(1, |x| x.bits().max(1))
            }
            Dependency::Float(_) => float_sigma_bits(n),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Dependency::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Dependency::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Dependency::Exact(q) => Some(q),
            Dependency::Float(_) => None,
        }
    }
}

/// `ceil(log2(x))` for `x >= 1`; `ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u64 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros() as u64
}

/// Bits needed to name one vertex among `n`.
pub fn id_bits(n: usize) -> u64 {
    ceil_log2(n as u64).max(1)
}

/// Bits for a distance value, `ceil(log2(n * wmax + 1))`.
pub fn dist_bits(n: usize, wmax: u64) -> u64 {
    ceil_log2(n as u64 * wmax + 1).max(1)
}

/// Fixed width of a float-mode path count: sign, a 53-bit significand
/// (half-ulp relative error at most 2^-53), and an exponent field wide enough
/// for counts up to 2^n, rounded up to a whole number of id widths.
pub fn float_sigma_bits(n: usize) -> u64 {
    let raw = 1 + 53 + ceil_log2(n as u64 + 1);
    let unit = id_bits(n);
    raw.div_ceil(unit) * unit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn sigma_bit_lengths() {
        let one = Sigma::Exact(BigUint::one());
        assert_eq!(one.bits(8), 1);
        let big = Sigma::Exact(BigUint::one() << 100);
        assert_eq!(big.bits(8), 101);
        let f = Sigma::Float(2f64.powi(100));
        assert_eq!(f.bits(8), float_sigma_bits(8));
    }

    #[test]
    fn float_width_is_fixed_and_aligned() {
        for n in [2usize, 4, 8, 40, 1000] {
            let w = float_sigma_bits(n);
            assert_eq!(w % id_bits(n), 0);
            assert!(w >= 54);
        }
    }

    #[test]
    fn accumulation_arithmetic_exact() {
        // delta = 0, sigma = 2 -> message 1/2; receiver with sigma = 1 adds 1/2.
        let mut delta = Dependency::zero(SigmaMode::Exact);
        let msg = Dependency::accumulation_message(&delta, &Sigma::Exact(BigUint::from(2u32)));
        delta.add_scaled(&Sigma::Exact(BigUint::one()), &msg);
        assert_eq!(
            delta.as_exact().unwrap(),
            &BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }
}
