//! Scalar fields for the linear-algebra layer: an exact prime field used for
//! all rank/decode claims, and `f64` for conditioning diagnostics.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rand::Rng;

/// Field element required by [`crate::linalg::Matrix`].
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Multiplicative inverse; `None` for zero.
    fn inv(self) -> Option<Self>;
    /// Draw an element "in general position" (uniform for finite fields,
    /// standard normal for reals).
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

/// Modulus of [`Fp`]: the Mersenne prime 2^31 - 1.
pub const MODULUS: u64 = 2_147_483_647;

/// Element of the prime field F_p with p = 2^31 - 1.
///
/// The Mersenne structure lets products be reduced with two shift-adds
/// instead of a division, which matters in the big rank sweeps.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp(u32);

#[inline(always)]
fn reduce(x: u64) -> u32 {
    // x < 2^62; fold the high bits down twice, then one conditional subtract.
    let x = (x & MODULUS) + (x >> 31);
    let x = (x & MODULUS) + (x >> 31);
    if x >= MODULUS {
        (x - MODULUS) as u32
    } else {
        x as u32
    }
}

impl Fp {
    pub fn new(value: u64) -> Self {
        Fp((value % MODULUS) as u32)
    }

    pub fn value(self) -> u64 {
        self.0 as u64
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline(always)]
    fn add(self, rhs: Fp) -> Fp {
        let s = self.0 as u64 + rhs.0 as u64;
        Fp(if s >= MODULUS { (s - MODULUS) as u32 } else { s as u32 })
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline(always)]
    fn sub(self, rhs: Fp) -> Fp {
        let s = self.0 as u64 + MODULUS - rhs.0 as u64;
        Fp(if s >= MODULUS { (s - MODULUS) as u32 } else { s as u32 })
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline(always)]
    fn mul(self, rhs: Fp) -> Fp {
        Fp(reduce(self.0 as u64 * rhs.0 as u64))
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline(always)]
    fn neg(self) -> Fp {
        Fp::zero() - self
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp(1)
    }
}

impl Scalar for Fp {
    fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            // Fermat: a^(p-2) = a^-1.
            Some(self.pow(MODULUS - 2))
        }
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fp(rng.random_range(0..MODULUS) as u32)
    }
}

impl Scalar for f64 {
    fn inv(self) -> Option<Self> {
        if self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(rand_distr::StandardNormal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_axioms_spot_checks() {
        let a = Fp::new(123_456_789);
        let b = Fp::new(987_654_321);
        let c = Fp::new(5_555_555_555); // exercises the % in new()
        assert_eq!(a + b, b + a);
        assert_eq!((a + b) + c, a + (b + c));
        assert_eq!(a * (b + c), a * b + a * c);
        assert_eq!(a - a, Fp::zero());
        assert_eq!(a + (-a), Fp::zero());
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = Fp::sample(&mut rng);
            if a.is_zero() {
                continue;
            }
            assert_eq!(a * a.inv().unwrap(), Fp::one());
        }
        assert!(Fp::zero().inv().is_none());
    }

    #[test]
    fn reduction_edge_cases() {
        let pm1 = Fp::new(MODULUS - 1);
        assert_eq!(pm1 * pm1, Fp::one()); // (p-1)^2 = 1 mod p
        assert_eq!(Fp::new(MODULUS), Fp::zero());
        assert_eq!(pm1 + Fp::one(), Fp::zero());
    }
}
