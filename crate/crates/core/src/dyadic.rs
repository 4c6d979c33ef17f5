//! Exact dyadic rationals `n / 2^k`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A dyadic rational stored as `num / 2^exp` in lowest terms: either
/// `exp == 0`, or `num` is odd.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: BigInt::from(n), exp: 0 }
    }

    /// Builds `num / 2^exp` and reduces it.
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    /// Converts `p/q`; fails unless `q` is (up to sign) a power of two.
    pub fn from_ratio(p: BigInt, q: BigInt) -> Option<Self> {
        if q.is_zero() {
            return None;
        }
        let (p, q) = if q.is_negative() { (-p, -q) } else { (p, q) };
        let g = p.gcd(&q);
        let (p, q) = if g.is_zero() { (p, q) } else { (p / &g, q / &g) };
        let exp = power_of_two_exponent(&q)?;
        Some(Dyadic::new(p, exp))
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && self.num.is_even() {
            self.num >>= 1;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// The `k` in the reduced denominator `2^k`.
    pub fn denominator_exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.exp == 0 {
            self.num.to_i64()
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    /// Multiplies by `2^k` for any integer `k`.
    pub fn shl(&self, k: i64) -> Self {
        if self.num.is_zero() {
            return Dyadic::zero();
        }
        if k >= 0 {
            let k = k as u64;
            if k >= self.exp as u64 {
                Dyadic { num: &self.num << (k - self.exp as u64), exp: 0 }
            } else {
                Dyadic { num: self.num.clone(), exp: self.exp - k as u32 }
            }
        } else {
            let exp = self.exp as i64 - k;
            Dyadic::new(self.num.clone(), u32::try_from(exp).expect("dyadic exponent overflow"))
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        Dyadic::new(a + b, exp)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

fn power_of_two_exponent(q: &BigInt) -> Option<u32> {
    if !q.is_positive() {
        return None;
    }
    let tz = q.trailing_zeros()?;
    if (q >> tz) == BigInt::one() {
        u32::try_from(tz).ok()
    } else {
        None
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: i64, q: i64) -> Dyadic {
        Dyadic::from_ratio(BigInt::from(p), BigInt::from(q)).unwrap()
    }

    #[test]
    fn reduces_to_lowest_terms() {
        let x = d(6, 8);
        assert_eq!(x.numerator(), &BigInt::from(3));
        assert_eq!(x.denominator_exponent(), 2);
        assert_eq!(d(4, 2), Dyadic::from_int(2));
        assert_eq!(d(0, 16), Dyadic::zero());
        assert_eq!(d(-3, -4), d(3, 4));
    }

    #[test]
    fn rejects_non_dyadic() {
        assert!(Dyadic::from_ratio(BigInt::from(1), BigInt::from(3)).is_none());
        assert!(Dyadic::from_ratio(BigInt::from(1), BigInt::from(0)).is_none());
    }

    #[test]
    fn shifting_and_adding() {
        assert_eq!(d(3, 4).shl(2), Dyadic::from_int(3));
        assert_eq!(Dyadic::from_int(3).shl(-3), d(3, 8));
        assert_eq!(Dyadic::from_int(-6).shl(-3), d(-3, 4));
        assert_eq!(Dyadic::from_int(-6).shl(-3).denominator_exponent(), 2);
        assert_eq!(d(1, 2).add(&d(1, 4)), d(3, 4));
        assert_eq!(d(1, 2).sub(&d(1, 2)), Dyadic::zero());
        assert!(d(1, 4) < d(1, 2));
        assert_eq!(d(-1, 2).to_string(), "-1/2");
    }
}
