//! Exact arithmetic in the cyclotomic field `Q(zeta_p)` for a prime `p`.
//!
//! Elements are stored on the power basis `zeta^0, ..., zeta^(p-2)`; the
//! relation `zeta^(p-1) = -(1 + zeta + ... + zeta^(p-2))` keeps every value in
//! canonical form, so equality is coefficient-wise.  Coefficients are
//! `num::BigRational`, hence all identities checked with these numbers are
//! exact.

use num::traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = num::BigRational;

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// An element of `Q(zeta_p)` in reduced basis form.
#[derive(Clone, PartialEq, Eq)]
pub struct CycNum {
    p: u32,
    /// Coefficients of `zeta^0 .. zeta^(p-2)`; always length `p-1`.
    c: Vec<Rational>,
}

impl CycNum {
    pub fn zero(p: u32) -> Self {
        assert!(p >= 2, "p must be a prime >= 2");
        CycNum {
            p,
            c: vec![Rational::zero(); (p - 1) as usize],
        }
    }

    pub fn one(p: u32) -> Self {
        Self::from_int(p, 1)
    }

    pub fn from_int(p: u32, n: i64) -> Self {
        let mut z = Self::zero(p);
        z.c[0] = rat(n);
        z
    }

    pub fn from_rational(p: u32, r: Rational) -> Self {
        let mut z = Self::zero(p);
        z.c[0] = r;
        z
    }

    /// Builds an element directly from basis coefficients (length `p-1`).
    pub fn from_slots(p: u32, c: Vec<Rational>) -> Self {
        assert_eq!(c.len(), (p - 1) as usize);
        CycNum { p, c }
    }

    /// `zeta^k`, with `k` reduced mod `p`; the top power folds into the basis.
    pub fn zeta_pow(p: u32, k: i64) -> Self {
        let k = k.rem_euclid(p as i64) as u32;
        let mut z = Self::zero(p);
        if k < p - 1 {
            z.c[k as usize] = Rational::one();
        } else {
            for s in z.c.iter_mut() {
                *s = -Rational::one();
            }
        }
        z
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn slots(&self) -> &[Rational] {
        &self.c
    }

    /// Coefficient of `zeta^0`.
    pub fn coeff0(&self) -> &Rational {
        &self.c[0]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Rational::is_zero)
    }

    /// Returns the value as a rational if it lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.c[1..].iter().all(Rational::is_zero) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    pub fn add_assign(&mut self, w: &CycNum) {
        assert_eq!(self.p, w.p, "mixed cyclotomic orders");
        for (a, b) in self.c.iter_mut().zip(&w.c) {
            *a += b;
        }
    }

    /// Adds `r * zeta^k` in place, reducing the exponent.
    pub fn add_zeta_multiple(&mut self, r: &Rational, k: i64) {
        let k = k.rem_euclid(self.p as i64) as usize;
        if k < (self.p - 1) as usize {
            self.c[k] += r;
        } else {
            for s in self.c.iter_mut() {
                *s -= r;
            }
        }
    }

    pub fn scale(&self, r: &Rational) -> CycNum {
        CycNum {
            p: self.p,
            c: self.c.iter().map(|a| a * r).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> CycNum {
        self.scale(&rat(n))
    }

    fn mul_impl(&self, w: &CycNum) -> CycNum {
        assert_eq!(self.p, w.p, "mixed cyclotomic orders");
        let p = self.p as usize;
        // Convolve with exponents taken mod p, then fold the slot p-1.
        let mut full = vec![Rational::zero(); p];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in w.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                full[(i + j) % p] += a * b;
            }
        }
        let top = full.pop().unwrap();
        for s in full.iter_mut() {
            *s -= &top;
        }
        CycNum { p: self.p, c: full }
    }
}

impl Add for &CycNum {
    type Output = CycNum;
    fn add(self, w: &CycNum) -> CycNum {
        let mut z = self.clone();
        z.add_assign(w);
        z
    }
}

impl Sub for &CycNum {
    type Output = CycNum;
    fn sub(self, w: &CycNum) -> CycNum {
        assert_eq!(self.p, w.p, "mixed cyclotomic orders");
        CycNum {
            p: self.p,
            c: self.c.iter().zip(&w.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CycNum {
    type Output = CycNum;
    fn mul(self, w: &CycNum) -> CycNum {
        self.mul_impl(w)
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            p: self.p,
            c: self.c.iter().map(|a| -a).collect(),
        }
    }
}

fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.iter().map(fmt_rat).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum(p={}, {})", self.p, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeta_relation_closes() {
        // zeta^p = 1 and 1 + zeta + ... + zeta^(p-1) = 0.
        for p in [2u32, 3, 5, 7] {
            let z = CycNum::zeta_pow(p, 1);
            let mut pow = CycNum::one(p);
            let mut sum = CycNum::zero(p);
            for _ in 0..p {
                sum.add_assign(&pow);
                pow = &pow * &z;
            }
            assert_eq!(pow, CycNum::one(p), "zeta^p != 1 at p={p}");
            assert!(sum.is_zero(), "power sum nonzero at p={p}");
        }
    }

    #[test]
    fn display_is_reduced_basis() {
        let z = CycNum::zeta_pow(5, 4);
        assert_eq!(z.to_string(), "[-1, -1, -1, -1]");
        let half = CycNum::from_rational(3, Rational::new(1.into(), 2.into()));
        assert_eq!(half.to_string(), "[1/2, 0]");
    }

    #[test]
    fn quadratic_gauss_sum_squares() {
        // (zeta - zeta^2)^2 = -3 in Q(zeta_3).
        let s = &CycNum::zeta_pow(3, 1) - &CycNum::zeta_pow(3, 2);
        assert_eq!(&s * &s, CycNum::from_int(3, -3));
        // For p = 5 the quadratic Gauss sum squares to +5.
        let mut s5 = CycNum::zero(5);
        for t in 1..5i64 {
            let leg = if t == 1 || t == 4 { 1 } else { -1 };
            s5.add_assign(&CycNum::zeta_pow(5, t).scale_int(leg));
        }
        assert_eq!(&s5 * &s5, CycNum::from_int(5, 5));
    }

    fn arb_cyc(p: u32) -> impl Strategy<Value = CycNum> {
        prop::collection::vec((-20i64..20, 1i64..6), (p - 1) as usize).prop_map(move |v| {
            CycNum::from_slots(
                p,
                v.into_iter()
                    .map(|(n, d)| Rational::new(n.into(), d.into()))
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn ring_axioms_p5(a in arb_cyc(5), b in arb_cyc(5), c in arb_cyc(5)) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a - &a, CycNum::zero(5));
            prop_assert_eq!(&a * &CycNum::one(5), a.clone());
            prop_assert_eq!(&(-&a) + &a, CycNum::zero(5));
        }
    }
}
