//! Finite-field contexts and character-sum primitives.
//!
//! `FieldCtx` models `F_q = F_p[u]/(m(u))` with full operation tables, where
//! `m` is the lexicographically smallest monic irreducible of degree `k`
//! (coefficients compared low-degree-first).  `QuadExtCtx` models the
//! quadratic extension `F_{q^2}`.  Values of the additive character `psi` and
//! of all derived sums (Gauss sums, `kappa`, `kappa'`) live in `Q(zeta_p)`
//! via [`CycNum`].

pub mod cyclotomic;

pub use cyclotomic::{CycNum, Rational};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be >= 1 (got {0})")]
    InvalidDegree(u32),
    #[error("field size {0} exceeds the enumeration limit")]
    SizeLimit(u64),
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("element does not lie in the base field")]
    NotInBaseField,
    #[error("psi scale must be nonzero mod p")]
    TrivialCharacter,
}

/// Largest supported field size; keeps the flat `q x q` tables small.
pub const MAX_Q: u32 = 512;

/// An element of `F_q`, stored as its index: the base-`p` digit expansion of
/// the coefficient vector, low degree first.  `Fe(0)` is 0 and `Fe(1)` is 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Fe(pub u16);

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomial helpers over Z/p, low-degree-first coefficient vectors.
fn ptrim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn pmul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    ptrim(&mut out);
    out
}

fn pmod(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    ptrim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = (r[dr] * lead_inv) % p;
        for i in 0..=dm {
            let idx = dr - dm + i;
            r[idx] = (r[idx] + p - (c * m[i]) % p) % p;
        }
        ptrim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn psub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out = vec![0u32; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    ptrim(&mut out);
    out
}

fn pgcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    ptrim(&mut x);
    ptrim(&mut y);
    while !y.is_empty() {
        let r = pmod(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // p is prime and a != 0 mod p.
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(b: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut bb = b as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u64;
        }
        bb = bb * bb % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// `x^(p^j) mod m`, computed by plain square-and-multiply (exponent <= q).
fn ppow_x(e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let x = vec![0, 1];
    let mut acc = vec![1u32];
    let mut base = pmod(&x, m, p);
    let mut ee = e;
    while ee > 0 {
        if ee & 1 == 1 {
            acc = pmod(&pmul(&acc, &base, p), m, p);
        }
        base = pmod(&pmul(&base, &base, p), m, p);
        ee >>= 1;
    }
    acc
}

fn is_irreducible(m: &[u32], k: u32, p: u32) -> bool {
    // m has degree k. Irreducible iff x^(p^k) = x mod m and, for every prime
    // divisor d of k, gcd(x^(p^(k/d)) - x, m) = 1.
    let x = vec![0u32, 1];
    let qk = (p as u64).pow(k);
    let top = ppow_x(qk, m, p);
    if !pmod(&psub(&top, &x, p), m, p).is_empty() {
        return false;
    }
    let mut d = 2;
    let mut kk = k;
    let mut prime_divs = vec![];
    while d * d <= kk {
        if kk % d == 0 {
            prime_divs.push(d);
            while kk % d == 0 {
                kk /= d;
            }
        }
        d += 1;
    }
    if kk > 1 {
        prime_divs.push(kk);
    }
    for d in prime_divs {
        let e = (p as u64).pow(k / d);
        let g = pgcd(&psub(&ppow_x(e, m, p), &x, p), m, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Context for `F_q` with precomputed operation tables.
#[derive(Clone)]
pub struct FieldCtx {
    pub p: u32,
    pub k: u32,
    pub q: u32,
    /// Coefficients of the monic irreducible modulus, low degree first
    /// (length `k+1`, leading coefficient 1).  For `k = 1` this is `u`.
    pub modulus: Vec<u16>,
    psi_scale: u32,
    add_t: Vec<u16>,
    mul_t: Vec<u16>,
    neg_t: Vec<u16>,
    inv_t: Vec<u16>,
    trace_t: Vec<u16>,
    frob_t: Vec<u16>,
    sqrt_t: Vec<u16>, // q = none
    alpha_t: Vec<i8>,
    least_nonsquare: u16, // 0 when characteristic 2
    generator: u16,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .field("psi_scale", &self.psi_scale)
            .finish_non_exhaustive()
    }
}

impl FieldCtx {
    pub fn new(p: u32, k: u32) -> Result<FieldCtx, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if k == 0 {
            return Err(AlgebraError::InvalidDegree(k));
        }
        let q64 = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
        if q64 > MAX_Q as u64 {
            return Err(AlgebraError::SizeLimit(q64));
        }
        let q = q64 as u32;

        // Lexicographically smallest monic irreducible: scan constant-up.
        let mut modulus: Option<Vec<u32>> = None;
        for n in 0..q {
            let mut m: Vec<u32> = digits(n, p, k);
            m.push(1);
            if is_irreducible(&m, k, p) {
                modulus = Some(m);
                break;
            }
        }
        let modulus = modulus.expect("an irreducible polynomial of every degree exists");

        let qd = q as usize;
        let idx = |poly: &[u32]| -> u16 {
            let mut acc = 0u32;
            for (i, &c) in poly.iter().enumerate() {
                acc += c * p.pow(i as u32);
            }
            acc as u16
        };

        let mut add_t = vec![0u16; qd * qd];
        let mut mul_t = vec![0u16; qd * qd];
        let mut neg_t = vec![0u16; qd];
        for a in 0..q {
            let da = digits(a, p, k);
            let mut na = da.clone();
            for c in na.iter_mut() {
                *c = (p - *c) % p;
            }
            neg_t[a as usize] = idx(&na);
            for b in 0..=a {
                let db = digits(b, p, k);
                let mut s = vec![0u32; k as usize];
                for i in 0..k as usize {
                    s[i] = (da[i] + db[i]) % p;
                }
                let sum = idx(&s);
                add_t[(a * q + b) as usize] = sum;
                add_t[(b * q + a) as usize] = sum;
                let prod = pmod(&pmul(&da, &db, p), &modulus, p);
                let mut pr = prod.clone();
                pr.resize(k as usize, 0);
                let prod = idx(&pr);
                mul_t[(a * q + b) as usize] = prod;
                mul_t[(b * q + a) as usize] = prod;
            }
        }

        let mul = |a: u32, b: u32| mul_t[(a * q + b) as usize] as u32;

        let mut inv_t = vec![0u16; qd];
        for a in 1..q {
            for b in 1..q {
                if mul(a, b) == 1 {
                    inv_t[a as usize] = b as u16;
                    break;
                }
            }
        }

        let mut frob_t = vec![0u16; qd];
        for a in 0..q {
            let mut acc = 1u32;
            for _ in 0..p {
                acc = mul(acc, a);
            }
            frob_t[a as usize] = acc as u16;
        }

        let mut trace_t = vec![0u16; qd];
        for a in 0..q {
            let mut term = a;
            let mut acc = a;
            for _ in 1..k {
                term = frob_t[term as usize] as u32;
                acc = add_t[(acc * q + term) as usize] as u32;
            }
            debug_assert!(acc < p, "trace must land in the prime field");
            trace_t[a as usize] = acc as u16;
        }

        let mut sqrt_t = vec![q as u16; qd];
        for a in 0..q {
            let sq = mul(a, a);
            if sqrt_t[sq as usize] == q as u16 {
                sqrt_t[sq as usize] = a as u16;
            }
        }

        let mut alpha_t = vec![0i8; qd];
        for a in 1..q {
            alpha_t[a as usize] = if p == 2 || sqrt_t[a as usize] != q as u16 {
                1
            } else {
                -1
            };
        }

        let least_nonsquare = if p == 2 {
            0
        } else {
            (1..q)
                .find(|&a| alpha_t[a as usize] == -1)
                .expect("odd field has a non-square") as u16
        };

        let generator = (1..q)
            .find(|&g| {
                let mut acc = g;
                let mut ord = 1;
                while acc != 1 {
                    acc = mul(acc, g);
                    ord += 1;
                }
                ord == q - 1
            })
            .expect("multiplicative group is cyclic") as u16;

        Ok(FieldCtx {
            p,
            k,
            q,
            modulus: modulus.iter().map(|&c| c as u16).collect(),
            psi_scale: 1,
            add_t,
            mul_t,
            neg_t,
            inv_t,
            trace_t,
            frob_t,
            sqrt_t,
            alpha_t,
            least_nonsquare,
            generator,
        })
    }

    /// Same field with `psi` replaced by `x -> psi(scale * x)`.
    pub fn with_psi_scale(&self, scale: u32) -> Result<FieldCtx, AlgebraError> {
        if scale % self.p == 0 {
            return Err(AlgebraError::TrivialCharacter);
        }
        let mut ctx = self.clone();
        ctx.psi_scale = scale % self.p;
        Ok(ctx)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.q as u16).map(Fe)
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> {
        (1..self.q as u16).map(Fe)
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u16)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.add_t[(a.0 as u32 * self.q + b.0 as u32) as usize])
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.mul_t[(a.0 as u32 * self.q + b.0 as u32) as usize])
    }

    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg_t[a.0 as usize])
    }

    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a.0 != 0, "inverse of zero");
        Fe(self.inv_t[a.0 as usize])
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, e: i64) -> Fe {
        if e < 0 {
            return self.pow(self.inv(a), -e);
        }
        let mut acc = Fe(1);
        let mut base = a;
        let mut ee = e as u64;
        while ee > 0 {
            if ee & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            ee >>= 1;
        }
        acc
    }

    /// Absolute trace `Tr_{F_q/F_p}`, as an integer in `0..p`.
    pub fn trace(&self, a: Fe) -> u32 {
        self.trace_t[a.0 as usize] as u32
    }

    pub fn frob(&self, a: Fe) -> Fe {
        Fe(self.frob_t[a.0 as usize])
    }

    /// Exponent `e` with `psi(a) = zeta_p^e`.
    pub fn psi_exp(&self, a: Fe) -> u32 {
        (self.psi_scale * self.trace(a)) % self.p
    }

    pub fn psi(&self, a: Fe) -> CycNum {
        CycNum::zeta_pow(self.p, self.psi_exp(a) as i64)
    }

    /// `sum_{s in F_q^x} psi(s*tau)`: `q-1` at `tau = 0`, `-1` otherwise.
    pub fn char_sum(&self, tau: Fe) -> i64 {
        if tau.0 == 0 {
            (self.q - 1) as i64
        } else {
            -1
        }
    }

    pub fn try_alpha0(&self, a: Fe) -> Result<i64, AlgebraError> {
        if self.p == 2 {
            return Err(AlgebraError::EvenCharacteristic);
        }
        Ok(self.alpha_t[a.0 as usize] as i64)
    }

    /// Quadratic character, extended by `alpha0(0) = 0`.  Odd `p` only.
    pub fn alpha0(&self, a: Fe) -> i64 {
        assert!(self.p != 2, "alpha0 requires odd characteristic");
        self.alpha_t[a.0 as usize] as i64
    }

    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        let s = self.sqrt_t[a.0 as usize];
        if s as u32 == self.q {
            None
        } else {
            Some(Fe(s))
        }
    }

    /// True for 0 and for nonzero squares.
    pub fn is_square(&self, a: Fe) -> bool {
        self.sqrt_t[a.0 as usize] as u32 != self.q
    }

    pub fn try_least_nonsquare(&self) -> Result<Fe, AlgebraError> {
        if self.p == 2 {
            return Err(AlgebraError::EvenCharacteristic);
        }
        Ok(Fe(self.least_nonsquare))
    }

    pub fn least_nonsquare(&self) -> Fe {
        assert!(self.p != 2, "no non-squares in characteristic 2");
        Fe(self.least_nonsquare)
    }

    pub fn generator(&self) -> Fe {
        Fe(self.generator)
    }

    /// Renders an element as its coefficient vector, low degree first:
    /// `"2"` in a prime field, `"2.1"` for `2 + u` in an extension.
    pub fn fe_str(&self, a: Fe) -> String {
        if self.k == 1 {
            return a.0.to_string();
        }
        digits(a.0 as u32, self.p, self.k)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn digits(mut n: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(n % p);
        n /= p;
    }
    out
}

/// An element of `F_{q^2} = F_q[v]/(v^2 + c1 v + c0)`, stored as the index
/// `a + q*b` of `a + b*v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Fx(pub u32);

/// The quadratic extension of a [`FieldCtx`], with per-element Frobenius,
/// inverse and square-root tables (multiplication is computed from the base
/// tables on the fly).
pub struct QuadExtCtx<'a> {
    pub base: &'a FieldCtx,
    pub qq: u32,
    /// `(c0, c1)` with modulus `v^2 + c1 v + c0`, the lexicographically
    /// smallest irreducible monic quadratic over `F_q`.
    pub modulus2: (Fe, Fe),
    frob_t: Vec<u32>,
    inv_t: Vec<u32>,
    sqrt_t: Vec<u32>, // qq = none
}

impl<'a> QuadExtCtx<'a> {
    pub fn new(base: &'a FieldCtx) -> Result<QuadExtCtx<'a>, AlgebraError> {
        let q = base.q;
        let qq64 = q as u64 * q as u64;
        if qq64 > (MAX_Q as u64) * (MAX_Q as u64) {
            return Err(AlgebraError::SizeLimit(qq64));
        }
        let qq = qq64 as u32;
        // v^2 + c1 v + c0 is irreducible iff it has no root in F_q.
        let mut modulus2 = None;
        'outer: for n in 0..qq {
            let c0 = Fe((n % q) as u16);
            let c1 = Fe((n / q) as u16);
            for x in base.elements() {
                let val = base.add(base.add(base.mul(x, x), base.mul(c1, x)), c0);
                if val.0 == 0 {
                    continue 'outer;
                }
            }
            modulus2 = Some((c0, c1));
            break;
        }
        let modulus2 = modulus2.expect("irreducible quadratics exist over every finite field");

        let mut ext = QuadExtCtx {
            base,
            qq,
            modulus2,
            frob_t: vec![],
            inv_t: vec![],
            sqrt_t: vec![],
        };

        let mut frob_t = vec![0u32; qq as usize];
        for x in 0..qq {
            frob_t[x as usize] = ext.pow(Fx(x), q as i64).0;
        }
        ext.frob_t = frob_t;

        let mut inv_t = vec![0u32; qq as usize];
        for x in 1..qq {
            // x^(q^2 - 2) = x^(-1)
            inv_t[x as usize] = ext.pow(Fx(x), (qq - 2) as i64).0;
        }
        ext.inv_t = inv_t;

        let mut sqrt_t = vec![qq; qq as usize];
        for x in 0..qq {
            let sq = ext.mul(Fx(x), Fx(x)).0;
            if sqrt_t[sq as usize] == qq {
                sqrt_t[sq as usize] = x;
            }
        }
        ext.sqrt_t = sqrt_t;

        Ok(ext)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fx> {
        (0..self.qq).map(Fx)
    }

    pub fn units(&self) -> impl Iterator<Item = Fx> {
        (1..self.qq).map(Fx)
    }

    pub fn coeffs(&self, x: Fx) -> (Fe, Fe) {
        (Fe((x.0 % self.base.q) as u16), Fe((x.0 / self.base.q) as u16))
    }

    pub fn make(&self, a: Fe, b: Fe) -> Fx {
        Fx(a.0 as u32 + self.base.q * b.0 as u32)
    }

    pub fn embed(&self, a: Fe) -> Fx {
        Fx(a.0 as u32)
    }

    pub fn add(&self, x: Fx, y: Fx) -> Fx {
        let f = self.base;
        let (a, b) = self.coeffs(x);
        let (c, d) = self.coeffs(y);
        self.make(f.add(a, c), f.add(b, d))
    }

    pub fn neg(&self, x: Fx) -> Fx {
        let f = self.base;
        let (a, b) = self.coeffs(x);
        self.make(f.neg(a), f.neg(b))
    }

    pub fn sub(&self, x: Fx, y: Fx) -> Fx {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Fx, y: Fx) -> Fx {
        // (a+bv)(c+dv) = ac + (ad+bc)v + bd v^2, v^2 = -c1 v - c0.
        let f = self.base;
        let (a, b) = self.coeffs(x);
        let (c, d) = self.coeffs(y);
        let (c0, c1) = self.modulus2;
        let bd = f.mul(b, d);
        let lo = f.sub(f.mul(a, c), f.mul(bd, c0));
        let hi = f.sub(f.add(f.mul(a, d), f.mul(b, c)), f.mul(bd, c1));
        self.make(lo, hi)
    }

    pub fn pow(&self, x: Fx, e: i64) -> Fx {
        if e < 0 {
            return self.pow(self.inv(x), -e);
        }
        let mut acc = self.embed(Fe(1));
        let mut base = x;
        let mut ee = e as u64;
        while ee > 0 {
            if ee & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            ee >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Fx) -> Fx {
        assert!(x.0 != 0, "inverse of zero");
        Fx(self.inv_t[x.0 as usize])
    }

    pub fn frob(&self, x: Fx) -> Fx {
        Fx(self.frob_t[x.0 as usize])
    }

    pub fn in_base(&self, x: Fx) -> bool {
        x.0 < self.base.q
    }

    pub fn to_base(&self, x: Fx) -> Result<Fe, AlgebraError> {
        if self.in_base(x) {
            Ok(Fe(x.0 as u16))
        } else {
            Err(AlgebraError::NotInBaseField)
        }
    }

    /// `x * x^q`, always in the base field.
    pub fn norm(&self, x: Fx) -> Fe {
        self.to_base(self.mul(x, self.frob(x)))
            .expect("norm lands in the base field")
    }

    /// `x + x^q`, always in the base field.
    pub fn trace2(&self, x: Fx) -> Fe {
        self.to_base(self.add(x, self.frob(x)))
            .expect("relative trace lands in the base field")
    }

    pub fn sqrt(&self, x: Fx) -> Option<Fx> {
        let s = self.sqrt_t[x.0 as usize];
        if s == self.qq {
            None
        } else {
            Some(Fx(s))
        }
    }

    pub fn fx_str(&self, x: Fx) -> String {
        let (a, b) = self.coeffs(x);
        format!("{}.{}", self.base.fe_str(a), self.base.fe_str(b))
    }
}

/// Quadratic Gauss sum `S(alpha_o, psi) = sum_{t != 0} alpha_o(t) psi(t)`.
pub fn gauss_sum(ctx: &FieldCtx) -> CycNum {
    gauss_sum_b(ctx, Fe(1))
}

/// `S(alpha_o, psi_b) = sum_{t != 0} alpha_o(t) psi(tb)`; zero at `b = 0`.
pub fn gauss_sum_b(ctx: &FieldCtx, b: Fe) -> CycNum {
    assert!(ctx.p != 2, "Gauss sums require odd characteristic");
    let mut acc = CycNum::zero(ctx.p);
    for t in ctx.units() {
        let term = CycNum::zeta_pow(ctx.p, ctx.psi_exp(ctx.mul(t, b)) as i64);
        acc.add_assign(&term.scale_int(ctx.alpha0(t)));
    }
    acc
}

/// `kappa(b) = sum_{s != 0} psi(s^{-2} b)`; valid in any characteristic.
pub fn kappa(ctx: &FieldCtx, b: Fe) -> CycNum {
    let mut acc = CycNum::zero(ctx.p);
    for s in ctx.units() {
        let s2 = ctx.mul(s, s);
        acc.add_assign(&CycNum::zeta_pow(
            ctx.p,
            ctx.psi_exp(ctx.mul(ctx.inv(s2), b)) as i64,
        ));
    }
    acc
}

/// `kappa'(b) = sum over the q-1 nonzero s in F_{q^2} with s^q = -s of
/// psi(s^{-2} b)`, enumerated in the stored quadratic extension; each
/// `s^{-2}` is asserted to lie in the base field before `psi` applies.
pub fn kappa_prime(ctx: &FieldCtx, ext: &QuadExtCtx, b: Fe) -> CycNum {
    assert!(ctx.p != 2, "kappa' requires odd characteristic");
    let mut acc = CycNum::zero(ctx.p);
    let mut count = 0usize;
    for s in ext.units() {
        if ext.frob(s) != ext.neg(s) {
            continue;
        }
        count += 1;
        let inv2 = ext.inv(ext.mul(s, s));
        let inv2 = ext
            .to_base(inv2)
            .expect("s^(-2) lies in the base field when s^q = -s");
        acc.add_assign(&CycNum::zeta_pow(ctx.p, ctx.psi_exp(ctx.mul(inv2, b)) as i64));
    }
    assert_eq!(count, (ctx.q - 1) as usize, "|{{s : s^q = -s, s != 0}}| = q - 1");
    acc
}

/// `kappa'(b)` via the identity `kappa'(b) = kappa(r b)` for a non-square `r`.
pub fn kappa_prime_base(ctx: &FieldCtx, b: Fe) -> CycNum {
    kappa(ctx, ctx.mul(ctx.least_nonsquare(), b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_are_lex_smallest() {
        assert_eq!(FieldCtx::new(3, 1).unwrap().modulus, vec![0, 1]);
        assert_eq!(FieldCtx::new(2, 2).unwrap().modulus, vec![1, 1, 1]);
        assert_eq!(FieldCtx::new(3, 2).unwrap().modulus, vec![1, 0, 1]);
        assert_eq!(FieldCtx::new(2, 3).unwrap().modulus, vec![1, 1, 0, 1]);
        assert_eq!(FieldCtx::new(3, 3).unwrap().modulus, vec![1, 2, 0, 1]);
        assert_eq!(FieldCtx::new(7, 1).unwrap().modulus, vec![0, 1]);
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(FieldCtx::new(4, 1).unwrap_err(), AlgebraError::NotPrime(4));
        assert_eq!(
            FieldCtx::new(3, 0).unwrap_err(),
            AlgebraError::InvalidDegree(0)
        );
        assert_eq!(
            FieldCtx::new(2, 10).unwrap_err(),
            AlgebraError::SizeLimit(1024)
        );
    }

    #[test]
    fn f9_oracle_values() {
        let f9 = FieldCtx::new(3, 2).unwrap();
        // With modulus u^2 + 1: trace(a + bu) = 2a.
        for a in 0..3u16 {
            for b in 0..3u16 {
                let x = Fe(a + 3 * b);
                assert_eq!(f9.trace(x), (2 * a as u32) % 3);
            }
        }
        // g = 2 + u = Fe(5) has order 8 and g^2 = g + 1 = u.
        let g = Fe(5);
        assert_eq!(f9.mul(g, g), f9.add(g, Fe(1)));
        assert_eq!(f9.mul(g, g), Fe(3));
        let mut ord = 1;
        let mut acc = g;
        while acc != Fe(1) {
            acc = f9.mul(acc, g);
            ord += 1;
        }
        assert_eq!(ord, 8);
        assert_eq!(f9.alpha0(g), -1, "a generator is a non-square");
        // -1 = 2 = u^2 is a square at q = 9.
        assert_eq!(f9.alpha0(f9.from_int(-1)), 1);
        assert_eq!(f9.generator(), Fe(4));
        // Squares are the even generator powers {1, u, 2, 2u}; 1 + u = Fe(4)
        // is the first index outside them.
        assert_eq!(f9.alpha0(Fe(3)), 1);
        assert_eq!(f9.least_nonsquare(), Fe(4));
    }

    #[test]
    fn least_nonsquares_small() {
        assert_eq!(FieldCtx::new(3, 1).unwrap().least_nonsquare(), Fe(2));
        assert_eq!(FieldCtx::new(5, 1).unwrap().least_nonsquare(), Fe(2));
        assert_eq!(FieldCtx::new(7, 1).unwrap().least_nonsquare(), Fe(3));
    }

    #[test]
    fn field_axioms_exhaustive_q9() {
        let f = FieldCtx::new(3, 2).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), Fe(0));
            if a.0 != 0 {
                assert_eq!(f.mul(a, f.inv(a)), Fe(1));
                assert_eq!(f.frob(f.frob(a)), a, "Frobenius is an involution on F_9");
            }
            for b in f.elements() {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in f.elements() {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn psi_is_additive_character() {
        for (p, k) in [(2, 1), (3, 2), (5, 1)] {
            let f = FieldCtx::new(p, k).unwrap();
            assert_eq!(f.psi(Fe(0)), CycNum::one(p));
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.psi(f.add(a, b)), &f.psi(a) * &f.psi(b));
                }
            }
            let mut total = CycNum::zero(p);
            for a in f.elements() {
                total.add_assign(&f.psi(a));
            }
            assert!(total.is_zero(), "nontrivial character sums to 0");
        }
    }

    #[test]
    fn psi_scale_smoke() {
        let f = FieldCtx::new(5, 1).unwrap();
        let f2 = f.with_psi_scale(2).unwrap();
        for a in f.elements() {
            assert_eq!(f2.psi(a), f.psi(f.mul(Fe(2), a)));
        }
        assert_eq!(
            f.with_psi_scale(5).unwrap_err(),
            AlgebraError::TrivialCharacter
        );
    }

    #[test]
    fn alpha0_multiplicative() {
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            for a in f.units() {
                assert_eq!(f.alpha0(a), f.alpha0(f.inv(a)));
                for b in f.units() {
                    assert_eq!(f.alpha0(f.mul(a, b)), f.alpha0(a) * f.alpha0(b));
                }
            }
            assert_eq!(f.alpha0(Fe(0)), 0);
        }
        let f2 = FieldCtx::new(2, 1).unwrap();
        assert_eq!(
            f2.try_alpha0(Fe(1)).unwrap_err(),
            AlgebraError::EvenCharacteristic
        );
        assert_eq!(
            f2.try_least_nonsquare().unwrap_err(),
            AlgebraError::EvenCharacteristic
        );
    }

    #[test]
    fn sqrt_canonical() {
        for (p, k) in [(3, 1), (7, 1), (3, 2), (2, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            for a in f.elements() {
                let sq = f.mul(a, a);
                let s = f.sqrt(sq).expect("squares have roots");
                assert_eq!(f.mul(s, s), sq);
            }
            if p != 2 {
                assert_eq!(f.sqrt(f.least_nonsquare()), None);
            }
        }
    }

    #[test]
    fn char_sum_matches_literal_sum() {
        for (p, k) in [(3, 1), (5, 1), (3, 2), (2, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            for tau in f.elements() {
                let mut acc = CycNum::zero(p);
                for s in f.units() {
                    acc.add_assign(&f.psi(f.mul(s, tau)));
                }
                assert_eq!(acc, CycNum::from_int(p, f.char_sum(tau)));
            }
        }
    }

    #[test]
    fn crucial_identity() {
        // sum_s psi(s tau) = sum_s psi(s tau^2) for every tau.
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            for tau in f.elements() {
                let one: CycNum = {
                    let mut acc = CycNum::zero(p);
                    for s in f.units() {
                        acc.add_assign(&f.psi(f.mul(s, tau)));
                    }
                    acc
                };
                let two: CycNum = {
                    let mut acc = CycNum::zero(p);
                    for s in f.units() {
                        acc.add_assign(&f.psi(f.mul(s, f.mul(tau, tau))));
                    }
                    acc
                };
                assert_eq!(one, two);
                assert_eq!(one, CycNum::from_int(p, f.char_sum(tau)));
            }
        }
    }

    #[test]
    fn gauss_sum_squares() {
        for (p, k, expect) in [(3, 1, -3i64), (5, 1, 5), (3, 2, 9), (7, 1, -7)] {
            let f = FieldCtx::new(p, k).unwrap();
            let s = gauss_sum(&f);
            assert_eq!(&s * &s, CycNum::from_int(p, expect), "S^2 = alpha0(-1) q");
            let expect_sign = f.alpha0(f.from_int(-1)) * f.q as i64;
            assert_eq!(expect, expect_sign);
        }
    }

    #[test]
    fn gauss_sum_b_scaling() {
        for (p, k) in [(3, 1), (5, 1), (3, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            let s = gauss_sum(&f);
            assert!(gauss_sum_b(&f, Fe(0)).is_zero());
            for b in f.units() {
                assert_eq!(gauss_sum_b(&f, b), s.scale_int(f.alpha0(b)));
            }
        }
    }

    #[test]
    fn kappa_oracles_q3() {
        let f = FieldCtx::new(3, 1).unwrap();
        let ext = QuadExtCtx::new(&f).unwrap();
        // kappa(1) = 2 zeta_3, kappa'(1) = 2 zeta_3^2 = -2 - 2 zeta_3.
        let two_zeta = CycNum::zeta_pow(3, 1).scale_int(2);
        assert_eq!(kappa(&f, Fe(1)), two_zeta);
        assert_eq!(kappa_prime(&f, &ext, Fe(1)), CycNum::zeta_pow(3, 2).scale_int(2));
        assert_eq!(kappa(&f, Fe(0)), CycNum::from_int(3, 2));
    }

    #[test]
    fn kappa_identities() {
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            let ext = QuadExtCtx::new(&f).unwrap();
            let r = f.least_nonsquare();
            assert_eq!(kappa(&f, Fe(0)), CycNum::from_int(p, (f.q - 1) as i64));
            for b in f.units() {
                let k1 = kappa(&f, b);
                let k2 = kappa_prime(&f, &ext, b);
                // kappa + kappa' = -2 and kappa(rb) = kappa'(b).
                assert_eq!(&k1 + &k2, CycNum::from_int(p, -2));
                assert_eq!(kappa(&f, f.mul(r, b)), k2);
                assert_eq!(kappa_prime_base(&f, b), k2);
                // (kappa - kappa')/2 = S(alpha_o, psi_b).
                assert_eq!(
                    (&k1 - &k2).scale(&Rational::new(1.into(), 2.into())),
                    gauss_sum_b(&f, b)
                );
            }
        }
    }

    #[test]
    fn quad_ext_invariants() {
        for (p, k) in [(3, 1), (5, 1), (2, 1), (3, 2)] {
            let f = FieldCtx::new(p, k).unwrap();
            let ext = QuadExtCtx::new(&f).unwrap();
            let mut fixed = 0;
            for x in ext.elements() {
                assert_eq!(ext.frob(ext.frob(x)), x);
                if ext.frob(x) == x {
                    fixed += 1;
                    assert!(ext.in_base(x), "Frobenius-fixed points form the base field");
                }
                let sq = ext.mul(x, x);
                let s = ext.sqrt(sq).unwrap();
                assert_eq!(ext.mul(s, s), sq);
                if x.0 != 0 {
                    assert_eq!(ext.mul(x, ext.inv(x)), ext.embed(Fe(1)));
                    let _ = ext.norm(x);
                }
            }
            assert_eq!(fixed, f.q);
            // Every base element has a square root upstairs.
            for a in f.elements() {
                assert!(ext.sqrt(ext.embed(a)).is_some());
            }
            // Norm and trace agree with the defining formulas on a sample.
            for x in ext.units().take(40) {
                let n = ext.norm(x);
                assert_eq!(ext.embed(n), ext.mul(x, ext.frob(x)));
            }
        }
    }

    #[test]
    fn ext_modulus_f4_over_f2() {
        let f = FieldCtx::new(2, 1).unwrap();
        let ext = QuadExtCtx::new(&f).unwrap();
        // v^2 + v + 1 is the unique irreducible quadratic over F_2.
        assert_eq!(ext.modulus2, (Fe(1), Fe(1)));
    }
}
