//! Exact arithmetic in `F_q = F_p[x]/(m(x))` for odd `p` and `q <= 2^20`.
//!
//! Elements are stored as their index `c_0 + c_1 p + ... + c_{n-1} p^{n-1}`,
//! where `c_i` are the residues of the reduced polynomial representative.
//! The index order is the enumeration order used everywhere in the crate:
//! `0` first, `1` second, and so on. Multiplication goes through log/exp
//! tables built from a primitive element; squares and canonical square roots
//! are tabulated at construction.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field cardinality that can be constructed.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("even characteristic {0} is not supported")]
    EvenCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {p}^{n} exceeds the enumeration bound 2^20")]
    TooLarge { p: u64, n: u32 },
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("elements belong to different fields ({0} and {1})")]
    MixedFields(FieldDescriptor, FieldDescriptor),
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("element is not a square")]
    NotSquare,
    #[error("element index {index} out of range for field of size {q}")]
    OutOfRange { index: u64, q: u32 },
    #[error("coefficient vector {0:?} is not a valid element")]
    BadCoefficients(Vec<u32>),
}

/// Element index within its field; see the module docs for the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// JSON-facing description of a field: `{"p": 3, "n": 2, "modulus": [1, 0, 1]}`.
///
/// `modulus` lists coefficients constant term first, including the leading 1.
/// It may be omitted on input, in which case the canonical modulus is used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{}", self.p, self.n)
        }
    }
}

struct Tables {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    /// `exp[i] = g^i` for `0 <= i < q - 1`.
    exp: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
    /// Canonical square root, or `NO_ROOT`.
    sqrt: Vec<u32>,
    generator: u32,
}

const NO_ROOT: u32 = u32::MAX;

/// A constructed finite field. Cloning is cheap and shares the tables.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.t.p)
            .field("n", &self.t.n)
            .field("modulus", &self.t.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t)
            || (self.t.p == other.t.p && self.t.n == other.t.n && self.t.modulus == other.t.modulus)
    }
}

impl Eq for Field {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^n` with `p` prime.
pub fn prime_power(q: u64) -> Result<(u64, u32), FieldError> {
    if q < 2 {
        return Err(FieldError::NotPrimePower(q));
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut n = 0u32;
    while rest.is_multiple_of(p) {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(FieldError::NotPrimePower(q));
    }
    Ok((p, n))
}

// Polynomials over F_p as coefficient vectors, constant term first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let p64 = p as u64;
    while r.len() > dm {
        let lead = *r.last().unwrap() as u64;
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = lead * c as u64 % p64;
            let slot = &mut r[shift + i];
            *slot = ((*slot as u64 + p64 - sub) % p64) as u32;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p64 = p as u64;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut acc = poly_rem(&[1], m, p);
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn digits(mut index: u64, p: u32, n: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        out.push((index % p as u64) as u32);
        index /= p as u64;
    }
    out
}

fn undigits(c: &[u32], p: u32) -> u64 {
    c.iter()
        .rev()
        .fold(0u64, |acc, &d| acc * p as u64 + d as u64)
}

fn has_root(poly: &[u32], p: u32) -> bool {
    let p64 = p as u64;
    (0..p64).any(|x| {
        poly.iter()
            .rev()
            .fold(0u64, |acc, &c| (acc * x + c as u64) % p64)
            == 0
    })
}

/// Irreducibility of a monic polynomial of degree `n >= 1`: no root, and no
/// monic factor of degree `2..=n/2` (by trial division).
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let n = poly.len() - 1;
    if n == 1 {
        return true;
    }
    if has_root(poly, p) {
        return false;
    }
    if n <= 3 {
        return true;
    }
    for k in 2..=n / 2 {
        let count = (p as u64).pow(k as u32);
        for idx in 0..count {
            let mut divisor = digits(idx, p, k as u32);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `n` under the index order of its
/// non-leading coefficients. For `n = 1` this is `x`.
pub fn canonical_modulus(p: u32, n: u32) -> Vec<u32> {
    let count = (p as u64).pow(n);
    for idx in 0..count {
        let mut poly = digits(idx, p, n);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn distinct_prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

impl Field {
    /// Builds `F_{p^n}` with the canonical modulus.
    pub fn new(p: u64, n: u32) -> Result<Field, FieldError> {
        Self::check_params(p, n)?;
        let modulus = canonical_modulus(p as u32, n);
        Ok(Self::build(p as u32, n, modulus))
    }

    /// Builds `F_q` from a prime power.
    pub fn with_order(q: u64) -> Result<Field, FieldError> {
        let (p, n) = prime_power(q)?;
        Field::new(p, n)
    }

    /// Builds a field from a descriptor, deriving the modulus when absent.
    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Field, FieldError> {
        Self::check_params(d.p, d.n)?;
        let p = d.p as u32;
        let modulus = match &d.modulus {
            None => canonical_modulus(p, d.n),
            Some(m) => {
                if m.len() != d.n as usize + 1 {
                    return Err(FieldError::BadModulus(format!(
                        "expected {} coefficients, got {}",
                        d.n + 1,
                        m.len()
                    )));
                }
                if m.last() != Some(&1) {
                    return Err(FieldError::BadModulus("modulus must be monic".into()));
                }
                if m.iter().any(|&c| c >= p) {
                    return Err(FieldError::BadModulus(format!(
                        "coefficients must lie in [0, {p})"
                    )));
                }
                if !is_irreducible(m, p) {
                    return Err(FieldError::BadModulus(format!(
                        "{m:?} is reducible over F_{p}"
                    )));
                }
                m.clone()
            }
        };
        Ok(Self::build(p, d.n, modulus))
    }

    fn check_params(p: u64, n: u32) -> Result<(), FieldError> {
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if p == 2 {
            return Err(FieldError::EvenCharacteristic(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        match p.checked_pow(n) {
            Some(q) if q <= MAX_FIELD_SIZE => Ok(()),
            _ => Err(FieldError::TooLarge { p, n }),
        }
    }

    fn build(p: u32, n: u32, modulus: Vec<u32>) -> Field {
        let q = p.pow(n);
        let order = (q - 1) as u64;
        let factors = distinct_prime_factors(order);

        let generator = (1..q)
            .find(|&g| {
                let gp = digits(g as u64, p, n);
                let mut one = vec![1u32];
                poly_trim(&mut one);
                factors
                    .iter()
                    .all(|&l| poly_powmod(&gp, order / l, &modulus, p) != one)
                    && poly_powmod(&gp, order, &modulus, p) == one
            })
            .expect("multiplicative group is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; q as usize];
        if n == 1 {
            let mut acc = 1u64;
            for i in 0..order {
                exp.push(acc as u32);
                log[acc as usize] = i as u32;
                acc = acc * generator as u64 % p as u64;
            }
        } else {
            let g = digits(generator as u64, p, n);
            let mut acc = vec![1u32];
            for i in 0..order {
                let idx = undigits(&acc, p) as u32;
                exp.push(idx);
                log[idx as usize] = i as u32;
                acc = poly_mulmod(&acc, &g, &modulus, p);
            }
        }

        let mut t = Tables {
            p,
            n,
            q,
            modulus,
            exp,
            log,
            sqrt: Vec::new(),
            generator,
        };
        let mut sqrt = vec![NO_ROOT; q as usize];
        // Scanning y in increasing index order keeps the smaller root of each pair.
        for y in 0..q {
            let sq = mul_raw(&t, y, y);
            if sqrt[sq as usize] == NO_ROOT {
                sqrt[sq as usize] = y;
            }
        }
        t.sqrt = sqrt;
        Field { t: Arc::new(t) }
    }

    pub fn p(&self) -> u32 {
        self.t.p
    }

    pub fn n(&self) -> u32 {
        self.t.n
    }

    pub fn q(&self) -> u32 {
        self.t.q
    }

    /// Modulus coefficients, constant term first, leading 1 included.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> Elem {
        Elem(self.t.generator)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.t.p as u64,
            n: self.t.n,
            modulus: Some(self.t.modulus.clone()),
        }
    }

    pub fn elem(&self, index: u64) -> Result<Elem, FieldError> {
        if index < self.t.q as u64 {
            Ok(Elem(index as u32))
        } else {
            Err(FieldError::OutOfRange { index, q: self.t.q })
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.t.p as i64) as u32)
    }

    pub fn coeffs(&self, x: Elem) -> Vec<u32> {
        digits(x.0 as u64, self.t.p, self.t.n)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<Elem, FieldError> {
        if c.len() > self.t.n as usize || c.iter().any(|&d| d >= self.t.p) {
            return Err(FieldError::BadCoefficients(c.to_vec()));
        }
        Ok(Elem(undigits(c, self.t.p) as u32))
    }

    /// All `q` elements in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.t.q).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.t.q).map(Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.t.p;
        if self.t.n == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= p { s - p } else { s });
        }
        let (mut a, mut b) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.t.n {
            let s = a % p + b % p;
            out += if s >= p { s - p } else { s } * place;
            a /= p;
            b /= p;
            place *= p;
        }
        Elem(out)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.t.p;
        if self.t.n == 1 {
            return Elem(if a.0 == 0 { 0 } else { p - a.0 });
        }
        let mut a = a.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.t.n {
            let d = a % p;
            out += if d == 0 { 0 } else { p - d } * place;
            a /= p;
            place *= p;
        }
        Elem(out)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(mul_raw(&self.t, a.0, b.0))
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut acc = Elem::ONE;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `x^(q-2)`.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.t.q as u64 - 2))
    }

    pub fn is_square(&self, a: Elem) -> bool {
        self.t.sqrt[a.index()] != NO_ROOT
    }

    /// The smaller (in index order) of the two square roots.
    pub fn sqrt(&self, a: Elem) -> Result<Elem, FieldError> {
        match self.t.sqrt[a.index()] {
            NO_ROOT => Err(FieldError::NotSquare),
            r => Ok(Elem(r)),
        }
    }

    /// `x^((q+1)/4)` root for `q = 3 mod 4`. Returns `None` otherwise or when
    /// `a` is not a square. Not canonicalized.
    pub fn sqrt_3mod4(&self, a: Elem) -> Option<Elem> {
        if self.t.q % 4 != 3 {
            return None;
        }
        let r = self.pow(a, (self.t.q as u64 + 1) / 4);
        (self.square(r) == a).then_some(r)
    }

    /// Checked element wrapper bound to this field.
    pub fn element(&self, x: Elem) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value: x,
        }
    }
}

#[inline]
fn mul_raw(t: &Tables, a: u32, b: u32) -> u32 {
    if a == 0 || b == 0 {
        return 0;
    }
    let order = t.q - 1;
    let s = t.log[a as usize] + t.log[b as usize];
    t.exp[(if s >= order { s - order } else { s }) as usize]
}

/// An element carrying its field, for callers that need mixed-field checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Elem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }

    fn same_field(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::MixedFields(
                self.field.descriptor(),
                other.field.descriptor(),
            ))
        }
    }

    pub fn arith(&self, op: ArithOp, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        let f = &self.field;
        let value = match op {
            ArithOp::Add => f.add(self.value, other.value),
            ArithOp::Sub => f.sub(self.value, other.value),
            ArithOp::Mul => f.mul(self.value, other.value),
        };
        Ok(f.element(value))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }

    pub fn is_square(&self) -> bool {
        self.field.is_square(self.value)
    }

    pub fn sqrt(&self) -> Result<FieldElement, FieldError> {
        Ok(self.field.element(self.field.sqrt(self.value)?))
    }
}

/// `F_{q^2}` together with the embedding of its base field `F_q`.
#[derive(Clone, Debug)]
pub struct QuadraticExtension {
    base: Field,
    ext: Field,
    embed: Vec<Elem>,
    /// Inverse of `embed` on its image.
    project: Vec<Option<Elem>>,
}

impl QuadraticExtension {
    /// Builds `F_{p^{2n}}` and embeds `F_{p^n}` by sending `x` to the smallest
    /// root of the base modulus. Requires `q^2 <= 2^20`.
    pub fn new(base: &Field) -> Result<QuadraticExtension, FieldError> {
        let ext = Field::new(base.p() as u64, 2 * base.n())?;
        let modulus = base.modulus();
        let root = ext
            .elements()
            .find(|&z| {
                let v = modulus.iter().rev().fold(Elem::ZERO, |acc, &c| {
                    ext.add(ext.mul(acc, z), ext.from_int(c as i64))
                });
                v.is_zero()
            })
            .expect("a degree-n polynomial irreducible over F_p splits in F_{p^2n}");

        let mut embed = Vec::with_capacity(base.q() as usize);
        for x in base.elements() {
            let image = base.coeffs(x).iter().rev().fold(Elem::ZERO, |acc, &c| {
                ext.add(ext.mul(acc, root), ext.from_int(c as i64))
            });
            embed.push(image);
        }
        let mut project = vec![None; ext.q() as usize];
        for (i, &e) in embed.iter().enumerate() {
            project[e.index()] = Some(Elem(i as u32));
        }
        let qe = QuadraticExtension {
            base: base.clone(),
            ext,
            embed,
            project,
        };
        debug_assert!(qe.check_homomorphism().is_ok());
        Ok(qe)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn ext(&self) -> &Field {
        &self.ext
    }

    #[inline]
    pub fn embed(&self, x: Elem) -> Elem {
        self.embed[x.index()]
    }

    /// Preimage of an extension element lying in the embedded base field.
    #[inline]
    pub fn project(&self, y: Elem) -> Option<Elem> {
        self.project[y.index()]
    }

    /// Square root in the extension of a base element. Every base element
    /// is a square in `F_{q^2}`.
    pub fn sqrt_in_ext(&self, x: Elem) -> Elem {
        self.ext
            .sqrt(self.embed(x))
            .expect("base elements are squares in the quadratic extension")
    }

    /// Exhaustively checks that the embedding is an injective ring
    /// homomorphism. Returns the first failing pair on error.
    pub fn check_homomorphism(&self) -> Result<(), (Elem, Elem)> {
        let (b, e) = (&self.base, &self.ext);
        if self.embed(Elem::ONE) != Elem::ONE {
            return Err((Elem::ONE, Elem::ONE));
        }
        let mut seen = vec![false; e.q() as usize];
        for x in b.elements() {
            if std::mem::replace(&mut seen[self.embed(x).index()], true) {
                return Err((x, x));
            }
            for y in b.elements() {
                let sum_ok = self.embed(b.add(x, y)) == e.add(self.embed(x), self.embed(y));
                let prod_ok = self.embed(b.mul(x, y)) == e.mul(self.embed(x), self.embed(y));
                if !sum_ok || !prod_ok {
                    return Err((x, y));
                }
            }
        }
        Ok(())
    }
}
