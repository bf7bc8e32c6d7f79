//! Exact arithmetic for small finite fields F_{p^m}.
//!
//! Fields are realized as F_p[x]/(f) with `f` the lexicographically smallest
//! monic irreducible polynomial of the requested degree, so construction is
//! deterministic across runs. Elements are coefficient vectors in ascending
//! powers of the canonical generator `g` (the class of `x`). The canonical
//! element order compares coefficient sequences lexicographically starting
//! from the constant coefficient.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on field cardinality for element enumeration (scans).
pub const DEFAULT_ENUM_BOUND: u128 = 1 << 20;

/// Primality by trial division; inputs here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

// ---------------------------------------------------------------------------
// Dense polynomials over F_p (used for modulus search and element reduction).
// ---------------------------------------------------------------------------

mod fp {
    /// Trim trailing zeros.
    pub fn norm(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn deg(v: &[u64]) -> Option<usize> {
        if v.is_empty() {
            None
        } else {
            Some(v.len() - 1)
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai * bj) % p;
            }
        }
        norm(&mut out);
        out
    }

    /// Remainder of `a` modulo monic `f`.
    pub fn rem_monic(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        let n = f.len() - 1;
        let mut r = a.to_vec();
        norm(&mut r);
        while r.len() > n {
            let c = *r.last().unwrap();
            let d = r.len() - 1 - n;
            if c != 0 {
                for (k, &fk) in f.iter().enumerate().take(n) {
                    let sub = (c * fk) % p;
                    r[d + k] = (r[d + k] + p - sub) % p;
                }
            }
            r.pop();
            norm(&mut r);
        }
        r
    }

    /// Division with remainder by a general (not necessarily monic) divisor.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut bb = b.to_vec();
        norm(&mut bb);
        assert!(!bb.is_empty(), "division by zero polynomial");
        let db = bb.len() - 1;
        let lb_inv = inv_mod(bb[db], p);
        let mut r = a.to_vec();
        norm(&mut r);
        let mut q = vec![0u64; r.len().saturating_sub(db)];
        while r.len() > db {
            let d = r.len() - 1 - db;
            let c = (r[r.len() - 1] * lb_inv) % p;
            q[d] = c;
            for (k, &bk) in bb.iter().enumerate() {
                let sub = (c * bk) % p;
                r[d + k] = (r[d + k] + p - sub) % p;
            }
            norm(&mut r);
        }
        norm(&mut q);
        (q, r)
    }

    pub fn inv_mod(a: u64, p: u64) -> u64 {
        // extended euclid on integers
        let (mut t, mut new_t) = (0i128, 1i128);
        let (mut r, mut new_r) = (p as i128, (a % p) as i128);
        while new_r != 0 {
            let quot = r / new_r;
            (t, new_t) = (new_t, t - quot * new_t);
            (r, new_r) = (new_r, r - quot * new_r);
        }
        assert!(r == 1, "not invertible");
        (((t % p as i128) + p as i128) % p as i128) as u64
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        norm(&mut a);
        norm(&mut b);
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b, p);
            a = b;
            b = r;
        }
        if let Some(&lead) = a.last() {
            let li = inv_mod(lead, p);
            for c in a.iter_mut() {
                *c = (*c * li) % p;
            }
        }
        a
    }

    /// x^(p^k) mod f, by repeated p-th powering.
    pub fn frob_pow_x(f: &[u64], p: u64, k: usize) -> Vec<u64> {
        let mut h = vec![0, 1]; // x
        h = rem_monic(&h, f, p);
        for _ in 0..k {
            h = pow_p(&h, f, p);
        }
        h
    }

    /// h^p mod f for small p.
    pub fn pow_p(h: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = rem_monic(&mul(&acc, h, p), f, p);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Field handles.
// ---------------------------------------------------------------------------

/// Identifies a field by content; used as cache key for embeddings.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct FieldKey {
    p: u64,
    m: usize,
    modulus: Vec<u64>,
}

struct FieldRepr {
    p: u64,
    m: usize,
    /// Monic modulus, ascending coefficients, length m+1.
    modulus: Vec<u64>,
    order: u128,
    /// Columns of the matrix of x -> x^p in the basis 1, g, ..., g^(m-1).
    frob_p: OnceLock<Vec<Vec<u64>>>,
}

/// A handle to a finite field F_{p^m}; cheap to clone and thread-safe.
#[derive(Clone)]
pub struct Field(Arc<FieldRepr>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.0.p, self.0.m)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.0.p, self.0.m)
    }
}

impl Field {
    /// Builds F_{p^m} on the lexicographically smallest monic irreducible
    /// modulus of degree m. Fields larger than the enumeration bound are
    /// rejected.
    pub fn new(p: u64, m: usize) -> Result<Field> {
        Self::bounded(p, m, DEFAULT_ENUM_BOUND)
    }

    /// Same as [`Field::new`] with an explicit cardinality bound.
    pub fn bounded(p: u64, m: usize, bound: u128) -> Result<Field> {
        let order = order_checked(p, m)?;
        if order > bound {
            return Err(Error::BoundExceeded { order, bound });
        }
        Self::build(p, m)
    }

    /// Internal constructor without the enumeration bound; scanning
    /// operations on such fields still refuse to run. Used for ambient
    /// escalation where only linear algebra is performed.
    pub fn unbounded(p: u64, m: usize) -> Result<Field> {
        order_checked(p, m)?;
        Self::build(p, m)
    }

    /// Builds a field on a caller-supplied monic modulus (ascending
    /// coefficients, length m+1). Irreducibility is certified.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::CompositeModulus { p });
        }
        if modulus.len() < 2 || *modulus.last().unwrap() % p != 1 {
            return Err(Error::InvalidConfig {
                field: "modulus",
                reason: "must be monic of degree >= 1".into(),
            });
        }
        let m = modulus.len() - 1;
        order_checked(p, m)?;
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus { p });
        }
        Ok(Field(Arc::new(FieldRepr {
            p,
            m,
            order: order_checked(p, m)?,
            modulus,
            frob_p: OnceLock::new(),
        })))
    }

    fn build(p: u64, m: usize) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::CompositeModulus { p });
        }
        if m == 0 {
            return Err(Error::InvalidConfig {
                field: "m",
                reason: "degree must be >= 1".into(),
            });
        }
        if p > (1 << 20) {
            return Err(Error::BoundExceeded {
                order: p as u128,
                bound: 1 << 20,
            });
        }
        let modulus = smallest_irreducible(p, m);
        Ok(Field(Arc::new(FieldRepr {
            p,
            m,
            order: order_checked(p, m)?,
            modulus,
            frob_p: OnceLock::new(),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.m
    }

    pub fn order(&self) -> u128 {
        self.0.order
    }

    /// Monic modulus, ascending coefficients.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub(crate) fn key(&self) -> FieldKey {
        FieldKey {
            p: self.0.p,
            m: self.0.m,
            modulus: self.0.modulus.clone(),
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coeffs: vec![0; self.0.m],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.scalar(1)
    }

    /// The element `c * 1` for a prime-field scalar c.
    pub fn scalar(&self, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.0.m];
        coeffs[0] = c % self.0.p;
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// The canonical generator g (class of x in F_p[x]/(modulus)).
    pub fn generator(&self) -> FieldElement {
        if self.0.m == 1 {
            // x reduces to -modulus[0]
            return self.scalar(self.0.p - self.0.modulus[0] % self.0.p);
        }
        let mut coeffs = vec![0; self.0.m];
        coeffs[1] = 1;
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// Element from ascending coefficients (length <= m, reduced mod p).
    pub fn from_coeffs(&self, cs: &[u64]) -> FieldElement {
        assert!(cs.len() <= self.0.m, "coefficient vector too long");
        let mut coeffs = vec![0; self.0.m];
        for (i, &c) in cs.iter().enumerate() {
            coeffs[i] = c % self.0.p;
        }
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// Inverse of [`FieldElement::index`]; canonical order is increasing index.
    pub fn from_index(&self, mut idx: u128) -> FieldElement {
        let m = self.0.m;
        let p = self.0.p as u128;
        let mut coeffs = vec![0u64; m];
        for j in (0..m).rev() {
            coeffs[j] = (idx % p) as u64;
            idx /= p;
        }
        // digits were produced least-significant-last so that coeffs[0] is
        // the most significant digit, matching lexicographic element order
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// Iterates all elements in canonical order. The caller is responsible
    /// for only enumerating fields of reasonable size.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.order).map(move |i| self.from_index(i))
    }

    fn frob_columns(&self) -> &Vec<Vec<u64>> {
        self.0.frob_p.get_or_init(|| {
            let p = self.0.p;
            let f = &self.0.modulus;
            let xp = fp::frob_pow_x(f, p, 1);
            let mut cols = Vec::with_capacity(self.0.m);
            let mut cur = vec![1u64]; // (x^0)^p = 1
            for j in 0..self.0.m {
                if j > 0 {
                    cur = fp::rem_monic(&fp::mul(&cur, &xp, p), f, p);
                }
                let mut col = cur.clone();
                col.resize(self.0.m, 0);
                cols.push(col);
            }
            cols
        })
    }

    /// Parses an element literal like `2`, `1+2*g`, `g^3+2`, also accepting
    /// `i` as an alias of the generator symbol.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::InvalidConfig {
                field: "element",
                reason: "empty literal".into(),
            });
        }
        let mut out = self.zero();
        let mut term = String::new();
        let mut sign = 1i64;
        let mut chars = cleaned.chars().peekable();
        let flush = |term: &str, sign: i64, out: &mut FieldElement, fld: &Field| -> Result<()> {
            if term.is_empty() {
                return Err(Error::InvalidConfig {
                    field: "element",
                    reason: format!("dangling sign in `{s}`"),
                });
            }
            let (coeff_str, pow) = if let Some(pos) = term.find(['g', 'i']) {
                let before = &term[..pos];
                let after = &term[pos + 1..];
                let pow = if after.is_empty() {
                    1usize
                } else if let Some(stripped) = after.strip_prefix('^') {
                    stripped.parse::<usize>().map_err(|_| Error::InvalidConfig {
                        field: "element",
                        reason: format!("bad exponent in `{term}`"),
                    })?
                } else {
                    return Err(Error::InvalidConfig {
                        field: "element",
                        reason: format!("unexpected trailing `{after}`"),
                    });
                };
                let before = before.strip_suffix('*').unwrap_or(before);
                (before.to_string(), pow)
            } else {
                (term.to_string(), 0usize)
            };
            let c: u64 = if coeff_str.is_empty() {
                1
            } else {
                coeff_str.parse().map_err(|_| Error::InvalidConfig {
                    field: "element",
                    reason: format!("bad coefficient `{coeff_str}`"),
                })?
            };
            let p = fld.p();
            let c = if sign < 0 { (p - c % p) % p } else { c % p };
            let mut mono = fld.one();
            let g = fld.generator();
            for _ in 0..pow {
                mono = &mono * &g;
            }
            *out = &*out + &mono.scale(c);
            Ok(())
        };
        while let Some(c) = chars.next() {
            match c {
                '+' | '-' => {
                    flush(&term, sign, &mut out, self)?;
                    term.clear();
                    sign = if c == '-' { -1 } else { 1 };
                }
                _ => term.push(c),
            }
        }
        flush(&term, sign, &mut out, self)?;
        Ok(out)
    }
}

fn order_checked(p: u64, m: usize) -> Result<u128> {
    let mut order: u128 = 1;
    for _ in 0..m {
        order = order.checked_mul(p as u128).ok_or(Error::BoundExceeded {
            order: u128::MAX,
            bound: u128::MAX,
        })?;
    }
    Ok(order)
}

/// Lexicographically smallest monic irreducible of degree m over F_p,
/// comparing non-leading coefficient sequences (c0, c1, ...) ascending.
fn smallest_irreducible(p: u64, m: usize) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1]; // x
    }
    let total = (0..m).fold(1u128, |acc, _| acc * p as u128);
    // candidates with c0 = 0 are divisible by x; start past them
    let first = total / p as u128;
    for idx in first..total {
        let mut cand = vec![0u64; m + 1];
        cand[m] = 1;
        let mut rest = idx;
        for j in (0..m).rev() {
            // digits assigned so that c0 is the most significant digit
            cand[j] = (rest % p as u128) as u64;
            rest /= p as u128;
        }
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists");
}

/// Irreducibility certificate. Small degrees use a trial factor scan over all
/// monic divisors up to degree m/2; large internal fields use the standard
/// x^(p^k) gcd criteria.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let scan_ops: u128 = (1..=m / 2).map(|d| (0..d).fold(1u128, |a, _| a * p as u128)).sum();
    if scan_ops <= 1 << 16 {
        for d in 1..=m / 2 {
            let count = (0..d).fold(1u128, |a, _| a * p as u128);
            for idx in 0..count {
                let mut g = vec![0u64; d + 1];
                g[d] = 1;
                let mut rest = idx;
                for j in 0..d {
                    g[j] = (rest % p as u128) as u64;
                    rest /= p as u128;
                }
                let (_, r) = fp::divrem(f, &g, p);
                if r.is_empty() {
                    return false;
                }
            }
        }
        true
    } else {
        // x^(p^m) == x mod f, and gcd(x^(p^(m/r)) - x, f) = 1 for prime r | m
        let xpm = fp::frob_pow_x(f, p, m);
        let x = fp::rem_monic(&[0, 1], f, p);
        if xpm != x {
            return false;
        }
        let mut rest = m;
        let mut primes = vec![];
        let mut d = 2;
        while d * d <= rest {
            if rest % d == 0 {
                primes.push(d);
                while rest % d == 0 {
                    rest /= d;
                }
            }
            d += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        for r in primes {
            let h = fp::frob_pow_x(f, p, m / r);
            let mut diff = h.clone();
            diff.resize(diff.len().max(2), 0);
            // h - x
            diff[1] = (diff[1] + p - 1) % p;
            fp::norm(&mut diff);
            let g = fp::gcd(&diff, f, p);
            if fp::deg(&g) != Some(0) {
                return false;
            }
        }
        true
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Field", 3)?;
        st.serialize_field("p", &self.0.p)?;
        st.serialize_field("m", &self.0.m)?;
        st.serialize_field("modulus", &self.0.modulus)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct FieldDe {
    p: u64,
    #[allow(dead_code)]
    m: usize,
    modulus: Vec<u64>,
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FieldDe::deserialize(d)?;
        Field::with_modulus(raw.p, &raw.modulus).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Elements.
// ---------------------------------------------------------------------------

/// An element of a [`Field`], stored as coefficients over the prime field in
/// ascending powers of the canonical generator.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    coeffs: Vec<u64>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}
impl Eq for FieldElement {}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    /// Canonical order: lexicographic on coefficient sequences.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "g")?,
                (1, c) => write!(f, "{c}*g")?,
                (i, 1) => write!(f, "g^{i}")?,
                (i, c) => write!(f, "{c}*g^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Canonical index: the coefficient sequence read as base-p digits with
    /// the constant coefficient most significant.
    pub fn index(&self) -> u128 {
        let p = self.field.p() as u128;
        self.coeffs.iter().fold(0u128, |acc, &c| acc * p + c as u128)
    }

    /// Multiplication by a prime-field scalar.
    pub fn scale(&self, c: u64) -> FieldElement {
        let p = self.field.p();
        let c = c % p;
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * c % p).collect(),
        }
    }

    pub fn pow(&self, mut e: u128) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inverse(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        // extended euclid over F_p[x]
        let p = self.field.p();
        let f = self.field.modulus().to_vec();
        let mut a = self.coeffs.clone();
        fp::norm(&mut a);
        let (mut r0, mut r1) = (f, a);
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (vec![], vec![1]);
        while !r1.is_empty() {
            let (q, r) = fp::divrem(&r0, &r1, p);
            let qs1 = fp::mul(&q, &s1, p);
            let mut s = s0.clone();
            s.resize(s.len().max(qs1.len()), 0);
            for (i, &c) in qs1.iter().enumerate() {
                s[i] = (s[i] + p - c) % p;
            }
            fp::norm(&mut s);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 = gcd (a unit since modulus is irreducible and self != 0)
        let lead_inv = fp::inv_mod(*r0.last().unwrap(), p);
        let mut out = s0;
        for c in out.iter_mut() {
            *c = *c * lead_inv % p;
        }
        out.resize(self.field.degree(), 0);
        Ok(FieldElement {
            field: self.field.clone(),
            coeffs: out,
        })
    }

    /// a^(p^k): iterated application of the cached Frobenius matrix.
    pub fn frobenius_p(&self, k: usize) -> FieldElement {
        let m = self.field.degree();
        let k = k % m;
        if k == 0 {
            return self.clone();
        }
        let cols = self.field.frob_columns();
        let p = self.field.p();
        let mut cur = self.coeffs.clone();
        for _ in 0..k {
            let mut out = vec![0u64; m];
            for (j, &aj) in cur.iter().enumerate() {
                if aj == 0 {
                    continue;
                }
                for (i, &cij) in cols[j].iter().enumerate() {
                    out[i] = (out[i] + aj * cij) % p;
                }
            }
            cur = out;
        }
        FieldElement {
            field: self.field.clone(),
            coeffs: cur,
        }
    }

    /// a^(q^i) for q = p^e: the (e*i)-fold p-power Frobenius.
    pub fn frq(&self, e: usize, i: usize) -> FieldElement {
        let m = self.field.degree() as u128;
        let k = (e as u128 % m) * (i as u128 % m) % m;
        self.frobenius_p(k as usize)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl<'a, 'b> std::ops::$trait<&'b FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &'b FieldElement) -> FieldElement {
                self.$impl_fn(rhs)
            }
        }
        impl std::ops::$trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$impl_fn(&rhs)
            }
        }
        impl<'a> std::ops::$trait<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &'a FieldElement) -> FieldElement {
                (&self).$impl_fn(rhs)
            }
        }
    };
}

impl FieldElement {
    fn add_impl(&self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch in +");
        let p = self.field.p();
        FieldElement {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
        }
    }

    fn sub_impl(&self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch in -");
        let p = self.field.p();
        FieldElement {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| (a + p - b) % p)
                .collect(),
        }
    }

    fn mul_impl(&self, rhs: &FieldElement) -> FieldElement {
        assert!(self.field == rhs.field, "field mismatch in *");
        let p = self.field.p();
        let conv = fp::mul(&self.coeffs, &rhs.coeffs, p);
        let mut red = fp::rem_monic(&conv, self.field.modulus(), p);
        red.resize(self.field.degree(), 0);
        FieldElement {
            field: self.field.clone(),
            coeffs: red,
        }
    }

    fn div_impl(&self, rhs: &FieldElement) -> FieldElement {
        let inv = rhs.inverse().expect("division by zero field element");
        self.mul_impl(&inv)
    }
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let p = self.field.p();
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|&a| (p - a) % p).collect(),
        }
    }
}
impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

// ---------------------------------------------------------------------------
// Root scans.
// ---------------------------------------------------------------------------

/// Horner evaluation of a dense polynomial (ascending coefficients).
pub fn eval_poly(coeffs: &[FieldElement], x: &FieldElement) -> FieldElement {
    let field = x.field();
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// All roots of `poly` (coefficients over `field` or a subfield of it) lying
/// in `field`, by exhaustive scan. Canonically ordered, duplicate-free.
pub fn all_roots(poly: &[FieldElement], field: &Field) -> Result<Vec<FieldElement>> {
    if poly.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroPolynomial);
    }
    if field.order() > DEFAULT_ENUM_BOUND {
        return Err(Error::BoundExceeded {
            order: field.order(),
            bound: DEFAULT_ENUM_BOUND,
        });
    }
    let lifted: Vec<FieldElement> = poly
        .iter()
        .map(|c| embed(c, field))
        .collect::<Result<_>>()?;
    let mut out = vec![];
    for x in field.elements() {
        if eval_poly(&lifted, &x).is_zero() {
            out.push(x);
        }
    }
    Ok(out)
}

/// All x with x^n = a in a's field, by exhaustive scan.
pub fn nth_roots(a: &FieldElement, n: u64) -> Result<Vec<FieldElement>> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let field = a.field();
    if field.order() > DEFAULT_ENUM_BOUND {
        return Err(Error::BoundExceeded {
            order: field.order(),
            bound: DEFAULT_ENUM_BOUND,
        });
    }
    let mut out = vec![];
    for x in field.elements() {
        if x.is_zero() {
            continue;
        }
        if x.pow(n as u128) == *a {
            out.push(x);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Subfield embeddings.
// ---------------------------------------------------------------------------

type EmbedTable = Vec<FieldElement>;
type EmbedCache = Mutex<HashMap<(FieldKey, FieldKey), Arc<EmbedTable>>>;

fn embed_cache() -> &'static EmbedCache {
    static CACHE: OnceLock<EmbedCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Ring embedding of `a` into `sup`, determined by mapping the generator of
/// a's field to the canonically smallest root of its modulus inside `sup`.
/// The choice is cached so the embedding is consistent process-wide.
pub fn embed(a: &FieldElement, sup: &Field) -> Result<FieldElement> {
    let sub = a.field();
    if sub == sup {
        return Ok(a.clone());
    }
    if sub.p() != sup.p() || sup.degree() % sub.degree() != 0 {
        return Err(Error::NoEmbedding {
            sub: sub.degree(),
            sup: sup.degree(),
        });
    }
    let table = embed_table(sub, sup)?;
    let mut out = sup.zero();
    for (j, &c) in a.coeffs().iter().enumerate() {
        if c != 0 {
            out = &out + &table[j].scale(c);
        }
    }
    Ok(out)
}

fn embed_table(sub: &Field, sup: &Field) -> Result<Arc<EmbedTable>> {
    let key = (sub.key(), sup.key());
    if let Some(t) = embed_cache().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let root = smallest_modulus_root(sub, sup)?;
    let mut images = Vec::with_capacity(sub.degree());
    let mut cur = sup.one();
    for _ in 0..sub.degree() {
        images.push(cur.clone());
        cur = &cur * &root;
    }
    let arc = Arc::new(images);
    // write-once per key: racing builders compute the same deterministic table
    let mut guard = embed_cache().lock().unwrap();
    let entry = guard.entry(key).or_insert_with(|| arc.clone());
    Ok(entry.clone())
}

fn smallest_modulus_root(sub: &Field, sup: &Field) -> Result<FieldElement> {
    let poly: Vec<FieldElement> = sub.modulus().iter().map(|&c| sup.scalar(c)).collect();
    if sup.order() <= DEFAULT_ENUM_BOUND {
        let roots = all_roots(&poly, sup)?;
        return roots.into_iter().next().ok_or(Error::NoEmbedding {
            sub: sub.degree(),
            sup: sup.degree(),
        });
    }
    // Large field: deterministic split of the (totally split, separable)
    // modulus, then minimize over the Frobenius orbit of one root.
    let one = epoly::roots_split(&poly, sup)?;
    let mut best = one.clone();
    let mut cur = one;
    for _ in 1..sub.degree() {
        cur = cur.frobenius_p(1);
        if cur < best {
            best = cur.clone();
        }
    }
    Ok(best)
}

/// Dense polynomial helpers over [`FieldElement`] coefficients, used for
/// deterministic root extraction in fields too large to scan.
pub(crate) mod epoly {
    use super::*;

    pub fn norm(v: &mut Vec<FieldElement>) {
        while v.last().map(|c| c.is_zero()).unwrap_or(false) {
            v.pop();
        }
    }

    pub fn rem(a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        let mut r = a.to_vec();
        norm(&mut r);
        let mut b = b.to_vec();
        norm(&mut b);
        assert!(!b.is_empty());
        let db = b.len() - 1;
        let lb_inv = b[db].inverse().expect("nonzero lead");
        while r.len() > db {
            let c = &r[r.len() - 1] * &lb_inv;
            let d = r.len() - 1 - db;
            for (k, bk) in b.iter().enumerate() {
                let t = &c * bk;
                r[d + k] = &r[d + k] - &t;
            }
            norm(&mut r);
        }
        r
    }

    pub fn gcd_monic(a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        norm(&mut a);
        norm(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        if let Some(lead) = a.last().cloned() {
            let li = lead.inverse().unwrap();
            for c in a.iter_mut() {
                *c = &*c * &li;
            }
        }
        a
    }

    pub fn mul_mod(
        a: &[FieldElement],
        b: &[FieldElement],
        f: &[FieldElement],
        field: &Field,
    ) -> Vec<FieldElement> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![field.zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                out[i + j] = &out[i + j] + &(ai * bj);
            }
        }
        rem(&out, f)
    }

    pub fn pow_mod(
        base: &[FieldElement],
        mut e: u128,
        f: &[FieldElement],
        field: &Field,
    ) -> Vec<FieldElement> {
        let mut b = rem(base, f);
        let mut acc = vec![field.one()];
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &b, f, field);
            }
            b = mul_mod(&b, &b, f, field);
            e >>= 1;
        }
        acc
    }

    /// One root of a squarefree polynomial that splits completely over
    /// `field` (odd characteristic). Deterministic: shifts are tried in
    /// canonical element order.
    pub fn roots_split(poly: &[FieldElement], field: &Field) -> Result<FieldElement> {
        assert!(field.p() % 2 == 1, "splitting requires odd characteristic");
        let mut f = poly.to_vec();
        norm(&mut f);
        let lead = f.last().unwrap().inverse().unwrap();
        for c in f.iter_mut() {
            *c = &*c * &lead;
        }
        let half = (field.order() - 1) / 2;
        let mut stack = vec![f];
        while let Some(f) = stack.pop() {
            let d = f.len() - 1;
            if d == 0 {
                continue;
            }
            if d == 1 {
                return Ok(-&f[0]); // monic x + c
            }
            let mut shift_idx: u128 = 0;
            loop {
                let s = field.from_index(shift_idx);
                shift_idx += 1;
                let base = vec![s, field.one()]; // x + s
                let mut w = pow_mod(&base, half, &f, field);
                // w - 1
                if w.is_empty() {
                    w = vec![field.zero()];
                }
                w[0] = &w[0] - &field.one();
                norm(&mut w);
                if w.is_empty() {
                    continue;
                }
                let g = gcd_monic(&w, &f);
                let dg = g.len().saturating_sub(1);
                if dg > 0 && dg < d {
                    let q = quotient_exact(&f, &g, field);
                    stack.push(g);
                    stack.push(q);
                    break;
                }
                if shift_idx > field.order() {
                    return Err(Error::AmbientTooSmall(
                        "root splitting failed to converge".into(),
                    ));
                }
            }
        }
        Err(Error::AmbientTooSmall("no root found by splitting".into()))
    }

    fn quotient_exact(a: &[FieldElement], b: &[FieldElement], field: &Field) -> Vec<FieldElement> {
        let mut r = a.to_vec();
        norm(&mut r);
        let db = b.len() - 1;
        let lb_inv = b[db].inverse().unwrap();
        let mut q = vec![field.zero(); r.len() - db];
        while r.len() > db {
            let c = &r[r.len() - 1] * &lb_inv;
            let d = r.len() - 1 - db;
            q[d] = c.clone();
            for (k, bk) in b.iter().enumerate() {
                let t = &c * bk;
                r[d + k] = &r[d + k] - &t;
            }
            norm(&mut r);
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> Field {
        Field::new(3, 2).unwrap()
    }

    #[test]
    fn smallest_modulus_is_t2_plus_1_over_f3() {
        // independent lex scan over monic quadratics, certified by root absence
        let p = 3u64;
        let mut expected = None;
        'outer: for c0 in 0..p {
            for c1 in 0..p {
                let has_root = (0..p).any(|x| (x * x + c1 * x + c0) % p == 0);
                if !has_root {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        assert_eq!(f9().modulus(), expected.unwrap().as_slice());
        assert_eq!(f9().modulus(), &[1, 0, 1]); // t^2 + 1
    }

    #[test]
    fn prime_field_modulus_is_t() {
        let f2 = Field::new(2, 1).unwrap();
        assert_eq!(f2.modulus(), &[0, 1]);
        assert_eq!(f2.order(), 2);
    }

    #[test]
    fn multiplicative_group_order() {
        assert_eq!(f9().order() - 1, 8);
    }

    #[test]
    fn composite_modulus_rejected() {
        assert!(matches!(
            Field::new(6, 2),
            Err(Error::CompositeModulus { p: 6 })
        ));
    }

    #[test]
    fn bound_exceeded_rejected() {
        assert!(matches!(Field::new(2, 21), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn frobenius_on_f9() {
        let f = f9();
        let i = f.generator();
        let one = f.one();
        let a = &one + &i; // 1 + i
        // oracle: cube by repeated multiplication
        let cube = &(&a * &a) * &a;
        assert_eq!(a.frq(1, 1), cube); // q = 3 = p^1
        assert_eq!(cube, f.from_coeffs(&[1, 2])); // 1 + 2i
        assert_eq!(a.frq(1, 0), a);
        // prime subfield is fixed
        let two = f.scalar(2);
        assert_eq!(two.frq(1, 5), two);
    }

    #[test]
    fn frobenius_order_m_is_identity() {
        let f = f9();
        for a in f.elements() {
            assert_eq!(a.frobenius_p(2), a);
        }
    }

    #[test]
    fn all_roots_t4_minus_1_over_f9() {
        let f = f9();
        let i = f.generator();
        let minus1 = -&f.one();
        // t^4 - 1
        let poly = vec![minus1, f.zero(), f.zero(), f.zero(), f.one()];
        let roots = all_roots(&poly, &f).unwrap();
        // oracle: direct evaluation per element, written out independently
        let mut expect: Vec<FieldElement> = f
            .elements()
            .filter(|x| {
                let x4 = &(&(x * x) * x) * x;
                x4 == f.one()
            })
            .collect();
        expect.sort();
        assert_eq!(roots, expect);
        let two_i = i.scale(2);
        assert_eq!(roots.len(), 4);
        assert!(roots.contains(&f.one()) && roots.contains(&f.scalar(2)));
        assert!(roots.contains(&i) && roots.contains(&two_i));
    }

    #[test]
    fn all_roots_edge_cases() {
        let f = f9();
        let c = f.from_coeffs(&[2, 1]);
        // t - c
        let poly = vec![-&c, f.one()];
        assert_eq!(all_roots(&poly, &f).unwrap(), vec![c]);
        // irreducible quadratic t^2 + 1 over F_3
        let f3 = Field::new(3, 1).unwrap();
        let poly = vec![f3.one(), f3.zero(), f3.one()];
        assert!(all_roots(&poly, &f3).unwrap().is_empty());
        let zero = vec![f.zero()];
        assert!(matches!(all_roots(&zero, &f), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn nth_roots_match_gcd_count() {
        let f = f9();
        let roots = nth_roots(&f.one(), 4).unwrap();
        assert_eq!(roots.len(), 4); // gcd(4, 8)
        let a = f.from_coeffs(&[1, 2]); // 1+2i generates F_9^*
        // oracle: order of 1+2i is 8 (not divisible into 8/gcd classes for n=4)
        let mut pow = f.one();
        let mut ord = 0;
        for k in 1..=8 {
            pow = &pow * &a;
            if pow.is_one() {
                ord = k;
                break;
            }
        }
        assert_eq!(ord, 8);
        assert!(nth_roots(&a, 4).unwrap().is_empty());
        assert_eq!(nth_roots(&a, 1).unwrap(), vec![a.clone()]);
        assert!(matches!(nth_roots(&f.zero(), 3), Err(Error::ZeroInput)));
    }

    #[test]
    fn nth_roots_size_invariant() {
        let f = f9();
        for a in f.elements().filter(|a| !a.is_zero()) {
            for n in 1..=8u64 {
                let k = nth_roots(&a, n).unwrap().len() as u64;
                let g = gcd_u64(n, 8);
                assert!(k == 0 || k == g, "bad root count {k} for n={n}");
            }
        }
    }

    fn gcd_u64(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd_u64(b, a % b)
        }
    }

    #[test]
    fn embed_prime_subfield_and_relation() {
        let f3 = Field::new(3, 1).unwrap();
        let f9 = f9();
        let two = f3.scalar(2);
        assert_eq!(embed(&two, &f9).unwrap(), f9.scalar(2));
        let f81 = Field::new(3, 4).unwrap();
        let i = f9.generator();
        let img = embed(&i, &f81).unwrap();
        // defining relation i^2 = -1 is preserved
        assert_eq!(&img * &img, -&f81.one());
    }

    #[test]
    fn embed_is_ring_morphism() {
        let f9 = f9();
        let f81 = Field::new(3, 4).unwrap();
        for ai in 0..9u128 {
            for bi in 0..9u128 {
                let a = f9.from_index(ai);
                let b = f9.from_index(bi);
                let ea = embed(&a, &f81).unwrap();
                let eb = embed(&b, &f81).unwrap();
                assert_eq!(embed(&(&a * &b), &f81).unwrap(), &ea * &eb);
                assert_eq!(embed(&(&a + &b), &f81).unwrap(), &ea + &eb);
            }
        }
        // injectivity on the full small field
        let mut images: Vec<_> = f9.elements().map(|a| embed(&a, &f81).unwrap()).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), 9);
    }

    #[test]
    fn embed_requires_divisibility() {
        let f9 = f9();
        let f27 = Field::new(3, 3).unwrap();
        let i = f9.generator();
        assert!(matches!(embed(&i, &f27), Err(Error::NoEmbedding { .. })));
    }

    #[test]
    fn field_axioms_sampled() {
        let f = Field::new(3, 4).unwrap();
        let pts: Vec<_> = [3u128, 17, 29, 44, 61, 80, 5, 71].iter().map(|&i| f.from_index(i)).collect();
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    assert_eq!(&(a * b) * c, a * &(b * c));
                    assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                }
            }
            if !a.is_zero() {
                assert!((a * &a.inverse().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let f = f9();
        let a = f.parse_element("1+2i").unwrap();
        assert_eq!(a, f.from_coeffs(&[1, 2]));
        assert_eq!(f.parse_element("2+2*g").unwrap(), f.from_coeffs(&[2, 2]));
        assert_eq!(f.parse_element("g").unwrap(), f.generator());
        assert_eq!(f.parse_element("0").unwrap(), f.zero());
        for idx in 0..9u128 {
            let x = f.from_index(idx);
            let s = format!("{x}");
            assert_eq!(f.parse_element(&s).unwrap(), x);
        }
    }

    #[test]
    fn element_order_is_lexicographic() {
        let f = f9();
        let elts: Vec<_> = f.elements().collect();
        for w in elts.windows(2) {
            assert!(w[0] < w[1]);
            assert!(w[0].coeffs() < w[1].coeffs());
        }
    }

    #[test]
    fn unbounded_field_and_large_embedding() {
        // degree 16 over F_3 exceeds the scan bound; nullspace-style users
        // still need embeddings, exercised here via the splitting path
        let f9 = f9();
        let big = Field::unbounded(3, 16).unwrap();
        let i = embed(&f9.generator(), &big).unwrap();
        assert_eq!(&i * &i, -&big.one());
        let a = f9.from_coeffs(&[2, 1]);
        let b = f9.from_coeffs(&[1, 1]);
        let ea = embed(&a, &big).unwrap();
        let eb = embed(&b, &big).unwrap();
        assert_eq!(embed(&(&a * &b), &big).unwrap(), &ea * &eb);
    }
}
