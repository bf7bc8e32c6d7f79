//! The twisted polynomial ring L{tau} with tau a = a^q tau.
//!
//! Only right division and right gcd are provided; every use downstream is a
//! common *right* divisor. The twist q = p^e is fixed per polynomial and
//! mixing twists is a construction error, not a silent coercion.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{self, Field, FieldElement, DEFAULT_ENUM_BOUND};

/// A twisted polynomial sum a_i tau^i over a field containing F_q.
#[derive(Clone, PartialEq, Eq)]
pub struct SkewPoly {
    field: Field,
    twist_e: usize,
    /// Ascending tau powers; the last entry is nonzero unless empty.
    coeffs: Vec<FieldElement>,
}

impl std::fmt::Debug for SkewPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})t"),
                _ => format!("({c})t^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Serialize for SkewPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SkewPoly", 2)?;
        st.serialize_field("twist_q", &self.twist_q())?;
        st.serialize_field("coeffs", &self.coeffs)?;
        st.end()
    }
}

impl SkewPoly {
    pub fn new(field: &Field, twist_e: usize, coeffs: Vec<FieldElement>) -> SkewPoly {
        assert!(twist_e >= 1, "twist exponent must be >= 1");
        assert!(
            field.degree() % twist_e == 0,
            "field does not contain F_q for the requested twist"
        );
        for c in &coeffs {
            assert!(c.field() == field, "coefficient outside the base field");
        }
        let mut p = SkewPoly {
            field: field.clone(),
            twist_e,
            coeffs,
        };
        p.normalize();
        p
    }

    pub fn zero(field: &Field, twist_e: usize) -> SkewPoly {
        Self::new(field, twist_e, vec![])
    }

    pub fn constant(c: FieldElement, twist_e: usize) -> SkewPoly {
        let field = c.field().clone();
        Self::new(&field, twist_e, vec![c])
    }

    pub fn one(field: &Field, twist_e: usize) -> SkewPoly {
        Self::constant(field.one(), twist_e)
    }

    pub fn tau(field: &Field, twist_e: usize) -> SkewPoly {
        Self::new(field, twist_e, vec![field.zero(), field.one()])
    }

    /// tau - u as a convenience.
    pub fn tau_minus(u: &FieldElement, twist_e: usize) -> SkewPoly {
        let field = u.field().clone();
        Self::new(&field, twist_e, vec![-u, field.one()])
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn twist_e(&self) -> usize {
        self.twist_e
    }

    pub fn twist_q(&self) -> u64 {
        self.field.p().pow(self.twist_e as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Coefficient of tau^i (zero when out of range).
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    fn same_ring(&self, other: &SkewPoly) -> bool {
        self.field == other.field && self.twist_e == other.twist_e
    }

    pub fn add(&self, rhs: &SkewPoly) -> SkewPoly {
        assert!(self.same_ring(rhs), "ring mismatch in +");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(&self.coeff(i) + &rhs.coeff(i));
        }
        SkewPoly::new(&self.field, self.twist_e, out)
    }

    pub fn sub(&self, rhs: &SkewPoly) -> SkewPoly {
        assert!(self.same_ring(rhs), "ring mismatch in -");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(&self.coeff(i) - &rhs.coeff(i));
        }
        SkewPoly::new(&self.field, self.twist_e, out)
    }

    pub fn neg(&self) -> SkewPoly {
        SkewPoly::new(
            &self.field,
            self.twist_e,
            self.coeffs.iter().map(|c| -c).collect(),
        )
    }

    /// Left multiplication by a constant: c * f scales every coefficient.
    pub fn scale_left(&self, c: &FieldElement) -> SkewPoly {
        SkewPoly::new(
            &self.field,
            self.twist_e,
            self.coeffs.iter().map(|a| c * a).collect(),
        )
    }

    /// Right multiplication by a constant: f * c twists c through each tau.
    pub fn scale_right(&self, c: &FieldElement) -> SkewPoly {
        let e = self.twist_e;
        SkewPoly::new(
            &self.field,
            self.twist_e,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * &c.frq(e, i))
                .collect(),
        )
    }

    /// Product under tau a = a^q tau.
    pub fn mul(&self, rhs: &SkewPoly) -> Result<SkewPoly> {
        if !self.same_ring(rhs) {
            return Err(Error::FieldMismatch);
        }
        if self.is_zero() || rhs.is_zero() {
            return Ok(SkewPoly::zero(&self.field, self.twist_e));
        }
        let e = self.twist_e;
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut out = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a * &b.frq(e, i);
                out[i + j] = &out[i + j] + &t;
            }
        }
        Ok(SkewPoly::new(&self.field, e, out))
    }

    /// f = q*g + r with deg r < deg g; unique.
    pub fn right_divmod(&self, g: &SkewPoly) -> Result<(SkewPoly, SkewPoly)> {
        if !self.same_ring(g) {
            return Err(Error::FieldMismatch);
        }
        if g.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let e = self.twist_e;
        let dg = g.degree().unwrap();
        let glead = g.leading().unwrap().clone();
        let mut r = self.clone();
        let mut q = SkewPoly::zero(&self.field, e);
        while let Some(dr) = r.degree() {
            if dr < dg {
                break;
            }
            let d = dr - dg;
            // leading of (c tau^d) * g is c * glead^(q^d)
            let c = r.leading().unwrap() / &glead.frq(e, d);
            let mut mono = vec![self.field.zero(); d + 1];
            mono[d] = c;
            let mono = SkewPoly::new(&self.field, e, mono);
            r = r.sub(&mono.mul(g)?);
            q = q.add(&mono);
        }
        Ok((q, r))
    }

    /// Maximal common monic right-divisor, by the right Euclidean chain.
    pub fn right_gcd_monic(&self, g: &SkewPoly) -> Result<SkewPoly> {
        if !self.same_ring(g) {
            return Err(Error::FieldMismatch);
        }
        if self.is_zero() && g.is_zero() {
            return Err(Error::BothZero);
        }
        let mut a = self.clone();
        let mut b = g.clone();
        while !b.is_zero() {
            let (_, r) = a.right_divmod(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Left-scales by the inverse of the leading coefficient.
    pub fn monic(&self) -> Result<SkewPoly> {
        let lead = self.leading().ok_or(Error::ZeroPolynomial)?;
        Ok(self.scale_left(&lead.inverse()?))
    }

    /// Lifts every coefficient into a larger field.
    pub fn embed_to(&self, sup: &Field) -> Result<SkewPoly> {
        if sup.degree() % self.twist_e != 0 {
            return Err(Error::FieldMismatch);
        }
        let coeffs: Vec<FieldElement> = self
            .coeffs
            .iter()
            .map(|c| ff::embed(c, sup))
            .collect::<Result<_>>()?;
        Ok(SkewPoly::new(sup, self.twist_e, coeffs))
    }

    /// sigma-linear evaluation: sum a_i c^(q^i); c may live in an extension.
    pub fn evaluate(&self, c: &FieldElement) -> Result<FieldElement> {
        let target = c.field();
        let lifted = if target == &self.field {
            self.clone()
        } else {
            self.embed_to(target).map_err(|_| Error::FieldMismatch)?
        };
        let e = self.twist_e;
        let mut acc = target.zero();
        let mut cur = c.clone();
        for a in &lifted.coeffs {
            if !a.is_zero() {
                acc = &acc + &(a * &cur);
            }
            cur = cur.frq(e, 1);
        }
        Ok(acc)
    }

    /// Applies a map coefficient-wise (e.g. a declared sigma rule).
    pub fn coeff_map<F: Fn(&FieldElement) -> FieldElement>(&self, f: F) -> SkewPoly {
        SkewPoly::new(
            &self.field,
            self.twist_e,
            self.coeffs.iter().map(f).collect(),
        )
    }

    /// All c in `ambient` with f(c) = 0, by exhaustive scan. The result is an
    /// F_q-subspace, canonically ordered.
    pub fn kernel_elements(&self, ambient: &Field) -> Result<Vec<FieldElement>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if ambient.order() > DEFAULT_ENUM_BOUND {
            return Err(Error::BoundExceeded {
                order: ambient.order(),
                bound: DEFAULT_ENUM_BOUND,
            });
        }
        let lifted = self.embed_to(ambient)?;
        let e = self.twist_e;
        let order = ambient.order() as u64;
        let mut out: Vec<FieldElement> = (0..order)
            .into_par_iter()
            .filter_map(|idx| {
                let x = ambient.from_index(idx as u128);
                let mut acc = ambient.zero();
                let mut cur = x.clone();
                for a in &lifted.coeffs {
                    if !a.is_zero() {
                        acc = &acc + &(a * &cur);
                    }
                    cur = cur.frq(e, 1);
                }
                if acc.is_zero() {
                    Some(x)
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        Ok(out)
    }

    /// Kernel via F_p-linear algebra; works for ambients too large to scan.
    /// Agrees with [`SkewPoly::kernel_elements`] where both apply.
    pub fn kernel_nullspace(&self, ambient: &Field) -> Result<Vec<FieldElement>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let lifted = self.embed_to(ambient)?;
        let e = self.twist_e;
        let n = ambient.degree();
        let p = ambient.p();
        // columns: image of each basis vector g^j
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut basis = vec![0u64; n];
            basis[j] = 1;
            let x = ambient.from_coeffs(&basis);
            let mut acc = ambient.zero();
            let mut cur = x;
            for a in &lifted.coeffs {
                if !a.is_zero() {
                    acc = &acc + &(a * &cur);
                }
                cur = cur.frq(e, 1);
            }
            cols.push(acc.coeffs().to_vec());
        }
        let basis = nullspace_mod_p(&cols, n, p);
        let dim = basis.len();
        let count = (0..dim).try_fold(1u128, |acc, _| {
            let next = acc.checked_mul(p as u128)?;
            (next <= DEFAULT_ENUM_BOUND).then_some(next)
        });
        let count = count.ok_or(Error::BoundExceeded {
            order: u128::MAX,
            bound: DEFAULT_ENUM_BOUND,
        })?;
        let mut out = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let mut vec = vec![0u64; n];
            let mut rest = idx;
            for b in &basis {
                let c = (rest % p as u128) as u64;
                rest /= p as u128;
                if c != 0 {
                    for (i, &bi) in b.iter().enumerate() {
                        vec[i] = (vec[i] + c * bi) % p;
                    }
                }
            }
            out.push(ambient.from_coeffs(&vec));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Nullspace basis of the matrix with the given columns, over F_p.
fn nullspace_mod_p(cols: &[Vec<u64>], n: usize, p: u64) -> Vec<Vec<u64>> {
    // rows of the matrix: a[i][j] = cols[j][i]
    let mut a: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    let mut pivot_col_of_row = vec![];
    let mut row = 0;
    for col in 0..n {
        let pivot = (row..n).find(|&r| a[r][col] != 0);
        let Some(pr) = pivot else { continue };
        a.swap(row, pr);
        let inv = mod_inv(a[row][col], p);
        for x in a[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..n {
            if r != row && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..n {
                    let sub = f * a[row][c] % p;
                    a[r][c] = (a[r][c] + p - sub) % p;
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut basis = vec![];
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; n];
        v[free] = 1;
        for (r, &pc) in pivot_col_of_row.iter().enumerate() {
            // x_pc = -a[r][free]
            v[pc] = (p - a[r][free]) % p;
        }
        basis.push(v);
    }
    basis
}

fn mod_inv(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> Field {
        Field::new(3, 2).unwrap()
    }

    fn f81() -> Field {
        Field::new(3, 4).unwrap()
    }

    #[test]
    fn defining_relation() {
        let f = f9();
        let a = f.from_coeffs(&[1, 1]); // 1+i, not in F_3
        let tau = SkewPoly::tau(&f, 1);
        let ca = SkewPoly::constant(a.clone(), 1);
        let lhs = tau.mul(&ca).unwrap();
        let aq = a.frq(1, 1);
        let rhs = SkewPoly::constant(aq, 1).mul(&tau).unwrap();
        assert_eq!(lhs, rhs);
        // non-commutativity witnessed
        let other = ca.mul(&tau).unwrap();
        assert_ne!(lhs, other);
    }

    #[test]
    fn product_of_linear_factors() {
        // (tau + a)(tau + b) = tau^2 + (a + b^q) tau + ab
        let f = f9();
        let one = f.one();
        let minus1 = -&one;
        let lhs = SkewPoly::new(&f, 1, vec![one.clone(), one.clone()])
            .mul(&SkewPoly::new(&f, 1, vec![minus1.clone(), one.clone()]))
            .unwrap();
        // q = 3 odd: (-1)^q = -1, so coefficient of tau is 1 + (-1) = 0
        let expect = SkewPoly::new(&f, 1, vec![minus1, f.zero(), one]);
        assert_eq!(lhs, expect);
    }

    #[test]
    fn one_is_identity() {
        let f = f81();
        let poly = SkewPoly::new(
            &f,
            1,
            vec![f.from_index(5), f.from_index(17), f.from_index(80)],
        );
        assert_eq!(poly.mul(&SkewPoly::one(&f, 1)).unwrap(), poly);
        assert_eq!(SkewPoly::one(&f, 1).mul(&poly).unwrap(), poly);
    }

    #[test]
    fn leading_coefficient_rule() {
        let f = f81();
        let a = SkewPoly::new(&f, 1, vec![f.from_index(3), f.from_index(7), f.from_index(11)]);
        let b = SkewPoly::new(&f, 1, vec![f.from_index(23), f.from_index(41)]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.degree(), Some(3));
        let expect = a.leading().unwrap() * &b.leading().unwrap().frq(1, 2);
        assert_eq!(prod.leading().unwrap(), &expect);
    }

    #[test]
    fn divmod_worked_example() {
        // f = tau^2, g = tau - 1 over twist q=3: quotient tau+1, remainder 1
        let f = f9();
        let tau2 = SkewPoly::new(&f, 1, vec![f.zero(), f.zero(), f.one()]);
        let g = SkewPoly::tau_minus(&f.one(), 1);
        let (q, r) = tau2.right_divmod(&g).unwrap();
        assert_eq!(q, SkewPoly::new(&f, 1, vec![f.one(), f.one()]));
        assert_eq!(r, SkewPoly::one(&f, 1));
        // reconstruction oracle
        let back = q.mul(&g).unwrap().add(&r);
        assert_eq!(back, tau2);
    }

    #[test]
    fn divmod_trivial_cases() {
        let f = f9();
        let g = SkewPoly::new(&f, 1, vec![f.from_index(4), f.from_index(7), f.one()]);
        let (q, r) = g.right_divmod(&g).unwrap();
        assert_eq!(q, SkewPoly::one(&f, 1));
        assert!(r.is_zero());
        let small = SkewPoly::new(&f, 1, vec![f.from_index(5), f.from_index(2)]);
        let (q, r) = small.right_divmod(&g).unwrap();
        assert!(q.is_zero());
        assert_eq!(r, small);
        assert!(matches!(
            g.right_divmod(&SkewPoly::zero(&f, 1)),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn divmod_reconstruction_random() {
        let f = f81();
        for seed in 0..30u128 {
            let fpoly = SkewPoly::new(
                &f,
                1,
                (0..5).map(|i| f.from_index((seed * 37 + 13 * i + 1) % 81)).collect(),
            );
            let gpoly = SkewPoly::new(
                &f,
                1,
                (0..3).map(|i| f.from_index((seed * 53 + 29 * i + 2) % 81)).collect(),
            );
            if gpoly.is_zero() {
                continue;
            }
            let (q, r) = fpoly.right_divmod(&gpoly).unwrap();
            if let (Some(dr), Some(dg)) = (r.degree(), gpoly.degree()) {
                assert!(dr < dg);
            }
            assert_eq!(q.mul(&gpoly).unwrap().add(&r), fpoly);
        }
    }

    #[test]
    fn gcd_properties() {
        let f = f81();
        let h = SkewPoly::new(&f, 1, vec![f.from_index(19), f.from_index(3), f.one()]);
        // gcd(f, 0) is the monic multiple of f
        let g = h.scale_left(&f.from_index(7));
        let gcd = g.right_gcd_monic(&SkewPoly::zero(&f, 1)).unwrap();
        assert_eq!(gcd, h.monic().unwrap());
        assert!(matches!(
            SkewPoly::zero(&f, 1).right_gcd_monic(&SkewPoly::zero(&f, 1)),
            Err(Error::BothZero)
        ));
    }

    #[test]
    fn gcd_of_common_right_factor() {
        let f = f81();
        let h = SkewPoly::new(&f, 1, vec![f.from_index(11), f.from_index(40), f.one()]);
        for seed in 0..20u128 {
            let h1 = SkewPoly::new(
                &f,
                1,
                vec![f.from_index((seed * 7 + 1) % 81), f.from_index((seed * 11 + 3) % 81), f.one()],
            );
            let h2 = SkewPoly::new(
                &f,
                1,
                vec![f.from_index((seed * 13 + 2) % 81), f.one()],
            );
            // require gcd(h1, h2) = 1 for the oracle to apply
            let inner = h1.right_gcd_monic(&h2).unwrap();
            if inner.degree() != Some(0) {
                continue;
            }
            let a = h1.mul(&h).unwrap();
            let b = h2.mul(&h).unwrap();
            let gcd = a.right_gcd_monic(&b).unwrap();
            assert_eq!(gcd, h.monic().unwrap(), "seed {seed}");
            // symmetric in the arguments
            assert_eq!(b.right_gcd_monic(&a).unwrap(), gcd);
            // and it right-divides both with zero remainder
            let (_, r1) = a.right_divmod(&gcd).unwrap();
            let (_, r2) = b.right_divmod(&gcd).unwrap();
            assert!(r1.is_zero() && r2.is_zero());
        }
    }

    #[test]
    fn evaluate_basics() {
        let f = f81();
        let poly = SkewPoly::new(&f, 1, vec![f.zero(), f.from_index(14), f.from_index(66)]);
        assert!(poly.evaluate(&f.zero()).unwrap().is_zero());
        let tau = SkewPoly::tau(&f, 1);
        let c = f.from_index(29);
        assert_eq!(tau.evaluate(&c).unwrap(), c.pow(3));
        // tau - u annihilates c with c^(q-1) = u
        let c = f.from_index(37);
        let u = c.pow(2);
        let lin = SkewPoly::tau_minus(&u, 1);
        assert!(lin.evaluate(&c).unwrap().is_zero());
    }

    #[test]
    fn evaluate_is_additive() {
        let f = f81();
        let poly = SkewPoly::new(&f, 1, vec![f.from_index(8), f.from_index(50), f.one()]);
        for s in 0..15u128 {
            let a = f.from_index((s * 17 + 4) % 81);
            let b = f.from_index((s * 23 + 9) % 81);
            let lhs = poly.evaluate(&(&a + &b)).unwrap();
            let rhs = &poly.evaluate(&a).unwrap() + &poly.evaluate(&b).unwrap();
            assert_eq!(lhs, rhs);
            // F_q-linearity
            for alpha in 0..3u64 {
                let lhs = poly.evaluate(&a.scale(alpha)).unwrap();
                assert_eq!(lhs, poly.evaluate(&a).unwrap().scale(alpha));
            }
        }
    }

    #[test]
    fn kernel_of_frobenius_minus_one() {
        let f9 = f9();
        let f81 = f81();
        let lin = SkewPoly::tau_minus(&f9.one(), 1);
        let kernel = lin.kernel_elements(&f81).unwrap();
        // fixed field of Frobenius: exactly the q = 3 prime field elements
        assert_eq!(kernel.len(), 3);
        for c in &kernel {
            assert_eq!(c.pow(3), *c);
        }
        let tau = SkewPoly::tau(&f9, 1);
        assert_eq!(tau.kernel_elements(&f81).unwrap(), vec![f81.zero()]);
    }

    #[test]
    fn kernel_is_subspace_and_matches_nullspace() {
        let f81 = f81();
        // tau^2 - 1 has kernel F_9 inside F_81
        let poly = SkewPoly::new(&f81, 1, vec![-&f81.one(), f81.zero(), f81.one()]);
        let kernel = poly.kernel_elements(&f81).unwrap();
        assert_eq!(kernel.len(), 9);
        for a in &kernel {
            for b in &kernel {
                assert!(kernel.binary_search(&(a + b)).is_ok());
            }
            for s in 0..3 {
                assert!(kernel.binary_search(&a.scale(s)).is_ok());
            }
        }
        assert_eq!(poly.kernel_nullspace(&f81).unwrap(), kernel);
    }

    #[test]
    fn coeff_map_involution() {
        let f = f9();
        let poly = SkewPoly::new(&f, 1, vec![f.from_coeffs(&[1, 2]), f.generator(), f.one()]);
        assert_eq!(poly.coeff_map(|c| c.clone()), poly);
        let twisted = poly.coeff_map(|c| c.frq(1, 1));
        assert_ne!(twisted, poly);
        assert_eq!(twisted.coeff_map(|c| c.frq(1, 1)), poly);
        let c = SkewPoly::constant(f.generator(), 1);
        assert_eq!(
            c.coeff_map(|x| x.frq(1, 1)),
            SkewPoly::constant(f.generator().frq(1, 1), 1)
        );
    }

    #[test]
    fn mixed_twists_rejected() {
        let f = f81();
        let a = SkewPoly::tau(&f, 1);
        let b = SkewPoly::tau(&f, 2);
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch)));
    }
}
