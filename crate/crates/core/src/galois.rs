//! Arithmetic over binary extension fields GF(2^m), 3 <= m <= 16.
//!
//! Elements are `m`-bit integers in the polynomial basis: bit `i` is the
//! coefficient of `x^i`, and the primitive element α is the polynomial `x`
//! (the integer 2). Addition is XOR; multiplication and division go through
//! log/antilog tables built once per field.

use std::fmt;

use thiserror::Error;

/// A field element in polynomial basis.
pub type Elem = u16;

pub const MIN_DIMENSION: u32 = 3;
pub const MAX_DIMENSION: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field dimension m={0} is outside the supported range 3..=16")]
    UnsupportedDimension(u32),
    #[error("polynomial {poly:#x} is not a primitive polynomial of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Log/antilog context for GF(2^m).
#[derive(Clone)]
pub struct GaloisField {
    m: u32,
    poly: u32,
    /// q - 1, the order of the multiplicative group.
    order: usize,
    /// exp[i] = α^i for 0 <= i < 2(q-1), doubled so products skip a modulo.
    exp: Vec<Elem>,
    /// log[x] = i with α^i = x; log[0] is unused.
    log: Vec<u32>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl GaloisField {
    /// Builds GF(2^m) over the default primitive polynomial for `m`.
    pub fn new(m: u32) -> Result<Self, FieldError> {
        let poly = default_primitive_poly(m)?;
        Self::with_poly(m, poly)
    }

    /// Builds GF(2^m) over a caller-chosen primitive polynomial, given as an
    /// integer whose bit `i` is the coefficient of `x^i` (bit `m` must be set).
    pub fn with_poly(m: u32, poly: u32) -> Result<Self, FieldError> {
        if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&m) {
            return Err(FieldError::UnsupportedDimension(m));
        }
        let exp = power_cycle(m, poly).ok_or(FieldError::NotPrimitive { m, poly })?;
        let order = exp.len();
        let mut log = vec![0u32; order + 1];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        let mut doubled = exp.clone();
        doubled.extend_from_slice(&exp);
        Ok(Self {
            m,
            poly,
            order,
            exp: doubled,
            log,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Field size q = 2^m.
    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// Multiplicative group order q - 1.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The primitive element α.
    pub fn alpha(&self) -> Elem {
        2
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Divides `a` by a nonzero `b`.
    ///
    /// Panics if `b` is zero.
    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        assert!(b != 0, "division by zero in GF(2^{})", self.m);
        if a == 0 {
            return 0;
        }
        let order = self.order as u32;
        self.exp[(self.log[a as usize] + order - self.log[b as usize]) as usize]
    }

    /// Inverse of a nonzero element; panics on zero. See [`Self::try_inv`].
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.div(1, a)
    }

    pub fn try_inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(self.inv(a))
        }
    }

    /// Discrete logarithm base α, `None` for zero.
    #[inline]
    pub fn log(&self, a: Elem) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// α^e for any integer exponent (negative exponents wrap modulo q - 1).
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Elem {
        self.exp[e.rem_euclid(self.order as i64) as usize]
    }

    /// a^e; 0^0 is taken to be 1.
    pub fn pow(&self, a: Elem, e: i64) -> Elem {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => self.alpha_pow(l as i64 * e.rem_euclid(self.order as i64)),
        }
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// Evaluates `poly` (coefficients lowest degree first) at `x` by Horner's rule.
    pub fn eval(&self, poly: &[Elem], x: Elem) -> Elem {
        if x == 0 {
            return poly.first().copied().unwrap_or(0);
        }
        let lx = self.log[x as usize];
        let mut acc: Elem = 0;
        for &c in poly.iter().rev() {
            acc = if acc == 0 {
                c
            } else {
                self.exp[(self.log[acc as usize] + lx) as usize] ^ c
            };
        }
        acc
    }

    /// Product of two polynomials over GF(2^m).
    pub fn poly_mul(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        out
    }

    /// The cyclotomic coset {i·2^j mod (q-1)} containing `i`, in generation order.
    pub fn cyclotomic_coset(&self, i: usize) -> Vec<usize> {
        let start = i % self.order;
        let mut coset = vec![start];
        let mut next = (start * 2) % self.order;
        while next != start {
            coset.push(next);
            next = (next * 2) % self.order;
        }
        coset
    }

    /// Minimal binary polynomial of α^i.
    pub fn minimal_polynomial(&self, i: usize) -> BinaryPoly {
        let mut acc: Vec<Elem> = vec![1];
        for e in self.cyclotomic_coset(i) {
            acc = self.poly_mul(&acc, &[self.alpha_pow(e as i64), 1]);
        }
        BinaryPoly::from_bits(acc.iter().map(|&c| {
            debug_assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
            c == 1
        }))
    }
}

/// Walks α^0, α^1, ... modulo `poly`; returns the sequence if α has order
/// exactly 2^m - 1 (i.e. `poly` is primitive).
fn power_cycle(m: u32, poly: u32) -> Option<Vec<Elem>> {
    if poly >> m != 1 || poly & 1 == 0 {
        return None;
    }
    let order = (1usize << m) - 1;
    let mut seq = Vec::with_capacity(order);
    let mut x: u32 = 1;
    for _ in 0..order {
        seq.push(x as Elem);
        x <<= 1;
        if x >> m != 0 {
            x ^= poly;
        }
        if x == 1 && seq.len() < order {
            return None;
        }
    }
    (x == 1).then_some(seq)
}

/// The numerically smallest primitive polynomial of degree `m`.
pub fn default_primitive_poly(m: u32) -> Result<u32, FieldError> {
    if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&m) {
        return Err(FieldError::UnsupportedDimension(m));
    }
    ((1u32 << m) + 1..(1u32 << (m + 1)))
        .step_by(2)
        .find(|&p| power_cycle(m, p).is_some())
        .ok_or(FieldError::UnsupportedDimension(m))
}

/// A polynomial over GF(2), packed 64 coefficients per limb, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryPoly {
    limbs: Vec<u64>,
}

impl fmt::Debug for BinaryPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = (0..=self.degree().unwrap_or(0))
            .rev()
            .filter(|&i| self.coeff(i))
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl BinaryPoly {
    pub fn zero() -> Self {
        Self { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { limbs: vec![1] }
    }

    /// Builds a polynomial from coefficient bits, lowest degree first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut limbs = Vec::new();
        for (i, bit) in bits.into_iter().enumerate() {
            if i % 64 == 0 {
                limbs.push(0);
            }
            if bit {
                limbs[i / 64] |= 1 << (i % 64);
            }
        }
        let mut p = Self { limbs };
        p.trim();
        p
    }

    /// Builds a polynomial with the given exponents set (duplicates cancel).
    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            p.toggle(e);
        }
        p
    }

    /// Interprets the bits of `word` as coefficients (bit i is x^i).
    pub fn from_u64(word: u64) -> Self {
        let mut p = Self { limbs: vec![word] };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let top = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|limb| limb >> (i % 64) & 1 == 1)
    }

    pub fn toggle(&mut self, i: usize) {
        if self.limbs.len() <= i / 64 {
            self.limbs.resize(i / 64 + 1, 0);
        }
        self.limbs[i / 64] ^= 1 << (i % 64);
        self.trim();
    }

    pub fn weight(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    /// Coefficients as booleans, lowest degree first, `degree + 1` entries.
    pub fn bits(&self) -> Vec<bool> {
        match self.degree() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|i| self.coeff(i)).collect(),
        }
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Evaluates the polynomial at a field element.
    pub fn eval(&self, field: &GaloisField, x: Elem) -> Elem {
        let coeffs: Vec<Elem> = self.bits().into_iter().map(Elem::from).collect();
        field.eval(&coeffs, x)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut limbs = vec![0; self.limbs.len().max(other.limbs.len())];
        for (i, l) in limbs.iter_mut().enumerate() {
            *l = self.limbs.get(i).unwrap_or(&0) ^ other.limbs.get(i).unwrap_or(&0);
        }
        let mut p = Self { limbs };
        p.trim();
        p
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Self) -> Self {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Self::zero();
        };
        let mut limbs = vec![0u64; (da + db) / 64 + 1];
        for i in 0..=da {
            if !self.coeff(i) {
                continue;
            }
            let (word, shift) = (i / 64, i % 64);
            for (j, &l) in other.limbs.iter().enumerate() {
                limbs[word + j] ^= l << shift;
                if shift != 0 && word + j + 1 < limbs.len() {
                    limbs[word + j + 1] ^= l >> (64 - shift);
                }
            }
        }
        let mut p = Self { limbs };
        p.trim();
        p
    }

    /// Remainder modulo a nonzero divisor.
    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            quot.toggle(shift);
            for i in 0..=dd {
                if divisor.coeff(i) {
                    rem.toggle(i + shift);
                }
            }
        }
        (quot, rem)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Least common multiple of nonzero polynomials.
    pub fn lcm(&self, other: &Self) -> Self {
        let g = self.gcd(other);
        self.div_rem(&g).0.mul(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_polys_match_the_usual_choices() {
        assert_eq!(default_primitive_poly(4).unwrap(), 0b1_0011);
        assert_eq!(default_primitive_poly(6).unwrap(), 0b100_0011);
        assert_eq!(default_primitive_poly(8).unwrap(), 0x11d);
        assert_eq!(default_primitive_poly(10).unwrap(), 0x409);
        assert_eq!(default_primitive_poly(11).unwrap(), 0x805);
        assert!(default_primitive_poly(16).is_ok());
        assert_eq!(
            default_primitive_poly(2),
            Err(FieldError::UnsupportedDimension(2))
        );
        assert!(GaloisField::new(17).is_err());
    }

    #[test]
    fn alpha_order_in_gf16() {
        let gf = GaloisField::new(4).unwrap();
        assert_eq!(gf.size(), 16);
        assert_eq!(gf.pow(gf.alpha(), 15), 1);
        for k in 1..15 {
            assert_ne!(gf.pow(gf.alpha(), k), 1, "α^{k} = 1");
        }
        assert_eq!(gf.mul(gf.alpha_pow(5), gf.alpha_pow(12)), gf.alpha_pow(2));
    }

    #[test]
    fn non_primitive_poly_is_rejected() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but α has order 5.
        assert!(matches!(
            GaloisField::with_poly(4, 0b1_1111),
            Err(FieldError::NotPrimitive { .. })
        ));
    }

    #[test]
    fn field_ops() {
        let gf = GaloisField::new(10).unwrap();
        for x in 0..gf.size() as Elem {
            assert_eq!(gf.add(x, x), 0);
        }
        for k in 0..gf.order() as i64 {
            let a = gf.alpha_pow(k);
            assert_eq!(gf.inv(a), gf.alpha_pow(gf.order() as i64 - k));
            assert_eq!(gf.mul(a, gf.inv(a)), 1);
        }
        assert_eq!(gf.try_inv(0), Err(FieldError::ZeroInverse));
        assert_eq!(gf.alpha_pow(-1), gf.inv(gf.alpha()));
    }

    #[test]
    fn eval_finds_the_root_of_a_linear_locator() {
        let gf = GaloisField::new(6).unwrap();
        let a = gf.alpha();
        // Λ(x) = 1 + αx vanishes at α^{-1}.
        assert_eq!(gf.eval(&[1, a], gf.inv(a)), 0);
        assert_ne!(gf.eval(&[1, a], a), 0);
    }

    #[test]
    fn minimal_polynomials_in_gf16() {
        let gf = GaloisField::new(4).unwrap();
        assert_eq!(gf.minimal_polynomial(0), BinaryPoly::from_exponents(&[0, 1]));
        assert_eq!(gf.minimal_polynomial(1), BinaryPoly::from_u64(0b1_0011));
        let mu3 = gf.minimal_polynomial(3);
        assert_eq!(mu3.degree(), Some(4));
        for e in [3, 6, 12, 9] {
            assert_eq!(mu3.eval(&gf, gf.alpha_pow(e)), 0);
        }
    }

    #[test]
    fn binary_poly_division() {
        let a = BinaryPoly::from_exponents(&[0, 3, 7, 70, 130]);
        let d = BinaryPoly::from_exponents(&[0, 1, 5]);
        let (q, r) = a.div_rem(&d);
        assert!(r.degree().unwrap_or(0) < 5);
        assert_eq!(q.mul(&d).add(&r), a);
        assert_eq!(format!("{:?}", d), "x^5 + x + 1");
        let g = BinaryPoly::from_exponents(&[0, 1]);
        assert_eq!(g.mul(&d).gcd(&g.mul(&a)), g.mul(&d.gcd(&a)));
    }
}
