//! Binary (e)BCH codes: construction, systematic encoding, syndromes, and the
//! hard-decision decoders used by the product decoder.
//!
//! Bit position `j` of a senseword carries the locator `α_j` (by default
//! `α^j`); an error at `j` puts the root `α_j^{-1}` into the error-locator
//! polynomial. Codewords are stored by polynomial degree: the `n - k` parity
//! bits occupy positions `0..n-k` and message bit `i` sits at `n - k + i`.
//! Shortening drops the highest positions.
//!
//! An extended code multiplies the generator by `(x + 1)`: every codeword has
//! even weight and the extra parity root is observed through the single-bit
//! parity syndrome, the XOR of all bits.

mod berlekamp;
mod decode;
mod list;

use std::sync::Arc;

use thiserror::Error;

use crate::galois::{BinaryPoly, Elem, GaloisField};

pub use berlekamp::{berlekamp, KeyEquationState};
pub use decode::{chien_search, decode_minus1, decode_minus1_traced, decode_unique, Minus1Trace};
pub use list::{
    chase_flip_state, decode_plus1_list, decode_plus2_list, decode_sweep_list, ListBuckets,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BchError {
    #[error("code length {n} exceeds q - 1 = {max}")]
    LengthTooLarge { n: usize, max: usize },
    #[error("correction capability must be at least 1")]
    ZeroCapability,
    #[error("generator of degree {parity} leaves no message bits at length {n}")]
    NoMessageBits { n: usize, parity: usize },
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("locators must be distinct and nonzero")]
    InvalidLocators,
    #[error("codes with custom locators are decode-only")]
    CustomLocators,
}

/// A (possibly shortened, possibly extended) binary BCH code.
#[derive(Debug, Clone)]
pub struct BchCode {
    field: Arc<GaloisField>,
    n: usize,
    k: usize,
    t: usize,
    extended: bool,
    generator: BinaryPoly,
    /// log_α of each position's locator.
    locator_logs: Vec<u32>,
    /// α_j^{-1}, the point at which Chien search probes position j.
    inv_locators: Vec<Elem>,
    custom_locators: bool,
    /// Generator without its leading term, packed for the encoder.
    gen_low: Vec<u64>,
}

impl BchCode {
    /// Builds the code of length `n` with designed capability `t` over `field`,
    /// using the default locators α_j = α^j.
    pub fn new(field: Arc<GaloisField>, n: usize, t: usize, extended: bool) -> Result<Self, BchError> {
        let locators: Vec<Elem> = (0..n).map(|j| field.alpha_pow(j as i64)).collect();
        let mut code = Self::with_locators(field, t, extended, &locators)?;
        code.custom_locators = false;
        let parity = code.parity_len();
        if parity >= n {
            return Err(BchError::NoMessageBits { n, parity });
        }
        Ok(code)
    }

    /// Builds a decode-only code whose position `j` carries `locators[j]`.
    /// Used when a senseword's surviving positions are not consecutive powers of α.
    pub fn with_locators(
        field: Arc<GaloisField>,
        t: usize,
        extended: bool,
        locators: &[Elem],
    ) -> Result<Self, BchError> {
        let n = locators.len();
        if n > field.order() {
            return Err(BchError::LengthTooLarge { n, max: field.order() });
        }
        if t == 0 {
            return Err(BchError::ZeroCapability);
        }
        let mut seen = vec![false; field.size()];
        for &x in locators {
            if x == 0 || seen[x as usize] {
                return Err(BchError::InvalidLocators);
            }
            seen[x as usize] = true;
        }
        let generator = generator_polynomial(&field, t, extended);
        let parity = generator.degree().unwrap_or(0);
        if 2 * t > field.order() {
            return Err(BchError::NoMessageBits { n, parity });
        }
        let locator_logs = locators.iter().map(|&x| field.log(x).unwrap_or(0)).collect();
        let inv_locators = locators.iter().map(|&x| field.inv(x)).collect();
        let mut gen_low = vec![0u64; parity.div_ceil(64).max(1)];
        for i in 0..parity {
            if generator.coeff(i) {
                gen_low[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(Self {
            field,
            n,
            k: n.saturating_sub(parity),
            t,
            extended,
            generator,
            locator_logs,
            inv_locators,
            custom_locators: true,
            gen_low,
        })
    }

    pub fn field(&self) -> &Arc<GaloisField> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn generator(&self) -> &BinaryPoly {
        &self.generator
    }

    /// Number of parity bits, n - k = deg(generator).
    pub fn parity_len(&self) -> usize {
        self.generator.degree().unwrap_or(0)
    }

    /// Locator α_j of position `j`.
    pub fn locator(&self, j: usize) -> Elem {
        self.field.alpha_pow(self.locator_logs[j] as i64)
    }

    /// α_j^{-1}.
    pub fn inv_locator(&self, j: usize) -> Elem {
        self.inv_locators[j]
    }

    /// Every position, the default search domain.
    pub fn full_domain(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    /// Parity bits of the systematic codeword for `message` (k bits, 0/1).
    pub fn parity_bits(&self, message: &[u8]) -> Result<Vec<u8>, BchError> {
        if self.custom_locators {
            return Err(BchError::CustomLocators);
        }
        if message.len() != self.k {
            return Err(BchError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(self.remainder_bits(message.iter().rev().map(|&b| b & 1 == 1)))
    }

    /// Remainder of `M(x)·x^{n-k}` modulo the generator, where the iterator
    /// yields message coefficients from the highest degree down.
    pub(crate) fn remainder_bits<I: Iterator<Item = bool>>(&self, msb_first: I) -> Vec<u8> {
        let plen = self.parity_len();
        let limbs = self.gen_low.len();
        let top_bit = (plen - 1) % 64;
        let top_mask = if plen % 64 == 0 { u64::MAX } else { (1u64 << (plen % 64)) - 1 };
        let mut reg = vec![0u64; limbs];
        for bit in msb_first {
            let feedback = bit ^ (reg[limbs - 1] >> top_bit & 1 == 1);
            for l in (1..limbs).rev() {
                reg[l] = (reg[l] << 1) | (reg[l - 1] >> 63);
            }
            reg[0] <<= 1;
            reg[limbs - 1] &= top_mask;
            if feedback {
                for (r, g) in reg.iter_mut().zip(&self.gen_low) {
                    *r ^= g;
                }
            }
        }
        (0..plen).map(|i| (reg[i / 64] >> (i % 64) & 1) as u8).collect()
    }

    /// Systematic encoding; the result is indexed by degree (parity first).
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, BchError> {
        let mut word = self.parity_bits(message)?;
        word.extend(message.iter().map(|b| b & 1));
        Ok(word)
    }

    /// Syndromes S_0, S_2, ..., S_{2t-2} (S_i = r(α^{i+1})) plus the parity syndrome.
    pub fn syndromes(&self, senseword: &[u8]) -> Result<Syndromes, BchError> {
        if senseword.len() != self.n {
            return Err(BchError::LengthMismatch {
                expected: self.n,
                got: senseword.len(),
            });
        }
        if self.custom_locators {
            let mut syn = Syndromes::zero(self.t);
            for (j, _) in senseword.iter().enumerate().filter(|(_, &b)| b & 1 == 1) {
                syn.toggle_position(self, j);
            }
            return Ok(syn);
        }
        Ok(self.syndromes_msb_first(senseword.iter().rev().map(|&b| b & 1 == 1)))
    }

    /// Syndromes of the word whose coefficients arrive from degree n-1 down
    /// to 0. The word is first reduced modulo the generator, which vanishes
    /// at every syndrome point, and the short remainder is then evaluated.
    pub fn syndromes_msb_first<I: Iterator<Item = bool>>(&self, msb_first: I) -> Syndromes {
        let plen = self.parity_len();
        let limbs = self.gen_low.len();
        let top_bit = (plen - 1) % 64;
        let top_mask = if plen % 64 == 0 { u64::MAX } else { (1u64 << (plen % 64)) - 1 };
        let mut reg = vec![0u64; limbs];
        let mut parity = false;
        for bit in msb_first {
            parity ^= bit;
            // reg·x + bit, reduced
            let overflow = reg[limbs - 1] >> top_bit & 1 == 1;
            for l in (1..limbs).rev() {
                reg[l] = (reg[l] << 1) | (reg[l - 1] >> 63);
            }
            reg[0] = (reg[0] << 1) | bit as u64;
            reg[limbs - 1] &= top_mask;
            if overflow {
                for (r, g) in reg.iter_mut().zip(&self.gen_low) {
                    *r ^= g;
                }
            }
        }
        let f = &self.field;
        let mut syn = Syndromes::zero(self.t);
        for (l, &limb) in reg.iter().enumerate() {
            let mut word = limb;
            while word != 0 {
                let k = (l * 64 + word.trailing_zeros() as usize) as i64;
                word &= word - 1;
                for (i, s) in syn.even.iter_mut().enumerate() {
                    *s ^= f.alpha_pow(k * (2 * i as i64 + 1));
                }
            }
        }
        syn.parity = self.extended && parity;
        syn
    }

    /// Syndromes S_{2t+2i} = r(α^{2t+2i+1}) for i = 1..=count. Only meaningful
    /// when those powers are roots of the generator (see [`Self::known_extra_roots`]).
    pub fn high_syndromes(&self, senseword: &[u8], count: usize) -> Vec<Elem> {
        let f = &self.field;
        (1..=count)
            .map(|i| {
                let power = (2 * self.t + 2 * i + 1) as i64;
                senseword
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .fold(0, |acc, (j, _)| acc ^ f.alpha_pow(self.locator_logs[j] as i64 * power))
            })
            .collect()
    }

    /// Largest τ such that α^{2t+3}, α^{2t+5}, ..., α^{2t+2τ+1} are all roots of
    /// the generator, making S_{2t+2}, ..., S_{2t+2τ} computable from a senseword.
    pub fn known_extra_roots(&self) -> usize {
        let f = &self.field;
        (1..)
            .take_while(|&i| {
                let power = 2 * self.t + 2 * i + 1;
                power < f.order() && self.generator.eval(f, f.alpha_pow(power as i64)) == 0
            })
            .count()
    }
}

/// LCM(μ_1, μ_3, ..., μ_{2t-1}), times (x + 1) for an extended code.
fn generator_polynomial(field: &GaloisField, t: usize, extended: bool) -> BinaryPoly {
    let mut covered = vec![false; field.order()];
    let mut g = BinaryPoly::one();
    for i in (1..2 * t).step_by(2) {
        let i = i % field.order();
        if covered[i] {
            continue;
        }
        for e in field.cyclotomic_coset(i) {
            covered[e] = true;
        }
        g = g.mul(&field.minimal_polynomial(i));
    }
    if extended && !covered[0] {
        g = g.mul(&BinaryPoly::from_exponents(&[0, 1]));
    }
    g
}

/// Even-indexed syndromes of one senseword plus its parity syndrome.
/// Odd syndromes are derived on demand from S_{2i+1} = S_i^2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndromes {
    /// S_0, S_2, ..., S_{2t-2}.
    pub even: Vec<Elem>,
    /// XOR of all bits (meaningful for extended codes only).
    pub parity: bool,
}

impl Syndromes {
    pub fn zero(t: usize) -> Self {
        Self {
            even: vec![0; t],
            parity: false,
        }
    }

    pub fn t(&self) -> usize {
        self.even.len()
    }

    pub fn is_zero(&self) -> bool {
        !self.parity && self.even.iter().all(|&s| s == 0)
    }

    /// S_0, ..., S_{2t-1}.
    pub fn expand(&self, field: &GaloisField) -> Vec<Elem> {
        let mut full = vec![0; 2 * self.t()];
        for i in 0..full.len() {
            full[i] = if i % 2 == 0 {
                self.even[i / 2]
            } else {
                field.square(full[(i - 1) / 2])
            };
        }
        full
    }

    /// Accounts for a flip at position `j` of `code`.
    #[inline]
    pub fn toggle_position(&mut self, code: &BchCode, j: usize) {
        self.toggle_log(&code.field, code.locator_logs[j], code.extended);
    }

    /// Accounts for a flip at a position whose locator is α^`log`.
    #[inline]
    pub(crate) fn toggle_log(&mut self, field: &GaloisField, log: u32, extended: bool) {
        let step = 2 * log as i64;
        let mut e = log as i64;
        for s in self.even.iter_mut() {
            *s ^= field.alpha_pow(e);
            e += step;
        }
        if extended {
            self.parity = !self.parity;
        }
    }
}

/// Applies flips at `positions` to `syn`: S_j += Σ α_{i_l}^{j+1} for even j,
/// and the parity syndrome toggles once per flip.
pub fn update_syndromes(syn: &mut Syndromes, code: &BchCode, positions: &[usize]) {
    for &p in positions {
        syn.toggle_position(code, p);
    }
}

/// Whether a decode attempt that corrects exactly `target` bits can succeed
/// given the parity syndrome: false when their sum is odd.
pub fn parity_gate(parity: bool, target: usize) -> bool {
    (parity as usize + target) % 2 == 0
}

/// Bit positions to flip, sorted ascending and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Correction {
    pub positions: Vec<usize>,
}

impl Correction {
    pub fn new(mut positions: Vec<usize>) -> Self {
        positions.sort_unstable();
        debug_assert!(positions.windows(2).all(|w| w[0] != w[1]));
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn apply(&self, bits: &mut [u8]) {
        for &p in &self.positions {
            bits[p] ^= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(m: u32) -> Arc<GaloisField> {
        Arc::new(GaloisField::new(m).unwrap())
    }

    #[test]
    fn generator_of_63_24_has_extra_roots() {
        let f = gf(6);
        let code = BchCode::new(f.clone(), 63, 7, false).unwrap();
        assert_eq!(code.k(), 24);
        let g = code.generator();
        for e in (1..=13).step_by(2).chain([17, 19]) {
            assert_eq!(g.eval(&f, f.alpha_pow(e)), 0, "α^{e} should be a root");
        }
        assert_ne!(g.eval(&f, f.alpha_pow(15)), 0);
        assert_eq!(code.known_extra_roots(), 2);
    }

    #[test]
    fn small_generators() {
        let f = gf(4);
        let hamming = BchCode::new(f.clone(), 15, 1, false).unwrap();
        assert_eq!(hamming.generator(), &f.minimal_polynomial(1));
        assert_eq!(hamming.k(), 11);
        let two = BchCode::new(f.clone(), 15, 2, false).unwrap();
        // μ1·μ3 = (x^4+x+1)(x^4+x^3+x^2+x+1) = x^8+x^7+x^6+x^4+1
        assert_eq!(two.generator(), &BinaryPoly::from_exponents(&[0, 4, 6, 7, 8]));
        assert_eq!(two.k(), 7);
    }

    #[test]
    fn parity_length_is_t_m_plus_one() {
        let f = gf(10);
        for t in 1..=16 {
            let code = BchCode::new(f.clone(), 746, t, true).unwrap();
            assert_eq!(code.parity_len(), 10 * t + 1, "t={t}");
        }
    }

    #[test]
    fn construction_errors() {
        let f = gf(4);
        assert_eq!(
            BchCode::new(f.clone(), 16, 1, false).unwrap_err(),
            BchError::LengthTooLarge { n: 16, max: 15 }
        );
        assert_eq!(BchCode::new(f.clone(), 15, 0, false).unwrap_err(), BchError::ZeroCapability);
        assert!(matches!(
            BchCode::new(f.clone(), 10, 3, true),
            Err(BchError::NoMessageBits { .. })
        ));
        assert_eq!(
            BchCode::with_locators(f.clone(), 1, false, &[2, 4, 2]).unwrap_err(),
            BchError::InvalidLocators
        );
    }

    #[test]
    fn encode_zero_and_random() {
        let f = gf(6);
        let code = BchCode::new(f, 50, 3, true).unwrap();
        let zero = code.encode(&vec![0; code.k()]).unwrap();
        assert!(zero.iter().all(|&b| b == 0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&msg).unwrap();
            assert!(code.syndromes(&cw).unwrap().is_zero());
            assert_eq!(cw.iter().filter(|&&b| b == 1).count() % 2, 0);
            assert_eq!(&cw[code.parity_len()..], &msg[..]);
            // divisible by the generator
            let poly = BinaryPoly::from_bits(cw.iter().map(|&b| b == 1));
            assert!(poly.rem(code.generator()).is_zero());
        }
        assert_eq!(
            code.encode(&[0, 1]).unwrap_err(),
            BchError::LengthMismatch { expected: code.k(), got: 2 }
        );
    }

    #[test]
    fn wide_parity_register() {
        // deg(g) = 8 * 10 + 1 spans two limbs.
        let f = gf(8);
        let code = BchCode::new(f, 200, 10, true).unwrap();
        assert!(code.parity_len() > 64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&msg).unwrap();
        let poly = BinaryPoly::from_bits(cw.iter().map(|&b| b == 1));
        assert!(poly.rem(code.generator()).is_zero());
    }

    #[test]
    fn syndrome_examples() {
        let f = gf(6);
        let code = BchCode::new(f.clone(), 63, 3, true).unwrap();
        assert!(code.syndromes(&vec![0; 63]).unwrap().is_zero());
        let mut e = vec![0u8; 63];
        e[17] = 1;
        let syn = code.syndromes(&e).unwrap();
        for (i, &s) in syn.expand(&f).iter().enumerate() {
            assert_eq!(s, f.pow(f.alpha_pow(17), i as i64 + 1));
        }
        assert!(syn.parity);
        assert!(code.syndromes(&[0, 1]).is_err());
    }

    #[test]
    fn syndromes_are_linear_over_codewords() {
        let f = gf(6);
        let code = BchCode::new(f.clone(), 45, 3, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let mut word = code.encode(&msg).unwrap();
        let errs = [3usize, 20, 44];
        let mut bare = vec![0u8; 45];
        for &p in &errs {
            word[p] ^= 1;
            bare[p] = 1;
        }
        // direct summation over the error positions
        let direct: Vec<Elem> = (0..3)
            .map(|i| errs.iter().fold(0, |acc, &p| acc ^ f.alpha_pow((p * (2 * i + 1)) as i64)))
            .collect();
        let syn = code.syndromes(&word).unwrap();
        assert_eq!(syn, code.syndromes(&bare).unwrap());
        assert_eq!(syn.even, direct);
    }

    #[test]
    fn odd_syndromes_are_squares() {
        let f = gf(8);
        let code = BchCode::new(f.clone(), 200, 5, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
            let full = code.syndromes(&r).unwrap().expand(&f);
            for (i, &s) in full.iter().enumerate() {
                let direct = r
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b == 1)
                    .fold(0, |acc, (j, _)| acc ^ f.alpha_pow((j * (i + 1)) as i64));
                assert_eq!(s, direct, "S_{i}");
            }
        }
    }

    #[test]
    fn incremental_update_matches_recompute() {
        let f = gf(7);
        let code = BchCode::new(f, 100, 4, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r: Vec<u8> = (0..100).map(|_| rng.random_range(0..2)).collect();
        let mut syn = code.syndromes(&r).unwrap();
        let before = syn.clone();
        update_syndromes(&mut syn, &code, &[5, 5]);
        assert_eq!(syn, before);
        let flips = [1usize, 50, 99];
        update_syndromes(&mut syn, &code, &flips);
        for &p in &flips {
            r[p] ^= 1;
        }
        assert_eq!(syn, code.syndromes(&r).unwrap());
    }

    #[test]
    fn parity_gate_examples() {
        // t even, target t + 1 odd, parity 0 -> skip
        assert!(!parity_gate(false, 4 + 1));
        assert!(parity_gate(true, 1));
        assert!(parity_gate(false, 2));
    }
}
