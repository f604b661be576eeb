//! Bounded-distance decoding: unique (radius t) and reduced-1-bit (radius t-1).

use super::berlekamp::{berlekamp, KeyEquationState};
use super::{BchCode, Correction, Syndromes};

/// Positions `j` in `domain` with Λ(α_j^{-1}) = 0.
pub fn chien_search(code: &BchCode, lambda: &[crate::galois::Elem], domain: &[usize]) -> Vec<usize> {
    roots_up_to(code, lambda, domain, usize::MAX)
}

/// Chien search that stops after `limit` roots.
pub(crate) fn roots_up_to(
    code: &BchCode,
    lambda: &[crate::galois::Elem],
    domain: &[usize],
    limit: usize,
) -> Vec<usize> {
    let f = code.field();
    let mut roots = Vec::new();
    for &j in domain {
        if f.eval(lambda, code.inv_locator(j)) == 0 {
            roots.push(j);
            if roots.len() == limit {
                break;
            }
        }
    }
    roots
}

/// Root search on a Berlekamp state: succeeds iff Λ has exactly L_Λ distinct
/// roots in `domain` and, for extended codes, the flip count agrees with the
/// parity syndrome.
pub(crate) fn locate(
    code: &BchCode,
    state: &KeyEquationState,
    parity: bool,
    domain: &[usize],
) -> Option<Correction> {
    let l = state.l_lambda;
    // Λ cannot have more roots than its degree.
    if state.lambda_degree() != l {
        return None;
    }
    if code.is_extended() && (l % 2 == 1) != parity {
        return None;
    }
    if l == 0 {
        return Some(Correction::default());
    }
    let roots = roots_up_to(code, &state.lambda, domain, l);
    (roots.len() == l).then(|| Correction::new(roots))
}

/// Conventional decoding up to t errors.
pub fn decode_unique(code: &BchCode, syndromes: &Syndromes, domain: &[usize]) -> Option<Correction> {
    let state = berlekamp(code.field(), syndromes);
    if state.l_lambda > code.t() {
        return None;
    }
    locate(code, &state, syndromes.parity, domain)
}

/// What a reduced-1-bit decode did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minus1Trace {
    pub correction: Option<Correction>,
    pub l_lambda: usize,
    pub chien_performed: bool,
}

/// Decoding up to t-1 errors using all 2t syndromes; no root search is run
/// once L_Λ reaches t.
pub fn decode_minus1_traced(code: &BchCode, syndromes: &Syndromes, domain: &[usize]) -> Minus1Trace {
    let state = berlekamp(code.field(), syndromes);
    if state.l_lambda >= code.t() {
        return Minus1Trace {
            correction: None,
            l_lambda: state.l_lambda,
            chien_performed: false,
        };
    }
    Minus1Trace {
        correction: locate(code, &state, syndromes.parity, domain),
        l_lambda: state.l_lambda,
        chien_performed: true,
    }
}

pub fn decode_minus1(code: &BchCode, syndromes: &Syndromes, domain: &[usize]) -> Option<Correction> {
    decode_minus1_traced(code, syndromes, domain).correction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn code(m: u32, n: usize, t: usize, ext: bool) -> BchCode {
        BchCode::new(Arc::new(GaloisField::new(m).unwrap()), n, t, ext).unwrap()
    }

    fn with_errors(code: &BchCode, rng: &mut ChaCha8Rng, w: usize) -> (Vec<u8>, Vec<u8>, Vec<usize>) {
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&msg).unwrap();
        let mut pos = sample(rng, code.n(), w).into_vec();
        pos.sort_unstable();
        let mut r = cw.clone();
        pos.iter().for_each(|&p| r[p] ^= 1);
        (cw, r, pos)
    }

    #[test]
    fn chien_examples() {
        let c = code(5, 31, 2, false);
        let f = c.field().clone();
        assert!(chien_search(&c, &[1], &c.full_domain()).is_empty());
        let lambda = f.poly_mul(&[1, c.locator(3)], &[1, c.locator(7)]);
        assert_eq!(chien_search(&c, &lambda, &c.full_domain()), vec![3, 7]);
    }

    #[test]
    fn chien_on_degree_four_with_two_locator_roots() {
        let c = code(5, 20, 2, false);
        let f = c.field().clone();
        // two roots inside the shortened domain, two outside (positions 25, 28)
        let lambda = [3usize, 11, 25, 28]
            .iter()
            .fold(vec![1], |acc, &p| f.poly_mul(&acc, &[1, f.alpha_pow(p as i64)]));
        let roots = chien_search(&c, &lambda, &c.full_domain());
        // brute-force evaluation at every inverse locator of the domain
        let brute: Vec<usize> = (0..20)
            .filter(|&j| f.eval(&lambda, f.alpha_pow(-(j as i64))) == 0)
            .collect();
        assert_eq!(roots, brute);
        assert_eq!(roots, vec![3, 11]);
    }

    #[test]
    fn unique_decode_round_trips() {
        let c = code(6, 60, 4, true);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for w in 0..=4 {
            for _ in 0..100 {
                let (_, r, pos) = with_errors(&c, &mut rng, w);
                let syn = c.syndromes(&r).unwrap();
                let corr = decode_unique(&c, &syn, &c.full_domain()).expect("within radius");
                assert_eq!(corr.positions, pos);
            }
        }
    }

    #[test]
    fn extended_code_detects_t_plus_one() {
        // eBCH distance >= 2t + 2, so t + 1 errors are never miscorrected.
        let c = code(6, 63, 3, true);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let (_, r, _) = with_errors(&c, &mut rng, 4);
            let syn = c.syndromes(&r).unwrap();
            assert!(decode_unique(&c, &syn, &c.full_domain()).is_none());
        }
    }

    #[test]
    fn minus1_behaviour() {
        let c = code(7, 127, 4, true);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zero = decode_minus1(&c, &Syndromes::zero(4), &c.full_domain()).unwrap();
        assert!(zero.is_empty());
        for _ in 0..200 {
            let (_, r, pos) = with_errors(&c, &mut rng, 3);
            let syn = c.syndromes(&r).unwrap();
            assert_eq!(decode_minus1(&c, &syn, &c.full_domain()).unwrap().positions, pos);
            let (_, r, _) = with_errors(&c, &mut rng, 4);
            let trace = decode_minus1_traced(&c, &c.syndromes(&r).unwrap(), &c.full_domain());
            assert_eq!(trace.l_lambda, 4);
            assert!(!trace.chien_performed);
            assert!(trace.correction.is_none());
        }
    }

    #[test]
    fn full_length_t_plus_one_may_miscorrect() {
        let c = code(6, 63, 3, false);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut miscorrections = 0;
        for _ in 0..2000 {
            let (cw, r, _) = with_errors(&c, &mut rng, 4);
            if let Some(corr) = decode_unique(&c, &c.syndromes(&r).unwrap(), &c.full_domain()) {
                let mut fixed = r.clone();
                corr.apply(&mut fixed);
                assert!(c.syndromes(&fixed).unwrap().is_zero());
                assert_ne!(fixed, cw);
                miscorrections += 1;
            }
        }
        assert!(miscorrections > 0);
    }
}
