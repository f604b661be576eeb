//! List decoding one and two bits beyond t, and the syndrome-sweep list
//! decoder for codes whose generator has extra consecutive roots.

use std::collections::BTreeSet;

use crate::galois::Elem;

use super::berlekamp::{berlekamp, KeyEquationState};
use super::decode::locate;
use super::{parity_gate, BchCode, Correction, Syndromes};

const NIL: u32 = u32::MAX;

/// Positions grouped by a field value: one chain head per element, reset in
/// O(1) by bumping a generation counter.
#[derive(Debug, Clone)]
pub struct ListBuckets {
    head: Vec<u32>,
    len: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
    next: Vec<u32>,
    pos: Vec<usize>,
}

impl ListBuckets {
    pub fn new(q: usize) -> Self {
        Self {
            head: vec![NIL; q],
            len: vec![0; q],
            stamp: vec![0; q],
            generation: 1,
            next: Vec::new(),
            pos: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.head.len()
    }

    /// Empties every bucket.
    pub fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.next.clear();
        self.pos.clear();
    }

    fn touch(&mut self, value: usize) {
        if self.stamp[value] != self.generation {
            self.stamp[value] = self.generation;
            self.head[value] = NIL;
            self.len[value] = 0;
        }
    }

    /// Adds `position` to bucket `value`; returns the new bucket size.
    pub fn insert(&mut self, value: Elem, position: usize) -> usize {
        let v = value as usize;
        self.touch(v);
        self.next.push(self.head[v]);
        self.pos.push(position);
        self.head[v] = (self.pos.len() - 1) as u32;
        self.len[v] += 1;
        self.len[v] as usize
    }

    pub fn bucket_len(&self, value: Elem) -> usize {
        let v = value as usize;
        if self.stamp[v] == self.generation {
            self.len[v] as usize
        } else {
            0
        }
    }

    /// Members of bucket `value`, most recent first.
    pub fn members(&self, value: Elem) -> Vec<usize> {
        let v = value as usize;
        let mut out = Vec::new();
        if self.stamp[v] != self.generation {
            return out;
        }
        let mut node = self.head[v];
        while node != NIL {
            out.push(self.pos[node as usize]);
            node = self.next[node as usize];
        }
        out
    }
}

/// Unique decoding, then one extra bit via the ratio Λ/𝓑 over `domain`.
pub fn decode_plus1_list(
    code: &BchCode,
    syndromes: &Syndromes,
    state: &KeyEquationState,
    domain: &[usize],
) -> Vec<Correction> {
    let t = code.t();
    let l = state.l_lambda;
    if l > t + 1 {
        return Vec::new();
    }
    if l <= t {
        if let Some(c) = locate(code, state, syndromes.parity, domain) {
            return vec![c];
        }
        if l < t {
            return Vec::new();
        }
    }
    if code.is_extended() && !parity_gate(syndromes.parity, t + 1) {
        return Vec::new();
    }

    let f = code.field();
    let mut buckets = ListBuckets::new(f.size());
    let mut out = Vec::new();
    for &j in domain {
        let x = code.inv_locator(j);
        let b = f.eval(&state.b_poly, x);
        if b == 0 {
            continue;
        }
        let q = f.div(f.eval(&state.lambda, x), b);
        if buckets.insert(q, j) == t + 1 {
            out.push(Correction::new(buckets.members(q)));
        }
    }
    out
}

/// State after pre-flipping position `i`, given Λ_i = Λ(α_i^{-1}) and
/// 𝓑_i = 𝓑(α_i^{-1}). The new locator vanishes at α_i^{-1}.
pub fn chase_flip_state(
    code: &BchCode,
    state: &KeyEquationState,
    i: usize,
    lambda_i: Elem,
    b_i: Elem,
) -> KeyEquationState {
    let f = code.field();
    let xi2 = f.square(code.inv_locator(i));
    let (la, lb) = (state.l_lambda, state.l_b);

    // s·P + u·R
    let combine = |s: Elem, p: &[Elem], u: Elem, r: &[Elem]| -> Vec<Elem> {
        let mut out = vec![0; p.len().max(r.len())];
        for (o, &c) in out.iter_mut().zip(p) {
            *o ^= f.mul(s, c);
        }
        for (o, &c) in out.iter_mut().zip(r) {
            *o ^= f.mul(u, c);
        }
        out
    };
    // (x^2 + xi2)·P
    let quad = |p: &[Elem]| -> Vec<Elem> {
        let mut out = vec![0; p.len() + 2];
        for (k, &c) in p.iter().enumerate() {
            out[k] ^= f.mul(xi2, c);
            out[k + 2] ^= c;
        }
        out
    };
    let shifted = |p: &[Elem]| -> Vec<Elem> {
        let mut out = vec![0, 0];
        out.extend_from_slice(p);
        out
    };

    let (lambda, b_poly, l_lambda, l_b) = if lambda_i == 0 || (b_i != 0 && la >= lb) {
        (
            combine(b_i, &state.lambda, lambda_i, &state.b_poly),
            quad(&state.b_poly),
            la,
            lb + 2,
        )
    } else if b_i == 0 || la + 1 < lb {
        (
            quad(&state.lambda),
            combine(b_i, &shifted(&state.lambda), f.mul(xi2, lambda_i), &state.b_poly),
            la + 2,
            lb,
        )
    } else {
        (
            combine(b_i, &state.lambda, lambda_i, &state.b_poly),
            combine(b_i, &shifted(&state.lambda), f.mul(xi2, lambda_i), &state.b_poly),
            la + 1,
            lb + 1,
        )
    };
    KeyEquationState {
        lambda: trimmed(lambda),
        b_poly: trimmed(b_poly),
        l_lambda,
        l_b,
    }
}

fn trimmed(mut p: Vec<Elem>) -> Vec<Elem> {
    while p.len() > 1 && p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// Unique decoding, then every pattern of t+2 flips: each position `i` is
/// pre-flipped in turn and the remaining t+1 are bucketed over later positions.
pub fn decode_plus2_list(
    code: &BchCode,
    syndromes: &Syndromes,
    state: &KeyEquationState,
    domain: &[usize],
) -> Vec<Correction> {
    let t = code.t();
    let l = state.l_lambda;
    // A pre-flip moves L_Λ up by 0, 1 or 2, and a (t+2)-bit locator needs t+1 or t+2.
    if l + 1 < t || l > t + 2 {
        return Vec::new();
    }
    if l <= t {
        if let Some(c) = locate(code, state, syndromes.parity, domain) {
            return vec![c];
        }
    }
    if code.is_extended() && !parity_gate(syndromes.parity, t + 2) {
        return Vec::new();
    }
    if domain.len() < t + 2 {
        return Vec::new();
    }

    let f = code.field();
    let xs2: Vec<Elem> = domain.iter().map(|&j| f.square(code.inv_locator(j))).collect();
    let lam: Vec<Elem> = domain
        .iter()
        .map(|&j| f.eval(&state.lambda, code.inv_locator(j)))
        .collect();
    let bee: Vec<Elem> = domain
        .iter()
        .map(|&j| f.eval(&state.b_poly, code.inv_locator(j)))
        .collect();
    let (la, lb) = (state.l_lambda, state.l_b);

    let mut buckets = ListBuckets::new(f.size());
    let mut found = BTreeSet::new();
    for a in 0..domain.len() - t - 1 {
        let (li, bi, xi2) = (lam[a], bee[a], xs2[a]);
        // Lengths after pre-flipping; only L_Λ in {t+1, t+2} can carry t+2 roots.
        let case = if li == 0 || (bi != 0 && la >= lb) {
            1
        } else if bi == 0 || la + 1 < lb {
            2
        } else {
            3
        };
        let l_new = match case {
            1 => la,
            2 => la + 2,
            _ => la + 1,
        };
        if l_new < t + 1 || l_new > t + 2 {
            continue;
        }
        buckets.clear();
        let li_xi2 = f.mul(li, xi2);
        for b in a + 1..domain.len() {
            let (lj, bj, xj2) = (lam[b], bee[b], xs2[b]);
            let (num, den) = match case {
                1 => (f.mul(bi, lj) ^ f.mul(li, bj), f.mul(xj2 ^ xi2, bj)),
                2 => (
                    f.mul(xj2 ^ xi2, lj),
                    f.mul(f.mul(bi, xj2), lj) ^ f.mul(li_xi2, bj),
                ),
                _ => (
                    f.mul(bi, lj) ^ f.mul(li, bj),
                    f.mul(f.mul(bi, xj2), lj) ^ f.mul(li_xi2, bj),
                ),
            };
            if den == 0 {
                continue;
            }
            let q = f.div(num, den);
            if buckets.insert(q, domain[b]) == t + 1 {
                let mut flips = buckets.members(q);
                flips.push(domain[a]);
                found.insert(Correction::new(flips));
            }
        }
    }
    found.into_iter().collect()
}

/// Sweeps the unknown S_{2t} over the field and continues the Berlekamp
/// recursion with the known S_{2t+2}, ..., S_{2t+2τ}, listing every
/// locator of up to t+τ+1 errors whose roots all lie in `domain`.
pub fn decode_sweep_list(
    code: &BchCode,
    syndromes: &Syndromes,
    known_high: &[Elem],
    domain: &[usize],
) -> Vec<Correction> {
    let f = code.field();
    let t = code.t();
    let tau = known_high.len();
    let base = berlekamp(f, syndromes);
    let mut full = syndromes.expand(f);
    // S_{2t}, S_{2t+1}, ..., S_{2t+2τ}
    full.resize(2 * t + 2 * tau + 1, 0);
    for (i, &s) in known_high.iter().enumerate() {
        full[2 * t + 2 * i + 2] = s;
    }
    for k in (2 * t + 1..full.len()).step_by(2) {
        full[k] = f.square(full[(k - 1) / 2]);
    }

    let radius = t + tau + 1;
    let mut found = BTreeSet::new();
    for guess in 0..f.size() {
        full[2 * t] = guess as Elem;
        let mut state = base.clone();
        state.run(f, &full, (2 * t..full.len()).step_by(2));
        if state.l_lambda > radius {
            continue;
        }
        if let Some(c) = locate(code, &state, syndromes.parity, domain) {
            found.insert(c);
        }
    }
    found.into_iter().collect()
}
