//! Test-side reference implementations, deliberately independent of the
//! library: bit-serial field arithmetic, generators from coset products, and
//! decoding by remainder lookup or codeword enumeration.

#![allow(dead_code)]

use std::collections::HashMap;

use itertools::Itertools;

/// GF(2^m) by shift-and-add multiplication.
#[derive(Debug, Clone, Copy)]
pub struct NaiveGf {
    pub m: u32,
    pub poly: u32,
}

impl NaiveGf {
    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> self.m & 1 == 1 {
                a ^= self.poly;
            }
        }
        acc
    }

    pub fn alpha_pow(&self, e: u64) -> u32 {
        (0..e % ((1 << self.m) - 1)).fold(1, |acc, _| self.mul(acc, 2))
    }

    pub fn order(&self) -> u64 {
        (1 << self.m) - 1
    }
}

/// Polynomials over GF(2^m) as coefficient vectors, lowest first.
fn ext_mul(gf: &NaiveGf, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= gf.mul(x, y);
        }
    }
    out
}

/// Generator as a bit mask: product over the distinct cosets of {1, 3, ..., 2t-1}
/// of ∏(x - α^c), times (x + 1) when `extended`.
pub fn generator_mask(gf: &NaiveGf, t: usize, extended: bool) -> u128 {
    let n = gf.order();
    let mut exps: Vec<u64> = Vec::new();
    for i in (1..2 * t as u64).step_by(2) {
        let mut c = i % n;
        loop {
            if !exps.contains(&c) {
                exps.push(c);
            }
            c = c * 2 % n;
            if c == i % n {
                break;
            }
        }
    }
    if extended && !exps.contains(&0) {
        exps.push(0);
    }
    let poly = exps
        .iter()
        .fold(vec![1u32], |acc, &e| ext_mul(gf, &acc, &[gf.alpha_pow(e), 1]));
    poly.iter().enumerate().fold(0u128, |acc, (i, &c)| {
        assert!(c <= 1, "generator must be binary");
        acc | (c as u128) << i
    })
}

pub fn degree(mask: u128) -> usize {
    127 - mask.leading_zeros() as usize
}

/// `a · b` over GF(2).
pub fn clmul(a: u128, b: u128) -> u128 {
    let mut acc = 0;
    for i in 0..128 {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    acc
}

/// Residues x^j mod g for j in 0..n.
pub fn residues(g: u128, n: usize) -> Vec<u128> {
    let d = degree(g);
    let mut out = Vec::with_capacity(n);
    let mut r: u128 = 1;
    for _ in 0..n {
        out.push(r);
        r <<= 1;
        if r >> d & 1 == 1 {
            r ^= g;
        }
    }
    out
}

/// Maps the residue of every pattern of weight ≤ `radius` to that pattern.
pub struct SyndromeTable {
    residues: Vec<u128>,
    table: HashMap<u128, Vec<usize>>,
}

impl SyndromeTable {
    pub fn new(g: u128, n: usize, radius: usize) -> Self {
        let residues = residues(g, n);
        let mut table = HashMap::new();
        for w in 0..=radius {
            for combo in (0..n).combinations(w) {
                let key = combo.iter().fold(0, |acc, &j| acc ^ residues[j]);
                let prev = table.insert(key, combo);
                assert!(prev.is_none(), "radius exceeds half the distance");
            }
        }
        Self { residues, table }
    }

    pub fn residue(&self, positions: impl IntoIterator<Item = usize>) -> u128 {
        positions.into_iter().fold(0, |acc, j| acc ^ self.residues[j])
    }

    pub fn residue_of_bits(&self, bits: &[u8]) -> u128 {
        self.residue(bits.iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| j))
    }

    /// The unique pattern within the radius sharing this residue.
    pub fn lookup(&self, residue: u128) -> Option<&Vec<usize>> {
        self.table.get(&residue)
    }

    /// Patterns of weight exactly radius + 1 sharing `residue`, found by
    /// flipping each single position and looking up the rest.
    pub fn one_beyond(&self, residue: u128, n: usize, radius: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for j in 0..n {
            if let Some(rest) = self.lookup(residue ^ self.residues[j]) {
                if rest.len() == radius && !rest.contains(&j) {
                    let mut p = rest.clone();
                    p.push(j);
                    p.sort_unstable();
                    out.push(p);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Patterns of weight exactly radius + 2 sharing `residue`, by pair flips.
    pub fn two_beyond(&self, residue: u128, n: usize, radius: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let key = residue ^ self.residues[i] ^ self.residues[j];
                if let Some(rest) = self.lookup(key) {
                    if rest.len() == radius && !rest.contains(&i) && !rest.contains(&j) {
                        let mut p = rest.clone();
                        p.push(i);
                        p.push(j);
                        p.sort_unstable();
                        out.push(p);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Every codeword of the length-`n` code generated by `g`, as bit masks.
pub fn enumerate_codewords(g: u128, n: usize) -> Vec<u64> {
    let k = n - degree(g);
    assert!(k <= 20);
    (0..1u128 << k).map(|msg| clmul(msg, g) as u64).collect()
}

/// Nearest codeword to `word` and its distance; `None` when tied.
pub fn nearest_codeword(codewords: &[u64], word: u64) -> Option<(u64, u32)> {
    let mut best = (u32::MAX, 0u64, 0usize);
    for &c in codewords {
        let d = (c ^ word).count_ones();
        if d < best.0 {
            best = (d, c, 1);
        } else if d == best.0 {
            best.2 += 1;
        }
    }
    (best.2 == 1).then_some((best.1, best.0))
}

pub fn mask_to_bits(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|j| (mask >> j & 1) as u8).collect()
}

pub fn positions_to_mask(positions: &[usize]) -> u64 {
    positions.iter().fold(0, |acc, &j| acc | 1 << j)
}

/// Smallest primitive polynomial of degree m, found by checking the order of x.
pub fn smallest_primitive(m: u32) -> u32 {
    (1u32 << m | 1..1 << (m + 1))
        .step_by(2)
        .find(|&p| {
            let gf = NaiveGf { m, poly: p };
            let mut x = 1;
            for e in 1..=gf.order() {
                x = gf.mul(x, 2);
                if x == 1 {
                    return e == gf.order();
                }
            }
            false
        })
        .unwrap()
}

/// Wilson score interval for k successes in n trials at 95%.
pub fn wilson95(k: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * ((p * (1.0 - p) / n_f) + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
