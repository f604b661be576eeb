//! Quick randomized consistency checks across all modules, for the `selftest`
//! subcommand. Each check is self-contained and seeded.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bch::{berlekamp, decode_minus1, decode_plus1_list, decode_plus2_list, decode_unique, BchCode};
use crate::channel::{bsc_corrupt, random_bits};
use crate::codec::{BwpCode, DecodeOptions, DecoderKind};
use crate::galois::{Elem, GaloisField};
use crate::layout::{plan_layout, solve_p, LayoutParams};
use crate::rs::RsCode;

pub struct CheckReport {
    pub name: &'static str,
    pub result: Result<String, String>,
}

type Check = fn(&mut ChaCha8Rng) -> Result<String, String>;

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let checks: [(&'static str, Check); 7] = [
        ("field-axioms", field_axioms),
        ("syndrome-structure", syndrome_structure),
        ("bch-round-trip", bch_round_trip),
        ("list-decoding", list_decoding),
        ("rs-erasures", rs_erasures),
        ("layout-invariants", layout_invariants),
        ("codec-round-trip", codec_round_trip),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, &(name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            CheckReport {
                name,
                result: check(&mut rng),
            }
        })
        .collect()
}

fn field_axioms(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for m in 3..=16 {
        let f = GaloisField::new(m).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let a = rng.random_range(1..f.size()) as Elem;
            let b = rng.random_range(0..f.size()) as Elem;
            let c = rng.random_range(0..f.size()) as Elem;
            check!(f.mul(a, f.inv(a)) == 1, "GF(2^{m}): a·a⁻¹ ≠ 1 for {a}");
            check!(f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c), "GF(2^{m}): distributivity");
            check!(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)), "GF(2^{m}): associativity");
        }
    }
    Ok("GF(2^3)..GF(2^16)".into())
}

fn syndrome_structure(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let field = Arc::new(GaloisField::new(8).unwrap());
    let code = BchCode::new(field.clone(), 200, 6, true).map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let word: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
        let syn = code.syndromes(&word).unwrap();
        let full = syn.expand(&field);
        for i in 0..full.len() / 2 {
            check!(full[2 * i + 1] == field.square(full[i]), "S_(2i+1) ≠ S_i²");
        }
        let direct: Vec<Elem> = (0..code.t())
            .map(|i| {
                word.iter()
                    .enumerate()
                    .filter(|(_, &b)| b == 1)
                    .fold(0, |acc, (j, _)| acc ^ field.alpha_pow((j * (2 * i + 1)) as i64))
            })
            .collect();
        check!(syn.even == direct, "syndromes differ from direct evaluation");
    }
    Ok("100 random words".into())
}

fn bch_round_trip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let field = Arc::new(GaloisField::new(10).unwrap());
    let code = BchCode::new(field, 700, 4, true).map_err(|e| e.to_string())?;
    let dom = code.full_domain();
    for _ in 0..300 {
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let mut word = code.encode(&msg).unwrap();
        let e = rng.random_range(0..=code.t());
        let mut pos = sample(rng, code.n(), e).into_vec();
        pos.sort_unstable();
        pos.iter().for_each(|&p| word[p] ^= 1);
        let syn = code.syndromes(&word).unwrap();
        let got = decode_unique(&code, &syn, &dom).map(|c| c.positions);
        check!(got.as_ref() == Some(&pos), "unique decode of {pos:?} gave {got:?}");
        if e < code.t() {
            let got = decode_minus1(&code, &syn, &dom).map(|c| c.positions);
            check!(got.as_ref() == Some(&pos), "t-1 decode of {pos:?} gave {got:?}");
        }
    }
    Ok("300 words of a (700, 660) eBCH code".into())
}

fn list_decoding(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let field = Arc::new(GaloisField::new(9).unwrap());
    let code = BchCode::new(field.clone(), 300, 3, true).map_err(|e| e.to_string())?;
    let dom = code.full_domain();
    for extra in [1, 2] {
        for _ in 0..100 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let mut word = code.encode(&msg).unwrap();
            let mut pos = sample(rng, code.n(), code.t() + extra).into_vec();
            pos.sort_unstable();
            pos.iter().for_each(|&p| word[p] ^= 1);
            let syn = code.syndromes(&word).unwrap();
            let state = berlekamp(&field, &syn);
            let list = if extra == 1 {
                decode_plus1_list(&code, &syn, &state, &dom)
            } else {
                decode_plus2_list(&code, &syn, &state, &dom)
            };
            let closer = decode_unique(&code, &syn, &dom);
            check!(
                list.iter().any(|c| c.positions == pos) || closer.is_some(),
                "+{extra} list misses the transmitted word {pos:?}: L={} list {:?}", state.l_lambda, list
            );
            for cand in &list {
                let mut fixed = word.clone();
                cand.apply(&mut fixed);
                check!(code.syndromes(&fixed).unwrap().is_zero(), "+{extra} candidate is not a codeword");
            }
        }
    }
    Ok("t+1 and t+2 errors listed".into())
}

fn rs_erasures(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for (w, n, f) in [(8u32, 60usize, 4usize), (15, 97, 4), (4, 15, 3)] {
        let code = RsCode::new(Arc::new(GaloisField::new(w).unwrap()), n, f).map_err(|e| e.to_string())?;
        let q = 1usize << w;
        for _ in 0..200 {
            let data: Vec<Elem> = (0..n - f).map(|_| rng.random_range(0..q) as Elem).collect();
            let clean = code.encode(&data).unwrap();
            let mut word = clean.clone();
            let e = rng.random_range(0..=f);
            let pos = sample(rng, n, e).into_vec();
            pos.iter().for_each(|&p| word[p] ^= rng.random_range(1..q) as Elem);
            let vals = code
                .erasure_decode(&code.syndromes(&word).unwrap(), &pos)
                .map_err(|e| e.to_string())?;
            pos.iter().zip(&vals).for_each(|(&p, &v)| word[p] ^= v);
            check!(word == clean, "GF(2^{w}) n={n} f={f}: erasures {pos:?} not recovered");
        }
    }
    Ok("three RS codes".into())
}

fn layout_invariants(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut planned = 0;
    for _ in 0..200 {
        let eta = rng.random_range(1..100_000);
        let p = solve_p(eta);
        check!(p * (p - 1) < eta && eta <= p * (p + 1), "solve_p({eta}) = {p}");

        let k = rng.random_range(1000..40_000);
        let r = rng.random_range(k / 20..k / 4);
        let b = rng.random_range(8..33);
        let f = rng.random_range(0..5);
        let Ok(cfg) = plan_layout(&LayoutParams::new(k, r, b, f)) else {
            continue;
        };
        planned += 1;
        check!(cfg.consumed_parity() <= r, "({k},{r},{b},{f}) overruns the parity budget");
        check!(cfg.theta < cfg.word_count(), "({k},{r},{b},{f}) theta {} too large", cfg.theta);
        let t_sum: usize = cfg.words.iter().map(|w| w.t).sum();
        check!(t_sum == cfg.word_count() * cfg.t_base + cfg.theta, "upgrades miscounted");
        let mut covered = vec![0u8; cfg.eta];
        for w in &cfg.words {
            w.cells.iter().for_each(|&c| covered[c] += 1);
        }
        check!(covered.iter().all(|&n| n == 2), "({k},{r},{b},{f}) cell not covered by exactly two words");
    }
    Ok(format!("{planned} random feasible layouts"))
}

fn codec_round_trip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let cfg = plan_layout(&LayoutParams::new(4096, 600, 10, 2)).map_err(|e| e.to_string())?;
    let code = BwpCode::new(cfg).map_err(|e| e.to_string())?;
    let opts = DecodeOptions {
        decoder: DecoderKind::Plus2,
        verify_syndromes: true,
        ..DecodeOptions::default()
    };
    let mut decoded = 0;
    for _ in 0..100 {
        let msg = random_bits(rng, code.message_len());
        let internal = code.encode_internal(&msg).map_err(|e| e.to_string())?;
        check!(code.is_codeword(&internal), "encoder output is not a codeword");
        let mut frame = code.to_frame(&internal);
        bsc_corrupt(&mut frame, 0.004, rng);
        let out = code.decode(&frame, &opts).map_err(|e| e.to_string())?;
        if out.is_success() {
            let again = code.encode_internal(&out.message).map_err(|e| e.to_string())?;
            check!(code.is_codeword(&again), "success without a consistent message");
            decoded += (out.message == msg) as usize;
        }
    }
    check!(decoded >= 95, "only {decoded}/100 noisy frames decoded");
    Ok(format!("{decoded}/100 noisy frames decoded"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for report in super::run_all(1) {
            assert!(report.result.is_ok(), "{}: {:?}", report.name, report.result);
        }
    }
}
