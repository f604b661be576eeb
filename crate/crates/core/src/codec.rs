//! Frame encoder and the three-phase iterative hard decoder.
//!
//! Frames are handled internally as one bit vector: the grid cells in
//! placement order (cell `c` at bits `c·b..(c+1)·b`, pad bits included), then
//! the eBCH parity bits of every word in word order. The transmitted frame is
//! the same vector with the pad bits removed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::bch::{
    berlekamp, decode_minus1, decode_plus1_list, decode_plus2_list, decode_unique, parity_gate, BchCode,
    BchError, Correction, Syndromes,
};
use crate::galois::{Elem, FieldError, GaloisField};
use crate::layout::{Axis, CellKind, CodeConfig};
use crate::rs::{RsCode, RsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("word {word}: generator has {actual} parity bits, layout reserves {planned}")]
    ParityMismatch { word: usize, planned: usize, actual: usize },
    #[error(transparent)]
    Bch(#[from] BchError),
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Which list decoders Phase III may use. With `Plus2`, +2 lists are tried
/// only once a Phase III iteration on +1 lists alone has stalled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    /// No Phase III.
    Unique,
    Plus1,
    Plus2,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 3] = [DecoderKind::Unique, DecoderKind::Plus1, DecoderKind::Plus2];

    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Unique => "unique",
            DecoderKind::Plus1 => "plus1",
            DecoderKind::Plus2 => "plus2",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unique" => Ok(DecoderKind::Unique),
            "plus1" | "+1" => Ok(DecoderKind::Plus1),
            "plus2" | "+2" => Ok(DecoderKind::Plus2),
            _ => Err(format!("unknown decoder '{s}' (expected unique, plus1 or plus2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Total iteration budget shared by all phases.
    pub max_iters: usize,
    pub decoder: DecoderKind,
    /// Recompute every syndrome after each half-iteration and panic on drift.
    pub verify_syndromes: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            max_iters: 32,
            decoder: DecoderKind::Plus1,
            verify_syndromes: false,
        }
    }
}

impl DecodeOptions {
    pub fn with_decoder(decoder: DecoderKind) -> Self {
        Self {
            decoder,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Decoding to radius t - 1.
    Minus1,
    /// Unique decoding of failed words.
    Unique,
    /// List decoding with cross validation.
    List,
}

impl Phase {
    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Minus1 => "I",
            Phase::Unique => "II",
            Phase::List => "III",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeStats {
    pub iterations: usize,
    /// Non-empty word corrections per phase.
    pub corrections: [usize; 3],
    pub list_invocations: usize,
    pub list_commits: usize,
    /// Erasure decodings that changed at least one block.
    pub rs_recoveries: usize,
    pub final_phase: Phase,
}

impl Default for DecodeStats {
    fn default() -> Self {
        Self {
            iterations: 0,
            corrections: [0; 3],
            list_invocations: 0,
            list_commits: 0,
            rs_recoveries: 0,
            final_phase: Phase::Minus1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Decoded message. On failure this is the best effort at the point of
    /// giving up.
    pub message: Vec<u8>,
    pub stats: DecodeStats,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// Outcome of the success check run after every half-iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Success,
    Continue,
    Fail,
    /// Some erased blocks were recovered; others remain.
    Partial,
}

/// A planned code with everything needed to encode and decode frames.
#[derive(Debug, Clone)]
pub struct BwpCode {
    config: CodeConfig,
    bch: Vec<Arc<BchCode>>,
    /// Per word, positions that may be flipped (pad bits excluded).
    domains: Vec<Vec<usize>>,
    parity_base: Vec<usize>,
    internal_len: usize,
    rs: Vec<RsCode>,
    /// RS position of every cell.
    rs_pos: Vec<usize>,
    /// Per block bit: (sub-code, bit within the sub-symbol).
    sub_bits: Vec<(usize, u32)>,
    /// Per sub-code, β^{position·i} for position-major, i-minor.
    rs_powers: Vec<Vec<Elem>>,
    parity_cells: Vec<usize>,
}

impl BwpCode {
    pub fn new(config: CodeConfig) -> Result<Self, CodecError> {
        let b = config.block_bits();
        let field = Arc::new(GaloisField::with_poly(config.m, config.bch_poly)?);
        let mut cache: HashMap<(usize, usize), Arc<BchCode>> = HashMap::new();
        let mut bch = Vec::with_capacity(config.words.len());
        let mut parity_base = Vec::with_capacity(config.words.len());
        let mut next = config.eta * b;
        for (w, word) in config.words.iter().enumerate() {
            let code = match cache.get(&(word.len(), word.t)) {
                Some(c) => c.clone(),
                None => {
                    let c = Arc::new(BchCode::new(field.clone(), word.len(), word.t, true)?);
                    cache.insert((word.len(), word.t), c.clone());
                    c
                }
            };
            if code.parity_len() != word.parity_bits {
                return Err(CodecError::ParityMismatch {
                    word: w,
                    planned: word.parity_bits,
                    actual: code.parity_len(),
                });
            }
            bch.push(code);
            parity_base.push(next);
            next += word.parity_bits;
        }

        let k = config.params.message_bits;
        let pad = k..config.message_blocks * b;
        let domains = config
            .words
            .iter()
            .map(|word| {
                let mut dom: Vec<usize> = (0..word.parity_bits).collect();
                for (slot, &c) in word.cells.iter().enumerate() {
                    let base = word.parity_bits + slot * b;
                    dom.extend((0..b).filter(|&i| !pad.contains(&(c * b + i))).map(|i| base + i));
                }
                dom
            })
            .collect();

        let mut rs = Vec::new();
        let mut rs_pos = vec![0; config.eta];
        let mut sub_bits = Vec::with_capacity(b);
        let mut rs_powers = Vec::new();
        let mut parity_cells = vec![0; config.rs_parity()];
        if let Some(plan) = &config.rs {
            let f = plan.parity_blocks;
            for (c, cell) in config.cells.iter().enumerate() {
                rs_pos[c] = match cell.kind {
                    CellKind::Message(i) => f + plan.data_index(cell.row, cell.col, i),
                    CellKind::Parity(i) => {
                        parity_cells[i] = c;
                        i
                    }
                };
            }
            for (s, &w) in plan.widths.iter().enumerate() {
                let gf = match config.params.rs_poly {
                    Some(poly) if poly >> w == 1 => GaloisField::with_poly(w, poly)?,
                    _ => GaloisField::new(w)?,
                };
                let code = RsCode::new(Arc::new(gf), plan.code_len(), f)?;
                let f_ref = code.field();
                let mut powers = Vec::with_capacity(plan.code_len() * f);
                for pos in 0..plan.code_len() {
                    for i in 0..f {
                        powers.push(f_ref.alpha_pow((pos * i) as i64));
                    }
                }
                rs_powers.push(powers);
                rs.push(code);
                sub_bits.extend((0..w).map(|bit| (s, bit)));
            }
        }

        Ok(Self {
            config,
            bch,
            domains,
            parity_base,
            internal_len: next,
            rs,
            rs_pos,
            sub_bits,
            rs_powers,
            parity_cells,
        })
    }

    pub fn config(&self) -> &CodeConfig {
        &self.config
    }

    pub fn word_code(&self, word: usize) -> &BchCode {
        &self.bch[word]
    }

    pub fn message_len(&self) -> usize {
        self.config.params.message_bits
    }

    pub fn frame_len(&self) -> usize {
        self.internal_len - self.config.pad_bits
    }

    /// Length of the internal vector (frame plus pad bits).
    pub fn internal_len(&self) -> usize {
        self.internal_len
    }

    /// Internal bits of grid cell `cell`.
    pub fn cell_range(&self, cell: usize) -> Range<usize> {
        let b = self.config.block_bits();
        cell * b..(cell + 1) * b
    }

    /// Internal bits holding the eBCH parity of `word`.
    pub fn parity_range(&self, word: usize) -> Range<usize> {
        let base = self.parity_base[word];
        base..base + self.config.words[word].parity_bits
    }

    /// Frame position of an internal bit; `None` for pad bits.
    pub fn frame_position(&self, internal: usize) -> Option<usize> {
        let k = self.message_len();
        let pad_end = self.config.message_blocks * self.config.block_bits();
        if internal < k {
            Some(internal)
        } else if internal < pad_end {
            None
        } else {
            Some(internal - self.config.pad_bits)
        }
    }

    /// Internal bit of a frame position.
    pub fn internal_position(&self, frame: usize) -> usize {
        if frame < self.message_len() {
            frame
        } else {
            frame + self.config.pad_bits
        }
    }

    pub fn to_frame(&self, internal: &[u8]) -> Vec<u8> {
        let k = self.message_len();
        let pad_end = self.config.message_blocks * self.config.block_bits();
        let mut out = Vec::with_capacity(self.frame_len());
        out.extend_from_slice(&internal[..k]);
        out.extend_from_slice(&internal[pad_end..]);
        out
    }

    pub fn from_frame(&self, frame: &[u8]) -> Result<Vec<u8>, CodecError> {
        if frame.len() != self.frame_len() {
            return Err(CodecError::LengthMismatch {
                expected: self.frame_len(),
                got: frame.len(),
            });
        }
        let k = self.message_len();
        let mut out = Vec::with_capacity(self.internal_len);
        out.extend(frame[..k].iter().map(|b| b & 1));
        out.resize(k + self.config.pad_bits, 0);
        out.extend(frame[k..].iter().map(|b| b & 1));
        Ok(out)
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, CodecError> {
        Ok(self.to_frame(&self.encode_internal(message)?))
    }

    pub fn encode_internal(&self, message: &[u8]) -> Result<Vec<u8>, CodecError> {
        let k = self.message_len();
        if message.len() != k {
            return Err(CodecError::LengthMismatch {
                expected: k,
                got: message.len(),
            });
        }
        let b = self.config.block_bits();
        let mut bits = vec![0u8; self.internal_len];
        for (dst, src) in bits.iter_mut().zip(message) {
            *dst = src & 1;
        }

        if let Some(plan) = &self.config.rs {
            let f = plan.parity_blocks;
            let mut data = vec![vec![0 as Elem; plan.data_symbols]; self.rs.len()];
            for c in 0..self.config.message_blocks {
                let sym = plan.split(&bits[self.cell_range(c)]);
                for (s, v) in sym.into_iter().enumerate() {
                    data[s][self.rs_pos[c] - f] ^= v;
                }
            }
            let parity: Vec<Vec<Elem>> = self
                .rs
                .iter()
                .zip(&data)
                .map(|(code, d)| code.parity(d))
                .collect::<Result<_, _>>()?;
            for (i, &cell) in self.parity_cells.iter().enumerate() {
                let symbols: Vec<Elem> = parity.iter().map(|p| p[i]).collect();
                plan.join(&symbols, &mut bits[cell * b..(cell + 1) * b]);
            }
        }

        let mut data = Vec::new();
        for (w, word) in self.config.words.iter().enumerate() {
            data.clear();
            for &c in &word.cells {
                data.extend_from_slice(&bits[c * b..(c + 1) * b]);
            }
            let parity = self.bch[w].parity_bits(&data)?;
            bits[self.parity_range(w)].copy_from_slice(&parity);
        }
        Ok(bits)
    }

    /// Syndromes of `word` in the internal vector.
    pub fn word_syndromes(&self, internal: &[u8], word: usize) -> Syndromes {
        let b = self.config.block_bits();
        let desc = &self.config.words[word];
        let data = desc
            .cells
            .iter()
            .rev()
            .flat_map(|&c| internal[c * b..(c + 1) * b].iter().rev());
        let parity = internal[self.parity_range(word)].iter().rev();
        self.bch[word].syndromes_msb_first(data.chain(parity).map(|&x| x & 1 == 1))
    }

    /// RS syndromes of every sub-code in the internal vector.
    pub fn rs_syndromes(&self, internal: &[u8]) -> Vec<Vec<Elem>> {
        let Some(plan) = &self.config.rs else {
            return Vec::new();
        };
        let mut words = vec![vec![0 as Elem; plan.code_len()]; self.rs.len()];
        for c in 0..self.config.eta {
            for (s, v) in plan.split(&internal[self.cell_range(c)]).into_iter().enumerate() {
                words[s][self.rs_pos[c]] ^= v;
            }
        }
        self.rs
            .iter()
            .zip(&words)
            .map(|(code, w)| code.syndromes(w).expect("length fixed by plan"))
            .collect()
    }

    /// Whether every eBCH word and RS sub-code of the internal vector has zero syndromes.
    pub fn is_codeword(&self, internal: &[u8]) -> bool {
        internal.len() == self.internal_len
            && (0..self.config.words.len()).all(|w| self.word_syndromes(internal, w).is_zero())
            && self.rs_syndromes(internal).iter().flatten().all(|&s| s == 0)
    }

    /// (word, position) pairs covering an internal bit: two for cell bits,
    /// one for parity bits.
    fn owners(&self, idx: usize) -> ([(usize, usize); 2], usize) {
        let b = self.config.block_bits();
        if idx < self.config.eta * b {
            let c = idx / b;
            let bit = idx % b;
            let cell = &self.config.cells[c];
            let (rw, cw) = self.config.cell_words[c];
            let rp = self.config.words[rw].parity_bits + cell.col * b + bit;
            let cp = self.config.words[cw].parity_bits + cell.row * b + bit;
            ([(rw, rp), (cw, cp)], 2)
        } else {
            let w = self.parity_base.partition_point(|&base| base <= idx) - 1;
            ([(w, idx - self.parity_base[w]), (0, 0)], 1)
        }
    }

    fn internal_index(&self, word: usize, pos: usize) -> usize {
        let desc = &self.config.words[word];
        if pos < desc.parity_bits {
            self.parity_base[word] + pos
        } else {
            let b = self.config.block_bits();
            let d = pos - desc.parity_bits;
            desc.cells[d / b] * b + d % b
        }
    }

    pub fn decode(&self, frame: &[u8], options: &DecodeOptions) -> Result<DecodeOutcome, CodecError> {
        let internal = self.from_frame(frame)?;
        Ok(Decoder::new(self, options, internal).run())
    }
}

struct Decoder<'a> {
    code: &'a BwpCode,
    opts: &'a DecodeOptions,
    bits: Vec<u8>,
    syn: Vec<Syndromes>,
    rs_syn: Vec<Vec<Elem>>,
    /// Correction indicator.
    ci: Vec<bool>,
    /// Iteration of the last successful attempt, pending promotion to `ci`.
    settled_at: Vec<Option<usize>>,
    /// Syndrome update indicator.
    sui: Vec<bool>,
    phase: Phase,
    /// Phase III has stalled on +1 lists and now also tries +2.
    escalated: bool,
    iteration: usize,
    progress: bool,
    stats: DecodeStats,
}

impl<'a> Decoder<'a> {
    fn new(code: &'a BwpCode, opts: &'a DecodeOptions, bits: Vec<u8>) -> Self {
        let words = code.config.words.len();
        let syn = (0..words).map(|w| code.word_syndromes(&bits, w)).collect();
        let rs_syn = code.rs_syndromes(&bits);
        Self {
            code,
            opts,
            bits,
            syn,
            rs_syn,
            ci: vec![false; words],
            settled_at: vec![None; words],
            sui: vec![true; words],
            phase: Phase::Minus1,
            escalated: false,
            iteration: 0,
            progress: false,
            stats: DecodeStats::default(),
        }
    }

    fn failed(&self, w: usize) -> bool {
        !self.syn[w].is_zero()
    }

    fn counts(&self) -> (usize, usize) {
        let rows = self.code.config.rows;
        let fr = (0..rows).filter(|&w| self.failed(w)).count();
        let fc = (rows..self.syn.len()).filter(|&w| self.failed(w)).count();
        (fr, fc)
    }

    fn run(mut self) -> DecodeOutcome {
        let mut prev = self.counts();
        for iter in 1..=self.opts.max_iters {
            self.iteration = iter;
            self.stats.iterations = iter;
            self.progress = false;
            for axis in [Axis::Row, Axis::Column] {
                let range = match axis {
                    Axis::Row => 0..self.code.config.rows,
                    Axis::Column => self.code.config.rows..self.syn.len(),
                };
                for w in range {
                    self.attempt(w);
                }
                if self.opts.verify_syndromes {
                    self.verify();
                }
                match self.check_success() {
                    Check::Success => return self.finish(DecodeStatus::Success),
                    Check::Fail => return self.finish(DecodeStatus::Failure),
                    Check::Partial => self.progress = true,
                    Check::Continue => {}
                }
            }

            for w in 0..self.syn.len() {
                if matches!(self.settled_at[w], Some(i) if i < iter) && !self.failed(w) {
                    self.ci[w] = true;
                }
            }

            let now = self.counts();
            if self.progress {
                if self.phase == Phase::List {
                    self.enter(Phase::Unique);
                }
            } else if now == prev {
                match self.phase {
                    Phase::Minus1 => self.enter(Phase::Unique),
                    Phase::Unique if self.opts.decoder != DecoderKind::Unique => self.enter(Phase::List),
                    Phase::List if self.opts.decoder == DecoderKind::Plus2 && !self.escalated => {
                        self.escalated = true;
                        self.enter(Phase::List);
                    }
                    _ => return self.finish(DecodeStatus::Failure),
                }
            }
            prev = now;
        }
        self.finish(DecodeStatus::Failure)
    }

    fn enter(&mut self, phase: Phase) {
        if phase != Phase::List {
            self.escalated = false;
        }
        self.phase = phase;
        self.sui.iter_mut().for_each(|s| *s = true);
    }

    fn finish(mut self, status: DecodeStatus) -> DecodeOutcome {
        self.stats.final_phase = self.phase;
        self.bits.truncate(self.code.message_len());
        DecodeOutcome {
            status,
            message: self.bits,
            stats: self.stats,
        }
    }

    fn attempt(&mut self, w: usize) {
        if self.ci[w] || !self.sui[w] {
            return;
        }
        self.sui[w] = false;
        if !self.failed(w) {
            self.settled_at[w].get_or_insert(self.iteration);
            return;
        }
        let code = &self.code.bch[w];
        let dom = &self.code.domains[w];
        let result = match self.phase {
            Phase::Minus1 => decode_minus1(code, &self.syn[w], dom),
            Phase::Unique => decode_unique(code, &self.syn[w], dom),
            Phase::List => {
                self.attempt_list(w);
                return;
            }
        };
        if let Some(c) = result {
            self.commit(w, &c);
        }
    }

    /// Applies a successful decode of word `w`.
    fn commit(&mut self, w: usize, c: &Correction) {
        if !c.is_empty() {
            self.stats.corrections[self.phase.index()] += 1;
            for &pos in &c.positions {
                let idx = self.code.internal_index(w, pos);
                self.toggle(idx, Some(w));
            }
        }
        debug_assert!(!self.failed(w));
        self.sui[w] = false;
        self.settled_at[w] = Some(self.iteration);
    }

    /// Flips one internal bit, updating syndromes and indicators of every
    /// word covering it except `source`.
    fn toggle(&mut self, idx: usize, source: Option<usize>) {
        self.bits[idx] ^= 1;
        let (owners, count) = self.code.owners(idx);
        for &(w, pos) in &owners[..count] {
            self.syn[w].toggle_position(&self.code.bch[w], pos);
            if Some(w) != source {
                self.sui[w] = true;
                self.ci[w] = false;
                self.settled_at[w] = None;
            }
        }
        let b = self.code.config.block_bits();
        if idx < self.code.config.eta * b && !self.rs_syn.is_empty() {
            let (s, bit) = self.code.sub_bits[idx % b];
            let field = self.code.rs[s].field();
            let f = self.rs_syn[s].len();
            let pos = self.code.rs_pos[idx / b];
            let powers = &self.code.rs_powers[s][pos * f..(pos + 1) * f];
            for (syn, &p) in self.rs_syn[s].iter_mut().zip(powers) {
                *syn ^= field.mul(1 << bit, p);
            }
        }
    }

    /// Own parity bits plus the blocks whose crossing word is currently failed.
    fn list_domain(&self, w: usize) -> Vec<usize> {
        let cfg = &self.code.config;
        let b = cfg.block_bits();
        let parity_bits = cfg.words[w].parity_bits;
        let is_row = w < cfg.rows;
        let failed_slots: Vec<usize> = cfg.words[w]
            .cells
            .iter()
            .enumerate()
            .filter(|&(_, &c)| {
                let (rw, cw) = cfg.cell_words[c];
                self.failed(if is_row { cw } else { rw })
            })
            .map(|(slot, _)| slot)
            .collect();
        self.code.domains[w]
            .iter()
            .copied()
            .filter(|&p| p < parity_bits || failed_slots.binary_search(&((p - parity_bits) / b)).is_ok())
            .collect()
    }

    fn attempt_list(&mut self, w: usize) {
        let code = self.code.bch[w].clone();
        let t = code.t();
        let syn = self.syn[w].clone();
        let domain = self.list_domain(w);
        let state = berlekamp(code.field(), &syn);
        self.stats.list_invocations += 1;
        let mut candidates = Vec::new();
        if parity_gate(syn.parity, t + 1) {
            candidates = decode_plus1_list(&code, &syn, &state, &domain);
        }
        if candidates.is_empty() && self.escalated && parity_gate(syn.parity, t + 2) {
            candidates = decode_plus2_list(&code, &syn, &state, &domain);
        }
        let Some((chosen, crossing)) = self.select_candidate(w, &candidates) else {
            return;
        };
        self.commit(w, &chosen);
        self.stats.list_commits += 1;
        self.progress = true;
        for cw in crossing {
            if !self.failed(cw) {
                continue;
            }
            if let Some(c) = decode_unique(&self.code.bch[cw], &self.syn[cw], &self.code.domains[cw]) {
                self.commit(cw, &c);
            }
        }
    }

    /// Picks the candidate under which the most currently failed crossing
    /// words unique-decode; ties go to fewer flips, then the smaller flip
    /// set. Returns the candidate and the crossing words it resolves.
    fn select_candidate(&self, w: usize, candidates: &[Correction]) -> Option<(Correction, Vec<usize>)> {
        let cfg = &self.code.config;
        let parity_bits = cfg.words[w].parity_bits;
        let mut best: Option<(usize, &Correction, Vec<usize>)> = None;
        for cand in candidates {
            let mut touched: BTreeMap<usize, Syndromes> = BTreeMap::new();
            for &pos in cand.positions.iter().filter(|&&p| p >= parity_bits) {
                let idx = self.code.internal_index(w, pos);
                let (owners, _) = self.code.owners(idx);
                let &(cw, cpos) = owners.iter().find(|&&(o, _)| o != w).expect("cell bits have two owners");
                touched
                    .entry(cw)
                    .or_insert_with(|| self.syn[cw].clone())
                    .toggle_position(&self.code.bch[cw], cpos);
            }
            let resolved: Vec<usize> = touched
                .iter()
                .filter(|(&cw, s)| {
                    self.failed(cw) && decode_unique(&self.code.bch[cw], s, &self.code.domains[cw]).is_some()
                })
                .map(|(&cw, _)| cw)
                .collect();
            let better = match &best {
                None => true,
                Some((count, prev, _)) => {
                    (resolved.len(), std::cmp::Reverse(cand.len()), std::cmp::Reverse(cand))
                        > (*count, std::cmp::Reverse(prev.len()), std::cmp::Reverse(*prev))
                }
            };
            if better {
                best = Some((resolved.len(), cand, resolved));
            }
        }
        best.filter(|(count, _, _)| *count > 0)
            .map(|(_, cand, resolved)| (cand.clone(), resolved))
    }

    fn rs_clean(&self) -> bool {
        self.rs_syn.iter().flatten().all(|&s| s == 0)
    }

    fn check_success(&mut self) -> Check {
        let cfg = &self.code.config;
        let failed_rows: Vec<usize> = (0..cfg.rows).filter(|&w| self.failed(w)).collect();
        let failed_cols: Vec<usize> = (0..cfg.cols).filter(|&c| self.failed(cfg.rows + c)).collect();
        if failed_rows.is_empty() && failed_cols.is_empty() {
            return if self.rs_clean() { Check::Success } else { Check::Fail };
        }
        let erased: Vec<usize> = failed_rows
            .iter()
            .flat_map(|&r| failed_cols.iter().filter_map(move |&c| cfg.cell_at(r, c)))
            .collect();
        if erased.is_empty() {
            // every block is covered by a decoded word; remaining failures
            // sit in eBCH parity and vanish on re-encoding
            return if self.rs_clean() { Check::Success } else { Check::Continue };
        }
        if erased.len() > cfg.rs_parity() {
            return Check::Continue;
        }
        self.erasure_recovery(&erased)
    }

    fn erasure_recovery(&mut self, erased: &[usize]) -> Check {
        let plan = self.code.config.rs.as_ref().expect("f > 0");
        let b = plan.block_bits();
        let mut by_pos: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &c in erased {
            by_pos.entry(self.code.rs_pos[c]).or_default().push(c);
        }
        let positions: Vec<usize> = by_pos.keys().copied().collect();
        let shared = by_pos.values().any(|cells| cells.len() > 1);
        let mut all_ok = true;
        let mut flips = Vec::new();
        let mut offset = 0;
        for (s, code) in self.code.rs.iter().enumerate() {
            let width = plan.widths[s] as usize;
            match code.erasure_decode(&self.rs_syn[s], &positions) {
                Ok(values) => {
                    for (pos, &v) in positions.iter().zip(&values) {
                        let cells = &by_pos[pos];
                        if cells.len() == 1 {
                            let base = cells[0] * b + offset;
                            flips.extend((0..width).filter(|&i| v >> i & 1 == 1).map(|i| base + i));
                        }
                    }
                }
                Err(_) => all_ok = false,
            }
            offset += width;
        }
        let changed = !flips.is_empty();
        for idx in flips {
            self.toggle(idx, None);
        }
        if changed {
            self.stats.rs_recoveries += 1;
        }
        if all_ok && !shared {
            Check::Success
        } else if changed {
            Check::Partial
        } else {
            Check::Continue
        }
    }

    fn verify(&self) {
        for w in 0..self.syn.len() {
            assert_eq!(
                self.syn[w],
                self.code.word_syndromes(&self.bits, w),
                "stored syndromes of word {w} drifted"
            );
        }
        assert_eq!(self.rs_syn, self.code.rs_syndromes(&self.bits), "stored RS syndromes drifted");
        for w in 0..self.syn.len() {
            assert!(!self.ci[w] || !self.failed(w), "word {w} has its correction indicator set but is failed");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{plan_layout, LayoutParams};
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> BwpCode {
        BwpCode::new(plan_layout(&LayoutParams::new(2000, 420, 10, 2)).unwrap()).unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, k: usize) -> Vec<u8> {
        (0..k).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn opts() -> DecodeOptions {
        DecodeOptions {
            verify_syndromes: true,
            ..DecodeOptions::default()
        }
    }

    #[test]
    fn encoded_frames_are_codewords() {
        let code = small();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(code.encode(&vec![0; 2000]).unwrap().iter().all(|&b| b == 0));
        for _ in 0..5 {
            let msg = random_message(&mut rng, 2000);
            let internal = code.encode_internal(&msg).unwrap();
            assert!(code.is_codeword(&internal));
            let frame = code.to_frame(&internal);
            assert_eq!(frame.len(), code.frame_len());
            assert_eq!(code.from_frame(&frame).unwrap(), internal);
            assert_eq!(&frame[..2000], &msg[..]);
        }
        assert!(code.encode(&[0; 3]).is_err());
    }

    #[test]
    fn noiseless_frame_decodes_at_once() {
        let code = small();
        let msg = random_message(&mut ChaCha8Rng::seed_from_u64(2), 2000);
        let out = code.decode(&code.encode(&msg).unwrap(), &opts()).unwrap();
        assert!(out.is_success());
        assert_eq!(out.message, msg);
        assert_eq!(out.stats.iterations, 1);
        assert_eq!(out.stats.corrections, [0; 3]);
    }

    #[test]
    fn errors_in_one_row_are_corrected() {
        let code = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let msg = random_message(&mut rng, 2000);
        let clean = code.encode(&msg).unwrap();
        let t = code.config().words[0].t;

        // only the row's own parity bits: repaired by re-encoding
        let mut frame = clean.clone();
        for i in code.parity_range(0).take(t) {
            frame[code.frame_position(i).unwrap()] ^= 1;
        }
        let out = code.decode(&frame, &opts()).unwrap();
        assert!(out.is_success());
        assert_eq!(out.message, msg);
        assert_eq!(out.stats.iterations, 1);

        // t data bits in distinct columns
        let mut frame = clean;
        let b = code.config().block_bits();
        let width = code.config().words[0].block_count();
        for slot in sample(&mut rng, width, t) {
            let pos = code.config().words[0].parity_bits + slot * b + rng.random_range(0..b);
            let idx = code.internal_index(0, pos);
            if let Some(fp) = code.frame_position(idx) {
                frame[fp] ^= 1;
            }
        }
        let out = code.decode(&frame, &opts()).unwrap();
        assert!(out.is_success());
        assert_eq!(out.message, msg);
    }

    #[test]
    fn crossing_failure_recovered_by_erasure() {
        let code = small();
        let cfg = code.config().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msg = random_message(&mut rng, 2000);
        let mut frame = code.encode(&msg).unwrap();
        let (row, col) = (2, 3);
        let cell = cfg.cell_at(row, col).unwrap();
        let row_t = cfg.words[row].t;
        let col_t = cfg.words[cfg.rows + col].t;
        // beyond both radii inside the shared block and nowhere else
        assert!(cfg.block_bits() > row_t.max(col_t) + 2);
        for i in code.cell_range(cell).take(row_t.max(col_t) + 2) {
            frame[code.frame_position(i).unwrap()] ^= 1;
        }
        let out = code.decode(&frame, &opts()).unwrap();
        assert!(out.is_success(), "{:?}", out.stats);
        assert_eq!(out.message, msg);
        assert_eq!(out.stats.rs_recoveries, 1);
    }

    #[test]
    fn garbage_fails() {
        let code = small();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = random_message(&mut rng, code.frame_len());
        let out = code.decode(&frame, &opts()).unwrap();
        assert!(!out.is_success());
    }

    #[test]
    fn decoder_kind_round_trips() {
        for d in DecoderKind::ALL {
            assert_eq!(d.to_string().parse::<DecoderKind>().unwrap(), d);
        }
        assert!("plus3".parse::<DecoderKind>().is_err());
    }
}
