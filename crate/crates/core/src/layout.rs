//! Geometry of a block-wise product code from (K, R, b, f).
//!
//! The η = ⌈K/b⌉ + f blocks are placed column by column into a grid of p
//! rows and p or p + 1 columns: message blocks first, then the f RS parity
//! blocks. Each block row and block column is one eBCH word over a common
//! field GF(2^m).

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::galois::{default_primitive_poly, GaloisField, MAX_DIMENSION, MIN_DIMENSION};
use crate::rs::{FoldingPlan, RsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("message length, block size and parity length must be positive")]
    Empty,
    #[error("parity budget {r} does not cover {rs_bits} RS parity bits plus one parity bit per word ({words} words)")]
    ParityTooSmall { r: usize, rs_bits: usize, words: usize },
    #[error("field dimension m = {m} is outside {MIN_DIMENSION}..={MAX_DIMENSION}")]
    FieldDimension { m: u32 },
    #[error("t < 1: parity budget too small for even one correctable error per word at m = {m}")]
    ZeroCapability { m: u32 },
    #[error("t = {t} exceeds 2^(ceil(m/2)-1) for m = {m}; parity would not be t·m + 1")]
    LowRate { t: usize, m: u32 },
    #[error("word of {data_bits} data bits and {parity_bits} parity bits does not fit GF(2^{m})")]
    WordTooLong { data_bits: usize, parity_bits: usize, m: u32 },
    #[error("primitive polynomial {poly:#x} does not have degree {m}")]
    PolyDegree { poly: u32, m: u32 },
    #[error("RS layer: {0}")]
    Rs(#[from] RsError),
    #[error("config: {0}")]
    Config(String),
}

/// Inputs to [`plan_layout`] plus optional overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutParams {
    /// Message bits K.
    pub message_bits: usize,
    /// Parity budget R in bits.
    pub parity_bits: usize,
    /// Block width b in bits.
    pub block_bits: usize,
    /// RS parity blocks f.
    pub rs_parity: usize,
    /// Primitive polynomial for the eBCH field.
    pub bch_poly: Option<u32>,
    /// Primitive polynomial for RS sub-codes whose width matches its degree.
    pub rs_poly: Option<u32>,
    /// Minimum RS sub-symbol width.
    pub rs_width: Option<u32>,
    /// Fold message blocks along anti-diagonals (default: f ≤ 4).
    pub folding: Option<bool>,
}

impl LayoutParams {
    pub fn new(message_bits: usize, parity_bits: usize, block_bits: usize, rs_parity: usize) -> Self {
        Self {
            message_bits,
            parity_bits,
            block_bits,
            rs_parity,
            bch_poly: None,
            rs_poly: None,
            rs_width: None,
            folding: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys: K, R, b, f,
    /// bch_poly, rs_poly, rs_width, folding.
    pub fn parse(text: &str) -> Result<Self, LayoutError> {
        let mut params = Self::new(0, 0, 0, 0);
        let mut seen = [false; 4];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LayoutError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| LayoutError::Config(format!("line {}: invalid {what} '{value}'", lineno + 1));
            let int = |what: &str| value.parse::<usize>().map_err(|_| bad(what));
            let poly = |what: &str| {
                let v = value.strip_prefix("0x").or_else(|| value.strip_prefix("0X"));
                match v {
                    Some(hex) => u32::from_str_radix(hex, 16),
                    None => value.parse(),
                }
                .map_err(|_| bad(what))
            };
            match key {
                "K" => (params.message_bits, seen[0]) = (int("K")?, true),
                "R" => (params.parity_bits, seen[1]) = (int("R")?, true),
                "b" => (params.block_bits, seen[2]) = (int("b")?, true),
                "f" => (params.rs_parity, seen[3]) = (int("f")?, true),
                "bch_poly" => params.bch_poly = Some(poly("bch_poly")?),
                "rs_poly" => params.rs_poly = Some(poly("rs_poly")?),
                "rs_width" => params.rs_width = Some(int("rs_width")? as u32),
                "folding" => params.folding = Some(value.parse().map_err(|_| bad("folding"))?),
                other => return Err(LayoutError::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(LayoutError::Config(format!("missing key '{}'", ["K", "R", "b", "f"][i])));
        }
        Ok(params)
    }

    /// Inverse of [`Self::parse`].
    pub fn to_config_string(&self) -> String {
        let mut out = format!(
            "K = {}\nR = {}\nb = {}\nf = {}\n",
            self.message_bits, self.parity_bits, self.block_bits, self.rs_parity
        );
        if let Some(p) = self.bch_poly {
            let _ = writeln!(out, "bch_poly = {p:#x}");
        }
        if let Some(p) = self.rs_poly {
            let _ = writeln!(out, "rs_poly = {p:#x}");
        }
        if let Some(w) = self.rs_width {
            let _ = writeln!(out, "rs_width = {w}");
        }
        if let Some(fold) = self.folding {
            let _ = writeln!(out, "folding = {fold}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Column => "column",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// Message block index in 0..⌈K/b⌉.
    Message(usize),
    /// RS parity block index in 0..f.
    Parity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub kind: CellKind,
}

/// One row or column eBCH word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordDescriptor {
    pub axis: Axis,
    pub index: usize,
    /// Cells along the word, in increasing column (row word) or row (column word).
    pub cells: Vec<usize>,
    pub data_bits: usize,
    pub t: usize,
    /// t·m + 1.
    pub parity_bits: usize,
}

impl WordDescriptor {
    pub fn block_count(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.data_bits + self.parity_bits
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridCase {
    /// η ≤ p²: p × p grid, 2p words.
    Square,
    /// η > p²: p × (p + 1) grid, 2p + 1 words.
    Wide,
}

impl GridCase {
    pub fn number(self) -> u8 {
        match self {
            GridCase::Square => 1,
            GridCase::Wide => 2,
        }
    }
}

/// Complete code geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    pub params: LayoutParams,
    /// ⌈K/b⌉ + f.
    pub eta: usize,
    pub p: usize,
    pub case: GridCase,
    pub rows: usize,
    pub cols: usize,
    pub m: u32,
    pub bch_poly: u32,
    pub t_base: usize,
    pub theta: usize,
    pub message_blocks: usize,
    /// ⌈K/b⌉·b - K zero bits completing the last message block.
    pub pad_bits: usize,
    /// Grid cells in placement order (column-major).
    pub cells: Vec<Cell>,
    /// Rows 0..rows, then columns.
    pub words: Vec<WordDescriptor>,
    /// For each cell: (row word, column word) indices into `words`.
    pub cell_words: Vec<(usize, usize)>,
    /// None when f = 0.
    pub rs: Option<FoldingPlan>,
}

impl CodeConfig {
    pub fn block_bits(&self) -> usize {
        self.params.block_bits
    }

    pub fn rs_parity(&self) -> usize {
        self.params.rs_parity
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Parity bits actually used: eBCH parities plus f·b.
    pub fn consumed_parity(&self) -> usize {
        self.words.iter().map(|w| w.parity_bits).sum::<usize>() + self.rs_parity() * self.block_bits()
    }

    /// Transmitted frame length: K plus consumed parity.
    pub fn frame_bits(&self) -> usize {
        self.params.message_bits + self.consumed_parity()
    }

    pub fn rate(&self) -> f64 {
        self.params.message_bits as f64 / self.frame_bits() as f64
    }

    pub fn word_index(&self, axis: Axis, index: usize) -> usize {
        match axis {
            Axis::Row => index,
            Axis::Column => self.rows + index,
        }
    }

    pub fn row_words(&self) -> &[WordDescriptor] {
        &self.words[..self.rows]
    }

    pub fn column_words(&self) -> &[WordDescriptor] {
        &self.words[self.rows..]
    }

    /// Cell index at (row, col), if occupied.
    pub fn cell_at(&self, row: usize, col: usize) -> Option<usize> {
        let c = col * self.rows + row;
        (row < self.rows && col < self.cols && c < self.eta).then_some(c)
    }
}

/// The unique p with p(p-1) < η ≤ p(p+1).
pub fn solve_p(eta: usize) -> usize {
    assert!(eta >= 1);
    // smallest p with p(p+1) ≥ η
    let (mut lo, mut hi) = (1usize, 1usize);
    while hi * (hi + 1) < eta {
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mid * (mid + 1) >= eta {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// ⌈log2 x⌉ for x ≥ 1.
fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Derives the full geometry.
pub fn plan_layout(params: &LayoutParams) -> Result<CodeConfig, LayoutError> {
    let (k, r, b, f) = (params.message_bits, params.parity_bits, params.block_bits, params.rs_parity);
    if k == 0 || b == 0 || r == 0 {
        return Err(LayoutError::Empty);
    }
    let message_blocks = k.div_ceil(b);
    let eta = message_blocks + f;
    let p = solve_p(eta);
    let (case, rows, cols) = if eta <= p * p {
        (GridCase::Square, p, p)
    } else {
        (GridCase::Wide, p, p + 1)
    };
    let words = rows + cols;
    let rs_bits = f * b;
    if r <= rs_bits + words {
        return Err(LayoutError::ParityTooSmall { r, rs_bits, words });
    }
    let budget = r - rs_bits;
    // Start from the average word length; step up while the longest
    // (upgraded, full-row) word would not fit the field.
    let mut m = ceil_log2(cols * b + budget.div_ceil(words));
    let (t_base, theta) = loop {
        if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&m) {
            return Err(LayoutError::FieldDimension { m });
        }
        let t_base = (budget - words) / (words * m as usize);
        let theta = (budget - words) / m as usize - words * t_base;
        let t_max = t_base + (theta > 0) as usize;
        if cols * b + t_max * m as usize + 1 < 1 << m {
            break (t_base, theta);
        }
        m += 1;
    };
    let m_us = m as usize;
    if t_base == 0 {
        return Err(LayoutError::ZeroCapability { m });
    }
    let t_max = t_base + (theta > 0) as usize;
    if t_max > 1 << (m.div_ceil(2) - 1) {
        return Err(LayoutError::LowRate { t: t_max, m });
    }
    let bch_poly = match params.bch_poly {
        Some(poly) => {
            if 31 - poly.leading_zeros() != m {
                return Err(LayoutError::PolyDegree { poly, m });
            }
            GaloisField::with_poly(m, poly).map_err(|e| LayoutError::Config(e.to_string()))?;
            poly
        }
        None => default_primitive_poly(m).map_err(|e| LayoutError::Config(e.to_string()))?,
    };

    let cells: Vec<Cell> = (0..eta)
        .map(|c| Cell {
            row: c % rows,
            col: c / rows,
            kind: if c < message_blocks {
                CellKind::Message(c)
            } else {
                CellKind::Parity(c - message_blocks)
            },
        })
        .collect();

    let mut descriptors = Vec::with_capacity(words);
    for row in 0..rows {
        let cells_here: Vec<usize> = (0..cols).map(|col| col * rows + row).filter(|&c| c < eta).collect();
        descriptors.push((Axis::Row, row, cells_here));
    }
    for col in 0..cols {
        let cells_here: Vec<usize> = (0..rows).map(|row| col * rows + row).filter(|&c| c < eta).collect();
        descriptors.push((Axis::Column, col, cells_here));
    }
    // Upgrades go to all rows, then columns, each in ascending index; with
    // column-major placement this visits longer words before shorter ones
    // within each axis.
    let words_vec: Vec<WordDescriptor> = descriptors
        .into_iter()
        .enumerate()
        .map(|(w, (axis, index, cells_here))| {
            let t = t_base + (w < theta) as usize;
            WordDescriptor {
                axis,
                index,
                data_bits: cells_here.len() * b,
                cells: cells_here,
                t,
                parity_bits: t * m_us + 1,
            }
        })
        .collect();
    for w in &words_vec {
        if w.len() >= 1 << m {
            return Err(LayoutError::WordTooLong {
                data_bits: w.data_bits,
                parity_bits: w.parity_bits,
                m,
            });
        }
    }

    let mut cell_words = vec![(0, 0); eta];
    for (c, cell) in cells.iter().enumerate() {
        cell_words[c] = (cell.row, rows + cell.col);
    }

    let rs = if f == 0 {
        None
    } else {
        let folded = params.folding.unwrap_or(f <= 4);
        let plan = if folded {
            FoldingPlan::folded(rows, cols, b, f, params.rs_width)?
        } else {
            FoldingPlan::direct(rows, cols, message_blocks, b, f, params.rs_width)?
        };
        if folded {
            // the last cell of a wide grid is never a message block
            debug_assert!(cells
                .iter()
                .all(|c| !matches!(c.kind, CellKind::Message(_)) || c.row + c.col < plan.data_symbols));
        }
        Some(plan)
    };

    Ok(CodeConfig {
        params: params.clone(),
        eta,
        p,
        case,
        rows,
        cols,
        m,
        bch_poly,
        t_base,
        theta,
        message_blocks,
        pad_bits: message_blocks * b - k,
        cells,
        words: words_vec,
        cell_words,
        rs,
    })
}

/// Consecutive words sharing (axis, block count, t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordGroup {
    pub axis: Axis,
    pub count: usize,
    pub blocks: usize,
    pub t: usize,
}

pub fn word_groups(config: &CodeConfig) -> Vec<WordGroup> {
    let mut groups: Vec<WordGroup> = Vec::new();
    for w in &config.words {
        match groups.last_mut() {
            Some(g) if g.axis == w.axis && g.blocks == w.block_count() && g.t == w.t => g.count += 1,
            _ => groups.push(WordGroup {
                axis: w.axis,
                count: 1,
                blocks: w.block_count(),
                t: w.t,
            }),
        }
    }
    groups
}

/// Plain-text mapping table: word group, blocks per word, eBCH t.
pub fn describe_layout(config: &CodeConfig) -> String {
    let mut rows: Vec<[String; 3]> = vec![["Rows/Columns".into(), "Inner Blocks".into(), "eBCH t".into()]];
    for g in word_groups(config) {
        let noun = match (g.axis, g.count) {
            (Axis::Row, 1) => "row",
            (Axis::Row, _) => "rows",
            (Axis::Column, 1) => "column",
            (Axis::Column, _) => "columns",
        };
        rows.push([format!("{} {noun}", g.count), g.blocks.to_string(), g.t.to_string()]);
    }
    let widths: Vec<usize> = (0..3).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap()).collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "{:<w0$} | {:>w1$} | {:>w2$}", r[0], r[1], r[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 6));
        }
    }
    out
}

/// Summary of the derived parameters, one `key = value` per line.
pub fn describe_parameters(config: &CodeConfig) -> String {
    let mut out = String::new();
    let p = &config.params;
    let _ = writeln!(out, "K = {}", p.message_bits);
    let _ = writeln!(out, "R = {}", p.parity_bits);
    let _ = writeln!(out, "b = {}", p.block_bits);
    let _ = writeln!(out, "f = {}", p.rs_parity);
    let _ = writeln!(out, "eta = {}", config.eta);
    let _ = writeln!(out, "p = {}", config.p);
    let _ = writeln!(out, "case = {}", config.case.number());
    let _ = writeln!(out, "grid = {}x{}", config.rows, config.cols);
    let _ = writeln!(out, "m = {}", config.m);
    let _ = writeln!(out, "bch_poly = {:#x}", config.bch_poly);
    let _ = writeln!(out, "t = {}", config.t_base);
    let _ = writeln!(out, "theta = {}", config.theta);
    let _ = writeln!(out, "pad_bits = {}", config.pad_bits);
    let _ = writeln!(out, "consumed_parity = {}", config.consumed_parity());
    let _ = writeln!(out, "frame_bits = {}", config.frame_bits());
    match &config.rs {
        Some(plan) => {
            let widths: Vec<String> = plan.widths.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "rs_mode = {}", if plan.folded { "folded" } else { "direct" });
            let _ = writeln!(out, "rs_length = {}", plan.code_len());
            let _ = writeln!(out, "rs_widths = {}", widths.join(","));
        }
        None => {
            let _ = writeln!(out, "rs_mode = none");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_p_boundaries() {
        assert_eq!(solve_p(1), 1);
        assert_eq!(solve_p(2), 1);
        assert_eq!(solve_p(3), 2);
        assert_eq!(solve_p(12), 3);
        assert_eq!(solve_p(13), 4);
        assert_eq!(solve_p(1028), 32);
        assert_eq!(solve_p(2189), 47);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn square_without_rs() {
        let cfg = plan_layout(&LayoutParams::new(16 * 100, 400, 16, 0)).unwrap();
        assert_eq!((cfg.p, cfg.case, cfg.rows, cfg.cols), (10, GridCase::Square, 10, 10));
        assert_eq!(cfg.pad_bits, 0);
        assert!(cfg.rs.is_none());
        assert!(cfg.words.iter().all(|w| w.block_count() == 10));
        assert!(word_groups(&cfg).len() <= 4);
    }

    #[test]
    fn config_text_round_trip() {
        let mut p = LayoutParams::new(32768, 3640, 15, 4);
        p.bch_poly = Some(0x409);
        p.folding = Some(true);
        let text = p.to_config_string();
        assert_eq!(LayoutParams::parse(&text).unwrap(), p);
        assert!(LayoutParams::parse("K = 10\nR = 5\nb = 2").is_err());
        assert!(LayoutParams::parse("K = 10\nR = 5\nb = 2\nf = x").is_err());
        assert!(LayoutParams::parse("K = 1\nR = 1\nb = 1\nf = 0\nbogus = 1").is_err());
        let with_comments = "# header\nK=8 # bits\nR=4\nb=2\nf=0\n\n";
        assert_eq!(LayoutParams::parse(with_comments).unwrap(), LayoutParams::new(8, 4, 2, 0));
    }

    #[test]
    fn infeasible_configs() {
        assert_eq!(plan_layout(&LayoutParams::new(0, 10, 4, 0)), Err(LayoutError::Empty));
        assert!(matches!(
            plan_layout(&LayoutParams::new(32768, 100, 32, 4)),
            Err(LayoutError::ParityTooSmall { .. })
        ));
        // low rate: t far above 2^(ceil(m/2)-1)
        assert!(matches!(
            plan_layout(&LayoutParams::new(1024, 4096, 32, 1)),
            Err(LayoutError::LowRate { .. })
        ));
    }
}
