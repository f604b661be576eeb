//! Reed-Solomon erasure code over the grid blocks.
//!
//! The code has generator (x - 1)(x - β)...(x - β^{f-1}); parity symbols sit
//! at positions 0..f and data symbol `d` at position `f + d`. Blocks wider
//! than the symbol width are split into sub-symbols, one independent RS code
//! per sub-symbol index.

use std::sync::Arc;

use thiserror::Error;

use crate::galois::{Elem, FieldError, GaloisField, MAX_DIMENSION, MIN_DIMENSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RsError {
    #[error("RS length {n} exceeds 2^{width} - 1")]
    TooLong { n: usize, width: u32 },
    #[error("RS code needs at least one data symbol and one parity symbol")]
    Degenerate,
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{erasures} erasures exceed the {parity} parity symbols")]
    TooManyErasures { erasures: usize, parity: usize },
    #[error("erasure positions must be distinct and below {n}")]
    BadPositions { n: usize },
    #[error("a {block_bits}-bit block cannot hold a symbol of an RS code of length {code_len}")]
    BlockTooNarrow { block_bits: usize, code_len: usize },
    #[error("residual errors outside the erasure set")]
    NotErasureOnly,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Systematic RS code of length `n` with `f` parity symbols.
#[derive(Debug, Clone)]
pub struct RsCode {
    field: Arc<GaloisField>,
    n: usize,
    f: usize,
    /// Monic generator, lowest degree first.
    generator: Vec<Elem>,
}

impl RsCode {
    pub fn new(field: Arc<GaloisField>, n: usize, f: usize) -> Result<Self, RsError> {
        if f == 0 || n <= f {
            return Err(RsError::Degenerate);
        }
        if n > field.order() {
            return Err(RsError::TooLong {
                n,
                width: field.dimension(),
            });
        }
        let generator = (0..f).fold(vec![1], |g, i| field.poly_mul(&g, &[field.alpha_pow(i as i64), 1]));
        Ok(Self { field, n, f, generator })
    }

    pub fn field(&self) -> &Arc<GaloisField> {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn parity_len(&self) -> usize {
        self.f
    }

    pub fn data_len(&self) -> usize {
        self.n - self.f
    }

    pub fn generator(&self) -> &[Elem] {
        &self.generator
    }

    /// β^position.
    pub fn locator(&self, position: usize) -> Elem {
        self.field.alpha_pow(position as i64)
    }

    /// Parity symbols: the remainder of x^f·D(x) modulo the generator.
    pub fn parity(&self, data: &[Elem]) -> Result<Vec<Elem>, RsError> {
        if data.len() != self.data_len() {
            return Err(RsError::LengthMismatch {
                expected: self.data_len(),
                got: data.len(),
            });
        }
        let f = &self.field;
        let mut reg = vec![0; self.f];
        for &d in data.iter().rev() {
            let feedback = d ^ reg[self.f - 1];
            for i in (1..self.f).rev() {
                reg[i] = reg[i - 1] ^ f.mul(feedback, self.generator[i]);
            }
            reg[0] = f.mul(feedback, self.generator[0]);
        }
        Ok(reg)
    }

    /// Full codeword, parity first.
    pub fn encode(&self, data: &[Elem]) -> Result<Vec<Elem>, RsError> {
        let mut word = self.parity(data)?;
        word.extend_from_slice(data);
        Ok(word)
    }

    /// Ŝ_i = y(β^i), i = 0..f.
    pub fn syndromes(&self, word: &[Elem]) -> Result<Vec<Elem>, RsError> {
        if word.len() != self.n {
            return Err(RsError::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok((0..self.f)
            .map(|i| self.field.eval(word, self.field.alpha_pow(i as i64)))
            .collect())
    }

    /// Error values at the erased `positions` (to be added to the received
    /// symbols), provided the syndromes are explained by those positions alone.
    pub fn erasure_decode(&self, syndromes: &[Elem], positions: &[usize]) -> Result<Vec<Elem>, RsError> {
        let e = positions.len();
        if e > self.f {
            return Err(RsError::TooManyErasures {
                erasures: e,
                parity: self.f,
            });
        }
        if syndromes.len() != self.f {
            return Err(RsError::LengthMismatch {
                expected: self.f,
                got: syndromes.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        if positions.iter().any(|&p| p >= self.n || !seen.insert(p)) {
            return Err(RsError::BadPositions { n: self.n });
        }
        let f = &self.field;
        let xs: Vec<Elem> = positions.iter().map(|&p| self.locator(p)).collect();
        // Λ̂(x) = ∏(1 - X_i x)
        let lambda = xs.iter().fold(vec![1], |acc, &x| f.poly_mul(&acc, &[1, x]));
        // Ω̂(x) = Λ̂(x)Ŝ(x) mod x^f
        let mut omega = f.poly_mul(&lambda, syndromes);
        omega.truncate(self.f);
        if omega.iter().skip(e).any(|&c| c != 0) {
            return Err(RsError::NotErasureOnly);
        }
        let odd: Vec<Elem> = lambda
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { c } else { 0 })
            .collect();
        Ok(xs
            .iter()
            .map(|&x| {
                let xi = f.inv(x);
                f.div(f.eval(&omega, xi), f.eval(&odd, xi))
            })
            .collect())
    }
}

/// How grid blocks map onto RS data symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldingPlan {
    /// Grid shape, rows × cols.
    pub rows: usize,
    pub cols: usize,
    /// XOR message blocks along anti-diagonals; otherwise one symbol per block.
    pub folded: bool,
    /// Bit widths of the sub-symbols of a block, summing to the block width.
    /// Sub-code `c` is an RS code over GF(2^widths[c]).
    pub widths: Vec<u32>,
    pub parity_blocks: usize,
    /// Number of RS data symbols.
    pub data_symbols: usize,
}

impl FoldingPlan {
    /// Folded plan: one data symbol per anti-diagonal, 2·rows - 1 in all.
    pub fn folded(
        rows: usize,
        cols: usize,
        block_bits: usize,
        parity_blocks: usize,
        min_symbol_bits: Option<u32>,
    ) -> Result<Self, RsError> {
        let data_symbols = 2 * rows - 1;
        let widths = sub_symbol_widths(block_bits, data_symbols + parity_blocks, min_symbol_bits)?;
        Ok(Self {
            rows,
            cols,
            folded: true,
            widths,
            parity_blocks,
            data_symbols,
        })
    }

    /// One data symbol per message block.
    pub fn direct(
        rows: usize,
        cols: usize,
        message_blocks: usize,
        block_bits: usize,
        parity_blocks: usize,
        min_symbol_bits: Option<u32>,
    ) -> Result<Self, RsError> {
        let widths = sub_symbol_widths(block_bits, message_blocks + parity_blocks, min_symbol_bits)?;
        Ok(Self {
            rows,
            cols,
            folded: false,
            widths,
            parity_blocks,
            data_symbols: message_blocks,
        })
    }

    pub fn code_len(&self) -> usize {
        self.data_symbols + self.parity_blocks
    }

    pub fn block_bits(&self) -> usize {
        self.widths.iter().sum::<u32>() as usize
    }

    /// Independent RS codes per block.
    pub fn sub_codes(&self) -> usize {
        self.widths.len()
    }

    /// Data symbol carrying message block `block` at grid cell (row, col).
    pub fn data_index(&self, row: usize, col: usize, block: usize) -> usize {
        if self.folded {
            row + col
        } else {
            block
        }
    }

    /// Sub-symbols of one block (bits LSB first).
    pub fn split(&self, bits: &[u8]) -> Vec<Elem> {
        let mut out = Vec::with_capacity(self.widths.len());
        let mut at = 0;
        for &w in &self.widths {
            let chunk = &bits[at..at + w as usize];
            out.push(chunk.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b & 1) as Elem) << i));
            at += w as usize;
        }
        out
    }

    /// Writes sub-symbols back into a block.
    pub fn join(&self, symbols: &[Elem], bits: &mut [u8]) {
        let mut at = 0;
        for (&w, &s) in self.widths.iter().zip(symbols) {
            for i in 0..w as usize {
                bits[at + i] = (s >> i & 1) as u8;
            }
            at += w as usize;
        }
    }
}

/// Smallest w with 2^w - 1 ≥ n.
pub fn min_width(n: usize) -> u32 {
    usize::BITS - n.leading_zeros()
}

/// Partitions a `block_bits`-wide block into as many near-equal sub-symbols
/// as possible, each at least max(8, bits needed for length `code_len`) wide
/// (or `min_symbol_bits` when given) and at most the widest supported field.
pub fn sub_symbol_widths(
    block_bits: usize,
    code_len: usize,
    min_symbol_bits: Option<u32>,
) -> Result<Vec<u32>, RsError> {
    let needed = min_width(code_len);
    let floor = min_symbol_bits.unwrap_or(8).max(needed);
    if floor > MAX_DIMENSION {
        return Err(RsError::TooLong { n: code_len, width: MAX_DIMENSION });
    }
    // Narrow blocks fall back to the smallest legal width.
    let floor = if (block_bits as u32) < floor { needed.max(MIN_DIMENSION) } else { floor };
    let most = block_bits / floor as usize;
    let fewest = block_bits.div_ceil(MAX_DIMENSION as usize);
    if most == 0 || most < fewest {
        return Err(RsError::BlockTooNarrow { block_bits, code_len });
    }
    let base = block_bits / most;
    let extra = block_bits % most;
    Ok((0..most).map(|i| (base + (i < extra) as usize) as u32).collect())
}

/// D̂_d = XOR of grid[l][j] over l + j = d, for every anti-diagonal of the grid.
pub fn fold_diagonal(grid: &[Vec<Elem>]) -> Vec<Elem> {
    let rows = grid.len();
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![0; (rows + cols).saturating_sub(1)];
    for (l, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[l + j] ^= v;
        }
    }
    out
}

/// Splits a block (bits, LSB first) into ⌈b/w⌉ symbols; the last is zero-padded.
pub fn split_block_symbols(bits: &[u8], width: u32) -> Vec<Elem> {
    bits.chunks(width as usize)
        .map(|chunk| chunk.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b & 1) as Elem) << i))
        .collect()
}

/// Inverse of [`split_block_symbols`], writing `bits.len()` bits.
pub fn join_block_symbols(symbols: &[Elem], width: u32, bits: &mut [u8]) {
    for (i, bit) in bits.iter_mut().enumerate() {
        let s = symbols[i / width as usize];
        *bit = (s >> (i % width as usize) & 1) as u8;
    }
}
