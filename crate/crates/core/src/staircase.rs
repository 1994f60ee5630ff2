//! Staircase code structure: blocks, the block encoder, window geometry and
//! the sliding decoding window.
//!
//! Geometry (1-based `(i, j)` and `e`, 0-based block offsets within the
//! window): the component word `(i, j)` for `i ∈ 1..=W−1`, `j ∈ 1..=a` is
//! column `j` of block `i−1` (positions `1..=a`) followed by row `j` of block
//! `i` (positions `a+1..=2a`). Every bit of blocks `1..=W−2` therefore lies in
//! two in-window component words.

use std::sync::Arc;

use crate::bch::{DecodeOutcome, ExtendedBchCode};
use crate::error::{Error, Result};

/// Syndrome-domain view of a component code, as needed by the window
/// decoders. Position `n` is treated as the overall parity bit.
pub trait ComponentCode {
    /// Component length `n` (even).
    fn length(&self) -> usize;
    /// Full error-correcting capability `t`.
    fn capability(&self) -> usize;
    /// Number of `u16` syndrome words maintained per component word.
    fn syndrome_words(&self) -> usize;
    /// Syndrome words contributed by a set bit at 1-based `position`.
    fn syndrome_contribution(&self, position: usize) -> &[u16];
    /// Decoding step for a word with the given syndrome and overall parity.
    fn decode_syndromes(&self, syndrome: &[u16], parity: bool, t_eff: usize) -> DecodeOutcome;
}

impl ComponentCode for ExtendedBchCode {
    fn length(&self) -> usize {
        self.n()
    }
    fn capability(&self) -> usize {
        self.t()
    }
    fn syndrome_words(&self) -> usize {
        self.t()
    }
    #[inline]
    fn syndrome_contribution(&self, position: usize) -> &[u16] {
        ExtendedBchCode::syndrome_contribution(self, position)
    }
    #[inline]
    fn decode_syndromes(&self, syndrome: &[u16], parity: bool, t_eff: usize) -> DecodeOutcome {
        ExtendedBchCode::decode_syndromes(self, syndrome, parity, t_eff)
    }
}

/// Square `a × a` bit matrix, row-major. Row and column indices here are
/// 0-based.
#[derive(Clone, PartialEq, Eq)]
pub struct Block {
    a: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Block({}x{})", self.a, self.a)?;
        for r in 0..self.a {
            let row: String = (0..self.a)
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl Block {
    pub fn zeros(a: usize) -> Self {
        let stride = a.div_ceil(64);
        Block {
            a,
            stride,
            bits: vec![0; a * stride],
        }
    }

    pub fn size(&self) -> usize {
        self.a
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.stride + col / 64] >> (col % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let w = &mut self.bits[row * self.stride + col / 64];
        let m = 1u64 << (col % 64);
        if value {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) {
        self.bits[row * self.stride + col / 64] ^= 1 << (col % 64);
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Hamming distance to another block of the same size.
    pub fn distance(&self, other: &Block) -> u64 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(x, y)| (x ^ y).count_ones() as u64)
            .sum()
    }

    /// Set bits as `(row, col)`, row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let stride = self.stride;
        self.bits.iter().enumerate().flat_map(move |(idx, &w)| {
            let row = idx / stride;
            let base = (idx % stride) * 64;
            BitIter(w).map(move |b| (row, base + b))
        })
    }

    /// Positions where `self` and `other` differ.
    pub fn diff<'a>(&'a self, other: &'a Block) -> impl Iterator<Item = (usize, usize)> + 'a {
        let stride = self.stride;
        self.bits
            .iter()
            .zip(&other.bits)
            .enumerate()
            .flat_map(move |(idx, (&x, &y))| {
                let row = idx / stride;
                let base = (idx % stride) * 64;
                BitIter(x ^ y).map(move |b| (row, base + b))
            })
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Number of fresh data bits per block, `(k − a)·a`.
pub fn data_bits_per_block(code: &ExtendedBchCode) -> usize {
    let a = code.n() / 2;
    (code.k() - a) * a
}

/// Encodes the block following `prev`: row `j` of the result carries `k − a`
/// data bits then `n − k` parity bits, so that (column `j` of `prev`, row `j`
/// of the result) is a component codeword.
pub fn encode_next_block(code: &ExtendedBchCode, prev: &Block, data: &[bool]) -> Result<Block> {
    let a = code.n() / 2;
    if prev.size() != a {
        return Err(Error::LengthMismatch {
            expected: a,
            got: prev.size(),
        });
    }
    let per_row = code.k() - a;
    if data.len() != per_row * a {
        return Err(Error::LengthMismatch {
            expected: per_row * a,
            got: data.len(),
        });
    }
    let mut out = Block::zeros(a);
    let mut msg = vec![false; code.k()];
    let mut word = vec![false; code.n()];
    for j in 0..a {
        for (r, m) in msg[..a].iter_mut().enumerate() {
            *m = prev.get(r, j);
        }
        msg[a..].copy_from_slice(&data[j * per_row..(j + 1) * per_row]);
        code.encode_into(&msg, &mut word)?;
        for (c, &b) in word[a..].iter().enumerate() {
            if b {
                out.set(j, c, true);
            }
        }
    }
    Ok(out)
}

/// Physical location of a component-word bit: 0-based block offset within
/// the window, 1-based row and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitLocation {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// Index arithmetic for a window of `w` blocks of size `a × a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub a: usize,
    pub w: usize,
}

impl Geometry {
    pub fn new(a: usize, w: usize) -> Result<Self> {
        if a == 0 || w < 2 {
            return Err(Error::InvalidParameters(format!(
                "need a ≥ 1 and W ≥ 2, got a = {a}, W = {w}"
            )));
        }
        Ok(Geometry { a, w })
    }

    pub fn n(&self) -> usize {
        2 * self.a
    }

    /// Highest component-word position, `W − 1`.
    pub fn last_position(&self) -> usize {
        self.w - 1
    }

    fn check(&self, i: usize, j: usize, e: usize) -> Result<()> {
        if !(1..self.w).contains(&i) || !(1..=self.a).contains(&j) || !(1..=self.n()).contains(&e) {
            return Err(Error::OutOfRange(format!(
                "(i, j, e) = ({i}, {j}, {e}) with a = {}, W = {}",
                self.a, self.w
            )));
        }
        Ok(())
    }

    pub fn locate_bit(&self, i: usize, j: usize, e: usize) -> Result<BitLocation> {
        self.check(i, j, e)?;
        Ok(if e <= self.a {
            BitLocation {
                block: i - 1,
                row: e,
                col: j,
            }
        } else {
            BitLocation {
                block: i,
                row: j,
                col: e - self.a,
            }
        })
    }

    /// The other component word `(i', j')` protecting bit `e` of `(i, j)`,
    /// with the bit's position `e'` in it; `None` if that word is outside
    /// the window.
    pub fn orthogonal_of(
        &self,
        i: usize,
        j: usize,
        e: usize,
    ) -> Result<Option<(usize, usize, usize)>> {
        self.check(i, j, e)?;
        Ok(self.orthogonal_unchecked(i, j, e))
    }

    #[inline]
    pub(crate) fn orthogonal_unchecked(
        &self,
        i: usize,
        j: usize,
        e: usize,
    ) -> Option<(usize, usize, usize)> {
        if e <= self.a {
            (i >= 2).then(|| (i - 1, e, self.a + j))
        } else {
            (i + 1 < self.w).then(|| (i + 1, e - self.a, j))
        }
    }
}

/// Handle for a component word inside a [`Window`]; stable across window
/// shifts while the word stays in the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodewordId(pub u32);

/// Counters of window-level activity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Activity {
    /// Decoding steps actually computed (cache misses).
    pub decodes: u64,
    /// Decoding steps that returned `Failure`.
    pub failures: u64,
    /// Individual bit flips applied through the window.
    pub bit_flips: u64,
}

/// Sliding window of `W` blocks plus per-component-word syndromes and
/// decode cache. Optionally tracks the transmitted blocks for genie decoding
/// and miscorrection accounting.
pub struct Window<C> {
    code: Arc<C>,
    geom: Geometry,
    /// Ring of blocks; stream block `s` lives in slot `s mod W`.
    blocks: Vec<Block>,
    truth: Option<Vec<Block>>,
    /// Stream index of the block at offset 0.
    base: i64,
    syn_words: usize,
    syn: Vec<u16>,
    parity: Vec<bool>,
    cache: Vec<Option<DecodeOutcome>>,
    cache_t: Vec<u8>,
    err_weight: Vec<u32>,
    pub activity: Activity,
}

impl<C: ComponentCode> Window<C> {
    /// All-zero window holding stream blocks `−(W−1) ..= 0`.
    pub fn new(code: Arc<C>, w: usize, track_truth: bool) -> Result<Self> {
        let n = code.length();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidParameters(format!(
                "odd component length {n}"
            )));
        }
        let geom = Geometry::new(n / 2, w)?;
        let a = geom.a;
        let syn_words = code.syndrome_words();
        let slots = w * a;
        Ok(Window {
            blocks: vec![Block::zeros(a); w],
            truth: track_truth.then(|| vec![Block::zeros(a); w]),
            base: -(w as i64 - 1),
            syn_words,
            syn: vec![0; slots * syn_words],
            parity: vec![false; slots],
            cache: vec![None; slots],
            cache_t: vec![0; slots],
            err_weight: vec![0; slots],
            activity: Activity::default(),
            code,
            geom,
        })
    }

    pub fn code(&self) -> &C {
        &self.code
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    pub fn has_truth(&self) -> bool {
        self.truth.is_some()
    }

    /// Stream index of the oldest block in the window.
    pub fn base_index(&self) -> i64 {
        self.base
    }

    #[inline]
    fn block_slot(&self, offset: usize) -> usize {
        (self.base + offset as i64).rem_euclid(self.geom.w as i64) as usize
    }

    /// Component word id for 1-based `(i, j)`.
    #[inline]
    pub fn id(&self, i: usize, j: usize) -> CodewordId {
        debug_assert!((1..self.geom.w).contains(&i) && (1..=self.geom.a).contains(&j));
        CodewordId((self.block_slot(i) * self.geom.a + j - 1) as u32)
    }

    /// Inverse of [`Window::id`].
    pub fn position(&self, id: CodewordId) -> (usize, usize) {
        let slot = id.0 as usize / self.geom.a;
        let j = id.0 as usize % self.geom.a + 1;
        let w = self.geom.w as i64;
        let i = (slot as i64 - self.base).rem_euclid(w) as usize;
        (i, j)
    }

    pub fn block(&self, offset: usize) -> &Block {
        &self.blocks[self.block_slot(offset)]
    }

    pub fn truth_block(&self, offset: usize) -> Option<&Block> {
        let slot = self.block_slot(offset);
        self.truth.as_ref().map(|t| &t[slot])
    }

    pub fn component_word(&self, i: usize, j: usize) -> Result<Vec<bool>> {
        self.geom.check(i, j, 1)?;
        Ok(self.word_of(i, j, &self.blocks))
    }

    pub fn transmitted_word(&self, i: usize, j: usize) -> Result<Option<Vec<bool>>> {
        self.geom.check(i, j, 1)?;
        Ok(self.truth.as_ref().map(|t| self.word_of(i, j, t)))
    }

    fn word_of(&self, i: usize, j: usize, blocks: &[Block]) -> Vec<bool> {
        let a = self.geom.a;
        let left = &blocks[self.block_slot(i - 1)];
        let right = &blocks[self.block_slot(i)];
        (0..a)
            .map(|r| left.get(r, j - 1))
            .chain((0..a).map(|c| right.get(j - 1, c)))
            .collect()
    }

    /// Current value of bit `e` of `(i, j)`.
    pub fn bit(&self, i: usize, j: usize, e: usize) -> bool {
        let loc = self.geom.locate_bit(i, j, e).expect("bit in range");
        self.block(loc.block).get(loc.row - 1, loc.col - 1)
    }

    /// Whether bit `e` of `(i, j)` currently differs from the transmitted
    /// value. `None` without truth tracking.
    pub fn is_error_bit(&self, i: usize, j: usize, e: usize) -> Option<bool> {
        let loc = self.geom.locate_bit(i, j, e).ok()?;
        let slot = self.block_slot(loc.block);
        let t = self.truth.as_ref()?;
        Some(
            self.blocks[slot].get(loc.row - 1, loc.col - 1)
                != t[slot].get(loc.row - 1, loc.col - 1),
        )
    }

    /// Number of bits in which `(i, j)` differs from its transmitted word.
    pub fn error_weight(&self, id: CodewordId) -> Option<u32> {
        self.truth.as_ref().map(|_| self.err_weight[id.0 as usize])
    }

    pub fn syndrome(&self, id: CodewordId) -> (&[u16], bool) {
        let s = id.0 as usize;
        (
            &self.syn[s * self.syn_words..(s + 1) * self.syn_words],
            self.parity[s],
        )
    }

    pub fn has_zero_syndrome(&self, id: CodewordId) -> bool {
        let (s, p) = self.syndrome(id);
        !p && s.iter().all(|&x| x == 0)
    }

    /// True if the word's bits changed since it was last decoded with
    /// capability `t_eff`.
    pub fn needs_decode(&self, id: CodewordId, t_eff: usize) -> bool {
        let s = id.0 as usize;
        self.cache[s].is_none() || self.cache_t[s] as usize != t_eff
    }

    /// Decoding step with caching: recomputed only when the word's bits or
    /// the capability changed since the last decode.
    pub fn decode(&mut self, id: CodewordId, t_eff: usize) -> &DecodeOutcome {
        let s = id.0 as usize;
        if self.needs_decode(id, t_eff) {
            let out = self.code.decode_syndromes(
                &self.syn[s * self.syn_words..(s + 1) * self.syn_words],
                self.parity[s],
                t_eff,
            );
            self.activity.decodes += 1;
            if out.is_failure() {
                self.activity.failures += 1;
            }
            self.cache[s] = Some(out);
            self.cache_t[s] = t_eff as u8;
        }
        self.cache[s].as_ref().expect("just filled")
    }

    /// Last cached outcome, if still valid for the word's current bits.
    pub fn cached(&self, id: CodewordId) -> Option<&DecodeOutcome> {
        self.cache[id.0 as usize].as_ref()
    }

    /// After a correction: if `id` now has zero syndrome, records the
    /// trivial outcome without running the decoder.
    pub(crate) fn mark_valid(&mut self, id: CodewordId, t_eff: usize) {
        if self.has_zero_syndrome(id) {
            let s = id.0 as usize;
            self.cache[s] = Some(DecodeOutcome::Corrected(Vec::new()));
            self.cache_t[s] = t_eff as u8;
        }
    }

    /// Flips bit `e` of `(i, j)`; returns the in-window orthogonal word
    /// sharing that bit, if any.
    pub fn flip(&mut self, i: usize, j: usize, e: usize) -> Option<CodewordId> {
        let a = self.geom.a;
        let (off, r, c) = if e <= a {
            (i - 1, e - 1, j - 1)
        } else {
            (i, j - 1, e - a - 1)
        };
        self.flip_physical(off, r, c);
        self.geom
            .orthogonal_unchecked(i, j, e)
            .map(|(i2, j2, _)| self.id(i2, j2))
    }

    /// Flips the bit at 0-based `(row, col)` of the block at `offset`,
    /// updating the syndromes of both component words containing it.
    pub fn flip_physical(&mut self, offset: usize, row: usize, col: usize) {
        let slot = self.block_slot(offset);
        self.blocks[slot].flip(row, col);
        self.activity.bit_flips += 1;
        let now_error = self
            .truth
            .as_ref()
            .map(|t| self.blocks[slot].get(row, col) != t[slot].get(row, col));
        let a = self.geom.a;
        if offset + 1 < self.geom.w {
            let id = self.id(offset + 1, col + 1);
            self.touch(id, row + 1, now_error);
        }
        if offset >= 1 {
            let id = self.id(offset, row + 1);
            self.touch(id, a + col + 1, now_error);
        }
    }

    #[inline]
    fn touch(&mut self, id: CodewordId, e: usize, now_error: Option<bool>) {
        let s = id.0 as usize;
        let contrib = self.code.syndrome_contribution(e);
        for (x, c) in self.syn[s * self.syn_words..(s + 1) * self.syn_words]
            .iter_mut()
            .zip(contrib)
        {
            *x ^= c;
        }
        self.parity[s] ^= true;
        self.cache[s] = None;
        match now_error {
            Some(true) => self.err_weight[s] += 1,
            Some(false) => self.err_weight[s] -= 1,
            None => {}
        }
    }

    /// Emits the oldest block (and its transmitted counterpart) and appends
    /// `received` at the newest edge. Component words keep their ids; the
    /// word formerly at position `i` is now at `i − 1`. State of the words
    /// at the old position 1 is discarded; the new position `W − 1` is
    /// initialized from the bits.
    pub fn shift(
        &mut self,
        received: Block,
        transmitted: Option<Block>,
    ) -> Result<(Block, Option<Block>)> {
        let a = self.geom.a;
        if received.size() != a {
            return Err(Error::LengthMismatch {
                expected: a,
                got: received.size(),
            });
        }
        if self.truth.is_some() != transmitted.is_some() {
            return Err(Error::InvalidParameters(
                "transmitted block required iff truth is tracked".into(),
            ));
        }
        let slot = self.block_slot(0);
        let emitted = std::mem::replace(&mut self.blocks[slot], received);
        let emitted_truth = match (&mut self.truth, transmitted) {
            (Some(t), Some(tx)) => Some(std::mem::replace(&mut t[slot], tx)),
            _ => None,
        };
        // Old position 1 becomes position 0: its slot is now unused.
        let dropped = self.block_slot(1);
        self.clear_slot(dropped);
        self.base += 1;

        let last = self.geom.w - 1;
        let cw_slot = self.block_slot(last);
        self.clear_slot(cw_slot);
        let left = self.block_slot(last - 1);
        let right = self.block_slot(last);
        let sw = self.syn_words;
        for (r, c) in self.blocks[left].ones() {
            let s = cw_slot * a + c;
            for (x, y) in self.syn[s * sw..(s + 1) * sw]
                .iter_mut()
                .zip(self.code.syndrome_contribution(r + 1))
            {
                *x ^= y;
            }
            self.parity[s] ^= true;
        }
        for (r, c) in self.blocks[right].ones() {
            let s = cw_slot * a + r;
            for (x, y) in self.syn[s * sw..(s + 1) * sw]
                .iter_mut()
                .zip(self.code.syndrome_contribution(a + c + 1))
            {
                *x ^= y;
            }
            self.parity[s] ^= true;
        }
        if let Some(t) = &self.truth {
            for (_, c) in self.blocks[left].diff(&t[left]) {
                self.err_weight[cw_slot * a + c] += 1;
            }
            for (r, _) in self.blocks[right].diff(&t[right]) {
                self.err_weight[cw_slot * a + r] += 1;
            }
        }
        Ok((emitted, emitted_truth))
    }

    fn clear_slot(&mut self, slot: usize) {
        let a = self.geom.a;
        let sw = self.syn_words;
        self.syn[slot * a * sw..(slot + 1) * a * sw].fill(0);
        self.parity[slot * a..(slot + 1) * a].fill(false);
        self.cache[slot * a..(slot + 1) * a].fill(None);
        self.cache_t[slot * a..(slot + 1) * a].fill(0);
        self.err_weight[slot * a..(slot + 1) * a].fill(0);
    }

    /// Total bits in the window differing from the transmitted blocks.
    pub fn window_errors(&self) -> Option<u64> {
        let t = self.truth.as_ref()?;
        Some(self.blocks.iter().zip(t).map(|(b, t)| b.distance(t)).sum())
    }
}
