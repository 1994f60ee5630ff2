//! Extended primitive binary BCH component codes.
//!
//! Bit layout of a length-`n` component word (1-based positions):
//!
//! ```text
//!   1 ..= k          message bits, verbatim
//!   k+1 ..= n-1      BCH parity (remainder of the message polynomial mod g)
//!   n                overall parity of positions 1 ..= n-1
//! ```
//!
//! Position `p ≤ n−1` carries the coefficient of `x^(n−1−p)` of the BCH
//! codeword polynomial, so the error locator value of position `p` is
//! `α^(n−1−p)`.
//!
//! Decoding runs entirely on syndromes: the odd-indexed syndromes
//! `S1, S3, …, S(2t−1)` of the first `n−1` bits plus the overall parity of
//! the whole word. Even syndromes follow from `S(2j) = S(j)²`.

use crate::error::{Error, Result};
use crate::gf::Field;

/// 1-based bit positions within a component word.
pub type Locations = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// Flipping exactly these positions (sorted ascending) yields a codeword.
    Corrected(Locations),
    Failure,
}

impl DecodeOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, DecodeOutcome::Failure)
    }

    pub fn locations(&self) -> Option<&[u16]> {
        match self {
            DecodeOutcome::Corrected(l) => Some(l),
            DecodeOutcome::Failure => None,
        }
    }
}

/// Odd syndromes plus overall parity of a received component word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndromes {
    pub odd: Vec<u16>,
    pub parity: bool,
}

#[derive(Clone, Debug)]
pub struct ExtendedBchCode {
    field: Field,
    t: usize,
    n: usize,
    k: usize,
    /// Generator of the underlying length-(n−1) BCH code; `generator[i]` is
    /// the coefficient of `x^i`.
    generator: Vec<u8>,
    /// Generator without its leading term, packed for the encoder LFSR.
    feedback: Vec<u64>,
    /// `contrib[(p−1)·t + m] = α^((2m+1)(n−1−p))`; all zero for `p = n`.
    contrib: Vec<u16>,
    /// `quadratic[c] = y` with `y² + y = c`, or `NO_ROOT`.
    quadratic: Vec<u16>,
}

const NO_ROOT: u16 = u16::MAX;

impl ExtendedBchCode {
    pub fn new(field: Field, t: usize) -> Result<Self> {
        let nu = field.nu() as usize;
        let n = field.size();
        let big_n = field.order();
        if t == 0 || nu.checked_mul(t).is_none_or(|r| r + 1 >= n) {
            return Err(Error::InvalidParameters(format!(
                "t = {t} out of range for n = {n}"
            )));
        }

        let generator = generator_poly(&field, t);
        let r = generator.len() - 1;
        let k = big_n - r;
        if k <= n / 2 {
            return Err(Error::InvalidParameters(format!(
                "dimension k = {k} ≤ n/2 = {}: staircase rate would be non-positive",
                n / 2
            )));
        }

        let mut contrib = vec![0u16; n * t];
        for p in 1..=big_n {
            let x = big_n - p;
            for m in 0..t {
                contrib[(p - 1) * t + m] = field.alpha_pow((2 * m + 1) * x);
            }
        }

        let mut quadratic = vec![NO_ROOT; field.size()];
        for y in 0..field.size() as u16 {
            let c = field.square(y) ^ y;
            quadratic[c as usize] = y;
        }

        let feedback = pack_bits(&generator[..r]);
        Ok(ExtendedBchCode {
            field,
            t,
            n,
            k,
            generator,
            feedback,
            contrib,
            quadratic,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of BCH parity bits, `deg g`.
    pub fn bch_parity_len(&self) -> usize {
        self.generator.len() - 1
    }

    pub fn generator_poly(&self) -> &[u8] {
        &self.generator
    }

    pub fn d_min_guaranteed(&self) -> usize {
        2 * self.t + 2
    }

    /// `2^ν − ν·t − 1`; the actual dimension is never smaller.
    pub fn guaranteed_k(&self) -> usize {
        self.n - self.field.nu() as usize * self.t - 1
    }

    /// Rate of the staircase code built on this component, `2k/n − 1`.
    pub fn staircase_rate(&self) -> f64 {
        2.0 * self.k as f64 / self.n as f64 - 1.0
    }

    /// Test hook: flips one generator coefficient so encoding no longer
    /// produces codewords.
    #[doc(hidden)]
    pub fn corrupt_generator(&mut self) {
        self.generator[1] ^= 1;
        let r = self.generator.len() - 1;
        self.feedback = pack_bits(&self.generator[..r]);
    }

    /// Systematic encoding into `out` (length `n`).
    pub fn encode_into(&self, message: &[bool], out: &mut [bool]) -> Result<()> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        if out.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: out.len(),
            });
        }
        let r = self.bch_parity_len();
        let words = self.feedback.len();
        let top_word = (r - 1) / 64;
        let top_bit = (r - 1) % 64;
        let top_mask = if r.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (r % 64)) - 1
        };
        let mut reg = vec![0u64; words];
        for &b in message {
            let fb = b ^ (reg[top_word] >> top_bit & 1 == 1);
            for w in (0..words).rev() {
                let carry = if w > 0 { reg[w - 1] >> 63 } else { 0 };
                reg[w] = reg[w] << 1 | carry;
            }
            reg[words - 1] &= top_mask;
            if fb {
                for (x, f) in reg.iter_mut().zip(&self.feedback) {
                    *x ^= f;
                }
            }
        }
        out[..self.k].copy_from_slice(message);
        let mut parity = message.iter().fold(false, |acc, &b| acc ^ b);
        for i in 0..r {
            let exp = r - 1 - i;
            let bit = reg[exp / 64] >> (exp % 64) & 1 == 1;
            out[self.k + i] = bit;
            parity ^= bit;
        }
        out[self.n - 1] = parity;
        Ok(())
    }

    pub fn encode(&self, message: &[bool]) -> Result<Vec<bool>> {
        let mut out = vec![false; self.n];
        self.encode_into(message, &mut out)?;
        Ok(out)
    }

    /// Odd syndromes contributed by a single set bit at `position` (1-based).
    /// Empty contribution (all zeros) for the overall parity position.
    #[inline]
    pub fn syndrome_contribution(&self, position: usize) -> &[u16] {
        &self.contrib[(position - 1) * self.t..position * self.t]
    }

    pub fn syndromes(&self, word: &[bool]) -> Result<Syndromes> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let mut odd = vec![0u16; self.t];
        let mut parity = false;
        for (idx, _) in word.iter().enumerate().filter(|(_, &b)| b) {
            parity ^= true;
            for (s, c) in odd.iter_mut().zip(self.syndrome_contribution(idx + 1)) {
                *s ^= c;
            }
        }
        Ok(Syndromes { odd, parity })
    }

    /// Zero syndromes and even weight.
    pub fn is_codeword(&self, word: &[bool]) -> bool {
        match self.syndromes(word) {
            Ok(s) => !s.parity && s.odd.iter().all(|&x| x == 0),
            Err(_) => false,
        }
    }

    /// Bounded-distance decoding with capability `t_eff ≤ t`: returns the
    /// positions separating `word` from the unique codeword within distance
    /// `t_eff`, or `Failure` if there is none.
    pub fn decode_bdd(&self, word: &[bool], t_eff: usize) -> Result<DecodeOutcome> {
        self.check_t_eff(t_eff)?;
        let s = self.syndromes(word)?;
        Ok(self.decode_syndromes(&s.odd, s.parity, t_eff))
    }

    fn check_t_eff(&self, t_eff: usize) -> Result<()> {
        if t_eff == 0 || t_eff > self.t {
            return Err(Error::InvalidParameters(format!(
                "t_eff = {t_eff} outside 1..={}",
                self.t
            )));
        }
        Ok(())
    }

    /// Decoding step on precomputed syndromes. `odd.len()` must be `t`.
    pub fn decode_syndromes(&self, odd: &[u16], parity: bool, t_eff: usize) -> DecodeOutcome {
        debug_assert_eq!(odd.len(), self.t);
        if odd.iter().all(|&s| s == 0) {
            return self.finish(Vec::new(), parity, t_eff);
        }
        let roots = match self.t {
            1 => Some(vec![odd[0]]),
            2 => self.locate_t2(odd[0], odd[1]),
            _ => self.locate_bm(odd),
        };
        match roots {
            Some(roots) => self.finish(roots, parity, t_eff),
            None => DecodeOutcome::Failure,
        }
    }

    /// Forces the Berlekamp–Massey path regardless of `t`.
    #[doc(hidden)]
    pub fn decode_syndromes_bm(&self, odd: &[u16], parity: bool, t_eff: usize) -> DecodeOutcome {
        if odd.iter().all(|&s| s == 0) {
            return self.finish(Vec::new(), parity, t_eff);
        }
        match self.locate_bm(odd) {
            Some(roots) => self.finish(roots, parity, t_eff),
            None => DecodeOutcome::Failure,
        }
    }

    /// Turns error values `X = α^(n−1−p)` into positions, resolving the
    /// overall parity bit.
    fn finish(&self, roots: Vec<u16>, parity: bool, t_eff: usize) -> DecodeOutcome {
        let flip_parity_bit = parity ^ (roots.len() % 2 == 1);
        if roots.len() + flip_parity_bit as usize > t_eff {
            return DecodeOutcome::Failure;
        }
        let big_n = self.field.order();
        let mut locs: Locations = roots
            .iter()
            .map(|&x| (big_n - self.field.log(x).expect("nonzero root")) as u16)
            .collect();
        if flip_parity_bit {
            locs.push(self.n as u16);
        }
        locs.sort_unstable();
        DecodeOutcome::Corrected(locs)
    }

    /// Closed-form double-error solution. Returns the error values.
    fn locate_t2(&self, s1: u16, s3: u16) -> Option<Vec<u16>> {
        let f = &self.field;
        if s1 == 0 {
            // S3 ≠ 0 here: at least three errors.
            return None;
        }
        let s1_cubed = f.mul(f.square(s1), s1);
        let d = s3 ^ s1_cubed;
        if d == 0 {
            return Some(vec![s1]);
        }
        // z² + S1·z + (S3 + S1³)/S1 = 0, substitute z = S1·y.
        let product = f.div(d, s1);
        let c = f.div(product, f.square(s1));
        let y = self.quadratic[c as usize];
        if y == NO_ROOT {
            return None;
        }
        Some(vec![f.mul(s1, y), f.mul(s1, y ^ 1)])
    }

    /// Berlekamp–Massey followed by a Chien search. Returns the error values
    /// when the locator has as many distinct roots as its degree and those
    /// roots reproduce the syndromes.
    fn locate_bm(&self, odd: &[u16]) -> Option<Vec<u16>> {
        let f = &self.field;
        let t = odd.len();
        let mut s = vec![0u16; 2 * t];
        for j in 1..=2 * t {
            s[j - 1] = if j % 2 == 1 {
                odd[(j - 1) / 2]
            } else {
                f.square(s[j / 2 - 1])
            };
        }

        let mut c = vec![0u16; 2 * t + 1];
        let mut b = vec![0u16; 2 * t + 1];
        c[0] = 1;
        b[0] = 1;
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut b_disc = 1u16;
        for step in 0..2 * t {
            let mut d = s[step];
            for i in 1..=len {
                d ^= f.mul(c[i], s[step - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = f.div(d, b_disc);
            let prev = c.clone();
            for i in 0..=2 * t - shift {
                c[i + shift] ^= f.mul(coef, b[i]);
            }
            if 2 * len <= step {
                len = step + 1 - len;
                b = prev;
                b_disc = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        if len > t || c[len] == 0 {
            return None;
        }

        // Λ(x) = Π (1 + X_l x); roots at x = X_l^{-1}.
        let big_n = f.order();
        let mut roots = Vec::with_capacity(len);
        for xlog in 0..big_n {
            let x = f.alpha_pow(xlog);
            let mut acc = 0u16;
            let mut xp = 1u16;
            for &coef in &c[..=len] {
                acc ^= f.mul(coef, xp);
                xp = f.mul(xp, x);
            }
            if acc == 0 {
                roots.push(f.alpha_pow((big_n - xlog) % big_n));
                if roots.len() > len {
                    return None;
                }
            }
        }
        if roots.len() != len {
            return None;
        }
        for (m, &sm) in odd.iter().enumerate() {
            let e = 2 * m + 1;
            let got = roots.iter().fold(0u16, |acc, &x| acc ^ f.pow(x, e as u64));
            if got != sm {
                return None;
            }
        }
        Some(roots)
    }

    /// Exhaustive BDD: tries every flip pattern of weight ≤ `t_eff` and
    /// checks validity by polynomial division by the generator plus an
    /// overall parity check. Independent of the syndrome/locator machinery.
    /// Cost grows as `C(n, t_eff)`; meant for `n ≤ 64`.
    pub fn brute_force_bdd(&self, word: &[bool], t_eff: usize) -> Result<DecodeOutcome> {
        self.check_t_eff(t_eff)?;
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let oracle = RemainderOracle::new(self);
        Ok(oracle.decode(word, t_eff))
    }

    /// Polynomial-division validity check, shared with the oracle.
    pub fn is_codeword_by_division(&self, word: &[bool]) -> bool {
        if word.len() != self.n {
            return false;
        }
        let oracle = RemainderOracle::new(self);
        let (rem, parity) = oracle.remainder(word);
        !parity && rem.iter().all(|&w| w == 0)
    }
}

/// Remainders `x^e mod g` per position, for the brute-force oracle.
pub struct RemainderOracle<'a> {
    code: &'a ExtendedBchCode,
    words: usize,
    /// `rems[(p−1)·words ..]` for `p ≤ n−1`; zero for `p = n`.
    rems: Vec<u64>,
}

impl<'a> RemainderOracle<'a> {
    pub fn new(code: &'a ExtendedBchCode) -> Self {
        let r = code.bch_parity_len();
        let words = r.div_ceil(64).max(1);
        let n = code.n;
        let big_n = n - 1;
        let mut rems = vec![0u64; n * words];
        // x^e mod g for e = 0 .. big_n−1, iteratively.
        let mut cur = vec![0u64; words];
        cur[0] = 1;
        let g_low = pack_bits(&code.generator[..r]);
        let mut by_exp = vec![vec![0u64; words]; big_n];
        for slot in by_exp.iter_mut() {
            slot.copy_from_slice(&cur);
            // cur *= x, reduce.
            let top = cur[(r - 1) / 64] >> ((r - 1) % 64) & 1 == 1;
            for w in (0..words).rev() {
                let carry = if w > 0 { cur[w - 1] >> 63 } else { 0 };
                cur[w] = cur[w] << 1 | carry;
            }
            if !r.is_multiple_of(64) {
                cur[words - 1] &= (1u64 << (r % 64)) - 1;
            }
            if top {
                for (c, g) in cur.iter_mut().zip(&g_low) {
                    *c ^= g;
                }
            }
        }
        for p in 1..=big_n {
            rems[(p - 1) * words..p * words].copy_from_slice(&by_exp[big_n - p]);
        }
        RemainderOracle { code, words, rems }
    }

    fn rem_of(&self, p: usize) -> &[u64] {
        &self.rems[(p - 1) * self.words..p * self.words]
    }

    pub fn remainder(&self, word: &[bool]) -> (Vec<u64>, bool) {
        let mut acc = vec![0u64; self.words];
        let mut parity = false;
        for (i, _) in word.iter().enumerate().filter(|(_, &b)| b) {
            parity ^= true;
            for (a, r) in acc.iter_mut().zip(self.rem_of(i + 1)) {
                *a ^= r;
            }
        }
        (acc, parity)
    }

    pub fn decode(&self, word: &[bool], t_eff: usize) -> DecodeOutcome {
        let (rem, parity) = self.remainder(word);
        let n = self.code.n;
        let mut chosen = Vec::with_capacity(t_eff);
        let mut scratch = rem.clone();
        for w in 0..=t_eff {
            if w % 2 != parity as usize {
                continue;
            }
            if self.search(&mut scratch, 1, n, w, &mut chosen) {
                return DecodeOutcome::Corrected(chosen.iter().map(|&p| p as u16).collect());
            }
        }
        DecodeOutcome::Failure
    }

    /// Picks `left` more positions ≥ `from` whose remainders cancel `acc`.
    fn search(
        &self,
        acc: &mut Vec<u64>,
        from: usize,
        n: usize,
        left: usize,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if left == 0 {
            return acc.iter().all(|&w| w == 0);
        }
        for p in from..=n + 1 - left {
            for (a, r) in acc.iter_mut().zip(self.rem_of(p)) {
                *a ^= r;
            }
            chosen.push(p);
            if self.search(acc, p + 1, n, left - 1, chosen) {
                return true;
            }
            chosen.pop();
            for (a, r) in acc.iter_mut().zip(self.rem_of(p)) {
                *a ^= r;
            }
        }
        false
    }
}

/// Flips the listed 1-based positions in place.
pub fn apply_flips(word: &mut [bool], locations: &[u16]) -> Result<()> {
    if let Some(&bad) = locations
        .iter()
        .find(|&&p| p == 0 || p as usize > word.len())
    {
        return Err(Error::OutOfRange(format!(
            "flip position {bad} outside 1..={}",
            word.len()
        )));
    }
    for &p in locations {
        word[p as usize - 1] ^= true;
    }
    Ok(())
}

fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64).max(1)];
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Product of the distinct minimal polynomials of α, α², …, α^(2t).
fn generator_poly(field: &Field, t: usize) -> Vec<u8> {
    let big_n = field.order();
    let mut seen = vec![false; big_n];
    let mut g: Vec<u8> = vec![1];
    for i in 1..=2 * t {
        if seen[i % big_n] {
            continue;
        }
        // Cyclotomic coset of i.
        let mut coset = Vec::new();
        let mut c = i % big_n;
        while !seen[c] {
            seen[c] = true;
            coset.push(c);
            c = c * 2 % big_n;
        }
        // Π (x + α^c) over GF(2^ν); coefficients land in GF(2).
        let mut m: Vec<u16> = vec![1];
        for &c in &coset {
            let root = field.alpha_pow(c);
            let mut next = vec![0u16; m.len() + 1];
            for (d, &coef) in m.iter().enumerate() {
                next[d + 1] ^= coef;
                next[d] ^= field.mul(coef, root);
            }
            m = next;
        }
        debug_assert!(m.iter().all(|&x| x <= 1));
        let mut prod = vec![0u8; g.len() + m.len() - 1];
        for (a, &ga) in g.iter().enumerate() {
            if ga == 0 {
                continue;
            }
            for (b, &mb) in m.iter().enumerate() {
                prod[a + b] ^= mb as u8;
            }
        }
        g = prod;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(nu: u32, t: usize) -> ExtendedBchCode {
        ExtendedBchCode::new(Field::new(nu, None).unwrap(), t).unwrap()
    }

    fn random_message(code: &ExtendedBchCode, rng: &mut impl Rng) -> Vec<bool> {
        (0..code.k()).map(|_| rng.gen()).collect()
    }

    #[test]
    fn parameters() {
        let c = code(8, 2);
        assert_eq!((c.n(), c.k(), c.guaranteed_k()), (256, 239, 239));
        assert!((c.staircase_rate() - 0.867).abs() < 0.0005);
        let c = code(4, 1);
        assert_eq!((c.n(), c.k(), c.d_min_guaranteed()), (16, 11, 4));
        // x⁴ + x + 1 is the minimal polynomial of α.
        assert_eq!(c.generator_poly(), &[1, 1, 0, 0, 1]);
        // 256 − 8·3 − 1 = 231.
        let c = code(8, 3);
        assert_eq!(c.k(), 231);
        assert!((c.staircase_rate() - 0.8047).abs() < 0.0005);
    }

    #[test]
    fn rate_must_be_positive() {
        // ν=4, t=2: k = 7 ≤ 8.
        let f = Field::new(4, None).unwrap();
        assert!(ExtendedBchCode::new(f.clone(), 2).is_err());
        assert!(ExtendedBchCode::new(f, 0).is_err());
    }

    #[test]
    fn actual_k_at_least_guaranteed() {
        for nu in 5..=10 {
            for t in 1..=3 {
                if let Ok(c) = ExtendedBchCode::new(Field::new(nu, None).unwrap(), t) {
                    assert!(c.k() >= c.guaranteed_k());
                }
            }
        }
    }

    #[test]
    fn encoding_basics() {
        let c = code(4, 1);
        assert!(c.encode(&[false; 11]).unwrap().iter().all(|&b| !b));
        assert_eq!(
            c.encode(&[true; 3]),
            Err(Error::LengthMismatch {
                expected: 11,
                got: 3
            })
        );
        let mut msg = vec![false; 11];
        msg[4] = true;
        let w = c.encode(&msg).unwrap();
        assert_eq!(&w[..11], &msg[..]);
        let s = c.syndromes(&w).unwrap();
        assert_eq!(s.odd, vec![0]);
        assert!(!s.parity);
        assert!(c.is_codeword_by_division(&w));
    }

    #[test]
    fn encoded_words_are_valid_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (nu, t) in [(5, 2), (6, 2), (8, 2), (8, 3), (10, 4)] {
            let c = code(nu, t);
            for _ in 0..20 {
                let w = c.encode(&random_message(&c, &mut rng)).unwrap();
                assert_eq!(w.iter().filter(|&&b| b).count() % 2, 0);
                assert!(c.is_codeword(&w));
                assert!(c.is_codeword_by_division(&w));
            }
        }
    }

    #[test]
    fn single_flip_recovered() {
        let c = code(8, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = c.encode(&random_message(&c, &mut rng)).unwrap();
        assert_eq!(
            c.decode_bdd(&w, 1).unwrap(),
            DecodeOutcome::Corrected(vec![])
        );
        for p in 1..=256u16 {
            let mut r = w.clone();
            apply_flips(&mut r, &[p]).unwrap();
            assert_eq!(
                c.decode_bdd(&r, 1).unwrap(),
                DecodeOutcome::Corrected(vec![p])
            );
            assert_eq!(
                c.decode_bdd(&r, 2).unwrap(),
                DecodeOutcome::Corrected(vec![p])
            );
        }
    }

    fn patterns(n: u16, w: usize) -> Vec<Vec<u16>> {
        fn rec(from: u16, n: u16, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for p in from..=n {
                cur.push(p);
                rec(p + 1, n, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(1, n, w, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn weight_three_is_always_detected_nu5() {
        // d_min = 6: a weight-3 word is at distance ≥ 3 from every codeword.
        let c = code(5, 2);
        for p in patterns(32, 3) {
            let mut w = vec![false; 32];
            apply_flips(&mut w, &p).unwrap();
            assert_eq!(c.brute_force_bdd(&w, 2).unwrap(), DecodeOutcome::Failure);
            assert_eq!(c.decode_bdd(&w, 2).unwrap(), DecodeOutcome::Failure);
        }
    }

    #[test]
    fn weight_four_miscorrects_nu5() {
        let c = code(5, 2);
        let mut found = 0;
        for p in patterns(32, 4) {
            let mut w = vec![false; 32];
            apply_flips(&mut w, &p).unwrap();
            let oracle = c.brute_force_bdd(&w, 2).unwrap();
            assert_eq!(c.decode_bdd(&w, 2).unwrap(), oracle);
            if let DecodeOutcome::Corrected(e) = &oracle {
                assert!(e.iter().all(|x| !p.contains(x)));
                found += 1;
            }
            // Never within distance 1 of a codeword.
            assert_eq!(c.decode_bdd(&w, 1).unwrap(), DecodeOutcome::Failure);
        }
        assert!(found > 0);
    }

    #[test]
    fn t_eff_validated() {
        let c = code(5, 2);
        let w = vec![false; 32];
        assert!(c.decode_bdd(&w, 0).is_err());
        assert!(c.decode_bdd(&w, 3).is_err());
        assert!(c.decode_bdd(&w[..5], 1).is_err());
    }

    #[test]
    fn apply_flips_contract() {
        let mut w = vec![false; 16];
        apply_flips(&mut w, &[10, 12]).unwrap();
        let ones: Vec<_> = (1..=16).filter(|&p| w[p - 1]).collect();
        assert_eq!(ones, vec![10, 12]);
        apply_flips(&mut w, &[10, 12]).unwrap();
        assert!(w.iter().all(|&b| !b));
        apply_flips(&mut w, &[]).unwrap();
        assert!(apply_flips(&mut w, &[0]).is_err());
        assert!(apply_flips(&mut w, &[17]).is_err());
    }

    #[test]
    fn bm_path_matches_closed_form() {
        let c = code(6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20000 {
            let odd = vec![rng.gen_range(0..64u16), rng.gen_range(0..64u16)];
            let parity = rng.gen();
            for t_eff in 1..=2 {
                assert_eq!(
                    c.decode_syndromes(&odd, parity, t_eff),
                    c.decode_syndromes_bm(&odd, parity, t_eff)
                );
            }
        }
    }

    #[test]
    fn corrupted_generator_breaks_encoding() {
        let mut c = code(5, 2);
        c.corrupt_generator();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bad = (0..20).any(|_| {
            let w = c.encode(&random_message(&c, &mut rng)).unwrap();
            !c.is_codeword(&w)
        });
        assert!(bad);
    }
}
