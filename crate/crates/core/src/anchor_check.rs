//! Byte-driven exerciser for the anchor state machine, checking the
//! decoder's invariants after every `process_codeword` call.
//!
//! The input bytes are a program: window shifts that bring in a noisy block
//! (the all-zero codeword plus random flips) and visits of single component
//! words in arbitrary order. After each visit the following are checked:
//!
//! - [`AnchorDecoder::validate`] (conflict symmetry, freezing anchors exist,
//!   no stale state);
//! - no flip issued for another word touches an anchor unless that anchor is
//!   backtracked in the same visit;
//! - every backtracked anchor has its flipped positions back at their values
//!   from before it was anchored;
//! - every anchor is a valid component codeword.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchor::{AnchorConfig, AnchorDecoder, Status, Visit, INFINITE_THRESHOLD};
use crate::bch::ExtendedBchCode;
use crate::decoder::WindowDecoder;
use crate::gf::Field;
use crate::staircase::{Block, CodewordId, Window};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckSummary {
    pub calls: u64,
    pub shifts: u64,
    pub anchored: u64,
    pub freezes: u64,
    pub backtracks: u64,
    pub demotions: u64,
}

impl CheckSummary {
    pub fn merge(&mut self, o: &CheckSummary) {
        self.calls += o.calls;
        self.shifts += o.shifts;
        self.anchored += o.anchored;
        self.freezes += o.freezes;
        self.backtracks += o.backtracks;
        self.demotions += o.demotions;
    }
}

struct Bytes<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Bytes<'_> {
    fn next(&mut self) -> Option<u8> {
        let b = self.data.get(self.pos).copied();
        self.pos += 1;
        b
    }

    fn next_u16(&mut self) -> Option<u16> {
        Some(u16::from_le_bytes([self.next()?, self.next()?]))
    }
}

const THRESHOLDS: [u32; 4] = [1, 2, 3, INFINITE_THRESHOLD];

/// Runs the program in `data` (ν = 5, t = 2, W = 4) until the bytes run out
/// or `max_calls` visits were made.
pub fn run_bytes(data: &[u8], max_calls: u64) -> Result<CheckSummary, String> {
    let mut bytes = Bytes { data, pos: 0 };
    let Some(head) = bytes.next() else {
        return Ok(CheckSummary::default());
    };
    let code = ExtendedBchCode::new(Field::new(5, None).expect("GF(32)"), 2).expect("n=32, t=2");
    let a = code.n() / 2;
    let w = 4;
    let config = AnchorConfig {
        iterations: 1,
        threshold: THRESHOLDS[(head & 3) as usize],
        t_eff_last: 1 + (head >> 2 & 1) as usize,
    };
    let mut window = Window::new(Arc::new(code), w, false).map_err(|e| e.to_string())?;
    let mut dec = AnchorDecoder::new(config, &window);
    dec.enable_audit();
    let mut summary = CheckSummary::default();
    // Component word of each anchor from before it was anchored.
    let mut pre: HashMap<CodewordId, Vec<bool>> = HashMap::new();

    while summary.calls < max_calls {
        let Some(op) = bytes.next() else { break };
        if op < 24 {
            let flips = bytes.next().unwrap_or(0) as usize % (a * a / 8 + 1);
            let mut rx = Block::zeros(a);
            for _ in 0..flips {
                let Some(p) = bytes.next_u16() else { break };
                let p = p as usize % (a * a);
                rx.flip(p / a, p % a);
            }
            dec.before_shift(&window);
            for j in 1..=a {
                pre.remove(&window.id(1, j));
            }
            window.shift(rx, None).map_err(|e| e.to_string())?;
            summary.shifts += 1;
            dec.validate(&window)
                .map_err(|e| format!("after shift {}: {e}", summary.shifts))?;
            continue;
        }
        let (Some(bi), Some(bj)) = (bytes.next(), bytes.next()) else {
            break;
        };
        let i = 1 + bi as usize % (w - 1);
        let j = 1 + bj as usize % a;
        let id = window.id(i, j);
        let before = window.component_word(i, j).map_err(|e| e.to_string())?;
        let visit = dec.process_codeword(&mut window, i, j);
        summary.calls += 1;
        let audit = dec.take_audit();
        let ctx = |msg: String| format!("call {} at ({i},{j}): {msg}", summary.calls);

        dec.validate(&window).map_err(ctx)?;
        let backtracked: &[CodewordId] = match &visit {
            Visit::Anchored { backtracked, .. } => backtracked,
            _ => &[],
        };
        for r in &audit {
            if let Some((p, Status::Anchor)) = r.partner {
                if !r.reversal && !backtracked.contains(&p) {
                    return Err(ctx(format!(
                        "bit {} of anchor {:?} flipped without backtracking",
                        r.position,
                        window.position(p)
                    )));
                }
            }
        }
        for &b in backtracked {
            let (ib, jb) = window.position(b);
            let word = window.component_word(ib, jb).map_err(|e| e.to_string())?;
            let snap = pre
                .remove(&b)
                .ok_or_else(|| ctx(format!("no snapshot for {:?}", (ib, jb))))?;
            let flipped: Vec<usize> = snap
                .iter()
                .zip(&word)
                .enumerate()
                .filter(|(_, (x, y))| x != y)
                .map(|(e, _)| e + 1)
                .collect();
            for e in &flipped {
                // Only the bit shared with the visitor may differ, and then
                // only because the visitor flipped it itself.
                let shared = window
                    .geometry()
                    .orthogonal_of(ib, jb, *e)
                    .ok()
                    .flatten()
                    .is_some_and(|(i2, j2, _)| (i2, j2) == (i, j));
                if !shared {
                    return Err(ctx(format!("backtracked {:?} differs at {e}", (ib, jb))));
                }
            }
            summary.backtracks += 1;
        }
        match &visit {
            Visit::Anchored { .. } => {
                pre.insert(id, before);
                summary.anchored += 1;
            }
            Visit::Frozen { .. } => summary.freezes += 1,
            _ => {}
        }
        pre.retain(|&k, _| dec.state(k).status == Status::Anchor);
        for ii in 1..w {
            for jj in 1..=a {
                let x = window.id(ii, jj);
                if dec.state(x).status == Status::Anchor && !window.has_zero_syndrome(x) {
                    return Err(ctx(format!("anchor {:?} is not a codeword", (ii, jj))));
                }
            }
        }
    }
    summary.demotions = dec.demotions();
    Ok(summary)
}

/// Pseudo-random program: noisy shifts interleaved with bursts of visits.
pub fn random_program(seed: u64, calls: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![(rng.next_u32() & 7) as u8];
    let mut emitted = 0;
    let shift = |out: &mut Vec<u8>, rng: &mut ChaCha8Rng| {
        out.push(0);
        let flips = 8 + rng.next_u32() % 25;
        out.push(flips as u8);
        for _ in 0..flips {
            out.extend_from_slice(&(rng.next_u32() as u16).to_le_bytes());
        }
    };
    for _ in 0..4 {
        shift(&mut out, &mut rng);
    }
    while emitted < calls {
        if rng.next_u32() % 60 == 0 {
            shift(&mut out, &mut rng);
        } else {
            out.push(24 + (rng.next_u32() % 232) as u8);
            out.push(rng.next_u32() as u8);
            out.push(rng.next_u32() as u8);
            emitted += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_runs_hold() {
        for seed in 0..8 {
            let s = run_bytes(&random_program(seed, 500), u64::MAX).unwrap();
            assert_eq!(s.calls, 500);
        }
    }

    #[test]
    fn garbage_is_harmless() {
        assert_eq!(run_bytes(&[], 10).unwrap(), CheckSummary::default());
        run_bytes(&[255; 64], 100).unwrap();
        run_bytes(&[0; 64], 100).unwrap();
    }
}
