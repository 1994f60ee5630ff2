//! Window decoding with plain bounded-distance decoding, and the idealized
//! (genie) variant that refuses any correction not landing on the
//! transmitted component word.
//!
//! Schedule per window position: `ell` sweeps, positions `W−1` down to `1`,
//! rows `1..=a` ascending.

use crate::staircase::{CodewordId, ComponentCode, Window};

/// Counters shared by all decoders.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecoderStats {
    /// Non-empty flip sets applied to the window.
    pub corrections: u64,
    /// Applied corrections after which the word differs from the
    /// transmitted one. Only counted when truth is tracked.
    pub miscorrections: u64,
    pub freezes: u64,
    pub backtracks: u64,
}

impl DecoderStats {
    pub fn merge(&mut self, other: &DecoderStats) {
        self.corrections += other.corrections;
        self.miscorrections += other.miscorrections;
        self.freezes += other.freezes;
        self.backtracks += other.backtracks;
    }

    pub fn since(&self, earlier: &DecoderStats) -> DecoderStats {
        DecoderStats {
            corrections: self.corrections - earlier.corrections,
            miscorrections: self.miscorrections - earlier.miscorrections,
            freezes: self.freezes - earlier.freezes,
            backtracks: self.backtracks - earlier.backtracks,
        }
    }
}

pub trait WindowDecoder<C: ComponentCode> {
    /// Runs the full per-position schedule on the current window.
    fn decode(&mut self, window: &mut Window<C>);

    /// Called right before the window shifts, while the outgoing words are
    /// still at position 1.
    fn before_shift(&mut self, _window: &Window<C>) {}

    fn stats(&self) -> DecoderStats;
}

/// Plain iterative BDD (every correction applied immediately).
#[derive(Clone, Debug)]
pub struct ConventionalDecoder {
    pub iterations: usize,
    stats: DecoderStats,
}

impl ConventionalDecoder {
    pub fn new(iterations: usize) -> Self {
        ConventionalDecoder {
            iterations,
            stats: DecoderStats::default(),
        }
    }
}

/// BDD where a correction is applied only if it reproduces the transmitted
/// word; requires a window with truth tracking.
#[derive(Clone, Debug)]
pub struct GenieDecoder {
    pub iterations: usize,
    stats: DecoderStats,
}

impl GenieDecoder {
    pub fn new(iterations: usize) -> Self {
        GenieDecoder {
            iterations,
            stats: DecoderStats::default(),
        }
    }
}

impl<C: ComponentCode> WindowDecoder<C> for ConventionalDecoder {
    fn decode(&mut self, window: &mut Window<C>) {
        run_schedule(window, self.iterations, &mut self.stats, false);
    }

    fn stats(&self) -> DecoderStats {
        self.stats
    }
}

impl<C: ComponentCode> WindowDecoder<C> for GenieDecoder {
    fn decode(&mut self, window: &mut Window<C>) {
        assert!(
            window.has_truth(),
            "genie decoding needs the transmitted blocks"
        );
        run_schedule(window, self.iterations, &mut self.stats, true);
    }

    fn stats(&self) -> DecoderStats {
        self.stats
    }
}

/// One-shot conventional decoding of the current window.
pub fn decode_window_conventional<C: ComponentCode>(
    window: &mut Window<C>,
    iterations: usize,
) -> DecoderStats {
    let mut stats = DecoderStats::default();
    run_schedule(window, iterations, &mut stats, false);
    stats
}

/// One-shot genie decoding of the current window.
pub fn decode_window_genie<C: ComponentCode>(
    window: &mut Window<C>,
    iterations: usize,
) -> DecoderStats {
    assert!(
        window.has_truth(),
        "genie decoding needs the transmitted blocks"
    );
    let mut stats = DecoderStats::default();
    run_schedule(window, iterations, &mut stats, true);
    stats
}

fn run_schedule<C: ComponentCode>(
    window: &mut Window<C>,
    iterations: usize,
    stats: &mut DecoderStats,
    genie: bool,
) {
    let geom = window.geometry();
    let t = window.code().capability();
    for _ in 0..iterations {
        for i in (1..geom.w).rev() {
            for j in 1..=geom.a {
                let id = window.id(i, j);
                // Clean words were already handled at an earlier visit.
                if !window.needs_decode(id, t) {
                    continue;
                }
                let flips = match window.decode(id, t) {
                    crate::bch::DecodeOutcome::Corrected(e) if !e.is_empty() => e.clone(),
                    _ => continue,
                };
                if genie && !lands_on_truth(window, i, j, id, &flips) {
                    continue;
                }
                apply_correction(window, i, j, id, &flips, t, stats);
            }
        }
    }
}

/// True if flipping `flips` turns `(i, j)` into its transmitted word.
pub(crate) fn lands_on_truth<C: ComponentCode>(
    window: &Window<C>,
    i: usize,
    j: usize,
    id: CodewordId,
    flips: &[u16],
) -> bool {
    window.error_weight(id) == Some(flips.len() as u32)
        && flips
            .iter()
            .all(|&e| window.is_error_bit(i, j, e as usize) == Some(true))
}

pub(crate) fn apply_correction<C: ComponentCode>(
    window: &mut Window<C>,
    i: usize,
    j: usize,
    id: CodewordId,
    flips: &[u16],
    t_eff: usize,
    stats: &mut DecoderStats,
) {
    for &e in flips {
        window.flip(i, j, e as usize);
    }
    window.mark_valid(id, t_eff);
    stats.corrections += 1;
    if window.error_weight(id).is_some_and(|w| w != 0) {
        stats.miscorrections += 1;
    }
}
