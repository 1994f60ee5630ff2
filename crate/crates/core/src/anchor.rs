//! Anchor-based window decoding that detects and avoids component-code
//! miscorrections.
//!
//! Decoding is split into a decoding step (syndromes to error locations,
//! cached per component word) and an error-correction step. Each visit of a
//! word in the window schedule runs:
//!
//! 1. skip on decoding failure;
//! 2. for every error location whose orthogonal word is an anchor `A`, count
//!    `A`'s conflicts with words other than the current one. Below the
//!    threshold `T` the current word is frozen and nothing is flipped; at or
//!    above `T`, `A` is marked for backtracking;
//! 3. flip the error locations; the word becomes an anchor;
//! 4. backtrack every marked anchor: reverse its flips, drop its conflicts
//!    and release the words it froze.
//!
//! Words at the newest position `W − 1` are decoded with a reduced
//! capability `t_eff_last`.
//!
//! A few situations the four steps leave open are resolved as follows:
//!
//! - Frozen words whose bits change are unfrozen; their conflict edges stay
//!   until the anchor on the other side is backtracked or leaves.
//! - When a backtracked anchor shares its reversed bit with the word that
//!   triggered the backtrack, that bit was already set to its pre-anchor
//!   value in step 3 and is not flipped again.
//! - An anchor whose bits are changed by another anchor's reversal loses its
//!   anchor status (its own flips stay applied) and is decoded again at its
//!   next visit.
//! - Anchors leaving the window release the words they froze.

use crate::bch::DecodeOutcome;
use crate::decoder::{DecoderStats, WindowDecoder};
use crate::staircase::{CodewordId, ComponentCode, Window};

/// `T = ∞`: anchors are never backtracked.
pub const INFINITE_THRESHOLD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Status {
    #[default]
    None,
    Anchor,
    Frozen,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodewordState {
    pub status: Status,
    /// Positions flipped when the word was anchored.
    pub applied_flips: Vec<u16>,
    /// Words in conflict with this one (kept symmetric).
    pub conflicts: Vec<CodewordId>,
    /// Anchors currently freezing this word.
    pub frozen_by: Vec<CodewordId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnchorConfig {
    /// Sweeps per window position, ℓ.
    pub iterations: usize,
    /// Conflict threshold `T`; [`INFINITE_THRESHOLD`] disables backtracking.
    pub threshold: u32,
    /// Capability used at position `W − 1`.
    pub t_eff_last: usize,
}

/// Result of one [`AnchorDecoder::process_codeword`] call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Visit {
    SkippedAnchor,
    SkippedFrozen,
    Failure,
    Frozen {
        by: CodewordId,
    },
    Anchored {
        flips: Vec<u16>,
        backtracked: Vec<CodewordId>,
    },
}

/// One bit flip performed by the decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipRecord {
    /// Word whose visit caused the flip.
    pub visitor: CodewordId,
    /// Word the flip was issued for (the visitor in step 3, the backtracked
    /// anchor in step 4) and the position within it.
    pub owner: CodewordId,
    pub position: u16,
    pub reversal: bool,
    /// Orthogonal word sharing the bit and its status before the flip.
    pub partner: Option<(CodewordId, Status)>,
}

pub struct AnchorDecoder {
    config: AnchorConfig,
    states: Vec<CodewordState>,
    stats: DecoderStats,
    demotions: u64,
    audit: Option<Vec<FlipRecord>>,
}

impl AnchorDecoder {
    pub fn new<C: ComponentCode>(config: AnchorConfig, window: &Window<C>) -> Self {
        let g = window.geometry();
        AnchorDecoder {
            config,
            states: vec![CodewordState::default(); g.w * g.a],
            stats: DecoderStats::default(),
            demotions: 0,
            audit: None,
        }
    }

    pub fn config(&self) -> &AnchorConfig {
        &self.config
    }

    /// Starts recording every flip into an audit log.
    pub fn enable_audit(&mut self) {
        self.audit = Some(Vec::new());
    }

    pub fn take_audit(&mut self) -> Vec<FlipRecord> {
        self.audit.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn state(&self, id: CodewordId) -> &CodewordState {
        &self.states[id.0 as usize]
    }

    /// Anchors that lost their status because another anchor's reversal
    /// changed their bits.
    pub fn demotions(&self) -> u64 {
        self.demotions
    }

    fn t_eff<C: ComponentCode>(&self, window: &Window<C>, i: usize) -> usize {
        if i == window.geometry().last_position() {
            self.config.t_eff_last
        } else {
            window.code().capability()
        }
    }

    /// Decoding step (no flips) for every word whose cache is stale.
    pub fn initial_decode_pass<C: ComponentCode>(&mut self, window: &mut Window<C>) {
        let g = window.geometry();
        for i in 1..g.w {
            let t_eff = self.t_eff(window, i);
            for j in 1..=g.a {
                let id = window.id(i, j);
                window.decode(id, t_eff);
            }
        }
    }

    /// Steps 1–4 for component word `(i, j)`.
    pub fn process_codeword<C: ComponentCode>(
        &mut self,
        window: &mut Window<C>,
        i: usize,
        j: usize,
    ) -> Visit {
        let id = window.id(i, j);
        match self.states[id.0 as usize].status {
            Status::Frozen => return Visit::SkippedFrozen,
            Status::Anchor => return Visit::SkippedAnchor,
            Status::None => {}
        }
        let geom = window.geometry();
        let t_eff = self.t_eff(window, i);

        // Step 1.
        let flips = match window.decode(id, t_eff) {
            DecodeOutcome::Failure => return Visit::Failure,
            DecodeOutcome::Corrected(e) => e.clone(),
        };

        // Step 2.
        let mut marked: Vec<CodewordId> = Vec::new();
        for &e in &flips {
            let Some((i2, j2, _)) = geom.orthogonal_unchecked(i, j, e as usize) else {
                continue;
            };
            let other = window.id(i2, j2);
            let st = &self.states[other.0 as usize];
            if st.status != Status::Anchor {
                continue;
            }
            let c = st.conflicts.iter().filter(|&&x| x != id).count() as u64;
            if c < self.config.threshold as u64 {
                self.freeze(id, other);
                return Visit::Frozen { by: other };
            }
            if !marked.contains(&other) {
                marked.push(other);
            }
        }

        // Step 3.
        for &e in &flips {
            let partner = window.flip(i, j, e as usize);
            self.record(id, id, e, false, partner);
            if let Some(p) = partner {
                if !marked.contains(&p) {
                    self.bits_changed(p);
                }
            }
        }
        window.mark_valid(id, t_eff);
        if !flips.is_empty() {
            self.stats.corrections += 1;
            if window.error_weight(id).is_some_and(|w| w != 0) {
                self.stats.miscorrections += 1;
            }
        }
        let st = &mut self.states[id.0 as usize];
        st.status = Status::Anchor;
        st.applied_flips = flips.clone();

        // Step 4.
        for (n, &anchor) in marked.iter().enumerate() {
            self.backtrack(window, anchor, id, &marked[n + 1..]);
        }

        Visit::Anchored {
            flips,
            backtracked: marked,
        }
    }

    fn record(
        &mut self,
        visitor: CodewordId,
        owner: CodewordId,
        position: u16,
        reversal: bool,
        partner: Option<CodewordId>,
    ) {
        if let Some(audit) = &mut self.audit {
            let partner = partner.map(|p| (p, self.states[p.0 as usize].status));
            audit.push(FlipRecord {
                visitor,
                owner,
                position,
                reversal,
                partner,
            });
        }
    }

    fn freeze(&mut self, id: CodewordId, anchor: CodewordId) {
        let st = &mut self.states[id.0 as usize];
        st.status = Status::Frozen;
        if !st.frozen_by.contains(&anchor) {
            st.frozen_by.push(anchor);
        }
        if !st.conflicts.contains(&anchor) {
            st.conflicts.push(anchor);
        }
        let a = &mut self.states[anchor.0 as usize];
        if !a.conflicts.contains(&id) {
            a.conflicts.push(id);
        }
        self.stats.freezes += 1;
    }

    /// A bit of `id` was flipped by someone else's decision.
    fn bits_changed(&mut self, id: CodewordId) {
        match self.states[id.0 as usize].status {
            Status::Frozen => {
                let st = &mut self.states[id.0 as usize];
                st.status = Status::None;
                st.frozen_by.clear();
            }
            Status::Anchor => {
                self.release(id);
                let st = &mut self.states[id.0 as usize];
                st.status = Status::None;
                st.applied_flips.clear();
                self.demotions += 1;
            }
            Status::None => {}
        }
    }

    /// Drops all conflict edges of `id` and unfreezes words left without a
    /// freezing anchor.
    fn release(&mut self, id: CodewordId) {
        let edges = std::mem::take(&mut self.states[id.0 as usize].conflicts);
        for other in edges {
            let st = &mut self.states[other.0 as usize];
            st.conflicts.retain(|&x| x != id);
            st.frozen_by.retain(|&x| x != id);
            if st.status == Status::Frozen && st.frozen_by.is_empty() {
                st.status = Status::None;
            }
        }
    }

    fn backtrack<C: ComponentCode>(
        &mut self,
        window: &mut Window<C>,
        anchor: CodewordId,
        visitor: CodewordId,
        pending: &[CodewordId],
    ) {
        let (ia, ja) = window.position(anchor);
        let geom = window.geometry();
        let (iv, jv) = window.position(visitor);
        let flips = std::mem::take(&mut self.states[anchor.0 as usize].applied_flips);
        for &e in &flips {
            let shared_with_visitor = geom
                .orthogonal_unchecked(ia, ja, e as usize)
                .is_some_and(|(i2, j2, _)| (i2, j2) == (iv, jv));
            if shared_with_visitor {
                continue;
            }
            let partner = window.flip(ia, ja, e as usize);
            self.record(visitor, anchor, e, true, partner);
            if let Some(p) = partner {
                if !pending.contains(&p) {
                    self.bits_changed(p);
                }
            }
        }
        self.release(anchor);
        let st = &mut self.states[anchor.0 as usize];
        st.status = Status::None;
        st.frozen_by.clear();
        self.stats.backtracks += 1;
    }

    /// Forgets the words at position 1, which leave with the next shift.
    pub fn drop_outgoing<C: ComponentCode>(&mut self, window: &Window<C>) {
        for j in 1..=window.geometry().a {
            let id = window.id(1, j);
            self.release(id);
            self.states[id.0 as usize] = CodewordState::default();
        }
    }

    /// Checks the bookkeeping invariants; returns a description of the first
    /// violation.
    pub fn validate<C: ComponentCode>(&self, window: &Window<C>) -> Result<(), String> {
        let g = window.geometry();
        let live: Vec<CodewordId> = (1..g.w)
            .flat_map(|i| (1..=g.a).map(move |j| (i, j)))
            .map(|(i, j)| window.id(i, j))
            .collect();
        for (idx, st) in self.states.iter().enumerate() {
            let id = CodewordId(idx as u32);
            if !live.contains(&id) {
                if *st != CodewordState::default() {
                    return Err(format!("{id:?} outside the window carries state"));
                }
                continue;
            }
            let at = window.position(id);
            if st.status == Status::Frozen && st.frozen_by.is_empty() {
                return Err(format!("{at:?} frozen without a freezing anchor"));
            }
            if st.status != Status::Anchor && !st.applied_flips.is_empty() {
                return Err(format!("{at:?} keeps flips without being an anchor"));
            }
            if st.status != Status::Frozen && !st.frozen_by.is_empty() {
                return Err(format!("{at:?} has freezing anchors but is not frozen"));
            }
            for &c in &st.conflicts {
                if !self.states[c.0 as usize].conflicts.contains(&id) {
                    return Err(format!(
                        "conflict {at:?} -> {:?} is not symmetric",
                        window.position(c)
                    ));
                }
                if !live.contains(&c) {
                    return Err(format!("{at:?} in conflict with a word outside the window"));
                }
            }
            for &f in &st.frozen_by {
                if self.states[f.0 as usize].status != Status::Anchor {
                    return Err(format!(
                        "{at:?} frozen by non-anchor {:?}",
                        window.position(f)
                    ));
                }
                if !st.conflicts.contains(&f) {
                    return Err(format!(
                        "{at:?} frozen by {:?} without a conflict",
                        window.position(f)
                    ));
                }
            }
        }
        Ok(())
    }
}

impl<C: ComponentCode> WindowDecoder<C> for AnchorDecoder {
    fn decode(&mut self, window: &mut Window<C>) {
        self.initial_decode_pass(window);
        let g = window.geometry();
        for _ in 0..self.config.iterations {
            for i in (1..g.w).rev() {
                for j in 1..=g.a {
                    self.process_codeword(window, i, j);
                }
            }
        }
    }

    fn before_shift(&mut self, window: &Window<C>) {
        self.drop_outgoing(window);
    }

    fn stats(&self) -> DecoderStats {
        self.stats
    }
}

/// Scripted component code and the two worked scenarios (blocks of size
/// 6, window of 5 blocks, `t = 2`, `T = 1`).
pub mod scenarios {
    use std::collections::HashMap;
    use std::sync::Arc;

    use super::*;

    /// Length-12 "code" whose syndrome is the word itself; decoding looks the
    /// word up in a script. Unscripted words decode to `Corrected(∅)` when
    /// zero and `Failure` otherwise.
    pub struct ScriptedCode {
        unit: Vec<[u16; 1]>,
        script: HashMap<u16, Vec<u16>>,
    }

    impl ScriptedCode {
        pub fn new() -> Self {
            ScriptedCode {
                unit: (0..12).map(|p| [1u16 << p]).collect(),
                script: HashMap::new(),
            }
        }

        /// Word with ones at `ones` decodes to `Corrected(flips)`.
        pub fn script(&mut self, ones: &[u16], flips: &[u16]) {
            let mut f = flips.to_vec();
            f.sort_unstable();
            self.script.insert(mask(ones), f);
        }
    }

    impl Default for ScriptedCode {
        fn default() -> Self {
            Self::new()
        }
    }

    pub fn mask(ones: &[u16]) -> u16 {
        ones.iter().fold(0, |m, &p| m | 1 << (p - 1))
    }

    impl ComponentCode for ScriptedCode {
        fn length(&self) -> usize {
            12
        }
        fn capability(&self) -> usize {
            2
        }
        fn syndrome_words(&self) -> usize {
            1
        }
        fn syndrome_contribution(&self, position: usize) -> &[u16] {
            &self.unit[position - 1]
        }
        fn decode_syndromes(
            &self,
            syndrome: &[u16],
            _parity: bool,
            _t_eff: usize,
        ) -> DecodeOutcome {
            match self.script.get(&syndrome[0]) {
                Some(f) => DecodeOutcome::Corrected(f.clone()),
                None if syndrome[0] == 0 => DecodeOutcome::Corrected(Vec::new()),
                None => DecodeOutcome::Failure,
            }
        }
    }

    pub const CONFIG: AnchorConfig = AnchorConfig {
        iterations: 1,
        threshold: 1,
        t_eff_last: 2,
    };

    pub fn window(code: ScriptedCode) -> Window<ScriptedCode> {
        Window::new(Arc::new(code), 5, false).expect("valid geometry")
    }

    /// Sets bits `ones` of `(i, j)` without touching decoder state.
    pub fn inject(window: &mut Window<ScriptedCode>, i: usize, j: usize, ones: &[u16]) {
        for &e in ones {
            window.flip(i, j, e as usize);
        }
    }

    fn ensure(cond: bool, what: &str) -> Result<(), String> {
        if cond {
            Ok(())
        } else {
            Err(what.to_string())
        }
    }

    /// (3,4) carries three errors and miscorrects to {10, 12}; bit 10 is
    /// shared with anchor (4,4), which has no other conflicts, so (3,4) is
    /// frozen and nothing is flipped.
    pub fn example_freeze() -> Result<(), String> {
        let mut code = ScriptedCode::new();
        code.script(&[2, 5, 9], &[10, 12]);
        let mut w = window(code);
        let mut dec = AnchorDecoder::new(CONFIG, &w);
        ensure(
            dec.process_codeword(&mut w, 4, 4)
                == Visit::Anchored {
                    flips: vec![],
                    backtracked: vec![],
                },
            "(4,4) anchors",
        )?;
        inject(&mut w, 3, 4, &[2, 5, 9]);
        let before = w.component_word(3, 4).unwrap();
        let anchor = w.id(4, 4);
        let v = dec.process_codeword(&mut w, 3, 4);
        ensure(v == Visit::Frozen { by: anchor }, "(3,4) frozen by (4,4)")?;
        let st = dec.state(w.id(3, 4));
        ensure(st.status == Status::Frozen, "status Frozen")?;
        ensure(st.frozen_by == vec![anchor], "frozen_by = {(4,4)}")?;
        ensure(
            dec.state(anchor).conflicts == vec![w.id(3, 4)],
            "conflict registered",
        )?;
        ensure(
            w.component_word(3, 4).unwrap() == before,
            "no flips applied",
        )?;
        ensure(
            dec.state(anchor).status == Status::Anchor,
            "(4,4) still anchor",
        )?;
        ensure(
            dec.process_codeword(&mut w, 3, 4) == Visit::SkippedFrozen,
            "frozen word is skipped",
        )?;
        dec.validate(&w)
    }

    /// Anchor (1,3) miscorrected with flips {5, 7}. (2,1) sees one error at
    /// 3 (the bit (1,3) flipped at 7) and is frozen. (2,2) decodes to {3, 10};
    /// bit 3 hits (1,3) whose other conflict count is now 1 = T, so (1,3) is
    /// marked, (2,2) is corrected and anchored, and (1,3) is backtracked,
    /// which unfreezes (2,1).
    pub fn example_backtrack() -> Result<(), String> {
        let mut code = ScriptedCode::new();
        code.script(&[2, 9, 11], &[5, 7]);
        code.script(&[3], &[3]);
        code.script(&[1, 6, 12], &[3, 10]);
        let mut w = window(code);
        let mut dec = AnchorDecoder::new(CONFIG, &w);
        let (a13, a21, a22) = (w.id(1, 3), w.id(2, 1), w.id(2, 2));

        inject(&mut w, 1, 3, &[2, 9, 11]);
        let pre_anchor = w.component_word(1, 3).unwrap();
        ensure(
            dec.process_codeword(&mut w, 1, 3)
                == Visit::Anchored {
                    flips: vec![5, 7],
                    backtracked: vec![],
                },
            "(1,3) anchored with {5,7}",
        )?;
        ensure(
            w.component_word(2, 1).unwrap()[2],
            "(2,1) bit 3 set by (1,3)",
        )?;

        ensure(
            dec.process_codeword(&mut w, 2, 1) == Visit::Frozen { by: a13 },
            "(2,1) frozen by (1,3)",
        )?;
        ensure(
            dec.state(a13).conflicts == vec![a21],
            "(1,3) conflicts = {(2,1)}",
        )?;
        ensure(
            dec.state(a21).conflicts == vec![a13],
            "(2,1) conflicts = {(1,3)}",
        )?;

        inject(&mut w, 2, 2, &[1, 6, 12]);
        let v = dec.process_codeword(&mut w, 2, 2);
        ensure(
            v == Visit::Anchored {
                flips: vec![3, 10],
                backtracked: vec![a13],
            },
            "(2,2) anchored, (1,3) backtracked",
        )?;
        ensure(dec.state(a22).status == Status::Anchor, "(2,2) anchor")?;
        ensure(
            dec.state(a22).applied_flips == vec![3, 10],
            "(2,2) flips {3,10}",
        )?;
        let s13 = dec.state(a13);
        ensure(s13.status == Status::None, "(1,3) no longer anchor")?;
        ensure(
            s13.conflicts.is_empty() && s13.applied_flips.is_empty(),
            "(1,3) cleared",
        )?;
        let now = w.component_word(1, 3).unwrap();
        ensure(
            now[4] == pre_anchor[4] && now[6] == pre_anchor[6],
            "flips {5,7} reversed",
        )?;
        // Bit 8 of (1,3) is bit 3 of (2,2), flipped in step 3.
        ensure(now[7] != pre_anchor[7], "(2,2)'s flip kept")?;
        let s21 = dec.state(a21);
        ensure(
            s21.status == Status::None && s21.frozen_by.is_empty(),
            "(2,1) unfrozen",
        )?;
        ensure(
            !w.component_word(2, 1).unwrap()[2],
            "(2,1) bit 3 back to zero",
        )?;
        ensure(
            dec.stats.backtracks == 1 && dec.stats.freezes == 1,
            "counters",
        )?;
        dec.validate(&w)
    }
}
