//! Binary symmetric channel and Monte-Carlo post-FEC BER simulation.
//!
//! Randomness: every trial owns two ChaCha8 streams derived from the master
//! seed, stream `2·trial` for data bits and `2·trial + 1` for channel noise.
//! Trials are grouped in fixed-size batches; the stopping rule is evaluated
//! only between batches and results are merged in trial order, so the output
//! does not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::function::erf::{erfc, erfc_inv};

use crate::anchor::{AnchorConfig, AnchorDecoder, INFINITE_THRESHOLD};
use crate::bch::ExtendedBchCode;
use crate::decoder::{ConventionalDecoder, GenieDecoder, WindowDecoder};
use crate::error::{Error, Result};
use crate::staircase::{data_bits_per_block, encode_next_block, Block, Window};

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Hard-decision BPSK over AWGN: `p = Q(sqrt(2·R·Eb/N0))`.
pub fn crossover_from_eb_n0(eb_n0_db: f64, rate: f64) -> f64 {
    q_function((2.0 * rate * 10f64.powf(eb_n0_db / 10.0)).sqrt())
}

/// Inverse of [`crossover_from_eb_n0`]; `+∞` for `p = 0`.
pub fn eb_n0_from_crossover(p: f64, rate: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    let x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    10.0 * (x * x / (2.0 * rate)).log10()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub crossover_p: f64,
    pub eb_n0_db: f64,
}

impl ChannelSpec {
    pub fn from_p(p: f64, rate: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::Config(format!(
                "crossover probability {p} outside [0, 0.5)"
            )));
        }
        Ok(ChannelSpec {
            crossover_p: p,
            eb_n0_db: eb_n0_from_crossover(p, rate),
        })
    }

    pub fn from_eb_n0_db(db: f64, rate: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::Config(format!("Eb/N0 {db} dB is not finite")));
        }
        ChannelSpec::from_p(crossover_from_eb_n0(db, rate), rate)
    }
}

/// Flips every bit of `block` independently with probability `p`; returns
/// the noisy block and the number of flips.
pub fn transmit(block: &Block, p: f64, rng: &mut impl Rng) -> (Block, u64) {
    let mut out = block.clone();
    if p <= 0.0 {
        return (out, 0);
    }
    let a = block.size();
    let total = (a * a) as u64;
    let gaps = Geometric::new(p).expect("0 < p < 1");
    let mut flips = 0;
    let mut pos = gaps.sample(rng);
    while pos < total {
        out.flip((pos / a as u64) as usize, (pos % a as u64) as usize);
        flips += 1;
        pos = pos.saturating_add(1).saturating_add(gaps.sample(rng));
    }
    (out, flips)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Conventional,
    Genie,
    Anchor,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 3] = [
        DecoderKind::Conventional,
        DecoderKind::Genie,
        DecoderKind::Anchor,
    ];
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Conventional => "conventional",
            DecoderKind::Genie => "genie",
            DecoderKind::Anchor => "anchor",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "conventional" => Ok(DecoderKind::Conventional),
            "genie" | "idealized" => Ok(DecoderKind::Genie),
            "anchor" => Ok(DecoderKind::Anchor),
            other => Err(Error::Config(format!("unknown decoder {other:?}"))),
        }
    }
}

pub const MAX_WINDOW: usize = 1024;

/// Staircase code and window-decoding parameters.
#[derive(Clone, Debug)]
pub struct StaircaseParams {
    pub code: Arc<ExtendedBchCode>,
    /// Window size `W` in blocks.
    pub window: usize,
    /// Iterations per window position, ℓ.
    pub iterations: usize,
    /// Conflict threshold `T` ([`INFINITE_THRESHOLD`] for ∞).
    pub threshold: u32,
    /// Capability at position `W − 1` for the anchor decoder.
    pub t_eff_last: usize,
}

impl StaircaseParams {
    pub fn new(
        code: Arc<ExtendedBchCode>,
        window: usize,
        iterations: usize,
        threshold: u32,
        t_eff_last: usize,
    ) -> Result<Self> {
        if !(2..=MAX_WINDOW).contains(&window) {
            return Err(Error::Config(format!(
                "W = {window} outside 2..={MAX_WINDOW}"
            )));
        }
        if iterations == 0 {
            return Err(Error::Config("ell must be at least 1".into()));
        }
        if t_eff_last == 0 || t_eff_last > code.t() {
            return Err(Error::Config(format!(
                "t_eff_last = {t_eff_last} outside 1..={}",
                code.t()
            )));
        }
        Ok(StaircaseParams {
            code,
            window,
            iterations,
            threshold,
            t_eff_last,
        })
    }

    /// Block size `a = n/2`.
    pub fn a(&self) -> usize {
        self.code.n() / 2
    }

    pub fn rate(&self) -> f64 {
        self.code.staircase_rate()
    }

    pub fn anchor_config(&self) -> AnchorConfig {
        AnchorConfig {
            iterations: self.iterations,
            threshold: self.threshold,
            t_eff_last: self.t_eff_last,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoppingRule {
    pub min_bit_errors: u64,
    pub max_blocks: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_bit_errors: 100,
            max_blocks: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Measured blocks per independent trial.
    pub blocks_per_trial: u64,
    /// Trials between stopping-rule checks. Fixed, independent of `threads`.
    pub trials_per_batch: usize,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
    /// Emitted blocks discarded at the start of every trial.
    pub warmup_blocks: u64,
    /// Transmit all-zero codewords instead of encoding random data.
    pub zero_data: bool,
}

impl SimOptions {
    pub fn for_params(params: &StaircaseParams) -> Self {
        SimOptions {
            blocks_per_trial: 2000,
            trials_per_batch: 8,
            threads: 0,
            warmup_blocks: params.window as u64,
            zero_data: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrialStats {
    pub blocks_emitted: u64,
    pub pre_fec_bit_errors: u64,
    pub post_fec_bit_errors: u64,
    pub block_errors: u64,
    pub corrections_applied: u64,
    pub miscorrections_applied: u64,
    pub freezes: u64,
    pub backtracks: u64,
    pub failures: u64,
}

impl TrialStats {
    pub fn merge(&mut self, o: &TrialStats) {
        self.blocks_emitted += o.blocks_emitted;
        self.pre_fec_bit_errors += o.pre_fec_bit_errors;
        self.post_fec_bit_errors += o.post_fec_bit_errors;
        self.block_errors += o.block_errors;
        self.corrections_applied += o.corrections_applied;
        self.miscorrections_applied += o.miscorrections_applied;
        self.freezes += o.freezes;
        self.backtracks += o.backtracks;
        self.failures += o.failures;
    }

    pub fn bits(&self, a: usize) -> u64 {
        self.blocks_emitted * (a * a) as u64
    }

    pub fn post_fec_ber(&self, a: usize) -> f64 {
        ratio(self.post_fec_bit_errors, self.bits(a))
    }

    pub fn pre_fec_ber(&self, a: usize) -> f64 {
        ratio(self.pre_fec_bit_errors, self.bits(a))
    }

    /// 95% normal-approximation interval on the post-FEC BER.
    pub fn ber_ci(&self, a: usize) -> (f64, f64) {
        let n = self.bits(a) as f64;
        if n == 0.0 {
            return (0.0, 1.0);
        }
        let p = self.post_fec_ber(a);
        let half = 1.96 * (p * (1.0 - p) / n).sqrt();
        ((p - half).max(0.0), p + half)
    }

    pub fn miscorrection_fraction(&self) -> f64 {
        ratio(self.miscorrections_applied, self.corrections_applied)
    }
}

fn ratio(x: u64, y: u64) -> f64 {
    if y == 0 {
        0.0
    } else {
        x as f64 / y as f64
    }
}

fn make_decoder(
    kind: DecoderKind,
    params: &StaircaseParams,
    window: &Window<ExtendedBchCode>,
) -> Box<dyn WindowDecoder<ExtendedBchCode>> {
    match kind {
        DecoderKind::Conventional => Box::new(ConventionalDecoder::new(params.iterations)),
        DecoderKind::Genie => Box::new(GenieDecoder::new(params.iterations)),
        DecoderKind::Anchor => Box::new(AnchorDecoder::new(params.anchor_config(), window)),
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One independent stream: `warmup_blocks` discarded emissions followed by
/// `measured` counted ones.
pub fn run_trial(
    params: &StaircaseParams,
    p: f64,
    kind: DecoderKind,
    seed: u64,
    trial: u64,
    measured: u64,
    opts: &SimOptions,
) -> Result<TrialStats> {
    let code = &params.code;
    let a = params.a();
    let w = params.window;
    let mut data_rng = trial_rng(seed, 2 * trial);
    let mut noise_rng = trial_rng(seed, 2 * trial + 1);
    let mut window = Window::new(code.clone(), w, true)?;
    let mut decoder = make_decoder(kind, params, &window);
    let data_len = data_bits_per_block(code);
    let mut data = vec![false; data_len];
    let mut prev_tx = Block::zeros(a);
    let mut pre_errors = vec![0u64; w];

    let mut stats = TrialStats::default();
    let mut start = None;
    let mut s: u64 = 0;
    while stats.blocks_emitted < measured {
        s += 1;
        let tx = if opts.zero_data {
            Block::zeros(a)
        } else {
            for chunk in data.chunks_mut(64) {
                let bits: u64 = data_rng.gen();
                for (i, b) in chunk.iter_mut().enumerate() {
                    *b = bits >> i & 1 == 1;
                }
            }
            encode_next_block(code, &prev_tx, &data)?
        };
        let (rx, flips) = transmit(&tx, p, &mut noise_rng);

        decoder.before_shift(&window);
        let (emitted, emitted_tx) = window.shift(rx, Some(tx.clone()))?;
        let slot = (s % w as u64) as usize;
        let emitted_pre = std::mem::replace(&mut pre_errors[slot], flips);
        let index = s as i64 - w as i64;
        if index >= opts.warmup_blocks as i64 {
            if start.is_none() {
                start = Some((decoder.stats(), window.activity));
            }
            let errs = emitted.distance(emitted_tx.as_ref().expect("truth tracked"));
            stats.blocks_emitted += 1;
            stats.pre_fec_bit_errors += emitted_pre;
            stats.post_fec_bit_errors += errs;
            stats.block_errors += (errs > 0) as u64;
            if stats.blocks_emitted == measured {
                break;
            }
        }
        decoder.decode(&mut window);
        prev_tx = tx;
    }
    if let Some((d0, a0)) = start {
        let d = decoder.stats().since(&d0);
        stats.corrections_applied = d.corrections;
        stats.miscorrections_applied = d.miscorrections;
        stats.freezes = d.freezes;
        stats.backtracks = d.backtracks;
        stats.failures = window.activity.failures - a0.failures;
    }
    Ok(stats)
}

/// Runs trials until the stopping rule fires.
pub fn run_stream(
    params: &StaircaseParams,
    channel: &ChannelSpec,
    kind: DecoderKind,
    seed: u64,
    stop: &StoppingRule,
    opts: &SimOptions,
) -> Result<TrialStats> {
    if opts.blocks_per_trial == 0 || opts.trials_per_batch == 0 {
        return Err(Error::Config(
            "blocks per trial and trials per batch must be positive".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut total = TrialStats::default();
    let mut planned = 0u64;
    let mut next_trial = 0u64;
    while planned < stop.max_blocks && total.post_fec_bit_errors < stop.min_bit_errors {
        let mut batch = Vec::new();
        for _ in 0..opts.trials_per_batch {
            if planned >= stop.max_blocks {
                break;
            }
            let m = opts.blocks_per_trial.min(stop.max_blocks - planned);
            batch.push((next_trial, m));
            planned += m;
            next_trial += 1;
        }
        let results: Vec<Result<TrialStats>> = pool.install(|| {
            batch
                .par_iter()
                .map(|&(trial, m)| {
                    run_trial(params, channel.crossover_p, kind, seed, trial, m, opts)
                })
                .collect()
        });
        for r in results {
            total.merge(&r?);
        }
    }
    Ok(total)
}

/// Serializes non-finite values as `"inf"` / `"-inf"` / `"nan"`.
fn finite_or_str<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}

fn threshold_ser<S: Serializer>(t: &u32, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *t == INFINITE_THRESHOLD {
        s.serialize_str("inf")
    } else {
        s.serialize_u32(*t)
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

pub fn fmt_threshold(t: u32) -> String {
    if t == INFINITE_THRESHOLD {
        "inf".into()
    } else {
        t.to_string()
    }
}

/// One output row (one decoder at one channel point).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub decoder: DecoderKind,
    pub nu: u32,
    pub t: usize,
    pub a: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub ell: usize,
    #[serde(rename = "T", serialize_with = "threshold_ser")]
    pub threshold: u32,
    pub t_eff_last: usize,
    pub p: f64,
    #[serde(serialize_with = "finite_or_str")]
    pub eb_n0_db: f64,
    pub seed: u64,
    pub blocks: u64,
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub ber_ci_low: f64,
    pub ber_ci_high: f64,
    pub corrections: u64,
    pub miscorrections: u64,
    pub freezes: u64,
    pub backtracks: u64,
    pub failures: u64,
    #[serde(skip)]
    pub stats: TrialStats,
}

pub const CSV_HEADER: &str = "decoder,nu,t,a,W,ell,T,t_eff_last,p,eb_n0_db,seed,blocks,pre_fec_ber,post_fec_ber,ber_ci_low,ber_ci_high,corrections,miscorrections,freezes,backtracks,failures";

impl CurvePoint {
    pub fn new(
        params: &StaircaseParams,
        channel: &ChannelSpec,
        kind: DecoderKind,
        seed: u64,
        stats: TrialStats,
    ) -> Self {
        let a = params.a();
        let (lo, hi) = stats.ber_ci(a);
        CurvePoint {
            decoder: kind,
            nu: params.code.field().nu(),
            t: params.code.t(),
            a,
            w: params.window,
            ell: params.iterations,
            threshold: params.threshold,
            t_eff_last: params.t_eff_last,
            p: channel.crossover_p,
            eb_n0_db: channel.eb_n0_db,
            seed,
            blocks: stats.blocks_emitted,
            pre_fec_ber: stats.pre_fec_ber(a),
            post_fec_ber: stats.post_fec_ber(a),
            ber_ci_low: lo,
            ber_ci_high: hi,
            corrections: stats.corrections_applied,
            miscorrections: stats.miscorrections_applied,
            freezes: stats.freezes,
            backtracks: stats.backtracks,
            failures: stats.failures,
            stats,
        }
    }

    pub fn csv_row(&self) -> String {
        [
            self.decoder.to_string(),
            self.nu.to_string(),
            self.t.to_string(),
            self.a.to_string(),
            self.w.to_string(),
            self.ell.to_string(),
            fmt_threshold(self.threshold),
            self.t_eff_last.to_string(),
            fmt_f64(self.p),
            fmt_f64(self.eb_n0_db),
            self.seed.to_string(),
            self.blocks.to_string(),
            fmt_f64(self.pre_fec_ber),
            fmt_f64(self.post_fec_ber),
            fmt_f64(self.ber_ci_low),
            fmt_f64(self.ber_ci_high),
            self.corrections.to_string(),
            self.miscorrections.to_string(),
            self.freezes.to_string(),
            self.backtracks.to_string(),
            self.failures.to_string(),
        ]
        .join(",")
    }
}

pub fn to_csv(rows: &[CurvePoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[CurvePoint]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
}

/// One row per (channel point, decoder), in input order.
pub fn sweep(
    params: &StaircaseParams,
    points: &[ChannelSpec],
    decoders: &[DecoderKind],
    seed: u64,
    stop: &StoppingRule,
    opts: &SimOptions,
) -> Result<Vec<CurvePoint>> {
    let mut rows = Vec::with_capacity(points.len() * decoders.len());
    for ch in points {
        for &kind in decoders {
            let stats = run_stream(params, ch, kind, seed, stop, opts)?;
            rows.push(CurvePoint::new(params, ch, kind, seed, stats));
        }
    }
    Ok(rows)
}
