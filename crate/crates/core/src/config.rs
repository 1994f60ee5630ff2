//! Run configuration: presets, the flat `key = value` file format and
//! channel point lists.
//!
//! File format, one setting per line, `#` starts a comment:
//!
//! ```text
//! # keys mirror the CSV columns
//! nu = 8
//! t = 2
//! a = 128            # optional consistency check against n/2
//! W = 8
//! ell = 7
//! T = 1              # or inf
//! t_eff_last = 1
//! decoder = anchor
//! p = 0.004          # or eb_n0_db = 6.0
//! seed = 7
//! ```
//!
//! Further keys: `decoders`, `p_list`, `min_bit_errors`, `max_blocks`,
//! `out`, `format`, `preset`, `threads`. Keys are case-sensitive (`t` and
//! `T` differ).
//!
//! Precedence, lowest first: built-in defaults, preset, config file,
//! command-line flags. The `STAIRCASE_SEED` environment variable is used
//! only when neither the file nor the flags set a seed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::anchor::INFINITE_THRESHOLD;
use crate::bch::ExtendedBchCode;
use crate::error::{Error, Result};
use crate::gf::Field;
use crate::sim::{ChannelSpec, DecoderKind, SimOptions, StaircaseParams, StoppingRule};

pub const SEED_ENV: &str = "STAIRCASE_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const MAX_THREADS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// n = 256, t = 2 component code, W = 8, ℓ = 7, T = 1, t_eff_last = 1.
    Example1,
}

impl Preset {
    pub fn overrides(self) -> Overrides {
        match self {
            Preset::Example1 => Overrides {
                nu: Some(8),
                t: Some(2),
                w: Some(8),
                ell: Some(7),
                threshold: Some(1),
                t_eff_last: Some(1),
                ..Overrides::default()
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "example1" => Ok(Preset::Example1),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (available: example1)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?} (csv or json)"
            ))),
        }
    }
}

/// A channel point as written by the user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelPoint {
    Crossover(f64),
    EbN0Db(f64),
}

impl ChannelPoint {
    pub fn resolve(self, rate: f64) -> Result<ChannelSpec> {
        match self {
            ChannelPoint::Crossover(p) => ChannelSpec::from_p(p, rate),
            ChannelPoint::EbN0Db(db) => ChannelSpec::from_eb_n0_db(db, rate),
        }
    }
}

impl fmt::Display for ChannelPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelPoint::Crossover(p) => write!(f, "{p}"),
            ChannelPoint::EbN0Db(db) => write!(f, "{db}dB"),
        }
    }
}

/// Parses a comma-separated list of points. Plain numbers are crossover
/// probabilities; a `dB` suffix marks Eb/N0 values, e.g. `5.5dB,6dB`.
pub fn parse_p_list(s: &str) -> Result<Vec<ChannelPoint>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::Config(format!("empty entry in point list {s:?}")));
        }
        let point = match item.strip_suffix("dB").or_else(|| item.strip_suffix("db")) {
            Some(db) => ChannelPoint::EbN0Db(parse_f64("eb_n0_db", db)?),
            None => ChannelPoint::Crossover(parse_p(item)?),
        };
        out.push(point);
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: {v:?} is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: {v:?} is not finite")));
    }
    Ok(x)
}

fn parse_p(v: &str) -> Result<f64> {
    let p = parse_f64("p", v)?;
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Config(format!("p = {p} outside [0, 0.5)")));
    }
    Ok(p)
}

fn parse_int<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: {v:?} is not a valid non-negative integer")))
}

/// Parses a threshold value; `inf` means no threshold.
pub fn parse_threshold(v: &str) -> Result<u32> {
    match v.trim() {
        "inf" | "infinity" | "∞" => Ok(INFINITE_THRESHOLD),
        other => {
            let t: u32 = parse_int("T", other)?;
            if t == INFINITE_THRESHOLD {
                return Err(Error::Config(format!("T = {t} is reserved, use inf")));
            }
            Ok(t)
        }
    }
}

pub fn parse_decoders(v: &str) -> Result<Vec<DecoderKind>> {
    let list = v
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<DecoderKind>>>()?;
    if list.is_empty() {
        return Err(Error::Config("empty decoder list".into()));
    }
    Ok(list)
}

/// A partial configuration; one per layer (preset, file, flags).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub nu: Option<u32>,
    pub t: Option<usize>,
    pub a_check: Option<usize>,
    pub w: Option<usize>,
    pub ell: Option<usize>,
    pub threshold: Option<u32>,
    pub t_eff_last: Option<usize>,
    pub decoder: Option<DecoderKind>,
    pub decoders: Option<Vec<DecoderKind>>,
    pub point: Option<ChannelPoint>,
    pub p_list: Option<Vec<ChannelPoint>>,
    pub seed: Option<u64>,
    pub min_bit_errors: Option<u64>,
    pub max_blocks: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
}

macro_rules! take {
    ($self:ident, $other:ident; $($f:ident),*) => {
        $( if $other.$f.is_some() { $self.$f = $other.$f.clone(); } )*
    };
}

impl Overrides {
    /// Overwrites every field that `higher` sets.
    pub fn layer(&mut self, higher: &Overrides) {
        take!(self, higher; preset, nu, t, a_check, w, ell, threshold, t_eff_last, decoder,
              decoders, point, p_list, seed, min_bit_errors, max_blocks, out, format, threads);
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "preset" => self.preset = Some(v.parse()?),
            "nu" => self.nu = Some(parse_int(key, v)?),
            "t" => self.t = Some(parse_int(key, v)?),
            "a" => self.a_check = Some(parse_int(key, v)?),
            "W" => self.w = Some(parse_int(key, v)?),
            "ell" => self.ell = Some(parse_int(key, v)?),
            "T" => self.threshold = Some(parse_threshold(v)?),
            "t_eff_last" => self.t_eff_last = Some(parse_int(key, v)?),
            "decoder" => self.decoder = Some(v.parse()?),
            "decoders" => self.decoders = Some(parse_decoders(v)?),
            "p" => self.set_point(ChannelPoint::Crossover(parse_p(v)?))?,
            "eb_n0_db" => self.set_point(ChannelPoint::EbN0Db(parse_f64(key, v)?))?,
            "p_list" => self.p_list = Some(parse_p_list(v)?),
            "seed" => self.seed = Some(parse_int(key, v)?),
            "min_bit_errors" => self.min_bit_errors = Some(parse_int(key, v)?),
            "max_blocks" => self.max_blocks = Some(parse_int(key, v)?),
            "out" => {
                if v.is_empty() {
                    return Err(Error::Config("out: empty path".into()));
                }
                self.out = Some(PathBuf::from(v))
            }
            "format" => self.format = Some(v.parse()?),
            "threads" => self.threads = Some(parse_int(key, v)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    fn set_point(&mut self, point: ChannelPoint) -> Result<()> {
        if self.point.is_some() {
            return Err(Error::Config(
                "p and eb_n0_db are mutually exclusive".into(),
            ));
        }
        self.point = Some(point);
        Ok(())
    }
}

/// Parses the flat config format. Duplicate keys are rejected.
pub fn parse_config(text: &str) -> Result<Overrides> {
    let mut out = Overrides::default();
    let mut seen: Vec<&str> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim();
        if seen.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key:?}",
                n + 1
            )));
        }
        seen.push(key);
        out.set(key, value)
            .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
    }
    Ok(out)
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: StaircaseParams,
    pub decoders: Vec<DecoderKind>,
    pub points: Vec<ChannelSpec>,
    pub seed: u64,
    pub stop: StoppingRule,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn sim_options(&self) -> SimOptions {
        let mut o = SimOptions::for_params(&self.params);
        o.threads = self.threads;
        o
    }
}

/// Which channel points a command needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exactly one point (`p` or `eb_n0_db`) and one decoder.
    Single,
    /// A monotone point list (`p_list`, or a single `p`) and a decoder list.
    Sweep,
    /// Code parameters only; channel settings are ignored.
    Code,
}

/// Merges the layers and validates the result. `env_seed` is the raw value
/// of [`SEED_ENV`], if set.
pub fn resolve(
    file: Option<&Overrides>,
    flags: &Overrides,
    env_seed: Option<&str>,
    mode: Mode,
) -> Result<RunConfig> {
    let preset = flags.preset.or(file.and_then(|f| f.preset));
    let mut o = Overrides::default();
    if let Some(p) = preset {
        o.layer(&p.overrides());
    }
    if let Some(f) = file {
        o.layer(f);
    }
    o.layer(flags);

    let nu = o.nu.unwrap_or(8);
    let t = o.t.unwrap_or(2);
    let field = Field::new(nu, None).map_err(|e| Error::Config(e.to_string()))?;
    let code = ExtendedBchCode::new(field, t).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(a) = o.a_check {
        if a != code.n() / 2 {
            return Err(Error::Config(format!(
                "a = {a} but nu = {nu} gives a = {}",
                code.n() / 2
            )));
        }
    }
    let params = StaircaseParams::new(
        Arc::new(code),
        o.w.unwrap_or(8),
        o.ell.unwrap_or(7),
        o.threshold.unwrap_or(1),
        o.t_eff_last.unwrap_or(t.saturating_sub(1).max(1)),
    )?;
    let rate = params.rate();

    let (decoders, raw_points) = match mode {
        Mode::Code => (Vec::new(), Vec::new()),
        Mode::Single => {
            let point = o.point.ok_or_else(|| {
                Error::Config("a channel point is required (p or eb_n0_db)".into())
            })?;
            (vec![o.decoder.unwrap_or(DecoderKind::Anchor)], vec![point])
        }
        Mode::Sweep => {
            let points = match (&o.p_list, o.point) {
                (Some(list), _) => list.clone(),
                (None, Some(p)) => vec![p],
                (None, None) => {
                    return Err(Error::Config("a point list is required (p_list)".into()))
                }
            };
            let decoders = o
                .decoders
                .clone()
                .or(o.decoder.map(|d| vec![d]))
                .unwrap_or_else(|| DecoderKind::ALL.to_vec());
            (decoders, points)
        }
    };
    let points = raw_points
        .iter()
        .map(|p| p.resolve(rate))
        .collect::<Result<Vec<_>>>()?;
    let ps: Vec<f64> = points.iter().map(|c| c.crossover_p).collect();
    let up = ps.windows(2).all(|w| w[0] <= w[1]);
    let down = ps.windows(2).all(|w| w[0] >= w[1]);
    if !(up || down) {
        return Err(Error::Config("channel points must be monotone".into()));
    }

    let seed = match o.seed {
        Some(s) => s,
        None => match env_seed {
            Some(v) => parse_int(SEED_ENV, v)?,
            None => DEFAULT_SEED,
        },
    };
    let defaults = StoppingRule::default();
    let stop = StoppingRule {
        min_bit_errors: o.min_bit_errors.unwrap_or(defaults.min_bit_errors),
        max_blocks: o.max_blocks.unwrap_or(defaults.max_blocks),
    };
    let threads = o.threads.unwrap_or(0);
    if threads > MAX_THREADS {
        return Err(Error::Config(format!(
            "threads = {threads} exceeds {MAX_THREADS}"
        )));
    }
    if stop.max_blocks == 0 {
        return Err(Error::Config("max_blocks must be positive".into()));
    }
    Ok(RunConfig {
        params,
        decoders,
        points,
        seed,
        stop,
        threads,
        out: o.out,
        format: o.format.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> Overrides {
        let mut o = Overrides::default();
        for (k, v) in pairs {
            o.set(k, v).unwrap();
        }
        o
    }

    #[test]
    fn parses_file() {
        let o = parse_config("# c\nnu = 6\n\nt=2 # inline\nT = inf\np_list = 0.01, 0.02,5dB\ndecoders=genie,anchor\n").unwrap();
        assert_eq!(o.nu, Some(6));
        assert_eq!(o.t, Some(2));
        assert_eq!(o.threshold, Some(INFINITE_THRESHOLD));
        assert_eq!(
            o.p_list,
            Some(vec![
                ChannelPoint::Crossover(0.01),
                ChannelPoint::Crossover(0.02),
                ChannelPoint::EbN0Db(5.0)
            ])
        );
        assert_eq!(
            o.decoders,
            Some(vec![DecoderKind::Genie, DecoderKind::Anchor])
        );
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            "nu",
            "nu = x",
            "foo = 1",
            "nu = 6\nnu = 7",
            "p = 0.7",
            "p = 0.1\neb_n0_db = 5",
            "T = -1",
            "w = 8",
        ] {
            assert!(
                matches!(parse_config(bad), Err(Error::Config(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn preset_example1() {
        let cfg = resolve(
            None,
            &flags(&[("preset", "example1"), ("p", "0.004")]),
            None,
            Mode::Single,
        )
        .unwrap();
        let p = &cfg.params;
        assert_eq!(
            (
                p.code.n(),
                p.code.t(),
                p.window,
                p.iterations,
                p.threshold,
                p.t_eff_last
            ),
            (256, 2, 8, 7, 1, 1)
        );
        assert_eq!(cfg.decoders, vec![DecoderKind::Anchor]);
        assert_eq!(cfg.seed, DEFAULT_SEED);
    }

    #[test]
    fn precedence() {
        let file = parse_config("preset = example1\nW = 6\nell = 3\nseed = 5\np = 0.01").unwrap();
        let cfg = resolve(
            Some(&file),
            &flags(&[("ell", "2")]),
            Some("99"),
            Mode::Single,
        )
        .unwrap();
        assert_eq!(
            (cfg.params.window, cfg.params.iterations, cfg.seed),
            (6, 2, 5)
        );
        let file = parse_config("p = 0.01").unwrap();
        let cfg = resolve(
            Some(&file),
            &flags(&[("eb_n0_db", "6")]),
            Some("99"),
            Mode::Single,
        )
        .unwrap();
        assert_eq!(cfg.seed, 99);
        assert!((cfg.points[0].eb_n0_db - 6.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        let bad = [
            vec![("a", "64"), ("p", "0.01")],
            vec![("t_eff_last", "3"), ("p", "0.01")],
            vec![("nu", "2"), ("p", "0.01")],
            vec![("W", "1"), ("p", "0.01")],
        ];
        for b in bad {
            assert!(
                resolve(None, &flags(&b), None, Mode::Single).is_err(),
                "{b:?}"
            );
        }
        assert!(resolve(None, &flags(&[]), None, Mode::Single).is_err());
        assert!(resolve(None, &flags(&[("p", "0.01")]), Some("x"), Mode::Single).is_err());
        assert!(resolve(
            None,
            &flags(&[("p_list", "0.01,0.03,0.02")]),
            None,
            Mode::Sweep
        )
        .is_err());
        let ok = resolve(
            None,
            &flags(&[("p_list", "0.03,0.02,0.01"), ("a", "128")]),
            None,
            Mode::Sweep,
        )
        .unwrap();
        assert_eq!(ok.decoders.len(), 3);
        assert_eq!(ok.points.len(), 3);
    }

    #[test]
    fn p_list_forms() {
        assert_eq!(
            parse_p_list("0.1").unwrap(),
            vec![ChannelPoint::Crossover(0.1)]
        );
        assert_eq!(
            parse_p_list(" 6.5dB ").unwrap(),
            vec![ChannelPoint::EbN0Db(6.5)]
        );
        for bad in ["", ",", "0.1,", "abc", "0.5", "-0.1", "NaN", "infdB"] {
            assert!(parse_p_list(bad).is_err(), "{bad:?}");
        }
    }
}
