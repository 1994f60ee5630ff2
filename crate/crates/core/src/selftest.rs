//! Built-in checks run by `staircase selftest`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchor::scenarios;
use crate::bch::{apply_flips, DecodeOutcome, ExtendedBchCode};
use crate::error::Result;
use crate::gf::Field;
use crate::sim::{run_stream, ChannelSpec, DecoderKind, SimOptions, StaircaseParams, StoppingRule};

#[derive(Clone, Copy, Debug, Default)]
pub struct SelftestOptions {
    /// Negative control: corrupt the generator polynomial of every code
    /// used by the component-code suites.
    pub corrupt_generator: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn(SelftestOptions) -> std::result::Result<String, String>;

pub fn all_passed(results: &[SuiteResult]) -> bool {
    results.iter().all(|r| r.passed)
}

pub fn run(opts: SelftestOptions) -> Vec<SuiteResult> {
    let suites: [(&'static str, Suite); 6] = [
        ("gf-arithmetic", gf_suite),
        ("component-encoding", encoding_suite),
        ("bdd-oracle", oracle_suite),
        ("anchor-freeze-scenario", |_| {
            scenarios::example_freeze().map(|_| "ok".into())
        }),
        ("anchor-backtrack-scenario", |_| {
            scenarios::example_backtrack().map(|_| "ok".into())
        }),
        ("noiseless-stream", noiseless_suite),
    ];
    suites
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f(opts) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteResult {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn codes(opts: SelftestOptions) -> Result<Vec<ExtendedBchCode>> {
    [(4, 1), (5, 2), (6, 2), (6, 3), (8, 2)]
        .iter()
        .map(|&(nu, t)| {
            let mut c = ExtendedBchCode::new(Field::new(nu, None)?, t)?;
            if opts.corrupt_generator {
                c.corrupt_generator();
            }
            Ok(c)
        })
        .collect()
}

fn random_message(code: &ExtendedBchCode, rng: &mut impl Rng) -> Vec<bool> {
    (0..code.k()).map(|_| rng.gen()).collect()
}

fn random_error(n: usize, weight: usize, rng: &mut impl Rng) -> Vec<u16> {
    rand::seq::index::sample(rng, n, weight)
        .into_iter()
        .map(|i| i as u16 + 1)
        .collect()
}

fn gf_suite(_: SelftestOptions) -> std::result::Result<String, String> {
    let mut checked = 0;
    for nu in 3..=12 {
        let f = Field::new(nu, None).map_err(|e| e.to_string())?;
        for x in 1..f.size() as u16 {
            let inv = f.inv(x).map_err(|e| e.to_string())?;
            if f.mul(x, inv) != 1 {
                return Err(format!("GF(2^{nu}): {x} · {inv} != 1"));
            }
            let l = f.log(x).ok_or(format!("GF(2^{nu}): no log for {x}"))?;
            if f.alpha_pow(l) != x {
                return Err(format!("GF(2^{nu}): alpha^log({x}) != {x}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} elements"))
}

fn encoding_suite(opts: SelftestOptions) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut checked = 0;
    for code in codes(opts).map_err(|e| e.to_string())? {
        for _ in 0..200 {
            let c = code
                .encode(&random_message(&code, &mut rng))
                .map_err(|e| e.to_string())?;
            if !code.is_codeword(&c) {
                return Err(format!(
                    "n={} t={}: encoder output fails the syndrome check",
                    code.n(),
                    code.t()
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} codewords"))
}

fn oracle_suite(opts: SelftestOptions) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bdd);
    let mut checked = 0;
    for code in codes(opts).map_err(|e| e.to_string())? {
        if code.n() > 64 {
            continue;
        }
        for _ in 0..300 {
            let c = code
                .encode(&random_message(&code, &mut rng))
                .map_err(|e| e.to_string())?;
            let weight = rng.gen_range(0..=code.t() + 2);
            let mut r = c.clone();
            apply_flips(&mut r, &random_error(code.n(), weight, &mut rng))
                .map_err(|e| e.to_string())?;
            for t_eff in 1..=code.t() {
                let fast = code.decode_bdd(&r, t_eff).map_err(|e| e.to_string())?;
                let slow = code.brute_force_bdd(&r, t_eff).map_err(|e| e.to_string())?;
                if fast != slow {
                    return Err(format!(
                        "n={} t={} t_eff={t_eff}: decoder {fast:?} != oracle {slow:?}",
                        code.n(),
                        code.t()
                    ));
                }
                if weight <= t_eff {
                    let mut fixed = r.clone();
                    if let DecodeOutcome::Corrected(locs) = &fast {
                        apply_flips(&mut fixed, locs).map_err(|e| e.to_string())?;
                    }
                    if fixed != c {
                        return Err(format!(
                            "n={} t={}: weight {weight} not corrected",
                            code.n(),
                            code.t()
                        ));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} decodes"))
}

fn noiseless_suite(_: SelftestOptions) -> std::result::Result<String, String> {
    let code = ExtendedBchCode::new(Field::new(6, None).map_err(|e| e.to_string())?, 2)
        .map_err(|e| e.to_string())?;
    let params = StaircaseParams::new(Arc::new(code), 5, 3, 1, 1).map_err(|e| e.to_string())?;
    let ch = ChannelSpec::from_p(0.0, params.rate()).map_err(|e| e.to_string())?;
    let mut opts = SimOptions::for_params(&params);
    opts.blocks_per_trial = 100;
    opts.threads = 1;
    let stop = StoppingRule {
        min_bit_errors: 1,
        max_blocks: 100,
    };
    for kind in DecoderKind::ALL {
        let st = run_stream(&params, &ch, kind, 1, &stop, &opts).map_err(|e| e.to_string())?;
        if st.post_fec_bit_errors != 0 || st.corrections_applied != 0 {
            return Err(format!("{kind}: {st:?}"));
        }
    }
    Ok("3 decoders".into())
}
