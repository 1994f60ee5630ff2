//! Entry points shared by the cargo-fuzz targets and the corpus replay
//! test. Each takes arbitrary bytes and panics on a broken invariant.

use crate::anchor_check::run_bytes;
use crate::bch::{apply_flips, DecodeOutcome, ExtendedBchCode};
use crate::config::{parse_config, parse_p_list, resolve, ChannelPoint, Mode, Overrides};
use crate::gf::Field;

pub fn config_parse(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = parse_config(text) else { return };
    for mode in [Mode::Code, Mode::Single, Mode::Sweep] {
        if let Ok(cfg) = resolve(Some(&file), &Overrides::default(), None, mode) {
            assert!(cfg.params.window >= 2);
            assert!((1..=cfg.params.code.t()).contains(&cfg.params.t_eff_last));
        }
    }
}

pub fn p_list_parse(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(points) = parse_p_list(text) else {
        return;
    };
    assert!(!points.is_empty());
    for p in points {
        match p {
            ChannelPoint::Crossover(x) => assert!((0.0..0.5).contains(&x)),
            ChannelPoint::EbN0Db(db) => assert!(db.is_finite()),
        }
        if let Ok(ch) = p.resolve(0.8672) {
            assert!((0.0..0.5).contains(&ch.crossover_p));
        }
    }
}

/// Layout: `[nu, t, t_eff, word bits...]`. Codes up to n = 64 are checked
/// against the brute-force oracle.
pub fn bdd_decode(data: &[u8]) {
    let [nu, t, t_eff, rest @ ..] = data else {
        return;
    };
    let nu = 3 + (*nu as u32 % 6);
    let Ok(field) = Field::new(nu, None) else {
        return;
    };
    let Ok(code) = ExtendedBchCode::new(field, 1 + *t as usize % 4) else {
        return;
    };
    let t_eff = 1 + *t_eff as usize % code.t();
    let word: Vec<bool> = (0..code.n())
        .map(|i| rest.get(i / 8).is_some_and(|b| b >> (i % 8) & 1 == 1))
        .collect();
    let got = code.decode_bdd(&word, t_eff).expect("valid input");
    if let DecodeOutcome::Corrected(locs) = &got {
        assert!(locs.len() <= t_eff);
        let mut fixed = word.clone();
        apply_flips(&mut fixed, locs).expect("in range");
        assert!(code.is_codeword(&fixed));
    }
    if code.n() <= 64 {
        assert_eq!(
            got,
            code.brute_force_bdd(&word, t_eff).expect("valid input")
        );
    }
}

pub fn anchor_state_machine(data: &[u8]) {
    if let Err(e) = run_bytes(data, 5_000) {
        panic!("{e}");
    }
}
