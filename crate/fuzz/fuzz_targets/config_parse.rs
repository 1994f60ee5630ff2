#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| staircase::fuzz_checks::config_parse(data));
