#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| staircase::fuzz_checks::p_list_parse(data));
