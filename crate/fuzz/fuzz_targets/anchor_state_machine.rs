#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| staircase::fuzz_checks::anchor_state_machine(data));
