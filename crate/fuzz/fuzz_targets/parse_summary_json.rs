//! Population summary JSON; accepted summaries must derive and re-parse.

#![no_main]

use attrmean::{derive_constants, PopulationSummary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(pop) = PopulationSummary::from_json_str(text) else {
        return;
    };
    let _ = derive_constants(&pop).expect("validated summary derives");
    let back = PopulationSummary::from_json_str(&pop.to_json_string().unwrap()).unwrap();
    assert_eq!(back, pop);
});
