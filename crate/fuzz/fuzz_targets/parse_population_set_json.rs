#![no_main]

use attrmean::PopulationSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(set) = PopulationSet::from_json_str(text) {
            for p in &set.populations {
                p.summary.validate().unwrap();
            }
        }
    }
});
