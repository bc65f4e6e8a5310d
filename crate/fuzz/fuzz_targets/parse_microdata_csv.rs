//! Microdata CSV decoding and summary statistics.

#![no_main]

use attrmean::{read_microdata_csv, summarize_microdata, SummaryMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_microdata_csv(data) else {
        return;
    };
    assert!(records.iter().all(|r| r.y.is_finite()));
    if let Ok(s) = summarize_microdata(&records, SummaryMode::Sample) {
        assert!(s.proportion > 0.0 && s.proportion < 1.0);
        assert!(s.s_phi2 > 0.0);
        assert!((-1.0..=1.0).contains(&s.rho_pb) || s.rho_pb.is_nan());
    }
});
