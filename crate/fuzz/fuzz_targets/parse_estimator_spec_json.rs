//! Estimator spec JSON, evaluated at the reference proportion.

#![no_main]

use attrmean::{builtin, evaluate, EstimatorSpec, Phase, SampleQuantities};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = EstimatorSpec::from_json_str(text) else {
        return;
    };
    let pop = builtin(Phase::Two, 1).unwrap().summary;
    let p = pop.proportion;
    let s = SampleQuantities::two_phase(pop.y_mean, p, p);
    // Any value is allowed; evaluation must not panic.
    let _ = evaluate(&spec, &pop, &s);
    let _ = serde_json::to_string(&spec).unwrap();
});
