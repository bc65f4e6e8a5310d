#![no_main]

use attrmean::SimulationPlan;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(plan) = SimulationPlan::from_json_str(text) {
            assert!(plan.replications >= 1);
            let again = serde_json::to_string(&plan).unwrap();
            assert_eq!(SimulationPlan::from_json_str(&again).unwrap(), plan);
        }
    }
});
