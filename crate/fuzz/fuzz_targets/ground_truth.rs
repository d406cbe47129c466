#![no_main]

use ils_core::ils::parse_ground_truth;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(gt) = parse_ground_truth(text) {
        assert!(gt.values().all(|lux| lux.is_finite() && *lux >= 0.0));
    }
});
