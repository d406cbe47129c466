#![no_main]

use ils_core::perception::ingest_detections;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = ingest_detections(text) {
        assert!(records.windows(2).all(|w| w[0].frame_id <= w[1].frame_id));
        for r in &records {
            let _ = r.check_bounds(512, 424);
        }
    }
});
