#![no_main]

use ils_core::photometry::Ldc;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ldc) = Ldc::from_csv(text) {
        let again = Ldc::from_csv(&ldc.to_csv()).expect("written curve reparses");
        assert_eq!(ldc, again);
        assert!(ldc.eval_angles(0.0, 45.0) >= 0.0);
    }
});
