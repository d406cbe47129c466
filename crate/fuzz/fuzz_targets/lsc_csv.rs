#![no_main]

use ils_core::photometry::Lsc;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lsc) = Lsc::from_csv(text) {
        let again = Lsc::from_csv(&lsc.to_csv()).expect("written curve reparses");
        assert_eq!(lsc, again);
        for deg in [0.0, 30.0, 89.9, 90.0, 120.0] {
            let w = lsc.eval(deg);
            assert!((0.0..=1.0).contains(&w), "{deg}: {w}");
        }
    }
});
