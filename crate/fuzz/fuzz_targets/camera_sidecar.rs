#![no_main]

use ils_core::scene::CameraSidecar;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((camera, unit)) = CameraSidecar::parse(text) {
        let (again, unit2) = CameraSidecar::parse(&CameraSidecar::render(&camera, unit)).expect("rendered sidecar parses");
        assert_eq!(camera, again);
        assert_eq!(unit, unit2);
    }
});
