#![no_main]

use ils_core::scene::{load_scene, save_scene};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // inline tables only; file references are rejected without a base
    if let Ok(scene) = load_scene(text) {
        let saved = save_scene(&scene);
        let again = load_scene(&saved).expect("saved scene reloads");
        assert_eq!(scene, again);
        assert_eq!(saved, save_scene(&again));
    }
});
