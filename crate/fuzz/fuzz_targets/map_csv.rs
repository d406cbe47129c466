#![no_main]

use ils_core::map::read_map_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = read_map_csv(text) {
        assert_eq!(map.exitance().len(), map.records.len());
    }
});
