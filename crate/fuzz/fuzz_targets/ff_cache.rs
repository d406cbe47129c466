#![no_main]

use ils_core::radiosity::cache;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((key, ff)) = cache::decode(data) {
        let bytes = cache::encode(&key, &ff);
        let (key2, ff2) = cache::decode(&bytes).expect("encoded cache decodes");
        assert_eq!(key, key2);
        assert_eq!(ff.values(), ff2.values());
        assert!(cache::lookup(&bytes, &key).is_some());
    }
});
