#![no_main]

use ils_core::scene::DepthImage;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(depth) = DepthImage::from_png(data, 1e-3) {
        assert_eq!(depth.values().len(), depth.width() as usize * depth.height() as usize);
        let again = DepthImage::from_png(&depth.to_png(1e-3), 1e-3).expect("encoded depth decodes");
        assert_eq!(depth.values(), again.values());
    }
});
