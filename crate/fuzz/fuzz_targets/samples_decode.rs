#![no_main]

use libfuzzer_sys::fuzz_target;
use semiquad::contour::decode_samples;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = decode_samples(data) {
        // anything that decodes must describe a consistent set
        assert_eq!(set.samples.len(), set.plan.node_count());
    }
});
