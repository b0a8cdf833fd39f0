#![no_main]

use libfuzzer_sys::fuzz_target;
use semiquad::contour::{decode_samples, encode_samples};

fuzz_target!(|data: &[u8]| {
    let Ok(set) = decode_samples(data) else {
        return;
    };
    let bytes = encode_samples(&set);
    let again = decode_samples(&bytes).expect("re-decoding encoder output");
    assert_eq!(encode_samples(&again), bytes);
});
