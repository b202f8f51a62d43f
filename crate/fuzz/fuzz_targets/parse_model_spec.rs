#![no_main]

use libfuzzer_sys::fuzz_target;
use mft_core::model_spec::parse_model_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_model_spec(text) {
        // a stationary model needs an explicit length
        let _ = spec.segments(None);
        let _ = spec.segments(Some(10.0));
    }
});
