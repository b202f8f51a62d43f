#![no_main]

use libfuzzer_sys::fuzz_target;
use mft_core::io::{format_spike_train, parse_spike_train};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(train) = parse_spike_train(text) {
        // accepted trains survive a write and re-read unchanged
        let again = parse_spike_train(&format_spike_train(&train)).expect("re-parse");
        assert_eq!(again, train);
        let isis = train.isis();
        assert!(isis.values().iter().all(|&x| x > 0.0));
    }
});
