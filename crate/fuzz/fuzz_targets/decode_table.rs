#![no_main]

use libfuzzer_sys::fuzz_target;
use mft_core::limit::{decode_table, encode_table};
use mft_core::WindowSet;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = decode_table(data) {
        let bytes = encode_table(&table).expect("encode");
        assert_eq!(decode_table(&bytes).expect("decode"), table);
        if let Ok(ws) = WindowSet::new(
            &table.meta.windows,
            table.meta.duration,
            Some(table.meta.grid_step),
        ) {
            let _ = table.check_matches(&ws);
        }
    }
});
