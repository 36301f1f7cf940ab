#![no_main]

use libfuzzer_sys::fuzz_target;
use market_recon::ingest;

fuzz_target!(|data: &[u8]| {
    // Must never panic on arbitrary bytes; a successful parse must
    // survive a write/parse round trip unchanged.
    if let Ok(parsed) = ingest::parse_price_csv(data) {
        let mut buf = Vec::new();
        ingest::write_price_csv(&parsed.series, &mut buf).unwrap();
        let reparsed = ingest::parse_price_csv(buf.as_slice()).expect("round trip reparse");
        assert_eq!(reparsed.series, parsed.series);
        assert_eq!(reparsed.skipped_rows, 0);
    }
});
