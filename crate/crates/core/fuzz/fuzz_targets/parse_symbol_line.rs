#![no_main]

use libfuzzer_sys::fuzz_target;
use market_recon::coder;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(symbols) = coder::parse_symbol_line(text) {
            let line = coder::format_symbol_line(&symbols);
            assert_eq!(coder::parse_symbol_line(&line).unwrap(), symbols);
        }
    }
});
