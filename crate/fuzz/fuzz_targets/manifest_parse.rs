#![no_main]

use libfuzzer_sys::fuzz_target;
use teegrade::data::{parse_jsonl, to_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_jsonl(text) {
        let again = parse_jsonl(&to_jsonl(&records)).expect("serialized manifest parses");
        assert_eq!(again, records);
    }
});
