#![no_main]

use libfuzzer_sys::fuzz_target;
use teegrade::data::{decode_pgm, encode_pgm};

fuzz_target!(|data: &[u8]| {
    if let Ok(pgm) = decode_pgm(data) {
        assert_eq!(pgm.samples.len(), pgm.width * pgm.height);
        assert!(pgm.samples.iter().all(|&s| s <= pgm.maxval));
        if pgm.maxval == 255 {
            let bytes: Vec<u8> = pgm.samples.iter().map(|&s| s as u8).collect();
            let encoded = encode_pgm(pgm.width, pgm.height, &bytes).expect("decoded image encodes");
            assert_eq!(decode_pgm(&encoded).expect("encoded image decodes"), pgm);
        }
    }
});
