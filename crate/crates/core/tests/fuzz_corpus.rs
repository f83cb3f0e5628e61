use std::fs;
use std::path::PathBuf;

use teegrade::data::{decode_pgm, parse_jsonl, to_jsonl};
use teegrade::model::Checkpoint;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn checkpoint_seeds_decode_and_reencode() {
    for (name, bytes) in seeds("checkpoint_decode") {
        let checkpoint = Checkpoint::decode(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(checkpoint.encode(), bytes, "{name}");
    }
}

#[test]
fn pgm_seeds_decode() {
    for (name, bytes) in seeds("pgm_decode") {
        let pgm = decode_pgm(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(pgm.samples.len(), pgm.width * pgm.height, "{name}");
    }
}

#[test]
fn manifest_seeds_parse() {
    for (name, bytes) in seeds("manifest_parse") {
        let text = String::from_utf8(bytes).unwrap();
        let records = parse_jsonl(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_jsonl(&to_jsonl(&records)).unwrap(), records, "{name}");
    }
}
