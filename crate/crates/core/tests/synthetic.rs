use std::collections::BTreeSet;

use proptest::prelude::*;
use teegrade::data::{
    checklist_score, decode_pgm, default_views, encode_pgm, generate_dataset, parse_jsonl,
    render_frame, split_by_participant, to_jsonl, Dataset, GenConfig, DEFAULT_TRAIN_FRACTION,
};
use teegrade::nn::Target;

fn small(seed: u64) -> GenConfig {
    GenConfig { seed, image_size: 16, frames: 2, ..GenConfig::default() }
}

#[test]
fn true_cp_rises_with_skill() {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let data = generate_dataset(&GenConfig { frames: 1, image_size: 8, seed, ..GenConfig::default() }, 1).unwrap();
        for v in &data.videos {
            xs.push(v.skill.unwrap());
            ys.push(checklist_score(v.true_criteria.as_ref().unwrap()));
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope > 0.0, "slope {slope}");
}

#[test]
fn frame_labels_equal_video_means() {
    let data = generate_dataset(&small(2), 1).unwrap();
    for target in [Target::Cp, Target::Gi] {
        let set = data.image_set(target);
        let ids = data.frame_video_ids();
        for (i, id) in ids.iter().enumerate() {
            let r = data.records().find(|r| r.video_id == *id).unwrap();
            let truth = match target {
                Target::Cp => r.mean_cp,
                Target::Gi => r.mean_gi,
            };
            assert_eq!(set.targets[i] * target.scale(), truth);
        }
    }
}

#[test]
fn forty_four_frame_layout() {
    let config = GenConfig { frames: 44, image_size: 8, ..GenConfig::default() };
    let data = generate_dataset(&config, 2).unwrap();
    assert_eq!(data.videos.len(), 380);
    assert_eq!(data.frame_count(), 16720);
}

#[test]
fn split_partitions_participants() {
    let data = generate_dataset(&small(4), 1).unwrap();
    let ids = data.participants();
    let split = split_by_participant(&ids, DEFAULT_TRAIN_FRACTION, 4).unwrap();
    assert_eq!((split.train.len(), split.test.len()), (32, 6));
    let (train, test) = data.split(&split);
    assert_eq!(train.videos.len() + test.videos.len(), data.videos.len());
    let a: BTreeSet<u32> = train.records().map(|r| r.participant_id).collect();
    let b: BTreeSet<u32> = test.records().map(|r| r.participant_id).collect();
    assert!(a.is_disjoint(&b));
    assert_eq!(train.frame_count(), train.videos.len() * 2);
    assert_eq!(split, split_by_participant(&ids, DEFAULT_TRAIN_FRACTION, 4).unwrap());
}

#[test]
fn dataset_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(&small(6), 1).unwrap();
    data.write(dir.path()).unwrap();
    let loaded = Dataset::load(dir.path()).unwrap();
    assert_eq!(loaded.videos.len(), data.videos.len());
    for (a, b) in loaded.videos.iter().zip(&data.videos) {
        assert_eq!(a.record, b.record);
        assert_eq!(a.frames, b.frames);
    }
    assert_eq!(loaded.image_set(Target::Gi), data.image_set(Target::Gi));
}

#[test]
fn manifest_text_round_trips() {
    let data = generate_dataset(&small(1), 1).unwrap();
    let records: Vec<_> = data.records().cloned().collect();
    let text = to_jsonl(&records);
    assert_eq!(parse_jsonl(&text).unwrap(), records);
    assert_eq!(text.lines().count(), 380);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rendered_pixels_stay_in_unit_range(view in 0usize..10, bits in any::<u8>(), phase in 0.0..1.0f64, seed in any::<u64>()) {
        let v = &default_views()[view];
        let met: Vec<bool> = (0..v.k()).map(|i| bits >> i & 1 == 1).collect();
        let img = render_frame(v, &met, phase, seed, 24).unwrap();
        prop_assert!(img.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn pgm_round_trips(w in 1usize..20, h in 1usize..20, fill in any::<u8>()) {
        let pixels: Vec<u8> = (0..w * h).map(|i| (i as u8).wrapping_mul(31).wrapping_add(fill)).collect();
        let decoded = decode_pgm(&encode_pgm(w, h, &pixels).unwrap()).unwrap();
        prop_assert_eq!((decoded.width, decoded.height, decoded.maxval), (w, h, 255));
        prop_assert_eq!(decoded.samples, pixels.iter().map(|&p| u16::from(p)).collect::<Vec<_>>());
    }

    #[test]
    fn decoders_reject_garbage_without_panicking(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_pgm(&bytes);
        let _ = parse_jsonl(&String::from_utf8_lossy(&bytes));
        let _ = teegrade::model::Checkpoint::decode(&bytes);
    }
}
