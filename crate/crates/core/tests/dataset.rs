use proptest::prelude::*;
use shapebench::bench::{compute_stats, read_manifest, write_manifest, ManifestRecord, MANIFEST_FILE};
use shapebench::pipeline::{build_all, generate_dataset, PipelineConfig};
use shapebench::scene::{synthesize_description, GenConfig, Split};

fn records(cfg: &PipelineConfig) -> Vec<ManifestRecord> {
    build_all(cfg)
        .unwrap()
        .iter()
        .flat_map(|f| f.questions.iter().map(|q| ManifestRecord::from_question(q, &f.desc)))
        .collect()
}

#[test]
fn manifest_round_trip() {
    let recs = records(&PipelineConfig {
        seed: 12,
        easy: 5,
        hard: 5,
        ..PipelineConfig::default()
    });
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join(MANIFEST_FILE);
    write_manifest(&recs, &p).unwrap();
    assert_eq!(read_manifest(&p).unwrap(), recs);
    assert!(recs.iter().all(|r| r.validate().is_ok()));
}

#[test]
fn generate_counts_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let run = generate_dataset(
        &PipelineConfig {
            seed: 1,
            easy: 3,
            hard: 2,
            ..PipelineConfig::default()
        },
        dir.path(),
    )
    .unwrap();
    assert_eq!((run.figures, run.questions), (5, 30));
    assert!(dir.path().join("images/easy/easy-00002.png").exists());
    assert!(dir.path().join("images/hard/hard-00001.png").exists());
    for f in ["scenes.jsonl", "config.json", "run.json", MANIFEST_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn stats_totals_conserved() {
    let recs = records(&PipelineConfig {
        seed: 4,
        easy: 20,
        hard: 20,
        ..PipelineConfig::default()
    });
    let s = compute_stats(&recs);
    assert_eq!(s.figure_count, 40);
    assert_eq!(s.per_aspect_counts.values().sum::<usize>(), recs.len());
    assert_eq!(s.shapes_per_figure_histogram.values().sum::<usize>(), 40);
    assert!((s.noisy_fraction - 0.5).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenes_are_reproducible_and_split_sized(seed in any::<u64>(), hard in any::<bool>()) {
        let split = if hard { Split::Hard } else { Split::Easy };
        let cfg = GenConfig { seed, target_split: split, ..GenConfig::default() };
        let a = synthesize_description(&cfg, "f");
        let b = synthesize_description(&cfg, "f");
        prop_assert_eq!(a.as_ref().ok(), b.as_ref().ok());
        if let Ok(d) = a {
            prop_assert!(split.admits(d.shapes.len(), cfg.max_shapes));
            for s in &d.shapes {
                prop_assert!(s.validate().is_ok());
            }
        }
    }
}
