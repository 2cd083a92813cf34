//! Manifest serialization and dataset statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::qa::{AspectKind, Question};
use crate::scene::{SceneDescription, Split};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SCENES_FILE: &str = "scenes.jsonl";
pub const IMAGES_DIR: &str = "images";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
}

/// Per-record metadata. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub num_shapes: usize,
    pub noisy: bool,
    pub seed: u64,
    pub ground_truth_value: String,
    pub template_id: String,
    pub target_shape_ids: Vec<u32>,
}

/// One (figure, question) pairing. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub question_id: String,
    pub figure_id: String,
    pub image_path: String,
    pub split: Split,
    pub aspect: AspectKind,
    pub question: String,
    pub choices: Vec<String>,
    pub answer: String,
    pub meta: RecordMeta,
}

/// Relative image path for a figure: `images/{split}/{figure_id}.png`.
pub fn image_path(split: Split, figure_id: &str) -> String {
    format!("{IMAGES_DIR}/{split}/{figure_id}.png")
}

impl ManifestRecord {
    pub fn from_question(q: &Question, desc: &SceneDescription) -> ManifestRecord {
        ManifestRecord {
            question_id: q.question_id.clone(),
            figure_id: q.figure_id.clone(),
            image_path: image_path(q.difficulty, &q.figure_id),
            split: q.difficulty,
            aspect: q.aspect,
            question: q.text.clone(),
            choices: q.choices.clone(),
            answer: q.answer_letter().to_string(),
            meta: RecordMeta {
                num_shapes: desc.shapes.len(),
                noisy: desc.noisy,
                seed: desc.seed,
                ground_truth_value: q.meta.ground_truth_value.clone(),
                template_id: q.meta.template_id.clone(),
                target_shape_ids: q.meta.target_shape_ids.clone(),
            },
        }
    }

    /// Index 0..3 of the answer letter.
    pub fn answer_index(&self) -> Option<usize> {
        match self.answer.as_str() {
            "A" => Some(0),
            "B" => Some(1),
            "C" => Some(2),
            "D" => Some(3),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.answer_index().is_none() {
            return Err(format!("answer {:?} is not a letter A-D", self.answer));
        }
        if self.choices.len() != 4 {
            return Err(format!("expected 4 choices, found {}", self.choices.len()));
        }
        if self.meta.num_shapes < 1 {
            return Err("num_shapes must be at least 1".into());
        }
        if self.image_path.starts_with('/') {
            return Err("image_path must be relative".into());
        }
        Ok(())
    }
}

/// Writes serializable values one JSON document per line.
pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<(), BenchError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one JSON document per line; line numbers in errors are 1-based.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BenchError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let item = serde_json::from_str(line).map_err(|e| BenchError::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<(), BenchError> {
    write_jsonl(records, path)
}

/// Parses and re-validates every record.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, BenchError> {
    let records: Vec<ManifestRecord> = read_jsonl(path)?;
    for (i, r) in records.iter().enumerate() {
        r.validate()
            .map_err(|reason| BenchError::MalformedRecord { line: i + 1, reason })?;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub figure_count: usize,
    pub question_count: usize,
    pub shapes_per_figure_histogram: BTreeMap<usize, usize>,
    pub words_per_question_histogram: BTreeMap<usize, usize>,
    pub per_aspect_counts: BTreeMap<String, usize>,
    pub per_split_counts: BTreeMap<String, usize>,
    pub noisy_fraction: f64,
}

/// Whitespace-delimited tokens of the stem plus all choices.
pub fn word_count(r: &ManifestRecord) -> usize {
    r.question.split_whitespace().count() + r.choices.iter().map(|c| c.split_whitespace().count()).sum::<usize>()
}

/// Exact histograms over the records; figures are identified by figure id.
pub fn compute_stats(records: &[ManifestRecord]) -> DatasetStats {
    let mut shapes = BTreeMap::new();
    let mut words = BTreeMap::new();
    let mut aspects: BTreeMap<String, usize> = AspectKind::ALL.iter().map(|a| (a.name().to_string(), 0)).collect();
    let mut splits: BTreeMap<String, usize> = Split::ALL.iter().map(|s| (s.name().to_string(), 0)).collect();
    let mut seen = BTreeSet::new();
    let mut noisy = 0;
    for r in records {
        *words.entry(word_count(r)).or_insert(0) += 1;
        *aspects.entry(r.aspect.name().to_string()).or_insert(0) += 1;
        *splits.entry(r.split.name().to_string()).or_insert(0) += 1;
        if seen.insert(r.figure_id.as_str()) {
            *shapes.entry(r.meta.num_shapes).or_insert(0) += 1;
            if r.meta.noisy {
                noisy += 1;
            }
        }
    }
    let figures = seen.len();
    DatasetStats {
        figure_count: figures,
        question_count: records.len(),
        shapes_per_figure_histogram: shapes,
        words_per_question_histogram: words,
        per_aspect_counts: aspects,
        per_split_counts: splits,
        noisy_fraction: if figures == 0 {
            0.0
        } else {
            noisy as f64 / figures as f64
        },
    }
}

impl DatasetStats {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "figures          {}", self.figure_count);
        let _ = writeln!(s, "questions        {}", self.question_count);
        let _ = writeln!(s, "noisy fraction   {:.4}", self.noisy_fraction);
        let _ = writeln!(s, "\nsplit            questions");
        for (k, v) in &self.per_split_counts {
            let _ = writeln!(s, "  {k:<15}{v}");
        }
        let _ = writeln!(s, "\naspect           questions");
        for (k, v) in &self.per_aspect_counts {
            let _ = writeln!(s, "  {k:<15}{v}");
        }
        let _ = writeln!(s, "\nshapes/figure    figures");
        for (k, v) in &self.shapes_per_figure_histogram {
            let _ = writeln!(s, "  {k:<15}{v}");
        }
        let _ = writeln!(s, "\nwords/question   questions");
        for (k, v) in &self.words_per_question_histogram {
            let _ = writeln!(s, "  {k:<15}{v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(i: usize, aspect: AspectKind, shapes: usize, noisy: bool) -> ManifestRecord {
        let split = if noisy { Split::Hard } else { Split::Easy };
        let fig = format!("{split}-{:05}", i);
        ManifestRecord {
            question_id: format!("{fig}-{aspect}"),
            figure_id: fig.clone(),
            image_path: image_path(split, &fig),
            split,
            aspect,
            question: "How many circles are in the figure?".into(),
            choices: vec!["1".into(), "2".into(), "3".into(), "4".into()],
            answer: ["A", "B", "C", "D"][i % 4].into(),
            meta: RecordMeta {
                num_shapes: shapes,
                noisy,
                seed: i as u64,
                ground_truth_value: "2".into(),
                template_id: "counting/present".into(),
                target_shape_ids: vec![0, 1],
            },
        }
    }

    #[test]
    fn empty_manifest_is_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        write_manifest(&[], &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap().len(), 0);
        assert!(read_manifest(&p).unwrap().is_empty());
    }

    #[test]
    fn key_order_is_fixed() {
        let line = serde_json::to_string(&record(0, AspectKind::Counting, 3, false)).unwrap();
        let keys = [
            "\"question_id\"",
            "\"figure_id\"",
            "\"image_path\"",
            "\"split\"",
            "\"aspect\"",
            "\"question\"",
            "\"choices\"",
            "\"answer\"",
            "\"meta\"",
            "\"num_shapes\"",
            "\"noisy\"",
            "\"seed\"",
            "\"ground_truth_value\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bad_letter_and_truncation_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let mut r = record(0, AspectKind::Size, 2, false);
        r.answer = "E".into();
        write_manifest(&[record(1, AspectKind::Size, 2, false), r], &p).unwrap();
        assert!(matches!(
            read_manifest(&p),
            Err(BenchError::MalformedRecord { line: 2, .. })
        ));

        write_manifest(
            &[
                record(0, AspectKind::Size, 2, false),
                record(1, AspectKind::Size, 2, false),
            ],
            &p,
        )
        .unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        std::fs::write(&p, &text[..text.len() - 20]).unwrap();
        assert!(matches!(
            read_manifest(&p),
            Err(BenchError::MalformedRecord { line: 2, .. })
        ));
    }

    #[test]
    fn stats_of_ten_figures() {
        let records: Vec<ManifestRecord> = (0..10)
            .flat_map(|i| AspectKind::ALL.map(|a| record(i, a, 3, false)))
            .collect();
        let s = compute_stats(&records);
        assert!(s.per_aspect_counts.values().all(|&v| v == 10));
        assert_eq!(s.shapes_per_figure_histogram, BTreeMap::from([(3, 10)]));
        assert_eq!(s.noisy_fraction, 0.0);
        assert_eq!(s.words_per_question_histogram.values().sum::<usize>(), 60);
        assert!(s.to_table().contains("existence"));
    }
}
