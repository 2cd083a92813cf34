use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use shapebench::bench::ManifestRecord;
use shapebench::qa::AspectKind;
use shapebench::scene::Split;
use shapebench::seed::rng_from;

use crate::client::EvalError;
use crate::prompt::LETTERS;

/// One model response. `parsed` is the extracted option letter, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub question_id: String,
    pub raw_text: String,
    pub parsed: Option<char>,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub split: Split,
    pub aspect: AspectKind,
    pub n: usize,
    pub correct: usize,
    /// Percentage; `None` when the cell has no questions.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Easy cells then hard cells, each in table column order.
    pub cells: Vec<CellScore>,
    /// Unweighted mean of the defined cell accuracies.
    pub average: f64,
    pub unanswered_count: usize,
}

/// Column order of the report table within each split.
pub const TABLE_ASPECTS: [AspectKind; 6] = [
    AspectKind::Existence,
    AspectKind::Counting,
    AspectKind::Size,
    AspectKind::Location,
    AspectKind::Reference,
    AspectKind::Relationship,
];

impl ScoreReport {
    pub fn cell(&self, split: Split, aspect: AspectKind) -> &CellScore {
        self.cells
            .iter()
            .find(|c| c.split == split && c.aspect == aspect)
            .expect("every split and aspect has a cell")
    }

    /// Plain-text table: Avg, then Easy and Hard aspect columns.
    pub fn to_table(&self) -> String {
        let mut head = format!("{:>7}", "Avg");
        let mut row = format!("{:>7.2}", self.average);
        for split in Split::ALL {
            for aspect in TABLE_ASPECTS {
                let _ = write!(
                    head,
                    " {:>9}",
                    format!("{}-{}", if split == Split::Easy { "E" } else { "H" }, aspect.short())
                );
                match self.cell(split, aspect).accuracy {
                    Some(a) => {
                        let _ = write!(row, " {a:>9.2}");
                    }
                    None => {
                        let _ = write!(row, " {:>9}", "-");
                    }
                }
            }
        }
        format!("{head}\n{row}\nunanswered: {}\n", self.unanswered_count)
    }
}

/// Scores responses against the manifest. Missing and unparseable responses
/// count as incorrect; the average is taken over cells that have questions.
pub fn score(manifest: &[ManifestRecord], responses: &[ResponseRecord]) -> Result<ScoreReport, EvalError> {
    let known: HashSet<&str> = manifest.iter().map(|r| r.question_id.as_str()).collect();
    let mut by_id: HashMap<&str, &ResponseRecord> = HashMap::with_capacity(responses.len());
    for r in responses {
        if !known.contains(r.question_id.as_str()) {
            return Err(EvalError::UnknownQuestionId(r.question_id.clone()));
        }
        if by_id.insert(r.question_id.as_str(), r).is_some() {
            return Err(EvalError::DuplicateResponse(r.question_id.clone()));
        }
    }
    let mut tally: BTreeMap<(Split, AspectKind), (usize, usize)> = BTreeMap::new();
    let mut unanswered = 0;
    for rec in manifest {
        let cell = tally.entry((rec.split, rec.aspect)).or_insert((0, 0));
        cell.0 += 1;
        match by_id.get(rec.question_id.as_str()) {
            None => unanswered += 1,
            Some(resp) => {
                if resp.parsed.map(|c| c.to_string()) == Some(rec.answer.clone()) {
                    cell.1 += 1;
                }
            }
        }
    }
    let cells: Vec<CellScore> = Split::ALL
        .into_iter()
        .flat_map(|split| TABLE_ASPECTS.map(|aspect| (split, aspect)))
        .map(|(split, aspect)| {
            let (n, correct) = tally.get(&(split, aspect)).copied().unwrap_or((0, 0));
            CellScore {
                split,
                aspect,
                n,
                correct,
                accuracy: (n > 0).then(|| correct as f64 / n as f64 * 100.0),
            }
        })
        .collect();
    let defined: Vec<f64> = cells.iter().filter_map(|c| c.accuracy).collect();
    let average = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(ScoreReport {
        cells,
        average,
        unanswered_count: unanswered,
    })
}

/// Uniformly random letters for every question, scored.
pub fn random_baseline(manifest: &[ManifestRecord], seed: u64) -> ScoreReport {
    let mut rng = rng_from(seed);
    let responses: Vec<ResponseRecord> = manifest
        .iter()
        .map(|r| {
            let letter = LETTERS[rng.random_range(0..4)];
            ResponseRecord {
                question_id: r.question_id.clone(),
                raw_text: letter.to_string(),
                parsed: Some(letter),
                latency_ms: 0,
            }
        })
        .collect();
    score(manifest, &responses).expect("responses are built from the manifest")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use shapebench::bench::{image_path, RecordMeta};

    pub(crate) fn manifest(per_cell: usize) -> Vec<ManifestRecord> {
        let mut out = Vec::new();
        for split in Split::ALL {
            for aspect in AspectKind::ALL {
                for i in 0..per_cell {
                    let fig = format!("{split}-{i:05}");
                    out.push(ManifestRecord {
                        question_id: format!("{fig}-{aspect}"),
                        figure_id: fig.clone(),
                        image_path: image_path(split, &fig),
                        split,
                        aspect,
                        question: "q".into(),
                        choices: vec!["w".into(), "x".into(), "y".into(), "z".into()],
                        answer: LETTERS[i % 4].to_string(),
                        meta: RecordMeta {
                            num_shapes: 3,
                            noisy: split == Split::Hard,
                            seed: 0,
                            ground_truth_value: String::new(),
                            template_id: String::new(),
                            target_shape_ids: vec![],
                        },
                    });
                }
            }
        }
        out
    }

    fn answer(r: &ManifestRecord, letter: char) -> ResponseRecord {
        ResponseRecord {
            question_id: r.question_id.clone(),
            raw_text: letter.to_string(),
            parsed: Some(letter),
            latency_ms: 1,
        }
    }

    fn correct(r: &ManifestRecord) -> ResponseRecord {
        answer(r, r.answer.chars().next().unwrap())
    }

    #[test]
    fn all_correct() {
        let m = manifest(4);
        let rs: Vec<_> = m.iter().map(correct).collect();
        let rep = score(&m, &rs).unwrap();
        assert!(rep.cells.iter().all(|c| c.accuracy == Some(100.0)));
        assert_eq!(rep.average, 100.0);
    }

    #[test]
    fn one_aspect_wrong() {
        let m = manifest(4);
        let rs: Vec<_> = m
            .iter()
            .map(|r| {
                if r.split == Split::Easy && r.aspect == AspectKind::Size {
                    ResponseRecord {
                        parsed: None,
                        ..correct(r)
                    }
                } else {
                    correct(r)
                }
            })
            .collect();
        let rep = score(&m, &rs).unwrap();
        assert!((rep.average - 1100.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn missing_counts_incorrect_and_unknown_rejected() {
        let m = manifest(2);
        let rs: Vec<_> = m.iter().skip(3).map(correct).collect();
        let rep = score(&m, &rs).unwrap();
        assert_eq!(rep.unanswered_count, 3);
        let mut bad = rs.clone();
        bad[0].question_id = "nope".into();
        assert!(matches!(score(&m, &bad), Err(EvalError::UnknownQuestionId(_))));
    }

    #[test]
    fn order_does_not_matter() {
        let m = manifest(3);
        let mut rs: Vec<_> = m
            .iter()
            .enumerate()
            .map(|(i, r)| answer(r, LETTERS[i * 7 % 4]))
            .collect();
        let a = score(&m, &rs).unwrap();
        rs.reverse();
        assert_eq!(a, score(&m, &rs).unwrap());
    }

    #[test]
    fn single_question_baseline() {
        let m: Vec<_> = manifest(1).into_iter().take(1).collect();
        let rep = random_baseline(&m, 3);
        let a = rep.cells[0].accuracy.unwrap();
        assert!(a == 0.0 || a == 100.0);
        assert!(rep.to_table().contains("E-Ext"));
    }
}
