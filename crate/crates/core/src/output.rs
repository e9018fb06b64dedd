//! JSONL records written and read by the command-line stages.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::conllu::parse_conllu;
use crate::corpus::{DiagRecord, Label, NliPair, ParsedPair};
use crate::error::{Error, Result};
use crate::rules::{CategoryAssignment, MatchedSpan, NegCategory, SpanRole};

pub const NLI_TRAIN_FILE: &str = "nli_train.jsonl";
pub const NLI_DEV_FILE: &str = "nli_dev.jsonl";
pub const STATS_JSON_FILE: &str = "stats.json";
pub const STATS_TEXT_FILE: &str = "stats.txt";

pub fn diag_file(category: NegCategory, split: DiagSide) -> String {
    format!("{}_{}.jsonl", category.code(), split.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagSide {
    Train,
    Test,
}

impl DiagSide {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagSide::Train => "train",
            DiagSide::Test => "test",
        }
    }
}

/// One record of a final corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub id: String,
    pub source_id: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<NegCategory>,
    pub split: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_span: Option<MatchedSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambiguous: Option<bool>,
    pub augmented: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonym_used: Option<String>,
}

impl OutputRecord {
    pub fn diagnostic(record: &DiagRecord, side: DiagSide) -> Self {
        let nli = &record.pair.nli;
        OutputRecord {
            id: nli.id.clone(),
            source_id: record.source_id.clone(),
            source: nli.source.clone(),
            category: Some(record.category()),
            split: side.as_str().to_string(),
            premise: nli.premise.clone(),
            hypothesis: nli.hypothesis.clone(),
            label: nli.label,
            matched_span: Some(record.assignment.matched_span),
            ambiguous: Some(record.assignment.ambiguous),
            augmented: record.is_augmented(),
            synonym_used: record.synonym_used.clone(),
        }
    }

    pub fn nli(pair: &ParsedPair, split: &str) -> Self {
        let nli = &pair.nli;
        OutputRecord {
            id: nli.id.clone(),
            source_id: nli.id.clone(),
            source: nli.source.clone(),
            category: None,
            split: split.to_string(),
            premise: nli.premise.clone(),
            hypothesis: nli.hypothesis.clone(),
            label: nli.label,
            matched_span: None,
            ambiguous: None,
            augmented: false,
            synonym_used: None,
        }
    }
}

/// A tagged pair with its parses, as passed between the `tag`, `augment`
/// and `split` stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedLine {
    pub id: String,
    pub source_id: String,
    pub source: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    pub premise_conllu: String,
    pub hypothesis_conllu: String,
    pub category: NegCategory,
    pub matched_span: MatchedSpan,
    pub all_matches: Vec<(SpanRole, NegCategory)>,
    pub ambiguous: bool,
    pub augmented: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonym_used: Option<String>,
}

impl From<&DiagRecord> for TaggedLine {
    fn from(r: &DiagRecord) -> Self {
        let nli = &r.pair.nli;
        TaggedLine {
            id: nli.id.clone(),
            source_id: r.source_id.clone(),
            source: nli.source.clone(),
            premise: nli.premise.clone(),
            hypothesis: nli.hypothesis.clone(),
            label: nli.label,
            premise_conllu: r.pair.premise_tree.to_conllu(),
            hypothesis_conllu: r.pair.hypothesis_tree.to_conllu(),
            category: r.category(),
            matched_span: r.assignment.matched_span,
            all_matches: r.assignment.all_matches.clone(),
            ambiguous: r.assignment.ambiguous,
            augmented: r.is_augmented(),
            synonym_used: r.synonym_used.clone(),
        }
    }
}

impl TaggedLine {
    fn into_record(self) -> std::result::Result<DiagRecord, String> {
        let premise_tree = parse_conllu(&self.premise_conllu)
            .map_err(|e| format!("premise_conllu: {e}"))?
            .with_text(self.premise.clone());
        let hypothesis_tree = parse_conllu(&self.hypothesis_conllu)
            .map_err(|e| format!("hypothesis_conllu: {e}"))?
            .with_text(self.hypothesis.clone());
        Ok(DiagRecord {
            pair: ParsedPair {
                nli: NliPair {
                    id: self.id,
                    source: self.source,
                    premise: self.premise,
                    hypothesis: self.hypothesis,
                    label: self.label,
                },
                premise_tree,
                hypothesis_tree,
            },
            source_id: self.source_id,
            assignment: CategoryAssignment {
                category: self.category,
                matched_span: self.matched_span,
                all_matches: self.all_matches,
                ambiguous: self.ambiguous,
            },
            synonym_used: self.synonym_used,
        })
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Reads tagged-pair files produced by the `tag` or `augment` stages.
pub fn read_tagged<P: AsRef<Path>>(files: &[P]) -> Result<Vec<DiagRecord>> {
    let mut out = Vec::new();
    for file in files {
        let path = file.as_ref();
        for (i, line) in read_jsonl::<TaggedLine>(path)?.into_iter().enumerate() {
            out.push(
                line.into_record()
                    .map_err(|reason| Error::MalformedRecord {
                        path: PathBuf::from(path),
                        line: i + 1,
                        reason,
                    })?,
            );
        }
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes files into a staging directory next to `out`, then moves them
/// into `out`. A failure leaves `out` untouched.
pub fn write_staged<F>(out: &Path, write: F) -> Result<Vec<PathBuf>>
where
    F: FnOnce(&Path) -> Result<()>,
{
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".negforge-staging-")
        .tempdir_in(&parent)
        .map_err(|e| Error::io(&parent, e))?;
    write(staging.path())?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut names: Vec<PathBuf> = fs::read_dir(staging.path())
        .map_err(|e| Error::io(staging.path(), e))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(staging.path(), e))?;
    names.sort();
    let mut written = Vec::new();
    for src in names {
        let dest = out.join(src.file_name().expect("staged entries have names"));
        fs::rename(&src, &dest).map_err(|e| Error::io(&dest, e))?;
        written.push(dest);
    }
    Ok(written)
}
