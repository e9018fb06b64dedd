//! NLI records, parsed-pairs ingestion and tagging.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conllu::{parse_conllu, DepTree};
use crate::error::{Error, Result};
use crate::par;
use crate::rules::{assign_pair, CategoryAssignment, NegCategory, PairOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NliPair {
    pub id: String,
    pub source: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
}

/// An NLI pair with one dependency tree per span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPair {
    pub nli: NliPair,
    pub premise_tree: DepTree,
    pub hypothesis_tree: DepTree,
}

impl ParsedPair {
    pub fn id(&self) -> &str {
        &self.nli.id
    }

    pub fn label(&self) -> Label {
        self.nli.label
    }
}

/// A pair assigned to a diagnostic category, either extracted directly or
/// produced by synonym substitution from `source_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagRecord {
    pub pair: ParsedPair,
    pub source_id: String,
    pub assignment: CategoryAssignment,
    pub synonym_used: Option<String>,
}

impl DiagRecord {
    pub fn original(pair: ParsedPair, assignment: CategoryAssignment) -> Self {
        DiagRecord {
            source_id: pair.nli.id.clone(),
            pair,
            assignment,
            synonym_used: None,
        }
    }

    pub fn id(&self) -> &str {
        self.pair.id()
    }

    pub fn category(&self) -> NegCategory {
        self.assignment.category
    }

    pub fn is_augmented(&self) -> bool {
        self.synonym_used.is_some()
    }
}

/// One line of the parsed-pairs JSONL input.
#[derive(Debug, Deserialize)]
struct InputRecord {
    id: String,
    source: String,
    premise: String,
    hypothesis: String,
    #[serde(default)]
    label: Option<String>,
    premise_conllu: String,
    hypothesis_conllu: String,
    #[serde(default)]
    unparseable: bool,
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub pairs: Vec<ParsedPair>,
    /// Non-empty input lines read.
    pub lines: usize,
    /// Records with a "-" or missing gold label.
    pub dropped_labels: usize,
    /// Placeholder records flagged unparseable by the parser stage.
    pub unparseable: usize,
}

impl Ingested {
    pub fn dropped(&self) -> usize {
        self.dropped_labels + self.unparseable
    }
}

enum LineResult {
    Pair(Box<ParsedPair>),
    DroppedLabel,
    Unparseable,
}

fn squash_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn span_tree(block: &str, text: &str, field: &str) -> std::result::Result<DepTree, String> {
    let tree = parse_conllu(block).map_err(|e| format!("{field}: {e}"))?;
    let has_text_comment = block.lines().any(|l| {
        l.strip_prefix('#')
            .is_some_and(|c| c.trim_start().starts_with("text ="))
    });
    if has_text_comment && squash_whitespace(tree.text()) != squash_whitespace(text) {
        return Err(format!("{field}: sentence text does not match the span"));
    }
    Ok(tree.with_text(text))
}

fn parse_line(line: &str) -> std::result::Result<LineResult, String> {
    let record: InputRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if record.unparseable {
        return Ok(LineResult::Unparseable);
    }
    let label = match record.label.as_deref() {
        None | Some("-") | Some("") => return Ok(LineResult::DroppedLabel),
        Some(l) => l.parse::<Label>()?,
    };
    let premise_tree = span_tree(&record.premise_conllu, &record.premise, "premise_conllu")?;
    let hypothesis_tree = span_tree(
        &record.hypothesis_conllu,
        &record.hypothesis,
        "hypothesis_conllu",
    )?;
    Ok(LineResult::Pair(Box::new(ParsedPair {
        nli: NliPair {
            id: record.id,
            source: record.source,
            premise: record.premise,
            hypothesis: record.hypothesis,
            label,
        },
        premise_tree,
        hypothesis_tree,
    })))
}

/// Reads parsed-pairs JSONL files. Records without a gold label are dropped
/// and counted; duplicate ids across all files are rejected.
pub fn ingest_pairs<P: AsRef<Path>>(files: &[P]) -> Result<Ingested> {
    let mut ingested = Ingested::default();
    let mut seen = HashSet::new();

    for file in files {
        let path = file.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lines: Vec<(usize, &str)> = content
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l))
            .collect();
        let parsed = par::map(&lines, |(_, l)| parse_line(l));

        for ((line, _), result) in lines.iter().zip(parsed) {
            ingested.lines += 1;
            match result.map_err(|reason| Error::MalformedRecord {
                path: PathBuf::from(path),
                line: *line,
                reason,
            })? {
                LineResult::Pair(pair) => {
                    if !seen.insert(pair.nli.id.clone()) {
                        return Err(Error::DuplicateId {
                            path: PathBuf::from(path),
                            line: *line,
                            id: pair.nli.id.clone(),
                        });
                    }
                    ingested.pairs.push(*pair);
                }
                LineResult::DroppedLabel => ingested.dropped_labels += 1,
                LineResult::Unparseable => ingested.unparseable += 1,
            }
        }
    }

    if ingested.dropped_labels > 0 {
        log::warn!(
            "dropped {} records without a gold label",
            ingested.dropped_labels
        );
    }
    if ingested.unparseable > 0 {
        log::warn!("skipped {} unparseable records", ingested.unparseable);
    }
    Ok(ingested)
}

#[derive(Debug, Default, Clone)]
pub struct TaggedCorpus {
    pub tagged: Vec<DiagRecord>,
    /// Pairs without any explicit marker; these feed NLI_train.
    pub negation_free: Vec<ParsedPair>,
    /// Negated pairs that no rule matched; discarded.
    pub negated_unmatched: Vec<ParsedPair>,
}

impl TaggedCorpus {
    pub fn count(&self, category: NegCategory) -> usize {
        self.tagged
            .iter()
            .filter(|r| r.category() == category)
            .count()
    }
}

fn partition(pairs: Vec<ParsedPair>, outcomes: Vec<PairOutcome>) -> TaggedCorpus {
    let mut corpus = TaggedCorpus::default();
    for (pair, outcome) in pairs.into_iter().zip(outcomes) {
        match outcome {
            PairOutcome::Tagged(assignment) => {
                corpus.tagged.push(DiagRecord::original(pair, assignment))
            }
            PairOutcome::NoNegation => corpus.negation_free.push(pair),
            PairOutcome::NegatedUnmatched => corpus.negated_unmatched.push(pair),
        }
    }
    corpus
}

/// Classifies every pair, in parallel when the `parallel` feature is on.
pub fn tag_corpus(pairs: Vec<ParsedPair>) -> TaggedCorpus {
    let outcomes = par::map(&pairs, assign_pair);
    partition(pairs, outcomes)
}

/// Single-threaded [`tag_corpus`].
pub fn tag_corpus_sequential(pairs: Vec<ParsedPair>) -> TaggedCorpus {
    let outcomes = pairs.iter().map(assign_pair).collect();
    partition(pairs, outcomes)
}
