//! Summary statistics for a run, as JSON and as an aligned text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::output::{
    diag_file, read_jsonl, DiagSide, OutputRecord, NLI_DEV_FILE, NLI_TRAIN_FILE, STATS_JSON_FILE,
};
use crate::rules::NegCategory;
use crate::split::CorpusSplits;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: NegCategory,
    pub name: String,
    /// Original (non-augmented) records across train and test.
    pub extracted: usize,
    pub augmented: usize,
    pub train: usize,
    pub test: usize,
    #[serde(default)]
    pub target_unreachable: bool,
}

/// Run parameters recorded alongside the counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub test_frac: f64,
    pub dev_size: usize,
    pub augment_threshold: usize,
    pub augment_target: usize,
    pub wordnet_version: Option<String>,
    pub ingested: usize,
    pub dropped: usize,
    #[serde(default)]
    pub target_unreachable: Vec<NegCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    #[serde(flatten)]
    pub meta: RunMeta,
    pub categories: Vec<CategoryStats>,
    pub nli_train: usize,
    pub nli_dev: usize,
    pub discarded_negated: usize,
    pub ambiguous: usize,
}

impl StatsReport {
    pub fn category(&self, category: NegCategory) -> Option<&CategoryStats> {
        self.categories.iter().find(|c| c.category == category)
    }

    pub fn diagnostic_total(&self) -> usize {
        self.categories.iter().map(|c| c.train + c.test).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_table(&self) -> String {
        let header = ["Category", "Extracted", "Augmented", "Train", "Test"];
        let rows: Vec<[String; 5]> = self
            .categories
            .iter()
            .map(|c| {
                let mark = if c.target_unreachable { "*" } else { "" };
                [
                    format!("{} ({})", c.name, c.category),
                    c.extracted.to_string(),
                    format!("{}{mark}", c.augmented),
                    c.train.to_string(),
                    c.test.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }

        let mut out = String::new();
        let line = |out: &mut String, cells: [&str; 5]| {
            let _ = write!(out, "{:<w$}", cells[0], w = widths[0]);
            for (cell, w) in cells[1..].iter().zip(&widths[1..]) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        };
        line(&mut out, header);
        let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        for row in &rows {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3], &row[4]]);
        }
        out.push('\n');
        let m = &self.meta;
        let _ = writeln!(out, "NLI_train            {}", self.nli_train);
        let _ = writeln!(out, "NLI_dev              {}", self.nli_dev);
        let _ = writeln!(out, "discarded (negated)  {}", self.discarded_negated);
        let _ = writeln!(out, "dropped (no label)   {}", m.dropped);
        let _ = writeln!(out, "ambiguous            {}", self.ambiguous);
        let _ = writeln!(out, "ingested             {}", m.ingested);
        let _ = writeln!(
            out,
            "seed {}  test_frac {}  dev_size {}  augment {}→{}  wordnet {}",
            m.seed,
            m.test_frac,
            m.dev_size,
            m.augment_threshold,
            m.augment_target,
            m.wordnet_version.as_deref().unwrap_or("none")
        );
        if !m.target_unreachable.is_empty() {
            out.push_str("* augmentation target not reached\n");
        }
        out
    }
}

fn category_row(
    category: NegCategory,
    train: &[(bool, bool)],
    test: &[(bool, bool)],
    unreachable: bool,
) -> CategoryStats {
    let all = train.iter().chain(test);
    CategoryStats {
        category,
        name: category.name().to_string(),
        extracted: all.clone().filter(|(aug, _)| !aug).count(),
        augmented: all.filter(|(aug, _)| *aug).count(),
        train: train.len(),
        test: test.len(),
        target_unreachable: unreachable,
    }
}

/// Counts per split. Each diagnostic record is summarized as
/// `(augmented, ambiguous)`.
pub fn stats_report(splits: &CorpusSplits, meta: RunMeta) -> StatsReport {
    let flags = |records: &[crate::corpus::DiagRecord]| -> Vec<(bool, bool)> {
        records
            .iter()
            .map(|r| (r.is_augmented(), r.assignment.ambiguous))
            .collect()
    };
    let mut ambiguous = 0;
    let categories = NegCategory::ALL
        .iter()
        .map(|&c| {
            let (train, test) = splits
                .diagnostics
                .get(&c)
                .map(|s| (flags(&s.train), flags(&s.test)))
                .unwrap_or_default();
            ambiguous += train.iter().chain(&test).filter(|(_, a)| *a).count();
            category_row(c, &train, &test, meta.target_unreachable.contains(&c))
        })
        .collect();
    StatsReport {
        meta,
        categories,
        nli_train: splits.nli_train.len(),
        nli_dev: splits.nli_dev.len(),
        discarded_negated: splits.discarded_negated,
        ambiguous,
    }
}

/// Rebuilds a report from an output directory by counting its corpus files.
/// Run parameters and counts that files cannot show (ingested, dropped,
/// discarded) come from `stats.json` when it exists.
pub fn recount_output_dir(dir: &Path) -> Result<StatsReport> {
    let stats_path = dir.join(STATS_JSON_FILE);
    let previous: Option<StatsReport> = if stats_path.is_file() {
        let text = std::fs::read_to_string(&stats_path)
            .map_err(|e| crate::error::Error::io(&stats_path, e))?;
        Some(
            serde_json::from_str(&text).map_err(|e| crate::error::Error::MalformedRecord {
                path: stats_path.clone(),
                line: e.line(),
                reason: e.to_string(),
            })?,
        )
    } else {
        None
    };

    let read_optional = |path: &Path| -> Result<Vec<OutputRecord>> {
        if path.is_file() {
            read_jsonl(path)
        } else {
            Ok(Vec::new())
        }
    };

    let meta = previous
        .as_ref()
        .map(|p| p.meta.clone())
        .unwrap_or(RunMeta {
            seed: 0,
            test_frac: 0.0,
            dev_size: 0,
            augment_threshold: 0,
            augment_target: 0,
            wordnet_version: None,
            ingested: 0,
            dropped: 0,
            target_unreachable: Vec::new(),
        });

    let mut ambiguous = 0;
    let mut per_category = BTreeMap::new();
    for c in NegCategory::ALL {
        let mut sides = Vec::new();
        for side in [DiagSide::Train, DiagSide::Test] {
            let records = read_optional(&dir.join(diag_file(c, side)))?;
            ambiguous += records.iter().filter(|r| r.ambiguous == Some(true)).count();
            sides.push(
                records
                    .iter()
                    .map(|r| (r.augmented, r.ambiguous == Some(true)))
                    .collect::<Vec<_>>(),
            );
        }
        per_category.insert(
            c,
            category_row(
                c,
                &sides[0],
                &sides[1],
                meta.target_unreachable.contains(&c),
            ),
        );
    }

    Ok(StatsReport {
        categories: per_category.into_values().collect(),
        nli_train: read_optional(&dir.join(NLI_TRAIN_FILE))?.len(),
        nli_dev: read_optional(&dir.join(NLI_DEV_FILE))?.len(),
        discarded_negated: previous.as_ref().map_or(0, |p| p.discarded_negated),
        ambiguous,
        meta,
    })
}
