//! End-to-end corpus construction: tag, augment sparse categories, split,
//! carve the dev set and report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::augment::{augment_category, AugmentedPair};
use crate::corpus::{tag_corpus, DiagRecord, Ingested, TaggedCorpus};
use crate::error::{Error, Result};
use crate::output::{
    diag_file, write_jsonl, write_staged, DiagSide, OutputRecord, NLI_DEV_FILE, NLI_TRAIN_FILE,
    STATS_JSON_FILE, STATS_TEXT_FILE,
};
use crate::rules::NegCategory;
use crate::split::{carve_dev, split_diagnostics, validate_test_frac, CorpusSplits};
use crate::stats::{stats_report, RunMeta, StatsReport};
use crate::wordnet::{load_wordnet, SynsetLexicon};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub test_frac: f64,
    pub dev_size: usize,
    /// Categories with fewer extracted pairs than this are augmented.
    pub augment_threshold: usize,
    pub augment_target: usize,
    pub wordnet: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            test_frac: 1.0 / 3.0,
            dev_size: 9000,
            augment_threshold: 1000,
            augment_target: 1500,
            wordnet: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        validate_test_frac(self.test_frac)?;
        if !self.dev_size.is_multiple_of(3) {
            return Err(Error::InvalidDevSize(self.dev_size));
        }
        if self.augment_target == 0 {
            return Err(Error::InvalidTarget);
        }
        Ok(())
    }
}

/// Loads the lexicon on first use only.
pub struct LazyLexicon {
    dir: Option<PathBuf>,
    loaded: Option<SynsetLexicon>,
}

impl LazyLexicon {
    pub fn new(dir: Option<PathBuf>) -> Self {
        LazyLexicon { dir, loaded: None }
    }

    pub fn preloaded(lex: SynsetLexicon) -> Self {
        LazyLexicon {
            dir: None,
            loaded: Some(lex),
        }
    }

    pub fn get(&mut self, needed_for: &[NegCategory]) -> Result<&SynsetLexicon> {
        if self.loaded.is_none() {
            let Some(dir) = &self.dir else {
                let names: Vec<&str> = needed_for.iter().map(|c| c.code()).collect();
                return Err(Error::MissingLexicon(names.join(", ")));
            };
            log::info!("loading WordNet from {}", dir.display());
            self.loaded = Some(load_wordnet(dir)?);
        }
        Ok(self.loaded.as_ref().expect("loaded above"))
    }

    pub fn version(&self) -> Option<&str> {
        self.loaded.as_ref().and_then(|l| l.version())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Augmentation {
    pub variants: Vec<AugmentedPair>,
    pub target_unreachable: Vec<NegCategory>,
}

/// Augments every category whose extracted count is below `threshold`.
pub fn augment_sparse(
    tagged: &[DiagRecord],
    lexicon: &mut LazyLexicon,
    threshold: usize,
    target: usize,
) -> Result<Augmentation> {
    let mut by_category: BTreeMap<NegCategory, Vec<DiagRecord>> = BTreeMap::new();
    for r in tagged.iter().filter(|r| !r.is_augmented()) {
        by_category.entry(r.category()).or_default().push(r.clone());
    }
    let sparse: Vec<NegCategory> = NegCategory::ALL
        .into_iter()
        .filter(|c| by_category.get(c).map_or(0, Vec::len) < threshold)
        .collect();

    let mut out = Augmentation::default();
    let with_records: Vec<NegCategory> = sparse
        .iter()
        .copied()
        .filter(|c| by_category.contains_key(c))
        .collect();
    if with_records.is_empty() {
        out.target_unreachable = sparse;
        return Ok(out);
    }

    let lex = lexicon.get(&with_records)?;
    for category in sparse {
        let records = by_category.get(&category).map(Vec::as_slice).unwrap_or(&[]);
        let result = augment_category(records, lex, target);
        if result.target_unreachable {
            log::warn!(
                "{category}: only {} of {target} records after augmentation",
                records.len() + result.variants.len()
            );
            out.target_unreachable.push(category);
        }
        out.variants.extend(result.variants);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub splits: CorpusSplits,
    pub report: StatsReport,
}

pub fn build_corpus(
    ingested: Ingested,
    config: &PipelineConfig,
    lexicon: &mut LazyLexicon,
) -> Result<PipelineResult> {
    config.validate()?;
    let ingested_lines = ingested.lines;
    let dropped = ingested.dropped();

    let TaggedCorpus {
        tagged,
        negation_free,
        negated_unmatched,
    } = tag_corpus(ingested.pairs);
    log::info!(
        "tagged {} pairs, {} negation-free, {} negated but unmatched",
        tagged.len(),
        negation_free.len(),
        negated_unmatched.len()
    );

    let augmentation = augment_sparse(
        &tagged,
        lexicon,
        config.augment_threshold,
        config.augment_target,
    )?;

    let mut records = tagged;
    records.extend(augmentation.variants.into_iter().map(DiagRecord::from));
    let diagnostics = split_diagnostics(records, config.test_frac, config.seed)?;
    let (nli_train, nli_dev) = carve_dev(negation_free, config.dev_size, config.seed)?;

    let splits = CorpusSplits {
        diagnostics,
        nli_train,
        nli_dev,
        discarded_negated: negated_unmatched.len(),
        seed: config.seed,
    };
    let meta = RunMeta {
        seed: config.seed,
        test_frac: config.test_frac,
        dev_size: config.dev_size,
        augment_threshold: config.augment_threshold,
        augment_target: config.augment_target,
        wordnet_version: lexicon.version().map(str::to_string),
        ingested: ingested_lines,
        dropped,
        target_unreachable: augmentation.target_unreachable,
    };
    let report = stats_report(&splits, meta);
    Ok(PipelineResult { splits, report })
}

/// Writes every corpus file and both stats files into `out`.
pub fn write_outputs(out: &Path, result: &PipelineResult) -> Result<Vec<PathBuf>> {
    write_staged(out, |dir| {
        for (category, split) in &result.splits.diagnostics {
            for (side, records) in [
                (DiagSide::Train, &split.train),
                (DiagSide::Test, &split.test),
            ] {
                write_jsonl(
                    &dir.join(diag_file(*category, side)),
                    records.iter().map(|r| OutputRecord::diagnostic(r, side)),
                )?;
            }
        }
        write_jsonl(
            &dir.join(NLI_TRAIN_FILE),
            result
                .splits
                .nli_train
                .iter()
                .map(|p| OutputRecord::nli(p, "nli_train")),
        )?;
        write_jsonl(
            &dir.join(NLI_DEV_FILE),
            result
                .splits
                .nli_dev
                .iter()
                .map(|p| OutputRecord::nli(p, "nli_dev")),
        )?;
        let json = result.report.to_json()?;
        fs::write(dir.join(STATS_JSON_FILE), json)
            .map_err(|e| Error::io(dir.join(STATS_JSON_FILE), e))?;
        fs::write(dir.join(STATS_TEXT_FILE), result.report.to_table())
            .map_err(|e| Error::io(dir.join(STATS_TEXT_FILE), e))?;
        Ok(())
    })
}
