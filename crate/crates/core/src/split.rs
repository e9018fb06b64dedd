//! Group-aware diagnostic splits, the label-balanced dev carve-out and
//! per-category undersampling.
//!
//! Inputs are sorted by id before any draw, so the result depends only on
//! the record set and the seed.

use std::collections::BTreeMap;

use crate::corpus::{DiagRecord, Label, ParsedPair};
use crate::error::{Error, Result};
use crate::rng::{SeededRng, STREAM_DEV, STREAM_UNDERSAMPLE};
use crate::rules::NegCategory;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagSplit {
    pub train: Vec<DiagRecord>,
    pub test: Vec<DiagRecord>,
}

/// The output corpora of one run.
#[derive(Debug, Clone, Default)]
pub struct CorpusSplits {
    pub diagnostics: BTreeMap<NegCategory, DiagSplit>,
    pub nli_train: Vec<ParsedPair>,
    pub nli_dev: Vec<ParsedPair>,
    pub discarded_negated: usize,
    pub seed: u64,
}

/// Number of test records required for a category of `n` records.
pub fn test_quota(n: usize, test_frac: f64) -> usize {
    // The epsilon keeps e.g. (1/3) * 6 from rounding up to 3.
    ((test_frac * n as f64) - 1e-9).ceil().max(0.0) as usize
}

pub fn validate_test_frac(test_frac: f64) -> Result<()> {
    if test_frac > 0.0 && test_frac < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTestFrac(test_frac))
    }
}

fn split_category(records: Vec<DiagRecord>, quota: usize, rng: &mut SeededRng) -> DiagSplit {
    let mut groups: BTreeMap<String, Vec<DiagRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.source_id.clone()).or_default().push(r);
    }
    let mut groups: Vec<Vec<DiagRecord>> = groups.into_values().collect();
    for g in &mut groups {
        g.sort_by(|a, b| a.id().cmp(b.id()));
    }
    rng.shuffle(&mut groups);

    let mut split = DiagSplit::default();
    for group in groups {
        if split.test.len() < quota {
            split.test.extend(group);
        } else {
            split.train.extend(group);
        }
    }
    split.train.sort_by(|a, b| a.id().cmp(b.id()));
    split.test.sort_by(|a, b| a.id().cmp(b.id()));
    split
}

/// Splits each category into train and test. Records sharing a `source_id`
/// always land on the same side; whole groups go to test until it holds at
/// least `ceil(test_frac * n)` records.
pub fn split_diagnostics(
    records: Vec<DiagRecord>,
    test_frac: f64,
    seed: u64,
) -> Result<BTreeMap<NegCategory, DiagSplit>> {
    validate_test_frac(test_frac)?;
    let mut by_category: BTreeMap<NegCategory, Vec<DiagRecord>> =
        NegCategory::ALL.iter().map(|c| (*c, Vec::new())).collect();
    for r in records {
        by_category.entry(r.category()).or_default().push(r);
    }
    Ok(by_category
        .into_iter()
        .map(|(category, records)| {
            let quota = test_quota(records.len(), test_frac);
            let mut rng = SeededRng::new(seed, category.rank() as u64);
            (category, split_category(records, quota, &mut rng))
        })
        .collect())
}

/// Moves `dev_size / 3` randomly chosen records of each label from the pool
/// into a dev set. Returns `(train, dev)`, both sorted by id.
pub fn carve_dev(
    mut pool: Vec<ParsedPair>,
    dev_size: usize,
    seed: u64,
) -> Result<(Vec<ParsedPair>, Vec<ParsedPair>)> {
    if !dev_size.is_multiple_of(3) {
        return Err(Error::InvalidDevSize(dev_size));
    }
    let per_label = dev_size / 3;
    pool.sort_by(|a, b| a.id().cmp(b.id()));

    let mut positions: BTreeMap<Label, Vec<usize>> =
        Label::ALL.iter().map(|l| (*l, Vec::new())).collect();
    for (i, p) in pool.iter().enumerate() {
        positions.entry(p.label()).or_default().push(i);
    }
    for label in Label::ALL {
        let available = positions[&label].len();
        if available < per_label {
            return Err(Error::InsufficientLabel {
                label,
                available,
                required: per_label,
            });
        }
    }

    let mut rng = SeededRng::new(seed, STREAM_DEV);
    let mut in_dev = vec![false; pool.len()];
    for label in Label::ALL {
        let candidates = &positions[&label];
        for k in rng.sample_indices(candidates.len(), per_label) {
            in_dev[candidates[k]] = true;
        }
    }

    let (dev, train): (Vec<_>, Vec<_>) = pool.into_iter().zip(in_dev).partition(|(_, dev)| *dev);
    Ok((
        train.into_iter().map(|(p, _)| p).collect(),
        dev.into_iter().map(|(p, _)| p).collect(),
    ))
}

/// Reduces every category to the size of the smallest one by seeded
/// sampling without replacement. Relative order is preserved.
pub fn undersample<T>(
    sets: BTreeMap<NegCategory, Vec<T>>,
    seed: u64,
) -> BTreeMap<NegCategory, Vec<T>> {
    let Some(min) = sets.values().map(Vec::len).min() else {
        return sets;
    };
    sets.into_iter()
        .map(|(category, records)| {
            if records.len() == min {
                return (category, records);
            }
            let mut rng = SeededRng::new(seed, STREAM_UNDERSAMPLE + category.rank() as u64);
            let keep = rng.sample_indices(records.len(), min);
            let mut keep = keep.into_iter().peekable();
            let kept = records
                .into_iter()
                .enumerate()
                .filter_map(|(i, r)| {
                    if keep.peek() == Some(&i) {
                        keep.next();
                        Some(r)
                    } else {
                        None
                    }
                })
                .collect();
            (category, kept)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;
    use crate::corpus::NliPair;
    use crate::rules::{CategoryAssignment, MatchedSpan, SpanRole};
    use proptest::prelude::*;

    fn tiny_tree() -> crate::conllu::DepTree {
        parse_conllu("1\tno\tno\tDET\t_\t_\t0\troot\t_\t_\n").unwrap()
    }

    fn pair(id: &str, label: Label) -> ParsedPair {
        ParsedPair {
            nli: NliPair {
                id: id.into(),
                source: "t".into(),
                premise: "no".into(),
                hypothesis: "no".into(),
                label,
            },
            premise_tree: tiny_tree(),
            hypothesis_tree: tiny_tree(),
        }
    }

    fn diag(id: &str, source: &str, category: NegCategory) -> DiagRecord {
        DiagRecord {
            pair: pair(id, Label::Neutral),
            source_id: source.into(),
            assignment: CategoryAssignment {
                category,
                matched_span: MatchedSpan::Premise,
                all_matches: vec![(SpanRole::Premise, category)],
                ambiguous: false,
            },
            synonym_used: (id != source).then(|| "syn".into()),
        }
    }

    #[test]
    fn quota() {
        assert_eq!(test_quota(3, 1.0 / 3.0), 1);
        assert_eq!(test_quota(6, 1.0 / 3.0), 2);
        assert_eq!(test_quota(7, 1.0 / 3.0), 3);
        assert_eq!(test_quota(0, 1.0 / 3.0), 0);
        for n in 0..5000 {
            assert_eq!(test_quota(n, 1.0 / 3.0), n.div_ceil(3), "n = {n}");
        }
    }

    #[test]
    fn three_singletons_one_test() {
        let records = vec![
            diag("a", "a", NegCategory::L),
            diag("b", "b", NegCategory::L),
            diag("c", "c", NegCategory::L),
        ];
        let split = split_diagnostics(records, 1.0 / 3.0, 42).unwrap();
        assert_eq!(split[&NegCategory::L].test.len(), 1);
        assert_eq!(split[&NegCategory::L].train.len(), 2);
        assert!(split[&NegCategory::PO].test.is_empty());
    }

    #[test]
    fn groups_are_atomic() {
        let mut records = vec![
            diag("a", "a", NegCategory::PR),
            diag("b", "b", NegCategory::PR),
        ];
        for s in ["x", "y", "z"] {
            records.push(diag(&format!("a~{s}"), "a", NegCategory::PR));
        }
        records.push(diag("b~x", "b", NegCategory::PR));
        for seed in 0..20 {
            let split = split_diagnostics(records.clone(), 1.0 / 3.0, seed).unwrap();
            let pr = &split[&NegCategory::PR];
            let test_sources: std::collections::BTreeSet<&str> =
                pr.test.iter().map(|r| r.source_id.as_str()).collect();
            assert_eq!(test_sources.len(), 1);
            assert!(pr.test.len() == 4 || pr.test.len() == 2);
            assert_eq!(pr.test.len() + pr.train.len(), 6);
        }
    }

    #[test]
    fn split_is_deterministic() {
        let records: Vec<_> = (0..30)
            .map(|i| diag(&format!("r{i}"), &format!("r{i}"), NegCategory::ALL[i % 7]))
            .collect();
        let mut reversed = records.clone();
        reversed.reverse();
        let a = split_diagnostics(records, 1.0 / 3.0, 42).unwrap();
        let b = split_diagnostics(reversed, 1.0 / 3.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_test_frac() {
        assert!(matches!(
            split_diagnostics(vec![], 1.0, 1),
            Err(Error::InvalidTestFrac(_))
        ));
        assert!(split_diagnostics(vec![], 0.0, 1).is_err());
    }

    fn balanced_pool(per_label: usize) -> Vec<ParsedPair> {
        Label::ALL
            .iter()
            .flat_map(|l| (0..per_label).map(move |i| pair(&format!("{l}-{i:05}"), *l)))
            .collect()
    }

    #[test]
    fn dev_of_three() {
        let (train, dev) = carve_dev(balanced_pool(1), 3, 42).unwrap();
        assert!(train.is_empty());
        assert_eq!(dev.len(), 3);
    }

    #[test]
    fn dev_errors() {
        assert!(matches!(
            carve_dev(balanced_pool(2), 4, 42),
            Err(Error::InvalidDevSize(4))
        ));
        let mut pool = balanced_pool(3);
        pool.retain(|p| !(p.label() == Label::Contradiction && p.id().ends_with('2')));
        let err = carve_dev(pool, 9, 42).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientLabel {
                label: Label::Contradiction,
                available: 2,
                required: 3
            }
        ));
        let (train, dev) = carve_dev(Vec::new(), 0, 1).unwrap();
        assert!(train.is_empty() && dev.is_empty());
    }

    #[test]
    fn undersample_to_min() {
        let sets: BTreeMap<NegCategory, Vec<u32>> = [
            (NegCategory::PO, (0..10).collect()),
            (NegCategory::PR, (0..4).collect()),
        ]
        .into();
        let out = undersample(sets.clone(), 42);
        assert_eq!(out[&NegCategory::PO].len(), 4);
        assert_eq!(out[&NegCategory::PR], sets[&NegCategory::PR]);
        assert!(out[&NegCategory::PO].windows(2).all(|w| w[0] < w[1]));
        assert_eq!(out, undersample(sets, 42));

        let equal: BTreeMap<NegCategory, Vec<u32>> =
            [(NegCategory::L, vec![1, 2]), (NegCategory::I, vec![3, 4])].into();
        assert_eq!(undersample(equal.clone(), 9), equal);
    }

    proptest! {
        #[test]
        fn dev_is_balanced_and_disjoint(
            counts in prop::array::uniform3(0usize..12),
            per_label in 0usize..6,
            seed in any::<u64>(),
        ) {
            let pool: Vec<ParsedPair> = Label::ALL
                .iter()
                .zip(counts)
                .flat_map(|(l, n)| (0..n).map(move |i| pair(&format!("{l}-{i}"), *l)))
                .collect();
            let total = pool.len();
            match carve_dev(pool, per_label * 3, seed) {
                Ok((train, dev)) => {
                    prop_assert!(counts.iter().all(|&c| c >= per_label));
                    for l in Label::ALL {
                        prop_assert_eq!(dev.iter().filter(|p| p.label() == l).count(), per_label);
                    }
                    prop_assert_eq!(train.len() + dev.len(), total);
                    prop_assert!(train.iter().all(|t| dev.iter().all(|d| d.id() != t.id())));
                }
                Err(Error::InsufficientLabel { .. }) => {
                    prop_assert!(counts.iter().any(|&c| c < per_label));
                }
                Err(e) => prop_assert!(false, "unexpected error {}", e),
            }
        }
    }
}
