//! Synonym substitution for sparse categories.
//!
//! When the root word of one span also occurs in the other span, every
//! same-POS WordNet synonym of it yields a variant pair with the word
//! replaced in both spans. Trees are patched in place (form and lemma only)
//! and a variant is kept only if it still classifies to the source category.

use crate::conllu::{DepTree, Token};
use crate::corpus::{DiagRecord, NliPair, ParsedPair};
use crate::par;
use crate::rules::{assign_trees, CategoryAssignment, NegCategory, SpanRole};
use crate::wordnet::SynsetLexicon;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedPair {
    pub pair: ParsedPair,
    pub source_id: String,
    pub synonym_used: String,
    pub assignment: CategoryAssignment,
}

impl AugmentedPair {
    pub fn category(&self) -> NegCategory {
        self.assignment.category
    }
}

impl From<AugmentedPair> for DiagRecord {
    fn from(a: AugmentedPair) -> Self {
        DiagRecord {
            pair: a.pair,
            source_id: a.source_id,
            assignment: a.assignment,
            synonym_used: Some(a.synonym_used),
        }
    }
}

/// The root of either span whose lemma also appears in the other span,
/// premise root first.
pub fn shared_root(pair: &ParsedPair) -> Option<(SpanRole, &Token)> {
    let contains_lemma =
        |tree: &DepTree, lemma: &str| tree.tokens().iter().any(|t| t.lemma == lemma);

    let premise_root = pair.premise_tree.root();
    if contains_lemma(&pair.hypothesis_tree, &premise_root.lemma) {
        return Some((SpanRole::Premise, premise_root));
    }
    let hypothesis_root = pair.hypothesis_tree.root();
    if contains_lemma(&pair.premise_tree, &hypothesis_root.lemma) {
        return Some((SpanRole::Hypothesis, hypothesis_root));
    }
    None
}

fn starts_uppercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Length in bytes of a case-insensitive match of `word` at the start of
/// `text`, if any.
fn match_len(text: &str, word: &str) -> Option<usize> {
    let mut text_chars = text.char_indices();
    let mut end = 0;
    for w in word.chars() {
        let (i, t) = text_chars.next()?;
        if !t.to_lowercase().eq(w.to_lowercase()) {
            return None;
        }
        end = i + t.len_utf8();
    }
    Some(end)
}

/// Replaces every whole-word, case-insensitive occurrence of `word`. A
/// capitalized occurrence gets a capitalized replacement.
pub fn replace_word(text: &str, word: &str, replacement: &str) -> (String, usize) {
    if word.is_empty() {
        return (text.to_string(), 0);
    }
    let mut out = String::with_capacity(text.len());
    let mut count = 0;
    let mut pos = 0;
    let mut prev: Option<char> = None;

    while pos < text.len() {
        let rest = &text[pos..];
        if !prev.is_some_and(is_word_char) {
            if let Some(len) = match_len(rest, word) {
                let next = rest[len..].chars().next();
                if !next.is_some_and(is_word_char) {
                    let found = &rest[..len];
                    if starts_uppercase(found) {
                        out.push_str(&capitalize(replacement));
                    } else {
                        out.push_str(replacement);
                    }
                    count += 1;
                    prev = found.chars().last();
                    pos += len;
                    continue;
                }
            }
        }
        let c = rest.chars().next().expect("pos is on a char boundary");
        out.push(c);
        prev = Some(c);
        pos += c.len_utf8();
    }
    (out, count)
}

fn patch_tree(tree: &DepTree, text: String, target: &str, synonym: &str) -> DepTree {
    let patches: Vec<(usize, String, String)> = tree
        .tokens()
        .iter()
        .filter(|t| t.lower_form() == target)
        .map(|t| {
            let form = if starts_uppercase(&t.form) {
                capitalize(synonym)
            } else {
                synonym.to_string()
            };
            (t.index, form, synonym.to_string())
        })
        .collect();
    tree.patched(text, &patches)
}

/// All surviving synonym variants of one tagged pair, ordered by synonym.
pub fn augment_pair(record: &DiagRecord, lex: &SynsetLexicon) -> Vec<AugmentedPair> {
    let pair = &record.pair;
    let Some((_, root)) = shared_root(pair) else {
        return Vec::new();
    };
    let target = root.lower_form();
    let category = record.category();

    lex.synonyms(&root.lemma, &root.upos)
        .iter()
        .filter_map(|synonym| {
            let (premise, n_p) = replace_word(&pair.nli.premise, &target, synonym);
            let (hypothesis, n_h) = replace_word(&pair.nli.hypothesis, &target, synonym);
            if n_p + n_h == 0 {
                return None;
            }
            let premise_tree = patch_tree(&pair.premise_tree, premise.clone(), &target, synonym);
            let hypothesis_tree =
                patch_tree(&pair.hypothesis_tree, hypothesis.clone(), &target, synonym);

            let assignment = assign_trees(&premise_tree, &hypothesis_tree)
                .assignment()
                .filter(|a| a.category == category)?
                .clone();

            Some(AugmentedPair {
                pair: ParsedPair {
                    nli: NliPair {
                        id: format!("{}~{}", record.source_id, synonym),
                        source: pair.nli.source.clone(),
                        premise,
                        hypothesis,
                        label: pair.nli.label,
                    },
                    premise_tree,
                    hypothesis_tree,
                },
                source_id: record.source_id.clone(),
                synonym_used: synonym.clone(),
                assignment,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryAugmentation {
    pub variants: Vec<AugmentedPair>,
    /// Records ran out before reaching the target.
    pub target_unreachable: bool,
}

/// Augments records of one category, in input order, until originals plus
/// variants reach `target`.
pub fn augment_category(
    records: &[DiagRecord],
    lex: &SynsetLexicon,
    target: usize,
) -> CategoryAugmentation {
    if records.len() >= target {
        return CategoryAugmentation::default();
    }
    let needed = target - records.len();
    let per_record = par::map(records, |r| augment_pair(r, lex));
    let variants: Vec<AugmentedPair> = per_record.into_iter().flatten().take(needed).collect();
    CategoryAugmentation {
        target_unreachable: variants.len() < needed,
        variants,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;
    use crate::corpus::Label;
    use crate::rules::assign_pair;
    use crate::wordnet::{load_wordnet, WordNetPos};
    use proptest::prelude::*;

    fn tree(rel: &str) -> DepTree {
        let path = format!("{}/fixtures/{rel}.conllu", env!("CARGO_MANIFEST_DIR"));
        parse_conllu(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn record(id: &str, premise: &str, hypothesis: &str) -> DiagRecord {
        let (p, h) = (tree(premise), tree(hypothesis));
        let pair = ParsedPair {
            nli: NliPair {
                id: id.into(),
                source: "test".into(),
                premise: p.text().into(),
                hypothesis: h.text().into(),
                label: Label::Entailment,
            },
            premise_tree: p,
            hypothesis_tree: h,
        };
        let assignment = assign_pair(&pair).assignment().unwrap().clone();
        DiagRecord::original(pair, assignment)
    }

    fn mini_wordnet() -> SynsetLexicon {
        load_wordnet(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/wordnet"))
            .unwrap()
    }

    #[test]
    fn shared_root_cases() {
        let l = record("l", "golden/l_premise", "golden/l_hypothesis");
        let (role, root) = shared_root(&l.pair).unwrap();
        assert_eq!(role, SpanRole::Premise);
        assert_eq!(root.form, "orders");

        let ep = record("ep", "golden/ep_premise", "golden/r_premise");
        assert!(shared_root(&ep.pair).is_none());

        // "I" is shared but neither root ("know", "want") occurs on the other side.
        let shared_pronoun = record("x", "golden/ep_premise", "golden/r_hypothesis");
        assert!(shared_pronoun
            .pair
            .premise_tree
            .tokens()
            .iter()
            .any(|t| t.lemma == "i"));
        assert!(shared_root(&shared_pronoun.pair).is_none());
    }

    #[test]
    fn labeling_pair_variants() {
        let l = record("l", "golden/l_premise", "golden/l_hypothesis");
        let variants = augment_pair(&l, &mini_wordnet());
        let synonyms: Vec<&str> = variants.iter().map(|v| v.synonym_used.as_str()).collect();
        assert_eq!(synonyms, vec!["command", "decree", "edict"]);
        let v = &variants[0];
        assert_eq!(v.pair.nli.premise, "Not command, no.");
        assert_eq!(v.pair.nli.hypothesis, "It is not command.");
        assert_eq!(v.pair.id(), "l~command");
        assert_eq!(v.category(), NegCategory::L);
        assert_eq!(v.pair.label(), Label::Entailment);
        assert_eq!(v.pair.hypothesis_tree.root().form, "command");
        assert_eq!(v.pair.hypothesis_tree.text(), "It is not command.");
    }

    #[test]
    fn exclusion_list_synonym_is_dropped() {
        let pr = record("pr", "rules/prohibition_wish", "rules/wish_plain");
        assert_eq!(pr.category(), NegCategory::PR);
        let lex = mini_wordnet();
        assert!(lex.synonyms("wish", "VERB").contains("want"));
        let variants = augment_pair(&pr, &lex);
        let synonyms: Vec<&str> = variants.iter().map(|v| v.synonym_used.as_str()).collect();
        assert_eq!(synonyms, vec!["hope"]);
        assert_eq!(variants[0].pair.nli.premise, "Don't hope for it.");
    }

    #[test]
    fn no_synonyms_no_variants() {
        let l = record("l", "golden/l_premise", "golden/l_hypothesis");
        assert!(augment_pair(&l, &SynsetLexicon::default()).is_empty());
        let out = augment_category(&[l], &SynsetLexicon::default(), 10);
        assert!(out.variants.is_empty());
        assert!(out.target_unreachable);
    }

    #[test]
    fn category_target_accounting() {
        let lex = SynsetLexicon::from_synsets([
            (WordNetPos::Noun, vec!["order", "command", "bidding"]),
            (WordNetPos::Verb, vec!["run", "scat", "scamper"]),
        ]);
        let a = record("a", "golden/l_premise", "golden/l_hypothesis");
        let b = record("b", "rules/prohibition_run", "rules/run_plain");
        assert_eq!(augment_pair(&a, &lex).len(), 2);
        assert_eq!(augment_pair(&b, &lex).len(), 2);

        let records = vec![a, b];
        let out = augment_category(&records, &lex, records.len() + 3);
        assert_eq!(out.variants.len(), 3);
        assert!(!out.target_unreachable);
        let ids: Vec<&str> = out.variants.iter().map(|v| v.pair.id()).collect();
        assert_eq!(ids, vec!["a~bidding", "a~command", "b~scamper"]);

        assert!(augment_category(&records, &lex, 2).variants.is_empty());
        assert!(augment_category(&records, &lex, 1).variants.is_empty());

        let short = augment_category(&records, &lex, 100);
        assert_eq!(short.variants.len(), 4);
        assert!(short.target_unreachable);
    }

    #[test]
    fn replace_word_boundaries_and_case() {
        assert_eq!(
            replace_word("Orders are orders; reorders", "orders", "commands"),
            ("Commands are commands; reorders".to_string(), 2)
        );
        assert_eq!(
            replace_word("run-run", "run", "go"),
            ("go-go".to_string(), 2)
        );
        assert_eq!(
            replace_word("running", "run", "go"),
            ("running".to_string(), 0)
        );
        assert_eq!(replace_word("", "run", "go"), (String::new(), 0));
    }

    proptest! {
        #[test]
        fn variants_keep_label_category_and_shape(
            words in prop::collection::btree_set("[a-z]{3,9}", 0..6),
        ) {
            let mut members = vec!["order".to_string()];
            members.extend(words.iter().cloned());
            let lex = SynsetLexicon::from_synsets([(
                WordNetPos::Noun,
                members.iter().map(String::as_str).collect::<Vec<_>>(),
            )]);
            let l = record("l", "golden/l_premise", "golden/l_hypothesis");
            let variants = augment_pair(&l, &lex);
            prop_assert_eq!(&variants, &augment_pair(&l, &lex));
            for v in &variants {
                prop_assert_eq!(v.pair.label(), l.pair.label());
                prop_assert_eq!(assign_pair(&v.pair).category(), Some(l.category()));
                for (tree, orig) in [
                    (&v.pair.premise_tree, &l.pair.premise_tree),
                    (&v.pair.hypothesis_tree, &l.pair.hypothesis_tree),
                ] {
                    prop_assert_eq!(tree.len(), orig.len());
                    for (t, o) in tree.tokens().iter().zip(orig.tokens()) {
                        if t.form != o.form {
                            prop_assert!(tree.text().contains(&t.form));
                        }
                    }
                }
            }
        }
    }
}
