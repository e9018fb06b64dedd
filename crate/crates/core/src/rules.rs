//! Negation marker detection and the seven developmental negation
//! categories.
//!
//! Each rule is a predicate over a tree and one marker index. "X directly
//! modifies Y" means X is a dependency child of Y; "immediately before"
//! refers to the previous kept token.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conllu::DepTree;
use crate::corpus::ParsedPair;

const MARKERS: [&str; 4] = ["no", "not", "n't", "n\u{2019}t"];

/// Root lemmas that anchor another category; a prohibition root must not be
/// one of these.
pub const PROHIBITION_EXCLUDED_ROOTS: [&str; 6] =
    ["like", "want", "have", "remember", "know", "think"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NegCategory {
    /// Possession
    PO,
    /// Existence
    EX,
    /// Labeling
    L,
    /// Prohibition
    PR,
    /// Inability
    I,
    /// Epistemic
    EP,
    /// Rejection
    R,
}

impl NegCategory {
    /// Canonical precedence order.
    pub const ALL: [NegCategory; 7] = [
        NegCategory::PO,
        NegCategory::EX,
        NegCategory::L,
        NegCategory::PR,
        NegCategory::I,
        NegCategory::EP,
        NegCategory::R,
    ];

    pub fn code(self) -> &'static str {
        match self {
            NegCategory::PO => "PO",
            NegCategory::EX => "EX",
            NegCategory::L => "L",
            NegCategory::PR => "PR",
            NegCategory::I => "I",
            NegCategory::EP => "EP",
            NegCategory::R => "R",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NegCategory::PO => "Possession",
            NegCategory::EX => "Existence",
            NegCategory::L => "Labeling",
            NegCategory::PR => "Prohibition",
            NegCategory::I => "Inability",
            NegCategory::EP => "Epistemic",
            NegCategory::R => "Rejection",
        }
    }

    /// Position in the precedence order.
    pub fn rank(self) -> usize {
        self as usize
    }

    /// The rule predicate for this category.
    pub fn rule(self) -> fn(&DepTree, usize) -> bool {
        match self {
            NegCategory::PO => rule_possession,
            NegCategory::EX => rule_existence,
            NegCategory::L => rule_labeling,
            NegCategory::PR => rule_prohibition,
            NegCategory::I => rule_inability,
            NegCategory::EP => rule_epistemic,
            NegCategory::R => rule_rejection,
        }
    }
}

impl fmt::Display for NegCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for NegCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NegCategory::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown negation category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanRole {
    Premise,
    Hypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchedSpan {
    Premise,
    Hypothesis,
    Both,
}

/// Category chosen for a pair, together with every span-level match that
/// fired so other tie-breaking policies can be replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryAssignment {
    pub category: NegCategory,
    pub matched_span: MatchedSpan,
    pub all_matches: Vec<(SpanRole, NegCategory)>,
    pub ambiguous: bool,
}

/// Result of classifying a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairOutcome {
    Tagged(CategoryAssignment),
    /// Neither span carries an explicit marker.
    NoNegation,
    /// A marker is present but no rule fired.
    NegatedUnmatched,
}

impl PairOutcome {
    pub fn assignment(&self) -> Option<&CategoryAssignment> {
        match self {
            PairOutcome::Tagged(a) => Some(a),
            _ => None,
        }
    }

    pub fn category(&self) -> Option<NegCategory> {
        self.assignment().map(|a| a.category)
    }
}

pub fn is_negation_marker(form: &str) -> bool {
    let lower = form.to_lowercase();
    MARKERS.contains(&lower.as_str())
}

/// Indices (ascending) of every explicit negation marker.
pub fn find_negation_markers(tree: &DepTree) -> Vec<usize> {
    tree.tokens()
        .iter()
        .filter(|t| is_negation_marker(&t.form))
        .map(|t| t.index)
        .collect()
}

fn root_has_do_child(tree: &DepTree) -> bool {
    tree.children(tree.root().index).any(|t| t.lemma == "do")
}

fn marker_modifies_root(tree: &DepTree, neg_idx: usize) -> bool {
    tree.token(neg_idx)
        .is_some_and(|t| t.head == tree.root().index)
}

fn preceding_token(tree: &DepTree, neg_idx: usize) -> Option<&crate::conllu::Token> {
    neg_idx.checked_sub(1).and_then(|i| tree.token(i))
}

pub fn rule_possession(tree: &DepTree, neg_idx: usize) -> bool {
    let root = tree.root();
    let root_form = root.lower_form();
    (root.lemma == "have" || matches!(root_form.as_str(), "has" | "had" | "have"))
        && marker_modifies_root(tree, neg_idx)
        && root_has_do_child(tree)
}

pub fn rule_existence(tree: &DepTree, neg_idx: usize) -> bool {
    let there_before = tree
        .tokens()
        .iter()
        .any(|t| t.index < neg_idx && t.lower_form() == "there");
    there_before
        && tree
            .head_of(neg_idx)
            .is_some_and(|h| matches!(h.upos.as_str(), "NOUN" | "PROPN" | "DET" | "ADV"))
}

pub fn rule_labeling(tree: &DepTree, _neg_idx: usize) -> bool {
    let root = tree.root();
    let starts_right = tree
        .token(1)
        .is_some_and(|t| matches!(t.lower_form().as_str(), "that" | "it"));
    starts_right
        && matches!(root.upos.as_str(), "NOUN" | "PROPN")
        && tree
            .children(root.index)
            .any(|t| matches!(t.lower_form().as_str(), "is" | "'s" | "\u{2019}s"))
}

pub fn rule_prohibition(tree: &DepTree, neg_idx: usize) -> bool {
    let root = tree.root();
    preceding_token(tree, neg_idx).is_some_and(|t| t.lemma == "do")
        && !tree.children(root.index).any(|t| t.deprel.contains("subj"))
        && !PROHIBITION_EXCLUDED_ROOTS.contains(&root.lemma.as_str())
}

pub fn rule_inability(tree: &DepTree, neg_idx: usize) -> bool {
    marker_modifies_root(tree, neg_idx)
        && preceding_token(tree, neg_idx)
            .is_some_and(|t| matches!(t.lower_form().as_str(), "can" | "could"))
}

pub fn rule_epistemic(tree: &DepTree, _neg_idx: usize) -> bool {
    matches!(tree.root().lemma.as_str(), "remember" | "know" | "think") && root_has_do_child(tree)
}

pub fn rule_rejection(tree: &DepTree, neg_idx: usize) -> bool {
    matches!(tree.root().lemma.as_str(), "like" | "want") && marker_modifies_root(tree, neg_idx)
}

/// First category in precedence order whose rule fires for some marker.
pub fn classify_span(tree: &DepTree) -> Option<NegCategory> {
    let markers = find_negation_markers(tree);
    if markers.is_empty() {
        return None;
    }
    NegCategory::ALL
        .into_iter()
        .find(|cat| markers.iter().any(|&m| cat.rule()(tree, m)))
}

pub fn assign_pair(pair: &ParsedPair) -> PairOutcome {
    assign_trees(&pair.premise_tree, &pair.hypothesis_tree)
}

pub fn assign_trees(premise: &DepTree, hypothesis: &DepTree) -> PairOutcome {
    let spans = [
        (SpanRole::Premise, premise),
        (SpanRole::Hypothesis, hypothesis),
    ];
    let all_matches: Vec<(SpanRole, NegCategory)> = spans
        .iter()
        .filter_map(|(role, tree)| classify_span(tree).map(|c| (*role, c)))
        .collect();

    let Some(category) = all_matches.iter().map(|(_, c)| *c).min() else {
        let negated = spans
            .iter()
            .any(|(_, tree)| !find_negation_markers(tree).is_empty());
        return if negated {
            PairOutcome::NegatedUnmatched
        } else {
            PairOutcome::NoNegation
        };
    };

    let on_premise = all_matches.contains(&(SpanRole::Premise, category));
    let on_hypothesis = all_matches.contains(&(SpanRole::Hypothesis, category));
    let matched_span = match (on_premise, on_hypothesis) {
        (true, true) => MatchedSpan::Both,
        (true, false) => MatchedSpan::Premise,
        _ => MatchedSpan::Hypothesis,
    };
    let ambiguous = all_matches.iter().any(|(_, c)| *c != category);

    PairOutcome::Tagged(CategoryAssignment {
        category,
        matched_span,
        all_matches,
        ambiguous,
    })
}
