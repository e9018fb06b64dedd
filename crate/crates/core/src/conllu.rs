//! Dependency trees read from CoNLL-U sentence blocks.
//!
//! Only syntactic words (integer IDs) are kept: multiword-token ranges such
//! as `3-4` and empty nodes such as `3.1` are skipped, so a negation clitic
//! like `n't` is always its own token. Linear order ("immediately before")
//! is the order of the kept tokens.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConlluError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("sentence has no root token")]
    NoRoot,
    #[error("sentence has multiple root tokens: {roots:?}")]
    MultipleRoots { roots: Vec<usize> },
    #[error("token {token} has head {head}, which is not a token of the sentence")]
    DanglingHead { token: usize, head: usize },
    #[error("head relation is cyclic at token {token}")]
    CyclicHeads { token: usize },
    #[error("token {token}: expected index {expected}")]
    NonSequentialIndex { token: usize, expected: usize },
}

/// One syntactic word of a parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    /// Lowercase lemma.
    pub lemma: String,
    pub upos: String,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn lower_form(&self) -> String {
        self.form.to_lowercase()
    }

    pub fn is_root(&self) -> bool {
        self.head == 0
    }
}

/// A validated dependency tree: exactly one root, every head in range, no
/// cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    tokens: Vec<Token>,
    text: String,
    root: usize,
}

impl DepTree {
    /// Validates `tokens` and builds a tree. Token indices must run 1..=n in
    /// order.
    pub fn new(tokens: Vec<Token>, text: impl Into<String>) -> Result<Self, ConlluError> {
        for (pos, token) in tokens.iter().enumerate() {
            if token.index != pos + 1 {
                return Err(ConlluError::NonSequentialIndex {
                    token: token.index,
                    expected: pos + 1,
                });
            }
            if token.head > tokens.len() {
                return Err(ConlluError::DanglingHead {
                    token: token.index,
                    head: token.head,
                });
            }
            if token.head == token.index {
                return Err(ConlluError::CyclicHeads { token: token.index });
            }
        }

        let roots: Vec<usize> = tokens
            .iter()
            .filter(|t| t.head == 0)
            .map(|t| t.index)
            .collect();
        let root = match roots.as_slice() {
            [] => return Err(ConlluError::NoRoot),
            [root] => *root,
            _ => return Err(ConlluError::MultipleRoots { roots }),
        };

        // Every token must reach the root within n steps.
        for token in &tokens {
            let mut current = token.index;
            let mut steps = 0;
            while current != 0 {
                if steps > tokens.len() {
                    return Err(ConlluError::CyclicHeads { token: token.index });
                }
                current = tokens[current - 1].head;
                steps += 1;
            }
        }

        Ok(DepTree {
            tokens,
            text: text.into(),
            root,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Replaces the sentence text, keeping the tokens.
    pub fn with_text(mut self, text: impl Into<String>) -> DepTree {
        self.text = text.into();
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, idx: usize) -> Option<&Token> {
        idx.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn root(&self) -> &Token {
        &self.tokens[self.root - 1]
    }

    /// The governing token of `idx`, `None` for the root.
    pub fn head_of(&self, idx: usize) -> Option<&Token> {
        self.token(idx).and_then(|t| self.token(t.head))
    }

    /// Dependents of `idx` in sentence order.
    pub fn children(&self, idx: usize) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(move |t| t.head == idx)
    }

    /// Rewrites the text and the form/lemma of the given tokens. Structure is
    /// untouched, so the tree stays valid.
    pub(crate) fn patched(&self, text: String, patches: &[(usize, String, String)]) -> DepTree {
        let mut tokens = self.tokens.clone();
        for (idx, form, lemma) in patches {
            let token = &mut tokens[idx - 1];
            token.form = form.clone();
            token.lemma = lemma.clone();
        }
        DepTree {
            tokens,
            text,
            root: self.root,
        }
    }

    /// Serializes the tree as a CoNLL-U block with a `# text` comment.
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# text = {}", self.text);
        for t in &self.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index, t.form, t.lemma, t.upos, t.head, t.deprel
            );
        }
        out
    }
}

/// Parses one CoNLL-U sentence block.
///
/// A `# text = ...` comment becomes the tree text; without one, the text is
/// rebuilt from the forms, honouring `SpaceAfter=No`.
pub fn parse_conllu(block: &str) -> Result<DepTree, ConlluError> {
    let mut tokens = Vec::new();
    let mut text = None;
    let mut rebuilt = String::new();

    for (lineno, raw) in block.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim_start().strip_prefix("text =") {
                text = Some(value.trim().to_string());
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::MalformedLine {
                line: line_no,
                reason: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: usize = id.parse().map_err(|_| ConlluError::MalformedLine {
            line: line_no,
            reason: format!("non-numeric ID {id:?}"),
        })?;
        if index == 0 {
            return Err(ConlluError::MalformedLine {
                line: line_no,
                reason: "token ID must be at least 1".into(),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| ConlluError::MalformedLine {
            line: line_no,
            reason: format!("non-numeric HEAD {:?}", cols[6]),
        })?;
        let form = cols[1];
        if form.is_empty() {
            return Err(ConlluError::MalformedLine {
                line: line_no,
                reason: "empty FORM".into(),
            });
        }
        let lemma = if cols[2] == "_" && form != "_" {
            form.to_lowercase()
        } else {
            cols[2].to_lowercase()
        };

        rebuilt.push_str(form);
        if !cols[9].split('|').any(|m| m == "SpaceAfter=No") {
            rebuilt.push(' ');
        }

        tokens.push(Token {
            index,
            form: form.to_string(),
            lemma,
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }

    let text = text.unwrap_or_else(|| rebuilt.trim_end().to_string());
    DepTree::new(tokens, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(idx: usize, form: &str, lemma: &str, upos: &str, head: usize, rel: &str) -> String {
        format!("{idx}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n")
    }

    #[test]
    fn single_token_sentence() {
        let tree = parse_conllu(&line(1, "no", "no", "DET", 0, "root")).unwrap();
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.root().index, 1);
        assert_eq!(tree.root().form, "no");
        assert_eq!(tree.children(1).count(), 0);
    }

    #[test]
    fn epistemic_premise_splits_clitic() {
        let tree = parse_conllu(include_str!("../fixtures/golden/ep_premise.conllu")).unwrap();
        assert_eq!(tree.len(), 6);
        assert_eq!(tree.root().form, "know");
        let kids: Vec<&str> = tree
            .children(tree.root().index)
            .map(|t| t.form.as_str())
            .collect();
        assert!(kids.contains(&"do"));
        assert!(kids.contains(&"n't"));
    }

    #[test]
    fn labeling_hypothesis_root_is_noun() {
        let tree = parse_conllu(include_str!("../fixtures/golden/l_hypothesis.conllu")).unwrap();
        assert_eq!(tree.root().form, "orders");
        assert_eq!(tree.text(), "It is not orders.");
    }

    #[test]
    fn chain_children() {
        let block = line(1, "a", "a", "X", 2, "dep")
            + &line(2, "b", "b", "X", 3, "dep")
            + &line(3, "c", "c", "X", 0, "root");
        let tree = parse_conllu(&block).unwrap();
        let kids: Vec<usize> = tree.children(2).map(|t| t.index).collect();
        assert_eq!(kids, vec![1]);
        assert_eq!(tree.root().index, 3);
    }

    #[test]
    fn mutual_heads_are_cyclic() {
        let block = line(1, "a", "a", "X", 2, "dep")
            + &line(2, "b", "b", "X", 1, "dep")
            + &line(3, "c", "c", "X", 0, "root");
        assert!(matches!(
            parse_conllu(&block),
            Err(ConlluError::CyclicHeads { .. })
        ));
    }

    #[test]
    fn self_head_is_cyclic() {
        let block = line(1, "a", "a", "X", 1, "dep") + &line(2, "b", "b", "X", 0, "root");
        assert_eq!(
            parse_conllu(&block),
            Err(ConlluError::CyclicHeads { token: 1 })
        );
    }

    #[test]
    fn root_errors() {
        let none = line(1, "a", "a", "X", 2, "dep") + &line(2, "b", "b", "X", 1, "dep");
        assert!(matches!(parse_conllu(&none), Err(ConlluError::NoRoot)));
        let two = line(1, "a", "a", "X", 0, "root") + &line(2, "b", "b", "X", 0, "root");
        assert_eq!(
            parse_conllu(&two),
            Err(ConlluError::MultipleRoots { roots: vec![1, 2] })
        );
        assert_eq!(parse_conllu("# text = \n"), Err(ConlluError::NoRoot));
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let err = parse_conllu("# c\n1\tno\tno\tDET\t0\troot\n").unwrap_err();
        assert!(matches!(err, ConlluError::MalformedLine { line: 2, .. }));
        let err = parse_conllu("x\tno\tno\tDET\t_\t_\t0\troot\t_\t_\n").unwrap_err();
        assert!(matches!(err, ConlluError::MalformedLine { line: 1, .. }));
        let err = parse_conllu("1\tno\tno\tDET\t_\t_\tzz\troot\t_\t_\n").unwrap_err();
        assert!(matches!(err, ConlluError::MalformedLine { line: 1, .. }));
        let err = parse_conllu(&line(1, "a", "a", "X", 5, "dep")).unwrap_err();
        assert_eq!(err, ConlluError::DanglingHead { token: 1, head: 5 });
    }

    #[test]
    fn skips_ranges_and_empty_nodes() {
        let block = "# text = don't go\n\
                     1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
                     1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
                     2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n\
                     2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
                     3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n";
        let tree = parse_conllu(block).unwrap();
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.token(2).unwrap().form, "n't");
    }

    #[test]
    fn lemma_fallback_and_rebuilt_text() {
        let block = "1\tDo\t_\tAUX\t_\t_\t3\taux\t_\tSpaceAfter=No\n\
                     2\tn't\t_\tPART\t_\t_\t3\tadvmod\t_\t_\n\
                     3\tRun\t_\tVERB\t_\t_\t0\troot\t_\tSpaceAfter=No\n\
                     4\t!\t_\tPUNCT\t_\t_\t3\tpunct\t_\t_\n";
        let tree = parse_conllu(block).unwrap();
        assert_eq!(tree.token(1).unwrap().lemma, "do");
        assert_eq!(tree.token(3).unwrap().lemma, "run");
        assert_eq!(tree.text(), "Don't Run!");
    }

    fn arb_tree() -> impl Strategy<Value = DepTree> {
        (1usize..12).prop_flat_map(|n| {
            let forms = prop::collection::vec("[A-Za-z']{1,8}", n);
            let lemmas = prop::collection::vec("[a-z]{1,8}", n);
            let upos = prop::collection::vec(
                prop::sample::select(vec!["NOUN", "VERB", "DET", "PART", "AUX", "PRON"]),
                n,
            );
            // Attach token k (in a shuffled order) to one of the earlier ones.
            let order = Just((1..=n).collect::<Vec<_>>()).prop_shuffle();
            let picks = prop::collection::vec(any::<prop::sample::Index>(), n);
            (forms, lemmas, upos, order, picks).prop_map(move |(f, l, u, order, picks)| {
                let mut heads = vec![0usize; n + 1];
                for k in 1..n {
                    heads[order[k]] = order[picks[k].index(k)];
                }
                let tokens = (1..=n)
                    .map(|i| Token {
                        index: i,
                        form: f[i - 1].clone(),
                        lemma: l[i - 1].clone(),
                        upos: u[i - 1].to_string(),
                        head: heads[i],
                        deprel: if heads[i] == 0 {
                            "root".into()
                        } else {
                            "dep".into()
                        },
                    })
                    .collect();
                let text = f.join(" ");
                DepTree::new(tokens, text).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn conllu_round_trip(tree in arb_tree()) {
            let back = parse_conllu(&tree.to_conllu()).unwrap();
            prop_assert_eq!(back, tree);
        }

        #[test]
        fn children_partition_tokens(tree in arb_tree()) {
            prop_assert_eq!(tree.tokens().iter().filter(|t| t.head == 0).count(), 1);
            let mut seen: Vec<usize> = vec![tree.root().index];
            for t in tree.tokens() {
                seen.extend(tree.children(t.index).map(|c| c.index));
            }
            seen.sort_unstable();
            prop_assert_eq!(seen, (1..=tree.len()).collect::<Vec<_>>());
        }
    }
}
