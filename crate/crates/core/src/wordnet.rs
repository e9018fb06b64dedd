//! Synonym lookup over a WordNet 3.x plain-text database.
//!
//! Reads `index.{noun,verb,adj,adv}` and `data.{noun,verb,adj,adv}`. Each
//! index lemma maps to the union of single-word lemmas of all its synsets.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("missing WordNet file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed index line: {reason}", .file.display())]
    MalformedIndexLine {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{}:{line}: malformed data line: {reason}", .file.display())]
    MalformedDataLine {
        file: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordNetPos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl WordNetPos {
    pub const ALL: [WordNetPos; 4] = [
        WordNetPos::Noun,
        WordNetPos::Verb,
        WordNetPos::Adj,
        WordNetPos::Adv,
    ];

    pub fn file_suffix(self) -> &'static str {
        match self {
            WordNetPos::Noun => "noun",
            WordNetPos::Verb => "verb",
            WordNetPos::Adj => "adj",
            WordNetPos::Adv => "adv",
        }
    }

    /// Maps a universal POS tag; tags without a WordNet counterpart map to
    /// `None`.
    pub fn from_upos(upos: &str) -> Option<Self> {
        match upos {
            "NOUN" | "PROPN" => Some(WordNetPos::Noun),
            "VERB" | "AUX" => Some(WordNetPos::Verb),
            "ADJ" => Some(WordNetPos::Adj),
            "ADV" => Some(WordNetPos::Adv),
            _ => None,
        }
    }
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynsetLexicon {
    entries: HashMap<(String, WordNetPos), BTreeSet<String>>,
    version: Option<String>,
}

impl SynsetLexicon {
    /// Builds a lexicon from explicit synsets, applying the same filtering as
    /// [`load_wordnet`].
    pub fn from_synsets<'a, I, S>(synsets: I) -> Self
    where
        I: IntoIterator<Item = (WordNetPos, S)>,
        S: IntoIterator<Item = &'a str>,
    {
        let mut lex = SynsetLexicon::default();
        for (pos, members) in synsets {
            let members: Vec<String> = members.into_iter().map(normalize_word).collect();
            for lemma in &members {
                if !is_single_word(lemma) {
                    continue;
                }
                let entry = lex.entries.entry((lemma.clone(), pos)).or_default();
                entry.extend(
                    members
                        .iter()
                        .filter(|m| is_single_word(m) && *m != lemma)
                        .cloned(),
                );
            }
        }
        lex
    }

    /// Same-POS synonyms of `lemma`, never including `lemma` itself.
    pub fn synonyms(&self, lemma: &str, upos: &str) -> &BTreeSet<String> {
        let Some(pos) = WordNetPos::from_upos(upos) else {
            return &EMPTY;
        };
        self.entries
            .get(&(lemma.to_lowercase(), pos))
            .unwrap_or(&EMPTY)
    }

    /// Version string found in the database headers, if any.
    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn is_single_word(lemma: &str) -> bool {
    !lemma.is_empty() && !lemma.contains(['_', ' '])
}

/// Lowercases and strips adjective syntactic markers such as `(a)`.
fn normalize_word(word: &str) -> String {
    let word = match word.find('(') {
        Some(pos) if word.ends_with(')') => &word[..pos],
        _ => word,
    };
    word.to_lowercase()
}

fn read(path: &Path) -> Result<String, WordNetError> {
    if !path.is_file() {
        return Err(WordNetError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| WordNetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// License header lines start with two spaces.
fn is_header(line: &str) -> bool {
    line.starts_with("  ") || line.trim().is_empty()
}

fn find_version(header: &str) -> Option<String> {
    let at = header.find("WordNet ")?;
    let rest = &header[at + "WordNet ".len()..];
    let version: String = rest
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '.')
        .collect();
    let version = version.trim_end_matches('.');
    (!version.is_empty()).then(|| version.to_string())
}

fn parse_data(
    path: &Path,
    version: &mut Option<String>,
) -> Result<HashMap<u64, Vec<String>>, WordNetError> {
    let content = read(path)?;
    let mut synsets = HashMap::new();
    for (lineno, line) in content.lines().enumerate() {
        if is_header(line) {
            if version.is_none() {
                *version = find_version(line);
            }
            continue;
        }
        let malformed = |reason: String| WordNetError::MalformedDataLine {
            file: path.to_path_buf(),
            line: lineno + 1,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(malformed("fewer than 4 fields".into()));
        }
        let offset: u64 = fields[0]
            .parse()
            .map_err(|_| malformed(format!("bad synset offset {:?}", fields[0])))?;
        let w_cnt = usize::from_str_radix(fields[3], 16)
            .map_err(|_| malformed(format!("bad word count {:?}", fields[3])))?;
        if w_cnt == 0 || fields.len() < 4 + 2 * w_cnt {
            return Err(malformed(format!("expected {w_cnt} word/lex_id pairs")));
        }
        let words = (0..w_cnt)
            .map(|i| normalize_word(fields[4 + 2 * i]))
            .collect();
        synsets.insert(offset, words);
    }
    Ok(synsets)
}

fn parse_index(
    path: &Path,
    pos: WordNetPos,
    synsets: &HashMap<u64, Vec<String>>,
    entries: &mut HashMap<(String, WordNetPos), BTreeSet<String>>,
) -> Result<(), WordNetError> {
    let content = read(path)?;
    for (lineno, line) in content.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let malformed = |reason: String| WordNetError::MalformedIndexLine {
            file: path.to_path_buf(),
            line: lineno + 1,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let count = |i: usize, what: &str| -> Result<usize, WordNetError> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| malformed(format!("missing or bad {what}")))
        };
        let synset_cnt = count(2, "synset_cnt")?;
        let p_cnt = count(3, "p_cnt")?;
        // lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt offsets...
        let first_offset = 4 + p_cnt + 2;
        if fields.len() != first_offset + synset_cnt {
            return Err(malformed(format!(
                "expected {} fields, found {}",
                first_offset + synset_cnt,
                fields.len()
            )));
        }

        let lemma = normalize_word(fields[0]);
        if !is_single_word(&lemma) {
            continue;
        }
        let mut synonyms = BTreeSet::new();
        for raw in &fields[first_offset..] {
            let offset: u64 = raw
                .parse()
                .map_err(|_| malformed(format!("bad synset offset {raw:?}")))?;
            let members = synsets
                .get(&offset)
                .ok_or_else(|| malformed(format!("offset {raw} not found in data file")))?;
            synonyms.extend(
                members
                    .iter()
                    .filter(|m| is_single_word(m) && **m != lemma)
                    .cloned(),
            );
        }
        entries.entry((lemma, pos)).or_default().extend(synonyms);
    }
    Ok(())
}

/// Loads every part of speech from a WordNet database directory.
pub fn load_wordnet(dir: &Path) -> Result<SynsetLexicon, WordNetError> {
    let mut entries = HashMap::new();
    let mut version = None;
    for pos in WordNetPos::ALL {
        let data = parse_data(
            &dir.join(format!("data.{}", pos.file_suffix())),
            &mut version,
        )?;
        parse_index(
            &dir.join(format!("index.{}", pos.file_suffix())),
            pos,
            &data,
            &mut entries,
        )?;
    }
    Ok(SynsetLexicon { entries, version })
}
