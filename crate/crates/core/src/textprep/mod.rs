//! Text normalization and the feature-side token pipeline:
//! normalize, tokenize, drop stopwords, stem.
//!
//! Sentiment scoring does not use this pipeline; it consumes [`normalize`]d
//! text with casing and punctuation intact.

mod porter;

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::stem;

const STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Negators are kept in feature streams even when a stoplist names them.
pub const NEGATORS: [&str; 4] = ["no", "not", "nor", "never"];

/// Ordered lowercase tokens. No token is empty or contains whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    /// Builds a stream, dropping empty tokens and splitting any token on
    /// interior whitespace.
    pub fn new<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let tokens = tokens
            .into_iter()
            .flat_map(|t| {
                t.as_ref()
                    .split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
            })
            .collect();
        TokenStream { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_url_start(chars: &[char], i: usize) -> bool {
    let rest: String = chars[i..].iter().take(8).collect::<String>().to_lowercase();
    rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.")
}

/// Social-media cleanup: drops URLs and @mentions, strips the `#` from
/// hashtags and collapses whitespace. Casing and other punctuation are kept.
pub fn normalize(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let at_boundary = i == 0 || !chars[i - 1].is_alphanumeric();
        if at_boundary && is_url_start(&chars, i) {
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            continue;
        }
        let next_word = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric() || *n == '_');
        if c == '@' && at_boundary && next_word {
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            continue;
        }
        if c == '#' && next_word {
            i += 1;
            continue;
        }
        out.push(c);
        i += 1;
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits on runs of non-alphanumeric characters, keeping apostrophes that
/// sit between two alphanumerics (`don't`), and lowercases.
pub fn tokenize(text: &str) -> TokenStream {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if is_apostrophe(c) && !cur.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push('\'');
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    TokenStream { tokens }
}

/// A set of lowercase words to drop from feature streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    /// Builds a stoplist; negators are always exempt.
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty() && !NEGATORS.contains(&w.as_str()))
            .collect();
        Stoplist { words }
    }

    pub fn empty() -> Self {
        Stoplist {
            words: HashSet::new(),
        }
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// The bundled 100-word English stoplist, minus negators.
pub fn default_stoplist() -> &'static Stoplist {
    static LIST: OnceLock<Stoplist> = OnceLock::new();
    LIST.get_or_init(|| Stoplist::new(STOPWORDS.lines()))
}

/// Loads a stoplist file with one word per line.
pub fn load_stoplist(path: impl AsRef<Path>) -> Result<Stoplist> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(Stoplist::new(src.lines()))
}

pub fn remove_stopwords(ts: &TokenStream, stoplist: &Stoplist) -> TokenStream {
    TokenStream {
        tokens: ts
            .iter()
            .filter(|t| !stoplist.contains(t))
            .map(str::to_string)
            .collect(),
    }
}

pub fn stem_stream(ts: &TokenStream) -> TokenStream {
    TokenStream {
        tokens: ts.iter().map(stem).collect(),
    }
}

/// normalize, tokenize, drop stopwords, stem, in that order.
pub fn preprocess_for_features(text: &str, stoplist: &Stoplist) -> TokenStream {
    let ts = tokenize(&normalize(text));
    stem_stream(&remove_stopwords(&ts, stoplist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(items: &[&str]) -> TokenStream {
        TokenStream::new(items.iter().copied())
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("see https://x.co now"), "see now");
        assert_eq!(normalize("#stress @bob hi"), "stress hi");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("  a \t\n b  "), "a b");
        assert_eq!(normalize("go to www.cdc.gov/heart."), "go to");
        assert_eq!(normalize("(HTTPS://Example.com/x) ok"), "( ok");
        assert_eq!(normalize("mail bob@example.com"), "mail bob@example.com");
        assert_eq!(normalize("Heart ATTACK!!"), "Heart ATTACK!!");
        assert_eq!(normalize("# alone"), "# alone");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Don't stop!"), toks(&["don't", "stop"]));
        assert_eq!(tokenize("heart-attack"), toks(&["heart", "attack"]));
        assert_eq!(tokenize("A a A"), toks(&["a", "a", "a"]));
        assert_eq!(tokenize("'quoted' rock'n'roll"), toks(&["quoted", "rock'n'roll"]));
        assert_eq!(tokenize("it\u{2019}s :) 10%"), toks(&["it's", "10"]));
        assert!(tokenize("...").is_empty());
    }

    #[test]
    fn stopword_examples() {
        let sl = default_stoplist();
        assert_eq!(
            remove_stopwords(&toks(&["the", "pain", "is", "bad"]), sl),
            toks(&["pain", "bad"])
        );
        let ts = toks(&["the", "pain"]);
        assert_eq!(remove_stopwords(&ts, &Stoplist::empty()), ts);
        assert_eq!(
            remove_stopwords(&toks(&["not", "good"]), sl),
            toks(&["not", "good"])
        );
        assert_eq!(
            remove_stopwords(&toks(&["no", "nor", "never"]), sl),
            toks(&["no", "nor", "never"])
        );
    }

    #[test]
    fn shipped_stoplist_has_one_hundred_words() {
        let words: Vec<&str> = STOPWORDS.lines().filter(|l| !l.trim().is_empty()).collect();
        assert_eq!(words.len(), 100);
        let unique: HashSet<&str> = words.iter().copied().collect();
        assert_eq!(unique.len(), 100);
        assert!(words.iter().all(|w| *w == w.to_lowercase()));
        let negators_in_file = words.iter().filter(|w| NEGATORS.contains(w)).count();
        assert_eq!(default_stoplist().len(), 100 - negators_in_file);
    }

    #[test]
    fn pipeline_examples() {
        let sl = default_stoplist();
        let out = preprocess_for_features("I was RUNNING to the cardiologist!", sl);
        assert_eq!(out, toks(&["run", "cardiologist"]));
        assert!(preprocess_for_features("", sl).is_empty());
        let again = preprocess_for_features(&out.join(), sl);
        assert_eq!(again, out);
    }

    #[test]
    fn load_stoplist_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stop.txt");
        std::fs::write(&p, "The\nnot\n\nis\n").unwrap();
        let sl = load_stoplist(&p).unwrap();
        assert!(sl.contains("the") && sl.contains("is") && !sl.contains("not"));
    }

    proptest! {
        #[test]
        fn stages_never_grow_the_stream(text in "[ -~]{0,80}") {
            let sl = default_stoplist();
            let t = tokenize(&normalize(&text));
            prop_assert!(t.iter().all(|tok| !tok.is_empty() && !tok.contains(char::is_whitespace)));
            let r = remove_stopwords(&t, sl);
            prop_assert!(r.len() <= t.len());
            let s = stem_stream(&r);
            prop_assert!(s.len() <= r.len());
            prop_assert_eq!(&s, &preprocess_for_features(&text, sl));
        }
    }
}
