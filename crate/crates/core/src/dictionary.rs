//! The CVD keyword dictionary and phrase matching over raw post text.
//!
//! Matching is literal: no stemming, so `smoker` does not match `smoking`.
//! Phrases match case-insensitively, across any run of whitespace between
//! their words, and only on word boundaries (`#smoking` matches, `smokingly`
//! does not).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_KEYWORDS: &str = include_str!("../data/cvd_keywords.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Clinical,
    Behavioral,
    Psychological,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Clinical => "clinical",
            Category::Behavioral => "behavioral",
            Category::Psychological => "psychological",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clinical" => Ok(Category::Clinical),
            "behavioral" => Ok(Category::Behavioral),
            "psychological" => Ok(Category::Psychological),
            other => Err(Error::UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyword {
    pub phrase: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordDictionary {
    entries: Vec<Keyword>,
}

fn normalize_phrase(p: &str) -> String {
    p.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl KeywordDictionary {
    /// Builds a dictionary, lowercasing and single-spacing each phrase.
    pub fn new(entries: impl IntoIterator<Item = (String, Category)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (phrase, category) in entries {
            let phrase = normalize_phrase(&phrase);
            if phrase.is_empty() {
                return Err(Error::invalid("empty keyword phrase"));
            }
            if !seen.insert(phrase.clone()) {
                return Err(Error::Duplicate(phrase));
            }
            out.push(Keyword { phrase, category });
        }
        if out.is_empty() {
            return Err(Error::Empty("keyword dictionary"));
        }
        Ok(KeywordDictionary { entries: out })
    }

    pub fn entries(&self) -> &[Keyword] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|k| k.phrase.as_str())
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.entries.iter().any(|k| k.phrase == phrase)
    }
}

/// The twelve curated keywords shipped with the crate.
pub fn default_dictionary() -> KeywordDictionary {
    parse_dictionary(DEFAULT_KEYWORDS).expect("bundled keyword file is valid")
}

/// Parses `phrase,category` lines (no header). Blank lines are ignored.
pub fn parse_dictionary(src: &str) -> Result<KeywordDictionary> {
    let mut entries = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (phrase, cat) = line
            .rsplit_once(',')
            .ok_or_else(|| Error::malformed(i + 1, "expected `phrase,category`"))?;
        let category = cat
            .parse()
            .map_err(|e: Error| Error::malformed(i + 1, e.to_string()))?;
        entries.push((phrase.to_string(), category));
    }
    if entries.is_empty() {
        return Err(Error::Empty("keyword dictionary file"));
    }
    KeywordDictionary::new(entries)
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<KeywordDictionary> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dictionary(&src)
}

/// Tries to match `phrase` (lowercase, single-spaced) at `start` in `text`.
fn matches_at(text: &[char], start: usize, phrase: &[char]) -> bool {
    if start > 0 && text[start - 1].is_alphanumeric() {
        return false;
    }
    let mut t = start;
    for &p in phrase {
        if p == ' ' {
            let run = text[t..].iter().take_while(|c| c.is_whitespace()).count();
            if run == 0 {
                return false;
            }
            t += run;
        } else {
            if t >= text.len() || text[t] != p {
                return false;
            }
            t += 1;
        }
    }
    t == text.len() || !text[t].is_alphanumeric()
}

/// Returns the dictionary phrases occurring in `text`.
pub fn match_keywords(text: &str, dict: &KeywordDictionary) -> BTreeSet<String> {
    let lowered: Vec<char> = text.to_lowercase().chars().collect();
    let mut found = BTreeSet::new();
    for kw in dict.entries() {
        let phrase: Vec<char> = kw.phrase.chars().collect();
        let first = phrase[0];
        let hit = lowered
            .iter()
            .enumerate()
            .any(|(i, &c)| c == first && matches_at(&lowered, i, &phrase));
        if hit {
            found.insert(kw.phrase.clone());
        }
    }
    found
}
