//! Lexicon-and-rule sentiment scoring (a reimplementation of the VADER rule
//! set) and threshold labeling.
//!
//! Scores are computed on [`normalize`](crate::textprep::normalize)d text with
//! casing and punctuation intact. A compound score strictly above the
//! threshold (default −0.30) is labeled `1`, potential CVD risk.
//!
//! ```
//! use cvdrisk::sentiment::{default_lexicon, label, score, DEFAULT_THRESHOLD};
//!
//! let lex = default_lexicon();
//! let good = score("The book was good.", lex);
//! let bad = score("The book was not good.", lex);
//! assert!(good.compound > 0.0 && bad.compound < 0.0);
//! assert_eq!(label(&good, DEFAULT_THRESHOLD).unwrap().value, 1);
//! ```

mod rules;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use rules::normalize_score;

const BUNDLED_LEXICON: &str = include_str!("../../data/vader_lexicon.tsv");

pub const DEFAULT_THRESHOLD: f64 = -0.30;

/// The fixed rule constants. See `CONSTANTS.md` for their meaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleConstants {
    /// Booster word increment (negated for decreasing boosters).
    pub booster_increment: f64,
    /// Added to |valence| for an ALL-CAPS word in mixed-case text.
    pub caps_increment: f64,
    /// Multiplier for a negated valence.
    pub negation_scalar: f64,
    /// Booster scaling by distance: 1, 2 or 3 tokens back.
    pub booster_decay: [f64; 3],
    /// Multiplier applied after "never so" / "never this".
    pub never_so_scalar: f64,
    pub but_before: f64,
    pub but_after: f64,
    pub exclamation_increment: f64,
    pub max_exclamations: usize,
    pub question_increment: f64,
    pub question_cap: f64,
    /// Normalization constant in `s / sqrt(s² + alpha)`.
    pub alpha: f64,
    /// Negators are searched this many tokens back.
    pub negation_window: usize,
}

pub const RULES: RuleConstants = RuleConstants {
    booster_increment: 0.293,
    caps_increment: 0.733,
    negation_scalar: -0.74,
    booster_decay: [1.0, 0.95, 0.9],
    never_so_scalar: 1.25,
    but_before: 0.5,
    but_after: 1.5,
    exclamation_increment: 0.292,
    max_exclamations: 4,
    question_increment: 0.18,
    question_cap: 0.96,
    alpha: 15.0,
    negation_window: 3,
};

const NEGATORS: &[&str] = &[
    "aint",
    "arent",
    "cannot",
    "cant",
    "couldnt",
    "darent",
    "didnt",
    "doesnt",
    "ain't",
    "aren't",
    "can't",
    "couldn't",
    "daren't",
    "didn't",
    "doesn't",
    "dont",
    "hadnt",
    "hasnt",
    "havent",
    "isnt",
    "mightnt",
    "mustnt",
    "neither",
    "don't",
    "hadn't",
    "hasn't",
    "haven't",
    "isn't",
    "mightn't",
    "mustn't",
    "neednt",
    "needn't",
    "never",
    "none",
    "nope",
    "nor",
    "not",
    "nothing",
    "nowhere",
    "oughtnt",
    "shant",
    "shouldnt",
    "uhuh",
    "wasnt",
    "werent",
    "oughtn't",
    "shan't",
    "shouldn't",
    "uh-uh",
    "wasn't",
    "weren't",
    "without",
    "wont",
    "wouldnt",
    "won't",
    "wouldn't",
    "rarely",
    "seldom",
    "despite",
];

const INCREASING_BOOSTERS: &[&str] = &[
    "absolutely",
    "amazingly",
    "awfully",
    "completely",
    "considerable",
    "considerably",
    "decidedly",
    "deeply",
    "effing",
    "enormous",
    "enormously",
    "entirely",
    "especially",
    "exceptional",
    "exceptionally",
    "extreme",
    "extremely",
    "fabulously",
    "flipping",
    "flippin",
    "frackin",
    "fracking",
    "fricking",
    "frickin",
    "frigging",
    "friggin",
    "fully",
    "fuckin",
    "fucking",
    "fuggin",
    "fugging",
    "greatly",
    "hella",
    "highly",
    "hugely",
    "incredible",
    "incredibly",
    "intensely",
    "major",
    "majorly",
    "more",
    "most",
    "particularly",
    "purely",
    "quite",
    "really",
    "remarkably",
    "so",
    "substantially",
    "thoroughly",
    "total",
    "totally",
    "tremendous",
    "tremendously",
    "uber",
    "unbelievably",
    "unusually",
    "utter",
    "utterly",
    "very",
];

const DECREASING_BOOSTERS: &[&str] = &[
    "almost",
    "barely",
    "hardly",
    "just enough",
    "kind of",
    "kinda",
    "kindof",
    "kind-of",
    "less",
    "little",
    "marginal",
    "marginally",
    "occasional",
    "occasionally",
    "partly",
    "scarce",
    "scarcely",
    "slight",
    "slightly",
    "somewhat",
    "sort of",
    "sorta",
    "sortof",
    "sort-of",
];

/// Token valences plus the booster and negator word lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    valence: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negators: HashSet<String>,
}

fn default_boosters() -> HashMap<String, f64> {
    let b = RULES.booster_increment;
    INCREASING_BOOSTERS
        .iter()
        .map(|w| (w.to_string(), b))
        .chain(DECREASING_BOOSTERS.iter().map(|w| (w.to_string(), -b)))
        .collect()
}

fn default_negators() -> HashSet<String> {
    NEGATORS.iter().map(|w| w.to_string()).collect()
}

impl SentimentLexicon {
    pub fn new(
        valence: HashMap<String, f64>,
        boosters: HashMap<String, f64>,
        negators: HashSet<String>,
    ) -> Result<Self> {
        if valence.is_empty() {
            return Err(Error::Empty("valence lexicon"));
        }
        if boosters.is_empty() {
            return Err(Error::Empty("booster list"));
        }
        if negators.is_empty() {
            return Err(Error::Empty("negator list"));
        }
        for (token, &value) in &valence {
            if !(-4.0..=4.0).contains(&value) {
                return Err(Error::ValenceOutOfRange {
                    token: token.clone(),
                    value,
                });
            }
        }
        if let Some((w, v)) = boosters.iter().find(|(_, v)| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "booster {w:?} increment {v} outside [-1, 1]"
            )));
        }
        Ok(SentimentLexicon {
            valence,
            boosters,
            negators,
        })
    }

    /// A lexicon with the given valences and the standard boosters and
    /// negators.
    pub fn with_valence(valence: HashMap<String, f64>) -> Result<Self> {
        Self::new(valence, default_boosters(), default_negators())
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valence.get(token).copied()
    }

    pub fn booster(&self, token: &str) -> Option<f64> {
        self.boosters.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    /// Number of valence entries.
    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }

    /// Single-word valence entries, sorted, for generators that need to pick
    /// polar vocabulary deterministically.
    pub fn words_by(&self, pred: impl Fn(f64) -> bool) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self
            .valence
            .iter()
            .filter(|(w, v)| pred(**v) && w.chars().all(|c| c.is_ascii_lowercase()))
            .map(|(w, v)| (w.as_str(), *v))
            .collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }
}

/// Parses `token<TAB>valence` lines. Columns after the second are ignored.
pub fn parse_lexicon(src: &str) -> Result<SentimentLexicon> {
    let mut valence = HashMap::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let token = cols.next().unwrap_or_default();
        let value = cols
            .next()
            .ok_or_else(|| Error::malformed(i + 1, "expected `token<TAB>valence`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::malformed(i + 1, format!("invalid valence {value:?}")))?;
        if token.is_empty() {
            return Err(Error::malformed(i + 1, "empty token"));
        }
        if !(-4.0..=4.0).contains(&value) {
            return Err(Error::ValenceOutOfRange {
                token: token.to_string(),
                value,
            });
        }
        if valence.insert(token.to_string(), value).is_some() {
            return Err(Error::Duplicate(token.to_string()));
        }
    }
    SentimentLexicon::with_valence(valence)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<SentimentLexicon> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&src)
}

/// The bundled lexicon (7,506 entries, MIT licensed).
pub fn default_lexicon() -> &'static SentimentLexicon {
    static LEX: OnceLock<SentimentLexicon> = OnceLock::new();
    LEX.get_or_init(|| parse_lexicon(BUNDLED_LEXICON).expect("bundled lexicon is valid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
}

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore {
        compound: 0.0,
        pos: 0.0,
        neu: 1.0,
        neg: 0.0,
    };
}

/// Scores `text`. Never fails; text without lexicon tokens scores
/// [`SentimentScore::NEUTRAL`].
pub fn score(text: &str, lexicon: &SentimentLexicon) -> SentimentScore {
    rules::score(text, lexicon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskLabel {
    pub value: u8,
    pub threshold_used: f64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold {threshold} outside [-1, 1]")))
    }
}

/// Labels a compound value: `1` iff `compound > threshold`.
pub fn label_compound(compound: f64, threshold: f64) -> Result<RiskLabel> {
    check_threshold(threshold)?;
    Ok(RiskLabel {
        value: u8::from(compound > threshold),
        threshold_used: threshold,
    })
}

pub fn label(score: &SentimentScore, threshold: f64) -> Result<RiskLabel> {
    label_compound(score.compound, threshold)
}

/// Labels a user by the arithmetic mean of their posts' compound scores.
pub fn label_user(posts: &[SentimentScore], threshold: f64) -> Result<RiskLabel> {
    if posts.is_empty() {
        return Err(Error::Empty("user post list"));
    }
    let mean = posts.iter().map(|s| s.compound).sum::<f64>() / posts.len() as f64;
    label_compound(mean, threshold)
}
