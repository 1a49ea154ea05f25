use super::{SentimentLexicon, SentimentScore, RULES};

/// `string.punctuation` from the reference implementation.
const PUNCTUATION: &str = r##"!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~"##;

const SPECIAL_CASES: [(&str, f64); 9] = [
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

fn special_case(seq: &str) -> Option<f64> {
    SPECIAL_CASES.iter().find(|(k, _)| *k == seq).map(|&(_, v)| v)
}

/// Strips leading and trailing ASCII punctuation unless that would leave two
/// characters or fewer (so emoticons like `:)` survive).
fn strip_punct_if_word(token: &str) -> &str {
    let stripped = token.trim_matches(|c| PUNCTUATION.contains(c));
    if stripped.chars().count() <= 2 {
        token
    } else {
        stripped
    }
}

/// True when the token has at least one cased character and none lowercase.
fn is_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        cased |= c.is_uppercase();
    }
    cased
}

struct Sentence<'a> {
    words: Vec<&'a str>,
    lower: Vec<String>,
    cap_diff: bool,
    lex: &'a SentimentLexicon,
}

impl<'a> Sentence<'a> {
    fn new(text: &'a str, lex: &'a SentimentLexicon) -> Self {
        let words: Vec<&str> = text.split_whitespace().map(strip_punct_if_word).collect();
        let lower = words.iter().map(|w| w.to_lowercase()).collect();
        let caps = words.iter().filter(|w| is_upper(w)).count();
        let cap_diff = caps > 0 && caps < words.len();
        Sentence {
            words,
            lower,
            cap_diff,
            lex,
        }
    }

    fn in_lexicon(&self, i: usize) -> bool {
        self.lex.valence(&self.lower[i]).is_some()
    }

    fn negated(&self, i: usize) -> bool {
        self.lex.is_negator(&self.lower[i]) || self.lower[i].contains("n't")
    }

    fn emphasize(&self, valence: f64) -> f64 {
        if valence > 0.0 {
            valence + RULES.caps_increment
        } else {
            valence - RULES.caps_increment
        }
    }

    fn booster_scalar(&self, j: usize, valence: f64) -> f64 {
        let Some(b) = self.lex.booster(&self.lower[j]) else {
            return 0.0;
        };
        let mut scalar = if valence < 0.0 { -b } else { b };
        if is_upper(self.words[j]) && self.cap_diff {
            scalar = if valence > 0.0 {
                scalar + RULES.caps_increment
            } else {
                scalar - RULES.caps_increment
            };
        }
        scalar
    }

    fn valence_at(&self, i: usize) -> f64 {
        let Some(base) = self.lex.valence(&self.lower[i]) else {
            return 0.0;
        };
        let n = self.words.len();
        let w = |k: usize| self.lower[k].as_str();
        let mut v = base;
        if w(i) == "no" && i + 1 < n && self.in_lexicon(i + 1) {
            v = 0.0;
        }
        if (i > 0 && w(i - 1) == "no")
            || (i > 1 && w(i - 2) == "no")
            || (i > 2 && w(i - 3) == "no" && matches!(w(i - 1), "or" | "nor"))
        {
            v = base * RULES.negation_scalar;
        }
        if is_upper(self.words[i]) && self.cap_diff {
            v = self.emphasize(v);
        }
        for back in 0..3 {
            if i <= back || self.in_lexicon(i - back - 1) {
                continue;
            }
            let mut s = self.booster_scalar(i - back - 1, v);
            if s != 0.0 {
                s *= RULES.booster_decay[back];
            }
            v += s;
            v = self.negation_check(v, back, i);
            if back == 2 {
                v = self.idioms_check(v, i);
            }
        }
        self.least_check(v, i)
    }

    fn negation_check(&self, v: f64, back: usize, i: usize) -> f64 {
        let w = |k: usize| self.lower[k].as_str();
        let intensified = |k: usize| matches!(w(k), "so" | "this");
        match back {
            0 if self.negated(i - 1) => v * RULES.negation_scalar,
            1 => {
                if w(i - 2) == "never" && intensified(i - 1) {
                    v * RULES.never_so_scalar
                } else if w(i - 2) == "without" && w(i - 1) == "doubt" {
                    v
                } else if self.negated(i - 2) {
                    v * RULES.negation_scalar
                } else {
                    v
                }
            }
            2 => {
                if (w(i - 3) == "never" && intensified(i - 2)) || intensified(i - 1) {
                    v * RULES.never_so_scalar
                } else if w(i - 3) == "without" && (w(i - 2) == "doubt" || w(i - 1) == "doubt") {
                    v
                } else if self.negated(i - 3) {
                    v * RULES.negation_scalar
                } else {
                    v
                }
            }
            _ => v,
        }
    }

    fn idioms_check(&self, mut v: f64, i: usize) -> f64 {
        let w = |k: usize| self.lower[k].as_str();
        let n = self.lower.len();
        let onezero = format!("{} {}", w(i - 1), w(i));
        let twoonezero = format!("{} {} {}", w(i - 2), w(i - 1), w(i));
        let twoone = format!("{} {}", w(i - 2), w(i - 1));
        let threetwoone = format!("{} {} {}", w(i - 3), w(i - 2), w(i - 1));
        let threetwo = format!("{} {}", w(i - 3), w(i - 2));
        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(x) = special_case(seq) {
                v = x;
                break;
            }
        }
        if n - 1 > i {
            if let Some(x) = special_case(&format!("{} {}", w(i), w(i + 1))) {
                v = x;
            }
        }
        if n - 1 > i + 1 {
            if let Some(x) = special_case(&format!("{} {} {}", w(i), w(i + 1), w(i + 2))) {
                v = x;
            }
        }
        for gram in [&threetwoone, &threetwo, &twoone] {
            if let Some(b) = self.lex.booster(gram) {
                v += b;
            }
        }
        v
    }

    fn least_check(&self, v: f64, i: usize) -> f64 {
        let w = |k: usize| self.lower[k].as_str();
        if i > 1 && !self.in_lexicon(i - 1) && w(i - 1) == "least" {
            if w(i - 2) != "at" && w(i - 2) != "very" {
                return v * RULES.negation_scalar;
            }
        } else if i > 0 && !self.in_lexicon(i - 1) && w(i - 1) == "least" {
            return v * RULES.negation_scalar;
        }
        v
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let ep = text.matches('!').count().min(RULES.max_exclamations);
    let qm = text.matches('?').count();
    let qm_amp = match qm {
        0 | 1 => 0.0,
        2..=3 => qm as f64 * RULES.question_increment,
        _ => RULES.question_cap,
    };
    ep as f64 * RULES.exclamation_increment + qm_amp
}

/// Maps a summed valence into (−1, 1).
pub fn normalize_score(s: f64) -> f64 {
    (s / (s * s + RULES.alpha).sqrt()).clamp(-1.0, 1.0)
}

pub(super) fn score(text: &str, lex: &SentimentLexicon) -> SentimentScore {
    let text = text.trim();
    let sent = Sentence::new(text, lex);
    let n = sent.words.len();
    let mut sentiments = Vec::with_capacity(n);
    for i in 0..n {
        let skip = lex.booster(&sent.lower[i]).is_some()
            || (i + 1 < n && sent.lower[i] == "kind" && sent.lower[i + 1] == "of");
        sentiments.push(if skip { 0.0 } else { sent.valence_at(i) });
    }
    if let Some(bi) = sent.lower.iter().position(|w| w == "but") {
        for (si, s) in sentiments.iter_mut().enumerate() {
            if si < bi {
                *s *= RULES.but_before;
            } else if si > bi {
                *s *= RULES.but_after;
            }
        }
    }
    if sentiments.is_empty() {
        return SentimentScore::NEUTRAL;
    }

    let amp = punctuation_emphasis(text);
    let mut sum: f64 = 0.0;
    for s in &sentiments {
        sum += s;
    }
    if sum > 0.0 {
        sum += amp;
    } else if sum < 0.0 {
        sum -= amp;
    }
    let compound = normalize_score(sum);

    let (mut pos, mut neg, mut neu) = (0.0f64, 0.0f64, 0usize);
    for &s in &sentiments {
        if s > 0.0 {
            pos += s + 1.0;
        }
        if s < 0.0 {
            neg += s - 1.0;
        }
        if s == 0.0 {
            neu += 1;
        }
    }
    if pos > neg.abs() {
        pos += amp;
    } else if pos < neg.abs() {
        neg -= amp;
    }
    let total = pos + neg.abs() + neu as f64;
    SentimentScore {
        compound,
        pos: (pos / total).abs(),
        neu: (neu as f64 / total).abs(),
        neg: (neg / total).abs(),
    }
}
