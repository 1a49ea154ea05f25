use std::collections::BTreeMap;
use std::path::Path;

use chrono::Duration;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DateWindow, RawPost, State};
use crate::dictionary::KeywordDictionary;
use crate::error::{Error, Result};
use crate::features::CdcRecord;
use crate::sentiment::SentimentLexicon;

const BUNDLED_TEMPLATES: &str = include_str!("../../data/synth_templates.txt");

/// Template sentences, neutral topics and planted sentiment vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthTemplates {
    pub templates: Vec<String>,
    pub topics: Vec<String>,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl SynthTemplates {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TEMPLATES).expect("bundled template file is valid")
    }

    /// Parses `[templates]`, `[topics]`, `[positive]` and `[negative]`
    /// sections, one entry per line.
    pub fn parse(src: &str) -> Result<Self> {
        let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (i, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if !matches!(name, "templates" | "topics" | "positive" | "negative") {
                    return Err(Error::malformed(i + 1, format!("unknown section [{name}]")));
                }
                current = Some(name);
                sections.entry(name).or_default();
                continue;
            }
            let Some(name) = current else {
                return Err(Error::malformed(i + 1, "entry before any section"));
            };
            if name == "templates" && (!line.contains("{keyword}") || !line.contains("{mood}")) {
                return Err(Error::malformed(
                    i + 1,
                    "template needs {keyword} and {mood} placeholders",
                ));
            }
            sections.entry(name).or_default().push(line.to_string());
        }
        let mut take = |name: &'static str| -> Result<Vec<String>> {
            match sections.remove(name) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::Empty(name)),
            }
        };
        Ok(SynthTemplates {
            templates: take("templates")?,
            topics: take("topics")?,
            positive: take("positive")?,
            negative: take("negative")?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }

    /// Checks that sentiment words agree in sign with `lexicon` and that
    /// template and topic text carry no lexicon tokens.
    pub fn validate(&self, lexicon: &SentimentLexicon) -> Result<()> {
        for (words, positive) in [(&self.positive, true), (&self.negative, false)] {
            for w in words {
                match lexicon.valence(w) {
                    Some(v) if (v > 0.0) == positive && v != 0.0 => {}
                    other => {
                        return Err(Error::invalid(format!(
                            "sentiment word {w:?} has lexicon valence {other:?}"
                        )))
                    }
                }
            }
        }
        for text in self.templates.iter().chain(&self.topics) {
            let bare = text.replace("{keyword}", " ").replace("{mood}", " ");
            if let Some(hit) = bare
                .split(|c: char| !c.is_alphanumeric() && c != '\'')
                .find(|t| lexicon.valence(&t.to_lowercase()).is_some())
            {
                return Err(Error::invalid(format!(
                    "template text {text:?} contains lexicon token {hit:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters of a synthetic post corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub per_state_counts: BTreeMap<State, usize>,
    pub positive_fraction: f64,
    pub keyword_injection_rate: f64,
    pub seed: u64,
    pub window: DateWindow,
}

impl SynthSpec {
    pub fn new(per_state_counts: BTreeMap<State, usize>, positive_fraction: f64, seed: u64) -> Self {
        SynthSpec {
            per_state_counts,
            positive_fraction,
            keyword_injection_rate: 1.0,
            seed,
            window: DateWindow::default(),
        }
    }

    /// `total` posts spread over all eighteen states as evenly as possible,
    /// earlier states taking the remainder.
    pub fn uniform(total: usize, positive_fraction: f64, seed: u64) -> Self {
        let n = State::ALL.len();
        let counts = State::ALL
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, total / n + usize::from(i < total % n)))
            .collect();
        Self::new(counts, positive_fraction, seed)
    }
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} {f} outside [0, 1]")))
    }
}

fn net_valence(text: &str, lexicon: &SentimentLexicon) -> f64 {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter_map(|t| lexicon.valence(&t.to_lowercase()))
        .sum()
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [String]) -> &'a str {
    items.choose(rng).expect("non-empty list")
}

struct PostMaker<'a> {
    templates: &'a SynthTemplates,
    keywords: Vec<String>,
    lexicon: &'a SentimentLexicon,
    injection: f64,
}

impl PostMaker<'_> {
    fn make<R: Rng>(&self, rng: &mut R, positive: bool) -> String {
        let template = pick(rng, &self.templates.templates);
        let topic = if rng.gen::<f64>() < self.injection {
            let kw = pick(rng, &self.keywords);
            if !kw.contains(' ') && rng.gen::<f64>() < 0.15 {
                format!("#{kw}")
            } else {
                kw.to_string()
            }
        } else {
            pick(rng, &self.templates.topics).to_string()
        };
        let (main, other) = if positive {
            (&self.templates.positive, &self.templates.negative)
        } else {
            (&self.templates.negative, &self.templates.positive)
        };
        let n_main = rng.gen_range(1..=3);
        let mut mood: Vec<&str> = (0..n_main).map(|_| pick(rng, main)).collect();
        if rng.gen::<f64>() < 0.4 {
            mood.push(pick(rng, other));
        }
        mood.shuffle(rng);
        let strongest = main
            .iter()
            .max_by(|a, b| {
                let va = self.lexicon.valence(a).unwrap_or(0.0).abs();
                let vb = self.lexicon.valence(b).unwrap_or(0.0).abs();
                va.total_cmp(&vb).then(b.cmp(a))
            })
            .expect("non-empty list");
        let mut text;
        loop {
            text = template
                .replace("{keyword}", &topic)
                .replace("{mood}", &mood.join(" and "));
            let net = net_valence(&text, self.lexicon);
            if (positive && net > 0.0) || (!positive && net < 0.0) {
                break;
            }
            mood.push(strongest);
        }
        if rng.gen::<f64>() < 0.2 {
            text.push('!');
        }
        if rng.gen::<f64>() < 0.1 {
            text.push_str(" @friend");
        }
        if rng.gen::<f64>() < 0.1 {
            text.push_str(" https://example.org/health");
        }
        if rng.gen::<f64>() < 0.3 {
            let mut cs = text.chars();
            if let Some(first) = cs.next() {
                text = first.to_uppercase().chain(cs).collect();
            }
        }
        text
    }
}

/// Generates a seeded synthetic corpus: posts are grouped by state in list
/// order, with exactly the requested count per state.
///
/// Each post fills a template with a keyword (at `keyword_injection_rate`)
/// and planted sentiment words whose net lexicon valence is positive for
/// posts drawn positive and negative otherwise.
pub fn synthesize_corpus(
    spec: &SynthSpec,
    dictionary: &KeywordDictionary,
    lexicon: &SentimentLexicon,
    templates: &SynthTemplates,
) -> Result<Vec<RawPost>> {
    check_fraction("positive_fraction", spec.positive_fraction)?;
    check_fraction("keyword_injection_rate", spec.keyword_injection_rate)?;
    if spec.per_state_counts.values().all(|&c| c == 0) {
        return Err(Error::Empty("synthetic corpus spec (all state counts are zero)"));
    }
    if dictionary.is_empty() {
        return Err(Error::Empty("keyword dictionary"));
    }
    templates.validate(lexicon)?;
    let maker = PostMaker {
        templates,
        keywords: dictionary.phrases().map(str::to_string).collect(),
        lexicon,
        injection: spec.keyword_injection_rate,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let days = spec.window.days();
    let mut posts = Vec::new();
    for (&state, &count) in &spec.per_state_counts {
        let users = (count / 4).max(1);
        for _ in 0..count {
            let positive = rng.gen::<f64>() < spec.positive_fraction;
            let text = maker.make(&mut rng, positive);
            let timestamp = spec.window.start + Duration::days(rng.gen_range(0..days));
            let user = rng.gen_range(0..users);
            posts.push(RawPost {
                id: format!("p{:06}", posts.len() + 1),
                text,
                state,
                timestamp,
                user_id: format!("{}-u{user:04}", state.code().to_lowercase()),
            });
        }
    }
    Ok(posts)
}

/// Parameters of the demographic table generator.
///
/// The chance of a CVD record depends mostly on gender, with small race and
/// Appalachian-state effects, so demographics carry only a weak signal.
#[derive(Debug, Clone, PartialEq)]
pub struct CdcSynthSpec {
    pub n_records: usize,
    pub seed: u64,
    pub male_rate: f64,
    pub female_rate: f64,
    /// Added for race `black`, subtracted for race `asian`.
    pub race_effect: f64,
    /// Added for the Appalachian states.
    pub appalachian_effect: f64,
}

impl CdcSynthSpec {
    pub fn new(n_records: usize, seed: u64) -> Self {
        CdcSynthSpec {
            n_records,
            seed,
            male_rate: 0.55,
            female_rate: 0.33,
            race_effect: 0.03,
            appalachian_effect: 0.02,
        }
    }

    pub const GENDERS: [(&'static str, f64); 2] = [("female", 0.5), ("male", 0.5)];
    pub const RACES: [(&'static str, f64); 4] =
        [("white", 0.6), ("black", 0.2), ("asian", 0.1), ("other", 0.1)];
    pub const ETHNICITIES: [(&'static str, f64); 2] = [("hispanic", 0.15), ("non_hispanic", 0.85)];
    pub const OTHER_DISEASES: [&'static str; 4] = ["diabetes", "cancer", "copd", "kidney disease"];

    /// P(target = 1 | gender, race, state).
    pub fn probability(&self, gender: &str, race: &str, state: State) -> f64 {
        let mut p = if gender == "male" {
            self.male_rate
        } else {
            self.female_rate
        };
        p += match race {
            "black" => self.race_effect,
            "asian" => -self.race_effect,
            _ => 0.0,
        };
        if state.is_appalachian() {
            p += self.appalachian_effect;
        }
        p.clamp(0.0, 1.0)
    }

    /// Accuracy of the optimal classifier, by exact enumeration of the
    /// generating distribution.
    pub fn bayes_rate(&self) -> f64 {
        self.enumerate(|p| p.max(1.0 - p))
    }

    /// Expected fraction of CVD records.
    pub fn prevalence(&self) -> f64 {
        self.enumerate(|p| p)
    }

    fn enumerate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let ps = 1.0 / State::ALL.len() as f64;
        let mut total = 0.0;
        for (g, pg) in Self::GENDERS {
            for (r, pr) in Self::RACES {
                for s in State::ALL {
                    total += pg * pr * ps * f(self.probability(g, r, s));
                }
            }
        }
        total
    }
}

fn draw<'a, R: Rng>(rng: &mut R, table: &[(&'a str, f64)]) -> &'a str {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(v, p) in table {
        acc += p;
        if u < acc {
            return v;
        }
    }
    table[table.len() - 1].0
}

/// Generates a seeded demographic table from `spec`.
pub fn synthesize_cdc(spec: &CdcSynthSpec) -> Result<Vec<CdcRecord>> {
    if spec.n_records == 0 {
        return Err(Error::Empty("synthetic table spec (zero records)"));
    }
    for (name, f) in [
        ("male_rate", spec.male_rate),
        ("female_rate", spec.female_rate),
        ("race_effect", spec.race_effect),
        ("appalachian_effect", spec.appalachian_effect),
    ] {
        check_fraction(name, f)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n_records);
    for _ in 0..spec.n_records {
        let gender = draw(&mut rng, &CdcSynthSpec::GENDERS);
        let race = draw(&mut rng, &CdcSynthSpec::RACES);
        let ethnicity = draw(&mut rng, &CdcSynthSpec::ETHNICITIES);
        let state = State::ALL[rng.gen_range(0..State::ALL.len())];
        let year = if rng.gen::<bool>() { 2019 } else { 2020 };
        let cvd = rng.gen::<f64>() < spec.probability(gender, race, state);
        let disease = if cvd {
            "cardiovascular disease"
        } else {
            CdcSynthSpec::OTHER_DISEASES[rng.gen_range(0..CdcSynthSpec::OTHER_DISEASES.len())]
        };
        out.push(CdcRecord::new(gender, race, ethnicity, state, year, disease)?);
    }
    Ok(out)
}
