use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, LabelUnit};
use super::Prepared;
use crate::corpus::{load_posts, Format, LoadOptions, Mode, RawPost, Record, State};
use crate::dictionary::{default_dictionary, load_dictionary, match_keywords, KeywordDictionary};
use crate::error::{Error, Result};
use crate::features::{build_vocab, vectorize_binary, vectorize_tfidf};
use crate::neural::encode_sequence;
use crate::sentiment::{
    default_lexicon, label, label_user, load_lexicon, score, SentimentLexicon, SentimentScore,
};
use crate::textprep::{
    default_stoplist, load_stoplist, normalize, preprocess_for_features, Stoplist, TokenStream,
};

/// A keyword-matched post with its sentiment label and feature tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPost {
    pub id: String,
    pub state: State,
    pub user_id: String,
    pub keywords: Vec<String>,
    pub compound: f64,
    pub label: u8,
    pub tokens: TokenStream,
}

impl Record for LabeledPost {
    fn id(&self) -> &str {
        &self.id
    }

    fn label(&self) -> Option<u8> {
        Some(self.label)
    }
}

/// The resources the labeling stage needs.
#[derive(Debug, Clone)]
pub struct TextResources {
    pub dictionary: KeywordDictionary,
    pub lexicon: SentimentLexicon,
    pub stoplist: Stoplist,
}

impl TextResources {
    pub fn bundled() -> Self {
        TextResources {
            dictionary: default_dictionary(),
            lexicon: default_lexicon().clone(),
            stoplist: default_stoplist().clone(),
        }
    }

    /// Loads the configured files, falling back to the bundled resources.
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(TextResources {
            dictionary: match &cfg.dictionary {
                Some(p) => load_dictionary(p)?,
                None => default_dictionary(),
            },
            lexicon: match &cfg.lexicon {
                Some(p) => load_lexicon(p)?,
                None => default_lexicon().clone(),
            },
            stoplist: match &cfg.stoplist {
                Some(p) => load_stoplist(p)?,
                None => default_stoplist().clone(),
            },
        })
    }
}

/// Labeled posts plus bookkeeping from the load and filter stages.
#[derive(Debug, Clone, PartialEq)]
pub struct TextData {
    pub examples: Vec<LabeledPost>,
    pub loaded: usize,
    pub skipped: usize,
    pub filtered_out: usize,
}

pub fn read_corpus(cfg: &ExperimentConfig) -> Result<(Vec<RawPost>, usize)> {
    let path = cfg
        .posts
        .as_ref()
        .ok_or_else(|| Error::Config("no posts file configured".into()))?;
    let mode = if cfg.lenient { Mode::Lenient } else { Mode::Strict };
    let loaded = load_posts(path, &LoadOptions::new(Format::from_path(path), mode))?;
    Ok((loaded.records, loaded.skipped))
}

/// Keeps posts that mention a dictionary keyword, scores the normalized
/// text and labels each post (or each user, by mean compound).
pub fn label_posts(
    posts: &[RawPost],
    res: &TextResources,
    threshold: f64,
    unit: LabelUnit,
) -> Result<TextData> {
    let mut kept: Vec<(&RawPost, Vec<String>, SentimentScore)> = Vec::new();
    for p in posts {
        let hits = match_keywords(&p.text, &res.dictionary);
        if !hits.is_empty() {
            let s = score(&normalize(&p.text), &res.lexicon);
            kept.push((p, hits.into_iter().collect(), s));
        }
    }
    if kept.is_empty() {
        return Err(Error::Empty("keyword-filtered corpus").at_stage("filter"));
    }
    let user_labels: BTreeMap<&str, u8> = match unit {
        LabelUnit::Post => BTreeMap::new(),
        LabelUnit::User => {
            let mut by_user: BTreeMap<&str, Vec<SentimentScore>> = BTreeMap::new();
            for (p, _, s) in &kept {
                by_user.entry(p.user_id.as_str()).or_default().push(*s);
            }
            by_user
                .into_iter()
                .map(|(u, scores)| Ok((u, label_user(&scores, threshold)?.value)))
                .collect::<Result<_>>()
                .map_err(|e| e.at_stage("label"))?
        }
    };
    let examples = kept
        .iter()
        .map(|(p, keywords, s)| {
            let value = match unit {
                LabelUnit::Post => label(s, threshold)?.value,
                LabelUnit::User => user_labels[p.user_id.as_str()],
            };
            Ok(LabeledPost {
                id: p.id.clone(),
                state: p.state,
                user_id: p.user_id.clone(),
                keywords: keywords.clone(),
                compound: s.compound,
                label: value,
                tokens: preprocess_for_features(&p.text, &res.stoplist),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("label"))?;
    Ok(TextData {
        examples,
        loaded: posts.len(),
        skipped: 0,
        filtered_out: posts.len() - kept.len(),
    })
}

/// Builds every model input from the training rows only: the vocabulary,
/// idf weights and sequence ids never see a test document.
pub fn prepare_text(
    cfg: &ExperimentConfig,
    train: &[&LabeledPost],
    test: &[&LabeledPost],
) -> Result<Prepared> {
    let train_docs: Vec<TokenStream> = train.iter().map(|p| p.tokens.clone()).collect();
    let test_docs: Vec<TokenStream> = test.iter().map(|p| p.tokens.clone()).collect();
    let vocab = build_vocab(&train_docs, cfg.min_df)?;
    let seq_len = cfg.neural.seq_len;
    let binary = |docs: &[TokenStream]| docs.iter().map(|d| vectorize_binary(d, &vocab)).collect();
    let seqs = |docs: &[TokenStream]| docs.iter().map(|d| encode_sequence(d, &vocab, seq_len)).collect();
    Ok(Prepared {
        train_binary: binary(&train_docs),
        test_binary: binary(&test_docs),
        train_dense: vectorize_tfidf(&train_docs, &vocab),
        test_dense: vectorize_tfidf(&test_docs, &vocab),
        train_seqs: seqs(&train_docs),
        test_seqs: seqs(&test_docs),
        train_y: train.iter().map(|p| p.label).collect(),
        test_y: test.iter().map(|p| p.label).collect(),
        test_states: test.iter().map(|p| p.state).collect(),
        seq_len,
        vocab,
        synthetic_rows: 0,
    })
}

/// `id,state,user_id,compound,label,keywords` with keywords joined by `;`.
pub fn labels_csv(examples: &[LabeledPost]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "state", "user_id", "compound", "label", "keywords"])
        .expect("in-memory write");
    for e in examples {
        w.write_record([
            e.id.clone(),
            e.state.code().to_string(),
            e.user_id.clone(),
            e.compound.to_string(),
            e.label.to_string(),
            e.keywords.join(";"),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
