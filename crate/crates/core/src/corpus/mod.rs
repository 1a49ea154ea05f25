//! Ingestion, validation, synthesis and splitting of post-level and tabular
//! datasets.
//!
//! Posts are read from CSV (header `id,text,state,timestamp,user_id`) or JSONL
//! with the same keys. Ingestion performs no deduplication of repeated texts;
//! only record ids must be unique.

mod cdc_io;
mod split;
mod state;
mod synth;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cdc_io::{load_cdc, write_cdc};
pub use split::{split, CorpusSplit, Record, SplitOptions};
pub use state::State;
pub use synth::{synthesize_cdc, synthesize_corpus, CdcSynthSpec, SynthSpec, SynthTemplates};

pub const POST_COLUMNS: [&str; 5] = ["id", "text", "state", "timestamp", "user_id"];

/// One social-media post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: String,
    pub text: String,
    pub state: State,
    #[serde(with = "iso_date")]
    pub timestamp: NaiveDate,
    pub user_id: String,
}

impl Record for RawPost {
    fn id(&self) -> &str {
        &self.id
    }
}

/// Inclusive calendar window that post timestamps must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for DateWindow {
    fn default() -> Self {
        DateWindow {
            start: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
        }
    }
}

impl DateWindow {
    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }

    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension; anything but `.jsonl`/`.json`
    /// is treated as CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Any invalid row aborts the load.
    Strict,
    /// Invalid rows are counted and skipped.
    Lenient,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub format: Format,
    pub mode: Mode,
    pub window: DateWindow,
}

impl LoadOptions {
    pub fn new(format: Format, mode: Mode) -> Self {
        LoadOptions {
            format,
            mode,
            window: DateWindow::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub records: Vec<RawPost>,
    pub skipped: usize,
}

pub(crate) fn parse_date(s: &str) -> Result<NaiveDate> {
    let b = s.as_bytes();
    let shape_ok = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shape_ok {
        return Err(Error::InvalidDate(s.to_string()));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| Error::InvalidDate(s.to_string()))
}

fn validate(
    id: &str,
    text: &str,
    state: &str,
    timestamp: &str,
    user_id: &str,
    window: &DateWindow,
) -> Result<RawPost> {
    if id.trim().is_empty() {
        return Err(Error::invalid("empty id"));
    }
    if text.trim().is_empty() {
        return Err(Error::invalid("empty text"));
    }
    let state: State = state.parse()?;
    let timestamp = parse_date(timestamp.trim())?;
    if !window.contains(timestamp) {
        return Err(Error::DateOutOfWindow {
            date: timestamp.to_string(),
            start: window.start.to_string(),
            end: window.end.to_string(),
        });
    }
    Ok(RawPost {
        id: id.to_string(),
        text: text.to_string(),
        state,
        timestamp,
        user_id: user_id.to_string(),
    })
}

/// Loads posts from `path`.
pub fn load_posts(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_posts(BufReader::new(file), opts)
}

/// Reads posts from any reader; see [`load_posts`].
pub fn read_posts<R: Read>(reader: R, opts: &LoadOptions) -> Result<Loaded> {
    let rows = match opts.format {
        Format::Csv => csv_rows(reader)?,
        Format::Jsonl => jsonl_rows(reader)?,
    };
    let mut records = Vec::with_capacity(rows.len());
    let mut skipped = 0;
    let mut seen = HashSet::new();
    for (line, row) in rows {
        let parsed = row.and_then(|[id, text, state, ts, user]| {
            let post = validate(&id, &text, &state, &ts, &user, &opts.window)?;
            if !seen.insert(post.id.clone()) {
                return Err(Error::Duplicate(post.id));
            }
            Ok(post)
        });
        match (parsed, opts.mode) {
            (Ok(post), _) => records.push(post),
            (Err(_), Mode::Lenient) => skipped += 1,
            (Err(e), Mode::Strict) => return Err(Error::malformed(line, e.to_string())),
        }
    }
    Ok(Loaded { records, skipped })
}

type Row = (usize, Result<[String; 5]>);

fn csv_rows<R: Read>(reader: R) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut positions = [0usize; 5];
    for (slot, col) in positions.iter_mut().zip(POST_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| Error::malformed(1, format!("missing column {col:?}")))?;
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let (line, row) = match rec {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                let row = if rec.len() != headers.len() {
                    Err(Error::invalid(format!(
                        "expected {} fields, found {}",
                        headers.len(),
                        rec.len()
                    )))
                } else {
                    Ok(positions.map(|p| rec[p].to_string()))
                };
                (line, row)
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                (line, Err(Error::invalid(e.to_string())))
            }
        };
        rows.push((line, row));
    }
    Ok(rows)
}

#[derive(Deserialize)]
struct JsonPost {
    id: String,
    text: String,
    state: String,
    timestamp: String,
    user_id: String,
}

fn jsonl_rows<R: Read>(reader: R) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str::<JsonPost>(line)
            .map(|p| [p.id, p.text, p.state, p.timestamp, p.user_id])
            .map_err(Error::from);
        rows.push((i + 1, row));
    }
    Ok(rows)
}

/// Serializes posts in the same layout [`load_posts`] reads.
pub fn write_posts<W: Write>(writer: W, posts: &[RawPost], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(POST_COLUMNS)?;
            for p in posts {
                let date = p.timestamp.format("%Y-%m-%d").to_string();
                w.write_record([&p.id, &p.text, p.state.code(), &date, &p.user_id])?;
            }
            w.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        Format::Jsonl => {
            let mut w = writer;
            for p in posts {
                serde_json::to_writer(&mut w, p)?;
                w.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
            }
        }
    }
    Ok(())
}

pub fn save_posts(path: impl AsRef<Path>, posts: &[RawPost], format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_posts(std::io::BufWriter::new(file), posts, format)
}

mod iso_date {
    use chrono::NaiveDate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&d.format("%Y-%m-%d").to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_date(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,text,state,timestamp,user_id\n";

    fn csv(body: &str) -> String {
        format!("{HEADER}{body}")
    }

    fn load_str(s: &str, format: Format, mode: Mode) -> Result<Loaded> {
        read_posts(s.as_bytes(), &LoadOptions::new(format, mode))
    }

    #[test]
    fn three_valid_rows() {
        let src = csv("1,chest pain again,WV,2019-03-01,u1\n\
             2,\"quit smoking, feeling great\",KY,2020-07-15,u2\n\
             3,#stress week,NY,2021-12-31,u3\n");
        let loaded = load_str(&src, Format::Csv, Mode::Strict).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert_eq!(loaded.skipped, 0);
        assert_eq!(loaded.records[1].text, "quit smoking, feeling great");
        assert_eq!(loaded.records[2].state, State::NY);
    }

    #[test]
    fn unknown_state_strict_names_line() {
        let src = csv("1,ok,WV,2019-03-01,u1\n2,bad,ZZ,2019-03-01,u2\n");
        let err = load_str(&src, Format::Csv, Mode::Strict).unwrap_err();
        match err {
            Error::Malformed { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("ZZ"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_skips_invalid_rows() {
        let src = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/data/posts_lenient.csv"
        ))
        .unwrap();
        let loaded = load_str(&src, Format::Csv, Mode::Lenient).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert_eq!(loaded.skipped, 2);
        assert!(load_str(&src, Format::Csv, Mode::Strict).is_err());
    }

    #[test]
    fn invalid_and_out_of_window_dates() {
        for date in ["2019-13-01", "2019-1-05", "20190105", "2018-12-31", "2022-01-01"] {
            let src = csv(&format!("1,hi,WV,{date},u\n"));
            assert!(
                load_str(&src, Format::Csv, Mode::Strict).is_err(),
                "{date} accepted"
            );
        }
    }

    #[test]
    fn crlf_and_column_order() {
        let src = "user_id,state,id,timestamp,text\r\nu1,WV,a,2019-01-01,hello there\r\n";
        let loaded = load_str(src, Format::Csv, Mode::Strict).unwrap();
        assert_eq!(loaded.records[0].text, "hello there");
        assert_eq!(loaded.records[0].user_id, "u1");
    }

    #[test]
    fn missing_column_is_an_error() {
        let src = "id,text,state,timestamp\n1,a,WV,2019-01-01\n";
        assert!(load_str(src, Format::Csv, Mode::Lenient).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = csv("1,a,WV,2019-01-01,u\n1,b,WV,2019-01-01,u\n");
        assert!(load_str(&src, Format::Csv, Mode::Strict).is_err());
        let l = load_str(&src, Format::Csv, Mode::Lenient).unwrap();
        assert_eq!((l.records.len(), l.skipped), (1, 1));
    }

    #[test]
    fn jsonl_lines_and_errors() {
        let src = "{\"id\":\"1\",\"text\":\"hi\",\"state\":\"GA\",\"timestamp\":\"2020-02-02\",\"user_id\":\"u\"}\r\n\
                   \n\
                   {\"id\":\"2\",\"text\":\"  \",\"state\":\"GA\",\"timestamp\":\"2020-02-02\",\"user_id\":\"u\"}\n";
        let l = load_str(src, Format::Jsonl, Mode::Lenient).unwrap();
        assert_eq!((l.records.len(), l.skipped), (1, 1));
        match load_str(src, Format::Jsonl, Mode::Strict).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn missing_file() {
        let err = load_posts(
            "/nonexistent/posts.csv",
            &LoadOptions::new(Format::Csv, Mode::Strict),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn write_then_load_is_fixed_point() {
        let src = csv("1,\"a, \"\"quoted\"\" text\",WV,2019-03-01,u1\n2,plain,CT,2021-06-30,u2\n");
        let opts = LoadOptions::new(Format::Csv, Mode::Strict);
        let first = read_posts(src.as_bytes(), &opts).unwrap().records;
        for format in [Format::Csv, Format::Jsonl] {
            let mut buf = Vec::new();
            write_posts(&mut buf, &first, format).unwrap();
            let again = read_posts(&buf[..], &LoadOptions::new(format, Mode::Strict))
                .unwrap()
                .records;
            assert_eq!(first, again);
        }
    }
}
