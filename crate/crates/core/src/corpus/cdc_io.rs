use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::CdcRecord;

pub const CDC_COLUMNS: [&str; 6] = ["gender", "race", "ethnicity", "state", "year", "disease_type"];

/// Loads a demographic table with header
/// `gender,race,ethnicity,state,year,disease_type`. Any invalid row is an
/// error naming its line.
pub fn load_cdc(path: impl AsRef<Path>) -> Result<Vec<CdcRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cdc(std::io::BufReader::new(file))
}

pub fn read_cdc<R: Read>(reader: R) -> Result<Vec<CdcRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut pos = [0usize; 6];
    for (slot, col) in pos.iter_mut().zip(CDC_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| Error::malformed(1, format!("missing column {col:?}")))?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != headers.len() {
            return Err(Error::malformed(
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let field = |k: usize| rec[pos[k]].trim();
        let state = field(3)
            .parse()
            .map_err(|e: Error| Error::malformed(line, e.to_string()))?;
        let year: u16 = field(4)
            .parse()
            .map_err(|_| Error::malformed(line, format!("invalid year {:?}", field(4))))?;
        let r = CdcRecord::new(field(0), field(1), field(2), state, year, field(5))
            .map_err(|e| Error::malformed(line, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

pub fn write_cdc<W: Write>(writer: W, records: &[CdcRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CDC_COLUMNS)?;
    for r in records {
        w.write_record([
            r.gender.as_str(),
            &r.race,
            &r.ethnicity,
            r.state.code(),
            &r.year.to_string(),
            &r.disease_type,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::State;

    #[test]
    fn reads_and_round_trips() {
        let src = "gender,race,ethnicity,state,year,disease_type\n\
                   female,white,non_hispanic,WV,2019,cardiovascular disease\n\
                   male,black,hispanic,GA,2020,diabetes\n";
        let recs = read_cdc(src.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].target, 1);
        assert_eq!(recs[1].target, 0);
        assert_eq!(recs[1].state, State::GA);
        let mut buf = Vec::new();
        write_cdc(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), src);
    }

    #[test]
    fn bad_year_names_line() {
        let src = "gender,race,ethnicity,state,year,disease_type\n\
                   female,white,non_hispanic,WV,2019,cancer\n\
                   female,white,non_hispanic,WV,2021,cancer\n";
        match read_cdc(src.as_bytes()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
    }
}
