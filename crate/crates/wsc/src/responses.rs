//! Questionnaire response files.
//!
//! Comma-separated with header `respondent_id,word1,word2,pick1,pick2`.
//! Word columns hold the word shown in each slot (or the tokens `special` /
//! `alternate`); picks are `AA`, `AB`, `BA` or `BB`.

use std::path::Path;

use serde::Serialize;
use wsc_core::ingest::{Pick, ResponseRecord};
use wsc_core::schema::GeneralisedWinogradSchema;

use crate::formats::read_text;
use crate::Error;

pub const HEADER: [&str; 5] = ["respondent_id", "word1", "word2", "pick1", "pick2"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Malformed {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedResponses {
    /// Well-formed records in file order.
    pub records: Vec<ResponseRecord>,
    pub malformed: Vec<Malformed>,
    pub warnings: Vec<String>,
}

fn parse_line(fields: &csv::StringRecord, schema: &GeneralisedWinogradSchema) -> Result<ResponseRecord, String> {
    if fields.len() != HEADER.len() {
        return Err(format!("expected {} fields, found {}", HEADER.len(), fields.len()));
    }
    let id = &fields[0];
    if id.is_empty() {
        return Err("empty respondent_id".into());
    }
    let context = schema.choices(&fields[1], &fields[2]).map_err(|e| e.to_string())?;
    let p: Pick = fields[3].parse().map_err(|e: wsc_core::ingest::ParsePickError| e.to_string())?;
    let q: Pick = fields[4].parse().map_err(|e: wsc_core::ingest::ParsePickError| e.to_string())?;
    if p == q {
        return Err(format!("duplicate pick {p}"));
    }
    Ok(ResponseRecord { respondent_id: id.to_owned(), context, picks: [p, q] })
}

pub fn parse_responses(text: &str, schema: &GeneralisedWinogradSchema) -> Result<ParsedResponses, Error> {
    let mut out = ParsedResponses::default();
    if text.trim().is_empty() {
        out.warnings.push("response file is empty".into());
        return Ok(out);
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(format!("unreadable header: {e}")))?.clone();
    let missing: Vec<&str> = HEADER.iter().copied().filter(|h| !header.iter().any(|x| x == *h)).collect();
    if !missing.is_empty() {
        return Err(Error::Parse(format!("missing column(s): {}", missing.join(", "))));
    }
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse(format!("header must be `{}`", HEADER.join(","))));
    }
    for result in reader.records() {
        match result {
            Ok(fields) => {
                let line = fields.position().map_or(0, |p| p.line());
                if fields.iter().all(str::is_empty) {
                    continue;
                }
                match parse_line(&fields, schema) {
                    Ok(r) => out.records.push(r),
                    Err(reason) => out.malformed.push(Malformed { line, reason }),
                }
            }
            Err(e) => out.malformed.push(Malformed {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            }),
        }
    }
    if out.records.is_empty() && out.malformed.is_empty() {
        out.warnings.push("response file has a header but no responses".into());
    }
    Ok(out)
}

pub fn read_responses(path: &Path, schema: &GeneralisedWinogradSchema) -> Result<ParsedResponses, Error> {
    parse_responses(&read_text(path)?, schema)
}

/// Writes records with literal words in the word columns.
pub fn write_responses(records: &[ResponseRecord], schema: &GeneralisedWinogradSchema) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        let p0 = r.picks[0].to_string();
        let p1 = r.picks[1].to_string();
        w.write_record([
            r.respondent_id.as_str(),
            schema.slot1.word(r.context.0),
            schema.slot2.word(r.context.1),
            p0.as_str(),
            p1.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
