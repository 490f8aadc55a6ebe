use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, Utc};

use super::schema::{CdrRecord, Dataset, Direction, Label, LabelTable, Service};
use super::CdrError;

/// Canonical column set. Files may append extra trailing columns; those
/// are stripped and counted, never interpreted.
pub const CDR_HEADER: &str = "record_id,timestamp,sim_id,imei,imsi,peer_id,cell_id,direction,service,duration_sec,peer_is_international";

const N_COLUMNS: usize = 11;
const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// A data line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    /// 1-based line number in the source file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

/// Outcome of parsing one CDR file.
#[derive(Debug)]
pub struct ParseReport {
    pub dataset: Dataset,
    pub rejected: Vec<RejectedLine>,
    /// Columns beyond the canonical schema, stripped from every row.
    pub extra_columns: u64,
}

pub fn parse_cdr_file(path: &Path) -> Result<ParseReport, CdrError> {
    let file = File::open(path).map_err(|source| CdrError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cdr_reader(file)
}

/// Parses CDR CSV from any reader.
///
/// The header must present the 11 canonical columns in order; extra
/// trailing columns are allowed. Every malformed data line is reported in
/// `rejected` with its line number. Well-formed records are sorted by
/// (timestamp, record_id); the window is the [min, max] timestamp span.
pub fn parse_cdr_reader<R: Read>(reader: R) -> Result<ParseReport, CdrError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut rows = csv_reader.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(CdrError::Schema(format!("unreadable header: {e}"))),
        None => return Err(CdrError::Schema("empty file, expected header".into())),
    };
    let expected: Vec<&str> = CDR_HEADER.split(',').collect();
    if header.len() < N_COLUMNS {
        return Err(CdrError::Schema(format!(
            "header has {} columns, expected at least {}",
            header.len(),
            N_COLUMNS
        )));
    }
    for (i, want) in expected.iter().enumerate() {
        let got = header.get(i).unwrap_or("");
        if got != *want {
            return Err(CdrError::Schema(format!(
                "header column {} is {:?}, expected {:?}",
                i + 1,
                got,
                want
            )));
        }
    }
    let extra_columns = (header.len() - N_COLUMNS) as u64;

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RejectedLine {
                    line,
                    reason: format!("unparseable csv: {e}"),
                });
                continue;
            }
        };
        if row.len() == 1 && row.get(0) == Some("") {
            continue; // blank line
        }
        match parse_row(&row) {
            Ok(rec) => records.push(rec),
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }

    let start = records
        .iter()
        .map(|r| r.timestamp)
        .min()
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH);
    let end = records
        .iter()
        .map(|r| r.timestamp)
        .max()
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH);
    Ok(ParseReport {
        dataset: Dataset::new(records, start, end),
        rejected,
        extra_columns,
    })
}

fn parse_row(row: &csv::StringRecord) -> Result<CdrRecord, String> {
    if row.len() < N_COLUMNS {
        return Err(format!("{} fields, expected {}", row.len(), N_COLUMNS));
    }
    let field = |i: usize| row.get(i).unwrap_or("");

    let timestamp = parse_timestamp(field(1))
        .ok_or_else(|| format!("invalid timestamp {:?}", field(1)))?;
    let direction = Direction::from_str(field(7))
        .map_err(|_| format!("invalid direction enum {:?}", field(7)))?;
    let service = Service::from_str(field(8))
        .map_err(|_| format!("invalid service enum {:?}", field(8)))?;
    let duration_sec: u32 = field(9)
        .parse()
        .map_err(|_| format!("invalid duration_sec {:?}", field(9)))?;
    if service == Service::Sms && duration_sec != 0 {
        return Err(format!("sms record with nonzero duration {duration_sec}"));
    }
    let peer_is_international = match field(10) {
        "0" => false,
        "1" => true,
        other => return Err(format!("invalid peer_is_international {other:?}, expected 0 or 1")),
    };

    Ok(CdrRecord {
        record_id: field(0).to_string(),
        timestamp,
        sim_id: field(2).to_string(),
        imei: field(3).to_string(),
        imsi: field(4).to_string(),
        peer_id: field(5).to_string(),
        cell_id: field(6).to_string(),
        direction,
        service,
        duration_sec,
        peer_is_international,
    })
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, TS_FORMAT)
        .ok()
        .map(|naive| naive.and_utc())
}

pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.format(TS_FORMAT).to_string()
}

impl Dataset {
    /// Canonical CSV form: header, then records in sort order, minimal
    /// quoting. `parse -> to_csv_string` is the canonicalizer: it is
    /// byte-stable under re-parsing.
    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::with_capacity(self.len() * 96 + CDR_HEADER.len() + 1);
        self.write_csv_to(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("csv output is utf-8")
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(writer);
        w.write_record(CDR_HEADER.split(','))?;
        for r in self.records() {
            w.write_record([
                r.record_id.as_str(),
                &format_timestamp(r.timestamp),
                &r.sim_id,
                &r.imei,
                &r.imsi,
                &r.peer_id,
                &r.cell_id,
                r.direction.as_str(),
                r.service.as_str(),
                &r.duration_sec.to_string(),
                if r.peer_is_international { "1" } else { "0" },
            ])?;
        }
        w.flush()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CdrError> {
        let file = File::create(path).map_err(|source| CdrError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv_to(file).map_err(|source| CdrError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// SHA-256 of the canonical CSV form, hex-encoded. Identifies a world.
    pub fn sha256_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.to_csv_string().as_bytes());
        hex_string(&hasher.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Reads a `sim_id,label` CSV. Every label must be NORMAL or FRAUD and a
/// sim may only appear once.
pub fn read_labels(path: &Path) -> Result<LabelTable, CdrError> {
    let content = std::fs::read_to_string(path).map_err(|source| CdrError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = content.lines();
    match lines.next() {
        Some("sim_id,label") => {}
        other => {
            return Err(CdrError::Labels(format!(
                "bad label header {:?}, expected \"sim_id,label\"",
                other.unwrap_or("")
            )))
        }
    }
    let mut table = LabelTable::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (sim, label) = line
            .split_once(',')
            .ok_or_else(|| CdrError::Labels(format!("line {}: missing comma", i + 2)))?;
        let label = Label::from_str(label)
            .map_err(|_| CdrError::Labels(format!("line {}: invalid label {:?}", i + 2, label)))?;
        if table.insert(sim.to_string(), label).is_some() {
            return Err(CdrError::Labels(format!(
                "line {}: duplicate sim_id {:?}",
                i + 2,
                sim
            )));
        }
    }
    Ok(table)
}

pub fn write_labels(labels: &LabelTable, path: &Path) -> Result<(), CdrError> {
    let mut out = String::from("sim_id,label\n");
    for (sim, label) in labels {
        out.push_str(sim);
        out.push(',');
        out.push_str(label.as_str());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| CdrError::Io {
        path: path.display().to_string(),
        source,
    })
}
