use super::*;
use chrono::{TimeZone, Utc};

fn ts(s: &str) -> chrono::DateTime<Utc> {
    chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%SZ")
        .unwrap()
        .and_utc()
}

fn row(id: &str, t: &str, sim: &str) -> String {
    format!("{id},{t},{sim},D{sim},I{sim},PEER,CELL1,MO,VOICE,60,0")
}

fn parse_str(s: &str) -> ParseReport {
    parse_cdr_reader(s.as_bytes()).expect("parse should succeed")
}

#[test]
fn parses_valid_rows() {
    let f = format!(
        "{CDR_HEADER}\n{}\n{}\n{}\n",
        row("R1", "2024-01-01T10:00:00Z", "A"),
        row("R2", "2024-01-01T11:00:00Z", "B"),
        row("R3", "2024-01-01T09:00:00Z", "C"),
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 3);
    assert!(report.rejected.is_empty());
    assert_eq!(report.extra_columns, 0);
    // sorted by timestamp
    let ids: Vec<&str> = report
        .dataset
        .records()
        .iter()
        .map(|r| r.record_id.as_str())
        .collect();
    assert_eq!(ids, ["R3", "R1", "R2"]);
}

#[test]
fn rejects_invalid_direction_enum() {
    let f = format!(
        "{CDR_HEADER}\n{}\nR2,2024-01-01T11:00:00Z,B,DB,IB,PEER,CELL1,XX,VOICE,60,0\n",
        row("R1", "2024-01-01T10:00:00Z", "A"),
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 1);
    assert_eq!(report.rejected.len(), 1);
    assert_eq!(report.rejected[0].line, 3);
    assert!(report.rejected[0].reason.contains("direction"));
}

#[test]
fn rejects_sms_with_nonzero_duration() {
    let f = format!("{CDR_HEADER}\nR1,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,SMS,5,0\n");
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 0);
    assert!(report.rejected[0].reason.contains("sms"));
}

#[test]
fn rejects_bad_timestamp_boolean_and_duration() {
    let f = format!(
        "{CDR_HEADER}\n\
         R1,2024-01-01 10:00:00,A,DA,IA,P,C,MO,VOICE,60,0\n\
         R2,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,60,yes\n\
         R3,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,-4,0\n\
         R4,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,FAX,60,0\n"
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 0);
    assert_eq!(report.rejected.len(), 4);
    assert_eq!(
        report.rejected.iter().map(|r| r.line).collect::<Vec<_>>(),
        [2, 3, 4, 5]
    );
}

#[test]
fn header_must_match() {
    let err = parse_cdr_reader("record_id,когда,sim_id\nx".as_bytes()).unwrap_err();
    assert!(matches!(err, CdrError::Schema(_)));
    let err = parse_cdr_reader("".as_bytes()).unwrap_err();
    assert!(matches!(err, CdrError::Schema(_)));
}

#[test]
fn unreadable_file_is_io_error() {
    let err = parse_cdr_file(std::path::Path::new("/no/such/file.csv")).unwrap_err();
    assert!(matches!(err, CdrError::Io { .. }));
}

#[test]
fn extra_trailing_columns_are_stripped_and_counted() {
    let f = format!(
        "{CDR_HEADER},operator_noise,more\n\
         R1,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,60,0,junk,junk2\n"
    );
    let report = parse_str(&f);
    assert_eq!(report.extra_columns, 2);
    assert_eq!(report.dataset.len(), 1);
    assert!(report.dataset.to_csv_string().lines().all(|l| !l.contains("junk")));
}

/// Independent canonicalizer: split each line on commas respecting double
/// quotes, strip the quoting, then re-emit with minimal quoting and data
/// rows sorted by (timestamp, record_id).
fn canonicalize(file: &str) -> String {
    fn split_csv(line: &str) -> Vec<String> {
        let mut fields = Vec::new();
        let mut cur = String::new();
        let mut in_quotes = false;
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '"' if in_quotes => {
                    if chars.peek() == Some(&'"') {
                        cur.push('"');
                        chars.next();
                    } else {
                        in_quotes = false;
                    }
                }
                '"' => in_quotes = true,
                ',' if !in_quotes => fields.push(std::mem::take(&mut cur)),
                c => cur.push(c),
            }
        }
        fields.push(cur);
        fields
    }
    fn emit(fields: &[String]) -> String {
        let quoted: Vec<String> = fields
            .iter()
            .map(|f| {
                if f.contains(',') || f.contains('"') || f.contains('\n') {
                    format!("\"{}\"", f.replace('"', "\"\""))
                } else {
                    f.clone()
                }
            })
            .collect();
        quoted.join(",")
    }

    let mut lines = file.lines();
    let header = split_csv(lines.next().unwrap());
    let mut rows: Vec<Vec<String>> = lines.filter(|l| !l.is_empty()).map(split_csv).collect();
    // timestamp strings in this fixed format sort chronologically
    rows.sort_by(|a, b| (&a[1], &a[0]).cmp(&(&b[1], &b[0])));
    let mut out = emit(&header[..11]);
    out.push('\n');
    for r in rows {
        out.push_str(&emit(&r[..11]));
        out.push('\n');
    }
    out
}

#[test]
fn parse_serialize_round_trip_is_canonicalization() {
    // shuffled rows, one needlessly quoted field, one field that must stay quoted
    let f = format!(
        "{CDR_HEADER}\n\
         R2,2024-01-01T11:00:00Z,\"B\",DB,IB,PEER,CELL1,MT,SMS,0,1\n\
         R1,2024-01-01T10:00:00Z,A,DA,IA,\"PE,ER\",CELL1,MO,VOICE,61,0\n\
         R0,2024-01-01T10:00:00Z,C,DC,IC,PEER,CELL2,MO,DATA,300,0\n"
    );
    let report = parse_str(&f);
    assert!(report.rejected.is_empty());
    assert_eq!(report.dataset.to_csv_string(), canonicalize(&f));
}

#[test]
fn round_trip_of_canonical_output_is_identity() {
    let f = format!(
        "{CDR_HEADER}\n{}\n{}\n",
        row("R1", "2024-01-01T10:00:00Z", "A"),
        row("R2", "2024-01-01T11:00:00Z", "B"),
    );
    let once = parse_str(&f).dataset.to_csv_string();
    let twice = parse_str(&once).dataset.to_csv_string();
    assert_eq!(once, twice);
}

#[test]
fn clean_removes_duplicate_record_ids_keeping_first() {
    let f = format!(
        "{CDR_HEADER}\n{}\n{}\n",
        row("R1", "2024-01-01T10:00:00Z", "A"),
        row("R1", "2024-01-01T12:00:00Z", "B"),
    );
    let report = parse_str(&f);
    let (cleaned, stats) = clean(&report.dataset);
    assert_eq!(cleaned.len(), 1);
    assert_eq!(stats.duplicates, 1);
    assert_eq!(stats.missing, 0);
    // first occurrence in sort order survives
    assert_eq!(cleaned.records()[0].sim_id, "A");
}

#[test]
fn clean_removes_empty_required_fields() {
    let f = format!(
        "{CDR_HEADER}\nR1,2024-01-01T10:00:00Z,,DA,IA,P,C,MO,VOICE,60,0\n"
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 1, "empty sim_id still parses");
    let (cleaned, stats) = clean(&report.dataset);
    assert_eq!(cleaned.len(), 0);
    assert_eq!(stats.missing, 1);
}

#[test]
fn clean_five_record_fixture() {
    // 5 rows: one duplicate id, one missing imsi -> 3 survive
    let f = format!(
        "{CDR_HEADER}\n\
         R1,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,60,0\n\
         R2,2024-01-01T11:00:00Z,B,DB,IB,P,C,MO,VOICE,60,0\n\
         R2,2024-01-01T12:00:00Z,B,DB,IB,P,C,MO,VOICE,61,0\n\
         R3,2024-01-01T13:00:00Z,C,DC,,P,C,MO,VOICE,60,0\n\
         R4,2024-01-01T14:00:00Z,D,DD,ID,P,C,MT,VOICE,30,1\n"
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 5);
    let (cleaned, stats) = clean(&report.dataset);
    assert_eq!(cleaned.len(), 3);
    assert_eq!(stats.duplicates, 1);
    assert_eq!(stats.missing, 1);
    assert_eq!(
        cleaned.len() as u64 + stats.missing + stats.duplicates,
        report.dataset.len() as u64
    );
}

#[test]
fn clean_is_idempotent() {
    let f = format!(
        "{CDR_HEADER}\n\
         R1,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,60,0\n\
         R1,2024-01-01T11:00:00Z,A,DA,IA,P,C,MO,VOICE,60,0\n\
         R3,2024-01-01T13:00:00Z,,DC,IC,P,C,MO,VOICE,60,0\n"
    );
    let (once, _) = clean(&parse_str(&f).dataset);
    let (twice, stats) = clean(&once);
    assert_eq!(once, twice);
    assert_eq!(stats, CleanStats::default());
}

fn three_record_dataset() -> Dataset {
    let f = format!(
        "{CDR_HEADER}\n{}\n{}\n{}\n",
        row("R1", "2024-01-01T10:00:00Z", "A"),
        row("R2", "2024-01-02T10:00:00Z", "B"),
        row("R3", "2024-01-03T10:00:00Z", "C"),
    );
    parse_str(&f).dataset
}

#[test]
fn slice_full_range_is_identity() {
    let d = three_record_dataset();
    let sliced = slice_window(
        &d,
        ts("2024-01-01T00:00:00Z"),
        ts("2024-01-04T00:00:00Z"),
    )
    .unwrap();
    assert_eq!(sliced.records(), d.records());
}

#[test]
fn slice_empty_intersection_keeps_bounds() {
    let d = three_record_dataset();
    let a = ts("2030-01-01T00:00:00Z");
    let b = ts("2030-02-01T00:00:00Z");
    let sliced = slice_window(&d, a, b).unwrap();
    assert!(sliced.is_empty());
    assert_eq!(sliced.window_start, a);
    assert_eq!(sliced.window_end, b);
}

#[test]
fn slice_excludes_record_at_end_boundary() {
    let d = three_record_dataset();
    let sliced = slice_window(
        &d,
        ts("2024-01-01T10:00:00Z"),
        ts("2024-01-02T10:00:00Z"),
    )
    .unwrap();
    // independent oracle: linear scan with the stated predicate
    let expect: Vec<_> = d
        .records()
        .iter()
        .filter(|r| {
            r.timestamp >= ts("2024-01-01T10:00:00Z") && r.timestamp < ts("2024-01-02T10:00:00Z")
        })
        .cloned()
        .collect();
    assert_eq!(sliced.records(), expect.as_slice());
    assert_eq!(sliced.len(), 1);
    assert_eq!(sliced.records()[0].record_id, "R1");
}

#[test]
fn slice_rejects_inverted_window() {
    let d = three_record_dataset();
    let a = ts("2024-01-02T00:00:00Z");
    assert!(matches!(
        slice_window(&d, a, a),
        Err(CdrError::InvalidWindow { .. })
    ));
}

#[test]
fn slice_windows_union_to_the_full_slice() {
    let d = three_record_dataset();
    let (a, b, c) = (
        ts("2024-01-01T00:00:00Z"),
        ts("2024-01-02T10:00:00Z"),
        ts("2024-01-04T00:00:00Z"),
    );
    let mut union: Vec<_> = slice_window(&d, a, b).unwrap().records().to_vec();
    union.extend(slice_window(&d, b, c).unwrap().records().iter().cloned());
    union.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
    assert_eq!(union.as_slice(), slice_window(&d, a, c).unwrap().records());
}

#[test]
fn label_file_round_trip() {
    let mut table = LabelTable::new();
    table.insert("S1".into(), Label::Normal);
    table.insert("F1".into(), Label::Fraud);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.csv");
    write_labels(&table, &path).unwrap();
    assert_eq!(read_labels(&path).unwrap(), table);
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "sim_id,label\nF1,FRAUD\nS1,NORMAL\n"
    );
}

#[test]
fn label_file_rejects_bad_label() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.csv");
    std::fs::write(&path, "sim_id,label\nS1,MAYBE\n").unwrap();
    assert!(matches!(read_labels(&path), Err(CdrError::Labels(_))));
}

#[test]
fn timestamps_must_be_canonical_utc() {
    let _ = Utc.timestamp_opt(0, 0); // keep the TimeZone import honest
    let f = format!(
        "{CDR_HEADER}\nR1,2024-01-01T10:00:00+00:00,A,DA,IA,P,C,MO,VOICE,60,0\n"
    );
    let report = parse_str(&f);
    assert_eq!(report.dataset.len(), 0);
    assert_eq!(report.rejected.len(), 1);
}
