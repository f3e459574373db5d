//! CSV emission and parsing for experiment tables and constant reports.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a file
//! reproduces every value bit for bit. Lines starting with `#` carry run
//! metadata and are skipped by the readers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{ExperimentResult, ExperimentRow};
use crate::bounds::BoundsReport;
use crate::error::{Error, Result};

pub const EXPERIMENT_HEADER: [&str; 3] = ["resolution", "error", "bound"];
pub const KEY_VALUE_HEADER: [&str; 2] = ["key", "value"];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io("<csv stream>", source),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn metadata<W: Write>(w: &mut W, lines: &[String]) -> std::io::Result<()> {
    for l in lines {
        for part in l.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    Ok(())
}

/// Header `resolution,error,bound`, one row per entry; an absent bound is an
/// empty field. `meta` lines follow the data, each prefixed by `#`.
pub fn write_experiment<W: Write>(w: W, result: &ExperimentResult, meta: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(EXPERIMENT_HEADER).map_err(csv_error)?;
    for r in &result.rows {
        let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
        out.write_record([r.resolution.to_string(), r.error.to_string(), bound])
            .map_err(csv_error)?;
    }
    let mut w = out.into_inner().map_err(|e| Error::io("<csv stream>", e.into_error()))?;
    metadata(&mut w, meta).map_err(|e| Error::io("<csv stream>", e))?;
    w.flush().map_err(|e| Error::io("<csv stream>", e))
}

/// `key,value` rows from [`BoundsReport::entries`].
pub fn write_bounds<W: Write>(w: W, report: &BoundsReport, meta: &[String]) -> Result<()> {
    write_key_values(w, &report.entries(), meta)
}

pub fn write_key_values<W: Write>(w: W, entries: &[(&str, f64)], meta: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(KEY_VALUE_HEADER).map_err(csv_error)?;
    for (k, v) in entries {
        out.write_record([k.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    let mut w = out.into_inner().map_err(|e| Error::io("<csv stream>", e.into_error()))?;
    metadata(&mut w, meta).map_err(|e| Error::io("<csv stream>", e))?;
    w.flush().map_err(|e| Error::io("<csv stream>", e))
}

fn with_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    f(BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn emit_experiment_csv(path: impl AsRef<Path>, result: &ExperimentResult, meta: &[String]) -> Result<()> {
    with_file(path.as_ref(), |w| write_experiment(w, result, meta))
}

pub fn emit_bounds_csv(path: impl AsRef<Path>, report: &BoundsReport, meta: &[String]) -> Result<()> {
    with_file(path.as_ref(), |w| write_bounds(w, report, meta))
}

pub fn emit_key_value_csv(path: impl AsRef<Path>, entries: &[(&str, f64)], meta: &[String]) -> Result<()> {
    with_file(path.as_ref(), |w| write_key_values(w, entries, meta))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn check_header(r: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(())
}

fn float(field: &str, line: usize) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{field}` is not a number"),
    })
}

/// Rows of a `resolution,error,bound` table, in file order.
pub fn parse_experiment_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut r = reader(text);
    check_header(&mut r, &EXPERIMENT_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let bound = match &rec[2] {
            "" => None,
            b => Some(float(b, line)?),
        };
        rows.push(ExperimentRow::new(float(&rec[0], line)?, float(&rec[1], line)?, bound));
    }
    Ok(rows)
}

pub fn parse_key_value_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut r = reader(text);
    check_header(&mut r, &KEY_VALUE_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            Ok((rec[0].to_string(), float(&rec[1], line)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::compute_constants;
    use crate::uncertainty::builtin::pm_sigma;

    fn render(result: &ExperimentResult, meta: &[String]) -> String {
        let mut buf = Vec::new();
        write_experiment(&mut buf, result, meta).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_table_is_header_only() {
        let r = ExperimentResult::from_rows(vec![]);
        assert_eq!(render(&r, &[]), "resolution,error,bound\n");
    }

    #[test]
    fn single_row() {
        let r = ExperimentResult::from_rows(vec![ExperimentRow::new(0.5, 0.1, Some(0.2))]);
        assert_eq!(render(&r, &[]), "resolution,error,bound\n0.5,0.1,0.2\n");
    }

    #[test]
    fn metadata_is_skipped_on_read() {
        let r = ExperimentResult::from_rows(vec![
            ExperimentRow::new(0.5, 1.0 / 3.0, None),
            ExperimentRow::new(0.25, 1e-300, Some(f64::MAX)),
        ]);
        let text = render(&r, &["slope 1.5".into(), "two\nlines".into()]);
        assert!(text.ends_with("# slope 1.5\n# two\n# lines\n"));
        assert_eq!(parse_experiment_csv(&text).unwrap(), r.rows);
    }

    #[test]
    fn bounds_round_trip() {
        let m = pm_sigma(&[0.1, 0.3]).unwrap().validate();
        let rep = compute_constants(&m, 1.0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_bounds(&mut buf, &rep, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("key,value\nc_phi,1\n"));
        let back = parse_key_value_csv(&text).unwrap();
        let expected: Vec<(String, f64)> = rep.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn bad_input_is_a_parse_error() {
        assert!(matches!(parse_experiment_csv("a,b,c\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_experiment_csv("resolution,error,bound\n1,x,\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let r = ExperimentResult::from_rows(vec![]);
        let err = emit_experiment_csv("/nonexistent/dir/out.csv", &r, &[]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
