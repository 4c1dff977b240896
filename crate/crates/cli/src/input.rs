//! Count series ingestion.

use std::io::Read;

use geoinar::CountSeries;

use crate::error::{CliError, Result};

fn parse_count(token: &str, line: u64) -> Result<u64> {
    if let Ok(v) = token.parse::<u64>() {
        return Ok(v);
    }
    match token.parse::<i64>() {
        Ok(v) if v < 0 => Err(CliError::parse(line, format!("negative count {v}"))),
        _ => Err(CliError::parse(line, format!("'{token}' is not a non-negative integer"))),
    }
}

/// Reads one count per line, or `time,count` rows.
///
/// A first row whose count field is not numeric is taken as a header. Blank
/// lines are skipped. With two columns the first becomes the series labels.
pub fn parse_count_csv<R: Read>(input: R) -> Result<CountSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let count_field = match record.len() {
            1 | 2 => &record[record.len() - 1],
            n => return Err(CliError::parse(line, format!("expected 1 or 2 columns, found {n}"))),
        };
        if values.is_empty() && width.is_none() && count_field.parse::<f64>().is_err() {
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(CliError::parse(
                    line,
                    format!("expected {w} columns, found {}", record.len()),
                ))
            }
            _ => width = Some(record.len()),
        }
        values.push(parse_count(count_field, line)?);
        if record.len() == 2 {
            labels.push(record[0].to_string());
        }
    }
    if values.is_empty() {
        return Err(CliError::parse(1, "no counts found"));
    }
    let series = if labels.is_empty() {
        CountSeries::new(values)?
    } else {
        CountSeries::with_labels(values, labels)?
    };
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CountSeries> {
        parse_count_csv(s.as_bytes())
    }

    fn line_of(err: CliError) -> u64 {
        match err {
            CliError::Parse { line, .. } => line,
            other => panic!("not a parse error: {other}"),
        }
    }

    #[test]
    fn single_column() {
        assert_eq!(parse("0\n2\n1\n").unwrap().values(), &[0, 2, 1]);
        assert_eq!(parse("count\n4\n5\n\n\n").unwrap().values(), &[4, 5]);
    }

    #[test]
    fn labelled_columns() {
        let s = parse("t,count\n2003-01,0\n2003-02,3\n").unwrap();
        assert_eq!(s.values(), &[0, 3]);
        assert_eq!(s.labels().unwrap(), &["2003-01".to_string(), "2003-02".to_string()]);
    }

    #[test]
    fn bad_tokens_report_their_line() {
        assert_eq!(line_of(parse("1\n-2\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("1\n2\nthree\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("1\n2.5\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("t,c\na,1\nb,2,3\n").unwrap_err()), 3);
        assert!(parse("").is_err());
        assert!(parse("count\n").is_err());
    }

    #[test]
    fn mixed_widths_are_rejected() {
        assert_eq!(line_of(parse("1\na,2\n").unwrap_err()), 2);
    }
}
