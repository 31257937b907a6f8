//! CSV and JSON serialization of result rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::CliError;

/// A row with a fixed CSV header.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// 17 significant digits, so every double survives a round trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty field for `None`.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_csv<R: Record, W: Write>(rows: &[R], writer: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(R::HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut writer: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    Ok(())
}

pub fn render<R: Record>(rows: &[R], format: Format) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
    }
    Ok(buf)
}

/// Writes `rows` to `out`, or to stdout when no path is given.
pub fn emit<R: Record>(rows: &[R], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = render(rows, format)?;
    match out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&bytes)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// `results.csv` with tag `boundaries` becomes `results.boundaries.csv`.
pub fn sibling_path(out: &Path, tag: &str, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.{}", format.extension()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Pair {
        a: f64,
        b: Option<f64>,
    }

    impl Record for Pair {
        const HEADER: &'static [&'static str] = &["a", "b"];
        fn fields(&self) -> Vec<String> {
            vec![num(self.a), opt(self.b)]
        }
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let rows = [Pair { a: 0.1, b: None }, Pair { a: -2.0 / 3.0, b: Some(1e-300) }];
        let text = String::from_utf8(render(&rows, Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "1.0000000000000001e-1,");
        let a: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(a, -2.0 / 3.0);
    }

    #[test]
    fn json_round_trip() {
        let rows = vec![Pair { a: 0.1 + 0.2, b: Some(f64::MIN_POSITIVE) }, Pair { a: 1e300, b: None }];
        let bytes = render(&rows, Format::Json).unwrap();
        let back: Vec<Pair> = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling_path(Path::new("/tmp/run/pd.csv"), "boundaries", Format::Csv),
            PathBuf::from("/tmp/run/pd.boundaries.csv")
        );
        assert_eq!(
            sibling_path(Path::new("pd"), "boundaries", Format::Json),
            PathBuf::from("pd.boundaries.json")
        );
    }
}
