use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Scientific notation with 12 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sci_opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// `n_1;n_2;...`
pub fn n_spec(n: &[usize]) -> String {
    n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Writes a header and rows with LF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_keeps_twelve_digits() {
        assert_eq!(sci(1.234_567_890_123_4e-5), "1.23456789012e-5");
        for x in [std::f64::consts::PI * 1e-7, 2.0 / 3.0, 12345.678901234] {
            let back: f64 = sci(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
        assert_eq!(sci_opt(None), "");
    }

    #[test]
    fn csv_uses_lf() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "a,b\n1,2\n");
    }
}
