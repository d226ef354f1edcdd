//! Number formatting and the CSV files exchanged between subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use gpsmbo_core::expr::DataMatrix;
use gpsmbo_core::Dataset;

/// Like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn fmt_g9(x: f64) -> String {
    fmt_g(x, 9)
}

pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest representation that parses back to the same `f64`; used for raw
/// per-evaluation logs so that summaries recomputed from files are exact.
pub fn fmt_exact(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s.trim() {
        "nan" | "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().with_context(|| format!("not a number: `{t}`")),
    }
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(f)))
}

/// Reads a headed CSV into its header and string records.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub fn column(header: &[String], name: &str) -> Result<usize> {
    match header.iter().position(|h| h == name) {
        Some(i) => Ok(i),
        None => bail!("missing column `{name}` (have: {})", header.join(", ")),
    }
}

/// Dataset as CSV with columns `z1..zv, y`.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv_writer(path)?;
    let v = data.x.cols();
    let mut header: Vec<String> = (1..=v).map(|i| format!("z{i}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.x.row(i).iter().map(|x| fmt_exact(*x)).collect();
        row.push(fmt_exact(data.y[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let (header, rows) = read_table(path)?;
    let y_col = column(&header, "y")?;
    let x_cols: Vec<usize> = (1..)
        .map_while(|i| header.iter().position(|h| *h == format!("z{i}")))
        .collect();
    let mut x = Vec::with_capacity(rows.len() * x_cols.len());
    let mut y = Vec::with_capacity(rows.len());
    for row in &rows {
        for &c in &x_cols {
            x.push(parse_f64(&row[c])?);
        }
        y.push(parse_f64(&row[y_col])?);
    }
    Ok(Dataset::new(DataMatrix::new(rows.len(), x_cols.len(), x), y))
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (0.049787068367863944, "0.0497870684"),
            (99999999.95, "100000000"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
    }

    #[test]
    fn exact_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -7.25, 6.02214076e23] {
            assert_eq!(parse_f64(&fmt_exact(x)).unwrap(), x);
        }
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = Dataset::new(DataMatrix::from_rows(&[vec![0.5, 1.0], vec![0.25, 2.0]]), vec![3.0, 4.0]);
        write_dataset(&p, &d).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("z1,z2,y\n"));
        assert_eq!(read_dataset(&p).unwrap(), d);
    }
}
