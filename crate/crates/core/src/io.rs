//! CSV ingestion and atomic file output.
//!
//! Input CSVs have two columns `x,y`. A first line that does not parse as
//! numbers is treated as a header and skipped. Blank lines and lines starting
//! with `#` are ignored.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::data::{Dataset, Inputs};
use crate::error::{Error, Result};
use crate::gp::{GpOptions, GpPosterior};
use crate::kernel::format::{read_kernel, write_kernel, KeyValues};

/// Two x values closer than this are duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

fn parse_row(line: &str) -> Option<std::result::Result<Vec<f64>, String>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
    match parsed {
        Ok(v) => Some(Ok(v)),
        Err(_) => {
            let numeric_any = fields.iter().any(|f| f.parse::<f64>().is_ok());
            if numeric_any {
                Some(Err(format!("cannot parse {line:?} as numbers")))
            } else {
                None
            }
        }
    }
}

/// `(line number, fields)` for every data row.
fn numeric_rows(text: &str, context: &str, columns: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        let fields = match parse_row(line) {
            Some(Ok(v)) => v,
            None if first => continue,
            None => return Err(Error::parse(context, line_no, format!("cannot parse {line:?} as numbers"))),
            Some(Err(msg)) => return Err(Error::parse(context, line_no, msg)),
        };
        if fields.len() != columns {
            return Err(Error::parse(
                context,
                line_no,
                format!("expected {columns} column(s), found {}", fields.len()),
            ));
        }
        if let Some(bad) = fields.iter().find(|v| !v.is_finite()) {
            return Err(Error::parse(context, line_no, format!("non-finite value {bad}")));
        }
        rows.push((line_no, fields));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{context}: no data rows")));
    }
    Ok(rows)
}

fn sort_and_check(rows: &mut [(usize, Vec<f64>)], context: &str) -> Result<()> {
    rows.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]).then(a.0.cmp(&b.0)));
    for pair in rows.windows(2) {
        if (pair[1].1[0] - pair[0].1[0]).abs() <= DUPLICATE_TOLERANCE {
            let (a, b) = (pair[0].0.min(pair[1].0), pair[0].0.max(pair[1].0));
            return Err(Error::Data(format!(
                "{context}: duplicate x = {} on lines {a} and {b}",
                pair[0].1[0]
            )));
        }
    }
    Ok(())
}

/// Parses `x,y` text into a dataset sorted by x.
pub fn parse_csv(text: &str, context: &str) -> Result<Dataset> {
    let mut rows = numeric_rows(text, context, 2)?;
    sort_and_check(&mut rows, context)?;
    let x: Vec<f64> = rows.iter().map(|r| r.1[0]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1[1]).collect();
    log::info!(
        "{context}: {} rows, x in [{}, {}]",
        x.len(),
        x[0],
        x[x.len() - 1]
    );
    Dataset::new(Inputs::from_1d(&x), y)
}

pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, &path.display().to_string())
}

/// Reads prediction inputs: one `x` column, or `x,y` with `y` ignored.
pub fn ingest_inputs(path: &Path) -> Result<Inputs> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    let columns = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .find_map(|l| parse_row(l).and_then(|r| r.ok()))
        .map_or(1, |v| v.len().max(1));
    if columns > 2 {
        return Err(Error::Data(format!("{context}: expected 1 or 2 columns, found {columns}")));
    }
    let rows = numeric_rows(&text, &context, columns)?;
    Ok(Inputs::from_1d(&rows.iter().map(|r| r.1[0]).collect::<Vec<_>>()))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Data(format!("{}: not a file path", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// CSV text with a header row; values use the shortest round-trip form.
pub fn csv_text(header: &[&str], columns: &[&[f64]]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| format!("{}", c[i])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn split_floats(kv: &KeyValues, key: &str) -> Result<Vec<f64>> {
    let raw: String = kv.require(key)?;
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Data(format!("model: invalid number `{t}` in `{key}`")))
        })
        .collect()
}

/// Model file text: the kernel, noise variance, centering flag and the
/// training data (one-dimensional inputs), all in `key = value` form.
pub fn model_to_text(posterior: &GpPosterior, data: &Dataset) -> Result<String> {
    if data.dim() != 1 {
        return Err(Error::Unsupported("model files store one-dimensional inputs".into()));
    }
    let mut s = String::from("# smgp model\n");
    write_kernel(posterior.spec(), "kernel", &mut s);
    s.push_str(&format!("noise_variance = {}\n", posterior.noise_variance()));
    s.push_str(&format!("center = {}\n", posterior.options().center_targets));
    s.push_str(&format!("train_x = {}\n", join(data.x.as_slice())));
    s.push_str(&format!("train_y = {}\n", join(&data.y)));
    Ok(s)
}

/// Parses a model file and refits the posterior on its training data.
pub fn model_from_text(text: &str, context: &str) -> Result<(GpPosterior, Dataset)> {
    let kv = KeyValues::parse(text, context)?;
    let spec = read_kernel(&kv, "kernel")?;
    let noise: f64 = kv.require("noise_variance")?;
    let center: bool = kv.require("center")?;
    let x = split_floats(&kv, "train_x")?;
    let y = split_floats(&kv, "train_y")?;
    kv.reject_unused()?;
    let data = Dataset::new(Inputs::from_1d(&x), y)?;
    let opts = GpOptions {
        center_targets: center,
        ..GpOptions::default()
    };
    let posterior = GpPosterior::fit(spec, noise, &data, opts)?;
    Ok((posterior, data))
}

pub fn load_model(path: &Path) -> Result<(GpPosterior, Dataset)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_text(&text, &path.display().to_string())
}
