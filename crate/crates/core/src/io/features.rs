//! Feature CSV: `sample_id,group,attack_id,f_0001,…,f_{T·L}`.
//!
//! `group` and `attack_id` are written as names; the reader also accepts
//! the numeric MBFA codes. Values carry 9 significant digits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::record::{AttackId, Group, MbfFeature};

/// `v` with 9 significant digits in the shortest of fixed or scientific form.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..9).contains(&exp) {
        let mut s = format!("{:.*}", (8 - exp).max(0) as usize, v);
        if s.contains('.') {
            s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        s
    } else {
        format!("{v:.8e}")
    };
    s
}

pub fn write_features<W: Write>(out: W, features: &[MbfFeature]) -> Result<()> {
    let dim = features.first().map_or(0, |f| f.values.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sample_id".to_string(), "group".into(), "attack_id".into()];
    header.extend((1..=dim).map(|i| format!("f_{i:04}")));
    w.write_record(&header).map_err(csv_err)?;
    for f in features {
        if f.values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: f.values.len() });
        }
        let mut row = vec![f.sample_id.to_string(), f.group.name().to_string(), f.attack.name().to_string()];
        row.extend(f.values.iter().map(|&v| format_sig9(v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("write failed: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("feature CSV: {e}"))
}

fn parse_group(s: &str) -> Result<Group> {
    match s.parse::<u8>() {
        Ok(code) => Group::from_code(code).ok_or_else(|| Error::InvalidParameter(format!("unknown group code {code}"))),
        Err(_) => s.parse(),
    }
}

fn parse_attack(s: &str) -> Result<AttackId> {
    match s.parse::<u8>() {
        Ok(code) => AttackId::from_code(code).ok_or_else(|| Error::InvalidParameter(format!("unknown attack code {code}"))),
        Err(_) => s.parse(),
    }
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<MbfFeature>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let fixed = ["sample_id", "group", "attack_id"];
    if header.len() < 3 || header.iter().take(3).ne(fixed) {
        return Err(Error::InvalidParameter(format!("feature CSV header must start with {}", fixed.join(","))));
    }
    let dim = header.len() - 3;
    let mut out = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |what: &str| Error::InvalidParameter(format!("feature CSV row {}: bad {what}", line + 1));
        let sample_id = row[0].parse::<u64>().map_err(|_| bad("sample_id"))?;
        let group = parse_group(&row[1])?;
        let attack = parse_attack(&row[2])?;
        let values = row
            .iter()
            .skip(3)
            .map(|v| v.parse::<f64>().map_err(|_| bad("value")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: values.len() });
        }
        out.push(MbfFeature { sample_id, group, attack, values, degenerate_layers: Vec::new() });
    }
    Ok(out)
}

fn open_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("{}: {e}", path.display()))
}

pub fn read_features_file(path: &Path) -> Result<Vec<MbfFeature>> {
    read_features(File::open(path).map_err(|e| open_err(path, e))?)
}

pub fn write_features_file(path: &Path, features: &[MbfFeature]) -> Result<()> {
    write_features(File::create(path).map_err(|e| open_err(path, e))?, features)
}
