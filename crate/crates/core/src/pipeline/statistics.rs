//! Per-dimension mean and standard deviation of features by group.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::features::format_sig9;
use crate::record::MbfFeature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub group: String,
    /// 1-based feature index.
    pub dim: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

/// Statistics per dimension for each key produced by `key`, rows sorted by
/// key then dimension.
pub fn feature_statistics<F>(features: &[MbfFeature], key: F) -> Result<Vec<StatRow>>
where
    F: Fn(&MbfFeature) -> String,
{
    let dim = features.first().ok_or(Error::Empty("no features"))?.values.len();
    let mut groups: BTreeMap<String, Vec<&MbfFeature>> = BTreeMap::new();
    for f in features {
        if f.values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: f.values.len() });
        }
        groups.entry(key(f)).or_default().push(f);
    }
    let mut rows = Vec::with_capacity(groups.len() * dim);
    for (name, members) in groups {
        let n = members.len() as f64;
        for d in 0..dim {
            let mean = members.iter().map(|f| f.values[d]).sum::<f64>() / n;
            let var = members.iter().map(|f| (f.values[d] - mean).powi(2)).sum::<f64>() / n;
            rows.push(StatRow { group: name.clone(), dim: d + 1, mean, std: var.sqrt(), count: members.len() });
        }
    }
    Ok(rows)
}

/// Group key `clean`, `noisy` or `adversarial:<attack>`.
pub fn group_and_attack(f: &MbfFeature) -> String {
    match f.attack {
        crate::record::AttackId::None => f.group.name().to_string(),
        a => format!("{}:{}", f.group.name(), a.name()),
    }
}

/// `|mean_a - mean_b| / sqrt((std_a² + std_b²)/2)` per dimension.
pub fn pooled_separation(rows: &[StatRow], a: &str, b: &str) -> Result<Vec<f64>> {
    let pick = |g: &str| -> Vec<&StatRow> { rows.iter().filter(|r| r.group == g).collect() };
    let (ra, rb) = (pick(a), pick(b));
    if ra.is_empty() || rb.is_empty() {
        return Err(Error::InvalidParameter(format!("groups `{a}` and `{b}` must both be present")));
    }
    if ra.len() != rb.len() {
        return Err(Error::DimensionMismatch { expected: ra.len(), found: rb.len() });
    }
    Ok(ra
        .iter()
        .zip(&rb)
        .map(|(x, y)| {
            let pooled = ((x.std * x.std + y.std * y.std) / 2.0).sqrt();
            let diff = (x.mean - y.mean).abs();
            if pooled > 0.0 {
                diff / pooled
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect())
}

/// CSV with columns `group,dim,mean,std,count`.
pub fn write_statistics_csv<W: Write>(out: W, rows: &[StatRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidParameter(format!("statistics CSV: {e}"));
    w.write_record(["group", "dim", "mean", "std", "count"]).map_err(err)?;
    for r in rows {
        w.write_record([r.group.clone(), r.dim.to_string(), format_sig9(r.mean), format_sig9(r.std), r.count.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("statistics CSV: {e}")))
}
