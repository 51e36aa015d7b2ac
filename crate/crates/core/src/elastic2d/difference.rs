use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Snapshot;

/// `(a - b) / max(|a| ∪ |b|)` for one field at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDifference {
    pub difference: Snapshot,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSummary {
    pub field: String,
    pub t: f64,
    pub max_normalized_difference: f64,
}

impl FieldDifference {
    pub fn summary(&self) -> DifferenceSummary {
        DifferenceSummary {
            field: self.difference.field.clone(),
            t: self.difference.t,
            max_normalized_difference: self.max_abs,
        }
    }
}

fn difference_of(a: &Snapshot, b: &Snapshot) -> Result<FieldDifference> {
    if a.field != b.field || a.nx != b.nx || a.nz != b.nz {
        return Err(Error::SnapshotMismatch(format!(
            "{} ({}×{}) vs {} ({}×{})",
            a.field, a.nx, a.nz, b.field, b.nx, b.nz
        )));
    }
    if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
        return Err(Error::SnapshotMismatch(format!("{} at t={} vs t={}", a.field, a.t, b.t)));
    }
    let scale = a.max_abs().max(b.max_abs());
    let data: Vec<f64> = if scale > 0.0 {
        a.data.iter().zip(&b.data).map(|(x, y)| (x - y) / scale).collect()
    } else {
        vec![0.0; a.data.len()]
    };
    let max_abs = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(FieldDifference { difference: Snapshot { data, ..a.clone() }, max_abs })
}

/// Pairs snapshots by field name and differences each pair.
pub fn field_difference(a: &[Snapshot], b: &[Snapshot]) -> Result<Vec<FieldDifference>> {
    if a.len() != b.len() {
        return Err(Error::SnapshotMismatch(format!("{} snapshots vs {}", a.len(), b.len())));
    }
    a.iter()
        .map(|sa| {
            let sb = b
                .iter()
                .find(|sb| sb.field == sa.field && (sb.t - sa.t).abs() <= 1e-9 * sa.t.abs().max(1.0))
                .ok_or_else(|| Error::SnapshotMismatch(format!("no partner for {} at t={}", sa.field, sa.t)))?;
            difference_of(sa, sb)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(field: &str, t: f64, data: Vec<f64>) -> Snapshot {
        Snapshot { nx: 2, nz: 2, dx: 1.0, dz: 1.0, t, field: field.into(), data }
    }

    #[test]
    fn identical_snapshots_give_zero() {
        let a = vec![snap("vx", 0.1, vec![1.0, -2.0, 0.5, 0.0])];
        let d = field_difference(&a, &a).unwrap();
        assert_eq!(d[0].max_abs, 0.0);
        assert!(d[0].difference.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_by_largest_amplitude() {
        let a = vec![snap("vx", 0.1, vec![1.0, -4.0, 0.0, 0.0])];
        let b = vec![snap("vx", 0.1, vec![0.0, -4.0, 0.0, 2.0])];
        let d = field_difference(&a, &b).unwrap();
        assert_eq!(d[0].difference.data, vec![0.25, 0.0, 0.0, -0.5]);
        assert_eq!(d[0].max_abs, 0.5);
        assert_eq!(d[0].summary().field, "vx");
    }

    #[test]
    fn mismatches_are_errors() {
        let a = vec![snap("vx", 0.1, vec![0.0; 4])];
        let later = vec![snap("vx", 0.2, vec![0.0; 4])];
        assert!(matches!(field_difference(&a, &later), Err(Error::SnapshotMismatch(_))));
        let other = vec![Snapshot { nx: 4, nz: 1, ..a[0].clone() }];
        assert!(matches!(field_difference(&a, &other), Err(Error::SnapshotMismatch(_))));
        assert!(field_difference(&a, &[]).is_err());
    }
}
