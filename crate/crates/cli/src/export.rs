//! CSV traces: one row per `(j, k)` with the clause flags, then a second
//! table of clause-set counts at each checkpoint. Re-reading the file gives
//! back the values, the clause sets and the checkpoints.

use std::io::{Read, Write};

use ddchaos::chaos::{all_conditions, clause_sets, ClauseSets, DensityRule};
use ddchaos::{Error, PieceSet, Result};

use crate::scenarios::TraceExport;

pub const TRACE_HEADER: [&str; 5] = ["j", "k", "s_value", "in_upper_set", "in_lower_set"];
pub const DENSITY_HEADER: [&str; 5] = ["j", "set", "checkpoint", "count", "ratio"];

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

fn checkpoints_of(rule: &DensityRule, k: u64) -> Vec<u64> {
    match rule {
        DensityRule::Checkpoints { checkpoints, .. } => checkpoints.clone(),
        DensityRule::Exact => vec![k],
    }
}

pub fn write_trace(ex: &TraceExport, w: impl Write) -> Result<()> {
    let t = &ex.trace;
    let k = t.len();
    let sets = clause_sets(t, ex.sigma, ex.eps)?;
    let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    wr.write_record(TRACE_HEADER).map_err(csv_err)?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for j in 1..=t.families() {
        let (up, lo) = (sets.upper[j - 1].bitmap(k), sets.lower[j - 1].bitmap(k));
        for kk in 1..=k {
            let i = kk as usize - 1;
            wr.write_record([
                j.to_string(),
                kk.to_string(),
                t.value(j, kk).to_string(),
                flag(up[i]).into(),
                flag(lo[i]).into(),
            ])
            .map_err(csv_err)?;
        }
    }
    wr.write_record(DENSITY_HEADER).map_err(csv_err)?;
    let cps = checkpoints_of(&ex.rule, k);
    for j in 1..=t.families() {
        for (name, set) in [("upper", &sets.upper[j - 1]), ("lower", &sets.lower[j - 1])] {
            for pt in set.profile(&cps)?.points {
                wr.write_record([
                    j.to_string(),
                    name.into(),
                    pt.n.to_string(),
                    pt.count.to_string(),
                    pt.ratio.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    wr.flush().map_err(csv_err)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub j: usize,
    pub set: String,
    pub checkpoint: u64,
    pub count: u64,
    pub ratio: f64,
}

/// A trace read back from CSV.
#[derive(Clone, Debug)]
pub struct ImportedTrace {
    /// `values[j−1][k−1]`.
    pub values: Vec<Vec<f64>>,
    pub sets: ClauseSets,
    pub densities: Vec<DensityRow>,
}

impl ImportedTrace {
    pub fn checkpoints(&self) -> Vec<u64> {
        let mut c: Vec<u64> = self.densities.iter().map(|d| d.checkpoint).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// The twelve verdicts from the stored flags at the stored checkpoints.
    pub fn verdicts(&self, delta: f64) -> Result<Vec<bool>> {
        all_conditions(
            &self.sets,
            &DensityRule::checkpoints(self.checkpoints(), delta),
        )
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| csv_err(format!("bad field {i} in {rec:?}")))
}

pub fn read_trace(r: impl Read) -> Result<ImportedTrace> {
    let mut rd = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_reader(r);
    let mut rows = rd.records();
    let head = rows
        .next()
        .ok_or_else(|| csv_err("empty file"))?
        .map_err(csv_err)?;
    if head.iter().ne(TRACE_HEADER) {
        return Err(csv_err("unexpected header"));
    }
    let mut values: Vec<Vec<f64>> = Vec::new();
    let (mut up, mut lo): (Vec<Vec<bool>>, Vec<Vec<bool>>) = (Vec::new(), Vec::new());
    let mut densities = Vec::new();
    let mut second = false;
    for rec in rows {
        let rec = rec.map_err(csv_err)?;
        if rec.iter().eq(DENSITY_HEADER) {
            second = true;
            continue;
        }
        let j: usize = field(&rec, 0)?;
        if j == 0 {
            return Err(csv_err("family index starts at 1"));
        }
        if second {
            densities.push(DensityRow {
                j,
                set: field(&rec, 1)?,
                checkpoint: field(&rec, 2)?,
                count: field(&rec, 3)?,
                ratio: field(&rec, 4)?,
            });
            continue;
        }
        let k: usize = field(&rec, 1)?;
        if j > values.len() + 1
            || (j == values.len() + 1 && k != 1)
            || (j <= values.len() && k != values[j - 1].len() + 1)
        {
            return Err(csv_err(format!("rows out of order at j = {j}, k = {k}")));
        }
        if j > values.len() {
            values.push(Vec::new());
            up.push(Vec::new());
            lo.push(Vec::new());
        }
        values[j - 1].push(field(&rec, 2)?);
        up[j - 1].push(field::<u8>(&rec, 3)? == 1);
        lo[j - 1].push(field::<u8>(&rec, 4)? == 1);
    }
    if values.is_empty() || values.iter().any(|v| v.len() != values[0].len()) {
        return Err(csv_err("ragged or empty trace table"));
    }
    let sets = ClauseSets {
        upper: up.iter().map(|b| PieceSet::from_bitmap(b)).collect(),
        lower: lo.iter().map(|b| PieceSet::from_bitmap(b)).collect(),
    };
    Ok(ImportedTrace {
        values,
        sets,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ddchaos::chaos::{SelectionMode, TraceMatrix};

    #[test]
    fn flags_and_counts_survive_a_round_trip() {
        let t = TraceMatrix::new(
            vec![vec![0.0, 1.5, 0.1, 2.0], vec![1.0, 0.01, 3.0, 0.3]],
            vec![2, 4],
            SelectionMode::SingleValued,
        )
        .unwrap();
        let ex = TraceExport {
            trace: t.clone(),
            sigma: 1.0,
            eps: 0.2,
            rule: DensityRule::checkpoints(vec![2, 4], 0.1),
        };
        let mut buf = Vec::new();
        write_trace(&ex, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.values, t.values);
        assert_eq!(back.checkpoints(), vec![2, 4]);
        let sets = clause_sets(&t, 1.0, 0.2).unwrap();
        for (a, b) in back
            .sets
            .upper
            .iter()
            .chain(&back.sets.lower)
            .zip(sets.upper.iter().chain(&sets.lower))
        {
            assert_eq!(a.bitmap(4), b.bitmap(4));
        }
        assert_eq!(back.densities.len(), 2 * 2 * 2);
        assert!(back
            .densities
            .iter()
            .all(|d| (0.0..=1.0).contains(&d.ratio)));
    }

    #[test]
    fn rejects_shuffled_rows() {
        let csv = "j,k,s_value,in_upper_set,in_lower_set\n1,2,0.5,0,0\n";
        assert!(read_trace(csv.as_bytes()).is_err());
    }
}
