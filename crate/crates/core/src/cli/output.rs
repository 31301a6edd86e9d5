use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{ResultRow, ValidationSummary};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "gamma_db,height_m,lambda_per_km2,n_uav,n_ue,pcov_analytic,pcov_mc,mc_ci_low,mc_ci_high,n_realizations,seed";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `rows` as CSV. Floats use the shortest representation that
/// round-trips, so the output is bit-exact.
pub fn emit_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Usage("no result rows to write".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        let p = &r.point;
        let mc = r.mc.as_ref();
        w.write_record([
            p.gamma_db.to_string(),
            p.height_m.to_string(),
            p.lambda_per_km2.to_string(),
            p.n_uav.to_string(),
            p.n_ue.to_string(),
            opt(r.pcov_analytic),
            opt(mc.map(|m| m.pcov)),
            opt(mc.map(|m| m.ci_low)),
            opt(mc.map(|m| m.ci_high)),
            opt(mc.map(|m| m.n_realizations)),
            opt(mc.map(|m| m.seed)),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    emit_csv(rows, &mut buf)?;
    buf.flush().map_err(io)
}

/// Group key: threshold, density and antenna configuration.
#[derive(PartialEq, PartialOrd)]
struct Group(f64, f64, u32, u32);

impl Eq for Group {}
impl Ord for Group {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&o.0)
            .then(self.1.total_cmp(&o.1))
            .then(self.2.cmp(&o.2))
            .then(self.3.cmp(&o.3))
    }
}

/// Human-readable summary: the best altitude and peak coverage of every
/// altitude sweep, followed by flagged and failed points.
pub fn emit_report(rows: &[ResultRow], summary: Option<&ValidationSummary>) -> String {
    let mut out = String::new();
    let mut groups: BTreeMap<Group, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let p = &r.point;
        groups
            .entry(Group(p.gamma_db, p.lambda_per_km2, p.n_uav, p.n_ue))
            .or_default()
            .push(r);
    }
    for (Group(gamma, lambda, n_uav, n_ue), members) in &groups {
        let mut best: Option<(f64, f64)> = None;
        for r in members {
            if let Some(v) = r.pcov_analytic {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((r.point.height_m, v));
                }
            }
        }
        let _ = write!(out, "gamma = {gamma} dB, lambda = {lambda} /km^2, G = {n_uav}x{n_ue}: ");
        match best {
            Some((h, v)) if members.len() > 1 => {
                let _ = writeln!(out, "h_opt = {h} m, peak P_cov = {v:.6}");
            }
            Some((h, v)) => {
                let _ = writeln!(out, "h = {h} m, P_cov = {v:.6}");
            }
            None => {
                let _ = writeln!(out, "no analytic value");
            }
        }
    }
    for r in rows.iter().filter(|r| r.flagged) {
        let p = &r.point;
        let _ = write!(
            out,
            "flagged: gamma = {} dB, h = {} m, lambda = {} /km^2, G = {}x{}: analytic ",
            p.gamma_db, p.height_m, p.lambda_per_km2, p.n_uav, p.n_ue
        );
        let analytic = r.pcov_analytic.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        match &r.mc {
            Some(m) => {
                let _ = writeln!(out, "{analytic} outside [{:.6}, {:.6}]", m.ci_low, m.ci_high);
            }
            None => {
                let _ = writeln!(out, "{analytic}");
            }
        }
    }
    for r in rows {
        if let Some(f) = &r.failure {
            let p = &r.point;
            let _ = writeln!(
                out,
                "failed: gamma = {} dB, h = {} m, lambda = {} /km^2, G = {}x{}: {f}",
                p.gamma_db, p.height_m, p.lambda_per_km2, p.n_uav, p.n_ue
            );
        }
    }
    if let Some(s) = summary {
        let _ = writeln!(
            out,
            "validation: {} of {} points flagged ({:.2}%, bound {:.2}%), {} numerical failures: {}",
            s.flagged,
            s.points,
            100.0 * s.flagged_fraction(),
            100.0 * s.max_flagged,
            s.failed,
            if s.bound_exceeded() { "FAIL" } else { "ok" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{GridPoint, McColumns};
    use super::*;

    fn row(h: f64, v: f64) -> ResultRow {
        ResultRow {
            point: GridPoint {
                gamma_db: -5.0,
                height_m: h,
                lambda_per_km2: 5.0,
                n_uav: 8,
                n_ue: 8,
            },
            pcov_analytic: Some(v),
            mc: None,
            failure: None,
            flagged: false,
        }
    }

    #[test]
    fn single_row_csv() {
        let mut buf = Vec::new();
        emit_csv(&[row(200.0, 0.1 + 0.2)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n-5,200,5,8,8,0.30000000000000004,,,,,\n"));
        assert!(emit_csv(&[], Vec::new()).is_err());
    }

    #[test]
    fn mc_columns_written() {
        let mut r = row(0.0, 0.5);
        r.mc = Some(McColumns {
            pcov: 0.49,
            ci_low: 0.45,
            ci_high: 0.53,
            n_realizations: 1000,
            seed: 42,
        });
        let mut buf = Vec::new();
        emit_csv(&[r], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("0,5,8,8,0.5,0.49,0.45,0.53,1000,42\n"));
    }

    #[test]
    fn report_picks_peak() {
        let rows = [row(300.0, 0.9), row(338.0, 0.95), row(400.0, 0.95)];
        let text = emit_report(&rows, None);
        assert!(text.contains("h_opt = 338 m, peak P_cov = 0.950000"), "{text}");
    }

    #[test]
    fn unwritable_path() {
        let err = write_csv(&[row(0.0, 0.1)], "/nonexistent-dir/x.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
