//! CSV and JSON formats for matrices, vectors, and traces.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so parsing
//! a file back yields bit-identical values and identical runs produce
//! identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::problem::SparseSignal;
use crate::solver::IterateTrace;

pub fn format_matrix_csv(m: &Mat) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<Mat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{cell}'", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let cols = rows[0].len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Mat::new(data.len() / cols, cols, data))
}

/// Vectors serialize as a single CSV row.
pub fn format_vector_csv(v: &[f64]) -> String {
    let mut out = String::new();
    for (j, x) in v.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        write!(out, "{x}").unwrap();
    }
    out.push('\n');
    out
}

/// Accepts either a single row or a single column.
pub fn parse_vector_csv(text: &str) -> Result<Vec<f64>> {
    let m = parse_matrix_csv(text)?;
    if m.rows() == 1 {
        Ok(m.row(0).to_vec())
    } else if m.cols() == 1 {
        Ok((0..m.rows()).map(|i| m.get(i, 0)).collect())
    } else {
        Err(Error::Parse(format!("expected a vector, found a {}x{} matrix", m.rows(), m.cols())))
    }
}

/// Summary trace: one row per iterate. Error and union columns are empty when
/// no ground truth was supplied; the verdicts column is empty until checks
/// run. Raw iterates live in the companion iterates CSV.
pub fn format_trace_csv(
    trace: &IterateTrace,
    truth: Option<&SparseSignal>,
    report: Option<&CheckReport>,
) -> String {
    let mut out = String::from("t,tau,err2,err1,support_size,support_union_size,verdicts\n");
    for (i, rec) in trace.records.iter().enumerate() {
        let tau = rec.tau.map(|t| t.to_string()).unwrap_or_default();
        let err2 = rec.err2.map(|e| e.to_string()).unwrap_or_default();
        let err1 = rec.err1.map(|e| e.to_string()).unwrap_or_default();
        let union = truth
            .map(|sig| {
                let mut set: Vec<usize> =
                    rec.support.iter().chain(&sig.support).copied().collect();
                set.sort_unstable();
                set.dedup();
                set.len().to_string()
            })
            .unwrap_or_default();
        let verdict = match report {
            None => String::new(),
            Some(rep) => match rep.iterations.get(i) {
                None => String::new(),
                Some(check) => {
                    let mut fails = Vec::new();
                    if !check.support_bound_ok {
                        fails.push("support");
                    }
                    if check.union3_ok == Some(false) {
                        fails.push("union3");
                    }
                    if !check.offsupport.ok {
                        fails.push("offsupport");
                    }
                    if rep.applicable {
                        if !check.decay2_ok {
                            fails.push("decay2");
                        }
                        if !check.decay1_sqrt_2s_ok {
                            fails.push("decay1");
                        }
                        if check.recurrence_ok == Some(false) {
                            fails.push("recurrence");
                        }
                    }
                    if !rep.applicable {
                        if fails.is_empty() {
                            "ok(inapplicable)".to_string()
                        } else {
                            format!("fail(inapplicable):{}", fails.join("+"))
                        }
                    } else if fails.is_empty() {
                        "ok".to_string()
                    } else {
                        format!("fail:{}", fails.join("+"))
                    }
                }
            },
        };
        out.push_str(&format!(
            "{},{tau},{err2},{err1},{},{union},{verdict}\n",
            rec.t,
            rec.support.len()
        ));
    }
    out
}

/// Raw iterates: header `t,tau,x0..x{d-1}`, one row per iterate. This is the
/// file the verifier consumes, since verdicts are recomputed from iterates.
pub fn format_iterates_csv(trace: &IterateTrace) -> String {
    let d = trace.records.first().map(|r| r.x.len()).unwrap_or(0);
    let mut out = String::from("t,tau");
    for j in 0..d {
        write!(out, ",x{j}").unwrap();
    }
    out.push('\n');
    for rec in &trace.records {
        write!(out, "{}", rec.t).unwrap();
        match rec.tau {
            Some(tau) => write!(out, ",{tau}").unwrap(),
            None => out.push(','),
        }
        for v in &rec.x {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parse the iterates CSV back into (iterates, per-step taus).
pub fn parse_iterates_csv(text: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty iterates file".into()))?;
    if !header.starts_with("t,tau") {
        return Err(Error::Parse("iterates file must start with 't,tau' header".into()));
    }
    let mut xs = Vec::new();
    let mut taus = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 3 {
            return Err(Error::Parse(format!("iterates row {} too short", lineno + 2)));
        }
        let tau_cell = cells[1].trim();
        if !tau_cell.is_empty() {
            let tau = tau_cell
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: bad tau '{tau_cell}'", lineno + 2)))?;
            taus.push(tau);
        }
        let x = cells[2..]
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad value '{c}'", lineno + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        xs.push(x);
    }
    Ok((xs, taus))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(std::fs::write(path, contents)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_matrix, generate_signal, Amplitude, MatrixKind, Problem};
    use crate::solver::{recover, GammaSource, IterationBudget, RecoveryConfig, TauSource};
    use proptest::prelude::*;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let u = generate_matrix(7, 5, MatrixKind::Gaussian, 33).unwrap();
        let parsed = parse_matrix_csv(&format_matrix_csv(&u)).unwrap();
        assert_eq!(u.data(), parsed.data());
    }

    #[test]
    fn vector_round_trip_and_column_form() {
        let v = vec![1.5, -0.25, 1e-17, 0.0];
        assert_eq!(parse_vector_csv(&format_vector_csv(&v)).unwrap(), v);
        assert_eq!(parse_vector_csv("1\n2\n3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_vector_csv("1,2\n3,4\n").is_err());
    }

    #[test]
    fn ragged_matrix_rejected() {
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
        assert!(parse_matrix_csv("").is_err());
        assert!(parse_matrix_csv("1,abc\n").is_err());
    }

    #[test]
    fn trace_and_iterates_round_trip() {
        let p = Problem::generate(10, 2, 8, MatrixKind::Gaussian, Amplitude::Unit, 3).unwrap();
        let config = RecoveryConfig {
            s: 2,
            norm_bound: p.signal.norm_bound,
            gamma: GammaSource::Quarter,
            tau: TauSource::Schedule,
            iterations: IterationBudget::Fixed(4),
            stop_on_fixpoint: false,
        };
        let trace = recover(&p.ensemble, Some(&p.signal), &config).unwrap();
        let text = format_iterates_csv(&trace);
        let (xs, taus) = parse_iterates_csv(&text).unwrap();
        assert_eq!(xs.len(), trace.records.len());
        assert_eq!(taus, trace.taus);
        for (x, rec) in xs.iter().zip(&trace.records) {
            assert_eq!(x, &rec.x);
        }
        let summary = format_trace_csv(&trace, Some(&p.signal), None);
        assert!(summary.starts_with("t,tau,err2,err1,support_size,support_union_size,verdicts\n"));
        assert_eq!(summary.lines().count(), trace.records.len() + 1);
    }

    #[test]
    fn trace_without_truth_leaves_columns_empty() {
        let sig = generate_signal(6, 1, Amplitude::Unit, 5).unwrap();
        let ens = crate::problem::MeasurementEnsemble::generate(4, MatrixKind::Gaussian, 6, &sig).unwrap();
        let config = RecoveryConfig {
            s: 1,
            norm_bound: 1.0,
            gamma: GammaSource::Quarter,
            tau: TauSource::Schedule,
            iterations: IterationBudget::Fixed(2),
            stop_on_fixpoint: false,
        };
        let trace = recover(&ens, None, &config).unwrap();
        let csv = format_trace_csv(&trace, None, None);
        let line2 = csv.lines().nth(1).unwrap();
        let cells: Vec<&str> = line2.split(',').collect();
        assert_eq!(cells[2], "");
        assert_eq!(cells[3], "");
        assert_eq!(cells[5], "");
    }

    proptest! {
        #[test]
        fn csv_numbers_round_trip(values in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            1..20,
        )) {
            let text = format_vector_csv(&values);
            let parsed = parse_vector_csv(&text).unwrap();
            prop_assert_eq!(parsed.len(), values.len());
            for (a, b) in parsed.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
