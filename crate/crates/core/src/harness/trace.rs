use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::solvers::TraceRecord;

/// Which optional columns a trace carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Columns {
    pub residual: bool,
    pub estimator_mse: bool,
}

impl Columns {
    pub fn names(self) -> Vec<&'static str> {
        let mut v = vec!["k", "objective"];
        if self.residual {
            v.push("residual");
        }
        v.push("feasibility");
        if self.estimator_mse {
            v.push("estimator_mse");
        }
        v.extend(["beta_k", "wall_time_ms"]);
        v
    }

    pub fn header(self) -> String {
        self.names().join(",")
    }

    /// One CSV line (no newline). Missing optional values are empty fields.
    pub fn row(self, r: &TraceRecord) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut f = vec![r.k.to_string(), format!("{:e}", r.objective)];
        if self.residual {
            f.push(opt(r.residual));
        }
        f.push(format!("{:e}", r.feasibility));
        if self.estimator_mse {
            f.push(opt(r.estimator_mse));
        }
        f.push(format!("{:e}", r.beta_k));
        f.push(format!("{:.3}", r.wall_time_ms));
        f.join(",")
    }
}

/// Streams trace rows to a writer, flushing after each row.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: Columns,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, columns: Columns) -> io::Result<Self> {
        writeln!(out, "{}", columns.header())?;
        Ok(Self { out, columns })
    }

    pub fn write(&mut self, r: &TraceRecord) -> io::Result<()> {
        writeln!(self.out, "{}", self.columns.row(r))?;
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// A parsed trace: named columns of optional numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TraceTable {
    pub fn from_records(records: &[TraceRecord], columns: Columns) -> Self {
        let mut text = columns.header();
        for r in records {
            text.push('\n');
            text.push_str(&columns.row(r));
        }
        Self::parse_csv(&text).expect("rows produced by Columns::row parse")
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty trace file".into(),
        })?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} fields, got {}", columns.len(), fields.len()),
                });
            }
            let row = fields
                .iter()
                .map(|f| {
                    let f = f.trim();
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                            line: i + 1,
                            message: format!("invalid number {f:?}"),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("trace has no column {name:?}")))
    }

    /// `(k, value)` pairs of one column.
    pub fn column(&self, name: &str) -> Result<Vec<(f64, Option<f64>)>> {
        let (ki, ci) = (self.index("k")?, self.index(name)?);
        Ok(self
            .rows
            .iter()
            .map(|r| (r[ki].unwrap_or(f64::NAN), r[ci]))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Rows in the window dropped for missing or nonpositive values.
    pub skipped: usize,
}

/// Least squares fit of `log value = intercept + slope · log k` over
/// `k_min ≤ k ≤ k_max`.
pub fn fit_power_law(points: &[(f64, Option<f64>)], k_min: f64, k_max: f64) -> Result<SlopeFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut skipped = 0;
    for &(k, v) in points {
        if !(k >= k_min && k <= k_max) {
            continue;
        }
        match v {
            Some(v) if v > 0.0 && v.is_finite() && k > 0.0 => {
                xs.push(k.ln());
                ys.push(v.ln());
            }
            _ => skipped += 1,
        }
    }
    let n = xs.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs >= 10 usable rows in [{k_min}, {k_max}], got {n} ({skipped} skipped)"
        )));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct k values".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        used: n,
        skipped,
    })
}

pub fn fit_loglog_slope(trace: &TraceTable, column: &str, k_min: f64, k_max: f64) -> Result<SlopeFit> {
    fit_power_law(&trace.column(column)?, k_min, k_max)
}
