//! CSV ingestion and emission. All files are UTF-8 with `.` decimals, LF
//! line endings, a required header row, and `#` comment lines.
//!
//! Data formats: density takes one `x` column; hazard takes `time,delta`
//! with delta in {0, 1}; regression takes `x,y`; event logs take one `time`
//! column with the horizon supplied by configuration. Functions are
//! serialized as `t,value` rows: a leading row at the interval's left
//! endpoint, one row per breakpoint, and a closing row at the right
//! endpoint carrying the final value.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use shapefit_core::estimators::{CensoredRecord, CensoredSample, EventLog, RegressionData, Sample};
use shapefit_core::stepfn::{Interval, PiecewiseAffine, StepFunction};

use crate::risk::RiskReport;
use crate::{Error, Result};

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: display(path),
        source,
    }
}

fn parse_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: display(path),
        row,
        message: message.into(),
    }
}

struct CsvTable {
    headers: Vec<String>,
    /// (1-based file row, cells) for each data record.
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path, expected: &[&str]) -> Result<CsvTable> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    for want in expected {
        if !headers.iter().any(|h| h == want) {
            return Err(parse_err(path, 1, format!("missing column `{want}`")));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        rows.push((row, record.iter().map(|c| c.to_string()).collect()));
    }
    Ok(CsvTable { headers, rows })
}

impl CsvTable {
    fn column(&self, name: &str) -> usize {
        self.headers.iter().position(|h| h == name).unwrap()
    }
}

fn parse_cell(path: &Path, row: usize, name: &str, cell: Option<&String>) -> Result<f64> {
    let cell = cell.ok_or_else(|| parse_err(path, row, format!("missing `{name}` cell")))?;
    cell.parse::<f64>()
        .map_err(|_| parse_err(path, row, format!("non-numeric `{name}` value `{cell}`")))
}

/// One numeric column `x`, confined to the estimation interval.
pub fn read_sample(path: &Path, interval: Interval) -> Result<Sample> {
    let table = read_table(path, &["x"])?;
    let col = table.column("x");
    let mut values = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let x = parse_cell(path, *row, "x", cells.get(col))?;
        if !interval.contains(x) {
            return Err(parse_err(
                path,
                *row,
                format!(
                    "observation {x} outside [{}, {}]",
                    interval.a(),
                    interval.b()
                ),
            ));
        }
        values.push(x);
    }
    Sample::new(values, interval).map_err(Error::from)
}

/// Columns `time,delta` with delta in {0, 1}. Times beyond the horizon are
/// kept; they still contribute to risk sets inside it.
pub fn read_censored(path: &Path, horizon: f64) -> Result<CensoredSample> {
    let table = read_table(path, &["time", "delta"])?;
    let (tcol, dcol) = (table.column("time"), table.column("delta"));
    let mut records = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let time = parse_cell(path, *row, "time", cells.get(tcol))?;
        let delta = parse_cell(path, *row, "delta", cells.get(dcol))?;
        let event = if delta == 1.0 {
            true
        } else if delta == 0.0 {
            false
        } else {
            return Err(parse_err(
                path,
                *row,
                format!("delta must be 0 or 1, got {delta}"),
            ));
        };
        if time < 0.0 {
            return Err(parse_err(path, *row, format!("negative time {time}")));
        }
        records.push(CensoredRecord { time, event });
    }
    CensoredSample::new(records, horizon).map_err(Error::from)
}

/// Columns `x,y` with the design inside `[0, 1]`.
pub fn read_regression(path: &Path) -> Result<RegressionData> {
    let table = read_table(path, &["x", "y"])?;
    let (xcol, ycol) = (table.column("x"), table.column("y"));
    let mut pairs = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let x = parse_cell(path, *row, "x", cells.get(xcol))?;
        let y = parse_cell(path, *row, "y", cells.get(ycol))?;
        if !(0.0..=1.0).contains(&x) {
            return Err(parse_err(
                path,
                *row,
                format!("design point {x} outside [0, 1]"),
            ));
        }
        pairs.push((x, y));
    }
    RegressionData::new(pairs).map_err(Error::from)
}

/// One `time` column; every time must fall inside `(0, horizon]`.
pub fn read_event_log(path: &Path, horizon: f64) -> Result<EventLog> {
    let table = read_table(path, &["time"])?;
    let col = table.column("time");
    let mut times = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let t = parse_cell(path, *row, "time", cells.get(col))?;
        if t > horizon {
            return Err(parse_err(
                path,
                *row,
                format!("time {t} beyond horizon {horizon}"),
            ));
        }
        if t <= 0.0 {
            return Err(parse_err(path, *row, format!("time {t} not positive")));
        }
        times.push(t);
    }
    times.sort_by(f64::total_cmp);
    EventLog::new(times, horizon).map_err(Error::from)
}

/// Reads a `t,value` step function over a known interval. The first row
/// must sit at the interval's left endpoint. A final row at the right
/// endpoint repeating the previous value is the closing row; a different
/// value there is a jump at the right endpoint.
pub fn read_step_function(path: &Path, interval: Interval) -> Result<StepFunction> {
    let table = read_table(path, &["t", "value"])?;
    let (tcol, vcol) = (table.column("t"), table.column("value"));
    let mut points = Vec::with_capacity(table.rows.len());
    for (row, cells) in &table.rows {
        let t = parse_cell(path, *row, "t", cells.get(tcol))?;
        let v = parse_cell(path, *row, "value", cells.get(vcol))?;
        points.push((*row, t, v));
    }
    if points.is_empty() {
        return Err(parse_err(path, 1, "no function rows"));
    }
    let tol = 1e-9 * interval.length();
    let (first_row, t0, v0) = points[0];
    if (t0 - interval.a()).abs() > tol {
        return Err(parse_err(
            path,
            first_row,
            format!("first row must sit at the left endpoint {}", interval.a()),
        ));
    }
    let mut breakpoints = Vec::new();
    let mut values = vec![v0];
    for (i, &(row, t, v)) in points.iter().enumerate().skip(1) {
        if t <= points[i - 1].1 {
            return Err(parse_err(path, row, "t values must be strictly increasing"));
        }
        let closing = i + 1 == points.len()
            && (t - interval.b()).abs() <= tol
            && v == *values.last().unwrap();
        if closing {
            break;
        }
        breakpoints.push(t);
        values.push(v);
    }
    StepFunction::new(interval, breakpoints, values, false).map_err(Error::from)
}

/// Writes a step function as `t,value`, with an optional leading `#`
/// sidecar line.
pub fn write_step_function(path: &Path, f: &StepFunction, sidecar: Option<&str>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let emit =
        |w: &mut BufWriter<File>, t: f64, v: f64| -> std::io::Result<()> { writeln!(w, "{t},{v}") };
    (|| -> std::io::Result<()> {
        if let Some(line) = sidecar {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "t,value")?;
        emit(&mut w, f.domain().a(), f.values()[0])?;
        for (t, v) in f.breakpoints().iter().zip(&f.values()[1..]) {
            emit(&mut w, *t, *v)?;
        }
        let b = f.domain().b();
        if f.breakpoints().last() != Some(&b) {
            emit(&mut w, b, *f.values().last().unwrap())?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Writes a piecewise-affine function as `t,value` knot rows; a jump emits
/// two rows at the same abscissa (left value first).
pub fn write_piecewise_affine(path: &Path, e: &PiecewiseAffine) -> Result<()> {
    let file = File::create(path).map_err(|er| io_err(path, er))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in e.knots().iter().zip(e.knot_values()) {
            if let Some(j) = e.jump() {
                if j.at == *t {
                    writeln!(w, "{t},{}", j.left_value)?;
                }
            }
            writeln!(w, "{t},{v}")?;
        }
        w.flush()
    })()
    .map_err(|er| io_err(path, er))
}

/// Writes a risk report as `metric,value` rows.
pub fn write_risk_report(path: &Path, report: &RiskReport) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "metric,value")?;
        writeln!(w, "mean_l1,{}", report.mean_l1)?;
        writeln!(w, "stderr,{}", report.stderr)?;
        writeln!(w, "replications,{}", report.replications)?;
        writeln!(w, "violations,{}", report.violations)?;
        for (name, value) in &report.extra {
            writeln!(w, "{name},{value}")?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Appends suite-prefixed rows for combined verification reports.
pub fn write_suite_reports(path: &Path, reports: &[(String, RiskReport)]) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "metric,value")?;
        for (name, report) in reports {
            writeln!(w, "{name}_mean,{}", report.mean_l1)?;
            writeln!(w, "{name}_stderr,{}", report.stderr)?;
            writeln!(w, "{name}_trials,{}", report.replications)?;
            writeln!(w, "{name}_violations,{}", report.violations)?;
            for (metric, value) in &report.extra {
                writeln!(w, "{name}_{metric},{value}")?;
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}
