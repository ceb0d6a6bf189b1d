//! CSV and JSON artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use mixtype_core::pipeline::ConvergenceTable;
use mixtype_core::{Line, ResidualReport, Solution, TraceFn, TraceSet};

pub const FIELD_FILE: &str = "field.csv";
pub const TRACES_FILE: &str = "traces.csv";
pub const TRACE_DERIVS_FILE: &str = "trace_derivs.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field(dir: &Path, sol: &Solution, n: usize) -> Result<()> {
    let mut w = create(&dir.join(FIELD_FILE))?;
    writeln!(w, "subdomain,x,y,u")?;
    for (id, p, u) in sol.sample_field(n)? {
        writeln!(w, "{id},{},{},{}", num(p.x), num(p.y), num(u))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces(dir: &Path, traces: &TraceSet) -> Result<()> {
    let mut w = create(&dir.join(TRACES_FILE))?;
    let mut d = create(&dir.join(TRACE_DERIVS_FILE))?;
    writeln!(w, "line,t,tau,nu")?;
    writeln!(d, "line,t,dtau,dnu")?;
    for line in Line::ALL {
        let (tau, nu) = (traces.tau(line), traces.nu(line));
        for k in 0..=tau.intervals() {
            let t = num(tau.node(k));
            writeln!(w, "{line},{t},{},{}", num(tau.values()[k]), num(nu.values()[k]))?;
            writeln!(d, "{line},{t},{},{}", num(tau.deriv_values()[k]), num(nu.deriv_values()[k]))?;
        }
    }
    w.flush()?;
    d.flush()?;
    Ok(())
}

struct Columns {
    values: [Vec<f64>; 3],
    other: [Vec<f64>; 3],
}

fn read_columns(path: &Path, header: [&str; 4]) -> Result<Columns> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    if head != header {
        bail!("{}: expected header '{}'", path.display(), header.join(","));
    }
    let mut cols = Columns {
        values: Default::default(),
        other: Default::default(),
    };
    for (i, row) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let at = || format!("{} row {}", path.display(), i + 2);
        if fields.len() != 4 {
            bail!("{}: expected 4 columns", at());
        }
        let line = Line::ALL
            .into_iter()
            .find(|l| l.to_string() == fields[0])
            .with_context(|| format!("{}: unknown line '{}'", at(), fields[0]))?;
        let parse = |s: &str| s.parse::<f64>().with_context(|| format!("{}: '{s}' is not a number", at()));
        let slot = line.index() as usize - 1;
        cols.values[slot].push(parse(fields[2])?);
        cols.other[slot].push(parse(fields[3])?);
    }
    Ok(cols)
}

/// Traces written by [`write_traces`]; derivatives are taken from the
/// companion file when it exists.
pub fn read_traces(dir: &Path) -> Result<TraceSet> {
    let main = read_columns(&dir.join(TRACES_FILE), ["line", "t", "tau", "nu"])?;
    let derivs_path = dir.join(TRACE_DERIVS_FILE);
    let derivs = if derivs_path.exists() {
        Some(read_columns(&derivs_path, ["line", "t", "dtau", "dnu"])?)
    } else {
        None
    };
    let build = |values: &Vec<f64>, d: Option<&Vec<f64>>| -> Result<TraceFn> {
        Ok(match d {
            Some(d) => TraceFn::from_values_and_derivs(values.clone(), d.clone())?,
            None => TraceFn::from_values(values.clone())?,
        })
    };
    let trace = |i: usize, tau: bool| -> Result<TraceFn> {
        let (v, d) = if tau {
            (&main.values[i], derivs.as_ref().map(|c| &c.values[i]))
        } else {
            (&main.other[i], derivs.as_ref().map(|c| &c.other[i]))
        };
        build(v, d).with_context(|| format!("trace of {}", Line::ALL[i]))
    };
    Ok(TraceSet {
        tau: [trace(0, true)?, trace(1, true)?, trace(2, true)?],
        nu: [trace(0, false)?, trace(1, false)?, trace(2, false)?],
    })
}

pub fn write_report(dir: &Path, report: &ResidualReport) -> Result<()> {
    let mut w = create(&dir.join(REPORT_FILE))?;
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ResidualReport> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_convergence(dir: &Path, table: &ConvergenceTable) -> Result<()> {
    let mut w = create(&dir.join(CONVERGENCE_FILE))?;
    writeln!(w, "M,residual_max,eoc")?;
    for row in &table.rows {
        let eoc = row.eoc.map_or_else(|| "na".to_string(), num);
        writeln!(w, "{},{},{eoc}", row.m, num(row.residual_max))?;
    }
    w.flush()?;
    Ok(())
}
