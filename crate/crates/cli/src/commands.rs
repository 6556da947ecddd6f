use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use harmonium::correlations::{joint_distribution_aa, joint_distribution_ab, one_body_matrix, Grid, GridValues, DEFAULT_RESOLUTION};
use harmonium::model::ModelParams;
use harmonium::oracle::{run_verify, VerifyOptions};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{EvalArgs, Format, GridArgs, GridQuantity, SweepArgs, VerifyArgs};
use crate::config::Config;
use crate::quantity::{check_names, evaluate, parse_values, QUANTITIES};
use crate::UsageError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn point_params(n: Option<usize>, lambda: Option<f64>, nlambda: Option<f64>) -> anyhow::Result<ModelParams> {
    let n = n.ok_or_else(|| UsageError("--n is required".into()))?;
    let p = match (lambda, nlambda) {
        (Some(l), None) => ModelParams::new(n, l)?,
        (None, Some(nl)) => ModelParams::from_n_lambda(n, nl)?,
        (None, None) => return Err(UsageError("one of --lambda or --nlambda is required".into()).into()),
        (Some(_), Some(_)) => return Err(UsageError("--lambda and --nlambda are mutually exclusive".into()).into()),
    };
    Ok(p)
}

// A flag beats the file; a flag for one coupling form hides the file's other form.
fn coupling<T>(flag_l: Option<T>, flag_nl: Option<T>, file_l: Option<T>, file_nl: Option<T>) -> (Option<T>, Option<T>) {
    if flag_l.is_some() || flag_nl.is_some() {
        (flag_l, flag_nl)
    } else {
        (file_l, file_nl)
    }
}

fn list_or<T>(flag: Vec<T>, file: Option<Vec<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.unwrap_or_default()
    } else {
        flag
    }
}

#[derive(Serialize)]
struct EvalRecord<'a> {
    n: usize,
    lambda: f64,
    n_lambda: f64,
    results: Vec<Named<'a>>,
}

#[derive(Serialize)]
struct Named<'a> {
    quantity: &'a str,
    value: f64,
}

pub fn eval(args: EvalArgs, cfg: &Config) -> anyhow::Result<()> {
    let file = &cfg.eval;
    let (lambda, nlambda) = coupling(args.lambda, args.nlambda, file.lambda, file.nlambda);
    let params = point_params(args.n.or(file.n), lambda, nlambda)?;
    let names = list_or(args.quantity, file.quantity.clone());
    check_names(&names)?;
    let format = args.format.or(file.format).unwrap_or(Format::Text);
    let results = names
        .iter()
        .map(|q| Ok(Named { quantity: q, value: evaluate(q, &params)? }))
        .collect::<harmonium::Result<Vec<_>>>()?;
    let mut out = open_output(None)?;
    match format {
        Format::Text if results.len() == 1 => writeln!(out, "{:?}", results[0].value)?,
        Format::Text => {
            for r in &results {
                writeln!(out, "{} = {:?}", r.quantity, r.value)?;
            }
        }
        Format::Json => {
            let rec = EvalRecord {
                n: params.n(),
                lambda: params.lambda(),
                n_lambda: params.n_lambda(),
                results,
            };
            serde_json::to_writer_pretty(&mut out, &rec)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "# harmonium {VERSION} eval")?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["n", "lambda", "n_lambda", "quantity", "value"])?;
            for r in &results {
                w.write_record([
                    params.n().to_string(),
                    sci(params.lambda()),
                    sci(params.n_lambda()),
                    r.quantity.to_string(),
                    sci(r.value),
                ])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepRow {
    n: usize,
    lambda: f64,
    n_lambda: f64,
    quantity: String,
    value: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    version: &'a str,
    n: &'a [usize],
    coupling: String,
    quantities: &'a [String],
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    meta: SweepMeta<'a>,
    rows: &'a [SweepRow],
}

pub fn sweep(args: SweepArgs, cfg: &Config) -> anyhow::Result<()> {
    let file = &cfg.sweep;
    let mut ns = list_or(args.n, file.n.clone());
    if ns.is_empty() {
        return Err(UsageError("--n needs at least one value".into()).into());
    }
    ns.sort_unstable();
    ns.dedup();
    let (lambda, nlambda) = coupling(
        args.lambda,
        args.nlambda,
        file.lambda.clone().map(|v| v.into_text()),
        file.nlambda.clone().map(|v| v.into_text()),
    );
    let (coupling_text, scaled) = match (lambda, nlambda) {
        (Some(l), None) => (format!("lambda={l}"), false),
        (None, Some(nl)) => (format!("nlambda={nl}"), true),
        (None, None) => return Err(UsageError("one of --lambda or --nlambda is required".into()).into()),
        (Some(_), Some(_)) => return Err(UsageError("--lambda and --nlambda are mutually exclusive".into()).into()),
    };
    let values = parse_values(coupling_text.split_once('=').map_or("", |(_, v)| v))?;
    let mut names = list_or(args.quantity, file.quantity.clone());
    check_names(&names)?;
    names.sort();
    names.dedup();
    let format = args.format.or(file.format).unwrap_or(Format::Csv);
    if format == Format::Text {
        return Err(UsageError("sweep writes csv or json".into()).into());
    }

    let mut points = Vec::new();
    for &n in &ns {
        let mut row: Vec<ModelParams> = values
            .iter()
            .map(|&v| if scaled { ModelParams::from_n_lambda(n, v) } else { ModelParams::new(n, v) })
            .collect::<harmonium::Result<_>>()?;
        row.sort_by(|a, b| a.lambda().total_cmp(&b.lambda()));
        row.dedup_by(|a, b| a.lambda() == b.lambda());
        points.extend(row);
    }
    let cells: Vec<(ModelParams, &str)> = points
        .iter()
        .flat_map(|p| names.iter().map(move |q| (*p, q.as_str())))
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|(p, q)| {
            let r = evaluate(q, p);
            SweepRow {
                n: p.n(),
                lambda: p.lambda(),
                n_lambda: p.n_lambda(),
                quantity: q.to_string(),
                value: r.as_ref().ok().copied(),
                error: r.err().map(|e| e.to_string()),
            }
        })
        .collect();

    let mut out = open_output(args.output.as_deref().or(file.output.as_deref()))?;
    let n_text = ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    match format {
        Format::Json => {
            let doc = SweepDocument {
                meta: SweepMeta {
                    version: VERSION,
                    n: &ns,
                    coupling: coupling_text,
                    quantities: &names,
                },
                rows: &rows,
            };
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        _ => {
            writeln!(out, "# harmonium {VERSION} sweep")?;
            writeln!(out, "# n={n_text} {coupling_text} quantities={}", names.join(","))?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["n", "lambda", "n_lambda", "quantity", "value", "error"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    sci(r.lambda),
                    sci(r.n_lambda),
                    r.quantity.clone(),
                    r.value.map(sci).unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep cells failed; see the error column", rows.len());
    }
    Ok(())
}

fn parse_range(text: &str, resolution: usize) -> anyhow::Result<Grid> {
    let sep = if text.contains(':') { ':' } else { ',' };
    let bounds = text
        .split(sep)
        .map(|s| parse_values(s).map(|v| v[0]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match bounds[..] {
        [half] => Grid::symmetric(half, resolution)?,
        [lo, hi] => Grid::new(lo, hi, resolution)?,
        _ => return Err(UsageError(format!("range `{text}` must be `L` or `min:max`")).into()),
    })
}

pub fn grid(args: GridArgs, cfg: &Config) -> anyhow::Result<()> {
    let file = &cfg.grid;
    let (lambda, nlambda) = coupling(args.lambda, args.nlambda, file.lambda, file.nlambda);
    let params = point_params(args.n.or(file.n), lambda, nlambda)?;
    let quantity = args
        .quantity
        .or(file.quantity)
        .ok_or_else(|| UsageError("--quantity is required (rho_a, d_ab or d_aa)".into()))?;
    let resolution = args.resolution.or(file.resolution);
    let range = args.range.or_else(|| file.range.clone().map(|v| v.into_text()));
    let grid = match range {
        Some(r) => parse_range(&r, resolution.unwrap_or(DEFAULT_RESOLUTION))?,
        None => {
            let g = Grid::default_for(&params);
            Grid::new(g.min(), g.max(), resolution.unwrap_or(g.resolution()))?
        }
    };
    let values = tabulate(quantity, &params, &grid)?;

    let mut out = open_output(args.output.as_deref().or(file.output.as_deref()))?;
    writeln!(out, "# harmonium {VERSION} grid")?;
    writeln!(
        out,
        "# quantity={} n={} lambda={} min={} max={} resolution={}",
        quantity.name(),
        params.n(),
        sci(params.lambda()),
        sci(grid.min()),
        sci(grid.max()),
        grid.resolution()
    )?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["x1", "x2", "value"])?;
    for (i, &x) in values.axis.iter().enumerate() {
        for (j, &y) in values.axis.iter().enumerate() {
            w.write_record([sci(x), sci(y), sci(values.get(i, j))])?;
        }
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

/// The requested grid. `rho_a` is averaged with its transpose so that the
/// output is exactly symmetric; densities have rounding-level negatives
/// raised to zero.
pub fn tabulate(quantity: GridQuantity, params: &ModelParams, grid: &Grid) -> harmonium::Result<GridValues> {
    let mut g = match quantity {
        GridQuantity::RhoA => one_body_matrix(params, grid)?,
        GridQuantity::DAb => joint_distribution_ab(params, grid)?,
        GridQuantity::DAa => joint_distribution_aa(params, grid)?,
    };
    let n = g.len();
    match quantity {
        GridQuantity::RhoA => {
            for i in 0..n {
                for j in i + 1..n {
                    let v = 0.5 * (g.values[i * n + j] + g.values[j * n + i]);
                    g.values[i * n + j] = v;
                    g.values[j * n + i] = v;
                }
            }
        }
        _ => g.values.iter_mut().for_each(|v| *v = v.max(0.0)),
    }
    Ok(g)
}

pub fn verify(args: VerifyArgs, cfg: &Config) -> anyhow::Result<bool> {
    let file = &cfg.verify;
    let d = VerifyOptions::default();
    let opts = VerifyOptions {
        n_max: args.n_max.or(file.n_max).unwrap_or(d.n_max),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        mc_samples: args.mc_samples.or(file.mc_samples).unwrap_or(d.mc_samples),
        tolerance_scale: args.tolerance_scale.or(file.tolerance_scale).unwrap_or(d.tolerance_scale),
    };
    if opts.n_max == 0 {
        return Err(UsageError("--n-max must be at least 1".into()).into());
    }
    let report = run_verify(&opts)?;
    let mut out = open_output(args.output.as_deref().or(file.output.as_deref()))?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    let failures: Vec<_> = report.failures().collect();
    for f in &failures {
        eprintln!(
            "FAIL {}: closed form {:e}, oracle {:e}, error {:e} (tolerance {:e})",
            f.quantity,
            f.closed_form,
            f.oracle_value,
            if f.relative { f.rel_err } else { f.abs_err },
            f.tolerance
        );
    }
    eprintln!("{} checks, {} failed", report.checks.len(), failures.len());
    Ok(report.passed)
}

pub fn quantities() -> anyhow::Result<()> {
    let mut out = open_output(None)?;
    for q in QUANTITIES {
        writeln!(out, "{q}")?;
    }
    out.flush()?;
    Ok(())
}
