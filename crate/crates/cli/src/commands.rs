use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use kernquad::hermite::HERMITE_BOUND_K;
use kernquad::kq_approx::{approx_weights, machine_precision_truncation, qr_weights};
use kernquad::kq_exact::UNRELIABLE_CONDITION;
use kernquad::tensor::{tensor_integrate, test_integrand, TensorRule};
use kernquad::wce::{
    multivariate_constants, spectral_worst_case_error, theoretical_constants, worst_case_error,
};
use kernquad::{BuiltRule, MercerBasis, RuleContext, RuleRegistry};

use crate::args::{Command, Format, Options};
use crate::table::{Cell, PlotHint, Table};

/// Worst-case error sweeps stop at `√ε_mach`.
pub const WCE_FLOOR: f64 = 1.4901e-8;

/// Reference weights count as broken once `|1 - w_N/w_1|` exceeds this.
pub const SYMMETRY_CUTOFF: f64 = 1e-6;

const SWEEP_ELLS: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 1.0, 4.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] kernquad::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

fn length_scales(o: &Options, default: &[f64]) -> Result<Vec<f64>> {
    let mut v = match (o.ell, &o.ells) {
        (Some(l), _) => vec![l],
        (None, Some(ls)) => ls.clone(),
        (None, None) => default.to_vec(),
    };
    if v.is_empty() {
        return usage("no length-scales given");
    }
    if let Some(bad) = v.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return usage(format!(
            "length-scale must be positive and finite, got {bad}"
        ));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn single_length_scale(o: &Options, default: Option<f64>) -> Result<f64> {
    let v = length_scales(o, default.as_slice())?;
    match v.as_slice() {
        [l] => Ok(*l),
        [] => usage("a single --ell is required"),
        _ => usage("this command takes a single --ell"),
    }
}

fn sizes(o: &Options, default: &[usize]) -> Result<Vec<usize>> {
    let mut v = match (o.n, &o.ns) {
        (Some(n), _) => vec![n],
        (None, Some(s)) => s.0.clone(),
        (None, None) => default.to_vec(),
    };
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return usage("no rule sizes given");
    }
    Ok(v)
}

fn basis(l: f64, o: &Options) -> Result<MercerBasis> {
    Ok(MercerBasis::new(l, o.alpha)?)
}

/// Evaluates `f` over `items` in parallel and returns the results in input order.
fn ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

pub fn run(command: &Command) -> Result<()> {
    let o = command.options();
    let table = match command {
        Command::Rule(o) => cmd_rule(o)?,
        Command::WeightsCompare(o) => cmd_weights_compare(o)?,
        Command::PositivitySweep(o) => cmd_positivity_sweep(o)?,
        Command::WceSweep(o) => cmd_wce_sweep(o)?,
        Command::Integrate(o) => cmd_integrate(o, 1)?,
        Command::TensorIntegrate(o) => cmd_integrate(o, 3)?,
        Command::Constants(o) => cmd_constants(o)?,
    };
    emit(&table, command.name(), o)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(table: &Table, name: &str, o: &Options) -> Result<()> {
    let body = match o.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(name),
    };
    match &o.out {
        Some(path) => write_file(path, &body)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    if let (Some(plot), Some(out)) = (&o.plot, &o.out) {
        if o.format != Format::Csv {
            return usage("--plot needs CSV output");
        }
        match table.gnuplot_script(&out.display().to_string(), name) {
            Some(script) => write_file(plot, &script)?,
            None => return usage(format!("{name} has nothing to plot")),
        }
    }
    Ok(())
}

fn cmd_rule(o: &Options) -> Result<Table> {
    let l = single_length_scale(o, None)?;
    let n = match sizes(o, &[])?.as_slice() {
        [n] => *n,
        _ => return usage("rule takes a single --n"),
    };
    let approx = approx_weights(&basis(l, o)?, n)?;
    let mut t =
        Table::new(&["n", "node", "approx_weight", "gh_node", "gh_weight"]).with_plot(PlotHint {
            x: "node",
            y: &["approx_weight", "gh_weight"],
            group: &[],
            log_y: true,
        });
    for (i, ((x, w), (g, gw))) in approx.rule.iter().zip(approx.gh_source.iter()).enumerate() {
        t.push(vec![
            (i + 1).into(),
            x.into(),
            w.into(),
            g.into(),
            gw.into(),
        ]);
    }
    Ok(t)
}

struct Comparison {
    truncation: usize,
    rel_err: f64,
    proxy: f64,
}

fn compare(b: &MercerBasis, n: usize) -> kernquad::Result<Comparison> {
    let approx = approx_weights(b, n)?;
    let truncation = machine_precision_truncation(b, n);
    let reference = qr_weights(b, approx.nodes(), truncation)?;
    let rel_err = reference
        .iter()
        .zip(approx.weights())
        .map(|(w, a)| ((w - a) / w).powi(2))
        .sum::<f64>()
        .sqrt();
    let proxy = (1.0 - reference[n - 1] / reference[0]).abs();
    Ok(Comparison {
        truncation,
        rel_err,
        proxy,
    })
}

fn cmd_weights_compare(o: &Options) -> Result<Table> {
    let ells = length_scales(o, &SWEEP_ELLS)?;
    let ns = sizes(o, &(1..=100).collect::<Vec<_>>())?;
    let mut t = Table::new(&[
        "ell",
        "n",
        "truncation",
        "rel_err",
        "symmetry_proxy",
        "cutoff",
    ])
    .with_plot(PlotHint {
        x: "n",
        y: &["rel_err"],
        group: &["ell"],
        log_y: true,
    });
    for l in ells {
        let b = basis(l, o)?;
        let results = ordered(&ns, |&n| compare(&b, n));
        for (&n, r) in ns.iter().zip(results) {
            let c = r?;
            let cutoff = c.proxy > SYMMETRY_CUTOFF || !c.rel_err.is_finite();
            t.push(vec![
                l.into(),
                n.into(),
                c.truncation.into(),
                c.rel_err.into(),
                c.proxy.into(),
                cutoff.into(),
            ]);
            if cutoff {
                break;
            }
        }
    }
    Ok(t)
}

fn cmd_positivity_sweep(o: &Options) -> Result<Table> {
    let ells = length_scales(o, &SWEEP_ELLS)?;
    let ns = sizes(o, &(1..=200).collect::<Vec<_>>())?;
    let mut t = Table::new(&[
        "ell",
        "n",
        "min_weight",
        "abs_weight_sum",
        "weight_sum",
        "weight_sum_error",
    ])
    .with_plot(PlotHint {
        x: "n",
        y: &["weight_sum_error"],
        group: &["ell"],
        log_y: true,
    });
    for l in ells {
        let b = basis(l, o)?;
        let results = ordered(&ns, |&n| approx_weights(&b, n));
        for (&n, r) in ns.iter().zip(results) {
            let rule = r?.rule;
            let sum = rule.weight_sum();
            t.push(vec![
                l.into(),
                n.into(),
                rule.min_weight().into(),
                rule.abs_weight_sum().into(),
                sum.into(),
                (sum - 1.0).abs().into(),
            ]);
        }
    }
    Ok(t)
}

fn rule_names(o: &Options, default: &[&str]) -> Vec<String> {
    o.rules
        .clone()
        .unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect())
}

/// The inner `Err` carries the condition estimate of a kernel system that
/// could not be factorised.
fn build(
    registry: &RuleRegistry,
    name: &str,
    ctx: &RuleContext,
    n: usize,
) -> Result<std::result::Result<BuiltRule, f64>> {
    match registry.get(name)?.build(ctx, n) {
        Ok(b) => Ok(Ok(b)),
        Err(kernquad::Error::IllConditioned { condition }) => Ok(Err(condition)),
        Err(e) => Err(e.into()),
    }
}

fn flag(condition: Option<f64>) -> &'static str {
    match condition {
        Some(c) if c >= UNRELIABLE_CONDITION => "unreliable",
        _ => "ok",
    }
}

struct WcePoint {
    wce: Option<f64>,
    spectral: Option<f64>,
    condition: Option<f64>,
    flag: &'static str,
}

fn wce_point(registry: &RuleRegistry, name: &str, ctx: &RuleContext, n: usize) -> Result<WcePoint> {
    match build(registry, name, ctx, n)? {
        Err(condition) => Ok(WcePoint {
            wce: None,
            spectral: None,
            condition: Some(condition),
            flag: "ill_conditioned",
        }),
        Ok(b) => {
            let wce = worst_case_error(&b.rule, ctx.length_scale())?.wce;
            let spectral = if ctx.basis.is_standard() {
                Some(spectral_worst_case_error(&b.rule, &ctx.basis)?.wce)
            } else {
                None
            };
            Ok(WcePoint {
                wce: Some(wce),
                spectral,
                condition: b.condition,
                flag: flag(b.condition),
            })
        }
    }
}

fn cmd_wce_sweep(o: &Options) -> Result<Table> {
    let ells = length_scales(o, &[0.2, 1.0])?;
    let ns = sizes(o, &(1..=150).collect::<Vec<_>>())?;
    let registry = RuleRegistry::with_builtins();
    let names = rule_names(o, &["sghkq", "ukq", "gh"]);
    registry.select(&names)?;

    let mut t = Table::new(&[
        "ell",
        "n",
        "rule",
        "wce",
        "spectral_wce",
        "condition",
        "flag",
    ])
    .with_plot(PlotHint {
        x: "n",
        y: &["wce"],
        group: &["ell", "rule"],
        log_y: true,
    });
    for l in ells {
        let ctx = RuleContext::new(basis(l, o)?);
        let jobs: Vec<(usize, &str)> = ns
            .iter()
            .flat_map(|&n| names.iter().map(move |r| (n, r.as_str())))
            .collect();
        let results = ordered(&jobs, |&(n, r)| wce_point(&registry, r, &ctx, n));
        let mut finished = vec![false; names.len()];
        for (k, (&(n, r), p)) in jobs.iter().zip(results).enumerate() {
            let slot = k % names.len();
            if finished[slot] {
                continue;
            }
            let p = p?;
            t.push(vec![
                l.into(),
                n.into(),
                r.into(),
                p.wce.into(),
                p.spectral.into(),
                p.condition.into(),
                p.flag.into(),
            ]);
            if p.wce.is_some_and(|e| e < WCE_FLOOR) {
                finished[slot] = true;
            }
        }
    }
    Ok(t)
}

fn cmd_integrate(o: &Options, default_dims: usize) -> Result<Table> {
    let l = single_length_scale(o, Some(1.2))?;
    let (default_m, default_c, default_ns): (Vec<u32>, Vec<f64>, Vec<usize>) = if default_dims == 1
    {
        (vec![6], vec![1.5], (1..=40).collect())
    } else {
        (vec![6, 4, 2], vec![1.5, 3.0, 0.5], (2..=12).collect())
    };
    let m = o.m.clone().unwrap_or(default_m);
    let d = o.dims.unwrap_or(m.len());
    if default_dims == 1 && d != 1 {
        return usage("integrate is one-dimensional; use tensor-integrate");
    }
    let c = o.c.clone().unwrap_or(default_c);
    if m.len() != d || c.len() != d {
        return usage(format!(
            "--m and --c need {d} entries each, got {} and {}",
            m.len(),
            c.len()
        ));
    }
    let f = test_integrand(d, &m, &c, l)?;
    let ns = sizes(o, &default_ns)?;
    let registry = RuleRegistry::with_builtins();
    let names = rule_names(o, &["sghkq", "kq", "ukq", "gh"]);
    registry.select(&names)?;
    let ctx = RuleContext::new(basis(l, o)?);

    let jobs: Vec<(usize, &str)> = ns
        .iter()
        .flat_map(|&n| names.iter().map(move |r| (n, r.as_str())))
        .collect();
    let results = ordered(
        &jobs,
        |&(n, r)| -> Result<(Option<f64>, Option<f64>, &'static str)> {
            match build(&registry, r, &ctx, n)? {
                Err(condition) => Ok((None, Some(condition), "ill_conditioned")),
                Ok(b) => {
                    let grid = TensorRule::new(vec![b.rule; d])?;
                    let q = tensor_integrate(&grid, |x| f.eval(x))?;
                    Ok((Some(q), b.condition, flag(b.condition)))
                }
            }
        },
    );

    let mut t = Table::new(&[
        "rule",
        "n",
        "points",
        "estimate",
        "exact",
        "abs_error",
        "condition",
        "flag",
    ])
    .with_plot(PlotHint {
        x: "n",
        y: &["abs_error"],
        group: &["rule"],
        log_y: true,
    });
    let mut rows: Vec<(usize, usize, Vec<Cell>)> = Vec::with_capacity(jobs.len());
    for (k, (&(n, r), res)) in jobs.iter().zip(results).enumerate() {
        let (q, condition, fl) = res?;
        let slot = k % names.len();
        rows.push((
            slot,
            n,
            vec![
                r.into(),
                n.into(),
                n.pow(d as u32).into(),
                q.into(),
                f.exact().into(),
                q.map(|q| (q - f.exact()).abs()).into(),
                condition.into(),
                fl.into(),
            ],
        ));
    }
    // one block per rule, in --rules order
    rows.sort_by_key(|(slot, n, _)| (*slot, *n));
    for (_, _, row) in rows {
        t.push(row);
    }
    Ok(t)
}

fn cmd_constants(o: &Options) -> Result<Table> {
    let l = single_length_scale(o, None)?;
    let b = basis(l, o)?;
    let mut t = Table::new(&[
        "ell",
        "alpha",
        "epsilon",
        "beta",
        "delta_sq",
        "gamma",
        "tau",
        "lambda",
        "eta",
        "c_theory",
        "c1",
        "c2",
        "hermite_k",
        "dims",
        "c_multi",
    ]);
    let theory = if b.is_standard() {
        Some(theoretical_constants(&b)?)
    } else {
        None
    };
    let multi = match (o.dims, b.is_standard()) {
        (Some(d), true) => Some(multivariate_constants(&b, d, 1.0)?.c),
        (Some(_), false) => return usage("multivariate constants need alpha = 1/sqrt(2)"),
        _ => None,
    };
    t.push(vec![
        l.into(),
        b.alpha().into(),
        b.epsilon().into(),
        b.beta().into(),
        b.delta_sq().into(),
        b.gamma().into(),
        theory.map(|k| k.tau).into(),
        theory.map(|k| k.lambda).into(),
        theory.map(|k| k.eta).into(),
        theory.map(|k| k.c_theory()).into(),
        theory.map(|k| k.c1).into(),
        theory.map(|k| k.c2).into(),
        HERMITE_BOUND_K.into(),
        o.dims.map_or(Cell::Empty, Cell::from),
        multi.into(),
    ]);
    Ok(t)
}
