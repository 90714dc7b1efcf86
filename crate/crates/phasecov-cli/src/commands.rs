//! Subcommand implementations. Each returns the full output as a string
//! so writing and testing stay trivial and deterministic.

use phasecov::{
    classify_intervals, default_cm_grid, example_kernel, inverse_laplace,
    laplace_params_from_kernel, population, prop8_admissible, trajectory_from_rates, CMReport,
    ConstantRates, Family, FamilySpec, IntegratedTrajectory, KernelSpec, RationalLaplace,
    Trajectory, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{KernelConfig, RunConfig, ScanConfig, SourceSpec};
use crate::{CliError, Format};

pub const SCHEMA: &str = "phasecov/1";

fn reclassify(v: Verdict, tol: f64) -> Verdict {
    Verdict::from_margin(v.margin, tol)
}

// --- region ---

pub fn cmd_region(cfg: &ScanConfig, format: Format, tol: f64) -> Result<String, CliError> {
    let grid = cfg.grid();
    grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.predicates.is_empty() {
        return Err(CliError::Config("at least one predicate required".into()));
    }
    match format {
        Format::Csv => region_csv(cfg, tol),
        Format::Json => region_json(cfg, tol),
        Format::Svg => region_svg(cfg, tol),
    }
}

fn region_rows_for_lambda(cfg: &ScanConfig, i: usize, tol: f64, mut f: impl FnMut(f64, f64, f64, &[Verdict])) {
    let grid = cfg.grid();
    let l = grid.lambda.value(i);
    let mut verdicts = vec![Verdict::classify(0.0); cfg.predicates.len()];
    for j in 0..grid.lambda_z.steps {
        let lz = grid.lambda_z.value(j);
        for k in 0..grid.t_z.steps {
            let tz = grid.t_z.value(k);
            let ch = phasecov::PhaseCovChannel::new(l, lz, tz).expect("finite grid point");
            for (v, p) in verdicts.iter_mut().zip(&cfg.predicates) {
                *v = reclassify(p.evaluate(&ch), tol);
            }
            f(l, lz, tz, &verdicts);
        }
    }
}

fn region_csv(cfg: &ScanConfig, tol: f64) -> Result<String, CliError> {
    let grid = cfg.grid();
    let mut header = format!("# {SCHEMA} region csv v1\nlambda,lambda_z,t_z");
    for p in &cfg.predicates {
        header.push(',');
        header.push_str(p.name());
    }
    header.push('\n');
    let chunks: Vec<String> = (0..grid.lambda.steps)
        .into_par_iter()
        .map(|i| {
            let mut out = String::new();
            region_rows_for_lambda(cfg, i, tol, |l, lz, tz, vs| {
                out.push_str(&format!("{l},{lz},{tz}"));
                for v in vs {
                    out.push(',');
                    out.push_str(&v.status.to_string());
                }
                out.push('\n');
            });
            out
        })
        .collect();
    Ok(header + &chunks.concat())
}

fn region_json(cfg: &ScanConfig, tol: f64) -> Result<String, CliError> {
    let grid = cfg.grid();
    let rows: Vec<Vec<serde_json::Value>> = (0..grid.lambda.steps)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            region_rows_for_lambda(cfg, i, tol, |l, lz, tz, vs| {
                let mut row = vec![json!(l), json!(lz), json!(tz)];
                for v in vs {
                    row.push(json!(v.status));
                }
                out.push(row);
            });
            out
        })
        .flatten()
        .collect();
    let doc = json!({
        "schema": SCHEMA,
        "command": "region",
        "grid": grid,
        "predicates": cfg.predicates,
        "columns": ["lambda", "lambda_z", "t_z"],
        "rows": rows,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

const SVG_PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Shaded scatter of the t_z slice nearest `slice_t_z`: one layer per
/// predicate, full opacity for holds, light for marginal.
fn region_svg(cfg: &ScanConfig, tol: f64) -> Result<String, CliError> {
    let grid = cfg.grid();
    // nearest slice index
    let k_slice = (0..grid.t_z.steps)
        .min_by(|&a, &b| {
            let da = (grid.t_z.value(a) - cfg.slice_t_z).abs();
            let db = (grid.t_z.value(b) - cfg.slice_t_z).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let tz = grid.t_z.value(k_slice);
    let (w, h) = (640.0, 640.0);
    let (margin, plot) = (60.0, 520.0);
    let x_of = |l: f64| {
        margin + plot * (l - grid.lambda.min) / (grid.lambda.max - grid.lambda.min)
    };
    let y_of = |lz: f64| {
        margin + plot * (grid.lambda_z.max - lz) / (grid.lambda_z.max - grid.lambda_z.min)
    };
    let cell_w = plot / (grid.lambda.steps - 1) as f64;
    let cell_h = plot / (grid.lambda_z.steps - 1) as f64;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<!-- {SCHEMA} region svg v1; slice t_z = {tz} -->\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    for (pi, p) in cfg.predicates.iter().enumerate() {
        let color = SVG_PALETTE[pi % SVG_PALETTE.len()];
        svg.push_str(&format!("<g id=\"{}\" fill=\"{color}\">\n", p.name()));
        for i in 0..grid.lambda.steps {
            let l = grid.lambda.value(i);
            for j in 0..grid.lambda_z.steps {
                let lz = grid.lambda_z.value(j);
                let ch = phasecov::PhaseCovChannel::new(l, lz, tz).expect("finite grid point");
                let v = reclassify(p.evaluate(&ch), tol);
                let opacity = if v.holds() {
                    0.35
                } else if v.is_marginal() {
                    0.15
                } else {
                    continue;
                };
                svg.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill-opacity=\"{opacity}\"/>\n",
                    x_of(l) - 0.5 * cell_w,
                    y_of(lz) - 0.5 * cell_h,
                    cell_w,
                    cell_h,
                ));
            }
        }
        svg.push_str("</g>\n");
    }
    // axes
    svg.push_str(&format!(
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{plot}\" height=\"{plot}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">lambda</text>\n",
        margin + plot / 2.0,
        h - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">lambda_z</text>\n",
        margin + plot / 2.0,
        margin + plot / 2.0
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

// --- simulate / divisibility ---

/// A dynamics source built and ready to query.
pub enum Built {
    Family(Box<dyn Family>),
    Rates(IntegratedTrajectory<ConstantRates>),
}

impl Built {
    pub fn from_source(src: &SourceSpec, t_max: f64) -> Result<Built, CliError> {
        match src {
            SourceSpec::Family { spec } => Ok(Built::Family(
                spec.build().map_err(|e| CliError::Config(e.to_string()))?,
            )),
            SourceSpec::ConstantRates { .. } => {
                let rates = src.constant().unwrap();
                Ok(Built::Rates(
                    trajectory_from_rates(rates, t_max)
                        .map_err(|e| CliError::Numerical(e.to_string()))?,
                ))
            }
        }
    }

    pub fn params(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Built::Family(f) => f.params(t),
            Built::Rates(tr) => tr.params(t),
        }
    }

    pub fn rates_at(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Built::Family(f) => phasecov::Rates::rates(f.as_ref(), t),
            Built::Rates(tr) => phasecov::Rates::rates(tr.rates(), t),
        }
    }

    pub fn rates_dyn(&self) -> &dyn phasecov::Rates {
        match self {
            Built::Family(f) => f.as_ref(),
            Built::Rates(tr) => tr.rates(),
        }
    }

    pub fn population(&self, rho0_z: f64, t: f64) -> Result<f64, CliError> {
        let r = match self {
            Built::Family(f) => population(f.as_ref(), rho0_z, t),
            Built::Rates(tr) => population(tr, rho0_z, t),
        };
        r.map_err(|e| CliError::Config(e.to_string()))
    }
}

fn validate_run(cfg: &RunConfig) -> Result<(), CliError> {
    if !(cfg.t_max > 0.0) {
        return Err(CliError::Config(format!(
            "t_max must be positive, got {}",
            cfg.t_max
        )));
    }
    if cfg.n_grid < 2 {
        return Err(CliError::Config(format!(
            "n_grid must be at least 2, got {}",
            cfg.n_grid
        )));
    }
    for &r in &cfg.rho0_z {
        if !(-1.0..=1.0).contains(&r) {
            return Err(CliError::Config(format!(
                "rho0_z values must lie in [-1, 1], got {r}"
            )));
        }
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, format: Format) -> Result<String, CliError> {
    validate_run(cfg)?;
    let built = Built::from_source(&cfg.source, cfg.t_max)?;
    let times: Vec<f64> = (0..cfg.n_grid)
        .map(|i| cfg.t_max * i as f64 / (cfg.n_grid - 1) as f64)
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for &t in &times {
        let (l, lz, tz) = built.params(t);
        let (gp, gm, gz) = built.rates_at(t);
        let mut row = vec![t, l, lz, tz, gp, gm, gz];
        for &r in &cfg.rho0_z {
            row.push(built.population(r, t)?);
        }
        rows.push(row);
    }
    let mut columns = vec![
        "t".to_string(),
        "lambda".to_string(),
        "lambda_z".to_string(),
        "t_z".to_string(),
        "gamma_plus".to_string(),
        "gamma_minus".to_string(),
        "gamma_z".to_string(),
    ];
    for &r in &cfg.rho0_z {
        columns.push(format!("p[{r}]"));
    }
    match format {
        Format::Csv => {
            let mut out = format!("# {SCHEMA} simulate csv v1\n{}\n", columns.join(","));
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "simulate",
                "columns": columns,
                "rows": rows,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
        }
        Format::Svg => Err(CliError::Config(
            "simulate does not support svg output".into(),
        )),
    }
}

pub fn cmd_divisibility(cfg: &RunConfig, format: Format) -> Result<String, CliError> {
    validate_run(cfg)?;
    let built = Built::from_source(&cfg.source, cfg.t_max)?;
    let report = classify_intervals(built.rates_dyn(), cfg.t_max, cfg.n_grid)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    match format {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "divisibility",
                "report": report,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
        }
        Format::Csv => {
            let mut out = format!(
                "# {SCHEMA} divisibility csv v1\nt,cp_divisible,p_divisible,blp_monotone\n"
            );
            for (i, &t) in report.grid.iter().enumerate() {
                out.push_str(&format!(
                    "{t},{},{},{}\n",
                    report.cp_divisible[i].status,
                    report.p_divisible[i].status,
                    report.blp_monotone[i].status
                ));
            }
            Ok(out)
        }
        Format::Svg => Err(CliError::Config(
            "divisibility does not support svg output".into(),
        )),
    }
}

// --- kernel ---

#[derive(Serialize)]
struct KernelReport {
    schema: &'static str,
    command: &'static str,
    kernel: KernelSpec,
    lambda_s: RationalLaplace,
    lambda_z_s: RationalLaplace,
    t_z_s: RationalLaplace,
    admissible: Verdict,
    reports: Vec<CMReport>,
    trajectory: Option<TrajectoryTable>,
}

#[derive(Serialize)]
struct TrajectoryTable {
    t: Vec<f64>,
    lambda: Vec<f64>,
    lambda_z: Vec<f64>,
    t_z: Vec<f64>,
}

pub fn cmd_kernel(cfg: &KernelConfig, format: Format) -> Result<String, CliError> {
    if format != Format::Json {
        return Err(CliError::Config(
            "kernel reports are json only".into(),
        ));
    }
    if cfg.depth == 0 {
        return Err(CliError::Config("depth must be at least 1".into()));
    }
    let kernel = match (&cfg.kernel, &cfg.example) {
        (Some(k), None) => k.clone(),
        (None, Some(e)) => example_kernel(e.a, e.a_plus, e.a_minus, &e.f_s)
            .map_err(|err| CliError::Config(err.to_string()))?,
        _ => {
            return Err(CliError::Config(
                "provide exactly one of \"kernel\" or \"example\"".into(),
            ))
        }
    };
    let (l_s, lz_s, tz_s) =
        laplace_params_from_kernel(&kernel).map_err(|e| CliError::Numerical(e.to_string()))?;
    let (admissible, reports) = prop8_admissible(&kernel, cfg.depth, &default_cm_grid())
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    // time-domain trajectory when all three transforms invert exactly
    let trajectory = match (
        inverse_laplace(&l_s),
        inverse_laplace(&lz_s),
        inverse_laplace(&tz_s),
    ) {
        (Ok(l), Ok(lz), Ok(tz)) => {
            let t: Vec<f64> = (0..cfg.n_grid)
                .map(|i| cfg.t_max * i as f64 / (cfg.n_grid - 1) as f64)
                .collect();
            Some(TrajectoryTable {
                lambda: t.iter().map(|&x| l.eval(x)).collect(),
                lambda_z: t.iter().map(|&x| lz.eval(x)).collect(),
                t_z: t.iter().map(|&x| tz.eval(x)).collect(),
                t,
            })
        }
        _ => None,
    };
    let doc = KernelReport {
        schema: SCHEMA,
        command: "kernel",
        kernel,
        lambda_s: l_s,
        lambda_z_s: lz_s,
        t_z_s: tz_s,
        admissible,
        reports,
        trajectory,
    };
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

// --- family-list ---

pub fn cmd_family_list(format: Format) -> Result<String, CliError> {
    let families = vec![
        json!({
            "kind": "semigroup",
            "params": ["gamma_plus", "gamma_minus", "gamma_z"],
            "constraints": "all rates non-negative",
            "example": FamilySpec::Semigroup { gamma_plus: 2.0, gamma_minus: 1.0, gamma_z: 0.25 },
        }),
        json!({
            "kind": "nonmonotone_population",
            "params": ["nu", "omega"],
            "constraints": "nu > 0, omega > 0",
            "example": FamilySpec::NonmonotonePopulation { nu: 1.0, omega: 2.0 },
        }),
        json!({
            "kind": "eternal_commutative",
            "params": ["a", "nu"],
            "constraints": "|a| < 1, nu > 0",
            "example": FamilySpec::EternalCommutative { a: 0.5, nu: 1.0 },
        }),
        json!({
            "kind": "eternal_noncommutative",
            "params": ["b", "nu"],
            "constraints": "0 < |b| <= 1, nu > 0",
            "example": FamilySpec::EternalNoncommutative { b: 0.5, nu: 1.0 },
        }),
        json!({
            "kind": "kernel_example",
            "params": ["a", "a_plus", "a_minus", "f", "t_max"],
            "constraints": "a >= a_pm > 0; running integral of f within [0, 2/(a+max(a_pm))]",
            "example": FamilySpec::KernelExample {
                a: 1.0,
                a_plus: 0.5,
                a_minus: 0.5,
                f: phasecov::NamedFn::ExpDecay { c: 1.0, rate: 1.0 },
                t_max: 10.0,
            },
        }),
    ];
    match format {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "family-list",
                "families": families,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
        }
        Format::Csv => {
            let mut out = format!("# {SCHEMA} family-list csv v1\nkind,params,constraints\n");
            for f in &families {
                let params: Vec<String> = f["params"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|p| p.as_str().unwrap().to_string())
                    .collect();
                out.push_str(&format!(
                    "{},{},\"{}\"\n",
                    f["kind"].as_str().unwrap(),
                    params.join(" "),
                    f["constraints"].as_str().unwrap()
                ));
            }
            Ok(out)
        }
        Format::Svg => Err(CliError::Config(
            "family-list does not support svg output".into(),
        )),
    }
}
