//! `qgraph`: command-line front end for the vertex-coupling library.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 2 usage, 3 numeric failure (pole, singular system, budget exceeded),
//! 4 partial convergence sweep.

mod args;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{float, json, plain_complex, plain_matrix, Cx, Ext, Matrix};
use qgraph::approximation::{quadrature_nodes, DEFAULT_A_LIST};
use qgraph::linalg::unitarity_defect;
use qgraph::*;
use serde::Serialize;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qgraph",
    version,
    about = "Vertex couplings, scattering and resolvent kernels on star graphs"
)]
struct Cli {
    /// Worker threads for grid evaluation (default: number of processors).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format; csv is only accepted for tabular output.
    #[arg(long, global = true, value_enum)]
    emit: Option<Emit>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Csv,
    Plain,
}

#[derive(Subcommand)]
enum Command {
    /// Build a vertex coupling and optionally its (A,B) form.
    Coupling(CouplingArgs),
    /// On-shell scattering matrix at momentum k.
    Smatrix(SmatrixArgs),
    /// Half-line resolvent kernel with optional point interactions.
    Greens(GreensArgs),
    /// Convergence sweep of the scaled approximation.
    Converge(ConvergeArgs),
    /// Compare analytic kernels against the finite-difference oracle.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    family: CouplingFamily,
    #[arg(long)]
    n: usize,
    /// Coupling parameter, a number or `inf`.
    #[arg(long, value_parser = args::extended, allow_hyphen_values = true)]
    param: ExtendedReal<f64>,
}

#[derive(Args)]
struct CouplingArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Also emit the (A,B) pair.
    #[arg(long)]
    to_ab: bool,
    /// Validate the (A,B) pair.
    #[arg(long)]
    validate: bool,
    /// Rescale from edge length L1 to L2.
    #[arg(long, num_args = 2, value_names = ["L1", "L2"])]
    rescale: Option<Vec<f64>>,
}

#[derive(Args)]
struct SmatrixArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    k: f64,
}

#[derive(Args)]
struct GreensArgs {
    /// dirichlet | neumann | robin:B | robin-scaled:N:BETA
    #[arg(long, value_parser = args::bc_arg)]
    bc: args::BcArg,
    #[arg(long)]
    kappa: f64,
    #[arg(long, required_unless_present = "grid")]
    x: Option<f64>,
    #[arg(long, required_unless_present = "grid")]
    y: Option<f64>,
    /// Point interaction POSITION,STRENGTH (repeatable).
    #[arg(long = "point", value_parser = args::point, allow_hyphen_values = true)]
    points: Vec<PointInteraction<f64>>,
    /// Sample the kernel on all nodes of the grid L,N.
    #[arg(long, value_parser = args::grid)]
    grid: Option<(f64, usize)>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    family: TargetFamily,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Strictly decreasing comma-separated values of a.
    #[arg(long, value_parser = args::list)]
    a_list: Option<args::FloatList>,
    #[arg(long, value_parser = args::grid, default_value = "12,400")]
    grid: (f64, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StarKind {
    DeltaPrimeS,
    DeltaPrime,
}

#[derive(Args)]
struct OracleArgs {
    /// Half-line boundary condition to check.
    #[arg(long, value_parser = args::bc_arg, conflicts_with = "model", required_unless_present = "model")]
    bc: Option<args::BcArg>,
    /// Point interaction POSITION,STRENGTH on the half-line (repeatable).
    #[arg(long = "point", value_parser = args::point, allow_hyphen_values = true, requires = "bc")]
    points: Vec<PointInteraction<f64>>,
    /// Star coupling to check instead of a half-line kernel.
    #[arg(long, value_enum, requires_all = ["n", "beta"])]
    model: Option<StarKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 3e-3)]
    h: f64,
    #[arg(long, default_value_t = 12.0)]
    length: f64,
    /// Sample coordinates; each must lie on a grid node.
    #[arg(long, value_parser = args::list, default_value = "0.3,0.6,0.9,1.2,1.5,1.8,2.1,2.4,2.7,3")]
    samples: args::FloatList,
    /// Also run at h/2 and require an error ratio in [3,5].
    #[arg(long)]
    refine: bool,
}

/// Failure with its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Dimension(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = std::result::Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Coupling(a) => coupling(a, cli.emit),
        Command::Smatrix(a) => smatrix(a, cli.emit),
        Command::Greens(a) => greens(a, cli.emit),
        Command::Converge(a) => converge(a, cli.emit),
        Command::OracleCheck(a) => oracle_check(a, cli.emit),
    };
    match result {
        Ok((text, code)) => {
            println!("{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Rejects csv for commands whose output is not a table.
fn scalar_emit(emit: Option<Emit>) -> std::result::Result<Emit, Failure> {
    match emit.unwrap_or(Emit::Json) {
        Emit::Csv => Err(usage("csv output is only available for tabular results")),
        e => Ok(e),
    }
}

fn ext_text(v: ExtendedReal<f64>) -> String {
    v.finite().map(float).unwrap_or_else(|| "inf".into())
}

fn build(f: &FamilyArgs) -> std::result::Result<VertexCouplingF64, Failure> {
    Ok(VertexCoupling::make(f.family, f.n, f.param)?)
}

#[derive(Serialize)]
struct AbOut<'a> {
    a: Matrix<'a>,
    b: Matrix<'a>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ValidationOut {
    rank: usize,
    hermiticity_defect: f64,
    min_eigenvalue: f64,
    admissible: bool,
}

#[derive(Serialize)]
struct RescaleOut<'a> {
    from: f64,
    to: f64,
    u: Matrix<'a>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CouplingOut<'a> {
    family: &'static str,
    n: usize,
    param: Ext,
    u: Matrix<'a>,
    unitarity_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ab: Option<AbOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rescaled: Option<RescaleOut<'a>>,
}

fn coupling(a: &CouplingArgs, emit: Option<Emit>) -> Outcome {
    let emit = scalar_emit(emit)?;
    let c = build(&a.family)?;
    let ab = (a.to_ab || a.validate).then(|| c.to_ab());
    let validation = match (&ab, a.validate) {
        (Some(ab), true) => {
            let d = ab.validate();
            Some(ValidationOut {
                rank: d.rank,
                hermiticity_defect: d.hermiticity_defect,
                min_eigenvalue: d.min_eigenvalue,
                admissible: d.admissible(),
            })
        }
        _ => None,
    };
    let rescaled = match a.rescale.as_deref() {
        Some(&[l1, l2]) => Some((l1, l2, c.rescale_length(l1, l2)?)),
        _ => None,
    };
    let code = match &validation {
        Some(v) if !v.admissible => EXIT_NUMERIC,
        _ => 0,
    };
    let out = CouplingOut {
        family: a.family.family.name(),
        n: c.n(),
        param: Ext(a.family.param),
        u: Matrix(c.unitary()),
        unitarity_defect: unitarity_defect(c.unitary()),
        ab: ab.as_ref().filter(|_| a.to_ab).map(|ab| AbOut {
            a: Matrix(&ab.a),
            b: Matrix(&ab.b),
        }),
        validation,
        rescaled: rescaled.as_ref().map(|(l1, l2, r)| RescaleOut {
            from: *l1,
            to: *l2,
            u: Matrix(r.unitary()),
        }),
    };
    let text = match emit {
        Emit::Plain => {
            let mut s = format!(
                "U =\n{}\nunitarity defect: {}",
                plain_matrix(out.u.0),
                float(out.unitarity_defect)
            );
            if let Some(ab) = &out.ab {
                s += &format!(
                    "\nA =\n{}\nB =\n{}",
                    plain_matrix(ab.a.0),
                    plain_matrix(ab.b.0)
                );
            }
            if let Some(v) = &out.validation {
                s += &format!(
                    "\nrank: {}\nhermiticity defect: {}\nmin eigenvalue: {}\nadmissible: {}",
                    v.rank,
                    float(v.hermiticity_defect),
                    float(v.min_eigenvalue),
                    v.admissible
                );
            }
            if let Some(r) = &out.rescaled {
                s += &format!(
                    "\nrescaled {} -> {}:\n{}",
                    float(r.from),
                    float(r.to),
                    plain_matrix(r.u.0)
                );
            }
            s
        }
        _ => json(&out),
    };
    Ok((text, code))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SmatrixOut<'a> {
    family: &'static str,
    n: usize,
    param: Ext,
    k: f64,
    s: Matrix<'a>,
    unitarity_defect: f64,
}

fn smatrix(a: &SmatrixArgs, emit: Option<Emit>) -> Outcome {
    let emit = scalar_emit(emit)?;
    let c = build(&a.family)?;
    let s = s_matrix(&c, a.k)?;
    let out = SmatrixOut {
        family: a.family.family.name(),
        n: c.n(),
        param: Ext(a.family.param),
        k: a.k,
        s: Matrix(&s),
        unitarity_defect: unitarity_defect(&s),
    };
    let text = match emit {
        Emit::Plain => format!(
            "S =\n{}\nunitarity defect: {}",
            plain_matrix(&s),
            float(out.unitarity_defect)
        ),
        _ => json(&out),
    };
    Ok((text, 0))
}

#[derive(Serialize)]
struct PointOut {
    position: f64,
    strength: Ext,
}

#[derive(Serialize)]
struct GreensOut {
    bc: String,
    kappa: f64,
    x: f64,
    y: f64,
    points: Vec<PointOut>,
    value: Cx,
}

#[derive(Serialize)]
struct SampleOut {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

fn greens(a: &GreensArgs, emit: Option<Emit>) -> Outcome {
    let kernel = |x, y| krein_insert_all(&a.bc.bc, &a.points, a.kappa, x, y);
    if let Some((length, interior)) = a.grid {
        let grid = GridSpecF64::new(length, interior)?;
        let nodes = quadrature_nodes(&grid, None);
        let mut rows = Vec::with_capacity(nodes.len() * nodes.len());
        for &x in &nodes {
            for &y in &nodes {
                let g = kernel(x, y)?;
                rows.push(SampleOut {
                    x,
                    y,
                    re: g.re,
                    im: g.im,
                });
            }
        }
        let text = match emit.unwrap_or(Emit::Csv) {
            Emit::Csv => {
                let mut s = String::from("x,y,re,im");
                for r in &rows {
                    s += &format!(
                        "\n{},{},{},{}",
                        float(r.x),
                        float(r.y),
                        float(r.re),
                        float(r.im)
                    );
                }
                s
            }
            Emit::Json => json(&rows),
            Emit::Plain => return Err(usage("grid sampling supports csv or json output")),
        };
        return Ok((text, 0));
    }
    let emit = scalar_emit(emit)?;
    let (x, y) = (
        a.x.expect("required by clap"),
        a.y.expect("required by clap"),
    );
    let value = kernel(x, y)?;
    let text = match emit {
        Emit::Plain => plain_complex(value),
        _ => json(&GreensOut {
            bc: a.bc.text.clone(),
            kappa: a.kappa,
            x,
            y,
            points: a
                .points
                .iter()
                .map(|p| PointOut {
                    position: p.position,
                    strength: Ext(p.strength),
                })
                .collect(),
            value: Cx(value),
        }),
    };
    Ok((text, 0))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StageOut {
    a: f64,
    b: f64,
    c: f64,
    per_channel_b: f64,
    norm_sym: Option<f64>,
    norm_comp: Option<f64>,
    norm_total: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FitOut {
    fitted_slope: Option<f64>,
    fitted_intercept: Option<f64>,
}

#[derive(Serialize)]
struct GridOut {
    length: f64,
    interior: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConvergeOut {
    family: &'static str,
    n: usize,
    beta: f64,
    kappa: f64,
    grid: GridOut,
    stages: Vec<StageOut>,
    fitted_slope: Option<f64>,
    fitted_intercept: Option<f64>,
}

fn converge(a: &ConvergeArgs, emit: Option<Emit>) -> Outcome {
    let emit = emit.unwrap_or(Emit::Json);
    if emit == Emit::Plain {
        return Err(usage("converge supports json or csv output"));
    }
    let grid = GridSpecF64::new(a.grid.0, a.grid.1)?;
    let a_list = a
        .a_list
        .clone()
        .map(|l| l.0)
        .unwrap_or_else(|| DEFAULT_A_LIST.to_vec());
    let report = convergence_sweep(a.family, a.beta, a.n, a.kappa, &a_list, &grid)?;
    let stages: Vec<StageOut> = report
        .stages
        .iter()
        .map(|s| {
            if let Some(e) = &s.error {
                eprintln!("warning: stage a={} failed: {e}", float(s.stage.a));
            }
            StageOut {
                a: s.stage.a,
                b: s.stage.b,
                c: s.stage.c,
                per_channel_b: s.stage.per_channel_b,
                norm_sym: s.norms.map(|n| n.sym),
                norm_comp: s.norms.map(|n| n.comp),
                norm_total: s.norms.map(|n| n.total),
                error: s.error.as_ref().map(|e| e.to_string()),
            }
        })
        .collect();
    let code = if report.all_valid() { 0 } else { EXIT_PARTIAL };
    let text = if emit == Emit::Csv {
        let cell = |v: Option<f64>| v.map(float).unwrap_or_default();
        let mut s = String::from("a,b,c,per_channel_b,norm_sym,norm_comp,norm_total");
        for r in &stages {
            s += &format!(
                "\n{},{},{},{},{},{},{}",
                float(r.a),
                float(r.b),
                float(r.c),
                float(r.per_channel_b),
                cell(r.norm_sym),
                cell(r.norm_comp),
                cell(r.norm_total)
            );
        }
        s + "\n\n"
            + &json(&FitOut {
                fitted_slope: report.fitted_slope,
                fitted_intercept: report.fitted_intercept,
            })
    } else {
        json(&ConvergeOut {
            family: report.family.name(),
            n: report.n,
            beta: report.beta,
            kappa: report.kappa,
            grid: GridOut {
                length: grid.length,
                interior: grid.interior,
            },
            stages,
            fitted_slope: report.fitted_slope,
            fitted_intercept: report.fitted_intercept,
        })
    };
    Ok((text, code))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckOut {
    h: f64,
    budget: f64,
    max_abs: f64,
    rms: f64,
    count: usize,
    within_budget: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleOut {
    model: String,
    kappa: f64,
    coarse: CheckOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    refined: Option<CheckOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    pass: bool,
}

fn run_check(
    a: &OracleArgs,
    star: Option<&StarModelF64>,
    h: f64,
) -> std::result::Result<CheckOut, Failure> {
    let grid = GridSpecF64::from_step(a.length, h)?;
    let step = grid.step();
    if a.samples.0.iter().any(|&s| grid.node_index(s).is_none()) {
        return Err(usage(format!(
            "every sample must lie on a grid node (step {})",
            float(step)
        )));
    }
    let stats = match star {
        Some(m) => {
            let n = m.n();
            let sources: Vec<(usize, f64)> = (0..n)
                .flat_map(|l| a.samples.0.iter().map(move |&y| (l, y)))
                .collect();
            let sampled = fd_resolvent_star(m, a.kappa, &grid, &sources)?;
            let samples: Vec<_> = (0..n)
                .flat_map(|j| {
                    sources
                        .iter()
                        .flat_map(move |&(l, y)| a.samples.0.iter().map(move |&x| (j, x, l, y)))
                })
                .collect();
            compare_kernels(
                |j, x, l, y| star_green(m, a.kappa, j, x, l, y),
                &sampled,
                &samples,
            )?
        }
        None => {
            let bc = a.bc.as_ref().expect("required by clap").bc;
            let sampled = fd_resolvent_halfline(&bc, &a.points, a.kappa, &grid, &a.samples.0)?;
            let samples: Vec<_> = a
                .samples
                .0
                .iter()
                .flat_map(|&x| a.samples.0.iter().map(move |&y| (0, x, 0, y)))
                .collect();
            compare_kernels(
                |_, x, _, y| krein_insert_all(&bc, &a.points, a.kappa, x, y),
                &sampled,
                &samples,
            )?
        }
    };
    let budget = error_budget(step);
    Ok(CheckOut {
        h: step,
        budget,
        max_abs: stats.max_abs,
        rms: stats.rms,
        count: stats.count,
        within_budget: stats.max_abs < budget,
    })
}

fn oracle_check(a: &OracleArgs, emit: Option<Emit>) -> Outcome {
    let emit = scalar_emit(emit)?;
    let (star, model) = match (a.model, a.n, a.beta) {
        (Some(kind), Some(n), Some(beta)) => {
            let (m, name) = match kind {
                StarKind::DeltaPrimeS => (StarModel::DeltaPrimeS { n, beta }, "delta-prime-s"),
                StarKind::DeltaPrime => (StarModel::DeltaPrime { n, beta }, "delta-prime"),
            };
            (Some(m), format!("{name} n={n} beta={}", float(beta)))
        }
        _ => {
            let bc = &a.bc.as_ref().expect("required by clap").text;
            let points: Vec<String> = a
                .points
                .iter()
                .map(|p| format!(" point {},{}", float(p.position), ext_text(p.strength)))
                .collect();
            (None, format!("{bc}{}", points.concat()))
        }
    };
    let coarse = run_check(a, star.as_ref(), a.h)?;
    let (refined, ratio) = if a.refine {
        let fine = run_check(a, star.as_ref(), a.h / 2.0)?;
        let ratio = coarse.max_abs / fine.max_abs;
        (Some(fine), Some(ratio))
    } else {
        (None, None)
    };
    let pass = coarse.within_budget && ratio.is_none_or(|r| (3.0..=5.0).contains(&r));
    let out = OracleOut {
        model,
        kappa: a.kappa,
        coarse,
        refined,
        ratio,
        pass,
    };
    let text = match emit {
        Emit::Plain => {
            let mut s = format!(
                "{}: h {} max error {} (budget {}) rms {}",
                out.model,
                float(out.coarse.h),
                float(out.coarse.max_abs),
                float(out.coarse.budget),
                float(out.coarse.rms)
            );
            if let (Some(f), Some(r)) = (&out.refined, out.ratio) {
                s += &format!(
                    "\nh {} max error {} ratio {}",
                    float(f.h),
                    float(f.max_abs),
                    float(r)
                );
            }
            s + &format!("\n{}", if out.pass { "PASS" } else { "FAIL" })
        }
        _ => json(&out),
    };
    Ok((text, if out.pass { 0 } else { EXIT_NUMERIC }))
}
