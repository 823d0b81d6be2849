use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gmas_core::balance::{analyze, find_vertex_balanced, is_steady_state, is_vertex_balanced};
use gmas_core::birch::{intersect_class_with_balanced_set, BirchProblem, SolveOptions};
use gmas_core::dynamics::{conservation_residual, integrate, IntegrateOptions};
use gmas_core::network::{parse, GeneralizedNetwork};
use gmas_core::signs::{
    check_sigma_subset_closure, check_uniqueness_condition, enumerate_sign_vectors,
};
use gmas_core::{GmasError, Result};

#[derive(Parser)]
#[command(
    name = "gmas",
    about = "Analyze generalized mass-action systems: deficiencies, sign conditions, \
             vertex-balanced steady states, and trajectories.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural analysis: dimensions, deficiencies, sign conditions, verdict.
    Analyze {
        file: PathBuf,
        /// Emit the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the sign vectors of S and S~ and check both sign conditions.
    Signs { file: PathBuf },
    /// Find a vertex-balanced steady state; with --x0, also the unique one in
    /// that compatibility class.
    Balanced {
        file: PathBuf,
        /// Positive initial point, comma-separated.
        #[arg(long)]
        x0: Option<String>,
    },
    /// Solve the intersection of x0 + S with the exponential manifold through
    /// x*, either from a network file or from explicit subspace bases.
    Birch {
        file: Option<PathBuf>,
        /// Rows of a basis of the orthogonal complement of S
        /// (rows separated by ';', entries by ',').
        #[arg(long)]
        w: Option<String>,
        /// Rows of a basis of the orthogonal complement of S~.
        #[arg(long)]
        wt: Option<String>,
        #[arg(long)]
        x0: String,
        /// Anchor point on the manifold; defaults to a computed
        /// vertex-balanced state in network mode.
        #[arg(long)]
        xstar: Option<String>,
    },
    /// Integrate the ODE and report the final state and residuals.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        /// Write the trajectory as CSV to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &GmasError) -> u8 {
    match e {
        GmasError::Parse { .. } | GmasError::Dimension(_) => 2,
        _ => 1,
    }
}

/// Default tolerance for residual checks, overridable via GMAS_TOL.
fn default_tol() -> f64 {
    std::env::var("GMAS_TOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1e-8)
}

fn load(path: &Path) -> Result<GeneralizedNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GmasError::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
    parse(&text)
}

fn parse_vector(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| GmasError::Invalid(format!("bad entry {p:?} in {what}")))
        })
        .collect::<Result<_>>()?;
    if n != 0 && v.len() != n {
        return Err(GmasError::Dimension(format!(
            "{what} has {} entries, expected {n}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_matrix(s: &str, what: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(|row| parse_vector(row, 0, what)).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { file, json } => cmd_analyze(&file, json),
        Command::Signs { file } => cmd_signs(&file),
        Command::Balanced { file, x0 } => cmd_balanced(&file, x0.as_deref()),
        Command::Birch { file, w, wt, x0, xstar } => {
            cmd_birch(file.as_deref(), w.as_deref(), wt.as_deref(), &x0, xstar.as_deref())
        }
        Command::Simulate { file, x0, t_end, rtol, out } => {
            cmd_simulate(&file, &x0, t_end, rtol, out.as_deref())
        }
    }
}

fn cmd_analyze(file: &Path, json: bool) -> Result<()> {
    let net = load(file)?;
    let report = analyze(&net);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report)
                .map_err(|e| GmasError::Invalid(e.to_string()))?
        );
        return Ok(());
    }
    println!("weakly reversible: {}", if report.weakly_reversible { "yes" } else { "no" });
    println!(
        "vertices: {}, components: {}",
        report.num_vertices, report.num_components
    );
    match report.dim_kinetic_subspace {
        Some(d) => println!("dim S = {}, dim S~ = {d}", report.dim_stoich_subspace),
        None => println!(
            "dim S = {}, dim S~ undefined (some vertex is not a source)",
            report.dim_stoich_subspace
        ),
    }
    match report.kinetic_deficiency {
        Some(d) => println!("deficiency = {}, kinetic deficiency = {d}", report.deficiency),
        None => println!("deficiency = {}, kinetic deficiency undefined", report.deficiency),
    }
    let render = |name: &str, c: &Option<gmas_core::balance::ConditionReport>| match c {
        Some(c) if c.holds => println!("{name}: holds"),
        Some(c) => println!(
            "{name}: FAILS (witness {})",
            c.witness.as_deref().unwrap_or("?")
        ),
        None => println!("{name}: undefined"),
    };
    render("sign condition sigma(S) in cl(sigma(S~))", &report.sign_condition);
    render("uniqueness condition sigma(S) ^ sigma(S~ perp) = {0}", &report.uniqueness_condition);
    println!("verdict: {}", report.verdict.describe());
    Ok(())
}

fn cmd_signs(file: &Path) -> Result<()> {
    let net = load(file)?;
    let s = net.stoich_subspace();
    let st = net.kinetic_subspace()?;
    for (name, basis) in [("sigma(S)", &s), ("sigma(S~)", &st)] {
        match enumerate_sign_vectors(basis) {
            Ok(set) => {
                println!("{name} ({} sign vectors):", set.len());
                for v in set.iter() {
                    println!("  {v}");
                }
            }
            Err(GmasError::EnumerationCap { dim, cap }) => {
                println!("{name}: not enumerated (dimension {dim} exceeds cap {cap})");
            }
            Err(e) => return Err(e),
        }
    }
    let closure = check_sigma_subset_closure(&s, &st)?;
    match closure.witness {
        None => println!("sign condition sigma(S) in cl(sigma(S~)): holds"),
        Some(w) => println!("sign condition sigma(S) in cl(sigma(S~)): FAILS (witness {w})"),
    }
    let uniq = check_uniqueness_condition(&s, &st)?;
    match uniq.witness {
        None => println!("uniqueness condition sigma(S) ^ sigma(S~ perp) = {{0}}: holds"),
        Some(w) => {
            println!("uniqueness condition sigma(S) ^ sigma(S~ perp) = {{0}}: FAILS (witness {w})")
        }
    }
    Ok(())
}

fn cmd_balanced(file: &Path, x0: Option<&str>) -> Result<()> {
    let net = load(file)?;
    let rates = net.rates_or_default();
    let tol = default_tol();
    let Some((x_star, residual)) = find_vertex_balanced(&net, &rates)? else {
        return Err(GmasError::Invalid(
            "no vertex-balanced steady state exists for these rate constants".into(),
        ));
    };
    println!("x* = {}", fmt_vec(&x_star));
    println!("log-linear residual = {residual:.3e}");
    let (ok, residuals) = is_vertex_balanced(&net, &rates, &x_star, tol)?;
    let max_res = residuals.iter().cloned().fold(0.0, f64::max);
    println!(
        "vertex balance: {} (max imbalance {max_res:.3e})",
        if ok { "verified" } else { "FAILED" }
    );
    if let Some(x0) = x0 {
        let x0 = parse_vector(x0, net.num_species(), "--x0")?;
        let opts = SolveOptions { tol: tol.min(1e-10), ..SolveOptions::default() };
        let sol = intersect_class_with_balanced_set(&net, &rates, &x_star, &x0, &opts)?;
        println!("class point x = {}", fmt_vec(&sol.x));
        println!("affine residual = {:.3e}", sol.residual_affine);
        println!("homotopy steps = {}", sol.homotopy_steps);
    }
    Ok(())
}

fn cmd_birch(
    file: Option<&Path>,
    w: Option<&str>,
    wt: Option<&str>,
    x0: &str,
    xstar: Option<&str>,
) -> Result<()> {
    let problem = match (file, w, wt) {
        (Some(path), None, None) => {
            let net = load(path)?;
            let x0 = parse_vector(x0, net.num_species(), "--x0")?;
            let x_star = match xstar {
                Some(s) => parse_vector(s, net.num_species(), "--xstar")?,
                None => {
                    let rates = net.rates_or_default();
                    let Some((x_star, _)) = find_vertex_balanced(&net, &rates)? else {
                        return Err(GmasError::Invalid(
                            "no vertex-balanced anchor point; pass --xstar".into(),
                        ));
                    };
                    x_star
                }
            };
            BirchProblem::from_network(&net, &x0, &x_star)?
        }
        (None, Some(w), Some(wt)) => {
            let x0 = parse_vector(x0, 0, "--x0")?;
            let xstar = xstar.ok_or_else(|| {
                GmasError::Invalid("--xstar is required with explicit bases".into())
            })?;
            let x_star = parse_vector(xstar, x0.len(), "--xstar")?;
            let w = parse_matrix(w, "--w")?;
            let wt = parse_matrix(wt, "--wt")?;
            BirchProblem::new(&w, &wt, &x0, &x_star)?
        }
        _ => {
            return Err(GmasError::Dimension(
                "pass either a network file or both --w and --wt".into(),
            ))
        }
    };
    let sol = problem.solve(&SolveOptions::default())?;
    println!("x = {}", fmt_vec(&sol.x));
    println!("lambda = {}", fmt_vec(&sol.lambda));
    println!("affine residual = {:.3e}", sol.residual_affine);
    println!("newton iterations = {}", sol.newton_iterations);
    println!("homotopy steps = {}", sol.homotopy_steps);
    Ok(())
}

fn cmd_simulate(
    file: &Path,
    x0: &str,
    t_end: f64,
    rtol: f64,
    out: Option<&Path>,
) -> Result<()> {
    let net = load(file)?;
    let rates = net.rates_or_default();
    let x0 = parse_vector(x0, net.num_species(), "--x0")?;
    let opts = IntegrateOptions { rel_tol: rtol, ..IntegrateOptions::default() };
    let traj = integrate(&net, &rates, &x0, t_end, &opts)?;
    let xf = traj.final_state().to_vec();
    println!("t_end = {t_end}");
    println!("final state = {}", fmt_vec(&xf));
    println!(
        "steps: {} accepted, {} rejected",
        traj.accepted_steps, traj.rejected_steps
    );
    println!("conservation drift = {:.3e}", conservation_residual(&net, &traj));
    let (steady, residual) = is_steady_state(&net, &rates, &xf, default_tol())?;
    let r_max = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!(
        "steady state at t_end: {} (max rhs residual {r_max:.3e})",
        if steady { "yes" } else { "no" }
    );
    if let Some(path) = out {
        std::fs::write(path, traj.to_csv())
            .map_err(|e| GmasError::Invalid(format!("{}: {e}", path.display())))?;
        println!("trajectory written to {}", path.display());
    }
    Ok(())
}
