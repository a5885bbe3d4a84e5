use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinwall::cascade::build_expansion;
use thinwall::cell::solve_cell;
use thinwall::corner::SingularExponents;
use thinwall::exact::solve_exact;
use thinwall::geometry::Side;
use thinwall::harness::output::format_table;
use thinwall::harness::{emit_outputs, parse_config, StudyConfig};
use thinwall::nearfield::solve_s;
use thinwall::Result;

#[derive(Parser)]
#[command(name = "thinwall", about = "Perforated-wall Helmholtz expansion and convergence study")]
struct Cli {
    /// Flat key = value configuration (defaults to the reference setup).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Direct FEM solve on the perforated domain for one period.
    SolveExact {
        #[arg(long)]
        delta: String,
        /// Write the nodal values as CSV.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Effective constants from the periodic cell problems.
    CellConstants {
        #[arg(long)]
        t: Option<f64>,
    },
    /// Corner near-field problem and its 𝓛 coefficients.
    Nearfield {
        #[arg(long, default_value = "plus")]
        side: Side,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        rmax: Option<f64>,
    },
    /// Build the macroscopic terms and print their coefficients.
    Cascade,
    /// δ sweep against direct solves; exit code 0 iff all slope checks pass.
    Study {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Option<PathBuf>) -> Result<StudyConfig> {
    match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?),
        None => Ok(StudyConfig::reference()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load(&cli.config)?;
    let p = cfg.params.clone();
    match cli.cmd {
        Cmd::SolveExact { delta, field } => {
            let d = thinwall::harness::config::parse_number(&delta)
                .map_err(|msg| thinwall::Error::InvalidParams(format!("delta: {msg}")))?;
            let r = solve_exact(&p, d, &cfg.exact)?;
            println!("{}", serde_json::to_string_pretty(&r.mesh)?);
            println!("dofs = {}, residual = {:.3e}", r.ndof, r.residual);
            if let Some(f) = field {
                r.u_delta.write_csv(f)?;
            }
        }
        Cmd::CellConstants { t } => {
            if let Some(t) = t {
                cfg.cascade.cell.t = t;
            }
            let c = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &cfg.cascade.cell)?;
            println!("{}", serde_json::to_string_pretty(&c.constants)?);
        }
        Cmd::Nearfield { side, n, rmax } => {
            if let Some(r) = rmax {
                cfg.cascade.nearfield.rmax = r;
            }
            let exps = SingularExponents::new(p.theta)?;
            let cell = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &cfg.cascade.cell)?;
            let s = solve_s(side, n, &exps, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg.cascade.nearfield)?;
            println!("{}", serde_json::to_string_pretty(&s.fit)?);
        }
        Cmd::Cascade => {
            let set = build_expansion(&p, &cfg.cascade)?;
            println!("{}", serde_json::to_string_pretty(&set.summary())?);
        }
        Cmd::Study { out } => {
            if let Some(o) = out {
                cfg.out = o;
            }
            let report = thinwall::harness::study::run_study_with(&cfg, &mut |row| {
                eprintln!("delta = {:.6}: dofs {}, e = {:?} ({:.1} s)", row.delta, row.dofs, row.l2, row.seconds);
            })?;
            emit_outputs(&report, &cfg.out)?;
            print!("{}", format_table(&report));
            return Ok(report.all_checks_pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
