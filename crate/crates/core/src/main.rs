use clap::{Parser, Subcommand};
use entroshell::workbench::{
    cmd_determine, cmd_fit_anchors, cmd_ho_limit, cmd_plot_data, cmd_sweep, load_config, log_grid,
    parse_logfit, resolve_labels, CaseSelector, RunConfig,
};
use entroshell::scaling::LogFit;
use entroshell::Result;
use std::path::PathBuf;
use std::process::ExitCode;

/// Correlated densities, information entropies and charge form factors of
/// N=Z s-p and s-d shell nuclei.
#[derive(Parser)]
#[command(name = "entroshell", version, about)]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory with dataset/radii overrides (defaults to embedded data).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Output directory for reports, plot data and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Sweep grid as min_inv_y:max_inv_y:points (log-spaced in 1/y).
    #[arg(long, global = true)]
    grid: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// HO-limit entropy sum s0A and zero-correlation radius r0A.
    HoLimit {
        #[arg(long)]
        nuclide: String,
    },
    /// Sweep S and r_b over the correlation grid and fit both power laws.
    Sweep {
        #[arg(long)]
        nuclide: String,
    },
    /// Fit (b0, y) of the anchor nuclei He4 and Ca40 to their datasets and
    /// derive the log law S(A) = a + b ln A.
    FitAnchors,
    /// Determine y and b0 for nuclides from the log law and charge radii.
    Determine {
        /// Comma-separated labels or "all".
        #[arg(long, default_value = "all")]
        nuclide: String,
        /// Log-law offset a (with --b overrides the logfit file).
        #[arg(long, requires = "b")]
        a: Option<f64>,
        /// Log-law slope b.
        #[arg(long, requires = "a")]
        b: Option<f64>,
        /// File with the fitted log law (written by fit-anchors).
        #[arg(long)]
        logfit_file: Option<PathBuf>,
    },
    /// Emit |F_ch(q)| plot files (and experimental overlay if available).
    PlotData {
        #[arg(long)]
        nuclide: String,
        /// src, ho or both.
        #[arg(long, default_value = "both")]
        case: String,
        #[arg(long, requires = "b")]
        a: Option<f64>,
        #[arg(long, requires = "a")]
        b: Option<f64>,
        #[arg(long)]
        logfit_file: Option<PathBuf>,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(dir) = &cli.data_dir {
        cfg.data_dir = Some(dir.clone());
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(grid) = &cli.grid {
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(entroshell::Error::Config(format!(
                "grid must be min_inv_y:max_inv_y:points, got '{grid}'"
            )));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| entroshell::Error::Config(format!("bad grid minimum '{}'", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| entroshell::Error::Config(format!("bad grid maximum '{}'", parts[1])))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| entroshell::Error::Config(format!("bad grid size '{}'", parts[2])))?;
        cfg.grid = log_grid(lo, hi, n)?;
    }
    Ok(cfg)
}

/// Log law from explicit flags, a logfit file, or a fresh anchor fit.
fn resolve_logfit(
    cfg: &RunConfig,
    a: Option<f64>,
    b: Option<f64>,
    logfit_file: Option<&PathBuf>,
) -> Result<LogFit> {
    if let (Some(a), Some(b)) = (a, b) {
        return Ok(LogFit { a, b });
    }
    if let Some(path) = logfit_file {
        return parse_logfit(&std::fs::read_to_string(path)?);
    }
    let default_path = cfg.out_dir.join("logfit.txt");
    if default_path.exists() {
        return parse_logfit(&std::fs::read_to_string(default_path)?);
    }
    eprintln!("no log law given; fitting the anchor nuclei first");
    Ok(cmd_fit_anchors(cfg)?.logfit)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::HoLimit { nuclide } => {
            let rep = cmd_ho_limit(&cfg, nuclide)?;
            println!("nuclide\ts0A\tr0A");
            println!("{}\t{:.4}\t{:.4}", rep.nuclide, rep.s0, rep.r0);
        }
        Command::Sweep { nuclide } => {
            let art = cmd_sweep(&cfg, nuclide)?;
            println!(
                "{nuclide}: S = {:.4} + {:.4} (1/y)^{:.4} (max rel residual {:.2e})",
                art.entropy_fit.c0,
                art.entropy_fit.c1,
                art.entropy_fit.lambda,
                art.entropy_fit.residual
            );
            println!(
                "{nuclide}: r_b = {:.4} + {:.4} (1/y)^{:.4} (max rel residual {:.2e})",
                art.radius_fit.c0,
                art.radius_fit.c1,
                art.radius_fit.lambda,
                art.radius_fit.residual
            );
            println!("sweep table written to {}", cfg.out_dir.display());
        }
        Command::FitAnchors => {
            let rep = cmd_fit_anchors(&cfg)?;
            println!("nuclide\tcase\tb0\ty\tchi2\tS");
            for (i, label) in ["He4", "Ca40"].iter().enumerate() {
                println!(
                    "{label}\tSRC\t{:.4}\t{:.4}\t{:.2}\t{:.4}",
                    rep.src[i].b0,
                    rep.src[i].y.value(),
                    rep.src[i].chi2.unwrap_or(f64::NAN),
                    rep.src[i].s
                );
                println!(
                    "{label}\tHO\t{:.4}\tinf\t{:.2}\t{:.4}",
                    rep.ho[i].b0, rep.ho_chi2[i], rep.ho[i].s
                );
            }
            println!("log law: a = {:.4}, b = {:.4}", rep.logfit.a, rep.logfit.b);
        }
        Command::Determine {
            nuclide,
            a,
            b,
            logfit_file,
        } => {
            let logfit = resolve_logfit(&cfg, *a, *b, logfit_file.as_ref())?;
            let rows = cmd_determine(&cfg, &logfit, &resolve_labels(nuclide))?;
            println!("nuclide\tcase\tb0\ty\tchi2\tr_ch\tS");
            for row in &rows {
                let fmt = |v: Option<f64>, d: usize| {
                    v.map_or("-".to_string(), |x| format!("{x:.d$}"))
                };
                let y = match (row.case, row.y) {
                    ("HO", _) => "inf".to_string(),
                    (_, Some(y)) => format!("{y:.4}"),
                    _ => "-".to_string(),
                };
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{:.3}\t{}{}",
                    row.nuclide,
                    row.case,
                    fmt(row.b0, 4),
                    y,
                    fmt(row.chi2, 2),
                    row.r_ch,
                    fmt(row.s, 4),
                    row.flag
                        .as_ref()
                        .map_or(String::new(), |f| format!("  [flagged: {f}]"))
                );
            }
        }
        Command::PlotData {
            nuclide,
            case,
            a,
            b,
            logfit_file,
        } => {
            let case: CaseSelector = case.parse()?;
            let logfit = resolve_logfit(&cfg, *a, *b, logfit_file.as_ref())?;
            let files = cmd_plot_data(&cfg, nuclide, case, &logfit)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
