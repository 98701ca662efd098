//! Command-line driver: configuration, dataset ingestion, report and
//! plot-data emission, and the end-to-end determination pipeline.

use crate::constants::ChargeConstants;
use crate::correlated::{CorrelatedModel, CorrelationParams, QuadratureSpec};
use crate::error::{Error, Result};
use crate::ffit::{
    chi_square_model, fit_anchor, ho_baseline, ChargeCorrections, ExperimentalDataset, FitResult,
};
use crate::infoentropy::{entropy_sum, ho_entropy_sum};
use crate::nuclide::{builtin_nuclide, r1_moment, Nuclide, STANDARD_LABELS};
use crate::scaling::{
    default_y_grid, fit_entropy_law, fit_radius_law, loglaw_from_anchors, predict_entropy,
    solve_b0, solve_y, sweep, LogFit, PowerLawFit, SweepTable,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const EMBEDDED_RADII: &str = include_str!("../data/radii.csv");
const EMBEDDED_HE4: &str = include_str!("../data/he4_fch.csv");
const EMBEDDED_CA40: &str = include_str!("../data/ca40_fch.csv");

/// Resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub constants: ChargeConstants,
    pub spec: QuadratureSpec,
    /// Sweep grid of y values.
    pub grid: Vec<f64>,
    /// Directory with dataset and radii overrides; embedded data otherwise.
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constants: ChargeConstants::default(),
            spec: QuadratureSpec::default(),
            grid: default_y_grid(),
            data_dir: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn corrections(&self) -> ChargeCorrections {
        ChargeCorrections::from_constants(&self.constants)
    }
}

/// Parse a flat key = value config file over the defaults. Lines starting
/// with '#' are comments. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut grid_spec: (f64, f64, usize) = (0.05, 0.40, 8);
    let mut grid_touched = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let fparse = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("line {}: bad number '{v}'", lineno + 1)))
        };
        let uparse = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("line {}: bad integer '{v}'", lineno + 1)))
        };
        match key {
            "r_p" => cfg.constants.r_p = fparse(value)?,
            "df_const" => cfg.constants.df_const = fparse(value)?,
            "r_max_mult" => cfg.spec.r_max_mult = fparse(value)?,
            "panels" => cfg.spec.panels = uparse(value)?,
            "nodes_per_panel" => cfg.spec.nodes_per_panel = uparse(value)?,
            "l_max" => cfg.spec.l_max = uparse(value)?,
            "l_max_cap" => cfg.spec.l_max_cap = uparse(value)?,
            "tol" => cfg.spec.tol = fparse(value)?,
            "grid_min_inv_y" => {
                grid_spec.0 = fparse(value)?;
                grid_touched = true;
            }
            "grid_max_inv_y" => {
                grid_spec.1 = fparse(value)?;
                grid_touched = true;
            }
            "grid_points" => {
                grid_spec.2 = uparse(value)?;
                grid_touched = true;
            }
            "data_dir" => cfg.data_dir = Some(PathBuf::from(value)),
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    if grid_touched {
        cfg.grid = log_grid(grid_spec.0, grid_spec.1, grid_spec.2)?;
    }
    if cfg.constants.r_p <= 0.0 || cfg.constants.df_const < 0.0 {
        return Err(Error::Config("constants overrides must be positive".into()));
    }
    Ok(cfg)
}

/// Logarithmically spaced y grid from a 1/y range.
pub fn log_grid(min_inv_y: f64, max_inv_y: f64, points: usize) -> Result<Vec<f64>> {
    if !(min_inv_y > 0.0 && max_inv_y > min_inv_y && points >= 2) {
        return Err(Error::Config(format!(
            "invalid grid spec: 1/y in [{min_inv_y}, {max_inv_y}], {points} points"
        )));
    }
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            1.0 / (min_inv_y * (max_inv_y / min_inv_y).powf(t))
        })
        .collect())
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => parse_config(&fs::read_to_string(p)?),
    }
}

/// Charge radii table: builtin values, overridable by `radii.csv` in the
/// data directory.
pub fn load_radii(cfg: &RunConfig) -> Result<BTreeMap<String, f64>> {
    let text = match &cfg.data_dir {
        Some(dir) if dir.join("radii.csv").exists() => fs::read_to_string(dir.join("radii.csv"))?,
        _ => EMBEDDED_RADII.to_string(),
    };
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "nuclide,r_ch" {
            continue;
        }
        let (name, value) = line.split_once(',').ok_or_else(|| {
            Error::Dataset(format!("radii table line {}: expected 'name,r_ch'", lineno + 1))
        })?;
        let r = value.trim().parse::<f64>().map_err(|_| {
            Error::Dataset(format!("radii table line {}: bad radius '{value}'", lineno + 1))
        })?;
        out.insert(name.trim().to_string(), r);
    }
    Ok(out)
}

/// Load a |F_ch| dataset for a nuclide: `<label lowercased>_fch.csv` in the
/// data directory, or the embedded anchors (He4, Ca40).
pub fn load_dataset(cfg: &RunConfig, label: &str) -> Result<Option<ExperimentalDataset>> {
    let lower = label.to_lowercase();
    if let Some(dir) = &cfg.data_dir {
        let path = dir.join(format!("{lower}_fch.csv"));
        if path.exists() {
            return Ok(Some(ExperimentalDataset::from_csv(
                label,
                &fs::read_to_string(path)?,
            )?));
        }
    }
    match label {
        "He4" => Ok(Some(ExperimentalDataset::from_csv(label, EMBEDDED_HE4)?)),
        "Ca40" => Ok(Some(ExperimentalDataset::from_csv(label, EMBEDDED_CA40)?)),
        _ => Ok(None),
    }
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(())
}

/// Every command writes a manifest of the resolved constants and grids.
fn write_manifest(cfg: &RunConfig, command: &str) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "command = {command}");
    let _ = writeln!(text, "r_p = {:.6}", cfg.constants.r_p);
    let _ = writeln!(text, "df_const = {:.6}", cfg.constants.df_const);
    let _ = writeln!(text, "r_max_mult = {}", cfg.spec.r_max_mult);
    let _ = writeln!(text, "panels = {}", cfg.spec.panels);
    let _ = writeln!(text, "nodes_per_panel = {}", cfg.spec.nodes_per_panel);
    let _ = writeln!(text, "l_max = {}", cfg.spec.l_max);
    let _ = writeln!(text, "l_max_cap = {}", cfg.spec.l_max_cap);
    let _ = writeln!(text, "tol = {:e}", cfg.spec.tol);
    let grid = cfg
        .grid
        .iter()
        .map(|y| format!("{:.8}", 1.0 / y))
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(text, "grid_inv_y = {grid}");
    let _ = writeln!(
        text,
        "data_dir = {}",
        cfg.data_dir
            .as_ref()
            .map_or("<embedded>".to_string(), |p| p.display().to_string())
    );
    fs::write(cfg.out_dir.join("manifest.txt"), text)?;
    Ok(())
}

/// HO-limit report: (s0A, r0A).
#[derive(Debug, Clone)]
pub struct HoLimitReport {
    pub nuclide: String,
    pub s0: f64,
    pub r0: f64,
}

pub fn cmd_ho_limit(cfg: &RunConfig, label: &str) -> Result<HoLimitReport> {
    ensure_out_dir(cfg)?;
    write_manifest(cfg, &format!("ho-limit {label}"))?;
    let nuclide = builtin_nuclide(label)?;
    let s0 = ho_entropy_sum(&nuclide)?;
    let r0 = r1_moment(&nuclide).sqrt();
    let mut text = String::from("# HO-limit entropy sum and zero-correlation radius\nnuclide\ts0A\tr0A\n");
    let _ = writeln!(text, "{label}\t{s0:.4}\t{r0:.4}");
    fs::write(cfg.out_dir.join(format!("{label}_ho_limit.tsv")), text)?;
    Ok(HoLimitReport {
        nuclide: label.to_string(),
        s0,
        r0,
    })
}

/// Sweep artifacts: the table and both power-law fits.
#[derive(Debug, Clone)]
pub struct SweepArtifacts {
    pub table: SweepTable,
    pub s0: f64,
    pub entropy_fit: PowerLawFit,
    pub radius_fit: PowerLawFit,
}

fn run_sweep(cfg: &RunConfig, nuclide: &Nuclide) -> Result<SweepArtifacts> {
    let table = sweep(nuclide, &cfg.grid, &cfg.spec)?;
    let s0 = ho_entropy_sum(nuclide)?;
    let entropy_fit = fit_entropy_law(&table, s0)?;
    let radius_fit = fit_radius_law(&table, r1_moment(nuclide).sqrt())?;
    Ok(SweepArtifacts {
        table,
        s0,
        entropy_fit,
        radius_fit,
    })
}

fn grid_header(cfg: &RunConfig) -> String {
    format!(
        "# grid: {} points, 1/y in [{:.6}, {:.6}]; quadrature: r_max_mult={} panels={} nodes_per_panel={} l_max={}",
        cfg.grid.len(),
        cfg.grid.iter().map(|y| 1.0 / y).fold(f64::INFINITY, f64::min),
        cfg.grid.iter().map(|y| 1.0 / y).fold(0.0, f64::max),
        cfg.spec.r_max_mult,
        cfg.spec.panels,
        cfg.spec.nodes_per_panel,
        cfg.spec.l_max,
    )
}

pub fn cmd_sweep(cfg: &RunConfig, label: &str) -> Result<SweepArtifacts> {
    ensure_out_dir(cfg)?;
    write_manifest(cfg, &format!("sweep {label}"))?;
    let nuclide = builtin_nuclide(label)?;
    let art = run_sweep(cfg, &nuclide)?;

    let mut text = format!("# entropy and radius sweep for {label}\n{}\n", grid_header(cfg));
    text.push_str("y\tinv_y\tS_r(b0=1)\tS_k(b0=1)\tS\tr_b\tclipped_mass\n");
    for row in &art.table.rows {
        let _ = writeln!(
            text,
            "{:.6}\t{:.6}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.2e}",
            row.y, row.inv_y, row.s_r, row.s_k, row.s, row.r_b, row.clipped_mass
        );
    }
    fs::write(cfg.out_dir.join(format!("{label}_sweep.tsv")), text)?;

    for (fname, fit, what) in [
        ("entropy_fit", &art.entropy_fit, "S"),
        ("radius_fit", &art.radius_fit, "r_b"),
    ] {
        let mut text = format!(
            "# fitted law {what}(1/y) = c0 + c1 (1/y)^lambda for {label}\n# c0={:.10e} c1={:.10e} lambda={:.10e} max_rel_residual={:.3e}\n{}\n",
            fit.c0, fit.c1, fit.lambda, fit.residual, grid_header(cfg)
        );
        let samples = 106;
        for i in 0..samples {
            let inv_y = 0.42 * i as f64 / (samples - 1) as f64;
            let _ = writeln!(text, "{:.6}\t{:.6}", inv_y, fit.eval_inv_y(inv_y));
        }
        fs::write(cfg.out_dir.join(format!("{label}_{fname}.tsv")), text)?;
    }
    Ok(art)
}

/// Anchor-fit report: SRC and HO fits of both anchors plus the log law.
#[derive(Debug, Clone)]
pub struct AnchorsReport {
    pub src: [FitResult; 2],
    pub ho: [FitResult; 2],
    pub ho_chi2: [f64; 2],
    pub logfit: LogFit,
}

pub fn cmd_fit_anchors(cfg: &RunConfig) -> Result<AnchorsReport> {
    ensure_out_dir(cfg)?;
    write_manifest(cfg, "fit-anchors")?;
    let radii = load_radii(cfg)?;
    let corr = cfg.corrections();

    let labels = ["He4", "Ca40"];
    let fits: Result<Vec<(FitResult, FitResult, f64)>> = labels
        .par_iter()
        .map(|&label| {
            let nuclide = builtin_nuclide(label)?;
            let dataset = load_dataset(cfg, label)?.ok_or_else(|| {
                Error::Dataset(format!("no anchor dataset available for {label}"))
            })?;
            let r_ch = *radii
                .get(label)
                .ok_or_else(|| Error::Dataset(format!("no charge radius for {label}")))?;
            let src = fit_anchor(&nuclide, &dataset, r_ch, &corr, &cfg.spec)?;
            let ho = ho_baseline(&nuclide, r_ch, &corr)?;
            let ho_model = CorrelatedModel::new(
                &nuclide,
                ho.b0,
                CorrelationParams::ho_limit(),
                &cfg.spec,
            )?;
            let ho_chi2 = chi_square_model(&ho_model, &dataset, &corr)?;
            Ok((src, ho, ho_chi2))
        })
        .collect();
    let fits = fits?;
    let logfit = loglaw_from_anchors(fits[0].0.s, fits[1].0.s)?;

    let mut text = String::from(
        "# anchor fits with the charge-radius constraint\nnuclide\tcase\tb0\ty\tchi2\tr_ch\tS\n",
    );
    for (i, label) in labels.iter().enumerate() {
        let (src, ho, ho_chi2) = &fits[i];
        let _ = writeln!(
            text,
            "{label}\tSRC\t{:.4}\t{:.4}\t{:.2}\t{:.3}\t{:.4}",
            src.b0,
            src.y.value(),
            src.chi2.unwrap_or(f64::NAN),
            src.r_ch,
            src.s
        );
        let _ = writeln!(
            text,
            "{label}\tHO\t{:.4}\tinf\t{:.2}\t{:.3}\t{:.4}",
            ho.b0, ho_chi2, ho.r_ch, ho.s
        );
    }
    fs::write(cfg.out_dir.join("anchors.tsv"), text)?;
    fs::write(
        cfg.out_dir.join("logfit.txt"),
        format!(
            "# S(A) = a + b ln A from the two anchor entropies\na = {:.12e}\nb = {:.12e}\n",
            logfit.a, logfit.b
        ),
    )?;
    Ok(AnchorsReport {
        src: [fits[0].0, fits[1].0],
        ho: [fits[0].1, fits[1].1],
        ho_chi2: [fits[0].2, fits[1].2],
        logfit,
    })
}

/// Parse a logfit.txt written by [`cmd_fit_anchors`].
pub fn parse_logfit(text: &str) -> Result<LogFit> {
    let mut a = None;
    let mut b = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(v) = line.strip_prefix("a =") {
            a = v.trim().parse::<f64>().ok();
        } else if let Some(v) = line.strip_prefix("b =") {
            b = v.trim().parse::<f64>().ok();
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok(LogFit { a, b }),
        _ => Err(Error::Config("could not parse log-law file".into())),
    }
}

/// One row of the determination table.
#[derive(Debug, Clone)]
pub struct DetermineRow {
    pub nuclide: String,
    pub case: &'static str,
    pub b0: Option<f64>,
    pub y: Option<f64>,
    pub chi2: Option<f64>,
    pub r_ch: f64,
    pub s: Option<f64>,
    /// Set when the pipeline could not determine parameters.
    pub flag: Option<String>,
    /// Fitted per-nucleus law parameters (entropy, radius).
    pub fits: Option<(PowerLawFit, PowerLawFit)>,
    pub s0: f64,
    pub s_target: f64,
}

/// The determination pipeline: for each nuclide, S(A) from the log law,
/// then y from the inverted entropy law and b0 from the charge-radius
/// constraint. Works without any form-factor data.
pub fn cmd_determine(cfg: &RunConfig, logfit: &LogFit, labels: &[String]) -> Result<Vec<DetermineRow>> {
    ensure_out_dir(cfg)?;
    write_manifest(cfg, &format!("determine {}", labels.join(",")))?;
    let radii = load_radii(cfg)?;
    let corr = cfg.corrections();

    let rows: Result<Vec<Vec<DetermineRow>>> = labels
        .par_iter()
        .map(|label| {
            let nuclide = builtin_nuclide(label)?;
            let r_ch = *radii
                .get(label.as_str())
                .ok_or_else(|| Error::Dataset(format!("no charge radius for {label}")))?;
            let dataset = load_dataset(cfg, label)?;
            let art = run_sweep(cfg, &nuclide)?;
            let s_target = predict_entropy(logfit, nuclide.mass_number());

            let src_row = match solve_y(&art.entropy_fit, s_target) {
                Err(Error::NoSolution(msg)) => DetermineRow {
                    nuclide: label.clone(),
                    case: "SRC",
                    b0: None,
                    y: None,
                    chi2: None,
                    r_ch,
                    s: None,
                    flag: Some(msg),
                    fits: Some((art.entropy_fit, art.radius_fit)),
                    s0: art.s0,
                    s_target,
                },
                Err(e) => return Err(e),
                Ok(y) => {
                    let b0 = solve_b0(&nuclide, y, r_ch, &cfg.constants, &cfg.spec)?;
                    let model = CorrelatedModel::new(&nuclide, b0, y, &cfg.spec)?;
                    let s_model = entropy_sum(&model)?.s;
                    let chi2 = match &dataset {
                        Some(ds) => Some(chi_square_model(&model, ds, &corr)?),
                        None => None,
                    };
                    DetermineRow {
                        nuclide: label.clone(),
                        case: "SRC",
                        b0: Some(b0),
                        y: Some(y.value()),
                        chi2,
                        r_ch,
                        s: Some(s_model),
                        flag: None,
                        fits: Some((art.entropy_fit, art.radius_fit)),
                        s0: art.s0,
                        s_target,
                    }
                }
            };

            let ho = ho_baseline(&nuclide, r_ch, &corr)?;
            let ho_chi2 = match &dataset {
                Some(ds) => {
                    let model = CorrelatedModel::new(
                        &nuclide,
                        ho.b0,
                        CorrelationParams::ho_limit(),
                        &cfg.spec,
                    )?;
                    Some(chi_square_model(&model, ds, &corr)?)
                }
                None => None,
            };
            let ho_row = DetermineRow {
                nuclide: label.clone(),
                case: "HO",
                b0: Some(ho.b0),
                y: None,
                chi2: ho_chi2,
                r_ch,
                s: Some(ho.s),
                flag: None,
                fits: None,
                s0: art.s0,
                s_target,
            };
            Ok(vec![src_row, ho_row])
        })
        .collect();
    let rows: Vec<DetermineRow> = rows?.into_iter().flatten().collect();

    // Table of fitted per-nucleus law parameters
    let mut t1 = String::from(
        "# fitted power-law parameters: S = s0 + s1 (1/y)^ls, r_b = r0 + r1 (1/y)^lr\nnuclide\ts0A\ts1A\tlambda_sA\tr0A\tr1A\tlambda_rA\n",
    );
    for row in rows.iter().filter(|r| r.case == "SRC") {
        if let Some((sfit, rfit)) = &row.fits {
            let _ = writeln!(
                t1,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                row.nuclide, sfit.c0, sfit.c1, sfit.lambda, rfit.c0, rfit.c1, rfit.lambda
            );
        }
    }
    fs::write(cfg.out_dir.join("table1.tsv"), t1)?;

    let fmt_opt = |v: Option<f64>, digits: usize| -> String {
        v.map_or("-".to_string(), |x| format!("{x:.digits$}"))
    };
    let mut t2 = format!(
        "# determined parameters; log law a = {:.6}, b = {:.6}\nnuclide\tcase\tb0\ty\tchi2\tr_ch\tS\n",
        logfit.a, logfit.b
    );
    for row in &rows {
        let y_text = match (row.case, row.y) {
            ("HO", _) => "inf".to_string(),
            (_, Some(y)) => format!("{y:.4}"),
            (_, None) => "-".to_string(),
        };
        let _ = writeln!(
            t2,
            "{}\t{}\t{}\t{}\t{}\t{:.3}\t{}{}",
            row.nuclide,
            row.case,
            fmt_opt(row.b0, 4),
            y_text,
            fmt_opt(row.chi2, 2),
            row.r_ch,
            fmt_opt(row.s, 4),
            row.flag
                .as_ref()
                .map_or(String::new(), |f| format!("\t# flagged: {f}")),
        );
    }
    fs::write(cfg.out_dir.join("table2.tsv"), t2)?;
    Ok(rows)
}

/// Curve selector for plot data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSelector {
    Src,
    Ho,
    Both,
}

impl std::str::FromStr for CaseSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "src" => Ok(Self::Src),
            "ho" => Ok(Self::Ho),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "case must be one of src, ho, both; got '{other}'"
            ))),
        }
    }
}

/// Emit |F_ch(q)| plot files on q in [0, 4] fm^-1 for one nuclide, for the
/// SRC and/or HO cases, plus the experimental overlay when a dataset exists.
pub fn cmd_plot_data(
    cfg: &RunConfig,
    label: &str,
    case: CaseSelector,
    logfit: &LogFit,
) -> Result<Vec<PathBuf>> {
    ensure_out_dir(cfg)?;
    write_manifest(cfg, &format!("plot-data {label}"))?;
    let nuclide = builtin_nuclide(label)?;
    let radii = load_radii(cfg)?;
    let r_ch = *radii
        .get(label)
        .ok_or_else(|| Error::Dataset(format!("no charge radius for {label}")))?;
    let corr = cfg.corrections();
    let mut written = Vec::new();

    let write_curve = |model: &CorrelatedModel, suffix: &str| -> Result<PathBuf> {
        let mut text = format!(
            "# |F_ch(q)| for {label} ({suffix}); b0={:.4} y={}\n{}\nq\tabs_fch\n",
            model.b0(),
            model.correlation(),
            grid_header(cfg)
        );
        let samples = 401;
        for i in 0..samples {
            let q = 4.0 * i as f64 / (samples - 1) as f64;
            let f = crate::ffit::charge_form_factor(model, q, &corr)?;
            let _ = writeln!(text, "{q:.4}\t{:.10e}", f.abs());
        }
        let path = cfg.out_dir.join(format!("{label}_fch_{suffix}.tsv"));
        fs::write(&path, text)?;
        Ok(path)
    };

    if matches!(case, CaseSelector::Src | CaseSelector::Both) {
        let art = run_sweep(cfg, &nuclide)?;
        let s_target = predict_entropy(logfit, nuclide.mass_number());
        let y = solve_y(&art.entropy_fit, s_target)?;
        let b0 = solve_b0(&nuclide, y, r_ch, &cfg.constants, &cfg.spec)?;
        let model = CorrelatedModel::new(&nuclide, b0, y, &cfg.spec)?;
        written.push(write_curve(&model, "src")?);
    }
    if matches!(case, CaseSelector::Ho | CaseSelector::Both) {
        let ho = ho_baseline(&nuclide, r_ch, &corr)?;
        let model =
            CorrelatedModel::new(&nuclide, ho.b0, CorrelationParams::ho_limit(), &cfg.spec)?;
        written.push(write_curve(&model, "ho")?);
    }
    if let Some(ds) = load_dataset(cfg, label)? {
        let mut text = format!("# experimental overlay for {label}\n# source: {}\nq\tabs_fch\tsigma\n", ds.source);
        for p in &ds.points {
            let _ = writeln!(
                text,
                "{:.4}\t{:.6e}\t{:.3e}",
                p.q,
                p.value,
                ds.sigma(p)
            );
        }
        let path = cfg.out_dir.join(format!("{label}_fch_exp.tsv"));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Resolve nuclide labels for `determine`: "all" expands to the eight
/// standard nuclides.
pub fn resolve_labels(arg: &str) -> Vec<String> {
    if arg == "all" {
        STANDARD_LABELS.iter().map(|s| s.to_string()).collect()
    } else {
        arg.split(',').map(|s| s.trim().to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let cfg = parse_config("r_p = 0.85\n# comment\ngrid_points = 5\nout_dir = /tmp/x\n").unwrap();
        assert_eq!(cfg.constants.r_p, 0.85);
        assert_eq!(cfg.grid.len(), 5);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
        assert!(parse_config("bogus = 1\n").is_err());
        assert!(parse_config("r_p\n").is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.05, 0.40, 8).unwrap();
        assert_eq!(g.len(), 8);
        assert!((1.0 / g[0] - 0.05).abs() < 1e-12);
        assert!((1.0 / g[7] - 0.40).abs() < 1e-12);
        assert!(log_grid(0.0, 0.4, 8).is_err());
        assert!(log_grid(0.4, 0.05, 8).is_err());
    }

    #[test]
    fn embedded_radii_table() {
        let cfg = RunConfig::default();
        let radii = load_radii(&cfg).unwrap();
        assert_eq!(radii.len(), 8);
        assert_eq!(radii["He4"], 1.676);
        assert_eq!(radii["Ca40"], 3.479);
    }

    #[test]
    fn embedded_datasets_parse() {
        let cfg = RunConfig::default();
        let he4 = load_dataset(&cfg, "He4").unwrap().unwrap();
        assert!(he4.points.len() >= 10);
        assert!(he4.source.contains("synthetic"));
        let ca40 = load_dataset(&cfg, "Ca40").unwrap().unwrap();
        assert!(ca40.points.len() >= 10);
        assert!(load_dataset(&cfg, "C12").unwrap().is_none());
    }

    #[test]
    fn logfit_round_trip() {
        let lf = LogFit {
            a: 5.402912345,
            b: 0.936012345,
        };
        let text = format!("a = {:.12e}\nb = {:.12e}\n", lf.a, lf.b);
        let parsed = parse_logfit(&text).unwrap();
        assert_eq!(parsed.a, lf.a);
        assert_eq!(parsed.b, lf.b);
        assert!(parse_logfit("nothing here").is_err());
    }

    #[test]
    fn label_resolution() {
        assert_eq!(resolve_labels("all").len(), 8);
        assert_eq!(resolve_labels("He4,C12"), vec!["He4", "C12"]);
    }
}
