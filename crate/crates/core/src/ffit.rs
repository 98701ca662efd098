//! Charge form factors with correction factors, the chi^2 comparison with
//! experimental data, and the radius-constrained (b0, y) fit used for the
//! anchor nuclei.

use crate::constants::ChargeConstants;
use crate::correlated::{CorrelatedModel, CorrelationParams, QuadratureSpec};
use crate::error::{Error, Result};
use crate::infoentropy::entropy_sum;
use crate::nuclide::{r1_moment, Nuclide};
use crate::scaling::charge_radius_sq;

/// Default relative sigma floor when a dataset carries no uncertainties.
pub const SIGMA_REL_FLOOR: f64 = 0.05;
/// Default absolute sigma floor.
pub const SIGMA_ABS_FLOOR: f64 = 1e-5;

/// One |F_ch| data point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    /// Momentum transfer (fm^-1).
    pub q: f64,
    /// |F_ch(q)|, dimensionless.
    pub value: f64,
    /// Optional 1-sigma uncertainty.
    pub sigma: Option<f64>,
}

/// A digitized elastic charge-form-factor dataset.
#[derive(Debug, Clone)]
pub struct ExperimentalDataset {
    pub nuclide: String,
    pub points: Vec<DataPoint>,
    /// Mandatory provenance text.
    pub source: String,
}

impl ExperimentalDataset {
    /// Parse the dataset format: comment lines start with '#', one of which
    /// must carry `# source: ...`; then a header `q,fch[,sigma]` and
    /// comma-separated rows. q must be strictly increasing, values
    /// nonnegative.
    pub fn from_csv(nuclide: &str, text: &str) -> Result<Self> {
        let mut source = None;
        let mut points = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(s) = rest.strip_prefix("source:") {
                    source = Some(s.trim().to_string());
                }
                continue;
            }
            if !saw_header {
                if !(line == "q,fch" || line == "q,fch,sigma") {
                    return Err(Error::Dataset(format!(
                        "line {}: expected header 'q,fch[,sigma]', found '{line}'",
                        lineno + 1
                    )));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::Dataset(format!(
                    "line {}: expected 2 or 3 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Dataset(format!("line {}: bad number '{s}'", lineno + 1)))
            };
            let q = parse(fields[0])?;
            let value = parse(fields[1])?;
            let sigma = match fields.get(2) {
                Some(&"") | None => None,
                Some(s) => Some(parse(s)?),
            };
            if value < 0.0 {
                return Err(Error::Dataset(format!(
                    "line {}: |F_ch| must be nonnegative, got {value}",
                    lineno + 1
                )));
            }
            if let Some(last) = points.last() {
                let last: &DataPoint = last;
                if q <= last.q {
                    return Err(Error::Dataset(format!(
                        "line {}: q must be strictly increasing ({q} after {})",
                        lineno + 1,
                        last.q
                    )));
                }
            }
            points.push(DataPoint { q, value, sigma });
        }
        let source = source.ok_or_else(|| {
            Error::Dataset("dataset is missing the mandatory '# source:' provenance line".into())
        })?;
        if points.is_empty() {
            return Err(Error::Dataset("dataset has no data points".into()));
        }
        Ok(Self {
            nuclide: nuclide.to_string(),
            points,
            source,
        })
    }

    /// Effective sigma of a point: supplied value, or the configured floors.
    pub fn sigma(&self, p: &DataPoint) -> f64 {
        p.sigma
            .unwrap_or_else(|| (SIGMA_REL_FLOOR * p.value).max(SIGMA_ABS_FLOOR))
    }
}

/// Correction factors applied to the point form factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeCorrections {
    /// Proton RMS radius (fm).
    pub r_p: f64,
    /// Darwin-Foldy radius term (fm^2).
    pub df_const: f64,
    /// Apply the Tassie-Barker center-of-mass factor exp(q^2 b0^2 / 4A).
    pub tassie_barker: bool,
}

impl Default for ChargeCorrections {
    fn default() -> Self {
        let c = ChargeConstants::default();
        Self {
            r_p: c.r_p,
            df_const: c.df_const,
            tassie_barker: true,
        }
    }
}

impl ChargeCorrections {
    pub fn from_constants(c: &ChargeConstants) -> Self {
        Self {
            r_p: c.r_p,
            df_const: c.df_const,
            tassie_barker: true,
        }
    }

    pub fn constants(&self) -> ChargeConstants {
        ChargeConstants {
            r_p: self.r_p,
            df_const: self.df_const,
        }
    }
}

/// Charge form factor
/// `F_ch(q) = F(q) f_cm(q) f_p(q) f_DF(q)` with
/// f_cm = exp(q^2 b0^2 / 4A) (Tassie-Barker), f_p = exp(-q^2 r_p^2 / 6) and
/// f_DF = exp(-q^2 df / 6).
pub fn charge_form_factor(
    model: &CorrelatedModel,
    q: f64,
    corr: &ChargeCorrections,
) -> Result<f64> {
    let f = model.form_factor(q)?;
    let q2 = q * q;
    let b0 = model.b0();
    let a = model.nuclide().mass_number() as f64;
    let f_cm = if corr.tassie_barker {
        (q2 * b0 * b0 / (4.0 * a)).exp()
    } else {
        1.0
    };
    let f_p = (-q2 * corr.r_p * corr.r_p / 6.0).exp();
    let f_df = (-q2 * corr.df_const / 6.0).exp();
    Ok(f * f_cm * f_p * f_df)
}

/// chi^2 of a |F_ch| curve against a dataset:
/// `sum_i (|F_ch(q_i)| - v_i)^2 / sigma_i^2`.
pub fn chi_square(
    mut curve: impl FnMut(f64) -> Result<f64>,
    dataset: &ExperimentalDataset,
) -> Result<f64> {
    if dataset.points.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    let mut sum = 0.0;
    for p in &dataset.points {
        let theory = curve(p.q)?.abs();
        let sigma = dataset.sigma(p);
        let d = (theory - p.value) / sigma;
        sum += d * d;
    }
    Ok(sum)
}

/// chi^2 of a correlated model with charge corrections.
pub fn chi_square_model(
    model: &CorrelatedModel,
    dataset: &ExperimentalDataset,
    corr: &ChargeCorrections,
) -> Result<f64> {
    chi_square(|q| charge_form_factor(model, q, corr), dataset)
}

/// Outcome of a radius-constrained parameter determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub b0: f64,
    pub y: CorrelationParams,
    /// chi^2 against the dataset, when one was involved.
    pub chi2: Option<f64>,
    /// The charge radius the constraint reproduced (fm).
    pub r_ch: f64,
    /// Entropy sum at the optimum.
    pub s: f64,
}

/// b0 from the charge-radius constraint at fixed y (closed form given the
/// dimensionless mean-square radius of the kernel).
fn constrained_b0(r_b2: f64, mass_number: u32, r_ch_exp: f64, consts: &ChargeConstants) -> Result<f64> {
    let denom = r_b2 - 1.5 / mass_number as f64;
    let numer = r_ch_exp * r_ch_exp - consts.radius_shift();
    if denom <= 0.0 || numer <= 0.0 {
        return Err(Error::NoSolution(format!(
            "charge-radius constraint has no positive-b0 root (numerator {numer:.6}, denominator {denom:.6})"
        )));
    }
    Ok((numer / denom).sqrt())
}

/// HO baseline: y = infinity, b0 fixed by the charge radius,
/// `b0^2 = (r_ch^2 - r_p^2 - df) / (R1 - 3/(2A))`.
pub fn ho_baseline(
    nuclide: &Nuclide,
    r_ch_exp: f64,
    corr: &ChargeCorrections,
) -> Result<FitResult> {
    let consts = corr.constants();
    let b0 = constrained_b0(r1_moment(nuclide), nuclide.mass_number(), r_ch_exp, &consts)?;
    let model = CorrelatedModel::new(
        nuclide,
        b0,
        CorrelationParams::ho_limit(),
        &QuadratureSpec::default(),
    )?;
    let s = entropy_sum(&model)?.s;
    Ok(FitResult {
        b0,
        y: CorrelationParams::ho_limit(),
        chi2: None,
        r_ch: r_ch_exp,
        s,
    })
}

/// Least-squares fit of the theoretical |F_ch| to a dataset with the
/// constraint that the experimental charge radius is reproduced.
///
/// The constraint eliminates b0 at every candidate y, so the search is
/// one-dimensional: golden-section over y in [2, 20] followed by parabolic
/// refinement. Deterministic; no randomness.
pub fn fit_anchor(
    nuclide: &Nuclide,
    dataset: &ExperimentalDataset,
    r_ch_exp: f64,
    corr: &ChargeCorrections,
    spec: &QuadratureSpec,
) -> Result<FitResult> {
    if dataset.points.len() < 3 {
        return Err(Error::Dataset(format!(
            "anchor fit needs at least 3 data points, got {}",
            dataset.points.len()
        )));
    }
    let consts = corr.constants();
    let a = nuclide.mass_number();

    // chi^2 as a function of y, with b0 eliminated via the constraint
    let eval = |y: f64| -> Result<(f64, f64)> {
        let kernel = CorrelatedModel::new(nuclide, 1.0, CorrelationParams::new(y)?, spec)?;
        let b0 = constrained_b0(kernel.mean_square_radius(), a, r_ch_exp, &consts)?;
        let model = kernel.with_b0(b0)?;
        // constraint invariant: the model's charge radius reproduces the target
        let achieved = charge_radius_sq(model.mean_square_radius(), b0, a, &consts).sqrt();
        debug_assert!((achieved - r_ch_exp).abs() < 1e-4);
        let chi2 = chi_square_model(&model, dataset, corr)?;
        Ok((chi2, b0))
    };

    // golden-section bracket shrink
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (2.0_f64, 20.0_f64);
    let mut y1 = hi - phi * (hi - lo);
    let mut y2 = lo + phi * (hi - lo);
    let mut f1 = eval(y1)?.0;
    let mut f2 = eval(y2)?.0;
    for _ in 0..24 {
        if f1 <= f2 {
            hi = y2;
            y2 = y1;
            f2 = f1;
            y1 = hi - phi * (hi - lo);
            f1 = eval(y1)?.0;
        } else {
            lo = y1;
            y1 = y2;
            f1 = f2;
            y2 = lo + phi * (hi - lo);
            f2 = eval(y2)?.0;
        }
        if hi - lo < 0.02 {
            break;
        }
    }
    // parabolic refinement through the bracket midpoints
    let (ya, yb, yc) = (lo, 0.5 * (lo + hi), hi);
    let (fa, fb, fc) = (eval(ya)?.0, eval(yb)?.0, eval(yc)?.0);
    let denom = (yb - ya) * (fb - fc) - (yb - yc) * (fb - fa);
    let mut y_best = if denom.abs() > 1e-300 {
        let y_v = yb
            - 0.5 * ((yb - ya).powi(2) * (fb - fc) - (yb - yc).powi(2) * (fb - fa)) / denom;
        if y_v.is_finite() && y_v > ya && y_v < yc {
            y_v
        } else {
            yb
        }
    } else {
        yb
    };
    let mut best = eval(y_best)?;
    for (y_alt, f_alt) in [(ya, fa), (yb, fb), (yc, fc)] {
        if f_alt < best.0 {
            y_best = y_alt;
            best = eval(y_alt)?;
        }
    }

    let (chi2, b0) = best;
    if !chi2.is_finite() {
        return Err(Error::FitNonConvergence(format!(
            "chi^2 not finite at y = {y_best}"
        )));
    }
    let model = CorrelatedModel::new(nuclide, b0, CorrelationParams::new(y_best)?, spec)?;
    let s = entropy_sum(&model)?.s;
    Ok(FitResult {
        b0,
        y: CorrelationParams::new(y_best)?,
        chi2: Some(chi2),
        r_ch: r_ch_exp,
        s,
    })
}
