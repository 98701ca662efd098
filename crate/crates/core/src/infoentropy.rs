//! Shannon information entropies in position and momentum space, their sum
//! and the entropic uncertainty bound check.
//!
//! Natural logarithms throughout (nats). The bound `S >= 3(1 + ln pi)` is
//! attained by Gaussian distributions.

use crate::constants::ENTROPY_BOUND;
use crate::correlated::CorrelatedModel;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
/// Truncated cluster expansions can push distribution tails slightly
/// negative; above this clipped probability mass the report is flagged
/// invalid.
pub const CLIPPED_MASS_LIMIT: f64 = 1e-4;

/// Result of one radial Shannon integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPart {
    /// -4 pi int f ln f x^2 dx
    pub value: f64,
    /// Probability mass clipped away where the evaluator went negative.
    pub clipped_mass: f64,
}

/// Position, momentum and summed entropies of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub s_r: f64,
    pub s_k: f64,
    pub s: f64,
    pub bound_satisfied: bool,
    pub clipped_mass: f64,
    /// False when the clipped mass exceeds [`CLIPPED_MASS_LIMIT`] (the
    /// two-body truncation is outside its domain of validity).
    pub valid: bool,
}

/// Panel layout: log-stretched panels near the origin where ln f varies
/// fastest, then panels growing from scale/2 to 2 scale for the tail.
struct PanelIter {
    scale: f64,
    next_index: usize,
    lo: f64,
}

impl PanelIter {
    fn new(scale: f64) -> Self {
        Self {
            scale,
            next_index: 0,
            lo: 0.0,
        }
    }
}

impl Iterator for PanelIter {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let s = self.scale;
        let stretched = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0];
        let i = self.next_index;
        self.next_index += 1;
        let hi = if i < stretched.len() {
            s * stretched[i]
        } else {
            let k = (i - stretched.len()) as f64;
            self.lo + s * (0.5 * 1.12_f64.powf(k)).min(2.0)
        };
        let lo = self.lo;
        self.lo = hi;
        Some((lo, hi))
    }
}

#[derive(Clone, Copy, Default)]
struct ShannonSums {
    norm: f64,
    entropy: f64,
    clipped: f64,
}

impl ShannonSums {
    fn add(&mut self, other: ShannonSums) {
        self.norm += other.norm;
        self.entropy += other.entropy;
        self.clipped += other.clipped;
    }
}

/// Integrate one panel; panels straddling a sign change of the evaluator
/// are bisected recursively so the logarithmic kink at the zero crossing
/// does not spoil the quadrature.
fn panel_sums(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    xs: &[f64],
    ws: &[f64],
    depth: u32,
) -> Result<ShannonSums> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut sums = ShannonSums::default();
    let mut saw_positive = false;
    let mut saw_negative = false;
    for (&x, &w) in xs.iter().zip(ws) {
        let r = c + h * x;
        let v = f(r);
        if !v.is_finite() {
            return Err(Error::RejectedInput(format!(
                "entropy integrand not finite at r = {r}"
            )));
        }
        let weight = FOUR_PI * h * w * r * r;
        sums.norm += weight * v;
        if v > 0.0 {
            saw_positive = true;
            sums.entropy -= weight * v * v.ln();
        } else {
            // x ln x -> 0 as x -> 0+: floored values contribute nothing to
            // the entropy, only to the clipped-mass diagnostic
            if v < 0.0 {
                saw_negative = true;
            }
            sums.clipped += weight * (-v);
        }
    }
    if saw_positive && saw_negative && depth < 12 {
        let mid = 0.5 * (lo + hi);
        let mut refined = panel_sums(f, lo, mid, xs, ws, depth + 1)?;
        refined.add(panel_sums(f, mid, hi, xs, ws, depth + 1)?);
        return Ok(refined);
    }
    Ok(sums)
}

/// Adaptive Shannon integral of a radial distribution.
///
/// `scale` sets the panel layout (the characteristic width of `f`, e.g. b0
/// in position space and 1/b0 in momentum space). The evaluator must be
/// normalized so that `4 pi int f x^2 dx = 1` within 1e-4, otherwise the
/// input is rejected.
pub fn shannon_radial(f: impl Fn(f64) -> f64, scale: f64) -> Result<EntropyPart> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RejectedInput(format!(
            "entropy integral scale must be positive, got {scale}"
        )));
    }
    let tail_tol = 1e-8;
    let max_panels = 200;

    let mut results = [0.0_f64; 2];
    let mut norm = 0.0;
    let mut clipped = 0.0;
    for (pass, nodes) in [14_usize, 20].into_iter().enumerate() {
        let (xs, ws) = gauss_legendre(nodes);
        let mut acc = ShannonSums::default();
        let mut converged = false;
        for (count, (lo, hi)) in PanelIter::new(scale).enumerate() {
            if count >= max_panels {
                break;
            }
            let sums = panel_sums(&f, lo, hi, &xs, &ws, 0)?;
            acc.add(sums);
            // do not stop in the stretched head region
            if lo > 3.0 * scale && sums.entropy.abs() < tail_tol && sums.norm.abs() < tail_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNonConvergence {
                achieved: f64::NAN,
                required: tail_tol,
                context: "entropy tail did not decay within the panel budget".into(),
            });
        }
        results[pass] = acc.entropy;
        norm = acc.norm;
        clipped = acc.clipped;
    }

    let disagreement = (results[0] - results[1]).abs();
    if disagreement > 1e-6 * results[1].abs().max(1.0) {
        return Err(Error::QuadratureNonConvergence {
            achieved: disagreement,
            required: 1e-6,
            context: "entropy integral unstable under node refinement".into(),
        });
    }
    let deviation = (norm - 1.0).abs();
    if deviation > 1e-4 {
        return Err(Error::Unnormalized { deviation });
    }
    Ok(EntropyPart {
        value: results[1],
        clipped_mass: clipped,
    })
}

/// Position-space Shannon entropy S_r = -int rho ln rho d3r of a radial
/// density evaluator normalized to unity.
pub fn entropy_position(density: impl Fn(f64) -> f64, scale: f64) -> Result<EntropyPart> {
    shannon_radial(density, scale)
}

/// Momentum-space Shannon entropy S_k = -int n ln n d3k of a radial
/// momentum evaluator normalized to unity.
pub fn entropy_momentum(momentum: impl Fn(f64) -> f64, scale: f64) -> Result<EntropyPart> {
    shannon_radial(momentum, scale)
}

/// Full entropy report of a correlated model: S_r, S_k, their sum, the
/// uncertainty-bound flag and the clipped-mass diagnostic.
pub fn entropy_sum(model: &CorrelatedModel) -> Result<EntropyReport> {
    let b0 = model.b0();
    let s_r = entropy_position(model.density_fn(), b0)?;
    // the adaptive tail follows the correlated high-momentum content; the
    // scale only seeds the panel layout
    let s_k = entropy_momentum(model.momentum_fn(), 1.0 / b0)?;
    let clipped_mass = s_r.clipped_mass + s_k.clipped_mass;
    let s = s_r.value + s_k.value;
    Ok(EntropyReport {
        s_r: s_r.value,
        s_k: s_k.value,
        s,
        bound_satisfied: s >= ENTROPY_BOUND - 1e-6,
        clipped_mass,
        valid: clipped_mass <= CLIPPED_MASS_LIMIT,
    })
}

/// HO-limit entropy sum s0 of a nuclide (b0-invariant).
pub fn ho_entropy_sum(nuclide: &crate::nuclide::Nuclide) -> Result<f64> {
    let model = CorrelatedModel::new(
        nuclide,
        1.0,
        crate::correlated::CorrelationParams::ho_limit(),
        &crate::correlated::QuadratureSpec::default(),
    )?;
    Ok(entropy_sum(&model)?.s)
}
