//! Correlated one-body density matrix in the two-body approximation of the
//! factor cluster expansion, and the derived density, momentum distribution,
//! form factor and mean-square radius.
//!
//! With `rho0` the spin-isospin saturated Slater density matrix normalized to
//! A and `g(1,1';2) = f(|r1-r2|) f(|r1'-r2|) - 1` the correlation bond built
//! from the Jastrow function `f(r) = 1 - exp(-y r^2/b0^2)`, the truncated
//! density matrix is
//!
//! ```text
//! rho(1,1') = N0/A [ rho0(1,1')
//!     + int d3r2 g(1,1';2) ( rho0(1,1') rho0(2,2) - 1/4 rho0(1,2) rho0(2,1') ) ]
//! ```
//!
//! The 1/4 is the spin-isospin exchange weight; the direct-minus-exchange
//! structure integrates to A^2 - A, which pins the normalization convention
//! of the cluster term.
//!
//! Everything depends on coordinates only through `r/b0`, so a model is built
//! once in dimensionless units and the oscillator length enters only as a
//! scale factor; [`CorrelatedModel::with_b0`] re-scales a built model for
//! free. This structure is what makes the entropy sum S_r + S_k exactly
//! independent of b0.
//!
//! Angular reductions are analytic: every bond integral collapses onto
//! exponentially scaled modified spherical Bessel functions, so nothing
//! exponentially large is ever handled numerically. Diagonal quantities
//! (density, normalization, radius, form factor) bypass the Legendre
//! expansion entirely; the expansion - with adaptive order - only serves
//! off-diagonal evaluations and the momentum distribution, and its
//! truncation error is measured against the exact diagonal.

use crate::error::{Error, Result};
use crate::hobasis::{self, radial_unit};
use crate::nuclide::{Nuclide, Shell};
use crate::quadrature::CompositeRule;
use crate::specfun::{legendre_all, scaled_mod_spherical_in_all, spherical_jn_all};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
/// Bond factors below this are treated as exactly zero.
const BOND_CUTOFF: f64 = 1e-30;

/// Jastrow correlation strength. Smaller y means stronger short-range
/// correlations; the HO limit y = infinity is an explicit sentinel that
/// routes evaluation to the closed forms of [`crate::hobasis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationParams {
    y: f64,
}

impl CorrelationParams {
    pub fn new(y: f64) -> Result<Self> {
        if y.is_nan() || y <= 0.0 {
            return Err(Error::RejectedInput(format!(
                "correlation parameter y must be positive, got {y}"
            )));
        }
        Ok(Self { y })
    }

    /// The uncorrelated (HO) limit.
    pub fn ho_limit() -> Self {
        Self { y: f64::INFINITY }
    }

    pub fn is_ho(&self) -> bool {
        self.y.is_infinite()
    }

    pub fn value(&self) -> f64 {
        self.y
    }
}

impl std::fmt::Display for CorrelationParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ho() {
            write!(f, "inf")
        } else {
            write!(f, "{:.6}", self.y)
        }
    }
}

/// Jastrow function f(r_b) = 1 - exp(-y r_b^2) with r_b = r/b0.
pub fn jastrow_f(y: CorrelationParams, r_b: f64) -> Result<f64> {
    if !(r_b.is_finite() && r_b >= 0.0) {
        return Err(Error::RejectedInput(format!(
            "r/b0 must be nonnegative, got {r_b}"
        )));
    }
    if y.is_ho() {
        return Ok(if r_b == 0.0 { 0.0 } else { 1.0 });
    }
    Ok(-(-y.value() * r_b * r_b).exp_m1())
}

/// Quadrature and truncation parameters of the correlated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Radial grids extend to `r_max_mult * b0`.
    pub r_max_mult: f64,
    /// Number of equal-width radial panels.
    pub panels: usize,
    /// Gauss-Legendre nodes per radial panel.
    pub nodes_per_panel: usize,
    /// Initial Legendre truncation of the density-matrix expansion.
    pub l_max: usize,
    /// Hard cap for the adaptive escalation of the truncation order.
    pub l_max_cap: usize,
    /// Relative tolerance for normalization-stability diagnostics.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            r_max_mult: 12.0,
            panels: 24,
            nodes_per_panel: 12,
            l_max: 8,
            l_max_cap: 48,
            tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.r_max_mult < 6.0
            || self.panels == 0
            || self.nodes_per_panel < 2
            || self.l_max < 2
            || self.l_max_cap < self.l_max
            || !(self.tol > 0.0)
        {
            return Err(Error::RejectedInput(format!(
                "invalid quadrature spec: {self:?}"
            )));
        }
        Ok(())
    }

    /// Same spec with doubled radial node counts (refinement oracle).
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_panel: self.nodes_per_panel * 2,
            ..*self
        }
    }

    /// Largest dimensionless wavenumber k b0 the radial sampling resolves
    /// in the double spherical-Bessel transform. Beyond it the two-body
    /// momentum correction is treated as zero (the genuine content there is
    /// below 1e-14 for the correlation strengths handled here).
    pub fn resolved_kb(&self) -> f64 {
        2.0 * (self.nodes_per_panel as f64 - 2.0) * self.panels as f64 / self.r_max_mult
    }
}

/// Coefficients of P_2(u) P_l(u) = alpha P_{l+2} + beta P_l + gamma P_{l-2}.
fn p2_product_coeffs(l: usize) -> (f64, f64, f64) {
    let lf = l as f64;
    let alpha = 3.0 * (lf + 1.0) * (lf + 2.0) / (2.0 * (2.0 * lf + 1.0) * (2.0 * lf + 3.0));
    let beta = if l == 0 {
        0.0
    } else {
        lf * (lf + 1.0) / ((2.0 * lf - 1.0) * (2.0 * lf + 3.0))
    };
    let gamma = if l < 2 {
        0.0
    } else {
        3.0 * lf * (lf - 1.0) / (2.0 * (2.0 * lf + 1.0) * (2.0 * lf - 1.0))
    };
    (alpha, beta, gamma)
}

/// Radial Gauss-Legendre grid (dimensionless, b0 = 1).
#[derive(Debug, Clone)]
struct Grid {
    xs: Vec<f64>,
    /// w_i x_i^2, the measure of radial integrals.
    wx2: Vec<f64>,
}

impl Grid {
    fn build(spec: &QuadratureSpec) -> Self {
        let rule =
            CompositeRule::uniform_panels(0.0, spec.r_max_mult, spec.panels, spec.nodes_per_panel);
        let wx2 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * x * x)
            .collect();
        Self {
            xs: rule.nodes,
            wx2,
        }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }
}

/// Occupied orbitals with their weights and node values; provides the
/// Legendre coefficients c0_l of the A-normalized Slater density matrix,
/// `rho0(a, b, u) = sum_l c0_l(a, b) P_l(u)`.
#[derive(Debug, Clone)]
struct SlaterCoeffs {
    /// (shell, capacity * eta, R_nl at the grid nodes)
    orbitals: Vec<(Shell, f64, Vec<f64>)>,
    /// Orbital angular momenta present, sorted and deduplicated.
    l_values: Vec<usize>,
}

impl SlaterCoeffs {
    fn build(nuclide: &Nuclide, grid: &Grid) -> Self {
        let orbitals: Vec<(Shell, f64, Vec<f64>)> = nuclide
            .occupied_shells()
            .map(|(shell, eta)| {
                let weight = shell.capacity() as f64 * eta;
                let values = grid.xs.iter().map(|&x| radial_unit(shell, x)).collect();
                (shell, weight, values)
            })
            .collect();
        let mut l_values: Vec<usize> = orbitals.iter().map(|(s, _, _)| s.l() as usize).collect();
        l_values.sort_unstable();
        l_values.dedup();
        Self { orbitals, l_values }
    }

    /// c0_l between a grid node `j` and an arbitrary point `a`.
    fn coeff_node(&self, l: usize, a: f64, j: usize) -> f64 {
        let mut sum = 0.0;
        for (shell, w, r) in &self.orbitals {
            if shell.l() as usize == l {
                sum += w * radial_unit(*shell, a) * r[j];
            }
        }
        sum / FOUR_PI
    }

    /// c0_l between two grid nodes.
    fn coeff_nodes(&self, l: usize, i: usize, j: usize) -> f64 {
        let mut sum = 0.0;
        for (shell, w, r) in &self.orbitals {
            if shell.l() as usize == l {
                sum += w * r[i] * r[j];
            }
        }
        sum / FOUR_PI
    }

    /// c0_l between two arbitrary points.
    fn coeff_at(&self, l: usize, a: f64, b: f64) -> f64 {
        let mut sum = 0.0;
        for (shell, w, _) in &self.orbitals {
            if shell.l() as usize == l {
                sum += w * radial_unit(*shell, a) * radial_unit(*shell, b);
            }
        }
        sum / FOUR_PI
    }
}

/// Legendre coefficients of `rho0(a,b,u)^2` (degree <= 4), from the c0_mu
/// via Legendre product linearization.
fn rho0_squared_coeffs(c0: &[f64; 3]) -> [f64; 5] {
    let [c0s, c1s, c2s] = *c0;
    [
        c0s * c0s + c1s * c1s / 3.0 + c2s * c2s / 5.0,
        2.0 * c0s * c1s + 0.8 * c1s * c2s,
        2.0 * c0s * c2s + 2.0 / 3.0 * c1s * c1s + 2.0 / 7.0 * c2s * c2s,
        1.2 * c1s * c2s,
        18.0 / 35.0 * c2s * c2s,
    ]
}

/// Exponentially scaled bond ladder between two radii:
/// `damp[l] = e^{-y (a-b)^2} e^{-z} i_l(z)` at z = 2 y a b.
struct BondLadder {
    damp: Vec<f64>,
    zero: bool,
}

impl BondLadder {
    fn new(l_top: usize, y: f64, a: f64, b: f64, buf: &mut Vec<f64>) -> Self {
        let e = (-y * (a - b) * (a - b)).exp();
        if e < BOND_CUTOFF {
            return Self {
                damp: Vec::new(),
                zero: true,
            };
        }
        let z = 2.0 * y * a * b;
        scaled_mod_spherical_in_all(l_top, z, buf);
        Self {
            damp: buf.iter().map(|v| v * e).collect(),
            zero: false,
        }
    }

    /// Direct bond coefficient A_l(a,b) of f(d): delta_l0 - (2l+1) damp_l.
    fn a_coeff(&self, l: usize) -> f64 {
        let delta = if l == 0 { 1.0 } else { 0.0 };
        if self.zero {
            return delta;
        }
        delta - (2.0 * l as f64 + 1.0) * self.damp[l]
    }

    /// Legendre-l coefficient of `e^{-y d^2} P_mu(u)` for mu = 0, 1, 2.
    /// The ladder must extend to l + 2.
    fn damp_coeff(&self, mu: usize, l: usize) -> f64 {
        if self.zero {
            return 0.0;
        }
        let lf = l as f64;
        match mu {
            0 => (2.0 * lf + 1.0) * self.damp[l],
            1 => {
                let up = (lf + 1.0) * self.damp[l + 1];
                let down = if l >= 1 { lf * self.damp[l - 1] } else { 0.0 };
                up + down
            }
            2 => {
                let (alpha, beta, gamma) = p2_product_coeffs(l);
                let mut v = alpha * self.damp[l + 2] + beta * self.damp[l];
                if l >= 2 {
                    v += gamma * self.damp[l - 2];
                }
                (2.0 * lf + 1.0) * v
            }
            _ => unreachable!("slater angular momenta are at most 2"),
        }
    }

    /// Exchange bond coefficient B_l(a,b) of f(d) rho0(a,b,u), where
    /// c0 holds the Slater coefficients c0_mu(a,b) for mu = 0, 1, 2.
    fn b_coeff(&self, l: usize, c0: &[f64; 3]) -> f64 {
        let mut v = if l <= 2 { c0[l] } else { 0.0 };
        if self.zero {
            return v;
        }
        for (mu, &c) in c0.iter().enumerate() {
            if c != 0.0 {
                v -= c * self.damp_coeff(mu, l);
            }
        }
        v
    }
}

/// Dense (row-major, symmetric) Legendre-coefficient table.
type Table = Vec<f64>;

/// Dimensionless correlated kernel for one (nuclide, y, spec).
#[derive(Debug)]
struct Kernel {
    y: f64,
    grid: Grid,
    slater: SlaterCoeffs,
    /// A-normalized uncorrelated diagonal density at the nodes.
    rho0_diag: Vec<f64>,
    /// A-normalized correlated diagonal (before N0) at the nodes.
    rho_un_diag: Vec<f64>,
    /// N0 = A / (4 pi int rho_un x^2 dx).
    n0: f64,
    /// <r^2>/b0^2 with N0 applied.
    r_b2: f64,
    /// Legendre coefficients of the two-body correction to the density
    /// matrix (before N0), delta_c[l][i*n + j], l = 0..=l_used+2.
    delta_c: Vec<Table>,
    /// Bond-table truncation order actually used.
    l_used: usize,
    /// Achieved max diagonal residual of the truncated expansion.
    diag_residual: f64,
}

impl Kernel {
    fn build(nuclide: &Nuclide, y: f64, spec: &QuadratureSpec) -> Result<Self> {
        let grid = Grid::build(spec);
        let slater = SlaterCoeffs::build(nuclide, &grid);
        let a = nuclide.mass_number() as f64;

        let rho0_diag: Vec<f64> = grid
            .xs
            .iter()
            .map(|&x| hobasis::density_unit_a(nuclide, x))
            .collect();

        // Exact diagonal of the two-body correction: no Legendre expansion.
        let rho_un_diag: Vec<f64> = grid
            .xs
            .par_iter()
            .enumerate()
            .map(|(i, &x)| rho0_diag[i] + diagonal_correction(&grid, &slater, &rho0_diag, y, x))
            .collect();

        let norm: f64 = FOUR_PI
            * grid
                .wx2
                .iter()
                .zip(&rho_un_diag)
                .map(|(&w, &v)| w * v)
                .sum::<f64>();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::QuadratureNonConvergence {
                achieved: f64::NAN,
                required: spec.tol,
                context: format!("normalization integral returned {norm}"),
            });
        }

        // Stability diagnostic: same normalization on a staggered, denser grid.
        let check_spec = QuadratureSpec {
            nodes_per_panel: spec.nodes_per_panel + 5,
            ..*spec
        };
        let check_grid = Grid::build(&check_spec);
        let check_slater = SlaterCoeffs::build(nuclide, &check_grid);
        let check_rho0: Vec<f64> = check_grid
            .xs
            .iter()
            .map(|&x| hobasis::density_unit_a(nuclide, x))
            .collect();
        let norm_check: f64 = FOUR_PI
            * check_grid
                .xs
                .par_iter()
                .enumerate()
                .map(|(i, &x)| {
                    check_grid.wx2[i]
                        * (check_rho0[i]
                            + diagonal_correction(&check_grid, &check_slater, &check_rho0, y, x))
                })
                .sum::<f64>();
        let norm_dev = (norm - norm_check).abs() / a;
        if norm_dev > spec.tol {
            return Err(Error::QuadratureNonConvergence {
                achieved: norm_dev,
                required: spec.tol,
                context: "normalization unstable under radial refinement".into(),
            });
        }

        let n0 = a / norm;
        let r_b2 = n0 / a
            * FOUR_PI
            * grid
                .xs
                .iter()
                .enumerate()
                .map(|(i, &x)| grid.wx2[i] * x * x * rho_un_diag[i])
                .sum::<f64>();

        // Adaptive Legendre truncation: escalate until the expansion
        // reproduces the exact diagonal (or the cap is reached).
        let n = grid.len();
        let peak = rho_un_diag.iter().cloned().fold(0.0_f64, f64::max);
        let target = 3e-9 * peak.max(1.0);
        let mut l_used = spec.l_max.max(2 * nuclide.l_max());
        let (delta_c, diag_residual) = loop {
            let tables = build_delta_c(&grid, &slater, &rho0_diag, y, l_used);
            let mut resid = 0.0_f64;
            for i in 0..n {
                let series: f64 = tables.iter().map(|t| t[i * n + i]).sum();
                let exact = rho_un_diag[i] - rho0_diag[i];
                resid = resid.max((series - exact).abs());
            }
            if resid <= target || l_used >= spec.l_max_cap {
                break (tables, resid);
            }
            l_used = (l_used + 8).min(spec.l_max_cap);
        };

        Ok(Self {
            y,
            grid,
            slater,
            rho0_diag,
            rho_un_diag,
            n0,
            r_b2,
            delta_c,
            l_used,
            diag_residual,
        })
    }

    fn check_truncation(&self) -> Result<()> {
        let peak = self.rho_un_diag.iter().cloned().fold(0.0_f64, f64::max);
        if self.diag_residual > 1e-6 * peak.max(1.0) {
            return Err(Error::LegendreTruncation {
                l_max: self.l_used,
                residual: self.diag_residual,
            });
        }
        Ok(())
    }

    /// A-normalized correlated diagonal (before N0) at arbitrary x.
    fn diag_density_at(&self, nuclide: &Nuclide, x: f64) -> f64 {
        hobasis::density_unit_a(nuclide, x)
            + diagonal_correction(&self.grid, &self.slater, &self.rho0_diag, self.y, x)
    }

    /// Two-body correction to n(k) at dimensionless kb (before N0/A).
    fn momentum_correction(&self, kb: f64) -> f64 {
        let n = self.grid.len();
        let l_top = self.delta_c.len() - 1;
        let mut jl = Vec::new();
        // v[l][i] = w_i x_i^2 j_l(kb x_i)
        let mut v = vec![0.0; (l_top + 1) * n];
        for i in 0..n {
            spherical_jn_all(l_top, kb * self.grid.xs[i], &mut jl);
            for l in 0..=l_top {
                v[l * n + i] = self.grid.wx2[i] * jl[l];
            }
        }
        let mut sum = 0.0;
        for (l, table) in self.delta_c.iter().enumerate() {
            let vl = &v[l * n..(l + 1) * n];
            let mut bilinear = 0.0;
            for i in 0..n {
                let wi = vl[i];
                let row = &table[i * n..(i + 1) * n];
                let inner: f64 = row.iter().zip(vl).map(|(&c, &w)| c * w).sum();
                bilinear += wi * inner;
            }
            sum += bilinear;
        }
        2.0 / std::f64::consts::PI * sum
    }

    /// Two-body correction to F(q) at dimensionless qb:
    /// 4 pi int j0(qb x) (rho_un - rho0) x^2 dx.
    fn form_factor_correction(&self, qb: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.len() {
            let arg = qb * self.grid.xs[i];
            let j0 = if arg < 1e-12 { 1.0 } else { arg.sin() / arg };
            sum += self.grid.wx2[i] * j0 * (self.rho_un_diag[i] - self.rho0_diag[i]);
        }
        FOUR_PI * sum
    }

    /// Legendre-expanded two-body correction at arbitrary off-diagonal
    /// arguments (before N0/A).
    fn offdiag_correction(&self, x1: f64, x1p: f64, cos_omega: f64) -> f64 {
        let n = self.grid.len();
        let l_top = self.l_used + 2;
        let mut ibuf = Vec::new();
        let mut g = vec![0.0; self.l_used + 1];
        let mut h = vec![0.0; self.l_used + 1];
        for m in 0..n {
            let xm = self.grid.xs[m];
            let lad1 = BondLadder::new(l_top, self.y, x1, xm, &mut ibuf);
            let lad2 = BondLadder::new(l_top, self.y, x1p, xm, &mut ibuf);
            let w = self.grid.wx2[m];
            let wr = w * self.rho0_diag[m];
            let c1 = [
                self.slater.coeff_node(0, x1, m),
                self.slater.coeff_node(1, x1, m),
                self.slater.coeff_node(2, x1, m),
            ];
            let c2 = [
                self.slater.coeff_node(0, x1p, m),
                self.slater.coeff_node(1, x1p, m),
                self.slater.coeff_node(2, x1p, m),
            ];
            for l in 0..=self.l_used {
                let delta = if l == 0 { 1.0 } else { 0.0 };
                g[l] += wr * (lad1.a_coeff(l) * lad2.a_coeff(l) - delta);
                let c0l = if l <= 2 { c1[l] * c2[l] } else { 0.0 };
                h[l] += w * (lad1.b_coeff(l, &c1) * lad2.b_coeff(l, &c2) - c0l);
            }
        }
        let mut pl = Vec::new();
        legendre_all(self.l_used, cos_omega, &mut pl);
        let mut g_dir = 0.0;
        let mut g_exch = 0.0;
        for l in 0..=self.l_used {
            let factor = FOUR_PI / (2.0 * l as f64 + 1.0) * pl[l];
            g_dir += factor * g[l];
            g_exch += factor * h[l];
        }
        // rho0(x1, x1p, cos_omega), A-normalized
        let mut rho0 = 0.0;
        for &l in &self.slater.l_values {
            rho0 += self.slater.coeff_at(l, x1, x1p) * pl[l];
        }
        rho0 * g_dir - 0.25 * g_exch
    }
}

/// Exact diagonal two-body correction at point x (A-normalized, before N0):
/// `rho0(x) G_dir(x) - 1/4 G_exch(x)` with all angular integrals analytic.
fn diagonal_correction(
    grid: &Grid,
    slater: &SlaterCoeffs,
    rho0_diag: &[f64],
    y: f64,
    x: f64,
) -> f64 {
    let mut i1 = Vec::new();
    let mut i2 = Vec::new();
    let mut dir = 0.0;
    let mut exch = 0.0;
    for m in 0..grid.len() {
        let xm = grid.xs[m];
        let d = x - xm;
        let e1 = (-y * d * d).exp();
        let e2 = e1 * e1;
        if e1 < BOND_CUTOFF {
            continue;
        }
        // f^2 - 1 = -2 e^{-y d^2} + e^{-2y d^2}
        scaled_mod_spherical_in_all(4, 2.0 * y * x * xm, &mut i1);
        scaled_mod_spherical_in_all(4, 4.0 * y * x * xm, &mut i2);
        let w = grid.wx2[m];
        // direct: int dOmega (f^2 - 1) = 4 pi (-2 e1 i0(z1) + e2 i0(z2))
        dir += w * rho0_diag[m] * FOUR_PI * (-2.0 * e1 * i1[0] + e2 * i2[0]);
        // exchange: rho0(x, xm, u)^2 expanded to degree 4
        let c0 = [
            slater.coeff_node(0, x, m),
            slater.coeff_node(1, x, m),
            slater.coeff_node(2, x, m),
        ];
        let e = rho0_squared_coeffs(&c0);
        let mut psi = 0.0;
        for (l, &el) in e.iter().enumerate() {
            if el != 0.0 {
                psi += el * (-2.0 * e1 * i1[l] + e2 * i2[l]);
            }
        }
        exch += w * FOUR_PI * psi;
    }
    let rho0_x = {
        let mut s = 0.0;
        for (shell, w, _) in &slater.orbitals {
            let r = radial_unit(*shell, x);
            s += w * r * r;
        }
        s / FOUR_PI
    };
    rho0_x * dir - 0.25 * exch
}

/// Build the Legendre tables of the two-body correction to the density
/// matrix, delta_c[l][i*n+j] for l = 0..=l_used+2 (before N0).
fn build_delta_c(
    grid: &Grid,
    slater: &SlaterCoeffs,
    rho0_diag: &[f64],
    y: f64,
    l_used: usize,
) -> Vec<Table> {
    let n = grid.len();
    let l_top = l_used + 2;

    // Bond tables A_l(i,m), B_l(i,m), and Slater tables c0_l(i,m).
    let mut a_tab = vec![0.0; (l_used + 1) * n * n];
    let mut b_tab = vec![0.0; (l_used + 1) * n * n];
    let mut c_tab = vec![0.0; 3 * n * n];
    {
        let rows: Vec<(usize, Vec<f64>, Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut ibuf = Vec::new();
                let mut arow = vec![0.0; (l_used + 1) * n];
                let mut brow = vec![0.0; (l_used + 1) * n];
                let mut crow = vec![0.0; 3 * n];
                for m in 0..n {
                    let lad = BondLadder::new(l_top, y, grid.xs[i], grid.xs[m], &mut ibuf);
                    let c0 = [
                        slater.coeff_nodes(0, i, m),
                        slater.coeff_nodes(1, i, m),
                        slater.coeff_nodes(2, i, m),
                    ];
                    for (mu, &c) in c0.iter().enumerate() {
                        crow[mu * n + m] = c;
                    }
                    for l in 0..=l_used {
                        arow[l * n + m] = lad.a_coeff(l);
                        brow[l * n + m] = lad.b_coeff(l, &c0);
                    }
                }
                (i, arow, brow, crow)
            })
            .collect();
        for (i, arow, brow, crow) in rows {
            for l in 0..=l_used {
                a_tab[(l * n + i) * n..(l * n + i + 1) * n]
                    .copy_from_slice(&arow[l * n..(l + 1) * n]);
                b_tab[(l * n + i) * n..(l * n + i + 1) * n]
                    .copy_from_slice(&brow[l * n..(l + 1) * n]);
            }
            for mu in 0..3 {
                c_tab[(mu * n + i) * n..(mu * n + i + 1) * n]
                    .copy_from_slice(&crow[mu * n..(mu + 1) * n]);
            }
        }
    }

    // g_l(i,j) = sum_m w_m rho0(m) [A_l(i,m) A_l(j,m) - delta_l0]
    // h_l(i,j) = sum_m w_m [B_l(i,m) B_l(j,m) - c0_l(i,m) c0_l(m,j)]
    let wdir: Vec<f64> = grid
        .wx2
        .iter()
        .zip(rho0_diag)
        .map(|(&w, &r)| w * r)
        .collect();
    let wdir_total: f64 = wdir.iter().sum();

    let mut delta: Vec<Table> = vec![vec![0.0; n * n]; l_top + 1];

    for l in 0..=l_used {
        let a_l = &a_tab[l * n * n..(l + 1) * n * n];
        let b_l = &b_tab[l * n * n..(l + 1) * n * n];
        let c_l = if l <= 2 {
            Some(&c_tab[l * n * n..(l + 1) * n * n])
        } else {
            None
        };
        // assemble g_l and h_l rows in parallel
        let gh: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let arow_i = &a_l[i * n..(i + 1) * n];
                let brow_i = &b_l[i * n..(i + 1) * n];
                let mut grow = vec![0.0; n];
                let mut hrow = vec![0.0; n];
                for j in i..n {
                    let arow_j = &a_l[j * n..(j + 1) * n];
                    let brow_j = &b_l[j * n..(j + 1) * n];
                    let mut gv = 0.0;
                    let mut hv = 0.0;
                    for m in 0..n {
                        gv += wdir[m] * arow_i[m] * arow_j[m];
                        hv += grid.wx2[m] * brow_i[m] * brow_j[m];
                    }
                    if l == 0 {
                        gv -= wdir_total;
                    }
                    if let Some(c_l) = c_l {
                        let crow_i = &c_l[i * n..(i + 1) * n];
                        let crow_j = &c_l[j * n..(j + 1) * n];
                        for m in 0..n {
                            hv -= grid.wx2[m] * crow_i[m] * crow_j[m];
                        }
                    }
                    grow[j] = gv;
                    hrow[j] = hv;
                }
                (i, grow, hrow)
            })
            .collect();

        // scatter the exchange part and the mu x l direct products into delta_c
        let lf = l as f64;
        let factor = FOUR_PI / (2.0 * lf + 1.0);
        let (alpha, beta, gamma) = p2_product_coeffs(l);
        for (i, grow, hrow) in gh {
            for j in i..n {
                let g = grow[j] * factor;
                let h = hrow[j] * factor;
                let c0 = [
                    c_tab[i * n + j],
                    c_tab[(n + i) * n + j],
                    c_tab[(2 * n + i) * n + j],
                ];
                let mut add = |l_target: usize, v: f64| {
                    delta[l_target][i * n + j] += v;
                    if i != j {
                        delta[l_target][j * n + i] += v;
                    }
                };
                // exchange: pure P_l
                add(l, -0.25 * h);
                // direct: c0_mu(i,j) P_mu x g_l P_l
                if c0[0] != 0.0 {
                    add(l, c0[0] * g);
                }
                if c0[1] != 0.0 {
                    add(l + 1, c0[1] * g * (lf + 1.0) / (2.0 * lf + 1.0));
                    if l >= 1 {
                        add(l - 1, c0[1] * g * lf / (2.0 * lf + 1.0));
                    }
                }
                if c0[2] != 0.0 {
                    add(l + 2, c0[2] * g * alpha);
                    add(l, c0[2] * g * beta);
                    if l >= 2 {
                        add(l - 2, c0[2] * g * gamma);
                    }
                }
            }
        }
    }
    delta
}

/// Correlated one-body density-matrix model for one (nuclide, b0, y).
///
/// Construction performs all quadrature; a built model is immutable, cheap
/// to clone, and safe to evaluate concurrently.
#[derive(Debug, Clone)]
pub struct CorrelatedModel {
    nuclide: Nuclide,
    b0: f64,
    y: CorrelationParams,
    spec: QuadratureSpec,
    kernel: Option<Arc<Kernel>>,
}

impl CorrelatedModel {
    /// Build a model. For finite y this computes the two-body cluster tables
    /// and the normalization factor; the HO sentinel routes every quantity
    /// to the closed forms of [`crate::hobasis`].
    pub fn new(
        nuclide: &Nuclide,
        b0: f64,
        y: CorrelationParams,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::RejectedInput(format!(
                "oscillator length must be positive, got {b0}"
            )));
        }
        let kernel = if y.is_ho() {
            None
        } else {
            Some(Arc::new(Kernel::build(nuclide, y.value(), spec)?))
        };
        Ok(Self {
            nuclide: nuclide.clone(),
            b0,
            y,
            spec: *spec,
            kernel,
        })
    }

    /// The same dimensionless kernel attached to a different oscillator
    /// length; no quadrature is repeated.
    pub fn with_b0(&self, b0: f64) -> Result<Self> {
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::RejectedInput(format!(
                "oscillator length must be positive, got {b0}"
            )));
        }
        let mut m = self.clone();
        m.b0 = b0;
        Ok(m)
    }

    pub fn nuclide(&self) -> &Nuclide {
        &self.nuclide
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn correlation(&self) -> CorrelationParams {
        self.y
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Normalization factor N0 of the two-body-truncated density.
    pub fn normalization_factor(&self) -> f64 {
        self.kernel.as_ref().map_or(1.0, |k| k.n0)
    }

    /// Legendre truncation order actually in use.
    pub fn legendre_order(&self) -> usize {
        self.kernel
            .as_ref()
            .map_or(2 * self.nuclide.l_max(), |k| k.l_used)
    }

    /// Achieved diagonal residual of the truncated expansion (0 in the HO
    /// limit, where the expansion terminates).
    pub fn truncation_residual(&self) -> f64 {
        self.kernel.as_ref().map_or(0.0, |k| k.diag_residual)
    }

    /// One-body density rho(r) in fm^-3, normalized to unity.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::RejectedInput(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        match &self.kernel {
            None => hobasis::ho_density(&self.nuclide, self.b0, r),
            Some(k) => {
                let a = self.nuclide.mass_number() as f64;
                Ok(k.n0 / a * k.diag_density_at(&self.nuclide, r / self.b0) / self.b0.powi(3))
            }
        }
    }

    /// Momentum distribution n(k) in fm^3, normalized to unity.
    pub fn momentum_distribution(&self, k: f64) -> Result<f64> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::RejectedInput(format!(
                "wavenumber must be nonnegative, got {k}"
            )));
        }
        match &self.kernel {
            None => hobasis::ho_momentum_density(&self.nuclide, self.b0, k),
            Some(kern) => {
                kern.check_truncation()?;
                let kb = k * self.b0;
                let a = self.nuclide.mass_number() as f64;
                let one_body = hobasis::density_unit_a(&self.nuclide, kb);
                // beyond the resolved window the transform is pure
                // quadrature aliasing while the genuine correction is dead
                let two_body = if kb <= self.spec.resolved_kb() {
                    kern.momentum_correction(kb)
                } else {
                    0.0
                };
                Ok(self.b0.powi(3) * kern.n0 / a * (one_body + two_body))
            }
        }
    }

    /// Elastic point form factor F(q), with F(0) = 1.
    pub fn form_factor(&self, q: f64) -> Result<f64> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::RejectedInput(format!(
                "momentum transfer must be nonnegative, got {q}"
            )));
        }
        match &self.kernel {
            None => hobasis::ho_form_factor(&self.nuclide, self.b0, q),
            Some(k) => {
                let qb = q * self.b0;
                let a = self.nuclide.mass_number() as f64;
                let one_body = a * hobasis::ho_form_factor(&self.nuclide, 1.0, qb)?;
                let two_body = k.form_factor_correction(qb);
                Ok(k.n0 / a * (one_body + two_body))
            }
        }
    }

    /// Dimensionless mean-square radius <r^2>/b0^2 = R1 + R2(y).
    pub fn mean_square_radius(&self) -> f64 {
        match &self.kernel {
            None => crate::nuclide::r1_moment(&self.nuclide),
            Some(k) => k.r_b2,
        }
    }

    /// One-body density matrix rho(r1, r1') in fm^-3 for |r1| = r1,
    /// |r1'| = r1p and cos of the angle between them.
    pub fn density_matrix(&self, r1: f64, r1p: f64, cos_omega: f64) -> Result<f64> {
        if !(r1.is_finite() && r1 >= 0.0 && r1p.is_finite() && r1p >= 0.0) {
            return Err(Error::RejectedInput(format!(
                "radii must be nonnegative, got ({r1}, {r1p})"
            )));
        }
        if !(-1.0..=1.0).contains(&cos_omega) {
            return Err(Error::RejectedInput(format!(
                "cos(omega) must lie in [-1, 1], got {cos_omega}"
            )));
        }
        let a = self.nuclide.mass_number() as f64;
        let (x1, x1p) = (r1 / self.b0, r1p / self.b0);
        let rho0 = self.slater_matrix_unit(x1, x1p, cos_omega);
        let value = match &self.kernel {
            None => rho0,
            Some(k) => rho0 + k.offdiag_correction(x1, x1p, cos_omega),
        };
        Ok(self.normalization_factor() / a * value / self.b0.powi(3))
    }

    /// A-normalized Slater density matrix at b0 = 1.
    fn slater_matrix_unit(&self, x1: f64, x1p: f64, cos_omega: f64) -> f64 {
        let mut pl = Vec::new();
        legendre_all(self.nuclide.l_max(), cos_omega, &mut pl);
        let mut sum = 0.0;
        for (shell, eta) in self.nuclide.occupied_shells() {
            sum += shell.capacity() as f64
                * eta
                * radial_unit(shell, x1)
                * radial_unit(shell, x1p)
                * pl[shell.l() as usize];
        }
        sum / FOUR_PI
    }

    /// Density evaluator closure for integrators.
    pub fn density_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |r| self.density(r).unwrap_or(f64::NAN)
    }

    /// Momentum evaluator closure for integrators.
    pub fn momentum_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |k| self.momentum_distribution(k).unwrap_or(f64::NAN)
    }
}

/// Which profile to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Density,
    Momentum,
    FormFactor,
}

impl ProfileKind {
    fn label(&self) -> &'static str {
        match self {
            ProfileKind::Density => "density",
            ProfileKind::Momentum => "momentum",
            ProfileKind::FormFactor => "form-factor",
        }
    }
}

/// Write a two-column profile (abscissa, value) with the grid parameters
/// echoed in a header comment line.
pub fn export_profile(
    model: &CorrelatedModel,
    kind: ProfileKind,
    grid: &[f64],
    out: &mut impl Write,
) -> Result<()> {
    writeln!(
        out,
        "# {} profile: nuclide={} b0={:.6} y={} l_max={} r_max_mult={} panels={} nodes_per_panel={}",
        kind.label(),
        model.nuclide().name(),
        model.b0(),
        model.correlation(),
        model.legendre_order(),
        model.spec().r_max_mult,
        model.spec().panels,
        model.spec().nodes_per_panel,
    )?;
    for &x in grid {
        let v = match kind {
            ProfileKind::Density => model.density(x)?,
            ProfileKind::Momentum => model.momentum_distribution(x)?,
            ProfileKind::FormFactor => model.form_factor(x)?,
        };
        writeln!(out, "{x:.6e} {v:.10e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuclide::builtin_nuclide;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn jastrow_limits() {
        let y = CorrelationParams::new(3.7857).unwrap();
        assert_eq!(jastrow_f(y, 0.0).unwrap(), 0.0);
        let y1 = CorrelationParams::new(1.0).unwrap();
        assert_relative_eq!(
            jastrow_f(y1, 1.0).unwrap(),
            1.0 - (-1.0_f64).exp(),
            epsilon = 1e-12
        );
        let strong = CorrelationParams::new(1e6).unwrap();
        assert!((jastrow_f(strong, 0.5).unwrap() - 1.0).abs() < 1e-10);
        assert!(jastrow_f(y, -0.1).is_err());
        assert!(CorrelationParams::new(0.0).is_err());
        assert!(CorrelationParams::new(-2.0).is_err());
    }

    #[test]
    fn jastrow_monotone() {
        let y = CorrelationParams::new(2.5).unwrap();
        let mut prev = -1.0;
        let mut r = 0.0;
        while r <= 5.0 {
            let f = jastrow_f(y, r).unwrap();
            assert!((0.0..1.0).contains(&f) || (f - 1.0).abs() < 1e-15);
            assert!(f >= prev);
            prev = f;
            r += 0.05;
        }
    }

    /// He4 has a single Gaussian orbital, so the whole two-body correction
    /// is closed-form:
    ///   rho_un(x) = rho0(x) (1 + 3 B(x, y)),
    ///   B = -2 (1+y)^{-3/2} e^{-y x^2/(1+y)} + (1+2y)^{-3/2} e^{-2y x^2/(1+2y)}
    fn he4_unnorm_diag(x: f64, y: f64) -> f64 {
        let rho0 = 4.0 / std::f64::consts::PI.powf(1.5) * (-x * x).exp();
        let b = -2.0 * (1.0 + y).powf(-1.5) * (-y * x * x / (1.0 + y)).exp()
            + (1.0 + 2.0 * y).powf(-1.5) * (-2.0 * y * x * x / (1.0 + 2.0 * y)).exp();
        rho0 * (1.0 + 3.0 * b)
    }

    fn he4_norm_integral(y: f64) -> f64 {
        // 4 pi int rho_un x^2 dx = A + 3 * 4 * [-2(1+2y)^{-3/2} + (1+4y)^{-3/2}]
        4.0 + 12.0 * (-2.0 * (1.0 + 2.0 * y).powf(-1.5) + (1.0 + 4.0 * y).powf(-1.5))
    }

    fn he4_r2_integral(y: f64) -> f64 {
        // 4 pi int rho_un x^4 dx
        6.0 + 12.0
            * (-3.0 * (1.0 + y) * (1.0 + 2.0 * y).powf(-2.5)
                + 1.5 * (1.0 + 2.0 * y) * (1.0 + 4.0 * y).powf(-2.5))
    }

    #[test]
    fn he4_diagonal_matches_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        let y = 3.7857;
        let m = CorrelatedModel::new(&he4, 1.0, CorrelationParams::new(y).unwrap(), &spec())
            .unwrap();
        let n0 = 4.0 / he4_norm_integral(y);
        for &x in &[0.0, 0.3, 0.8, 1.5, 2.4, 4.0] {
            let expected = n0 / 4.0 * he4_unnorm_diag(x, y);
            assert_relative_eq!(m.density(x).unwrap(), expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn he4_normalization_factor_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        for &y in &[3.7857, 8.0, 1.5] {
            let m = CorrelatedModel::new(&he4, 1.3, CorrelationParams::new(y).unwrap(), &spec())
                .unwrap();
            assert_relative_eq!(
                m.normalization_factor(),
                4.0 / he4_norm_integral(y),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn he4_radius_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        let y = 3.7857;
        let m =
            CorrelatedModel::new(&he4, 1.25, CorrelationParams::new(y).unwrap(), &spec()).unwrap();
        let expected = he4_r2_integral(y) / he4_norm_integral(y);
        assert_relative_eq!(m.mean_square_radius(), expected, max_relative = 1e-10);
        // reference value: r_b(3.7857) = 1.2872 from the radius power law
        assert!((m.mean_square_radius().sqrt() - 1.2872).abs() < 0.01);
    }

    #[test]
    fn ho_sentinel_matches_hobasis() {
        let o16 = builtin_nuclide("O16").unwrap();
        let m = CorrelatedModel::new(&o16, 1.7554, CorrelationParams::ho_limit(), &spec()).unwrap();
        assert_eq!(m.normalization_factor(), 1.0);
        for &r in &[0.0, 0.9, 2.3, 4.8] {
            assert_relative_eq!(
                m.density(r).unwrap(),
                hobasis::ho_density(&o16, 1.7554, r).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                m.momentum_distribution(r).unwrap(),
                hobasis::ho_momentum_density(&o16, 1.7554, r).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                m.form_factor(r).unwrap(),
                hobasis::ho_form_factor(&o16, 1.7554, r).unwrap(),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(m.mean_square_radius(), 2.25);
    }

    #[test]
    fn huge_y_collapses_to_ho() {
        let c12 = builtin_nuclide("C12").unwrap();
        let m = CorrelatedModel::new(&c12, 1.6, CorrelationParams::new(1e6).unwrap(), &spec())
            .unwrap();
        let peak = hobasis::ho_density(&c12, 1.6, 0.0).unwrap();
        for &r in &[0.0, 0.8, 1.7, 3.2, 5.0] {
            let d = (m.density(r).unwrap() - hobasis::ho_density(&c12, 1.6, r).unwrap()).abs();
            assert!(d < 1e-6 * peak, "r={r}: diff {d:.3e}");
        }
        assert!((m.normalization_factor() - 1.0).abs() < 1e-6);
        assert!((m.mean_square_radius() - 26.0 / 12.0).abs() < 1e-5);
    }

    #[test]
    fn density_normalized_for_reference_rows() {
        // (nuclide, b0, y) from the SRC parameter table
        let rows = [
            ("He4", 1.2497, 3.7857),
            ("C12", 1.5617, 7.1294),
            ("O16", 1.6451, 5.1782),
            ("Ca40", 1.8397, 7.1632),
        ];
        let rule = CompositeRule::uniform_panels(0.0, 12.0, 12, 16);
        for (label, b0, y) in rows {
            let n = builtin_nuclide(label).unwrap();
            let m =
                CorrelatedModel::new(&n, b0, CorrelationParams::new(y).unwrap(), &spec()).unwrap();
            let norm = FOUR_PI
                * rule.integrate(|x| {
                    let r = x * b0;
                    m.density(r).unwrap() * r * r
                })
                * b0;
            assert!((norm - 1.0).abs() < 1e-6, "{label}: norm = {norm}");
        }
    }

    #[test]
    fn n0_stable_under_node_doubling() {
        let o16 = builtin_nuclide("O16").unwrap();
        let y = CorrelationParams::new(5.0).unwrap();
        let coarse = CorrelatedModel::new(&o16, 1.0, y, &spec()).unwrap();
        let fine = CorrelatedModel::new(&o16, 1.0, y, &spec().refined()).unwrap();
        assert!(
            (coarse.normalization_factor() - fine.normalization_factor()).abs() < 1e-6,
            "N0 coarse {} vs fine {}",
            coarse.normalization_factor(),
            fine.normalization_factor()
        );
        assert!((coarse.mean_square_radius() - fine.mean_square_radius()).abs() < 1e-6);
    }

    #[test]
    fn density_matrix_diagonal_consistency() {
        let c12 = builtin_nuclide("C12").unwrap();
        let m = CorrelatedModel::new(&c12, 1.5617, CorrelationParams::new(7.1294).unwrap(), &spec())
            .unwrap();
        for &r in &[0.1, 0.9, 1.8, 3.0, 4.5] {
            let dm = m.density_matrix(r, r, 1.0).unwrap();
            let d = m.density(r).unwrap();
            assert!((dm - d).abs() < 1e-8, "r={r}: {dm} vs {d}");
        }
    }

    #[test]
    fn density_matrix_hermitian() {
        let o16 = builtin_nuclide("O16").unwrap();
        let m = CorrelatedModel::new(&o16, 1.6451, CorrelationParams::new(5.1782).unwrap(), &spec())
            .unwrap();
        for &(r1, r2, u) in &[(0.5, 1.5, 0.3), (2.0, 0.7, -0.8), (1.1, 3.0, 0.95)] {
            let a = m.density_matrix(r1, r2, u).unwrap();
            let b = m.density_matrix(r2, r1, u).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn density_matrix_ho_limit_matches_slater_oracle() {
        // independent oracle: assemble the Slater sum directly
        let c12 = builtin_nuclide("C12").unwrap();
        let b0 = 1.6108;
        let m = CorrelatedModel::new(&c12, b0, CorrelationParams::ho_limit(), &spec()).unwrap();
        for &(r1, r2, u) in &[(0.4, 0.4, 1.0), (1.0, 2.0, 0.5), (2.5, 1.2, -0.6)] {
            let mut oracle = 0.0;
            for (shell, eta) in c12.occupied_shells() {
                let rad1 = hobasis::ho_radial(shell, b0, r1).unwrap();
                let rad2 = hobasis::ho_radial(shell, b0, r2).unwrap();
                let pl = crate::specfun::legendre(shell.l() as usize, u);
                oracle += shell.capacity() as f64 * eta * rad1 * rad2 * pl;
            }
            oracle /= FOUR_PI * c12.mass_number() as f64;
            assert_relative_eq!(
                m.density_matrix(r1, r2, u).unwrap(),
                oracle,
                max_relative = 1e-12
            );
        }
    }

    /// He4 momentum distribution is closed-form (all Gaussians):
    /// n_un(k) = (4/pi^{3/2}) e^{-k^2}
    ///   - (24/pi^{3/2}) (1+3y)^{-3/2} e^{-k^2 (1+2y)/(1+3y)}
    ///   + (12/pi^{3/2}) (1+2y)^{-3/2} (1+4y)^{-3/2} e^{-k^2/(1+2y)}
    /// and n(k) = N0/A * n_un(k). Zeroth moment reproduces the position-space
    /// normalization integral exactly.
    fn he4_momentum_closed_form(k: f64, y: f64) -> f64 {
        let pi32 = std::f64::consts::PI.powf(1.5);
        let n_un = 4.0 / pi32 * (-k * k).exp()
            - 24.0 / pi32
                * (1.0 + 3.0 * y).powf(-1.5)
                * (-k * k * (1.0 + 2.0 * y) / (1.0 + 3.0 * y)).exp()
            + 12.0 / pi32
                * (1.0 + 2.0 * y).powf(-1.5)
                * (1.0 + 4.0 * y).powf(-1.5)
                * (-k * k / (1.0 + 2.0 * y)).exp();
        n_un / he4_norm_integral(y)
    }

    #[test]
    fn he4_momentum_matches_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        for &y in &[2.5, 3.7857, 8.0, 20.0] {
            let m = CorrelatedModel::new(&he4, 1.0, CorrelationParams::new(y).unwrap(), &spec())
                .unwrap();
            let peak = he4_momentum_closed_form(0.0, y);
            let k_top: f64 = (25.0 * (2.0 + 2.0 * y)).sqrt().min(38.0);
            let mut k = 0.0;
            while k <= k_top {
                let got = m.momentum_distribution(k).unwrap();
                let want = he4_momentum_closed_form(k, y);
                assert!(
                    (got - want).abs() < 2e-9 * peak,
                    "y={y} k={k}: got {got:.6e}, want {want:.6e}"
                );
                k += 0.25;
            }
        }
    }

    #[test]
    fn momentum_distribution_normalized() {
        let rows = [("He4", 1.2497, 3.7857), ("O16", 1.6451, 5.1782)];
        let rule = CompositeRule::uniform_panels(0.0, 14.0, 14, 16);
        for (label, b0, y) in rows {
            let n = builtin_nuclide(label).unwrap();
            let m =
                CorrelatedModel::new(&n, b0, CorrelationParams::new(y).unwrap(), &spec()).unwrap();
            let norm = FOUR_PI
                * rule.integrate(|kb| {
                    let k = kb / b0;
                    m.momentum_distribution(k).unwrap() * k * k
                })
                / b0;
            assert!((norm - 1.0).abs() < 1e-6, "{label}: norm = {norm}");
        }
    }

    #[test]
    fn momentum_positive_in_physical_window() {
        let rows = [("He4", 1.2497, 3.7857), ("C12", 1.5617, 7.1294)];
        for (label, b0, y) in rows {
            let n = builtin_nuclide(label).unwrap();
            let m =
                CorrelatedModel::new(&n, b0, CorrelationParams::new(y).unwrap(), &spec()).unwrap();
            let peak = m.momentum_distribution(0.0).unwrap();
            let mut k = 0.0;
            while k <= 6.0 {
                let v = m.momentum_distribution(k).unwrap();
                assert!(v >= -1e-8 * peak, "{label} k={k}: n = {v:.3e}");
                k += 0.1;
            }
        }
    }

    #[test]
    fn form_factor_contracts() {
        let he4 = builtin_nuclide("He4").unwrap();
        let m = CorrelatedModel::new(&he4, 1.2497, CorrelationParams::new(3.7857).unwrap(), &spec())
            .unwrap();
        assert!((m.form_factor(0.0).unwrap() - 1.0).abs() < 1e-8);

        let mho = CorrelatedModel::new(&he4, 1.3335, CorrelationParams::ho_limit(), &spec())
            .unwrap();
        for &q in &[0.0, 1.0, 2.5] {
            assert!(
                (mho.form_factor(q).unwrap()
                    - hobasis::ho_form_factor(&he4, 1.3335, q).unwrap())
                .abs()
                    < 1e-8
            );
        }
    }

    #[test]
    fn c12_src_form_factor_has_two_sign_changes() {
        let c12 = builtin_nuclide("C12").unwrap();
        let m = CorrelatedModel::new(&c12, 1.5617, CorrelationParams::new(7.1294).unwrap(), &spec())
            .unwrap();
        let mut crossings = 0;
        let mut prev = m.form_factor(1e-3).unwrap();
        let mut q = 0.02;
        while q < 4.0 {
            let v = m.form_factor(q).unwrap();
            if prev.signum() != v.signum() {
                crossings += 1;
            }
            prev = v;
            q += 0.02;
        }
        assert!(crossings >= 2, "only {crossings} sign changes");
    }

    #[test]
    fn radius_monotone_in_correlation_strength() {
        for label in crate::nuclide::BUILTIN_LABELS {
            let n = builtin_nuclide(label).unwrap();
            let r4 = CorrelatedModel::new(&n, 1.0, CorrelationParams::new(4.0).unwrap(), &spec())
                .unwrap()
                .mean_square_radius();
            let r8 = CorrelatedModel::new(&n, 1.0, CorrelationParams::new(8.0).unwrap(), &spec())
                .unwrap()
                .mean_square_radius();
            let rinf = CorrelatedModel::new(&n, 1.0, CorrelationParams::ho_limit(), &spec())
                .unwrap()
                .mean_square_radius();
            assert!(
                r4 > r8 && r8 > rinf,
                "{label}: r4={r4}, r8={r8}, rinf={rinf}"
            );
        }
    }

    #[test]
    fn mean_k2_increases_with_correlations() {
        let he4 = builtin_nuclide("He4").unwrap();
        let rule = CompositeRule::uniform_panels(0.0, 16.0, 16, 14);
        let k2 = |y: CorrelationParams| {
            let m = CorrelatedModel::new(&he4, 1.25, y, &spec()).unwrap();
            FOUR_PI
                * rule.integrate(|kb| {
                    let k = kb / 1.25;
                    m.momentum_distribution(k).unwrap() * k.powi(4)
                })
                / 1.25
        };
        let strong = k2(CorrelationParams::new(3.0).unwrap());
        let weak = k2(CorrelationParams::new(8.0).unwrap());
        let none = k2(CorrelationParams::ho_limit());
        assert!(strong.is_finite() && weak.is_finite());
        assert!(strong > weak && weak > none);
    }

    #[test]
    fn with_b0_shares_kernel() {
        let he4 = builtin_nuclide("He4").unwrap();
        let m = CorrelatedModel::new(&he4, 1.0, CorrelationParams::new(4.0).unwrap(), &spec())
            .unwrap();
        let m2 = m.with_b0(2.0).unwrap();
        assert_eq!(m.mean_square_radius(), m2.mean_square_radius());
        // physical density rescales as b0^-3 rho(r/b0)
        let r = 1.4;
        assert_relative_eq!(
            m2.density(2.0 * r).unwrap(),
            m.density(r).unwrap() / 8.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn export_profile_headers() {
        let he4 = builtin_nuclide("He4").unwrap();
        let m = CorrelatedModel::new(&he4, 1.25, CorrelationParams::new(4.0).unwrap(), &spec())
            .unwrap();
        let mut buf = Vec::new();
        export_profile(&m, ProfileKind::Density, &[0.0, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# density profile:"));
        assert!(text.contains("nodes_per_panel=1"));
        assert_eq!(text.lines().count(), 3);
    }
}
