//! Harmonic-oscillator radial orbitals and the closed-form uncorrelated
//! (HO-limit) density, momentum distribution and form factor.
//!
//! All radial functions are normalized as `int R_nl^2(r) r^2 dr = 1`. The
//! momentum distribution uses the Fourier self-duality of HO eigenstates
//! (b0 -> 1/b0), which keeps this module fully closed-form and therefore an
//! independent oracle for the correlated machinery.

use crate::error::{Error, Result};
use crate::nuclide::{Nuclide, Shell};

/// Oscillator length b0 = (hbar / m omega)^(1/2) in fm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HOParams {
    pub b0: f64,
}

impl HOParams {
    pub fn new(b0: f64) -> Result<Self> {
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::RejectedInput(format!(
                "oscillator length must be positive, got {b0}"
            )));
        }
        Ok(Self { b0 })
    }
}

/// Dimensionless radial orbital R_nl(x) at b0 = 1.
///
/// 1s: 2 pi^(-1/4) exp(-x^2/2)
/// 1p: sqrt(8/(3 sqrt(pi))) x exp(-x^2/2)
/// 1d: sqrt(16/(15 sqrt(pi))) x^2 exp(-x^2/2)
/// 2s: sqrt(8/(3 sqrt(pi))) (3/2 - x^2) exp(-x^2/2)
pub fn radial_unit(shell: Shell, x: f64) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let gauss = (-0.5 * x * x).exp();
    match shell {
        Shell::S1 => (4.0 / sqrt_pi).sqrt() * gauss,
        Shell::P1 => (8.0 / (3.0 * sqrt_pi)).sqrt() * x * gauss,
        Shell::D1 => (16.0 / (15.0 * sqrt_pi)).sqrt() * x * x * gauss,
        Shell::S2 => (8.0 / (3.0 * sqrt_pi)).sqrt() * (1.5 - x * x) * gauss,
    }
}

/// Normalized HO radial function R_nl(r; b0) in fm^(-3/2).
pub fn ho_radial(shell: Shell, b0: f64, r: f64) -> Result<f64> {
    if !(b0.is_finite() && b0 > 0.0) {
        return Err(Error::RejectedInput(format!(
            "oscillator length must be positive, got {b0}"
        )));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::RejectedInput(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    Ok(radial_unit(shell, r / b0) / b0.powf(1.5))
}

/// Dimensionless A-normalized HO density at b0 = 1:
/// `rho0(x) = sum_shells capacity * eta * R_nl(x)^2 / (4 pi)`,
/// with `4 pi int rho0 x^2 dx = A`.
pub fn density_unit_a(nuclide: &Nuclide, x: f64) -> f64 {
    let mut sum = 0.0;
    for (shell, eta) in nuclide.occupied_shells() {
        let r = radial_unit(shell, x);
        sum += shell.capacity() as f64 * eta * r * r;
    }
    sum / (4.0 * std::f64::consts::PI)
}

/// HO one-body density rho_HO(r) in fm^(-3), normalized to unity.
pub fn ho_density(nuclide: &Nuclide, b0: f64, r: f64) -> Result<f64> {
    if !(b0.is_finite() && b0 > 0.0) || !(r.is_finite() && r >= 0.0) {
        return Err(Error::RejectedInput(format!(
            "invalid (b0, r) = ({b0}, {r})"
        )));
    }
    Ok(density_unit_a(nuclide, r / b0) / (nuclide.mass_number() as f64 * b0.powi(3)))
}

/// HO momentum distribution n_HO(k) in fm^3, normalized to unity.
///
/// HO eigenstates are Fourier self-dual up to scale, so n_HO is the density
/// evaluated with b0 -> 1/b0 and r -> k.
pub fn ho_momentum_density(nuclide: &Nuclide, b0: f64, k: f64) -> Result<f64> {
    if !(b0.is_finite() && b0 > 0.0) || !(k.is_finite() && k >= 0.0) {
        return Err(Error::RejectedInput(format!(
            "invalid (b0, k) = ({b0}, {k})"
        )));
    }
    ho_density(nuclide, 1.0 / b0, k)
}

/// Elastic point form factor of one shell as a function of t = q^2 b0^2 / 4:
/// `4 pi int j0(qr) R_nl^2(r) r^2 dr / (4 pi)`.
pub fn shell_form_factor(shell: Shell, t: f64) -> f64 {
    let poly = match shell {
        Shell::S1 => 1.0,
        Shell::P1 => 1.0 - 2.0 * t / 3.0,
        Shell::D1 => 1.0 - 4.0 * t / 3.0 + 4.0 * t * t / 15.0,
        Shell::S2 => 1.0 - 4.0 * t / 3.0 + 2.0 * t * t / 3.0,
    };
    poly * (-t).exp()
}

/// HO elastic point form factor F_HO(q) = 4 pi int j0(qr) rho_HO(r) r^2 dr,
/// with F_HO(0) = 1.
pub fn ho_form_factor(nuclide: &Nuclide, b0: f64, q: f64) -> Result<f64> {
    if !(b0.is_finite() && b0 > 0.0) || !(q.is_finite() && q >= 0.0) {
        return Err(Error::RejectedInput(format!(
            "invalid (b0, q) = ({b0}, {q})"
        )));
    }
    let t = 0.25 * q * q * b0 * b0;
    let mut sum = 0.0;
    for (shell, eta) in nuclide.occupied_shells() {
        sum += shell.capacity() as f64 * eta * shell_form_factor(shell, t);
    }
    Ok(sum / nuclide.mass_number() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuclide::{builtin_nuclide, r1_moment, BUILTIN_LABELS, FILL_ORDER};
    use crate::quadrature::CompositeRule;
    use approx::assert_relative_eq;

    fn radial_rule() -> CompositeRule {
        CompositeRule::uniform_panels(0.0, 12.0, 12, 14)
    }

    #[test]
    fn orbital_normalization() {
        let rule = radial_rule();
        for shell in FILL_ORDER {
            let norm = rule.integrate(|x| {
                let r = radial_unit(shell, x);
                r * r * x * x
            });
            assert!(
                (norm - 1.0).abs() < 1e-10,
                "{}: norm = {norm}",
                shell.label()
            );
        }
    }

    #[test]
    fn orbital_orthogonality_1s_2s() {
        let rule = radial_rule();
        let overlap = rule.integrate(|x| {
            radial_unit(Shell::S1, x) * radial_unit(Shell::S2, x) * x * x
        });
        assert!(overlap.abs() < 1e-10, "overlap = {overlap}");
    }

    #[test]
    fn p_orbital_vanishes_at_origin() {
        assert_eq!(ho_radial(Shell::P1, 1.7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn s_orbital_origin_value() {
        // R_1s(0) at b0=1 is 2 / pi^(1/4), from the normalization integral
        // of exp(-r^2)
        let expected = 2.0 / std::f64::consts::PI.powf(0.25);
        assert_relative_eq!(
            ho_radial(Shell::S1, 1.0, 0.0).unwrap(),
            expected,
            epsilon = 1e-14
        );
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(ho_radial(Shell::S1, 0.0, 1.0).is_err());
        assert!(ho_radial(Shell::S1, -1.0, 1.0).is_err());
        assert!(ho_radial(Shell::S1, 1.0, -0.5).is_err());
        let he4 = builtin_nuclide("He4").unwrap();
        assert!(ho_density(&he4, 1.0, -1.0).is_err());
        assert!(ho_form_factor(&he4, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn he4_density_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        for &b0 in &[0.8_f64, 1.3335, 2.0] {
            for &r in &[0.0, 0.7, 1.9, 3.4] {
                let expected = (-r * r / (b0 * b0)).exp()
                    / (std::f64::consts::PI.powf(1.5) * b0.powi(3));
                assert_relative_eq!(
                    ho_density(&he4, b0, r).unwrap(),
                    expected,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn density_normalization_all_builtins() {
        let rule = radial_rule();
        for label in BUILTIN_LABELS {
            let n = builtin_nuclide(label).unwrap();
            for &b0 in &[1.0, 1.9] {
                let norm = 4.0
                    * std::f64::consts::PI
                    * rule.integrate(|x| {
                        ho_density(&n, b0, x * b0).unwrap() * (x * b0).powi(2)
                    })
                    * b0;
                assert!((norm - 1.0).abs() < 1e-8, "{label}: {norm}");
            }
        }
    }

    #[test]
    fn mean_square_radius_matches_r1() {
        let rule = radial_rule();
        for label in BUILTIN_LABELS {
            let n = builtin_nuclide(label).unwrap();
            let b0 = 1.37;
            let msr = 4.0
                * std::f64::consts::PI
                * rule.integrate(|x| {
                    let r = x * b0;
                    ho_density(&n, b0, r).unwrap() * r.powi(4)
                })
                * b0;
            assert!(
                (msr / (b0 * b0) - r1_moment(&n)).abs() < 1e-6,
                "{label}: {msr}"
            );
        }
    }

    #[test]
    fn he4_momentum_closed_form() {
        let he4 = builtin_nuclide("He4").unwrap();
        let b0 = 1.25_f64;
        for &k in &[0.0, 0.5, 1.5, 3.0] {
            let expected =
                b0.powi(3) / std::f64::consts::PI.powf(1.5) * (-k * k * b0 * b0).exp();
            assert_relative_eq!(
                ho_momentum_density(&he4, b0, k).unwrap(),
                expected,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn momentum_normalization() {
        let rule = radial_rule();
        for label in ["C12", "Ca40", "Ar36-2s"] {
            let n = builtin_nuclide(label).unwrap();
            let b0 = 1.8;
            // k-space nodes: x = k b0
            let norm = 4.0
                * std::f64::consts::PI
                * rule.integrate(|x| {
                    let k = x / b0;
                    ho_momentum_density(&n, b0, k).unwrap() * k * k
                })
                / b0;
            assert!((norm - 1.0).abs() < 1e-8, "{label}: {norm}");
        }
    }

    #[test]
    fn momentum_matches_bessel_transform() {
        // independent oracle: n(k) = sum cap*eta*|Rt_nl(k)|^2/(4 pi A) with
        // Rt_nl(k) = sqrt(2/pi) int j_l(kr) R_nl(r) r^2 dr
        use crate::specfun::spherical_jn_all;
        let rule = radial_rule();
        let b0 = 1.6108;
        let n = builtin_nuclide("C12").unwrap();
        let mut jl = Vec::new();
        for &k in &[0.3, 1.0, 2.2] {
            let mut sum = 0.0;
            for (shell, eta) in n.occupied_shells() {
                let l = shell.l() as usize;
                let transform = rule.integrate(|x| {
                    let r = x * b0;
                    spherical_jn_all(l, k * r, &mut jl);
                    jl[l] * ho_radial(shell, b0, r).unwrap() * r * r
                }) * b0;
                let rt = (2.0 / std::f64::consts::PI).sqrt() * transform;
                sum += shell.capacity() as f64 * eta * rt * rt;
            }
            let oracle = sum / (4.0 * std::f64::consts::PI * n.mass_number() as f64);
            assert_relative_eq!(
                ho_momentum_density(&n, b0, k).unwrap(),
                oracle,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn form_factor_at_zero_is_one() {
        for label in BUILTIN_LABELS {
            let n = builtin_nuclide(label).unwrap();
            assert_relative_eq!(ho_form_factor(&n, 1.7, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn he4_form_factor_gaussian() {
        let he4 = builtin_nuclide("He4").unwrap();
        let b0 = 1.3335_f64;
        let mut q = 0.0;
        while q <= 4.0 {
            let expected = (-q * q * b0 * b0 / 4.0).exp();
            let got = ho_form_factor(&he4, b0, q).unwrap();
            assert!((got - expected).abs() < 1e-8, "q={q}: {got} vs {expected}");
            q += 0.05;
        }
    }

    #[test]
    fn form_factor_matches_numeric_transform() {
        use crate::specfun::spherical_jn_all;
        let rule = radial_rule();
        let mut jl = Vec::new();
        for label in ["O16", "Ca40", "Ar36-2s"] {
            let n = builtin_nuclide(label).unwrap();
            let b0 = 1.85;
            let mut q = 0.0;
            while q <= 4.0 {
                let numeric = 4.0
                    * std::f64::consts::PI
                    * rule.integrate(|x| {
                        let r = x * b0;
                        spherical_jn_all(0, q * r, &mut jl);
                        jl[0] * ho_density(&n, b0, r).unwrap() * r * r
                    })
                    * b0;
                let analytic = ho_form_factor(&n, b0, q).unwrap();
                assert!(
                    (numeric - analytic).abs() < 1e-6,
                    "{label} q={q}: {numeric} vs {analytic}"
                );
                q += 0.25;
            }
        }
    }

    #[test]
    fn c12_form_factor_first_zero() {
        // F_HO(C12) = (1 - 4t/9) e^{-t}: zero at t = 9/4, i.e. q = 3/b0
        let n = builtin_nuclide("C12").unwrap();
        let b0 = 1.6108;
        let f = |q: f64| ho_form_factor(&n, b0, q).unwrap();
        let (mut lo, mut hi) = (1.0, 3.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0, "no sign change in bracket");
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert_relative_eq!(root, 3.0 / b0, epsilon = 1e-6);
    }
}
