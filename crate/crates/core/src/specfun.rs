//! Small special-function kernels: Legendre polynomials, spherical Bessel
//! functions of the first kind, and exponentially scaled modified spherical
//! Bessel functions.

/// Evaluate Legendre polynomials P_0(x) .. P_lmax(x) with the three-term
/// recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
pub fn legendre_all(l_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if l_max == 0 {
        return;
    }
    out.push(x);
    for n in 1..l_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
}

/// Legendre polynomial P_l(x).
pub fn legendre(l: usize, x: f64) -> f64 {
    let mut buf = Vec::with_capacity(l + 1);
    legendre_all(l, x, &mut buf);
    buf[l]
}

/// Spherical Bessel functions j_0(x) .. j_lmax(x) for x >= 0.
///
/// Uses the upward recurrence where it is stable (x > l_max) and Miller's
/// downward recurrence normalized to j_0 otherwise.
pub fn spherical_jn_all(l_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(l_max + 1, 0.0);
    if x < 1e-12 {
        out[0] = 1.0;
        return;
    }
    let j0 = x.sin() / x;
    out[0] = j0;
    if l_max == 0 {
        return;
    }
    let j1 = (x.sin() / x - x.cos()) / x;
    out[1] = j1;
    if l_max == 1 {
        return;
    }
    if x > l_max as f64 {
        // upward recurrence: j_{n+1} = (2n+1)/x j_n - j_{n-1}
        for n in 1..l_max {
            out[n + 1] = (2.0 * n as f64 + 1.0) / x * out[n] - out[n - 1];
        }
    } else {
        // downward Miller recurrence from a safely high starting order
        let start = l_max + 16 + (1.2 * x) as usize;
        let mut jp1 = 0.0_f64;
        let mut j = 1e-300_f64;
        for k in (0..=start).rev() {
            let jm1 = (2.0 * k as f64 + 3.0) / x * j - jp1;
            if k <= l_max {
                out[k] = jm1;
            }
            jp1 = j;
            j = jm1;
            if j.abs() > 1e250 {
                let s = 1e-250;
                j *= s;
                jp1 *= s;
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
        }
        // out currently holds unnormalized j_k; fix the scale with j_0 or j_1
        let scale = if out[0].abs() > out[1].abs() {
            j0 / out[0]
        } else {
            j1 / out[1]
        };
        for v in out.iter_mut() {
            *v *= scale;
        }
    }
}

/// Exponentially scaled modified spherical Bessel functions of the first
/// kind, `e^{-z} i_l(z)` for l = 0..l_max and z >= 0.
///
/// Downward Miller recurrence normalized with the addition-theorem sum rule
/// `sum_l (2l+1) e^{-z} i_l(z) = 1`, which avoids any overflow for large z.
pub fn scaled_mod_spherical_in_all(l_max: usize, z: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(l_max + 1, 0.0);
    if z < 1e-8 {
        // i_l(z) ~ z^l / (2l+1)!!; only l = 0 survives at double precision
        out[0] = 1.0 - z;
        if l_max >= 1 {
            out[1] = z / 3.0;
        }
        return;
    }
    if z < 0.5 {
        // series per order: i_l = z^l/(2l+1)!! * sum_k (z^2/2)^k / (k! prod)
        let mut dfact = 1.0; // (2l+1)!!
        let mut zl = 1.0;
        for l in 0..=l_max {
            if l > 0 {
                dfact *= 2.0 * l as f64 + 1.0;
                zl *= z;
            } else {
                dfact = 1.0;
            }
            let mut term = zl / dfact;
            let mut sum = term;
            let half_z2 = 0.5 * z * z;
            for k in 1..30 {
                term *= half_z2 / (k as f64 * (2.0 * (l as f64 + k as f64) + 1.0));
                sum += term;
                if term < 1e-18 * sum {
                    break;
                }
            }
            out[l] = sum * (-z).exp();
        }
        return;
    }
    // Downward Miller recurrence i_k = i_{k+2} + (2k+3)/z i_{k+1} with a
    // running normalization sum; rescaling keeps everything finite. The
    // start order must cover the sum-rule tail, which decays like
    // exp(-l^2/2z): 8.1 sqrt(z) pushes it below 1e-14.
    let start = l_max + 20 + (8.1 * z.sqrt()) as usize;
    let mut vp1 = 0.0_f64;
    let mut v = 1e-300_f64;
    let mut sum = (2.0 * start as f64 + 3.0) * vp1 + (2.0 * start as f64 + 1.0) * v;
    for k in (0..start).rev() {
        let vm1 = vp1 + (2.0 * k as f64 + 3.0) / z * v;
        sum += (2.0 * k as f64 + 1.0) * vm1;
        if k <= l_max {
            out[k] = vm1;
        }
        vp1 = v;
        v = vm1;
        if v > 1e250 {
            let s = 1e-250;
            v *= s;
            vp1 *= s;
            sum *= s;
            for w in out.iter_mut() {
                *w *= s;
            }
        }
    }
    for w in out.iter_mut() {
        *w /= sum;
    }
}
