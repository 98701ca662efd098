//! Gauss-Legendre quadrature: single rules, affine panel mapping and
//! composite rules assembled from panels.

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre polynomial; accurate to machine
/// precision for the modest orders (n <= 64) used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one polishing step after convergence
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 1..n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf + 1.0) * x * q1 - kf * q0) / (kf + 1.0);
                    q0 = q1;
                    q1 = q2;
                }
                dp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A reusable composite quadrature rule: a flat list of (node, weight)
/// pairs on some interval of the positive axis.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Gauss-Legendre panels of equal width on [a, b].
    pub fn uniform_panels(a: f64, b: f64, panels: usize, nodes_per_panel: usize) -> Self {
        let (xs, ws) = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            append_mapped(&xs, &ws, lo, lo + h, &mut nodes, &mut weights);
        }
        Self { nodes, weights }
    }

    /// Panels with explicit breakpoints.
    pub fn from_breakpoints(breaks: &[f64], nodes_per_panel: usize) -> Self {
        let (xs, ws) = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            append_mapped(&xs, &ws, w[0], w[1], &mut nodes, &mut weights);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a scalar function over the rule.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn append_mapped(
    xs: &[f64],
    ws: &[f64],
    a: f64,
    b: f64,
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for (&x, &w) in xs.iter().zip(ws) {
        nodes.push(c + h * x);
        weights.push(h * w);
    }
}

/// Integrate f over [a, b] with one n-point Gauss-Legendre panel.
pub fn integrate_gl(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    xs.iter()
        .zip(&ws)
        .map(|(&x, &w)| h * w * f(c + h * x))
        .sum()
}
