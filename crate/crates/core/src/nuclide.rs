//! Nuclide model: harmonic-oscillator shells, occupation probabilities and
//! the analytic one-body mean-square-radius coefficient R1.

use crate::error::{Error, Result};
use std::fmt;

/// A harmonic-oscillator shell (n, l) with spin-isospin saturated capacity
/// 4(2l+1) for N=Z nuclei.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shell {
    S1,
    P1,
    D1,
    S2,
}

/// Shells in filling order.
pub const FILL_ORDER: [Shell; 4] = [Shell::S1, Shell::P1, Shell::D1, Shell::S2];

impl Shell {
    /// Principal quantum number (number of radial nodes plus one).
    pub fn n(self) -> u32 {
        match self {
            Shell::S1 | Shell::P1 | Shell::D1 => 1,
            Shell::S2 => 2,
        }
    }

    /// Orbital angular momentum.
    pub fn l(self) -> u32 {
        match self {
            Shell::S1 | Shell::S2 => 0,
            Shell::P1 => 1,
            Shell::D1 => 2,
        }
    }

    /// Nucleon capacity 4(2l+1).
    pub fn capacity(self) -> u32 {
        4 * (2 * self.l() + 1)
    }

    /// Single-particle <r^2> in units of b0^2: 2n + l - 1/2.
    pub fn ms_radius(self) -> f64 {
        2.0 * self.n() as f64 + self.l() as f64 - 0.5
    }

    pub fn label(self) -> &'static str {
        match self {
            Shell::S1 => "1s",
            Shell::P1 => "1p",
            Shell::D1 => "1d",
            Shell::S2 => "2s",
        }
    }

    fn index(self) -> usize {
        match self {
            Shell::S1 => 0,
            Shell::P1 => 1,
            Shell::D1 => 2,
            Shell::S2 => 3,
        }
    }
}

/// An N=Z nuclide defined by its mass number and shell occupation
/// probabilities eta_nl in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Nuclide {
    name: String,
    a: u32,
    occupations: [f64; 4],
}

impl fmt::Display for Nuclide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl Nuclide {
    /// Build a nuclide from explicit occupation probabilities. The
    /// occupancy sum rule `sum_shells capacity * eta = A` must hold and
    /// A must be even (N = Z).
    pub fn new(name: &str, a: u32, occupations: &[(Shell, f64)]) -> Result<Self> {
        let mut occ = [0.0; 4];
        for &(shell, eta) in occupations {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::RejectedInput(format!(
                    "occupation probability {eta} for {} outside [0, 1]",
                    shell.label()
                )));
            }
            occ[shell.index()] = eta;
        }
        if a % 2 != 0 {
            return Err(Error::RejectedInput(format!(
                "mass number {a} is odd; only N=Z nuclei are supported"
            )));
        }
        let filled: f64 = FILL_ORDER
            .iter()
            .map(|s| s.capacity() as f64 * occ[s.index()])
            .sum();
        if (filled - a as f64).abs() > 1e-9 {
            return Err(Error::RejectedInput(format!(
                "occupation sum rule violated for {name}: sum capacity*eta = {filled}, A = {a}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            a,
            occupations: occ,
        })
    }

    /// Build a nuclide by filling shells in the order 1s, 1p, 1d, 2s,
    /// assigning any open-shell remainder to the last partially filled shell.
    pub fn by_filling(name: &str, a: u32) -> Result<Self> {
        if a % 2 != 0 || a < 2 || a > 40 {
            return Err(Error::RejectedInput(format!(
                "mass number {a} outside the supported N=Z range 2..=40"
            )));
        }
        let mut occ = [0.0; 4];
        let mut remaining = a as f64;
        for shell in FILL_ORDER {
            let cap = shell.capacity() as f64;
            let take = remaining.min(cap);
            occ[shell.index()] = take / cap;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        Ok(Self {
            name: name.to_string(),
            a,
            occupations: occ,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mass_number(&self) -> u32 {
        self.a
    }

    pub fn proton_number(&self) -> u32 {
        self.a / 2
    }

    /// Occupation probability of a shell.
    pub fn occupation(&self, shell: Shell) -> f64 {
        self.occupations[shell.index()]
    }

    /// Shells with nonzero occupation, in filling order.
    pub fn occupied_shells(&self) -> impl Iterator<Item = (Shell, f64)> + '_ {
        FILL_ORDER
            .into_iter()
            .filter_map(|s| {
                let eta = self.occupations[s.index()];
                (eta > 0.0).then_some((s, eta))
            })
    }

    /// Largest orbital angular momentum among occupied shells.
    pub fn l_max(&self) -> usize {
        self.occupied_shells()
            .map(|(s, _)| s.l() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Labels of the builtin nuclides in mass order (the 2s variant of Ar36 last).
pub const BUILTIN_LABELS: [&str; 9] = [
    "He4", "C12", "O16", "Mg24", "Si28", "S32", "Ar36", "Ca40", "Ar36-2s",
];

/// Labels of the eight standard nuclides (without the Ar36 2s variant).
pub const STANDARD_LABELS: [&str; 8] = [
    "He4", "C12", "O16", "Mg24", "Si28", "S32", "Ar36", "Ca40",
];

/// Look up a builtin nuclide by label.
///
/// `Ar36-2s` is the 1d-2s variant with eta_1s = eta_1p = eta_2s = 1 and
/// eta_1d = 0.8; every other open-shell nuclide puts its valence nucleons
/// in a single open shell.
pub fn builtin_nuclide(name: &str) -> Result<Nuclide> {
    match name {
        "He4" => Nuclide::by_filling("He4", 4),
        "C12" => Nuclide::by_filling("C12", 12),
        "O16" => Nuclide::by_filling("O16", 16),
        "Mg24" => Nuclide::by_filling("Mg24", 24),
        "Si28" => Nuclide::by_filling("Si28", 28),
        "S32" => Nuclide::by_filling("S32", 32),
        "Ar36" => Nuclide::by_filling("Ar36", 36),
        "Ca40" => Nuclide::by_filling("Ca40", 40),
        "Ar36-2s" => Nuclide::new(
            "Ar36-2s",
            36,
            &[
                (Shell::S1, 1.0),
                (Shell::P1, 1.0),
                (Shell::D1, 0.8),
                (Shell::S2, 1.0),
            ],
        ),
        other => Err(Error::UnknownNuclide(other.to_string())),
    }
}

/// One-body mean-square-radius coefficient
/// R1 = (1/A)[6 eta_1s + 14 eta_2s + 30 eta_1p + 70 eta_1d].
///
/// Its square root is the zero-correlation radius r_b(infinity) in units
/// of the oscillator length.
pub fn r1_moment(nuclide: &Nuclide) -> f64 {
    let sum: f64 = FILL_ORDER
        .iter()
        .map(|&s| s.capacity() as f64 * s.ms_radius() * nuclide.occupation(s))
        .sum();
    sum / nuclide.mass_number() as f64
}

/// Parse nuclide definitions from a plain-text table.
///
/// Format, one nuclide per line (comments start with '#'):
/// `name A Z eta_1s eta_1p eta_1d eta_2s`
pub fn parse_nuclide_table(text: &str) -> Result<Vec<Nuclide>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::RejectedInput(format!(
                "nuclide table line {}: expected 7 fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::RejectedInput(format!(
                    "nuclide table line {}: cannot parse {what} '{s}'",
                    lineno + 1
                ))
            })
        };
        let a = parse(fields[1], "A")? as u32;
        let z = parse(fields[2], "Z")? as u32;
        if z * 2 != a {
            return Err(Error::RejectedInput(format!(
                "nuclide table line {}: N=Z requires A = 2Z, got A={a}, Z={z}",
                lineno + 1
            )));
        }
        let occ = [
            (Shell::S1, parse(fields[3], "eta_1s")?),
            (Shell::P1, parse(fields[4], "eta_1p")?),
            (Shell::D1, parse(fields[5], "eta_1d")?),
            (Shell::S2, parse(fields[6], "eta_2s")?),
        ];
        out.push(Nuclide::new(fields[0], a, &occ)?);
    }
    Ok(out)
}
