//! Permittivity models on the positive imaginary frequency axis.
//!
//! Every observable in this crate is an integral over imaginary frequency
//! ω = iξ, where the permittivity of a passive medium is real, ≥ 1 and
//! monotonically non-increasing in ξ. Three models are provided:
//!
//! * `Constant` — non-dispersive ε,
//! * `DrudeLorentz` — ε(iξ) = 1 + ωp²/(ω0² + ξ² + γξ),
//! * `Table` — monotone cubic interpolation of user-supplied (ξ, ε) samples.
//!
//! Natural units ħ = c = ε₀ = 1 throughout: lengths in one user-chosen unit,
//! frequencies in its inverse. Permeability is fixed at μ = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permittivity model evaluable at imaginary frequency.
///
/// JSON descriptors:
/// `{"type":"constant","eps":2.0}`,
/// `{"type":"drude_lorentz","wp":1.0,"w0":1.0,"gamma":0.1}`,
/// `{"type":"table","xi":[...],"eps":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Permittivity {
    Constant {
        eps: f64,
    },
    DrudeLorentz {
        wp: f64,
        w0: f64,
        gamma: f64,
    },
    Table(TablePermittivity),
}

impl Permittivity {
    pub fn constant(eps: f64) -> Self {
        Permittivity::Constant { eps }
    }

    pub fn vacuum() -> Self {
        Permittivity::Constant { eps: 1.0 }
    }

    /// Validate model parameters against passivity on the imaginary axis.
    pub fn validate(&self) -> Result<()> {
        match self {
            Permittivity::Constant { eps } => {
                if !eps.is_finite() || *eps < 1.0 {
                    return Err(Error::Material(format!(
                        "constant permittivity must be finite and >= 1, got {eps}"
                    )));
                }
            }
            Permittivity::DrudeLorentz { wp, w0, gamma } => {
                for (name, v) in [("wp", wp), ("w0", w0), ("gamma", gamma)] {
                    if !v.is_finite() || *v < 0.0 {
                        return Err(Error::Material(format!(
                            "Drude-Lorentz parameter {name} must be finite and >= 0, got {v}"
                        )));
                    }
                }
            }
            Permittivity::Table(t) => t.validate()?,
        }
        Ok(())
    }

    /// ε(iξ) for ξ > 0. Always real; Constant ignores ξ.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::domain(format!(
                "permittivity requested at non-positive imaginary frequency xi = {xi}"
            )));
        }
        Ok(match self {
            Permittivity::Constant { eps } => *eps,
            Permittivity::DrudeLorentz { wp, w0, gamma } => {
                1.0 + wp * wp / (w0 * w0 + xi * xi + gamma * xi)
            }
            Permittivity::Table(t) => t.eval(xi),
        })
    }

    /// True when the model carries no ξ dependence.
    pub fn is_dispersionless(&self) -> bool {
        matches!(self, Permittivity::Constant { .. })
    }

    /// Parse a JSON descriptor and validate it.
    pub fn from_json(json: &str) -> Result<Self> {
        let model: Permittivity = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }
}

/// Tabulated ε(iξ) with monotone (Fritsch-Carlson) cubic interpolation.
/// Outside the table the end values are held constant, which preserves
/// ε ≥ 1 and monotone decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct TablePermittivity {
    xi: Vec<f64>,
    eps: Vec<f64>,
    /// Limited Hermite slopes, one per knot.
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTable {
    xi: Vec<f64>,
    eps: Vec<f64>,
}

impl From<TablePermittivity> for RawTable {
    fn from(t: TablePermittivity) -> Self {
        RawTable { xi: t.xi, eps: t.eps }
    }
}

impl TryFrom<RawTable> for TablePermittivity {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        TablePermittivity::new(raw.xi, raw.eps)
    }
}

impl TablePermittivity {
    pub fn new(xi: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if xi.len() != eps.len() || xi.len() < 2 {
            return Err(Error::Material(format!(
                "permittivity table needs matching xi/eps arrays with >= 2 entries, got {} and {}",
                xi.len(),
                eps.len()
            )));
        }
        for w in xi.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
                return Err(Error::Material(
                    "table xi values must be positive, finite and strictly increasing".into(),
                ));
            }
        }
        for w in eps.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite() && w[1] <= w[0]) {
                return Err(Error::Material(
                    "table eps values must be finite and non-increasing in xi".into(),
                ));
            }
        }
        if *eps.last().unwrap() < 1.0 {
            return Err(Error::Material("table eps values must stay >= 1".into()));
        }
        let slopes = fritsch_carlson_slopes(&xi, &eps);
        Ok(TablePermittivity { xi, eps, slopes })
    }

    fn validate(&self) -> Result<()> {
        // Construction already validated; re-check the derived slopes exist.
        if self.slopes.len() != self.xi.len() {
            return Err(Error::Material("table slopes out of sync".into()));
        }
        Ok(())
    }

    fn eval(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        if xi <= self.xi[0] {
            return self.eps[0];
        }
        if xi >= self.xi[n - 1] {
            return self.eps[n - 1];
        }
        let i = match self.xi.partition_point(|&x| x <= xi) {
            0 => 0,
            p => p - 1,
        };
        let h = self.xi[i + 1] - self.xi[i];
        let t = (xi - self.xi[i]) / h;
        let (y0, y1) = (self.eps[i], self.eps[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1
    }
}

/// Monotonicity-limited Hermite slopes (Fritsch & Carlson 1980).
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        } else {
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
    }
    m
}

/// Dielectric contrast δε(iξ) = object(iξ) − background(iξ).
///
/// Identical models give identically zero contrast, and every Born term of
/// order n ≥ 1 built on a zero contrast is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub object: Permittivity,
    pub background: Permittivity,
}

impl Contrast {
    pub fn new(object: Permittivity, background: Permittivity) -> Self {
        Contrast { object, background }
    }

    pub fn eval(&self, xi: f64) -> Result<f64> {
        if self.is_zero() {
            // Evaluate once for the domain check, then return an exact zero.
            self.object.eval(xi)?;
            return Ok(0.0);
        }
        Ok(self.object.eval(xi)? - self.background.eval(xi)?)
    }

    /// Exactly-zero contrast (identical models).
    pub fn is_zero(&self) -> bool {
        self.object == self.background
    }

    /// max over a log grid of |δε(iξ)/ε_mid(iξ)|, the Born-series expansion
    /// parameter. Reported as a convergence diagnostic; no convergence
    /// certificate is attempted.
    pub fn max_relative_contrast(&self, xi_lo: f64, xi_hi: f64, n: usize) -> Result<f64> {
        let mut max = 0.0_f64;
        for i in 0..n {
            let t = i as f64 / (n - 1).max(1) as f64;
            let xi = xi_lo * (xi_hi / xi_lo).powf(t);
            let r = (self.eval(xi)? / self.background.eval(xi)?).abs();
            max = max.max(r);
        }
        Ok(max)
    }
}
