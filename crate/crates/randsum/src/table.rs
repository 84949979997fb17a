//! Value objects produced by the recursion and transform engines: dense
//! restricted-moment tables over the lattice [0, l_max] and prediction
//! curves, plus their CSV / JSON envelope forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slack below which a provably nonnegative entry is treated as a
/// rounding artifact and clamped to zero.
pub const NEG_EPS: f64 = 1e-12;

/// Default floor on the conditioning mass below which a conditional ratio is
/// numerically meaningless.
pub const DEFAULT_MASS_FLOOR: f64 = 1e-12;

/// Which restricted moment a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// m_k(l) = E[N^k; S_N = l]; k = 0 is the aggregate pmf.
    CountMoment,
    /// chi_{k+}(l) = E[X_1^k; S_{N+1} = l]; k = 0 is the pmf of S_{N+1}.
    ComponentMomentPlus,
    /// chi_k(l) = E[X_1^k; S_N = l].
    ComponentMoment,
}

impl Target {
    /// The law the table conditions on; ratio curves must pair tables with
    /// the same conditioning law.
    pub fn conditioning_law(self) -> &'static str {
        match self {
            Target::CountMoment | Target::ComponentMoment => "S_N",
            Target::ComponentMomentPlus => "S_N+1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Recursion,
    Fourier,
    Enumeration,
}

/// Numerical health indicators attached to every table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// |1 - sum| for mass tables (k = 0), otherwise 0.
    pub mass_deficit: f64,
    /// First index from which a Fourier table agrees with its recursion
    /// counterpart; populated by the stability scan.
    pub unstable_prefix: Option<usize>,
    /// Number of entries clamped up to zero.
    pub clamped_negative: usize,
    /// max |Im| over inverted entries relative to the table maximum.
    pub max_imag_residue: f64,
    /// Inversion grid size, Fourier tables only.
    pub grid_size: Option<usize>,
    pub aliasing_guard: Option<usize>,
}

/// Dense array of restricted-moment values over l in [0, l_max].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictedMomentTable {
    pub k: usize,
    pub target: Target,
    pub method: Method,
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl RestrictedMomentTable {
    /// Wraps raw values. All targets are provably nonnegative, so negative
    /// entries are floating-point artifacts: they are clamped to zero, and
    /// those falling below the -NEG_EPS slack are counted in the diagnostics.
    pub fn new(k: usize, target: Target, method: Method, mut values: Vec<f64>) -> Self {
        let mut clamped = 0;
        for v in &mut values {
            if *v < 0.0 {
                if *v < -NEG_EPS {
                    clamped += 1;
                }
                *v = 0.0;
            }
        }
        let mut table = RestrictedMomentTable {
            k,
            target,
            method,
            values,
            diagnostics: Diagnostics {
                clamped_negative: clamped,
                ..Diagnostics::default()
            },
        };
        if k == 0 {
            table.diagnostics.mass_deficit = (1.0 - table.sum()).abs();
        }
        table
    }

    pub fn ell_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// CSV with header `l,value`; values round-trip bit-exactly through the
    /// shortest-representation decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,value\n");
        for (l, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{l},{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "l,value" {
                    return Err(Error::TableMismatch(format!(
                        "unexpected CSV header {line:?}"
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (l, v) = line
                .split_once(',')
                .ok_or_else(|| Error::TableMismatch(format!("bad CSV record {line:?}")))?;
            let l: usize = l
                .trim()
                .parse()
                .map_err(|e| Error::TableMismatch(format!("bad index in {line:?}: {e}")))?;
            if l != values.len() {
                return Err(Error::TableMismatch(format!(
                    "non-contiguous index {l} at record {}",
                    values.len()
                )));
            }
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::TableMismatch(format!("bad value in {line:?}: {e}")))?;
            values.push(v);
        }
        Ok(values)
    }
}

/// One point of a conditional-expectation curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveEntry {
    pub ell: usize,
    pub value: f64,
    pub defined: bool,
}

/// E[ . | conditioning = l] as a function of l, with entries flagged
/// undefined where the conditioning mass sits below `mass_floor`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionCurve {
    pub k: usize,
    pub mass_floor: f64,
    pub entries: Vec<CurveEntry>,
}

impl PredictionCurve {
    pub fn value_at(&self, ell: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.ell == ell && e.defined)
            .map(|e| e.value)
    }

    /// CSV with header `l,value,defined`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,value,defined\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.ell, e.value, e.defined));
        }
        out
    }
}
