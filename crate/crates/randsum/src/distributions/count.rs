use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cx::{exp_m1, falling, ln_1p, rising};
use crate::distributions::{Intensity, PanjerParams, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};

/// Distribution of the number of components N on {0, 1, 2, ...}.
///
/// Exposes the pmf, the pgf G_N on the closed unit disk, pgf derivatives
/// G_N^{(j)}, raw moments E[N^k], and — for the Poisson / negative binomial /
/// binomial families — the Panjer (a,b) parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountModel {
    Poisson {
        lambda: f64,
    },
    /// Number of failures before the r-th success: q_n = C(r+n-1, n) p^r q^n.
    NegativeBinomial {
        r: f64,
        p: f64,
    },
    Binomial {
        n: u32,
        p: f64,
    },
    /// Mixed Poisson N = π(θ Λ(horizon)) with θ ~ Gamma(alpha, beta); the
    /// pgf is (beta / (beta + Λ(horizon)(1 - z)))^alpha.
    MixedPoissonGamma {
        alpha: f64,
        beta: f64,
        intensity: Intensity,
        horizon: f64,
    },
    /// Explicit pmf table over [0, n_max]; pmf is 0 beyond the table.
    CustomPmf {
        pmf: Vec<f64>,
        #[serde(default = "default_tail_tol")]
        tail_tol: f64,
    },
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

impl CountModel {
    pub fn poisson(lambda: f64) -> Result<Self> {
        let m = CountModel::Poisson { lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn negative_binomial(r: f64, p: f64) -> Result<Self> {
        let m = CountModel::NegativeBinomial { r, p };
        m.validate()?;
        Ok(m)
    }

    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        let m = CountModel::Binomial { n, p };
        m.validate()?;
        Ok(m)
    }

    pub fn mixed_poisson_gamma(
        alpha: f64,
        beta: f64,
        intensity: Intensity,
        horizon: f64,
    ) -> Result<Self> {
        let m = CountModel::MixedPoissonGamma {
            alpha,
            beta,
            intensity,
            horizon,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn custom_pmf(pmf: Vec<f64>, tail_tol: f64) -> Result<Self> {
        let m = CountModel::CustomPmf { pmf, tail_tol };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CountModel::Poisson { lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::InvalidParameter("Poisson requires lambda > 0".into()));
                }
            }
            CountModel::NegativeBinomial { r, p } => {
                if !(*r > 0.0 && *p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(
                        "NegativeBinomial requires r > 0 and 0 < p < 1".into(),
                    ));
                }
            }
            CountModel::Binomial { p, .. } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(
                        "Binomial requires 0 < p < 1".into(),
                    ));
                }
            }
            CountModel::MixedPoissonGamma {
                alpha,
                beta,
                intensity,
                horizon,
            } => {
                if !(*alpha > 0.0 && *beta > 0.0 && *horizon >= 0.0) {
                    return Err(Error::InvalidParameter(
                        "MixedPoissonGamma requires alpha, beta > 0 and horizon >= 0".into(),
                    ));
                }
                intensity.validate()?;
            }
            CountModel::CustomPmf { pmf, tail_tol } => {
                if pmf.is_empty() {
                    return Err(Error::InvalidParameter("empty pmf table".into()));
                }
                if pmf.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "pmf entries must be finite and nonnegative".into(),
                    ));
                }
                let sum: f64 = pmf.iter().sum();
                if (1.0 - sum).abs() > *tail_tol {
                    return Err(Error::UncertifiedTail {
                        what: "custom count pmf".into(),
                        tail: (1.0 - sum).abs(),
                        tol: *tail_tol,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            CountModel::Poisson { lambda } => format!("Poisson({lambda})"),
            CountModel::NegativeBinomial { r, p } => format!("NegBin(r={r}, p={p})"),
            CountModel::Binomial { n, p } => format!("Binomial(n={n}, p={p})"),
            CountModel::MixedPoissonGamma {
                alpha,
                beta,
                horizon,
                ..
            } => format!("MixedPoissonGamma(alpha={alpha}, beta={beta}, t={horizon})"),
            CountModel::CustomPmf { pmf, .. } => format!("CustomPmf(n_max={})", pmf.len() - 1),
        }
    }

    /// For the mixed Poisson-Gamma model this is the (r, 1-p) pair of the
    /// equivalent negative binomial at the fixed horizon; used internally by
    /// pmf/pgf code. Not exposed as Panjer parameters (the transform route
    /// owns this model).
    fn nb_equivalent(&self) -> Option<(f64, f64)> {
        match self {
            CountModel::NegativeBinomial { r, p } => Some((*r, 1.0 - p)),
            CountModel::MixedPoissonGamma {
                alpha,
                beta,
                intensity,
                horizon,
            } => {
                let lam_t = intensity.value(*horizon);
                Some((*alpha, lam_t / (beta + lam_t)))
            }
            _ => None,
        }
    }

    /// Panjer (a,b) parameters; present exactly for Poisson, negative
    /// binomial and binomial.
    pub fn panjer_params(&self) -> Option<PanjerParams> {
        match self {
            CountModel::Poisson { lambda } => Some(PanjerParams { a: 0.0, b: *lambda }),
            CountModel::NegativeBinomial { r, p } => {
                let q = 1.0 - p;
                Some(PanjerParams {
                    a: q,
                    b: (r - 1.0) * q,
                })
            }
            CountModel::Binomial { n, p } => {
                let ratio = p / (1.0 - p);
                Some(PanjerParams {
                    a: -ratio,
                    b: (*n as f64 + 1.0) * ratio,
                })
            }
            _ => None,
        }
    }

    /// q_n = P(N = n).
    pub fn pmf(&self, n: usize) -> f64 {
        match self {
            CountModel::Poisson { lambda } => {
                let mut q = (-lambda).exp();
                for m in 1..=n {
                    q *= lambda / m as f64;
                }
                q
            }
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                let mut v = (1.0 - q).powf(r);
                for m in 1..=n {
                    v *= q * (r + m as f64 - 1.0) / m as f64;
                }
                v
            }
            CountModel::Binomial { n: nn, p } => {
                if n > *nn as usize {
                    return 0.0;
                }
                let mut v = (1.0 - p).powi(*nn as i32);
                for m in 1..=n {
                    v *= (*nn as f64 - m as f64 + 1.0) / m as f64 * p / (1.0 - p);
                }
                v
            }
            CountModel::CustomPmf { pmf, .. } => pmf.get(n).copied().unwrap_or(0.0),
        }
    }

    /// pmf table on [0, n_max].
    pub fn pmf_prefix(&self, n_max: usize) -> Vec<f64> {
        match self {
            CountModel::CustomPmf { pmf, .. } => (0..=n_max)
                .map(|n| pmf.get(n).copied().unwrap_or(0.0))
                .collect(),
            _ => {
                // Ratio recurrences are exact for every built-in family.
                let mut out = Vec::with_capacity(n_max + 1);
                out.push(self.pmf(0));
                for n in 1..=n_max {
                    let prev = out[n - 1];
                    out.push(prev * self.pmf_ratio(n));
                }
                out
            }
        }
    }

    /// q_n / q_{n-1} for n >= 1.
    fn pmf_ratio(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            CountModel::Poisson { lambda } => lambda / nf,
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                q * (r + nf - 1.0) / nf
            }
            CountModel::Binomial { n: nn, p } => {
                if n > *nn as usize {
                    0.0
                } else {
                    (*nn as f64 - nf + 1.0) / nf * p / (1.0 - p)
                }
            }
            CountModel::CustomPmf { pmf, .. } => {
                let prev = pmf.get(n - 1).copied().unwrap_or(0.0);
                if prev == 0.0 {
                    0.0
                } else {
                    pmf.get(n).copied().unwrap_or(0.0) / prev
                }
            }
        }
    }

    /// P(N > n), summed forward from n+1 so deep tails keep relative accuracy.
    pub fn tail_mass(&self, n: usize) -> f64 {
        match self {
            CountModel::Binomial { n: nn, .. } => {
                if n >= *nn as usize {
                    return 0.0;
                }
                ((n + 1)..=(*nn as usize)).map(|m| self.pmf(m)).sum()
            }
            CountModel::CustomPmf { pmf, .. } => {
                pmf.iter().skip(n + 1).sum::<f64>() + (1.0 - pmf.iter().sum::<f64>()).max(0.0)
            }
            _ => {
                let mut term = self.pmf(n + 1);
                let mut total = term;
                let mut m = n + 1;
                // Geometric-style cutoff: stop once increments cannot move the sum.
                while term > total * 1e-18 + 1e-320 && m < n + 100_000 {
                    m += 1;
                    term *= self.pmf_ratio(m);
                    total += term;
                }
                total
            }
        }
    }

    /// G_N(z) on the closed unit disk.
    pub fn pgf(&self, z: Complex64) -> Complex64 {
        self.pgf1p(z - 1.0)
    }

    /// G_N(1 + delta). Taking the argument as an offset from 1 keeps the
    /// compound transforms accurate where the severity pgf is close to 1.
    pub fn pgf1p(&self, delta: Complex64) -> Complex64 {
        match self {
            CountModel::Poisson { lambda } => (lambda * delta).exp(),
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                let ratio = q / (1.0 - q);
                (-r * ln_1p(-ratio * delta)).exp()
            }
            CountModel::Binomial { n, p } => (*n as f64 * ln_1p(p * delta)).exp(),
            CountModel::CustomPmf { pmf, .. } => {
                let l = ln_1p(delta);
                pmf.iter()
                    .enumerate()
                    .map(|(n, &q)| q * (n as f64 * l).exp())
                    .sum()
            }
        }
    }

    /// G_N(1 + delta) - 1, cancellation-free for small |delta|.
    pub fn pgf1p_m1(&self, delta: Complex64) -> Complex64 {
        match self {
            CountModel::Poisson { lambda } => exp_m1(lambda * delta),
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                let ratio = q / (1.0 - q);
                exp_m1(-r * ln_1p(-ratio * delta))
            }
            CountModel::Binomial { n, p } => exp_m1(*n as f64 * ln_1p(p * delta)),
            CountModel::CustomPmf { pmf, .. } => {
                let l = ln_1p(delta);
                pmf.iter()
                    .enumerate()
                    .map(|(n, &q)| q * exp_m1(n as f64 * l))
                    .sum()
            }
        }
    }

    /// j-th derivative of the pgf, G_N^{(j)}(z) = sum_n (n)_j q_n z^{n-j}.
    pub fn pgf_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        self.pgf1p_deriv(j, z - 1.0)
    }

    /// G_N^{(j)}(1 + delta); see [`CountModel::pgf1p`].
    pub fn pgf1p_deriv(&self, j: usize, delta: Complex64) -> Result<Complex64> {
        if j == 0 {
            return Ok(self.pgf1p(delta));
        }
        match self {
            CountModel::Poisson { lambda } => Ok(lambda.powi(j as i32) * (lambda * delta).exp()),
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                let ratio = q / (1.0 - q);
                Ok(rising(r, j) * ratio.powi(j as i32)
                    * (-(r + j as f64) * ln_1p(-ratio * delta)).exp())
            }
            CountModel::Binomial { n, p } => {
                if j > *n as usize {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(falling(*n as f64, j) * p.powi(j as i32)
                    * ((*n as f64 - j as f64) * ln_1p(p * delta)).exp())
            }
            CountModel::CustomPmf { .. } => {
                self.certify_order(j)?;
                let CountModel::CustomPmf { pmf, .. } = self else {
                    unreachable!()
                };
                let l = ln_1p(delta);
                Ok(pmf
                    .iter()
                    .enumerate()
                    .skip(j)
                    .map(|(n, &q)| falling(n as f64, j) * q * ((n - j) as f64 * l).exp())
                    .sum())
            }
        }
    }

    /// Factorial moment E[(N)_j] = G_N^{(j)}(1).
    pub fn factorial_moment(&self, j: usize) -> Result<f64> {
        match self {
            CountModel::Poisson { lambda } => Ok(lambda.powi(j as i32)),
            CountModel::NegativeBinomial { .. } | CountModel::MixedPoissonGamma { .. } => {
                let (r, q) = self.nb_equivalent().unwrap();
                Ok(rising(r, j) * (q / (1.0 - q)).powi(j as i32))
            }
            CountModel::Binomial { n, p } => Ok(falling(*n as f64, j) * p.powi(j as i32)),
            CountModel::CustomPmf { .. } => {
                self.certify_order(j)?;
                let CountModel::CustomPmf { pmf, .. } = self else {
                    unreachable!()
                };
                Ok(pmf
                    .iter()
                    .enumerate()
                    .map(|(n, &q)| falling(n as f64, j) * q)
                    .sum())
            }
        }
    }

    /// Raw moment E[N^k] assembled from factorial moments via Stirling
    /// numbers of the second kind.
    pub fn moment(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let mut total = 0.0;
        for j in 1..=k {
            total += crate::transform::stirling2_f64(k, j) * self.factorial_moment(j)?;
        }
        Ok(total)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1).expect("first moment exists for all built-ins")
    }

    /// A custom table only certifies moments/derivatives when its missing
    /// mass is below the library-wide truncation tolerance; anything beyond
    /// the table could contribute unboundedly to an order >= 1 moment.
    fn certify_order(&self, j: usize) -> Result<()> {
        if let CountModel::CustomPmf { pmf, .. } = self {
            if j >= 1 {
                let deficit = (1.0 - pmf.iter().sum::<f64>()).abs();
                if deficit > DEFAULT_TAIL_TOL {
                    return Err(Error::UnboundedMoment {
                        model: self.describe(),
                        order: j,
                        reason: format!(
                            "table deficit {deficit:.3e} exceeds {DEFAULT_TAIL_TOL:.1e}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}
