use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cx::{exp_m1, expi_m1, falling, ln_1p, rising};
use crate::distributions::DEFAULT_TAIL_TOL;
use crate::error::{Error, Result};

/// Rough decay envelope of a characteristic function, used to pick the
/// truncation point of Fourier-Stieltjes inversions: |phi(u)| <= (scale/|u|)^power
/// for |u| >= scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayHint {
    PowerLaw { scale: f64, power: f64 },
}

/// User-supplied characteristic function for a continuous component law.
#[derive(Clone)]
pub struct CustomCf {
    cf: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    cf_deriv: Option<Arc<dyn Fn(usize, f64) -> Complex64 + Send + Sync>>,
    /// Raw moments [E X, E X^2, ...] when known.
    moments: Vec<f64>,
    decay: Option<DecayHint>,
}

impl CustomCf {
    pub fn new(cf: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        CustomCf {
            cf: Arc::new(cf),
            cf_deriv: None,
            moments: Vec::new(),
            decay: None,
        }
    }

    pub fn with_deriv(
        mut self,
        deriv: impl Fn(usize, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.cf_deriv = Some(Arc::new(deriv));
        self
    }

    pub fn with_moments(mut self, moments: Vec<f64>) -> Self {
        self.moments = moments;
        self
    }

    pub fn with_decay(mut self, decay: DecayHint) -> Self {
        self.decay = Some(decay);
        self
    }
}

impl fmt::Debug for CustomCf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCf")
            .field("has_deriv", &self.cf_deriv.is_some())
            .field("moments", &self.moments.len())
            .field("decay", &self.decay)
            .finish()
    }
}

/// Distribution of a single component X_1: either discrete on {0,1,2,...}
/// (pmf/pgf surface) or continuous on [0, inf) (cf surface).
#[derive(Debug, Clone)]
pub enum SeverityModel {
    DiscretePoisson { gamma: f64 },
    /// P(X = k) = p (1-p)^k on {0, 1, 2, ...}.
    Geometric { p: f64 },
    /// Point mass at c; discrete when c is a nonnegative integer.
    Degenerate { c: f64 },
    DiscreteCustomPmf { pmf: Vec<f64>, tail_tol: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    CustomCf(CustomCf),
}

impl SeverityModel {
    pub fn discrete_poisson(gamma: f64) -> Result<Self> {
        let m = SeverityModel::DiscretePoisson { gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn geometric(p: f64) -> Result<Self> {
        let m = SeverityModel::Geometric { p };
        m.validate()?;
        Ok(m)
    }

    pub fn degenerate(c: f64) -> Result<Self> {
        let m = SeverityModel::Degenerate { c };
        m.validate()?;
        Ok(m)
    }

    pub fn custom_pmf(pmf: Vec<f64>, tail_tol: f64) -> Result<Self> {
        let m = SeverityModel::DiscreteCustomPmf { pmf, tail_tol };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let m = SeverityModel::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let m = SeverityModel::Gamma { shape, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn custom_cf(cf: CustomCf) -> Result<Self> {
        let m = SeverityModel::CustomCf(cf);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SeverityModel::DiscretePoisson { gamma } => {
                if !(*gamma > 0.0) {
                    return Err(Error::InvalidParameter(
                        "discrete Poisson requires gamma > 0".into(),
                    ));
                }
            }
            SeverityModel::Geometric { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(
                        "geometric requires 0 < p < 1".into(),
                    ));
                }
            }
            SeverityModel::Degenerate { c } => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter("degenerate requires c >= 0".into()));
                }
            }
            SeverityModel::DiscreteCustomPmf { pmf, tail_tol } => {
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
                        what: "custom severity pmf".into(),
                        tail: (1.0 - sum).abs(),
                        tol: *tail_tol,
                    });
                }
            }
            SeverityModel::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return Err(Error::InvalidParameter(
                        "exponential requires rate > 0".into(),
                    ));
                }
            }
            SeverityModel::Gamma { shape, rate } => {
                if !(*shape > 0.0 && *rate > 0.0) {
                    return Err(Error::InvalidParameter(
                        "gamma requires shape > 0 and rate > 0".into(),
                    ));
                }
            }
            SeverityModel::CustomCf(custom) => {
                let at_zero = (custom.cf)(0.0);
                if (at_zero - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "custom cf must satisfy cf(0) = 1, got {at_zero}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            SeverityModel::DiscretePoisson { gamma } => format!("Poisson({gamma})"),
            SeverityModel::Geometric { p } => format!("Geometric({p})"),
            SeverityModel::Degenerate { c } => format!("Degenerate({c})"),
            SeverityModel::DiscreteCustomPmf { pmf, .. } => {
                format!("CustomPmf(l_max={})", pmf.len() - 1)
            }
            SeverityModel::Exponential { rate } => format!("Exponential({rate})"),
            SeverityModel::Gamma { shape, rate } => format!("Gamma({shape}, {rate})"),
            SeverityModel::CustomCf(_) => "CustomCf".into(),
        }
    }

    /// Discrete = supported on {0, 1, 2, ...}.
    pub fn is_discrete(&self) -> bool {
        match self {
            SeverityModel::DiscretePoisson { .. }
            | SeverityModel::Geometric { .. }
            | SeverityModel::DiscreteCustomPmf { .. } => true,
            SeverityModel::Degenerate { c } => c.fract() == 0.0,
            _ => false,
        }
    }

    fn require_discrete(&self) -> Result<()> {
        if self.is_discrete() {
            Ok(())
        } else {
            Err(Error::NotDiscrete(self.describe()))
        }
    }

    /// P(X = k) for discrete models.
    pub fn pmf(&self, k: usize) -> Result<f64> {
        self.require_discrete()?;
        Ok(match self {
            SeverityModel::DiscretePoisson { gamma } => {
                let mut q = (-gamma).exp();
                for m in 1..=k {
                    q *= gamma / m as f64;
                }
                q
            }
            SeverityModel::Geometric { p } => p * (1.0 - p).powi(k as i32),
            SeverityModel::Degenerate { c } => {
                if k as f64 == *c {
                    1.0
                } else {
                    0.0
                }
            }
            SeverityModel::DiscreteCustomPmf { pmf, .. } => pmf.get(k).copied().unwrap_or(0.0),
            _ => unreachable!(),
        })
    }

    /// pmf table on [0, l_max] for discrete models.
    pub fn pmf_table(&self, l_max: usize) -> Result<Vec<f64>> {
        self.require_discrete()?;
        Ok(match self {
            SeverityModel::DiscretePoisson { gamma } => {
                let mut out = Vec::with_capacity(l_max + 1);
                out.push((-gamma).exp());
                for k in 1..=l_max {
                    let prev = out[k - 1];
                    out.push(prev * gamma / k as f64);
                }
                out
            }
            SeverityModel::Geometric { p } => {
                let q = 1.0 - p;
                let mut out = Vec::with_capacity(l_max + 1);
                out.push(*p);
                for k in 1..=l_max {
                    let prev = out[k - 1];
                    out.push(prev * q);
                }
                out
            }
            _ => (0..=l_max).map(|k| self.pmf(k).unwrap()).collect(),
        })
    }

    /// P(X > n) for discrete models.
    pub fn tail_mass(&self, n: usize) -> Result<f64> {
        self.require_discrete()?;
        Ok(match self {
            SeverityModel::Geometric { p } => (1.0 - p).powi(n as i32 + 1),
            SeverityModel::Degenerate { c } => {
                if (n as f64) < *c {
                    1.0
                } else {
                    0.0
                }
            }
            SeverityModel::DiscreteCustomPmf { pmf, .. } => {
                pmf.iter().skip(n + 1).sum::<f64>()
                    + (1.0 - pmf.iter().sum::<f64>()).max(0.0)
            }
            SeverityModel::DiscretePoisson { .. } => {
                let mut term = self.pmf(n + 1)?;
                let mut total = term;
                let mut m = n + 1;
                while term > total * 1e-18 + 1e-320 && m < n + 100_000 {
                    m += 1;
                    term = self.pmf(m)?;
                    total += term;
                }
                total
            }
            _ => unreachable!(),
        })
    }

    /// G_X(z) on the closed unit disk (discrete models).
    pub fn pgf(&self, z: Complex64) -> Result<Complex64> {
        self.require_discrete()?;
        Ok(match self {
            SeverityModel::DiscretePoisson { gamma } => (gamma * (z - 1.0)).exp(),
            SeverityModel::Geometric { p } => {
                let q = 1.0 - p;
                p / (Complex64::new(1.0, 0.0) - q * z)
            }
            SeverityModel::Degenerate { c } => z.powu(*c as u32),
            SeverityModel::DiscreteCustomPmf { pmf, .. } => {
                // Horner evaluation.
                pmf.iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &f| acc * z + f)
            }
            _ => unreachable!(),
        })
    }

    /// G_X(e^{iu}) - 1, assembled without cancellation at small |u|. This is
    /// the quantity the count pgf composes with on the unit circle.
    pub fn circle_delta(&self, u: f64) -> Result<Complex64> {
        self.require_discrete()?;
        Ok(match self {
            SeverityModel::DiscretePoisson { gamma } => exp_m1(gamma * expi_m1(u)),
            SeverityModel::Geometric { p } => {
                let q = 1.0 - p;
                let s = (0.5 * u).sin();
                // 1 - q e^{iu} = p + 2q sin^2(u/2) - i q sin(u)
                let denom = Complex64::new(p + 2.0 * q * s * s, -q * u.sin());
                q * expi_m1(u) / denom
            }
            SeverityModel::Degenerate { c } => expi_m1(c * u),
            SeverityModel::DiscreteCustomPmf { pmf, .. } => pmf
                .iter()
                .enumerate()
                .map(|(k, &f)| f * expi_m1(k as f64 * u))
                .sum(),
            _ => unreachable!(),
        })
    }

    /// j-th pgf derivative G_X^{(j)}(z) for discrete models.
    pub fn pgf_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        self.require_discrete()?;
        if j == 0 {
            return self.pgf(z);
        }
        Ok(match self {
            SeverityModel::DiscretePoisson { gamma } => {
                gamma.powi(j as i32) * (gamma * (z - 1.0)).exp()
            }
            SeverityModel::Geometric { p } => {
                let q = 1.0 - p;
                let denom = Complex64::new(1.0, 0.0) - q * z;
                let mut fact = 1.0;
                for m in 2..=j {
                    fact *= m as f64;
                }
                fact * p * q.powi(j as i32) / denom.powu(j as u32 + 1)
            }
            SeverityModel::Degenerate { c } => {
                let ci = *c as usize;
                if j > ci {
                    Complex64::new(0.0, 0.0)
                } else {
                    falling(*c, j) * z.powu((ci - j) as u32)
                }
            }
            SeverityModel::DiscreteCustomPmf { .. } => {
                self.certify_order(j)?;
                let SeverityModel::DiscreteCustomPmf { pmf, .. } = self else {
                    unreachable!()
                };
                pmf.iter()
                    .enumerate()
                    .skip(j)
                    .map(|(k, &f)| falling(k as f64, j) * f * z.powu((k - j) as u32))
                    .sum()
            }
            _ => unreachable!(),
        })
    }

    /// Characteristic function phi_X(u) = E[e^{iuX}], defined for every model
    /// (discrete laws go through the pgf on the unit circle).
    pub fn cf(&self, u: f64) -> Complex64 {
        match self {
            SeverityModel::Exponential { rate } => rate / Complex64::new(*rate, -u),
            SeverityModel::Gamma { shape, rate } => {
                (-shape * ln_1p(Complex64::new(0.0, -u / rate))).exp()
            }
            SeverityModel::Degenerate { c } => Complex64::from_polar(1.0, c * u),
            SeverityModel::CustomCf(custom) => (custom.cf)(u),
            _ => self.circle_delta(u).expect("discrete") + 1.0,
        }
    }

    /// phi_X(u) - 1 without cancellation at small |u|.
    pub fn cf_m1(&self, u: f64) -> Complex64 {
        match self {
            SeverityModel::Exponential { rate } => {
                Complex64::new(0.0, u) / Complex64::new(*rate, -u)
            }
            SeverityModel::Gamma { shape, rate } => {
                exp_m1(-shape * ln_1p(Complex64::new(0.0, -u / rate)))
            }
            SeverityModel::Degenerate { c } => expi_m1(c * u),
            SeverityModel::CustomCf(custom) => (custom.cf)(u) - 1.0,
            _ => self.circle_delta(u).expect("discrete"),
        }
    }

    /// k-th derivative of the characteristic function (continuous models and
    /// point masses). A custom cf without a derivative provider falls back to
    /// fourth-order central differences; see [`SeverityModel::cf_deriv_is_approximate`].
    pub fn cf_deriv(&self, k: usize, u: f64) -> Result<Complex64> {
        if k == 0 {
            return Ok(self.cf(u));
        }
        match self {
            SeverityModel::Exponential { rate } => {
                let mut fact = 1.0;
                for m in 2..=k {
                    fact *= m as f64;
                }
                let denom = Complex64::new(*rate, -u).powu(k as u32 + 1);
                Ok(fact * Complex64::new(0.0, 1.0).powu(k as u32) * rate / denom)
            }
            SeverityModel::Gamma { shape, rate } => {
                let base = Complex64::new(1.0, -u / rate);
                let ik = Complex64::new(0.0, 1.0 / rate).powu(k as u32);
                Ok(rising(*shape, k) * ik * (-(shape + k as f64) * ln_1p(base - 1.0)).exp())
            }
            SeverityModel::Degenerate { c } => {
                Ok(Complex64::new(0.0, *c).powu(k as u32) * Complex64::from_polar(1.0, c * u))
            }
            SeverityModel::CustomCf(custom) => {
                if let Some(deriv) = &custom.cf_deriv {
                    Ok(deriv(k, u))
                } else {
                    Ok(self.fd_cf_deriv(k, u))
                }
            }
            _ => Err(Error::NotContinuous(self.describe())),
        }
    }

    /// True when `cf_deriv` is a finite-difference approximation rather than
    /// an analytic evaluation.
    pub fn cf_deriv_is_approximate(&self) -> bool {
        matches!(self, SeverityModel::CustomCf(c) if c.cf_deriv.is_none())
    }

    /// Fourth-order central differences, step from machine precision
    /// (h ~ eps^{1/5} balances truncation against rounding for the 5-point
    /// first-derivative stencil), recursed for higher orders.
    fn fd_cf_deriv(&self, k: usize, u: f64) -> Complex64 {
        let h = f64::EPSILON.powf(0.2) * (1.0 + u.abs());
        let f = |order: usize, x: f64| -> Complex64 {
            if order == 0 {
                self.cf(x)
            } else {
                self.fd_cf_deriv(order, x)
            }
        };
        (-f(k - 1, u + 2.0 * h) + 8.0 * f(k - 1, u + h) - 8.0 * f(k - 1, u - h)
            + f(k - 1, u - 2.0 * h))
            / (12.0 * h)
    }

    /// Raw moment E[X^k].
    pub fn moment(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        match self {
            SeverityModel::DiscretePoisson { gamma } => {
                let mut total = 0.0;
                for j in 1..=k {
                    total += crate::transform::stirling2_f64(k, j) * gamma.powi(j as i32);
                }
                Ok(total)
            }
            SeverityModel::Geometric { p } => {
                let ratio = (1.0 - p) / p;
                let mut total = 0.0;
                let mut fact = 1.0;
                for j in 1..=k {
                    fact *= j as f64;
                    total += crate::transform::stirling2_f64(k, j) * fact * ratio.powi(j as i32);
                }
                Ok(total)
            }
            SeverityModel::Degenerate { c } => Ok(c.powi(k as i32)),
            SeverityModel::DiscreteCustomPmf { .. } => {
                self.certify_order(k)?;
                let SeverityModel::DiscreteCustomPmf { pmf, .. } = self else {
                    unreachable!()
                };
                Ok(pmf
                    .iter()
                    .enumerate()
                    .map(|(x, &f)| (x as f64).powi(k as i32) * f)
                    .sum())
            }
            SeverityModel::Exponential { rate } => {
                let mut fact = 1.0;
                for m in 2..=k {
                    fact *= m as f64;
                }
                Ok(fact / rate.powi(k as i32))
            }
            SeverityModel::Gamma { shape, rate } => Ok(rising(*shape, k) / rate.powi(k as i32)),
            SeverityModel::CustomCf(custom) => {
                if k <= custom.moments.len() {
                    return Ok(custom.moments[k - 1]);
                }
                if custom.cf_deriv.is_some() {
                    let d = self.cf_deriv(k, 0.0)?;
                    return Ok((d / Complex64::new(0.0, 1.0).powu(k as u32)).re);
                }
                Err(Error::UnboundedMoment {
                    model: self.describe(),
                    order: k,
                    reason: "no moments or derivative provider supplied".into(),
                })
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    pub fn decay_hint(&self) -> Option<DecayHint> {
        match self {
            SeverityModel::Exponential { rate } => Some(DecayHint::PowerLaw {
                scale: *rate,
                power: 1.0,
            }),
            SeverityModel::Gamma { shape, rate } => Some(DecayHint::PowerLaw {
                scale: *rate,
                power: *shape,
            }),
            SeverityModel::CustomCf(c) => c.decay,
            _ => None,
        }
    }

    fn certify_order(&self, j: usize) -> Result<()> {
        if let SeverityModel::DiscreteCustomPmf { pmf, .. } = self {
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn geometric_pgf_closed_form() {
        let p = 0.25;
        let m = SeverityModel::geometric(p).unwrap();
        let q = 1.0 - p;
        for &z in &[
            Complex64::new(0.3, 0.0),
            Complex64::new(-0.8, 0.1),
            Complex64::new(0.0, 0.99),
        ] {
            let expected = p / (Complex64::new(1.0, 0.0) - q * z);
            let got = m.pgf(z).unwrap();
            assert!((got - expected).norm() < 1e-14);
            // Truncated series cross-check.
            let series: Complex64 = (0..300)
                .map(|k| p * q.powi(k as i32) * z.powu(k))
                .sum();
            assert!((got - series).norm() < 1e-12);
        }
    }

    #[test]
    fn pgf_deriv_anchors() {
        let deg = SeverityModel::degenerate(1.0).unwrap();
        let z = Complex64::new(0.37, -0.2);
        assert!((deg.pgf_deriv(1, z).unwrap() - 1.0).norm() < 1e-15);

        let pois = SeverityModel::discrete_poisson(2.5).unwrap();
        let d = pois.pgf_deriv(1, Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(d.re, 2.5, max_relative = 1e-14);
    }

    #[test]
    fn cf_anchors() {
        let mu = 1.7;
        let exp = SeverityModel::exponential(mu).unwrap();
        assert!((exp.cf(0.0) - 1.0).norm() < 1e-15);
        let d1 = exp.cf_deriv(1, 0.0).unwrap();
        assert!((d1 - Complex64::new(0.0, 1.0 / mu)).norm() < 1e-15);

        let gam = SeverityModel::gamma(2.0, 1.0).unwrap();
        let d1 = gam.cf_deriv(1, 0.0).unwrap();
        assert!((d1 - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn cf_conjugate_symmetry() {
        let models = vec![
            SeverityModel::discrete_poisson(3.0).unwrap(),
            SeverityModel::geometric(0.4).unwrap(),
            SeverityModel::degenerate(2.0).unwrap(),
            SeverityModel::exponential(1.3).unwrap(),
            SeverityModel::gamma(2.5, 0.7).unwrap(),
        ];
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for m in &models {
            for _ in 0..10 {
                let u = rng.random_range(-20.0..20.0);
                let diff = m.cf(-u) - m.cf(u).conj();
                assert!(diff.norm() < 1e-13, "{} at u={}", m.describe(), u);
                assert!(m.cf(u).norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn circle_delta_consistency() {
        let models = vec![
            SeverityModel::discrete_poisson(10.0).unwrap(),
            SeverityModel::geometric(0.25).unwrap(),
            SeverityModel::degenerate(3.0).unwrap(),
            SeverityModel::custom_pmf(vec![0.2, 0.5, 0.3], 1e-14).unwrap(),
        ];
        for m in &models {
            for &u in &[0.7, -2.2, 3.14] {
                let z = Complex64::from_polar(1.0, u);
                let direct = m.pgf(z).unwrap() - 1.0;
                let delta = m.circle_delta(u).unwrap();
                assert!((direct - delta).norm() < 1e-13, "{}", m.describe());
            }
            // At u -> 0 the leading term is i u E[X]; the naive route has no
            // digits left here.
            let u = 1e-9;
            let mean = m.mean().unwrap();
            let delta = m.circle_delta(u).unwrap();
            assert_relative_eq!(delta.im, u * mean, max_relative = 1e-9);
        }
    }

    #[test]
    fn moments() {
        let geo = SeverityModel::geometric(0.25).unwrap();
        assert_relative_eq!(geo.mean().unwrap(), 3.0, max_relative = 1e-14);

        let pois = SeverityModel::discrete_poisson(4.0).unwrap();
        assert_relative_eq!(pois.moment(2).unwrap(), 4.0 + 16.0, max_relative = 1e-14);

        let gam = SeverityModel::gamma(2.0, 1.0).unwrap();
        assert_relative_eq!(gam.moment(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(gam.moment(2).unwrap(), 6.0, max_relative = 1e-14);

        // Cross-check geometric second moment by direct summation.
        let direct: f64 = (0..2000)
            .map(|k| (k * k) as f64 * 0.25 * 0.75f64.powi(k as i32))
            .sum();
        assert_relative_eq!(geo.moment(2).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn custom_cf_finite_differences() {
        let mu = 1.0;
        let custom = SeverityModel::custom_cf(CustomCf::new(move |u| {
            mu / Complex64::new(mu, -u)
        }))
        .unwrap();
        assert!(custom.cf_deriv_is_approximate());
        let analytic = SeverityModel::exponential(mu).unwrap();
        for &u in &[0.0, 0.5, 2.0] {
            let fd = custom.cf_deriv(1, u).unwrap();
            let exact = analytic.cf_deriv(1, u).unwrap();
            assert!((fd - exact).norm() < 1e-9, "u={u}: {fd} vs {exact}");
        }
        // Without moments or a derivative provider, high-order moments are
        // refused rather than silently approximated.
        assert!(custom.moment(1).is_err());
    }

    #[test]
    fn degenerate_discreteness() {
        assert!(SeverityModel::degenerate(2.0).unwrap().is_discrete());
        let half = SeverityModel::degenerate(1.5).unwrap();
        assert!(!half.is_discrete());
        assert!(half.pmf(1).is_err());
        assert!((half.cf(2.0) - Complex64::from_polar(1.0, 3.0)).norm() < 1e-15);
    }
}
