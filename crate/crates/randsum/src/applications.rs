//! End-to-end increment predictors.
//!
//! Shot noise: M(t) = sum_{i <= N(t)} L_i(t - T_i) with Poisson arrivals and
//! iid compound-Poisson payout streams L. The best mean-square prediction of
//! the increment M(t, t+s] given M(t) splits into a new-arrivals coefficient
//! plus E[L_1(s)] * E[N(t) | M(t)]; the conditional count comes from the
//! Panjer route with the component law P(L(t-U) = l) obtained by Fourier
//! inversion of its uniform-mixture characteristic function.
//!
//! Compound Polya: Z(t) driven by a mixed Poisson count with Gamma mixing.
//! The increment predictor reduces to an affine function of
//! E[Nbar(t) | Z(t)], which is computed through the transform route since the
//! mixed Poisson count is not Panjer-recursable.

use num_complex::Complex64;

use crate::cx::exp_m1;
use crate::distributions::{CountModel, Intensity, SeverityModel};
use crate::error::{Error, Result};
use crate::panjer;
use crate::table::{PredictionCurve, RestrictedMomentTable, Target, DEFAULT_MASS_FLOOR};
use crate::transform::{
    gf_count_moment, invert_unit_circle, InversionConfig, UnitCircleFunction,
};

/// Poisson shot-noise model with compound-Poisson payout streams:
/// arrivals at rate `lambda`, each launching L(t) = sum_{j <= N_0(t)} Y_j
/// with N_0 Poisson of rate `gamma` and iid jumps Y ~ `jump_law`.
#[derive(Debug, Clone)]
pub struct ShotNoiseSpec {
    pub lambda: f64,
    pub gamma: f64,
    pub jump_law: SeverityModel,
    /// Observation horizon.
    pub t: f64,
    /// Prediction horizon.
    pub s: f64,
}

impl ShotNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.gamma > 0.0 && self.t > 0.0 && self.s > 0.0) {
            return Err(Error::InvalidParameter(
                "shot-noise spec requires lambda, gamma, t, s > 0".into(),
            ));
        }
        self.jump_law.validate()
    }
}

/// (e^zeta - 1)/zeta with the removable singularity at zeta = 0 expanded in
/// series once |zeta| is small.
fn uniform_mixture_kernel(zeta: Complex64) -> Complex64 {
    if zeta.norm() < 1e-4 {
        // 1 + z/2 + z^2/6 + z^3/24; the next term is O(|z|^4) < 1e-17.
        let z = zeta;
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        exp_m1(zeta) / zeta
    }
}

/// Characteristic function of the component X_1 = L(t - U), U uniform on
/// (0, t): averaging e^{gamma w (phi_Y(u) - 1)} over w in (0, t) gives
/// (e^{gamma t (phi_Y(u)-1)} - 1) / (gamma t (phi_Y(u)-1)).
pub fn shotnoise_component_cf(spec: &ShotNoiseSpec, u: f64) -> Complex64 {
    let zeta = spec.gamma * spec.t * spec.jump_law.cf_m1(u);
    uniform_mixture_kernel(zeta)
}

/// The published display form
/// (e^{gamma (t-1)(phi_Y - 1)} - e^{gamma t (phi_Y - 1)}) / (gamma (1 - phi_Y)),
/// which coincides with [`shotnoise_component_cf`] at t = 1 (the case the
/// figures use). Kept as a comparison mode.
pub fn shotnoise_component_cf_display(spec: &ShotNoiseSpec, u: f64) -> Complex64 {
    let delta = spec.jump_law.cf_m1(u);
    let num = (spec.gamma * (spec.t - 1.0) * delta).exp() - (spec.gamma * spec.t * delta).exp();
    num / (-spec.gamma * delta)
}

/// Pgf of the component law at complex z (valid on the closed unit disk);
/// z = 0 gives P(X_1 = 0), the recursion seed.
pub fn shotnoise_component_pgf(spec: &ShotNoiseSpec, z: Complex64) -> Result<Complex64> {
    let gy = spec.jump_law.pgf(z)?;
    Ok(uniform_mixture_kernel(spec.gamma * spec.t * (gy - 1.0)))
}

/// Moments of the component X_1 = L(t - U): E[X] = gamma (t/2) E[Y],
/// Var X = gamma (t/2) E[Y^2] + (gamma E[Y])^2 t^2 / 12.
fn component_mean_sd(spec: &ShotNoiseSpec) -> Result<(f64, f64)> {
    let ey = spec.jump_law.moment(1)?;
    let ey2 = spec.jump_law.moment(2)?;
    let mean = spec.gamma * spec.t / 2.0 * ey;
    let var = spec.gamma * spec.t / 2.0 * ey2
        + (spec.gamma * ey).powi(2) * spec.t * spec.t / 12.0;
    Ok((mean, var.max(0.0).sqrt()))
}

/// Law of X_1 = L(t - U) on [0, l_max] by unit-circle inversion of the
/// component cf; requires an integer-valued jump law. When `ell_max` is
/// `None` the support is grown until the captured mass is within 1e-9 of 1.
pub fn shotnoise_component_pmf(
    spec: &ShotNoiseSpec,
    ell_max: Option<usize>,
    cfg: &InversionConfig,
) -> Result<RestrictedMomentTable> {
    spec.validate()?;
    if !spec.jump_law.is_discrete() {
        return Err(Error::NotDiscrete(spec.jump_law.describe()));
    }
    let spec_c = spec.clone();
    let f = UnitCircleFunction::new(
        format!(
            "component cf [gamma={}, t={}, jumps {}]",
            spec.gamma,
            spec.t,
            spec.jump_law.describe()
        ),
        0,
        Target::CountMoment,
        1.0,
        move |u| shotnoise_component_cf(&spec_c, u),
    );
    match ell_max {
        Some(l) => invert_unit_circle(&f, l, cfg),
        None => {
            let (mean, sd) = component_mean_sd(spec)?;
            let mut l = (mean + 12.0 * sd).ceil() as usize + 8;
            loop {
                let table = invert_unit_circle(&f, l, cfg)?;
                if table.diagnostics.mass_deficit < 1e-9 || l > 4_000_000 {
                    return Ok(table);
                }
                l *= 2;
            }
        }
    }
}

/// Everything the shot-noise predictor produces: the increment curve, the
/// inner conditional-count curve and the assembled coefficients.
#[derive(Debug, Clone)]
pub struct ShotNoisePrediction {
    /// E[M(t, t+s] | M(t) = l].
    pub curve: PredictionCurve,
    /// E[N(t) | M(t) = l].
    pub count_conditional: PredictionCurve,
    /// E[N(s)] E[L_1(t+s-U)] = lambda s * gamma (s + t/2) E[Y].
    pub new_arrival_coeff: f64,
    /// E[L_1(s)] = gamma s E[Y].
    pub running_coeff: f64,
    pub component_pmf: RestrictedMomentTable,
    /// P(M(t) = l).
    pub aggregate: RestrictedMomentTable,
}

/// Increment prediction E[M(t,t+s] | M(t) = l] for l in [0, ell_max]:
/// new-arrival coefficient plus E[L_1(s)] times the conditional count, the
/// latter from the Panjer route with Poisson(lambda t) count and the
/// component pmf as severity.
pub fn shotnoise_predict(
    spec: &ShotNoiseSpec,
    ell_max: usize,
    cfg: &InversionConfig,
    mass_floor: f64,
) -> Result<ShotNoisePrediction> {
    spec.validate()?;
    let component = shotnoise_component_pmf(spec, None, cfg)?;
    let deficit = component.diagnostics.mass_deficit;
    let severity = SeverityModel::custom_pmf(
        component.values.clone(),
        (deficit * 4.0).max(1e-9),
    )?;
    let count = CountModel::poisson(spec.lambda * spec.t)?;
    let tables = panjer::restricted_count_moments(&count, &severity, 1, ell_max)?;
    let count_conditional = panjer::to_prediction_curve(&tables[1], &tables[0], mass_floor)?;

    let ey = spec.jump_law.moment(1)?;
    let new_arrival_coeff = spec.lambda * spec.s * spec.gamma * (spec.s + spec.t / 2.0) * ey;
    let running_coeff = spec.gamma * spec.s * ey;
    let entries = count_conditional
        .entries
        .iter()
        .map(|e| crate::table::CurveEntry {
            ell: e.ell,
            value: if e.defined {
                new_arrival_coeff + running_coeff * e.value
            } else {
                0.0
            },
            defined: e.defined,
        })
        .collect();
    let mut it = tables.into_iter();
    let aggregate = it.next().expect("order 0 table");
    Ok(ShotNoisePrediction {
        curve: PredictionCurve {
            k: 1,
            mass_floor,
            entries,
        },
        count_conditional,
        new_arrival_coeff,
        running_coeff,
        component_pmf: component,
        aggregate,
    })
}

/// Compound Polya model: Z(t) = sum_{j <= Nbar(t)} X_j with
/// Nbar(t) = pi(theta Lambda(t)), theta ~ Gamma(alpha, beta).
#[derive(Debug, Clone)]
pub struct PolyaSpec {
    pub alpha: f64,
    pub beta: f64,
    pub intensity: Intensity,
    pub severity: SeverityModel,
    pub t: f64,
    pub s: f64,
}

impl PolyaSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.t > 0.0 && self.s >= 0.0) {
            return Err(Error::InvalidParameter(
                "Polya spec requires alpha, beta, t > 0 and s >= 0".into(),
            ));
        }
        self.intensity.validate()?;
        self.severity.validate()
    }

    pub fn count_model(&self) -> Result<CountModel> {
        CountModel::mixed_poisson_gamma(self.alpha, self.beta, self.intensity, self.t)
    }
}

/// E[Nbar(t, t+s] | Nbar(t) = m] = Lambda(t, t+s] (alpha + m)/(Lambda(t) + beta).
pub fn polya_count_increment(spec: &PolyaSpec, m: usize) -> f64 {
    spec.intensity.increment(spec.t, spec.s) * (spec.alpha + m as f64)
        / (spec.intensity.value(spec.t) + spec.beta)
}

#[derive(Debug, Clone)]
pub struct PolyaPrediction {
    /// E[Z(t, t+s] | Z(t) = l].
    pub curve: PredictionCurve,
    /// E[Nbar(t) | Z(t) = l].
    pub inner: PredictionCurve,
    /// E[X_1] Lambda(t, t+s] / (Lambda(t) + beta).
    pub prefactor: f64,
    /// P(Z(t) = l).
    pub mass: RestrictedMomentTable,
    pub restricted: RestrictedMomentTable,
}

/// Increment prediction E[Z(t,t+s] | Z(t) = l] =
/// prefactor * (alpha + E[Nbar(t) | Z(t) = l]), the inner conditional by
/// unit-circle inversion of G_{m_1} and G_{m_0} built from the mixed-Poisson
/// pgf derivatives.
pub fn polya_predict(
    spec: &PolyaSpec,
    ell_max: usize,
    cfg: &InversionConfig,
    mass_floor: f64,
) -> Result<PolyaPrediction> {
    spec.validate()?;
    if !spec.severity.is_discrete() {
        return Err(Error::NotDiscrete(spec.severity.describe()));
    }
    let count = spec.count_model()?;

    // Widen the working tables beyond the requested range so the mass
    // diagnostics reflect the full law of Z(t).
    let mean_n = count.moment(1)?;
    let var_n = count.moment(2)? - mean_n * mean_n;
    let mean_x = spec.severity.moment(1)?;
    let var_x = spec.severity.moment(2)? - mean_x * mean_x;
    let mean_z = mean_n * mean_x;
    let sd_z = (var_x * mean_n + mean_x * mean_x * var_n).max(0.0).sqrt();
    let working = ell_max.max((mean_z + 30.0 * sd_z).ceil() as usize + 8);

    let g0 = gf_count_moment(&count, &spec.severity, 0)?;
    let g1 = gf_count_moment(&count, &spec.severity, 1)?;
    let mass_full = invert_unit_circle(&g0, working, cfg)?;
    let restricted_full = invert_unit_circle(&g1, working, cfg)?;
    let inner_full = panjer::to_prediction_curve(&restricted_full, &mass_full, mass_floor)?;

    let prefactor = mean_x * spec.intensity.increment(spec.t, spec.s)
        / (spec.intensity.value(spec.t) + spec.beta);
    let entries: Vec<_> = inner_full
        .entries
        .iter()
        .take(ell_max + 1)
        .map(|e| crate::table::CurveEntry {
            ell: e.ell,
            value: if e.defined {
                prefactor * (spec.alpha + e.value)
            } else {
                0.0
            },
            defined: e.defined,
        })
        .collect();
    let inner = PredictionCurve {
        k: 1,
        mass_floor,
        entries: inner_full.entries.iter().take(ell_max + 1).cloned().collect(),
    };
    Ok(PolyaPrediction {
        curve: PredictionCurve {
            k: 1,
            mass_floor,
            entries,
        },
        inner,
        prefactor,
        mass: mass_full,
        restricted: restricted_full,
    })
}

/// Default mass floor re-exported for predictor callers.
pub const PREDICT_MASS_FLOOR: f64 = DEFAULT_MASS_FLOOR;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn desk_spec() -> ShotNoiseSpec {
        ShotNoiseSpec {
            lambda: 30.0,
            gamma: 20.0,
            jump_law: SeverityModel::discrete_poisson(5.0).unwrap(),
            t: 1.0,
            s: 1.0,
        }
    }

    #[test]
    fn component_cf_normalization() {
        let spec = desk_spec();
        let v = shotnoise_component_cf(&spec, 0.0);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for &u in &[0.3, -1.9, 2.4] {
            assert!(shotnoise_component_cf(&spec, u).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn component_cf_matches_display_at_unit_horizon() {
        let mut spec = desk_spec();
        spec.t = 1.0;
        for &u in &[0.05, 0.7, -1.3, 3.0] {
            let a = shotnoise_component_cf(&spec, u);
            let b = shotnoise_component_cf_display(&spec, u);
            assert!((a - b).norm() < 1e-12, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn component_pmf_small_rate_expansion() {
        // Degenerate jumps, gamma t small: P(X=0) = (1 - e^{-gt})/(gt)
        // = 1 - gt/2 + O((gt)^2).
        let spec = ShotNoiseSpec {
            lambda: 1.0,
            gamma: 1e-3,
            jump_law: SeverityModel::degenerate(1.0).unwrap(),
            t: 1.0,
            s: 1.0,
        };
        let table =
            shotnoise_component_pmf(&spec, Some(16), &InversionConfig::default()).unwrap();
        let gt: f64 = 1e-3;
        assert_abs_diff_eq!(table.values[0], 1.0 - gt / 2.0, epsilon = gt * gt / 5.0);
        assert!(table.diagnostics.mass_deficit < 1e-8);
    }

    #[test]
    fn component_pmf_mass_and_seed() {
        let spec = desk_spec();
        let table = shotnoise_component_pmf(&spec, None, &InversionConfig::default()).unwrap();
        assert!(table.diagnostics.mass_deficit < 1e-8);
        let p0 = shotnoise_component_pgf(&spec, Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(table.values[0], p0.re, max_relative = 1e-9);
    }

    #[test]
    fn predictor_coefficients() {
        // E[L_1(t+s-U)] = gamma (s + t/2) E[Y]: 2 * 1.5 * 3 = 9.
        let spec = ShotNoiseSpec {
            lambda: 1.0,
            gamma: 2.0,
            jump_law: SeverityModel::degenerate(3.0).unwrap(),
            t: 1.0,
            s: 1.0,
        };
        let ey = spec.jump_law.moment(1).unwrap();
        let per_arrival = spec.gamma * (spec.s + spec.t / 2.0) * ey;
        assert_abs_diff_eq!(per_arrival, 9.0, epsilon = 1e-14);
    }

    #[test]
    fn predictor_vanishes_with_horizon() {
        let mut spec = desk_spec();
        spec.s = 1e-13;
        let pred = shotnoise_predict(&spec, 200, &InversionConfig::default(), 1e-12).unwrap();
        for e in pred.curve.entries.iter().filter(|e| e.defined) {
            assert!(e.value.abs() < 1e-9);
        }
    }

    #[test]
    fn polya_count_increment_anchors() {
        let spec = PolyaSpec {
            alpha: 7.0,
            beta: 1.0,
            intensity: Intensity::Linear { rate: 1.0 },
            severity: SeverityModel::geometric(0.25).unwrap(),
            t: 1.0,
            s: 1.0,
        };
        assert_abs_diff_eq!(polya_count_increment(&spec, 0), 3.5, epsilon = 1e-14);
        let mut zero_s = spec.clone();
        zero_s.s = 0.0;
        assert_eq!(polya_count_increment(&zero_s, 5), 0.0);

        let unit = PolyaSpec {
            alpha: 1.0,
            beta: 1.0,
            intensity: Intensity::Linear { rate: 1.0 },
            severity: SeverityModel::geometric(0.5).unwrap(),
            t: 1.0,
            s: 1.0,
        };
        assert_abs_diff_eq!(polya_count_increment(&unit, 3), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polya_degenerate_severity_is_affine() {
        // Z = Nbar, so E[Nbar | Z = l] = l and the curve is exactly affine.
        let spec = PolyaSpec {
            alpha: 2.0,
            beta: 1.5,
            intensity: Intensity::Linear { rate: 1.0 },
            severity: SeverityModel::degenerate(1.0).unwrap(),
            t: 1.0,
            s: 2.0,
        };
        let pred = polya_predict(&spec, 40, &InversionConfig::default(), 1e-12).unwrap();
        for e in pred.curve.entries.iter().filter(|e| e.defined) {
            let expected = pred.prefactor * (spec.alpha + e.ell as f64);
            assert_abs_diff_eq!(e.value, expected, epsilon = 1e-10 * (1.0 + expected));
        }
    }

    #[test]
    fn polya_prefactor_matches_published_parameters() {
        // alpha=7, beta=1, Lambda(t)=t, Geo(1/4), s=t=1: prefactor
        // E[X] * Lambda(1,2] / (Lambda(1)+1) = 3 * 1/2 = 1.5.
        let spec = PolyaSpec {
            alpha: 7.0,
            beta: 1.0,
            intensity: Intensity::Linear { rate: 1.0 },
            severity: SeverityModel::geometric(0.25).unwrap(),
            t: 1.0,
            s: 1.0,
        };
        let pred = polya_predict(&spec, 30, &InversionConfig::default(), 1e-12).unwrap();
        assert_abs_diff_eq!(pred.prefactor, 1.5, epsilon = 1e-14);
        // Curve = prefactor * (7 + inner).
        for (c, i) in pred.curve.entries.iter().zip(&pred.inner.entries) {
            if c.defined {
                assert_abs_diff_eq!(c.value, 1.5 * (7.0 + i.value), epsilon = 1e-10);
            }
        }
    }
}
