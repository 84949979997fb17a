//! Generating functions of restricted moments on the unit circle and their
//! numerical inversion — the route that works for arbitrary count laws.
//!
//! The count-moment generating function composes severity pgf powers into
//! count pgf derivatives through Stirling numbers of the second kind; the
//! component-moment variant multiplies E[X_1^k u^{X_1}] by the pgf of
//! S_{N-1}. Coefficients come back through an M-point trapezoid rule on the
//! circle, which is exact up to aliasing: the inverted entry at l carries the
//! wrap-around mass sum_{r>=1} m(l + rM).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::distributions::{CountModel, SeverityModel};
use crate::error::{Error, Result};
use crate::table::{Diagnostics, Method, RestrictedMomentTable, Target};

/// S(n, k), number of partitions of an n-set into k non-empty blocks.
/// Exact or an overflow error; use [`stirling2_f64`] past the u64 range.
pub fn stirling2(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    // Row-by-row recurrence S(n,k) = k S(n-1,k) + S(n-1,k-1) in u128,
    // narrowing at the end so intermediate rows cannot wrap silently.
    let mut row: Vec<u128> = vec![0; k + 1];
    row[0] = 1;
    for i in 1..=n {
        let hi = k.min(i);
        for j in (1..=hi).rev() {
            let scaled = (j as u128)
                .checked_mul(row[j])
                .ok_or(Error::StirlingOverflow { n, k })?;
            row[j] = scaled
                .checked_add(row[j - 1])
                .ok_or(Error::StirlingOverflow { n, k })?;
        }
        row[0] = if i == 0 { 1 } else { 0 };
    }
    u64::try_from(row[k]).map_err(|_| Error::StirlingOverflow { n, k })
}

/// Floating-point Stirling number, for orders past the exact-u64 range.
pub fn stirling2_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut row: Vec<f64> = vec![0.0; k + 1];
    row[0] = 1.0;
    for i in 1..=n {
        let hi = k.min(i);
        for j in (1..=hi).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

fn stirling_row(k: usize) -> Vec<f64> {
    (0..=k).map(|j| stirling2_f64(k, j)).collect()
}

/// Tilted moment E[N^k s^N] for s in [0, 1], via the falling-factorial
/// identity sum_j S(k,j) s^j G_N^{(j)}(s). Seeds the order-k recursion at
/// l = 0, where m_k(0) = E[N^k P(X_1=0)^N].
pub fn tilted_count_moment(count: &CountModel, k: usize, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "tilt point s={s} outside [0,1]"
        )));
    }
    let delta = Complex64::new(s - 1.0, 0.0);
    if k == 0 {
        return Ok(count.pgf1p(delta).re);
    }
    let mut total = 0.0;
    let mut s_pow = 1.0;
    for j in 1..=k {
        s_pow *= s;
        total += stirling2_f64(k, j) * s_pow * count.pgf1p_deriv(j, delta)?.re;
    }
    Ok(total)
}

/// A generating function restricted to the unit circle, u in (-pi, pi] |->
/// G(e^{iu}), together with the metadata the inverter needs.
#[derive(Clone)]
pub struct UnitCircleFunction {
    pub descriptor: String,
    pub k: usize,
    pub target: Target,
    /// Certified sup bound on |G(e^{iu})|; infinite when no bound is proved.
    pub bound: f64,
    /// Point mass added to the l = 0 coefficient at inversion time.
    pub atom_at_zero: f64,
    eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
}

impl UnitCircleFunction {
    pub fn new(
        descriptor: impl Into<String>,
        k: usize,
        target: Target,
        bound: f64,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        UnitCircleFunction {
            descriptor: descriptor.into(),
            k,
            target,
            bound,
            atom_at_zero: 0.0,
            eval: Arc::new(eval),
        }
    }

    pub fn with_atom(mut self, atom: f64) -> Self {
        self.atom_at_zero = atom;
        self
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        (self.eval)(u)
    }
}

impl std::fmt::Debug for UnitCircleFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitCircleFunction")
            .field("descriptor", &self.descriptor)
            .field("k", &self.k)
            .field("bound", &self.bound)
            .field("atom_at_zero", &self.atom_at_zero)
            .finish()
    }
}

/// Grid parameters for unit-circle inversion.
#[derive(Debug, Clone, Copy)]
pub struct InversionConfig {
    /// Explicit grid size; `None` selects the smallest power of two >=
    /// aliasing_guard * (l_max + 1).
    pub grid_size: Option<usize>,
    pub aliasing_guard: usize,
    pub mass_check_tolerance: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            grid_size: None,
            aliasing_guard: 2,
            mass_check_tolerance: 1e-8,
        }
    }
}

impl InversionConfig {
    pub fn with_grid(m: usize) -> Self {
        InversionConfig {
            grid_size: Some(m),
            ..Default::default()
        }
    }

    pub fn resolve_grid(&self, ell_max: usize) -> Result<usize> {
        if self.aliasing_guard < 2 {
            return Err(Error::ConfigViolation(
                "aliasing_guard must be >= 2".into(),
            ));
        }
        let floor = self.aliasing_guard * (ell_max + 1);
        match self.grid_size {
            Some(m) => {
                if m < floor {
                    Err(Error::ConfigViolation(format!(
                        "grid size {m} < aliasing_guard * (l_max + 1) = {floor}"
                    )))
                } else {
                    Ok(m)
                }
            }
            None => Ok(floor.next_power_of_two()),
        }
    }
}

/// Generating function of m_k(l) = E[N^k; S_N = l]:
/// G_{m_k}(u) = sum_{j=1..k} S(k,j) G_X^j(u) G_N^{(j)}(G_X(u)); k = 0 gives
/// the compound pgf G_N(G_X(u)).
pub fn gf_count_moment(
    count: &CountModel,
    severity: &SeverityModel,
    k: usize,
) -> Result<UnitCircleFunction> {
    count.validate()?;
    severity.validate()?;
    if !severity.is_discrete() {
        return Err(Error::NotDiscrete(severity.describe()));
    }
    // Certify all required orders up front so the evaluator is infallible.
    let bound = count.moment(k)?;
    severity.circle_delta(0.0)?;
    let descriptor = format!(
        "G_m{k} [count {} x severity {}]",
        count.describe(),
        severity.describe()
    );
    let s2 = stirling_row(k);
    let count = count.clone();
    let severity = severity.clone();
    let eval = move |u: f64| -> Complex64 {
        let delta = severity.circle_delta(u).expect("discrete severity");
        if k == 0 {
            return count.pgf1p(delta);
        }
        let gx = delta + 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut gx_pow = Complex64::new(1.0, 0.0);
        for (j, &s) in s2.iter().enumerate().skip(1) {
            gx_pow *= gx;
            acc += s * gx_pow * count.pgf1p_deriv(j, delta).expect("certified order");
        }
        acc
    };
    Ok(UnitCircleFunction::new(
        descriptor,
        k,
        Target::CountMoment,
        bound,
        eval,
    ))
}

/// How the component generating function treats the N = 0 term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentGfMode {
    /// (G_{S_N}(u) - q_0)/G_X(u) plus the exact l = 0 atom q_0 E[X_1^k],
    /// added back at inversion time. The default.
    Corrected,
    /// G_{S_N}(u)/G_X(u) verbatim, which folds the N = 0 term into a
    /// G_X^{-1} factor; kept for reproducing the published displays.
    PaperLiteral,
}

/// Generating function of chi_k(l) = E[X_1^k; S_N = l]:
/// G_{chi_k}(u) = sum_j S(k,j) u^j G_X^{(j)}(u) * G_{S_{N-1}}(u); the mode
/// selects how G_{S_{N-1}} handles N = 0. Evaluations where |G_X| falls
/// under 1e-10 yield NaN, which the inverter reports as a singularity.
pub fn gf_component_moment(
    count: &CountModel,
    severity: &SeverityModel,
    k: usize,
    mode: ComponentGfMode,
) -> Result<UnitCircleFunction> {
    count.validate()?;
    severity.validate()?;
    if !severity.is_discrete() {
        return Err(Error::NotDiscrete(severity.describe()));
    }
    let xk = severity.moment(k)?;
    severity.pgf_deriv(k, Complex64::new(0.5, 0.0))?;
    let q0 = count.pmf(0);
    let descriptor = format!(
        "G_chi{k} [count {} x severity {}, {mode:?}]",
        count.describe(),
        severity.describe()
    );
    let s2 = stirling_row(k);
    let count = count.clone();
    let severity = severity.clone();
    let eval = move |u: f64| -> Complex64 {
        let delta = severity.circle_delta(u).expect("discrete severity");
        let gx = delta + 1.0;
        if gx.norm() < 1e-10 {
            return Complex64::new(f64::NAN, f64::NAN);
        }
        let gsn = count.pgf1p(delta);
        let tail_pgf = match mode {
            ComponentGfMode::Corrected => (gsn - q0) / gx,
            ComponentGfMode::PaperLiteral => gsn / gx,
        };
        if k == 0 {
            // chi_0 restricted to N >= 1 in corrected mode; the atom carries
            // the rest.
            return tail_pgf * gx;
        }
        let z = Complex64::from_polar(1.0, u);
        let mut weighted = Complex64::new(0.0, 0.0);
        let mut z_pow = Complex64::new(1.0, 0.0);
        for (j, &s) in s2.iter().enumerate().skip(1) {
            z_pow *= z;
            weighted += s * z_pow * severity.pgf_deriv(j, z).expect("certified order");
        }
        weighted * tail_pgf
    };
    let f = UnitCircleFunction::new(
        descriptor,
        k,
        Target::ComponentMoment,
        match mode {
            ComponentGfMode::Corrected => xk,
            ComponentGfMode::PaperLiteral => f64::INFINITY,
        },
        eval,
    );
    Ok(match mode {
        ComponentGfMode::Corrected => f.with_atom(q0 * xk),
        ComponentGfMode::PaperLiteral => f,
    })
}

/// M-point trapezoid-rule inversion on the unit circle,
/// m(l) = (1/M) sum_j e^{-2 pi i j l / M} f(u_j), evaluated through a
/// forward FFT. Conjugate symmetry of the grid values is enforced by
/// construction (the underlying sequences are real), halving the number of
/// evaluator calls; the discarded imaginary residue is logged.
pub fn invert_unit_circle(
    f: &UnitCircleFunction,
    ell_max: usize,
    cfg: &InversionConfig,
) -> Result<RestrictedMomentTable> {
    let m = cfg.resolve_grid(ell_max)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let half = m / 2;
    for j in 0..=half {
        let u = if 2 * j <= m {
            2.0 * std::f64::consts::PI * j as f64 / m as f64
        } else {
            unreachable!()
        };
        // Principal branch: j = M/2 corresponds to u = pi exactly.
        let v = f.eval(u);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteEvaluation { u });
        }
        buf[j] = v;
        if j != 0 && j != half {
            buf[m - j] = v.conj();
        }
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let scale = 1.0 / m as f64;
    let mut values = Vec::with_capacity(ell_max + 1);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for coeff in buf.iter().take(ell_max + 1) {
        let re = coeff.re * scale;
        max_re = max_re.max(re.abs());
        max_im = max_im.max((coeff.im * scale).abs());
        values.push(re);
    }
    if f.atom_at_zero != 0.0 {
        values[0] += f.atom_at_zero;
    }

    let mut table = RestrictedMomentTable::new(f.k, f.target, Method::Fourier, values);
    table.diagnostics.grid_size = Some(m);
    table.diagnostics.aliasing_guard = Some(cfg.aliasing_guard);
    table.diagnostics.max_imag_residue = if max_re > 0.0 { max_im / max_re } else { max_im };
    Ok(table)
}

/// Relative-disagreement floor: entries smaller than this fraction of the
/// reference table's maximum are tail noise and are skipped by the scan.
pub const DEFAULT_SCAN_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// First index from which all compared entries agree within rel_tol;
    /// 0 means the tables agree everywhere.
    pub prefix_end: usize,
    pub unstable_prefix: Option<usize>,
    pub rel_tol: f64,
    pub compared: usize,
    pub skipped_below_floor: usize,
    pub max_rel_suffix: f64,
    pub mean_rel_suffix: f64,
}

use serde::Serialize;

/// Scans a Fourier-route table against its recursion-route counterpart and
/// locates the unstable prefix: the longest initial segment still containing
/// relative disagreement above `rel_tol`. Entries below the noise floor on
/// both sides are skipped. Populates `unstable_prefix` on the Fourier table.
pub fn stability_scan(
    fourier: &mut RestrictedMomentTable,
    recursion: &RestrictedMomentTable,
    rel_tol: f64,
) -> Result<StabilityReport> {
    if fourier.values.len() != recursion.values.len() {
        return Err(Error::TableMismatch(format!(
            "table lengths differ: {} vs {}",
            fourier.values.len(),
            recursion.values.len()
        )));
    }
    let table_max = recursion
        .values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let floor = DEFAULT_SCAN_FLOOR_REL * table_max;

    let mut prefix_end = 0usize;
    let mut skipped = 0usize;
    let mut rels: Vec<(usize, f64)> = Vec::with_capacity(fourier.values.len());
    for (l, (&a, &b)) in fourier.values.iter().zip(&recursion.values).enumerate() {
        let mag = a.abs().max(b.abs());
        if mag < floor {
            skipped += 1;
            continue;
        }
        let rel = (a - b).abs() / mag;
        if rel > rel_tol {
            prefix_end = l + 1;
        }
        rels.push((l, rel));
    }
    let suffix: Vec<f64> = rels
        .iter()
        .filter(|(l, _)| *l >= prefix_end)
        .map(|(_, r)| *r)
        .collect();
    let report = StabilityReport {
        prefix_end,
        unstable_prefix: if prefix_end == 0 {
            None
        } else {
            Some(prefix_end)
        },
        rel_tol,
        compared: rels.len(),
        skipped_below_floor: skipped,
        max_rel_suffix: suffix.iter().cloned().fold(0.0, f64::max),
        mean_rel_suffix: if suffix.is_empty() {
            0.0
        } else {
            suffix.iter().sum::<f64>() / suffix.len() as f64
        },
    };
    fourier.diagnostics.unstable_prefix = report.unstable_prefix;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Intensity;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Brute-force partition counter: places each element into an existing
    /// or a fresh block, counting arrangements with exactly k blocks.
    fn count_partitions(n: usize, k: usize) -> u64 {
        fn rec(remaining: usize, blocks: usize, k: usize) -> u64 {
            if remaining == 0 {
                return (blocks == k) as u64;
            }
            let mut total = blocks as u64 * rec(remaining - 1, blocks, k);
            total += rec(remaining - 1, blocks + 1, k);
            total
        }
        if n == 0 {
            (k == 0) as u64
        } else {
            rec(n - 1, 1, k)
        }
    }

    #[test]
    fn stirling_anchors() {
        for k in 0..=10 {
            assert_eq!(stirling2(k, k).unwrap(), 1);
        }
        for n in 1..=10 {
            assert_eq!(stirling2(n, 1).unwrap(), 1);
        }
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(stirling2(3, 0).unwrap(), 0);
        assert_eq!(stirling2(2, 5).unwrap(), 0);
    }

    #[test]
    fn stirling_matches_enumeration() {
        for n in 0..=9 {
            for k in 0..=n {
                assert_eq!(
                    stirling2(n, k).unwrap(),
                    count_partitions(n, k),
                    "S({n},{k})"
                );
            }
        }
    }

    #[test]
    fn stirling_overflow_switches_paths() {
        assert!(matches!(
            stirling2(60, 30),
            Err(Error::StirlingOverflow { .. })
        ));
        assert!(stirling2_f64(60, 30).is_finite());
        // Everything at n = 25 still fits (Bell(25) < u64::MAX).
        for k in 0..=25 {
            let exact = stirling2(25, k).unwrap();
            assert_relative_eq!(exact as f64, stirling2_f64(25, k), max_relative = 1e-12);
        }
    }

    #[test]
    fn tilted_moment_anchors() {
        let pois = CountModel::poisson(2.0).unwrap();
        assert_abs_diff_eq!(
            tilted_count_moment(&pois, 0, 1.0).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        for &s in &[0.1, 0.5, 0.9] {
            let expected = 2.0 * s * (2.0 * (s - 1.0)).exp();
            assert_relative_eq!(
                tilted_count_moment(&pois, 1, s).unwrap(),
                expected,
                max_relative = 1e-13
            );
        }
        let uniform = CountModel::custom_pmf(vec![1.0 / 3.0; 3], 1e-12).unwrap();
        // sum n^2 (1/3) 0.5^n = (1/3)(0.5 + 4*0.25)
        assert_relative_eq!(
            tilted_count_moment(&uniform, 2, 0.5).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert!(tilted_count_moment(&pois, 1, 1.5).is_err());
    }

    #[test]
    fn gf_count_moment_poisson_poisson_closed_form() {
        let (lambda, gamma) = (20.0, 10.0);
        let count = CountModel::poisson(lambda).unwrap();
        let sev = SeverityModel::discrete_poisson(gamma).unwrap();
        let f = gf_count_moment(&count, &sev, 1).unwrap();
        for &u in &[0.0, 0.3, -1.7, 3.14159] {
            let z = Complex64::from_polar(1.0, u);
            let gx = (gamma * (z - 1.0)).exp();
            let expected = lambda * gx * (lambda * (gx - 1.0)).exp();
            let got = f.eval(u);
            assert!(
                (got - expected).norm() <= 1e-12 * expected.norm().max(1e-30),
                "u={u}: {got} vs {expected}"
            );
        }
        // u = 0 recovers the raw moment for any order.
        for k in 0..=3 {
            let f = gf_count_moment(&count, &sev, k).unwrap();
            assert_relative_eq!(
                f.eval(0.0).re,
                count.moment(k).unwrap(),
                max_relative = 1e-12
            );
            assert!(f.eval(0.0).im.abs() < 1e-12);
        }
    }

    #[test]
    fn gf_count_moment_k0_is_compound_pgf() {
        let count = CountModel::mixed_poisson_gamma(
            7.0,
            1.0,
            Intensity::Linear { rate: 1.0 },
            1.0,
        )
        .unwrap();
        let sev = SeverityModel::geometric(0.25).unwrap();
        let f = gf_count_moment(&count, &sev, 0).unwrap();
        for &u in &[0.0, 1.0, -2.5] {
            let z = Complex64::from_polar(1.0, u);
            let expected = count.pgf(sev.pgf(z).unwrap());
            assert!((f.eval(u) - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn gf_component_literal_matches_published_display() {
        // Pois(lambda) x Geo(p), k=1:
        // (q e^{iu}/(1-q e^{iu})) exp{lambda q (1-e^{iu})/(q e^{iu}-1)}.
        let (lambda, p) = (40.0, 0.25);
        let q = 1.0 - p;
        let count = CountModel::poisson(lambda).unwrap();
        let sev = SeverityModel::geometric(p).unwrap();
        let f = gf_component_moment(&count, &sev, 1, ComponentGfMode::PaperLiteral).unwrap();
        for &u in &[0.4, -1.0, 2.9] {
            let z = Complex64::from_polar(1.0, u);
            let one = Complex64::new(1.0, 0.0);
            let expected =
                q * z / (one - q * z) * (lambda * q * (one - z) / (q * z - one)).exp();
            let got = f.eval(u);
            assert!(
                (got - expected).norm() <= 1e-11 * expected.norm(),
                "u={u}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn gf_component_corrected_degenerate_unit() {
        // Degenerate(1) severity: chi_1(l) = P(N = l) exactly, including the
        // l = 0 atom.
        let count = CountModel::poisson(1.5).unwrap();
        let sev = SeverityModel::degenerate(1.0).unwrap();
        let f = gf_component_moment(&count, &sev, 1, ComponentGfMode::Corrected).unwrap();
        let table = invert_unit_circle(&f, 20, &InversionConfig::default()).unwrap();
        for l in 0..=20 {
            assert_abs_diff_eq!(table.values[l], count.pmf(l), epsilon = 1e-13);
        }
    }

    #[test]
    fn invert_poisson_pgf_recovers_pmf() {
        // Compound with Degenerate(1) severity collapses to the count law.
        let count = CountModel::poisson(3.0).unwrap();
        let sev = SeverityModel::degenerate(1.0).unwrap();
        let f = gf_count_moment(&count, &sev, 0).unwrap();
        let cfg = InversionConfig::with_grid(128);
        let table = invert_unit_circle(&f, 40, &cfg).unwrap();
        for l in 0..=40 {
            assert_abs_diff_eq!(table.values[l], count.pmf(l), epsilon = 1e-12);
        }
        assert!(table.diagnostics.mass_deficit < 1e-10);
        assert!(table.diagnostics.max_imag_residue < 1e-10);
        assert_eq!(table.diagnostics.grid_size, Some(128));
    }

    #[test]
    fn invert_constant_gives_delta_at_zero() {
        let f = UnitCircleFunction::new("const 1", 0, Target::CountMoment, 1.0, |_| {
            Complex64::new(1.0, 0.0)
        });
        let table = invert_unit_circle(&f, 10, &InversionConfig::default()).unwrap();
        assert_abs_diff_eq!(table.values[0], 1.0, epsilon = 1e-14);
        for l in 1..=10 {
            assert_abs_diff_eq!(table.values[l], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn inversion_is_linear() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0003);
        let coeffs_a: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
        let coeffs_b: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
        let poly = |c: Vec<f64>| {
            move |u: f64| -> Complex64 {
                c.iter()
                    .enumerate()
                    .map(|(r, &cr)| cr * Complex64::from_polar(1.0, r as f64 * u))
                    .sum()
            }
        };
        let (alpha, beta) = (0.7, -1.3);
        let fa = UnitCircleFunction::new("a", 0, Target::CountMoment, 16.0, poly(coeffs_a.clone()));
        let fb = UnitCircleFunction::new("b", 0, Target::CountMoment, 16.0, poly(coeffs_b.clone()));
        let combo_eval = {
            let pa = poly(coeffs_a);
            let pb = poly(coeffs_b);
            move |u: f64| alpha * pa(u) + beta * pb(u)
        };
        let fc = UnitCircleFunction::new("combo", 0, Target::CountMoment, 40.0, combo_eval);
        let cfg = InversionConfig::default();
        let ta = invert_unit_circle(&fa, 15, &cfg).unwrap();
        let tb = invert_unit_circle(&fb, 15, &cfg).unwrap();
        let tc = invert_unit_circle(&fc, 15, &cfg).unwrap();
        for l in 0..=15 {
            let expected = alpha * ta.values[l] + beta * tb.values[l];
            // The combo table clamps negatives; compare against the raw sum
            // only where it is nonnegative.
            if expected >= 0.0 {
                assert_abs_diff_eq!(tc.values[l], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn grid_config_violations() {
        let cfg = InversionConfig {
            grid_size: Some(64),
            aliasing_guard: 2,
            mass_check_tolerance: 1e-8,
        };
        assert!(cfg.resolve_grid(40).is_err());
        assert_eq!(InversionConfig::default().resolve_grid(40).unwrap(), 128);
        let bad_guard = InversionConfig {
            grid_size: None,
            aliasing_guard: 1,
            mass_check_tolerance: 1e-8,
        };
        assert!(bad_guard.resolve_grid(10).is_err());
    }

    #[test]
    fn stability_scan_trivial_cases() {
        let base = RestrictedMomentTable::new(
            1,
            Target::CountMoment,
            Method::Recursion,
            vec![0.1, 0.2, 0.3, 0.2],
        );
        let mut same = base.clone();
        same.method = Method::Fourier;
        let report = stability_scan(&mut same, &base, 1e-8).unwrap();
        assert_eq!(report.unstable_prefix, None);
        assert_eq!(report.compared, 4);

        let mut off = base.clone();
        off.method = Method::Fourier;
        off.values[0] = 0.11;
        off.values[1] = 0.2 + 1e-12;
        let report = stability_scan(&mut off, &base, 1e-3).unwrap();
        assert_eq!(report.unstable_prefix, Some(1));
        assert_eq!(off.diagnostics.unstable_prefix, Some(1));
        assert!(report.max_rel_suffix < 1e-3);
    }
}
