//! Recursion engines for Panjer-class counts with discrete severities:
//! the aggregate pmf of S_N, the restricted count moments
//! m_k(l) = E[N^k; S_N = l], and the restricted component moments
//! chi_{k+}(l) = E[X_1^k; S_{N+1} = l].
//!
//! All three share the same skeleton: an l = 0 seed expressed through the
//! tilted moment E[N^k s^N] at s = P(X_1 = 0), then a single forward sweep in
//! l whose inner sum runs over the severity support.

use crate::distributions::{CountModel, PanjerParams, SeverityModel};
use crate::error::{Error, Result};
use crate::table::{Method, PredictionCurve, RestrictedMomentTable, Target};
use crate::transform::tilted_count_moment;

/// Cumulative-mass target for the automatic l_max heuristic.
pub const AUTO_MASS_TOL: f64 = 1e-10;

fn panjer_params(count: &CountModel) -> Result<PanjerParams> {
    let params = count.panjer_params().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "{} is not in the Panjer (a,b) class; use the transform route",
            count.describe()
        ))
    })?;
    params.validate()?;
    Ok(params)
}

fn severity_table(severity: &SeverityModel, ell_max: usize) -> Result<Vec<f64>> {
    severity.validate()?;
    severity.pmf_table(ell_max)
}

fn check_divergence(a: f64, f0: f64) -> Result<f64> {
    let c0 = a * f0;
    if c0 >= 1.0 - 1e-12 {
        return Err(Error::Divergence { c0 });
    }
    Ok(c0)
}

/// Index of the last nonzero severity entry, bounding inner convolution loops.
fn support_end(f: &[f64]) -> usize {
    f.iter().rposition(|&v| v != 0.0).unwrap_or(0)
}

/// Raw Panjer recursion from explicit (a, b) parameters, a severity pmf
/// table and the seed P(S_N = 0).
pub fn aggregate_pmf_raw(
    params: &PanjerParams,
    f: &[f64],
    seed: f64,
    ell_max: usize,
) -> Result<Vec<f64>> {
    let f0 = f.first().copied().unwrap_or(0.0);
    let c0 = check_divergence(params.a, f0)?;
    let inv = 1.0 / (1.0 - c0);
    let sup = support_end(f);
    let mut out = Vec::with_capacity(ell_max + 1);
    out.push(seed);
    for n in 1..=ell_max {
        let nf = n as f64;
        let mut acc = 0.0;
        for j in 1..=n.min(sup) {
            let fj = f[j];
            if fj == 0.0 {
                continue;
            }
            acc += (params.a + params.b * j as f64 / nf) * fj * out[n - j];
        }
        out.push(inv * acc);
    }
    Ok(out)
}

/// P(S_N = l) for l in [0, l_max] via the Panjer recursion, seeded by
/// P(S_N = 0) = G_N(P(X_1 = 0)).
pub fn aggregate_pmf(
    count: &CountModel,
    severity: &SeverityModel,
    ell_max: usize,
) -> Result<RestrictedMomentTable> {
    count.validate()?;
    let params = panjer_params(count)?;
    let f = severity_table(severity, ell_max)?;
    let seed = tilted_count_moment(count, 0, f[0])?;
    let values = aggregate_pmf_raw(&params, &f, seed, ell_max)?;
    Ok(RestrictedMomentTable::new(
        0,
        Target::CountMoment,
        Method::Recursion,
        values,
    ))
}

/// P(S_{N+1} = l): the aggregate pmf convolved once more with the severity.
pub fn aggregate_pmf_plus_one(
    count: &CountModel,
    severity: &SeverityModel,
    ell_max: usize,
) -> Result<RestrictedMomentTable> {
    let agg = aggregate_pmf(count, severity, ell_max)?;
    let f = severity_table(severity, ell_max)?;
    let sup = support_end(&f);
    let mut values = vec![0.0; ell_max + 1];
    for (l, v) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..=l.min(sup) {
            acc += f[j] * agg.values[l - j];
        }
        *v = acc;
    }
    Ok(RestrictedMomentTable::new(
        0,
        Target::ComponentMomentPlus,
        Method::Recursion,
        values,
    ))
}

/// Restricted count moments m_j(l) for every order j = 0..=k, filled jointly:
/// outer loop over l, orders ascending inside each l (m_k(l) needs m_j(l)
/// for j < k and m_i(l - d) for i <= k).
pub fn restricted_count_moments(
    count: &CountModel,
    severity: &SeverityModel,
    k: usize,
    ell_max: usize,
) -> Result<Vec<RestrictedMomentTable>> {
    count.validate()?;
    let params = panjer_params(count)?;
    let f = severity_table(severity, ell_max)?;
    let f0 = f[0];
    let c0 = check_divergence(params.a, f0)?;
    let inv = 1.0 / (1.0 - c0);
    let sup = support_end(&f);

    // Pascal triangle up to order k.
    let mut binom = vec![vec![0.0f64; k + 1]; k + 1];
    for j in 0..=k {
        binom[j][0] = 1.0;
        for i in 1..=j {
            binom[j][i] = binom[j - 1][i - 1] + if i <= j - 1 { binom[j - 1][i] } else { 0.0 };
        }
    }

    let mut m = vec![vec![0.0f64; ell_max + 1]; k + 1];
    for (j, table) in m.iter_mut().enumerate() {
        table[0] = tilted_count_moment(count, j, f0)?;
    }
    for l in 1..=ell_max {
        let lf = l as f64;
        for j in 0..=k {
            let mut acc = 0.0;
            // C_0 * sum_{i<j} C(j,i) m_i(l)
            if c0 != 0.0 {
                let mut lower = 0.0;
                for i in 0..j {
                    lower += binom[j][i] * m[i][l];
                }
                acc += c0 * lower;
            }
            // sum over the severity support
            let mut conv = 0.0;
            for d in 1..=l.min(sup) {
                let fd = f[d];
                if fd == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for i in 0..=j {
                    inner += binom[j][i] * m[i][l - d];
                }
                conv += (params.a + params.b * d as f64 / lf) * fd * inner;
            }
            m[j][l] = inv * (acc + conv);
        }
    }

    Ok(m
        .into_iter()
        .enumerate()
        .map(|(j, values)| {
            RestrictedMomentTable::new(j, Target::CountMoment, Method::Recursion, values)
        })
        .collect())
}

/// chi_{k+}(l) = E[X_1^k; S_{N+1} = l] for l in [0, l_max], k >= 1.
/// chi_{k+}(0) = 0 (the component contributes 0^k) and
/// chi_{k+}(1) = P(X_1 = 1) E[P(X_1 = 0)^N]; the l >= 2 recursion references
/// the order-1 table, which is filled first when k > 1.
pub fn restricted_component_moment_plus(
    count: &CountModel,
    severity: &SeverityModel,
    k: usize,
    ell_max: usize,
) -> Result<RestrictedMomentTable> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "k = 0 is the law of S_{N+1}; use aggregate_pmf_plus_one".into(),
        ));
    }
    count.validate()?;
    let params = panjer_params(count)?;
    let f = severity_table(severity, ell_max)?;
    let sn0 = tilted_count_moment(count, 0, f[0])?;

    let chi1 = chi_plus_sweep(&params, &f, sn0, 1, ell_max, None)?;
    let values = if k == 1 {
        chi1
    } else {
        chi_plus_sweep(&params, &f, sn0, k, ell_max, Some(&chi1))?
    };
    Ok(RestrictedMomentTable::new(
        k,
        Target::ComponentMomentPlus,
        Method::Recursion,
        values,
    ))
}

fn chi_plus_sweep(
    params: &PanjerParams,
    f: &[f64],
    sn0: f64,
    k: usize,
    ell_max: usize,
    chi1: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let f0 = f.first().copied().unwrap_or(0.0);
    let c0 = check_divergence(params.a, f0)?;
    let c1 = 1.0 / (1.0 - c0);
    let sup = support_end(f);
    let mut chi = vec![0.0f64; ell_max + 1];
    for l in 1..=ell_max {
        let fl = if l <= sup { f[l] } else { 0.0 };
        let mut acc = (l as f64).powi(k as i32) * fl * sn0;
        let mut sums = 0.0;
        for j in 1..=(l - 1).min(sup) {
            let fj = f[j];
            if fj == 0.0 {
                continue;
            }
            let own = chi[l - j];
            let first = match chi1 {
                Some(t) => t[l - j],
                None => own,
            };
            sums += fj
                * (params.a * own
                    + params.b * (j as f64).powi(k as i32) / (l - j) as f64 * first);
        }
        acc += c1 * sums;
        chi[l] = acc;
    }
    Ok(chi)
}

/// Entrywise ratio restricted/mass with entries flagged undefined where the
/// conditioning mass m_0(l) falls below `mass_floor`.
pub fn to_prediction_curve(
    restricted: &RestrictedMomentTable,
    mass: &RestrictedMomentTable,
    mass_floor: f64,
) -> Result<PredictionCurve> {
    if restricted.values.len() != mass.values.len() {
        return Err(Error::TableMismatch(format!(
            "restricted table has {} entries, mass table {}",
            restricted.values.len(),
            mass.values.len()
        )));
    }
    if mass.k != 0 {
        return Err(Error::TableMismatch(format!(
            "mass table must have k = 0, got k = {}",
            mass.k
        )));
    }
    if restricted.target.conditioning_law() != mass.target.conditioning_law() {
        return Err(Error::TableMismatch(format!(
            "target {:?} conditions on {}, mass table on {}",
            restricted.target,
            restricted.target.conditioning_law(),
            mass.target.conditioning_law()
        )));
    }
    let entries = restricted
        .values
        .iter()
        .zip(&mass.values)
        .enumerate()
        .map(|(ell, (&num, &den))| {
            let defined = den >= mass_floor;
            crate::table::CurveEntry {
                ell,
                value: if defined { num / den } else { 0.0 },
                defined,
            }
        })
        .collect();
    Ok(PredictionCurve {
        k: restricted.k,
        mass_floor,
        entries,
    })
}

/// Smallest l with cumulative aggregate mass >= 1 - AUTO_MASS_TOL, capped by
/// `hard_cap`.
pub fn auto_ell_max(
    count: &CountModel,
    severity: &SeverityModel,
    hard_cap: usize,
) -> Result<usize> {
    count.validate()?;
    let params = panjer_params(count)?;
    let f = severity_table(severity, hard_cap)?;
    let f0 = f[0];
    let c0 = check_divergence(params.a, f0)?;
    let inv = 1.0 / (1.0 - c0);
    let sup = support_end(&f);
    let seed = tilted_count_moment(count, 0, f0)?;
    let mut pmf = Vec::with_capacity(256);
    pmf.push(seed);
    let mut cum = seed;
    let mut n = 0usize;
    while cum < 1.0 - AUTO_MASS_TOL && n < hard_cap {
        n += 1;
        let nf = n as f64;
        let mut acc = 0.0;
        for j in 1..=n.min(sup) {
            let fj = f[j];
            if fj == 0.0 {
                continue;
            }
            acc += (params.a + params.b * j as f64 / nf) * fj * pmf[n - j];
        }
        let v = inv * acc;
        pmf.push(v);
        cum += v;
    }
    Ok(n)
}
