//! Variance-minimising rescaling coefficients for GKP syndrome feedback.
//!
//! A chain of `n` syndrome extractions is described by the noise injected
//! before each extraction. In the *postponed* picture all corrections are
//! applied at the end, which turns the problem into an unconstrained quadratic
//! `a + bᵀx + xᵀAx`. Its minimiser is converted to the *real-time*
//! coefficients actually used by a repeater.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Big = FBig<HalfEven, 2>;

pub const DEFAULT_DIGITS: u32 = 60;

/// σ_d²/(σ_d²+σ_g²): optimal coefficient for a single correction round.
pub fn single_round_c(sigma_data: f64, sigma_gkp: f64) -> f64 {
    let d = sigma_data * sigma_data;
    let g = sigma_gkp * sigma_gkp;
    if d + g == 0.0 {
        return 1.0;
    }
    d / (d + g)
}

/// Coefficient of an infinitely long uniform chain with per-step noise σ_n.
pub fn steady_state_c(sigma_noise: f64, sigma_gkp: f64) -> f64 {
    if sigma_gkp == 0.0 {
        return 1.0;
    }
    let g = sigma_gkp * sigma_gkp;
    // The textbook form -σn + √(σn²+4σg²) cancels badly for σn ≫ σg.
    let root = (sigma_noise * sigma_noise + 4.0 * g).sqrt();
    let diff = 4.0 * g / (sigma_noise + root);
    sigma_noise / (2.0 * g) * diff
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseChainSpec {
    pub sigma_gkp: f64,
    pub noise_variances: Vec<f64>,
    pub initial_variance: f64,
}

impl NoiseChainSpec {
    pub fn new(sigma_gkp: f64, noise_variances: Vec<f64>, initial_variance: f64) -> Result<Self> {
        let s = Self {
            sigma_gkp,
            noise_variances,
            initial_variance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_gkp > 0.0) {
            return Err(Error::Domain("sigma_gkp must be positive".into()));
        }
        if self.noise_variances.is_empty() {
            return Err(Error::Domain("chain needs at least one extraction".into()));
        }
        if !(self.initial_variance >= 0.0) || self.noise_variances.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("variances must be non-negative".into()));
        }
        Ok(())
    }

    /// Variance of the uncorrected data error at each extraction.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = self.initial_variance;
        self.noise_variances
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub postponed: Vec<f64>,
    pub realtime: Vec<f64>,
    pub min_variance: f64,
    /// True when some positions were extrapolated rather than solved.
    #[serde(default)]
    pub approximate: bool,
}

/// Quadratic-problem objects, exposed for offline inspection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticDump {
    pub a: f64,
    pub b: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
}

fn bits_for(digits: u32) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 16
}

fn big(x: f64, bits: usize) -> Big {
    Big::try_from(x)
        .expect("finite input")
        .with_precision(bits)
        .value()
}

struct Solved {
    x: Vec<Big>,
    min_var: Big,
}

/// Solve the postponed problem in `digits` significant decimal digits.
fn solve_big(spec: &NoiseChainSpec, digits: u32) -> Result<Solved> {
    spec.validate()?;
    let n = spec.noise_variances.len();
    let bits = bits_for(digits);
    let g = big(spec.sigma_gkp * spec.sigma_gkp, bits);

    // cumulative variances accumulated in high precision
    let mut cum: Vec<Big> = Vec::with_capacity(n);
    let mut acc = big(spec.initial_variance, bits);
    for v in &spec.noise_variances {
        acc = &acc + &big(*v, bits);
        cum.push(acc.clone());
    }
    let a_entry = |i: usize, j: usize| -> Big {
        let base = cum[i.min(j)].clone();
        if i == j {
            &base + &g
        } else {
            base
        }
    };

    // A pivot is only trusted while it stays this far above rounding noise.
    let guard = digits.saturating_sub(digits / 4 + 4).max(1) as i32;
    let tol = 10f64.powi(-guard);

    let mut l: Vec<Vec<Big>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a_entry(i, j);
            for k in 0..j {
                s = &s - &(&l[i][k] * &l[j][k]);
            }
            if i == j {
                let diag = a_entry(i, i);
                let rel = (&s / &diag).to_f64().value();
                if !(rel > tol) {
                    return Err(Error::PrecisionExhausted {
                        solvable_prefix: i,
                        requested: n,
                        digits,
                    });
                }
                l[i].push(s.sqrt());
            } else {
                let v = &s / &l[j][j];
                l[i].push(v);
            }
        }
    }

    // A x = -b/2 = Var(D_i)
    let rhs: Vec<Big> = cum.clone();
    let mut y: Vec<Big> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = rhs[i].clone();
        for k in 0..i {
            s = &s - &(&l[i][k] * &y[k]);
        }
        y.push(&s / &l[i][i]);
    }
    let mut x: Vec<Big> = vec![Big::ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for k in i + 1..n {
            s = &s - &(&l[k][i] * &x[k]);
        }
        x[i] = &s / &l[i][i];
    }
    // min = a - ¼ bᵀA⁻¹b = Var(D_n) - Σ x_i Var(D_i)
    let mut min_var = cum[n - 1].clone();
    for i in 0..n {
        min_var = &min_var - &(&x[i] * &cum[i]);
    }
    Ok(Solved { x, min_var })
}

/// Optimal postponed coefficients and the minimum final variance.
pub fn solve_postponed(spec: &NoiseChainSpec, digits: u32) -> Result<CoefficientSet> {
    let s = solve_big(spec, digits)?;
    let postponed: Vec<f64> = s.x.iter().map(|v| v.to_f64().value()).collect();
    let min_variance = s.min_var.to_f64().value().max(0.0);
    Ok(CoefficientSet {
        postponed,
        realtime: Vec::new(),
        min_variance,
        approximate: false,
    })
}

/// Postponed solve followed by conversion to real-time form. The conversion
/// runs at the solver's precision: `1 − Σ c̃` cancels catastrophically in f64
/// once the later coefficients approach one.
pub fn solve_chain(spec: &NoiseChainSpec, digits: u32) -> Result<CoefficientSet> {
    let s = solve_big(spec, digits)?;
    let bits = bits_for(digits);
    let n = s.x.len();
    let mut realtime = vec![0.0; n];
    let mut rest = big(1.0, bits);
    for k in (0..n).rev() {
        if rest == Big::ZERO {
            return Err(Error::SingularConversion(k));
        }
        realtime[k] = (&s.x[k] / &rest).to_f64().value();
        rest = &rest - &s.x[k];
    }
    Ok(CoefficientSet {
        postponed: s.x.iter().map(|v| v.to_f64().value()).collect(),
        realtime,
        min_variance: s.min_var.to_f64().value().max(0.0),
        approximate: false,
    })
}

/// Longest leading sub-chain the solver handles at the given precision.
pub fn solvable_prefix(spec: &NoiseChainSpec, digits: u32) -> usize {
    match solve_big(spec, digits) {
        Ok(_) => spec.noise_variances.len(),
        Err(Error::PrecisionExhausted { solvable_prefix, .. }) => solvable_prefix,
        Err(_) => 0,
    }
}

pub fn quadratic_dump(spec: &NoiseChainSpec, digits: u32) -> Result<QuadraticDump> {
    let set = solve_postponed(spec, digits)?;
    let cum = spec.cumulative();
    let g = spec.sigma_gkp * spec.sigma_gkp;
    let n = cum.len();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| cum[i.min(j)] + if i == j { g } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(QuadraticDump {
        a: cum[n - 1],
        b: cum.iter().map(|v| -2.0 * v).collect(),
        matrix,
        x0: set.postponed,
    })
}

/// c_k = c̃_k / (1 − Σ_{i>k} c̃_i)
pub fn postponed_to_realtime(postponed: &[f64]) -> Result<Vec<f64>> {
    let n = postponed.len();
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for k in (0..n).rev() {
        let denom: f64 = 1.0 - tail;
        if denom.abs() < 1e-300 {
            return Err(Error::SingularConversion(k));
        }
        out[k] = postponed[k] / denom;
        tail += postponed[k];
    }
    Ok(out)
}

/// Inverse of [`postponed_to_realtime`], via the accumulated-ancilla recurrence.
///
/// A real-time correction `c_k` applied after the later corrections have
/// been pulled back to the end of the chain acts on the syndrome with the
/// weight left over by those later corrections, `1 − Σ_{i>k} c̃_i`.
pub fn realtime_to_postponed(realtime: &[f64]) -> Vec<f64> {
    let n = realtime.len();
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for k in (0..n).rev() {
        out[k] = realtime[k] * (1.0 - tail);
        tail += out[k];
    }
    out
}

/// Variance after applying real-time coefficients in the linear model.
pub fn realtime_variance(spec: &NoiseChainSpec, realtime: &[f64]) -> f64 {
    let g = spec.sigma_gkp * spec.sigma_gkp;
    let mut v = spec.initial_variance;
    for (n, c) in spec.noise_variances.iter().zip(realtime) {
        let d = v + n;
        v = (1.0 - c) * (1.0 - c) * d + c * c * g;
    }
    v
}

/// Coefficients obtained by applying [`single_round_c`] at every step.
pub fn greedy_realtime(spec: &NoiseChainSpec) -> Vec<f64> {
    let g = spec.sigma_gkp * spec.sigma_gkp;
    let mut v = spec.initial_variance;
    spec.noise_variances
        .iter()
        .map(|n| {
            let d = v + n;
            let c = d / (d + g);
            v = c * g;
            c
        })
        .collect()
}

/// Residual variance entering a periodically repeated chain, at the fixed point
/// where one period maps it onto itself.
pub fn periodic_initial_variance(sigma_gkp: f64, period: &[f64]) -> Result<f64> {
    if period.is_empty() {
        return Err(Error::Domain("empty period".into()));
    }
    let mut spec = NoiseChainSpec::new(sigma_gkp, period.to_vec(), 0.0)?;
    let mut v = 0.0;
    for _ in 0..200 {
        spec.initial_variance = v;
        let c = greedy_realtime(&spec);
        let next = realtime_variance(&spec, &c);
        if (next - v).abs() <= 1e-12 * next.max(1e-300) {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

/// Solve one period of a repeating layout with the fixed-point entry variance.
pub fn solve_periodic(sigma_gkp: f64, period: &[f64], digits: u32) -> Result<CoefficientSet> {
    let init = periodic_initial_variance(sigma_gkp, period)?;
    let spec = NoiseChainSpec::new(sigma_gkp, period.to_vec(), init)?;
    solve_chain(&spec, digits)
}

/// Extend per-position real-time coefficients from `known.len()` to `target`
/// positions by fitting `c_k ≈ c∞ − α·βᵏ` to the last (up to) ten values.
pub fn extend_chain(known: &[f64], target: usize) -> Result<CoefficientSet> {
    if known.len() < 3 {
        return Err(Error::Insufficient(format!(
            "extrapolation needs at least 3 solved positions, got {}",
            known.len()
        )));
    }
    if target <= known.len() {
        let realtime = known[..target.max(known.len())].to_vec();
        return Ok(CoefficientSet {
            postponed: realtime_to_postponed(&realtime),
            realtime,
            min_variance: f64::NAN,
            approximate: false,
        });
    }
    let m = known.len();
    let start = m.saturating_sub(10);
    let ks: Vec<f64> = (start..m).map(|k| k as f64).collect();
    let ys = &known[start..];
    let (c_inf, alpha, beta) = fit_geometric(&ks, ys);
    let mut realtime = known.to_vec();
    for k in m..target {
        realtime.push(c_inf - alpha * beta.powf(k as f64));
    }
    Ok(CoefficientSet {
        postponed: realtime_to_postponed(&realtime),
        realtime,
        min_variance: f64::NAN,
        approximate: true,
    })
}

/// Least squares for y ≈ c − α βᵏ: linear in (c, α) for fixed β, golden search on β.
fn fit_geometric(ks: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let solve_for = |beta: f64| -> (f64, f64, f64) {
        let n = ks.len() as f64;
        let us: Vec<f64> = ks.iter().map(|k| -beta.powf(*k)).collect();
        let su: f64 = us.iter().sum();
        let sy: f64 = ys.iter().sum();
        let suu: f64 = us.iter().map(|u| u * u).sum();
        let suy: f64 = us.iter().zip(ys).map(|(u, y)| u * y).sum();
        let det = n * suu - su * su;
        let (c, a) = if det.abs() < 1e-300 {
            (sy / n, 0.0)
        } else {
            ((suu * sy - su * suy) / det, (n * suy - su * sy) / det)
        };
        let sse = us
            .iter()
            .zip(ys)
            .map(|(u, y)| {
                let r = y - (c + a * u);
                r * r
            })
            .sum();
        (c, a, sse)
    };
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-15 {
        return (ys[ys.len() - 1], 0.0, 0.5);
    }
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = solve_for(x1).2;
    let mut f2 = solve_for(x2).2;
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve_for(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve_for(x2).2;
        }
    }
    let beta = 0.5 * (lo + hi);
    let (c, a, _) = solve_for(beta);
    (c, a, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_round_examples() {
        assert!((single_round_c(0.1, 0.1) - 0.5).abs() < 1e-15);
        assert!((single_round_c(0.3, 0.1) - 0.9).abs() < 1e-12);
        assert!((single_round_c(0.3, 1e-9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_examples() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((steady_state_c(0.1, 0.1) - golden).abs() < 1e-12);
        assert_eq!(steady_state_c(0.0, 0.1), 0.0);
        assert!((steady_state_c(0.1, 1e-7) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn steady_state_is_fixed_point() {
        for (n, g) in [(0.05, 0.1), (0.3, 0.09), (0.2, 0.2)] {
            let c = steady_state_c(n, g);
            let d = (c * g * g + n * n).sqrt();
            assert!((single_round_c(d, g) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn conversion_examples() {
        let r = postponed_to_realtime(&[0.3, 0.4]).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 0.4).abs() < 1e-15);
        let p = realtime_to_postponed(&[0.5, 0.4]);
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        assert!(matches!(
            postponed_to_realtime(&[0.2, 1.0]),
            Err(Error::SingularConversion(0))
        ));
    }

    #[test]
    fn precision_knob_can_be_exhausted() {
        let mut noise = vec![0.0; 30];
        noise[0] = 1.0;
        let spec = NoiseChainSpec::new(1e-7, noise, 0.0).unwrap();
        let err = solve_postponed(&spec, 12).unwrap_err();
        match err {
            Error::PrecisionExhausted {
                solvable_prefix: prefix,
                requested,
                ..
            } => {
                assert_eq!(requested, 30);
                assert!(prefix >= 1 && prefix < 30);
                assert_eq!(solvable_prefix(&spec, 12), prefix);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(solve_postponed(&spec, 60).is_ok());
    }

    #[test]
    fn extend_requires_three_points() {
        assert!(extend_chain(&[0.5, 0.6], 10).is_err());
        let same = extend_chain(&[0.5, 0.6, 0.62], 3).unwrap();
        assert_eq!(same.realtime, vec![0.5, 0.6, 0.62]);
        assert!(!same.approximate);
    }
}
