//! Dynamic rays `g_s^kappa(t)` by pulling back along address-selected
//! logarithm branches.
//!
//! For a potential `t` the levels `L_n = F^n(t)` are computed while they stay
//! below `r_cap`; `N` is the last one. Two chains are then pulled back to
//! level 0 with
//!
//! ```text
//! z_{k-1} = Log(z_k - kappa) + 2 pi i s_k,    d_{k-1} = (d_k - 1) / (z_k - kappa)
//! ```
//!
//! one seeded at level `N` with `L_N + 2 pi i s_{N+1}`, the other one level
//! deeper. The deeper seed `F(L_N) + 2 pi i s_{N+2}` is usually far beyond
//! binary64, so its logarithm is formed directly from `ln F(L_N)` and
//! `ln |2 pi s_{N+2}|`. The discrepancy of the two chains, scaled by the
//! contraction of the extra step, is the reported residual.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::address::{ExternalAddress, SpeedClass, StripOffset, DEFAULT_K_MAX};
use crate::dynamics::exp_plus;
use crate::error::{Error, Result};
use crate::growth::{growth_f, growth_levels, ln_growth_f, DEFAULT_R_CAP};
use crate::point::{cabs, principal_log, ComplexPoint};

pub const DEFAULT_MAX_DEPTH: usize = 4096;
pub const DEFAULT_TOL_SING: f64 = 1e-12;
pub const DEFAULT_EPS: f64 = 1e-10;
/// Slack below `t_s` still accepted for fast addresses.
pub const DOMAIN_TOL: f64 = 1e-12;

const DIRECT_LIMIT: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PullbackConfig {
    pub r_cap: f64,
    pub max_depth: usize,
    pub tol_sing: f64,
    /// Truncation index for the `t_s` estimate of fast addresses.
    pub k_max: usize,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        PullbackConfig {
            r_cap: DEFAULT_R_CAP,
            max_depth: DEFAULT_MAX_DEPTH,
            tol_sing: DEFAULT_TOL_SING,
            k_max: DEFAULT_K_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaySample {
    pub address: ExternalAddress,
    pub t: f64,
    pub value: ComplexPoint,
    pub dvalue_dkappa: ComplexPoint,
    pub depth: usize,
    pub residual: f64,
}

/// A ray sample together with the pulled-back points `z_0, ..., z_N`, where
/// `z_k` lies on the ray at address `sigma^k(s)` and potential `F^k(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayChain {
    pub sample: RaySample,
    pub points: Vec<ComplexPoint>,
}

/// Lower end of the ray domain: `(t_s, fast)`.
pub fn ray_domain(s: &ExternalAddress, k_max: usize) -> Result<(f64, bool)> {
    match s.speed() {
        SpeedClass::Fast => Ok((s.potential_bound(k_max)?.estimate, true)),
        _ => Ok((0.0, false)),
    }
}

fn check_domain(t: f64, t_s: f64, fast: bool) -> Result<()> {
    let ok = t.is_finite() && t > 0.0 && if fast { t >= t_s - DOMAIN_TOL } else { t > t_s };
    if ok {
        Ok(())
    } else {
        Err(Error::DomainError { t, t_s })
    }
}

/// `g_s^kappa(t)` with default configuration. `depth_hint` caps the number of
/// pullback steps; it is doubled while the residual exceeds `eps`.
pub fn pullback_point(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t: f64,
    depth_hint: usize,
    eps: f64,
) -> Result<RaySample> {
    pullback_with(kappa, s, t, depth_hint, eps, &PullbackConfig::default()).map(|c| c.sample)
}

pub fn pullback_with(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t: f64,
    depth_hint: usize,
    eps: f64,
    cfg: &PullbackConfig,
) -> Result<RayChain> {
    let (t_s, fast) = ray_domain(s, cfg.k_max)?;
    pullback_in_domain(kappa, s, t, depth_hint, eps, cfg, t_s, fast)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn pullback_in_domain(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t: f64,
    depth_hint: usize,
    eps: f64,
    cfg: &PullbackConfig,
    t_s: f64,
    fast: bool,
) -> Result<RayChain> {
    if depth_hint == 0 || cfg.max_depth == 0 {
        return Err(Error::InvalidInput("pullback depth must be at least 1"));
    }
    check_domain(t, t_s, fast)?;
    let mut hint = depth_hint.min(cfg.max_depth);
    loop {
        let (chain, level_limited, floor) = pullback_once(kappa, s, t, hint, cfg)?;
        let r = chain.sample.residual;
        // A residual at the rounding floor cannot be improved by more depth.
        if r <= eps.max(floor) {
            return Ok(chain);
        }
        if level_limited || hint >= cfg.max_depth {
            return Err(Error::NoConvergence {
                residual: r,
                depth: chain.sample.depth,
            });
        }
        hint = hint.saturating_mul(2).min(cfg.max_depth);
    }
}

/// One pullback with at most `max_steps` logarithm steps. The flag reports
/// whether depth was limited by the level cap rather than by `max_steps`;
/// the last value is the rounding floor of the residual.
fn pullback_once(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t: f64,
    max_steps: usize,
    cfg: &PullbackConfig,
) -> Result<(RayChain, bool, f64)> {
    let kc = kappa.value();
    let levels = growth_levels(t, max_steps, cfg.r_cap);
    let mut n = levels.len() - 1;
    let level_limited = levels.len() < max_steps;

    let offsets = loop {
        match s.strip_offsets(n + 2) {
            Ok(o) if o[..=n].iter().all(|v| v.exact().is_some()) => break o,
            Ok(_) | Err(Error::OverflowDepth { .. }) if n > 0 => n -= 1,
            Ok(_) => return Err(Error::OverflowDepth { level: 1 }),
            Err(e) => return Err(e),
        }
    };
    let off = |k: usize| offsets[k - 1].exact().unwrap_or(0.0);
    let l_top = levels[n];

    // Logarithm of the deep seed at level N + 1.
    let w = top_log(kc, l_top, offsets[n + 1]);
    let scale = libm::exp(-w.re);

    let mut z = w + Complex64::new(0.0, off(n + 1));
    let mut d = -exp_c(-w);
    let mut chain = alloc::vec![Complex64::new(0.0, 0.0); n + 1];
    chain[n] = z;
    for k in (1..=n).rev() {
        let u = z - kc;
        if cabs(u) < cfg.tol_sing {
            return Err(Error::SingularHit { level: k, t });
        }
        z = principal_log(u) + Complex64::new(0.0, off(k));
        d = (d - 1.0) / u;
        chain[k - 1] = z;
    }

    let mut zs = Complex64::new(l_top, off(n + 1));
    for k in (1..=n).rev() {
        zs = principal_log(zs - kc) + Complex64::new(0.0, off(k));
    }

    let floor = 4.0 * f64::EPSILON * cabs(z).max(1.0);
    let diff = cabs(z - zs) * scale;
    let residual = if diff.is_nan() { f64::INFINITY } else { diff.max(floor) };

    let points = chain
        .iter()
        .map(|&c| ComplexPoint::from_complex(c))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::NoConvergence {
            residual: f64::INFINITY,
            depth: n + 1,
        })?;
    let dvalue = ComplexPoint::from_complex(d).map_err(|_| Error::NoConvergence {
        residual: f64::INFINITY,
        depth: n + 1,
    })?;
    let sample = RaySample {
        address: s.clone(),
        t,
        value: points[0],
        dvalue_dkappa: dvalue,
        depth: n + 1,
        residual,
    };
    Ok((RayChain { sample, points }, level_limited, floor))
}

/// `Log(F(l) + i b - kappa)` where `b` is the strip offset.
fn top_log(kappa: Complex64, l: f64, b: StripOffset) -> Complex64 {
    let a = libm::expm1(l);
    if let (Some(bv), true) = (b.exact(), a <= DIRECT_LIMIT) {
        if bv.abs() <= DIRECT_LIMIT {
            return principal_log(Complex64::new(a, bv) - kappa);
        }
    }
    // Here |F(l) + i b| > 1e300, so kappa is below rounding.
    let ln_a = ln_growth_f(l);
    let (sign_b, ln_b) = b.log_form();
    let gap = ln_b - ln_a;
    let re = ln_a.max(ln_b) + 0.5 * libm::log1p(libm::exp(-2.0 * gap.abs()));
    let im = sign_b * libm::atan(libm::exp(gap));
    Complex64::new(re, im)
}

fn exp_c(w: Complex64) -> Complex64 {
    exp_plus(Complex64::new(0.0, 0.0), w)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Truncation {
    Complete,
    PrematureEnd { at_t: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayTrace {
    pub address: ExternalAddress,
    pub kappa: ComplexPoint,
    /// Potentials strictly decreasing.
    pub samples: Vec<RaySample>,
    pub truncation: Truncation,
    /// Potentials whose pullback did not converge.
    pub failed: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceConfig {
    pub pullback: PullbackConfig,
    pub eps: f64,
    pub depth_hint: usize,
    /// Maximal bisection steps when locating a premature end.
    pub max_bisect: usize,
    /// Distance to the singular value accepted as a hit once the bracket
    /// has collapsed.
    pub hit_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            pullback: PullbackConfig::default(),
            eps: DEFAULT_EPS,
            depth_hint: DEFAULT_MAX_DEPTH,
            max_bisect: 60,
            hit_tol: 1e-6,
        }
    }
}

/// Geometrically spaced potentials from `t_hi` down to `t_lo`.
pub fn potential_grid(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    let ratio = t_lo / t_hi;
    (0..n)
        .map(|i| {
            if i == 0 {
                t_hi
            } else if i + 1 == n {
                t_lo
            } else {
                t_hi * libm::pow(ratio, i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

pub fn trace_ray(kappa: ComplexPoint, s: &ExternalAddress, t_lo: f64, t_hi: f64, n_samples: usize) -> Result<RayTrace> {
    trace_ray_with(kappa, s, t_lo, t_hi, n_samples, &TraceConfig::default())
}

/// Sample the ray at `n_samples` potentials. The trace stops with
/// `PrematureEnd` where a pullback meets the singular value, either at a
/// sample or between two samples (located by bisection).
pub fn trace_ray_with(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t_lo: f64,
    t_hi: f64,
    n_samples: usize,
    cfg: &TraceConfig,
) -> Result<RayTrace> {
    if n_samples < 2 {
        return Err(Error::InvalidInput("a trace needs at least two samples"));
    }
    if !(t_lo < t_hi) {
        return Err(Error::InvalidInput("t_lo must be below t_hi"));
    }
    let (t_s, fast) = ray_domain(s, cfg.pullback.k_max)?;
    check_domain(t_lo, t_s, fast)?;
    check_domain(t_hi, t_s, fast)?;

    let eval = |t: f64| pullback_in_domain(kappa, s, t, cfg.depth_hint, cfg.eps, &cfg.pullback, t_s, fast);

    let mut samples = Vec::with_capacity(n_samples);
    let mut failed = Vec::new();
    let mut truncation = Truncation::Complete;
    let mut prev: Option<RayChain> = None;

    for t in potential_grid(t_lo, t_hi, n_samples) {
        let chain = match eval(t) {
            Ok(c) => c,
            Err(Error::SingularHit { .. }) => {
                truncation = Truncation::PrematureEnd { at_t: t };
                break;
            }
            Err(Error::NoConvergence { .. }) => {
                failed.push(t);
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(p) = &prev {
            if let Some(at_t) = locate_crossing(kappa, p, &chain, &eval, cfg) {
                truncation = Truncation::PrematureEnd { at_t };
                break;
            }
        }
        samples.push(chain.sample.clone());
        prev = Some(chain);
    }

    Ok(RayTrace {
        address: s.clone(),
        kappa,
        samples,
        truncation,
        failed,
    })
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return cabs(p - a);
    }
    let u = ((p - a) * ab.conj()).re / len2;
    cabs(p - (a + ab * u.clamp(0.0, 1.0)))
}

/// Level `k >= 1` at which the pulled-back curve between two samples comes
/// suspiciously close to `kappa`, with the segment distance.
fn closest_level(kappa: Complex64, a: &RayChain, b: &RayChain) -> Option<(usize, f64)> {
    let depth = a.points.len().min(b.points.len());
    (1..depth)
        .filter_map(|k| {
            let (za, zb) = (a.points[k].value(), b.points[k].value());
            let d = segment_distance(kappa, za, zb);
            (d < 0.5 * cabs(za - zb)).then_some((k, d))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

fn locate_crossing<F>(kappa: ComplexPoint, hi: &RayChain, lo: &RayChain, eval: &F, cfg: &TraceConfig) -> Option<f64>
where
    F: Fn(f64) -> Result<RayChain>,
{
    let kc = kappa.value();
    let (k, _) = closest_level(kc, hi, lo)?;
    let mut a = hi.clone();
    let mut b = lo.clone();
    for _ in 0..cfg.max_bisect {
        let ta = a.sample.t;
        let tb = b.sample.t;
        let near = cabs(a.points[k].value() - kc).min(cabs(b.points[k].value() - kc));
        if (ta - tb).abs() <= 1e-14 * ta {
            return (near <= cfg.hit_tol).then_some(0.5 * (ta + tb));
        }
        let tm = 0.5 * (ta + tb);
        let m = match eval(tm) {
            Ok(m) if m.points.len() > k => m,
            Err(Error::SingularHit { .. }) => return Some(tm),
            _ => return None,
        };
        let zm = m.points[k].value();
        let da = segment_distance(kc, a.points[k].value(), zm);
        let db = segment_distance(kc, zm, b.points[k].value());
        let (d, keep_upper) = if da <= db { (da, true) } else { (db, false) };
        let seg = if keep_upper {
            cabs(a.points[k].value() - zm)
        } else {
            cabs(zm - b.points[k].value())
        };
        if d >= 0.5 * seg && d > cfg.hit_tol {
            return None;
        }
        if keep_upper {
            b = m;
        } else {
            a = m;
        }
    }
    let near = cabs(a.points[k].value() - kc).min(cabs(b.points[k].value() - kc));
    (near <= cfg.hit_tol).then_some(0.5 * (a.sample.t + b.sample.t))
}

/// Finite-difference validation of `d g / d kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeCheck {
    pub analytic: ComplexPoint,
    /// Mean of the two central differences.
    pub finite_diff: ComplexPoint,
    pub along_real: ComplexPoint,
    pub along_imag: ComplexPoint,
    pub rel_err: f64,
    /// `|along_real - along_imag| / max(1, |analytic|)`.
    pub direction_gap: f64,
}

pub fn ray_derivative_check(kappa: ComplexPoint, s: &ExternalAddress, t: f64, h: f64) -> Result<DerivativeCheck> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("step h must be positive"));
    }
    let g = |dk: Complex64| -> Result<Complex64> {
        let k = ComplexPoint::from_complex(kappa.value() + dk)?;
        Ok(pullback_point(k, s, t, DEFAULT_MAX_DEPTH, DEFAULT_EPS)?.value.value())
    };
    let analytic = pullback_point(kappa, s, t, DEFAULT_MAX_DEPTH, DEFAULT_EPS)?.dvalue_dkappa;
    let hr = Complex64::new(h, 0.0);
    let hi = Complex64::new(0.0, h);
    let along_real = (g(hr)? - g(-hr)?) / (2.0 * hr);
    let along_imag = (g(hi)? - g(-hi)?) / (2.0 * hi);
    let fd = (along_real + along_imag) * 0.5;
    let norm = analytic.norm().max(1.0);
    Ok(DerivativeCheck {
        analytic,
        finite_diff: ComplexPoint::from_complex(fd)?,
        along_real: ComplexPoint::from_complex(along_real)?,
        along_imag: ComplexPoint::from_complex(along_imag)?,
        rel_err: cabs(analytic.value() - fd) / norm,
        direction_gap: cabs(along_real - along_imag) / norm,
    })
}

/// Consecutive-level check of a chain against the functional equation:
/// `max_k |E_kappa(z_k) - z_{k+1}| / max(1, |z_{k+1}|)`.
pub fn chain_orbit_defect(kappa: ComplexPoint, points: &[ComplexPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let e = exp_plus(kappa.value(), w[0].value());
            cabs(e - w[1].value()) / w[1].norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// `F(t)`, the potential of the image point.
pub fn image_potential(t: f64) -> Result<f64> {
    growth_f(t)
}
