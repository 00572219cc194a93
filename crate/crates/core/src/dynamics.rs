//! Forward dynamics of `E_kappa(z) = exp(z) + kappa`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::growth::growth_f_inv_iter;
use crate::point::{cabs, ComplexPoint};

/// `Re z` above which `exp(z)` is not evaluated.
pub const DEFAULT_OVERFLOW_GUARD: f64 = 700.0;
pub const DEFAULT_TOL_STRIP: f64 = 1e-9;

/// Largest error estimate at which an orbit point's imaginary part is
/// still trusted.
const TRUSTED_IM_ERROR: f64 = 1e-3;
/// Per-step rounding allowance, in units of machine epsilon.
const ROUNDING_ULPS: f64 = 4.0;

pub fn eval_map(kappa: ComplexPoint, z: ComplexPoint) -> Result<ComplexPoint> {
    eval_map_guarded(kappa, z, DEFAULT_OVERFLOW_GUARD)
}

pub fn eval_map_guarded(kappa: ComplexPoint, z: ComplexPoint, guard: f64) -> Result<ComplexPoint> {
    if z.re() > guard {
        return Err(Error::OverflowDepth { level: 1 });
    }
    ComplexPoint::from_complex(exp_plus(kappa.value(), z.value())).map_err(|_| Error::OverflowDepth { level: 1 })
}

#[inline]
pub(crate) fn exp_plus(kappa: Complex64, z: Complex64) -> Complex64 {
    let r = libm::exp(z.re);
    let (s, c) = libm::sincos(z.im);
    Complex64::new(r * c + kappa.re, r * s + kappa.im)
}

/// `lambda = exp(kappa)`, the parameter of the conjugate family `z -> lambda exp(z)`.
pub fn lambda_of_kappa(kappa: ComplexPoint) -> Result<ComplexPoint> {
    eval_map(ComplexPoint::ZERO, kappa)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscapeParams {
    pub budget: usize,
    pub r_esc: f64,
    pub l_confirm: usize,
    pub guard: f64,
}

impl Default for EscapeParams {
    fn default() -> Self {
        EscapeParams {
            budget: 1000,
            r_esc: 50.0,
            l_confirm: 3,
            guard: DEFAULT_OVERFLOW_GUARD,
        }
    }
}

impl EscapeParams {
    pub fn with_budget(budget: usize) -> Self {
        EscapeParams {
            budget,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Verdict {
    Escaping { detected_at: usize },
    Bounded { budget: usize },
    Indeterminate,
}

impl Verdict {
    pub fn is_escaping(self) -> bool {
        matches!(self, Verdict::Escaping { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitRecord {
    pub kappa: ComplexPoint,
    pub points: Vec<ComplexPoint>,
    pub verdict: Verdict,
}

/// Iterate `z_{n+1} = E_kappa(z_n)` and classify the orbit.
///
/// A point counts toward an escape run when `Re z > r_esc` and its real
/// part at least doubles the previous one inside the run. `l_confirm`
/// consecutive run points give `Escaping`. A run point beyond `guard`
/// cannot be iterated further: it is reported as `Escaping` unless its
/// imaginary part is trusted and puts the next image in the left half plane.
pub fn escape_orbit(kappa: ComplexPoint, z0: ComplexPoint, params: &EscapeParams) -> OrbitRecord {
    let k = kappa.value();
    let mut points = Vec::with_capacity(params.budget.min(4096) + 1);
    points.push(z0);
    let mut z = z0.value();
    let mut err = rounding(cabs(z));
    let mut run = usize::from(z.re > params.r_esc);
    let mut verdict = None;

    for n in 0..params.budget {
        if z.re > params.guard {
            let heads_left = err < TRUSTED_IM_ERROR && libm::cos(z.im) <= 0.0;
            verdict = Some(if heads_left {
                Verdict::Indeterminate
            } else {
                Verdict::Escaping { detected_at: n }
            });
            break;
        }
        let e = libm::exp(z.re);
        let next = exp_plus(k, z);
        if !(next.re.is_finite() && next.im.is_finite()) {
            verdict = Some(Verdict::Indeterminate);
            break;
        }
        err = e * err + rounding(e + cabs(k));
        run = if next.re > params.r_esc {
            if run > 0 && next.re >= 2.0 * z.re {
                run + 1
            } else {
                1
            }
        } else {
            0
        };
        points.push(ComplexPoint::new(next.re, next.im).expect("finite"));
        if run >= params.l_confirm {
            verdict = Some(Verdict::Escaping { detected_at: n + 1 });
            break;
        }
        if next == z {
            verdict = Some(Verdict::Bounded { budget: params.budget });
            break;
        }
        z = next;
    }

    let verdict = verdict.unwrap_or_else(|| {
        let tail = &points[points.len() / 2..];
        if tail.iter().all(|p| p.norm() <= params.r_esc) {
            Verdict::Bounded { budget: params.budget }
        } else {
            Verdict::Indeterminate
        }
    });
    OrbitRecord { kappa, points, verdict }
}

#[inline]
fn rounding(scale: f64) -> f64 {
    ROUNDING_ULPS * f64::EPSILON * scale
}

/// Forward error estimate for each orbit point, from the linearised
/// recursion `e_{n+1} = |exp z_n| e_n + rounding`.
pub fn orbit_error_bounds(record: &OrbitRecord) -> Vec<f64> {
    let k = record.kappa.value();
    let mut out = Vec::with_capacity(record.points.len());
    let mut err = 0.0;
    for (i, p) in record.points.iter().enumerate() {
        if i == 0 {
            err = rounding(p.norm());
        } else {
            let prev = record.points[i - 1];
            let e = libm::exp(prev.re());
            err = e * err + rounding(e + cabs(k));
        }
        out.push(err);
    }
    out
}

/// Number of leading orbit points whose strip can be read off reliably.
pub fn reliable_depth(record: &OrbitRecord) -> usize {
    let bounds = orbit_error_bounds(record);
    record
        .points
        .iter()
        .zip(&bounds)
        .take_while(|(p, &e)| {
            // Exactly real orbits stay real regardless of accumulated error.
            let exact_real = p.im() == 0.0 && record.kappa.im() == 0.0 && record.points[0].im() == 0.0;
            exact_real || (e < TRUSTED_IM_ERROR && strip_boundary_distance(p.im()) > e + DEFAULT_TOL_STRIP)
        })
        .count()
}

fn strip_boundary_distance(im: f64) -> f64 {
    // Nearest odd multiple of pi.
    let odd = 2.0 * libm::round((im / PI - 1.0) / 2.0) + 1.0;
    (im - odd * PI).abs()
}

/// `s_k = round(Im z_{k-1} / 2 pi)` for `k = 1..=depth`.
pub fn orbit_address(record: &OrbitRecord, depth: usize) -> Result<Vec<i64>> {
    orbit_address_tol(record, depth, DEFAULT_TOL_STRIP)
}

pub fn orbit_address_tol(record: &OrbitRecord, depth: usize, tol_strip: f64) -> Result<Vec<i64>> {
    if record.points.len() < depth {
        return Err(Error::InvalidInput("orbit record is shorter than the requested depth"));
    }
    record.points[..depth]
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if strip_boundary_distance(p.im()) < tol_strip {
                Err(Error::BoundaryStrip { index })
            } else {
                Ok(libm::round(p.im() / TAU) as i64)
            }
        })
        .collect()
}

/// Potential of an escaping orbit: `F^{-n}(Re z_n)` averaged over the last
/// (up to three) trustworthy run points before detection.
pub fn orbit_potential(record: &OrbitRecord) -> Result<f64> {
    let detected_at = match record.verdict {
        Verdict::Escaping { detected_at } => detected_at,
        verdict => return Err(Error::NotEscaping { verdict }),
    };
    let bounds = orbit_error_bounds(record);
    let r_esc = EscapeParams::default().r_esc;
    let mut used: Vec<usize> = (0..=detected_at.min(record.points.len() - 1))
        .rev()
        .filter(|&n| {
            let p = record.points[n];
            let upstream = if n == 0 { 0.0 } else { bounds[n - 1] };
            p.re() > r_esc && upstream < TRUSTED_IM_ERROR
        })
        .take(3)
        .collect();
    if used.is_empty() {
        used.push(detected_at.min(record.points.len() - 1));
    }
    let mut sum = 0.0;
    for &n in &used {
        let re = record.points[n].re().max(0.0);
        sum += growth_f_inv_iter(re, n)?;
    }
    Ok(sum / used.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn map_values() {
        assert_eq!(eval_map(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(eval_map(c(-1.0, 0.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let v = eval_map(c(0.0, 1.0), c(0.0, PI)).unwrap();
        assert!((v.re() + 1.0).abs() < 1e-15 && (v.im() - 1.0).abs() < 1e-15);
        assert!(eval_map(c(0.0, 0.0), c(701.0, 0.0)).is_err());
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_of_kappa(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let l = lambda_of_kappa(c(-1.0, 0.0)).unwrap();
        assert!((l.re() - libm::exp(-1.0)).abs() < 1e-16);
        let l = lambda_of_kappa(c(core::f64::consts::LN_2, PI)).unwrap();
        assert!((l.re() + 2.0).abs() < 1e-15 && l.im().abs() < 1e-15);
    }

    #[test]
    fn zero_parameter_escapes() {
        let r = escape_orbit(c(0.0, 0.0), c(0.0, 0.0), &EscapeParams::with_budget(100));
        assert!(r.verdict.is_escaping(), "{:?}", r.verdict);
        // 0, 1, e, e^e, ...
        assert_eq!(r.points[1], c(1.0, 0.0));
        assert!((r.points[2].re() - core::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn minus_two_is_bounded() {
        let r = escape_orbit(c(-2.0, 0.0), c(-2.0, 0.0), &EscapeParams::with_budget(10_000));
        assert!(matches!(r.verdict, Verdict::Bounded { .. }), "{:?}", r.verdict);
        // Attracting fixed point of exp(x) - 2 near -1.8414.
        let last = *r.points.last().unwrap();
        assert!((libm::exp(last.re()) - 2.0 - last.re()).abs() < 1e-12);
    }

    #[test]
    fn parabolic_parameter_never_escapes() {
        let r = escape_orbit(c(-1.0, 0.0), c(-1.0, 0.0), &EscapeParams::with_budget(10_000));
        assert!(!r.verdict.is_escaping(), "{:?}", r.verdict);
        assert!(r.points.last().unwrap().re().abs() < 1e-2);
    }

    #[test]
    fn real_orbits_stay_real() {
        for &k in &[-2.5, -0.3, 0.0, 0.7, 2.0] {
            let r = escape_orbit(c(k, 0.0), c(k, 0.0), &EscapeParams::default());
            assert!(r.points.iter().all(|p| p.im() == 0.0));
            let depth = reliable_depth(&r);
            assert_eq!(depth, r.points.len());
            assert!(orbit_address(&r, depth).unwrap().iter().all(|&s| s == 0));
        }
    }

    #[test]
    fn conjugate_orbits_mirror() {
        for &(re, im) in &[(0.3, 1.2), (-0.5, 2.0), (1.0, -3.0), (-2.0, 0.4), (3.0, 7.0)] {
            let a = escape_orbit(c(re, im), c(re, im), &EscapeParams::default());
            let b = escape_orbit(c(re, -im), c(re, -im), &EscapeParams::default());
            assert_eq!(a.verdict, b.verdict);
            let d = reliable_depth(&a).min(reliable_depth(&b)).min(6);
            let sa = orbit_address(&a, d).unwrap();
            let sb = orbit_address(&b, d).unwrap();
            assert!(sa.iter().zip(&sb).all(|(x, y)| *x == -*y));
        }
    }

    #[test]
    fn address_read_off() {
        let rec = OrbitRecord {
            kappa: c(0.0, 0.0),
            points: alloc::vec![c(1.0, TAU), c(1.0, 0.0), c(1.0, PI)],
            verdict: Verdict::Indeterminate,
        };
        assert_eq!(orbit_address(&rec, 2).unwrap(), alloc::vec![1, 0]);
        assert_eq!(orbit_address(&rec, 3), Err(Error::BoundaryStrip { index: 2 }));
        assert!(orbit_address(&rec, 4).is_err());
    }

    #[test]
    fn potential_of_trivial_record() {
        let rec = OrbitRecord {
            kappa: c(0.0, 0.0),
            points: alloc::vec![c(4.25, 0.0)],
            verdict: Verdict::Escaping { detected_at: 0 },
        };
        assert_eq!(orbit_potential(&rec).unwrap(), 4.25);
        let bounded = OrbitRecord {
            verdict: Verdict::Bounded { budget: 1 },
            ..rec
        };
        assert!(matches!(orbit_potential(&bounded), Err(Error::NotEscaping { .. })));
    }

    #[test]
    fn boundary_distance() {
        assert!(strip_boundary_distance(PI) < 1e-15);
        assert!(strip_boundary_distance(-PI) < 1e-15);
        assert!((strip_boundary_distance(0.0) - PI).abs() < 1e-15);
        assert!((strip_boundary_distance(TAU) - PI).abs() < 1e-14);
        assert!((strip_boundary_distance(3.0 * PI + 0.5) - 0.5).abs() < 1e-14);
    }
}
