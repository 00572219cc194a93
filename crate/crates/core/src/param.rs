//! Parameter rays `G_s(t)`: the parameters `kappa` with `kappa = g_s^kappa(t)`.
//!
//! Solved by Newton's method on `h(kappa) = g_s^kappa(t) - kappa`, whose
//! derivative `d g / d kappa - 1` comes out of the pullback. Far out
//! (`t >= t_seed`) the ray hugs `t + 2 pi i s_1`, which seeds Newton directly;
//! smaller potentials are reached by continuation in `t`.

use alloc::vec::Vec;

use crate::address::{ExternalAddress, PotentialBound, SpeedClass, DEFAULT_K_MAX};
use crate::dynamics::{escape_orbit, orbit_address, orbit_potential, reliable_depth, EscapeParams, Verdict};
use crate::error::{Error, Result};
use crate::point::{cabs, ComplexPoint};
use crate::rays::{
    potential_grid, pullback_in_domain, pullback_point, ray_domain, PullbackConfig, DEFAULT_EPS, DEFAULT_MAX_DEPTH,
};

pub const DEFAULT_T_SEED: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamConfig {
    pub pullback: PullbackConfig,
    pub depth_hint: usize,
    pub t_seed: f64,
    pub max_newton: usize,
    pub step_init: f64,
    pub step_min: f64,
    /// Successive accepted parameters may differ by at most this much.
    pub max_jump: f64,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            pullback: PullbackConfig::default(),
            depth_hint: DEFAULT_MAX_DEPTH,
            t_seed: DEFAULT_T_SEED,
            max_newton: 40,
            step_init: 1.0,
            step_min: 1e-6,
            max_jump: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamRaySample {
    pub address: ExternalAddress,
    pub t: f64,
    pub kappa: ComplexPoint,
    /// `|g_s^kappa(t) - kappa|`.
    pub residual: f64,
    pub newton_iters: usize,
    /// `d g_s^kappa(t) / d kappa` at the solution.
    pub dvalue_dkappa: ComplexPoint,
    /// Pullback depth of the final evaluation.
    pub depth: usize,
}

struct Solver<'a> {
    s: &'a ExternalAddress,
    cfg: &'a ParamConfig,
    eps: f64,
    t_s: f64,
    fast: bool,
    steps: usize,
}

impl<'a> Solver<'a> {
    fn new(s: &'a ExternalAddress, eps: f64, cfg: &'a ParamConfig) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("eps must be positive"));
        }
        let (t_s, fast) = ray_domain(s, cfg.pullback.k_max)?;
        Ok(Solver {
            s,
            cfg,
            eps,
            t_s,
            fast,
            steps: 0,
        })
    }

    fn check(&self, t: f64) -> Result<()> {
        let ok = t.is_finite()
            && t > 0.0
            && if self.fast {
                t >= self.t_s - crate::rays::DOMAIN_TOL
            } else {
                t > self.t_s
            };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainError { t, t_s: self.t_s })
        }
    }

    fn seed(&self, t: f64) -> Result<ComplexPoint> {
        let off = self
            .s
            .strip_offset(1)?
            .exact()
            .ok_or(Error::OverflowDepth { level: 1 })?;
        ComplexPoint::new(t, off)
    }

    fn newton(&self, t: f64, seed: ComplexPoint) -> Result<ParamRaySample> {
        let pb_eps = self.eps.min(DEFAULT_EPS);
        let target = (self.eps * 1e-4).max(1e-15);
        let mut kappa = seed;
        let mut best: Option<(f64, ComplexPoint, usize, ComplexPoint, usize)> = None;
        let mut prev_h = f64::INFINITY;
        for it in 0..=self.cfg.max_newton {
            let g = pullback_in_domain(
                kappa,
                self.s,
                t,
                self.cfg.depth_hint,
                pb_eps,
                &self.cfg.pullback,
                self.t_s,
                self.fast,
            )?;
            let h = g.sample.value.value() - kappa.value();
            let hn = cabs(h);
            if best.is_none_or(|b| hn < b.0) {
                best = Some((hn, kappa, it, g.sample.dvalue_dkappa, g.sample.depth));
            }
            let stalled = hn > 0.5 * prev_h;
            if hn <= target || (stalled && hn <= self.eps) {
                break;
            }
            if it == self.cfg.max_newton {
                break;
            }
            prev_h = hn;
            let step = h / (g.sample.dvalue_dkappa.value() - 1.0);
            kappa = ComplexPoint::from_complex(kappa.value() - step).map_err(|_| Error::NoConvergence {
                residual: f64::INFINITY,
                depth: g.sample.depth,
            })?;
        }
        let (residual, kappa, iters, dvalue_dkappa, depth) = best.expect("at least one evaluation");
        if residual <= self.eps {
            Ok(ParamRaySample {
                address: self.s.clone(),
                t,
                kappa,
                residual,
                newton_iters: iters,
                dvalue_dkappa,
                depth,
            })
        } else {
            Err(Error::NoConvergence {
                residual,
                depth: self.cfg.depth_hint,
            })
        }
    }

    /// Continue from `from` down to potential `to`. Accepted intermediate
    /// points are passed to `visit`.
    fn follow(
        &mut self,
        from: ParamRaySample,
        to: f64,
        mut visit: impl FnMut(&ParamRaySample),
    ) -> Result<ParamRaySample> {
        let mut cur = from;
        let mut dt = self.cfg.step_init;
        let mut streak = 0;
        while cur.t > to {
            let tn = (cur.t - dt).max(to);
            let attempt = self.newton(tn, cur.kappa);
            match attempt {
                Ok(next) if next.kappa.distance(cur.kappa) <= self.cfg.max_jump => {
                    self.steps += 1;
                    cur = next;
                    if cur.t > to {
                        visit(&cur);
                    }
                    streak += 1;
                    if streak >= 3 {
                        dt *= 2.0;
                        streak = 0;
                    }
                }
                Ok(_) | Err(Error::NoConvergence { .. }) | Err(Error::SingularHit { .. }) => {
                    dt *= 0.5;
                    streak = 0;
                    if dt < self.cfg.step_min {
                        return Err(Error::ContinuationStuck { last_t: cur.t });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(cur)
    }

    /// `G_s(t)` from the asymptotic seed, continuing down from `t_seed` if needed.
    fn solve(&mut self, t: f64) -> Result<(ParamRaySample, ComplexPoint)> {
        self.check(t)?;
        let t0 = t.max(self.cfg.t_seed);
        let seed = self.seed(t0)?;
        let start = self.newton(t0, seed)?;
        let end = self.follow(start, t, |_| {})?;
        Ok((end, seed))
    }
}

/// `G_s(t)` with residual at most `eps`.
pub fn solve_parameter(s: &ExternalAddress, t: f64, eps: f64) -> Result<ParamRaySample> {
    solve_parameter_with(s, t, eps, &ParamConfig::default())
}

pub fn solve_parameter_with(s: &ExternalAddress, t: f64, eps: f64, cfg: &ParamConfig) -> Result<ParamRaySample> {
    Solver::new(s, eps, cfg)?.solve(t).map(|r| r.0)
}

/// Plain Newton at potential `t` from a given starting parameter.
pub fn newton_at(s: &ExternalAddress, t: f64, seed: ComplexPoint, eps: f64) -> Result<ParamRaySample> {
    let cfg = ParamConfig::default();
    let solver = Solver::new(s, eps, &cfg)?;
    solver.check(t)?;
    solver.newton(t, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamRayTrace {
    pub address: ExternalAddress,
    /// Potentials strictly decreasing.
    pub samples: Vec<ParamRaySample>,
    /// Starting point of the first Newton solve.
    pub seed: ComplexPoint,
    /// Number of accepted continuation steps.
    pub continuation_steps: usize,
    pub t_s: f64,
}

/// Sample `G_s` at geometrically spaced potentials from `t_hi` to `t_lo`.
/// Where two consecutive samples are further apart than `max_jump` the
/// intermediate continuation points are kept as extra samples.
pub fn trace_parameter_ray(s: &ExternalAddress, t_lo: f64, t_hi: f64, n_samples: usize) -> Result<ParamRayTrace> {
    trace_parameter_ray_with(s, t_lo, t_hi, n_samples, DEFAULT_EPS, &ParamConfig::default())
}

pub fn trace_parameter_ray_with(
    s: &ExternalAddress,
    t_lo: f64,
    t_hi: f64,
    n_samples: usize,
    eps: f64,
    cfg: &ParamConfig,
) -> Result<ParamRayTrace> {
    if n_samples < 2 {
        return Err(Error::InvalidInput("a trace needs at least two samples"));
    }
    if !(t_lo < t_hi) {
        return Err(Error::InvalidInput("t_lo must be below t_hi"));
    }
    let mut solver = Solver::new(s, eps, cfg)?;
    solver.check(t_lo)?;
    let grid = potential_grid(t_lo, t_hi, n_samples);
    let (first, seed) = solver.solve(grid[0])?;
    let mut samples = alloc::vec![first];
    for &t in &grid[1..] {
        let prev = samples.last().cloned().expect("nonempty");
        let mut between = Vec::new();
        let next = solver.follow(prev.clone(), t, |x| between.push(x.clone()))?;
        if next.kappa.distance(prev.kappa) > cfg.max_jump {
            samples.extend(between);
        }
        samples.push(next);
    }
    Ok(ParamRayTrace {
        address: s.clone(),
        samples,
        seed,
        continuation_steps: solver.steps,
        t_s: solver.t_s,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Endpoint {
    pub sample: ParamRaySample,
    pub t_s: PotentialBound,
    pub verdict: Verdict,
    pub continuation_steps: usize,
}

/// Landing point `G_s(t_s)` of a fast parameter ray; the singular orbit of
/// the result must escape.
pub fn land_endpoint(s: &ExternalAddress, eps: f64) -> Result<Endpoint> {
    land_endpoint_with(s, eps, &ParamConfig::default(), &EscapeParams::default())
}

pub fn land_endpoint_with(s: &ExternalAddress, eps: f64, cfg: &ParamConfig, escape: &EscapeParams) -> Result<Endpoint> {
    if s.speed() != SpeedClass::Fast {
        return Err(Error::NotFastAddress);
    }
    let bound = s.potential_bound(cfg.pullback.k_max.max(DEFAULT_K_MAX))?;
    let mut solver = Solver::new(s, eps, cfg)?;
    let (sample, _) = solver.solve(bound.estimate)?;
    let verdict = escape_orbit(sample.kappa, sample.kappa, escape).verdict;
    if !verdict.is_escaping() {
        return Err(Error::NotEscaping { verdict });
    }
    Ok(Endpoint {
        sample,
        t_s: bound,
        verdict,
        continuation_steps: solver.steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    /// Strip indices read off the reliable part of the singular orbit.
    pub observed: Vec<i64>,
    /// `observed`, extended as an eventually periodic address.
    pub address: ExternalAddress,
    pub t: f64,
    pub verified_kappa: ComplexPoint,
    pub roundtrip_error: f64,
}

impl ClassificationResult {
    /// First `n` entries of the extended address.
    pub fn address_prefix(&self, n: usize) -> Vec<i64> {
        self.address.entries(n).expect("periodic entries are always defined")
    }
}

/// Shortest eventually periodic reading of a finite prefix: the smallest
/// period `p`, then the smallest preamble `q`, such that `obs[q..]` is
/// `p`-periodic and shows the period at least once plus one entry.
pub fn extend_periodically(obs: &[i64]) -> Result<ExternalAddress> {
    let n = obs.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty prefix"));
    }
    for p in 1..n {
        for q in 0..n {
            if n - q < p + 1 {
                break;
            }
            if (q + p..n).all(|i| obs[i] == obs[i - p]) {
                return ExternalAddress::periodic(obs[..q].to_vec(), obs[q..q + p].to_vec());
            }
        }
    }
    ExternalAddress::periodic(Vec::new(), obs.to_vec())
}

/// Polishes an orbit-derived potential by solving `g_s^kappa(t) = kappa` for
/// real `t` (Gauss-Newton, central differences). Falls back to `t0`.
fn refine_potential(kappa: ComplexPoint, s: &ExternalAddress, t0: f64) -> f64 {
    let g = |t: f64| pullback_point(kappa, s, t, 64, 1e-13).map(|r| r.value.value());
    let mut t = t0;
    for _ in 0..8 {
        let h = 1e-5 * t.max(1.0);
        let (Ok(v), Ok(vp), Ok(vm)) = (g(t), g(t + h), g(t - h)) else {
            return t0;
        };
        let dg = (vp - vm) / (2.0 * h);
        let r = v - kappa.value();
        let den = dg.norm_sqr();
        if !(den > 0.0) {
            return t0;
        }
        let step = (r.re * dg.re + r.im * dg.im) / den;
        let next = t - step;
        if !(next > 0.0) || !next.is_finite() {
            return t0;
        }
        t = next;
        if step.abs() <= 1e-15 * t.max(1.0) {
            break;
        }
    }
    t
}

pub fn classify_parameter(kappa: ComplexPoint, budget: usize, eps: f64) -> Result<ClassificationResult> {
    let escape = EscapeParams::with_budget(budget);
    let record = escape_orbit(kappa, kappa, &escape);
    if !record.verdict.is_escaping() {
        return Err(Error::NotEscaping {
            verdict: record.verdict,
        });
    }
    let depth = reliable_depth(&record);
    if depth == 0 {
        return Err(Error::BoundaryStrip { index: 0 });
    }
    let observed = orbit_address(&record, depth)?;
    let address = extend_periodically(&observed)?;
    let t = refine_potential(kappa, &address, orbit_potential(&record)?);
    let solved = solve_parameter(&address, t, eps.min(DEFAULT_EPS))?;
    let roundtrip_error = solved.kappa.distance(kappa);
    if !(roundtrip_error <= eps) {
        return Err(Error::RoundtripFailure { error: roundtrip_error });
    }
    Ok(ClassificationResult {
        observed,
        address,
        t,
        verified_kappa: solved.kappa,
        roundtrip_error,
    })
}
