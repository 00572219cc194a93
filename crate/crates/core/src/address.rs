//! External addresses: integer sequences `s_1 s_2 s_3 ...` recording which
//! horizontal strip `((2 s_k - 1) pi, (2 s_k + 1) pi)` the `k`-th orbit point
//! occupies.
//!
//! Two finitely describable families are supported:
//!
//! * eventually periodic addresses `preamble . period period ...`, all slow;
//! * the canonical fast family `s_k = sign * floor(F^{k-1}(x) / 2 pi)`,
//!   optionally preceded by a finite prefix and with leading generator
//!   entries dropped, so that shifting and prepending stay exact.
//!
//! Entries of the fast family outgrow `i64` after a handful of indices.
//! [`ExternalAddress::entry`] reports those as `OverflowDepth`, while
//! [`ExternalAddress::strip_offset`] gives `2 pi s_k` as a float (or its
//! logarithm) for as long as the magnitude stays representable.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::growth::{growth_f_inv_iter, ln_growth_f, EXP_ARG_MAX};

/// Magnitude above which strip offsets switch to logarithmic form.
const REPRESENTABLE: f64 = 1e300;

/// Default truncation index for the `t_s` estimate.
pub const DEFAULT_K_MAX: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AddressForm {
    EventuallyPeriodic {
        preamble: Vec<i64>,
        period: Vec<i64>,
    },
    /// `prefix`, then generator entries `skip + 1, skip + 2, ...`.
    FastGenerator {
        prefix: Vec<i64>,
        x: f64,
        sign: Sign,
        skip: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedClass {
    Slow,
    Fast,
    Undetermined,
}

/// `2 pi s_k`, either as a float or as `sign * exp(ln_abs)` once it exceeds
/// the representable range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StripOffset {
    Exact(f64),
    Log { sign: f64, ln_abs: f64 },
}

impl StripOffset {
    pub fn exact(self) -> Option<f64> {
        match self {
            StripOffset::Exact(v) => Some(v),
            StripOffset::Log { .. } => None,
        }
    }

    /// `(sign, ln|value|)`; `ln_abs` is `-inf` for a zero offset.
    pub fn log_form(self) -> (f64, f64) {
        match self {
            StripOffset::Exact(v) => {
                let sign = if v < 0.0 { -1.0 } else { 1.0 };
                (sign, libm::log(v.abs()))
            }
            StripOffset::Log { sign, ln_abs } => (sign, ln_abs),
        }
    }
}

/// Result of [`ExternalAddress::potential_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialBound {
    pub estimate: f64,
    pub exact: bool,
    /// Upper bound on `t_s - estimate` (zero when exact).
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalAddress {
    form: AddressForm,
}

impl ExternalAddress {
    pub fn periodic(preamble: Vec<i64>, period: Vec<i64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidInput(
                "period of an eventually periodic address must be nonempty",
            ));
        }
        Ok(ExternalAddress {
            form: AddressForm::EventuallyPeriodic { preamble, period },
        })
    }

    /// The constant address `n n n ...`.
    pub fn constant(n: i64) -> Self {
        ExternalAddress {
            form: AddressForm::EventuallyPeriodic {
                preamble: Vec::new(),
                period: alloc::vec![n],
            },
        }
    }

    pub fn fast(x: f64, sign: Sign) -> Result<Self> {
        Self::fast_with(Vec::new(), x, sign, 0)
    }

    pub fn fast_with(prefix: Vec<i64>, x: f64, sign: Sign, skip: usize) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput("fast generator requires finite x > 0"));
        }
        Ok(ExternalAddress {
            form: AddressForm::FastGenerator { prefix, x, sign, skip },
        })
    }

    pub fn form(&self) -> &AddressForm {
        &self.form
    }

    /// `s_k` for `k >= 1`.
    pub fn entry(&self, k: usize) -> Result<i64> {
        if k == 0 {
            return Err(Error::InvalidInput("address entries are indexed from 1"));
        }
        match &self.form {
            AddressForm::EventuallyPeriodic { preamble, period } => Ok(periodic_entry(preamble, period, k)),
            AddressForm::FastGenerator { prefix, x, sign, skip } => {
                if k <= prefix.len() {
                    return Ok(prefix[k - 1]);
                }
                let m = k - prefix.len() + skip;
                let level = generator_level(*x, m - 1).ok_or(Error::OverflowDepth { level: k })?;
                let q = libm::floor(level / TAU);
                // 2^63 as f64; anything at or above does not fit.
                if q >= 9.223_372_036_854_776e18 {
                    return Err(Error::OverflowDepth { level: k });
                }
                Ok(match sign {
                    Sign::Plus => q as i64,
                    Sign::Minus => -(q as i64),
                })
            }
        }
    }

    /// First `n` entries.
    pub fn entries(&self, n: usize) -> Result<Vec<i64>> {
        (1..=n).map(|k| self.entry(k)).collect()
    }

    /// `2 pi s_k`.
    pub fn strip_offset(&self, k: usize) -> Result<StripOffset> {
        let mut v = self.strip_offsets(k)?;
        v.pop().ok_or(Error::InvalidInput("address entries are indexed from 1"))
    }

    /// `2 pi s_k` for `k = 1..=count`, in one pass.
    pub fn strip_offsets(&self, count: usize) -> Result<Vec<StripOffset>> {
        let mut out = Vec::with_capacity(count);
        match &self.form {
            AddressForm::EventuallyPeriodic { preamble, period } => {
                for k in 1..=count {
                    out.push(StripOffset::Exact(TAU * periodic_entry(preamble, period, k) as f64));
                }
            }
            AddressForm::FastGenerator { prefix, x, sign, skip } => {
                let sign = sign.factor();
                for k in 1..=count.min(prefix.len()) {
                    out.push(StripOffset::Exact(TAU * prefix[k - 1] as f64));
                }
                if count > prefix.len() {
                    // Walk generator levels F^j(x), emitting from j = skip on.
                    let mut prev = f64::NAN;
                    let mut level = *x;
                    let mut j = 0usize;
                    let mut k = prefix.len() + 1;
                    let first = *skip;
                    while k <= count {
                        if j >= first {
                            let off = if level.is_finite() && level <= REPRESENTABLE {
                                StripOffset::Exact(sign * TAU * libm::floor(level / TAU))
                            } else if prev.is_finite() && prev <= REPRESENTABLE {
                                // ln(2 pi floor(F(p) / 2 pi)) == ln F(p) to double precision here.
                                StripOffset::Log {
                                    sign,
                                    ln_abs: ln_growth_f(prev),
                                }
                            } else {
                                return Err(Error::OverflowDepth { level: k });
                            };
                            out.push(off);
                            k += 1;
                        }
                        prev = level;
                        level = if level.is_finite() && level <= EXP_ARG_MAX {
                            libm::expm1(level)
                        } else {
                            f64::INFINITY
                        };
                        j += 1;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The shift `s_1 s_2 s_3 ... -> s_2 s_3 ...`.
    pub fn shift(&self) -> Self {
        let form = match &self.form {
            AddressForm::EventuallyPeriodic { preamble, period } => {
                if preamble.is_empty() {
                    let mut p = period.clone();
                    p.rotate_left(1);
                    AddressForm::EventuallyPeriodic {
                        preamble: Vec::new(),
                        period: p,
                    }
                } else {
                    AddressForm::EventuallyPeriodic {
                        preamble: preamble[1..].to_vec(),
                        period: period.clone(),
                    }
                }
            }
            AddressForm::FastGenerator { prefix, x, sign, skip } => {
                if prefix.is_empty() {
                    AddressForm::FastGenerator {
                        prefix: Vec::new(),
                        x: *x,
                        sign: *sign,
                        skip: skip + 1,
                    }
                } else {
                    AddressForm::FastGenerator {
                        prefix: prefix[1..].to_vec(),
                        x: *x,
                        sign: *sign,
                        skip: *skip,
                    }
                }
            }
        };
        ExternalAddress { form }
    }

    /// `n s_1 s_2 ...`, the address of a preimage ray.
    pub fn prepend(&self, n: i64) -> Self {
        let mut form = self.form.clone();
        match &mut form {
            AddressForm::EventuallyPeriodic { preamble, .. } => preamble.insert(0, n),
            AddressForm::FastGenerator { prefix, .. } => prefix.insert(0, n),
        }
        ExternalAddress { form }
    }

    /// Entrywise negation `-s`.
    pub fn negate(&self) -> Self {
        let form = match &self.form {
            AddressForm::EventuallyPeriodic { preamble, period } => AddressForm::EventuallyPeriodic {
                preamble: preamble.iter().map(|v| -v).collect(),
                period: period.iter().map(|v| -v).collect(),
            },
            AddressForm::FastGenerator { prefix, x, sign, skip } => AddressForm::FastGenerator {
                prefix: prefix.iter().map(|v| -v).collect(),
                x: *x,
                sign: sign.flip(),
                skip: *skip,
            },
        };
        ExternalAddress { form }
    }

    pub fn speed(&self) -> SpeedClass {
        match self.form {
            AddressForm::EventuallyPeriodic { .. } => SpeedClass::Slow,
            AddressForm::FastGenerator { .. } => SpeedClass::Fast,
        }
    }

    /// Estimate of `t_s = limsup F^{-(k-1)}(2 pi |s_k|)`.
    ///
    /// Bounded addresses give `0` exactly. For the fast family the estimate
    /// is the maximum over the window `k in [k_max / 2, k_max]`, evaluated in
    /// inverse-iterated coordinates; `uncertainty` bounds how far below the
    /// true limsup it can sit.
    pub fn potential_bound(&self, k_max: usize) -> Result<PotentialBound> {
        if k_max == 0 {
            return Err(Error::InvalidInput("k_max must be positive"));
        }
        match &self.form {
            AddressForm::EventuallyPeriodic { .. } => Ok(PotentialBound {
                estimate: 0.0,
                exact: true,
                uncertainty: 0.0,
            }),
            AddressForm::FastGenerator { prefix, x, skip, .. } => {
                let p = prefix.len();
                let limit_inner = generator_level(*x, *skip).ok_or(Error::OverflowDepth { level: *skip })?;
                let lo = (k_max / 2).max(1);
                let mut estimate = 0.0f64;
                let mut delta = f64::INFINITY;
                for k in lo..=k_max {
                    let (v, d) = if k <= p {
                        let u = TAU * (prefix[k - 1].unsigned_abs() as f64);
                        (inverse_with_slope(u, k - 1).0, f64::INFINITY)
                    } else {
                        let m = k - p + skip;
                        match generator_level(*x, m - 1) {
                            Some(level) if level <= REPRESENTABLE => {
                                let u = TAU * libm::floor(level / TAU);
                                let (v, slope) = inverse_with_slope(u, k - 1);
                                (v, TAU * slope)
                            }
                            // Generator term sits below F^{skip}(x) by less than
                            // one ulp after pulling back to the skip level.
                            _ => (growth_f_inv_iter(limit_inner, p)?, 0.0),
                        }
                    };
                    estimate = estimate.max(v);
                    delta = delta.min(d);
                }
                let floor = 16.0 * f64::EPSILON * estimate.max(1.0);
                Ok(PotentialBound {
                    estimate,
                    exact: false,
                    uncertainty: delta.max(floor),
                })
            }
        }
    }

    /// Canonical literal, see the [`FromStr`] impl.
    pub fn literal(&self) -> String {
        self.to_string()
    }
}

fn periodic_entry(preamble: &[i64], period: &[i64], k: usize) -> i64 {
    if k <= preamble.len() {
        preamble[k - 1]
    } else {
        period[(k - 1 - preamble.len()) % period.len()]
    }
}

/// `F^n(x)` if it stays finite.
fn generator_level(x: f64, n: usize) -> Option<f64> {
    let mut v = x;
    for _ in 0..n {
        if v > EXP_ARG_MAX {
            return None;
        }
        v = libm::expm1(v);
    }
    v.is_finite().then_some(v)
}

/// `(F^{-n}(u), d/du F^{-n}(u))`.
fn inverse_with_slope(u: f64, n: usize) -> (f64, f64) {
    let mut v = u;
    let mut slope = 1.0;
    for _ in 0..n {
        slope /= 1.0 + v;
        v = libm::log1p(v);
    }
    (v, slope)
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[i64]) -> fmt::Result {
    for (i, e) in v.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Literal grammar:
///
/// ```text
/// address  := "p:" [ints] "|" ints
///           | "f:" [ints "|"] ["-"] real ["@" uint]
/// ints     := int ("," int)*
/// ```
///
/// `p:1,2|3,4` is `1 2 3 4 3 4 ...`; `f:2.0` and `f:-2.0` are the fast
/// family with `x = 2` and sign `+`/`-`; `f:0|1.0` prepends `0`; `@n` drops
/// the first `n` generator entries.
impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            AddressForm::EventuallyPeriodic { preamble, period } => {
                f.write_str("p:")?;
                write_list(f, preamble)?;
                f.write_str("|")?;
                write_list(f, period)
            }
            AddressForm::FastGenerator { prefix, x, sign, skip } => {
                f.write_str("f:")?;
                if !prefix.is_empty() {
                    write_list(f, prefix)?;
                    f.write_str("|")?;
                }
                if *sign == Sign::Minus {
                    f.write_str("-")?;
                }
                write!(f, "{x:?}")?;
                if *skip > 0 {
                    write!(f, "@{skip}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ExternalAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &'static str| Error::AddressParse {
            literal: s.to_string(),
            reason,
        };
        let s_trim = s.trim();
        if let Some(body) = s_trim.strip_prefix("p:") {
            let (pre, per) = body
                .split_once('|')
                .ok_or_else(|| fail("missing '|' between preamble and period"))?;
            let preamble = parse_ints(pre).ok_or_else(|| fail("bad integer in preamble"))?;
            let period = parse_ints(per).ok_or_else(|| fail("bad integer in period"))?;
            if period.is_empty() {
                return Err(fail("period must be nonempty"));
            }
            ExternalAddress::periodic(preamble, period)
        } else if let Some(body) = s_trim.strip_prefix("f:") {
            let (prefix, rest) = match body.split_once('|') {
                Some((pre, rest)) => {
                    let prefix = parse_ints(pre).ok_or_else(|| fail("bad integer in prefix"))?;
                    if prefix.is_empty() {
                        return Err(fail("empty prefix before '|'"));
                    }
                    (prefix, rest)
                }
                None => (Vec::new(), body),
            };
            let (gen, skip) = match rest.split_once('@') {
                Some((g, k)) => (g, k.trim().parse::<usize>().map_err(|_| fail("bad skip count"))?),
                None => (rest, 0),
            };
            let gen = gen.trim();
            let (sign, mag) = match gen.strip_prefix('-') {
                Some(m) => (Sign::Minus, m),
                None => (Sign::Plus, gen.strip_prefix('+').unwrap_or(gen)),
            };
            let x: f64 = mag.parse().map_err(|_| fail("bad generator value"))?;
            if !(x > 0.0) || !x.is_finite() {
                return Err(fail("generator value must be finite and positive"));
            }
            ExternalAddress::fast_with(prefix, x, sign, skip)
        } else {
            Err(fail("expected 'p:' or 'f:' prefix"))
        }
    }
}

fn parse_ints(s: &str) -> Option<Vec<i64>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<i64>().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(pre: &[i64], per: &[i64]) -> ExternalAddress {
        ExternalAddress::periodic(pre.to_vec(), per.to_vec()).unwrap()
    }

    #[test]
    fn periodic_entries() {
        assert_eq!(p(&[], &[2, 3]).entry(3).unwrap(), 2);
        assert_eq!(p(&[7], &[0]).entry(1).unwrap(), 7);
        assert_eq!(p(&[7], &[0]).entry(2).unwrap(), 0);
        assert!(p(&[], &[1]).entry(0).is_err());
    }

    #[test]
    fn fast_entries() {
        let f = ExternalAddress::fast(2.0, Sign::Plus).unwrap();
        assert_eq!(f.entry(1).unwrap(), 0);
        // F(2) = 6.389 -> floor(6.389 / 2 pi) = 1; F^2(2) = 594.29 -> 94.
        assert_eq!(f.entry(2).unwrap(), 1);
        assert_eq!(f.entry(3).unwrap(), 94);
        assert_eq!(f.entry(4), Err(Error::OverflowDepth { level: 4 }));
        let g = ExternalAddress::fast(2.0, Sign::Minus).unwrap();
        assert_eq!(g.entry(3).unwrap(), -94);
    }

    #[test]
    fn empty_period_rejected() {
        assert!(ExternalAddress::periodic(vec![1], vec![]).is_err());
        assert!(ExternalAddress::fast(0.0, Sign::Plus).is_err());
        assert!(ExternalAddress::fast(f64::NAN, Sign::Plus).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(p(&[1], &[2, 3]).shift(), p(&[], &[2, 3]));
        assert_eq!(p(&[], &[5]).shift(), p(&[], &[5]));
        assert_eq!(p(&[], &[1, 2, 3]).shift(), p(&[], &[2, 3, 1]));
    }

    fn corpus() -> Vec<ExternalAddress> {
        vec![
            p(&[], &[0]),
            p(&[3, -1], &[4]),
            p(&[2], &[-1, 3]),
            p(&[], &[1, 2, 3]),
            ExternalAddress::fast(1.0, Sign::Plus).unwrap(),
            ExternalAddress::fast(2.0, Sign::Minus).unwrap(),
            ExternalAddress::fast(0.05, Sign::Plus).unwrap(),
            "f:0,5|1.5@1".parse().unwrap(),
        ]
    }

    #[test]
    fn shift_matches_entries() {
        for s in corpus() {
            let t = s.shift();
            for k in 1..=64 {
                match (t.entry(k), s.entry(k + 1)) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b, "{s} k={k}"),
                    (Err(_), Err(_)) => {}
                    other => panic!("{s} k={k}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn fast_shift_entrywise_first_twenty() {
        let s = ExternalAddress::fast(2.0, Sign::Plus).unwrap();
        let t = s.shift();
        for k in 1..=20 {
            match (t.entry(k), s.entry(k + 1)) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => panic!("mismatch at {k}: {other:?}"),
            }
        }
    }

    #[test]
    fn offsets_agree_with_entries() {
        for s in corpus() {
            let offs = s.strip_offsets(12).unwrap_or_default();
            for (i, off) in offs.iter().enumerate() {
                if let (Ok(e), StripOffset::Exact(v)) = (s.entry(i + 1), off) {
                    assert_eq!(*v, TAU * e as f64, "{s} k={}", i + 1);
                }
            }
        }
        let f = ExternalAddress::fast(2.0, Sign::Plus).unwrap();
        // F^3(2) ~ 1e258 is still a float; F^4(2) needs log form.
        let offs = f.strip_offsets(5).unwrap();
        assert!(matches!(offs[3], StripOffset::Exact(v) if v > 1e257));
        match offs[4] {
            StripOffset::Log { sign, ln_abs } => {
                assert_eq!(sign, 1.0);
                assert!((ln_abs / 1e258 - 1.0).abs() < 0.5);
            }
            o => panic!("{o:?}"),
        }
        assert!(f.strip_offsets(6).is_err());
    }

    #[test]
    fn potential_bounds() {
        let b = p(&[], &[0]).potential_bound(100).unwrap();
        assert_eq!((b.estimate, b.exact), (0.0, true));
        let b = p(&[3, -1], &[4]).potential_bound(100).unwrap();
        assert_eq!((b.estimate, b.exact), (0.0, true));

        let f = ExternalAddress::fast(2.0, Sign::Plus).unwrap();
        let b = f.potential_bound(40).unwrap();
        assert!(!b.exact);
        assert!((b.estimate - 2.0).abs() < 0.05, "{b:?}");
    }

    #[test]
    fn potential_bound_in_inverse_coordinates_matches_direct_terms() {
        // Direct oracle: F^{-(k-1)}(2 pi s_k) for the representable entries of f:1.0.
        let f = ExternalAddress::fast(1.0, Sign::Plus).unwrap();
        let mut best: f64 = 0.0;
        for k in 1..=4 {
            let e = f.entry(k).unwrap() as f64;
            best = best.max(growth_f_inv_iter(TAU * e, k - 1).unwrap());
        }
        let b = f.potential_bound(4).unwrap();
        assert_eq!(b.estimate, best);
        assert!(best <= 1.0);
        // Deeper windows approach x = 1 from below.
        let deep = f.potential_bound(60).unwrap();
        assert!((deep.estimate - 1.0).abs() <= deep.uncertainty);
    }

    #[test]
    fn potential_bound_stable_under_doubling() {
        for x in [0.3, 1.0, 2.0, 3.5] {
            let f = ExternalAddress::fast(x, Sign::Plus).unwrap();
            for k_max in [4usize, 6, 10, 30] {
                let a = f.potential_bound(k_max).unwrap();
                let b = f.potential_bound(2 * k_max).unwrap();
                assert!(
                    (a.estimate - b.estimate).abs() <= a.uncertainty,
                    "x={x} k={k_max} {a:?} {b:?}"
                );
                assert!(a.estimate <= x + 1e-12);
            }
        }
    }

    #[test]
    fn prepend_and_shift_of_fast_addresses() {
        let f = ExternalAddress::fast(1.0, Sign::Plus).unwrap();
        let g = f.prepend(0);
        assert_eq!(g.shift(), f);
        let b = g.potential_bound(60).unwrap();
        assert!((b.estimate - core::f64::consts::LN_2).abs() < 1e-12, "{b:?}");
        let sh = f.shift().potential_bound(60).unwrap();
        assert!((sh.estimate - (core::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn speed_classes() {
        assert_eq!(p(&[], &[1]).speed(), SpeedClass::Slow);
        let f = ExternalAddress::fast(1.0, Sign::Plus).unwrap();
        assert_eq!(f.speed(), SpeedClass::Fast);
        assert_eq!(f.shift().speed(), SpeedClass::Fast);
    }

    #[test]
    fn negate_is_entrywise() {
        for s in corpus() {
            let n = s.negate();
            for k in 1..=8 {
                if let Ok(v) = s.entry(k) {
                    assert_eq!(n.entry(k).unwrap(), -v);
                }
            }
        }
    }

    #[test]
    fn literals() {
        let s: ExternalAddress = "p:1,2|3,4".parse().unwrap();
        assert_eq!(s, p(&[1, 2], &[3, 4]));
        assert_eq!(s.to_string(), "p:1,2|3,4");
        let z: ExternalAddress = "p:|0".parse().unwrap();
        assert_eq!(z.to_string(), "p:|0");
        let f: ExternalAddress = "f:2.0".parse().unwrap();
        assert_eq!(f, ExternalAddress::fast(2.0, Sign::Plus).unwrap());
        assert_eq!(f.to_string(), "f:2.0");
        let g: ExternalAddress = "f:-2.0".parse().unwrap();
        assert_eq!(g.to_string(), "f:-2.0");
        assert_eq!(
            "f:0|1.0".parse::<ExternalAddress>().unwrap(),
            ExternalAddress::fast(1.0, Sign::Plus).unwrap().prepend(0)
        );
        assert_eq!("f:1.5@2".parse::<ExternalAddress>().unwrap().to_string(), "f:1.5@2");
        for bad in ["p:1,2|", "q:1|2", "p:1,2", "f:0", "f:-x", "f:|1.0", "p:a|1", "f:1.0@-1"] {
            assert!(bad.parse::<ExternalAddress>().is_err(), "{bad}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_address() -> impl Strategy<Value = ExternalAddress> {
            prop_oneof![
                (
                    proptest::collection::vec(-50i64..50, 0..4),
                    proptest::collection::vec(-50i64..50, 1..4)
                )
                    .prop_map(|(a, b)| ExternalAddress::periodic(a, b).unwrap()),
                (
                    proptest::collection::vec(-50i64..50, 0..3),
                    0.01f64..5.0,
                    any::<bool>(),
                    0usize..3
                )
                    .prop_map(|(pre, x, neg, skip)| {
                        let sign = if neg { Sign::Minus } else { Sign::Plus };
                        ExternalAddress::fast_with(pre, x, sign, skip).unwrap()
                    }),
            ]
        }

        proptest! {
            #[test]
            fn literal_round_trip(s in arb_address()) {
                let back: ExternalAddress = s.to_string().parse().unwrap();
                prop_assert_eq!(back, s);
            }

            #[test]
            fn shift_is_entrywise(s in arb_address()) {
                let t = s.shift();
                for k in 1..=64usize {
                    prop_assert_eq!(t.entry(k).is_ok(), s.entry(k + 1).is_ok());
                    if let (Ok(a), Ok(b)) = (t.entry(k), s.entry(k + 1)) {
                        prop_assert_eq!(a, b);
                    }
                }
            }
        }
    }
}
