//! Outward-rounded interval arithmetic over exact rationals. Logs and
//! exponentials carry explicit series remainders, so an interval always
//! brackets the true value and a comparison is reported only when the
//! intervals are disjoint (or touch in the harmless direction).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// Logarithm base used wherever a result depends on "log". Natural log is
/// the default everywhere; the CLI exposes the knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Two,
    Ten,
}

impl LogBase {
    pub fn as_str(&self) -> &'static str {
        match self {
            LogBase::Natural => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "e" => Ok(LogBase::Natural),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(format!("unknown log base {other:?}, expected e, 2, or 10")),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// A closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> RatInterval {
        assert!(lo <= hi, "inverted interval");
        RatInterval { lo, hi }
    }

    pub fn point(r: BigRational) -> RatInterval {
        RatInterval { lo: r.clone(), hi: r }
    }

    pub fn from_i64(n: i64) -> RatInterval {
        RatInterval::point(big(n))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().expect("nonempty").clone();
        let hi = products.iter().max().expect("nonempty").clone();
        RatInterval { lo, hi }
    }

    pub fn scale(&self, r: &BigRational) -> RatInterval {
        self.mul(&RatInterval::point(r.clone()))
    }

    /// Reciprocal; the interval must not contain zero.
    pub fn recip(&self) -> RatInterval {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        RatInterval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    pub fn div(&self, other: &RatInterval) -> RatInterval {
        self.mul(&other.recip())
    }

    /// Integer power of a positive interval.
    pub fn powi(&self, e: u32) -> RatInterval {
        assert!(self.lo.is_positive(), "powi needs a positive interval");
        let mut lo = BigRational::one();
        let mut hi = BigRational::one();
        for _ in 0..e {
            lo *= &self.lo;
            hi *= &self.hi;
        }
        RatInterval { lo, hi }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Widens endpoints outward to dyadics with denominator 2^bits. Keeps
    /// series arguments small without losing soundness.
    pub fn round_out(&self, bits: u32) -> RatInterval {
        RatInterval {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }

    /// `Some(true)` when every value here is strictly below every value
    /// there; `Some(false)` when none is; `None` when the intervals overlap.
    pub fn certainly_lt(&self, other: &RatInterval) -> Option<bool> {
        if self.hi < other.lo {
            Some(true)
        } else if self.lo >= other.hi {
            Some(false)
        } else {
            None
        }
    }

    /// Same for non-strict comparison; touching endpoints decide it.
    pub fn certainly_le(&self, other: &RatInterval) -> Option<bool> {
        if self.hi <= other.lo {
            Some(true)
        } else if self.lo > other.hi {
            Some(false)
        } else {
            None
        }
    }

    /// Midpoint as f64, for human-facing report fields only.
    pub fn approx_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / big(2);
        mid.to_f64().unwrap_or(f64::NAN)
    }
}

fn dyadic_floor(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let num = (r.numer() * &scale).div_floor(r.denom());
    BigRational::new(num, scale)
}

fn dyadic_ceil(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let num = (r.numer() * &scale).div_ceil(r.denom());
    BigRational::new(num, scale)
}

fn pow2_inv(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << bits)
}

/// ln 2 with an explicit series tail: 2 atanh(1/3).
pub fn ln2(prec: u32) -> RatInterval {
    let target = pow2_inv(prec + 2);
    let u = BigRational::new(1.into(), 3.into());
    let u2 = &u * &u;
    let mut upow = u.clone();
    let mut e = 1i64;
    let mut sum = BigRational::zero();
    loop {
        sum += &upow / big(e);
        upow *= &u2;
        e += 2;
        // |u| = 1/3, so 1/(1 - u^2) = 9/8
        let bound = &upow * BigRational::new(9.into(), 8.into()) / big(e);
        if bound <= target {
            let s2 = &sum * big(2);
            return RatInterval::new(s2.clone(), s2 + bound * big(2));
        }
    }
}

/// Sound bounds on ln of a positive rational. Series on the reduced
/// argument in [2/3, 4/3], plus the power-of-two shift times ln 2.
pub fn ln_rational(r: &BigRational, prec: u32) -> RatInterval {
    assert!(r.is_positive(), "log of a non-positive value");
    let four_thirds = BigRational::new(4.into(), 3.into());
    let two_thirds = BigRational::new(2.into(), 3.into());
    let mut y = r.clone();
    let mut shift: i64 = 0;
    while y > four_thirds {
        y /= big(2);
        shift += 1;
    }
    while y < two_thirds {
        y *= big(2);
        shift -= 1;
    }
    // keep series arguments at a bounded bit size
    let y = RatInterval::point(y).round_out(prec + 16);
    let core = {
        let lo = atanh_signed(&y.lo, prec);
        let hi = atanh_signed(&y.hi, prec);
        RatInterval::new(lo.lo * big(2), hi.hi * big(2))
    };
    core.add(&RatInterval::from_i64(shift).mul(&ln2(prec)))
}

/// atanh((y-1)/(y+1)) for y in [2/3, 4/3], so |u| <= 1/5.
fn atanh_signed(y: &BigRational, prec: u32) -> RatInterval {
    let u = (y - BigRational::one()) / (y + BigRational::one());
    if u.is_zero() {
        return RatInterval::point(BigRational::zero());
    }
    let target = pow2_inv(prec + 2);
    let u2 = &u * &u;
    let mut upow = u.clone();
    let mut e = 1i64;
    let mut sum = BigRational::zero();
    loop {
        sum += &upow / big(e);
        upow *= &u2;
        e += 2;
        // |u| <= 1/5, so 1/(1 - u^2) <= 25/24
        let bound = upow.abs() * BigRational::new(25.into(), 24.into()) / big(e);
        if bound <= target {
            return if u.is_positive() {
                RatInterval::new(sum.clone(), sum + bound)
            } else {
                RatInterval::new(&sum - &bound, sum)
            };
        }
    }
}

pub fn ln_interval(x: &RatInterval, prec: u32) -> RatInterval {
    assert!(x.is_positive(), "log of an interval reaching zero");
    RatInterval::new(
        ln_rational(&x.lo, prec).lo,
        ln_rational(&x.hi, prec).hi,
    )
}

/// Euler's number with an explicit factorial tail.
fn euler(prec: u32) -> RatInterval {
    let target = pow2_inv(prec + 2);
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut j = 1i64;
    loop {
        term /= big(j);
        sum += &term;
        j += 1;
        let bound = &term * big(2) / big(j);
        if bound <= target {
            return RatInterval::new(sum.clone(), sum + bound);
        }
    }
}

/// Sound bounds on exp of a rational: integer part by powering e, the
/// remainder in [-1/2, 1/2] by series.
pub fn exp_rational(r: &BigRational, prec: u32) -> RatInterval {
    let r = RatInterval::point(r.clone()).round_out(prec + 16).lo;
    let half = BigRational::new(1.into(), 2.into());
    let i = (&r + &half).floor();
    let f = &r - &i;
    debug_assert!(f.abs() <= half);
    let i = i
        .to_integer()
        .to_i64()
        .expect("exponent magnitude fits i64");
    let e = euler(prec + 8);
    let int_part = if i >= 0 {
        e.powi(i as u32)
    } else {
        e.powi((-i) as u32).recip()
    };
    let target = pow2_inv(prec + 2);
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut j = 1i64;
    loop {
        term = term * &f / big(j);
        sum += &term;
        j += 1;
        // |f| <= 1/2, so the tail is at most twice the next term
        let bound = term.abs() * big(2) * &f.abs() / big(j);
        if bound <= target {
            let frac = RatInterval::new(&sum - &bound, &sum + &bound);
            assert!(frac.lo.is_positive(), "precision too low for exp core");
            return int_part.mul(&frac);
        }
    }
}

pub fn exp_interval(x: &RatInterval, prec: u32) -> RatInterval {
    RatInterval::new(
        exp_rational(&x.lo, prec).lo,
        exp_rational(&x.hi, prec).hi,
    )
}

/// log in the chosen base, by dividing natural logs.
pub fn log_interval(x: &RatInterval, base: LogBase, prec: u32) -> RatInterval {
    let nat = ln_interval(x, prec);
    match base {
        LogBase::Natural => nat,
        LogBase::Two => nat.div(&ln2(prec)),
        LogBase::Ten => nat.div(&ln_rational(&big(10), prec)),
    }
}

/// Exact integer b with base^b = x, if one exists.
fn exact_log(x: u64, base: u64) -> Option<u64> {
    let mut rest = x;
    let mut e = 0;
    while rest % base == 0 {
        rest /= base;
        e += 1;
    }
    (rest == 1).then_some(e)
}

/// `floor((num/den) * log_base(x))`, certified. Exact powers of the base
/// stay in integer arithmetic; everything else refines intervals until the
/// floor is unambiguous, which always happens because the scaled log of a
/// non-power is irrational.
pub fn floor_log_scaled(x: u64, num: u64, den: u64, base: LogBase) -> u64 {
    assert!(den >= 1);
    let scale = BigRational::new(BigInt::from(num), BigInt::from(den));
    floor_log_scaled_rational(x, &scale, base)
}

/// `floor(scale * log_base(x))` for an arbitrary non-negative rational scale.
pub fn floor_log_scaled_rational(x: u64, scale: &BigRational, base: LogBase) -> u64 {
    assert!(x >= 1 && !scale.is_negative());
    if x == 1 || scale.is_zero() {
        return 0;
    }
    let exact = match base {
        LogBase::Natural => None,
        LogBase::Two => exact_log(x, 2),
        LogBase::Ten => exact_log(x, 10),
    };
    if let Some(e) = exact {
        let v = scale * BigRational::from_integer(e.into());
        return v.floor().to_integer().to_u64().expect("non-negative floor");
    }
    let point = RatInterval::point(BigRational::from_integer(x.into()));
    for prec in [32u32, 64, 128, 256, 512, 1024, 2048, 4096] {
        let v = log_interval(&point, base, prec).scale(scale);
        let lo = v.lo.floor().to_integer();
        let hi = v.hi.floor().to_integer();
        if lo == hi {
            return lo.to_u64().expect("non-negative floor");
        }
    }
    unreachable!("scaled log of a non-power never lands on an integer");
}

/// `ceil(multiplier * x^(num/den))`, certified, for x >= 1. Exact when x is
/// a perfect den-th power.
pub fn ceil_scaled_power(x: u64, num: u32, den: u32, multiplier: u64) -> u64 {
    assert!(x >= 1 && den >= 1);
    if let Some(root) = exact_root(x, den) {
        let val = BigInt::from(root).pow(num) * BigInt::from(multiplier);
        return val.to_u64().expect("threshold fits u64");
    }
    let point = RatInterval::point(BigRational::from_integer(x.into()));
    let scale = BigRational::new(BigInt::from(num), BigInt::from(den));
    let mult = BigRational::from_integer(multiplier.into());
    for prec in [32u32, 64, 128, 256, 512, 1024, 2048, 4096] {
        let v = exp_interval(&ln_interval(&point, prec).scale(&scale), prec).scale(&mult);
        let lo = v.lo.ceil().to_integer();
        let hi = v.hi.ceil().to_integer();
        if lo == hi {
            return lo.to_u64().expect("positive ceiling");
        }
    }
    unreachable!("irrational power never lands on an integer");
}

/// Exact integer r with r^den = x, if one exists.
fn exact_root(x: u64, den: u32) -> Option<u64> {
    if den == 1 {
        return Some(x);
    }
    let mut lo = 0u64;
    let mut hi = 1u64 << (64 / den as u64 + 1).min(63);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let p = BigInt::from(mid).pow(den);
        if p < BigInt::from(x) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (BigInt::from(lo).pow(den) == BigInt::from(x)).then_some(lo)
}

/// A positive quantity that may be far beyond machine range, entered either
/// exactly or as base^exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Magnitude {
    Exact(BigRational),
    Pow { base: u64, exp: u64 },
}

impl Magnitude {
    pub fn from_u64(x: u64) -> Magnitude {
        Magnitude::Exact(BigRational::from_integer(x.into()))
    }

    /// Accepts "12345", "3/4", "0.25", or "10^200".
    pub fn parse(s: &str) -> Result<Magnitude, String> {
        if let Some((b, e)) = s.split_once('^') {
            let base: u64 = b.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
            let exp: u64 = e.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            if base < 2 {
                return Err(format!("power base must be at least 2 in {s:?}"));
            }
            return Ok(Magnitude::Pow { base, exp });
        }
        let r = parse_decimal_rational(s)?;
        if !r.is_positive() {
            return Err(format!("magnitude must be positive, got {s:?}"));
        }
        Ok(Magnitude::Exact(r))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Magnitude::Exact(r) => Some(r),
            Magnitude::Pow { .. } => None,
        }
    }

    /// The value as an exact rational when its bit length fits the budget.
    pub fn expand(&self, bit_cap: u64) -> Option<BigRational> {
        match self {
            Magnitude::Exact(r) => Some(r.clone()),
            Magnitude::Pow { base, exp } => {
                let bits_upper = exp * (base.ilog2() as u64 + 1);
                if bits_upper <= bit_cap {
                    Some(BigRational::from_integer(BigInt::from(*base).pow(
                        u32::try_from(*exp).expect("small exponent"),
                    )))
                } else {
                    None
                }
            }
        }
    }

    /// Natural log as a certified interval.
    pub fn ln(&self, prec: u32) -> RatInterval {
        match self {
            Magnitude::Exact(r) => ln_rational(r, prec),
            Magnitude::Pow { base, exp } => {
                ln_rational(&BigRational::from_integer((*base).into()), prec)
                    .scale(&BigRational::from_integer((*exp).into()))
            }
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Exact(r) => write!(f, "{r}"),
            Magnitude::Pow { base, exp } => write!(f, "{base}^{exp}"),
        }
    }
}

/// Parses "7", "-3/4", or "0.125" into an exact rational.
pub fn parse_decimal_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| format!("bad numerator in {s:?}"))?;
        let den = BigInt::from_str(d.trim()).map_err(|_| format!("bad denominator in {s:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_part = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part).map_err(|_| format!("bad number {s:?}"))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad number {s:?}"));
        }
        let frac = BigInt::from_str(frac_part).map_err(|_| format!("bad number {s:?}"))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let unsigned = int_part.abs() * &scale + frac;
        let signed = if negative { -unsigned } else { unsigned };
        return Ok(BigRational::new(signed, scale));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| format!("bad number {s:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_decimal_rational(s).unwrap()
    }

    fn contains(iv: &RatInterval, s: &str) -> bool {
        let v = rat(s);
        iv.lo() <= &v && &v <= iv.hi()
    }

    /// The interval sits strictly inside known digit brackets.
    fn between(iv: &RatInterval, lo: &str, hi: &str) -> bool {
        &rat(lo) < iv.lo() && iv.hi() < &rat(hi)
    }

    #[test]
    fn interval_multiplication_tracks_signs() {
        let a = RatInterval::new(rat("-2"), rat("3"));
        let b = RatInterval::new(rat("-5"), rat("7"));
        let p = a.mul(&b);
        assert_eq!(p.lo(), &rat("-15"));
        assert_eq!(p.hi(), &rat("21"));
    }

    #[test]
    fn comparisons_respect_overlap() {
        let a = RatInterval::new(rat("1"), rat("2"));
        let b = RatInterval::new(rat("3"), rat("4"));
        let c = RatInterval::new(rat("2"), rat("3"));
        assert_eq!(a.certainly_lt(&b), Some(true));
        assert_eq!(b.certainly_lt(&a), Some(false));
        assert_eq!(a.certainly_lt(&c), None);
        // touching points settle non-strict comparison
        let p = RatInterval::point(rat("5"));
        assert_eq!(p.certainly_le(&p), Some(true));
        assert_eq!(p.certainly_lt(&p), Some(false));
    }

    #[test]
    fn ln_of_one_is_exactly_zero() {
        let iv = ln_rational(&rat("1"), 64);
        assert!(iv.lo().is_zero() && iv.hi().is_zero());
    }

    #[test]
    fn ln_two_matches_reference_digits() {
        let iv = ln2(96);
        assert!(between(
            &iv,
            "0.6931471805599453094172321",
            "0.6931471805599453094172322"
        ));
        assert!(iv.width() < rat("0.000000000000000000001"));
    }

    #[test]
    fn ln_brackets_known_values() {
        assert!(between(
            &ln_rational(&rat("4"), 64),
            "1.3862943611198906",
            "1.3862943611198907"
        ));
        assert!(between(
            &ln_rational(&rat("10"), 64),
            "2.302585092994045",
            "2.302585092994046"
        ));
        assert!(between(
            &ln_rational(&rat("0.5"), 64),
            "-0.6931471805599454",
            "-0.6931471805599453"
        ));
        assert!(between(
            &ln_rational(&rat("12"), 64),
            "2.4849066497880003",
            "2.4849066497880004"
        ));
    }

    #[test]
    fn exp_brackets_known_values() {
        let one = exp_rational(&rat("0"), 64);
        assert!(one.lo() == &rat("1") && one.hi() == &rat("1"));
        assert!(between(
            &exp_rational(&rat("1"), 64),
            "2.7182818284590452",
            "2.7182818284590453"
        ));
        assert!(between(
            &exp_rational(&rat("-1"), 64),
            "0.3678794411714423",
            "0.3678794411714424"
        ));
        assert!(between(
            &exp_rational(&rat("10"), 64),
            "22026.4657948067165",
            "22026.4657948067166"
        ));
    }

    #[test]
    fn exp_of_ln_brackets_the_input() {
        for s in ["0.37", "7/3", "42", "1000000"] {
            let x = rat(s);
            let iv = exp_interval(&ln_rational(&x, 96), 96);
            assert!(iv.lo() <= &x && &x <= iv.hi(), "{s}");
        }
    }

    #[test]
    fn huge_magnitude_logs() {
        let m = Magnitude::parse("10^200").unwrap();
        let iv = m.ln(64);
        assert!(between(&iv, "460.5170185988091367", "460.5170185988091369"));
        let small = Magnitude::parse("1000000").unwrap();
        assert!(between(
            &small.ln(64),
            "13.815510557964274",
            "13.815510557964275"
        ));
        assert_eq!(small.expand(100), Some(rat("1000000")));
        assert_eq!(m.expand(100), None);
        assert!(m.expand(1000).is_some());
    }

    #[test]
    fn scaled_floor_logs() {
        assert_eq!(floor_log_scaled(54, 1, 4, LogBase::Natural), 0);
        assert_eq!(floor_log_scaled(55, 1, 4, LogBase::Natural), 1);
        assert_eq!(floor_log_scaled(16, 1, 4, LogBase::Two), 1);
        assert_eq!(floor_log_scaled(8, 3, 2, LogBase::Two), 4);
        assert_eq!(floor_log_scaled(10_000, 1, 4, LogBase::Ten), 1);
        assert_eq!(floor_log_scaled(1, 5, 1, LogBase::Natural), 0);
    }

    #[test]
    fn scaled_ceiled_powers() {
        // 32^(4/5) = 16 exactly
        assert_eq!(ceil_scaled_power(32, 4, 5, 2), 32);
        // 2 * 12^(4/5) = 14.60...
        assert_eq!(ceil_scaled_power(12, 4, 5, 2), 15);
        assert_eq!(ceil_scaled_power(1, 4, 5, 2), 2);
        // 2 * 5^(4/5) = 7.22...
        assert_eq!(ceil_scaled_power(5, 4, 5, 2), 8);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(rat("0.5"), BigRational::new(1.into(), 2.into()));
        assert_eq!(rat("3/10"), BigRational::new(3.into(), 10.into()));
        assert_eq!(rat("-0.25"), BigRational::new((-1).into(), 4.into()));
        assert_eq!(rat("7"), BigRational::from_integer(7.into()));
        assert!(parse_decimal_rational("a.b").is_err());
        assert!(parse_decimal_rational("1/0").is_err());
        assert!(parse_decimal_rational("").is_err());
    }

    #[test]
    fn log_bases() {
        let x = RatInterval::point(rat("1024"));
        assert!(contains(&log_interval(&x, LogBase::Two, 64), "10"));
        let y = RatInterval::point(rat("1000"));
        assert!(contains(&log_interval(&y, LogBase::Ten, 64), "3"));
        assert!("e".parse::<LogBase>().unwrap() == LogBase::Natural);
        assert!("7".parse::<LogBase>().is_err());
    }
}
