//! Growth bounds and parameter ledgers behind the structure theorems: the
//! near-equal split product with its comparison properties, the five-epsilon
//! ledger, log-space checks of theorem preconditions, and exact diagnostics
//! over embedding-count sequences.

use std::cmp::Ordering;
use std::error::Error;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::embed::BigCount;
use crate::graph::Graph;
use crate::interval::{
    exp_rational, ln2, ln_interval, ln_rational, Magnitude, RatInterval,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundsError {
    /// Probabilities live strictly inside (0,1); magnitudes must exceed 1.
    ParameterRange { name: &'static str, value: String },
    /// Diagnostics need embedding counts for at least two consecutive sizes.
    SequenceTooShort { len: usize },
    /// Host sizes are 1-based.
    SequenceStart,
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::ParameterRange { name, value } => {
                write!(f, "parameter {name} out of range: {value}")
            }
            BoundsError::SequenceTooShort { len } => {
                write!(f, "need at least two embedding counts, got {len}")
            }
            BoundsError::SequenceStart => write!(f, "sequences must start at size 1 or later"),
        }
    }
}

impl Error for BoundsError {}

/// Outcome of an interval-certified comparison. `Certified` verdicts mean the
/// enclosing intervals excluded the boundary; `Inconclusive` means the
/// precision ladder ran out before they separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedHolds,
    CertifiedFails,
    Inconclusive,
    Skipped,
}

impl Verdict {
    pub fn holds(self) -> bool {
        matches!(self, Verdict::CertifiedHolds)
    }
}

const PREC_LADDER: [u32; 7] = [64, 128, 256, 512, 1024, 2048, 4096];
const MARGIN_PREC: u32 = 192;

/// Decides `lhs < rhs` (or `lhs <= rhs`) by refining both sides until the
/// intervals separate. Once a verdict certifies at some precision it stays
/// certified at every higher one, because every enclosure contains the truth.
fn certify_cmp(strict: bool, eval: impl Fn(u32) -> (RatInterval, RatInterval)) -> Verdict {
    for &prec in PREC_LADDER.iter() {
        let (lhs, rhs) = eval(prec);
        let res = if strict {
            lhs.certainly_lt(&rhs)
        } else {
            lhs.certainly_le(&rhs)
        };
        match res {
            Some(true) => return Verdict::CertifiedHolds,
            Some(false) => return Verdict::CertifiedFails,
            None => {}
        }
    }
    Verdict::Inconclusive
}

/// Conjunction: one certified failure sinks the lot; otherwise any doubt
/// leaves doubt.
fn combine<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
    let mut out = Verdict::CertifiedHolds;
    for v in verdicts {
        match v {
            Verdict::CertifiedFails => return Verdict::CertifiedFails,
            Verdict::Inconclusive | Verdict::Skipped => out = Verdict::Inconclusive,
            Verdict::CertifiedHolds => {}
        }
    }
    out
}

/// A deliberately useless interval pair, returned when an evaluator cannot
/// speak at the current precision; the caller's ladder then escalates.
fn undecided() -> (RatInterval, RatInterval) {
    let wide = RatInterval::new(-BigRational::one(), BigRational::one());
    (wide.clone(), wide)
}

fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

fn pow10r(e: u32) -> BigRational {
    BigRational::from_integer(pow10(e))
}

fn inv_pow10(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow10(e))
}

fn rat_pow(r: &BigRational, e: u32) -> BigRational {
    BigRational::new(r.numer().pow(e), r.denom().pow(e))
}

fn int_pow_signed(base: u64, e: i64) -> BigRational {
    let mag = BigInt::from(base).pow(u32::try_from(e.unsigned_abs()).expect("exponent fits u32"));
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

fn pow_or_one(x: &RatInterval, e: u32) -> RatInterval {
    if e == 0 {
        RatInterval::point(BigRational::one())
    } else {
        x.powi(e)
    }
}

fn require_unit_open(name: &'static str, r: &BigRational) -> Result<(), BoundsError> {
    if r.is_positive() && *r < BigRational::one() {
        Ok(())
    } else {
        Err(BoundsError::ParameterRange {
            name,
            value: r.to_string(),
        })
    }
}

fn require_above_one(name: &'static str, m: &Magnitude) -> Result<(), BoundsError> {
    let ok = match m {
        Magnitude::Exact(r) => *r > BigRational::one(),
        Magnitude::Pow { base, exp } => *base >= 2 && *exp >= 1,
    };
    if ok {
        Ok(())
    } else {
        Err(BoundsError::ParameterRange {
            name,
            value: m.to_string(),
        })
    }
}

/// Largest product of `parts` non-negative integers summing to at most
/// `total`: the near-equal split, ceiling on the first `total mod parts`
/// factors. Zero exactly when `total < parts`.
pub fn balanced_product(parts: u64, total: u64) -> BigCount {
    assert!(parts >= 1, "need at least one part");
    if total < parts {
        return BigCount::zero();
    }
    let q = total / parts;
    let r = u32::try_from(total % parts).expect("remainder below part count");
    let rest = u32::try_from(parts).expect("part count fits u32") - r;
    BigCount::from(q + 1).pow(r) * BigCount::from(q).pow(rest)
}

/// Independent oracle: maximum of the product over every way of spending at
/// most `total` across `parts` non-negative factors, by dynamic programming.
fn max_product_oracle(parts: u64, total: u64) -> BigCount {
    let n = total as usize;
    let mut row: Vec<BigCount> = vec![BigCount::one(); n + 1];
    for _ in 0..parts {
        let mut next = vec![BigCount::zero(); n + 1];
        for budget in 0..=n {
            for t in 0..=budget {
                let cand = &row[budget - t] * BigCount::from(t as u64);
                if cand > next[budget] {
                    next[budget] = cand;
                }
            }
        }
        row = next;
    }
    row[n].clone()
}

/// One tuple of the shrinking-bound grid: comparing the product over
/// `parts_sub` factors of budget `total_sub` against the scaled product over
/// `parts` factors of budget `total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShrinkCase {
    pub parts: u64,
    pub parts_sub: u64,
    pub total: u64,
    pub total_sub: u64,
}

#[derive(Debug, Clone)]
pub struct BalancedProductReport {
    pub parts_max: u64,
    pub total_max: u64,
    pub oracle_mismatches: Vec<(u64, u64)>,
    pub superadditivity_violations: Vec<(u64, u64, u64, u64)>,
    pub shrink_failures: Vec<ShrinkCase>,
    pub shrink_inconclusive: Vec<ShrinkCase>,
    pub shrink_cases: u64,
}

impl BalancedProductReport {
    pub fn all_hold(&self) -> bool {
        self.oracle_mismatches.is_empty()
            && self.superadditivity_violations.is_empty()
            && self.shrink_failures.is_empty()
            && self.shrink_inconclusive.is_empty()
    }
}

/// Certifies `balanced_product(parts_sub, total_sub)` against
/// `e^(3(l-l') - mu*l/2) * (l/total)^(l-l') * balanced_product(parts, total)`
/// at the extreme admissible shrink factor mu = 1 - total_sub/total. The
/// right side decreases in mu, so the single extreme point covers the range.
fn certify_shrink(parts: u64, parts_sub: u64, total: u64, total_sub: u64) -> Verdict {
    let lhs = balanced_product(parts_sub, total_sub);
    if lhs.is_zero() {
        return Verdict::CertifiedHolds;
    }
    let drop = u32::try_from(parts - parts_sub).expect("part count fits u32");
    let mu = BigRational::new(BigInt::from(total - total_sub), BigInt::from(total));
    let exponent = BigRational::from_integer(BigInt::from(3 * (parts - parts_sub)))
        - &mu * &frac(i64::try_from(parts).expect("parts fits i64"), 2);
    let scale = rat_pow(
        &BigRational::new(BigInt::from(parts), BigInt::from(total)),
        drop,
    ) * BigRational::from_integer(BigInt::from(balanced_product(parts, total)));
    let lhs_r = BigRational::from_integer(BigInt::from(lhs));
    if exponent.is_zero() {
        // e^0 is exactly 1; this is the boundary case where both sides can
        // coincide, so it must be decided by exact rational comparison
        return if lhs_r <= scale {
            Verdict::CertifiedHolds
        } else {
            Verdict::CertifiedFails
        };
    }
    certify_cmp(false, |prec| {
        (
            RatInterval::point(lhs_r.clone()),
            exp_rational(&exponent, prec).scale(&scale),
        )
    })
}

/// Sweeps three properties of the balanced product over the whole grid:
/// agreement with the exhaustive composition oracle, superadditivity across
/// split budgets, and the interval-certified shrinking bound.
pub fn check_balanced_product(parts_max: u64, total_max: u64) -> BalancedProductReport {
    let mut report = BalancedProductReport {
        parts_max,
        total_max,
        oracle_mismatches: Vec::new(),
        superadditivity_violations: Vec::new(),
        shrink_failures: Vec::new(),
        shrink_inconclusive: Vec::new(),
        shrink_cases: 0,
    };
    for parts in 1..=parts_max {
        for total in 0..=total_max {
            if balanced_product(parts, total) != max_product_oracle(parts, total) {
                report.oracle_mismatches.push((parts, total));
            }
        }
    }
    for l in 1..=parts_max {
        for lp in 1..=parts_max {
            for m in 0..=total_max {
                for mp in 0..=total_max {
                    let left = balanced_product(l, m) * balanced_product(lp, mp);
                    if left > balanced_product(l + lp, m + mp) {
                        report.superadditivity_violations.push((l, m, lp, mp));
                    }
                }
            }
        }
    }
    for parts in 1..=parts_max {
        for parts_sub in 1..=parts {
            for total in parts..=total_max {
                for total_sub in 0..=total {
                    report.shrink_cases += 1;
                    let case = ShrinkCase {
                        parts,
                        parts_sub,
                        total,
                        total_sub,
                    };
                    match certify_shrink(parts, parts_sub, total, total_sub) {
                        Verdict::CertifiedHolds => {}
                        Verdict::CertifiedFails => report.shrink_failures.push(case),
                        _ => report.shrink_inconclusive.push(case),
                    }
                }
            }
        }
    }
    report
}

/// One ledger parameter: an exact positive coefficient over a power of
/// L = log(1/q). Same-power comparisons reduce to exact rational arithmetic,
/// which is the only way boundary equalities can certify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eps {
    pub coeff: BigRational,
    pub log_power: u32,
}

impl Eps {
    /// Certified enclosure of the numeric value.
    pub fn value(&self, q: &BigRational, prec: u32) -> RatInterval {
        let c = RatInterval::point(self.coeff.clone());
        if self.log_power == 0 {
            return c;
        }
        c.div(&log_inv_q(q, prec).powi(self.log_power))
    }

    /// Rounded value for report columns.
    pub fn approx(&self, q: &BigRational) -> f64 {
        self.value(q, 96).approx_f64()
    }
}

/// Enclosure of log(1/q), positive by construction for q in (0,1); escalates
/// internally until the interval clears zero so that reciprocals are safe.
fn log_inv_q(q: &BigRational, prec: u32) -> RatInterval {
    let inv = q.recip();
    let mut p = prec;
    loop {
        let l = ln_rational(&inv, p);
        if l.is_positive() {
            return l;
        }
        p = p.saturating_mul(2);
    }
}

/// coeff * (log k)^loglog_power / k, the shape of the right-hand tails.
struct LogTerm {
    coeff: BigRational,
    loglog_power: u32,
}

fn ln_of_eps(e: &Eps, q: &BigRational, prec: u32) -> RatInterval {
    let mut out = ln_rational(&e.coeff, prec);
    if e.log_power > 0 {
        let l = log_inv_q(q, prec);
        out = out.sub(
            &ln_interval(&l, prec).scale(&BigRational::from_integer(e.log_power.into())),
        );
    }
    out
}

fn ln_of_logterm(t: &LogTerm, k: &Magnitude, prec: u32) -> Option<RatInterval> {
    let lnk = k.ln(prec);
    if !lnk.is_positive() {
        return None;
    }
    let mut out = ln_rational(&t.coeff, prec).sub(&lnk);
    if t.loglog_power > 0 {
        out = out.add(
            &ln_interval(&lnk, prec).scale(&BigRational::from_integer(t.loglog_power.into())),
        );
    }
    Some(out)
}

fn cmp_eps_lt(a: &Eps, b: &Eps, strict: bool, q: &BigRational) -> Verdict {
    if a.log_power == b.log_power {
        // the L powers cancel and the comparison is exact
        return match (a.coeff.cmp(&b.coeff), strict) {
            (Ordering::Less, _) => Verdict::CertifiedHolds,
            (Ordering::Equal, false) => Verdict::CertifiedHolds,
            _ => Verdict::CertifiedFails,
        };
    }
    // cross-multiplied by L^(pa+pb): the sides differ by a rational multiple
    // of a transcendental power of L, so refinement always separates them
    certify_cmp(strict, |prec| {
        let l = log_inv_q(q, prec);
        (
            pow_or_one(&l, b.log_power).scale(&a.coeff),
            pow_or_one(&l, a.log_power).scale(&b.coeff),
        )
    })
}

fn cmp_logterm_lt_eps(t: &LogTerm, e: &Eps, q: &BigRational, k: &Magnitude) -> Verdict {
    certify_cmp(true, |prec| match ln_of_logterm(t, k, prec) {
        Some(lhs) => (lhs, ln_of_eps(e, q, prec)),
        None => undecided(),
    })
}

fn cmp_logterm_lt_logterm(a: &LogTerm, b: &LogTerm, k: &Magnitude) -> Verdict {
    // both sides carry the same 1/k factor, which cancels exactly
    certify_cmp(true, |prec| {
        let lnk = k.ln(prec);
        if !lnk.is_positive() {
            return undecided();
        }
        let lnlnk = ln_interval(&lnk, prec);
        (
            ln_rational(&a.coeff, prec)
                .add(&lnlnk.scale(&BigRational::from_integer(a.loglog_power.into()))),
            ln_rational(&b.coeff, prec)
                .add(&lnlnk.scale(&BigRational::from_integer(b.loglog_power.into()))),
        )
    })
}

/// log(1/eps) * eps as an enclosure.
fn entropy_term(e: &Eps, q: &BigRational, prec: u32) -> RatInterval {
    let v = e.value(q, prec);
    ln_interval(&v.recip(), prec).mul(&v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    pub slug: &'static str,
    pub verdict: Verdict,
}

/// The five epsilon parameters for a given q, with certified verdicts for the
/// ten inequalities the downstream arguments consume. The delta comparison is
/// skipped when no delta is supplied.
#[derive(Debug, Clone)]
pub struct EpsilonLedger {
    pub q: BigRational,
    pub k: Magnitude,
    pub delta: Option<BigRational>,
    pub eps: [Eps; 5],
    pub checks: Vec<InequalityCheck>,
}

impl EpsilonLedger {
    pub fn all_hold(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.verdict, Verdict::CertifiedHolds | Verdict::Skipped))
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.verdict == Verdict::CertifiedFails)
            .map(|c| c.slug)
            .collect()
    }

    /// The bare strict chain eps5 < eps4 < eps3 < eps2 < eps1 on its own.
    pub fn ordering_strict(&self) -> Verdict {
        combine((0..4).map(|i| cmp_eps_lt(&self.eps[i + 1], &self.eps[i], true, &self.q)))
    }
}

pub fn epsilon_ledger(
    q: &BigRational,
    k: &Magnitude,
    delta: Option<&BigRational>,
) -> Result<EpsilonLedger, BoundsError> {
    require_unit_open("q", q)?;
    require_above_one("k", k)?;
    if let Some(d) = delta {
        require_unit_open("delta", d)?;
    }

    let q2 = q * q;
    let q4 = &q2 * &q2;
    let eps = [
        Eps { coeff: q * &frac(1, 3), log_power: 0 },
        Eps { coeff: q * &frac(1, 100), log_power: 1 },
        Eps { coeff: q * &inv_pow10(5), log_power: 2 },
        Eps { coeff: &q2 * &inv_pow10(7), log_power: 2 },
        Eps { coeff: &q4 * &inv_pow10(19), log_power: 4 },
    ];

    let lt = |i: usize, j: usize| cmp_eps_lt(&eps[i], &eps[j], true, q);
    let point = |c: BigRational| Eps { coeff: c, log_power: 0 };
    let chain_to_eps2 = [lt(4, 3), lt(3, 2), lt(2, 1)];
    let chain_full = combine(chain_to_eps2.into_iter().chain([lt(1, 0)]));

    let half_q = point(q * &frac(1, 2));
    let mut checks = Vec::with_capacity(10);
    checks.push(InequalityCheck {
        slug: "eps-chain-below-q-half",
        verdict: combine([
            chain_full,
            cmp_eps_lt(&eps[0], &half_q, true, q),
            cmp_eps_lt(&half_q, &point(inv_pow10(20)), true, q),
        ]),
    });
    checks.push(InequalityCheck {
        slug: "eps-below-one-hundredth",
        verdict: combine(
            chain_to_eps2
                .into_iter()
                .chain([cmp_eps_lt(&eps[1], &point(frac(1, 100)), true, q)]),
        ),
    });
    checks.push(InequalityCheck {
        slug: "eps2-entropy-vs-eps1",
        verdict: certify_cmp(true, |prec| {
            (
                entropy_term(&eps[1], q, prec),
                ln2(prec).scale(&frac(1, 8)).mul(&eps[0].value(q, prec)),
            )
        }),
    });
    checks.push(InequalityCheck {
        slug: "eps2-below-delta",
        verdict: match delta {
            Some(d) => cmp_eps_lt(&eps[1], &point(d.clone()), true, q),
            None => Verdict::Skipped,
        },
    });
    checks.push(InequalityCheck {
        slug: "eps3-entropy-vs-eps2",
        verdict: certify_cmp(true, |prec| {
            (
                entropy_term(&eps[2], q, prec),
                eps[1].value(q, prec).scale(&frac(1, 100)),
            )
        }),
    });
    let eps3_sq = Eps {
        coeff: &eps[2].coeff * &eps[2].coeff,
        log_power: 4,
    };
    checks.push(InequalityCheck {
        slug: "eps3-squared-vs-logk-over-k",
        verdict: combine([
            lt(2, 1),
            cmp_eps_lt(&eps3_sq, &eps[2], true, q),
            cmp_logterm_lt_eps(
                &LogTerm { coeff: &pow10r(6) / q, loglog_power: 2 },
                &eps3_sq,
                q,
                k,
            ),
        ]),
    });
    checks.push(InequalityCheck {
        slug: "eps4-vs-q-eps3",
        verdict: cmp_eps_lt(
            &eps[3],
            &Eps {
                coeff: q * &frac(1, 20) * &eps[2].coeff,
                log_power: eps[2].log_power,
            },
            true,
            q,
        ),
    });
    checks.push(InequalityCheck {
        // equality for every q: both sides reduce to q^4/10^19 over L^4,
        // which is why this row is non-strict and decided exactly
        slug: "eps5-vs-eps4-squared",
        verdict: cmp_eps_lt(
            &eps[4],
            &Eps {
                coeff: &(&eps[3].coeff * &eps[3].coeff) * &inv_pow10(5),
                log_power: 2 * eps[3].log_power,
            },
            false,
            q,
        ),
    });
    checks.push(InequalityCheck {
        slug: "eps5-below-q-ten-thousandth",
        verdict: cmp_eps_lt(&eps[4], &point(q * &inv_pow10(4)), true, q),
    });
    let tail2 = LogTerm { coeff: &frac(40, 1) / q, loglog_power: 2 };
    let tail1 = LogTerm { coeff: &pow10r(3) / q, loglog_power: 1 };
    let tail0 = LogTerm { coeff: pow10r(3), loglog_power: 0 };
    checks.push(InequalityCheck {
        slug: "eps-chain-above-logk-over-k",
        verdict: combine([
            chain_full,
            cmp_logterm_lt_eps(&tail2, &eps[4], q, k),
            cmp_logterm_lt_logterm(&tail1, &tail2, k),
            cmp_logterm_lt_logterm(&tail0, &tail1, k),
        ]),
    });

    Ok(EpsilonLedger {
        q: q.clone(),
        k: k.clone(),
        delta: delta.cloned(),
        eps,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub slug: &'static str,
    pub verdict: Verdict,
    /// Log-space slack: positive iff the condition is met, in natural-log
    /// units for the ratio conditions; for the deletion budget it is the
    /// slack (log ktilde)/4 - (ktilde - k) in vertices.
    pub ln_margin: f64,
}

/// Precondition verdicts for the structure theorems at given parameters,
/// every comparison done in log space so sizes like 10^200 stay exact.
#[derive(Debug, Clone)]
pub struct PreconditionReport {
    pub ktilde: Magnitude,
    pub p: BigRational,
    pub p_prime: BigRational,
    pub k: Magnitude,
    pub q: BigRational,
    pub delta: BigRational,
    pub conditions: Vec<ConditionCheck>,
}

impl PreconditionReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.verdict.holds())
    }
}

/// ln(c) + a*lnln(x) - b*ln(x), the log of the floor expressions.
fn floor_rhs_ln(
    x: &Magnitude,
    c: &BigRational,
    loglog_coeff: &BigRational,
    log_coeff: &BigRational,
    prec: u32,
) -> Option<RatInterval> {
    let lnx = x.ln(prec);
    if !lnx.is_positive() {
        return None;
    }
    Some(
        ln_rational(c, prec)
            .add(&ln_interval(&lnx, prec).scale(loglog_coeff))
            .sub(&lnx.scale(log_coeff)),
    )
}

/// Certifies lhs >= rhs in log space and reports the margin lhs - rhs.
fn ge_in_ln<L, R>(lhs: L, rhs: R) -> (Verdict, f64)
where
    L: Fn(u32) -> Option<RatInterval>,
    R: Fn(u32) -> Option<RatInterval>,
{
    let verdict = certify_cmp(false, |prec| match (rhs(prec), lhs(prec)) {
        (Some(r), Some(l)) => (r, l),
        _ => undecided(),
    });
    let margin = match (lhs(MARGIN_PREC), rhs(MARGIN_PREC)) {
        (Some(l), Some(r)) => l.sub(&r).approx_f64(),
        _ => f64::NAN,
    };
    (verdict, margin)
}

fn min_margin(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn deletion_budget_check(ktilde: &Magnitude, k: &Magnitude) -> (Verdict, f64) {
    if ktilde == k {
        let margin = ktilde.ln(MARGIN_PREC).scale(&frac(1, 4)).approx_f64();
        return (Verdict::CertifiedHolds, margin);
    }
    let cap = 1u64 << 16;
    if let (Some(kt), Some(kk)) = (ktilde.expand(cap), k.expand(cap)) {
        // 4(ktilde - k) <= ln ktilde: exact left side against an enclosure;
        // a rational never equals the log of a rational above 1, so the
        // ladder always separates them
        let gap = (&kt - &kk) * BigRational::from_integer(4.into());
        let verdict = certify_cmp(false, |prec| {
            (RatInterval::point(gap.clone()), ktilde.ln(prec))
        });
        let margin = ktilde
            .ln(MARGIN_PREC)
            .scale(&frac(1, 4))
            .sub(&RatInterval::point(&kt - &kk))
            .approx_f64();
        (verdict, margin)
    } else {
        // beyond exact expansion only the easy direction k >= ktilde settles
        let verdict = match certify_cmp(false, |prec| (ktilde.ln(prec), k.ln(prec))) {
            Verdict::CertifiedHolds => Verdict::CertifiedHolds,
            _ => Verdict::Inconclusive,
        };
        (verdict, f64::NAN)
    }
}

/// Evaluates the hypotheses the structure theorems place on the parameters:
/// two probability floors over ktilde, the deletion budget, the derived
/// (q, delta) = (p'/75, p'/150) floors over k, and the size-versus-log chain.
pub fn check_preconditions(
    ktilde: &Magnitude,
    p: &BigRational,
    k: &Magnitude,
) -> Result<PreconditionReport, BoundsError> {
    require_above_one("ktilde", ktilde)?;
    require_unit_open("p", p)?;
    require_above_one("k", k)?;

    let one_minus_p = BigRational::one() - p;
    let p_prime = if *p <= one_minus_p { p.clone() } else { one_minus_p };
    let q = &p_prime * &frac(1, 75);
    let delta = &p_prime * &frac(1, 150);

    let mut conditions = Vec::with_capacity(5);

    let (v, m) = ge_in_ln(
        |prec| Some(ln_rational(&p_prime, prec)),
        |prec| floor_rhs_ln(ktilde, &pow10r(6), &frac(6, 5), &frac(1, 5), prec),
    );
    conditions.push(ConditionCheck {
        slug: "main-structure-probability-floor",
        verdict: v,
        ln_margin: m,
    });

    let (v, m) = ge_in_ln(
        |prec| Some(ln_rational(&p_prime, prec)),
        |prec| floor_rhs_ln(ktilde, &pow10r(3), &frac(1, 2), &frac(1, 5), prec),
    );
    conditions.push(ConditionCheck {
        slug: "typicality-probability-floor",
        verdict: v,
        ln_margin: m,
    });

    let (v, m) = deletion_budget_check(ktilde, k);
    conditions.push(ConditionCheck {
        slug: "deletion-budget",
        verdict: v,
        ln_margin: m,
    });

    let (vq, mq) = ge_in_ln(
        |prec| Some(ln_rational(&q, prec)),
        |prec| floor_rhs_ln(k, &pow10r(4), &frac(6, 5), &frac(1, 5), prec),
    );
    let (vd, md) = ge_in_ln(
        |prec| Some(ln_rational(&delta, prec)),
        |prec| floor_rhs_ln(k, &pow10r(3), &frac(1, 5), &frac(1, 5), prec),
    );
    conditions.push(ConditionCheck {
        slug: "reasonable-parameter-floors",
        verdict: combine([vq, vd]),
        ln_margin: min_margin(mq, md),
    });

    let (v1, m1) = ge_in_ln(
        |prec| {
            let l = ktilde.ln(prec);
            l.is_positive().then(|| l.scale(&frac(1, 40)))
        },
        |prec| {
            let l = ktilde.ln(prec);
            if !l.is_positive() {
                return None;
            }
            Some(ln_rational(&BigRational::from_integer(100.into()), prec).add(&ln_interval(&l, prec)))
        },
    );
    let (v2, m2) = ge_in_ln(
        |prec| {
            let l = k.ln(prec);
            l.is_positive().then(|| l.scale(&frac(1, 20)))
        },
        |prec| {
            let l = ktilde.ln(prec);
            if !l.is_positive() {
                return None;
            }
            Some(
                ln_rational(&BigRational::from_integer(5000.into()), prec)
                    .add(&ln_interval(&l, prec).scale(&frac(2, 1))),
            )
        },
    );
    conditions.push(ConditionCheck {
        slug: "size-vs-log-chain",
        verdict: combine([v1, v2]),
        ln_margin: min_margin(m1, m2),
    });

    Ok(PreconditionReport {
        ktilde: ktilde.clone(),
        p: p.clone(),
        p_prime,
        k: k.clone(),
        q,
        delta,
        conditions,
    })
}

/// One first-difference row: both clone/delete bounds at host size m, with
/// exact tightness flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstDifferenceRow {
    pub m: u64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub lower_tight: bool,
    pub upper_tight: bool,
}

/// One report-only row; slack is right side minus left side, exact, negative
/// precisely when the bound fails at this scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackRow {
    pub m: u64,
    pub m_sub: Option<u64>,
    pub holds: bool,
    pub slack: BigRational,
}

/// Diagnostics over an exact sequence seq[i] = emb(pattern, m_lo + i). The
/// first-difference suite is unconditional and meant to be asserted; the
/// growth cap, second difference, and telescoped sections depend on
/// large-scale hypotheses and are recorded without judgement.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDiagnostics {
    pub k: u64,
    pub m_lo: u64,
    pub first_difference: Vec<FirstDifferenceRow>,
    pub growth_cap: Vec<SlackRow>,
    pub second_difference: Vec<SlackRow>,
    pub telescoped: Vec<SlackRow>,
}

impl SequenceDiagnostics {
    pub fn strict_all_hold(&self) -> bool {
        self.first_difference
            .iter()
            .all(|r| r.lower_holds && r.upper_holds)
    }
}

pub fn emb_sequence_diagnostics(
    pattern: &Graph,
    m_lo: u64,
    seq: &[BigCount],
) -> Result<SequenceDiagnostics, BoundsError> {
    let k = pattern.n() as u64;
    if k == 0 {
        return Err(BoundsError::ParameterRange {
            name: "pattern",
            value: "empty graph".into(),
        });
    }
    if m_lo == 0 {
        return Err(BoundsError::SequenceStart);
    }
    if seq.len() < 2 {
        return Err(BoundsError::SequenceTooShort { len: seq.len() });
    }

    let emb: Vec<BigInt> = seq.iter().map(|c| BigInt::from(c.clone())).collect();
    let m_hi = m_lo + seq.len() as u64 - 1;
    let at = |m: u64| &emb[usize::try_from(m - m_lo).expect("index fits")];
    let kb = BigInt::from(k);

    let mut first_difference = Vec::new();
    for m in (m_lo + 1).max(2)..=m_hi {
        let diff = at(m) - at(m - 1);
        let lower_lhs = &kb * at(m - 1);
        let lower_rhs = BigInt::from(m - 1) * &diff;
        let upper_lhs = BigInt::from(m) * &diff;
        let upper_rhs = &kb * at(m);
        first_difference.push(FirstDifferenceRow {
            m,
            lower_holds: lower_lhs <= lower_rhs,
            upper_holds: upper_lhs <= upper_rhs,
            lower_tight: lower_lhs == lower_rhs,
            upper_tight: upper_lhs == upper_rhs,
        });
    }

    let slack_row = |m: u64, m_sub: Option<u64>, lhs: BigInt, rhs: BigRational| {
        let slack = rhs - BigRational::from_integer(lhs);
        SlackRow {
            m,
            m_sub,
            holds: !slack.is_negative(),
            slack,
        }
    };

    let k_i64 = i64::try_from(k).expect("pattern order fits i64");
    let mut growth_cap = Vec::new();
    for m in m_lo..=m_hi {
        let rhs = int_pow_signed(m, k_i64) * int_pow_signed(k, 2 - k_i64);
        growth_cap.push(slack_row(m, None, at(m).clone(), rhs));
    }

    let second_rhs = |m: u64| {
        int_pow_signed(m, k_i64 - 2)
            * int_pow_signed(k, 4 - k_i64)
            * BigRational::from_integer(2.into())
    };
    let mut second_difference = Vec::new();
    for m in (m_lo + 2).max(3)..=m_hi {
        let lhs = at(m) - at(m - 1) * BigInt::from(2) + at(m - 2);
        second_difference.push(slack_row(m, None, lhs, second_rhs(m)));
    }

    let mut telescoped = Vec::new();
    for m_sub in m_lo..=m_hi {
        for m in (m_sub + 2)..=m_hi {
            let lhs = at(m) - at(m - 1) - at(m_sub + 1) + at(m_sub);
            let rhs = second_rhs(m) * BigRational::from_integer(BigInt::from(m - m_sub));
            telescoped.push(slack_row(m, Some(m_sub), lhs, rhs));
        }
    }

    Ok(SequenceDiagnostics {
        k,
        m_lo,
        first_difference,
        growth_cap,
        second_difference,
        telescoped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn counts(values: &[u64]) -> Vec<BigCount> {
        values.iter().map(|&v| BigCount::from(v)).collect()
    }

    #[test]
    fn balanced_product_known_values() {
        assert_eq!(balanced_product(3, 7), BigCount::from(12u32));
        assert_eq!(balanced_product(4, 3), BigCount::from(0u32));
        assert_eq!(balanced_product(5, 10), BigCount::from(32u32));
        assert_eq!(balanced_product(1, 9), BigCount::from(9u32));
        assert_eq!(balanced_product(3, 30), BigCount::from(1000u32));
    }

    #[test]
    fn balanced_product_matches_composition_oracle() {
        for parts in 1..=5 {
            for total in 0..=18 {
                assert_eq!(
                    balanced_product(parts, total),
                    max_product_oracle(parts, total),
                    "split ({parts}, {total})"
                );
            }
        }
    }

    #[test]
    fn balanced_product_property_suite_holds() {
        let report = check_balanced_product(5, 22);
        assert!(report.all_hold(), "failures: {report:?}");
        assert!(report.shrink_cases > 1000);
    }

    #[test]
    fn superadditivity_equality_case_is_exact() {
        let left = balanced_product(2, 4) * balanced_product(3, 6);
        assert_eq!(left, balanced_product(5, 10));
    }

    #[test]
    fn shrink_bound_equality_tuple_certifies() {
        assert_eq!(certify_shrink(4, 4, 12, 12), Verdict::CertifiedHolds);
        assert_eq!(certify_shrink(6, 6, 30, 30), Verdict::CertifiedHolds);
    }

    #[test]
    fn epsilon_ledger_flagship_regime_all_hold() {
        let q = BigRational::new(BigInt::one(), pow10(20));
        let k = Magnitude::parse("10^200").unwrap();
        let ledger = epsilon_ledger(&q, &k, Some(&frac(1, 1000))).unwrap();
        for check in &ledger.checks {
            assert_eq!(
                check.verdict,
                Verdict::CertifiedHolds,
                "inequality {} did not certify",
                check.slug
            );
        }
        assert!(ledger.all_hold());
        assert_eq!(ledger.ordering_strict(), Verdict::CertifiedHolds);
        let e1 = ledger.eps[0].approx(&q);
        assert!((e1 / 3.333e-21 - 1.0).abs() < 1e-3, "eps1 approx {e1}");
    }

    #[test]
    fn epsilon_ledger_desk_scale_names_failures() {
        let q = frac(1, 10);
        let k = Magnitude::from_u64(100);
        let ledger = epsilon_ledger(&q, &k, Some(&frac(1, 1000))).unwrap();
        let failing = ledger.failing();
        assert!(failing.contains(&"eps-chain-below-q-half"));
        assert!(failing.contains(&"eps-chain-above-logk-over-k"));
        assert!(failing.contains(&"eps2-entropy-vs-eps1"));
        assert!(!failing.contains(&"eps5-vs-eps4-squared"));
        assert!(!ledger.all_hold());
    }

    #[test]
    fn epsilon_exact_equality_row_certifies_everywhere() {
        for q in [frac(1, 10), frac(1, 100), frac(3, 4), BigRational::new(BigInt::one(), pow10(20))] {
            let ledger = epsilon_ledger(&q, &Magnitude::from_u64(100), None).unwrap();
            let row = ledger
                .checks
                .iter()
                .find(|c| c.slug == "eps5-vs-eps4-squared")
                .unwrap();
            assert_eq!(row.verdict, Verdict::CertifiedHolds, "q = {q}");
        }
    }

    #[test]
    fn epsilon_ordering_holds_for_small_q() {
        for e in [2u32, 3, 6, 12] {
            let q = BigRational::new(BigInt::one(), pow10(e));
            let ledger = epsilon_ledger(&q, &Magnitude::from_u64(100), None).unwrap();
            assert_eq!(
                ledger.ordering_strict(),
                Verdict::CertifiedHolds,
                "q = 10^-{e}"
            );
        }
    }

    #[test]
    fn epsilon_delta_row_tracks_input() {
        let q = frac(1, 100);
        let k = Magnitude::from_u64(100);
        let row = |ledger: &EpsilonLedger| {
            ledger
                .checks
                .iter()
                .find(|c| c.slug == "eps2-below-delta")
                .unwrap()
                .verdict
        };
        let skipped = epsilon_ledger(&q, &k, None).unwrap();
        assert_eq!(row(&skipped), Verdict::Skipped);
        let holds = epsilon_ledger(&q, &k, Some(&frac(1, 10))).unwrap();
        assert_eq!(row(&holds), Verdict::CertifiedHolds);
        // eps2 = 1e-4/log(100) ~ 2.2e-5, far above this delta
        let tiny = BigRational::new(BigInt::one(), pow10(50));
        let fails = epsilon_ledger(&q, &k, Some(&tiny)).unwrap();
        assert_eq!(row(&fails), Verdict::CertifiedFails);
    }

    #[test]
    fn epsilon_ledger_rejects_bad_domains() {
        let k = Magnitude::from_u64(100);
        assert!(epsilon_ledger(&big(1), &k, None).is_err());
        assert!(epsilon_ledger(&big(0), &k, None).is_err());
        assert!(epsilon_ledger(&frac(1, 10), &Magnitude::from_u64(1), None).is_err());
        assert!(epsilon_ledger(&frac(1, 10), &k, Some(&big(1))).is_err());
    }

    #[test]
    fn preconditions_flagship_scale_all_certify() {
        let kt = Magnitude::parse("10^200").unwrap();
        let report = check_preconditions(&kt, &frac(1, 2), &kt).unwrap();
        assert!(report.all_hold(), "conditions: {:?}", report.conditions);
        let by_slug = |slug: &str| {
            report
                .conditions
                .iter()
                .find(|c| c.slug == slug)
                .unwrap()
                .ln_margin
        };
        let main = by_slug("main-structure-probability-floor");
        assert!((69.0..71.5).contains(&main), "margin {main}");
        let chain = by_slug("size-vs-log-chain");
        assert!((0.5..1.0).contains(&chain), "margin {chain}");
        let deletion = by_slug("deletion-budget");
        assert!((114.0..116.0).contains(&deletion), "margin {deletion}");
        assert_eq!(report.p_prime, frac(1, 2));
        assert_eq!(report.q, frac(1, 150));
        assert_eq!(report.delta, frac(1, 300));
    }

    #[test]
    fn preconditions_desk_scale_shows_gaps() {
        let kt = Magnitude::from_u64(1_000_000);
        let report = check_preconditions(&kt, &frac(1, 2), &kt).unwrap();
        assert!(!report.all_hold());
        let find = |slug: &str| {
            report
                .conditions
                .iter()
                .find(|c| c.slug == slug)
                .unwrap()
                .clone()
        };
        let main = find("main-structure-probability-floor");
        assert_eq!(main.verdict, Verdict::CertifiedFails);
        assert!(
            (-15.5..-14.3).contains(&main.ln_margin),
            "margin {}",
            main.ln_margin
        );
        let typ = find("typicality-probability-floor");
        assert_eq!(typ.verdict, Verdict::CertifiedFails);
        assert!(
            (-6.6..-5.7).contains(&typ.ln_margin),
            "margin {}",
            typ.ln_margin
        );
        assert_eq!(find("deletion-budget").verdict, Verdict::CertifiedHolds);
        assert_eq!(
            find("reasonable-parameter-floors").verdict,
            Verdict::CertifiedFails
        );
        assert_eq!(find("size-vs-log-chain").verdict, Verdict::CertifiedFails);
    }

    #[test]
    fn preconditions_p_prime_is_symmetric() {
        let kt = Magnitude::from_u64(1_000_000);
        let high = check_preconditions(&kt, &frac(9, 10), &kt).unwrap();
        let low = check_preconditions(&kt, &frac(1, 10), &kt).unwrap();
        assert_eq!(high.p_prime, frac(1, 10));
        assert_eq!(high.p_prime, low.p_prime);
    }

    #[test]
    fn preconditions_deletion_budget_exact_boundary() {
        // log(10^6)/4 ~ 3.45: deleting 3 vertices fits, 4 does not
        let kt = Magnitude::from_u64(1_000_000);
        let fits = check_preconditions(&kt, &frac(1, 2), &Magnitude::from_u64(999_997)).unwrap();
        let over = check_preconditions(&kt, &frac(1, 2), &Magnitude::from_u64(999_996)).unwrap();
        let verdict = |r: &PreconditionReport| {
            r.conditions
                .iter()
                .find(|c| c.slug == "deletion-budget")
                .unwrap()
                .verdict
        };
        assert_eq!(verdict(&fits), Verdict::CertifiedHolds);
        assert_eq!(verdict(&over), Verdict::CertifiedFails);
    }

    #[test]
    fn diagnostics_complete_pair_is_upper_tight() {
        // emb(K_2, m) = m(m-1); the delete bound is met with equality
        let seq = counts(&[0, 2, 6, 12, 20, 30, 42, 56]);
        let diag = emb_sequence_diagnostics(&Graph::complete(2), 1, &seq).unwrap();
        assert!(diag.strict_all_hold());
        for row in &diag.first_difference {
            assert!(row.upper_tight, "m = {}", row.m);
            assert!(!row.lower_tight, "m = {}", row.m);
        }
        assert!(diag.growth_cap.iter().all(|r| r.holds));
        assert!(diag.second_difference.iter().all(|r| r.holds));
        assert!(diag.telescoped.iter().all(|r| r.holds));
    }

    #[test]
    fn diagnostics_triangle_growth_cap_fails_at_desk_scale() {
        // emb(K_3, m) = m(m-1)(m-2); the global cap needs the large-k regime
        let seq = counts(&[0, 0, 6, 24, 60, 120, 210]);
        let diag = emb_sequence_diagnostics(&Graph::complete(3), 1, &seq).unwrap();
        assert!(diag.strict_all_hold());
        let cap_at = |m: u64| diag.growth_cap.iter().find(|r| r.m == m).unwrap();
        assert!(cap_at(3).holds);
        assert!(!cap_at(7).holds);
        assert!(cap_at(7).slack.is_negative());
        assert!(diag.second_difference.iter().all(|r| r.holds));
    }

    #[test]
    fn diagnostics_reject_malformed_sequences() {
        let g = Graph::complete(2);
        assert_eq!(
            emb_sequence_diagnostics(&g, 1, &counts(&[5])),
            Err(BoundsError::SequenceTooShort { len: 1 })
        );
        assert_eq!(
            emb_sequence_diagnostics(&g, 0, &counts(&[0, 2])),
            Err(BoundsError::SequenceStart)
        );
    }

    #[test]
    fn verdicts_serialize_snake_case() {
        assert_eq!(
            serde_json::to_string(&Verdict::CertifiedHolds).unwrap(),
            "\"certified_holds\""
        );
        assert_eq!(
            serde_json::to_string(&Verdict::Skipped).unwrap(),
            "\"skipped\""
        );
    }
}
