//! Explicit bounds on nonsurjective primes, evaluated with exact integer
//! powers and high-precision natural logarithms.
//!
//! Every formula is evaluated twice: at a working precision of
//! `max(50, integer digits + 20)` significant digits and again at double
//! that. The two values must agree to all but the last ten working digits
//! and have the same ceiling, or the evaluation fails.

use dashu_float::DBig;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::is_prime_u64;

pub use crate::arith::radical;

/// Significant digits shown in [`BoundReport::value`].
pub const REPORTED_DIGITS: usize = 15;
/// Lower limit on the working precision.
pub const MIN_WORKING_DIGITS: usize = 50;
/// Digits kept above the integer part at the working precision.
const GUARD_DIGITS: usize = 20;
/// Trailing working digits allowed to differ between the two passes.
const SLACK_DIGITS: usize = 10;

thread_local! {
    static WORKING_DIGITS: Cell<usize> = const { Cell::new(MIN_WORKING_DIGITS) };
}

/// Run `f` with bound evaluation starting from `digits` working digits
/// instead of [`MIN_WORKING_DIGITS`]. Applies to the current thread only.
pub fn with_working_digits<T>(digits: usize, f: impl FnOnce() -> T) -> Result<T> {
    if digits < 2 * SLACK_DIGITS {
        return Err(Error::InvalidInput(format!(
            "precision must be at least {} digits",
            2 * SLACK_DIGITS
        )));
    }
    let old = WORKING_DIGITS.with(|c| c.replace(digits));
    let out = f();
    WORKING_DIGITS.with(|c| c.set(old));
    Ok(out)
}

/// Absolute discriminant and degree of a number field `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInvariants {
    #[serde(with = "decimal_uint")]
    pub abs_disc: BigUint,
    pub degree: u32,
}

impl FieldInvariants {
    pub fn new(abs_disc: BigUint, degree: u32) -> Result<Self> {
        if degree == 0 || abs_disc == BigUint::ZERO {
            return Err(Error::InvalidInput("field degree and discriminant must be positive".into()));
        }
        Ok(FieldInvariants { abs_disc, degree })
    }

    pub fn rationals() -> Self {
        FieldInvariants {
            abs_disc: BigUint::from(1u8),
            degree: 1,
        }
    }
}

mod decimal_uint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Constants `(a, b, c)` of the conditional Chebotarev bound
/// `(a log d_L + b [L:K] + c)^2`, kept as exact decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BSConstants {
    pub a_tilde: String,
    pub b_tilde: String,
    pub c_tilde: String,
}

impl Default for BSConstants {
    fn default() -> Self {
        BSConstants {
            a_tilde: "4".into(),
            b_tilde: "2.5".into(),
            c_tilde: "5".into(),
        }
    }
}

impl BSConstants {
    pub fn new(a: &str, b: &str, c: &str) -> Result<Self> {
        for s in [a, b, c] {
            let v = parse_decimal(s, MIN_WORKING_DIGITS)?;
            if v <= DBig::ZERO {
                return Err(Error::InvalidInput(format!("constant {s} must be positive")));
            }
        }
        Ok(BSConstants {
            a_tilde: a.into(),
            b_tilde: b.into(),
            c_tilde: c.into(),
        })
    }

    fn at(&self, digits: usize) -> Result<(DBig, DBig, DBig)> {
        Ok((
            parse_decimal(&self.a_tilde, digits)?,
            parse_decimal(&self.b_tilde, digits)?,
            parse_decimal(&self.c_tilde, digits)?,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaId {
    Mw20,
    Faltings,
    ProductAv,
    ProductEc,
    BachSorenson,
    LogDiscUpper,
    PairC,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    pub inputs: BTreeMap<String, Value>,
    /// The value to [`REPORTED_DIGITS`] significant digits.
    pub value: String,
    /// The value to `precision` significant digits.
    pub value_digits: String,
    pub precision: usize,
    /// `ceil(value)` as an exact decimal integer.
    pub integer_ceiling: String,
    /// 1-based `(i, j)` attaining a maximum over pairs, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax_pair: Option<(usize, usize)>,
}

impl BoundReport {
    /// The full-precision value, for composing bounds.
    pub fn to_dbig(&self) -> DBig {
        parse_decimal(&self.value_digits, self.precision).expect("own output parses")
    }
}

fn parse_decimal(s: &str, digits: usize) -> Result<DBig> {
    let v = DBig::from_str(s.trim()).map_err(|_| Error::InvalidInput(format!("not a decimal number: {s:?}")))?;
    Ok(v.with_precision(digits).value())
}

fn int_at(n: &BigUint, digits: usize) -> DBig {
    DBig::from_str(&n.to_string())
        .expect("integer literal")
        .with_precision(digits)
        .value()
}

fn small(n: u64, digits: usize) -> DBig {
    int_at(&BigUint::from(n), digits)
}

/// Number of digits before the decimal point (at least 1).
fn integer_digits(v: &DBig) -> usize {
    let repr = v.repr();
    if repr.significand().is_zero() {
        return 1;
    }
    let n = repr.digits() as isize + repr.exponent();
    n.max(1) as usize
}

/// Decimal rendering to `sig` significant digits; scientific notation once
/// the integer part no longer fits.
pub fn format_sig(v: &DBig, sig: usize) -> String {
    let r = v.clone().with_precision(sig).value();
    let repr = r.repr();
    if repr.significand().is_zero() {
        return "0".into();
    }
    let raw = repr.significand().to_string();
    let neg = raw.starts_with('-');
    let mut s = raw.trim_start_matches('-').to_string();
    let mut exp = repr.exponent();
    while s.len() < sig {
        s.push('0');
        exp -= 1;
    }
    let point = s.len() as isize + exp;
    let body = if point > sig as isize || point < -4 {
        format!("{}.{}e{}", &s[..1], &s[1..], point - 1)
    } else if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), s)
    } else if point as usize == s.len() {
        s
    } else {
        format!("{}.{}", &s[..point as usize], &s[point as usize..])
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn ceiling_string(v: &DBig) -> String {
    v.ceil().to_int().value().to_string()
}

/// Evaluate `f` under the two-pass precision policy.
fn evaluate<F>(formula_id: FormulaId, inputs: BTreeMap<String, Value>, f: F) -> Result<BoundReport>
where
    F: Fn(usize) -> Result<(DBig, Option<(usize, usize)>)>,
{
    let mut digits = WORKING_DIGITS.with(Cell::get);
    let (mut v1, mut arg1) = f(digits)?;
    while digits < integer_digits(&v1) + GUARD_DIGITS {
        digits = integer_digits(&v1) + GUARD_DIGITS;
        (v1, arg1) = f(digits)?;
    }
    let (v2, arg2) = f(2 * digits)?;
    let mag = integer_digits(&v2) as isize;
    let tol = DBig::from_parts(1.into(), mag - (digits - SLACK_DIGITS) as isize);
    let diff = v1.clone().with_precision(2 * digits).value() - &v2;
    let diff = if diff < DBig::ZERO { -diff } else { diff };
    if diff > tol || ceiling_string(&v1) != ceiling_string(&v2) || arg1 != arg2 {
        return Err(Error::PrecisionFailure(format!(
            "{formula_id:?}: {} vs {}",
            format_sig(&v1, digits),
            format_sig(&v2, digits)
        )));
    }
    Ok(BoundReport {
        formula_id,
        inputs,
        value: format_sig(&v2, REPORTED_DIGITS),
        value_digits: format_sig(&v2, digits),
        precision: digits,
        integer_ceiling: ceiling_string(&v2),
        argmax_pair: arg2,
    })
}

fn s(v: impl ToString) -> Value {
    Value::String(v.to_string())
}

/// Least prime not dividing `2g`.
pub fn smallest_prime_coprime_to_2g(g: u64) -> u64 {
    (2..)
        .find(|&p| is_prime_u64(p) && (2 * g) % p != 0)
        .expect("primes are unbounded")
}

/// `l0^(8 g^2) - 1`, exactly.
pub fn ell0_power_minus_one(g: u64) -> BigUint {
    let l0 = BigUint::from(smallest_prime_coprime_to_2g(g));
    l0.pow((8 * g * g) as u32) - 1u8
}

fn positive(n: &BigUint, what: &str) -> Result<()> {
    if *n == BigUint::ZERO {
        return Err(Error::InvalidInput(format!("{what} must be positive")));
    }
    Ok(())
}

/// `1279.626 ln rad(2 N) + 8007.988`.
pub fn mw20_bound(conductor: &BigUint) -> Result<BoundReport> {
    positive(conductor, "conductor")?;
    let rad = radical(&(conductor * 2u8))?;
    evaluate(
        FormulaId::Mw20,
        BTreeMap::from([("conductor".into(), s(conductor)), ("radical".into(), s(&rad))]),
        |d| {
            let v = parse_decimal("1279.626", d)? * int_at(&rad, d).ln() + parse_decimal("8007.988", d)?;
            Ok((v, None))
        },
    )
}

/// `a (ln d_K + [K:Q] (ln rad(2 l0 N1 N2 d_K) + ln(2 E^2))) + b + 1` with
/// `E = l0^(8 g^2) - 1`; shared by the Faltings and product bounds.
fn chebotarev_term(
    d: usize,
    g: u64,
    inv: &FieldInvariants,
    rad: &BigUint,
    bs: &BSConstants,
) -> Result<DBig> {
    let e = ell0_power_minus_one(g);
    let (a, b, _) = bs.at(d)?;
    let two_e2 = &e * &e * 2u8;
    let inner = int_at(&inv.abs_disc, d).ln()
        + small(u64::from(inv.degree), d) * (int_at(rad, d).ln() + int_at(&two_e2, d).ln());
    Ok(a * inner + b + small(1, d))
}

fn ell0_radical(g: u64, inv: &FieldInvariants, n1: &BigUint, n2: &BigUint) -> Result<BigUint> {
    let l0 = smallest_prime_coprime_to_2g(g);
    radical(&(BigUint::from(2 * l0) * n1 * n2 * &inv.abs_disc))
}

/// `4 E^4 (a (ln d_K + [K:Q](ln rad(2 l0 N1 N2 d_K) + ln(2 E^2))) + b + 1)^2`.
pub fn faltings_bound(
    g: u64,
    inv: &FieldInvariants,
    n1: &BigUint,
    n2: &BigUint,
    bs: &BSConstants,
) -> Result<BoundReport> {
    if g == 0 {
        return Err(Error::InvalidInput("g must be positive".into()));
    }
    positive(n1, "N1")?;
    positive(n2, "N2")?;
    let rad = ell0_radical(g, inv, n1, n2)?;
    let e = ell0_power_minus_one(g);
    let e4 = e.pow(4) * 4u8;
    evaluate(
        FormulaId::Faltings,
        BTreeMap::from([
            ("g".into(), json!(g)),
            ("abs_disc".into(), s(&inv.abs_disc)),
            ("degree".into(), json!(inv.degree)),
            ("n1".into(), s(n1)),
            ("n2".into(), s(n2)),
            ("bs".into(), serde_json::to_value(bs).expect("serializable")),
            ("ell0".into(), json!(smallest_prime_coprime_to_2g(g))),
            ("radical".into(), s(&rad)),
        ]),
        |d| {
            let t = chebotarev_term(d, g, inv, &rad, bs)?;
            Ok((int_at(&e4, d) * &t * t, None))
        },
    )
}

/// Max over ordered pairs `i != j` of
/// `max(8 g E^2 (a (...) + b + 1), c_i)`; ties keep the first pair found.
pub fn product_av_bound(
    g: u64,
    inv: &FieldInvariants,
    conductors: &[BigUint],
    c_individual: &[String],
    bs: &BSConstants,
) -> Result<BoundReport> {
    let n = conductors.len();
    if n < 2 || c_individual.len() != n {
        return Err(Error::BadShape {
            expected: n.max(2),
            got: c_individual.len(),
        });
    }
    if g == 0 {
        return Err(Error::InvalidInput("g must be positive".into()));
    }
    for c in conductors {
        positive(c, "conductor")?;
    }
    let mut rads = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                rads.insert((i, j), ell0_radical(g, inv, &conductors[i], &conductors[j])?);
            }
        }
    }
    let e = ell0_power_minus_one(g);
    let factor = &e * &e * (8 * g);
    evaluate(
        FormulaId::ProductAv,
        BTreeMap::from([
            ("g".into(), json!(g)),
            ("abs_disc".into(), s(&inv.abs_disc)),
            ("degree".into(), json!(inv.degree)),
            ("conductors".into(), Value::Array(conductors.iter().map(s).collect())),
            ("c_individual".into(), json!(c_individual)),
            ("bs".into(), serde_json::to_value(bs).expect("serializable")),
        ]),
        |d| {
            let mut best: Option<(DBig, (usize, usize))> = None;
            for (&(i, j), rad) in &rads {
                let term = int_at(&factor, d) * chebotarev_term(d, g, inv, rad, bs)?;
                let ci = parse_decimal(&c_individual[i], d)?;
                let cand = if ci > term { ci } else { term };
                if best.as_ref().map_or(true, |(b, _)| cand > *b) {
                    best = Some((cand, (i + 1, j + 1)));
                }
            }
            let (v, arg) = best.expect("n >= 2");
            Ok((v, Some(arg)))
        },
    )
}

/// The elliptic-curve specialization over `Q`:
/// max over pairs of `8 (3^8 - 1)^2 (4 ln rad(6 N_i N_j) + 76.59)`.
pub fn product_ec_bound(conductors: &[BigUint]) -> Result<BoundReport> {
    product_ec_bound_with_constant(conductors, "76.59")
}

/// [`product_ec_bound`] with the additive constant replaced.
pub fn product_ec_bound_with_constant(conductors: &[BigUint], constant: &str) -> Result<BoundReport> {
    let n = conductors.len();
    if n < 2 {
        return Err(Error::BadShape { expected: 2, got: n });
    }
    for c in conductors {
        positive(c, "conductor")?;
    }
    let mut rads = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                rads.insert((i, j), radical(&(BigUint::from(6u8) * &conductors[i] * &conductors[j]))?);
            }
        }
    }
    let factor = BigUint::from(8u8) * BigUint::from(6560u32).pow(2);
    evaluate(
        FormulaId::ProductEc,
        BTreeMap::from([
            ("conductors".into(), Value::Array(conductors.iter().map(s).collect())),
            ("constant".into(), s(constant)),
        ]),
        |d| {
            let k = parse_decimal(constant, d)?;
            let mut best: Option<(DBig, (usize, usize))> = None;
            for (&(i, j), rad) in &rads {
                let v = int_at(&factor, d) * (small(4, d) * int_at(rad, d).ln() + &k);
                if best.as_ref().map_or(true, |(b, _)| v > *b) {
                    best = Some((v, (i + 1, j + 1)));
                }
            }
            let (v, arg) = best.expect("n >= 2");
            Ok((v, Some(arg)))
        },
    )
}

/// `4 ln(2 (3^8 - 1)^2) + 3.5`, the exact form of the rounded 76.59.
pub fn ec_constant_exact(digits: usize) -> DBig {
    let e = BigUint::from(6560u32);
    small(4, digits) * int_at(&(&e * &e * 2u8), digits).ln() + parse_decimal("3.5", digits).expect("literal")
}

/// `(a log_dL + b [L:K] + c)^2`.
pub fn bach_sorenson(log_dl: &str, degree_lk: u64, bs: &BSConstants) -> Result<BoundReport> {
    if parse_decimal(log_dl, MIN_WORKING_DIGITS)? < DBig::ZERO {
        return Err(Error::InvalidInput("log d_L must be nonnegative".into()));
    }
    if degree_lk == 0 {
        return Err(Error::InvalidInput("[L:K] must be positive".into()));
    }
    evaluate(
        FormulaId::BachSorenson,
        BTreeMap::from([
            ("log_dl".into(), s(log_dl)),
            ("degree_lk".into(), json!(degree_lk)),
            ("bs".into(), serde_json::to_value(bs).expect("serializable")),
        ]),
        |d| {
            let (a, b, c) = bs.at(d)?;
            let t = a * parse_decimal(log_dl, d)? + b * small(degree_lk, d) + c;
            Ok((&t * &t, None))
        },
    )
}

/// `[L:K] ln d_K + ([L:Q] - [K:Q]) ln rad + [L:Q] ln [L:K]`.
pub fn log_disc_upper(
    inv_k: &FieldInvariants,
    degree_lk: u64,
    degree_lq: u64,
    rad_disc_lk: &BigUint,
) -> Result<BoundReport> {
    let expected = degree_lk * u64::from(inv_k.degree);
    if degree_lq != expected || degree_lk == 0 {
        return Err(Error::DegreeMismatch(degree_lq as usize, expected as usize));
    }
    positive(rad_disc_lk, "radical")?;
    evaluate(
        FormulaId::LogDiscUpper,
        BTreeMap::from([
            ("abs_disc".into(), s(&inv_k.abs_disc)),
            ("degree".into(), json!(inv_k.degree)),
            ("degree_lk".into(), json!(degree_lk)),
            ("degree_lq".into(), json!(degree_lq)),
            ("rad_disc_lk".into(), s(rad_disc_lk)),
        ]),
        |d| {
            let v = small(degree_lk, d) * int_at(&inv_k.abs_disc, d).ln()
                + small(degree_lq - u64::from(inv_k.degree), d) * int_at(rad_disc_lk, d).ln()
                + small(degree_lq, d) * small(degree_lk, d).ln();
            Ok((v, None))
        },
    )
}

/// `max(4 g sqrt(B), c1, c2)`.
pub fn pair_c_bound(g: u64, b: &str, c1: &str, c2: &str) -> Result<BoundReport> {
    if parse_decimal(b, MIN_WORKING_DIGITS)? < DBig::ZERO {
        return Err(Error::InvalidInput("B must be nonnegative".into()));
    }
    evaluate(
        FormulaId::PairC,
        BTreeMap::from([
            ("g".into(), json!(g)),
            ("b".into(), s(b)),
            ("c1".into(), s(c1)),
            ("c2".into(), s(c2)),
        ]),
        |d| {
            let bb = parse_decimal(b, d)?;
            let root = if bb == DBig::ZERO { DBig::ZERO } else { bb.sqrt() };
            let mut v = small(4 * g, d) * root;
            for c in [c1, c2] {
                let c = parse_decimal(c, d)?;
                if c > v {
                    v = c;
                }
            }
            Ok((v, None))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn ell0() {
        assert_eq!(smallest_prime_coprime_to_2g(1), 3);
        assert_eq!(smallest_prime_coprime_to_2g(2), 3);
        assert_eq!(smallest_prime_coprime_to_2g(3), 5);
        assert_eq!(ell0_power_minus_one(2) + 1u8, big(1_853_020_188_851_841));
    }

    #[test]
    fn working_digits_are_scoped() {
        let wide = with_working_digits(120, || mw20_bound(&big(1)).unwrap()).unwrap();
        assert_eq!(wide.precision, 120);
        assert_eq!(wide.value, "8894.95715407120");
        assert_eq!(mw20_bound(&big(1)).unwrap().precision, MIN_WORKING_DIGITS);
        assert!(with_working_digits(5, || ()).is_err());
    }

    #[test]
    fn formatting() {
        let v = DBig::from_str("8894.95715407120057650833").unwrap();
        assert_eq!(format_sig(&v, 15), "8894.95715407120");
        let v = DBig::from_str("4095385666347645046199418353655423353360007642479727086603151497744.44").unwrap();
        assert_eq!(format_sig(&v, 15), "4.09538566634765e66");
        assert_eq!(format_sig(&DBig::from_str("0.00125").unwrap(), 3), "0.00125");
        assert_eq!(format_sig(&DBig::from_str("40").unwrap(), 4), "40.00");
    }

    #[test]
    fn mw20_values() {
        let r = mw20_bound(&big(1)).unwrap();
        assert_eq!(r.value, "8894.95715407120");
        assert!(r.value_digits.starts_with("8894.957154071200576508335070653040"));
        assert_eq!(r.integer_ceiling, "8895");
        let r37 = mw20_bound(&big(37)).unwrap();
        assert!(r37.value_digits.starts_with("13515.5815989564789253573038617923"));
        assert!(mw20_bound(&big(0)).is_err());
    }

    #[test]
    fn bach_sorenson_values() {
        let bs = BSConstants::default();
        assert_eq!(bach_sorenson("0", 1, &bs).unwrap().value, "56.2500000000000");
        let ln4 = format_sig(&small(4, 80).ln(), 80);
        let r = bach_sorenson(&ln4, 2, &bs).unwrap();
        assert!(r.value_digits.starts_with("241.6525417803561406854517011182148"));
        let doubled = BSConstants::new("8", "2.5", "5").unwrap();
        assert_eq!(bach_sorenson("0", 3, &doubled).unwrap().value, bach_sorenson("0", 3, &bs).unwrap().value);
        assert!(bach_sorenson("-1", 1, &bs).is_err());
        assert!(BSConstants::new("0", "1", "1").is_err());
    }

    #[test]
    fn log_disc_values() {
        let q = FieldInvariants::rationals();
        let r = log_disc_upper(&q, 2, 2, &big(8)).unwrap();
        assert!(r.value_digits.starts_with("3.465735902799726547086160607290882840"));
        let k = FieldInvariants::new(big(5), 2).unwrap();
        let same = log_disc_upper(&k, 1, 2, &big(1)).unwrap();
        assert_eq!(same.value, format_sig(&small(5, 50).ln(), 15));
        assert_eq!(log_disc_upper(&k, 2, 3, &big(1)).unwrap_err(), Error::DegreeMismatch(3, 4));
    }

    #[test]
    fn pair_values() {
        assert_eq!(pair_c_bound(1, "100", "0", "0").unwrap().value, "40.0000000000000");
        assert_eq!(pair_c_bound(1, "0", "7", "11").unwrap().value, "11.0000000000000");
    }
}
