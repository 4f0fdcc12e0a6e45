//! Elliptic curves over `Q`: models, reduction, Frobenius traces by point
//! counting, and rational 2- and 3-torsion over `F_p`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::arith::prime_divisors;
use crate::error::{Error, Result};
use crate::field::{is_prime_u64, primes_up_to};

/// Primes below this use a precomputed table of squares.
const SQUARE_TABLE_LIMIT: u64 = 1 << 24;
/// Largest prime accepted for reduction (products stay in `u64`).
pub const MAX_REDUCTION_PRIME: u64 = 1 << 31;

/// A Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct CurveModel {
    ainvs: [BigInt; 5],
    conductor: Option<BigUint>,
    label: Option<String>,
}

impl CurveModel {
    pub fn new(ainvs: [BigInt; 5], conductor: Option<BigUint>, label: Option<String>) -> Result<Self> {
        if conductor.as_ref().is_some_and(|n| n.is_zero()) {
            return Err(Error::InvalidInput("conductor must be positive".into()));
        }
        let model = CurveModel {
            ainvs,
            conductor,
            label,
        };
        if model.discriminant().is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(model)
    }

    pub fn from_ints(ainvs: [i64; 5], conductor: Option<u64>, label: Option<&str>) -> Result<Self> {
        Self::new(
            ainvs.map(BigInt::from),
            conductor.map(BigUint::from),
            label.map(str::to_string),
        )
    }

    pub fn ainvs(&self) -> &[BigInt; 5] {
        &self.ainvs
    }

    pub fn conductor(&self) -> Option<&BigUint> {
        self.conductor.as_ref()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_conductor(mut self, conductor: BigUint) -> Result<Self> {
        if conductor.is_zero() {
            return Err(Error::InvalidInput("conductor must be positive".into()));
        }
        self.conductor = Some(conductor);
        Ok(self)
    }

    fn b_invariants(&self) -> [BigInt; 4] {
        let [a1, a2, a3, a4, a6] = &self.ainvs;
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        [b2, b4, b6, b8]
    }

    pub fn c4(&self) -> BigInt {
        let [b2, b4, _, _] = self.b_invariants();
        &b2 * &b2 - 24 * b4
    }

    pub fn c6(&self) -> BigInt {
        let [b2, b4, b6, _] = self.b_invariants();
        -(&b2 * &b2 * &b2) + 36 * &b2 * b4 - 216 * b6
    }

    pub fn discriminant(&self) -> BigInt {
        let [b2, b4, b6, b8] = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * b2 * b4 * b6
    }

    /// Whether `p` divides the conductor (or the model discriminant when no
    /// conductor is known).
    pub fn is_bad(&self, p: u64) -> bool {
        match &self.conductor {
            Some(n) => (n % p).is_zero(),
            None => (self.discriminant() % BigInt::from(p)).is_zero(),
        }
    }

    /// Reduction to `y^2 = x^3 + A x + B` over `F_p` with `A = -27 c4` and
    /// `B = -54 c6`, for good `p > 3`.
    pub fn reduce(&self, p: u64) -> Result<ReducedCurve> {
        if p <= 3 || p > MAX_REDUCTION_PRIME || !is_prime_u64(p) || self.is_bad(p) {
            return Err(Error::BadPrime(p));
        }
        let a = mod_p(&(-27 * self.c4()), p);
        let b = mod_p(&(-54 * self.c6()), p);
        Ok(ReducedCurve::new(p, a, b))
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.ainvs.iter().map(|x| x.to_string()).collect();
        match &self.label {
            Some(l) => write!(f, "{l} [{}]", a.join(",")),
            None => write!(f, "[{}]", a.join(",")),
        }
    }
}

fn mod_p(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

/// Primes of bad reduction: divisors of the conductor when known, else of
/// the model discriminant. The latter is a superset for non-minimal models.
pub fn bad_primes(e: &CurveModel) -> Result<Vec<BigUint>> {
    match e.conductor() {
        Some(n) => prime_divisors(n),
        None => prime_divisors(e.discriminant().magnitude()),
    }
}

/// A short Weierstrass curve over `F_p`, with a table of squares for
/// moderate `p`.
#[derive(Clone, Debug)]
pub struct ReducedCurve {
    p: u64,
    a: u64,
    b: u64,
    squares: Option<Vec<bool>>,
}

impl ReducedCurve {
    fn new(p: u64, a: u64, b: u64) -> Self {
        let squares = (p < SQUARE_TABLE_LIMIT).then(|| {
            let mut t = vec![false; p as usize];
            for x in 0..p.div_ceil(2) + 1 {
                t[(x * x % p) as usize] = true;
            }
            t
        });
        ReducedCurve { p, a, b, squares }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coefficients(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    #[inline]
    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        ((x * x % p * x) % p + self.a * x % p + self.b) % p
    }

    /// Legendre symbol of `v` (reduced), as -1, 0 or 1.
    #[inline]
    fn chi(&self, v: u64) -> i64 {
        if v == 0 {
            return 0;
        }
        let sq = match &self.squares {
            Some(t) => t[v as usize],
            None => pow_mod(v, (self.p - 1) / 2, self.p) == 1,
        };
        if sq {
            1
        } else {
            -1
        }
    }

    /// `a_p = -sum_x chi(x^3 + A x + B)`.
    pub fn trace(&self) -> i64 {
        -(0..self.p).map(|x| self.chi(self.rhs(x))).sum::<i64>()
    }

    /// `dim_F2 E(F_p)[2]` and `dim_F3 E(F_p)[3]`.
    pub fn torsion_dims(&self) -> Result<(u8, u8)> {
        let p = self.p;
        let r2 = (0..p).filter(|&x| self.rhs(x) == 0).count() as u64;
        // psi_3 = 3x^4 + 6A x^2 + 12B x - A^2
        let (a, b) = (self.a, self.b);
        let a2 = a * a % p;
        let r3 = (0..p)
            .filter(|&x| {
                let x2 = x * x % p;
                let psi = (3 * (x2 * x2 % p) + 6 * a % p * x2 % p + 12 * b % p * x % p + (p - a2)) % p;
                psi == 0 && self.chi(self.rhs(x)) == 1
            })
            .count() as u64;
        let dim2 = match 1 + r2 {
            1 => 0,
            2 => 1,
            4 => 2,
            n => return Err(Error::InternalInconsistency(format!("#E[2](F_{p}) = {n}"))),
        };
        let dim3 = match 1 + 2 * r3 {
            1 => 0,
            3 => 1,
            9 => 2,
            n => return Err(Error::InternalInconsistency(format!("#E[3](F_{p}) = {n}"))),
        };
        Ok((dim2, dim3))
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (u128::from(acc) * u128::from(b) % u128::from(m)) as u64;
        }
        b = (u128::from(b) * u128::from(b) % u128::from(m)) as u64;
        e >>= 1;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Good,
    Bad,
    /// Good `p <= 3`, outside the short-form reduction.
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub p: u64,
    /// Present only for good primes.
    pub ap: Option<i64>,
    pub status: TraceStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionDims {
    pub p: u64,
    pub dim2: u8,
    pub dim3: u8,
}

/// Frobenius trace at a prime `p`, with the status explaining absent values.
pub fn trace_of_frobenius(e: &CurveModel, p: u64) -> Result<TraceRecord> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if e.is_bad(p) {
        return Ok(TraceRecord {
            p,
            ap: None,
            status: TraceStatus::Bad,
        });
    }
    if p <= 3 {
        return Ok(TraceRecord {
            p,
            ap: None,
            status: TraceStatus::Skipped,
        });
    }
    let r = e.reduce(p)?;
    Ok(TraceRecord {
        p,
        ap: Some(r.trace()),
        status: TraceStatus::Good,
    })
}

pub fn torsion_dims(e: &CurveModel, p: u64) -> Result<TorsionDims> {
    let (dim2, dim3) = e.reduce(p)?.torsion_dims()?;
    Ok(TorsionDims { p, dim2, dim3 })
}

/// Records for every prime `p <= pmax`, ascending.
pub fn trace_table(e: &CurveModel, pmax: u64) -> Result<Vec<TraceRecord>> {
    if pmax < 2 {
        return Err(Error::InvalidInput("pmax must be at least 2".into()));
    }
    primes_up_to(pmax)
        .into_par_iter()
        .map(|p| trace_of_frobenius(e, p))
        .collect()
}

/// Trace and torsion data at one prime, as consumed by the sieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrobeniusData {
    pub record: TraceRecord,
    pub dims: Option<TorsionDims>,
}

/// [`trace_table`] plus torsion dimensions at good primes.
pub fn frobenius_table(e: &CurveModel, pmax: u64) -> Result<Vec<FrobeniusData>> {
    if pmax < 2 {
        return Err(Error::InvalidInput("pmax must be at least 2".into()));
    }
    primes_up_to(pmax)
        .into_par_iter()
        .map(|p| {
            let record = trace_of_frobenius(e, p)?;
            if record.status != TraceStatus::Good {
                return Ok(FrobeniusData { record, dims: None });
            }
            let r = e.reduce(p)?;
            let (dim2, dim3) = r.torsion_dims()?;
            Ok(FrobeniusData {
                record,
                dims: Some(TorsionDims { p, dim2, dim3 }),
            })
        })
        .collect()
}

/// An integer given either as a JSON number or a decimal string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Int(i64),
    Str(String),
}

impl JsonInt {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            JsonInt::Int(v) => Ok(BigInt::from(*v)),
            JsonInt::Str(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("not a decimal integer: {s:?}"))),
        }
    }
}

/// On-disk form: `{label?, ainvs: [a1..a6] as decimal strings, conductor?}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub ainvs: Vec<JsonInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductor: Option<JsonInt>,
}

impl TryFrom<CurveJson> for CurveModel {
    type Error = Error;

    fn try_from(j: CurveJson) -> Result<Self> {
        if j.ainvs.len() != 5 {
            return Err(Error::BadShape {
                expected: 5,
                got: j.ainvs.len(),
            });
        }
        let mut a: [BigInt; 5] = Default::default();
        for (slot, v) in a.iter_mut().zip(&j.ainvs) {
            *slot = v.to_bigint()?;
        }
        let conductor = match j.conductor {
            None => None,
            Some(c) => {
                let c = c.to_bigint()?;
                if !c.is_positive() {
                    return Err(Error::InvalidInput("conductor must be positive".into()));
                }
                let (Sign::Plus, mag) = c.into_parts() else { unreachable!() };
                Some(mag)
            }
        };
        CurveModel::new(a, conductor, j.label)
    }
}

impl From<CurveModel> for CurveJson {
    fn from(e: CurveModel) -> Self {
        CurveJson {
            label: e.label,
            ainvs: e.ainvs.iter().map(|x| JsonInt::Str(x.to_string())).collect(),
            conductor: e.conductor.map(|c| JsonInt::Str(c.to_string())),
        }
    }
}
