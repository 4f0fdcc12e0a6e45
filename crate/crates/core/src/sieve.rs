//! Surjectivity sieve for products of elliptic curves.
//!
//! Each pair of curves is scanned up to `pmax`. At `l >= 5` a good prime `p`
//! with `a_p(E_i) != +-a_p(E_j) mod l` proves the pair's image is everything;
//! at `l in {2, 3}` the witness is a prime whose pair of rational torsion
//! dimensions is distinguished. A product of `n` curves is handled through
//! its pairs.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::arith::prime_divisors;
use crate::curves::{frobenius_table, CurveModel, FrobeniusData, TraceStatus};
use crate::error::{Error, Result};
use crate::field::{primes_up_to, PrimeModulus};
use crate::matgroup::{smallprimes_criterion, trace_criterion, DimOneSignature};

pub const DEFAULT_PMAX: u64 = 1000;
pub const DEFAULT_ELL_CEILING: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveInput {
    pub curves: Vec<CurveModel>,
    pub nonsurjective_sets: Vec<BTreeSet<u64>>,
    #[serde(default = "default_pmax")]
    pub pmax: u64,
    #[serde(default = "default_ceiling")]
    pub ell_ceiling: u64,
}

fn default_pmax() -> u64 {
    DEFAULT_PMAX
}

fn default_ceiling() -> u64 {
    DEFAULT_ELL_CEILING
}

impl SieveInput {
    pub fn new(curves: Vec<CurveModel>, nonsurjective_sets: Vec<BTreeSet<u64>>, pmax: u64) -> Self {
        SieveInput {
            curves,
            nonsurjective_sets,
            pmax,
            ell_ceiling: DEFAULT_ELL_CEILING,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.curves.len() < 2 {
            return Err(Error::InvalidInput("need at least two curves".into()));
        }
        if self.nonsurjective_sets.len() != self.curves.len() {
            return Err(Error::BadShape {
                expected: self.curves.len(),
                got: self.nonsurjective_sets.len(),
            });
        }
        if self.pmax < 5 {
            return Err(Error::InvalidInput("pmax must be at least 5".into()));
        }
        let mut labels = BTreeSet::new();
        for l in self.curves.iter().filter_map(CurveModel::label) {
            if !labels.insert(l) {
                return Err(Error::InvalidInput(format!("duplicate curve label {l}")));
            }
        }
        Ok(())
    }
}

/// Outcome for one prime `l` on one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum EllVerdict {
    ProvedSurjective { witness_p: u64 },
    /// `l` lies in the given curves' nonsurjective sets.
    InheritedNonsurjective { from: Vec<usize> },
    /// No witness up to `pmax`; `evidence` primes were scanned.
    CandidateCongruence { evidence: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    /// gcd of `D_p = a_p(E_i)^2 - a_p(E_j)^2` over good `p > 3`, as a
    /// decimal string.
    #[serde(with = "decimal")]
    pub residual_gcd: BigUint,
    /// Good primes `p > 3` common to both curves.
    pub scanned_primes: u64,
    #[serde(rename = "verdicts")]
    pub per_ell: BTreeMap<u64, EllVerdict>,
}

mod decimal {
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductTag {
    Inherited,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub ell: u64,
    pub tag: ProductTag,
    /// Curves whose nonsurjective set contains `ell`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub from: Vec<usize>,
    /// Pairs leaving `ell` undecided.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveParameters {
    pub n: usize,
    pub labels: Vec<Option<String>>,
    pub nonsurjective_sets: Vec<BTreeSet<u64>>,
    pub pmax: u64,
    pub ell_ceiling: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveReport {
    pub parameters: SieveParameters,
    pub pairs: Vec<PairVerdict>,
    pub product_set: Vec<ProductEntry>,
    pub closing_statement: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SieveReport {
    pub fn product_primes(&self) -> Vec<u64> {
        self.product_set.iter().map(|e| e.ell).collect()
    }
}

/// Pair data for two precomputed Frobenius tables.
fn pair_from_tables(
    (i, ti, si): (usize, &[FrobeniusData], &BTreeSet<u64>),
    (j, tj, sj): (usize, &[FrobeniusData], &BTreeSet<u64>),
    pmax: u64,
    ceiling: u64,
) -> Result<PairVerdict> {
    // (p, a_p(E_i), a_p(E_j), dims_i, dims_j) for p good for both and p > 3
    let usable: Vec<_> = ti
        .iter()
        .zip(tj)
        .filter(|(a, b)| a.record.status == TraceStatus::Good && b.record.status == TraceStatus::Good)
        .map(|(a, b)| {
            debug_assert_eq!(a.record.p, b.record.p);
            (
                a.record.p,
                a.record.ap.expect("good"),
                b.record.ap.expect("good"),
                a.dims.expect("good"),
                b.dims.expect("good"),
            )
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::NoGoodPrimes { pmax });
    }
    let mut residual = BigUint::zero();
    for &(_, x, y, _, _) in &usable {
        let d = (i128::from(x) - i128::from(y)) * (i128::from(x) + i128::from(y));
        residual = residual.gcd(&BigUint::from(d.unsigned_abs()));
    }
    let inherited = |ell: u64| -> Vec<usize> {
        let mut from = Vec::new();
        if si.contains(&ell) {
            from.push(i);
        }
        if sj.contains(&ell) {
            from.push(j);
        }
        from
    };
    let evidence = usable.len() as u64;

    let mut ells: BTreeSet<u64> = primes_up_to(ceiling.max(pmax)).into_iter().collect();
    ells.extend([2, 3, 5]);
    ells.extend(si.iter().chain(sj));
    if !residual.is_zero() {
        for q in prime_divisors(&residual)? {
            ells.insert(q.to_u64().ok_or_else(|| {
                Error::InternalInconsistency(format!("residual gcd prime {q} exceeds 64 bits"))
            })?);
        }
    }

    let mut per_ell = BTreeMap::new();
    for ell in ells {
        let from = inherited(ell);
        let verdict = if !from.is_empty() {
            EllVerdict::InheritedNonsurjective { from }
        } else if ell <= 3 {
            let witness = usable.iter().find(|(_, _, _, di, dj)| {
                let (d1, d2) = if ell == 2 { (di.dim2, dj.dim2) } else { (di.dim3, dj.dim3) };
                smallprimes_criterion(DimOneSignature(d1), DimOneSignature(d2), ell as u32).expect("ell in {2,3}")
            });
            match witness {
                Some(w) => EllVerdict::ProvedSurjective { witness_p: w.0 },
                None => EllVerdict::CandidateCongruence { evidence },
            }
        } else {
            // Frob_l is ramified on the l-torsion, so p = l never witnesses
            let witness = usable
                .iter()
                .find(|&&(p, x, y, _, _)| p != ell && fires(x, y, ell));
            match witness {
                Some(w) => EllVerdict::ProvedSurjective { witness_p: w.0 },
                None => EllVerdict::CandidateCongruence { evidence },
            }
        };
        per_ell.insert(ell, verdict);
    }
    Ok(PairVerdict {
        i,
        j,
        residual_gcd: residual,
        scanned_primes: evidence,
        per_ell,
    })
}

fn fires(x: i64, y: i64, ell: u64) -> bool {
    match u32::try_from(ell).ok().and_then(|l| PrimeModulus::new(l).ok()) {
        Some(m) => trace_criterion(x, y, m),
        None => {
            let l = i128::from(ell);
            let (x, y) = (i128::from(x), i128::from(y));
            (x - y) % l != 0 && (x + y) % l != 0
        }
    }
}

/// Verdicts for one pair of curves.
pub fn sieve_pair(
    ei: &CurveModel,
    ej: &CurveModel,
    si: &BTreeSet<u64>,
    sj: &BTreeSet<u64>,
    pmax: u64,
) -> Result<PairVerdict> {
    if pmax < 5 {
        return Err(Error::InvalidInput("pmax must be at least 5".into()));
    }
    let (ti, tj) = rayon::join(|| frobenius_table(ei, pmax), || frobenius_table(ej, pmax));
    pair_from_tables((0, &ti?, si), (1, &tj?, sj), pmax, DEFAULT_ELL_CEILING)
}

/// All pairs, and the primes that stay nonsurjective or undecided for the
/// product.
pub fn sieve_product(input: &SieveInput) -> Result<SieveReport> {
    input.validate()?;
    let n = input.curves.len();
    let tables: Vec<Vec<FrobeniusData>> = input
        .curves
        .par_iter()
        .map(|e| frobenius_table(e, input.pmax))
        .collect::<Result<_>>()?;
    let pair_indices: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pairs: Vec<PairVerdict> = pair_indices
        .par_iter()
        .map(|&(i, j)| {
            pair_from_tables(
                (i, &tables[i], &input.nonsurjective_sets[i]),
                (j, &tables[j], &input.nonsurjective_sets[j]),
                input.pmax,
                input.ell_ceiling,
            )
        })
        .collect::<Result<_>>()?;

    let mut entries: BTreeMap<u64, ProductEntry> = BTreeMap::new();
    for (idx, s) in input.nonsurjective_sets.iter().enumerate() {
        for &ell in s {
            entries
                .entry(ell)
                .or_insert_with(|| ProductEntry {
                    ell,
                    tag: ProductTag::Inherited,
                    from: Vec::new(),
                    pairs: Vec::new(),
                })
                .from
                .push(idx);
        }
    }
    for pv in &pairs {
        for (&ell, v) in &pv.per_ell {
            if matches!(v, EllVerdict::CandidateCongruence { .. }) {
                entries
                    .entry(ell)
                    .or_insert_with(|| ProductEntry {
                        ell,
                        tag: ProductTag::Candidate,
                        from: Vec::new(),
                        pairs: Vec::new(),
                    })
                    .pairs
                    .push((pv.i, pv.j));
            }
        }
    }

    let ceiling = input.ell_ceiling.max(input.pmax);
    let undecided: Vec<String> = pairs
        .iter()
        .filter(|p| p.residual_gcd.is_zero())
        .map(|p| format!("({}, {})", p.i, p.j))
        .collect();
    let inherited_above: Vec<u64> = entries.keys().copied().filter(|&l| l > ceiling).collect();
    let closing_statement = if undecided.is_empty() {
        let mut s = format!(
            "Every prime l > {ceiling} is ProvedSurjective for every pair: no such l divides a residual gcd, \
             so some scanned p <= {} has a_p(E_i) != +-a_p(E_j) mod l.",
            input.pmax
        );
        if !inherited_above.is_empty() {
            s.push_str(&format!(" Exceptions inherited from the input sets: {inherited_above:?}."));
        }
        s
    } else {
        format!(
            "Primes l > {ceiling} are undecided for pairs {} (residual gcd 0: traces agree up to sign at every scanned prime).",
            undecided.join(", ")
        )
    };
    let mut notes = Vec::new();
    if n >= 3 {
        notes.push(
            "For n >= 3 the pairwise reduction is applied at every l; at l in {2, 3} surjectivity on all pairs \
             does not by itself force surjectivity of the n-fold product."
                .to_string(),
        );
    }
    Ok(SieveReport {
        parameters: SieveParameters {
            n,
            labels: input.curves.iter().map(|e| e.label().map(str::to_string)).collect(),
            nonsurjective_sets: input.nonsurjective_sets.clone(),
            pmax: input.pmax,
            ell_ceiling: input.ell_ceiling,
        },
        pairs,
        product_set: entries.into_values().collect(),
        closing_statement,
        notes,
    })
}
