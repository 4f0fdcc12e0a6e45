//! Explicitly enumerated finite groups.
//!
//! A [`FiniteGroupTable`] owns a sorted element list and a multiplication
//! law. Small groups carry a full Cayley table; larger matrix groups and
//! products multiply on demand and look the result up by binary search or
//! a dense index over factor coordinates. Subgroups are index sets into the
//! parent ([`SubgroupHandle`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::matgroup::{enumerate_gsp, gsp_order_formula, MatGSp};

/// Groups up to this order get a precomputed Cayley table.
pub const CAYLEY_LIMIT: usize = 2500;
/// Default budget for [`build_delta_group`].
pub const DEFAULT_ELEMENT_BUDGET: u128 = 1_000_000;
/// Default parent-order budget for [`all_subgroups`].
pub const DEFAULT_SUBGROUP_BUDGET: usize = 2_000;
/// Candidate matrices scanned when enumerating `GSp_2g(F_l)`.
pub const GSP_CANDIDATE_BUDGET: u128 = 1 << 26;

const DENSE_LOOKUP_LIMIT: usize = 1 << 26;
const ASSOC_SAMPLES: usize = 256;

#[derive(Debug)]
enum Law {
    Cayley(Vec<u32>),
    Computed,
}

#[derive(Debug)]
enum Kind {
    Abstract,
    Matrices(Vec<MatGSp>),
    Product {
        factors: Vec<Arc<FiniteGroupTable>>,
        coords: Vec<u32>,
        lookup: Option<Vec<u32>>,
        fibered: bool,
    },
}

/// A finite group with elements indexed `0..order` in canonical order.
#[derive(Debug)]
pub struct FiniteGroupTable {
    order: usize,
    identity: u32,
    inverses: Vec<u32>,
    law: Law,
    kind: Kind,
    /// Multiplier of each element, for matrix groups and fiber products.
    character: Option<Vec<u16>>,
    modulus: Option<PrimeModulus>,
}

impl FiniteGroupTable {
    /// Build from a row-major Cayley table on `0..n`.
    ///
    /// Checks that every row and column is a permutation, that an identity
    /// and inverses exist, and associativity (on a deterministic sample, or
    /// on every triple when `full_associativity` is set).
    pub fn from_cayley(table: Vec<u32>, full_associativity: bool) -> Result<Self> {
        let n = (table.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != table.len() {
            return Err(Error::BadShape {
                expected: n * n,
                got: table.len(),
            });
        }
        if table.iter().any(|&x| x as usize >= n) {
            return Err(Error::InvalidInput("Cayley table entry out of range".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e * n + x] as usize == x && table[x * n + e] as usize == x))
            .ok_or_else(|| Error::InvalidInput("no identity element".into()))? as u32;
        let mut inverses = vec![u32::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| table[a * n + b] == identity && table[b * n + a] == identity)
                .ok_or_else(|| Error::InvalidInput(format!("element {a} has no inverse")))?;
            inverses[a] = b as u32;
        }
        let group = FiniteGroupTable {
            order: n,
            identity,
            inverses,
            law: Law::Cayley(table),
            kind: Kind::Abstract,
            character: None,
            modulus: None,
        };
        group.check_associativity(full_associativity)?;
        Ok(group)
    }

    /// The cyclic group `Z/n` with generator `1`.
    pub fn cyclic(n: usize) -> Result<Self> {
        let table = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        Self::from_cayley(table, false)
    }

    /// The group formed by a list of `GSp_2g(F_l)` elements (deduplicated
    /// and sorted here). Fails unless the list is closed.
    pub fn from_gsp_elements(mut elements: Vec<MatGSp>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("empty element list".into()))?;
        let modulus = first.modulus();
        let g = first.genus();
        if elements.iter().any(|e| e.modulus() != modulus || e.genus() != g) {
            return Err(Error::InvalidInput("elements of mixed shape".into()));
        }
        elements.sort_by(|a, b| a.matrix().cmp(b.matrix()));
        elements.dedup_by(|a, b| a.matrix() == b.matrix());
        let order = elements.len();
        let character = elements.iter().map(crate::matgroup::multiplier).collect();
        let identity_matrix = MatGSp::identity(g, modulus);
        let mut group = FiniteGroupTable {
            order,
            identity: 0,
            inverses: Vec::new(),
            law: Law::Computed,
            kind: Kind::Matrices(elements),
            character: Some(character),
            modulus: Some(modulus),
        };
        group.identity = group
            .index_of_matrix(&identity_matrix)
            .ok_or_else(|| Error::InvalidInput("identity missing".into()))?;
        let mut inverses = Vec::with_capacity(order);
        for a in 0..order {
            let inv = group.matrix(a as u32).expect("matrix group").inverse();
            inverses.push(
                group
                    .index_of_matrix(&inv)
                    .ok_or_else(|| Error::InvalidInput("not closed under inverses".into()))?,
            );
        }
        group.inverses = inverses;
        if order <= CAYLEY_LIMIT {
            let mut table = Vec::with_capacity(order * order);
            for a in 0..order as u32 {
                for b in 0..order as u32 {
                    table.push(
                        group
                            .try_mul_computed(a, b)
                            .ok_or_else(|| Error::InvalidInput("not closed under products".into()))?,
                    );
                }
            }
            group.law = Law::Cayley(table);
        }
        group.check_associativity(false)?;
        Ok(group)
    }

    /// All of `GSp_2g(F_l)`, by exhaustive enumeration.
    pub fn gsp(g: usize, modulus: PrimeModulus) -> Result<Self> {
        Self::from_gsp_elements(enumerate_gsp(g, modulus, GSP_CANDIDATE_BUDGET)?)
    }

    /// Direct product of the factors.
    pub fn direct_product(factors: Vec<Arc<FiniteGroupTable>>, budget: u128) -> Result<Self> {
        Self::product(factors, false, budget)
    }

    /// Tuples of factor elements sharing one multiplier.
    pub fn fiber_product(factors: Vec<Arc<FiniteGroupTable>>, budget: u128) -> Result<Self> {
        Self::product(factors, true, budget)
    }

    fn product(factors: Vec<Arc<FiniteGroupTable>>, fibered: bool, budget: u128) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("product of no factors".into()));
        }
        let modulus = factors[0].modulus;
        if fibered {
            if factors.iter().any(|f| f.character.is_none() || f.modulus != modulus) {
                return Err(Error::InvalidInput(
                    "fiber product needs matrix factors over one field".into(),
                ));
            }
        }
        // exact order before allocating anything
        let estimate: u128 = if fibered {
            let l = modulus.expect("checked").get() as usize;
            let mut counts = vec![vec![0u128; l]; factors.len()];
            for (i, f) in factors.iter().enumerate() {
                for &c in f.character.as_ref().expect("checked") {
                    counts[i][c as usize] += 1;
                }
            }
            (0..l).map(|c| counts.iter().map(|v| v[c]).product::<u128>()).sum()
        } else {
            factors.iter().map(|f| f.order as u128).product()
        };
        if estimate > budget {
            return Err(Error::BudgetExceeded { estimate, budget });
        }
        let n = factors.len();
        let mut coords: Vec<u32> = Vec::with_capacity(estimate as usize * n);
        let mut character = if fibered { Some(Vec::with_capacity(estimate as usize)) } else { None };
        let mut tuple = vec![0u32; n];
        'outer: loop {
            let ok = if fibered {
                let c0 = factors[0].character.as_ref().unwrap()[tuple[0] as usize];
                let ok = (1..n).all(|i| factors[i].character.as_ref().unwrap()[tuple[i] as usize] == c0);
                if ok {
                    character.as_mut().unwrap().push(c0);
                }
                ok
            } else {
                true
            };
            if ok {
                coords.extend_from_slice(&tuple);
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                tuple[pos] += 1;
                if (tuple[pos] as usize) < factors[pos].order {
                    break;
                }
                tuple[pos] = 0;
            }
        }
        let order = coords.len() / n;
        let radix_total: u128 = factors.iter().map(|f| f.order as u128).product();
        let lookup = if radix_total <= DENSE_LOOKUP_LIMIT as u128 {
            let mut dense = vec![u32::MAX; radix_total as usize];
            for idx in 0..order {
                dense[mixed_radix(&factors, &coords[idx * n..(idx + 1) * n])] = idx as u32;
            }
            Some(dense)
        } else {
            None
        };
        let mut group = FiniteGroupTable {
            order,
            identity: 0,
            inverses: Vec::new(),
            law: Law::Computed,
            kind: Kind::Product {
                factors,
                coords,
                lookup,
                fibered,
            },
            character,
            modulus,
        };
        let id_tuple: Vec<u32> = group.factors().iter().map(|f| f.identity).collect();
        group.identity = group.index_of_coords(&id_tuple).expect("identity tuple present");
        let inverses = (0..order as u32)
            .map(|a| {
                let t: Vec<u32> = group
                    .coords(a)
                    .iter()
                    .zip(group.factors())
                    .map(|(&c, f)| f.inv(c))
                    .collect();
                group.index_of_coords(&t).expect("closed under inverses")
            })
            .collect();
        group.inverses = inverses;
        if order <= CAYLEY_LIMIT {
            let table = (0..order * order)
                .map(|i| {
                    group
                        .try_mul_computed((i / order) as u32, (i % order) as u32)
                        .expect("product closed")
                })
                .collect();
            group.law = Law::Cayley(table);
        }
        Ok(group)
    }

    fn check_associativity(&self, full: bool) -> Result<()> {
        let n = self.order as u32;
        let bad = |a: u32, b: u32, c: u32| self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c));
        if full {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if bad(a, b, c) {
                            return Err(Error::InvalidInput("law is not associative".into()));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..ASSOC_SAMPLES {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if bad(a, b, c) {
                    return Err(Error::InvalidInput("law is not associative".into()));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> u32 {
        self.identity
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.law {
            Law::Cayley(t) => t[a as usize * self.order + b as usize],
            Law::Computed => self.try_mul_computed(a, b).expect("group is closed"),
        }
    }

    fn try_mul_computed(&self, a: u32, b: u32) -> Option<u32> {
        match &self.kind {
            Kind::Abstract => unreachable!("abstract groups always carry a table"),
            Kind::Matrices(els) => {
                let p = els[a as usize].mul(&els[b as usize]);
                self.index_of_matrix(&p)
            }
            Kind::Product { factors, .. } => {
                let (ca, cb) = (self.coords(a), self.coords(b));
                if factors.len() <= 4 {
                    let mut t = [0u32; 4];
                    for (i, f) in factors.iter().enumerate() {
                        t[i] = f.mul(ca[i], cb[i]);
                    }
                    return self.index_of_coords(&t[..factors.len()]);
                }
                let t: Vec<u32> = factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.mul(ca[i], cb[i]))
                    .collect();
                self.index_of_coords(&t)
            }
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = self.identity;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: u32) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Multiplier of element `a`, when the group carries one.
    pub fn multiplier(&self, a: u32) -> Option<u16> {
        self.character.as_ref().map(|c| c[a as usize])
    }

    pub fn modulus(&self) -> Option<PrimeModulus> {
        self.modulus
    }

    /// The matrix for element `a` of a matrix group.
    pub fn matrix(&self, a: u32) -> Option<&MatGSp> {
        match &self.kind {
            Kind::Matrices(els) => Some(&els[a as usize]),
            _ => None,
        }
    }

    pub fn index_of_matrix(&self, m: &MatGSp) -> Option<u32> {
        match &self.kind {
            Kind::Matrices(els) => els
                .binary_search_by(|e| e.matrix().cmp(m.matrix()))
                .ok()
                .map(|i| i as u32),
            _ => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, Kind::Product { .. })
    }

    pub fn is_fiber_product(&self) -> bool {
        matches!(self.kind, Kind::Product { fibered: true, .. })
    }

    pub fn factors(&self) -> &[Arc<FiniteGroupTable>] {
        match &self.kind {
            Kind::Product { factors, .. } => factors,
            _ => &[],
        }
    }

    /// Factor coordinates of a product element.
    pub fn coords(&self, a: u32) -> &[u32] {
        match &self.kind {
            Kind::Product { coords, factors, .. } => {
                let n = factors.len();
                &coords[a as usize * n..(a as usize + 1) * n]
            }
            _ => std::slice::from_ref(&self.inverses[0]).split_at(0).0,
        }
    }

    /// Component `i` of a product element.
    pub fn project(&self, a: u32, i: usize) -> u32 {
        self.coords(a)[i]
    }

    pub fn index_of_coords(&self, t: &[u32]) -> Option<u32> {
        match &self.kind {
            Kind::Product {
                factors,
                coords,
                lookup,
                ..
            } => {
                if t.len() != factors.len() || t.iter().zip(factors).any(|(&c, f)| c as usize >= f.order) {
                    return None;
                }
                match lookup {
                    Some(dense) => {
                        let v = dense[mixed_radix(factors, t)];
                        (v != u32::MAX).then_some(v)
                    }
                    None => {
                        let n = factors.len();
                        let (mut lo, mut hi) = (0usize, self.order);
                        while lo < hi {
                            let mid = (lo + hi) / 2;
                            match coords[mid * n..(mid + 1) * n].cmp(t) {
                                std::cmp::Ordering::Less => lo = mid + 1,
                                std::cmp::Ordering::Greater => hi = mid,
                                std::cmp::Ordering::Equal => return Some(mid as u32),
                            }
                        }
                        None
                    }
                }
            }
            _ => None,
        }
    }

    /// Canonical form of an element: row-major residues (concatenated over
    /// factors for products), or the index itself for abstract groups.
    pub fn label(&self, a: u32) -> Vec<u32> {
        match &self.kind {
            Kind::Abstract => vec![a],
            Kind::Matrices(els) => els[a as usize]
                .matrix()
                .entries()
                .iter()
                .map(|&e| u32::from(e))
                .collect(),
            Kind::Product { factors, .. } => self
                .coords(a)
                .iter()
                .zip(factors)
                .flat_map(|(&c, f)| f.label(c))
                .collect(),
        }
    }
}

fn mixed_radix(factors: &[Arc<FiniteGroupTable>], t: &[u32]) -> usize {
    t.iter()
        .zip(factors)
        .fold(0usize, |acc, (&c, f)| acc * f.order + c as usize)
}

/// Fixed-size membership bitset over the elements of a parent group.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct MemberSet(Vec<u64>);

impl MemberSet {
    pub fn empty(order: usize) -> Self {
        MemberSet(vec![0; order.div_ceil(64)])
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        self.0[i as usize / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: u32) -> bool {
        let w = &mut self.0[i as usize / 64];
        let bit = 1u64 << (i % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &MemberSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros();
                bits &= bits - 1;
                Some(wi as u32 * 64 + tz)
            })
        })
    }
}

/// A subgroup of `parent`, stored as a sorted index set.
#[derive(Clone, Debug)]
pub struct SubgroupHandle<'a> {
    parent: &'a FiniteGroupTable,
    members: Vec<u32>,
    set: MemberSet,
    generators: Vec<u32>,
}

impl PartialEq for SubgroupHandle<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.parent, other.parent) && self.set == other.set
    }
}

impl<'a> SubgroupHandle<'a> {
    pub fn parent(&self) -> &'a FiniteGroupTable {
        self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Sorted member indices.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn member_set(&self) -> &MemberSet {
        &self.set
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    #[inline]
    pub fn contains(&self, a: u32) -> bool {
        self.set.contains(a)
    }

    /// Rebuild a handle from a member set, picking a generating set
    /// greedily. Fails if the set is not a subgroup.
    pub fn from_members(parent: &'a FiniteGroupTable, members: &[u32]) -> Result<Self> {
        let mut target = MemberSet::empty(parent.order());
        for &m in members {
            target.insert(m);
        }
        let mut h = closure(parent, &[]);
        for &m in members {
            if !h.contains(m) {
                h = extend(&h, m);
            }
        }
        if h.set != target {
            return Err(Error::InvalidInput("member set is not a subgroup".into()));
        }
        Ok(h)
    }

    /// Image of the projection to factor `i` of a product parent.
    pub fn projection(&self, i: usize) -> MemberSet {
        let factor = &self.parent.factors()[i];
        let mut img = MemberSet::empty(factor.order());
        for &m in &self.members {
            img.insert(self.parent.project(m, i));
        }
        img
    }

    pub fn projection_is_surjective(&self, i: usize) -> bool {
        self.projection(i).len() == self.parent.factors()[i].order()
    }
}

/// The smallest subgroup containing `generators` (Dimino's coset method).
pub fn closure<'a>(parent: &'a FiniteGroupTable, generators: &[u32]) -> SubgroupHandle<'a> {
    let id = parent.identity();
    let mut set = MemberSet::empty(parent.order());
    set.insert(id);
    let mut h = SubgroupHandle {
        parent,
        members: vec![id],
        set,
        generators: Vec::new(),
    };
    for &g in generators {
        if !h.contains(g) {
            h = extend(&h, g);
        }
    }
    h
}

/// `<h, s>`, reusing the elements of `h`: the result is assembled from right
/// cosets `h * r` for representatives `r` found by multiplying existing
/// representatives by generators.
fn extend<'a>(h: &SubgroupHandle<'a>, s: u32) -> SubgroupHandle<'a> {
    let parent = h.parent;
    if h.contains(s) {
        return h.clone();
    }
    let base: Vec<u32> = h.members.clone();
    let mut set = h.set.clone();
    let mut elements = base.clone();
    let mut gens = h.generators.clone();
    gens.push(s);
    let mut reps = vec![s];
    for &k in &base {
        let x = parent.mul(k, s);
        set.insert(x);
        elements.push(x);
    }
    let mut i = 0;
    while i < reps.len() {
        let r = reps[i];
        for &t in &gens {
            let x = parent.mul(r, t);
            if !set.contains(x) {
                reps.push(x);
                for &k in &base {
                    let y = parent.mul(k, x);
                    set.insert(y);
                    elements.push(y);
                }
            }
        }
        i += 1;
    }
    elements.sort_unstable();
    SubgroupHandle {
        parent,
        members: elements,
        set,
        generators: gens,
    }
}

/// Every subgroup of `parent`, each exactly once, ordered by
/// `(order, sorted member list)`.
///
/// Starts from the cyclic subgroups and repeatedly joins each known subgroup
/// with cyclic subgroups of prime-power order (these generate every
/// subgroup), deduplicating by member set.
pub fn all_subgroups(parent: &FiniteGroupTable, budget: usize) -> Result<Vec<SubgroupHandle<'_>>> {
    if parent.order() > budget {
        return Err(Error::BudgetExceeded {
            estimate: parent.order() as u128,
            budget: budget as u128,
        });
    }
    let mut seen: HashMap<MemberSet, usize> = HashMap::new();
    let mut found: Vec<SubgroupHandle<'_>> = Vec::new();
    let trivial = closure(parent, &[]);
    seen.insert(trivial.set.clone(), 0);
    found.push(trivial);

    let mut extenders: Vec<u32> = Vec::new();
    let mut layer: Vec<usize> = Vec::new();
    for a in 0..parent.order() as u32 {
        let c = closure(parent, &[a]);
        if seen.contains_key(&c.set) {
            continue;
        }
        if is_prime_power(c.order()) {
            extenders.push(a);
        }
        seen.insert(c.set.clone(), found.len());
        layer.push(found.len());
        found.push(c);
    }

    while !layer.is_empty() {
        let joins: Vec<Vec<SubgroupHandle<'_>>> = layer
            .par_iter()
            .map(|&hi| {
                let h = &found[hi];
                let mut local: HashMap<MemberSet, SubgroupHandle<'_>> = HashMap::new();
                for &c in &extenders {
                    if h.contains(c) {
                        continue;
                    }
                    let j = extend(h, c);
                    local.entry(j.set.clone()).or_insert(j);
                }
                let mut v: Vec<_> = local.into_values().collect();
                v.sort_by(|a, b| a.members.cmp(&b.members));
                v
            })
            .collect();
        let mut next = Vec::new();
        for group in joins {
            for j in group {
                if seen.contains_key(&j.set) {
                    continue;
                }
                seen.insert(j.set.clone(), found.len());
                next.push(found.len());
                found.push(j);
            }
        }
        layer = next;
    }
    found.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
    Ok(found)
}

fn is_prime_power(mut n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            return n == 1;
        }
        p += 1;
    }
    true
}

/// `Delta_2g,n(F_l)`: `n`-tuples of `GSp_2g(F_l)` elements with a common
/// multiplier.
pub fn build_delta_group(g: usize, n: usize, modulus: PrimeModulus, budget: u128) -> Result<FiniteGroupTable> {
    if g == 0 || n == 0 {
        return Err(Error::InvalidInput("g and n must be positive".into()));
    }
    let l = u128::from(modulus.get());
    let gsp = gsp_order_formula(g as u32, l as u64);
    let estimate = gsp
        .checked_pow(n as u32)
        .map(|x| x / (l - 1).pow(n as u32 - 1))
        .unwrap_or(u128::MAX);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let factor = Arc::new(FiniteGroupTable::gsp(g, modulus)?);
    FiniteGroupTable::fiber_product(vec![factor; n], budget)
}

/// Goursat data of a subgroup of a two-factor product.
#[derive(Clone, Debug)]
pub struct GoursatData<'a> {
    /// `{a : (a, e) in G}` inside factor 1.
    pub kernel1: SubgroupHandle<'a>,
    /// `{b : (e, b) in G}` inside factor 2.
    pub kernel2: SubgroupHandle<'a>,
    pub quotient_order: usize,
}

fn two_factor_parent<'a>(g: &SubgroupHandle<'a>) -> Result<&'a FiniteGroupTable> {
    let parent = g.parent();
    if parent.factors().len() != 2 {
        return Err(Error::NotAProduct { expected: 2 });
    }
    Ok(parent)
}

/// Goursat decomposition of a subgroup with surjective projections.
pub fn goursat_decompose<'a>(g: &SubgroupHandle<'a>) -> Result<GoursatData<'a>> {
    let parent = two_factor_parent(g)?;
    let (f1, f2) = (&*parent.factors()[0], &*parent.factors()[1]);
    for i in 0..2 {
        if !g.projection_is_surjective(i) {
            return Err(Error::NotSurjectiveProjection(i + 1));
        }
    }
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for &m in g.members() {
        let c = parent.coords(m);
        if c[1] == f2.identity() {
            k1.push(c[0]);
        }
        if c[0] == f1.identity() {
            k2.push(c[1]);
        }
    }
    k1.sort_unstable();
    k2.sort_unstable();
    let kernel1 = SubgroupHandle::from_members(f1, &k1)?;
    let kernel2 = SubgroupHandle::from_members(f2, &k2)?;
    let q1 = f1.order() / kernel1.order();
    let q2 = f2.order() / kernel2.order();
    if f1.order() % kernel1.order() != 0 || q1 != q2 || g.order() != f1.order() * kernel2.order() {
        return Err(Error::InternalInconsistency(format!(
            "Goursat quotients disagree: {q1} vs {q2}, |G| = {}",
            g.order()
        )));
    }
    Ok(GoursatData {
        kernel1,
        kernel2,
        quotient_order: q1,
    })
}

impl GoursatData<'_> {
    /// The fiber product `{(a, b) : a N1 <-> b N2}` rebuilt from the pairs of
    /// cosets met by `g`, as a sorted index list in the parent of `g`.
    pub fn reconstruct(&self, g: &SubgroupHandle<'_>) -> Result<Vec<u32>> {
        let parent = two_factor_parent(g)?;
        let (f1, f2) = (&*parent.factors()[0], &*parent.factors()[1]);
        let mut out = MemberSet::empty(parent.order());
        for &m in g.members() {
            let c = parent.coords(m);
            for &n1 in self.kernel1.members() {
                for &n2 in self.kernel2.members() {
                    let t = [f1.mul(c[0], n1), f2.mul(c[1], n2)];
                    let idx = parent
                        .index_of_coords(&t)
                        .ok_or_else(|| Error::InternalInconsistency("coset pair outside parent".into()))?;
                    out.insert(idx);
                }
            }
        }
        Ok(out.iter().collect())
    }
}

/// The three possible shapes of a subgroup of `Delta_2g(F_l)` (`l >= 5`)
/// with both projections surjective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    /// Graph of a multiplier-preserving automorphism.
    GraphOfAutomorphism,
    /// Graph of an automorphism modulo `{+-I}`.
    ModPlusMinusGraph,
    FullFiberProduct,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// `phi[i]` is the factor-2 index paired with factor-1 element `i`.
    Automorphism(Vec<u32>),
    /// The two Goursat kernels (each should be `{+-I}`).
    SignedGraph { kernel1: Vec<u32>, kernel2: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub case_id: CaseId,
    pub witness: Option<Witness>,
}

fn require_delta_two(parent: &FiniteGroupTable) -> Result<PrimeModulus> {
    if !parent.is_fiber_product() || parent.factors().len() != 2 {
        return Err(Error::NotAProduct { expected: 2 });
    }
    let m = parent.modulus().ok_or(Error::NotAProduct { expected: 2 })?;
    if m.get() < 5 {
        return Err(Error::InvalidInput(format!(
            "classification needs l >= 5, got {}",
            m.get()
        )));
    }
    Ok(m)
}

/// Classify a subgroup of `Delta_2g(F_l)` with surjective projections by
/// its order.
pub fn classify_delta_subgroup(g: &SubgroupHandle<'_>) -> Result<ClassificationVerdict> {
    let parent = g.parent();
    require_delta_two(parent)?;
    for i in 0..2 {
        if !g.projection_is_surjective(i) {
            return Err(Error::NotSurjectiveProjection(i + 1));
        }
    }
    let gsp = parent.factors()[0].order();
    let order = g.order();
    if order == parent.order() {
        return Ok(ClassificationVerdict {
            case_id: CaseId::FullFiberProduct,
            witness: None,
        });
    }
    if order == gsp {
        let mut phi = vec![u32::MAX; gsp];
        for &m in g.members() {
            let c = parent.coords(m);
            phi[c[0] as usize] = c[1];
        }
        return Ok(ClassificationVerdict {
            case_id: CaseId::GraphOfAutomorphism,
            witness: Some(Witness::Automorphism(phi)),
        });
    }
    if order == 2 * gsp {
        let data = goursat_decompose(g)?;
        return Ok(ClassificationVerdict {
            case_id: CaseId::ModPlusMinusGraph,
            witness: Some(Witness::SignedGraph {
                kernel1: data.kernel1.members().to_vec(),
                kernel2: data.kernel2.members().to_vec(),
            }),
        });
    }
    Err(Error::ClassificationContradiction { order })
}

/// What was confirmed about a graph-of-automorphism witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismCheck {
    pub bijective: bool,
    pub homomorphism: bool,
    pub multiplier_preserving: bool,
    /// `(beta, twisted)` with `phi(x) = beta x beta^-1`, composed with the
    /// radial automorphism of exponent `(l-1)/2` when `twisted`.
    pub inner_times_radial: Option<(u32, bool)>,
}

impl AutomorphismCheck {
    pub fn passed(&self) -> bool {
        self.bijective && self.homomorphism && self.multiplier_preserving && self.inner_times_radial.is_some()
    }
}

/// Check a permutation of a `GSp_2g(F_l)` table: bijective, a homomorphism,
/// multiplier preserving, and of the form inner automorphism times
/// `{id, chi_(l-1)/2}`.
pub fn check_automorphism_witness(factor: &FiniteGroupTable, phi: &[u32]) -> AutomorphismCheck {
    let n = factor.order();
    let mut hit = MemberSet::empty(n);
    let bijective = phi.len() == n && phi.iter().all(|&x| (x as usize) < n && hit.insert(x));
    if !bijective {
        return AutomorphismCheck {
            bijective,
            homomorphism: false,
            multiplier_preserving: false,
            inner_times_radial: None,
        };
    }
    let gens = small_generating_set(factor);
    // phi is determined by the generators once it is a homomorphism
    let homomorphism = (0..n as u32).all(|a| {
        gens.iter()
            .all(|&s| phi[factor.mul(a, s) as usize] == factor.mul(phi[a as usize], phi[s as usize]))
    });
    let multiplier_preserving = (0..n as u32).all(|a| factor.multiplier(a) == factor.multiplier(phi[a as usize]));
    let inner_times_radial = factor.modulus().and_then(|m| {
        let half = u64::from(m.unit_order() / 2);
        let radial = |x: u32| -> u32 {
            let mat = factor.matrix(x).expect("matrix factor");
            let lam = m.pow(crate::matgroup::multiplier(mat), half);
            let scaled = MatGSp::new(mat.matrix().scale(lam)).expect("scalar multiple stays in GSp");
            factor.index_of_matrix(&scaled).expect("closed")
        };
        (0..n as u32).find_map(|beta| {
            let bi = factor.inv(beta);
            let conj = |x: u32| factor.mul(factor.mul(beta, x), bi);
            [false, true].into_iter().find_map(|twisted| {
                let image = |x: u32| if twisted { radial(conj(x)) } else { conj(x) };
                let matches = gens.iter().all(|&s| image(s) == phi[s as usize])
                    && (0..n as u32).all(|x| image(x) == phi[x as usize]);
                matches.then_some((beta, twisted))
            })
        })
    });
    AutomorphismCheck {
        bijective,
        homomorphism,
        multiplier_preserving,
        inner_times_radial,
    }
}

/// A greedy generating set: scan elements, keep those outside the span.
pub fn small_generating_set(group: &FiniteGroupTable) -> Vec<u32> {
    let mut h = closure(group, &[]);
    let mut gens = Vec::new();
    // try high-order elements first to keep the set short
    let mut candidates: Vec<u32> = (0..group.order() as u32).collect();
    candidates.sort_by_key(|&a| std::cmp::Reverse(group.element_order(a)));
    for a in candidates {
        if h.order() == group.order() {
            break;
        }
        if !h.contains(a) {
            h = extend(&h, a);
            gens.push(a);
        }
    }
    gens
}
