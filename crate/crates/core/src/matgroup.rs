//! Matrices over `F_l`, the general symplectic group `GSp_2g(F_l)`, and the
//! element-level criteria used to certify that a subgroup of the fiber
//! product `Delta_2g(F_l)` is everything.
//!
//! The symplectic form is `J_2g = [[0, I_g], [-I_g, 0]]`. A matrix `m` lies
//! in `GSp_2g` when `m^t J m = mult(m) J` for a unit `mult(m)`; for `g = 1`
//! this is all of `GL_2` and the multiplier is the determinant.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{euler_phi, PrimeModulus};

/// Dense square matrix over `F_l`, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    dim: usize,
    modulus: PrimeModulus,
    entries: Vec<u16>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<F_{}>[", self.modulus)?;
        for r in 0..self.dim {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(u16::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Build from signed integers, reducing each entry mod `l`.
    pub fn from_ints(dim: usize, entries: &[i64], modulus: PrimeModulus) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::BadShape {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Matrix {
            dim,
            modulus,
            entries: entries.iter().map(|&x| modulus.reduce(x)).collect(),
        })
    }

    /// Build from residues already in `[0, l)`.
    pub fn from_residues(dim: usize, entries: Vec<u16>, modulus: PrimeModulus) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::BadShape {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|&e| u32::from(e) >= modulus.get()) {
            return Err(Error::InvalidInput("residue out of range".into()));
        }
        Ok(Matrix {
            dim,
            modulus,
            entries,
        })
    }

    pub fn identity(dim: usize, modulus: PrimeModulus) -> Self {
        Self::scalar(dim, 1, modulus)
    }

    pub fn scalar(dim: usize, lambda: u16, modulus: PrimeModulus) -> Self {
        let mut entries = vec![0u16; dim * dim];
        let lambda = modulus.reduce(i64::from(lambda));
        for i in 0..dim {
            entries[i * dim + i] = lambda;
        }
        Matrix {
            dim,
            modulus,
            entries,
        }
    }

    /// The standard symplectic form `J_2g`.
    pub fn symplectic_form(g: usize, modulus: PrimeModulus) -> Self {
        let dim = 2 * g;
        let mut entries = vec![0u16; dim * dim];
        let minus_one = modulus.neg(1);
        for i in 0..g {
            entries[i * dim + g + i] = 1;
            entries[(g + i) * dim + i] = minus_one;
        }
        Matrix {
            dim,
            modulus,
            entries,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u16 {
        self.entries[r * self.dim + c]
    }

    fn row(&self, r: usize) -> &[u16] {
        &self.entries[r * self.dim..(r + 1) * self.dim]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        debug_assert_eq!(self.modulus, other.modulus);
        let n = self.dim;
        let m = u64::from(self.modulus.get());
        let mut out = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += u64::from(self.entries[i * n + k]) * u64::from(other.entries[k * n + j]);
                }
                out[i * n + j] = (acc % m) as u16;
            }
        }
        Matrix {
            dim: n,
            modulus: self.modulus,
            entries: out,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j];
            }
        }
        Matrix {
            dim: n,
            modulus: self.modulus,
            entries: out,
        }
    }

    pub fn scale(&self, lambda: u16) -> Matrix {
        let m = self.modulus;
        Matrix {
            dim: self.dim,
            modulus: m,
            entries: self.entries.iter().map(|&e| m.mul(e, lambda)).collect(),
        }
    }

    pub fn trace(&self) -> u16 {
        (0..self.dim).fold(0, |acc, i| self.modulus.add(acc, self.get(i, i)))
    }

    /// `self - lambda * I`.
    pub fn minus_scalar(&self, lambda: u16) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            let idx = i * self.dim + i;
            out.entries[idx] = self.modulus.sub(out.entries[idx], lambda);
        }
        out
    }

    /// Row echelon form in place; returns (rank, determinant sign/scale factor).
    fn eliminate(&mut self) -> (usize, u16) {
        let m = self.modulus;
        let n = self.dim;
        let mut rank = 0;
        let mut det = 1u16;
        for col in 0..n {
            let Some(pivot) = (rank..n).find(|&r| self.entries[r * n + col] != 0) else {
                det = 0;
                continue;
            };
            if pivot != rank {
                for c in 0..n {
                    self.entries.swap(pivot * n + c, rank * n + c);
                }
                det = m.neg(det);
            }
            let pv = self.entries[rank * n + col];
            det = m.mul(det, pv);
            let inv = m.inv(pv).expect("pivot is nonzero");
            for r in (rank + 1)..n {
                let factor = m.mul(self.entries[r * n + col], inv);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    let sub = m.mul(factor, self.entries[rank * n + c]);
                    self.entries[r * n + c] = m.sub(self.entries[r * n + c], sub);
                }
            }
            rank += 1;
        }
        (rank, if rank == n { det } else { 0 })
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate().0
    }

    pub fn det(&self) -> u16 {
        self.clone().eliminate().1
    }

    /// Inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let m = self.modulus;
        let n = self.dim;
        let w = 2 * n;
        let mut aug = vec![0u16; n * w];
        for r in 0..n {
            aug[r * w..r * w + n].copy_from_slice(self.row(r));
            aug[r * w + n + r] = 1;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| aug[r * w + col] != 0)?;
            if pivot != col {
                for c in 0..w {
                    aug.swap(pivot * w + c, col * w + c);
                }
            }
            let inv = m.inv(aug[col * w + col])?;
            for c in 0..w {
                aug[col * w + c] = m.mul(aug[col * w + c], inv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = aug[r * w + col];
                if factor == 0 {
                    continue;
                }
                for c in 0..w {
                    let sub = m.mul(factor, aug[col * w + c]);
                    aug[r * w + c] = m.sub(aug[r * w + c], sub);
                }
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            entries.extend_from_slice(&aug[r * w + n..r * w + w]);
        }
        Some(Matrix {
            dim: n,
            modulus: m,
            entries,
        })
    }

    /// `beta * self * beta^-1`.
    pub fn conjugate_by(&self, beta: &Matrix) -> Option<Matrix> {
        Some(beta.mul(self).mul(&beta.inverse()?))
    }
}

/// An element of `GSp_2g(F_l)` together with its multiplier.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MatGSp {
    matrix: Matrix,
    mult: u16,
}

impl MatGSp {
    /// Validate `matrix` and compute its multiplier.
    ///
    /// The candidate multiplier is read off the `(0, g)` entry of `m^t J m`
    /// and the full identity `m^t J m = mult * J` is then checked.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim % 2 != 0 {
            return Err(Error::BadShape {
                expected: dim + 1,
                got: dim,
            });
        }
        let g = dim / 2;
        let modulus = matrix.modulus();
        let j = Matrix::symplectic_form(g, modulus);
        let form = matrix.transpose().mul(&j).mul(&matrix);
        let mult = form.get(0, g);
        if mult == 0 || form != j.scale(mult) {
            return Err(Error::NotSymplectic);
        }
        Ok(MatGSp { matrix, mult })
    }

    pub fn identity(g: usize, modulus: PrimeModulus) -> Self {
        MatGSp {
            matrix: Matrix::identity(2 * g, modulus),
            mult: 1,
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    #[inline]
    pub fn genus(&self) -> usize {
        self.matrix.dim() / 2
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.matrix.modulus()
    }

    pub fn trace(&self) -> u16 {
        self.matrix.trace()
    }

    pub fn mul(&self, other: &MatGSp) -> MatGSp {
        MatGSp {
            matrix: self.matrix.mul(&other.matrix),
            mult: self.modulus().mul(self.mult, other.mult),
        }
    }

    pub fn inverse(&self) -> MatGSp {
        let m = self.modulus();
        MatGSp {
            matrix: self.matrix.inverse().expect("GSp elements are invertible"),
            mult: m.inv(self.mult).expect("multiplier is a unit"),
        }
    }

    /// Conjugation `beta * self * beta^-1`; the multiplier is unchanged.
    pub fn conjugate_by(&self, beta: &MatGSp) -> MatGSp {
        MatGSp {
            matrix: beta.matrix.mul(&self.matrix).mul(&beta.inverse().matrix),
            mult: self.mult,
        }
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Construct an element of `GSp_dim(F_l)` from signed entries.
pub fn gsp_new(dim: usize, entries: &[i64], modulus: PrimeModulus) -> Result<MatGSp> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::BadShape {
            expected: dim * dim,
            got: entries.len(),
        });
    }
    MatGSp::new(Matrix::from_ints(dim, entries, modulus)?)
}

/// The similitude factor `mult(gamma)`.
pub fn multiplier(gamma: &MatGSp) -> u16 {
    gamma.mult
}

/// Monic characteristic polynomial, coefficients in ascending degree.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CharPoly {
    modulus: PrimeModulus,
    coeffs: Vec<u16>,
}

impl CharPoly {
    /// From ascending coefficients; the leading one must be 1.
    pub fn new(coeffs: Vec<u16>, modulus: PrimeModulus) -> Result<Self> {
        match coeffs.last() {
            Some(1) if coeffs.iter().all(|&c| u32::from(c) < modulus.get()) => {
                Ok(CharPoly { modulus, coeffs })
            }
            _ => Err(Error::InvalidInput("characteristic polynomial must be monic".into())),
        }
    }

    /// From signed ascending coefficients, reducing mod `l`.
    pub fn from_ints(coeffs: &[i64], modulus: PrimeModulus) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| modulus.reduce(c)).collect(), modulus)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn eval(&self, x: u16) -> u16 {
        let m = self.modulus;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| m.add(m.mul(acc, x), c))
    }

    /// `(-1)^n P(-t)`, i.e. `P(-t)` renormalised to be monic.
    pub fn reflect(&self) -> CharPoly {
        let n = self.degree();
        let m = self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if (n - i) % 2 == 1 { m.neg(c) } else { c })
            .collect();
        CharPoly { modulus: m, coeffs }
    }
}

/// Characteristic polynomial of `gamma`.
///
/// Uses Faddeev-LeVerrier when `l > 2g` (it divides by `1..=2g`), and a
/// cofactor expansion with memoised minors otherwise.
pub fn char_poly(gamma: &MatGSp) -> CharPoly {
    matrix_char_poly(gamma.matrix())
}

pub fn matrix_char_poly(a: &Matrix) -> CharPoly {
    if a.modulus().get() as usize > a.dim() {
        faddeev_leverrier(a)
    } else {
        cofactor_char_poly(a)
    }
}

fn faddeev_leverrier(a: &Matrix) -> CharPoly {
    let m = a.modulus();
    let n = a.dim();
    let mut coeffs = vec![0u16; n + 1];
    coeffs[n] = 1;
    // M_0 = 0, M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
    let mut mk = Matrix::scalar(n, 0, m);
    for k in 1..=n {
        let mut next = a.mul(&mk);
        let c = coeffs[n - k + 1];
        for i in 0..n {
            next.entries[i * n + i] = m.add(next.entries[i * n + i], c);
        }
        mk = next;
        let tr = a.mul(&mk).trace();
        let k_inv = m.inv(m.reduce(k as i64)).expect("l > dim");
        coeffs[n - k] = m.neg(m.mul(tr, k_inv));
    }
    CharPoly { modulus: m, coeffs }
}

type Poly = Vec<u16>;

fn poly_mul(a: &[u16], b: &[u16], m: PrimeModulus) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = m.add(out[i + j], m.mul(x, y));
        }
    }
    out
}

fn poly_add_assign(acc: &mut Poly, b: &[u16], negate: bool, m: PrimeModulus) {
    if acc.len() < b.len() {
        acc.resize(b.len(), 0);
    }
    for (i, &y) in b.iter().enumerate() {
        acc[i] = if negate {
            m.sub(acc[i], y)
        } else {
            m.add(acc[i], y)
        };
    }
}

/// `det(tI - A)` by Laplace expansion along rows, memoised on the set of
/// columns still available.
fn cofactor_char_poly(a: &Matrix) -> CharPoly {
    let m = a.modulus();
    let n = a.dim();
    // entry (r, c) of tI - A as a polynomial in t
    let entry = |r: usize, c: usize| -> Poly {
        let neg = m.neg(a.get(r, c));
        if r == c {
            vec![neg, 1]
        } else {
            vec![neg]
        }
    };
    let mut memo: Vec<Option<Poly>> = vec![None; 1 << n];
    fn minor(
        row: usize,
        cols: usize,
        n: usize,
        m: PrimeModulus,
        entry: &dyn Fn(usize, usize) -> Poly,
        memo: &mut Vec<Option<Poly>>,
    ) -> Poly {
        if row == n {
            return vec![1];
        }
        if let Some(p) = &memo[cols] {
            return p.clone();
        }
        let mut acc: Poly = vec![0];
        let mut sign_negative = false;
        for c in 0..n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let e = entry(row, c);
            if e.iter().any(|&x| x != 0) {
                let sub = minor(row + 1, cols & !(1 << c), n, m, entry, memo);
                poly_add_assign(&mut acc, &poly_mul(&e, &sub, m), sign_negative, m);
            }
            sign_negative = !sign_negative;
        }
        memo[cols] = Some(acc.clone());
        acc
    }
    let mut coeffs = minor(0, (1 << n) - 1, n, m, &entry, &mut memo);
    coeffs.resize(n + 1, 0);
    CharPoly { modulus: m, coeffs }
}

/// `dim ker(gamma - I)` over `F_l`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimOneSignature(pub u8);

impl DimOneSignature {
    pub fn value(self) -> u8 {
        self.0
    }
}

pub fn dim_one(gamma: &MatGSp) -> DimOneSignature {
    matrix_dim_one(gamma.matrix())
}

pub fn matrix_dim_one(a: &Matrix) -> DimOneSignature {
    DimOneSignature((a.dim() - a.minus_scalar(1).rank()) as u8)
}

/// Traces criterion for `l >= 5`: true iff `t1` differs from both `t2` and `-t2`.
///
/// At `l = 2, 3` the answer is still computed but carries no meaning; callers
/// route those primes through [`smallprimes_criterion`].
pub fn trace_criterion(t1: i64, t2: i64, modulus: PrimeModulus) -> bool {
    let a = modulus.reduce(t1);
    let b = modulus.reduce(t2);
    a != b && a != modulus.neg(b)
}

/// True iff `p1` is neither `p2(t)` nor `p2(-t)` (renormalised to be monic).
pub fn charpoly_criterion(p1: &CharPoly, p2: &CharPoly) -> Result<bool> {
    if p1.degree() != p2.degree() {
        return Err(Error::DegreeMismatch(p1.degree(), p2.degree()));
    }
    if p1.modulus() != p2.modulus() {
        return Err(Error::ModulusMismatch(p1.modulus().get(), p2.modulus().get()));
    }
    Ok(*p1 != *p2 && *p1 != p2.reflect())
}

/// Pairs of `dim_1` signatures that force a subgroup of `Delta_2(F_l)` with
/// surjective projections to be everything, for `l in {2, 3}`.
pub fn distinguished_pairs(ell: u32) -> Result<&'static [(u8, u8)]> {
    match ell {
        2 => Ok(&[(0, 1), (1, 0), (1, 2), (2, 1)]),
        3 => Ok(&[(1, 2), (2, 1)]),
        other => Err(Error::BadEll(other)),
    }
}

pub fn smallprimes_criterion(d1: DimOneSignature, d2: DimOneSignature, ell: u32) -> Result<bool> {
    Ok(distinguished_pairs(ell)?.contains(&(d1.0, d2.0)))
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_admissible_radial_exponent(k: u64, modulus: PrimeModulus) -> bool {
    let order = u64::from(modulus.unit_order());
    k < order && gcd_u64(2 * k + 1, order) == 1
}

/// Every `k` in `[0, l-1)` with `gcd(2k+1, l-1) = 1`.
pub fn admissible_radial_exponents(modulus: PrimeModulus) -> Vec<u64> {
    (0..u64::from(modulus.unit_order()))
        .filter(|&k| is_admissible_radial_exponent(k, modulus))
        .collect()
}

/// `2 * phi(l - 1)`, the closed-form count of radial automorphisms.
pub fn radial_count_formula(modulus: PrimeModulus) -> u64 {
    2 * euler_phi(u64::from(modulus.unit_order()))
}

/// The radial automorphism `gamma -> mult(gamma)^k * gamma`.
pub fn radial_automorphism(gamma: &MatGSp, k: u64) -> Result<MatGSp> {
    let m = gamma.modulus();
    if !is_admissible_radial_exponent(k, m) {
        return Err(Error::BadExponent { k, ell: m.get() });
    }
    let lambda = m.pow(gamma.mult, k);
    Ok(MatGSp {
        matrix: gamma.matrix.scale(lambda),
        mult: m.pow(gamma.mult, 2 * k + 1),
    })
}

/// `|GSp_2g(F_l)| = (l-1) l^(g^2) prod_{i=1..g} (l^(2i) - 1)`.
pub fn gsp_order_formula(g: u32, ell: u64) -> u128 {
    let l = u128::from(ell);
    let mut order = (l - 1) * l.pow(g * g);
    for i in 1..=g {
        order *= l.pow(2 * i) - 1;
    }
    order
}

/// Every element of `GSp_2g(F_l)` in lexicographic order of row-major
/// entries, by exhaustive scan of all `l^(4g^2)` matrices.
pub fn enumerate_gsp(g: usize, modulus: PrimeModulus, candidate_budget: u128) -> Result<Vec<MatGSp>> {
    let dim = 2 * g;
    let cells = dim * dim;
    let l = u128::from(modulus.get());
    let candidates = l.checked_pow(cells as u32).unwrap_or(u128::MAX);
    if candidates > candidate_budget {
        return Err(Error::BudgetExceeded {
            estimate: candidates,
            budget: candidate_budget,
        });
    }
    let lmax = modulus.get() as u16;
    let mut digits = vec![0u16; cells];
    let mut out = Vec::new();
    let j = Matrix::symplectic_form(g, modulus);
    loop {
        let mat = Matrix {
            dim,
            modulus,
            entries: digits.clone(),
        };
        if g == 1 {
            let d = modulus.sub(
                modulus.mul(digits[0], digits[3]),
                modulus.mul(digits[1], digits[2]),
            );
            if d != 0 {
                out.push(MatGSp { matrix: mat, mult: d });
            }
        } else {
            let form = mat.transpose().mul(&j).mul(&mat);
            let mult = form.get(0, g);
            if mult != 0 && form == j.scale(mult) {
                out.push(MatGSp { matrix: mat, mult });
            }
        }
        // increment as a base-l counter, last entry fastest
        let mut pos = cells;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < lmax {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// A random element of `GSp_2g(F_l)`.
///
/// For `g = 1` this is uniform (rejection sampling on `GL_2`). For `g >= 2`
/// it is a random word in symplectic transvections times a random
/// `diag(lambda I_g, I_g)`, which covers the group but is not uniform.
pub fn sample_gsp<R: Rng + ?Sized>(g: usize, modulus: PrimeModulus, rng: &mut R) -> MatGSp {
    let dim = 2 * g;
    let l = modulus.get() as u16;
    if g == 1 {
        loop {
            let e: Vec<u16> = (0..4).map(|_| rng.gen_range(0..l)).collect();
            if let Ok(m) = MatGSp::new(Matrix { dim, modulus, entries: e }) {
                return m;
            }
        }
    }
    let j = Matrix::symplectic_form(g, modulus);
    let mut acc = Matrix::identity(dim, modulus);
    for _ in 0..(6 * dim) {
        let v: Vec<u16> = (0..dim).map(|_| rng.gen_range(0..l)).collect();
        let a = rng.gen_range(1..l);
        // T = I + a v v^t J
        let vt_j: Vec<u16> = (0..dim)
            .map(|c| (0..dim).fold(0, |s, k| modulus.add(s, modulus.mul(v[k], j.get(k, c)))))
            .collect();
        let mut t = Matrix::identity(dim, modulus);
        for r in 0..dim {
            for c in 0..dim {
                let add = modulus.mul(a, modulus.mul(v[r], vt_j[c]));
                t.entries[r * dim + c] = modulus.add(t.entries[r * dim + c], add);
            }
        }
        acc = acc.mul(&t);
    }
    let lambda = rng.gen_range(1..l);
    let mut d = Matrix::identity(dim, modulus);
    for i in 0..g {
        d.entries[i * dim + i] = lambda;
    }
    MatGSp::new(acc.mul(&d)).expect("product of similitudes is a similitude")
}
