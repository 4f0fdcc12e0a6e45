#![allow(dead_code)]

use galprod_core::CurveModel;
use std::path::PathBuf;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_curve(name: &str) -> CurveModel {
    let path = fixtures_dir().join("curves").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

pub const FIXTURE_CURVES: [&str; 10] = [
    "208.c2", "988.c1", "11.a2", "11.a3", "37.a1", "43.a1", "389.a1", "5077.a1", "cond32", "cond14",
];

pub fn all_fixture_curves() -> Vec<CurveModel> {
    FIXTURE_CURVES.iter().map(|n| fixture_curve(n)).collect()
}

fn ainvs_mod(e: &CurveModel, p: u64) -> [i64; 5] {
    let pb = num_bigint::BigInt::from(p);
    let mut out = [0i64; 5];
    for (o, a) in out.iter_mut().zip(e.ainvs()) {
        let r = ((a % &pb) + &pb) % &pb;
        *o = i64::try_from(r).unwrap();
    }
    out
}

/// `p + 1 - #E(F_p)` by counting every `(x, y)` on the long Weierstrass model.
pub fn brute_force_ap(e: &CurveModel, p: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = ainvs_mod(e, p);
    let p = p as i64;
    let mut count = 1;
    for x in 0..p {
        let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
        for y in 0..p {
            if (y * y + a1 * x % p * y + a3 * y - rhs).rem_euclid(p) == 0 {
                count += 1;
            }
        }
    }
    p + 1 - count
}

/// Points of the long model over `F_p`, with a chord-tangent group law.
pub struct PointGroup {
    p: i64,
    a: [i64; 5],
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Pt {
    Inf,
    Aff(i64, i64),
}

impl PointGroup {
    pub fn new(e: &CurveModel, p: u64) -> Self {
        PointGroup { p: p as i64, a: ainvs_mod(e, p) }
    }

    fn inv_mod(&self, x: i64) -> i64 {
        let (mut r, mut acc, mut b) = (self.p - 2, 1i64, x.rem_euclid(self.p));
        while r > 0 {
            if r & 1 == 1 {
                acc = acc * b % self.p;
            }
            b = b * b % self.p;
            r >>= 1;
        }
        acc
    }

    pub fn points(&self) -> Vec<Pt> {
        let [a1, a2, a3, a4, a6] = self.a;
        let p = self.p;
        let mut out = vec![Pt::Inf];
        for x in 0..p {
            for y in 0..p {
                let lhs = y * y + a1 * x % p * y + a3 * y;
                let rhs = x * x % p * x + a2 * x % p * x + a4 * x + a6;
                if (lhs - rhs).rem_euclid(p) == 0 {
                    out.push(Pt::Aff(x, y));
                }
            }
        }
        out
    }

    pub fn neg(&self, q: Pt) -> Pt {
        let [a1, _, a3, _, _] = self.a;
        match q {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => Pt::Aff(x, (-y - a1 * x - a3).rem_euclid(self.p)),
        }
    }

    pub fn add(&self, u: Pt, v: Pt) -> Pt {
        let [a1, a2, a3, a4, _] = self.a;
        let p = self.p;
        let (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) = (u, v) else {
            return if u == Pt::Inf { v } else { u };
        };
        if v == self.neg(u) {
            return Pt::Inf;
        }
        let lambda = if x1 == x2 {
            let num = (3 * x1 % p * x1 + 2 * a2 * x1 + a4 - a1 * y1).rem_euclid(p);
            let den = (2 * y1 + a1 * x1 + a3).rem_euclid(p);
            num * self.inv_mod(den) % p
        } else {
            (y2 - y1).rem_euclid(p) * self.inv_mod(x2 - x1) % p
        };
        let x3 = (lambda * lambda + a1 * lambda - a2 - x1 - x2).rem_euclid(p);
        let y3 = (-(lambda + a1) * x3 - (y1 - lambda * x1) - a3).rem_euclid(p);
        Pt::Aff(x3, y3)
    }

    pub fn mul(&self, k: u32, q: Pt) -> Pt {
        (0..k).fold(Pt::Inf, |acc, _| self.add(acc, q))
    }

    /// `dim_F_l E(F_p)[l]`, by scanning points.
    pub fn torsion_dim(&self, l: u32) -> u8 {
        let n = self.points().into_iter().filter(|&q| self.mul(l, q) == Pt::Inf).count();
        match (l, n) {
            (_, 1) => 0,
            (2, 2) | (3, 3) => 1,
            (2, 4) | (3, 9) => 2,
            _ => panic!("#E[{l}] = {n}"),
        }
    }
}
