mod common;

use galprod_core::arith::radical;
use galprod_core::bounds::{mw20_bound, product_ec_bound};
use galprod_core::curves::{trace_of_frobenius, torsion_dims, TraceStatus};
use galprod_core::groups::*;
use galprod_core::matgroup::*;
use galprod_core::sieve::{sieve_pair, EllVerdict};
use galprod_core::{CurveModel, PrimeModulus};
use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::OnceLock;

fn modulus_strategy() -> impl Strategy<Value = PrimeModulus> {
    prop::sample::select(vec![2u32, 3, 5, 7, 11, 13, 101, 65521]).prop_map(|l| PrimeModulus::new(l).unwrap())
}

fn gsp_strategy() -> impl Strategy<Value = (MatGSp, MatGSp, MatGSp)> {
    (modulus_strategy(), 1usize..=3, any::<u64>()).prop_map(|(m, g, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (sample_gsp(g, m, &mut rng), sample_gsp(g, m, &mut rng), sample_gsp(g, m, &mut rng))
    })
}

fn same_mult_pair() -> impl Strategy<Value = (MatGSp, MatGSp)> {
    (prop::sample::select(vec![5u32, 7, 11, 13]), 1usize..=2, any::<u64>()).prop_map(|(l, g, seed)| {
        let m = PrimeModulus::new(l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_gsp(g, m, &mut rng);
        loop {
            let b = sample_gsp(g, m, &mut rng);
            if multiplier(&b) == multiplier(&a) {
                return (a, b);
            }
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiplier_power_is_determinant((a, b, _) in gsp_strategy()) {
        let m = a.modulus();
        let g = a.genus() as u64;
        prop_assert_eq!(m.pow(multiplier(&a), g), a.matrix().det());
        // and the multiplier is a character
        prop_assert_eq!(multiplier(&a.mul(&b)), m.mul(multiplier(&a), multiplier(&b)));
        prop_assert_eq!(multiplier(&a.inverse()), m.inv(multiplier(&a)).unwrap());
    }

    #[test]
    fn dim_one_plus_rank((a, _, _) in gsp_strategy()) {
        let dim = a.matrix().dim();
        prop_assert_eq!(dim_one(&a).value() as usize + a.matrix().minus_scalar(1).rank(), dim);
    }

    #[test]
    fn char_poly_conjugation_invariant((a, b, _) in gsp_strategy()) {
        let c = a.conjugate_by(&b);
        prop_assert_eq!(char_poly(&a), char_poly(&c));
        prop_assert_eq!(a.trace(), c.trace());
        // Cayley-Hamilton at the level of the constant term
        let p = char_poly(&a);
        let m = a.modulus();
        let sign = if a.matrix().dim() % 2 == 0 { 1 } else { m.neg(1) };
        prop_assert_eq!(p.coeffs()[0], m.mul(sign, a.matrix().det()));
    }

    #[test]
    fn criteria_conjugation_invariant(((a, b), seed) in (same_mult_pair(), any::<u64>())) {
        let m = a.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (sample_gsp(a.genus(), m, &mut rng), sample_gsp(a.genus(), m, &mut rng));
        let (ca, cb) = (a.conjugate_by(&x), b.conjugate_by(&y));
        let t = |u: &MatGSp| i64::from(u.trace());
        prop_assert_eq!(trace_criterion(t(&a), t(&b), m), trace_criterion(t(&ca), t(&cb), m));
        let before = charpoly_criterion(&char_poly(&a), &char_poly(&b)).unwrap();
        let after = charpoly_criterion(&char_poly(&ca), &char_poly(&cb)).unwrap();
        prop_assert_eq!(before, after);
        if trace_criterion(t(&a), t(&b), m) {
            prop_assert!(before);
        }
    }

    #[test]
    fn radial_twist_reflects_char_poly(((a, _), seed) in (same_mult_pair(), any::<u64>())) {
        let m = a.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = sample_gsp(a.genus(), m, &mut rng);
        let half = u64::from(m.unit_order() / 2);
        let p = char_poly(&a);
        if is_admissible_radial_exponent(half, m) {
            let s = radial_automorphism(&a.conjugate_by(&beta), half).unwrap();
            let q = char_poly(&s);
            prop_assert!(q == p || q == p.reflect());
        }
        prop_assert_eq!(p.reflect().reflect(), p);
    }

    #[test]
    fn radial_automorphisms_are_homomorphisms((a, b, _) in gsp_strategy(), k in 0u64..16) {
        let m = a.modulus();
        let k = k % u64::from(m.unit_order());
        if is_admissible_radial_exponent(k, m) {
            let lhs = radial_automorphism(&a.mul(&b), k).unwrap();
            let rhs = radial_automorphism(&a, k).unwrap().mul(&radial_automorphism(&b, k).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn radical_properties(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        let (ba, bb) = (BigUint::from(a), BigUint::from(b));
        let ra = radical(&ba).unwrap();
        prop_assert_eq!(radical(&ra).unwrap(), ra.clone());
        prop_assert!((&ba % &ra) == BigUint::from(0u8));
        if a.gcd(&b) == 1 {
            prop_assert_eq!(radical(&(&ba * &bb)).unwrap(), ra * radical(&bb).unwrap());
        }
    }
}

fn random_curve() -> impl Strategy<Value = CurveModel> {
    (-50i64..50, -50i64..50, -50i64..50, -200i64..200, -200i64..200)
        .prop_filter_map("singular", |(a1, a2, a3, a4, a6)| CurveModel::from_ints([a1, a2, a3, a4, a6], None, None).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weil_bound_and_torsion_divisibility(e in random_curve(), idx in 2usize..60) {
        let p = galprod_core::field::primes_up_to(400)[idx];
        let r = trace_of_frobenius(&e, p).unwrap();
        if r.status == TraceStatus::Good {
            let ap = r.ap.unwrap();
            prop_assert!((ap * ap) as u64 <= 4 * p);
            prop_assert_eq!(ap, common::brute_force_ap(&e, p));
            let n = (p as i64 + 1 - ap) as u64;
            let t = torsion_dims(&e, p).unwrap();
            prop_assert_eq!(t.dim2 >= 1, n.is_multiple_of(2));
            prop_assert_eq!(t.dim3 >= 1, n.is_multiple_of(3));
            prop_assert!(n.is_multiple_of(2u64.pow(u32::from(t.dim2))));
            prop_assert!(n.is_multiple_of(3u64.pow(u32::from(t.dim3))));
        }
    }

    #[test]
    fn sieve_witnesses_sound_and_monotone(e in random_curve(), f in random_curve(), pmax in 30u64..120) {
        prop_assume!(e.ainvs() != f.ainvs());
        let none = BTreeSet::new();
        let Ok(small) = sieve_pair(&e, &f, &none, &none, pmax) else { return Ok(()) };
        let large = sieve_pair(&e, &f, &none, &none, pmax + 60).unwrap();
        for (&ell, v) in &small.per_ell {
            if let EllVerdict::ProvedSurjective { witness_p } = v {
                prop_assert!(witness_p != &ell);
                if ell >= 5 {
                    let x = trace_of_frobenius(&e, *witness_p).unwrap().ap.unwrap();
                    let y = trace_of_frobenius(&f, *witness_p).unwrap().ap.unwrap();
                    prop_assert!(trace_criterion(x, y, PrimeModulus::new(ell as u32).unwrap()));
                } else {
                    let (a, b) = (torsion_dims(&e, *witness_p).unwrap(), torsion_dims(&f, *witness_p).unwrap());
                    let (d1, d2) = if ell == 2 { (a.dim2, b.dim2) } else { (a.dim3, b.dim3) };
                    prop_assert!(smallprimes_criterion(DimOneSignature(d1), DimOneSignature(d2), ell as u32).unwrap());
                }
                prop_assert_eq!(large.per_ell.get(&ell), Some(v));
            }
        }
        let cands = |pv: &galprod_core::sieve::PairVerdict| -> BTreeSet<u64> {
            pv.per_ell.iter().filter(|(_, v)| matches!(v, EllVerdict::CandidateCongruence { .. })).map(|(&l, _)| l).collect()
        };
        let (cs, cl) = (cands(&small), cands(&large));
        // verdicts only exist for scanned l; compare on the common range
        prop_assert!(cl.iter().filter(|l| small.per_ell.contains_key(l)).all(|l| cs.contains(l)));
        // residual gcd divides every scanned D_p, and so divides the old one
        if small.residual_gcd != BigUint::from(0u8) {
            prop_assert!((&small.residual_gcd % &large.residual_gcd) == BigUint::from(0u8));
        }
        let largest = galprod_core::arith::prime_divisors(&small.residual_gcd).ok().and_then(|v| v.last().cloned());
        let top = largest.map_or(5, |q| u64::try_from(q).unwrap().max(5));
        for q in galprod_core::field::primes_up_to(top) {
            prop_assert!(small.per_ell.contains_key(&q));
        }
    }

    #[test]
    fn bounds_monotone_in_radical(n in 1u64..5000, q in prop::sample::select(vec![5u64, 7, 11, 13, 101])) {
        prop_assume!(n % q != 0);
        let a = mw20_bound(&BigUint::from(n)).unwrap().to_dbig();
        let b = mw20_bound(&BigUint::from(n * q)).unwrap().to_dbig();
        prop_assert!(b > a);
        let one = BigUint::from(1u8);
        let c = product_ec_bound(&[BigUint::from(n), one.clone()]).unwrap().to_dbig();
        let d = product_ec_bound(&[BigUint::from(n * q), one]).unwrap().to_dbig();
        prop_assert!(d > c);
    }
}

fn delta3() -> &'static FiniteGroupTable {
    static D: OnceLock<FiniteGroupTable> = OnceLock::new();
    D.get_or_init(|| build_delta_group(1, 2, PrimeModulus::new(3).unwrap(), DEFAULT_ELEMENT_BUDGET).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_is_a_subgroup(gens in prop::collection::vec(0u32..1152, 0..4)) {
        let d = delta3();
        let h = closure(d, &gens);
        prop_assert!(gens.iter().all(|&x| h.contains(x)));
        for &a in h.members() {
            prop_assert!(h.contains(d.inv(a)));
            for &b in h.generators() {
                prop_assert!(h.contains(d.mul(a, b)));
            }
        }
        let again = closure(d, h.generators());
        prop_assert_eq!(again.members(), h.members());
        prop_assert_eq!(d.order() % h.order(), 0);
    }

    #[test]
    fn goursat_reconstructs(gens in prop::collection::vec(0u32..1152, 1..4)) {
        let d = delta3();
        let h = closure(d, &gens);
        match goursat_decompose(&h) {
            Ok(data) => {
                prop_assert_eq!(data.reconstruct(&h).unwrap(), h.members().to_vec());
                prop_assert_eq!(48 / data.kernel1.order(), data.quotient_order);
                prop_assert_eq!(48 / data.kernel2.order(), data.quotient_order);
            }
            Err(galprod_core::Error::NotSurjectiveProjection(i)) => {
                prop_assert!(!h.projection_is_surjective(i - 1));
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}
