use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pskz::algebra::{binom_exact, binom_mod, PolyZ, Var};
use pskz::connections::{k_swap_symmetric, ConnectionMatrices};
use pskz::dwork::{verify_dwork_first, verify_dwork_second, verify_dwork_vector};
use pskz::hypergeometric::{check_lambda, digits, family, lambda_level, lambda_range, Z_VARS};
use pskz::padic::fq::is_irreducible;
use pskz::padic::{limit_vector, ratios_at_level, DomainOracle, DomainPoint, Fq, Unramified};
use pskz::report::{CheckRecord, ModulusExponent};

fn cell() -> impl Strategy<Value = (u64, u32, i64)> {
    prop::sample::select(vec![(3u64, 3u32), (5, 2), (7, 2)]).prop_flat_map(|(p, s_max)| {
        (1..=s_max).prop_flat_map(move |s| {
            let range = lambda_range(p, s).unwrap();
            prop::sample::select(range).prop_map(move |l| (p, s, l))
        })
    })
}

fn observed_at_least_guaranteed(r: &CheckRecord) -> bool {
    match (r.guaranteed, r.observed) {
        (Some(g), Some(ModulusExponent::Finite(o))) => !r.pass || o >= g,
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stored_terms_are_nonzero_and_well_shaped(
        terms in prop::collection::vec(((0u32..4, 0u32..4), -3i64..4), 0..12),
        other in prop::collection::vec(((0u32..4, 0u32..4), -3i64..4), 0..12),
    ) {
        let mk = |t: &[((u32, u32), i64)]| {
            PolyZ::from_terms(&Z_VARS, t.iter().map(|((a, b), c)| (vec![*a, *b], *c))).unwrap()
        };
        let (f, g) = (mk(&terms), mk(&other));
        for h in [&f + &g, &f - &g, &f * &g, f.derivative(Var::Z1).unwrap()] {
            for (e, c) in h.terms() {
                prop_assert!(!c.is_zero());
                prop_assert_eq!(e.len(), 2);
            }
        }
    }

    #[test]
    fn valued_binomials_agree_with_exact(n in 0u64..300, k in 0u64..300, p in prop::sample::select(vec![3u64, 5, 7]), prec in 1u32..4) {
        let r = binom_mod(n, k, p, prec);
        prop_assert!(r.agrees_with(&binom_exact(n, k)));
        prop_assert!(r.exact_zero || !r.unit.is_multiple_of(p));
    }

    #[test]
    fn lambda_membership(p in prop::sample::select(vec![3u64, 5, 7]), s in 1u32..4, lambda in -400i64..400) {
        let expected = lambda.rem_euclid(2) == 1 && (lambda.unsigned_abs()) < p.pow(s);
        prop_assert_eq!(check_lambda(p, s, lambda).is_ok(), expected);
        if lambda.rem_euclid(2) == 1 {
            prop_assert_eq!(s >= lambda_level(p, lambda), expected);
        }
    }

    #[test]
    fn family_degrees_and_gradient((p, s, lambda) in cell()) {
        let fam = family(p, s, lambda, 343).unwrap();
        let ps = p.pow(s) as i64;
        let a = ((ps - lambda) / 2) as u32;
        prop_assert_eq!(fam.t.total_degree(), Some(a));
        let factor = BigInt::from((1 - ps) / 2);
        for (j, v) in [Var::Z1, Var::Z2].into_iter().enumerate() {
            if a >= 1 {
                prop_assert_eq!(fam.i[j].total_degree(), Some(a - 1));
            }
            prop_assert_eq!(fam.i[j].scale(&factor), fam.t.derivative(v).unwrap());
        }
    }

    #[test]
    fn digit_vector_reassembles((p, s, lambda) in cell()) {
        let d = digits(p, s, lambda).unwrap();
        let ps = p.pow(s) as i64;
        let total: u64 = (0..s as usize).map(|i| d.digit(i) * p.pow(i as u32)).sum();
        prop_assert_eq!(total as i64, (ps - lambda) / 2);
        prop_assert!(d.distinct.len() as u64 <= p);
    }

    #[test]
    fn connection_symmetries(k in -60i64..60) {
        let lambda = 2 * k + 1;
        let m = ConnectionMatrices::new(lambda);
        prop_assert!(k_swap_symmetric(&m));
        // H_1 + H_2 = C_1 + C_2 + M, constant in z
        let diff = &PolyZ::var(&Z_VARS, Var::Z1).unwrap() - &PolyZ::var(&Z_VARS, Var::Z2).unwrap();
        let expected = [[-lambda - 2, 0], [0, -lambda - 2]];
        for (r, row) in expected.iter().enumerate() {
            for (c, want) in row.iter().enumerate() {
                let sum = m.h_numerators(0)[r][c] + m.h_numerators(1)[r][c];
                prop_assert_eq!(sum, diff.scale(&BigInt::from(*want)));
            }
        }
    }

    #[test]
    fn passing_records_meet_their_guarantee(p in prop::sample::select(vec![3u64, 5]), e in 1u32..3, idx in any::<prop::sample::Index>(), j in 0usize..2) {
        let lambdas = lambda_range(p, e).unwrap();
        let lambda = *idx.get(&lambdas);
        let s = e + 1;
        let mut recs = vec![verify_dwork_first(p, e, lambda, s, j).unwrap(), verify_dwork_second(p, e, lambda, s, j, 1 - j).unwrap()];
        recs.extend(verify_dwork_vector(p, e, lambda, s, j).unwrap());
        for r in &recs {
            prop_assert!(r.pass);
            prop_assert!(observed_at_least_guaranteed(r));
        }
    }

    #[test]
    fn residue_fields_are_well_formed((p, m) in prop::sample::select(vec![(3u64, 1u32), (3, 2), (3, 3), (5, 2), (7, 2), (3, 4)]), idx in 1u64..2000) {
        let fq = Fq::new(p, m).unwrap();
        prop_assert!(is_irreducible(fq.modulus(), p));
        let q = fq.order();
        prop_assert_eq!(fq.multiplicative_order(&fq.primitive_element()), Some(q - 1));
        let a = fq.from_index(idx % (q - 1) + 1);
        prop_assert_eq!((q - 1) % fq.multiplicative_order(&a).unwrap(), 0);
    }

    #[test]
    fn padic_integers_match_big_integers(p in prop::sample::select(vec![3u64, 5, 7]), n in 1u32..6, x in -5000i64..5000, y in -5000i64..5000) {
        let ctx = Unramified::new(p, 1, n).unwrap();
        let modulus = BigInt::from(p).pow(n);
        let canon = |v: BigInt| ((v % &modulus) + &modulus) % &modulus;
        let (a, b) = (ctx.from_int(x), ctx.from_int(y));
        prop_assert_eq!(BigInt::from((&a * &b).coeffs()[0]), canon(BigInt::from(x) * y));
        prop_assert_eq!(BigInt::from((&a - &b).coeffs()[0]), canon(BigInt::from(x) - y));
        let v = if x == 0 { n } else { pskz::algebra::valuation_i64(x, p).unwrap().min(n) };
        prop_assert_eq!(a.valuation(), v);
    }

    #[test]
    fn domain_flags_depend_on_residues(seed in any::<u64>(), idx in any::<prop::sample::Index>(), k in -4i64..4) {
        let lambda = 2 * k + 1;
        let ctx = Unramified::new(3, 2, 3).unwrap();
        let oracle = DomainOracle::new(ctx.residue_field()).unwrap();
        let elems: Vec<_> = ctx.residue_field().elements().collect();
        let r1 = idx.get(&elems).clone();
        let r2 = elems[(idx.index(elems.len()) * 7 + 3) % elems.len()].clone();
        let flags = oracle.flags(&[r1.clone(), r2.clone()], lambda).unwrap();
        prop_assert!(!flags.in_star_domain || flags.in_domain);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lifted = [ctx.random_in_disc(&r1, &mut rng), ctx.random_in_disc(&r2, &mut rng)];
        let point = DomainPoint::new(&oracle, lifted, lambda).unwrap();
        prop_assert_eq!(point.flags, flags);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn limit_vectors_are_stable(seed in any::<u64>(), k in -4i64..4, n in 1u32..3) {
        let lambda = 2 * k + 1;
        let ctx = Unramified::new(3, 2, n).unwrap();
        let oracle = DomainOracle::new(ctx.residue_field()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elems: Vec<_> = ctx.residue_field().elements().collect();
        let start = (seed % elems.len() as u64) as usize;
        let residues = (0..elems.len() * elems.len())
            .map(|t| (t + start * elems.len()) % (elems.len() * elems.len()))
            .map(|t| [elems[t / elems.len()].clone(), elems[t % elems.len()].clone()])
            .find(|r| oracle.flags(r, lambda).unwrap().in_star_domain);
        let Some(r) = residues else { return Ok(()) };
        let a = [ctx.random_in_disc(&r[0], &mut rng), ctx.random_in_disc(&r[1], &mut rng)];
        let lv = limit_vector(&oracle, lambda, &a, false).unwrap();
        let next = ratios_at_level(lv.level + 1, lambda, &a).unwrap();
        prop_assert_eq!(&next.ratio, &lv.values);
        if lambda % 3 != 0 {
            prop_assert!(lv.valuations.contains(&0));
        }
    }
}
