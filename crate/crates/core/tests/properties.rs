use contraction::endo::BlockMatrix;
use contraction::format::{parse_poly, InstanceFile, ResultFile, SeriesJson};
use contraction::group::{contraction_auto, nilpotency_class, sd_inv, sd_mul, SDElement};
use contraction::instances::{generate, random_series, rng, Family};
use contraction::fp::MatFp;
use contraction::rep::{phi_apply, phi_minus_id, scalar_poly, validate, Rep};
use contraction::solver::{solve, SolveOptions};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Toeplitz), Just(Family::SingleBlock), Just(Family::Random)]
}

fn setup() -> impl Strategy<Value = (Rep, u64)> {
    (family(), prop_oneof![Just(2u32), Just(3), Just(5)], 1usize..=3, any::<u64>(), any::<u64>())
        .prop_map(|(fam, p, d, seed, s2)| (generate(fam, p, d, seed), s2))
}

fn element(rep: &Rep, r: &mut contraction::instances::Rng64) -> SDElement {
    let (p, d) = (rep.modulus(), rep.dim());
    SDElement::new(rep, random_series(r, p, d, -3, 3), random_series(r, p, 1, -2, 3)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms((rep, seed) in setup()) {
        let mut r = rng(seed);
        let (x, y, z) = (element(&rep, &mut r), element(&rep, &mut r), element(&rep, &mut r));
        let left = sd_mul(&rep, &sd_mul(&rep, &x, &y).unwrap(), &z).unwrap();
        let right = sd_mul(&rep, &x, &sd_mul(&rep, &y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(sd_mul(&rep, &x, &sd_inv(&rep, &x).unwrap()).unwrap().is_identity());
        prop_assert!(sd_mul(&rep, &sd_inv(&rep, &x).unwrap(), &x).unwrap().is_identity());
        // the shift is an automorphism
        let a = contraction_auto(&sd_mul(&rep, &x, &y).unwrap()).unwrap();
        let b = sd_mul(&rep, &contraction_auto(&x).unwrap(), &contraction_auto(&y).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phi_is_a_homomorphism((rep, seed) in setup()) {
        let mut r = rng(seed);
        let p = rep.modulus();
        let f = random_series(&mut r, p, 1, -2, 3);
        let g = random_series(&mut r, p, 1, -2, 3);
        let z = random_series(&mut r, p, rep.dim(), -3, 3);
        let lhs = phi_apply(&rep, &f.add(&g).unwrap(), &z).unwrap();
        let rhs = phi_apply(&rep, &f, &phi_apply(&rep, &g, &z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn instance_json_round_trip((rep, _s) in setup()) {
        let text = InstanceFile::from_generator(rep.generator(), None).to_json();
        let back = InstanceFile::parse(&text, "mem").unwrap().rep().unwrap();
        prop_assert_eq!(back, rep);
    }

    #[test]
    fn series_json_round_trip(p in prop_oneof![Just(2u32), Just(3), Just(7)], d in 1usize..4, seed in any::<u64>(), cut in -4i64..8) {
        let mut r = rng(seed);
        let v = random_series(&mut r, p, d, -4, 5);
        for w in [v.clone(), v.truncate(cut)] {
            let json = serde_json::to_string(&SeriesJson::from(&w)).unwrap();
            let back: SeriesJson = serde_json::from_str(&json).unwrap();
            let back = back.to_series().unwrap();
            prop_assert_eq!(back.prec(), w.prec());
            prop_assert_eq!(back, w);
        }
    }

    #[test]
    fn solve_output_round_trips((rep, _s) in setup()) {
        let res = solve(&rep, &SolveOptions::default()).unwrap();
        let text = ResultFile::from_result(&res, None).to_json();
        let parsed = ResultFile::parse(&text, "mem").unwrap();
        prop_assert_eq!(parsed.to_json(), text);
        prop_assert_eq!(parsed.xi.to_series().unwrap(), res.xi);
    }

    #[test]
    fn poly_parser_matches_terms(p in prop_oneof![Just(2u32), Just(3), Just(5)], terms in prop::collection::vec((-5i64..6, 0i64..5), 1..5)) {
        let text: Vec<String> = terms.iter().map(|(r, c)| format!("{c}*t^({r})")).collect();
        let parsed = parse_poly(p, &text.join(" + ")).unwrap();
        prop_assert_eq!(parsed, scalar_poly(p, &terms).unwrap());
    }
}

#[test]
fn shift_by_zero_is_identity_on_phi() {
    let rep = generate(Family::Toeplitz, 3, 3, 1);
    let f = scalar_poly(3, &[(0, 1), (2, 2)]).unwrap();
    let a = phi_minus_id(&rep, &f).unwrap();
    assert_eq!(a.shift_conjugate(0).unwrap(), a);
}

/// Every valid `d = 1` generator with blocks in `[-1, 1]^2`, over `F_2`
/// and `F_3`, gives a compact open subgroup of class at most 2. In this
/// window only the zero generator passes validation.
#[test]
fn one_dimensional_sweep() {
    let cells: Vec<(i64, i64)> = (-1..=1).flat_map(|i| (-1..=1).map(move |j| (i, j))).collect();
    for p in [2u32, 3] {
        let mut valid = 0;
        for code in 0..(p as usize).pow(cells.len() as u32) {
            let mut rest = code;
            let mut blocks = Vec::new();
            for &ij in &cells {
                let c = (rest % p as usize) as i64;
                rest /= p as usize;
                if c != 0 {
                    blocks.push((ij, MatFp::from_rows(p, &[vec![c]]).unwrap()));
                }
            }
            let a = BlockMatrix::from_blocks(p, 1, blocks).unwrap();
            if !validate(&Rep::new(a.clone())).valid {
                continue;
            }
            valid += 1;
            let rep = Rep::checked(a).unwrap();
            let report = nilpotency_class(&rep, 12, 4, 32).unwrap();
            assert!(report.class.is_some_and(|k| k <= 2), "p={p} code={code}: {report}");
            assert!(!solve(&rep, &SolveOptions::default()).unwrap().xi.is_zero());
        }
        assert!(valid >= 1);
    }
}

