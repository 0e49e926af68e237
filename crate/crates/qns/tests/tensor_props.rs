use proptest::prelude::*;
use qns::random;
use qns::linalg::hermitian_eigenvalues;
use qns::tensor::max_abs_diff;
use qns::{CMatrix, LabeledMatrix, LegSystem, C64};

fn system(prefix: &str, sizes: &[usize]) -> LegSystem {
    let names: Vec<String> = (0..sizes.len()).map(|i| format!("{prefix}{i}")).collect();
    let pairs: Vec<(&str, usize)> = names.iter().map(String::as_str).zip(sizes.iter().copied()).collect();
    LegSystem::of(&pairs).unwrap()
}

fn random_labeled(seed: u64, legs: LegSystem) -> LabeledMatrix {
    let n = legs.dim();
    LabeledMatrix::new(legs, random::gaussian_matrix(&mut random::rng(seed), n, n)).unwrap()
}

fn sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flat_and_multi_index_are_inverse(sz in sizes()) {
        let legs = system("l", &sz);
        for i in 0..legs.dim() {
            let m = legs.multi_index(i);
            prop_assert!(m.iter().zip(&sz).all(|(&k, &s)| k < s));
            prop_assert_eq!(legs.flat_index(&m), i);
        }
    }

    #[test]
    fn tensor_product_matches_index_loop(sa in sizes(), sb in sizes(), seed in any::<u64>()) {
        let a = random_labeled(seed, system("a", &sa));
        let b = random_labeled(seed ^ 1, system("b", &sb));
        let ab = a.tensor_product(&b).unwrap();
        let (na, nb) = (a.dim(), b.dim());
        let mut oracle = CMatrix::zeros(na * nb, na * nb);
        for i in 0..na {
            for j in 0..na {
                for k in 0..nb {
                    for l in 0..nb {
                        oracle[(i * nb + k, j * nb + l)] = a.data()[(i, j)] * b.data()[(k, l)];
                    }
                }
            }
        }
        prop_assert!(max_abs_diff(ab.data(), &oracle) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product(sa in sizes(), sb in sizes(), seed in any::<u64>()) {
        let a = random_labeled(seed, system("a", &sa));
        let b = random_labeled(seed ^ 2, system("b", &sb));
        let names: Vec<String> = (0..sb.len()).map(|i| format!("b{i}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let reduced = a.tensor_product(&b).unwrap().partial_trace(&names).unwrap();
        let expected = a.data() * b.trace();
        prop_assert!(max_abs_diff(reduced.data(), &expected) <= 1e-12 * (1.0 + expected.norm()));
        prop_assert_eq!(reduced.legs(), a.legs());
    }

    #[test]
    fn full_partial_trace_preserves_trace(sz in sizes(), seed in any::<u64>()) {
        let legs = system("l", &sz);
        let rho = random::density(&mut random::rng(seed), legs.dim());
        let m = LabeledMatrix::new(legs.clone(), rho).unwrap();
        let first = legs.names()[0].to_string();
        let t = m.partial_trace(&[first.as_str()]).unwrap();
        prop_assert!((t.trace() - m.trace()).norm() <= 1e-12);
    }

    #[test]
    fn slice_is_linear_in_sigma(sa in sizes(), sb in sizes(), seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let mut r = random::rng(seed);
        let legs = system("a", &sa).concat(&system("b", &sb)).unwrap();
        let n = legs.dim();
        let m = LabeledMatrix::new(legs, random::gaussian_matrix(&mut r, n, n)).unwrap();
        let db: usize = sb.iter().product();
        let (s1, s2) = (random::gaussian_matrix(&mut r, db, db), random::gaussian_matrix(&mut r, db, db));
        let names: Vec<String> = (0..sb.len()).map(|i| format!("b{i}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let (ca, cb) = (C64::new(alpha, 0.0), C64::new(beta, 0.0));
        let combined = m.slice(&names, &(&s1 * ca + &s2 * cb)).unwrap();
        let separate = m.slice(&names, &s1).unwrap().data() * ca + m.slice(&names, &s2).unwrap().data() * cb;
        prop_assert!(max_abs_diff(combined.data(), &separate) <= 1e-12 * (1.0 + separate.norm()));
    }

    #[test]
    fn slice_against_double_loop(sx in 1usize..=3, sa in 1usize..=3, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let legs = LegSystem::of(&[("x", sx), ("a", sa)]).unwrap();
        let n = legs.dim();
        let p = LabeledMatrix::new(legs, random::gaussian_matrix(&mut r, n, n)).unwrap();
        let sigma = random::gaussian_matrix(&mut r, sa, sa);
        let got = p.slice(&["a"], &sigma).unwrap();
        let mut oracle = CMatrix::zeros(sx, sx);
        for x in 0..sx {
            for xp in 0..sx {
                for a in 0..sa {
                    for ap in 0..sa {
                        oracle[(x, xp)] += sigma[(ap, a)] * p.data()[(x * sa + a, xp * sa + ap)];
                    }
                }
            }
        }
        prop_assert!(max_abs_diff(got.data(), &oracle) <= 1e-12);
    }

    #[test]
    fn permute_legs_preserves_spectrum_and_pairing(sz in prop::collection::vec(1usize..=3, 3), seed in any::<u64>()) {
        let legs = system("l", &sz);
        let mut r = random::rng(seed);
        let n = legs.dim();
        let h = random::density(&mut r, n);
        let k = random::gaussian_matrix(&mut r, n, n);
        let (a, b) = (LabeledMatrix::new(legs.clone(), h).unwrap(), LabeledMatrix::new(legs, k).unwrap());
        let order = ["l2", "l0", "l1"];
        let (pa, pb) = (a.permute_legs(&order).unwrap(), b.permute_legs(&order).unwrap());
        let (ea, epa) = (hermitian_eigenvalues(a.data()), hermitian_eigenvalues(pa.data()));
        prop_assert!(ea.iter().zip(&epa).all(|(x, y)| (x - y).abs() <= 1e-10));
        prop_assert!((a.hs_inner(&b).unwrap() - pa.hs_inner(&pb).unwrap()).norm() <= 1e-10);
    }

    #[test]
    fn three_cycle_twice_is_its_inverse(sz in prop::collection::vec(1usize..=3, 3), seed in any::<u64>()) {
        let m = random_labeled(seed, system("l", &sz));
        // moving the last leg to the front twice equals moving the first leg to the back once
        let twice = m.permute_legs(&["l2", "l0", "l1"]).unwrap().permute_legs(&["l1", "l2", "l0"]).unwrap();
        let inverse = m.permute_legs(&["l1", "l2", "l0"]).unwrap();
        prop_assert_eq!(twice.legs(), inverse.legs());
        prop_assert!(max_abs_diff(twice.data(), inverse.data()) == 0.0);
    }
}

#[test]
fn matrix_units_pair_to_deltas() {
    let legs = LegSystem::of(&[("x", 2), ("y", 2)]).unwrap();
    for r in 0..4 {
        for c in 0..4 {
            for s in 0..4 {
                for t in 0..4 {
                    let v = LabeledMatrix::unit(legs.clone(), r, c).hs_inner(&LabeledMatrix::unit(legs.clone(), s, t)).unwrap();
                    let want = if (r, c) == (s, t) { 1.0 } else { 0.0 };
                    assert_eq!(v, C64::new(want, 0.0));
                }
            }
        }
    }
}

#[test]
fn pairing_of_real_symmetric_with_itself_is_nonnegative() {
    let mut r = random::rng(3);
    for _ in 0..20 {
        let g = random::gaussian_matrix(&mut r, 4, 4).map(|z| C64::new(z.re, 0.0));
        let s = &g + g.transpose();
        let m = LabeledMatrix::new(LegSystem::of(&[("x", 4)]).unwrap(), s).unwrap();
        let v = m.hs_inner(&m).unwrap();
        assert!(v.im.abs() < 1e-12 && v.re >= 0.0);
    }
}
