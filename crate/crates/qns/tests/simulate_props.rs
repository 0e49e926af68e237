mod common;

use common::{classical_ns_table, leg, legs2, local_sqns, qc_inner, qc_sqns, quantum_inner, quantum_sqns, quantum_transfer, simulate_oracle, state};
use proptest::prelude::*;
use qns::channel::{classical_embed, Channel, KRAUS_CUTOFF};
use qns::correlation::{build_local, build_local_qns, is_bicorrelation, is_qns};
use qns::random::{self, SeededRng};
use qns::simulate::{qc_transfer_witness, simulate, simulate_adjoint_check};
use qns::stochastic::{channel_from, dot};
use qns::tensor::max_abs_diff;
use qns::{CMatrix, Correlation, LegSystem, SqnsCorrelation};

const TOL: f64 = 1e-9;

fn sized(names: [&str; 4], sizes: [usize; 4]) -> LegSystem {
    LegSystem::of(&[(names[0], sizes[0]), (names[1], sizes[1]), (names[2], sizes[2]), (names[3], sizes[3])]).unwrap()
}

fn kraus(c: &Channel) -> Vec<CMatrix> {
    c.kraus_of(KRAUS_CUTOFF).unwrap()
}

fn kron_all(a: &[CMatrix], b: &[CMatrix]) -> Vec<CMatrix> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.kronecker(y))).collect()
}

fn random_qns(r: &mut SeededRng, local: bool) -> Correlation {
    if local {
        random::local_qns(r, [2; 4], 2, 2).unwrap()
    } else {
        Correlation::new(classical_embed(&classical_ns_table(r, 2)).unwrap()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Any CP map with SQNS legs, any inner CP map: the contraction matches
    /// the explicit feedback sum.
    #[test]
    fn simulate_matches_feedback_sum(outer in prop::array::uniform4(1usize..=2), middle in prop::array::uniform4(1usize..=2), seed in any::<u64>()) {
        let mut r = random::rng(seed);
        // outer sizes for (x2, y2, a2, b2); middle for (x1, y1, a1, b1)
        let gi = sized(["x2", "y2", "a1", "b1"], [outer[0], outer[1], middle[2], middle[3]]);
        let go = sized(["x1", "y1", "a2", "b2"], [middle[0], middle[1], outer[2], outer[3]]);
        let rank = gi.dim().div_ceil(go.dim()).max(2);
        let g = SqnsCorrelation::new(random::channel(&mut r, &gi, &go, rank).unwrap()).unwrap();
        let ei = LegSystem::of(&[("x", middle[0]), ("y", middle[1])]).unwrap();
        let eo = LegSystem::of(&[("a", middle[2]), ("b", middle[3])]).unwrap();
        let rank = ei.dim().div_ceil(eo.dim()).max(1);
        let e = Correlation::new(random::channel(&mut r, &ei, &eo, rank).unwrap()).unwrap();
        let got = simulate(&g, &e).unwrap();
        prop_assert!(max_abs_diff(got.channel().choi_data(), &simulate_oracle(&g, &e)) <= 1e-12);
    }

    /// Product simulator on a product inner strategy: each party's output is
    /// the composite `Φ_A ∘ Ψ ∘ Φ_X`, written here with Kraus products.
    #[test]
    fn product_simulator_composes_each_party(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let ch = |r: &mut SeededRng, a: &str, b: &str| random::channel(r, &leg(a, 2), &leg(b, 2), 2).unwrap();
        let (px, py, pa, pb) = (ch(&mut r, "x2", "x1"), ch(&mut r, "y2", "y1"), ch(&mut r, "a1", "a2"), ch(&mut r, "b1", "b2"));
        let (s, t) = (ch(&mut r, "x", "a"), ch(&mut r, "y", "b"));
        let g = build_local(&[(1.0, [&px, &py, &pa, &pb])]).unwrap();
        let e = build_local_qns(&[(1.0, &s, &t)]).unwrap();
        let got = simulate(&g, &e).unwrap();
        let first = kron_all(&kraus(&px), &kraus(&py));
        let middle = kron_all(&kraus(&s), &kraus(&t));
        let last = kron_all(&kraus(&pa), &kraus(&pb));
        let mut composite = Vec::new();
        for l in &last {
            for m in &middle {
                for f in &first {
                    composite.push(l * m * f);
                }
            }
        }
        let want = Channel::from_kraus(&composite, legs2("x2", "y2", 2), legs2("a2", "b2", 2)).unwrap();
        prop_assert!(max_abs_diff(got.channel().choi_data(), want.choi_data()) <= 1e-10);
    }

    #[test]
    fn sqns_simulators_preserve_no_signalling(kind in 0usize..3, local_inner in any::<bool>(), d in 1usize..=2, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let g = match kind {
            0 => local_sqns(&mut r, 2, 2),
            1 => quantum_sqns(&mut r, 2, d, 2).g,
            _ => qc_sqns(&mut r, 2, d).g,
        };
        let e = random_qns(&mut r, local_inner);
        prop_assert!(is_qns(&e, TOL).pass());
        let out = simulate(&g, &e).unwrap();
        prop_assert!(is_qns(&out, 1e-8).pass());
        prop_assert!(out.channel().tp_violation() <= 1e-10);
    }

    #[test]
    fn quantum_simulation_has_tensor_witness(d_sim in 1usize..=2, d_in in 1usize..=2, terms in 1usize..=2, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let sim = quantum_sqns(&mut r, 2, d_sim, terms);
        let inner = quantum_inner(&mut r, 2, d_in);
        let out = simulate(&sim.g, &inner.e).unwrap();
        prop_assert!(max_abs_diff(out.channel().choi_data(), quantum_transfer(&sim, &inner).choi_data()) <= TOL);
    }

    #[test]
    fn qc_simulation_has_commuting_witness(d_sim in 1usize..=2, d_in in 1usize..=2, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let sim = qc_sqns(&mut r, 2, d_sim);
        let inner = qc_inner(&mut r, 2, d_in);
        let out = simulate(&sim.g, &inner.e).unwrap();
        let [px, py, qa, qb] = &sim.parts;
        let (et, ft) = qc_transfer_witness(px, py, qa, qb, &inner.left, &inner.right, TOL).unwrap();
        prop_assert!(et.verify_stochastic(1e-8).pass() && ft.verify_stochastic(1e-8).pass());
        let k = inner.eta.len();
        let psi = nalgebra::DVector::from_fn(sim.xi.len() * k, |i, _| sim.xi[i / k] * inner.eta[i % k]);
        let witness = channel_from(&dot(&et, &ft, TOL).unwrap(), &state(&psi)).unwrap();
        prop_assert!(max_abs_diff(out.channel().choi_data(), witness.choi_data()) <= TOL);
    }

    #[test]
    fn unital_simulation_commutes_with_adjoint(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let un = |r: &mut SeededRng, a: &str, b: &str| random::unital_channel(r, &leg(a, 2), &leg(b, 2), 2).unwrap();
        let (px, py, pa, pb) = (un(&mut r, "x2", "x1"), un(&mut r, "y2", "y1"), un(&mut r, "a1", "a2"), un(&mut r, "b1", "b2"));
        let g = build_local(&[(1.0, [&px, &py, &pa, &pb])]).unwrap();
        let e = build_local_qns(&[(1.0, &un(&mut r, "x", "a"), &un(&mut r, "y", "b"))]).unwrap();
        prop_assert!(is_bicorrelation(&e, TOL).pass());
        let rep = simulate_adjoint_check(&g, &e, TOL).unwrap();
        prop_assert!(rep.pass(), "{:?}", rep);
    }
}
