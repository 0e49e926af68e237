mod common;

use common::{leg, legs2, perfect_pair, support};
use proptest::prelude::*;
use qns::channel::{Channel, KRAUS_CUTOFF};
use qns::correlation::build_local;
use qns::games::{
    biarrow, graph_iso_check, is_homomorphism_witness, is_perfect_channel, kraus_space, quantum_graph_check, Hypergraph,
    ImplicationGame, QuantumGraph,
};
use qns::random::{self, SeededRng};
use qns::simulate::simulate;
use qns::tensor::max_abs_diff;
use qns::{CMatrix, Correlation, LabeledMatrix, C64};

const TOL: f64 = 1e-9;

fn game(p: CMatrix, q: CMatrix) -> ImplicationGame {
    ImplicationGame::new(
        LabeledMatrix::new(legs2("x", "y", 2), p).unwrap(),
        LabeledMatrix::new(legs2("a", "b", 2), q).unwrap(),
        1e-9,
    )
    .unwrap()
}

/// Permutation matrix sending `e_i` to `e_{perm[i]}`.
fn permutation(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    CMatrix::from_fn(n, n, |r, c| if perm[c] == r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| [(i, (i + 1) % n), ((i + 1) % n, i)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The trace-side and Kraus-side tests agree, and the gap is the part of
    /// `Tr Φ(P) = Tr P` that misses `Q`.
    #[test]
    fn perfect_tests_agree(rank in 1usize..=3, p_rank in 1usize..=3, q_rank in 1usize..=3, exact in any::<bool>(), seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let c = random::channel(&mut r, &legs2("x", "y", 2), &legs2("a", "b", 2), rank).unwrap();
        let p = random::projection(&mut r, 4, p_rank);
        let q = if exact { support(&c.apply(&p).unwrap()) } else { random::projection(&mut r, 4, q_rank) };
        let g = game(p, q);
        let rep = is_perfect_channel(&c, &g, TOL).unwrap();
        prop_assert!(rep.get("agree").unwrap().pass);
        if exact {
            prop_assert!(rep.pass());
        }
        let (gap, value) = (g.value_gap(&c).unwrap(), g.value(&c).unwrap());
        prop_assert!(gap >= -1e-12);
        prop_assert!((gap + value - p_rank as f64).abs() <= 1e-10);
    }

    /// Mixing Kraus operators by a unitary changes neither the channel nor
    /// the span.
    #[test]
    fn kraus_space_is_gauge_invariant(rank in 1usize..=4, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let c = random::channel(&mut r, &leg("x", 3), &leg("a", 2), rank.max(2)).unwrap();
        let ks = c.kraus_of(KRAUS_CUTOFF).unwrap();
        let w = random::unitary(&mut r, ks.len());
        let mixed: Vec<CMatrix> = (0..ks.len())
            .map(|j| ks.iter().enumerate().fold(CMatrix::zeros(2, 3), |acc, (i, k)| acc + k * w[(j, i)]))
            .collect();
        let back = Channel::from_kraus(&mixed, c.in_legs().clone(), c.out_legs().clone()).unwrap();
        prop_assert!(c.max_abs_diff(&back) <= 1e-10);
        let (s1, s2) = (kraus_space(&c, KRAUS_CUTOFF).unwrap(), Hypergraph::span(c.in_legs().clone(), c.out_legs().clone(), &mixed).unwrap());
        prop_assert_eq!(s1.rank(), s2.rank());
        prop_assert!(s1.containment_residual(&s2) <= 1e-8 && s2.containment_residual(&s1) <= 1e-8);
    }

    #[test]
    fn complement_and_biarrow_dimensions(p1 in 1usize..=3, q1 in 1usize..=3, p2 in 1usize..=3, q2 in 1usize..=3, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let mut hyper = |p_rank: usize, q_rank: usize, names: [&str; 2]| {
            let p = LabeledMatrix::new(leg(names[0], 4), random::projection(&mut r, 4, p_rank)).unwrap();
            let q = LabeledMatrix::new(leg(names[1], 4), random::projection(&mut r, 4, q_rank)).unwrap();
            Hypergraph::from_projections(&p, &q, 1e-9).unwrap()
        };
        let (u1, u2) = (hyper(p1, q1, ["i", "o"]), hyper(p2, q2, ["s", "t"]));
        for u in [&u1, &u2] {
            let c = u.complement();
            prop_assert_eq!(u.rank() + c.rank(), u.ambient_dim());
            // the complement meets the space only in zero
            for b in c.basis() {
                prop_assert!((u.residual(b) - 1.0).abs() <= 1e-10);
            }
        }
        let b = biarrow(&u1, &u2).unwrap();
        let want = u1.rank() * u2.rank() + (16 - u1.rank()) * (16 - u2.rank());
        prop_assert_eq!(b.rank(), want);
    }

    /// Relabelling vertices by a permutation is an isomorphism of a cycle
    /// onto its image, in both directions.
    #[test]
    fn relabelled_cycle_is_isomorphic(n in 3usize..=4, shuffle in any::<u64>()) {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = shuffle;
        for i in (1..n).rev() {
            perm.swap(i, (s % (i as u64 + 1)) as usize);
            s /= i as u64 + 1;
        }
        let u = QuantumGraph::from_edges(n, &cycle_edges(n)).unwrap();
        let image: Vec<(usize, usize)> = cycle_edges(n).iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        let v = QuantumGraph::from_edges(n, &image).unwrap();
        prop_assert!(quantum_graph_check(&u, TOL).pass() && quantum_graph_check(&v, TOL).pass());
        let pm = permutation(&perm);
        let (lx, ly) = (leg("x", n), leg("y", n));
        let half = |i, o| Channel::from_kraus(std::slice::from_ref(&pm), i, o).unwrap();
        let c = Correlation::new(half(lx, leg("a", n)).tensor(&half(ly, leg("b", n))).unwrap()).unwrap();
        let rep = graph_iso_check(&c, &u, &v, TOL).unwrap();
        prop_assert!(rep.pass(), "{:?}", rep);
    }

    /// A product of unitary channels maps a perfectly won inner game onto
    /// its conjugated copy, and its Kraus operator lies in the biarrow.
    #[test]
    fn unitary_product_transfers_perfect_strategies(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let (c, g1) = perfect_pair(&mut r, &legs2("x1", "y1", 2), &legs2("a1", "b1", 2));
        let u = |r: &mut SeededRng, a: &str, b: &str| random::unitary_channel(r, &leg(a, 2), &leg(b, 2)).unwrap();
        let (ux, uy, va, vb) = (u(&mut r, "x2", "x1"), u(&mut r, "y2", "y1"), u(&mut r, "a1", "a2"), u(&mut r, "b1", "b2"));
        let g = build_local(&[(1.0, [&ux, &uy, &va, &vb])]).unwrap();
        let uk = ux.tensor(&uy).unwrap().kraus_of(KRAUS_CUTOFF).unwrap().remove(0);
        let vk = va.tensor(&vb).unwrap().kraus_of(KRAUS_CUTOFF).unwrap().remove(0);
        let p2 = uk.adjoint() * g1.p().data() * &uk;
        let q2 = &vk * g1.q().data() * vk.adjoint();
        let g2 = ImplicationGame::new(
            LabeledMatrix::new(legs2("x2", "y2", 2), p2).unwrap(),
            LabeledMatrix::new(legs2("a2", "b2", 2), q2).unwrap(),
            1e-9,
        )
        .unwrap();
        let w = is_homomorphism_witness(&g, &g1.hypergraph(1e-9).unwrap(), &g2.hypergraph(1e-9).unwrap(), 1e-8).unwrap();
        prop_assert!(w.pass(), "{:?}", w);
        let outer = simulate(&g, &Correlation::new(c).unwrap()).unwrap();
        prop_assert!(g2.value_gap(outer.channel()).unwrap().abs() <= 1e-9);
    }
}

#[test]
fn identity_is_not_an_isomorphism_between_different_graphs() {
    let u = QuantumGraph::from_edges(4, &cycle_edges(4)).unwrap();
    let v = QuantumGraph::from_edges(4, &[(0, 2), (2, 0), (1, 3), (3, 1)]).unwrap();
    let id = |i: &str, o: &str| Channel::identity(leg(i, 4), leg(o, 4)).unwrap();
    let c = Correlation::new(id("x", "a").tensor(&id("y", "b")).unwrap()).unwrap();
    let rep = graph_iso_check(&c, &u, &v, TOL).unwrap();
    assert!(!rep.get("forward.value_gap").unwrap().pass);
    assert!(rep.get("bicorrelation.unital").unwrap().pass);
    assert!(max_abs_diff(c.adjoint().channel().choi_data(), c.channel().choi_data()) <= 1e-15);
}
