//! Instance generators and reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use nalgebra::DVector;
use qns::channel::Channel;
use qns::correlation::{build_local, build_qc, build_quantum};
use qns::games::ImplicationGame;
use qns::linalg::orthonormal_columns;
use qns::random::{self, SeededRng};
use qns::stochastic::{channel_from, compose_reps, dot, odot, StochOpMatrix, StronglyStochOpMatrix};
use qns::{CMatrix, ClassicalCorrelation, Correlation, LabeledMatrix, LegSystem, SqnsCorrelation, C64};
use rand::Rng;

pub const SQNS_NAMES: [&str; 8] = ["x2", "y2", "a1", "b1", "x1", "y1", "a2", "b2"];

pub fn leg(name: &str, size: usize) -> LegSystem {
    LegSystem::of(&[(name, size)]).unwrap()
}

pub fn legs2(a: &str, b: &str, size: usize) -> LegSystem {
    LegSystem::of(&[(a, size), (b, size)]).unwrap()
}

pub fn sqns_legs(size: usize) -> (LegSystem, LegSystem) {
    let l = |n: &[&str]| LegSystem::of(&n.iter().map(|&s| (s, size)).collect::<Vec<_>>()).unwrap();
    (l(&SQNS_NAMES[..4]), l(&SQNS_NAMES[4..]))
}

/// Orthogonal projection onto the column space of `m`.
pub fn support(m: &CMatrix) -> CMatrix {
    let q = orthonormal_columns(m, 1e-10);
    &q * q.adjoint()
}

pub fn state(v: &DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

/// Mixture of `terms` products of random channels `x2→x1, y2→y1, a1→a2, b1→b2`.
pub fn local_sqns(rng: &mut SeededRng, k: usize, terms: usize) -> SqnsCorrelation {
    let w = random::probability_vector(rng, terms);
    let parts: Vec<[Channel; 4]> = (0..terms)
        .map(|_| {
            let rank = rng.gen_range(1..=k * k);
            [("x2", "x1"), ("y2", "y1"), ("a1", "a2"), ("b1", "b2")]
                .map(|(i, o)| random::channel(rng, &leg(i, k), &leg(o, k), rank).unwrap())
        })
        .collect();
    let comps: Vec<(f64, [&Channel; 4])> =
        w.iter().zip(&parts).map(|(&p, c)| (p, [&c[0], &c[1], &c[2], &c[3]])).collect();
    build_local(&comps).unwrap()
}

pub struct QuantumSimulator {
    pub g: SqnsCorrelation,
    pub m: StronglyStochOpMatrix,
    pub n: StronglyStochOpMatrix,
    pub xi: DVector<C64>,
}

pub fn quantum_sqns(rng: &mut SeededRng, k: usize, d: usize, terms: usize) -> QuantumSimulator {
    let m = random::strongly_stoch_op(rng, ["x2", "a1", "x1", "a2"], [k; 4], d, terms).unwrap();
    let n = random::strongly_stoch_op(rng, ["y2", "b1", "y1", "b2"], [k; 4], d, terms).unwrap();
    let xi = random::unit_vector(rng, m.matrix().ancilla_dim() * n.matrix().ancilla_dim());
    QuantumSimulator { g: build_quantum(&m, &n, &xi).unwrap(), m, n, xi }
}

/// Four stochastic matrices placed on separate ancilla factors.
pub struct QcSimulator {
    pub g: SqnsCorrelation,
    pub parts: [StochOpMatrix; 4],
    pub xi: DVector<C64>,
}

pub fn embed_all<const N: usize>(raw: [StochOpMatrix; N]) -> [StochOpMatrix; N] {
    let dims: Vec<usize> = raw.iter().map(|m| m.ancilla_dim()).collect();
    let mut i = 0;
    raw.map(|m| {
        let out = m.embed_ancilla(dims[..i].iter().product(), dims[i + 1..].iter().product());
        i += 1;
        out
    })
}

pub fn qc_sqns(rng: &mut SeededRng, k: usize, d: usize) -> QcSimulator {
    let raw = [("x2", "x1"), ("y2", "y1"), ("a1", "a2"), ("b1", "b2")]
        .map(|(i, o)| random::stoch_op(rng, &leg(i, k), &leg(o, k), d).unwrap());
    let parts = embed_all(raw);
    let xi = random::unit_vector(rng, parts[0].ancilla_dim());
    let g = build_qc(&parts[0], &parts[1], &parts[2], &parts[3], &xi, 1e-9).unwrap();
    QcSimulator { g, parts, xi }
}

/// An inner strategy `x1, y1 → a1, b1` together with its operator data.
pub struct InnerStrategy {
    pub e: Correlation,
    pub left: StochOpMatrix,
    pub right: StochOpMatrix,
    pub eta: DVector<C64>,
}

/// `Γ_{E⊙F, η}`: tensor-product model.
pub fn quantum_inner(rng: &mut SeededRng, k: usize, d: usize) -> InnerStrategy {
    let left = random::stoch_op(rng, &leg("x1", k), &leg("a1", k), d).unwrap();
    let right = random::stoch_op(rng, &leg("y1", k), &leg("b1", k), d).unwrap();
    let eta = random::unit_vector(rng, left.ancilla_dim() * right.ancilla_dim());
    let ch = channel_from(&odot(&left, &right).unwrap(), &state(&eta)).unwrap();
    InnerStrategy { e: Correlation::new(ch).unwrap(), left, right, eta }
}

/// `Γ_{E·F, η}` with `E` and `F` commuting on a shared space.
pub fn qc_inner(rng: &mut SeededRng, k: usize, d: usize) -> InnerStrategy {
    let raw = [("x1", "a1"), ("y1", "b1")].map(|(i, o)| random::stoch_op(rng, &leg(i, k), &leg(o, k), d).unwrap());
    let [left, right] = embed_all(raw);
    let eta = random::unit_vector(rng, left.ancilla_dim());
    let ch = channel_from(&dot(&left, &right, 1e-9).unwrap(), &state(&eta)).unwrap();
    InnerStrategy { e: Correlation::new(ch).unwrap(), left, right, eta }
}

/// The tensor-model strategy `Γ_{Ẽ⊙F̃, ψ}` with `Ẽ = L(E⊗M)`, `F̃ = L(F⊗N)`
/// and `ψ` the inner and simulator states interleaved to match the ancilla
/// order `(E, M, F, N)`.
pub fn quantum_transfer(sim: &QuantumSimulator, inner: &InnerStrategy) -> Channel {
    let et = compose_reps(&inner.left, &sim.m).unwrap();
    let ft = compose_reps(&inner.right, &sim.n).unwrap();
    let (k1, h1) = (inner.left.ancilla_dim(), sim.m.matrix().ancilla_dim());
    let (k2, h2) = (inner.right.ancilla_dim(), sim.n.matrix().ancilla_dim());
    let psi = DVector::from_fn(k1 * h1 * k2 * h2, |i, _| {
        let (a, r) = (i / (h1 * k2 * h2), i % (h1 * k2 * h2));
        let (b, r) = (r / (k2 * h2), r % (k2 * h2));
        let (c, e) = (r / h2, r % h2);
        inner.eta[a * k2 + c] * sim.xi[b * h2 + e]
    });
    channel_from(&odot(&et, &ft).unwrap(), &state(&psi)).unwrap()
}

/// Reference for `simulate`: the feedback sum written as eight nested loops
/// over the contracted indices. Legs of `g` must be in role order.
pub fn simulate_oracle(g: &SqnsCorrelation, e: &Correlation) -> CMatrix {
    let gc = g.channel();
    assert_eq!(g.role_names(), gc.in_names().into_iter().chain(gc.out_names()).collect::<Vec<_>>());
    let s: Vec<usize> = gc.in_legs().sizes().into_iter().chain(gc.out_legs().sizes()).collect();
    let (nx2, ny2, na1, nb1, nx1, ny1, na2, nb2) = (s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]);
    let gm = gc.choi_data();
    let em = e.channel().choi_data();
    let g_at = |v: [usize; 8]| -> usize { v.iter().zip(&s).fold(0, |acc, (&i, &n)| acc * n + i) };
    let e_at = |x1: usize, y1: usize, a1: usize, b1: usize| ((x1 * ny1 + y1) * na1 + a1) * nb1 + b1;
    let n_out = nx2 * ny2 * na2 * nb2;
    let mut out = CMatrix::zeros(n_out, n_out);
    for row in 0..n_out {
        let (x2, y2, a2, b2) = (row / (ny2 * na2 * nb2), row / (na2 * nb2) % ny2, row / nb2 % na2, row % nb2);
        for col in 0..n_out {
            let (x2p, y2p, a2p, b2p) = (col / (ny2 * na2 * nb2), col / (na2 * nb2) % ny2, col / nb2 % na2, col % nb2);
            let mut acc = C64::new(0.0, 0.0);
            for x1 in 0..nx1 {
                for y1 in 0..ny1 {
                    for a1 in 0..na1 {
                        for b1 in 0..nb1 {
                            for x1p in 0..nx1 {
                                for y1p in 0..ny1 {
                                    for a1p in 0..na1 {
                                        for b1p in 0..nb1 {
                                            let gr = g_at([x2, y2, a1, b1, x1, y1, a2, b2]);
                                            let gcol = g_at([x2p, y2p, a1p, b1p, x1p, y1p, a2p, b2p]);
                                            acc += gm[(gr, gcol)] * em[(e_at(x1, y1, a1, b1), e_at(x1p, y1p, a1p, b1p))];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out[(row, col)] = acc;
        }
    }
    out
}

/// A channel with a game it wins perfectly: `Q` is the support of `Φ(P)`.
pub fn perfect_pair(rng: &mut SeededRng, in_legs: &LegSystem, out_legs: &LegSystem) -> (Channel, ImplicationGame) {
    let rank = rng.gen_range(1..=2);
    let c = random::channel(rng, in_legs, out_legs, rank).unwrap();
    let p = random::projection(rng, in_legs.dim(), 1);
    let q = support(&c.apply(&p).unwrap());
    let game = ImplicationGame::new(
        LabeledMatrix::new(in_legs.clone(), p).unwrap(),
        LabeledMatrix::new(out_legs.clone(), q).unwrap(),
        1e-9,
    )
    .unwrap();
    (c, game)
}

/// Classical table on SQNS legs of size 2, either satisfying the four strong
/// no-signalling sums or drawn without constraints.
pub fn classical_sqns_table(rng: &mut SeededRng, sns: bool) -> ClassicalCorrelation {
    let (i, o) = sqns_legs(2);
    if sns {
        let cuts: Vec<(&str, &str)> = (0..4).map(|k| (SQNS_NAMES[k], SQNS_NAMES[k + 4])).collect();
        random::ns_classical(rng, &i, &o, &cuts).unwrap()
    } else {
        random::classical(rng, &i, &o).unwrap()
    }
}

pub fn classical_ns_table(rng: &mut SeededRng, size: usize) -> ClassicalCorrelation {
    let (i, o) = (legs2("x", "y", size), legs2("a", "b", size));
    random::ns_classical(rng, &i, &o, &[("x", "a"), ("y", "b")]).unwrap()
}
