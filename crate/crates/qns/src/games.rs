//! Quantum hypergraphs, implication games and perfect-strategy checks.
//!
//! A hypergraph is stored in its operator picture: a subspace of linear maps
//! from the input space to the output space, with a basis orthonormal under
//! `⟨S, T⟩ = Tr(S T*)`.

use nalgebra::DVector;

use crate::channel::Channel;
use crate::classical::ClassicalGame;
use crate::correlation::{is_bicorrelation, Correlation, SqnsCorrelation};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, range_projection};
use crate::report::Report;
use crate::tensor::{hermitian_deviation, max_abs, CMatrix, LabeledMatrix, LegSystem, C64};

/// Relative singular-value cutoff when extracting a subspace basis.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Hypergraph {
    in_legs: LegSystem,
    out_legs: LegSystem,
    basis: Vec<CMatrix>,
}

fn vec_op(m: &CMatrix) -> impl Iterator<Item = C64> + '_ {
    // row-major, so index (out, in) ↦ out * n_in + in
    (0..m.nrows()).flat_map(move |r| (0..m.ncols()).map(move |c| m[(r, c)]))
}

fn unvec_op(v: &[C64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| v[r * cols + c])
}

impl Hypergraph {
    /// Span of arbitrary operators, re-orthonormalized.
    pub fn span(in_legs: LegSystem, out_legs: LegSystem, ops: &[CMatrix]) -> Result<Self> {
        let (n, m) = (in_legs.dim(), out_legs.dim());
        if let Some(op) = ops.iter().find(|o| o.nrows() != m || o.ncols() != n) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, expected {m}x{n}",
                op.nrows(),
                op.ncols()
            )));
        }
        let stacked = CMatrix::from_fn(n * m, ops.len(), |i, k| ops[k][(i / n, i % n)]);
        let q = orthonormal_columns(&stacked, RANK_CUTOFF);
        let basis = (0..q.ncols())
            .map(|k| unvec_op(q.column(k).as_slice(), m, n))
            .collect();
        Ok(Hypergraph { in_legs, out_legs, basis })
    }

    /// The whole operator space.
    pub fn full(in_legs: LegSystem, out_legs: LegSystem) -> Self {
        let (n, m) = (in_legs.dim(), out_legs.dim());
        let basis = (0..m * n)
            .map(|i| {
                let mut u = CMatrix::zeros(m, n);
                u[(i / n, i % n)] = C64::new(1.0, 0.0);
                u
            })
            .collect();
        Hypergraph { in_legs, out_legs, basis }
    }

    /// `span{γ_ℓ ξ_i*}` over orthonormal bases of `rng Q` and `rng P`.
    pub fn from_projections(p: &LabeledMatrix, q: &LabeledMatrix, tol: f64) -> Result<Self> {
        check_projection(p.data(), tol)?;
        check_projection(q.data(), tol)?;
        let xi = orthonormal_columns(p.data(), RANK_CUTOFF);
        let gamma = orthonormal_columns(q.data(), RANK_CUTOFF);
        let mut basis = Vec::with_capacity(xi.ncols() * gamma.ncols());
        for i in 0..xi.ncols() {
            for l in 0..gamma.ncols() {
                basis.push(gamma.column(l) * xi.column(i).adjoint());
            }
        }
        Ok(Hypergraph { in_legs: p.legs().clone(), out_legs: q.legs().clone(), basis })
    }

    /// Matrix units `e_{ab} e_{xy}*` for the winning tuples of a classical game.
    pub fn from_classical(game: &ClassicalGame) -> Result<Self> {
        let [x, y, a, b] = game.sizes();
        let mut basis = Vec::new();
        for xy in 0..x * y {
            for ab in 0..a * b {
                if game.wins(xy, ab) {
                    let mut u = CMatrix::zeros(a * b, x * y);
                    u[(ab, xy)] = C64::new(1.0, 0.0);
                    basis.push(u);
                }
            }
        }
        if basis.is_empty() {
            return Err(Error::EmptyGame);
        }
        Ok(Hypergraph {
            in_legs: LegSystem::of(&[("x", x), ("y", y)])?,
            out_legs: LegSystem::of(&[("a", a), ("b", b)])?,
            basis,
        })
    }

    pub fn in_legs(&self) -> &LegSystem {
        &self.in_legs
    }

    pub fn out_legs(&self) -> &LegSystem {
        &self.out_legs
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Ambient dimension of the operator space.
    pub fn ambient_dim(&self) -> usize {
        self.in_legs.dim() * self.out_legs.dim()
    }

    /// Frobenius norm of the component of `m` orthogonal to the subspace.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        let mut r = m.clone();
        for b in &self.basis {
            let c = hs(m, b);
            r -= b * c;
        }
        r.norm()
    }

    /// Largest residual of `other`'s basis, so zero means `other ⊆ self`.
    pub fn containment_residual(&self, other: &Hypergraph) -> f64 {
        other.basis.iter().fold(0.0, |a, m| a.max(self.residual(m)))
    }

    /// Orthogonal complement in the full operator space.
    pub fn complement(&self) -> Hypergraph {
        let (n, m) = (self.in_legs.dim(), self.out_legs.dim());
        let dim = n * m;
        let mut proj = CMatrix::identity(dim, dim);
        for b in &self.basis {
            let v = DVector::from_iterator(dim, vec_op(b));
            proj -= &v * v.adjoint();
        }
        let q = range_projection(&proj);
        let basis = (0..q.ncols())
            .map(|k| unvec_op(q.column(k).as_slice(), m, n))
            .collect();
        Hypergraph { in_legs: self.in_legs.clone(), out_legs: self.out_legs.clone(), basis }
    }

    /// The conjugate hypergraph in operator form: each basis operator replaced
    /// by its adjoint, swapping input and output legs.
    pub fn conj(&self) -> Hypergraph {
        Hypergraph {
            in_legs: self.out_legs.clone(),
            out_legs: self.in_legs.clone(),
            basis: self.basis.iter().map(|b| b.adjoint()).collect(),
        }
    }
}

fn hs(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

fn check_projection(p: &CMatrix, tol: f64) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch("projection must be square".into()));
    }
    let dev = max_abs(&(p * p - p)).max(hermitian_deviation(p));
    if dev > tol {
        return Err(Error::NotProjection(dev));
    }
    Ok(())
}

/// `U₁ ⇔ U₂ = U₁ ⊗ U₂ + U₁⊥ ⊗ U₂⊥`, arranged as maps from
/// `(u2.in, u1.in)` to `(u1.out, u2.out)`: the operator `S ⊗ T` becomes
/// `K[(s_out, t_out), (t_in, s_in)] = S[s_out, s_in] T[t_out, t_in]`.
pub fn biarrow(u1: &Hypergraph, u2: &Hypergraph) -> Result<Hypergraph> {
    let in_legs = u2.in_legs.concat(&u1.in_legs)?;
    let out_legs = u1.out_legs.concat(&u2.out_legs)?;
    let (c1, c2) = (u1.complement(), u2.complement());
    let (s_in, t_in) = (u1.in_legs.dim(), u2.in_legs.dim());
    let t_out = u2.out_legs.dim();
    let mut basis = Vec::with_capacity(u1.rank() * u2.rank() + c1.rank() * c2.rank());
    for (a, b) in [(u1, u2), (&c1, &c2)] {
        for s in &a.basis {
            for t in &b.basis {
                basis.push(CMatrix::from_fn(out_legs.dim(), in_legs.dim(), |r, c| {
                    let (so, to) = (r / t_out, r % t_out);
                    let (ti, si) = (c / s_in, c % s_in);
                    s[(so, si)] * t[(to, ti)]
                }));
            }
        }
    }
    debug_assert_eq!(t_in * s_in, in_legs.dim());
    // products of orthonormal families across orthogonal pairs stay orthonormal
    Ok(Hypergraph { in_legs, out_legs, basis })
}

/// Span of the Kraus operators of `c`, which depends only on its Choi matrix.
pub fn kraus_space(c: &Channel, tol: f64) -> Result<Hypergraph> {
    let ks = c.kraus_of(tol)?;
    Hypergraph::span(c.in_legs().clone(), c.out_legs().clone(), &ks)
}

/// The game "inputs supported on `P` must produce outputs supported on `Q`".
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicationGame {
    p: LabeledMatrix,
    q: LabeledMatrix,
}

impl ImplicationGame {
    pub fn new(p: LabeledMatrix, q: LabeledMatrix, tol: f64) -> Result<Self> {
        check_projection(p.data(), tol)?;
        check_projection(q.data(), tol)?;
        p.legs().concat(q.legs())?;
        Ok(ImplicationGame { p, q })
    }

    pub fn p(&self) -> &LabeledMatrix {
        &self.p
    }

    pub fn q(&self) -> &LabeledMatrix {
        &self.q
    }

    pub fn hypergraph(&self, tol: f64) -> Result<Hypergraph> {
        Hypergraph::from_projections(&self.p, &self.q, tol)
    }

    /// `Tr(Φ(P) Q⊥)`.
    pub fn value_gap(&self, c: &Channel) -> Result<f64> {
        self.check_legs(c)?;
        let out = c.apply(self.p.data())?;
        let q = self.q.data();
        let q_perp = CMatrix::identity(q.nrows(), q.ncols()) - q;
        Ok((out * q_perp).trace().re)
    }

    /// `Tr(Φ(P) Q)`, the unnormalized winning weight.
    pub fn value(&self, c: &Channel) -> Result<f64> {
        self.check_legs(c)?;
        Ok((c.apply(self.p.data())? * self.q.data()).trace().re)
    }

    fn check_legs(&self, c: &Channel) -> Result<()> {
        if c.in_legs().sizes() != self.p.legs().sizes() || c.out_legs().sizes() != self.q.legs().sizes() {
            return Err(Error::DimensionMismatch("game and channel legs differ".into()));
        }
        Ok(())
    }
}

/// Verdict tolerance for the Kraus-side test, derived from the trace-side one.
///
/// `Tr(Φ(P)Q⊥) = Σ_k ‖Q⊥ K_k P‖²`, so a trace gap of `t` allows residuals up
/// to `√t`. The bound is widened by a factor of 3 to absorb rounding.
pub fn kraus_tolerance(value_tol: f64) -> f64 {
    3.0 * value_tol.sqrt()
}

/// Perfect-strategy test two ways: the trace gap `Tr(Φ(P)Q⊥)` and the largest
/// residual `‖Q⊥ K P‖` of the Kraus operators restricted to `rng P`, which
/// vanishes exactly when each `K P` lies in `span{γ ξ*}`.
pub fn is_perfect(c: &Correlation, game: &ImplicationGame, tol: f64) -> Result<Report> {
    is_perfect_channel(c.channel(), game, tol)
}

pub fn is_perfect_channel(c: &Channel, game: &ImplicationGame, tol: f64) -> Result<Report> {
    let gap = game.value_gap(c)?;
    let q = game.q.data();
    let q_perp = CMatrix::identity(q.nrows(), q.ncols()) - q;
    let residual = c
        .kraus_of(crate::channel::KRAUS_CUTOFF)?
        .iter()
        .map(|k| (&q_perp * k * game.p.data()).norm())
        .fold(0.0_f64, f64::max);
    let mut r = Report::new();
    r.check("value_gap", gap, tol);
    let kt = kraus_tolerance(tol);
    r.check("kraus_contained", residual, kt);
    let agree = (gap <= tol) == (residual <= kt);
    r.record("agree", if agree { 0.0 } else { 1.0 }, agree);
    Ok(r)
}

/// Checks that `g`'s Kraus space lies in `conj(U₁) ⇔ U₂`.
///
/// `u1` is a hypergraph over `(X₁Y₁, A₁B₁)` and `u2` over `(X₂Y₂, A₂B₂)`.
pub fn is_homomorphism_witness(g: &SqnsCorrelation, u1: &Hypergraph, u2: &Hypergraph, tol: f64) -> Result<Report> {
    let target = biarrow(&u1.conj(), u2)?;
    let ch = g.channel();
    if ch.in_legs().sizes() != target.in_legs.sizes() || ch.out_legs().sizes() != target.out_legs.sizes() {
        return Err(Error::DimensionMismatch("simulator legs do not match the hypergraphs".into()));
    }
    let ks = ch.kraus_of(crate::channel::KRAUS_CUTOFF)?;
    let residual = ks.iter().fold(0.0_f64, |a, k| a.max(target.residual(k)));
    let mut r = Report::new();
    r.check("kraus_in_biarrow", residual, tol);
    Ok(r)
}

/// A subspace of `C^X ⊗ C^X`, stored as orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumGraph {
    size: usize,
    basis: CMatrix,
}

impl QuantumGraph {
    pub fn new(size: usize, vectors: &[DVector<C64>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != size * size) {
            return Err(Error::DimensionMismatch(format!("vector of length {} in a {size}x{size} graph", v.len())));
        }
        let stacked = CMatrix::from_fn(size * size, vectors.len(), |i, k| vectors[k][i]);
        Ok(QuantumGraph { size, basis: orthonormal_columns(&stacked, RANK_CUTOFF) })
    }

    /// Classical graph from an edge list, one `e_i ⊗ e_j` per ordered pair.
    pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let vs: Vec<DVector<C64>> = edges
            .iter()
            .map(|&(i, j)| {
                let mut v = DVector::zeros(size * size);
                v[i * size + j] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::new(size, &vs)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projection(&self, first: &str, second: &str) -> Result<LabeledMatrix> {
        let legs = LegSystem::of(&[(first, self.size), (second, self.size)])?;
        LabeledMatrix::new(legs, &self.basis * self.basis.adjoint())
    }
}

/// Skewness `𝔪(u) = Σ_i u_{ii} = 0` and flip symmetry of a quantum graph.
pub fn quantum_graph_check(u: &QuantumGraph, tol: f64) -> Report {
    let n = u.size;
    let b = &u.basis;
    let skew = (0..b.ncols())
        .map(|k| (0..n).map(|i| b[(i * n + i, k)]).sum::<C64>().norm())
        .fold(0.0_f64, f64::max);
    let proj = b * b.adjoint();
    let flipped = CMatrix::from_fn(n * n, b.ncols(), |r, k| b[((r % n) * n + r / n, k)]);
    let sym = (&flipped - &proj * &flipped).norm();
    let mut r = Report::new();
    r.check("skew", skew, tol);
    r.check("symmetric", sym, tol);
    r
}

/// The homomorphism game `U → V` as the implication game `P_U → P_V`.
pub fn graph_game(u: &QuantumGraph, v: &QuantumGraph) -> Result<ImplicationGame> {
    ImplicationGame::new(u.projection("x", "y")?, v.projection("a", "b")?, 1e-9)
}

/// Perfect for `U → V`, its adjoint perfect for `V → U`, and a bicorrelation.
pub fn graph_iso_check(c: &Correlation, u: &QuantumGraph, v: &QuantumGraph, tol: f64) -> Result<Report> {
    let mut r = Report::new();
    r.absorb("bicorrelation", is_bicorrelation(c, tol));
    r.absorb("forward", is_perfect(c, &graph_game(u, v)?, tol)?);
    r.absorb("backward", is_perfect(&c.adjoint(), &graph_game(v, u)?, tol)?);
    Ok(r)
}

/// A rank-one quantum game `(ξ, γ)` with `ξ ∈ C^{XY} ⊗ C^R`, `γ ∈ C^{AB} ⊗ C^R`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneGame {
    pub xi: LabeledVector,
    pub gamma: LabeledVector,
}

/// A vector over a leg system.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    pub legs: LegSystem,
    pub data: DVector<C64>,
}

impl LabeledVector {
    pub fn new(legs: LegSystem, data: DVector<C64>) -> Result<Self> {
        if data.len() != legs.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} on dimension {}", data.len(), legs.dim())));
        }
        Ok(LabeledVector { legs, data })
    }

    fn outer(&self) -> Result<LabeledMatrix> {
        LabeledMatrix::new(self.legs.clone(), &self.data * self.data.adjoint())
    }
}

/// `P = ξξ*`, `Q = γγ*` over the extended legs. Strategies are tested in the
/// form `Γ ⊗ id_R`; callers tensor the identity themselves.
pub fn rank_one_to_implication(g: &RankOneGame, tol: f64) -> Result<ImplicationGame> {
    for v in [&g.xi, &g.gamma] {
        let n = v.data.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotUnit(n));
        }
    }
    ImplicationGame::new(g.xi.outer()?, g.gamma.outer()?, tol)
}
