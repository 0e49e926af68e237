//! Trace representations built from block isometries, tracial correlations
//! and the relations of the two-party generator algebra.

use crate::channel::Channel;
use crate::classical::ClassicalCorrelation;
use crate::correlation::{Correlation, SqnsCorrelation};
use crate::error::{Error, Result};
use crate::random::{isometry, SeededRng};
use crate::report::Report;
use crate::simulate::simulate;
use crate::stochastic::{StochOpMatrix, StronglyStochOpMatrix};
use crate::tensor::{max_abs, max_abs_diff, CMatrix, LabeledMatrix, LegSystem, C64};

/// Blocks `v[a][x]`, each `d_k × d_h`, of an isometry `C^X ⊗ C^{d_h} → C^A ⊗ C^{d_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockIsometry {
    x_size: usize,
    a_size: usize,
    d_h: usize,
    d_k: usize,
    blocks: Vec<Vec<CMatrix>>,
}

impl BlockIsometry {
    pub fn new(blocks: Vec<Vec<CMatrix>>, tol: f64) -> Result<Self> {
        let v = Self::unchecked(blocks)?;
        let dev = v.isometry_violation();
        if dev > tol {
            return Err(Error::NotIsometry(dev));
        }
        Ok(v)
    }

    pub(crate) fn unchecked(blocks: Vec<Vec<CMatrix>>) -> Result<Self> {
        let a_size = blocks.len();
        let x_size = blocks.first().map_or(0, |r| r.len());
        if a_size == 0 || x_size == 0 {
            return Err(Error::DimensionMismatch("empty block isometry".into()));
        }
        let (d_k, d_h) = (blocks[0][0].nrows(), blocks[0][0].ncols());
        if blocks.iter().any(|r| r.len() != x_size || r.iter().any(|b| b.nrows() != d_k || b.ncols() != d_h)) {
            return Err(Error::DimensionMismatch("blocks of unequal shape".into()));
        }
        Ok(BlockIsometry { x_size, a_size, d_h, d_k, blocks })
    }

    /// Isometry with Haar-like distribution; needs `a·d_k ≥ x·d_h`.
    pub fn random(rng: &mut SeededRng, x: usize, a: usize, d_h: usize, d_k: usize) -> Result<Self> {
        if a * d_k < x * d_h {
            return Err(Error::DimensionMismatch(format!("no isometry from {} into {}", x * d_h, a * d_k)));
        }
        let v = isometry(rng, a * d_k, x * d_h);
        Self::unchecked(
            (0..a)
                .map(|ai| (0..x).map(|xi| v.view((ai * d_k, xi * d_h), (d_k, d_h)).into_owned()).collect())
                .collect(),
        )
    }

    /// Random block unitary, `d_k = x·d_h / a`; `a` must divide `x·d_h`.
    pub fn random_unitary(rng: &mut SeededRng, x: usize, a: usize, d_h: usize) -> Result<Self> {
        if a == 0 || (x * d_h) % a != 0 {
            return Err(Error::DimensionMismatch(format!("no block unitary from {x}·{d_h} onto {a} blocks")));
        }
        Self::random(rng, x, a, d_h, x * d_h / a)
    }

    /// `v[a][x] = δ_{a, g(x)}` with scalar blocks.
    pub fn permutation(g: &[usize], a_size: usize) -> Result<Self> {
        if g.iter().any(|&a| a >= a_size) {
            return Err(Error::DimensionMismatch("function value out of range".into()));
        }
        let one = |b: bool| CMatrix::from_element(1, 1, C64::new(if b { 1.0 } else { 0.0 }, 0.0));
        Self::new(
            (0..a_size).map(|a| g.iter().map(|&gx| one(gx == a)).collect()).collect(),
            1e-12,
        )
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn d_h(&self) -> usize {
        self.d_h
    }

    pub fn d_k(&self) -> usize {
        self.d_k
    }

    pub fn block(&self, a: usize, x: usize) -> &CMatrix {
        &self.blocks[a][x]
    }

    /// `max ‖Σ_a v_{ax}* v_{ax'} − δ_{xx'} I‖`.
    pub fn isometry_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.x_size {
            for xp in 0..self.x_size {
                let mut s = CMatrix::zeros(self.d_h, self.d_h);
                for a in 0..self.a_size {
                    s += self.blocks[a][x].adjoint() * &self.blocks[a][xp];
                }
                if x == xp {
                    s -= CMatrix::identity(self.d_h, self.d_h);
                }
                worst = worst.max(max_abs(&s));
            }
        }
        worst
    }

    /// `max ‖Σ_x v_{ax} v_{a'x}* − δ_{aa'} I‖`; zero for a bi-isometry.
    pub fn co_isometry_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.a_size {
            for ap in 0..self.a_size {
                let mut s = CMatrix::zeros(self.d_k, self.d_k);
                for x in 0..self.x_size {
                    s += &self.blocks[a][x] * self.blocks[ap][x].adjoint();
                }
                if a == ap {
                    s -= CMatrix::identity(self.d_k, self.d_k);
                }
                worst = worst.max(max_abs(&s));
            }
        }
        worst
    }

    /// `e_{x,x',a,a'} = v_{a,x}* v_{a',x'}`.
    pub fn generators(&self) -> GeneratorSet {
        let (nx, na) = (self.x_size, self.a_size);
        let mut e = Vec::with_capacity(nx * nx * na * na);
        for x in 0..nx {
            for xp in 0..nx {
                for a in 0..na {
                    for ap in 0..na {
                        e.push(self.blocks[a][x].adjoint() * &self.blocks[ap][xp]);
                    }
                }
            }
        }
        GeneratorSet { x_size: nx, a_size: na, dim: self.d_h, e }
    }
}

/// Matrices `e[x][x'][a][a']` on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    x_size: usize,
    a_size: usize,
    dim: usize,
    e: Vec<CMatrix>,
}

impl GeneratorSet {
    pub fn from_fn(x_size: usize, a_size: usize, dim: usize, f: impl Fn(usize, usize, usize, usize) -> CMatrix) -> Result<Self> {
        let mut e = Vec::with_capacity(x_size * x_size * a_size * a_size);
        for x in 0..x_size {
            for xp in 0..x_size {
                for a in 0..a_size {
                    for ap in 0..a_size {
                        let m = f(x, xp, a, ap);
                        if m.nrows() != dim || m.ncols() != dim {
                            return Err(Error::DimensionMismatch(format!("generator of size {}x{}, expected {dim}", m.nrows(), m.ncols())));
                        }
                        e.push(m);
                    }
                }
            }
        }
        Ok(GeneratorSet { x_size, a_size, dim, e })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, x: usize, xp: usize, a: usize, ap: usize) -> &CMatrix {
        &self.e[((x * self.x_size + xp) * self.a_size + a) * self.a_size + ap]
    }

    pub fn all(&self) -> &[CMatrix] {
        &self.e
    }

    /// `max ‖Σ_a e_{x,x',a,a} − δ_{xx'} I‖`.
    pub fn tro_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.x_size {
            for xp in 0..self.x_size {
                let mut s = CMatrix::zeros(self.dim, self.dim);
                for a in 0..self.a_size {
                    s += self.get(x, xp, a, a);
                }
                if x == xp {
                    s -= CMatrix::identity(self.dim, self.dim);
                }
                worst = worst.max(max_abs(&s));
            }
        }
        worst
    }

    /// The generators as a stochastic operator matrix over `(x, a)`.
    pub fn to_stoch_op(&self, x_name: &str, a_name: &str) -> Result<StochOpMatrix> {
        StochOpMatrix::from_entries(
            LegSystem::of(&[(x_name, self.x_size)])?,
            LegSystem::of(&[(a_name, self.a_size)])?,
            self.dim,
            |x, xp, a, ap| self.get(x, xp, a, ap).clone(),
        )
    }
}

/// A block isometry with a weighted trace `τ(u) = Σ_k w_k u_{kk}` on `C^{d_h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRep {
    isometry: BlockIsometry,
    weights: Vec<f64>,
}

impl TraceRep {
    pub fn new(isometry: BlockIsometry, weights: Option<Vec<f64>>) -> Result<Self> {
        let d = isometry.d_h;
        let weights = weights.unwrap_or_else(|| vec![1.0 / d as f64; d]);
        if weights.len() != d {
            return Err(Error::InvalidWeights(format!("{} weights for dimension {d}", weights.len())));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights("weights must be a probability vector".into()));
        }
        Ok(TraceRep { isometry, weights })
    }

    pub fn uniform(isometry: BlockIsometry) -> Self {
        Self::new(isometry, None).expect("uniform weights are valid")
    }

    pub fn isometry(&self) -> &BlockIsometry {
        &self.isometry
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn trace(&self, u: &CMatrix) -> C64 {
        weighted_trace(&self.weights, u)
    }

    /// `max |τ(e e') − τ(e' e)|` over generator pairs.
    pub fn traciality_violation(&self) -> f64 {
        let g = self.isometry.generators();
        let mut worst: f64 = 0.0;
        for (i, e) in g.e.iter().enumerate() {
            for f in &g.e[i + 1..] {
                worst = worst.max((self.trace(&(e * f)) - self.trace(&(f * e))).norm());
            }
        }
        worst
    }

    pub fn verify(&self, tol: f64) -> Report {
        let mut r = Report::new();
        r.check("isometry", self.isometry.isometry_violation(), tol);
        // without it τ is not tracial on longer words and Γ_τ is not concurrent
        r.check("co_isometry", self.isometry.co_isometry_violation(), tol);
        r.check("tro", self.isometry.generators().tro_violation(), tol);
        r.check("tracial", self.traciality_violation(), tol);
        r
    }
}

fn weighted_trace(w: &[f64], u: &CMatrix) -> C64 {
    w.iter().enumerate().map(|(k, &wk)| u[(k, k)] * wk).sum()
}

/// `choi[(x,y,a,b),(x',y',a',b')] = τ(e_{x,x',a,a'} f_{y',y,b',b})`.
pub fn gamma_from_generators(e: &GeneratorSet, f: &GeneratorSet, weights: &[f64], names: [&str; 4]) -> Result<Channel> {
    if e.dim != f.dim || weights.len() != e.dim {
        return Err(Error::DimensionMismatch("generators and weights live on different spaces".into()));
    }
    let legs = LegSystem::of(&[
        (names[0], e.x_size),
        (names[1], f.x_size),
        (names[2], e.a_size),
        (names[3], f.a_size),
    ])?;
    let n = legs.dim();
    let mut choi = CMatrix::zeros(n, n);
    for row in 0..n {
        let r = legs.multi_index(row);
        for col in 0..n {
            let c = legs.multi_index(col);
            let prod = e.get(r[0], c[0], r[2], c[2]) * f.get(c[1], r[1], c[3], r[3]);
            choi[(row, col)] = weighted_trace(weights, &prod);
        }
    }
    Channel::new(legs.select(&names[..2])?, legs.select(&names[2..])?, choi)
}

/// `Γ_τ` with legs named `x, y | a, b`.
pub fn tracial_correlation(rep: &TraceRep) -> Result<Correlation> {
    tracial_correlation_named(rep, ["x", "y", "a", "b"])
}

pub fn tracial_correlation_named(rep: &TraceRep, names: [&str; 4]) -> Result<Correlation> {
    let g = rep.isometry.generators();
    Correlation::new(gamma_from_generators(&g, &g, &rep.weights, names)?)
}

/// `J̃ = J / |X|` on two copies of a leg of size `n`.
pub fn normalized_max_entangled(n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n * n, |r, c| {
        if r / n == r % n && c / n == c % n {
            C64::new(1.0 / n as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `‖Φ(J̃_X) − J̃_A‖_max` for a channel `M_{XX} → M_{AA}`.
pub fn is_concurrent(c: &Correlation, tol: f64) -> Report {
    let mut r = Report::new();
    let (i, o) = (c.channel().in_legs().sizes(), c.channel().out_legs().sizes());
    if i[0] != i[1] || o[0] != o[1] {
        r.record("square_legs", f64::INFINITY, false);
        return r;
    }
    let out = c.channel().apply(&normalized_max_entangled(i[0])).expect("own dimensions");
    r.check("concurrent", max_abs_diff(&out, &normalized_max_entangled(o[0])), tol);
    r
}

/// `Γ_T` for `T = τ_X ⊗ τ_A`: `rep_x` is over `(X₂, X₁)` and `rep_a` over
/// `(A₁, A₂)`. Legs are `x2, y2, a1, b1 | x1, y1, a2, b2`.
pub fn jointly_tracial_correlation(rep_x: &TraceRep, rep_a: &TraceRep) -> Result<SqnsCorrelation> {
    let gx = tracial_correlation_named(rep_x, ["x2", "y2", "x1", "y1"])?;
    let ga = tracial_correlation_named(rep_a, ["a1", "b1", "a2", "b2"])?;
    SqnsCorrelation::new(gx.channel().tensor(ga.channel())?)
}

/// Outcome of [`simulated_trace`].
#[derive(Clone, Debug)]
pub struct SimulatedTrace {
    pub correlation: Correlation,
    pub report: Report,
}

/// Builds `Γ_τ̃` from the generators
/// `ẽ_{x₂x₂',a₂a₂'} = Σ e^X_{x₂x₂',x₁x₁'} ⊗ e^A_{a₁a₁',a₂a₂'} ⊗ f_{x₁x₁',a₁a₁'}`
/// under the product trace, and compares it with `simulate(Γ_T, Γ_τ)`.
pub fn simulated_trace(rep_x: &TraceRep, rep_a: &TraceRep, inner: &TraceRep, tol: f64) -> Result<SimulatedTrace> {
    let (gx, ga, gf) = (rep_x.isometry.generators(), rep_a.isometry.generators(), inner.isometry.generators());
    let (n1, m1) = (gf.x_size, gf.a_size);
    if gx.a_size != n1 || ga.x_size != m1 {
        return Err(Error::DimensionMismatch("simulator and inner alphabets differ".into()));
    }
    let dim = gx.dim * ga.dim * gf.dim;
    let tilde = GeneratorSet::from_fn(gx.x_size, ga.a_size, dim, |x2, x2p, a2, a2p| {
        let mut acc = CMatrix::zeros(dim, dim);
        for x1 in 0..n1 {
            for x1p in 0..n1 {
                let ex = gx.get(x2, x2p, x1, x1p);
                for a1 in 0..m1 {
                    for a1p in 0..m1 {
                        acc += ex.kronecker(ga.get(a1, a1p, a2, a2p)).kronecker(gf.get(x1, x1p, a1, a1p));
                    }
                }
            }
        }
        acc
    })?;
    let weights: Vec<f64> = rep_x
        .weights
        .iter()
        .flat_map(|&a| rep_a.weights.iter().flat_map(move |&b| inner.weights.iter().map(move |&c| a * b * c)))
        .collect();
    let built = Correlation::new(gamma_from_generators(&tilde, &tilde, &weights, ["x2", "y2", "a2", "b2"])?)?;
    let sim = jointly_tracial_correlation(rep_x, rep_a)?;
    let inner_c = tracial_correlation_named(inner, ["x1", "y1", "a1", "b1"])?;
    let reference = simulate(&sim, &inner_c)?;
    let mut report = Report::new();
    report.check("matches_simulation", built.max_abs_diff(&reference), tol);
    report.absorb("simulated", is_concurrent(&built, tol));
    Ok(SimulatedTrace { correlation: built, report })
}

/// Generators `p^{aa',bb'}_{xx',yy'}` of the two-party algebra, each `d × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationGenerators {
    sizes: [usize; 4],
    dim: usize,
    p: Vec<CMatrix>,
}

impl RelationGenerators {
    /// `f(x, x', y, y', a, a', b, b')`.
    #[allow(clippy::type_complexity)]
    pub fn from_fn(sizes: [usize; 4], dim: usize, f: impl Fn([usize; 8]) -> CMatrix) -> Result<Self> {
        let legs = LegSystem::of(&[
            ("x", sizes[0]), ("xp", sizes[0]), ("y", sizes[1]), ("yp", sizes[1]),
            ("a", sizes[2]), ("ap", sizes[2]), ("b", sizes[3]), ("bp", sizes[3]),
        ])?;
        let mut p = Vec::with_capacity(legs.dim());
        for i in 0..legs.dim() {
            let m = legs.multi_index(i);
            let g = f([m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7]]);
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::DimensionMismatch("generator size".into()));
            }
            p.push(g);
        }
        Ok(RelationGenerators { sizes, dim, p })
    }

    /// `δ_{xx'}δ_{yy'}δ_{aa'}δ_{bb'} p(ab|xy)` as `1 × 1` generators.
    pub fn from_classical(p: &ClassicalCorrelation) -> Result<Self> {
        let s = p.inputs().sizes();
        let o = p.outputs().sizes();
        if s.len() != 2 || o.len() != 2 {
            return Err(Error::DimensionMismatch("two-party table needs 2+2 legs".into()));
        }
        Self::from_fn([s[0], s[1], o[0], o[1]], 1, |[x, xp, y, yp, a, ap, b, bp]| {
            let v = if x == xp && y == yp && a == ap && b == bp {
                p.prob(x * s[1] + y, a * o[1] + b)
            } else {
                0.0
            };
            CMatrix::from_element(1, 1, C64::new(v, 0.0))
        })
    }

    /// Reads `P` over `(X₂·A₁, X₁·A₂)` as generators with `X = X₂`, `Y = A₁`,
    /// `A = X₁`, `B = A₂`.
    pub fn from_strongly_stochastic(p: &StronglyStochOpMatrix) -> Result<Self> {
        let m = p.matrix();
        let (xs, as_) = (m.x_legs().sizes(), m.a_legs().sizes());
        let (xsplit, asplit) = p.splits();
        let x = xs[..xsplit].iter().product::<usize>();
        let y = xs[xsplit..].iter().product::<usize>();
        let a = as_[..asplit].iter().product::<usize>();
        let b = as_[asplit..].iter().product::<usize>();
        Self::from_fn([x, y, a, b], m.ancilla_dim(), |[xi, xp, yi, yp, ai, ap, bi, bp]| {
            m.entry(xi * y + yi, xp * y + yp, ai * b + bi, ap * b + bp)
        })
    }

    pub fn get(&self, idx: [usize; 8]) -> &CMatrix {
        let [x, y, a, b] = self.sizes;
        let dims = [x, x, y, y, a, a, b, b];
        let flat = idx.iter().zip(dims).fold(0, |acc, (&i, d)| acc * d + i);
        &self.p[flat]
    }
}

/// Checks the five relation families entrywise.
pub fn verify_cxyab_relations(g: &RelationGenerators, tol: f64) -> Report {
    let [nx, ny, na, nb] = g.sizes;
    let d = g.dim;
    let zero = CMatrix::zeros(d, d);
    let id = CMatrix::identity(d, d);
    let sum_a = |x: usize, xp: usize, y: usize, yp: usize, b: usize, bp: usize| -> CMatrix {
        (0..na).fold(zero.clone(), |s, a| s + g.get([x, xp, y, yp, a, a, b, bp]))
    };
    let sum_b = |x: usize, xp: usize, y: usize, yp: usize, a: usize, ap: usize| -> CMatrix {
        (0..nb).fold(zero.clone(), |s, b| s + g.get([x, xp, y, yp, a, ap, b, b]))
    };
    let (mut one, mut two, mut three, mut four, mut five) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for y in 0..ny {
        for yp in 0..ny {
            for b in 0..nb {
                for bp in 0..nb {
                    let base = sum_a(0, 0, y, yp, b, bp);
                    for x in 0..nx {
                        for xp in 0..nx {
                            let s = sum_a(x, xp, y, yp, b, bp);
                            if x == xp {
                                one = one.max(max_abs_diff(&s, &base));
                            } else {
                                two = two.max(max_abs(&s));
                            }
                        }
                    }
                }
            }
        }
    }
    for x in 0..nx {
        for xp in 0..nx {
            for a in 0..na {
                for ap in 0..na {
                    let base = sum_b(x, xp, 0, 0, a, ap);
                    for y in 0..ny {
                        for yp in 0..ny {
                            let s = sum_b(x, xp, y, yp, a, ap);
                            if y == yp {
                                three = three.max(max_abs_diff(&s, &base));
                            } else {
                                four = four.max(max_abs(&s));
                            }
                        }
                    }
                }
            }
            for y in 0..ny {
                for yp in 0..ny {
                    let mut s = zero.clone();
                    for a in 0..na {
                        for b in 0..nb {
                            s += g.get([x, xp, y, yp, a, a, b, b]);
                        }
                    }
                    let want = if x == xp && y == yp { id.clone() } else { zero.clone() };
                    five = five.max(max_abs_diff(&s, &want));
                }
            }
        }
    }
    let mut r = Report::new();
    r.check("one", one, tol);
    r.check("two", two, tol);
    r.check("three", three, tol);
    r.check("four", four, tol);
    r.check("five", five, tol);
    r
}

/// A leg system helper for tests and callers wanting `J̃` as a labelled matrix.
pub fn normalized_max_entangled_labeled(first: &str, second: &str, n: usize) -> Result<LabeledMatrix> {
    LabeledMatrix::new(LegSystem::of(&[(first, n), (second, n)])?, normalized_max_entangled(n))
}
