//! Game values: direct evaluation, the no-signalling value by alternating
//! projections with bisection, exact classical local values by enumeration,
//! and export of the no-signalling SDP in SDPA sparse format.
//!
//! Every objective is linear in the Choi matrix, `value = Tr(C W)` with `W`
//! Hermitian. The feasible set is `{C ⪰ 0} ∩ A`, where `A` holds the
//! trace-preserving Choi matrices satisfying both no-signalling cuts
//! `x → a` and `y → b`.
//!
//! # SDPA layout
//!
//! Variables are the real coordinates of `C` in the orthonormal Hermitian
//! basis `E_ii`, `(E_ij + E_ji)/√2`, `i(E_ij − E_ji)/√2` (`i < j`, ordered by
//! `i`, then `j`, symmetric before antisymmetric). Block 1 is the real
//! embedding `[[Re C, −Im C], [Im C, Re C]]` of size `2n`. Block 2 is a
//! diagonal LP block holding every equality `r·x = b` as the pair
//! `r·x − b ≥ 0`, `b − r·x ≥ 0`. The cost vector is the negated objective, so
//! the game value is minus the SDPA primal optimum. Numbers are written with
//! Rust's shortest round-trip exponent form (`{:e}`), zero entries omitted.

use std::fmt::Write as _;

use crate::channel::Channel;
use crate::classical::ClassicalGame;
use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::games::ImplicationGame;
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, thin_svd};
use crate::tensor::{CMatrix, LegSystem, C64};

/// Enumeration cap for [`loc_value_classical`].
pub const MAX_DETERMINISTIC_PAIRS: u128 = 10_000_000;

/// Largest Choi dimension accepted by [`ns_value`].
pub const MAX_SOLVER_DIM: usize = 256;

/// Largest Choi dimension accepted by [`export_sdpa`]; constraint rows come
/// from a dense decomposition over all `n²` coordinates.
pub const MAX_EXPORT_DIM: usize = 36;

/// Relative singular-value cutoff used to drop redundant constraint rows.
const ROW_CUTOFF: f64 = 1e-10;


#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Largest constraint violation accepted as feasible.
    pub tol_feas: f64,
    /// Target width of the bisection bracket.
    pub tol_value: f64,
    /// Dykstra iterations per feasibility test.
    pub max_iter: usize,
    /// Bisection steps after the initial bracket.
    pub bisection_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_feas: 1e-7, tol_value: 1e-4, max_iter: 5000, bisection_depth: 30 }
    }
}

/// What is being maximized.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    /// `Tr(Φ(P) Q)`.
    Implication(ImplicationGame),
    /// Winning probability under the game's input prior.
    Classical(ClassicalGame),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueClass {
    Ns,
    LocClassical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueProblem {
    pub objective: Objective,
    pub class: ValueClass,
}

impl Objective {
    /// Input and output legs of the strategies this objective scores.
    pub fn legs(&self) -> Result<(LegSystem, LegSystem)> {
        match self {
            Objective::Implication(g) => {
                let (i, o) = (g.p().legs().clone(), g.q().legs().clone());
                if i.len() != 2 || o.len() != 2 {
                    return Err(Error::DimensionMismatch("value problems need two input and two output legs".into()));
                }
                Ok((i, o))
            }
            Objective::Classical(g) => {
                let [x, y, a, b] = g.sizes();
                Ok((LegSystem::of(&[("x", x), ("y", y)])?, LegSystem::of(&[("a", a), ("b", b)])?))
            }
        }
    }

    /// `W` with `value(C) = Re Tr(C W)`.
    pub fn weight(&self) -> CMatrix {
        match self {
            // Tr(Φ(P)Q) = Σ C[(x,a),(x',a')] P[x,x'] Q[a',a]
            Objective::Implication(g) => g.p().data().transpose().kronecker(g.q().data()),
            Objective::Classical(g) => {
                let [x, y, a, b] = g.sizes();
                let (ni, no) = (x * y, a * b);
                let mut w = CMatrix::zeros(ni * no, ni * no);
                for xy in 0..ni {
                    for ab in 0..no {
                        if g.wins(xy, ab) {
                            w[(xy * no + ab, xy * no + ab)] = C64::new(g.prior()[xy], 0.0);
                        }
                    }
                }
                w
            }
        }
    }

    /// A bound no channel can beat: `Tr P`, or 1 for a winning probability.
    pub fn trivial_upper_bound(&self) -> f64 {
        match self {
            Objective::Implication(g) => g.p().data().trace().re,
            Objective::Classical(_) => 1.0,
        }
    }
}

/// `Tr(Φ(P) Q)` for a correlation on the game's legs.
pub fn evaluate_value(c: &Correlation, game: &ImplicationGame) -> Result<f64> {
    game.value(c.channel())
}

/// `Tr(C W)` for any objective.
pub fn evaluate_objective(c: &Channel, objective: &Objective) -> Result<f64> {
    let (i, o) = objective.legs()?;
    if c.in_legs().sizes() != i.sizes() || c.out_legs().sizes() != o.sizes() {
        return Err(Error::DimensionMismatch("strategy and objective legs differ".into()));
    }
    Ok(hs(c.choi_data(), &objective.weight()))
}

/// Exact local value of a classical game: the best deterministic pair
/// `f: X → A`, `g: Y → B`.
pub fn loc_value_classical(game: &ClassicalGame) -> Result<f64> {
    Ok(best_deterministic(game)?.value)
}

/// A deterministic classical strategy `a = f(x)`, `b = g(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicStrategy {
    pub value: f64,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl DeterministicStrategy {
    /// Choi matrix of the embedded channel, legs `x, y | a, b`.
    pub fn choi(&self, sizes: [usize; 4]) -> CMatrix {
        let [x, y, a, b] = sizes;
        let n = x * y * a * b;
        let mut m = CMatrix::zeros(n, n);
        for xi in 0..x {
            for yi in 0..y {
                let k = ((xi * y + yi) * a + self.f[xi]) * b + self.g[yi];
                m[(k, k)] = C64::new(1.0, 0.0);
            }
        }
        m
    }
}

/// Best deterministic strategy by enumerating `f` and choosing `g` per `y`.
pub fn best_deterministic(game: &ClassicalGame) -> Result<DeterministicStrategy> {
    let [x, y, a, b] = game.sizes();
    let count = (a as u128).checked_pow(x as u32).and_then(|p| p.checked_mul((b as u128).checked_pow(y as u32)?));
    match count {
        Some(n) if n <= MAX_DETERMINISTIC_PAIRS => {}
        _ => return Err(Error::TooLarge(format!("|A|^|X|·|B|^|Y| exceeds {MAX_DETERMINISTIC_PAIRS}"))),
    }
    let mut f = vec![0usize; x];
    let mut best = DeterministicStrategy { value: f64::NEG_INFINITY, f: f.clone(), g: vec![0; y] };
    loop {
        // for fixed f the best g decouples over y
        let mut v = 0.0;
        let mut g = vec![0usize; y];
        for (yi, gy) in g.iter_mut().enumerate() {
            let mut best_b = f64::NEG_INFINITY;
            for bi in 0..b {
                let mut s = 0.0;
                for xi in 0..x {
                    let xy = xi * y + yi;
                    if game.wins(xy, f[xi] * b + bi) {
                        s += game.prior()[xy];
                    }
                }
                if s > best_b {
                    best_b = s;
                    *gy = bi;
                }
            }
            v += best_b;
        }
        if v > best.value {
            best = DeterministicStrategy { value: v, f: f.clone(), g };
        }
        if !next_function(&mut f, a) {
            break;
        }
    }
    Ok(best)
}

fn next_function(f: &mut [usize], range: usize) -> bool {
    for v in f.iter_mut().rev() {
        *v += 1;
        if *v < range {
            return true;
        }
        *v = 0;
    }
    false
}

/// Outcome of one feasibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Feasible,
    /// The constraint violation stopped decreasing above `tol_feas`.
    Infeasible,
    /// `max_iter` ran out while the violation was still decreasing.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BisectionStep {
    /// `"primal"` or `"dual"`.
    pub side: &'static str,
    pub target: f64,
    pub outcome: StepOutcome,
    pub iterations: usize,
    pub violation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Certified gap `upper − value` within `tol_value`.
    Converged,
    NotConverged,
}

#[derive(Clone, Debug)]
pub struct NsValue {
    /// Objective of the certified witness.
    pub value: f64,
    /// Certified upper bound from a dual point.
    pub upper: f64,
    /// Smallest target on which the feasibility search gave up.
    pub bracket_hi: f64,
    /// An exactly PSD, trace-preserving, no-signalling strategy attaining `value`.
    pub witness: Correlation,
    pub status: SolveStatus,
    pub steps: Vec<BisectionStep>,
}

/// The affine set `A` and the objective, in the Choi coordinates of one problem.
struct Geometry {
    sizes: [usize; 4],
    n: usize,
    /// `I / (|A||B|)`, the completely depolarizing strategy; lies in `A`.
    center: CMatrix,
    weight: CMatrix,
}

impl Geometry {
    fn new(objective: &Objective) -> Result<Self> {
        let (i, o) = objective.legs()?;
        let [x, y] = [i.legs()[0].size, i.legs()[1].size];
        let [a, b] = [o.legs()[0].size, o.legs()[1].size];
        let n = x * y * a * b;
        let weight = objective.weight();
        let center = CMatrix::identity(n, n) * C64::new(1.0 / (a * b) as f64, 0.0);
        Ok(Geometry { sizes: [x, y, a, b], n, center, weight })
    }

    /// `I_k/|k| ⊗ Tr_k(m)`, placed back on leg `k` (legs ordered x, y, a, b).
    fn leg_average(&self, m: &CMatrix, k: usize) -> CMatrix {
        let s = self.sizes[k];
        let stride: usize = self.sizes[k + 1..].iter().product();
        let mut out = CMatrix::zeros(self.n, self.n);
        let inv = 1.0 / s as f64;
        for r in 0..self.n {
            let dr = (r / stride) % s;
            let r0 = r - dr * stride;
            for c in 0..self.n {
                let dc = (c / stride) % s;
                if dr != dc {
                    continue;
                }
                let c0 = c - dc * stride;
                let mut acc = C64::new(0.0, 0.0);
                for v in 0..s {
                    acc += m[(r0 + v * stride, c0 + v * stride)];
                }
                out[(r, c)] = acc * inv;
            }
        }
        out
    }

    /// Orthogonal projection onto the linear part of `A`. The three factors
    /// are polynomials in commuting leg averages, so their product is the
    /// projection onto the intersection.
    fn linear_part(&self, m: &CMatrix) -> CMatrix {
        let (x, y, a, b) = (0, 1, 2, 3);
        let ea = self.leg_average(m, a);
        let m = m - &ea + self.leg_average(&ea, x);
        let eb = self.leg_average(&m, b);
        let m = &m - &eb + self.leg_average(&eb, y);
        let eab = self.leg_average(&self.leg_average(&m, a), b);
        m - eab
    }

    /// Nearest point of the primal affine set `A`, or of the dual set
    /// `{Z : Z + W ⊥ lin(A)}`.
    fn project_affine(&self, side: Side, m: &CMatrix) -> CMatrix {
        let h = crate::tensor::hermitian_part(m);
        match side {
            Side::Primal => &self.center + self.linear_part(&h),
            Side::Dual => {
                let shifted = h + &self.weight;
                &shifted - self.linear_part(&shifted) - &self.weight
            }
        }
    }

    /// The halfspace `⟨m, normal⟩ ≥ level` encoding "objective ≥ t" on the
    /// primal side and "bound ≤ t" on the dual side.
    fn halfspace(&self, side: Side, t: f64) -> (CMatrix, f64) {
        match side {
            Side::Primal => (self.weight.clone(), t),
            Side::Dual => (-&self.center, hs(&self.center, &self.weight) - t),
        }
    }

    fn objective(&self, m: &CMatrix) -> f64 {
        hs(m, &self.weight)
    }

    /// Mixes an affine point with the center until it is PSD.
    fn certify(&self, y: &CMatrix) -> CMatrix {
        let eps = (-hermitian_eigenvalues(y)[0]).max(0.0);
        let mu = 1.0 / (self.sizes[2] * self.sizes[3]) as f64;
        let s = eps / (eps + mu);
        y * C64::new(1.0 - s, 0.0) + &self.center * C64::new(s, 0.0)
    }

    /// Upper bound certified by a dual-affine `z`. Writing `N = −W − z ⊥ lin(A)`,
    /// every feasible `C` has `⟨C,W⟩ = ⟨C,W+N⟩ − ⟨C₀,N⟩ ≤ XY·λ_max(−z) + ⟨C₀,W+z⟩`
    /// because `Tr C = XY`.
    fn dual_bound_of(&self, z: &CMatrix) -> f64 {
        let inputs = (self.sizes[0] * self.sizes[1]) as f64;
        -inputs * hermitian_eigenvalues(z)[0] + hs(&self.center, &(&self.weight + z))
    }

    /// Feasible dual start `λ_max(LW)·I − LW`.
    fn dual_start(&self) -> CMatrix {
        let lw = self.linear_part(&self.weight);
        let lmax = *hermitian_eigenvalues(&lw).last().unwrap_or(&0.0);
        CMatrix::identity(self.n, self.n) * C64::new(lmax, 0.0) - lw
    }

    /// The best replacement channel `ρ ↦ Tr(ρ) σ`: every such channel is
    /// no-signalling, and the optimal `σ` is a top eigenvector of `Tr_{XY} W`.
    fn best_replacement(&self) -> CMatrix {
        let (ni, no) = (self.sizes[0] * self.sizes[1], self.sizes[2] * self.sizes[3]);
        let mut reduced = CMatrix::zeros(no, no);
        for i in 0..ni {
            reduced += self.weight.view((i * no, i * no), (no, no));
        }
        let (_, vecs) = hermitian_eigen(&reduced);
        let top = vecs.column(no - 1);
        CMatrix::identity(ni, ni).kronecker(&(top * top.adjoint()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Primal,
    Dual,
}

fn psd_part(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += col * col.adjoint() * C64::new(v, 0.0);
        }
    }
    out
}

/// `Re Tr(a b)` for Hermitian arguments.
fn hs(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(p, q)| (p * q).re).sum()
}

/// Violations are sampled every `CHECK_EVERY` iterations; a window of
/// `STALL_WINDOW` samples without a 2% improvement ends the search.
const CHECK_EVERY: usize = 10;
const STALL_WINDOW: usize = 20;

/// Cyclic Dykstra over the affine set, the PSD cone and the halfspace of one
/// side at level `t`. Returns the last affine iterate.
fn feasibility(geo: &Geometry, side: Side, t: f64, start: &CMatrix, cfg: &SolverConfig) -> (StepOutcome, CMatrix, usize, f64) {
    let n = geo.n;
    let (normal, level) = geo.halfspace(side, t);
    let normal_sq = hs(&normal, &normal);
    let mut x = start.clone();
    let mut p_psd = CMatrix::zeros(n, n);
    let mut p_half = CMatrix::zeros(n, n);
    let mut history: Vec<f64> = Vec::new();
    let mut y = geo.project_affine(side, &x);
    let mut viol = f64::INFINITY;
    for it in 0..cfg.max_iter {
        y = geo.project_affine(side, &x);
        if it % CHECK_EVERY == 0 {
            let lmin = hermitian_eigenvalues(&y)[0];
            viol = (-lmin).max(level - hs(&y, &normal)).max(0.0);
            if viol <= cfg.tol_feas {
                return (StepOutcome::Feasible, y, it, viol);
            }
            history.push(viol);
            if history.len() > STALL_WINDOW {
                let old = history[history.len() - 1 - STALL_WINDOW];
                if viol > 0.98 * old {
                    return (StepOutcome::Infeasible, y, it, viol);
                }
            }
        }
        let z = psd_part(&(&y + &p_psd));
        p_psd = &y + &p_psd - &z;
        let w = &z + &p_half;
        let gap = level - hs(&w, &normal);
        x = if gap > 0.0 && normal_sq > 0.0 { &w + &normal * C64::new(gap / normal_sq, 0.0) } else { w.clone() };
        p_half = &w - &x;
    }
    (StepOutcome::Unresolved, y, cfg.max_iter, viol)
}

/// No-signalling value by bisection on the objective level. Each target is
/// first tested for a primal strategy reaching it and, failing that, for a
/// dual point bounding the value below it. Both ends of the final bracket are
/// certified: `value` is attained by the returned witness and `upper` is a
/// proven bound, so `Converged` means the true value lies within `tol_value`.
pub fn ns_value(objective: &Objective, cfg: &SolverConfig) -> Result<NsValue> {
    if cfg.tol_feas <= 0.0 || cfg.tol_value <= 0.0 {
        return Err(Error::Unsupported("solver tolerances must be positive".into()));
    }
    let geo = Geometry::new(objective)?;
    if geo.n > MAX_SOLVER_DIM {
        return Err(Error::TooLarge(format!("Choi dimension {} exceeds {MAX_SOLVER_DIM}", geo.n)));
    }
    let mut dual = geo.dual_start();
    let mut upper = geo.dual_bound_of(&dual).min(objective.trivial_upper_bound());
    let mut best = geo.center.clone();
    let mut lo = geo.objective(&best);
    let mut seeds = vec![geo.best_replacement()];
    if let Objective::Classical(game) = objective {
        // deterministic strategies are no-signalling, so ns ≥ loc holds by construction
        match best_deterministic(game) {
            Ok(d) => seeds.push(d.choi(game.sizes())),
            Err(Error::TooLarge(_)) => {}
            Err(e) => return Err(e),
        }
    }
    for seed in seeds {
        if geo.objective(&seed) > lo {
            lo = geo.objective(&seed);
            best = seed;
        }
    }
    // hi also moves on uncertified failures, so the search cannot stall on
    // a target neither side resolves
    let mut hi = upper;
    let mut steps = Vec::new();
    let mut target = hi;
    for _ in 0..=cfg.bisection_depth {
        if upper - lo <= cfg.tol_value || hi - lo <= 0.1 * cfg.tol_value {
            break;
        }
        let (outcome, y, iterations, violation) = feasibility(&geo, Side::Primal, target, &best, cfg);
        steps.push(BisectionStep { side: "primal", target, outcome, iterations, violation });
        if outcome == StepOutcome::Feasible {
            let c = geo.certify(&y);
            let v = geo.objective(&c);
            if v > lo {
                lo = v;
                best = c;
            }
        } else {
            let (outcome, z, iterations, violation) = feasibility(&geo, Side::Dual, target, &dual, cfg);
            steps.push(BisectionStep { side: "dual", target, outcome, iterations, violation });
            let bound = geo.dual_bound_of(&z);
            if bound < upper {
                upper = bound;
                dual = z;
            }
            hi = hi.min(target).min(upper);
        }
        target = 0.5 * (lo + hi);
    }
    let (i, o) = objective.legs()?;
    let channel = Channel::with_tol(i, o, best, cfg.tol_feas)?;
    let status = if upper - lo <= cfg.tol_value { SolveStatus::Converged } else { SolveStatus::NotConverged };
    Ok(NsValue { value: lo, upper: upper.max(lo), bracket_hi: hi, witness: Correlation::new(channel)?, status, steps })
}

/// Real coordinates of a Hermitian matrix in the basis described in the
/// module docs.
pub fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let r2 = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
        for j in i + 1..n {
            v.push(r2 * m[(i, j)].re);
            v.push(r2 * m[(i, j)].im);
        }
    }
    v
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(v: &[f64], n: usize) -> Result<CMatrix> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch(format!("{} coordinates for dimension {n}", v.len())));
    }
    let r2 = std::f64::consts::SQRT_2;
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = C64::new(v[k], 0.0);
        k += 1;
        for j in i + 1..n {
            let z = C64::new(v[k] / r2, v[k + 1] / r2);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    Ok(m)
}

/// Sizes of an exported problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpaSummary {
    pub variables: usize,
    /// Independent equality constraints (each written as two LP rows).
    pub equalities: usize,
    pub block_struct: Vec<i64>,
}

/// Independent real equality rows `r·x = b` cutting out `A`.
fn affine_rows(geo: &Geometry) -> Vec<(Vec<f64>, f64)> {
    let n = geo.n;
    let m = n * n;
    let mut cols = CMatrix::zeros(m, m);
    let mut unit = vec![0.0; m];
    for k in 0..m {
        unit[k] = 1.0;
        let b = from_hermitian_coords(&unit, n).expect("square");
        unit[k] = 0.0;
        let img = &b - geo.linear_part(&b);
        for (r, v) in hermitian_coords(&img).into_iter().enumerate() {
            cols[(r, k)] = C64::new(v, 0.0);
        }
    }
    let (u, s, _) = thin_svd(&cols);
    let smax = s.first().copied().unwrap_or(0.0);
    let x0 = hermitian_coords(&geo.center);
    (0..s.len())
        .filter(|&k| s[k] > ROW_CUTOFF * smax)
        .map(|k| {
            let row: Vec<f64> = (0..m).map(|r| u[(r, k)].re).collect();
            let rhs = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
            (row, rhs)
        })
        .collect()
}

/// Writes the no-signalling SDP of `problem` in SDPA sparse format.
pub fn export_sdpa(problem: &ValueProblem, out: &mut impl std::io::Write) -> Result<SdpaSummary> {
    if problem.class != ValueClass::Ns {
        return Err(Error::Unsupported("only no-signalling problems are exported".into()));
    }
    let geo = Geometry::new(&problem.objective)?;
    let n = geo.n;
    if n > MAX_EXPORT_DIM {
        return Err(Error::TooLarge(format!("Choi dimension {n} exceeds {MAX_EXPORT_DIM}")));
    }
    let rows = affine_rows(&geo);
    let vars = n * n;
    let lp = 2 * rows.len();
    let cost: Vec<f64> = hermitian_coords(&geo.weight).into_iter().map(|w| -w).collect();
    let mut s = String::new();
    let _ = writeln!(s, "* no-signalling value SDP, Choi dimension {n}");
    let _ = writeln!(s, "* block 1: real embedding of the Choi matrix; block 2: equalities as paired inequalities");
    let _ = writeln!(s, "{vars}");
    let _ = writeln!(s, "2");
    let _ = writeln!(s, "{} -{}", 2 * n, lp);
    let _ = writeln!(s, "{}", cost.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(" "));
    for (k, (_, rhs)) in rows.iter().enumerate() {
        if *rhs != 0.0 {
            let _ = writeln!(s, "0 2 {} {} {:e}", 2 * k + 1, 2 * k + 1, rhs);
            let _ = writeln!(s, "0 2 {} {} {:e}", 2 * k + 2, 2 * k + 2, -rhs);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut var = 0;
    for i in 0..n {
        var += 1;
        let _ = writeln!(s, "{var} 1 {} {} 1e0", i + 1, i + 1);
        let _ = writeln!(s, "{var} 1 {} {} 1e0", n + i + 1, n + i + 1);
        write_lp_column(&mut s, var, &rows);
        for j in i + 1..n {
            var += 1;
            let _ = writeln!(s, "{var} 1 {} {} {h:e}", i + 1, j + 1);
            let _ = writeln!(s, "{var} 1 {} {} {h:e}", n + i + 1, n + j + 1);
            write_lp_column(&mut s, var, &rows);
            var += 1;
            let _ = writeln!(s, "{var} 1 {} {} {:e}", i + 1, n + j + 1, -h);
            let _ = writeln!(s, "{var} 1 {} {} {h:e}", j + 1, n + i + 1);
            write_lp_column(&mut s, var, &rows);
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(SdpaSummary { variables: vars, equalities: rows.len(), block_struct: vec![2 * n as i64, -(lp as i64)] })
}

fn write_lp_column(s: &mut String, var: usize, rows: &[(Vec<f64>, f64)]) {
    for (k, (row, _)) in rows.iter().enumerate() {
        let a = row[var - 1];
        if a != 0.0 {
            let _ = writeln!(s, "{var} 2 {} {} {a:e}", 2 * k + 1, 2 * k + 1);
            let _ = writeln!(s, "{var} 2 {} {} {:e}", 2 * k + 2, 2 * k + 2, -a);
        }
    }
}

/// A parsed SDPA sparse problem: minimize `c·x` subject to
/// `Σ x_i F_i − F_0 ⪰ 0` blockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaProblem {
    pub c: Vec<f64>,
    pub block_struct: Vec<i64>,
    /// `(matrix, block, row, col, value)`, all 1-based except `matrix` (0 = `F_0`).
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

impl SdpaProblem {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('*') && !l.starts_with('"'));
        let clean = |l: &str| -> String { l.chars().map(|c| if "{}(),".contains(c) { ' ' } else { c }).collect() };
        let mut next = |what: &str| lines.next().map(clean).ok_or_else(|| Error::Format(format!("missing {what}")));
        let bad = |what: &str| Error::Format(format!("malformed {what}"));
        let m: usize = next("variable count")?.split_whitespace().next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("variable count"))?;
        let nb: usize = next("block count")?.split_whitespace().next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("block count"))?;
        let block_struct: Vec<i64> = next("block structure")?
            .split_whitespace()
            .take(nb)
            .map(|t| t.parse().map_err(|_| bad("block structure")))
            .collect::<Result<_>>()?;
        let c: Vec<f64> = next("cost vector")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("cost vector")))
            .collect::<Result<_>>()?;
        if block_struct.len() != nb || c.len() != m {
            return Err(bad("header"));
        }
        let mut entries = Vec::new();
        for l in lines {
            let l = clean(l);
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 5 {
                return Err(bad("entry"));
            }
            let idx = |k: usize| t[k].parse::<usize>().map_err(|_| bad("entry index"));
            let (mat, blk, i, j) = (idx(0)?, idx(1)?, idx(2)?, idx(3)?);
            let v: f64 = t[4].parse().map_err(|_| bad("entry value"))?;
            let size = *block_struct.get(blk.wrapping_sub(1)).ok_or_else(|| bad("block index"))?;
            if mat > m || i == 0 || j == 0 || i.max(j) > size.unsigned_abs() as usize {
                return Err(bad("entry index"));
            }
            entries.push((mat, blk, i, j, v));
        }
        Ok(SdpaProblem { c, block_struct, entries })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// `Σ x_i F_i − F_0` for each block, symmetrized from the upper triangle.
    pub fn slack(&self, x: &[f64]) -> Vec<CMatrix> {
        let mut blocks: Vec<CMatrix> = self
            .block_struct
            .iter()
            .map(|&s| CMatrix::zeros(s.unsigned_abs() as usize, s.unsigned_abs() as usize))
            .collect();
        for &(mat, blk, i, j, v) in &self.entries {
            let coef = if mat == 0 { -1.0 } else { x[mat - 1] };
            let b = &mut blocks[blk - 1];
            b[(i - 1, j - 1)] += C64::new(coef * v, 0.0);
            if i != j {
                b[(j - 1, i - 1)] += C64::new(coef * v, 0.0);
            }
        }
        blocks
    }

    /// Most negative eigenvalue over all slack blocks (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.slack(x)
            .iter()
            .map(|b| hermitian_eigenvalues(b).first().copied().unwrap_or(0.0))
            .fold(0.0_f64, |acc, l| acc.max(-l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::is_qns;
    use crate::random;
    use crate::tensor::LabeledMatrix;

    fn rank_one_game(seed: u64) -> ImplicationGame {
        let mut g = random::rng(seed);
        let il = LegSystem::of(&[("x", 2), ("y", 2)]).unwrap();
        let ol = LegSystem::of(&[("a", 2), ("b", 2)]).unwrap();
        let p = LabeledMatrix::new(il, random::projection(&mut g, 4, 1)).unwrap();
        let q = LabeledMatrix::new(ol, random::projection(&mut g, 4, 1)).unwrap();
        ImplicationGame::new(p, q, 1e-10).unwrap()
    }

    #[test]
    fn weight_reproduces_channel_value() {
        let game = rank_one_game(4);
        let mut g = random::rng(5);
        let c = random::channel(&mut g, game.p().legs(), game.q().legs(), 3).unwrap();
        let direct = game.value(&c).unwrap();
        let via_w = evaluate_objective(&c, &Objective::Implication(game)).unwrap();
        assert!((direct - via_w).abs() < 1e-12);
    }

    #[test]
    fn coords_round_trip() {
        let m = random::density(&mut random::rng(6), 5);
        let back = from_hermitian_coords(&hermitian_coords(&m), 5).unwrap();
        assert!((back - &m).norm() < 1e-14);
        // the basis is orthonormal: coordinates preserve the HS norm
        let v = hermitian_coords(&m);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - hs(&m, &m)).abs() < 1e-12);
    }

    #[test]
    fn affine_projection_lands_in_qns_set() {
        let game = rank_one_game(8);
        let geo = Geometry::new(&Objective::Implication(game)).unwrap();
        let junk = random::gaussian_matrix(&mut random::rng(9), 16, 16);
        let y = geo.project_affine(Side::Primal, &junk);
        // idempotent
        assert!((geo.project_affine(Side::Primal, &y) - &y).norm() < 1e-12);
        let c = geo.certify(&y);
        let ch = Channel::with_tol(
            LegSystem::of(&[("x", 2), ("y", 2)]).unwrap(),
            LegSystem::of(&[("a", 2), ("b", 2)]).unwrap(),
            c,
            1e-9,
        )
        .unwrap();
        assert!(is_qns(&Correlation::new(ch).unwrap(), 1e-12).pass());
    }

    #[test]
    fn chsh_local_value_is_three_quarters() {
        assert_eq!(loc_value_classical(&ClassicalGame::chsh()).unwrap(), 0.75);
    }

    #[test]
    fn best_deterministic_choi_attains_loc() {
        let game = ClassicalGame::chsh();
        let d = best_deterministic(&game).unwrap();
        let (i, o) = Objective::Classical(game.clone()).legs().unwrap();
        let c = Correlation::new(Channel::new(i, o, d.choi(game.sizes())).unwrap()).unwrap();
        assert!(is_qns(&c, 1e-12).pass());
        let v = evaluate_objective(c.channel(), &Objective::Classical(game)).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn loc_enumeration_cap() {
        let g = ClassicalGame::from_predicate([12, 1, 4, 1], |_, _, _, _| true).unwrap();
        assert!(matches!(loc_value_classical(&g), Err(Error::TooLarge(_))));
    }

    #[test]
    fn sdpa_parse_rejects_garbage() {
        assert!(SdpaProblem::parse("2\n1\n2\n1 2\n1 1 1 1 x\n").is_err());
        assert!(SdpaProblem::parse("").is_err());
    }
}
