//! Stochastic operator matrices `E = (E_{x,x',a,a'})` with entries in `M_d`.
//!
//! The block is stored as one [`LabeledMatrix`] over `(x_legs, a_legs, ancilla)`,
//! so the entry `E_{x,x',a,a'}` occupies rows `(x,a,·)` and columns `(x',a',·)`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::report::Report;
use crate::tensor::{
    hermitian_deviation, max_abs, max_abs_diff, min_eigenvalue, CMatrix, LabeledMatrix, Leg,
    LegSystem, C64, DEFAULT_TOL, ZERO,
};

/// Name of the ancilla leg inside every block matrix.
pub const ANCILLA: &str = "ancilla";

#[derive(Clone, Debug, PartialEq)]
pub struct StochOpMatrix {
    x_legs: LegSystem,
    a_legs: LegSystem,
    ancilla_dim: usize,
    block: LabeledMatrix,
}

impl StochOpMatrix {
    /// Validates positivity and `Tr_A = I` at `tol`.
    pub fn new(x_legs: LegSystem, a_legs: LegSystem, ancilla_dim: usize, block: CMatrix, tol: f64) -> Result<Self> {
        let e = Self::unchecked(x_legs, a_legs, ancilla_dim, block)?;
        let r = e.verify_stochastic(tol);
        if !r.get("psd").is_some_and(|c| c.pass) {
            return Err(Error::NotPsd(-r.get("psd").map_or(0.0, |c| c.violation)));
        }
        if !r.get("trace").is_some_and(|c| c.pass) {
            return Err(Error::NotTracePreserving(r.get("trace").map_or(0.0, |c| c.violation)));
        }
        Ok(e)
    }

    /// Shape checks only.
    pub fn unchecked(x_legs: LegSystem, a_legs: LegSystem, ancilla_dim: usize, block: CMatrix) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::EmptyLeg(ANCILLA.into()));
        }
        let legs = x_legs
            .concat(&a_legs)?
            .concat(&LegSystem::new(vec![Leg::new(ANCILLA, ancilla_dim)])?)?;
        let block = LabeledMatrix::new(legs, block)?;
        Ok(StochOpMatrix { x_legs, a_legs, ancilla_dim, block })
    }

    /// Builds the block from an entry function `f(x, x', a, a') ∈ M_d`.
    pub fn from_entries(
        x_legs: LegSystem,
        a_legs: LegSystem,
        ancilla_dim: usize,
        f: impl Fn(usize, usize, usize, usize) -> CMatrix,
    ) -> Result<Self> {
        let (nx, na, d) = (x_legs.dim(), a_legs.dim(), ancilla_dim);
        let mut block = CMatrix::zeros(nx * na * d, nx * na * d);
        for x in 0..nx {
            for xp in 0..nx {
                for a in 0..na {
                    for ap in 0..na {
                        let e = f(x, xp, a, ap);
                        if e.nrows() != d || e.ncols() != d {
                            return Err(Error::DimensionMismatch(format!("entry of size {}x{}, ancilla {d}", e.nrows(), e.ncols())));
                        }
                        let (r0, c0) = ((x * na + a) * d, (xp * na + ap) * d);
                        block.view_mut((r0, c0), (d, d)).copy_from(&e);
                    }
                }
            }
        }
        Self::unchecked(x_legs, a_legs, ancilla_dim, block)
    }

    /// The Choi matrix of a channel read as a `d = 1` stochastic matrix.
    pub fn from_channel(c: &Channel) -> Self {
        Self::unchecked(c.in_legs().clone(), c.out_legs().clone(), 1, c.choi_data().clone())
            .expect("channel legs are disjoint from the ancilla")
    }

    pub fn x_legs(&self) -> &LegSystem {
        &self.x_legs
    }

    pub fn a_legs(&self) -> &LegSystem {
        &self.a_legs
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn block(&self) -> &LabeledMatrix {
        &self.block
    }

    /// `E_{x,x',a,a'}` for flat indices over the x and a legs.
    pub fn entry(&self, x: usize, xp: usize, a: usize, ap: usize) -> CMatrix {
        let (na, d) = (self.a_legs.dim(), self.ancilla_dim);
        self.block
            .data()
            .view(((x * na + a) * d, (xp * na + ap) * d), (d, d))
            .into_owned()
    }

    /// Renames the x and a legs (ancilla keeps its name).
    pub fn renamed(&self, x_names: &[&str], a_names: &[&str]) -> Result<Self> {
        Self::unchecked(
            self.x_legs.renamed(x_names)?,
            self.a_legs.renamed(a_names)?,
            self.ancilla_dim,
            self.block.data().clone(),
        )
    }

    /// Checks positivity (`λ_min ≥ −tol·dim`) and `Tr_A(E) = I_X ⊗ I_d`.
    pub fn verify_stochastic(&self, tol: f64) -> Report {
        let mut r = Report::new();
        let herm = hermitian_deviation(self.block.data());
        let lmin = min_eigenvalue(self.block.data());
        let psd_ok = herm <= tol && lmin >= -tol * self.block.dim() as f64;
        r.record("psd", herm.max(-lmin).max(0.0), psd_ok);
        let t = self.block.partial_trace(&self.a_legs.names()).expect("own legs");
        r.check("trace", max_abs_diff(t.data(), &CMatrix::identity(t.dim(), t.dim())), tol);
        r
    }

    /// `‖Tr_X(E) − I_A ⊗ I_d‖_max`.
    pub fn bistochastic_violation(&self) -> f64 {
        let t = self.block.partial_trace(&self.x_legs.names()).expect("own legs");
        max_abs_diff(t.data(), &CMatrix::identity(t.dim(), t.dim()))
    }

    /// `I_before ⊗ E ⊗ I_after` on the enlarged ancilla.
    pub fn embed_ancilla(&self, before: usize, after: usize) -> Self {
        let ib = CMatrix::identity(before, before);
        let ia = CMatrix::identity(after, after);
        Self::from_entries(self.x_legs.clone(), self.a_legs.clone(), before * self.ancilla_dim * after, |x, xp, a, ap| {
            ib.kronecker(&self.entry(x, xp, a, ap)).kronecker(&ia)
        })
        .expect("consistent shapes")
    }

    /// Largest commutator `‖[E_i, F_j]‖_max` over all entry pairs.
    pub fn commutation_violation(&self, other: &StochOpMatrix) -> f64 {
        if self.ancilla_dim != other.ancilla_dim {
            return f64::INFINITY;
        }
        let es = self.all_entries();
        let fs = other.all_entries();
        let mut worst: f64 = 0.0;
        for e in &es {
            for f in &fs {
                worst = worst.max(max_abs(&(e * f - f * e)));
            }
        }
        worst
    }

    fn all_entries(&self) -> Vec<CMatrix> {
        let (nx, na) = (self.x_legs.dim(), self.a_legs.dim());
        let mut v = Vec::with_capacity(nx * nx * na * na);
        for x in 0..nx {
            for xp in 0..nx {
                for a in 0..na {
                    for ap in 0..na {
                        v.push(self.entry(x, xp, a, ap));
                    }
                }
            }
        }
        v
    }
}

fn product_matrix(
    e: &StochOpMatrix,
    f: &StochOpMatrix,
    d: usize,
    combine: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
) -> Result<StochOpMatrix> {
    let x_legs = e.x_legs.concat(&f.x_legs)?;
    let a_legs = e.a_legs.concat(&f.a_legs)?;
    let (ny, nb) = (f.x_legs.dim(), f.a_legs.dim());
    let fe: Vec<CMatrix> = f.all_entries();
    let idx = |y: usize, yp: usize, b: usize, bp: usize| ((y * ny + yp) * nb + b) * nb + bp;
    StochOpMatrix::from_entries(x_legs, a_legs, d, |xy, xyp, ab, abp| {
        let (x, y, xp, yp) = (xy / ny, xy % ny, xyp / ny, xyp % ny);
        let (a, b, ap, bp) = (ab / nb, ab % nb, abp / nb, abp % nb);
        combine(&e.entry(x, xp, a, ap), &fe[idx(y, yp, b, bp)])
    })
}

/// `E·F` over `(XY, AB)` with entries `E_{x,x',a,a'} F_{y,y',b,b'}`; requires
/// a common ancilla and commuting entries.
pub fn dot(e: &StochOpMatrix, f: &StochOpMatrix, tol: f64) -> Result<StochOpMatrix> {
    if e.ancilla_dim != f.ancilla_dim {
        return Err(Error::DimensionMismatch("dot needs a common ancilla".into()));
    }
    let comm = e.commutation_violation(f);
    if comm > tol {
        return Err(Error::Commutation(comm));
    }
    product_matrix(e, f, e.ancilla_dim, |a, b| a * b)
}

/// `E ⊙ F` over `(XY, AB)` with entries `E_{..} ⊗ F_{..}` on the product ancilla.
pub fn odot(e: &StochOpMatrix, f: &StochOpMatrix) -> Result<StochOpMatrix> {
    product_matrix(e, f, e.ancilla_dim * f.ancilla_dim, |a, b| a.kronecker(b))
}

/// Validates a density matrix on the ancilla.
pub(crate) fn check_state(sigma: &CMatrix, dim: usize, tol: f64) -> Result<()> {
    if sigma.nrows() != dim || sigma.ncols() != dim {
        return Err(Error::InvalidState(format!("expected a {dim}x{dim} matrix")));
    }
    let herm = hermitian_deviation(sigma);
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
    }
    let lmin = min_eigenvalue(sigma);
    if lmin < -tol * dim as f64 {
        return Err(Error::InvalidState(format!("negative eigenvalue {lmin:e}")));
    }
    let t = sigma.trace();
    if (t - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::InvalidState(format!("trace {t}")));
    }
    Ok(())
}

/// `Γ_{E,σ}`: `choi[(x,a),(x',a')] = Σ_{k,k'} σ[k',k] · E_{x,x',a,a'}[k,k']`,
/// which is `⟨E_{x,x',a,a'} ξ, ξ⟩` for `σ = ξξ*`.
pub fn channel_from(e: &StochOpMatrix, sigma: &CMatrix) -> Result<Channel> {
    check_state(sigma, e.ancilla_dim, DEFAULT_TOL)?;
    let choi = e.block.slice(&[ANCILLA], sigma)?;
    Channel::new(e.x_legs.clone(), e.a_legs.clone(), choi.into_data())
}

/// A stochastic matrix over `(X·Y, A·B)` recorded together with where the
/// first party's legs end inside `x_legs` and `a_legs`.
#[derive(Clone, Debug, PartialEq)]
pub struct StronglyStochOpMatrix {
    matrix: StochOpMatrix,
    x_split: usize,
    a_split: usize,
}

impl StronglyStochOpMatrix {
    /// Verifies strong stochasticity at `tol`.
    pub fn new(matrix: StochOpMatrix, x_split: usize, a_split: usize, tol: f64) -> Result<Self> {
        let s = Self::unchecked(matrix, x_split, a_split)?;
        let r = s.verify(tol);
        if !r.pass() {
            return Err(Error::Inconsistent {
                what: "strong stochasticity".into(),
                deviation: r.max_violation(),
            });
        }
        Ok(s)
    }

    pub fn unchecked(matrix: StochOpMatrix, x_split: usize, a_split: usize) -> Result<Self> {
        if x_split > matrix.x_legs.len() || a_split > matrix.a_legs.len() {
            return Err(Error::DimensionMismatch("split beyond the leg list".into()));
        }
        Ok(StronglyStochOpMatrix { matrix, x_split, a_split })
    }

    pub fn matrix(&self) -> &StochOpMatrix {
        &self.matrix
    }

    /// Number of first-party legs in `x_legs` and in `a_legs`.
    pub fn splits(&self) -> (usize, usize) {
        (self.x_split, self.a_split)
    }

    fn sides(&self) -> (Vec<&str>, Vec<&str>, Vec<&str>, Vec<&str>) {
        let xs = self.matrix.x_legs.names();
        let as_ = self.matrix.a_legs.names();
        (
            xs[..self.x_split].to_vec(),
            xs[self.x_split..].to_vec(),
            as_[..self.a_split].to_vec(),
            as_[self.a_split..].to_vec(),
        )
    }

    pub fn verify(&self, tol: f64) -> Report {
        verify_strongly_stochastic(&self.matrix, self.x_split, self.a_split, tol)
    }

    /// First-party marginal `Tr_B(L_{ε_{00}}(P))` over `(X, A)`.
    pub fn left_marginal(&self) -> Result<StochOpMatrix> {
        let (x, y, a, b) = self.sides();
        side_marginal(&self.matrix, &x, &y, &a, &b, 0, 0)
    }

    /// Second-party marginal `Tr_A(L_{ε_{00}}(P))` over `(Y, B)`.
    pub fn right_marginal(&self) -> Result<StochOpMatrix> {
        let (x, y, a, b) = self.sides();
        side_marginal(&self.matrix, &y, &x, &b, &a, 0, 0)
    }
}

/// `Tr_{traced}(L_{ε_{s s'}}(P))` as a matrix over `(keep_x, keep_a, ancilla)`,
/// where `ε_{ss'}` lives on `sliced` and picks the `(s', s)` block.
fn side_marginal(
    p: &StochOpMatrix,
    keep_x: &[&str],
    sliced: &[&str],
    keep_a: &[&str],
    traced: &[&str],
    s: usize,
    sp: usize,
) -> Result<StochOpMatrix> {
    let sl = p.x_legs.select(sliced)?;
    let mut sigma = CMatrix::zeros(sl.dim(), sl.dim());
    sigma[(s, sp)] = C64::new(1.0, 0.0);
    let m = p.block.slice(sliced, &sigma)?.partial_trace(traced)?;
    let order: Vec<&str> = keep_x.iter().chain(keep_a).copied().chain([ANCILLA]).collect();
    let m = m.permute_legs(&order)?;
    StochOpMatrix::unchecked(p.x_legs.select(keep_x)?, p.a_legs.select(keep_a)?, p.ancilla_dim, m.into_data())
}

/// Tests strong stochasticity on the matrix-unit basis: every slice
/// `Tr_B(L_{ε_{yy'}}(P))` must equal `δ_{yy'}` times a common stochastic
/// marginal over `(X, A)`, and symmetrically with the roles swapped.
pub fn verify_strongly_stochastic(p: &StochOpMatrix, x_split: usize, a_split: usize, tol: f64) -> Report {
    let mut r = Report::new();
    r.absorb("stochastic", p.verify_stochastic(tol));
    let xs = p.x_legs.names();
    let as_ = p.a_legs.names();
    let (x, y) = xs.split_at(x_split.min(xs.len()));
    let (a, b) = as_.split_at(a_split.min(as_.len()));
    for (label, keep_x, sliced, keep_a, traced) in [("left", x, y, a, b), ("right", y, x, b, a)] {
        let n = p.x_legs.select(sliced).map(|s| s.dim()).unwrap_or(1);
        let base = match side_marginal(p, keep_x, sliced, keep_a, traced, 0, 0) {
            Ok(m) => m,
            Err(_) => {
                r.record(format!("{label}.shape"), f64::INFINITY, false);
                continue;
            }
        };
        let mut dev: f64 = 0.0;
        for s in 0..n {
            for sp in 0..n {
                let m = side_marginal(p, keep_x, sliced, keep_a, traced, s, sp).expect("shape checked");
                let d = if s == sp {
                    max_abs_diff(m.block.data(), base.block.data())
                } else {
                    max_abs(m.block.data())
                };
                dev = dev.max(d);
            }
        }
        r.check(format!("{label}.state_independent"), dev, tol);
        r.absorb(&format!("{label}.marginal"), base.verify_stochastic(tol));
    }
    r
}

/// `F = L_{J_{X₁} ⊗ J_{A₁}}(E ⊗ P)`:
/// `F_{x₂x₂',a₂a₂'} = Σ E_{x₁x₁',a₁a₁'} ⊗ P^{x₁x₁',a₂a₂'}_{x₂x₂',a₁a₁'}`.
///
/// `e` is over `(X₁, A₁)`; `p` is over `(X₂·A₁, X₁·A₂)` with its splits marking
/// where `X₂` and `X₁` end.
pub fn compose_reps(e: &StochOpMatrix, p: &StronglyStochOpMatrix) -> Result<StochOpMatrix> {
    let pm = &p.matrix;
    let px = pm.x_legs.legs();
    let pa = pm.a_legs.legs();
    let x2 = LegSystem::new(px[..p.x_split].to_vec())?;
    let a1 = LegSystem::new(px[p.x_split..].to_vec())?;
    let x1 = LegSystem::new(pa[..p.a_split].to_vec())?;
    let a2 = LegSystem::new(pa[p.a_split..].to_vec())?;
    if x1.dim() != e.x_legs.dim() || a1.dim() != e.a_legs.dim() {
        return Err(Error::DimensionMismatch("middle alphabets of E and P differ".into()));
    }
    let (n1, m1, m2) = (x1.dim(), a1.dim(), a2.dim());
    let (dh, dk) = (e.ancilla_dim, pm.ancilla_dim);
    let e_entries = e.all_entries();
    let e_at = |x: usize, xp: usize, a: usize, ap: usize| &e_entries[((x * n1 + xp) * m1 + a) * m1 + ap];
    StochOpMatrix::from_entries(x2, a2, dh * dk, |x2i, x2p, a2i, a2p| {
        let mut acc = CMatrix::from_element(dh * dk, dh * dk, ZERO);
        for x1i in 0..n1 {
            for x1p in 0..n1 {
                for a1i in 0..m1 {
                    for a1p in 0..m1 {
                        let ee = e_at(x1i, x1p, a1i, a1p);
                        if max_abs(ee) == 0.0 {
                            continue;
                        }
                        let pe = pm.entry(x2i * m1 + a1i, x2p * m1 + a1p, x1i * m2 + a2i, x1p * m2 + a2p);
                        acc += ee.kronecker(&pe);
                    }
                }
            }
        }
        acc
    })
}

/// Diagonal operator matrix `P^{aa',bb'}_{xx',yy'} = δδδδ · p(ab|xy)` (d = 1).
pub fn classical_operator_matrix(p: &crate::classical::ClassicalCorrelation) -> Result<StochOpMatrix> {
    Ok(StochOpMatrix::from_channel(&crate::channel::classical_embed(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::tensor::{re, ONE};

    fn legs(n: &str) -> LegSystem {
        LegSystem::of(&[(n, 2)]).unwrap()
    }

    #[test]
    fn identity_block_is_stochastic() {
        let e = StochOpMatrix::from_channel(&Channel::identity(legs("x"), legs("a")).unwrap());
        assert!(e.verify_stochastic(DEFAULT_TOL).pass());
        let bad = StochOpMatrix::unchecked(legs("x"), legs("a"), 1, CMatrix::identity(4, 4) * re(0.7)).unwrap();
        let r = bad.verify_stochastic(DEFAULT_TOL);
        assert!(!r.pass());
        assert!((r.get("trace").unwrap().violation - 0.4).abs() < 1e-12);
    }

    #[test]
    fn pauli_entries_do_not_commute() {
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let half = re(0.5);
        let mk = |p: &CMatrix, xl: &str, al: &str| {
            let proj0 = (CMatrix::identity(2, 2) + p) * half;
            let proj1 = (CMatrix::identity(2, 2) - p) * half;
            StochOpMatrix::from_entries(LegSystem::of(&[(xl, 1)]).unwrap(), legs(al), 2, |_, _, a, ap| {
                if a != ap {
                    CMatrix::zeros(2, 2)
                } else if a == 0 {
                    proj0.clone()
                } else {
                    proj1.clone()
                }
            })
            .unwrap()
        };
        let e = mk(&x, "x", "a");
        let f = mk(&z, "y", "b");
        assert!(e.verify_stochastic(DEFAULT_TOL).pass());
        assert!(matches!(dot(&e, &f, DEFAULT_TOL), Err(Error::Commutation(_))));
    }

    #[test]
    fn block_diagonal_channel_from_is_mixture() {
        let mut r = random::rng(11);
        let c0 = random::channel(&mut r, &legs("x"), &legs("a"), 2).unwrap();
        let c1 = random::channel(&mut r, &legs("x"), &legs("a"), 3).unwrap();
        let e = StochOpMatrix::from_entries(legs("x"), legs("a"), 2, |x, xp, a, ap| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = c0.choi_data()[(x * 2 + a, xp * 2 + ap)];
            m[(1, 1)] = c1.choi_data()[(x * 2 + a, xp * 2 + ap)];
            m
        })
        .unwrap();
        assert!(e.verify_stochastic(DEFAULT_TOL).pass());
        let lam = 0.3;
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(lam), re(1.0 - lam)]));
        let got = channel_from(&e, &sigma).unwrap();
        let want = Channel::mixture(&[(lam, &c0), (1.0 - lam, &c1)]).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn scalar_ancilla_anchor() {
        let mut r = random::rng(2);
        let c = random::channel(&mut r, &legs("x"), &legs("a"), 2).unwrap();
        let e = StochOpMatrix::from_channel(&c);
        let back = channel_from(&e, &CMatrix::identity(1, 1)).unwrap();
        assert_eq!(back.choi_data(), c.choi_data());
    }
}
