//! Linear maps stored as Choi matrices.
//!
//! The Choi matrix is indexed by the input legs followed by the output legs:
//! `choi[(x,a),(x',a')] = Φ(ε_{xx'})[a,a']`.

use crate::classical::ClassicalCorrelation;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::tensor::{
    max_abs_diff, min_eigenvalue, re, CMatrix, LabeledMatrix, LegSystem,
    DEFAULT_TOL, ZERO,
};

/// Relative eigenvalue cutoff when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-10;

/// A completely positive map with declared input and output legs.
///
/// Values built through [`Channel::new`] or [`Channel::from_kraus`] are
/// trace preserving. Adjoints of non-unital channels are kept as general CP
/// maps; [`Channel::is_trace_preserving`] tells the two apart.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    in_legs: LegSystem,
    out_legs: LegSystem,
    choi: LabeledMatrix,
    trace_preserving: bool,
}

impl Channel {
    /// Validates positivity and trace preservation at [`DEFAULT_TOL`].
    pub fn new(in_legs: LegSystem, out_legs: LegSystem, choi: CMatrix) -> Result<Self> {
        Self::with_tol(in_legs, out_legs, choi, DEFAULT_TOL)
    }

    pub fn with_tol(in_legs: LegSystem, out_legs: LegSystem, choi: CMatrix, tol: f64) -> Result<Self> {
        let c = Self::cp_map(in_legs, out_legs, choi, tol)?;
        let tp = c.tp_violation();
        if tp > tol {
            return Err(Error::NotTracePreserving(tp));
        }
        Ok(Channel { trace_preserving: true, ..c })
    }

    /// A completely positive map that need not preserve trace.
    pub fn cp_map(in_legs: LegSystem, out_legs: LegSystem, choi: CMatrix, tol: f64) -> Result<Self> {
        let legs = in_legs.concat(&out_legs)?;
        let choi = LabeledMatrix::new(legs, choi)?;
        if !choi.is_psd(tol)? {
            return Err(Error::NotPsd(min_eigenvalue(choi.data())));
        }
        let mut c = Channel { in_legs, out_legs, choi, trace_preserving: false };
        c.trace_preserving = c.tp_violation() <= tol;
        Ok(c)
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn trusted(in_legs: LegSystem, out_legs: LegSystem, choi: CMatrix) -> Self {
        let legs = in_legs.concat(&out_legs).expect("disjoint leg names");
        let choi = LabeledMatrix::new(legs, choi).expect("choi dimension");
        Channel { in_legs, out_legs, choi, trace_preserving: true }
    }

    pub fn identity(in_legs: LegSystem, out_legs: LegSystem) -> Result<Self> {
        if in_legs.dim() != out_legs.dim() {
            return Err(Error::DimensionMismatch("identity channel needs equal dimensions".into()));
        }
        let j = LabeledMatrix::max_entangled(&in_legs, &out_legs)?;
        Ok(Channel { in_legs, out_legs, choi: j, trace_preserving: true })
    }

    /// Choi matrix `Σ_i vec(M_i) vec(M_i)*` with `vec(M)[(x,a)] = M[a,x]`.
    pub fn from_kraus(kraus: &[CMatrix], in_legs: LegSystem, out_legs: LegSystem) -> Result<Self> {
        let (n, m) = (in_legs.dim(), out_legs.dim());
        let mut completeness = CMatrix::zeros(n, n);
        let mut choi = CMatrix::zeros(n * m, n * m);
        for k in kraus {
            if k.nrows() != m || k.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {}x{} for a map {n} -> {m}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            completeness += k.adjoint() * k;
            let v = CMatrix::from_fn(n * m, 1, |i, _| k[(i % m, i / m)]);
            choi += &v * v.adjoint();
        }
        let dev = max_abs_diff(&completeness, &CMatrix::identity(n, n));
        if dev > DEFAULT_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let legs = in_legs.concat(&out_legs)?;
        Ok(Channel {
            in_legs,
            out_legs,
            choi: LabeledMatrix::new(legs, choi)?,
            trace_preserving: true,
        })
    }

    pub fn in_legs(&self) -> &LegSystem {
        &self.in_legs
    }

    pub fn out_legs(&self) -> &LegSystem {
        &self.out_legs
    }

    pub fn choi(&self) -> &LabeledMatrix {
        &self.choi
    }

    pub fn choi_data(&self) -> &CMatrix {
        self.choi.data()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn in_names(&self) -> Vec<&str> {
        self.in_legs.names()
    }

    pub fn out_names(&self) -> Vec<&str> {
        self.out_legs.names()
    }

    /// `‖Tr_out(choi) − I_in‖_max`.
    pub fn tp_violation(&self) -> f64 {
        let t = self.choi.partial_trace(&self.out_legs.names()).expect("own legs");
        max_abs_diff(t.data(), &CMatrix::identity(self.in_legs.dim(), self.in_legs.dim()))
    }

    /// `‖Φ(I) − I‖_max`, infinite if the dimensions differ.
    pub fn unital_violation(&self) -> f64 {
        if self.in_legs.dim() != self.out_legs.dim() {
            return f64::INFINITY;
        }
        let img = self.apply(&CMatrix::identity(self.in_legs.dim(), self.in_legs.dim()));
        max_abs_diff(&img.expect("square input"), &CMatrix::identity(self.out_legs.dim(), self.out_legs.dim()))
    }

    /// Kraus operators `√λ · unvec(v)` from the eigendecomposition of the
    /// Choi matrix, dropping eigenvalues below `KRAUS_CUTOFF · λ_max`.
    pub fn kraus_of(&self, tol: f64) -> Result<Vec<CMatrix>> {
        let (n, m) = (self.in_legs.dim(), self.out_legs.dim());
        let (vals, vecs) = hermitian_eigen(self.choi.data());
        let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
        let lmin = vals.first().copied().unwrap_or(0.0);
        if lmin < -tol * (n * m) as f64 {
            return Err(Error::NotPsd(lmin));
        }
        let mut out = Vec::new();
        for (i, &lam) in vals.iter().enumerate().rev() {
            if lam <= KRAUS_CUTOFF * lmax || lam <= 0.0 {
                continue;
            }
            let v = vecs.column(i);
            let s = re(lam.sqrt());
            out.push(CMatrix::from_fn(m, n, |a, x| v[x * m + a] * s));
        }
        Ok(out)
    }

    /// `Φ(ρ)[a,a'] = Σ_{x,x'} ρ[x,x'] · choi[(x,a),(x',a')]`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let n = self.in_legs.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "input of size {}x{} for a channel on dimension {n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self.choi.slice(&self.in_legs.names(), &rho.transpose())?.into_data())
    }

    /// Adjoint with respect to the bilinear pairing `Tr(S Tᵗ)`; its Choi is
    /// the original one with output legs moved first.
    pub fn adjoint(&self) -> Channel {
        let order: Vec<&str> = self.out_names().into_iter().chain(self.in_names()).collect();
        let choi = self.choi.permute_legs(&order).expect("own legs");
        let mut c = Channel {
            in_legs: self.out_legs.clone(),
            out_legs: self.in_legs.clone(),
            choi,
            trace_preserving: false,
        };
        c.trace_preserving = c.tp_violation() <= DEFAULT_TOL;
        c
    }

    /// `Δ_out ∘ Φ ∘ Δ_in`: keeps only the diagonal of the Choi matrix.
    pub fn delta_project(&self) -> Channel {
        let d = self.choi.dim();
        let data = CMatrix::from_fn(d, d, |i, j| if i == j { self.choi.data()[(i, i)] } else { ZERO });
        Channel {
            choi: LabeledMatrix::new(self.choi.legs().clone(), data).expect("same legs"),
            ..self.clone()
        }
    }

    /// Same map with legs renamed; names are given for inputs then outputs.
    pub fn renamed(&self, in_names: &[&str], out_names: &[&str]) -> Result<Channel> {
        let in_legs = self.in_legs.renamed(in_names)?;
        let out_legs = self.out_legs.renamed(out_names)?;
        let legs = in_legs.concat(&out_legs)?;
        Ok(Channel {
            in_legs,
            out_legs,
            choi: LabeledMatrix::new(legs, self.choi.data().clone())?,
            trace_preserving: self.trace_preserving,
        })
    }

    /// Reorders the input and output legs independently.
    pub fn reorder(&self, in_order: &[&str], out_order: &[&str]) -> Result<Channel> {
        let in_legs = self.in_legs.select(in_order)?;
        let out_legs = self.out_legs.select(out_order)?;
        if in_legs.len() != self.in_legs.len() || out_legs.len() != self.out_legs.len() {
            return Err(Error::NotAPermutation);
        }
        let order: Vec<&str> = in_order.iter().chain(out_order).copied().collect();
        let choi = self.choi.permute_legs(&order)?;
        Ok(Channel { in_legs, out_legs, choi, trace_preserving: self.trace_preserving })
    }

    /// `Φ ⊗ Ψ` with legs `(in_Φ, in_Ψ | out_Φ, out_Ψ)`.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let big = self.choi.tensor_product(&other.choi)?;
        let in_legs = self.in_legs.concat(&other.in_legs)?;
        let out_legs = self.out_legs.concat(&other.out_legs)?;
        let order: Vec<&str> = in_legs.names().into_iter().chain(out_legs.names()).collect();
        let choi = big.permute_legs(&order)?;
        Ok(Channel {
            in_legs,
            out_legs,
            choi,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        })
    }

    /// `Ψ ∘ Φ` where `next` acts on the outputs of `self`. The result keeps
    /// the input legs of `self` and output legs of `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.in_legs.dim() != self.out_legs.dim() {
            return Err(Error::DimensionMismatch("composition of incompatible maps".into()));
        }
        let (n, k) = (self.in_legs.dim(), next.out_legs.dim());
        let m = self.out_legs.dim();
        let mut choi = CMatrix::zeros(n * k, n * k);
        // choi[(x,c),(x',c')] = Σ_{a,a'} Φ(aa'|xx') Ψ(cc'|aa')
        for x in 0..n {
            for xp in 0..n {
                let mut block = CMatrix::zeros(m, m);
                for a in 0..m {
                    for ap in 0..m {
                        block[(a, ap)] = self.choi.data()[(x * m + a, xp * m + ap)];
                    }
                }
                let img = next.apply(&block)?;
                for c in 0..k {
                    for cp in 0..k {
                        choi[(x * k + c, xp * k + cp)] = img[(c, cp)];
                    }
                }
            }
        }
        let legs = self.in_legs.concat(&next.out_legs)?;
        Ok(Channel {
            in_legs: self.in_legs.clone(),
            out_legs: next.out_legs.clone(),
            choi: LabeledMatrix::new(legs, choi)?,
            trace_preserving: self.trace_preserving && next.trace_preserving,
        })
    }

    /// Convex combination `Σ w_j Φ_j` of maps with identical legs.
    pub fn mixture(parts: &[(f64, &Channel)]) -> Result<Channel> {
        let first = parts.first().ok_or_else(|| Error::InvalidWeights("empty mixture".into()))?.1;
        let mut choi = CMatrix::zeros(first.choi.dim(), first.choi.dim());
        for (w, c) in parts {
            if c.in_legs != first.in_legs || c.out_legs != first.out_legs {
                return Err(Error::DimensionMismatch("mixture of maps with different legs".into()));
            }
            choi += c.choi.data() * re(*w);
        }
        Channel::new(first.in_legs.clone(), first.out_legs.clone(), choi)
    }

    pub fn max_abs_diff(&self, other: &Channel) -> f64 {
        max_abs_diff(self.choi.data(), other.choi.data())
    }
}

/// Diagonal Choi matrix with `choi[((x),(a)),((x),(a))] = p(a|x)`.
pub fn classical_embed(p: &ClassicalCorrelation) -> Result<Channel> {
    let (n, m) = (p.inputs().dim(), p.outputs().dim());
    let mut choi = CMatrix::zeros(n * m, n * m);
    for x in 0..n {
        for a in 0..m {
            choi[(x * m + a, x * m + a)] = re(p.prob(x, a));
        }
    }
    Ok(Channel::trusted(p.inputs().clone(), p.outputs().clone(), choi))
}

/// Reads the diagonal of a Choi matrix back into a conditional distribution.
pub fn classical_restrict(c: &Channel) -> Result<ClassicalCorrelation> {
    let (n, m) = (c.in_legs.dim(), c.out_legs.dim());
    let table = (0..n)
        .map(|x| (0..m).map(|a| c.choi.data()[(x * m + a, x * m + a)].re).collect())
        .collect();
    ClassicalCorrelation::new(c.in_legs.clone(), c.out_legs.clone(), table)
}

/// `Σ_i M_i ρ M_i*`.
pub fn apply_kraus(kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let m = kraus.first().map_or(0, |k| k.nrows());
    kraus.iter().fold(CMatrix::zeros(m, m), |acc, k| acc + k * rho * k.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::tensor::{C64, ONE};

    fn x() -> LegSystem {
        LegSystem::of(&[("x", 2)]).unwrap()
    }
    fn a() -> LegSystem {
        LegSystem::of(&[("a", 2)]).unwrap()
    }

    fn units() -> Vec<CMatrix> {
        let mut v = Vec::new();
        for r in 0..2 {
            for c in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(r, c)] = re(0.5f64.sqrt());
                v.push(e);
            }
        }
        v
    }

    #[test]
    fn identity_kraus_gives_j() {
        let c = Channel::from_kraus(&[CMatrix::identity(2, 2)], x(), a()).unwrap();
        let j = LabeledMatrix::max_entangled(&x(), &a()).unwrap();
        assert_eq!(c.choi(), &j);
        assert_eq!(c, Channel::identity(x(), a()).unwrap());
    }

    #[test]
    fn depolarizing_from_units() {
        let c = Channel::from_kraus(&units(), x(), a()).unwrap();
        assert!(max_abs_diff(c.choi_data(), &(CMatrix::identity(4, 4) * re(0.5))) < 1e-15);
        let ks = c.kraus_of(DEFAULT_TOL).unwrap();
        assert_eq!(ks.len(), 4);
        for k in &ks {
            assert!((k.norm() - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let rho = CMatrix::from_fn(2, 2, |i, j| if i == j { re(0.5) } else { C64::new(0.1, 0.2 * (i as f64 - j as f64)) });
        let out = c.apply(&rho).unwrap();
        assert!(max_abs_diff(&out, &(CMatrix::identity(2, 2) * re(0.5))) < 1e-15);
    }

    #[test]
    fn dephasing_from_diagonal_projections() {
        let p0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ZERO]));
        let p1 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, ONE]));
        let c = Channel::from_kraus(&[p0, p1], x(), a()).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = ONE;
        expected[(3, 3)] = ONE;
        assert_eq!(c.choi_data(), &expected);
        assert_eq!(c.adjoint().choi_data(), c.choi_data());
        assert_eq!(c.delta_project(), c);
    }

    #[test]
    fn identity_kraus_is_identity() {
        let c = Channel::identity(x(), a()).unwrap();
        let ks = c.kraus_of(DEFAULT_TOL).unwrap();
        assert_eq!(ks.len(), 1);
        // eigenvector phase is arbitrary
        let k = &ks[0];
        let phase = k[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&(k / phase), &CMatrix::identity(2, 2)) < 1e-12);
        let adj = c.adjoint();
        assert_eq!(adj.choi_data(), c.choi_data());
        assert!(adj.is_trace_preserving());
        let proj = c.delta_project();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = ONE;
        expected[(3, 3)] = ONE;
        assert_eq!(proj.choi_data(), &expected);
    }

    #[test]
    fn completeness_is_enforced() {
        let err = Channel::from_kraus(&[CMatrix::identity(2, 2) * re(2.0)], x(), a());
        assert!(matches!(err, Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn adjoint_matches_pairing() {
        let mut r = random::rng(3);
        let c = random::unital_channel(&mut r, &x(), &a(), 3).unwrap();
        let adj = c.adjoint();
        assert!(adj.is_trace_preserving());
        let s = random::gaussian_matrix(&mut r, 2, 2);
        let t = random::gaussian_matrix(&mut r, 2, 2);
        let lhs: C64 = c.apply(&s).unwrap().iter().zip(t.iter()).map(|(p, q)| p * q).sum();
        let rhs: C64 = s.iter().zip(adj.apply(&t).unwrap().iter()).map(|(p, q)| p * q).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn non_unital_adjoint_is_flagged() {
        let mut r = random::rng(5);
        let c = random::channel(&mut r, &x(), &a(), 2).unwrap();
        let adj = c.adjoint();
        assert!(!adj.is_trace_preserving());
        let img = adj.apply(&CMatrix::identity(2, 2)).unwrap();
        assert!(max_abs_diff(&img, &CMatrix::identity(2, 2)) < 1e-10);
    }
}
