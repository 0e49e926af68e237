//! Leg-indexed dense complex matrices.
//!
//! Every square matrix in the crate carries a [`LegSystem`] describing how its
//! row (and column) index factors into named tensor legs. Flat indices are
//! row-major over the listed leg order, so the last leg runs fastest.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Entrywise default tolerance used throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub size: usize,
}

impl Leg {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Leg { name: name.into(), size }
    }
}

/// An ordered list of uniquely named legs.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Leg>", into = "Vec<Leg>")]
pub struct LegSystem {
    legs: Vec<Leg>,
}

impl TryFrom<Vec<Leg>> for LegSystem {
    type Error = Error;
    fn try_from(legs: Vec<Leg>) -> Result<Self> {
        LegSystem::new(legs)
    }
}

impl From<LegSystem> for Vec<Leg> {
    fn from(s: LegSystem) -> Self {
        s.legs
    }
}

impl LegSystem {
    pub fn new(legs: Vec<Leg>) -> Result<Self> {
        for (i, leg) in legs.iter().enumerate() {
            if leg.size == 0 {
                return Err(Error::EmptyLeg(leg.name.clone()));
            }
            if legs[..i].iter().any(|l| l.name == leg.name) {
                return Err(Error::LegCollision(leg.name.clone()));
            }
        }
        Ok(LegSystem { legs })
    }

    /// Convenience constructor from `(name, size)` pairs.
    pub fn of(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(n, s)| Leg::new(n, s)).collect())
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }

    /// Product of the leg sizes (1 for the empty system).
    pub fn dim(&self) -> usize {
        self.legs.iter().map(|l| l.size).product()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.legs.iter().map(|l| l.size).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.legs.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.legs.iter().position(|l| l.name == name)
    }

    pub fn size_of(&self, name: &str) -> Result<usize> {
        self.position(name)
            .map(|p| self.legs[p].size)
            .ok_or_else(|| Error::UnknownLeg(name.to_string()))
    }

    pub fn concat(&self, other: &LegSystem) -> Result<LegSystem> {
        let mut legs = self.legs.clone();
        legs.extend(other.legs.iter().cloned());
        LegSystem::new(legs)
    }

    /// The legs named in `names`, in that order.
    pub fn select(&self, names: &[&str]) -> Result<LegSystem> {
        let legs = names
            .iter()
            .map(|n| {
                self.position(n)
                    .map(|p| self.legs[p].clone())
                    .ok_or_else(|| Error::UnknownLeg(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        LegSystem::new(legs)
    }

    /// Same sizes, legs renamed.
    pub fn renamed(&self, names: &[&str]) -> Result<LegSystem> {
        if names.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} legs",
                names.len(),
                self.len()
            )));
        }
        LegSystem::new(
            self.legs
                .iter()
                .zip(names)
                .map(|(l, n)| Leg::new(*n, l.size))
                .collect(),
        )
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.len());
        self.legs
            .iter()
            .zip(multi)
            .fold(0, |acc, (l, &i)| acc * l.size + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, leg) in out.iter_mut().zip(&self.legs).rev() {
            *slot = flat % leg.size;
            flat /= leg.size;
        }
        out
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .position(n)
                .ok_or_else(|| Error::UnknownLeg(n.to_string()))?;
            if seen.contains(&p) {
                return Err(Error::LegCollision(n.to_string()));
            }
            seen.push(p);
        }
        Ok(seen)
    }

    /// Splits the system into (kept, selected) subsystems and returns a table
    /// `compose[k * sel_dim + s]` giving the flat index for kept index `k` and
    /// selected index `s`. Kept legs stay in original order; selected legs
    /// follow the order of `names`.
    pub(crate) fn split(&self, names: &[&str]) -> Result<(LegSystem, LegSystem, Vec<usize>)> {
        let sel_pos = self.positions(names)?;
        let kept_pos: Vec<usize> = (0..self.len()).filter(|p| !sel_pos.contains(p)).collect();
        let kept = LegSystem {
            legs: kept_pos.iter().map(|&p| self.legs[p].clone()).collect(),
        };
        let sel = LegSystem {
            legs: sel_pos.iter().map(|&p| self.legs[p].clone()).collect(),
        };
        let sd = sel.dim();
        let mut compose = vec![0; self.dim()];
        for flat in 0..self.dim() {
            let multi = self.multi_index(flat);
            let k = kept_pos.iter().fold(0, |a, &p| a * self.legs[p].size + multi[p]);
            let s = sel_pos.iter().fold(0, |a, &p| a * self.legs[p].size + multi[p]);
            compose[k * sd + s] = flat;
        }
        Ok((kept, sel, compose))
    }

    /// `perm[new_flat] = old_flat` for reordering to `order`.
    pub(crate) fn permutation_table(&self, order: &[&str]) -> Result<(LegSystem, Vec<usize>)> {
        if order.len() != self.len() {
            return Err(Error::NotAPermutation);
        }
        let pos = self.positions(order).map_err(|e| match e {
            Error::LegCollision(_) => Error::NotAPermutation,
            other => other,
        })?;
        let new = LegSystem {
            legs: pos.iter().map(|&p| self.legs[p].clone()).collect(),
        };
        let mut perm = vec![0; self.dim()];
        let mut old_multi = vec![0; self.len()];
        for (n, slot) in perm.iter_mut().enumerate() {
            for (i, v) in new.multi_index(n).into_iter().enumerate() {
                old_multi[pos[i]] = v;
            }
            *slot = self.flat_index(&old_multi);
        }
        Ok((new, perm))
    }
}

/// A square complex matrix whose rows and columns are indexed by a [`LegSystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    legs: LegSystem,
    data: CMatrix,
}

impl LabeledMatrix {
    pub fn new(legs: LegSystem, data: CMatrix) -> Result<Self> {
        let d = legs.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for leg system of dimension {d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(LabeledMatrix { legs, data })
    }

    pub fn zeros(legs: LegSystem) -> Self {
        let d = legs.dim();
        LabeledMatrix { legs, data: CMatrix::zeros(d, d) }
    }

    pub fn identity(legs: LegSystem) -> Self {
        let d = legs.dim();
        LabeledMatrix { legs, data: CMatrix::identity(d, d) }
    }

    /// Matrix unit with a single 1 at flat position `(row, col)`.
    pub fn unit(legs: LegSystem, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(legs);
        m.data[(row, col)] = ONE;
        m
    }

    /// `J = Σ_{i,j} ε_{ij} ⊗ ε_{ij}` over `first · second`; both systems must
    /// have equal dimension.
    pub fn max_entangled(first: &LegSystem, second: &LegSystem) -> Result<Self> {
        let n = first.dim();
        if second.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "J needs equal dimensions, got {n} and {}",
                second.dim()
            )));
        }
        let legs = first.concat(second)?;
        let mut m = Self::zeros(legs);
        for i in 0..n {
            for j in 0..n {
                m.data[(i * n + i, j * n + j)] = ONE;
            }
        }
        Ok(m)
    }

    /// `J / n`, the normalised maximally entangled state.
    pub fn max_entangled_state(first: &LegSystem, second: &LegSystem) -> Result<Self> {
        let mut j = Self::max_entangled(first, second)?;
        let n = first.dim() as f64;
        j.data /= C64::new(n, 0.0);
        Ok(j)
    }

    pub fn legs(&self) -> &LegSystem {
        &self.legs
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.legs.dim()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Same entries, legs renamed in order.
    pub fn with_names(&self, names: &[&str]) -> Result<Self> {
        Ok(LabeledMatrix { legs: self.legs.renamed(names)?, data: self.data.clone() })
    }

    /// Replaces consecutive legs `names` by one leg `merged` of the product size.
    pub fn merge_legs(&self, names: &[&str], merged: &str) -> Result<Self> {
        let pos = self.legs.positions(names)?;
        if pos.is_empty() || pos.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::DimensionMismatch(format!(
                "legs {names:?} are not consecutive"
            )));
        }
        let size = pos.iter().map(|&p| self.legs.legs[p].size).product();
        let mut legs = self.legs.legs[..pos[0]].to_vec();
        legs.push(Leg::new(merged, size));
        legs.extend_from_slice(&self.legs.legs[pos[pos.len() - 1] + 1..]);
        Ok(LabeledMatrix { legs: LegSystem::new(legs)?, data: self.data.clone() })
    }

    pub fn tensor_product(&self, other: &LabeledMatrix) -> Result<Self> {
        let legs = self.legs.concat(&other.legs)?;
        Ok(LabeledMatrix { legs, data: self.data.kronecker(&other.data) })
    }

    /// Traces out the named legs. Tracing every leg yields a 1×1 matrix.
    pub fn partial_trace(&self, names: &[&str]) -> Result<Self> {
        let (kept, sel, compose) = self.legs.split(names)?;
        let (kd, sd) = (kept.dim(), sel.dim());
        let mut out = CMatrix::zeros(kd, kd);
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = ZERO;
                for s in 0..sd {
                    acc += self.data[(compose[r * sd + s], compose[c * sd + s])];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(LabeledMatrix { legs: kept, data: out })
    }

    /// Slice map over the named legs:
    /// `result[r, c] = Σ_{s,s'} sigma[s', s] · m[(r, s), (c, s')]`,
    /// with `sigma` indexed by the named legs in the given order.
    pub fn slice(&self, names: &[&str], sigma: &CMatrix) -> Result<Self> {
        let (kept, sel, compose) = self.legs.split(names)?;
        let (kd, sd) = (kept.dim(), sel.dim());
        if sigma.nrows() != sd || sigma.ncols() != sd {
            return Err(Error::DimensionMismatch(format!(
                "slice over dimension {sd} with a {}x{} matrix",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let nz: Vec<(usize, usize, C64)> = (0..sd)
            .flat_map(|s| (0..sd).map(move |t| (s, t)))
            .filter_map(|(s, t)| {
                let v = sigma[(t, s)];
                (v != ZERO).then_some((s, t, v))
            })
            .collect();
        let mut out = CMatrix::zeros(kd, kd);
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = ZERO;
                for &(s, t, v) in &nz {
                    acc += v * self.data[(compose[r * sd + s], compose[c * sd + t])];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(LabeledMatrix { legs: kept, data: out })
    }

    pub fn permute_legs(&self, order: &[&str]) -> Result<Self> {
        let (legs, perm) = self.legs.permutation_table(order)?;
        let d = legs.dim();
        let data = CMatrix::from_fn(d, d, |i, j| self.data[(perm[i], perm[j])]);
        Ok(LabeledMatrix { legs, data })
    }

    /// Bilinear pairing `Tr(a · bᵗ) = Σ a_ij b_ij`.
    pub fn hs_inner(&self, other: &LabeledMatrix) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "pairing of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.data.iter().zip(other.data.iter()).map(|(a, b)| a * b).sum())
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.data)
    }

    /// `λ_min ≥ -tol · dim`. Errors if the matrix is not Hermitian within `tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let dev = self.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        Ok(min_eigenvalue(&self.data) >= -tol * self.dim() as f64)
    }

    pub fn max_abs_diff(&self, other: &LabeledMatrix) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Maximum entrywise distance; infinite for shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    crate::linalg::hermitian_eigenvalues(m)[0]
}

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys2(a: &str, b: &str) -> LegSystem {
        LegSystem::of(&[(a, 2), (b, 2)]).unwrap()
    }

    #[test]
    fn index_roundtrip() {
        let s = LegSystem::of(&[("a", 2), ("b", 3), ("c", 4)]).unwrap();
        for f in 0..s.dim() {
            assert_eq!(s.flat_index(&s.multi_index(f)), f);
        }
        assert_eq!(s.flat_index(&[1, 0, 0]), 12);
        assert_eq!(s.flat_index(&[0, 0, 3]), 3);
    }

    #[test]
    fn rejects_duplicate_and_empty_legs() {
        assert!(matches!(LegSystem::of(&[("a", 2), ("a", 3)]), Err(Error::LegCollision(_))));
        assert!(matches!(LegSystem::of(&[("a", 0)]), Err(Error::EmptyLeg(_))));
    }

    #[test]
    fn unit_tensor_unit() {
        let a = LabeledMatrix::unit(LegSystem::of(&[("a", 2)]).unwrap(), 0, 0);
        let b = LabeledMatrix::unit(LegSystem::of(&[("b", 2)]).unwrap(), 1, 1);
        let p = a.tensor_product(&b).unwrap();
        let expected = LabeledMatrix::unit(sys2("a", "b"), 1, 1);
        assert_eq!(p, expected);
        assert!(matches!(a.tensor_product(&a), Err(Error::LegCollision(_))));
    }

    #[test]
    fn partial_trace_units() {
        let m01 = LabeledMatrix::unit(LegSystem::of(&[("a", 2)]).unwrap(), 0, 1);
        let m11 = LabeledMatrix::unit(LegSystem::of(&[("b", 2)]).unwrap(), 1, 1);
        let m01b = LabeledMatrix::unit(LegSystem::of(&[("b", 2)]).unwrap(), 0, 1);
        assert_eq!(m01.tensor_product(&m11).unwrap().partial_trace(&["b"]).unwrap(), m01);
        let z = m01.tensor_product(&m01b).unwrap().partial_trace(&["b"]).unwrap();
        assert_eq!(max_abs(z.data()), 0.0);
        let full = m01.tensor_product(&m11).unwrap().partial_trace(&["a", "b"]).unwrap();
        assert_eq!(full.dim(), 1);
        assert_eq!(full.data()[(0, 0)], ZERO);
    }

    #[test]
    fn slice_extracts_blocks() {
        let x = LegSystem::of(&[("x", 2)]).unwrap();
        let m = LabeledMatrix::new(
            LegSystem::of(&[("m", 2)]).unwrap(),
            CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 1.0)),
        )
        .unwrap();
        let e00 = LabeledMatrix::unit(x.clone(), 0, 0);
        let e11 = LabeledMatrix::unit(x.clone(), 1, 1);
        let s = e00.tensor_product(&m).unwrap().slice(&["x"], e00.data()).unwrap();
        assert_eq!(s.data(), m.data());
        let s = e11.tensor_product(&m).unwrap().slice(&["x"], e00.data()).unwrap();
        assert_eq!(max_abs(s.data()), 0.0);
        let half = CMatrix::identity(2, 2) * re(0.5);
        let s = e00.tensor_product(&m).unwrap().slice(&["x"], &half).unwrap();
        assert!(max_abs_diff(s.data(), &(m.data() * re(0.5))) < 1e-15);
        // ε_{10} as sigma picks the (0,1) block
        let e01 = LabeledMatrix::unit(x.clone(), 0, 1);
        let e10 = LabeledMatrix::unit(x, 1, 0);
        let s = e01.tensor_product(&m).unwrap().slice(&["x"], e10.data()).unwrap();
        assert_eq!(s.data(), m.data());
    }

    #[test]
    fn permute_swap() {
        let a = LabeledMatrix::new(
            LegSystem::of(&[("a", 2)]).unwrap(),
            CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64)),
        )
        .unwrap();
        let b = LabeledMatrix::new(
            LegSystem::of(&[("b", 3)]).unwrap(),
            CMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 1.0)),
        )
        .unwrap();
        let ab = a.tensor_product(&b).unwrap();
        let ba = b.tensor_product(&a).unwrap();
        assert_eq!(ab.permute_legs(&["b", "a"]).unwrap(), ba);
        assert_eq!(ab.permute_legs(&["a", "b"]).unwrap(), ab);
        assert!(matches!(ab.permute_legs(&["a", "a"]), Err(Error::NotAPermutation)));
        assert!(matches!(ab.permute_legs(&["a"]), Err(Error::NotAPermutation)));
    }

    #[test]
    fn pairing_of_units_and_j() {
        let x = LegSystem::of(&[("x", 2)]).unwrap();
        let e01 = LabeledMatrix::unit(x.clone(), 0, 1);
        let e10 = LabeledMatrix::unit(x.clone(), 1, 0);
        assert_eq!(e01.hs_inner(&e01).unwrap(), ONE);
        assert_eq!(e01.hs_inner(&e10).unwrap(), ZERO);
        let y = LegSystem::of(&[("y", 2)]).unwrap();
        let j = LabeledMatrix::max_entangled(&x, &y).unwrap();
        assert_eq!(j.hs_inner(&j).unwrap(), re(4.0));
    }

    #[test]
    fn psd_checks() {
        let s = LegSystem::of(&[("a", 4)]).unwrap();
        assert!(LabeledMatrix::identity(s).is_psd(DEFAULT_TOL).unwrap());
        let d = LabeledMatrix::new(
            LegSystem::of(&[("a", 2)]).unwrap(),
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE])),
        )
        .unwrap();
        assert!(!d.is_psd(DEFAULT_TOL).unwrap());
        let nh = LabeledMatrix::unit(LegSystem::of(&[("a", 2)]).unwrap(), 0, 1);
        assert!(matches!(nh.is_psd(DEFAULT_TOL), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn merge_consecutive_only() {
        let m = LabeledMatrix::identity(LegSystem::of(&[("a", 2), ("b", 3), ("c", 2)]).unwrap());
        let merged = m.merge_legs(&["b", "c"], "bc").unwrap();
        assert_eq!(merged.legs().sizes(), vec![2, 6]);
        assert!(m.merge_legs(&["a", "c"], "ac").is_err());
    }
}
