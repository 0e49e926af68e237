//! Classical conditional distributions `p(outputs | inputs)` and their
//! no-signalling sums.

use crate::error::{Error, Result};
use crate::tensor::LegSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalCorrelation {
    inputs: LegSystem,
    outputs: LegSystem,
    /// `table[input][output]`, flat indices row-major over the legs.
    table: Vec<Vec<f64>>,
}

/// Tolerance for row sums and negativity when validating a table.
const TABLE_TOL: f64 = 1e-9;

impl ClassicalCorrelation {
    pub fn new(inputs: LegSystem, outputs: LegSystem, table: Vec<Vec<f64>>) -> Result<Self> {
        inputs.concat(&outputs)?;
        if table.len() != inputs.dim() {
            return Err(Error::InvalidDistribution(format!(
                "{} rows for {} inputs",
                table.len(),
                inputs.dim()
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != outputs.dim() {
                return Err(Error::InvalidDistribution(format!("row {i} has {} entries", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < -TABLE_TOL) {
                return Err(Error::InvalidDistribution(format!("row {i} has entry {v}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > TABLE_TOL {
                return Err(Error::InvalidDistribution(format!("row {i} sums to {s}")));
            }
        }
        Ok(ClassicalCorrelation { inputs, outputs, table })
    }

    /// Two-party table over legs `x, y | a, b`, indexed `table[(x,y)][(a,b)]`.
    pub fn two_party(sizes: [usize; 4], table: Vec<Vec<f64>>) -> Result<Self> {
        let [x, y, a, b] = sizes;
        Self::new(
            LegSystem::of(&[("x", x), ("y", y)])?,
            LegSystem::of(&[("a", a), ("b", b)])?,
            table,
        )
    }

    pub fn from_fn(
        inputs: LegSystem,
        outputs: LegSystem,
        f: impl Fn(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let table = (0..inputs.dim())
            .map(|i| {
                let im = inputs.multi_index(i);
                (0..outputs.dim()).map(|o| f(&im, &outputs.multi_index(o))).collect()
            })
            .collect();
        Self::new(inputs, outputs, table)
    }

    pub fn inputs(&self) -> &LegSystem {
        &self.inputs
    }

    pub fn outputs(&self) -> &LegSystem {
        &self.outputs
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.table[input][output]
    }

    /// Largest deviation from "summing out `out_leg` gives a distribution
    /// independent of `in_leg`".
    pub fn cut_violation(&self, in_leg: &str, out_leg: &str) -> Result<f64> {
        let ip = self.inputs.position(in_leg).ok_or_else(|| Error::UnknownLeg(in_leg.into()))?;
        let op = self.outputs.position(out_leg).ok_or_else(|| Error::UnknownLeg(out_leg.into()))?;
        let mut worst: f64 = 0.0;
        for i in 0..self.inputs.dim() {
            let im = self.inputs.multi_index(i);
            if im[ip] != 0 {
                continue;
            }
            let marg = |i_leg: usize, o: &[usize]| -> f64 {
                let mut im2 = im.clone();
                im2[ip] = i_leg;
                let row = &self.table[self.inputs.flat_index(&im2)];
                let mut o2 = o.to_vec();
                (0..self.outputs.legs()[op].size)
                    .map(|v| {
                        o2[op] = v;
                        row[self.outputs.flat_index(&o2)]
                    })
                    .sum()
            };
            for o in 0..self.outputs.dim() {
                let om = self.outputs.multi_index(o);
                if om[op] != 0 {
                    continue;
                }
                let base = marg(0, &om);
                for v in 1..self.inputs.legs()[ip].size {
                    worst = worst.max((marg(v, &om) - base).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Worst violation of the classical no-signalling conditions for the
    /// cuts `(x → a)` and `(y → b)`, legs given by position.
    pub fn ns_violation(&self) -> Result<f64> {
        two_two(self)?;
        let (i, o) = (self.inputs.names(), self.outputs.names());
        Ok(self.cut_violation(i[0], o[0])?.max(self.cut_violation(i[1], o[1])?))
    }

    /// Worst violation of the four strong no-signalling sums. Inputs are
    /// `(x2, y2, a1, b1)` and outputs `(x1, y1, a2, b2)` by position.
    pub fn sns_violation(&self) -> Result<f64> {
        if self.inputs.len() != 4 || self.outputs.len() != 4 {
            return Err(Error::DimensionMismatch("strong no-signalling needs 4+4 legs".into()));
        }
        let (i, o) = (self.inputs.names(), self.outputs.names());
        let mut worst: f64 = 0.0;
        for (inl, outl) in [(i[0], o[0]), (i[1], o[1]), (i[2], o[2]), (i[3], o[3])] {
            worst = worst.max(self.cut_violation(inl, outl)?);
        }
        Ok(worst)
    }
}

fn two_two(p: &ClassicalCorrelation) -> Result<()> {
    if p.inputs.len() != 2 || p.outputs.len() != 2 {
        return Err(Error::DimensionMismatch("two-party table needs 2+2 legs".into()));
    }
    Ok(())
}

/// A classical game: admissible tuples plus an input distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalGame {
    sizes: [usize; 4],
    /// `win[(x,y)][(a,b)]`.
    win: Vec<Vec<bool>>,
    /// `prior[(x,y)]`.
    prior: Vec<f64>,
}

impl ClassicalGame {
    pub fn new(sizes: [usize; 4], win: Vec<Vec<bool>>, prior: Vec<f64>) -> Result<Self> {
        let [x, y, a, b] = sizes;
        if sizes.contains(&0) {
            return Err(Error::DimensionMismatch("empty alphabet".into()));
        }
        if win.len() != x * y || win.iter().any(|r| r.len() != a * b) {
            return Err(Error::DimensionMismatch("winning table shape".into()));
        }
        if prior.len() != x * y || prior.iter().any(|p| *p < 0.0) || (prior.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidDistribution("input prior".into()));
        }
        if !win.iter().flatten().any(|w| *w) {
            return Err(Error::EmptyGame);
        }
        Ok(ClassicalGame { sizes, win, prior })
    }

    pub fn from_predicate(sizes: [usize; 4], pred: impl Fn(usize, usize, usize, usize) -> bool) -> Result<Self> {
        let [x, y, a, b] = sizes;
        let win = (0..x * y)
            .map(|xy| (0..a * b).map(|ab| pred(xy / y, xy % y, ab / b, ab % b)).collect())
            .collect();
        Self::new(sizes, win, vec![1.0 / (x * y) as f64; x * y])
    }

    /// `a ⊕ b = x ∧ y` with uniform inputs.
    pub fn chsh() -> Self {
        Self::from_predicate([2, 2, 2, 2], |x, y, a, b| (a ^ b) == (x & y)).expect("valid game")
    }

    pub fn sizes(&self) -> [usize; 4] {
        self.sizes
    }

    /// Whether `(a, b)` wins on `(x, y)`, flat indices `x·|Y| + y` and `a·|B| + b`.
    pub fn wins(&self, xy: usize, ab: usize) -> bool {
        self.win[xy][ab]
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Winning probability of a two-party conditional distribution.
    pub fn value_of(&self, p: &ClassicalCorrelation) -> f64 {
        let mut v = 0.0;
        for (xy, row) in self.win.iter().enumerate() {
            for (ab, &w) in row.iter().enumerate() {
                if w {
                    v += self.prior[xy] * p.prob(xy, ab);
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(ClassicalCorrelation::two_party([1, 1, 2, 1], vec![vec![0.5, 0.4]]).is_err());
        assert!(ClassicalCorrelation::two_party([1, 1, 2, 1], vec![vec![1.5, -0.5]]).is_err());
        assert!(ClassicalCorrelation::two_party([1, 1, 2, 1], vec![vec![0.5, 0.5]]).is_ok());
    }

    #[test]
    fn pr_box_is_ns_and_leak_is_not() {
        let s = LegSystem::of(&[("x", 2), ("y", 2)]).unwrap();
        let o = LegSystem::of(&[("a", 2), ("b", 2)]).unwrap();
        let pr = ClassicalCorrelation::from_fn(s.clone(), o.clone(), |i, out| {
            if (out[0] ^ out[1]) == (i[0] & i[1]) { 0.5 } else { 0.0 }
        })
        .unwrap();
        assert_eq!(pr.ns_violation().unwrap(), 0.0);
        assert_eq!(ClassicalGame::chsh().value_of(&pr), 1.0);
        // b copies x
        let leak = ClassicalCorrelation::from_fn(s, o, |i, out| {
            if out[1] == i[0] && out[0] == 0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        assert_eq!(leak.ns_violation().unwrap(), 1.0);
    }

    #[test]
    fn chsh_has_eight_winning_tuples() {
        let g = ClassicalGame::chsh();
        assert_eq!(g.win.iter().flatten().filter(|w| **w).count(), 8);
    }
}
