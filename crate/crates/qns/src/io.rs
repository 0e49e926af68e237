//! JSON file formats for matrices, channels, correlations, operator
//! matrices, games and trace representations.
//!
//! Complex numbers are `[re, im]` pairs in row-major order over the legs.
//! serde_json is built with `float_roundtrip`, so every finite double
//! survives a write/read cycle bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::classical::{ClassicalCorrelation, ClassicalGame};
use crate::correlation::{ClassTag, Correlation, SqnsCorrelation, SQNS_ROLES};
use crate::error::{Error, Result};
use crate::games::{ImplicationGame, LabeledVector, QuantumGraph, RankOneGame};
use crate::stochastic::{StochOpMatrix, StronglyStochOpMatrix};
use crate::tensor::{CMatrix, LabeledMatrix, LegSystem, C64, DEFAULT_TOL};
use crate::tracial::{BlockIsometry, TraceRep};

fn pairs(it: impl Iterator<Item = C64>) -> Vec<[f64; 2]> {
    it.map(|z| [z.re, z.im]).collect()
}

/// A square matrix over named legs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub legs: LegSystem,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_labeled(m: &LabeledMatrix) -> Self {
        let d = m.data();
        let n = d.nrows();
        MatrixFile { legs: m.legs().clone(), entries: pairs((0..n * n).map(|k| d[(k / n, k % n)])) }
    }

    pub fn to_labeled(&self) -> Result<LabeledMatrix> {
        let n = self.legs.dim();
        if self.entries.len() != n * n {
            return Err(Error::Format(format!("{} entries for a {n}x{n} matrix", self.entries.len())));
        }
        let m = CMatrix::from_fn(n, n, |r, c| {
            let [re, im] = self.entries[r * n + c];
            C64::new(re, im)
        });
        LabeledMatrix::new(self.legs.clone(), m)
    }
}

/// A rectangular matrix without leg structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl RawMatrix {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, c) = (m.nrows(), m.ncols());
        RawMatrix { rows: r, cols: c, entries: pairs((0..r * c).map(|k| m[(k / c, k % c)])) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Format(format!("{} entries for a {}x{} matrix", self.entries.len(), self.rows, self.cols)));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |r, c| {
            let [re, im] = self.entries[r * self.cols + c];
            C64::new(re, im)
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub legs: LegSystem,
    pub entries: Vec<[f64; 2]>,
}

impl VectorFile {
    pub fn from_vector(legs: &LegSystem, v: &DVector<C64>) -> Self {
        VectorFile { legs: legs.clone(), entries: pairs(v.iter().copied()) }
    }

    pub fn to_vector(&self) -> Result<DVector<C64>> {
        if self.entries.len() != self.legs.dim() {
            return Err(Error::Format(format!("{} entries for dimension {}", self.entries.len(), self.legs.dim())));
        }
        Ok(DVector::from_iterator(self.entries.len(), self.entries.iter().map(|[re, im]| C64::new(*re, *im))))
    }
}

/// A channel, optionally tagged as a correlation. `roles` maps SQNS role
/// names (`x2`, …, `b2`) to leg names; without it roles are positional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub in_legs: LegSystem,
    pub out_legs: LegSystem,
    pub choi: MatrixFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<BTreeMap<String, String>>,
}

impl ChannelFile {
    pub fn from_channel(c: &Channel) -> Self {
        ChannelFile {
            in_legs: c.in_legs().clone(),
            out_legs: c.out_legs().clone(),
            choi: MatrixFile::from_labeled(c.choi()),
            class: None,
            roles: None,
        }
    }

    pub fn from_correlation(c: &Correlation) -> Self {
        ChannelFile { class: Some(c.tag()), ..Self::from_channel(c.channel()) }
    }

    pub fn from_sqns(c: &SqnsCorrelation) -> Self {
        let names = c.role_names();
        let roles = SQNS_ROLES.iter().zip(names).map(|(r, n)| (r.to_string(), n.to_string())).collect();
        ChannelFile { class: Some(c.tag()), roles: Some(roles), ..Self::from_channel(c.channel()) }
    }

    /// Checks complete positivity and trace preservation at `tol`.
    pub fn to_channel(&self, tol: f64) -> Result<Channel> {
        let choi = self.choi.to_labeled()?;
        let expected = self.in_legs.concat(&self.out_legs)?;
        if choi.legs() != &expected {
            return Err(Error::Format("choi legs must be in_legs followed by out_legs".into()));
        }
        Channel::with_tol(self.in_legs.clone(), self.out_legs.clone(), choi.into_data(), tol)
    }

    pub fn to_correlation(&self, tol: f64) -> Result<Correlation> {
        Ok(Correlation::new(self.to_channel(tol)?)?.with_tag(self.class.unwrap_or(ClassTag::Unknown)))
    }

    pub fn to_sqns(&self, tol: f64) -> Result<SqnsCorrelation> {
        let mut ch = self.to_channel(tol)?;
        if let Some(roles) = &self.roles {
            let pick = |r: &str| -> Result<&str> {
                roles.get(r).map(String::as_str).ok_or_else(|| Error::Format(format!("roles lack `{r}`")))
            };
            let ins = [pick("x2")?, pick("y2")?, pick("a1")?, pick("b1")?];
            let outs = [pick("x1")?, pick("y1")?, pick("a2")?, pick("b2")?];
            ch = ch.reorder(&ins, &outs)?;
        }
        Ok(SqnsCorrelation::new(ch)?.with_tag(self.class.unwrap_or(ClassTag::Unknown)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFile {
    pub inputs: LegSystem,
    pub outputs: LegSystem,
    /// `table[input][output]`, flat row-major indices.
    pub table: Vec<Vec<f64>>,
}

impl ClassicalFile {
    pub fn from_correlation(p: &ClassicalCorrelation) -> Self {
        ClassicalFile { inputs: p.inputs().clone(), outputs: p.outputs().clone(), table: p.table().to_vec() }
    }

    pub fn to_correlation(&self) -> Result<ClassicalCorrelation> {
        ClassicalCorrelation::new(self.inputs.clone(), self.outputs.clone(), self.table.clone())
    }
}

/// A stochastic operator matrix; `splits` marks it as strongly stochastic
/// with that many first-party legs in `x_legs` and `a_legs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticFile {
    pub x_legs: LegSystem,
    pub a_legs: LegSystem,
    pub ancilla_dim: usize,
    pub block: RawMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<[usize; 2]>,
}

impl StochasticFile {
    pub fn from_matrix(e: &StochOpMatrix) -> Self {
        StochasticFile {
            x_legs: e.x_legs().clone(),
            a_legs: e.a_legs().clone(),
            ancilla_dim: e.ancilla_dim(),
            block: RawMatrix::from_matrix(e.block().data()),
            splits: None,
        }
    }

    pub fn from_strong(p: &StronglyStochOpMatrix) -> Self {
        let (x, a) = p.splits();
        StochasticFile { splits: Some([x, a]), ..Self::from_matrix(p.matrix()) }
    }

    /// Shape checks only; verification is the caller's choice.
    pub fn to_matrix(&self) -> Result<StochOpMatrix> {
        StochOpMatrix::unchecked(self.x_legs.clone(), self.a_legs.clone(), self.ancilla_dim, self.block.to_matrix()?)
    }

    pub fn to_strong(&self) -> Result<StronglyStochOpMatrix> {
        let [x, a] = self.splits.ok_or_else(|| Error::Format("strongly stochastic file needs `splits`".into()))?;
        StronglyStochOpMatrix::unchecked(self.to_matrix()?, x, a)
    }
}

/// A quantum graph on `C^size ⊗ C^size`, by classical edges or by spanning vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<[f64; 2]>>>,
}

impl GraphSpec {
    pub fn to_graph(&self) -> Result<QuantumGraph> {
        match (&self.edges, &self.vectors) {
            (Some(e), None) => {
                if e.iter().flatten().any(|&v| v >= self.size) {
                    return Err(Error::Format("edge endpoint out of range".into()));
                }
                QuantumGraph::from_edges(self.size, &e.iter().map(|&[i, j]| (i, j)).collect::<Vec<_>>())
            }
            (None, Some(vs)) => {
                let vs: Vec<DVector<C64>> = vs
                    .iter()
                    .map(|v| DVector::from_iterator(v.len(), v.iter().map(|[re, im]| C64::new(*re, *im))))
                    .collect();
                QuantumGraph::new(self.size, &vs)
            }
            _ => Err(Error::Format("a graph needs exactly one of `edges` or `vectors`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameFile {
    Implication { p: MatrixFile, q: MatrixFile },
    RankOne { xi: VectorFile, gamma: VectorFile },
    /// The graph-homomorphism game `u → v`.
    Graph { u: GraphSpec, v: GraphSpec },
    Classical {
        sizes: [usize; 4],
        /// `win[(x,y)][(a,b)]`.
        win: Vec<Vec<bool>>,
        /// Uniform when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prior: Option<Vec<f64>>,
    },
}

/// A game file resolved into library types.
#[derive(Clone, Debug)]
pub enum LoadedGame {
    Implication(ImplicationGame),
    Graph { u: QuantumGraph, v: QuantumGraph, game: ImplicationGame },
    Classical(ClassicalGame),
}

impl LoadedGame {
    /// The implication form used for perfect-strategy checks.
    pub fn implication(&self) -> Result<ImplicationGame> {
        match self {
            LoadedGame::Implication(g) | LoadedGame::Graph { game: g, .. } => Ok(g.clone()),
            LoadedGame::Classical(_) => Err(Error::Unsupported("classical games have no implication form".into())),
        }
    }
}

impl GameFile {
    pub fn load(&self, tol: f64) -> Result<LoadedGame> {
        match self {
            GameFile::Implication { p, q } => Ok(LoadedGame::Implication(ImplicationGame::new(p.to_labeled()?, q.to_labeled()?, tol)?)),
            GameFile::RankOne { xi, gamma } => {
                let g = RankOneGame {
                    xi: LabeledVector::new(xi.legs.clone(), xi.to_vector()?)?,
                    gamma: LabeledVector::new(gamma.legs.clone(), gamma.to_vector()?)?,
                };
                Ok(LoadedGame::Implication(crate::games::rank_one_to_implication(&g, tol)?))
            }
            GameFile::Graph { u, v } => {
                let (u, v) = (u.to_graph()?, v.to_graph()?);
                let game = crate::games::graph_game(&u, &v)?;
                Ok(LoadedGame::Graph { u, v, game })
            }
            GameFile::Classical { sizes, win, prior } => {
                let n = sizes[0] * sizes[1];
                let prior = prior.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
                Ok(LoadedGame::Classical(ClassicalGame::new(*sizes, win.clone(), prior)?))
            }
        }
    }

    pub fn from_implication(g: &ImplicationGame) -> Self {
        GameFile::Implication { p: MatrixFile::from_labeled(g.p()), q: MatrixFile::from_labeled(g.q()) }
    }

    pub fn from_classical(g: &ClassicalGame) -> Self {
        let [x, y, a, b] = g.sizes();
        let win = (0..x * y).map(|xy| (0..a * b).map(|ab| g.wins(xy, ab)).collect()).collect();
        GameFile::Classical { sizes: g.sizes(), win, prior: Some(g.prior().to_vec()) }
    }
}

/// Blocks `v[a][x]` (each `d_k × d_h`) and optional trace weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRepFile {
    pub x: usize,
    pub a: usize,
    pub d_h: usize,
    pub d_k: usize,
    pub blocks: Vec<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TraceRepFile {
    pub fn from_rep(rep: &TraceRep) -> Self {
        let v = rep.isometry();
        let blocks = (0..v.a_size())
            .map(|a| (0..v.x_size()).map(|x| RawMatrix::from_matrix(v.block(a, x))).collect())
            .collect();
        TraceRepFile { x: v.x_size(), a: v.a_size(), d_h: v.d_h(), d_k: v.d_k(), blocks, weights: Some(rep.weights().to_vec()) }
    }

    pub fn to_rep(&self, tol: f64) -> Result<TraceRep> {
        if self.blocks.len() != self.a || self.blocks.iter().any(|r| r.len() != self.x) {
            return Err(Error::Format("blocks must be an a × x array".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|row| {
                row.iter()
                    .map(|b| {
                        if b.rows != self.d_k || b.cols != self.d_h {
                            return Err(Error::Format("block shape must be d_k × d_h".into()));
                        }
                        b.to_matrix()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        TraceRep::new(BlockIsometry::new(blocks, tol)?, self.weights.clone())
    }
}

/// Tolerance used when a file is loaded without an explicit one.
pub const LOAD_TOL: f64 = DEFAULT_TOL;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Serializes with a trailing newline; compact unless `pretty`.
pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> Result<String> {
    let mut s = if pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    s.push('\n');
    Ok(s)
}
