//! Seeded random instances. Every generator draws from a caller-supplied
//! [`ChaCha8Rng`], so a fixed seed reproduces the same objects bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::classical::{ClassicalCorrelation, ClassicalGame};
use crate::correlation::{build_local_qns, Correlation};
use crate::error::{Error, Result};
use crate::stochastic::{StochOpMatrix, StronglyStochOpMatrix};
use crate::tensor::{re, CMatrix, LegSystem, C64};
use crate::tracial::BlockIsometry;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// A `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn isometry(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // fix the phase of each column so the distribution is Haar
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / re(n);
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn unitary(rng: &mut SeededRng, n: usize) -> CMatrix {
    isometry(rng, n, n)
}

pub fn unit_vector(rng: &mut SeededRng, n: usize) -> DVector<C64> {
    let g = gaussian_matrix(rng, n, 1);
    let v = DVector::from_iterator(n, g.iter().copied());
    let norm = v.norm();
    v / re(norm)
}

/// Random full-rank density matrix.
pub fn density(rng: &mut SeededRng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// Orthogonal projection of the given rank onto a random subspace.
pub fn projection(rng: &mut SeededRng, n: usize, rank: usize) -> CMatrix {
    if rank == 0 {
        return CMatrix::zeros(n, n);
    }
    let v = isometry(rng, n, rank);
    &v * v.adjoint()
}

/// Kraus operators of a random CPTP map `in_dim → out_dim` with `rank` terms,
/// read off a random isometry `C^in → C^out ⊗ C^rank`.
pub fn kraus_set(rng: &mut SeededRng, in_dim: usize, out_dim: usize, rank: usize) -> Vec<CMatrix> {
    let v = isometry(rng, out_dim * rank, in_dim);
    (0..rank)
        .map(|k| CMatrix::from_fn(out_dim, in_dim, |a, x| v[(a * rank + k, x)]))
        .collect()
}

/// Random CPTP channel of the given Kraus rank.
pub fn channel(
    rng: &mut SeededRng,
    in_legs: &LegSystem,
    out_legs: &LegSystem,
    rank: usize,
) -> Result<Channel> {
    if rank == 0 || out_legs.dim() * rank < in_legs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{rank} Kraus operators into dimension {} cannot preserve trace on dimension {}",
            out_legs.dim(),
            in_legs.dim()
        )));
    }
    let ks = kraus_set(rng, in_legs.dim(), out_legs.dim(), rank);
    Channel::from_kraus(&ks, in_legs.clone(), out_legs.clone())
}

/// Random unitary channel.
pub fn unitary_channel(rng: &mut SeededRng, in_legs: &LegSystem, out_legs: &LegSystem) -> Result<Channel> {
    let u = unitary(rng, in_legs.dim());
    Channel::from_kraus(&[u], in_legs.clone(), out_legs.clone())
}

/// Random mixture of unitary channels, hence unital.
pub fn unital_channel(
    rng: &mut SeededRng,
    in_legs: &LegSystem,
    out_legs: &LegSystem,
    terms: usize,
) -> Result<Channel> {
    let n = in_legs.dim();
    let w = probability_vector(rng, terms);
    let ks: Vec<CMatrix> = w
        .iter()
        .map(|&p| unitary(rng, n) * re(p.sqrt()))
        .collect();
    Channel::from_kraus(&ks, in_legs.clone(), out_legs.clone())
}

pub fn probability_vector(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random conditional distribution over the given inputs and outputs.
pub fn classical(
    rng: &mut SeededRng,
    inputs: &LegSystem,
    outputs: &LegSystem,
) -> Result<ClassicalCorrelation> {
    let table = (0..inputs.dim())
        .map(|_| probability_vector(rng, outputs.dim()))
        .collect();
    ClassicalCorrelation::new(inputs.clone(), outputs.clone(), table)
}

/// Random stochastic operator matrix `E_{x,x',a,a'} = v_{a,x}* v_{a',x'}` read
/// off a random block isometry `C^X ⊗ C^d → C^A ⊗ C^k`, with `k` the smallest
/// ancilla making that possible.
pub fn stoch_op(rng: &mut SeededRng, x_legs: &LegSystem, a_legs: &LegSystem, d: usize) -> Result<StochOpMatrix> {
    let (nx, na) = (x_legs.dim(), a_legs.dim());
    let k = (nx * d).div_ceil(na);
    let gens = BlockIsometry::random(rng, nx, na, d, k)?.generators();
    StochOpMatrix::from_entries(x_legs.clone(), a_legs.clone(), d, |x, xp, a, ap| gens.get(x, xp, a, ap).clone())
}

/// Random strongly stochastic matrix over `(P₂·Q₁, P₁·Q₂)`: a direct sum of
/// `terms` products `P ⊗ Q` with `P` over `(P₂, P₁)` and `Q` over `(Q₁, Q₂)`.
/// `names` are `[p2, q1, p1, q2]`; each factor has ancilla `d`.
pub fn strongly_stoch_op(
    rng: &mut SeededRng,
    names: [&str; 4],
    sizes: [usize; 4],
    d: usize,
    terms: usize,
) -> Result<StronglyStochOpMatrix> {
    let [p2, q1, p1, q2] = names;
    let [n_p2, n_q1, n_p1, n_q2] = sizes;
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let p = stoch_op(rng, &LegSystem::of(&[(p2, n_p2)])?, &LegSystem::of(&[(p1, n_p1)])?, d)?;
        let q = stoch_op(rng, &LegSystem::of(&[(q1, n_q1)])?, &LegSystem::of(&[(q2, n_q2)])?, d)?;
        parts.push((p, q));
    }
    let dd = d * d;
    let total = dd * terms;
    let m = StochOpMatrix::from_entries(
        LegSystem::of(&[(p2, n_p2), (q1, n_q1)])?,
        LegSystem::of(&[(p1, n_p1), (q2, n_q2)])?,
        total,
        |i, ip, o, op| {
            let (x, a) = (i / n_q1, i % n_q1);
            let (xp, ap) = (ip / n_q1, ip % n_q1);
            let (x1, a2) = (o / n_q2, o % n_q2);
            let (x1p, a2p) = (op / n_q2, op % n_q2);
            let mut out = CMatrix::zeros(total, total);
            for (t, (p, q)) in parts.iter().enumerate() {
                let blk = p.entry(x, xp, x1, x1p).kronecker(&q.entry(a, ap, a2, a2p));
                out.view_mut((t * dd, t * dd), (dd, dd)).copy_from(&blk);
            }
            out
        },
    )?;
    StronglyStochOpMatrix::unchecked(m, 1, 1)
}

/// Random classical conditional distribution satisfying the given
/// no-signalling cuts `(input leg, output leg)`: a random table is projected
/// onto the affine constraint set, then pulled toward the uniform table just
/// far enough to be nonnegative.
pub fn ns_classical(
    rng: &mut SeededRng,
    inputs: &LegSystem,
    outputs: &LegSystem,
    cuts: &[(&str, &str)],
) -> Result<ClassicalCorrelation> {
    let (ni, no) = (inputs.dim(), outputs.dim());
    let rows = cut_constraints(inputs, outputs, cuts)?;
    let n = ni * no;
    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let t = DVector::from_fn(n, |_, _| rng.gen::<f64>());
    // constraints are homogeneous except row sums; shift by the uniform table
    let u = DVector::from_element(n, 1.0 / no as f64);
    let dev = &t - &u;
    let pinv = a.clone().pseudo_inverse(1e-12).map_err(|e| Error::Format(e.into()))?;
    let proj = &dev - &pinv * (&a * &dev);
    let mut s: f64 = 1.0;
    for (ui, di) in u.iter().zip(proj.iter()) {
        if *di < 0.0 {
            s = s.min(ui / -di);
        }
    }
    let p = &u + proj * s;
    let table = (0..ni).map(|i| (0..no).map(|o| p[i * no + o].max(0.0)).collect()).collect();
    ClassicalCorrelation::new(inputs.clone(), outputs.clone(), table)
}

/// Rows of the linear maps whose kernel is the set of tables (flat
/// `input·|O| + output`) with zero row sums and no signalling across `cuts`.
fn cut_constraints(inputs: &LegSystem, outputs: &LegSystem, cuts: &[(&str, &str)]) -> Result<Vec<Vec<f64>>> {
    let (ni, no) = (inputs.dim(), outputs.dim());
    let mut rows = Vec::new();
    for i in 0..ni {
        let mut r = vec![0.0; ni * no];
        r[i * no..(i + 1) * no].iter_mut().for_each(|v| *v = 1.0);
        rows.push(r);
    }
    for &(il, ol) in cuts {
        let ip = inputs.position(il).ok_or_else(|| Error::UnknownLeg(il.into()))?;
        let op = outputs.position(ol).ok_or_else(|| Error::UnknownLeg(ol.into()))?;
        let osz = outputs.legs()[op].size;
        for i in 0..ni {
            let im = inputs.multi_index(i);
            if im[ip] == 0 {
                continue;
            }
            let mut base = im.clone();
            base[ip] = 0;
            let i0 = inputs.flat_index(&base);
            for o in 0..no {
                let om = outputs.multi_index(o);
                if om[op] != 0 {
                    continue;
                }
                let mut r = vec![0.0; ni * no];
                let mut o2 = om.clone();
                for v in 0..osz {
                    o2[op] = v;
                    let of = outputs.flat_index(&o2);
                    r[i * no + of] += 1.0;
                    r[i0 * no + of] -= 1.0;
                }
                rows.push(r);
            }
        }
    }
    Ok(rows)
}

/// Random QNS correlation `x, y → a, b` given as a finite mixture of product
/// channels.
pub fn local_qns(rng: &mut SeededRng, sizes: [usize; 4], terms: usize, rank: usize) -> Result<Correlation> {
    let [x, y, a, b] = sizes;
    let (lx, ly) = (LegSystem::of(&[("x", x)])?, LegSystem::of(&[("y", y)])?);
    let (la, lb) = (LegSystem::of(&[("a", a)])?, LegSystem::of(&[("b", b)])?);
    let w = probability_vector(rng, terms);
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        parts.push((channel(rng, &lx, &la, rank)?, channel(rng, &ly, &lb, rank)?));
    }
    let comps: Vec<(f64, &Channel, &Channel)> = w.iter().zip(&parts).map(|(&p, (f, g))| (p, f, g)).collect();
    build_local_qns(&comps)
}

/// Random classical game: each tuple wins with probability ½, under a
/// uniform prior. At least one tuple wins.
pub fn classical_game(rng: &mut SeededRng, sizes: [usize; 4]) -> Result<ClassicalGame> {
    let [x, y, a, b] = sizes;
    let mut win: Vec<Vec<bool>> = (0..x * y).map(|_| (0..a * b).map(|_| rng.gen_bool(0.5)).collect()).collect();
    if win.iter().flatten().all(|w| !w) {
        win[0][0] = true;
    }
    let n = x * y;
    ClassicalGame::new(sizes, win, vec![1.0 / n as f64; n])
}
