//! No-signalling tests on Choi matrices and builders for the local, quantum
//! and quantum-commuting SQNS classes.
//!
//! Leg roles are positional. A [`Correlation`] has inputs `(x, y)` and outputs
//! `(a, b)`; an [`SqnsCorrelation`] has inputs `(x2, y2, a1, b1)` and outputs
//! `(x1, y1, a2, b2)`. Each role is one leg.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::{classical_embed, Channel};
use crate::classical::ClassicalCorrelation;
use crate::error::{Error, Result};
use crate::report::Report;
use crate::stochastic::{check_state, StochOpMatrix, StronglyStochOpMatrix};
use crate::tensor::{max_abs_diff, re, CMatrix, LabeledMatrix, C64, DEFAULT_TOL};

/// Role names of an SQNS correlation, inputs then outputs.
pub const SQNS_ROLES: [&str; 8] = ["x2", "y2", "a1", "b1", "x1", "y1", "a2", "b2"];

/// Role names of a two-party correlation, inputs then outputs.
pub const QNS_ROLES: [&str; 4] = ["x", "y", "a", "b"];

/// How a correlation's class membership is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassTag {
    Ns,
    Sns,
    LocBuilt,
    QBuilt,
    QcBuilt,
    Unknown,
}

/// A channel `M_{XY} → M_{AB}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    channel: Channel,
    tag: ClassTag,
}

impl Correlation {
    pub fn new(channel: Channel) -> Result<Self> {
        if channel.in_legs().len() != 2 || channel.out_legs().len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "a correlation needs 2 input and 2 output legs, got {} and {}",
                channel.in_legs().len(),
                channel.out_legs().len()
            )));
        }
        Ok(Correlation { channel, tag: ClassTag::Unknown })
    }

    pub fn with_tag(mut self, tag: ClassTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn into_channel(self) -> Channel {
        self.channel
    }

    pub fn tag(&self) -> ClassTag {
        self.tag
    }

    /// Adjoint map with inputs `(a, b)` and outputs `(x, y)`.
    pub fn adjoint(&self) -> Correlation {
        Correlation { channel: self.channel.adjoint(), tag: ClassTag::Unknown }
    }

    pub fn max_abs_diff(&self, other: &Correlation) -> f64 {
        self.channel.max_abs_diff(&other.channel)
    }
}

/// A channel `M_{X₂Y₂A₁B₁} → M_{X₁Y₁A₂B₂}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SqnsCorrelation {
    channel: Channel,
    tag: ClassTag,
}

impl SqnsCorrelation {
    pub fn new(channel: Channel) -> Result<Self> {
        if channel.in_legs().len() != 4 || channel.out_legs().len() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "an SQNS correlation needs 4 input and 4 output legs, got {} and {}",
                channel.in_legs().len(),
                channel.out_legs().len()
            )));
        }
        Ok(SqnsCorrelation { channel, tag: ClassTag::Unknown })
    }

    pub fn with_tag(mut self, tag: ClassTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn tag(&self) -> ClassTag {
        self.tag
    }

    /// Leg name for each role in [`SQNS_ROLES`] order.
    pub fn role_names(&self) -> Vec<&str> {
        self.channel.in_names().into_iter().chain(self.channel.out_names()).collect()
    }

    /// The adjoint `Γ*` with legs reordered so it acts as a simulator for
    /// adjoint strategies: inputs `(a2, b2, x1, y1)`, outputs `(a1, b1, x2, y2)`.
    pub fn adjoint_as_simulator(&self) -> SqnsCorrelation {
        let n = self.role_names();
        let adj = self.channel.adjoint();
        let ch = adj
            .reorder(&[n[6], n[7], n[4], n[5]], &[n[2], n[3], n[0], n[1]])
            .expect("own legs");
        SqnsCorrelation { channel: ch, tag: ClassTag::Unknown }
    }

    pub fn max_abs_diff(&self, other: &SqnsCorrelation) -> f64 {
        self.channel.max_abs_diff(&other.channel)
    }
}

/// Violation of the one-cut no-signalling condition for `(in_leg → out_leg)`:
/// for every fixed pair of remaining indices, `Σ_{l_out} C[(l,r,l_out,s),(l',r',l_out,s')]`
/// must equal `δ_{ll'}·c`. Scores the larger of the diagonal spread around its
/// mean and the largest off-diagonal magnitude.
pub fn cut_violation(choi: &LabeledMatrix, in_leg: &str, out_leg: &str) -> Result<f64> {
    let t = choi.partial_trace(&[out_leg])?;
    let names = t.legs().names();
    let mut order = vec![in_leg];
    order.extend(names.iter().copied().filter(|n| *n != in_leg));
    let t = t.permute_legs(&order)?;
    let l = t.legs().size_of(in_leg)?;
    let rest = t.dim() / l;
    let d = t.data();
    let mut worst: f64 = 0.0;
    for r in 0..rest {
        for c in 0..rest {
            let mean = (0..l).map(|i| d[(i * rest + r, i * rest + c)]).sum::<C64>() / re(l as f64);
            for i in 0..l {
                for j in 0..l {
                    let v = d[(i * rest + r, j * rest + c)];
                    let dev = if i == j { (v - mean).norm() } else { v.norm() };
                    worst = worst.max(dev);
                }
            }
        }
    }
    Ok(worst)
}

/// QNS test on the cuts `(x → a)` and `(y → b)`.
pub fn is_qns(c: &Correlation, tol: f64) -> Report {
    let ch = &c.channel;
    let (i, o) = (ch.in_names(), ch.out_names());
    let mut r = Report::new();
    for (label, inl, outl) in [("x->a", i[0], o[0]), ("y->b", i[1], o[1])] {
        let v = cut_violation(ch.choi(), inl, outl).expect("own legs");
        r.check(label, v, tol);
    }
    r
}

/// SQNS test on the four cuts `(x2 → x1)`, `(y2 → y1)`, `(a1 → a2)`, `(b1 → b2)`.
pub fn is_sqns(c: &SqnsCorrelation, tol: f64) -> Report {
    let n = c.role_names();
    let mut r = Report::new();
    for (label, inl, outl) in [
        ("x2->x1", n[0], n[4]),
        ("y2->y1", n[1], n[5]),
        ("a1->a2", n[2], n[6]),
        ("b1->b2", n[3], n[7]),
    ] {
        let v = cut_violation(c.channel.choi(), inl, outl).expect("own legs");
        r.check(label, v, tol);
    }
    r
}

/// `Σ_j λ_j Φ_X^j ⊗ Φ_Y^j ⊗ Φ_A^j ⊗ Φ_B^j`. Each component lists channels
/// `X₂→X₁`, `Y₂→Y₁`, `A₁→A₂`, `B₁→B₂`; leg names must agree across components.
pub fn build_local(components: &[(f64, [&Channel; 4])]) -> Result<SqnsCorrelation> {
    check_weights(components.iter().map(|c| c.0))?;
    let mut acc: Option<Channel> = None;
    let mut sum: Option<CMatrix> = None;
    for (w, [cx, cy, ca, cb]) in components {
        let t = cx.tensor(cy)?.tensor(ca)?.tensor(cb)?;
        if let Some(first) = &acc {
            if first.in_legs() != t.in_legs() || first.out_legs() != t.out_legs() {
                return Err(Error::DimensionMismatch("components have different legs".into()));
            }
        }
        let scaled = t.choi_data() * re(*w);
        sum = Some(match sum {
            Some(s) => s + scaled,
            None => scaled,
        });
        acc.get_or_insert(t);
    }
    let first = acc.expect("weights checked non-empty");
    let ch = Channel::new(first.in_legs().clone(), first.out_legs().clone(), sum.expect("non-empty"))?;
    Ok(SqnsCorrelation::new(ch)?.with_tag(ClassTag::LocBuilt))
}

/// Two-party local correlation `Σ_i λ_i Φ_i ⊗ Ψ_i` with `Φ_i: X→A`, `Ψ_i: Y→B`.
pub fn build_local_qns(components: &[(f64, &Channel, &Channel)]) -> Result<Correlation> {
    check_weights(components.iter().map(|c| c.0))?;
    let parts = components
        .iter()
        .map(|(w, p, q)| Ok((*w, p.tensor(q)?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(f64, &Channel)> = parts.iter().map(|(w, c)| (*w, c)).collect();
    Ok(Correlation::new(Channel::mixture(&refs)?)?.with_tag(ClassTag::LocBuilt))
}

fn check_weights(ws: impl Iterator<Item = f64>) -> Result<()> {
    let ws: Vec<f64> = ws.collect();
    if ws.is_empty() {
        return Err(Error::InvalidWeights("no components".into()));
    }
    if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("negative weight".into()));
    }
    let s: f64 = ws.iter().sum();
    if (s - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {s}")));
    }
    Ok(())
}

fn check_unit(xi: &DVector<C64>, dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::DimensionMismatch(format!("vector of length {} for dimension {dim}", xi.len())));
    }
    let n = xi.norm();
    if (n - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

/// Single-leg role names of a strongly stochastic matrix over `(P₂·Q₁, P₁·Q₂)`.
fn party_legs(m: &StronglyStochOpMatrix) -> Result<[String; 4]> {
    let e = m.matrix();
    let (xs, as_) = (e.x_legs().names(), e.a_legs().names());
    if xs.len() != 2 || as_.len() != 2 {
        return Err(Error::DimensionMismatch("expected one leg per role".into()));
    }
    Ok([xs[0].into(), xs[1].into(), as_[0].into(), as_[1].into()])
}

/// `Γ_{M⊙N, ξ}` for `M` over `(X₂A₁, X₁A₂)` on `H` and `N` over `(Y₂B₁, Y₁B₂)`
/// on `K`, with `ξ ∈ H ⊗ K`.
pub fn build_quantum(m: &StronglyStochOpMatrix, n: &StronglyStochOpMatrix, xi: &DVector<C64>) -> Result<SqnsCorrelation> {
    let (me, ne) = (m.matrix(), n.matrix());
    let (dh, dk) = (me.ancilla_dim(), ne.ancilla_dim());
    check_unit(xi, dh * dk)?;
    let [x2, a1, x1, a2] = party_legs(m)?;
    let [y2, b1, y1, b2] = party_legs(n)?;
    // ⟨(A ⊗ B)ξ, ξ⟩ = Σ_{k,k'} B[k,k'] (Ξ* A Ξ)[k,k'] with ξ = vec_row(Ξ)
    let big_xi = CMatrix::from_fn(dh, dk, |h, k| xi[h * dk + k]);
    let (nm_x, nm_a) = (me.x_legs().dim(), me.a_legs().dim());
    let (nn_x, nn_a) = (ne.x_legs().dim(), ne.a_legs().dim());
    let mut compressed = Vec::with_capacity(nm_x * nm_x * nm_a * nm_a);
    for i in 0..nm_x {
        for ip in 0..nm_x {
            for o in 0..nm_a {
                for op in 0..nm_a {
                    compressed.push(big_xi.adjoint() * me.entry(i, ip, o, op) * &big_xi);
                }
            }
        }
    }
    let mut n_entries = Vec::with_capacity(nn_x * nn_x * nn_a * nn_a);
    for i in 0..nn_x {
        for ip in 0..nn_x {
            for o in 0..nn_a {
                for op in 0..nn_a {
                    n_entries.push(ne.entry(i, ip, o, op));
                }
            }
        }
    }
    let sz = |name: &str, e: &StochOpMatrix| -> usize {
        e.x_legs().size_of(name).or_else(|_| e.a_legs().size_of(name)).expect("own leg")
    };
    let sizes = [
        sz(&x2, me), sz(&y2, ne), sz(&a1, me), sz(&b1, ne),
        sz(&x1, me), sz(&y1, ne), sz(&a2, me), sz(&b2, ne),
    ];
    let legs = crate::tensor::LegSystem::new(
        [&x2, &y2, &a1, &b1, &x1, &y1, &a2, &b2]
            .iter()
            .zip(sizes)
            .map(|(n, s)| crate::tensor::Leg::new(n.as_str(), s))
            .collect(),
    )?;
    let dim = legs.dim();
    let mut choi = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let r = legs.multi_index(row);
        for col in 0..dim {
            let c = legs.multi_index(col);
            // M input (x2,a1), output (x1,a2); N input (y2,b1), output (y1,b2)
            let mi = (r[0] * sizes[2] + r[2], c[0] * sizes[2] + c[2], r[4] * sizes[6] + r[6], c[4] * sizes[6] + c[6]);
            let ni = (r[1] * sizes[3] + r[3], c[1] * sizes[3] + c[3], r[5] * sizes[7] + r[7], c[5] * sizes[7] + c[7]);
            let a = &compressed[((mi.0 * nm_x + mi.1) * nm_a + mi.2) * nm_a + mi.3];
            let b = &n_entries[((ni.0 * nn_x + ni.1) * nn_a + ni.2) * nn_a + ni.3];
            choi[(row, col)] = a.iter().zip(b.iter()).map(|(p, q)| p * q).sum();
        }
    }
    let in_legs = legs.select(&[&x2, &y2, &a1, &b1])?;
    let out_legs = legs.select(&[&x1, &y1, &a2, &b2])?;
    let ch = Channel::new(in_legs, out_legs, choi)?;
    Ok(SqnsCorrelation::new(ch)?.with_tag(ClassTag::QBuilt))
}

/// `Γ_{E,F,ξ}` with `E = E_X·E_Y` and `F = F_A·F_B` on a common ancilla:
/// `Γ(…) = ⟨E_X E_Y F_A F_B ξ, ξ⟩`. Inputs are `E_X: (X₂, X₁)`, `E_Y: (Y₂, Y₁)`,
/// `F_A: (A₁, A₂)`, `F_B: (B₁, B₂)`, all entries mutually commuting.
pub fn build_qc(
    ex: &StochOpMatrix,
    ey: &StochOpMatrix,
    fa: &StochOpMatrix,
    fb: &StochOpMatrix,
    xi: &DVector<C64>,
    tol: f64,
) -> Result<SqnsCorrelation> {
    let parts = [ex, ey, fa, fb];
    let d = ex.ancilla_dim();
    if parts.iter().any(|p| p.ancilla_dim() != d) {
        return Err(Error::DimensionMismatch("build_qc needs a common ancilla".into()));
    }
    check_unit(xi, d)?;
    for i in 0..4 {
        for j in i + 1..4 {
            let v = parts[i].commutation_violation(parts[j]);
            if v > tol {
                return Err(Error::Commutation(v));
            }
        }
    }
    let one_leg = |e: &StochOpMatrix| -> Result<(String, usize, String, usize)> {
        let (x, a) = (e.x_legs().legs(), e.a_legs().legs());
        if x.len() != 1 || a.len() != 1 {
            return Err(Error::DimensionMismatch("expected one leg per role".into()));
        }
        Ok((x[0].name.clone(), x[0].size, a[0].name.clone(), a[0].size))
    };
    let (x2, nx2, x1, nx1) = one_leg(ex)?;
    let (y2, ny2, y1, ny1) = one_leg(ey)?;
    let (a1, na1, a2, na2) = one_leg(fa)?;
    let (b1, nb1, b2, nb2) = one_leg(fb)?;
    let entries = |e: &StochOpMatrix| -> Vec<CMatrix> {
        let (n, m) = (e.x_legs().dim(), e.a_legs().dim());
        let mut v = Vec::with_capacity(n * n * m * m);
        for i in 0..n {
            for ip in 0..n {
                for o in 0..m {
                    for op in 0..m {
                        v.push(e.entry(i, ip, o, op));
                    }
                }
            }
        }
        v
    };
    let (exe, eye, fae, fbe) = (entries(ex), entries(ey), entries(fa), entries(fb));
    // u[(ia, ib)] = F_A F_B ξ and w[(ix, iy)] = (E_X E_Y)* ξ, so Γ = ⟨u, w⟩
    let u: Vec<DVector<C64>> = fae.iter().flat_map(|fa| fbe.iter().map(move |fb| fa * (fb * xi))).collect();
    let w: Vec<DVector<C64>> = exe
        .iter()
        .flat_map(|ex| eye.iter().map(move |ey| ey.adjoint() * (ex.adjoint() * xi)))
        .collect();
    let legs = crate::tensor::LegSystem::of(&[
        (&x2, nx2), (&y2, ny2), (&a1, na1), (&b1, nb1),
        (&x1, nx1), (&y1, ny1), (&a2, na2), (&b2, nb2),
    ])?;
    let dim = legs.dim();
    let idx4 = |i: usize, ip: usize, o: usize, op: usize, n: usize, m: usize| ((i * n + ip) * m + o) * m + op;
    let (nfb, ney) = (fbe.len(), eye.len());
    let mut choi = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let r = legs.multi_index(row);
        for col in 0..dim {
            let c = legs.multi_index(col);
            let ix = idx4(r[0], c[0], r[4], c[4], nx2, nx1);
            let iy = idx4(r[1], c[1], r[5], c[5], ny2, ny1);
            let ia = idx4(r[2], c[2], r[6], c[6], na1, na2);
            let ib = idx4(r[3], c[3], r[7], c[7], nb1, nb2);
            choi[(row, col)] = w[ix * ney + iy].dotc(&u[ia * nfb + ib]);
        }
    }
    let in_legs = legs.select(&[&x2, &y2, &a1, &b1])?;
    let out_legs = legs.select(&[&x1, &y1, &a2, &b2])?;
    let ch = Channel::new(in_legs, out_legs, choi)?;
    Ok(SqnsCorrelation::new(ch)?.with_tag(ClassTag::QcBuilt))
}

/// Embeds four matrices on separate ancillas `H_X ⊗ H_Y ⊗ H_A ⊗ H_B` so their
/// entries commute, then calls [`build_qc`].
pub fn build_qc_embedded(
    ex: &StochOpMatrix,
    ey: &StochOpMatrix,
    fa: &StochOpMatrix,
    fb: &StochOpMatrix,
    xi: &DVector<C64>,
) -> Result<SqnsCorrelation> {
    let ds = [ex.ancilla_dim(), ey.ancilla_dim(), fa.ancilla_dim(), fb.ancilla_dim()];
    let before = |i: usize| ds[..i].iter().product::<usize>();
    let after = |i: usize| ds[i + 1..].iter().product::<usize>();
    let emb: Vec<StochOpMatrix> = [ex, ey, fa, fb]
        .iter()
        .enumerate()
        .map(|(i, e)| e.embed_ancilla(before(i), after(i)))
        .collect();
    build_qc(&emb[0], &emb[1], &emb[2], &emb[3], xi, DEFAULT_TOL)
}

/// Which marginal of an SQNS correlation to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `M_{X₂Y₂} → M_{X₁Y₁}`, with a state fed into `A₁B₁`.
    X,
    /// `M_{A₁B₁} → M_{A₂B₂}`, with a state fed into `X₂Y₂`.
    A,
}

fn marginal_choi(c: &SqnsCorrelation, side: Side, sigma: &CMatrix) -> Result<Channel> {
    let n = c.role_names();
    let (fed, traced, keep_in, keep_out) = match side {
        Side::X => ([n[2], n[3]], [n[6], n[7]], [n[0], n[1]], [n[4], n[5]]),
        Side::A => ([n[0], n[1]], [n[4], n[5]], [n[2], n[3]], [n[6], n[7]]),
    };
    let m = c.channel.choi().slice(&fed, &sigma.transpose())?.partial_trace(&traced)?;
    let order = [keep_in[0], keep_in[1], keep_out[0], keep_out[1]];
    let m = m.permute_legs(&order)?;
    let ch = c.channel();
    let in_legs = ch.in_legs().select(&keep_in)?;
    let out_legs = ch.out_legs().select(&keep_out)?;
    Ok(Channel::trusted(in_legs, out_legs, m.into_data()))
}

/// Marginal QNS channel of an SQNS correlation. The result is recomputed on
/// every matrix unit of the fed system; any dependence on the fed state
/// beyond `tol` is an error.
pub fn marginal(c: &SqnsCorrelation, side: Side, sigma: &CMatrix, tol: f64) -> Result<Correlation> {
    let n = c.role_names();
    let fed_dim = match side {
        Side::X => c.channel.in_legs().select(&[n[2], n[3]])?.dim(),
        Side::A => c.channel.in_legs().select(&[n[0], n[1]])?.dim(),
    };
    check_state(sigma, fed_dim, tol)?;
    let base = marginal_choi(c, side, sigma)?;
    let mut dev: f64 = 0.0;
    for k in 0..fed_dim {
        for kp in 0..fed_dim {
            let mut unit = CMatrix::zeros(fed_dim, fed_dim);
            unit[(k, kp)] = C64::new(1.0, 0.0);
            let m = marginal_choi(c, side, &unit)?;
            let d = if k == kp {
                max_abs_diff(m.choi_data(), base.choi_data())
            } else {
                m.choi_data().iter().fold(0.0_f64, |a, z| a.max(z.norm()))
            };
            dev = dev.max(d);
        }
    }
    if dev > tol {
        return Err(Error::MarginalDependence(dev));
    }
    Correlation::new(base)
}

/// Unital, and the adjoint passes the QNS test.
pub fn is_bicorrelation(c: &Correlation, tol: f64) -> Report {
    let mut r = Report::new();
    r.check("unital", c.channel.unital_violation(), tol);
    r.absorb("adjoint", is_qns(&c.adjoint(), tol));
    r
}

/// Unital, and the adjoint (as a simulator) passes the SQNS test.
pub fn is_sqns_bicorrelation(c: &SqnsCorrelation, tol: f64) -> Report {
    let mut r = Report::new();
    r.check("unital", c.channel.unital_violation(), tol);
    r.absorb("adjoint", is_sqns(&c.adjoint_as_simulator(), tol));
    r
}

/// `Γ_p` for a classical correlation over `(X₂Y₂A₁B₁, X₁Y₁A₂B₂)`.
pub fn classical_sqns(p: &ClassicalCorrelation) -> Result<SqnsCorrelation> {
    SqnsCorrelation::new(classical_embed(p)?)
}
