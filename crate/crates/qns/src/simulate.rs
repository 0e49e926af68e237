//! Feeding an inner strategy through an SQNS simulator.

use crate::channel::Channel;
use crate::correlation::{is_bicorrelation, Correlation, SqnsCorrelation};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::stochastic::StochOpMatrix;
use crate::tensor::{CMatrix, DEFAULT_TOL};

/// `Γ[E]`: the channel `M_{X₂Y₂} → M_{A₂B₂}` obtained by routing `e` through `g`.
///
/// `e`'s inputs are matched by position and size against `g`'s `(x1, y1)`
/// outputs and `e`'s outputs against `g`'s `(a1, b1)` inputs.
pub fn simulate(g: &SqnsCorrelation, e: &Correlation) -> Result<Correlation> {
    let n = g.role_names();
    let gc = g.channel();
    let ec = e.channel();
    let want_in = gc.out_legs().select(&[n[4], n[5]])?.sizes();
    let want_out = gc.in_legs().select(&[n[2], n[3]])?.sizes();
    if ec.in_legs().sizes() != want_in || ec.out_legs().sizes() != want_out {
        return Err(Error::DimensionMismatch(format!(
            "inner strategy has legs {:?} -> {:?}, simulator expects {:?} -> {:?}",
            ec.in_legs().sizes(),
            ec.out_legs().sizes(),
            want_in,
            want_out
        )));
    }
    // rows (x2,y2,a2,b2 | x1,y1,a1,b1); contracting the middle against Eᵀ
    // through slice gives Σ G[(o,m),(o',m')] E[m,m']
    let reordered = gc.choi().permute_legs(&[n[0], n[1], n[6], n[7], n[4], n[5], n[2], n[3]])?;
    let choi = reordered.slice(&[n[4], n[5], n[2], n[3]], &ec.choi_data().transpose())?;
    let in_legs = gc.in_legs().select(&[n[0], n[1]])?;
    let out_legs = gc.out_legs().select(&[n[6], n[7]])?;
    let ch = Channel::cp_map(in_legs, out_legs, choi.into_data(), DEFAULT_TOL)?;
    Correlation::new(ch)
}

/// Stochastic matrices `Ẽ` over `(X₂, A₂)` and `F̃` over `(Y₂, B₂)` on
/// `H ⊗ K` whose product state reproduces a simulated quantum-commuting
/// strategy. `px: (X₂,X₁)`, `py: (Y₂,Y₁)`, `qa: (A₁,A₂)`, `qb: (B₁,B₂)` live on
/// `H`; `e: (X₁,A₁)` and `f: (Y₁,B₁)` live on `K`.
pub fn qc_transfer_witness(
    px: &StochOpMatrix,
    py: &StochOpMatrix,
    qa: &StochOpMatrix,
    qb: &StochOpMatrix,
    e: &StochOpMatrix,
    f: &StochOpMatrix,
    tol: f64,
) -> Result<(StochOpMatrix, StochOpMatrix)> {
    let sim = [px, py, qa, qb];
    let dh = px.ancilla_dim();
    if sim.iter().any(|m| m.ancilla_dim() != dh) || e.ancilla_dim() != f.ancilla_dim() {
        return Err(Error::DimensionMismatch("simulator and inner data each need a common ancilla".into()));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let v = sim[i].commutation_violation(sim[j]);
            if v > tol {
                return Err(Error::Commutation(v));
            }
        }
    }
    let v = e.commutation_violation(f);
    if v > tol {
        return Err(Error::Commutation(v));
    }
    Ok((transfer_one(px, qa, e)?, transfer_one(py, qb, f)?))
}

/// `Σ_{x₁x₁'a₁a₁'} P_{x₂x₂',x₁x₁'} Q_{a₁a₁',a₂a₂'} ⊗ E_{x₁x₁',a₁a₁'}`.
fn transfer_one(p: &StochOpMatrix, q: &StochOpMatrix, e: &StochOpMatrix) -> Result<StochOpMatrix> {
    let (n1, m1) = (p.a_legs().dim(), q.x_legs().dim());
    if e.x_legs().dim() != n1 || e.a_legs().dim() != m1 {
        return Err(Error::DimensionMismatch("inner matrix does not fit the simulator's middle legs".into()));
    }
    let dk = e.ancilla_dim();
    let d = p.ancilla_dim() * dk;
    let inner: Vec<CMatrix> = (0..n1 * n1 * m1 * m1)
        .map(|i| {
            let (x, r) = (i / (n1 * m1 * m1), i % (n1 * m1 * m1));
            let (xp, r) = (r / (m1 * m1), r % (m1 * m1));
            e.entry(x, xp, r / m1, r % m1)
        })
        .collect();
    StochOpMatrix::from_entries(p.x_legs().clone(), q.a_legs().clone(), d, |x2, x2p, a2, a2p| {
        let mut acc = CMatrix::zeros(d, d);
        for x1 in 0..n1 {
            for x1p in 0..n1 {
                let pe = p.entry(x2, x2p, x1, x1p);
                for a1 in 0..m1 {
                    for a1p in 0..m1 {
                        let pq = &pe * q.entry(a1, a1p, a2, a2p);
                        acc += pq.kronecker(&inner[((x1 * n1 + x1p) * m1 + a1) * m1 + a1p]);
                    }
                }
            }
        }
        acc
    })
}

/// Compares `Γ*[E*]` with `Γ[E]*` and checks that `Γ[E]` is a bicorrelation.
pub fn simulate_adjoint_check(g: &SqnsCorrelation, e: &Correlation, tol: f64) -> Result<Report> {
    let forward = simulate(g, e)?;
    let backward = simulate(&g.adjoint_as_simulator(), &e.adjoint())?;
    let mut r = Report::new();
    r.check("adjoint_identity", backward.max_abs_diff(&forward.adjoint()), tol);
    r.absorb("simulated", is_bicorrelation(&forward, tol));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::build_local;
    use crate::tensor::LegSystem;

    fn id(a: &str, b: &str) -> Channel {
        Channel::identity(LegSystem::of(&[(a, 2)]).unwrap(), LegSystem::of(&[(b, 2)]).unwrap()).unwrap()
    }

    fn identity_sim() -> SqnsCorrelation {
        build_local(&[(1.0, [&id("x2", "x1"), &id("y2", "y1"), &id("a1", "a2"), &id("b1", "b2")])]).unwrap()
    }

    #[test]
    fn identity_simulator_passes_strategy_through() {
        let e = Correlation::new(id("x", "a").tensor(&id("y", "b")).unwrap()).unwrap();
        let out = simulate(&identity_sim(), &e).unwrap();
        assert!(max_abs_diff_raw(&out, &e) < 1e-12);
        assert_eq!(out.channel().in_names(), vec!["x2", "y2"]);
        assert_eq!(out.channel().out_names(), vec!["a2", "b2"]);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let big = Channel::identity(LegSystem::of(&[("x", 3)]).unwrap(), LegSystem::of(&[("a", 3)]).unwrap()).unwrap();
        let e = Correlation::new(big.tensor(&id("y", "b")).unwrap()).unwrap();
        assert!(matches!(simulate(&identity_sim(), &e), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn identity_adjoint_check() {
        let e = Correlation::new(id("x", "a").tensor(&id("y", "b")).unwrap()).unwrap();
        let r = simulate_adjoint_check(&identity_sim(), &e, 1e-12).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    fn max_abs_diff_raw(a: &Correlation, b: &Correlation) -> f64 {
        crate::tensor::max_abs_diff(a.channel().choi_data(), b.channel().choi_data())
    }
}
