//! Line extensions: the two structures a twist candidate induces over
//! `M × ℝ`, the exponential gauge map between them, and the exact scaling
//! identities that turn twisted defects into ordinary ones.
//!
//! Given an algebroid (Lie or left-symmetric) over a patch and a twist
//! candidate `φ₀`, adjoining the line coordinate `t` yields two structures
//! of unchanged rank:
//!
//! * the **bar** variant keeps the structure table and adds `⟨φ₀,·⟩∂t` to
//!   the anchor — the bracket/product of `t`-dependent sections then picks
//!   up the derivation terms `⟨φ₀,X̃⟩ ∂Ỹ/∂t` automatically through the
//!   Leibniz rule;
//! * the **hat** variant is the conjugate of bar under the gauge map
//!   `Ψ = e^t` ([`psi_lie_defects`]/[`psi_lsa_defects`] certify the
//!   intertwining for arbitrary candidates): every structure function
//!   acquires a factor `e^{-t}` and the table absorbs rank-one corrections
//!   by `φ₀`.
//!
//! Both candidates validate exactly when `φ₀` is a cocycle.  The payoff is
//! a pair of exact weight identities computed by [`poissonize`] and
//! [`kv_ize`]: the `e^{-t}`-weighted lift of a bivector (resp. symmetric
//! tensor) has bar-extension self-bracket `e^{-2t}` times the *twisted*
//! self-bracket downstairs, for arbitrary input — so Jacobi structures
//! lift to Poisson structures and Jacobi-Koszul-Vinberg tensors lift to
//! Koszul-Vinberg tensors.

use crate::algebroid::LieAlgebroid;
use crate::bundle::AnchoredBundle;
use crate::error::Result;
use crate::lsa::{kv_bracket, LeftSymmetricAlgebroid, SymmetricTensor};
use crate::jacobi_lsa::{jkv_bracket, JacobiLSA};
use crate::multivector::{Multisection, Multivector};
use crate::poisson::JacobiAlgebroid;
use crate::scalar::Scalar;

/// Which of the two line-extension structures to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Unweighted structure table; anchor gains the `⟨φ₀,·⟩∂t` row.
    Bar,
    /// `e^{-t}`-weighted conjugate of bar under the gauge map `Ψ = e^t`.
    Hat,
}

fn extended_bundle(
    parent: &AnchoredBundle,
    phi0: &[Scalar],
    variant: Variant,
) -> Result<AnchoredBundle> {
    let r = parent.rank();
    let mut vars: Vec<String> = parent.vars().to_vec();
    vars.push("t".to_string());
    let mut anchor: Vec<Vec<Scalar>> = (0..parent.nvars())
        .map(|a| (0..r).map(|i| parent.anchor_entry(a, i).lift_line()).collect())
        .collect();
    anchor.push(phi0.iter().map(Scalar::lift_line).collect());
    if variant == Variant::Hat {
        let ctx = anchor[0][0].ctx();
        let weight = Scalar::exp_t(ctx, -1);
        for row in &mut anchor {
            for entry in row {
                *entry = entry.mul(&weight);
            }
        }
    }
    AnchoredBundle::new(vars, r, anchor)
}

/// Extend a Lie algebroid with a twist candidate `φ₀` to `M × ℝ`.  The
/// result is returned unvalidated: its axioms pass exactly when
/// `d φ₀ = 0`.
pub fn extend_lie(
    l: &LieAlgebroid,
    phi0: &[Scalar],
    variant: Variant,
) -> Result<LieAlgebroid> {
    assert_eq!(phi0.len(), l.rank(), "twist candidate has the wrong length");
    let bundle = extended_bundle(l.bundle(), phi0, variant)?;
    let ctx = bundle.ctx();
    let r = l.rank();
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let mut v = l.structure_constant(i, j, k).lift_line();
                if variant == Variant::Hat {
                    if j == k {
                        v = v.sub(&phi0[i].lift_line());
                    }
                    if i == k {
                        v = v.add(&phi0[j].lift_line());
                    }
                    v = v.mul(&Scalar::exp_t(ctx, -1));
                }
                table[i][j][k] = v;
            }
        }
    }
    LieAlgebroid::new_unvalidated(bundle, table)
}

/// Extend a left-symmetric algebroid with a twist candidate `φ₀` to
/// `M × ℝ`.  The result is returned unvalidated: its axioms pass exactly
/// when `δ φ₀` is symmetric.
pub fn extend_lsa(
    s: &LeftSymmetricAlgebroid,
    phi0: &[Scalar],
    variant: Variant,
) -> Result<LeftSymmetricAlgebroid> {
    assert_eq!(phi0.len(), s.rank(), "twist candidate has the wrong length");
    let bundle = extended_bundle(s.bundle(), phi0, variant)?;
    let ctx = bundle.ctx();
    let r = s.rank();
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let mut v = s.product_constant(i, j, k).lift_line();
                if variant == Variant::Hat {
                    if j == k {
                        v = v.sub(&phi0[i].lift_line());
                    }
                    v = v.mul(&Scalar::exp_t(ctx, -1));
                }
                table[i][j][k] = v;
            }
        }
    }
    LeftSymmetricAlgebroid::new_unvalidated(bundle, table)
}

/// Deterministic `t`-dependent test coefficients over an extended context:
/// polynomial in the base variables and in `t`, so that every derivation
/// term of the extended structures fires.
fn test_coefficients(bundle: &AnchoredBundle, count: usize) -> Vec<Scalar> {
    let ctx = bundle.ctx();
    let t = Scalar::var(ctx, ctx.nvars - 1);
    let base = if ctx.nvars >= 2 {
        Scalar::var(ctx, 0)
    } else {
        Scalar::int(ctx, 2)
    };
    (0..count)
        .map(|m| match m % 3 {
            0 => base.mul(&t).add(&Scalar::one(ctx)),
            1 => t.pow(2).add(&Scalar::one(ctx)),
            _ => base.add(&t),
        })
        .collect()
}

/// Intertwining defects of the gauge map `Ψ = e^t` between the two Lie
/// extensions of `(l, φ₀)`: the anchor identity `ρ̂(ΨX̃)f = ρ̄(X̃)f` and
/// the bracket identity `Ψ[X̃,Ỹ]bar = [ΨX̃,ΨỸ]hat` on `t`-dependent test
/// sections.  Empty for arbitrary `φ₀`, closed or not.
pub fn psi_lie_defects(l: &LieAlgebroid, phi0: &[Scalar]) -> Vec<(String, Scalar)> {
    let bar = extend_lie(l, phi0, Variant::Bar).expect("bar extension is well-shaped");
    let hat = extend_lie(l, phi0, Variant::Hat).expect("hat extension is well-shaped");
    let ctx = bar.ctx();
    let r = l.rank();
    let coeffs = test_coefficients(bar.bundle(), r.max(2) + 1);
    let psi = Scalar::exp_t(ctx, 1);
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..r {
            let x: Vec<Scalar> = (0..r)
                .map(|m| if m == i { coeffs[i % coeffs.len()].clone() } else { Scalar::zero(ctx) })
                .collect();
            let y: Vec<Scalar> = (0..r)
                .map(|m| {
                    if m == j {
                        coeffs[(j + 1) % coeffs.len()].clone()
                    } else {
                        Scalar::zero(ctx)
                    }
                })
                .collect();
            let lhs: Vec<Scalar> = bar.bracket(&x, &y).iter().map(|v| v.mul(&psi)).collect();
            let px: Vec<Scalar> = x.iter().map(|v| v.mul(&psi)).collect();
            let py: Vec<Scalar> = y.iter().map(|v| v.mul(&psi)).collect();
            let rhs = hat.bracket(&px, &py);
            for (k, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
                let d = a.sub(b);
                if !d.is_zero() {
                    out.push((format!("bracket intertwine(e{i},e{j}) on e{k}"), d));
                }
            }
        }
        let f = coeffs[i % coeffs.len()].clone();
        let frame = bar.bundle().basis_section(i);
        let scaled: Vec<Scalar> = frame.iter().map(|v| v.mul(&psi)).collect();
        let lhs = hat.bundle().anchor_apply(&scaled, &f);
        let rhs = bar.bundle().anchor_apply(&frame, &f);
        let d = lhs.sub(&rhs);
        if !d.is_zero() {
            out.push((format!("anchor intertwine(e{i})"), d));
        }
    }
    out
}

/// Intertwining defects of `Ψ = e^t` between the two left-symmetric
/// extensions of `(s, φ₀)`: `ρ̂(ΨX̃)f = ρ̄(X̃)f` and
/// `Ψ(X̃ ·bar Ỹ) = ΨX̃ ·hat ΨỸ` on `t`-dependent test sections.  Empty
/// for arbitrary `φ₀`.
pub fn psi_lsa_defects(s: &LeftSymmetricAlgebroid, phi0: &[Scalar]) -> Vec<(String, Scalar)> {
    let bar = extend_lsa(s, phi0, Variant::Bar).expect("bar extension is well-shaped");
    let hat = extend_lsa(s, phi0, Variant::Hat).expect("hat extension is well-shaped");
    let ctx = bar.ctx();
    let r = s.rank();
    let coeffs = test_coefficients(bar.bundle(), r.max(2) + 1);
    let psi = Scalar::exp_t(ctx, 1);
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..r {
            let x: Vec<Scalar> = (0..r)
                .map(|m| if m == i { coeffs[i % coeffs.len()].clone() } else { Scalar::zero(ctx) })
                .collect();
            let y: Vec<Scalar> = (0..r)
                .map(|m| {
                    if m == j {
                        coeffs[(j + 1) % coeffs.len()].clone()
                    } else {
                        Scalar::zero(ctx)
                    }
                })
                .collect();
            let lhs: Vec<Scalar> = bar.product(&x, &y).iter().map(|v| v.mul(&psi)).collect();
            let px: Vec<Scalar> = x.iter().map(|v| v.mul(&psi)).collect();
            let py: Vec<Scalar> = y.iter().map(|v| v.mul(&psi)).collect();
            let rhs = hat.product(&px, &py);
            for (k, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
                let d = a.sub(b);
                if !d.is_zero() {
                    out.push((format!("product intertwine(e{i},e{j}) on e{k}"), d));
                }
            }
        }
        let f = coeffs[i % coeffs.len()].clone();
        let frame = bar.bundle().basis_section(i);
        let scaled: Vec<Scalar> = frame.iter().map(|v| v.mul(&psi)).collect();
        let lhs = hat.bundle().anchor_apply(&scaled, &f);
        let rhs = bar.bundle().anchor_apply(&frame, &f);
        let d = lhs.sub(&rhs);
        if !d.is_zero() {
            out.push((format!("anchor intertwine(e{i})"), d));
        }
    }
    out
}

/// Lift a multivector over the parent patch to the extended patch
/// (components unchanged, scalars gain the `t` variable).
pub fn lift_multivector(m: &Multivector) -> Multivector {
    m.lift_line()
}

/// Poissonization: `π̃ = e^{-t}·lift(π)` over the bar extension, plus a
/// defect report with two families — the exact scaling identity
/// `[π̃,π̃]bar − e^{-2t}·lift([π,π]_{φ₀})` (labelled `scaling`, empty for
/// *arbitrary* `π` and `φ₀`) and the Poisson defect `[π̃,π̃]bar` itself
/// (labelled `poisson`, empty exactly when `π` satisfies the twisted
/// bracket condition downstairs).
pub fn poissonize(
    j: &JacobiAlgebroid,
    pi: &Multisection,
) -> Result<(Multisection, Vec<(String, Scalar)>)> {
    let bar = extend_lie(j.lie(), j.phi0(), Variant::Bar)?;
    let ctx = bar.ctx();
    let weight = Scalar::exp_t(ctx, -1);
    let pi_tilde = pi.lift_line().scale(&weight);
    let bracket = bar.schouten(&pi_tilde, &pi_tilde);
    let twisted = j.jacobi_defect(pi).lift_line().scale(&Scalar::exp_t(ctx, -2));
    let mut report = Vec::new();
    let scaling = bracket.sub(&twisted);
    for (idx, v) in scaling.terms() {
        report.push((
            format!("scaling on {}", crate::multivector::frame_tag(idx)),
            v.clone(),
        ));
    }
    for (idx, v) in bracket.terms() {
        report.push((
            format!("poisson on {}", crate::multivector::frame_tag(idx)),
            v.clone(),
        ));
    }
    Ok((pi_tilde, report))
}

/// Koszul-Vinbergization: `h̃ = e^{-t}·lift(h)` over the bar extension,
/// plus a defect report with two families — the exact scaling identity
/// `⟦h̃,h̃⟧bar − e^{-2t}·⟦h,h⟧^{φ₀}` on coframe triples (labelled
/// `scaling`, empty for *arbitrary* `h` and `φ₀`) and the Koszul-Vinberg
/// defect `⟦h̃,h̃⟧bar` itself (labelled `kv`, empty exactly when `h` is
/// Jacobi-Koszul-Vinberg downstairs).
pub fn kv_ize(
    j: &JacobiLSA,
    h: &SymmetricTensor,
) -> Result<(SymmetricTensor, Vec<(String, Scalar)>)> {
    let bar = extend_lsa(j.lsa(), j.phi0(), Variant::Bar)?;
    let ctx = bar.ctx();
    let weight = Scalar::exp_t(ctx, -1);
    let r = j.lsa().rank();
    let mat: Vec<Vec<Scalar>> = (0..r)
        .map(|a| (0..r).map(|b| h.entry(a, b).lift_line().mul(&weight)).collect())
        .collect();
    let h_tilde = SymmetricTensor::new(mat)?;
    let down_weight = Scalar::exp_t(ctx, -2);
    let mut report = Vec::new();
    for a in 0..r {
        for b in (a + 1)..r {
            for c in 0..r {
                let alpha = bar.bundle().basis_section(a);
                let beta = bar.bundle().basis_section(b);
                let gamma = bar.bundle().basis_section(c);
                let up = kv_bracket(&bar, &h_tilde, &alpha, &beta, &gamma);
                let down = jkv_bracket(
                    j,
                    h,
                    &j.lsa().bundle().basis_section(a),
                    &j.lsa().bundle().basis_section(b),
                    &j.lsa().bundle().basis_section(c),
                );
                let scaling = up.sub(&down.lift_line().mul(&down_weight));
                if !scaling.is_zero() {
                    report.push((format!("scaling(e^{a},e^{b};e^{c})"), scaling));
                }
                if !up.is_zero() {
                    report.push((format!("kv(e^{a},e^{b};e^{c})"), up));
                }
            }
        }
    }
    Ok((h_tilde, report))
}
