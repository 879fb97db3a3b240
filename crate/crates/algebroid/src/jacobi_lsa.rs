//! Jacobi-left-symmetric algebroids: the twisted Koszul–Vinberg layer.
//!
//! A Jacobi-left-symmetric algebroid is a left-symmetric algebroid together
//! with a distinguished 1-cosection `φ₀` whose coboundary `δφ₀` is
//! *symmetric* — equivalently (see [`cocycle_symmetry_report`], an
//! unconditional identity) `φ₀` is closed for the sub-adjacent
//! differential.  The twist modifies the symmetric-tensor calculus exactly
//! as the Jacobi twist modifies the Poisson calculus:
//!
//! * [`jkv_bracket`] adds two pairing corrections to the plain bracket;
//!   its vanishing defines Jacobi-Koszul-Vinberg structures;
//! * [`twisted_dual_product`] adds `h(φ₀,α)β − h(α,β)φ₀` to the dual
//!   product — equivalently ([`twisted_dual_form_defects`]) it is the
//!   definitional formula with the twisted Lie derivative and twisted
//!   differential of the sub-adjacent Jacobi algebroid;
//! * [`build_dual_jlsa`] equips the dual bundle with the twisted product,
//!   the anchor `ρ∘h♯`, and the distinguished cosection `−h♯φ₀`; the
//!   candidate validates exactly when `⟦h,h⟧^{φ₀} = 0`.
//!
//! The sign conventions are pinned by two identities that must hold for
//! *arbitrary* `h` and `φ₀`: the twisted sharp-compatibility identity
//! ([`twisted_sharp_defects`]) and the dual-cocycle identity
//! ([`dual_cocycle_identity_defects`])
//! `δ_{dual}(−h♯φ₀)(α,β) = −(δφ₀)(h♯α,h♯β) + ⟦h,h⟧^{φ₀}(α,φ₀,β)`.

use crate::bundle::{Covector, Section};
use crate::error::{Error, Result};
use crate::lsa::{
    build_dual_lsa, coboundary, dual_product, kv_bracket, Cochain, LeftSymmetricAlgebroid,
    SymmetricTensor,
};
use crate::multivector::increasing_tuples;
use crate::poisson::JacobiAlgebroid;
use crate::scalar::Scalar;

/// A left-symmetric algebroid with a distinguished 1-cosection whose
/// coboundary is symmetric.
#[derive(Clone, Debug)]
pub struct JacobiLSA {
    lsa: LeftSymmetricAlgebroid,
    phi0: Covector,
}

impl JacobiLSA {
    /// Validating constructor: requires the symmetry of `δφ₀` (the
    /// underlying structure is taken as given and is not re-validated).
    pub fn new(lsa: LeftSymmetricAlgebroid, phi0: Covector) -> Result<JacobiLSA> {
        let j = JacobiLSA::new_unvalidated(lsa, phi0)?;
        if let Some((label, value)) = j.cocycle_defects().first() {
            return Err(Error::Invalid(format!(
                "distinguished cosection is not a cocycle: nonzero {label}: {}",
                value.render(j.lsa.bundle().vars())
            )));
        }
        Ok(j)
    }

    /// Shape-checked constructor for candidates whose defects are to be
    /// inspected.
    pub fn new_unvalidated(lsa: LeftSymmetricAlgebroid, phi0: Covector) -> Result<JacobiLSA> {
        if phi0.len() != lsa.rank() {
            return Err(Error::Shape(format!(
                "distinguished cosection has {} entries but the rank is {}",
                phi0.len(),
                lsa.rank()
            )));
        }
        if phi0.iter().any(|v| v.ctx() != lsa.ctx()) {
            return Err(Error::Shape(
                "distinguished cosection uses a different variable context".into(),
            ));
        }
        Ok(JacobiLSA { lsa, phi0 })
    }

    /// The trivial twist `φ₀ = 0`.
    pub fn trivial(lsa: LeftSymmetricAlgebroid) -> JacobiLSA {
        let phi0 = vec![Scalar::zero(lsa.ctx()); lsa.rank()];
        JacobiLSA { lsa, phi0 }
    }

    /// The underlying left-symmetric algebroid.
    pub fn lsa(&self) -> &LeftSymmetricAlgebroid {
        &self.lsa
    }

    /// The distinguished cosection.
    pub fn phi0(&self) -> &Covector {
        &self.phi0
    }

    /// Symmetry defects of `δφ₀` on increasing frame pairs; empty exactly
    /// when this is a Jacobi-left-symmetric algebroid.
    pub fn cocycle_defects(&self) -> Vec<(String, Scalar)> {
        let r = self.lsa.rank();
        let dphi = coboundary(&self.lsa, &Cochain::from_covector(self.lsa.ctx(), &self.phi0));
        let mut out = Vec::new();
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            let d = dphi.eval_frames(&[i], j).sub(&dphi.eval_frames(&[j], i));
            if !d.is_zero() {
                out.push((format!("delta-symmetry(e{i},e{j})"), d));
            }
        }
        out
    }
}

/// Three defect families tying the symmetry of `δφ₀` to the closedness of
/// `φ₀`: the symmetry defects `δφ₀(e_i,e_j) − δφ₀(e_j,e_i)`, the
/// sub-adjacent differential `dφ₀`, and their difference — the third
/// family is an unconditional identity and must be empty for *arbitrary*
/// `φ₀`, which is what makes the first two vanish together.
pub fn cocycle_symmetry_report(
    s: &LeftSymmetricAlgebroid,
    phi0: &[Scalar],
) -> Vec<(String, Scalar)> {
    let r = s.rank();
    let dphi = coboundary(s, &Cochain::from_covector(s.ctx(), phi0));
    let sub = s.sub_adjacent();
    let exterior = sub.differential(&sub.covector_mv(phi0));
    let mut out = Vec::new();
    for pair in increasing_tuples(r, 2) {
        let (i, j) = (pair[0], pair[1]);
        let sym = dphi.eval_frames(&[i], j).sub(&dphi.eval_frames(&[j], i));
        let ext = exterior.get(&[i, j]);
        if !sym.is_zero() {
            out.push((format!("delta-symmetry(e{i},e{j})"), sym.clone()));
        }
        if !ext.is_zero() {
            out.push((format!("d(phi0) on e{i}{j}"), ext.clone()));
        }
        let identity = sym.sub(&ext);
        if !identity.is_zero() {
            out.push((format!("symmetry identity(e{i},e{j})"), identity));
        }
    }
    out
}

/// The twisted symmetric-tensor bracket:
/// `⟦h,h⟧^{φ₀}(α,β,γ) = ⟦h,h⟧(α,β,γ) + h(φ₀,α)h(β,γ) − h(φ₀,β)h(α,γ)`.
/// Zero for all arguments exactly when `h` is a Jacobi-Koszul-Vinberg
/// structure.
pub fn jkv_bracket(
    j: &JacobiLSA,
    h: &SymmetricTensor,
    alpha: &[Scalar],
    beta: &[Scalar],
    gamma: &[Scalar],
) -> Scalar {
    let base = kv_bracket(j.lsa(), h, alpha, beta, gamma);
    base.add(&h.pair(j.phi0(), alpha).mul(&h.pair(beta, gamma)))
        .sub(&h.pair(j.phi0(), beta).mul(&h.pair(alpha, gamma)))
}

/// Nonzero values of `⟦h,h⟧^{φ₀}` on coframe triples, labelled
/// `jkv-bracket(e^a,e^b;e^c)` with `a < b`.
pub fn jkv_bracket_defects(j: &JacobiLSA, h: &SymmetricTensor) -> Vec<(String, Scalar)> {
    let r = j.lsa().rank();
    let mut out = Vec::new();
    for pair in increasing_tuples(r, 2) {
        let (a, b) = (pair[0], pair[1]);
        let alpha = j.lsa().bundle().basis_section(a);
        let beta = j.lsa().bundle().basis_section(b);
        for c in 0..r {
            let gamma = j.lsa().bundle().basis_section(c);
            let v = jkv_bracket(j, h, &alpha, &beta, &gamma);
            if !v.is_zero() {
                out.push((format!("jkv-bracket(e^{a},e^{b};e^{c})"), v));
            }
        }
    }
    out
}

/// The twisted dual product in closed form:
/// `α ·^{h♯,φ₀} β = α ·^{h♯} β + h(φ₀,α)β − h(α,β)φ₀`.
pub fn twisted_dual_product(
    j: &JacobiLSA,
    h: &SymmetricTensor,
    alpha: &[Scalar],
    beta: &[Scalar],
) -> Covector {
    let base = dual_product(j.lsa(), h, alpha, beta);
    let c = h.pair(j.phi0(), alpha);
    let hab = h.pair(alpha, beta);
    base.iter()
        .zip(beta.iter().zip(j.phi0()))
        .map(|(b, (be, ph))| b.add(&c.mul(be)).sub(&hab.mul(ph)))
        .collect()
}

/// The twisted dual product computed from its definition: the twisted Lie
/// derivative along `h♯α` and the twisted differential of `h(α,β)` are
/// taken on the sub-adjacent Jacobi algebroid, the `R` operator stays
/// untwisted.  Agrees with [`twisted_dual_product`] for arbitrary inputs.
pub fn twisted_dual_product_definitional(
    j: &JacobiLSA,
    h: &SymmetricTensor,
    alpha: &[Scalar],
    beta: &[Scalar],
) -> Covector {
    let sub = j.lsa().sub_adjacent();
    let jac = JacobiAlgebroid::new_unvalidated(sub.clone(), j.phi0().clone());
    let ha = h.sharp(alpha);
    let hb = h.sharp(beta);
    let lie_term = jac.twisted_lie_derivative_cosection(&ha, &sub.covector_mv(beta));
    let r_term = j.lsa().r_op(&hb, alpha);
    let d_term = jac.twisted_differential(&crate::multivector::Multivector::from_scalar(
        j.lsa().rank(),
        h.pair(alpha, beta),
    ));
    lie_term
        .coefficients()
        .iter()
        .zip(&r_term)
        .zip(d_term.coefficients().iter())
        .map(|((l, rr), d)| l.sub(rr).sub(d))
        .collect()
}

/// Differences between the closed and definitional forms of the twisted
/// dual product on coframe pairs — an unconditional identity, so the
/// report is empty for arbitrary `h` and `φ₀`.
pub fn twisted_dual_form_defects(j: &JacobiLSA, h: &SymmetricTensor) -> Vec<(String, Scalar)> {
    let r = j.lsa().rank();
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let alpha = j.lsa().bundle().basis_section(a);
            let beta = j.lsa().bundle().basis_section(b);
            let closed = twisted_dual_product(j, h, &alpha, &beta);
            let def = twisted_dual_product_definitional(j, h, &alpha, &beta);
            for (k, (c, d)) in closed.iter().zip(&def).enumerate() {
                let diff = c.sub(d);
                if !diff.is_zero() {
                    out.push((format!("dual form agreement(e^{a},e^{b}) on e^{k}"), diff));
                }
            }
        }
    }
    out
}

/// Defects of the twisted sharp-compatibility identity
/// `⟦h,h⟧^{φ₀}(α, e^m, β) = ⟨e^m, h♯(α·^{h♯,φ₀}β) − h♯α ·_A h♯β⟩`,
/// which holds for arbitrary `h` and `φ₀`.
pub fn twisted_sharp_defects(j: &JacobiLSA, h: &SymmetricTensor) -> Vec<(String, Scalar)> {
    let r = j.lsa().rank();
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let alpha = j.lsa().bundle().basis_section(a);
            let beta = j.lsa().bundle().basis_section(b);
            let dp = twisted_dual_product(j, h, &alpha, &beta);
            let lhs = h.sharp(&dp);
            let rhs = j.lsa().product(&h.sharp(&alpha), &h.sharp(&beta));
            for m in 0..r {
                let gamma = j.lsa().bundle().basis_section(m);
                let want = jkv_bracket(j, h, &alpha, &gamma, &beta);
                let got = lhs[m].sub(&rhs[m]);
                let d = want.sub(&got);
                if !d.is_zero() {
                    out.push((format!("twisted-sharp(e^{a},e^{b}) on e{m}"), d));
                }
            }
        }
    }
    out
}

/// Defects of the dual-cocycle identity: with `X₀ = −h♯φ₀` read as the
/// distinguished cosection of the dual structure,
///
/// `ρ(h♯α)⟨X₀,β⟩ − ⟨X₀, α·^{h♯,φ₀}β⟩
///    = −(δφ₀)(h♯α, h♯β) + ⟦h,h⟧^{φ₀}(α, φ₀, β)`
///
/// (the left side is `δ_{dual}X₀` evaluated on `(α,β)` before the dual is
/// even built).  Unconditional: empty for arbitrary `h` and `φ₀`.
pub fn dual_cocycle_identity_defects(
    j: &JacobiLSA,
    h: &SymmetricTensor,
) -> Vec<(String, Scalar)> {
    let s = j.lsa();
    let r = s.rank();
    let x0: Section = h.sharp(j.phi0()).iter().map(Scalar::neg).collect();
    let dphi = coboundary(s, &Cochain::from_covector(s.ctx(), j.phi0()));
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let alpha = s.bundle().basis_section(a);
            let beta = s.bundle().basis_section(b);
            let ha = h.sharp(&alpha);
            let hb = h.sharp(&beta);
            let mut lhs = s.rho(&ha, &x0[b]);
            let tw = twisted_dual_product(j, h, &alpha, &beta);
            for (x, v) in x0.iter().zip(&tw) {
                lhs = lhs.sub(&x.mul(v));
            }
            let rhs = dphi
                .eval_sections(&[&ha, &hb])
                .neg()
                .add(&jkv_bracket(j, h, &alpha, j.phi0(), &beta));
            let d = lhs.sub(&rhs);
            if !d.is_zero() {
                out.push((format!("dual-cocycle identity(e^{a},e^{b})"), d));
            }
        }
    }
    out
}

/// Jacobi-left-symmetric candidate on the dual bundle: product from
/// [`twisted_dual_product`] on coframe pairs, anchor `ρ∘h♯`, distinguished
/// cosection `−h♯φ₀`.  Returned unvalidated; the product axioms and the
/// dual cocycle condition both pass exactly when `⟦h,h⟧^{φ₀} = 0`.
pub fn build_dual_jlsa(j: &JacobiLSA, h: &SymmetricTensor) -> Result<JacobiLSA> {
    let s = j.lsa();
    let r = s.rank();
    let ctx = s.ctx();
    let nvars = s.bundle().nvars();
    let mut anchor = vec![vec![Scalar::zero(ctx); r]; nvars];
    for (a, row) in anchor.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let mut acc = Scalar::zero(ctx);
            for jj in 0..r {
                acc = acc.add(&h.entry(i, jj).mul(s.bundle().anchor_entry(a, jj)));
            }
            *entry = acc;
        }
    }
    let bundle = crate::bundle::AnchoredBundle::new(s.bundle().vars().to_vec(), r, anchor)?;
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for a in 0..r {
        for b in 0..r {
            let dp = twisted_dual_product(
                j,
                h,
                &s.bundle().basis_section(a),
                &s.bundle().basis_section(b),
            );
            for (k, v) in dp.into_iter().enumerate() {
                table[a][b][k] = v;
            }
        }
    }
    let dual = LeftSymmetricAlgebroid::new_unvalidated(bundle, table)?;
    let x0: Covector = h.sharp(j.phi0()).iter().map(Scalar::neg).collect();
    JacobiLSA::new_unvalidated(dual, x0)
}
