//! Poisson bivectors, twisted (Jacobi) structures, and duality.
//!
//! A bivector `π` on a Lie algebroid `A` induces the sharp map
//! `π♯: A* → A`, the dual bracket `[ξ,η]_π` on 1-cosections, and — exactly
//! when `[π,π] = 0` — a Lie algebroid structure on the dual bundle.  This
//! module implements that circle of constructions together with its twisted
//! analogue, where a 1-cosection `φ₀` deforms the Schouten bracket, the
//! differential, and the Lie derivative ([`JacobiAlgebroid`]).  A bivector
//! with vanishing *twisted* self-bracket is a Jacobi structure; the
//! classical bivector-plus-vector-field description ([`JacobiPair`]) embeds
//! into this picture by packing the pair into the trivial line extension
//! `A ⊕ ℝ` ([`pack_pair`]), and [`jacobi_pair_defects`] verifies the two
//! classical structure equations *and* their exact equivalence with the
//! packed formulation.
//!
//! Everything here is exact: a structure is certified precisely when every
//! reported defect reduces to the zero scalar.
//!
//! Conventions
//! -----------
//! * `π♯ξ` has frame coefficients `(π♯ξ)_j = Σ_i ξ_i M[i][j]` where
//!   `M = π.skew_matrix()`; for `π = ∂x∧∂y` this sends `dx ↦ ∂y` and
//!   `dy ↦ −∂x`.
//! * The dual bracket is
//!   `[ξ,η]_π = L_{π♯ξ}η − L_{π♯η}ξ − d⟨π♯ξ,η⟩`,
//!   and the dual anchor is `ρ_π = ρ ∘ π♯`.
//! * The half-bracket identity
//!   `½[π,π](ξ,η,·) = [π♯ξ,π♯η] − π♯[ξ,η]_π`
//!   holds for **arbitrary** bivectors, Poisson or not; it pins every sign
//!   convention in this module and is exposed as [`half_pi_pi_defects`]
//!   (and, twisted, as [`JacobiAlgebroid::twisted_half_defects`]).

use crate::algebroid::LieAlgebroid;
use crate::bundle::{AnchoredBundle, Covector, Section};
use crate::error::{Error, Result};
use crate::linalg;
use crate::multivector::{frame_tag, increasing_tuples, Cosection, Multisection, Multivector};
use crate::scalar::Scalar;

/// Apply the sharp map of a bivector to a 1-cosection given by frame
/// coefficients: `(π♯ξ)_j = Σ_i ξ_i M[i][j]` with `M` the skew coefficient
/// matrix of `π`.
pub fn pi_sharp(pi: &Multisection, xi: &[Scalar]) -> Section {
    assert_eq!(pi.degree(), 2, "sharp map needs a degree-2 multisection");
    assert_eq!(xi.len(), pi.rank(), "cosection length does not match the bundle rank");
    let m = pi.skew_matrix();
    (0..pi.rank())
        .map(|j| {
            let mut acc = Scalar::zero(pi.ctx());
            for (i, c) in xi.iter().enumerate() {
                if !c.is_zero() && !m[i][j].is_zero() {
                    acc = acc.add(&c.mul(&m[i][j]));
                }
            }
            acc
        })
        .collect()
}

/// The Poisson defect `[π,π]` of a bivector.  `π` is Poisson exactly when
/// this degree-3 multisection vanishes.
pub fn poisson_defect(l: &LieAlgebroid, pi: &Multisection) -> Multisection {
    l.schouten(pi, pi)
}

/// The bracket induced by a bivector on 1-cosections:
/// `[ξ,η]_π = L_{π♯ξ}η − L_{π♯η}ξ − d⟨π♯ξ,η⟩`.
pub fn dual_bracket_pi(
    l: &LieAlgebroid,
    pi: &Multisection,
    xi: &[Scalar],
    eta: &[Scalar],
) -> Covector {
    let x = pi_sharp(pi, xi);
    let y = pi_sharp(pi, eta);
    let l_x_eta = l.lie_derivative_cosection(&x, &l.covector_mv(eta));
    let l_y_xi = l.lie_derivative_cosection(&y, &l.covector_mv(xi));
    let mut pairing = Scalar::zero(l.ctx());
    for k in 0..l.rank() {
        pairing = pairing.add(&x[k].mul(&eta[k]));
    }
    let d_pairing = l.differential(&Multivector::from_scalar(l.rank(), pairing));
    l_x_eta.sub(&l_y_xi).sub(&d_pairing).coefficients()
}

/// Defect list of the half-bracket identity
/// `½[π,π](ξ,η,·) = [π♯ξ,π♯η] − π♯[ξ,η]_π`
/// over all increasing coframe pairs `(ξ,η) = (e^a,e^b)` (both sides are
/// antisymmetric in `(ξ,η)`, so increasing pairs are exhaustive).  The
/// identity holds for arbitrary bivectors, so any nonzero entry signals an
/// internal inconsistency rather than a property of `π`.
pub fn half_pi_pi_defects(l: &LieAlgebroid, pi: &Multisection) -> Vec<(String, Scalar)> {
    let r = l.rank();
    let ctx = l.ctx();
    let bracket = l.schouten(pi, pi);
    let half = Scalar::rational(ctx, 1, 2);
    let mut out = Vec::new();
    for pair in increasing_tuples(r, 2) {
        let (a, b) = (pair[0], pair[1]);
        let xi = l.bundle().basis_section(a);
        let eta = l.bundle().basis_section(b);
        let lhs = bracket
            .contract_first(&xi)
            .expect("self-bracket of a bivector has degree 3")
            .contract_first(&eta)
            .expect("one contraction leaves degree 2")
            .scale(&half);
        let bracket_of_sharps = l.bracket(&pi_sharp(pi, &xi), &pi_sharp(pi, &eta));
        let sharp_of_dual = pi_sharp(pi, &dual_bracket_pi(l, pi, &xi, &eta));
        for k in 0..r {
            let defect = lhs.get(&[k]).sub(&bracket_of_sharps[k]).add(&sharp_of_dual[k]);
            if !defect.is_zero() {
                out.push((format!("half-identity(e^{a},e^{b}) on e{k}"), defect));
            }
        }
    }
    out
}

/// Structure candidate on the dual bundle: bracket table from
/// [`dual_bracket_pi`] on coframe pairs, anchor `ρ ∘ π♯`.  The candidate is
/// returned unvalidated; `check_axioms` on it passes exactly when `π` is
/// Poisson.
pub fn build_dual_lie(l: &LieAlgebroid, pi: &Multisection) -> Result<LieAlgebroid> {
    let r = l.rank();
    let ctx = l.ctx();
    let m = pi.skew_matrix();
    let nvars = l.bundle().nvars();
    let mut anchor = vec![vec![Scalar::zero(ctx); r]; nvars];
    for (a, row) in anchor.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let mut acc = Scalar::zero(ctx);
            for j in 0..r {
                acc = acc.add(&m[i][j].mul(l.bundle().anchor_entry(a, j)));
            }
            *entry = acc;
        }
    }
    let bundle = AnchoredBundle::new(l.bundle().vars().to_vec(), r, anchor)?;
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for i in 0..r {
        for j in (i + 1)..r {
            let xi = l.bundle().basis_section(i);
            let eta = l.bundle().basis_section(j);
            let br = dual_bracket_pi(l, pi, &xi, &eta);
            for k in 0..r {
                table[i][j][k] = br[k].clone();
                table[j][i][k] = br[k].neg();
            }
        }
    }
    LieAlgebroid::new_unvalidated(bundle, table)
}

/// The 2-cosection `ω` with coefficient matrix `−M^{-1}` where `M` is the
/// skew matrix of `π`; for nondegenerate Poisson `π` this is the inverse
/// symplectic form (`ω♭ = −(π♯)^{-1}`), and `dω = 0`.  Fails with
/// [`Error::Singular`] when the sharp matrix is not invertible (always the
/// case in odd rank).
pub fn symplectic_from_poisson(l: &LieAlgebroid, pi: &Multisection) -> Result<Cosection> {
    let inv = linalg::invert(&pi.skew_matrix())?;
    let r = l.rank();
    let terms = increasing_tuples(r, 2)
        .into_iter()
        .map(|t| {
            let v = inv[t[0]][t[1]].neg();
            (t, v)
        })
        .collect::<Vec<_>>();
    Ok(Multivector::from_terms(l.ctx(), r, 2, terms))
}

/// Nonzero components of `dω` for a 2-cosection, labelled by frame tuple.
/// Empty exactly when `ω` is closed.
pub fn presymplectic_defects(l: &LieAlgebroid, omega: &Cosection) -> Vec<(String, Scalar)> {
    assert_eq!(omega.degree(), 2, "presymplectic check needs a 2-cosection");
    l.differential(omega)
        .terms()
        .map(|(idx, v)| (format!("d(omega) on {}", frame_tag(idx)), v.clone()))
        .collect()
}

/// Whether a 2-cosection has invertible coefficient matrix (exact symbolic
/// determinant test).
pub fn is_nondegenerate(omega: &Cosection) -> bool {
    !linalg::det(&omega.skew_matrix()).is_zero()
}

/// A Lie algebroid together with a distinguished 1-cosection `φ₀` that
/// twists the calculus.  When `φ₀` is a 1-cocycle (`dφ₀ = 0`), the twisted
/// operations deform the ordinary ones coherently; the validating
/// constructor enforces this, while [`JacobiAlgebroid::new_unvalidated`]
/// admits arbitrary `φ₀` for defect inspection.
#[derive(Clone, Debug)]
pub struct JacobiAlgebroid {
    lie: LieAlgebroid,
    phi0: Covector,
}

impl JacobiAlgebroid {
    /// Validating constructor: requires `dφ₀ = 0`.
    pub fn new(lie: LieAlgebroid, phi0: Covector) -> Result<JacobiAlgebroid> {
        let j = JacobiAlgebroid::new_unvalidated(lie, phi0);
        if let Some((label, _)) = j.cocycle_defects().first() {
            return Err(Error::Invalid(format!(
                "twisting cosection is not a 1-cocycle: nonzero {label}"
            )));
        }
        Ok(j)
    }

    /// Shape-checked constructor that skips the cocycle condition.
    pub fn new_unvalidated(lie: LieAlgebroid, phi0: Covector) -> JacobiAlgebroid {
        assert_eq!(phi0.len(), lie.rank(), "twisting cosection length must equal the rank");
        for v in &phi0 {
            assert_eq!(v.ctx(), lie.ctx(), "twisting cosection uses a different variable context");
        }
        JacobiAlgebroid { lie, phi0 }
    }

    /// The trivially twisted structure `φ₀ = 0`, for which every twisted
    /// operation coincides with its untwisted counterpart.
    pub fn trivial(lie: LieAlgebroid) -> JacobiAlgebroid {
        let phi0 = lie.bundle().zero_section();
        JacobiAlgebroid { lie, phi0 }
    }

    /// The underlying Lie algebroid.
    pub fn lie(&self) -> &LieAlgebroid {
        &self.lie
    }

    /// The twisting 1-cosection as frame coefficients.
    pub fn phi0(&self) -> &[Scalar] {
        &self.phi0
    }

    /// The twisting 1-cosection as a degree-1 cosection.
    pub fn phi0_mv(&self) -> Cosection {
        self.lie.covector_mv(&self.phi0)
    }

    /// Nonzero components of `dφ₀`, labelled by frame pair.  Empty exactly
    /// when `φ₀` is a 1-cocycle.
    pub fn cocycle_defects(&self) -> Vec<(String, Scalar)> {
        self.lie
            .differential(&self.phi0_mv())
            .terms()
            .map(|(idx, v)| (format!("d(phi0) on {}", frame_tag(idx)), v.clone()))
            .collect()
    }

    /// The twisted Schouten bracket
    /// `[D₁,D₂]_{φ₀} = [D₁,D₂] + (a₁−1)·D₁∧ι_{φ₀}D₂ − (−1)^{a₁+1}(a₂−1)·ι_{φ₀}D₁∧D₂`
    /// with `a₁, a₂` the degrees of the arguments (a correction term is
    /// skipped when its interior product would act on degree 0).
    pub fn twisted_schouten(&self, d1: &Multisection, d2: &Multisection) -> Multisection {
        let a1 = d1.degree() as i64;
        let a2 = d2.degree() as i64;
        let mut out = self.lie.schouten(d1, d2);
        if a2 >= 1 && a1 != 1 {
            let t = d1.wedge(&d2.contract_first(&self.phi0).expect("degree at least 1"));
            out = out.add(&t.scale_int(a1 - 1));
        }
        if a1 >= 1 && a2 != 1 {
            let sign = if (a1 + 1) % 2 == 0 { 1 } else { -1 };
            let t = d1.contract_first(&self.phi0).expect("degree at least 1").wedge(d2);
            out = out.add(&t.scale_int(-sign * (a2 - 1)));
        }
        out
    }

    /// The twisted differential `d_{φ₀}ω = dω + φ₀∧ω`.  Unlike `d`, this
    /// does not square to zero in general: `d_{φ₀}²ω = dφ₀∧ω` exactly.
    pub fn twisted_differential(&self, omega: &Cosection) -> Cosection {
        self.lie.differential(omega).add(&self.phi0_mv().wedge(omega))
    }

    /// The twisted Lie derivative on cosections, defined by the Cartan
    /// formula `ι_X d_{φ₀} + d_{φ₀} ι_X` (for degree 0, the interior term
    /// of the argument is absent and the result is `⟨d_{φ₀}f, X⟩`).
    pub fn twisted_lie_derivative_cosection(&self, x: &[Scalar], omega: &Cosection) -> Cosection {
        if omega.degree() == 0 {
            let d = self.twisted_differential(omega);
            let x_mv = self.lie.section_mv(x);
            return Multivector::from_scalar(self.lie.rank(), d.pairing(&x_mv));
        }
        let inner = omega.contract_first(x).expect("degree at least 1");
        self.twisted_differential(omega)
            .contract_first(x)
            .expect("twisted differential raises the degree")
            .add(&self.twisted_differential(&inner))
    }

    /// The Jacobi defect `[π,π]_{φ₀}`.  A bivector is a Jacobi structure on
    /// `(A, φ₀)` exactly when this vanishes; for `φ₀ = 0` it reduces to the
    /// Poisson defect.
    pub fn jacobi_defect(&self, pi: &Multisection) -> Multisection {
        self.twisted_schouten(pi, pi)
    }

    /// The twisted dual bracket
    /// `[ξ,η]_{π,φ₀} = L^{φ₀}_{π♯ξ}η − L^{φ₀}_{π♯η}ξ − d_{φ₀}⟨π♯ξ,η⟩`.
    pub fn dual_bracket(&self, pi: &Multisection, xi: &[Scalar], eta: &[Scalar]) -> Covector {
        let x = pi_sharp(pi, xi);
        let y = pi_sharp(pi, eta);
        let l_x_eta = self.twisted_lie_derivative_cosection(&x, &self.lie.covector_mv(eta));
        let l_y_xi = self.twisted_lie_derivative_cosection(&y, &self.lie.covector_mv(xi));
        let mut pairing = Scalar::zero(self.lie.ctx());
        for k in 0..self.lie.rank() {
            pairing = pairing.add(&x[k].mul(&eta[k]));
        }
        let d_pairing =
            self.twisted_differential(&Multivector::from_scalar(self.lie.rank(), pairing));
        l_x_eta.sub(&l_y_xi).sub(&d_pairing).coefficients()
    }

    /// Defect list of the twisted half-bracket identity
    /// `½[π,π]_{φ₀}(ξ,η,·) = [π♯ξ,π♯η] − π♯[ξ,η]_{π,φ₀}`
    /// over all increasing coframe pairs.  Like the untwisted identity it
    /// holds for arbitrary `π` and `φ₀`.
    pub fn twisted_half_defects(&self, pi: &Multisection) -> Vec<(String, Scalar)> {
        let r = self.lie.rank();
        let ctx = self.lie.ctx();
        let bracket = self.twisted_schouten(pi, pi);
        let half = Scalar::rational(ctx, 1, 2);
        let mut out = Vec::new();
        for pair in increasing_tuples(r, 2) {
            let (a, b) = (pair[0], pair[1]);
            let xi = self.lie.bundle().basis_section(a);
            let eta = self.lie.bundle().basis_section(b);
            let lhs = bracket
                .contract_first(&xi)
                .expect("twisted self-bracket of a bivector has degree 3")
                .contract_first(&eta)
                .expect("one contraction leaves degree 2")
                .scale(&half);
            let bracket_of_sharps =
                self.lie.bracket(&pi_sharp(pi, &xi), &pi_sharp(pi, &eta));
            let sharp_of_dual = pi_sharp(pi, &self.dual_bracket(pi, &xi, &eta));
            for k in 0..r {
                let defect =
                    lhs.get(&[k]).sub(&bracket_of_sharps[k]).add(&sharp_of_dual[k]);
                if !defect.is_zero() {
                    out.push((format!("twisted-half-identity(e^{a},e^{b}) on e{k}"), defect));
                }
            }
        }
        out
    }
}

/// Structure candidate on the dual bundle of a twisted algebroid: bracket
/// table from the twisted dual bracket, anchor `ρ ∘ π♯`, distinguished dual
/// cosection `X₀ = −π♯φ₀` (a section of `A` read as a 1-cosection on `A*`).
/// The candidate is returned unvalidated; when `jacobi_defect(π) = 0`, its
/// underlying Lie axioms pass and `X₀` is a 1-cocycle for the dual
/// differential.
pub fn build_dual_jacobi(j: &JacobiAlgebroid, pi: &Multisection) -> Result<JacobiAlgebroid> {
    let l = j.lie();
    let r = l.rank();
    let ctx = l.ctx();
    let m = pi.skew_matrix();
    let nvars = l.bundle().nvars();
    let mut anchor = vec![vec![Scalar::zero(ctx); r]; nvars];
    for (a, row) in anchor.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let mut acc = Scalar::zero(ctx);
            for jj in 0..r {
                acc = acc.add(&m[i][jj].mul(l.bundle().anchor_entry(a, jj)));
            }
            *entry = acc;
        }
    }
    let bundle = AnchoredBundle::new(l.bundle().vars().to_vec(), r, anchor)?;
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for i in 0..r {
        for jj in (i + 1)..r {
            let xi = l.bundle().basis_section(i);
            let eta = l.bundle().basis_section(jj);
            let br = j.dual_bracket(pi, &xi, &eta);
            for k in 0..r {
                table[i][jj][k] = br[k].clone();
                table[jj][i][k] = br[k].neg();
            }
        }
    }
    let dual = LieAlgebroid::new_unvalidated(bundle, table)?;
    let x0 = pi_sharp(pi, j.phi0()).iter().map(Scalar::neg).collect();
    Ok(JacobiAlgebroid::new_unvalidated(dual, x0))
}

/// A bivector–section pair `(Λ, E)`, the classical data of a Jacobi
/// structure on the base.  The pair is a Jacobi structure exactly when
/// `[Λ,Λ] + 2E∧Λ = 0` and `[E,Λ] = 0`; see [`jacobi_pair_defects`].
#[derive(Clone, Debug)]
pub struct JacobiPair {
    /// The bivector.
    pub lambda: Multisection,
    /// The distinguished section (the Reeb direction in the contact case).
    pub e: Section,
}

/// Pack a pair `(Λ, E)` into the trivial line extension `A ⊕ ℝ` with
/// twisting cosection `(0,…,0,1)`: returns the twisted extension and the
/// packed bivector `P = Λ + e∧E`, where `e` is the line frame (kept last;
/// this orientation is pinned so that the packed defect reproduces the two
/// classical structure equations with their signs).
pub fn pack_pair(l: &LieAlgebroid, pair: &JacobiPair) -> (JacobiAlgebroid, Multisection) {
    let r = l.rank();
    let ctx = l.ctx();
    assert_eq!(pair.lambda.degree(), 2, "packed bivector must have degree 2");
    assert_eq!(pair.lambda.rank(), r, "bivector rank does not match the algebroid");
    assert_eq!(pair.e.len(), r, "section length does not match the rank");
    let ext = l.direct_sum_trivial_line();
    let mut phi0 = vec![Scalar::zero(ctx); r + 1];
    phi0[r] = Scalar::one(ctx);
    let jext = JacobiAlgebroid::new(ext, phi0)
        .expect("the line pairing cosection is a 1-cocycle on every trivial extension");
    let mut e_ext = pair.e.clone();
    e_ext.push(Scalar::zero(ctx));
    let e_mv = Multivector::from_coefficients(ctx, &e_ext);
    let line = Multivector::from_coefficients(ctx, &jext.lie().bundle().basis_section(r));
    let packed = pair.lambda.extend_rank(r + 1).add(&line.wedge(&e_mv));
    (jext, packed)
}

/// Defect list for a classical pair `(Λ, E)`:
/// the bracket condition `[Λ,Λ] + 2E∧Λ`, the invariance condition `[E,Λ]`,
/// and the exact difference between the packed Jacobi defect
/// `[P,P]_{(0,…,0,1)}` on `A ⊕ ℝ` and its predicted decomposition
/// `([Λ,Λ] + 2E∧Λ) + 2[E,Λ]∧e`.  The last group is an internal identity
/// and must be empty for every input; the first two vanish exactly when
/// `(Λ, E)` is a Jacobi structure.
pub fn jacobi_pair_defects(l: &LieAlgebroid, pair: &JacobiPair) -> Vec<(String, Scalar)> {
    let r = l.rank();
    let ctx = l.ctx();
    let e_mv = Multivector::from_coefficients(ctx, &pair.e);
    let d1 = l
        .schouten(&pair.lambda, &pair.lambda)
        .add(&e_mv.wedge(&pair.lambda).scale_int(2));
    let d2 = l.schouten(&e_mv, &pair.lambda);
    let (jext, packed) = pack_pair(l, pair);
    let line = Multivector::from_coefficients(ctx, &jext.lie().bundle().basis_section(r));
    let predicted = d1
        .extend_rank(r + 1)
        .add(&d2.extend_rank(r + 1).wedge(&line).scale_int(2));
    let equivalence = jext.jacobi_defect(&packed).sub(&predicted);
    let mut out = Vec::new();
    for (idx, v) in d1.terms() {
        out.push((format!("bracket condition on {}", frame_tag(idx)), v.clone()));
    }
    for (idx, v) in d2.terms() {
        out.push((format!("invariance condition on {}", frame_tag(idx)), v.clone()));
    }
    for (idx, v) in equivalence.terms() {
        out.push((format!("packing equivalence on {}", frame_tag(idx)), v.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ctx;

    fn tm2() -> LieAlgebroid {
        LieAlgebroid::tangent(&["x", "y"]).unwrap()
    }

    fn tm3() -> LieAlgebroid {
        LieAlgebroid::tangent(&["x", "y", "z"]).unwrap()
    }

    fn tm4() -> LieAlgebroid {
        LieAlgebroid::tangent(&["x", "y", "z", "w"]).unwrap()
    }

    /// `Λ = (∂x + y∂z)∧∂y`, `E = ∂z`: the contact structure data on ℝ³.
    fn contact_pair(l: &LieAlgebroid) -> JacobiPair {
        let ctx = l.ctx();
        let lambda = Multivector::from_terms(
            ctx,
            3,
            2,
            [
                (vec![0, 1], Scalar::one(ctx)),
                (vec![1, 2], Scalar::var(ctx, 1).neg()),
            ],
        );
        JacobiPair { lambda, e: l.parse_section(&["0", "0", "1"]).unwrap() }
    }

    fn constant_bivector(l: &LieAlgebroid) -> Multisection {
        Multivector::from_terms(l.ctx(), l.rank(), 2, [(vec![0, 1], Scalar::one(l.ctx()))])
    }

    #[test]
    fn sharp_map_rotates_coordinate_differentials() {
        let l = tm2();
        let ctx = l.ctx();
        let pi = constant_bivector(&l);
        let dx = l.bundle().basis_section(0);
        let dy = l.bundle().basis_section(1);
        assert_eq!(pi_sharp(&pi, &dx), l.parse_section(&["0", "1"]).unwrap());
        assert_eq!(pi_sharp(&pi, &dy), l.parse_section(&["-1", "0"]).unwrap());
        // ⟨ξ, π♯ξ⟩ = 0 by antisymmetry, also for non-constant ξ.
        let xi = l.parse_covector(&["x", "y^2"]).unwrap();
        let x = pi_sharp(&pi, &xi);
        let mut pairing = Scalar::zero(ctx);
        for k in 0..2 {
            pairing = pairing.add(&xi[k].mul(&x[k]));
        }
        assert!(pairing.is_zero());
    }

    #[test]
    fn poisson_defect_vanishes_for_plane_bivectors_and_detects_contact() {
        let l2 = tm2();
        assert!(poisson_defect(&l2, &constant_bivector(&l2)).is_zero());
        let coord = constant_bivector(&l2).scale(&Scalar::var(l2.ctx(), 0));
        assert!(poisson_defect(&l2, &coord).is_zero());

        let l3 = tm3();
        let defect = poisson_defect(&l3, &contact_pair(&l3).lambda);
        assert_eq!(defect.get(&[0, 1, 2]), Scalar::int(l3.ctx(), -2));
    }

    #[test]
    fn dual_bracket_matches_hand_expansion() {
        let l = tm2();
        let pi = constant_bivector(&l);
        let dx = l.bundle().basis_section(0);
        let dy = l.bundle().basis_section(1);
        assert!(dual_bracket_pi(&l, &pi, &dx, &dy).iter().all(Scalar::is_zero));
        // [x dx, dy]_π = L_{x∂y}dy − L_{−∂x}(x dx) − d⟨x∂y, dy⟩ = dx.
        let xdx = l.parse_covector(&["x", "0"]).unwrap();
        assert_eq!(dual_bracket_pi(&l, &pi, &xdx, &dy), l.parse_covector(&["1", "0"]).unwrap());
        // Antisymmetry kills the diagonal even for non-constant entries.
        let xi = l.parse_covector(&["x^2", "y"]).unwrap();
        assert!(dual_bracket_pi(&l, &pi, &xi, &xi).iter().all(Scalar::is_zero));
    }

    #[test]
    fn half_bracket_identity_holds_for_arbitrary_bivectors() {
        let l2 = tm2();
        let ctx2 = l2.ctx();
        let poly = Multivector::from_terms(
            ctx2,
            2,
            2,
            [(vec![0, 1], Scalar::var(ctx2, 0).pow(2).add(&Scalar::var(ctx2, 1)))],
        );
        assert!(half_pi_pi_defects(&l2, &poly).is_empty());

        // The identity does not require [π,π] = 0: the contact bivector is
        // not Poisson, yet every defect cancels.
        let l3 = tm3();
        assert!(half_pi_pi_defects(&l3, &contact_pair(&l3).lambda).is_empty());

        let ctx3 = l3.ctx();
        let mixed = Multivector::from_terms(
            ctx3,
            3,
            2,
            [
                (vec![0, 1], Scalar::one(ctx3)),
                (vec![1, 2], Scalar::var(ctx3, 0)),
            ],
        );
        assert!(half_pi_pi_defects(&l3, &mixed).is_empty());
    }

    #[test]
    fn dual_structure_is_valid_exactly_for_poisson_bivectors() {
        let l = tm2();
        let pi = constant_bivector(&l);
        let dual = build_dual_lie(&l, &pi).unwrap();
        dual.check_axioms().unwrap();
        // ρ_π(e^0) = ρ(π♯ dx) = ∂y.
        assert_eq!(*dual.bundle().anchor_entry(1, 0), Scalar::one(l.ctx()));
        assert_eq!(*dual.bundle().anchor_entry(0, 0), Scalar::zero(l.ctx()));

        let l3 = tm3();
        let dual_contact = build_dual_lie(&l3, &contact_pair(&l3).lambda).unwrap();
        assert!(dual_contact.check_axioms().is_err());

        let zero = Multivector::zero(l.ctx(), 2, 2);
        let dual_zero = build_dual_lie(&l, &zero).unwrap();
        dual_zero.check_axioms().unwrap();
        assert!(dual_zero.bracket_frames(0, 1).iter().all(Scalar::is_zero));
        assert!(dual_zero.bundle().anchor_entry(0, 0).is_zero());
    }

    #[test]
    fn symplectic_inversion_pins_the_sign() {
        let l = tm2();
        let ctx = l.ctx();
        let pi = constant_bivector(&l);
        let omega = symplectic_from_poisson(&l, &pi).unwrap();
        assert_eq!(omega.get(&[0, 1]), Scalar::one(ctx));
        assert!(presymplectic_defects(&l, &omega).is_empty());
        assert!(is_nondegenerate(&omega));

        // π = (1+x²)∂x∧∂y inverts to ω₀₁ = 1/(1+x²).
        let weight = Scalar::one(ctx).add(&Scalar::var(ctx, 0).pow(2));
        let curved = pi.scale(&weight);
        let omega = symplectic_from_poisson(&l, &curved).unwrap();
        assert_eq!(omega.get(&[0, 1]).mul(&weight), Scalar::one(ctx));

        // Odd rank is always singular.
        let l3 = tm3();
        let pi3 = constant_bivector(&l3);
        assert!(matches!(symplectic_from_poisson(&l3, &pi3), Err(Error::Singular(_))));
    }

    #[test]
    fn presymplectic_defects_detect_non_closed_forms() {
        let l3 = tm3();
        let ctx = l3.ctx();
        let omega = Multivector::from_terms(ctx, 3, 2, [(vec![0, 1], Scalar::var(ctx, 2))]);
        let defects = presymplectic_defects(&l3, &omega);
        assert_eq!(defects.len(), 1);
        assert_eq!(defects[0].0, "d(omega) on e012");
        assert_eq!(defects[0].1, Scalar::one(ctx));
        assert!(!is_nondegenerate(&omega));

        let l2 = tm2();
        let top = constant_bivector(&l2).scale(&Scalar::var(l2.ctx(), 0));
        assert!(presymplectic_defects(&l2, &top).is_empty());
        assert!(is_nondegenerate(&top));
    }

    #[test]
    fn trivial_twist_reduces_to_untwisted_operations() {
        let l = tm3();
        let j = JacobiAlgebroid::trivial(LieAlgebroid::tangent(&["x", "y", "z"]).unwrap());
        let pi = contact_pair(&l).lambda;
        assert_eq!(j.twisted_schouten(&pi, &pi), l.schouten(&pi, &pi));
        let e_mv = l.section_mv(&l.parse_section(&["y", "0", "x"]).unwrap());
        assert_eq!(j.twisted_schouten(&e_mv, &pi), l.schouten(&e_mv, &pi));
        let omega = l.covector_mv(&l.parse_covector(&["0", "x*z", "1"]).unwrap());
        assert_eq!(j.twisted_differential(&omega), l.differential(&omega));
        let xi = l.bundle().basis_section(0);
        let eta = l.parse_covector(&["z", "0", "x^2"]).unwrap();
        assert_eq!(j.dual_bracket(&pi, &xi, &eta), dual_bracket_pi(&l, &pi, &xi, &eta));
    }

    #[test]
    fn twisted_self_bracket_expands_the_degree_two_case() {
        let l = tm3();
        let ctx = l.ctx();
        let phi0 = l.parse_covector(&["0", "0", "x"]).unwrap();
        let j = JacobiAlgebroid::new_unvalidated(LieAlgebroid::tangent(&["x", "y", "z"]).unwrap(), phi0.clone());
        let pi = Multivector::from_terms(
            ctx,
            3,
            2,
            [
                (vec![0, 1], Scalar::one(ctx)),
                (vec![1, 2], Scalar::var(ctx, 1)),
            ],
        );
        let direct = l
            .schouten(&pi, &pi)
            .add(&pi.wedge(&pi.contract_first(&phi0).unwrap()).scale_int(2));
        assert_eq!(j.jacobi_defect(&pi), direct);
    }

    #[test]
    fn twisted_differential_squares_to_the_twist_curvature() {
        let l = tm3();
        let ctx = l.ctx();
        // Non-closed twist: d(y dx) = −dx∧dy ≠ 0.
        let phi0 = l.parse_covector(&["y", "0", "0"]).unwrap();
        let j = JacobiAlgebroid::new_unvalidated(
            LieAlgebroid::tangent(&["x", "y", "z"]).unwrap(),
            phi0,
        );
        let omega = l.covector_mv(&l.parse_covector(&["0", "0", "x"]).unwrap());
        let twice = j.twisted_differential(&j.twisted_differential(&omega));
        let curvature = l.differential(&j.phi0_mv()).wedge(&omega);
        assert_eq!(twice, curvature);
        assert!(!twice.is_zero());

        // Closed twist: the square collapses to zero on scalars too.
        let closed = JacobiAlgebroid::new(
            LieAlgebroid::tangent(&["x", "y", "z"]).unwrap(),
            l.parse_covector(&["1", "0", "0"]).unwrap(),
        )
        .unwrap();
        let f = Multivector::from_scalar(3, Scalar::var(ctx, 1));
        let twice = closed.twisted_differential(&closed.twisted_differential(&f));
        assert!(twice.is_zero());
    }

    #[test]
    fn validating_constructor_requires_a_cocycle() {
        let l = tm2();
        assert!(JacobiAlgebroid::new(
            LieAlgebroid::tangent(&["x", "y"]).unwrap(),
            l.parse_covector(&["1", "0"]).unwrap()
        )
        .is_ok());
        let err = JacobiAlgebroid::new(
            LieAlgebroid::tangent(&["x", "y"]).unwrap(),
            l.parse_covector(&["y", "0"]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn packed_contact_bivector_is_a_jacobi_structure() {
        let l = tm3();
        let pair = contact_pair(&l);
        let (jext, packed) = pack_pair(&l, &pair);
        assert_eq!(jext.lie().rank(), 4);
        let ctx = l.ctx();
        assert_eq!(packed.get(&[0, 1]), Scalar::one(ctx));
        assert_eq!(packed.get(&[1, 2]), Scalar::var(ctx, 1).neg());
        // Pinned packing orientation: the line frame is kept last.
        assert_eq!(packed.get(&[2, 3]), Scalar::int(ctx, -1));
        assert!(jext.jacobi_defect(&packed).is_zero());
        // The twisting cosection of the extension is itself twisted-closed.
        assert!(jext.twisted_differential(&jext.phi0_mv()).is_zero());

        // Flipping the packing orientation breaks the structure equationally.
        let mut flipped = pair.lambda.extend_rank(4);
        flipped.add_term(&[2, 3], Scalar::one(ctx));
        let defect = jext.jacobi_defect(&flipped);
        assert_eq!(defect.get(&[0, 1, 2]), Scalar::int(ctx, -4));
    }

    #[test]
    fn dual_of_packed_contact_is_a_jacobi_algebroid() {
        let l = tm3();
        let (jext, packed) = pack_pair(&l, &contact_pair(&l));
        let dual = build_dual_jacobi(&jext, &packed).unwrap();
        // X₀ = −π♯φ₀ points along −e₂ for the packed contact structure.
        let ctx = l.ctx();
        let expected: Vec<Scalar> =
            vec![Scalar::zero(ctx), Scalar::zero(ctx), Scalar::int(ctx, -1), Scalar::zero(ctx)];
        assert_eq!(dual.phi0(), &expected[..]);
        dual.lie().check_axioms().unwrap();
        assert!(dual.cocycle_defects().is_empty());
    }

    #[test]
    fn twisted_half_identity_holds_for_arbitrary_twists() {
        // Rank 4 with a non-closed twist: the correction terms are active
        // (in rank ≤ 3 the wedge corrections of the self-bracket vanish
        // identically, so only rank ≥ 4 discriminates their signs).
        let l = tm4();
        let ctx = l.ctx();
        let pi = Multivector::from_terms(
            ctx,
            4,
            2,
            [
                (vec![0, 1], Scalar::one(ctx)),
                (vec![2, 3], Scalar::var(ctx, 3)),
            ],
        );
        let phi0 = l.parse_covector(&["0", "z", "0", "1"]).unwrap();
        let j = JacobiAlgebroid::new_unvalidated(LieAlgebroid::tangent(&["x", "y", "z", "w"]).unwrap(), phi0);
        assert!(!j.jacobi_defect(&pi).is_zero());
        assert!(j.twisted_half_defects(&pi).is_empty());

        // And on the packed contact extension, where the defect vanishes.
        let l3 = tm3();
        let (jext, packed) = pack_pair(&l3, &contact_pair(&l3));
        assert!(jext.twisted_half_defects(&packed).is_empty());
    }

    #[test]
    fn pair_defects_certify_contact_and_poisson_pairs() {
        let l3 = tm3();
        assert!(jacobi_pair_defects(&l3, &contact_pair(&l3)).is_empty());

        let l2 = tm2();
        let poisson_pair =
            JacobiPair { lambda: constant_bivector(&l2), e: l2.bundle().zero_section() };
        assert!(jacobi_pair_defects(&l2, &poisson_pair).is_empty());

        // Dimension collapse: every degree-3 object on a rank-2 bundle is 0.
        let collapse =
            JacobiPair { lambda: constant_bivector(&l2), e: l2.bundle().basis_section(0) };
        assert!(jacobi_pair_defects(&l2, &collapse).is_empty());
    }

    #[test]
    fn pair_defects_flag_a_bivector_without_its_reeb_section() {
        let l = tm3();
        let bare = JacobiPair { lambda: contact_pair(&l).lambda, e: l.bundle().zero_section() };
        let defects = jacobi_pair_defects(&l, &bare);
        assert_eq!(defects.len(), 1);
        assert_eq!(defects[0].0, "bracket condition on e012");
        assert_eq!(defects[0].1, Scalar::int(l.ctx(), -2));
        // In particular the packing equivalence held exactly even here.
        assert!(defects.iter().all(|(label, _)| !label.starts_with("packing")));
    }

    #[test]
    fn twisted_lie_derivative_degree_zero_pairs_with_the_twisted_differential() {
        let l = tm2();
        let ctx = l.ctx();
        let phi0 = l.parse_covector(&["1", "0"]).unwrap();
        let j = JacobiAlgebroid::new(LieAlgebroid::tangent(&["x", "y"]).unwrap(), phi0).unwrap();
        let x = l.parse_section(&["0", "x"]).unwrap();
        let f = Multivector::from_scalar(2, Scalar::var(ctx, 1));
        // L^{φ₀}_X f = ρ(X)f + f⟨φ₀,X⟩ = x + y·0 = x.
        let lf = j.twisted_lie_derivative_cosection(&x, &f);
        assert_eq!(lf.scalar_part(), Scalar::var(ctx, 0));
        let ctx_check = Ctx::new(2);
        assert_eq!(ctx, ctx_check);
    }
}
