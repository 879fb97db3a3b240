//! Flat-patch frontend: Koszul–Vinberg tensors, Jacobi–Koszul–Vinberg
//! pairs, and conformally Hessian diagnostics in coordinates.
//!
//! An [`AffinePatch`] is a coordinate chart together with a connection on
//! its tangent algebroid that is certified flat and torsion-free at
//! construction, so downstream checks may assume an affine structure.  On
//! a patch, a symmetric contravariant 2-tensor `h` is *Koszul–Vinberg*
//! when the Codazzi-type defect
//! `(∇_{h♯e^a} h)(e^b, e^c) − (∇_{h♯e^b} h)(e^a, e^c)` vanishes
//! ([`kv_manifold_defects`]); a pair `(h, E)` of such a tensor and a
//! vector field is *Jacobi–Koszul–Vinberg* when three defect families
//! vanish ([`jkv_manifold_defects`]).  The pair embeds into a single
//! symmetric tensor on the line-extended patch ([`pack_tensor`]), where
//! one five-term bracket against the canonical twist ([`bar_nabla_jlsa`])
//! detects all three families at once; [`jkv_equivalence_report`] lays the
//! two formulations side by side so their simultaneous vanishing can be
//! certified or refuted entry by entry.
//!
//! A nondegenerate pair induces a metric `g = h⁻¹` and a one-form
//! `θ = g♭E` (the [`lee_form`]); the pair is Jacobi–Koszul–Vinberg exactly
//! when `(g, θ)` makes the patch locally conformally Hessian, which
//! [`lch_report`] certifies through the symmetrization defect of
//! `∇g + θ ⊗ g` ([`semi_weyl_defects`]) and the exterior derivative of
//! `θ`, cross-checked against an unconditional four-term expansion of
//! `dθ` that holds for every metric and vector field
//! ([`dtheta_identity_defects`]).  Finally,
//! [`dual_connection_report`] pairs the Codazzi defect of a metric with
//! the torsion of its dual connection, which vanish together.

use crate::algebroid::LieAlgebroid;
use crate::bundle::{Covector, Section};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::jacobi_lsa::{jkv_bracket_defects, JacobiLSA};
use crate::lsa::{lsa_bar_nabla, SymmetricTensor};
use crate::multivector::{frame_tag, increasing_tuples};
use crate::scalar::{Ctx, Scalar};

/// A coordinate chart with a flat, torsion-free connection on its tangent
/// algebroid.  Construction fails unless both tensors vanish identically,
/// so holding a value of this type certifies the affine structure.
#[derive(Clone, Debug)]
pub struct AffinePatch {
    connection: Connection,
}

impl AffinePatch {
    /// Build a patch from coordinate names and Christoffel symbols
    /// `christoffel[i][j][k] = Γ_ij^k`; fails when the connection has
    /// torsion or curvature.
    pub fn new<S: AsRef<str>>(
        vars: &[S],
        christoffel: Vec<Vec<Vec<Scalar>>>,
    ) -> Result<AffinePatch> {
        let tm = LieAlgebroid::tangent(vars)?;
        let connection = Connection::new(tm, christoffel)?;
        if let Some((label, _)) = connection.torsion_defects().first() {
            return Err(Error::Invalid(format!(
                "patch connection has torsion: nonzero {label}"
            )));
        }
        if let Some((label, _)) = connection.curvature_defects().first() {
            return Err(Error::Invalid(format!(
                "patch connection has curvature: nonzero {label}"
            )));
        }
        Ok(AffinePatch { connection })
    }

    /// The patch whose Christoffel symbols all vanish.
    pub fn flat<S: AsRef<str>>(vars: &[S]) -> Result<AffinePatch> {
        let tm = LieAlgebroid::tangent(vars)?;
        Ok(AffinePatch { connection: Connection::flat(tm) })
    }

    /// The certified flat torsion-free connection.
    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    /// The tangent algebroid of the chart.
    pub fn algebroid(&self) -> &LieAlgebroid {
        self.connection.algebroid()
    }

    /// The variable context of the chart.
    pub fn ctx(&self) -> Ctx {
        self.algebroid().ctx()
    }

    /// The chart dimension (number of coordinates).
    pub fn dim(&self) -> usize {
        self.algebroid().rank()
    }
}

/// A candidate Jacobi–Koszul–Vinberg pair: a symmetric contravariant
/// 2-tensor and a vector field on the same chart.
#[derive(Clone, Debug)]
pub struct JKVPair {
    /// The symmetric contravariant 2-tensor.
    pub h: SymmetricTensor,
    /// The vector field, as frame coefficients.
    pub e: Section,
}

impl JKVPair {
    /// Pair a tensor with a vector field, checking shapes and contexts.
    pub fn new(h: SymmetricTensor, e: Section) -> Result<JKVPair> {
        if e.len() != h.rank() {
            return Err(Error::Shape(format!(
                "vector field has {} components but the tensor has rank {}",
                e.len(),
                h.rank()
            )));
        }
        if e.iter().any(|v| v.ctx() != h.ctx()) {
            return Err(Error::Shape(
                "vector field uses a different variable context than the tensor".into(),
            ));
        }
        Ok(JKVPair { h, e })
    }
}

/// `Σ_i x_i (∇_i h)` — the covariant derivative of an upper 2-tensor along
/// an arbitrary section, using tensoriality in the direction.
fn nabla_upper_along(c: &Connection, x: &[Scalar], h: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let r = c.algebroid().rank();
    let ctx = c.algebroid().ctx();
    let mut out = vec![vec![Scalar::zero(ctx); r]; r];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let nh = c.nabla_upper2(h, i);
        for (j, row) in out.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                if !nh[j][k].is_zero() {
                    *slot = slot.add(&xi.mul(&nh[j][k]));
                }
            }
        }
    }
    out
}

fn assert_on_patch(p: &AffinePatch, rank: usize, ctx: Ctx) {
    assert_eq!(rank, p.dim(), "tensor rank must match the chart dimension");
    assert_eq!(ctx, p.ctx(), "tensor must live over the chart's variables");
}

/// Nonzero components of the Koszul–Vinberg defect of a symmetric
/// contravariant 2-tensor: `(∇_{h♯e^a} h)(e^b, e^c) − (∇_{h♯e^b} h)(e^a,
/// e^c)` over increasing pairs `a < b` (the expression is antisymmetric in
/// the first two slots).  Empty output certifies a Koszul–Vinberg
/// structure on the patch; for nondegenerate `h` this is equivalent to the
/// Codazzi equation for the inverse metric.
pub fn kv_manifold_defects(p: &AffinePatch, h: &SymmetricTensor) -> Vec<(String, Scalar)> {
    assert_on_patch(p, h.rank(), h.ctx());
    let c = p.connection();
    let n = p.dim();
    let mat = h.matrix();
    let along: Vec<Vec<Vec<Scalar>>> =
        (0..n).map(|a| nabla_upper_along(c, &mat[a], mat)).collect();
    let mut out = Vec::new();
    for pair in increasing_tuples(n, 2) {
        let (a, b) = (pair[0], pair[1]);
        for k in 0..n {
            let v = along[a][b][k].sub(&along[b][a][k]);
            if !v.is_zero() {
                out.push((format!("kv-codazzi(e^{a},e^{b};e^{k})"), v));
            }
        }
    }
    out
}

/// Nonzero components of the three Jacobi–Koszul–Vinberg defect families
/// of a pair `(h, E)`:
///
/// 1. `jkv-i(e^a,e^b;e^c)` — the twisted Codazzi-type condition
///    `(∇_{h♯e^a}h)(e^b,e^c) − E_a h(e^b,e^c) − (∇_{h♯e^b}h)(e^a,e^c) +
///    E_b h(e^a,e^c)` over increasing pairs `a < b`;
/// 2. `jkv-ii(e^b;e^c)` — `(∇_E h)(e^b,e^c) − (∇_{h♯e^b}E)_c + E_b E_c`
///    over all ordered pairs;
/// 3. `jkv-iii on e_k` — the components of `∇_E E`.
///
/// Empty output certifies a Jacobi–Koszul–Vinberg structure.  With `E = 0`
/// the second and third families vanish and the first reduces to
/// [`kv_manifold_defects`].
pub fn jkv_manifold_defects(p: &AffinePatch, pair: &JKVPair) -> Vec<(String, Scalar)> {
    assert_on_patch(p, pair.h.rank(), pair.h.ctx());
    let c = p.connection();
    let n = p.dim();
    let mat = pair.h.matrix();
    let e = &pair.e;
    let along: Vec<Vec<Vec<Scalar>>> =
        (0..n).map(|a| nabla_upper_along(c, &mat[a], mat)).collect();
    let mut out = Vec::new();
    for idx in increasing_tuples(n, 2) {
        let (a, b) = (idx[0], idx[1]);
        for k in 0..n {
            let v = along[a][b][k]
                .sub(&e[a].mul(&mat[b][k]))
                .sub(&along[b][a][k])
                .add(&e[b].mul(&mat[a][k]));
            if !v.is_zero() {
                out.push((format!("jkv-i(e^{a},e^{b};e^{k})"), v));
            }
        }
    }
    let n_e_h = nabla_upper_along(c, e, mat);
    let nabla_e: Vec<Section> = (0..n).map(|i| c.nabla_frame(i, e)).collect();
    for b in 0..n {
        for k in 0..n {
            // (∇_{h♯e^b} E)_k = Σ_i h^{bi} (∇_i E)_k.
            let mut sharp_deriv = Scalar::zero(p.ctx());
            for i in 0..n {
                if !mat[b][i].is_zero() {
                    sharp_deriv = sharp_deriv.add(&mat[b][i].mul(&nabla_e[i][k]));
                }
            }
            let v = n_e_h[b][k].sub(&sharp_deriv).add(&e[b].mul(&e[k]));
            if !v.is_zero() {
                out.push((format!("jkv-ii(e^{b};e^{k})"), v));
            }
        }
    }
    for (k, v) in c.apply(e, e).into_iter().enumerate() {
        if !v.is_zero() {
            out.push((format!("jkv-iii on e{k}"), v));
        }
    }
    out
}

/// Embed a pair `(h, E)` of rank `n` into one symmetric tensor of rank
/// `n + 1`: the tensor block stays in place, the vector field fills the
/// extra row and column, and the corner entry is zero.
pub fn pack_tensor(pair: &JKVPair) -> Result<SymmetricTensor> {
    let n = pair.h.rank();
    let ctx = pair.h.ctx();
    let mut mat = vec![vec![Scalar::zero(ctx); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            mat[i][j] = pair.h.entry(i, j).clone();
        }
        mat[i][n] = pair.e[i].clone();
        mat[n][i] = pair.e[i].clone();
    }
    SymmetricTensor::new(mat)
}

/// The canonical twisted left-symmetric structure of a patch: the
/// covariant-derivative product on the trivially line-extended tangent
/// algebroid, twisted by the covector dual to the extra direction.  The
/// twist is always a cocycle here because the product table annihilates
/// the extra direction and the covector is constant.
pub fn bar_nabla_jlsa(p: &AffinePatch) -> Result<JacobiLSA> {
    let lsa = lsa_bar_nabla(p.connection())?;
    let ctx = lsa.ctx();
    let r = lsa.rank();
    let mut phi0 = vec![Scalar::zero(ctx); r];
    phi0[r - 1] = Scalar::one(ctx);
    JacobiLSA::new(lsa, phi0)
}

/// Both formulations of the Jacobi–Koszul–Vinberg condition side by side:
/// the five-term twisted bracket defects of the packed tensor on the
/// canonical twisted structure (labels prefixed `packed`), followed by the
/// three coordinate defect families of [`jkv_manifold_defects`].  The two
/// halves vanish simultaneously; an empty report certifies the structure
/// in both formulations at once.
pub fn jkv_equivalence_report(
    p: &AffinePatch,
    pair: &JKVPair,
) -> Result<Vec<(String, Scalar)>> {
    assert_on_patch(p, pair.h.rank(), pair.h.ctx());
    let packed = pack_tensor(pair)?;
    let jlsa = bar_nabla_jlsa(p)?;
    let mut out: Vec<(String, Scalar)> = jkv_bracket_defects(&jlsa, &packed)
        .into_iter()
        .map(|(label, v)| (format!("packed {label}"), v))
        .collect();
    out.extend(jkv_manifold_defects(p, pair));
    Ok(out)
}

/// Nonzero components of the symmetrization defect of `∇g + θ ⊗ g` in its
/// first two slots: `(∇_{e_i}g)(e_j,e_k) + θ_i g_{jk} − (∇_{e_j}g)(e_i,e_k)
/// − θ_j g_{ik}` over increasing pairs `i < j`.  Empty output is the
/// semi-Weyl condition; with `θ = 0` it reduces to the Codazzi defect.
pub fn semi_weyl_defects(
    p: &AffinePatch,
    g: &SymmetricTensor,
    theta: &[Scalar],
) -> Vec<(String, Scalar)> {
    assert_on_patch(p, g.rank(), g.ctx());
    assert_eq!(theta.len(), p.dim(), "one-form must match the chart dimension");
    let c = p.connection();
    let n = p.dim();
    let mat = g.matrix();
    let nabla_g: Vec<Vec<Vec<Scalar>>> =
        (0..n).map(|i| c.nabla_lower2(mat, i)).collect();
    let mut out = Vec::new();
    for pair in increasing_tuples(n, 2) {
        let (i, j) = (pair[0], pair[1]);
        for k in 0..n {
            let v = nabla_g[i][j][k]
                .add(&theta[i].mul(&mat[j][k]))
                .sub(&nabla_g[j][i][k])
                .sub(&theta[j].mul(&mat[i][k]));
            if !v.is_zero() {
                out.push((format!("semi-weyl(e{i},e{j}) on e{k}"), v));
            }
        }
    }
    out
}

/// The one-form `θ = g♭E` induced by a nondegenerate pair, where
/// `g = h⁻¹`: `θ_k = Σ_m g_{km} E_m`.  Fails when the tensor is singular.
pub fn lee_form(pair: &JKVPair) -> Result<Covector> {
    let g = pair.h.invert()?;
    let n = g.rank();
    Ok((0..n)
        .map(|k| {
            let mut v = Scalar::zero(g.ctx());
            for (m, em) in pair.e.iter().enumerate() {
                if !em.is_zero() {
                    v = v.add(&g.entry(k, m).mul(em));
                }
            }
            v
        })
        .collect())
}

/// The exterior derivative of `θ = g♭E` minus its unconditional four-term
/// expansion `(∇_{e_i}g)(e_j,E) − (∇_{e_j}g)(e_i,E) + g(e_j,∇_{e_i}E) −
/// g(e_i,∇_{e_j}E)`, over increasing pairs.  This identity holds for
/// every metric and vector field on every patch, so the output is always
/// empty; it cross-checks the exterior derivative against the
/// connection-level computation.
pub fn dtheta_identity_defects(
    p: &AffinePatch,
    g: &SymmetricTensor,
    e: &Section,
) -> Vec<(String, Scalar)> {
    dtheta_expansion_defects(p, g, e, true)
}

/// The exterior derivative of `θ = g♭E` minus the two-term expansion
/// `g(e_j,∇_{e_i}E) − g(e_i,∇_{e_j}E)`.  Unlike the four-term identity
/// this is *not* unconditional: the difference is the Codazzi defect of
/// `g` contracted with `E`, so it vanishes exactly when that contraction
/// does (in particular whenever `g` satisfies the Codazzi equation).
pub fn dtheta_short_defects(
    p: &AffinePatch,
    g: &SymmetricTensor,
    e: &Section,
) -> Vec<(String, Scalar)> {
    dtheta_expansion_defects(p, g, e, false)
}

fn dtheta_expansion_defects(
    p: &AffinePatch,
    g: &SymmetricTensor,
    e: &Section,
    with_nabla_g: bool,
) -> Vec<(String, Scalar)> {
    assert_on_patch(p, g.rank(), g.ctx());
    assert_eq!(e.len(), p.dim(), "vector field must match the chart dimension");
    let c = p.connection();
    let l = p.algebroid();
    let n = p.dim();
    let mat = g.matrix();
    let theta: Covector = (0..n)
        .map(|k| {
            let mut v = Scalar::zero(p.ctx());
            for (m, em) in e.iter().enumerate() {
                v = v.add(&mat[k][m].mul(em));
            }
            v
        })
        .collect();
    let dtheta = l.differential(&l.covector_mv(&theta));
    let nabla_g: Vec<Vec<Vec<Scalar>>> =
        (0..n).map(|i| c.nabla_lower2(mat, i)).collect();
    let nabla_e: Vec<Section> = (0..n).map(|i| c.nabla_frame(i, e)).collect();
    let mut out = Vec::new();
    for pair in increasing_tuples(n, 2) {
        let (i, j) = (pair[0], pair[1]);
        let mut v = dtheta.get(&[i, j]);
        for k in 0..n {
            if with_nabla_g {
                v = v
                    .sub(&nabla_g[i][j][k].mul(&e[k]))
                    .add(&nabla_g[j][i][k].mul(&e[k]));
            }
            v = v
                .sub(&mat[j][k].mul(&nabla_e[i][k]))
                .add(&mat[i][k].mul(&nabla_e[j][k]));
        }
        if !v.is_zero() {
            let tag = if with_nabla_g { "dtheta-identity" } else { "dtheta-short" };
            out.push((format!("{tag}(e{i},e{j})"), v));
        }
    }
    out
}

/// The locally conformally Hessian report of a nondegenerate pair: with
/// `g = h⁻¹` and `θ = g♭E`, the semi-Weyl defects of `(g, θ)`, the nonzero
/// components of `dθ`, and the unconditional four-term cross-check of
/// `dθ` (which never fires).  An empty report certifies that the metric
/// and one-form make the patch locally conformally Hessian, which happens
/// exactly when the pair is Jacobi–Koszul–Vinberg.  Fails when the tensor
/// is singular.
pub fn lch_report(p: &AffinePatch, pair: &JKVPair) -> Result<Vec<(String, Scalar)>> {
    assert_on_patch(p, pair.h.rank(), pair.h.ctx());
    let g = pair.h.invert()?;
    let theta = lee_form(pair)?;
    let mut out = semi_weyl_defects(p, &g, &theta);
    let l = p.algebroid();
    let dtheta = l.differential(&l.covector_mv(&theta));
    for (idx, v) in dtheta.terms() {
        if !v.is_zero() {
            out.push((format!("d(theta) on {}", frame_tag(idx)), v.clone()));
        }
    }
    out.extend(dtheta_identity_defects(p, &g, &pair.e));
    Ok(out)
}

/// The Codazzi defect of a metric together with the torsion of its dual
/// connection (labels prefixed `dual-`).  The two families vanish
/// simultaneously: the dual connection of a Codazzi metric is torsion-free
/// and conversely.  Fails when the metric is singular.
pub fn dual_connection_report(
    p: &AffinePatch,
    g: &SymmetricTensor,
) -> Result<Vec<(String, Scalar)>> {
    assert_on_patch(p, g.rank(), g.ctx());
    let c = p.connection();
    let mut out = c.codazzi_defects(g.matrix());
    let dual = c.dual_connection(g.matrix())?;
    for (label, v) in dual.torsion_defects() {
        out.push((format!("dual-{label}"), v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsa::{kv_bracket_defects, lsa_from_connection};

    fn plane() -> AffinePatch {
        AffinePatch::flat(&["x", "y"]).unwrap()
    }

    fn line() -> AffinePatch {
        AffinePatch::flat(&["x"]).unwrap()
    }

    /// `h = [[−x]]`, `E = ∂x`: the basic one-dimensional pair.
    fn line_pair(p: &AffinePatch) -> JKVPair {
        let ctx = p.ctx();
        let h = SymmetricTensor::new(vec![vec![Scalar::var(ctx, 0).neg()]]).unwrap();
        JKVPair::new(h, vec![Scalar::one(ctx)]).unwrap()
    }

    /// `h = [[y²/2 − x, −y], [−y, 1]]`, `E = ∂x`: a two-dimensional pair
    /// whose three defect families all vanish.
    fn plane_pair(p: &AffinePatch) -> JKVPair {
        let ctx = p.ctx();
        let x = Scalar::var(ctx, 0);
        let y = Scalar::var(ctx, 1);
        let h00 = y.mul(&y).div(&Scalar::int(ctx, 2)).unwrap().sub(&x);
        let h = SymmetricTensor::new(vec![
            vec![h00, y.neg()],
            vec![y.neg(), Scalar::one(ctx)],
        ])
        .unwrap();
        JKVPair::new(h, vec![Scalar::one(ctx), Scalar::zero(ctx)]).unwrap()
    }

    /// The inverse of the Hessian of `x³ + xy²`, a Koszul–Vinberg tensor
    /// on the flat plane.
    fn hessian_inverse(p: &AffinePatch) -> SymmetricTensor {
        let b = p.algebroid().bundle();
        let g = SymmetricTensor::new(vec![
            vec![b.parse_scalar("6*x").unwrap(), b.parse_scalar("2*y").unwrap()],
            vec![b.parse_scalar("2*y").unwrap(), b.parse_scalar("2*x").unwrap()],
        ])
        .unwrap();
        g.invert().unwrap()
    }

    fn diag_one_x(p: &AffinePatch) -> SymmetricTensor {
        let ctx = p.ctx();
        SymmetricTensor::from_diagonal(&[Scalar::one(ctx), Scalar::var(ctx, 0)]).unwrap()
    }

    #[test]
    fn patch_construction_certifies_flatness_and_torsion_freeness() {
        let ctx = plane().ctx();
        // A nonzero but flat torsion-free table is accepted.
        let mut ok = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        ok[1][1][1] = Scalar::var(ctx, 1);
        assert!(AffinePatch::new(&["x", "y"], ok).is_ok());
        // An asymmetric table has torsion.
        let mut torsion = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        torsion[0][1][0] = Scalar::one(ctx);
        let err = AffinePatch::new(&["x", "y"], torsion).unwrap_err();
        assert!(matches!(&err, Error::Invalid(m) if m.contains("torsion")));
        // A symmetric table can still curve.
        let mut curved = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        curved[0][1][0] = Scalar::var(ctx, 1);
        curved[1][0][0] = Scalar::var(ctx, 1);
        let err = AffinePatch::new(&["x", "y"], curved).unwrap_err();
        assert!(matches!(&err, Error::Invalid(m) if m.contains("curvature")));
    }

    #[test]
    fn pair_construction_validates_shapes_and_contexts() {
        let p = plane();
        let h = diag_one_x(&p);
        let err = JKVPair::new(h.clone(), vec![Scalar::one(p.ctx())]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let foreign = Scalar::one(Ctx::new(1));
        let err = JKVPair::new(h, vec![foreign.clone(), foreign]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn kv_defect_vanishes_together_with_codazzi_of_the_inverse_metric() {
        let p = plane();
        // The Hessian metric satisfies Codazzi, so its inverse is a
        // Koszul–Vinberg tensor and the product structure on the patch's
        // tangent algebroid closes its five-term bracket.
        let h = hessian_inverse(&p);
        let g = h.invert().unwrap();
        assert!(kv_manifold_defects(&p, &h).is_empty());
        assert!(p.connection().codazzi_defects(g.matrix()).is_empty());
        let lsa = lsa_from_connection(p.connection()).unwrap();
        assert!(kv_bracket_defects(&lsa, &h).is_empty());
        // diag(1, x) fails all three formulations at once.
        let bad = diag_one_x(&p);
        let bad_g = bad.invert().unwrap();
        assert!(!kv_manifold_defects(&p, &bad).is_empty());
        assert!(!p.connection().codazzi_defects(bad_g.matrix()).is_empty());
        assert!(!kv_bracket_defects(&lsa, &bad).is_empty());
    }

    #[test]
    fn one_dimensional_pair_satisfies_all_three_families() {
        let p = line();
        assert!(jkv_manifold_defects(&p, &line_pair(&p)).is_empty());
    }

    #[test]
    fn squared_coefficient_breaks_the_second_family() {
        let p = line();
        let ctx = p.ctx();
        let x = Scalar::var(ctx, 0);
        let h = SymmetricTensor::new(vec![vec![x.mul(&x)]]).unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(ctx)]).unwrap();
        let defects = jkv_manifold_defects(&p, &pair);
        assert_eq!(defects.len(), 1);
        assert_eq!(defects[0].0, "jkv-ii(e^0;e^0)");
        let expect = x.mul_int(2).add(&Scalar::one(ctx));
        assert_eq!(defects[0].1, expect, "defect must be 2x + 1");
    }

    #[test]
    fn two_dimensional_pair_satisfies_all_three_families() {
        let p = plane();
        assert!(jkv_manifold_defects(&p, &plane_pair(&p)).is_empty());
    }

    #[test]
    fn vanishing_vector_field_reduces_the_families_to_the_kv_defect() {
        let p = plane();
        let zero = vec![Scalar::zero(p.ctx()); 2];
        // A Koszul–Vinberg tensor with E = 0 passes.
        let good = JKVPair::new(hessian_inverse(&p), zero.clone()).unwrap();
        assert!(jkv_manifold_defects(&p, &good).is_empty());
        // A non-Koszul–Vinberg tensor with E = 0 fails with exactly the
        // kv-codazzi values, relabeled as the first family.
        let bad = JKVPair::new(diag_one_x(&p), zero).unwrap();
        let jkv: Vec<Scalar> =
            jkv_manifold_defects(&p, &bad).into_iter().map(|(_, v)| v).collect();
        let kv: Vec<Scalar> =
            kv_manifold_defects(&p, &bad.h).into_iter().map(|(_, v)| v).collect();
        assert!(!jkv.is_empty());
        assert_eq!(jkv, kv);
    }

    #[test]
    fn packed_tensor_embeds_the_pair_with_a_zero_corner() {
        let p = line();
        let packed = pack_tensor(&line_pair(&p)).unwrap();
        let ctx = p.ctx();
        assert_eq!(packed.rank(), 2);
        assert_eq!(*packed.entry(0, 0), Scalar::var(ctx, 0).neg());
        assert_eq!(*packed.entry(0, 1), Scalar::one(ctx));
        assert_eq!(*packed.entry(1, 0), Scalar::one(ctx));
        assert!(packed.entry(1, 1).is_zero());
    }

    #[test]
    fn canonical_twisted_structure_is_valid_on_a_curved_table_patch() {
        let ctx = plane().ctx();
        let mut table = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        table[1][1][1] = Scalar::var(ctx, 1);
        let p = AffinePatch::new(&["x", "y"], table).unwrap();
        let jlsa = bar_nabla_jlsa(&p).unwrap();
        assert_eq!(jlsa.lsa().rank(), 3);
        assert!(jlsa.phi0()[0].is_zero());
        assert!(jlsa.phi0()[1].is_zero());
        assert!(jlsa.phi0()[2].is_one());
        assert!(jlsa.cocycle_defects().is_empty());
    }

    #[test]
    fn packed_bracket_and_the_three_families_vanish_together() {
        // Positive: both halves of the report are empty, in one and two
        // dimensions.
        let p1 = line();
        assert!(jkv_equivalence_report(&p1, &line_pair(&p1)).unwrap().is_empty());
        let p2 = plane();
        assert!(jkv_equivalence_report(&p2, &plane_pair(&p2)).unwrap().is_empty());
    }

    #[test]
    fn equivalence_report_flags_both_halves_on_a_squared_coefficient() {
        let p = line();
        let ctx = p.ctx();
        let x = Scalar::var(ctx, 0);
        let h = SymmetricTensor::new(vec![vec![x.mul(&x)]]).unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(ctx)]).unwrap();
        let report = jkv_equivalence_report(&p, &pair).unwrap();
        let expect = x.mul_int(2).add(&Scalar::one(ctx));
        let packed: Vec<&(String, Scalar)> =
            report.iter().filter(|(l, _)| l.starts_with("packed ")).collect();
        let coords: Vec<&(String, Scalar)> =
            report.iter().filter(|(l, _)| l.starts_with("jkv-")).collect();
        assert_eq!(packed.len(), 1);
        assert_eq!(packed[0].0, "packed jkv-bracket(e^0,e^1;e^0)");
        assert_eq!(packed[0].1, expect);
        assert_eq!(coords.len(), 1);
        assert_eq!(coords[0].1, expect);
    }

    #[test]
    fn equivalence_report_flags_both_halves_on_a_first_family_failure() {
        // h = diag(−x, −1), E = ∂x passes families (ii) and (iii) but
        // fails (i) at (e^0, e^1; e^1) with value 1; the packed bracket
        // must fail too.
        let p = plane();
        let ctx = p.ctx();
        let h = SymmetricTensor::from_diagonal(&[
            Scalar::var(ctx, 0).neg(),
            Scalar::int(ctx, -1),
        ])
        .unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(ctx), Scalar::zero(ctx)]).unwrap();
        let coords = jkv_manifold_defects(&p, &pair);
        assert_eq!(coords.len(), 1);
        assert_eq!(coords[0].0, "jkv-i(e^0,e^1;e^1)");
        assert!(coords[0].1.is_one());
        let report = jkv_equivalence_report(&p, &pair).unwrap();
        assert!(report.iter().any(|(l, _)| l.starts_with("packed ")));
        assert!(report.iter().any(|(l, _)| l.starts_with("jkv-i(")));
    }

    #[test]
    fn lee_form_of_the_line_pair_is_minus_the_reciprocal_coordinate() {
        let p = line();
        let theta = lee_form(&line_pair(&p)).unwrap();
        let ctx = p.ctx();
        let expect = Scalar::int(ctx, -1).div(&Scalar::var(ctx, 0)).unwrap();
        assert_eq!(theta, vec![expect]);
    }

    #[test]
    fn lee_form_rejects_singular_tensors() {
        let p = plane();
        let x = Scalar::var(p.ctx(), 0);
        let h = SymmetricTensor::new(vec![
            vec![x.clone(), x.clone()],
            vec![x.clone(), x],
        ])
        .unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(p.ctx()); 2]).unwrap();
        assert!(matches!(lee_form(&pair), Err(Error::Singular(_))));
        assert!(matches!(lch_report(&p, &pair), Err(Error::Singular(_))));
    }

    #[test]
    fn semi_weyl_defect_with_zero_form_is_the_codazzi_defect() {
        let p = plane();
        let g = diag_one_x(&p);
        let zero = vec![Scalar::zero(p.ctx()); 2];
        let semi: Vec<Scalar> =
            semi_weyl_defects(&p, &g, &zero).into_iter().map(|(_, v)| v).collect();
        let codazzi: Vec<Scalar> = p
            .connection()
            .codazzi_defects(g.matrix())
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        assert!(!semi.is_empty());
        assert_eq!(semi, codazzi);
    }

    #[test]
    fn valid_pairs_produce_an_empty_conformally_hessian_report() {
        let p1 = line();
        assert!(lch_report(&p1, &line_pair(&p1)).unwrap().is_empty());
        let p2 = plane();
        assert!(lch_report(&p2, &plane_pair(&p2)).unwrap().is_empty());
    }

    #[test]
    fn invalid_pair_is_caught_by_the_semi_weyl_defect() {
        let p = plane();
        let ctx = p.ctx();
        let h = SymmetricTensor::from_diagonal(&[
            Scalar::var(ctx, 0).neg(),
            Scalar::int(ctx, -1),
        ])
        .unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(ctx), Scalar::zero(ctx)]).unwrap();
        let report = lch_report(&p, &pair).unwrap();
        assert!(!report.is_empty());
        assert!(report.iter().all(|(l, _)| l.starts_with("semi-weyl")));
    }

    #[test]
    fn four_term_expansion_of_dtheta_is_unconditional() {
        // Arbitrary nondegenerate g and E, on the flat plane and on a
        // patch with a nonzero table.
        let flat = plane();
        let ctx = flat.ctx();
        let mut table = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        table[1][1][1] = Scalar::var(ctx, 1);
        let curved_table = AffinePatch::new(&["x", "y"], table).unwrap();
        for p in [&flat, &curved_table] {
            let b = p.algebroid().bundle();
            let g = SymmetricTensor::new(vec![
                vec![Scalar::one(ctx), Scalar::var(ctx, 0)],
                vec![Scalar::var(ctx, 0), b.parse_scalar("y + 3").unwrap()],
            ])
            .unwrap();
            let e = vec![Scalar::var(ctx, 1), b.parse_scalar("x^2 + 1").unwrap()];
            assert!(dtheta_identity_defects(p, &g, &e).is_empty());
            assert!(!dtheta_short_defects(p, &g, &e).is_empty());
        }
    }

    #[test]
    fn short_expansion_of_dtheta_holds_for_codazzi_metrics() {
        let p = plane();
        let b = p.algebroid().bundle();
        let g = SymmetricTensor::new(vec![
            vec![b.parse_scalar("6*x").unwrap(), b.parse_scalar("2*y").unwrap()],
            vec![b.parse_scalar("2*y").unwrap(), b.parse_scalar("2*x").unwrap()],
        ])
        .unwrap();
        assert!(p.connection().codazzi_defects(g.matrix()).is_empty());
        let e = vec![Scalar::var(p.ctx(), 1), b.parse_scalar("x^2 + 1").unwrap()];
        assert!(dtheta_short_defects(&p, &g, &e).is_empty());
    }

    #[test]
    fn dual_connection_torsion_vanishes_exactly_with_the_codazzi_defect() {
        let p = plane();
        let b = p.algebroid().bundle();
        let good = SymmetricTensor::from_diagonal(&[
            Scalar::one(p.ctx()),
            b.parse_scalar("y^2 + 1").unwrap(),
        ])
        .unwrap();
        assert!(dual_connection_report(&p, &good).unwrap().is_empty());
        let bad = diag_one_x(&p);
        let report = dual_connection_report(&p, &bad).unwrap();
        assert!(report.iter().any(|(l, _)| l.starts_with("codazzi")));
        assert!(report.iter().any(|(l, _)| l.starts_with("dual-torsion")));
    }
}
