//! Lie algebroids over a polynomial patch, with the full Cartan calculus.
//!
//! A [`LieAlgebroid`] is an [`AnchoredBundle`] together with structure
//! functions `c_ij^k` recording the bracket of frame sections; the bracket
//! of arbitrary sections follows from bilinearity and the Leibniz rule
//! through the anchor.  On top of the bracket this module builds:
//!
//! * the **Schouten bracket** on multisections, extended from sections by
//!   the decomposable rule `[X_1∧…∧X_p, Q] = Σ_m (-1)^{p-1-m} X_{(m)} ∧
//!   [X_m, Q]` (0-based `m`, `X_{(m)}` the wedge with slot `m` removed) and
//!   by graded antisymmetry in the degree-zero slot — the unique extension
//!   that is a biderivation and restricts to the bracket and the anchor
//!   action in low degrees;
//! * the **differential** on cosections via the alternating-sum formula,
//!   satisfying `d² = 0` exactly when the axioms hold;
//! * **Lie derivatives** of both multisections and cosections, the latter
//!   through the Cartan identity `L_X = ι_X ∘ d + d ∘ ι_X`.
//!
//! Axioms are verified mechanically: the Jacobiator on frame triples (it is
//! tensorial, so frames suffice) and the anchor-morphism identity on frame
//! pairs applied to every coordinate function.

use crate::bundle::{AnchoredBundle, Covector, Section};
use crate::error::{Error, Result};
use crate::multivector::{increasing_tuples, Cosection, Multisection, Multivector};
use crate::scalar::{Ctx, Scalar};

/// A Lie algebroid: anchored bundle plus frame structure functions.
#[derive(Clone, Debug)]
pub struct LieAlgebroid {
    bundle: AnchoredBundle,
    /// `table[i][j][k]` is the `e_k` coefficient of the bracket of `e_i`
    /// with `e_j`.
    table: Vec<Vec<Vec<Scalar>>>,
}

impl LieAlgebroid {
    /// Build an algebroid and certify its axioms.
    ///
    /// Checks the table shape, antisymmetry of the structure functions, the
    /// Jacobi identity, and the anchor-morphism identity; any violation is
    /// reported symbolically.
    pub fn new(bundle: AnchoredBundle, table: Vec<Vec<Vec<Scalar>>>) -> Result<LieAlgebroid> {
        let alg = LieAlgebroid::new_unvalidated(bundle, table)?;
        match alg.axiom_defects().into_iter().next() {
            None => Ok(alg),
            Some((label, defect)) => Err(Error::Invalid(format!(
                "not a Lie algebroid: {label} = {}",
                alg.bundle.render_scalar(&defect)
            ))),
        }
    }

    /// Build an algebroid checking only shape and antisymmetry, leaving the
    /// differential axioms to an explicit [`axiom_defects`] call.  This is
    /// the entry point for loading structures whose validity is the very
    /// question being asked.
    ///
    /// [`axiom_defects`]: LieAlgebroid::axiom_defects
    pub fn new_unvalidated(
        bundle: AnchoredBundle,
        table: Vec<Vec<Vec<Scalar>>>,
    ) -> Result<LieAlgebroid> {
        let r = bundle.rank();
        let ctx = bundle.ctx();
        if table.len() != r || table.iter().any(|p| p.len() != r || p.iter().any(|q| q.len() != r))
        {
            return Err(Error::Shape(format!(
                "structure table must be {r}x{r}x{r} for rank {r}"
            )));
        }
        for (i, plane) in table.iter().enumerate() {
            for (j, row) in plane.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    if v.ctx() != ctx {
                        return Err(Error::Shape(format!(
                            "structure function c_{i}{j}^{k} uses a different variable context"
                        )));
                    }
                    let opposite = &table[j][i][k];
                    if !v.add(opposite).is_zero() {
                        return Err(Error::Invalid(format!(
                            "structure table is not antisymmetric at c_{i}{j}^{k}"
                        )));
                    }
                }
            }
        }
        Ok(LieAlgebroid { bundle, table })
    }

    /// The tangent algebroid of a polynomial patch: rank equals dimension,
    /// identity anchor, vanishing structure functions.
    pub fn tangent<S: AsRef<str>>(vars: &[S]) -> Result<LieAlgebroid> {
        let n = vars.len();
        let ctx = if vars.last().map(|s| s.as_ref() == "t").unwrap_or(false) {
            Ctx::with_line(n)
        } else {
            Ctx::new(n)
        };
        let anchor = (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| if a == i { Scalar::one(ctx) } else { Scalar::zero(ctx) })
                    .collect()
            })
            .collect();
        let bundle =
            AnchoredBundle::new(vars.iter().map(|s| s.as_ref().to_string()).collect(), n, anchor)?;
        let table = vec![vec![vec![Scalar::zero(ctx); n]; n]; n];
        LieAlgebroid::new_unvalidated(bundle, table)
    }

    /// The underlying anchored bundle.
    pub fn bundle(&self) -> &AnchoredBundle {
        &self.bundle
    }

    /// The scalar context of the patch.
    pub fn ctx(&self) -> Ctx {
        self.bundle.ctx()
    }

    /// The bundle rank.
    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    /// The structure function `c_ij^k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.table[i][j][k]
    }

    /// The bracket of two frame sections, as frame coefficients.
    pub fn bracket_frames(&self, i: usize, j: usize) -> Section {
        self.table[i][j].clone()
    }

    /// Derivative of a function along the anchor image of a section.
    pub fn rho(&self, x: &[Scalar], f: &Scalar) -> Scalar {
        self.bundle.anchor_apply(x, f)
    }

    /// The bracket of two sections: structure-function term plus the
    /// Leibniz derivatives of the coefficients through the anchor.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Section {
        let r = self.rank();
        assert_eq!(x.len(), r, "left section has the wrong length");
        assert_eq!(y.len(), r, "right section has the wrong length");
        let ctx = self.ctx();
        let mut out = vec![Scalar::zero(ctx); r];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let xy = xi.mul(yj);
                for (k, out_k) in out.iter_mut().enumerate() {
                    let c = &self.table[i][j][k];
                    if !c.is_zero() {
                        *out_k = out_k.add(&xy.mul(c));
                    }
                }
            }
        }
        for (k, out_k) in out.iter_mut().enumerate() {
            *out_k = out_k.add(&self.rho(x, &y[k])).sub(&self.rho(y, &x[k]));
        }
        out
    }

    /// Every axiom violation, as `(label, nonzero defect scalar)` pairs in a
    /// deterministic order.  Empty output certifies the axioms.
    pub fn axiom_defects(&self) -> Vec<(String, Scalar)> {
        let r = self.rank();
        let mut defects = Vec::new();
        // Jacobiator on frame triples.  The Jacobiator of an anchored
        // antisymmetric Leibniz bracket is tensorial and alternating, so
        // strictly increasing triples certify it for all sections.
        for t in increasing_tuples(r, 3) {
            let (i, j, k) = (t[0], t[1], t[2]);
            let (ei, ej, ek) = (
                self.bundle.basis_section(i),
                self.bundle.basis_section(j),
                self.bundle.basis_section(k),
            );
            let mut jac = self.bracket(&ei, &self.bracket(&ej, &ek));
            for (a, b, c) in [(&ej, &ek, &ei), (&ek, &ei, &ej)] {
                let term = self.bracket(a, &self.bracket(b, c));
                for (l, acc) in jac.iter_mut().enumerate() {
                    *acc = acc.add(&term[l]);
                }
            }
            for (l, v) in jac.into_iter().enumerate() {
                if !v.is_zero() {
                    defects.push((format!("jacobiator(e{i},e{j},e{k}) on e{l}"), v));
                }
            }
        }
        // Anchor morphism on frame pairs, tested against each coordinate.
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            let (ei, ej) = (self.bundle.basis_section(i), self.bundle.basis_section(j));
            let br = self.bracket(&ei, &ej);
            for a in 0..self.bundle.nvars() {
                let xa = Scalar::var(self.ctx(), a);
                let lhs = self.rho(&br, &xa);
                let rhs = self
                    .rho(&ei, &self.rho(&ej, &xa))
                    .sub(&self.rho(&ej, &self.rho(&ei, &xa)));
                let defect = lhs.sub(&rhs);
                if !defect.is_zero() {
                    defects.push((
                        format!("anchor morphism (e{i},e{j}) on {}", self.bundle.vars()[a]),
                        defect,
                    ));
                }
            }
        }
        defects
    }

    /// Certify the axioms, reporting the first violation.
    pub fn check_axioms(&self) -> Result<()> {
        match self.axiom_defects().into_iter().next() {
            None => Ok(()),
            Some((label, defect)) => Err(Error::Invalid(format!(
                "{label} = {}",
                self.bundle.render_scalar(&defect)
            ))),
        }
    }

    /// Lie derivative of a multisection along a section: the anchor acts on
    /// coefficients and the bracket acts slotwise on the frame factors.
    pub fn lie_derivative_multisection(&self, x: &[Scalar], d: &Multisection) -> Multisection {
        assert_eq!(x.len(), self.rank(), "section has the wrong length");
        if d.degree() == 0 {
            return Multivector::from_scalar(d.rank(), self.rho(x, &d.scalar_part()));
        }
        let mut out = Multivector::zero(self.ctx(), d.rank(), d.degree());
        for (idx, v) in d.terms() {
            out.add_term(idx, self.rho(x, v));
            for (m, &im) in idx.iter().enumerate() {
                let br = self.bracket(x, &self.bundle.basis_section(im));
                for (k, bv) in br.iter().enumerate() {
                    if bv.is_zero() {
                        continue;
                    }
                    let mut pre = idx.clone();
                    pre[m] = k;
                    out.add_term(&pre, v.mul(bv));
                }
            }
        }
        out
    }

    /// The Schouten bracket of multisections, of degree `p + q - 1`.
    ///
    /// Extended from the section bracket by the decomposable rule with sign
    /// `(-1)^{p-1-m}` on the term that singles out slot `m` (0-based), and
    /// from functions by `[f, Q] = -(-1)^{(p-1)(q-1)} [Q, f]`.  This is the
    /// extension under which the bracket is graded-antisymmetric, a graded
    /// biderivation of the wedge, and `[X, -]` is the Lie derivative.
    pub fn schouten(&self, d1: &Multisection, d2: &Multisection) -> Multisection {
        let (p, q) = (d1.degree(), d2.degree());
        if p == 0 && q == 0 {
            return Multivector::zero(self.ctx(), d1.rank(), 0);
        }
        if p == 0 {
            let sign = ((p as i64 - 1) * (q as i64 - 1)).rem_euclid(2);
            return self.schouten(d2, d1).scale_int(if sign == 0 { -1 } else { 1 });
        }
        if p == 1 {
            return self.lie_derivative_multisection(&d1.coefficients(), d2);
        }
        let mut out = Multivector::zero(self.ctx(), d1.rank(), p + q - 1);
        for (idx, v) in d1.terms() {
            for m in 0..p {
                // Put the coefficient on the singled-out factor when m = 0
                // and on the remaining wedge otherwise; the results agree,
                // and this split keeps both factors decomposable.
                let mut xm = vec![Scalar::zero(self.ctx()); d1.rank()];
                xm[idx[m]] = if m == 0 { v.clone() } else { Scalar::one(self.ctx()) };
                let rest_idx: Vec<usize> =
                    idx.iter().enumerate().filter(|(a, _)| *a != m).map(|(_, &b)| b).collect();
                let rest_coeff = if m == 0 { Scalar::one(self.ctx()) } else { v.clone() };
                let rest = Multivector::from_terms(
                    self.ctx(),
                    d1.rank(),
                    p - 1,
                    [(rest_idx, rest_coeff)],
                );
                let inner = self.lie_derivative_multisection(&xm, d2);
                let sign = if (p - 1 - m) % 2 == 0 { 1 } else { -1 };
                out = out.add(&rest.wedge(&inner).scale_int(sign));
            }
        }
        out
    }

    /// The differential on cosections, by the alternating-sum formula over
    /// frame tuples.  Squares to zero exactly when the axioms hold.
    pub fn differential(&self, omega: &Cosection) -> Cosection {
        let r = omega.rank();
        let k = omega.degree();
        let ctx = self.ctx();
        let mut out = Multivector::zero(ctx, r, k + 1);
        for tuple in increasing_tuples(r, k + 1) {
            let mut tot = Scalar::zero(ctx);
            for i in 0..=k {
                let rest: Vec<usize> =
                    tuple.iter().enumerate().filter(|(a, _)| *a != i).map(|(_, &b)| b).collect();
                let val = omega.get(&rest);
                let term = self.rho(&self.bundle.basis_section(tuple[i]), &val);
                tot = if i % 2 == 0 { tot.add(&term) } else { tot.sub(&term) };
            }
            for i in 0..=k {
                for j in (i + 1)..=k {
                    let br = self.bracket_frames(tuple[i], tuple[j]);
                    let rest: Vec<usize> = tuple
                        .iter()
                        .enumerate()
                        .filter(|(a, _)| *a != i && *a != j)
                        .map(|(_, &b)| b)
                        .collect();
                    let mut val = Scalar::zero(ctx);
                    for (l, c) in br.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut slot = Vec::with_capacity(k);
                        slot.push(l);
                        slot.extend_from_slice(&rest);
                        val = val.add(&c.mul(&omega.get(&slot)));
                    }
                    tot = if (i + j) % 2 == 0 { tot.add(&val) } else { tot.sub(&val) };
                }
            }
            out.add_term(&tuple, tot);
        }
        out
    }

    /// Lie derivative of a cosection along a section, via the Cartan
    /// identity `L_X = ι_X ∘ d + d ∘ ι_X`.
    pub fn lie_derivative_cosection(&self, x: &[Scalar], omega: &Cosection) -> Cosection {
        assert_eq!(x.len(), self.rank(), "section has the wrong length");
        if omega.degree() == 0 {
            return Multivector::from_scalar(omega.rank(), self.rho(x, &omega.scalar_part()));
        }
        let inner_d = self
            .differential(omega)
            .contract_first(x)
            .expect("positive degree by construction");
        let d_inner = self.differential(&omega.contract_first(x).expect("degree checked above"));
        inner_d.add(&d_inner)
    }

    /// The direct sum with a trivial line: one extra frame section, central
    /// and anchored to zero, over the same patch.  The home of packed
    /// bivector structures.
    pub fn direct_sum_trivial_line(&self) -> LieAlgebroid {
        let r = self.rank();
        let ctx = self.ctx();
        let anchor = self
            .bundle
            .anchor_rows()
            .iter()
            .map(|row| {
                let mut ext = row.clone();
                ext.push(Scalar::zero(ctx));
                ext
            })
            .collect();
        let bundle = AnchoredBundle::new(self.bundle.vars().to_vec(), r + 1, anchor)
            .expect("extending a valid bundle preserves validity");
        let mut table = vec![vec![vec![Scalar::zero(ctx); r + 1]; r + 1]; r + 1];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    table[i][j][k] = self.table[i][j][k].clone();
                }
            }
        }
        LieAlgebroid { bundle, table }
    }

    /// Convert frame coefficients to a degree-1 multisection.
    pub fn section_mv(&self, x: &[Scalar]) -> Multisection {
        assert_eq!(x.len(), self.rank(), "section has the wrong length");
        Multivector::from_coefficients(self.ctx(), x)
    }

    /// Convert dual-frame coefficients to a degree-1 cosection.
    pub fn covector_mv(&self, xi: &[Scalar]) -> Cosection {
        assert_eq!(xi.len(), self.rank(), "covector has the wrong length");
        Multivector::from_coefficients(self.ctx(), xi)
    }

    /// Parse helper: a section from component source strings.
    pub fn parse_section<S: AsRef<str>>(&self, srcs: &[S]) -> Result<Section> {
        self.bundle.parse_components(srcs)
    }

    /// Parse helper: a covector from component source strings.
    pub fn parse_covector<S: AsRef<str>>(&self, srcs: &[S]) -> Result<Covector> {
        self.bundle.parse_components(srcs)
    }
}
