//! Frame multivectors: exterior algebra over the bundle frame.
//!
//! A [`Multivector`] of degree `p` stores its components against the wedge
//! basis `e_I = e_{i_1} ∧ … ∧ e_{i_p}` with strictly increasing index
//! tuples, each component an exact [`Scalar`].  The same container serves
//! both multi-*sections* (wedges of frame sections, the home of bivectors
//! and the Schouten calculus) and multi-*cosections* (wedges of the dual
//! frame, the home of the differential calculus); the [`Multisection`] and
//! [`Cosection`] aliases mark which reading a signature intends.
//!
//! All operations keep tuples sorted and components pruned, so structural
//! equality of multivectors is exact mathematical equality — the property
//! every defect check in this crate leans on.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Ctx, Scalar};

/// A multivector read as a wedge of frame sections.
pub type Multisection = Multivector;

/// A multivector read as a wedge of dual-frame covectors.
pub type Cosection = Multivector;

/// An exterior-algebra element over the bundle frame, of fixed degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    ctx: Ctx,
    rank: usize,
    degree: usize,
    /// Strictly increasing index tuples to nonzero coefficients.
    comps: BTreeMap<Vec<usize>, Scalar>,
}

/// Sort an index tuple, reporting the permutation sign.
///
/// Returns `None` when an index repeats (the wedge is zero).
pub(crate) fn sort_sign(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1i64;
    // Insertion sort; tuples have at most five entries.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// All strictly increasing `degree`-tuples with entries below `rank`,
/// in lexicographic order.
pub fn increasing_tuples(rank: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, rank: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..rank {
            if rank - i < left {
                break;
            }
            cur.push(i);
            rec(i + 1, rank, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if degree <= rank {
        rec(0, rank, degree, &mut Vec::new(), &mut out);
    }
    out
}

/// Deterministic frame tag for an index tuple: `e01` for `(0, 1)`, `1` for
/// the empty degree-0 tuple.  Used in rendering and in defect labels.
pub fn frame_tag(idx: &[usize]) -> String {
    if idx.is_empty() {
        return "1".into();
    }
    std::iter::once("e".to_string())
        .chain(idx.iter().map(|i| i.to_string()))
        .collect()
}

impl Multivector {
    /// The zero multivector of the given degree.
    pub fn zero(ctx: Ctx, rank: usize, degree: usize) -> Multivector {
        Multivector { ctx, rank, degree, comps: BTreeMap::new() }
    }

    /// Build from explicit terms; indices may come in any order and repeat
    /// across terms (contributions accumulate with the permutation sign).
    pub fn from_terms<I>(ctx: Ctx, rank: usize, degree: usize, terms: I) -> Multivector
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut mv = Multivector::zero(ctx, rank, degree);
        for (idx, v) in terms {
            mv.add_term(&idx, v);
        }
        mv
    }

    /// A degree-1 multivector from frame coefficients.
    pub fn from_coefficients(ctx: Ctx, coeffs: &[Scalar]) -> Multivector {
        let mut mv = Multivector::zero(ctx, coeffs.len(), 1);
        for (i, c) in coeffs.iter().enumerate() {
            mv.add_term(&[i], c.clone());
        }
        mv
    }

    /// A degree-0 multivector holding one scalar.
    pub fn from_scalar(rank: usize, v: Scalar) -> Multivector {
        let ctx = v.ctx();
        let mut mv = Multivector::zero(ctx, rank, 0);
        mv.add_term(&[], v);
        mv
    }

    /// The scalar context of the components.
    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// The bundle rank the indices range over.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The exterior degree.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Whether every component vanishes.
    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// The stored terms, tuples strictly increasing, in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Scalar)> {
        self.comps.iter()
    }

    /// Accumulate one term.  The tuple is sorted with its permutation sign;
    /// repeated indices contribute nothing.
    pub fn add_term(&mut self, idx: &[usize], v: Scalar) {
        assert_eq!(idx.len(), self.degree, "term has the wrong degree");
        assert!(
            idx.iter().all(|&i| i < self.rank),
            "frame index out of range for rank {}",
            self.rank
        );
        assert_eq!(v.ctx(), self.ctx, "component from a different variable context");
        if v.is_zero() {
            return;
        }
        let Some((sorted, sign)) = sort_sign(idx) else {
            return;
        };
        let signed = if sign < 0 { v.neg() } else { v };
        let entry = match self.comps.remove(&sorted) {
            Some(old) => old.add(&signed),
            None => signed,
        };
        if !entry.is_zero() {
            self.comps.insert(sorted, entry);
        }
    }

    /// The coefficient of an arbitrary index tuple, with its sign.
    pub fn get(&self, idx: &[usize]) -> Scalar {
        assert_eq!(idx.len(), self.degree, "index tuple has the wrong degree");
        match sort_sign(idx) {
            None => Scalar::zero(self.ctx),
            Some((sorted, sign)) => match self.comps.get(&sorted) {
                None => Scalar::zero(self.ctx),
                Some(v) => {
                    if sign < 0 {
                        v.neg()
                    } else {
                        v.clone()
                    }
                }
            },
        }
    }

    /// Frame coefficients of a degree-1 multivector.
    pub fn coefficients(&self) -> Vec<Scalar> {
        assert_eq!(self.degree, 1, "coefficients are defined for degree 1 only");
        (0..self.rank).map(|i| self.get(&[i])).collect()
    }

    /// The unique component of a degree-0 multivector.
    pub fn scalar_part(&self) -> Scalar {
        assert_eq!(self.degree, 0, "scalar part is defined for degree 0 only");
        self.get(&[])
    }

    /// The antisymmetric coefficient matrix of a degree-2 multivector:
    /// entry `(i, j)` is the coefficient read off `e_i ∧ e_j`, so the matrix
    /// satisfies `M[i][j] = -M[j][i]` with zero diagonal.
    pub fn skew_matrix(&self) -> Vec<Vec<Scalar>> {
        assert_eq!(self.degree, 2, "skew matrix is defined for degree 2 only");
        (0..self.rank)
            .map(|i| (0..self.rank).map(|j| self.get(&[i, j])).collect())
            .collect()
    }

    /// The same multivector reread over the patch extended by the line
    /// variable `t` (every coefficient is lifted; rank and degree are kept).
    pub fn lift_line(&self) -> Multivector {
        let ctx = Ctx::with_line(self.ctx.nvars + 1);
        let comps = self
            .comps
            .iter()
            .map(|(idx, v)| (idx.clone(), v.lift_line()))
            .collect();
        Multivector { ctx, rank: self.rank, degree: self.degree, comps }
    }

    /// The same multivector viewed inside a bundle of larger rank (the
    /// extra frame directions carry no new components).
    pub fn extend_rank(&self, rank: usize) -> Multivector {
        assert!(rank >= self.rank, "cannot shrink the rank of a multivector");
        Multivector {
            ctx: self.ctx,
            rank,
            degree: self.degree,
            comps: self.comps.clone(),
        }
    }

    fn assert_compatible(&self, other: &Multivector) {
        assert_eq!(self.ctx, other.ctx, "mixed variable contexts");
        assert_eq!(self.rank, other.rank, "mixed bundle ranks");
    }

    /// Sum of two multivectors of the same degree.
    pub fn add(&self, other: &Multivector) -> Multivector {
        self.assert_compatible(other);
        assert_eq!(self.degree, other.degree, "cannot add mixed degrees");
        let mut out = self.clone();
        for (idx, v) in &other.comps {
            out.add_term(idx, v.clone());
        }
        out
    }

    /// Difference of two multivectors of the same degree.
    pub fn sub(&self, other: &Multivector) -> Multivector {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Multivector {
        self.scale_with(|v| v.neg())
    }

    /// Multiply every component by a scalar.
    pub fn scale(&self, c: &Scalar) -> Multivector {
        if c.is_zero() {
            return Multivector::zero(self.ctx, self.rank, self.degree);
        }
        self.scale_with(|v| v.mul(c))
    }

    /// Multiply every component by an integer.
    pub fn scale_int(&self, k: i64) -> Multivector {
        if k == 0 {
            return Multivector::zero(self.ctx, self.rank, self.degree);
        }
        self.scale_with(|v| v.mul_int(k))
    }

    fn scale_with(&self, f: impl Fn(&Scalar) -> Scalar) -> Multivector {
        let mut out = Multivector::zero(self.ctx, self.rank, self.degree);
        for (idx, v) in &self.comps {
            let scaled = f(v);
            if !scaled.is_zero() {
                out.comps.insert(idx.clone(), scaled);
            }
        }
        out
    }

    /// Exterior product.  The sign of each merged term is the parity of the
    /// number of index pairs that must cross when concatenating the tuples.
    pub fn wedge(&self, other: &Multivector) -> Multivector {
        self.assert_compatible(other);
        let mut out = Multivector::zero(self.ctx, self.rank, self.degree + other.degree);
        for (i1, v1) in &self.comps {
            for (i2, v2) in &other.comps {
                if i1.iter().any(|a| i2.contains(a)) {
                    continue;
                }
                let crossings = i1
                    .iter()
                    .map(|a| i2.iter().filter(|b| a > b).count())
                    .sum::<usize>();
                let product = v1.mul(v2);
                let mut merged: Vec<usize> = i1.iter().chain(i2.iter()).copied().collect();
                merged.sort_unstable();
                let signed = if crossings % 2 == 1 { product.neg() } else { product };
                out.add_term(&merged, signed);
            }
        }
        out
    }

    /// Interior product against a dual-frame coefficient vector, filling the
    /// first slot.  Errors on degree zero, where no slot exists.
    pub fn contract_first(&self, cov: &[Scalar]) -> Result<Multivector> {
        if self.degree == 0 {
            return Err(Error::DegreeZeroInterior);
        }
        assert_eq!(cov.len(), self.rank, "covector has the wrong length");
        let mut out = Multivector::zero(self.ctx, self.rank, self.degree - 1);
        for (idx, v) in &self.comps {
            for (m, &i) in idx.iter().enumerate() {
                if cov[i].is_zero() {
                    continue;
                }
                let rest: Vec<usize> =
                    idx.iter().enumerate().filter(|(k, _)| *k != m).map(|(_, &j)| j).collect();
                let term = v.mul(&cov[i]);
                out.add_term(&rest, if m % 2 == 1 { term.neg() } else { term });
            }
        }
        Ok(out)
    }

    /// Frame pairing of equal-degree multivectors: the sum over shared
    /// basis tuples of the products of coefficients.
    pub fn pairing(&self, other: &Multivector) -> Scalar {
        self.assert_compatible(other);
        assert_eq!(self.degree, other.degree, "pairing requires equal degrees");
        let mut acc = Scalar::zero(self.ctx);
        for (idx, v) in &self.comps {
            if let Some(w) = other.comps.get(idx) {
                acc = acc.add(&v.mul(w));
            }
        }
        acc
    }

    /// Evaluate a degree-`p` multivector on `p` coefficient vectors from the
    /// opposite frame, via the determinant formula.
    pub fn evaluate(&self, args: &[Vec<Scalar>]) -> Scalar {
        assert_eq!(args.len(), self.degree, "wrong number of arguments");
        for arg in args {
            assert_eq!(arg.len(), self.rank, "argument has the wrong length");
        }
        if self.degree == 0 {
            return self.get(&[]);
        }
        let mut acc = Scalar::zero(self.ctx);
        for (idx, v) in &self.comps {
            let m: Vec<Vec<Scalar>> = args
                .iter()
                .map(|arg| idx.iter().map(|&b| arg[b].clone()).collect())
                .collect();
            let d = linalg::det(&m);
            if !d.is_zero() {
                acc = acc.add(&v.mul(&d));
            }
        }
        acc
    }

    /// Deterministic rendering: terms in tuple order, coefficients
    /// parenthesized, basis tuples written `e01`, `e012`, ….
    pub fn render<S: AsRef<str>>(&self, vars: &[S]) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (idx, v) in &self.comps {
            let coeff = v.render(vars);
            if self.degree == 0 {
                parts.push(coeff);
                continue;
            }
            let tag = frame_tag(idx);
            if coeff == "1" {
                parts.push(tag);
            } else if coeff == "-1" {
                parts.push(format!("-{tag}"));
            } else if coeff.contains(' ') {
                parts.push(format!("({coeff})*{tag}"));
            } else {
                parts.push(format!("{coeff}*{tag}"));
            }
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XY: [&str; 2] = ["x", "y"];

    fn basis(ctx: Ctx, rank: usize, i: usize) -> Multivector {
        Multivector::from_terms(ctx, rank, 1, [(vec![i], Scalar::one(ctx))])
    }

    #[test]
    fn wedge_of_frame_vectors_anticommutes() {
        let ctx = Ctx::new(2);
        let e0 = basis(ctx, 3, 0);
        let e1 = basis(ctx, 3, 1);
        let a = e0.wedge(&e1);
        let b = e1.wedge(&e0);
        assert_eq!(a, b.neg());
        assert_eq!(a.get(&[0, 1]), Scalar::one(ctx));
        assert!(e0.wedge(&e0).is_zero());
    }

    #[test]
    fn wedge_sign_counts_index_crossings() {
        let ctx = Ctx::new(1);
        let e1 = basis(ctx, 3, 1);
        let e02 = Multivector::from_terms(ctx, 3, 2, [(vec![0, 2], Scalar::one(ctx))]);
        // e1 ∧ (e0 ∧ e2): moving 1 past 0 costs one sign.
        let w = e1.wedge(&e02);
        assert_eq!(w.get(&[0, 1, 2]), Scalar::int(ctx, -1));
    }

    #[test]
    fn terms_accumulate_with_permutation_signs() {
        let ctx = Ctx::new(1);
        let mut mv = Multivector::zero(ctx, 3, 2);
        mv.add_term(&[1, 0], Scalar::one(ctx));
        mv.add_term(&[0, 1], Scalar::one(ctx));
        assert!(mv.is_zero(), "opposite orientations must cancel exactly");
        mv.add_term(&[2, 2], Scalar::one(ctx));
        assert!(mv.is_zero(), "repeated indices contribute nothing");
    }

    #[test]
    fn signed_lookup_mirrors_signed_insertion() {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        let mv = Multivector::from_terms(ctx, 2, 2, [(vec![0, 1], x.clone())]);
        assert_eq!(mv.get(&[1, 0]), x.neg());
        assert_eq!(mv.get(&[0, 0]), Scalar::zero(ctx));
    }

    #[test]
    fn interior_product_fills_the_first_slot() {
        let ctx = Ctx::new(2);
        let e01 = Multivector::from_terms(ctx, 2, 2, [(vec![0, 1], Scalar::one(ctx))]);
        // Contract with the dual covector e^1: only the second slot matches,
        // at position 1, so the sign is -1.
        let cov = vec![Scalar::zero(ctx), Scalar::one(ctx)];
        let out = e01.contract_first(&cov).unwrap();
        assert_eq!(out.coefficients()[0], Scalar::int(ctx, -1));
        assert_eq!(out.coefficients()[1], Scalar::zero(ctx));
    }

    #[test]
    fn interior_product_of_degree_zero_is_rejected() {
        let ctx = Ctx::new(1);
        let c = Multivector::from_scalar(2, Scalar::one(ctx));
        let cov = vec![Scalar::zero(ctx), Scalar::one(ctx)];
        assert!(matches!(c.contract_first(&cov), Err(Error::DegreeZeroInterior)));
    }

    #[test]
    fn pairing_matches_shared_basis_tuples() {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        let a = Multivector::from_terms(
            ctx,
            3,
            2,
            [(vec![0, 1], x.clone()), (vec![1, 2], Scalar::one(ctx))],
        );
        let b = Multivector::from_terms(ctx, 3, 2, [(vec![0, 1], Scalar::int(ctx, 2))]);
        assert_eq!(a.pairing(&b), x.mul_int(2));
    }

    #[test]
    fn evaluation_is_the_determinant_formula() {
        let ctx = Ctx::new(2);
        let e01 = Multivector::from_terms(ctx, 2, 2, [(vec![0, 1], Scalar::one(ctx))]);
        let dx = vec![Scalar::one(ctx), Scalar::zero(ctx)];
        let dy = vec![Scalar::zero(ctx), Scalar::one(ctx)];
        assert!(e01.evaluate(&[dx.clone(), dy.clone()]).is_one());
        assert_eq!(e01.evaluate(&[dy, dx]), Scalar::int(ctx, -1));
    }

    #[test]
    fn coefficient_round_trip_for_degree_one() {
        let ctx = Ctx::new(2);
        let coeffs = vec![Scalar::var(ctx, 0), Scalar::int(ctx, -3)];
        let mv = Multivector::from_coefficients(ctx, &coeffs);
        assert_eq!(mv.coefficients(), coeffs);
    }

    #[test]
    fn increasing_tuples_enumerate_the_wedge_basis() {
        assert_eq!(increasing_tuples(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(increasing_tuples(2, 0), vec![Vec::<usize>::new()]);
        assert!(increasing_tuples(2, 3).is_empty());
    }

    #[test]
    fn rendering_is_deterministic_and_readable() {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        let mv = Multivector::from_terms(
            ctx,
            3,
            2,
            [
                (vec![0, 1], x.add(&Scalar::one(ctx))),
                (vec![1, 2], Scalar::int(ctx, -1)),
            ],
        );
        assert_eq!(mv.render(&XY), "(x + 1)*e01 + -e12");
        assert_eq!(Multivector::zero(ctx, 3, 2).render(&XY), "0");
    }
}
