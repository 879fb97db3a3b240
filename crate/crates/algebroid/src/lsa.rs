//! Left-symmetric algebroids: product tables, axiom checks, the sub-adjacent
//! Lie algebroid, the `δ` cochain complex, the symmetric bracket `⟦h,h⟧`,
//! the `L`/`R` operators, the dual product `·^{h♯}`, and the dual
//! left-symmetric structure.
//!
//! A left-symmetric (Koszul–Vinberg) algebroid is an anchored bundle with a
//! product `X ·_A Y` on sections — tensorial in `X`, Leibniz in `Y` — whose
//! associator is symmetric in its first two arguments.  Antisymmetrizing the
//! product yields the *sub-adjacent* Lie algebroid.  A symmetric 2-tensor
//! `h ∈ Γ(S²A)` plays the role the Poisson bivector plays on the Lie side:
//! its bracket `⟦h,h⟧` measures the failure of `h` to be a Koszul–Vinberg
//! structure, the dual product `α ·^{h♯} β` turns the dual bundle into a
//! left-symmetric algebroid candidate, and validity of that candidate is
//! exactly `⟦h,h⟧ = 0`.
//!
//! Two unconditional identities pin every sign in this file and are exposed
//! as defect reports (they must be empty for *arbitrary* `h`, not only
//! solutions): [`sharp_compat_defects`] (`⟦h,h⟧(α,·,β)` measures how far
//! `h♯` is from intertwining the products) and [`ls_obstruction_defects`]
//! (the dual product's associator-symmetry defect expressed through
//! `⟦h,h⟧`).  The cochain complex of [`coboundary`] ties `⟦h,h⟧ = 0` to the
//! closedness of the inverse metric: `(δ g)(X,Y,Z) = ⟦h,h⟧(g♭X, g♭Y, g♭Z)`
//! pointwise whenever `g = h^{-1}` ([`nondeg_equivalence_defects`]).

use crate::algebroid::LieAlgebroid;
use crate::bundle::{AnchoredBundle, Covector, Section};
use crate::error::{Error, Result};
use crate::linalg;
use crate::multivector::{increasing_tuples, sort_sign, Multivector};
use crate::scalar::{Ctx, Scalar};
use std::collections::BTreeMap;

/// A left-symmetric algebroid: anchored bundle plus a product table
/// `b_{ij}^k` (`e_i ·_A e_j = Σ_k b_{ij}^k e_k`) with no symmetry
/// constraint.  The validating constructor certifies the associator
/// symmetry `(X,Y,Z) = (Y,X,Z)` and the anchor-morphism property of the
/// sub-adjacent bracket on all frame tuples, which extends to all sections
/// by the product's tensorial/Leibniz laws.
#[derive(Clone, Debug)]
pub struct LeftSymmetricAlgebroid {
    bundle: AnchoredBundle,
    table: Vec<Vec<Vec<Scalar>>>,
}

impl LeftSymmetricAlgebroid {
    /// Validating constructor: checks shapes and the structure equations.
    pub fn new(
        bundle: AnchoredBundle,
        table: Vec<Vec<Vec<Scalar>>>,
    ) -> Result<LeftSymmetricAlgebroid> {
        let s = LeftSymmetricAlgebroid::new_unvalidated(bundle, table)?;
        if let Some((label, _)) = s.axiom_defects().first() {
            return Err(Error::Invalid(format!(
                "left-symmetric structure equations fail: nonzero {label}"
            )));
        }
        Ok(s)
    }

    /// Shape-checked constructor that skips the structure equations; use for
    /// candidates whose defects are to be inspected.
    pub fn new_unvalidated(
        bundle: AnchoredBundle,
        table: Vec<Vec<Vec<Scalar>>>,
    ) -> Result<LeftSymmetricAlgebroid> {
        let r = bundle.rank();
        let ctx = bundle.ctx();
        if table.len() != r || table.iter().any(|p| p.len() != r || p.iter().any(|q| q.len() != r))
        {
            return Err(Error::Shape(format!(
                "product table must be {r}x{r}x{r} for rank {r}"
            )));
        }
        for (i, plane) in table.iter().enumerate() {
            for (j, row) in plane.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    if v.ctx() != ctx {
                        return Err(Error::Shape(format!(
                            "product coefficient b_{i}{j}^{k} uses a different variable context"
                        )));
                    }
                }
            }
        }
        Ok(LeftSymmetricAlgebroid { bundle, table })
    }

    /// The flat-tangent left-symmetric algebroid of a polynomial patch:
    /// identity anchor, vanishing product table (the product is pure
    /// directional derivative).
    pub fn flat_tangent<S: AsRef<str>>(vars: &[S]) -> Result<LeftSymmetricAlgebroid> {
        let lie = LieAlgebroid::tangent(vars)?;
        let r = lie.rank();
        let ctx = lie.ctx();
        LeftSymmetricAlgebroid::new_unvalidated(
            lie.bundle().clone(),
            vec![vec![vec![Scalar::zero(ctx); r]; r]; r],
        )
    }

    /// The underlying anchored bundle.
    pub fn bundle(&self) -> &AnchoredBundle {
        &self.bundle
    }

    /// The variable context.
    pub fn ctx(&self) -> Ctx {
        self.bundle.ctx()
    }

    /// The bundle rank.
    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    /// The product coefficient `b_{ij}^k`.
    pub fn product_constant(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.table[i][j][k]
    }

    /// Apply the anchor field of a section to a scalar.
    pub fn rho(&self, x: &[Scalar], f: &Scalar) -> Scalar {
        self.bundle.anchor_apply(x, f)
    }

    /// The product of two sections given by frame coefficients:
    /// `(X·Y)_k = Σ_{ij} X_i Y_j b_{ij}^k + ρ(X)Y_k`
    /// (tensorial in `X`, Leibniz in `Y`).
    pub fn product(&self, x: &[Scalar], y: &[Scalar]) -> Section {
        let r = self.rank();
        assert_eq!(x.len(), r, "left factor has the wrong length");
        assert_eq!(y.len(), r, "right factor has the wrong length");
        let mut out = self.bundle.zero_section();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi.mul(yj);
                for (k, slot) in out.iter_mut().enumerate() {
                    let b = &self.table[i][j][k];
                    if !b.is_zero() {
                        *slot = slot.add(&c.mul(b));
                    }
                }
            }
        }
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = slot.add(&self.rho(x, &y[k]));
        }
        out
    }

    /// The associator `(X·Y)·Z − X·(Y·Z)`.
    pub fn associator(&self, x: &[Scalar], y: &[Scalar], z: &[Scalar]) -> Section {
        let xy_z = self.product(&self.product(x, y), z);
        let x_yz = self.product(x, &self.product(y, z));
        xy_z.iter().zip(&x_yz).map(|(a, b)| a.sub(b)).collect()
    }

    /// The sub-adjacent Lie algebroid: same bundle, bracket table
    /// `c_{ij}^k = b_{ij}^k − b_{ji}^k`.  The table is antisymmetric by
    /// construction; its Lie axioms hold whenever this structure's axioms
    /// do.
    pub fn sub_adjacent(&self) -> LieAlgebroid {
        let r = self.rank();
        let mut table = vec![vec![vec![Scalar::zero(self.ctx()); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    table[i][j][k] = self.table[i][j][k].sub(&self.table[j][i][k]);
                }
            }
        }
        LieAlgebroid::new_unvalidated(self.bundle.clone(), table)
            .expect("antisymmetrized table over the same bundle is well-shaped")
    }

    /// Structure-equation defects: the associator-symmetry differences
    /// `(e_i,e_j,e_k) − (e_j,e_i,e_k)` over increasing pairs `i < j` (the
    /// difference is antisymmetric in `(i,j)`), and the anchor-morphism
    /// defects of the sub-adjacent bracket.  Empty exactly when this is a
    /// left-symmetric algebroid.
    pub fn axiom_defects(&self) -> Vec<(String, Scalar)> {
        let r = self.rank();
        let mut out = Vec::new();
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            let ei = self.bundle.basis_section(i);
            let ej = self.bundle.basis_section(j);
            for k in 0..r {
                let ek = self.bundle.basis_section(k);
                let a_ijk = self.associator(&ei, &ej, &ek);
                let a_jik = self.associator(&ej, &ei, &ek);
                for (l, (a, b)) in a_ijk.iter().zip(&a_jik).enumerate() {
                    let d = a.sub(b);
                    if !d.is_zero() {
                        out.push((
                            format!("associator symmetry (e{i},e{j},e{k}) on e{l}"),
                            d,
                        ));
                    }
                }
            }
        }
        let sub = self.sub_adjacent();
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            let ei = self.bundle.basis_section(i);
            let ej = self.bundle.basis_section(j);
            let br = sub.bracket(&ei, &ej);
            for a in 0..self.bundle.nvars() {
                let var = Scalar::var(self.ctx(), a);
                let lhs = self.rho(&br, &var);
                let rhs = self
                    .rho(&ei, &self.rho(&ej, &var))
                    .sub(&self.rho(&ej, &self.rho(&ei, &var)));
                let d = lhs.sub(&rhs);
                if !d.is_zero() {
                    out.push((
                        format!(
                            "anchor morphism (e{i},e{j}) on {}",
                            self.bundle.vars()[a]
                        ),
                        d,
                    ));
                }
            }
        }
        out
    }

    /// Certify the structure equations, naming the first failure.
    pub fn check_axioms(&self) -> Result<()> {
        match self.axiom_defects().first() {
            None => Ok(()),
            Some((label, value)) => Err(Error::Invalid(format!(
                "nonzero {label}: {}",
                value.render(self.bundle.vars())
            ))),
        }
    }

    /// The operator `L_X` on 1-cosections:
    /// `⟨L_X α, e_j⟩ = ρ(X)⟨α,e_j⟩ − ⟨α, X·e_j⟩`.
    pub fn l_op(&self, x: &[Scalar], alpha: &[Scalar]) -> Covector {
        let r = self.rank();
        assert_eq!(alpha.len(), r, "cosection has the wrong length");
        (0..r)
            .map(|j| {
                let mut v = self.rho(x, &alpha[j]);
                let xej = self.product(x, &self.bundle.basis_section(j));
                for (k, a) in alpha.iter().enumerate() {
                    if !a.is_zero() && !xej[k].is_zero() {
                        v = v.sub(&a.mul(&xej[k]));
                    }
                }
                v
            })
            .collect()
    }

    /// The operator `R_X` on 1-cosections: `⟨R_X α, e_j⟩ = −⟨α, e_j·X⟩`.
    pub fn r_op(&self, x: &[Scalar], alpha: &[Scalar]) -> Covector {
        let r = self.rank();
        assert_eq!(alpha.len(), r, "cosection has the wrong length");
        (0..r)
            .map(|j| {
                let ejx = self.product(&self.bundle.basis_section(j), x);
                let mut v = Scalar::zero(self.ctx());
                for (k, a) in alpha.iter().enumerate() {
                    if !a.is_zero() && !ejx[k].is_zero() {
                        v = v.add(&a.mul(&ejx[k]));
                    }
                }
                v.neg()
            })
            .collect()
    }

    /// Parse frame coefficients for a section over this structure's patch.
    pub fn parse_section<S: AsRef<str>>(&self, srcs: &[S]) -> Result<Section> {
        self.bundle.parse_components(srcs)
    }
}

/// A symmetric rank-2 tensor stored as an exact symmetric matrix of
/// scalars.  Serves both `h ∈ Γ(S²A)` (sharp map `A* → A`, the
/// Koszul–Vinberg candidate) and metrics `g ∈ Γ(S²A*)` (the inverse side of
/// the nondegenerate correspondence).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor {
    ctx: Ctx,
    mat: Vec<Vec<Scalar>>,
}

impl SymmetricTensor {
    /// Validating constructor: the matrix must be square, nonempty,
    /// context-uniform, and exactly symmetric.
    pub fn new(mat: Vec<Vec<Scalar>>) -> Result<SymmetricTensor> {
        let r = mat.len();
        if r == 0 || mat.iter().any(|row| row.len() != r) {
            return Err(Error::Shape("symmetric tensor matrix must be square and nonempty".into()));
        }
        let ctx = mat[0][0].ctx();
        for (i, row) in mat.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.ctx() != ctx {
                    return Err(Error::Shape(format!(
                        "tensor entry ({i},{j}) uses a different variable context"
                    )));
                }
                if !v.sub(&mat[j][i]).is_zero() {
                    return Err(Error::Invalid(format!(
                        "tensor matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymmetricTensor { ctx, mat })
    }

    /// Diagonal tensor with the given entries.
    pub fn from_diagonal(entries: &[Scalar]) -> Result<SymmetricTensor> {
        let r = entries.len();
        if r == 0 {
            return Err(Error::Shape("symmetric tensor matrix must be square and nonempty".into()));
        }
        let ctx = entries[0].ctx();
        let mut mat = vec![vec![Scalar::zero(ctx); r]; r];
        for (i, v) in entries.iter().enumerate() {
            mat[i][i] = v.clone();
        }
        SymmetricTensor::new(mat)
    }

    /// The variable context.
    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// Matrix dimension.
    pub fn rank(&self) -> usize {
        self.mat.len()
    }

    /// Entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.mat[i][j]
    }

    /// The full matrix.
    pub fn matrix(&self) -> &Vec<Vec<Scalar>> {
        &self.mat
    }

    /// The sharp map on a cosection: `(h♯α)_j = Σ_i α_i h_{ij}`.
    pub fn sharp(&self, alpha: &[Scalar]) -> Section {
        let r = self.rank();
        assert_eq!(alpha.len(), r, "cosection length does not match the tensor");
        (0..r)
            .map(|j| {
                let mut acc = Scalar::zero(self.ctx);
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() && !self.mat[i][j].is_zero() {
                        acc = acc.add(&a.mul(&self.mat[i][j]));
                    }
                }
                acc
            })
            .collect()
    }

    /// The induced pairing `h(α,β) = Σ_{ij} α_i h_{ij} β_j`.
    pub fn pair(&self, alpha: &[Scalar], beta: &[Scalar]) -> Scalar {
        let sharp = self.sharp(alpha);
        let mut acc = Scalar::zero(self.ctx);
        for (v, b) in sharp.iter().zip(beta) {
            if !v.is_zero() && !b.is_zero() {
                acc = acc.add(&v.mul(b));
            }
        }
        acc
    }

    /// The exact inverse tensor, if the matrix is invertible.
    pub fn invert(&self) -> Result<SymmetricTensor> {
        let inv = linalg::invert(&self.mat)?;
        SymmetricTensor::new(inv)
    }
}

/// The symmetric-tensor bracket, the left-symmetric counterpart of the
/// Schouten self-bracket, evaluated on three cosections:
///
/// `⟦h,h⟧(α,β,γ) = ρ(h♯α)h(β,γ) − ρ(h♯β)h(α,γ)
///               + ⟨α, h♯β·h♯γ⟩ − ⟨β, h♯α·h♯γ⟩ − ⟨γ, [h♯α,h♯β]⟩`
///
/// (the last bracket is sub-adjacent).  Skew in `(α,β)` with `γ` free;
/// `h` is a Koszul–Vinberg structure exactly when this vanishes for all
/// arguments.
pub fn kv_bracket(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
    alpha: &[Scalar],
    beta: &[Scalar],
    gamma: &[Scalar],
) -> Scalar {
    let ha = h.sharp(alpha);
    let hb = h.sharp(beta);
    let hc = h.sharp(gamma);
    let mut total = s.rho(&ha, &h.pair(beta, gamma));
    total = total.sub(&s.rho(&hb, &h.pair(alpha, gamma)));
    let p_bc = s.product(&hb, &hc);
    for (a, p) in alpha.iter().zip(&p_bc) {
        total = total.add(&a.mul(p));
    }
    let p_ac = s.product(&ha, &hc);
    for (b, p) in beta.iter().zip(&p_ac) {
        total = total.sub(&b.mul(p));
    }
    let br = s.sub_adjacent().bracket(&ha, &hb);
    for (g, v) in gamma.iter().zip(&br) {
        total = total.sub(&g.mul(v));
    }
    total
}

/// Nonzero values of `⟦h,h⟧` on coframe triples, labelled
/// `kv-bracket(e^a,e^b;e^c)` with `a < b` (skewness in the first two slots
/// makes increasing pairs exhaustive).  Empty exactly when `h` is a
/// Koszul–Vinberg structure.
pub fn kv_bracket_defects(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
) -> Vec<(String, Scalar)> {
    let r = s.rank();
    let mut out = Vec::new();
    for pair in increasing_tuples(r, 2) {
        let (a, b) = (pair[0], pair[1]);
        let alpha = s.bundle().basis_section(a);
        let beta = s.bundle().basis_section(b);
        for c in 0..r {
            let gamma = s.bundle().basis_section(c);
            let v = kv_bracket(s, h, &alpha, &beta, &gamma);
            if !v.is_zero() {
                out.push((format!("kv-bracket(e^{a},e^{b};e^{c})"), v));
            }
        }
    }
    out
}

/// A cochain of the left-symmetric complex: a `degree`-argument tensor
/// skew in its leading `degree − 1` arguments with the last argument free,
/// stored on (strictly increasing leading tuple, free index) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    ctx: Ctx,
    rank: usize,
    degree: usize,
    comps: BTreeMap<(Vec<usize>, usize), Scalar>,
}

impl Cochain {
    /// The zero cochain taking `degree ≥ 1` section arguments.
    pub fn zero(ctx: Ctx, rank: usize, degree: usize) -> Cochain {
        assert!(degree >= 1, "cochains take at least one argument");
        Cochain { ctx, rank, degree, comps: BTreeMap::new() }
    }

    /// A 1-argument cochain from covector coefficients.
    pub fn from_covector(ctx: Ctx, phi: &[Scalar]) -> Cochain {
        let mut c = Cochain::zero(ctx, phi.len(), 1);
        for (j, v) in phi.iter().enumerate() {
            c.add_term(&[], j, v.clone());
        }
        c
    }

    /// A 2-argument cochain from a (not necessarily symmetric) matrix
    /// `g[i][j] = ω(e_i, e_j)`.
    pub fn from_matrix(ctx: Ctx, g: &[Vec<Scalar>]) -> Cochain {
        let r = g.len();
        let mut c = Cochain::zero(ctx, r, 2);
        for (i, row) in g.iter().enumerate() {
            assert_eq!(row.len(), r, "cochain matrix must be square");
            for (j, v) in row.iter().enumerate() {
                c.add_term(&[i], j, v.clone());
            }
        }
        c
    }

    /// Number of section arguments.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Bundle rank.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Whether every component vanishes.
    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Stored components: (increasing leading tuple, free index) → value.
    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<usize>, usize), &Scalar)> {
        self.comps.iter()
    }

    /// Add `v` to the component on the given leading tuple and free index;
    /// the tuple is sorted with sign, repeated leading indices drop the
    /// term.
    pub fn add_term(&mut self, leading: &[usize], free: usize, v: Scalar) {
        assert_eq!(leading.len() + 1, self.degree, "argument count does not match the degree");
        assert!(
            leading.iter().all(|i| *i < self.rank) && free < self.rank,
            "frame index out of range"
        );
        assert_eq!(v.ctx(), self.ctx, "mixed variable contexts");
        if v.is_zero() {
            return;
        }
        let Some((sorted, sign)) = sort_sign(leading) else {
            return;
        };
        let signed = if sign < 0 { v.neg() } else { v };
        let key = (sorted, free);
        match self.comps.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(signed);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&signed);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Value on frame arguments (leading tuple in any order, with sign).
    pub fn eval_frames(&self, leading: &[usize], free: usize) -> Scalar {
        assert_eq!(leading.len() + 1, self.degree, "argument count does not match the degree");
        match sort_sign(leading) {
            None => Scalar::zero(self.ctx),
            Some((sorted, sign)) => match self.comps.get(&(sorted, free)) {
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

    /// Tensorial evaluation on sections given by frame coefficients
    /// (`args.len()` must equal the degree; the last argument fills the
    /// free slot).
    pub fn eval_sections(&self, args: &[&[Scalar]]) -> Scalar {
        assert_eq!(args.len(), self.degree, "argument count does not match the degree");
        let mut total = Scalar::zero(self.ctx);
        let mut idx = vec![0usize; self.degree];
        loop {
            let mut coeff = Scalar::one(self.ctx);
            let mut nonzero = true;
            for (slot, arg) in idx.iter().zip(args) {
                let c = &arg[*slot];
                if c.is_zero() {
                    nonzero = false;
                    break;
                }
                coeff = coeff.mul(c);
            }
            if nonzero {
                let (leading, free) = idx.split_at(self.degree - 1);
                let v = self.eval_frames(leading, free[0]);
                if !v.is_zero() {
                    total = total.add(&coeff.mul(&v));
                }
            }
            // advance the multi-index
            let mut pos = 0;
            loop {
                if pos == self.degree {
                    return total;
                }
                idx[pos] += 1;
                if idx[pos] < self.rank {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// The coboundary of the left-symmetric complex.  For a `k`-argument
/// cochain `ω` and sections `X_0,…,X_k` (last slot special):
///
/// `(δω)(X_0,…,X_k) = Σ_{i<k} (−1)^i ρ(X_i) ω(…X̂_i…)
///   − Σ_{i<k} (−1)^i ω(X_0,…X̂_i…,X_{k−1}, X_i·X_k)
///   + Σ_{i<j<k} (−1)^{i+j} ω([X_i,X_j], …X̂_i…X̂_j…, X_k)`
///
/// with the sub-adjacent bracket in the last sum.  `δ∘δ = 0` on valid
/// left-symmetric algebroids.
pub fn coboundary(s: &LeftSymmetricAlgebroid, omega: &Cochain) -> Cochain {
    let k = omega.degree();
    let r = s.rank();
    assert_eq!(omega.rank(), r, "cochain rank does not match the algebroid");
    let ctx = s.ctx();
    let sub = s.sub_adjacent();
    let mut out = Cochain::zero(ctx, r, k + 1);
    for leading in increasing_tuples(r, k) {
        for m in 0..r {
            let mut xs: Vec<Section> =
                leading.iter().map(|&i| s.bundle().basis_section(i)).collect();
            xs.push(s.bundle().basis_section(m));
            let mut total = Scalar::zero(ctx);
            for i in 0..k {
                let rest: Vec<&[Scalar]> = (0..=k)
                    .filter(|&p| p != i)
                    .map(|p| xs[p].as_slice())
                    .collect();
                let v = omega.eval_sections(&rest);
                let term = s.rho(&xs[i], &v);
                total = if i % 2 == 0 { total.add(&term) } else { total.sub(&term) };
            }
            for i in 0..k {
                let prod = s.product(&xs[i], &xs[k]);
                let mut args: Vec<&[Scalar]> = (0..k)
                    .filter(|&p| p != i)
                    .map(|p| xs[p].as_slice())
                    .collect();
                args.push(&prod);
                let term = omega.eval_sections(&args);
                total = if i % 2 == 0 { total.sub(&term) } else { total.add(&term) };
            }
            for i in 0..k {
                for j in (i + 1)..k {
                    let br = sub.bracket(&xs[i], &xs[j]);
                    let mut args: Vec<&[Scalar]> = vec![&br];
                    for (p, x) in xs.iter().enumerate() {
                        if p != i && p != j {
                            args.push(x.as_slice());
                        }
                    }
                    let term = omega.eval_sections(&args);
                    total = if (i + j) % 2 == 0 { total.add(&term) } else { total.sub(&term) };
                }
            }
            out.add_term(&leading, m, total);
        }
    }
    out
}

/// Nonzero components of `δg` for a symmetric metric `g`, read as a
/// 2-argument cochain.
pub fn delta_g_defects(
    s: &LeftSymmetricAlgebroid,
    g: &SymmetricTensor,
) -> Vec<(String, Scalar)> {
    assert_eq!(g.rank(), s.rank(), "metric rank does not match the algebroid");
    let dg = coboundary(s, &Cochain::from_matrix(s.ctx(), g.matrix()));
    dg.terms()
        .map(|((leading, free), v)| {
            (
                format!("delta(g)(e{},e{};e{})", leading[0], leading[1], free),
                v.clone(),
            )
        })
        .collect()
}

/// Joint report for a nondegenerate `h`: the `⟦h,h⟧` defects, the `δg`
/// defects for the exact inverse metric `g = h^{-1}`, and the pointwise
/// transport identity `(δg)(X,Y,Z) − ⟦h,h⟧(g♭X, g♭Y, g♭Z)` (whose entries
/// must be empty for every invertible `h` — it is what forces the first
/// two families to vanish together).
pub fn nondeg_equivalence_defects(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
) -> Result<Vec<(String, Scalar)>> {
    let g = h.invert()?;
    let mut out = kv_bracket_defects(s, h);
    out.extend(delta_g_defects(s, &g));
    let r = s.rank();
    let g_cochain = Cochain::from_matrix(s.ctx(), g.matrix());
    let dg = coboundary(s, &g_cochain);
    for pair in increasing_tuples(r, 2) {
        let (i, j) = (pair[0], pair[1]);
        for m in 0..r {
            let flat_i = g.matrix()[i].clone();
            let flat_j = g.matrix()[j].clone();
            let flat_m = g.matrix()[m].clone();
            let transported = kv_bracket(s, h, &flat_i, &flat_j, &flat_m);
            let d = dg.eval_frames(&[i, j], m).sub(&transported);
            if !d.is_zero() {
                out.push((format!("transport identity(e{i},e{j};e{m})"), d));
            }
        }
    }
    Ok(out)
}

/// The dual product on 1-cosections:
/// `α ·^{h♯} β = L_{h♯α}β − R_{h♯β}α − d(h(α,β))`
/// with `L` the sub-adjacent Lie derivative and `d` the sub-adjacent
/// differential.
pub fn dual_product(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
    alpha: &[Scalar],
    beta: &[Scalar],
) -> Covector {
    let sub = s.sub_adjacent();
    let ha = h.sharp(alpha);
    let hb = h.sharp(beta);
    let lie_term = sub.lie_derivative_cosection(&ha, &sub.covector_mv(beta));
    let r_term = s.r_op(&hb, alpha);
    let d_term = sub.differential(&Multivector::from_scalar(s.rank(), h.pair(alpha, beta)));
    lie_term
        .coefficients()
        .iter()
        .zip(&r_term)
        .zip(d_term.coefficients().iter())
        .map(|((l, rr), d)| l.sub(rr).sub(d))
        .collect()
}

/// Defects of the sharp-compatibility identity
/// `⟦h,h⟧(α, e^m, β) = ⟨e^m, h♯(α·^{h♯}β) − h♯α ·_A h♯β⟩`,
/// which holds for arbitrary `h`, over all ordered coframe pairs.
pub fn sharp_compat_defects(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
) -> Vec<(String, Scalar)> {
    let r = s.rank();
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let alpha = s.bundle().basis_section(a);
            let beta = s.bundle().basis_section(b);
            let dp = dual_product(s, h, &alpha, &beta);
            let lhs = h.sharp(&dp);
            let rhs = s.product(&h.sharp(&alpha), &h.sharp(&beta));
            for m in 0..r {
                let gamma = s.bundle().basis_section(m);
                let want = kv_bracket(s, h, &alpha, &gamma, &beta);
                let got = lhs[m].sub(&rhs[m]);
                let d = want.sub(&got);
                if !d.is_zero() {
                    out.push((format!("sharp-compat(e^{a},e^{b}) on e{m}"), d));
                }
            }
        }
    }
    out
}

/// Defects of the left-symmetry obstruction identity for the dual product:
/// pairing the antisymmetrized dual associator with a frame `X` equals
/// `⟨L_{S(α,β)−S(β,α)}γ, X⟩ + ⟦h,h⟧(β, L_X α, γ) − ⟦h,h⟧(α, L_X β, γ)`
/// where `S(α,β)` is the section `m ↦ ⟦h,h⟧(α, e^m, β)` and `L_X` is the
/// [`LeftSymmetricAlgebroid::l_op`] operator.  Holds for arbitrary `h`;
/// in particular the dual product is left-symmetric whenever `⟦h,h⟧ = 0`.
pub fn ls_obstruction_defects(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
) -> Vec<(String, Scalar)> {
    let r = s.rank();
    let sub = s.sub_adjacent();
    let dual_assoc = |al: &[Scalar], be: &[Scalar], ga: &[Scalar]| -> Covector {
        let ab = dual_product(s, h, al, be);
        let abc = dual_product(s, h, &ab, ga);
        let bc = dual_product(s, h, be, ga);
        let a_bc = dual_product(s, h, al, &bc);
        abc.iter().zip(&a_bc).map(|(u, v)| u.sub(v)).collect()
    };
    let kv_section = |al: &[Scalar], be: &[Scalar]| -> Section {
        (0..r)
            .map(|m| kv_bracket(s, h, al, &s.bundle().basis_section(m), be))
            .collect()
    };
    let mut out = Vec::new();
    for pair in increasing_tuples(r, 2) {
        let (i, j) = (pair[0], pair[1]);
        let alpha = s.bundle().basis_section(i);
        let beta = s.bundle().basis_section(j);
        for k in 0..r {
            let gamma = s.bundle().basis_section(k);
            let asym: Covector = {
                let a1 = dual_assoc(&alpha, &beta, &gamma);
                let a2 = dual_assoc(&beta, &alpha, &gamma);
                a1.iter().zip(&a2).map(|(u, v)| u.sub(v)).collect()
            };
            let s_ab = kv_section(&alpha, &beta);
            let s_ba = kv_section(&beta, &alpha);
            let diff: Section = s_ab.iter().zip(&s_ba).map(|(u, v)| u.sub(v)).collect();
            let lie_term = sub.lie_derivative_cosection(&diff, &sub.covector_mv(&gamma));
            for m in 0..r {
                let x = s.bundle().basis_section(m);
                let lhs = asym[m].clone();
                let mut rhs = lie_term.get(&[m]);
                rhs = rhs.add(&kv_bracket(s, h, &beta, &s.l_op(&x, &alpha), &gamma));
                rhs = rhs.sub(&kv_bracket(s, h, &alpha, &s.l_op(&x, &beta), &gamma));
                let d = lhs.sub(&rhs);
                if !d.is_zero() {
                    out.push((format!("ls-obstruction(e^{i},e^{j},e^{k}) on e{m}"), d));
                }
            }
        }
    }
    out
}

/// Left-symmetric structure candidate on the dual bundle: product table
/// from [`dual_product`] on coframe pairs, anchor `ρ ∘ h♯`.  Returned
/// unvalidated; its axioms pass exactly when `⟦h,h⟧ = 0`.
pub fn build_dual_lsa(
    s: &LeftSymmetricAlgebroid,
    h: &SymmetricTensor,
) -> Result<LeftSymmetricAlgebroid> {
    let r = s.rank();
    let ctx = s.ctx();
    let nvars = s.bundle().nvars();
    let mut anchor = vec![vec![Scalar::zero(ctx); r]; nvars];
    for (a, row) in anchor.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let mut acc = Scalar::zero(ctx);
            for j in 0..r {
                acc = acc.add(&h.entry(i, j).mul(s.bundle().anchor_entry(a, j)));
            }
            *entry = acc;
        }
    }
    let bundle = AnchoredBundle::new(s.bundle().vars().to_vec(), r, anchor)?;
    let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
    for i in 0..r {
        for j in 0..r {
            let dp = dual_product(s, h, &s.bundle().basis_section(i), &s.bundle().basis_section(j));
            for (k, v) in dp.into_iter().enumerate() {
                table[i][j][k] = v;
            }
        }
    }
    LeftSymmetricAlgebroid::new_unvalidated(bundle, table)
}

/// The left-symmetric algebroid of a flat torsion-free connection: the
/// product *is* the covariant derivative, `X ·_A Y = ∇_X Y`.  Fails when
/// the connection has torsion or curvature.
pub fn lsa_from_connection(
    c: &crate::connection::Connection,
) -> Result<LeftSymmetricAlgebroid> {
    if let Some((label, _)) = c.torsion_defects().first() {
        return Err(Error::Invalid(format!(
            "connection is not torsion-free: nonzero {label}"
        )));
    }
    if let Some((label, _)) = c.curvature_defects().first() {
        return Err(Error::Invalid(format!("connection is not flat: nonzero {label}")));
    }
    let l = c.algebroid();
    let r = l.rank();
    let mut table = vec![vec![vec![Scalar::zero(l.ctx()); r]; r]; r];
    for (i, plane) in table.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = c.gamma(i, j, k).clone();
            }
        }
    }
    LeftSymmetricAlgebroid::new(l.bundle().clone(), table)
}

/// The left-symmetric algebroid `(X,f)·(Y,g) = (∇_X Y, ρ(X)g)` on the
/// trivial line extension `A ⊕ ℝ` of a flat torsion-free connection's
/// algebroid: product table embeds the connection table, the line direction
/// is annihilated by the table (the `ρ(X)g` term arises from the Leibniz
/// rule), and the anchor is `ρ ∘ pr₁`.  Its sub-adjacent Lie algebroid is
/// structurally the trivial-line direct sum of the connection's algebroid.
pub fn lsa_bar_nabla(c: &crate::connection::Connection) -> Result<LeftSymmetricAlgebroid> {
    if let Some((label, _)) = c.torsion_defects().first() {
        return Err(Error::Invalid(format!(
            "connection is not torsion-free: nonzero {label}"
        )));
    }
    if let Some((label, _)) = c.curvature_defects().first() {
        return Err(Error::Invalid(format!("connection is not flat: nonzero {label}")));
    }
    let l = c.algebroid();
    let ext = l.direct_sum_trivial_line();
    let r = l.rank();
    let ctx = l.ctx();
    let mut table = vec![vec![vec![Scalar::zero(ctx); r + 1]; r + 1]; r + 1];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                table[i][j][k] = c.gamma(i, j, k).clone();
            }
        }
    }
    LeftSymmetricAlgebroid::new(ext.bundle().clone(), table)
}
