//! Affine connections on Lie algebroids.
//!
//! A [`Connection`] stores the derivatives of frame sections along frame
//! sections as a table `Γ_ij^k` (so `∇_{e_i} e_j = Σ_k Γ_ij^k e_k`) over a
//! [`LieAlgebroid`].  The derivative of arbitrary sections follows from
//! tensoriality in the direction and the Leibniz rule through the anchor in
//! the argument.  On top of the table this module computes the torsion and
//! curvature tensors (frames suffice — both are tensorial), covariant
//! derivatives of 2-tensors in both index positions, the Codazzi defect of
//! a metric, and the dual connection with respect to a nondegenerate
//! metric, obtained by solving the duality equation exactly.

use crate::algebroid::LieAlgebroid;
use crate::bundle::Section;
use crate::error::{Error, Result};
use crate::linalg;
use crate::multivector::increasing_tuples;
use crate::scalar::Scalar;

/// An affine connection: an algebroid plus the frame derivative table.
#[derive(Clone, Debug)]
pub struct Connection {
    algebroid: LieAlgebroid,
    /// `table[i][j][k]` is the `e_k` coefficient of the derivative of
    /// `e_j` along `e_i`.
    table: Vec<Vec<Vec<Scalar>>>,
}

impl Connection {
    /// Build a connection; only the table shape is constrained.
    pub fn new(algebroid: LieAlgebroid, table: Vec<Vec<Vec<Scalar>>>) -> Result<Connection> {
        let r = algebroid.rank();
        if table.len() != r || table.iter().any(|p| p.len() != r || p.iter().any(|q| q.len() != r))
        {
            return Err(Error::Shape(format!(
                "connection table must be {r}x{r}x{r} for rank {r}"
            )));
        }
        for plane in &table {
            for row in plane {
                for v in row {
                    if v.ctx() != algebroid.ctx() {
                        return Err(Error::Shape(
                            "connection entry uses a different variable context".into(),
                        ));
                    }
                }
            }
        }
        Ok(Connection { algebroid, table })
    }

    /// The flat connection with vanishing table.
    pub fn flat(algebroid: LieAlgebroid) -> Connection {
        let r = algebroid.rank();
        let zero = Scalar::zero(algebroid.ctx());
        let table = vec![vec![vec![zero; r]; r]; r];
        Connection { algebroid, table }
    }

    /// The underlying algebroid.
    pub fn algebroid(&self) -> &LieAlgebroid {
        &self.algebroid
    }

    /// The table entry `Γ_ij^k`.
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.table[i][j][k]
    }

    /// Derivative of a section along a frame section: table term plus the
    /// anchor derivative of the coefficients.
    pub fn nabla_frame(&self, i: usize, y: &[Scalar]) -> Section {
        let r = self.algebroid.rank();
        assert_eq!(y.len(), r, "section has the wrong length");
        let ei = self.algebroid.bundle().basis_section(i);
        let mut out: Vec<Scalar> =
            (0..r).map(|k| self.algebroid.rho(&ei, &y[k])).collect();
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            for (k, out_k) in out.iter_mut().enumerate() {
                let g = &self.table[i][j][k];
                if !g.is_zero() {
                    *out_k = out_k.add(&yj.mul(g));
                }
            }
        }
        out
    }

    /// Derivative of `y` along `x`: tensorial in `x`, Leibniz in `y`.
    pub fn apply(&self, x: &[Scalar], y: &[Scalar]) -> Section {
        let r = self.algebroid.rank();
        assert_eq!(x.len(), r, "direction section has the wrong length");
        let mut out = vec![Scalar::zero(self.algebroid.ctx()); r];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let term = self.nabla_frame(i, y);
            for (k, out_k) in out.iter_mut().enumerate() {
                *out_k = out_k.add(&xi.mul(&term[k]));
            }
        }
        out
    }

    /// Torsion on a frame pair: `∇_{e_i}e_j − ∇_{e_j}e_i − [e_i,e_j]`.
    pub fn torsion(&self, i: usize, j: usize) -> Section {
        let br = self.algebroid.bracket_frames(i, j);
        (0..self.algebroid.rank())
            .map(|k| self.table[i][j][k].sub(&self.table[j][i][k]).sub(&br[k]))
            .collect()
    }

    /// Curvature on frames: `∇_i ∇_j e_k − ∇_j ∇_i e_k − ∇_{[e_i,e_j]} e_k`.
    pub fn curvature(&self, i: usize, j: usize, k: usize) -> Section {
        let r = self.algebroid.rank();
        let nj = self.nabla_frame(i, &self.table[j][k]);
        let ni = self.nabla_frame(j, &self.table[i][k]);
        let br = self.algebroid.bracket_frames(i, j);
        let mut out: Vec<Scalar> = (0..r).map(|l| nj[l].sub(&ni[l])).collect();
        // ∇ is tensorial in the direction, and e_k has constant
        // coefficients, so the bracket direction contributes only through
        // the table.
        for (m, c) in br.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (l, out_l) in out.iter_mut().enumerate() {
                *out_l = out_l.sub(&c.mul(&self.table[m][k][l]));
            }
        }
        out
    }

    /// Every nonzero torsion component, labeled, over frame pairs.
    pub fn torsion_defects(&self) -> Vec<(String, Scalar)> {
        let mut out = Vec::new();
        for pair in increasing_tuples(self.algebroid.rank(), 2) {
            let (i, j) = (pair[0], pair[1]);
            for (k, v) in self.torsion(i, j).into_iter().enumerate() {
                if !v.is_zero() {
                    out.push((format!("torsion(e{i},e{j}) on e{k}"), v));
                }
            }
        }
        out
    }

    /// Every nonzero curvature component, labeled, over frame triples.
    pub fn curvature_defects(&self) -> Vec<(String, Scalar)> {
        let r = self.algebroid.rank();
        let mut out = Vec::new();
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            for k in 0..r {
                for (l, v) in self.curvature(i, j, k).into_iter().enumerate() {
                    if !v.is_zero() {
                        out.push((format!("curvature(e{i},e{j})e{k} on e{l}"), v));
                    }
                }
            }
        }
        out
    }

    /// Whether the torsion tensor vanishes identically.
    pub fn is_torsion_free(&self) -> bool {
        self.torsion_defects().is_empty()
    }

    /// Whether the curvature tensor vanishes identically.
    pub fn is_flat(&self) -> bool {
        self.curvature_defects().is_empty()
    }

    /// Covariant derivative of a lower 2-tensor along `e_i`:
    /// `(∇_i g)_{jk} = ρ(e_i) g_{jk} − Γ_ij^l g_{lk} − Γ_ik^l g_{jl}`.
    pub fn nabla_lower2(&self, g: &[Vec<Scalar>], i: usize) -> Vec<Vec<Scalar>> {
        let r = self.algebroid.rank();
        let ei = self.algebroid.bundle().basis_section(i);
        (0..r)
            .map(|j| {
                (0..r)
                    .map(|k| {
                        let mut v = self.algebroid.rho(&ei, &g[j][k]);
                        for l in 0..r {
                            v = v
                                .sub(&self.table[i][j][l].mul(&g[l][k]))
                                .sub(&self.table[i][k][l].mul(&g[j][l]));
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// Covariant derivative of an upper 2-tensor along `e_i`:
    /// `(∇_i h)^{jk} = ρ(e_i) h^{jk} + Γ_il^j h^{lk} + Γ_il^k h^{jl}`.
    pub fn nabla_upper2(&self, h: &[Vec<Scalar>], i: usize) -> Vec<Vec<Scalar>> {
        let r = self.algebroid.rank();
        let ei = self.algebroid.bundle().basis_section(i);
        (0..r)
            .map(|j| {
                (0..r)
                    .map(|k| {
                        let mut v = self.algebroid.rho(&ei, &h[j][k]);
                        for l in 0..r {
                            v = v
                                .add(&self.table[i][l][j].mul(&h[l][k]))
                                .add(&self.table[i][l][k].mul(&h[j][l]));
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// The Codazzi defect of a lower 2-tensor: nonzero components of
    /// `(∇_{e_i} g)(e_j, ·) − (∇_{e_j} g)(e_i, ·)` over frame pairs.
    /// Empty output certifies that `∇g` is symmetric in its first two slots.
    pub fn codazzi_defects(&self, g: &[Vec<Scalar>]) -> Vec<(String, Scalar)> {
        let r = self.algebroid.rank();
        let mut out = Vec::new();
        for pair in increasing_tuples(r, 2) {
            let (i, j) = (pair[0], pair[1]);
            let ni = self.nabla_lower2(g, i);
            let nj = self.nabla_lower2(g, j);
            for k in 0..r {
                let v = ni[j][k].sub(&nj[i][k]);
                if !v.is_zero() {
                    out.push((format!("codazzi(e{i},e{j}) on e{k}"), v));
                }
            }
        }
        out
    }

    /// The dual connection with respect to a nondegenerate 2-tensor `g`,
    /// solving `ρ(e_i) g(e_j,e_k) = g(∇_{e_i}e_j, e_k) + g(e_j, ∇*_{e_i}e_k)`
    /// exactly on frames.
    pub fn dual_connection(&self, g: &[Vec<Scalar>]) -> Result<Connection> {
        let r = self.algebroid.rank();
        assert_eq!(g.len(), r, "metric has the wrong shape");
        for row in g {
            assert_eq!(row.len(), r, "metric has the wrong shape");
        }
        let inv = linalg::invert(g)?;
        let ctx = self.algebroid.ctx();
        let ei_all: Vec<Section> =
            (0..r).map(|i| self.algebroid.bundle().basis_section(i)).collect();
        let mut table = vec![vec![vec![Scalar::zero(ctx); r]; r]; r];
        for i in 0..r {
            for k in 0..r {
                // rhs_j = ρ(e_i) g_{jk} − Σ_l Γ_ij^l g_{lk}
                let rhs: Vec<Scalar> = (0..r)
                    .map(|j| {
                        let mut v = self.algebroid.rho(&ei_all[i], &g[j][k]);
                        for l in 0..r {
                            v = v.sub(&self.table[i][j][l].mul(&g[l][k]));
                        }
                        v
                    })
                    .collect();
                // Γ*_{ik}^l solves Σ_l g_{jl} Γ*^l = rhs_j.
                for (l, slot) in table[i][k].iter_mut().enumerate() {
                    let mut v = Scalar::zero(ctx);
                    for (j, rhs_j) in rhs.iter().enumerate() {
                        if !rhs_j.is_zero() {
                            v = v.add(&inv[l][j].mul(rhs_j));
                        }
                    }
                    *slot = v;
                }
            }
        }
        Connection::new(self.algebroid.clone(), table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ctx;

    fn flat_plane() -> Connection {
        Connection::flat(LieAlgebroid::tangent(&["x", "y"]).unwrap())
    }

    #[test]
    fn zero_table_on_the_tangent_algebroid_is_flat_and_torsion_free() {
        let c = flat_plane();
        assert!(c.is_flat());
        assert!(c.is_torsion_free());
        assert!(c.torsion_defects().is_empty());
        assert!(c.curvature_defects().is_empty());
    }

    #[test]
    fn derivative_is_tensorial_in_the_direction_and_leibniz_in_the_argument() {
        let c = flat_plane();
        let alg = c.algebroid().clone();
        let f = alg.bundle().parse_scalar("x^2 + y").unwrap();
        let x = alg.parse_section(&["y", "1"]).unwrap();
        let y = alg.parse_section(&["x", "x*y"]).unwrap();
        // Tensoriality: ∇_{fX} Y = f ∇_X Y.
        let fx: Vec<Scalar> = x.iter().map(|v| v.mul(&f)).collect();
        let lhs = c.apply(&fx, &y);
        let rhs: Vec<Scalar> = c.apply(&x, &y).iter().map(|v| v.mul(&f)).collect();
        assert_eq!(lhs, rhs);
        // Leibniz: ∇_X (fY) = f ∇_X Y + (ρ(X)f) Y.
        let fy: Vec<Scalar> = y.iter().map(|v| v.mul(&f)).collect();
        let lhs = c.apply(&x, &fy);
        let rho_xf = alg.rho(&x, &f);
        let rhs: Vec<Scalar> = c
            .apply(&x, &y)
            .iter()
            .zip(&y)
            .map(|(v, yk)| v.mul(&f).add(&rho_xf.mul(yk)))
            .collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dual_of_the_flat_connection_with_constant_metric_is_flat() {
        let c = flat_plane();
        let ctx = c.algebroid().ctx();
        let g = vec![
            vec![Scalar::int(ctx, 2), Scalar::one(ctx)],
            vec![Scalar::one(ctx), Scalar::one(ctx)],
        ];
        let dual = c.dual_connection(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(dual.gamma(i, j, k).is_zero());
                }
            }
        }
    }

    #[test]
    fn one_dimensional_dual_connection_solves_the_duality_equation() {
        // On the line with Γ_00^0 = 1 and g = x, the dual table entry is
        // (g' - Γ g)/g = 1/x - 1.
        let alg = LieAlgebroid::tangent(&["x"]).unwrap();
        let ctx = alg.ctx();
        let c = Connection::new(alg, vec![vec![vec![Scalar::one(ctx)]]]).unwrap();
        let g = vec![vec![Scalar::var(ctx, 0)]];
        let dual = c.dual_connection(&g).unwrap();
        let expect = Scalar::one(ctx)
            .div(&Scalar::var(ctx, 0))
            .unwrap()
            .sub(&Scalar::one(ctx));
        assert_eq!(*dual.gamma(0, 0, 0), expect);
    }

    #[test]
    fn dual_connection_rejects_singular_metrics() {
        let c = flat_plane();
        let ctx = c.algebroid().ctx();
        let x = Scalar::var(ctx, 0);
        let g = vec![vec![x.clone(), x.clone()], vec![x.clone(), x]];
        assert!(matches!(c.dual_connection(&g), Err(Error::Singular(_))));
    }

    #[test]
    fn dual_torsion_freeness_tracks_the_codazzi_defect() {
        let c = flat_plane();
        let ctx = c.algebroid().ctx();
        let zero = Scalar::zero(ctx);
        // g = diag(1, y²+1) satisfies the Codazzi equation for the flat
        // connection; its dual is torsion-free.
        let y2p1 = c.algebroid().bundle().parse_scalar("y^2 + 1").unwrap();
        let good = vec![
            vec![Scalar::one(ctx), zero.clone()],
            vec![zero.clone(), y2p1],
        ];
        assert!(c.codazzi_defects(&good).is_empty());
        assert!(c.dual_connection(&good).unwrap().is_torsion_free());
        // g = diag(1, x) violates it; its dual picks up torsion.
        let bad = vec![
            vec![Scalar::one(ctx), zero.clone()],
            vec![zero, Scalar::var(ctx, 0)],
        ];
        assert!(!c.codazzi_defects(&bad).is_empty());
        assert!(!c.dual_connection(&bad).unwrap().is_torsion_free());
    }

    #[test]
    fn covariant_derivatives_of_two_tensors_reduce_to_partials_when_flat() {
        let c = flat_plane();
        let alg = c.algebroid();
        let x = Scalar::var(alg.ctx(), 0);
        let h = vec![
            vec![x.clone(), Scalar::zero(alg.ctx())],
            vec![Scalar::zero(alg.ctx()), x.mul(&x)],
        ];
        let nh = c.nabla_upper2(&h, 0);
        assert!(nh[0][0].is_one());
        assert_eq!(nh[1][1], x.mul_int(2));
        let ng = c.nabla_lower2(&h, 0);
        assert_eq!(ng, nh, "with a vanishing table both variances agree");
    }

    #[test]
    fn curvature_detects_a_noncommuting_table() {
        // On TM ℝ¹ a connection can never be curved; use TM ℝ² with
        // Γ_01^0 = y and everything else zero, so that the second
        // derivative direction sees the coefficient.
        let alg = LieAlgebroid::tangent(&["x", "y"]).unwrap();
        let ctx = alg.ctx();
        let mut table = vec![vec![vec![Scalar::zero(ctx); 2]; 2]; 2];
        table[0][1][0] = Scalar::var(ctx, 1);
        let c = Connection::new(alg, table).unwrap();
        // R(e0,e1)e1 = −∇_{e1}(y e0) = −e0.
        assert_eq!(c.curvature(0, 1, 1)[0], Scalar::int(ctx, -1));
        assert!(!c.is_flat());
        let defects = c.curvature_defects();
        assert!(!defects.is_empty());
        assert!(defects.iter().all(|(l, _)| l.starts_with("curvature")));
    }

    #[test]
    fn connection_table_shape_is_validated() {
        let alg = LieAlgebroid::tangent(&["x"]).unwrap();
        let err = Connection::new(alg, vec![]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let alg = LieAlgebroid::tangent(&["x"]).unwrap();
        let wrong = vec![vec![vec![Scalar::zero(Ctx::new(2))]]];
        let err = Connection::new(alg, wrong).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}
