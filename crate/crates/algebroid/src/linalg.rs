//! Exact linear algebra over the scalar ring.
//!
//! Determinants and inverses of small square matrices with [`Scalar`]
//! entries.  Sizes in this crate are tiny (patch dimension and bundle rank
//! are both at most five in practice), so Laplace expansion and the
//! adjugate formula are the right tools: they stay exact, never pivot, and
//! produce denominators only through the single final division by the
//! determinant.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Determinant of a square matrix by Laplace expansion along the first row.
///
/// Panics if the matrix is empty or not square; callers always know their
/// shapes statically.
pub fn det(m: &[Vec<Scalar>]) -> Scalar {
    let n = m.len();
    assert!(n >= 1, "determinant of an empty matrix is undefined here");
    for row in m {
        assert_eq!(row.len(), n, "determinant requires a square matrix");
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Scalar::zero(m[0][0].ctx());
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let sub = minor(m, 0, j);
        let term = entry.mul(&det(&sub));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// The matrix with row `i` and column `j` removed.
fn minor(m: &[Vec<Scalar>], i: usize, j: usize) -> Vec<Vec<Scalar>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != i)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != j)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Exact inverse of a square matrix via the adjugate formula.
///
/// Returns [`Error::Singular`] when the determinant vanishes identically,
/// and propagates the division error when the determinant carries an
/// exponential factor (such inverses leave the fraction field this crate
/// works in).
pub fn invert(m: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let n = m.len();
    assert!(n >= 1, "inverse of an empty matrix is undefined here");
    let d = det(m);
    if d.is_zero() {
        return Err(Error::Singular(format!(
            "{}x{n} matrix has identically zero determinant",
            n
        )));
    }
    let ctx = d.ctx();
    let mut inv = vec![vec![Scalar::zero(ctx); n]; n];
    for i in 0..n {
        for j in 0..n {
            // Cofactor expansion: inverse[j][i] = (-1)^{i+j} det(minor(i,j)) / det.
            let cof = if n == 1 {
                Scalar::one(ctx)
            } else {
                det(&minor(m, i, j))
            };
            let signed = if (i + j) % 2 == 0 { cof } else { cof.neg() };
            inv[j][i] = signed.div(&d)?;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ctx;

    fn x(ctx: Ctx) -> Scalar {
        Scalar::var(ctx, 0)
    }

    #[test]
    fn determinant_of_upper_triangular_is_diagonal_product() {
        let ctx = Ctx::new(2);
        let m = vec![
            vec![Scalar::one(ctx), x(ctx)],
            vec![Scalar::zero(ctx), x(ctx)],
        ];
        assert_eq!(det(&m), x(ctx));
    }

    #[test]
    fn determinant_picks_up_permutation_sign() {
        let ctx = Ctx::new(1);
        let m = vec![
            vec![Scalar::zero(ctx), Scalar::one(ctx)],
            vec![Scalar::one(ctx), Scalar::zero(ctx)],
        ];
        assert_eq!(det(&m), Scalar::int(ctx, -1));
    }

    #[test]
    fn inverse_of_unipotent_matrix_negates_the_off_diagonal() {
        let ctx = Ctx::new(2);
        let m = vec![
            vec![Scalar::one(ctx), x(ctx)],
            vec![Scalar::zero(ctx), Scalar::one(ctx)],
        ];
        let inv = invert(&m).unwrap();
        assert_eq!(inv[0][1], x(ctx).neg());
        assert_eq!(inv[0][0], Scalar::one(ctx));
        assert_eq!(inv[1][0], Scalar::zero(ctx));
    }

    #[test]
    fn inverse_of_polynomial_diagonal_produces_rational_entries() {
        let ctx = Ctx::new(1);
        let m = vec![
            vec![Scalar::one(ctx), Scalar::zero(ctx)],
            vec![Scalar::zero(ctx), x(ctx)],
        ];
        let inv = invert(&m).unwrap();
        assert_eq!(inv[1][1].render(&["x"]), "1/x");
        // Multiplying back gives the identity exactly.
        let prod00 = m[0][0].mul(&inv[0][0]).add(&m[0][1].mul(&inv[1][0]));
        let prod11 = m[1][0].mul(&inv[0][1]).add(&m[1][1].mul(&inv[1][1]));
        assert!(prod00.is_one() && prod11.is_one());
    }

    #[test]
    fn singular_matrix_is_rejected_by_name() {
        let ctx = Ctx::new(1);
        let m = vec![
            vec![x(ctx), x(ctx)],
            vec![x(ctx), x(ctx)],
        ];
        match invert(&m) {
            Err(Error::Singular(msg)) => assert!(msg.contains("determinant")),
            other => panic!("expected a singularity error, got {other:?}"),
        }
    }
}
