//! Anchored vector bundles over polynomial coordinate patches.
//!
//! An [`AnchoredBundle`] is the shared substrate of every structure in this
//! crate: a trivialized rank-`r` bundle over a coordinate patch with named
//! variables, together with an *anchor* — a bundle map to the tangent bundle
//! recorded as an `nvars x rank` matrix of scalars.  Column `i` of the
//! anchor lists the coefficients of the vector field that frame section
//! `e_i` is sent to, so applying a section to a function is one
//! matrix-vector contraction followed by partial derivatives.
//!
//! Sections and covectors are plain coefficient vectors in the frame
//! `e_0..e_{r-1}` (respectively the dual frame); the type aliases exist for
//! documentation value only.  The reserved variable name `t` marks the line
//! coordinate of an extended patch and must come last, which is what makes
//! exponential scalars such as `exp(-t)` admissible in anchor entries.

use crate::error::{Error, Result};
use crate::parse::parse_scalar;
use crate::scalar::{Ctx, Scalar};

/// A section of the bundle: coefficients against the frame `e_0..e_{r-1}`.
pub type Section = Vec<Scalar>;

/// A covector: coefficients against the dual frame `e^0..e^{r-1}`.
pub type Covector = Vec<Scalar>;

/// A trivialized vector bundle over a polynomial patch with an anchor map.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchoredBundle {
    ctx: Ctx,
    vars: Vec<String>,
    rank: usize,
    /// `anchor[a][i]` is the `d/d(vars[a])` component of the image of `e_i`.
    anchor: Vec<Vec<Scalar>>,
}

impl AnchoredBundle {
    /// Build a bundle, checking the naming rules and the anchor shape.
    ///
    /// `vars` are the patch coordinates in order; the name `t` is reserved
    /// for the line coordinate and may appear only in the last position.
    /// `anchor` must have one row per variable and one column per frame
    /// section.
    pub fn new(vars: Vec<String>, rank: usize, anchor: Vec<Vec<Scalar>>) -> Result<AnchoredBundle> {
        if rank == 0 {
            return Err(Error::Shape("bundle rank must be at least 1".into()));
        }
        for (a, name) in vars.iter().enumerate() {
            if name.is_empty()
                || !name.chars().next().unwrap().is_ascii_alphabetic()
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(Error::Invalid(format!(
                    "variable name `{name}` is not a valid identifier"
                )));
            }
            if name == "t" && a + 1 != vars.len() {
                return Err(Error::Invalid(
                    "the line variable `t` must be the last coordinate".into(),
                ));
            }
            if vars[..a].iter().any(|earlier| earlier == name) {
                return Err(Error::Invalid(format!("duplicate variable name `{name}`")));
            }
        }
        let has_t = vars.last().map(|s| s == "t").unwrap_or(false);
        let ctx = if has_t {
            Ctx::with_line(vars.len())
        } else {
            Ctx::new(vars.len())
        };
        if anchor.len() != vars.len() {
            return Err(Error::Shape(format!(
                "anchor has {} rows but the patch has {} coordinates",
                anchor.len(),
                vars.len()
            )));
        }
        for (a, row) in anchor.iter().enumerate() {
            if row.len() != rank {
                return Err(Error::Shape(format!(
                    "anchor row {a} has {} entries but the rank is {rank}",
                    row.len()
                )));
            }
            for entry in row {
                if entry.ctx() != ctx {
                    return Err(Error::Shape(format!(
                        "anchor row {a} contains a scalar from a different variable context"
                    )));
                }
            }
        }
        Ok(AnchoredBundle { ctx, vars, rank, anchor })
    }

    /// The scalar context shared by everything over this patch.
    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// Number of frame sections.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of patch coordinates (including `t` when present).
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// The ordered coordinate names.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Whether the patch carries the line coordinate `t`.
    pub fn has_line(&self) -> bool {
        self.ctx.has_t
    }

    /// The `d/d(vars[a])` component of the anchor image of `e_i`.
    pub fn anchor_entry(&self, a: usize, i: usize) -> &Scalar {
        &self.anchor[a][i]
    }

    /// The full anchor matrix, rows indexed by coordinates.
    pub fn anchor_rows(&self) -> &[Vec<Scalar>] {
        &self.anchor
    }

    /// Components of the vector field a section is anchored to.
    ///
    /// Entry `a` of the result is the `d/d(vars[a])` coefficient.
    pub fn anchor_field(&self, section: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(section.len(), self.rank, "section has the wrong length");
        (0..self.nvars())
            .map(|a| {
                let mut acc = Scalar::zero(self.ctx);
                for (i, coeff) in section.iter().enumerate() {
                    if !coeff.is_zero() && !self.anchor[a][i].is_zero() {
                        acc = acc.add(&coeff.mul(&self.anchor[a][i]));
                    }
                }
                acc
            })
            .collect()
    }

    /// Apply a section to a function through the anchor: the derivative of
    /// `f` along the vector field the section maps to.
    pub fn anchor_apply(&self, section: &[Scalar], f: &Scalar) -> Scalar {
        let field = self.anchor_field(section);
        let mut acc = Scalar::zero(self.ctx);
        for (a, component) in field.iter().enumerate() {
            if !component.is_zero() {
                acc = acc.add(&component.mul(&f.partial(a)));
            }
        }
        acc
    }

    /// Derivative of `f` along an explicit coordinate vector field.
    pub fn field_apply(&self, field: &[Scalar], f: &Scalar) -> Scalar {
        assert_eq!(field.len(), self.nvars(), "vector field has the wrong length");
        let mut acc = Scalar::zero(self.ctx);
        for (a, component) in field.iter().enumerate() {
            if !component.is_zero() {
                acc = acc.add(&component.mul(&f.partial(a)));
            }
        }
        acc
    }

    /// The zero section.
    pub fn zero_section(&self) -> Section {
        vec![Scalar::zero(self.ctx); self.rank]
    }

    /// The frame section `e_i`.
    pub fn basis_section(&self, i: usize) -> Section {
        assert!(i < self.rank, "frame index out of range");
        let mut s = self.zero_section();
        s[i] = Scalar::one(self.ctx);
        s
    }

    /// Parse a scalar over this patch's coordinates.
    pub fn parse_scalar(&self, src: &str) -> Result<Scalar> {
        parse_scalar(src, &self.vars, self.ctx.has_t)
    }

    /// Parse a section (or covector) from one source string per component.
    pub fn parse_components<S: AsRef<str>>(&self, srcs: &[S]) -> Result<Vec<Scalar>> {
        if srcs.len() != self.rank {
            return Err(Error::Shape(format!(
                "expected {} components, found {}",
                self.rank,
                srcs.len()
            )));
        }
        srcs.iter().map(|s| self.parse_scalar(s.as_ref())).collect()
    }

    /// Render a scalar using this patch's coordinate names.
    pub fn render_scalar(&self, s: &Scalar) -> String {
        s.render(&self.vars)
    }

    /// Render a section (or covector) as a bracketed component list.
    pub fn render_components(&self, v: &[Scalar]) -> String {
        let body: Vec<String> = v.iter().map(|s| self.render_scalar(s)).collect();
        format!("[{}]", body.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tangent-bundle-style patch: rank equals dimension, identity anchor.
    fn plane() -> AnchoredBundle {
        let ctx = Ctx::new(2);
        AnchoredBundle::new(
            vec!["x".into(), "y".into()],
            2,
            vec![
                vec![Scalar::one(ctx), Scalar::zero(ctx)],
                vec![Scalar::zero(ctx), Scalar::one(ctx)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_anchor_differentiates_along_coordinates() {
        let b = plane();
        let f = b.parse_scalar("x*y + y^2").unwrap();
        let along_e0 = b.anchor_apply(&b.basis_section(0), &f);
        assert_eq!(b.render_scalar(&along_e0), "y");
        let along_e1 = b.anchor_apply(&b.basis_section(1), &f);
        assert_eq!(b.render_scalar(&along_e1), "x + 2*y");
    }

    #[test]
    fn anchor_field_mixes_columns_with_section_coefficients() {
        let b = plane();
        let x = b.parse_scalar("x").unwrap();
        let section = vec![x.clone(), Scalar::int(b.ctx(), 3)];
        let field = b.anchor_field(&section);
        assert_eq!(field[0], x);
        assert_eq!(field[1], Scalar::int(b.ctx(), 3));
    }

    #[test]
    fn bundle_over_a_point_has_no_coordinates() {
        let b = AnchoredBundle::new(vec![], 3, vec![]).unwrap();
        assert_eq!(b.nvars(), 0);
        assert_eq!(b.rank(), 3);
        let c = b.parse_scalar("5/2").unwrap();
        assert_eq!(b.anchor_apply(&b.basis_section(0), &c), Scalar::zero(b.ctx()));
    }

    #[test]
    fn line_variable_must_come_last() {
        let ctx = Ctx::with_line(2);
        let zero = Scalar::zero(ctx);
        let err = AnchoredBundle::new(
            vec!["t".into(), "x".into()],
            1,
            vec![vec![zero.clone()], vec![zero.clone()]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));

        let ok = AnchoredBundle::new(
            vec!["x".into(), "t".into()],
            1,
            vec![vec![zero.clone()], vec![zero]],
        )
        .unwrap();
        assert!(ok.has_line());
        assert!(ok.parse_scalar("exp(-2*t)*x").is_ok());
    }

    #[test]
    fn shape_and_naming_violations_are_reported() {
        let ctx = Ctx::new(1);
        let one = Scalar::one(ctx);
        // Wrong number of rows.
        let err = AnchoredBundle::new(vec!["x".into()], 1, vec![]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        // Wrong row width.
        let err =
            AnchoredBundle::new(vec!["x".into()], 2, vec![vec![one.clone()]]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        // Duplicate names.
        let err = AnchoredBundle::new(
            vec!["x".into(), "x".into()],
            1,
            vec![vec![one.clone()], vec![one.clone()]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        // Rank zero.
        let err = AnchoredBundle::new(vec!["x".into()], 0, vec![vec![]]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn parse_components_checks_the_length() {
        let b = plane();
        assert!(b.parse_components(&["x", "y"]).is_ok());
        let err = b.parse_components(&["x"]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}
