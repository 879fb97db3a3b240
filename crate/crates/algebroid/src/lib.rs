//! Exact symbolic calculus for anchored bundles over polynomial coordinate
//! patches.
//!
//! This crate implements, with exact rational arithmetic and symbolic-zero
//! certification, the interlocking calculus of four kinds of algebroid
//! structure on a trivialized vector bundle `A → M` over a polynomial patch:
//!
//! * **Lie algebroids** — a bracket on frame sections plus an anchor, with
//!   the full Cartan calculus (wedge, interior product, Schouten bracket,
//!   differential, Lie derivative) on multivector fields and forms;
//! * **left-symmetric algebroids** — a product whose associator is symmetric
//!   in its first two slots, together with the Koszul–Vinberg calculus of
//!   symmetric 2-tensors, cochains, and dual products;
//! * **Jacobi algebroids** — a Lie algebroid twisted by a distinguished
//!   closed 1-cochain, with the twisted Schouten/Cartan calculus, Jacobi
//!   pairs, and their line packings;
//! * **Jacobi-left-symmetric algebroids** — the left-symmetric analogue of
//!   the twist, with twisted duals and the associated bracket on symmetric
//!   2-tensors.
//!
//! Everything is computed over the ring of fractions `p/q` where `p` is a
//! polynomial with exponential bands `e^{kt}` (integer `k`) and `q` is an
//! exponential-free polynomial, all with arbitrary-precision rational
//! coefficients.  Equalities are decided by exact normalization: a defect
//! vanishes if and only if every component reduces to the zero scalar, so a
//! passing check is a certificate, not a numerical observation.
//!
//! # Quick start
//!
//! Parse exact scalars over a patch and compute in its exterior algebra:
//!
//! ```
//! use algebroid::multivector::Multivector;
//! use algebroid::parse::parse_scalar;
//! use algebroid::scalar::{Ctx, Scalar};
//!
//! let vars = ["x", "y"];
//! let f = parse_scalar("x^2*y - 1/2", &vars, false).unwrap();
//! assert_eq!(f.partial(0).render(&vars), "2*x*y");
//!
//! // (f e0) ∧ e1 has coefficient f on the basis plane e0 ∧ e1.
//! let ctx = Ctx::new(2);
//! let a = Multivector::from_coefficients(ctx, &[f.clone(), Scalar::zero(ctx)]);
//! let b = Multivector::from_coefficients(ctx, &[Scalar::zero(ctx), Scalar::one(ctx)]);
//! assert_eq!(a.wedge(&b).get(&[0, 1]), f);
//! ```
//!
//! # Module map
//!
//! * [`scalar`] — the exact scalar ring: sparse multivariate polynomials,
//!   exponential bands, reduced fractions, partial derivatives, parsing and
//!   deterministic rendering.
//! * [`bundle`] — anchored bundles (base variables, rank, anchor matrix) and
//!   frame-coefficient sections.
//! * [`multivector`] — alternating multi-index tensors shared by multivector
//!   fields and forms: wedge, interior product, pairing, evaluation.
//! * [`linalg`] — exact determinants and inverses for the small matrices
//!   the sharp maps and packings produce.
//! * [`algebroid`] — Lie algebroids: bracket, axiom checks, Schouten
//!   bracket, differential, Lie derivative, presymplectic check, line sums.
//! * [`connection`] — affine connections on anchored bundles: curvature,
//!   torsion, duals with respect to a metric.
//! * [`poisson`] — Poisson and Jacobi layers: sharp maps, defect
//!   certificates, dual Lie algebroids, twisted calculus, Jacobi pairs and
//!   their packings.
//! * [`lsa`] — left-symmetric algebroids: products, axiom checks,
//!   sub-adjacent Lie algebroids, Koszul–Vinberg brackets, cochain
//!   coboundaries, dual products and dual builders.
//! * [`jacobi_lsa`] — Jacobi-left-symmetric algebroids and the twisted
//!   Koszul–Vinberg layer.
//! * [`lineext`] — line extensions: the two extension brackets over
//!   `M × ℝ`, the intertwining check, and the exponential-weight
//!   correspondences for bivectors and symmetric tensors.
//! * [`manifold`] — the affine-patch frontend: connections with explicit
//!   Christoffel data, metric/codazzi defects, packing into rank `n+1`
//!   structures, and the locally conformally Hessian report.
//! * [`report`] — defect reports with deterministic rendering and digests.
//! * [`structfile`] — the TOML structure-file format used by the CLI and
//!   fixtures.
//! * [`fixtures`] — the frozen example structures exercised by the test
//!   suite.
//! * [`suite`] — the deterministic randomized identity suite.

pub mod algebroid;
pub mod bundle;
pub mod connection;
pub mod error;
pub mod fixtures;
pub mod jacobi_lsa;
pub mod linalg;
pub mod lineext;
pub mod lsa;
pub mod manifold;
pub mod multivector;
pub mod parse;
pub mod poisson;
pub mod report;
pub mod scalar;
pub mod structfile;
pub mod suite;

pub use error::{Error, Result};
