//! Structure files: a TOML format for describing one algebroid-style
//! structure and its optional tensors, with exact scalar literals.
//!
//! A structure file names a `kind` — `lie`, `lsa`, `jacobi`, `jlsa`,
//! `manifold`, or `jkv-manifold` — plus the coordinate names, the rank,
//! an optional anchor matrix (one row per coordinate; identity when
//! omitted and the rank matches the dimension), and a sparse table of
//! structure constants: `[[bracket]]` entries for Lie kinds (increasing
//! frame pairs), `[[product]]` entries for left-symmetric kinds, and
//! `[[christoffel]]` entries for manifold kinds.  Optional tensors attach
//! the data the checks operate on: `phi0` (twist covector), `[[pi]]`
//! (2-section by increasing frame pairs), `h` (symmetric contravariant
//! 2-tensor), `E` (vector field), `g` (metric), `theta` (one-form).  All
//! entries are strings in the scalar literal grammar.
//!
//! [`StructureFile::parse_str`] validates shapes and parses every scalar
//! (errors carry positions); [`StructureFile::emit`] renders the canonical
//! TOML form, and `emit ∘ parse` is a fixpoint, so emitted files reparse
//! to structurally identical values.  [`StructureFile::build`] constructs
//! the described object, [`StructureFile::checks`] runs its defining
//! equations as named checks, and [`StructureFile::defect`] computes one
//! named defect family from the fixed table documented on that method.

use crate::algebroid::LieAlgebroid;
use crate::bundle::AnchoredBundle;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::jacobi_lsa::{jkv_bracket_defects, JacobiLSA};
use crate::lsa::{kv_bracket_defects, LeftSymmetricAlgebroid, SymmetricTensor};
use crate::manifold::{
    dual_connection_report, jkv_equivalence_report, jkv_manifold_defects, kv_manifold_defects,
    lch_report, semi_weyl_defects, AffinePatch, JKVPair,
};
use crate::multivector::{frame_tag, Multivector};
use crate::poisson::{
    jacobi_pair_defects, poisson_defect, JacobiAlgebroid, JacobiPair,
};
use crate::report::CheckReport;
use crate::scalar::Scalar;
use serde::Deserialize;

/// The structure a file describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// A Lie algebroid: anchored bundle plus bracket table.
    Lie,
    /// A left-symmetric algebroid: anchored bundle plus product table.
    Lsa,
    /// A Lie algebroid with a twist covector `phi0`.
    Jacobi,
    /// A left-symmetric algebroid with a twist covector `phi0`.
    Jlsa,
    /// A coordinate patch with Christoffel symbols on its tangent bundle.
    Manifold,
    /// A patch carrying a candidate pair `(h, E)`.
    JkvManifold,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Lie => "lie",
            Kind::Lsa => "lsa",
            Kind::Jacobi => "jacobi",
            Kind::Jlsa => "jlsa",
            Kind::Manifold => "manifold",
            Kind::JkvManifold => "jkv-manifold",
        }
    }

    fn from_str(s: &str) -> Result<Kind> {
        Ok(match s {
            "lie" => Kind::Lie,
            "lsa" => Kind::Lsa,
            "jacobi" => Kind::Jacobi,
            "jlsa" => Kind::Jlsa,
            "manifold" => Kind::Manifold,
            "jkv-manifold" => Kind::JkvManifold,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown kind `{other}` (expected lie, lsa, jacobi, jlsa, manifold, \
                     or jkv-manifold)"
                )))
            }
        })
    }

    fn is_manifold(self) -> bool {
        matches!(self, Kind::Manifold | Kind::JkvManifold)
    }

    fn is_lie_like(self) -> bool {
        matches!(self, Kind::Lie | Kind::Jacobi)
    }

    fn is_lsa_like(self) -> bool {
        matches!(self, Kind::Lsa | Kind::Jlsa)
    }
}

/// A built structure, one variant per file kind.  Manifold kinds build the
/// certified patch; their tensors stay on the [`StructureFile`].
#[derive(Clone, Debug)]
pub enum Structure {
    /// A validated-shape Lie algebroid (axioms checked separately).
    Lie(LieAlgebroid),
    /// A left-symmetric algebroid (axioms checked separately).
    Lsa(LeftSymmetricAlgebroid),
    /// A Lie algebroid with twist (cocycle condition checked separately).
    Jacobi(JacobiAlgebroid),
    /// A left-symmetric algebroid with twist.
    Jlsa(JacobiLSA),
    /// A certified flat torsion-free patch.
    Manifold(AffinePatch),
    /// A certified patch whose pair is carried by the file.
    JkvManifold(AffinePatch),
}

/// A parsed and shape-validated structure file.
#[derive(Clone, Debug)]
pub struct StructureFile {
    /// What the file describes.
    pub kind: Kind,
    /// Coordinate names, in order (`t` last when present).
    pub base_vars: Vec<String>,
    /// Number of frame sections (equals the dimension for manifold kinds).
    pub rank: usize,
    /// Anchor matrix, one row per coordinate (identity for manifold kinds).
    pub anchor: Vec<Vec<Scalar>>,
    /// Dense structure-constant table: bracket, product, or Christoffel
    /// symbols depending on the kind; `table[i][j][k]` is the `e_k`
    /// coefficient.
    pub table: Vec<Vec<Vec<Scalar>>>,
    /// Twist covector (required for `jacobi`/`jlsa`).
    pub phi0: Option<Vec<Scalar>>,
    /// A 2-section, for Poisson/Jacobi-type defects.
    pub pi: Option<Multivector>,
    /// A symmetric contravariant 2-tensor.
    pub h: Option<SymmetricTensor>,
    /// A vector field (frame coefficients).
    pub e: Option<Vec<Scalar>>,
    /// A metric (symmetric covariant 2-tensor).
    pub g: Option<SymmetricTensor>,
    /// A one-form (dual-frame coefficients).
    pub theta: Option<Vec<Scalar>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    kind: String,
    #[serde(default)]
    base_vars: Vec<String>,
    rank: Option<usize>,
    anchor: Option<Vec<Vec<String>>>,
    #[serde(default)]
    bracket: Vec<RawTableEntry>,
    #[serde(default)]
    product: Vec<RawTableEntry>,
    #[serde(default)]
    christoffel: Vec<RawTableEntry>,
    phi0: Option<Vec<String>>,
    #[serde(default)]
    pi: Vec<RawPiEntry>,
    h: Option<Vec<Vec<String>>>,
    #[serde(rename = "E")]
    e: Option<Vec<String>>,
    g: Option<Vec<Vec<String>>>,
    theta: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableEntry {
    i: usize,
    j: usize,
    value: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiEntry {
    frames: Vec<usize>,
    value: String,
}

/// Translate a TOML deserialization error to a positioned parse error.
fn toml_error(src: &str, err: &toml::de::Error) -> Error {
    let (line, col) = match err.span() {
        Some(span) => {
            let prefix = &src[..span.start.min(src.len())];
            let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
            let col = prefix.len() - prefix.rfind('\n').map_or(0, |p| p + 1) + 1;
            (line, col)
        }
        None => (1, 1),
    };
    Error::Parse { line, col, msg: err.message().to_string() }
}

/// Prefix a scalar parse error with the field it occurred in.
fn in_field(field: &str, err: Error) -> Error {
    match err {
        Error::Parse { line, col, msg } => {
            Error::Parse { line, col, msg: format!("in {field}: {msg}") }
        }
        other => other,
    }
}

impl StructureFile {
    /// Parse a TOML document, validating shapes and every scalar literal.
    pub fn parse_str(src: &str) -> Result<StructureFile> {
        let raw: RawFile = toml::from_str(src).map_err(|e| toml_error(src, &e))?;
        let kind = Kind::from_str(&raw.kind)?;
        let nvars = raw.base_vars.len();

        // Resolve the rank: manifold kinds default to the dimension.
        let rank = match (raw.rank, kind.is_manifold()) {
            (Some(r), true) if r != nvars => {
                return Err(Error::Shape(format!(
                    "{} files have rank equal to the dimension {nvars}, not {r}",
                    kind.as_str()
                )))
            }
            (Some(r), _) => r,
            (None, true) => nvars,
            (None, false) => {
                return Err(Error::Shape("field `rank` is required for this kind".into()))
            }
        };
        if rank == 0 {
            return Err(Error::Shape(
                "rank must be at least 1 (manifold kinds need at least one coordinate)".into(),
            ));
        }

        // Reject tables that do not belong to the kind.
        if !raw.bracket.is_empty() && !kind.is_lie_like() {
            return Err(Error::Shape(format!(
                "`bracket` entries are only valid for lie/jacobi files, not {}",
                kind.as_str()
            )));
        }
        if !raw.product.is_empty() && !kind.is_lsa_like() {
            return Err(Error::Shape(format!(
                "`product` entries are only valid for lsa/jlsa files, not {}",
                kind.as_str()
            )));
        }
        if !raw.christoffel.is_empty() && !kind.is_manifold() {
            return Err(Error::Shape(format!(
                "`christoffel` entries are only valid for manifold files, not {}",
                kind.as_str()
            )));
        }
        if raw.anchor.is_some() && kind.is_manifold() {
            return Err(Error::Shape(
                "manifold files use the tangent bundle; `anchor` must be omitted".into(),
            ));
        }

        // The bundle determines the scalar context; build it first so all
        // literals parse over the declared coordinates.
        let probe = AnchoredBundle::new(
            raw.base_vars.clone(),
            rank.max(1),
            vec![vec![placeholder_zero(&raw.base_vars); rank.max(1)]; nvars],
        )?;
        let parse = |field: String, src_text: &str| -> Result<Scalar> {
            probe.parse_scalar(src_text).map_err(|e| in_field(&field, e))
        };

        let anchor: Vec<Vec<Scalar>> = match (&raw.anchor, kind.is_manifold()) {
            (Some(rows), false) => {
                if rows.len() != nvars || rows.iter().any(|r| r.len() != rank) {
                    return Err(Error::Shape(format!(
                        "anchor must have {nvars} rows of {rank} entries"
                    )));
                }
                let mut out = Vec::with_capacity(nvars);
                for (a, row) in rows.iter().enumerate() {
                    let mut or = Vec::with_capacity(rank);
                    for (i, s) in row.iter().enumerate() {
                        or.push(parse(format!("anchor[{a}][{i}]"), s)?);
                    }
                    out.push(or);
                }
                out
            }
            _ => {
                // Identity anchor: requires a square situation.
                if !kind.is_manifold() && rank != nvars {
                    return Err(Error::Shape(format!(
                        "anchor may be omitted only when rank ({rank}) equals the \
                         dimension ({nvars})"
                    )));
                }
                identity_anchor(&probe, nvars, rank)
            }
        };

        // Sparse table entries to a dense table.
        let raw_entries = match kind {
            Kind::Lie | Kind::Jacobi => &raw.bracket,
            Kind::Lsa | Kind::Jlsa => &raw.product,
            Kind::Manifold | Kind::JkvManifold => &raw.christoffel,
        };
        let table_name = match kind {
            Kind::Lie | Kind::Jacobi => "bracket",
            Kind::Lsa | Kind::Jlsa => "product",
            Kind::Manifold | Kind::JkvManifold => "christoffel",
        };
        let zero = placeholder_zero(&raw.base_vars);
        let mut table = vec![vec![vec![zero.clone(); rank]; rank]; rank];
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for entry in raw_entries {
            let (i, j) = (entry.i, entry.j);
            if i >= rank || j >= rank {
                return Err(Error::Shape(format!(
                    "{table_name} entry ({i},{j}) is out of range for rank {rank}"
                )));
            }
            if kind.is_lie_like() && i >= j {
                return Err(Error::Shape(format!(
                    "bracket entries use increasing frame pairs; ({i},{j}) is not"
                )));
            }
            if seen.contains(&(i, j)) {
                return Err(Error::Shape(format!(
                    "duplicate {table_name} entry for ({i},{j})"
                )));
            }
            seen.push((i, j));
            if entry.value.len() != rank {
                return Err(Error::Shape(format!(
                    "{table_name} entry ({i},{j}) must list {rank} components"
                )));
            }
            for (k, s) in entry.value.iter().enumerate() {
                let v = parse(format!("{table_name}[{i}][{j}][{k}]"), s)?;
                if kind.is_lie_like() {
                    table[j][i][k] = v.neg();
                }
                table[i][j][k] = v;
            }
        }

        let parse_vector = |name: &str, items: &[String]| -> Result<Vec<Scalar>> {
            if items.len() != rank {
                return Err(Error::Shape(format!(
                    "`{name}` must have {rank} components, found {}",
                    items.len()
                )));
            }
            items
                .iter()
                .enumerate()
                .map(|(k, s)| parse(format!("{name}[{k}]"), s))
                .collect()
        };
        let parse_matrix = |name: &str, rows: &[Vec<String>]| -> Result<SymmetricTensor> {
            if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                return Err(Error::Shape(format!("`{name}` must be a {rank}x{rank} matrix")));
            }
            let mut out = Vec::with_capacity(rank);
            for (i, row) in rows.iter().enumerate() {
                let mut or = Vec::with_capacity(rank);
                for (j, s) in row.iter().enumerate() {
                    or.push(parse(format!("{name}[{i}][{j}]"), s)?);
                }
                out.push(or);
            }
            SymmetricTensor::new(out)
                .map_err(|e| Error::Shape(format!("`{name}` is not symmetric: {e}")))
        };

        let phi0 = match &raw.phi0 {
            Some(items) => Some(parse_vector("phi0", items)?),
            None => None,
        };
        if phi0.is_none() && matches!(kind, Kind::Jacobi | Kind::Jlsa) {
            return Err(Error::Shape(format!(
                "{} files require the `phi0` covector",
                kind.as_str()
            )));
        }

        let pi = if raw.pi.is_empty() {
            None
        } else {
            let mut terms: Vec<(Vec<usize>, Scalar)> = Vec::new();
            for (n, entry) in raw.pi.iter().enumerate() {
                if entry.frames.len() != 2
                    || entry.frames[0] >= entry.frames[1]
                    || entry.frames[1] >= rank
                {
                    return Err(Error::Shape(format!(
                        "pi entry {n} must name an increasing frame pair below rank {rank}"
                    )));
                }
                if terms.iter().any(|(f, _)| f == &entry.frames) {
                    return Err(Error::Shape(format!(
                        "duplicate pi entry for frames {:?}",
                        entry.frames
                    )));
                }
                let v = parse(format!("pi[{n}]"), &entry.value)?;
                terms.push((entry.frames.clone(), v));
            }
            Some(Multivector::from_terms(probe.ctx(), rank, 2, terms))
        };

        let h = match &raw.h {
            Some(rows) => Some(parse_matrix("h", rows)?),
            None => None,
        };
        let g = match &raw.g {
            Some(rows) => Some(parse_matrix("g", rows)?),
            None => None,
        };
        let e = match &raw.e {
            Some(items) => Some(parse_vector("E", items)?),
            None => None,
        };
        let theta = match &raw.theta {
            Some(items) => Some(parse_vector("theta", items)?),
            None => None,
        };
        if kind == Kind::JkvManifold && (h.is_none() || e.is_none()) {
            return Err(Error::Shape(
                "jkv-manifold files require both `h` and `E`".into(),
            ));
        }

        Ok(StructureFile {
            kind,
            base_vars: raw.base_vars,
            rank,
            anchor,
            table,
            phi0,
            pi,
            h,
            e,
            g,
            theta,
        })
    }

    /// Render the canonical TOML form.  Emitted output reparses to a
    /// structurally identical file, and `emit ∘ parse` is a fixpoint.
    pub fn emit(&self) -> String {
        let vars = &self.base_vars;
        let render = |v: &Scalar| format!("\"{}\"", v.render(vars));
        let render_vec =
            |items: &[Scalar]| items.iter().map(&render).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        out.push_str(&format!("kind = \"{}\"\n", self.kind.as_str()));
        let quoted: Vec<String> = vars.iter().map(|v| format!("\"{v}\"")).collect();
        out.push_str(&format!("base_vars = [{}]\n", quoted.join(", ")));
        out.push_str(&format!("rank = {}\n", self.rank));
        if !self.kind.is_manifold() {
            let rows: Vec<String> =
                self.anchor.iter().map(|r| format!("[{}]", render_vec(r))).collect();
            out.push_str(&format!("anchor = [{}]\n", rows.join(", ")));
        }
        if let Some(phi0) = &self.phi0 {
            out.push_str(&format!("phi0 = [{}]\n", render_vec(phi0)));
        }
        if let Some(h) = &self.h {
            let rows: Vec<String> =
                h.matrix().iter().map(|r| format!("[{}]", render_vec(r))).collect();
            out.push_str(&format!("h = [{}]\n", rows.join(", ")));
        }
        if let Some(e) = &self.e {
            out.push_str(&format!("E = [{}]\n", render_vec(e)));
        }
        if let Some(g) = &self.g {
            let rows: Vec<String> =
                g.matrix().iter().map(|r| format!("[{}]", render_vec(r))).collect();
            out.push_str(&format!("g = [{}]\n", rows.join(", ")));
        }
        if let Some(theta) = &self.theta {
            out.push_str(&format!("theta = [{}]\n", render_vec(theta)));
        }
        let table_name = match self.kind {
            Kind::Lie | Kind::Jacobi => "bracket",
            Kind::Lsa | Kind::Jlsa => "product",
            Kind::Manifold | Kind::JkvManifold => "christoffel",
        };
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.kind.is_lie_like() && i >= j {
                    continue;
                }
                if self.table[i][j].iter().all(Scalar::is_zero) {
                    continue;
                }
                out.push_str(&format!("\n[[{table_name}]]\ni = {i}\nj = {j}\n"));
                out.push_str(&format!("value = [{}]\n", render_vec(&self.table[i][j])));
            }
        }
        if let Some(pi) = &self.pi {
            for (idx, v) in pi.terms() {
                out.push_str(&format!(
                    "\n[[pi]]\nframes = [{}, {}]\nvalue = {}\n",
                    idx[0],
                    idx[1],
                    render(v)
                ));
            }
        }
        out
    }

    /// The anchored bundle the file describes.
    pub fn bundle(&self) -> Result<AnchoredBundle> {
        AnchoredBundle::new(self.base_vars.clone(), self.rank, self.anchor.clone())
    }

    /// Build the described structure.  Fails on shape problems or — for
    /// manifold kinds — when the patch is not flat and torsion-free;
    /// defining equations of the other kinds are *not* enforced here (run
    /// [`StructureFile::checks`] for those).
    pub fn build(&self) -> Result<Structure> {
        match self.kind {
            Kind::Lie => Ok(Structure::Lie(self.build_lie()?)),
            Kind::Lsa => Ok(Structure::Lsa(self.build_lsa()?)),
            Kind::Jacobi => {
                let lie = self.build_lie()?;
                let phi0 = self.phi0.clone().expect("validated at parse");
                Ok(Structure::Jacobi(JacobiAlgebroid::new_unvalidated(lie, phi0)))
            }
            Kind::Jlsa => {
                let lsa = self.build_lsa()?;
                let phi0 = self.phi0.clone().expect("validated at parse");
                Ok(Structure::Jlsa(JacobiLSA::new_unvalidated(lsa, phi0)?))
            }
            Kind::Manifold => Ok(Structure::Manifold(self.build_patch()?)),
            Kind::JkvManifold => Ok(Structure::JkvManifold(self.build_patch()?)),
        }
    }

    fn build_lie(&self) -> Result<LieAlgebroid> {
        LieAlgebroid::new_unvalidated(self.bundle()?, self.table.clone())
    }

    fn build_lsa(&self) -> Result<LeftSymmetricAlgebroid> {
        LeftSymmetricAlgebroid::new_unvalidated(self.bundle()?, self.table.clone())
    }

    fn build_patch(&self) -> Result<AffinePatch> {
        AffinePatch::new(&self.base_vars, self.table.clone())
    }

    /// The candidate pair of a `jkv-manifold` file.
    pub fn jkv_pair(&self) -> Result<JKVPair> {
        match (&self.h, &self.e) {
            (Some(h), Some(e)) => JKVPair::new(h.clone(), e.clone()),
            _ => Err(Error::Unsupported(
                "this file carries no (h, E) pair".into(),
            )),
        }
    }

    /// Run the defining equations of the described structure as named
    /// checks: axioms for the algebroid kinds, the cocycle condition for
    /// twisted kinds, flatness/torsion-freeness for manifold kinds, and
    /// the closure condition of each attached tensor (`pi` → poisson or
    /// jacobi, `h` → kv or jkv, pair → the three coordinate families).
    /// Structural failures become failing checks, never panics.
    pub fn checks(&self) -> Vec<CheckReport> {
        let vars = &self.base_vars;
        let mut out = Vec::new();
        match self.kind {
            Kind::Lie | Kind::Jacobi => {
                let lie = match self.build_lie() {
                    Ok(l) => l,
                    Err(e) => return vec![CheckReport::fail_with_reason("build", &e.to_string())],
                };
                out.push(CheckReport::from_defects("lie-axioms", vars, lie.axiom_defects()));
                if self.kind == Kind::Jacobi {
                    let j = JacobiAlgebroid::new_unvalidated(
                        lie.clone(),
                        self.phi0.clone().expect("validated at parse"),
                    );
                    out.push(CheckReport::from_defects("cocycle", vars, j.cocycle_defects()));
                    if let Some(pi) = &self.pi {
                        let defects = multivector_defects("twisted-schouten", &j.jacobi_defect(pi));
                        out.push(CheckReport::from_defects("jacobi", vars, defects));
                    }
                } else if let Some(pi) = &self.pi {
                    let defects = multivector_defects("schouten", &poisson_defect(&lie, pi));
                    out.push(CheckReport::from_defects("poisson", vars, defects));
                }
            }
            Kind::Lsa | Kind::Jlsa => {
                let lsa = match self.build_lsa() {
                    Ok(s) => s,
                    Err(e) => return vec![CheckReport::fail_with_reason("build", &e.to_string())],
                };
                out.push(CheckReport::from_defects("lsa-axioms", vars, lsa.axiom_defects()));
                if self.kind == Kind::Jlsa {
                    let j = match JacobiLSA::new_unvalidated(
                        lsa.clone(),
                        self.phi0.clone().expect("validated at parse"),
                    ) {
                        Ok(j) => j,
                        Err(e) => {
                            out.push(CheckReport::fail_with_reason("build", &e.to_string()));
                            return out;
                        }
                    };
                    out.push(CheckReport::from_defects(
                        "cocycle-symmetry",
                        vars,
                        j.cocycle_defects(),
                    ));
                    if let Some(h) = &self.h {
                        out.push(CheckReport::from_defects(
                            "jkv",
                            vars,
                            jkv_bracket_defects(&j, h),
                        ));
                    }
                } else if let Some(h) = &self.h {
                    out.push(CheckReport::from_defects("kv", vars, kv_bracket_defects(&lsa, h)));
                }
            }
            Kind::Manifold | Kind::JkvManifold => {
                let tangent = match LieAlgebroid::tangent(&self.base_vars) {
                    Ok(t) => t,
                    Err(e) => return vec![CheckReport::fail_with_reason("build", &e.to_string())],
                };
                let conn = match Connection::new(tangent, self.table.clone()) {
                    Ok(c) => c,
                    Err(e) => return vec![CheckReport::fail_with_reason("build", &e.to_string())],
                };
                out.push(CheckReport::from_defects("torsion", vars, conn.torsion_defects()));
                out.push(CheckReport::from_defects("curvature", vars, conn.curvature_defects()));
                if !out.iter().all(CheckReport::passed) {
                    return out;
                }
                let patch = self.build_patch().expect("flatness just verified");
                if self.kind == Kind::JkvManifold {
                    match self.jkv_pair() {
                        Ok(pair) => out.push(CheckReport::from_defects(
                            "jkv-manifold",
                            vars,
                            jkv_manifold_defects(&patch, &pair),
                        )),
                        Err(e) => {
                            out.push(CheckReport::fail_with_reason("jkv-manifold", &e.to_string()))
                        }
                    }
                } else {
                    if let Some(h) = &self.h {
                        out.push(CheckReport::from_defects(
                            "kv-codazzi",
                            vars,
                            kv_manifold_defects(&patch, h),
                        ));
                    }
                    if let Some(g) = &self.g {
                        out.push(CheckReport::from_defects(
                            "codazzi",
                            vars,
                            patch.connection().codazzi_defects(g.matrix()),
                        ));
                        if let Some(theta) = &self.theta {
                            out.push(CheckReport::from_defects(
                                "semi-weyl",
                                vars,
                                semi_weyl_defects(&patch, g, theta),
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Compute one named defect family.  The fixed name table:
    ///
    /// | name              | kinds           | requires | meaning                              |
    /// |-------------------|-----------------|----------|--------------------------------------|
    /// | `axioms`          | lie/jacobi/lsa/jlsa | —    | bracket or product axioms            |
    /// | `cocycle`         | jacobi/jlsa     | —        | twist closure / coboundary symmetry  |
    /// | `poisson`         | lie/jacobi      | `pi`     | untwisted self-bracket of `pi`       |
    /// | `jacobi`          | jacobi          | `pi`     | twisted self-bracket of `pi`         |
    /// | `jacobi-pair`     | lie             | `pi`,`E` | pair conditions for `(pi, E)`        |
    /// | `kv`              | lsa/jlsa        | `h`      | untwisted five-term bracket of `h`   |
    /// | `jkv`             | jlsa            | `h`      | twisted five-term bracket of `h`     |
    /// | `codazzi`         | manifold        | `g`      | symmetry of `∇g`                     |
    /// | `kv-codazzi`      | manifold        | `h`      | sharpened symmetry of `∇h`           |
    /// | `semi-weyl`       | manifold        | `g`,`theta` | symmetry of `∇g + θ⊗g`            |
    /// | `dual-connection` | manifold        | `g`      | Codazzi + torsion of the dual        |
    /// | `jkv-manifold`    | jkv-manifold    | —        | the three coordinate families        |
    /// | `pack-equivalence`| jkv-manifold    | —        | packed bracket + coordinate families |
    /// | `lch`             | jkv-manifold    | —        | semi-Weyl + `dθ` for `g = h⁻¹`       |
    ///
    /// Unknown names and kind/field mismatches return
    /// [`Error::Unsupported`].
    pub fn defect(&self, name: &str) -> Result<CheckReport> {
        let vars = &self.base_vars;
        let unsupported = |msg: String| -> Result<CheckReport> { Err(Error::Unsupported(msg)) };
        match name {
            "axioms" => match self.kind {
                Kind::Lie | Kind::Jacobi => Ok(CheckReport::from_defects(
                    "axioms",
                    vars,
                    self.build_lie()?.axiom_defects(),
                )),
                Kind::Lsa | Kind::Jlsa => Ok(CheckReport::from_defects(
                    "axioms",
                    vars,
                    self.build_lsa()?.axiom_defects(),
                )),
                _ => unsupported("`axioms` applies to lie/lsa/jacobi/jlsa files".into()),
            },
            "cocycle" => match self.kind {
                Kind::Jacobi => {
                    let j = self.jacobi()?;
                    Ok(CheckReport::from_defects("cocycle", vars, j.cocycle_defects()))
                }
                Kind::Jlsa => {
                    let j = self.jlsa()?;
                    Ok(CheckReport::from_defects("cocycle", vars, j.cocycle_defects()))
                }
                _ => unsupported("`cocycle` applies to jacobi/jlsa files".into()),
            },
            "poisson" => {
                let pi = self.require_pi()?;
                let lie = match self.kind {
                    Kind::Lie => self.build_lie()?,
                    Kind::Jacobi => self.build_lie()?,
                    _ => return unsupported("`poisson` applies to lie/jacobi files".into()),
                };
                let defects = multivector_defects("schouten", &poisson_defect(&lie, pi));
                Ok(CheckReport::from_defects("poisson", vars, defects))
            }
            "jacobi" => {
                if self.kind != Kind::Jacobi {
                    return unsupported("`jacobi` applies to jacobi files".into());
                }
                let pi = self.require_pi()?;
                let j = self.jacobi()?;
                let defects = multivector_defects("twisted-schouten", &j.jacobi_defect(pi));
                Ok(CheckReport::from_defects("jacobi", vars, defects))
            }
            "jacobi-pair" => {
                if self.kind != Kind::Lie {
                    return unsupported("`jacobi-pair` applies to lie files".into());
                }
                let pi = self.require_pi()?.clone();
                let e = self
                    .e
                    .clone()
                    .ok_or_else(|| Error::Unsupported("`jacobi-pair` requires `E`".into()))?;
                let lie = self.build_lie()?;
                let pair = JacobiPair { lambda: pi, e };
                Ok(CheckReport::from_defects(
                    "jacobi-pair",
                    vars,
                    jacobi_pair_defects(&lie, &pair),
                ))
            }
            "kv" => {
                let h = self.require_h()?;
                let lsa = match self.kind {
                    Kind::Lsa | Kind::Jlsa => self.build_lsa()?,
                    _ => return unsupported("`kv` applies to lsa/jlsa files".into()),
                };
                Ok(CheckReport::from_defects("kv", vars, kv_bracket_defects(&lsa, h)))
            }
            "jkv" => {
                if self.kind != Kind::Jlsa {
                    return unsupported("`jkv` applies to jlsa files".into());
                }
                let h = self.require_h()?;
                let j = self.jlsa()?;
                Ok(CheckReport::from_defects("jkv", vars, jkv_bracket_defects(&j, h)))
            }
            "codazzi" => {
                let patch = self.require_manifold()?;
                let g = self.require_g()?;
                Ok(CheckReport::from_defects(
                    "codazzi",
                    vars,
                    patch.connection().codazzi_defects(g.matrix()),
                ))
            }
            "kv-codazzi" => {
                let patch = self.require_manifold()?;
                let h = self.require_h()?;
                Ok(CheckReport::from_defects(
                    "kv-codazzi",
                    vars,
                    kv_manifold_defects(&patch, h),
                ))
            }
            "semi-weyl" => {
                let patch = self.require_manifold()?;
                let g = self.require_g()?;
                let theta = self
                    .theta
                    .as_ref()
                    .ok_or_else(|| Error::Unsupported("`semi-weyl` requires `theta`".into()))?;
                Ok(CheckReport::from_defects(
                    "semi-weyl",
                    vars,
                    semi_weyl_defects(&patch, g, theta),
                ))
            }
            "dual-connection" => {
                let patch = self.require_manifold()?;
                let g = self.require_g()?;
                Ok(CheckReport::from_defects(
                    "dual-connection",
                    vars,
                    dual_connection_report(&patch, g)?,
                ))
            }
            "jkv-manifold" => {
                let patch = self.require_manifold()?;
                let pair = self.jkv_pair()?;
                Ok(CheckReport::from_defects(
                    "jkv-manifold",
                    vars,
                    jkv_manifold_defects(&patch, &pair),
                ))
            }
            "pack-equivalence" => {
                let patch = self.require_manifold()?;
                let pair = self.jkv_pair()?;
                Ok(CheckReport::from_defects(
                    "pack-equivalence",
                    vars,
                    jkv_equivalence_report(&patch, &pair)?,
                ))
            }
            "lch" => {
                let patch = self.require_manifold()?;
                let pair = self.jkv_pair()?;
                Ok(CheckReport::from_defects("lch", vars, lch_report(&patch, &pair)?))
            }
            other => unsupported(format!(
                "unknown defect name `{other}`; see the documented defect table"
            )),
        }
    }

    fn jacobi(&self) -> Result<JacobiAlgebroid> {
        Ok(JacobiAlgebroid::new_unvalidated(
            self.build_lie()?,
            self.phi0.clone().expect("validated at parse"),
        ))
    }

    fn jlsa(&self) -> Result<JacobiLSA> {
        JacobiLSA::new_unvalidated(self.build_lsa()?, self.phi0.clone().expect("validated"))
    }

    fn require_pi(&self) -> Result<&Multivector> {
        self.pi
            .as_ref()
            .ok_or_else(|| Error::Unsupported("this defect requires the `pi` field".into()))
    }

    fn require_h(&self) -> Result<&SymmetricTensor> {
        self.h
            .as_ref()
            .ok_or_else(|| Error::Unsupported("this defect requires the `h` field".into()))
    }

    fn require_g(&self) -> Result<&SymmetricTensor> {
        self.g
            .as_ref()
            .ok_or_else(|| Error::Unsupported("this defect requires the `g` field".into()))
    }

    fn require_manifold(&self) -> Result<AffinePatch> {
        if !self.kind.is_manifold() {
            return Err(Error::Unsupported(
                "this defect applies to manifold/jkv-manifold files".into(),
            ));
        }
        self.build_patch()
    }

    /// Describe a Lie algebroid as a structure file.
    pub fn from_lie(l: &LieAlgebroid) -> StructureFile {
        let r = l.rank();
        let mut table = vec![vec![vec![Scalar::zero(l.ctx()); r]; r]; r];
        for (i, plane) in table.iter_mut().enumerate() {
            for (j, row) in plane.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = l.structure_constant(i, j, k).clone();
                }
            }
        }
        StructureFile {
            kind: Kind::Lie,
            base_vars: l.bundle().vars().to_vec(),
            rank: r,
            anchor: l.bundle().anchor_rows().to_vec(),
            table,
            phi0: None,
            pi: None,
            h: None,
            e: None,
            g: None,
            theta: None,
        }
    }

    /// Describe a left-symmetric algebroid as a structure file.
    pub fn from_lsa(s: &LeftSymmetricAlgebroid) -> StructureFile {
        let r = s.rank();
        let mut table = vec![vec![vec![Scalar::zero(s.ctx()); r]; r]; r];
        for (i, plane) in table.iter_mut().enumerate() {
            for (j, row) in plane.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = s.product_constant(i, j, k).clone();
                }
            }
        }
        StructureFile {
            kind: Kind::Lsa,
            base_vars: s.bundle().vars().to_vec(),
            rank: r,
            anchor: s.bundle().anchor_rows().to_vec(),
            table,
            phi0: None,
            pi: None,
            h: None,
            e: None,
            g: None,
            theta: None,
        }
    }

    /// Describe a twisted Lie algebroid as a structure file.
    pub fn from_jacobi(j: &JacobiAlgebroid) -> StructureFile {
        let mut sf = StructureFile::from_lie(j.lie());
        sf.kind = Kind::Jacobi;
        sf.phi0 = Some(j.phi0().to_vec());
        sf
    }

    /// Describe a twisted left-symmetric algebroid as a structure file.
    pub fn from_jlsa(j: &JacobiLSA) -> StructureFile {
        let mut sf = StructureFile::from_lsa(j.lsa());
        sf.kind = Kind::Jlsa;
        sf.phi0 = Some(j.phi0().to_vec());
        sf
    }

    /// Attach a 2-section (builder style, for emitting derived files).
    pub fn with_pi(mut self, pi: Multivector) -> StructureFile {
        self.pi = Some(pi);
        self
    }

    /// Attach a symmetric contravariant 2-tensor.
    pub fn with_h(mut self, h: SymmetricTensor) -> StructureFile {
        self.h = Some(h);
        self
    }
}

/// Zero scalar over the context the variable list implies.
fn placeholder_zero(vars: &[String]) -> Scalar {
    let has_t = vars.last().map(|s| s == "t").unwrap_or(false);
    let ctx = if has_t {
        crate::scalar::Ctx::with_line(vars.len())
    } else {
        crate::scalar::Ctx::new(vars.len())
    };
    Scalar::zero(ctx)
}

fn identity_anchor(probe: &AnchoredBundle, nvars: usize, rank: usize) -> Vec<Vec<Scalar>> {
    let ctx = probe.ctx();
    (0..nvars)
        .map(|a| {
            (0..rank)
                .map(|i| if a == i { Scalar::one(ctx) } else { Scalar::zero(ctx) })
                .collect()
        })
        .collect()
}

/// Label the nonzero components of a multivector defect.
fn multivector_defects(name: &str, defect: &Multivector) -> Vec<(String, Scalar)> {
    defect
        .terms()
        .filter(|(_, v)| !v.is_zero())
        .map(|(idx, v)| (format!("{name} on {}", frame_tag(idx)), v.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTACT_LIE: &str = r#"
kind = "lie"
base_vars = ["x", "y", "z"]
rank = 3

[[pi]]
frames = [0, 1]
value = "1"

[[pi]]
frames = [1, 2]
value = "-1*y"
"#;

    const JKV_1D: &str = r#"
kind = "jkv-manifold"
base_vars = ["x"]
h = [["-1*x"]]
E = ["1"]
"#;

    #[test]
    fn minimal_tangent_file_parses_with_an_identity_anchor() {
        let sf = StructureFile::parse_str(
            "kind = \"lie\"\nbase_vars = [\"x\"]\nrank = 1\n",
        )
        .unwrap();
        assert_eq!(sf.kind, Kind::Lie);
        assert_eq!(sf.rank, 1);
        assert!(sf.anchor[0][0].is_one());
        let Structure::Lie(lie) = sf.build().unwrap() else {
            panic!("expected a lie structure")
        };
        assert!(lie.axiom_defects().is_empty());
    }

    #[test]
    fn jkv_manifold_file_round_trips_through_the_checks_to_all_zero() {
        let sf = StructureFile::parse_str(JKV_1D).unwrap();
        assert_eq!(sf.kind, Kind::JkvManifold);
        assert_eq!(sf.rank, 1);
        let checks = sf.checks();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["torsion", "curvature", "jkv-manifold"]);
        assert!(checks.iter().all(CheckReport::passed));
        for name in ["jkv-manifold", "pack-equivalence", "lch"] {
            assert!(sf.defect(name).unwrap().passed(), "defect {name} must pass");
        }
    }

    #[test]
    fn malformed_exponent_is_a_positioned_syntax_error() {
        let src = "kind = \"lie\"\nbase_vars = [\"x\", \"t\"]\nrank = 2\n\
                   anchor = [[\"1\", \"0\"], [\"0\", \"exp(x*t)\"]]\n";
        let err = StructureFile::parse_str(src).unwrap_err();
        match err {
            Error::Parse { msg, .. } => {
                assert!(msg.contains("anchor[1][1]"), "message names the field: {msg}");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn toml_level_errors_carry_line_and_column() {
        let err = StructureFile::parse_str("kind = \"lie\"\nrank = [1]\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_and_missing_fields_are_rejected() {
        let err =
            StructureFile::parse_str("kind = \"weird\"\nbase_vars = []\nrank = 1\n").unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        let err = StructureFile::parse_str("kind = \"lie\"\nbase_vars = [\"x\"]\n").unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let err = StructureFile::parse_str(
            "kind = \"jacobi\"\nbase_vars = [\"x\"]\nrank = 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let err = StructureFile::parse_str(
            "kind = \"jkv-manifold\"\nbase_vars = [\"x\"]\nh = [[\"1\"]]\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn wrong_kind_tables_and_bad_indices_are_rejected() {
        let err = StructureFile::parse_str(
            "kind = \"lsa\"\nbase_vars = [\"x\"]\nrank = 1\n\n[[bracket]]\ni = 0\nj = 0\nvalue = [\"1\"]\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let err = StructureFile::parse_str(
            "kind = \"lie\"\nbase_vars = [\"x\"]\nrank = 1\n\n[[bracket]]\ni = 0\nj = 0\nvalue = [\"1\"]\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)), "diagonal bracket entry must be rejected");
        let err = StructureFile::parse_str(
            "kind = \"manifold\"\nbase_vars = [\"x\"]\nanchor = [[\"1\"]]\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)), "manifold files must not carry anchors");
    }

    #[test]
    fn contact_file_fails_poisson_but_passes_the_pair_check() {
        let mut sf = StructureFile::parse_str(CONTACT_LIE).unwrap();
        // π alone is not Poisson on this patch…
        assert!(!sf.defect("poisson").unwrap().passed());
        // …but together with E = ∂z it is a valid pair.
        sf.e = Some(sf.build_lie().unwrap().parse_section(&["0", "0", "1"]).unwrap());
        assert!(sf.defect("jacobi-pair").unwrap().passed());
    }

    #[test]
    fn emit_parse_is_a_fixpoint_and_preserves_structure() {
        for src in [CONTACT_LIE, JKV_1D] {
            let first = StructureFile::parse_str(src).unwrap();
            let emitted = first.emit();
            let second = StructureFile::parse_str(&emitted).unwrap();
            assert_eq!(second.kind, first.kind);
            assert_eq!(second.base_vars, first.base_vars);
            assert_eq!(second.rank, first.rank);
            assert_eq!(second.anchor, first.anchor);
            assert_eq!(second.table, first.table);
            assert_eq!(
                second.emit(),
                emitted,
                "emit of a reparsed file must be byte-identical"
            );
        }
    }

    #[test]
    fn sparse_bracket_entries_fill_both_triangles() {
        let src = "kind = \"lie\"\nbase_vars = []\nrank = 3\nanchor = []\n\n\
                   [[bracket]]\ni = 0\nj = 1\nvalue = [\"0\", \"0\", \"1\"]\n";
        let sf = StructureFile::parse_str(src).unwrap();
        assert!(sf.table[0][1][2].is_one());
        assert_eq!(sf.table[1][0][2], sf.table[0][1][2].neg());
        // Lie axioms fail for this table (it is not a Lie algebra:
        // [e0,e1] = e2 with all other brackets zero is actually nilpotent
        // and valid — Heisenberg — so axioms pass).
        let checks = sf.checks();
        assert!(checks.iter().all(CheckReport::passed));
    }

    #[test]
    fn named_defects_reject_wrong_kinds_and_missing_fields() {
        let sf = StructureFile::parse_str(JKV_1D).unwrap();
        assert!(matches!(sf.defect("poisson"), Err(Error::Unsupported(_))));
        assert!(matches!(sf.defect("nonsense"), Err(Error::Unsupported(_))));
        let lie = StructureFile::parse_str(
            "kind = \"lie\"\nbase_vars = [\"x\"]\nrank = 1\n",
        )
        .unwrap();
        assert!(matches!(lie.defect("poisson"), Err(Error::Unsupported(_))));
        assert!(matches!(lie.defect("lch"), Err(Error::Unsupported(_))));
    }

    #[test]
    fn from_constructors_round_trip_through_emit_and_parse() {
        let lie = LieAlgebroid::tangent(&["x", "y"]).unwrap();
        let sf = StructureFile::from_lie(&lie);
        let reparsed = StructureFile::parse_str(&sf.emit()).unwrap();
        assert_eq!(reparsed.kind, Kind::Lie);
        assert_eq!(reparsed.base_vars, ["x", "y"]);
        let Structure::Lie(rebuilt) = reparsed.build().unwrap() else {
            panic!("expected lie")
        };
        assert!(rebuilt.axiom_defects().is_empty());
        assert_eq!(rebuilt.bundle(), lie.bundle());
    }

    #[test]
    fn manifold_checks_stop_at_a_curved_connection() {
        let src = "kind = \"manifold\"\nbase_vars = [\"x\", \"y\"]\n\n\
                   [[christoffel]]\ni = 0\nj = 1\nvalue = [\"y\", \"0\"]\n\n\
                   [[christoffel]]\ni = 1\nj = 0\nvalue = [\"y\", \"0\"]\n";
        let sf = StructureFile::parse_str(src).unwrap();
        let checks = sf.checks();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["torsion", "curvature"]);
        assert!(checks[0].passed());
        assert!(!checks[1].passed());
        assert!(matches!(sf.build(), Err(Error::Invalid(_))));
    }

    #[test]
    fn jlsa_file_checks_report_twisted_bracket_closure() {
        // Emit the twisted structure of the 1-D chart together with the
        // packed tensor of its pair, reparse, and run the checks.
        let patch = AffinePatch::flat(&["x"]).unwrap();
        let jlsa = crate::manifold::bar_nabla_jlsa(&patch).unwrap();
        let ctx = patch.ctx();
        let h = SymmetricTensor::new(vec![vec![patch
            .algebroid()
            .bundle()
            .parse_scalar("-1*x")
            .unwrap()]])
        .unwrap();
        let pair = JKVPair::new(h, vec![Scalar::one(ctx)]).unwrap();
        let packed = crate::manifold::pack_tensor(&pair).unwrap();
        let sf = StructureFile::from_jlsa(&jlsa).with_h(packed);
        let reparsed = StructureFile::parse_str(&sf.emit()).unwrap();
        let checks = reparsed.checks();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["lsa-axioms", "cocycle-symmetry", "jkv"]);
        assert!(checks.iter().all(CheckReport::passed));
        // The untwisted bracket of the same tensor does not close.
        assert!(!reparsed.defect("kv").unwrap().passed());
    }
}
