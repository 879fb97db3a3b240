//! Deterministic check reports.
//!
//! Every verification in this crate produces labeled nonzero defect
//! components; this module packages them into named checks with pass/fail
//! verdicts and renders whole documents as stable structured text or JSON.
//! Rendering is deterministic: checks appear in execution order, defect
//! entries in the order the computation produced them (all defect loops in
//! this crate iterate in a fixed frame order), and scalar values are
//! rendered in the canonical literal grammar.  Identical inputs therefore
//! produce byte-identical documents, which makes report diffs meaningful
//! in version control and lets a test assert determinism by comparing two
//! runs.  Each document carries an FNV-1a content fingerprint of the input
//! description so a report can be matched to what produced it.

use crate::scalar::Scalar;
use serde::Serialize;

/// One nonzero defect component: the slot where a required-zero expression
/// failed to vanish, and its value in the scalar literal grammar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefectEntry {
    /// Which component of which identity is nonzero.
    pub label: String,
    /// The offending value, rendered exactly.
    pub value: String,
}

/// The verdict of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Every required-zero component normalized to literal zero.
    Pass,
    /// At least one component is nonzero; the entries list all of them.
    Fail,
}

/// One named check: a verdict plus every nonzero defect component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    /// The check's stable name.
    pub name: String,
    /// Pass exactly when `defects` is empty.
    pub verdict: Verdict,
    /// All nonzero components, in computation order.
    pub defects: Vec<DefectEntry>,
}

impl CheckReport {
    /// Package a defect list under a name, rendering values against the
    /// given coordinate names.  An empty list is a pass.
    pub fn from_defects<S: AsRef<str>>(
        name: &str,
        vars: &[S],
        defects: Vec<(String, Scalar)>,
    ) -> CheckReport {
        let entries: Vec<DefectEntry> = defects
            .into_iter()
            .map(|(label, v)| DefectEntry { label, value: v.render(vars) })
            .collect();
        let verdict = if entries.is_empty() { Verdict::Pass } else { Verdict::Fail };
        CheckReport { name: name.to_string(), verdict, defects: entries }
    }

    /// A check that passed with nothing to report.
    pub fn pass(name: &str) -> CheckReport {
        CheckReport { name: name.to_string(), verdict: Verdict::Pass, defects: Vec::new() }
    }

    /// A check that failed for a structural reason (for example a
    /// construction that returned an error before any defect could be
    /// computed); the reason is recorded as a single pseudo-defect.
    pub fn fail_with_reason(name: &str, reason: &str) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            verdict: Verdict::Fail,
            defects: vec![DefectEntry { label: "error".to_string(), value: reason.to_string() }],
        }
    }

    /// Whether the verdict is a pass.
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// A complete report: an input fingerprint and the checks in execution
/// order.  Identical inputs produce identical documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    /// FNV-1a 64 fingerprint of the input description, as
    /// `fnv1a64:<16 hex digits>`.  A content label, not a cryptographic
    /// commitment.
    pub digest: String,
    /// Every executed check, in order.
    pub checks: Vec<CheckReport>,
}

impl ReportDocument {
    /// Assemble a document over a description of the input (file contents,
    /// or a canonical parameter string for generated suites).
    pub fn new(input_description: &str, checks: Vec<CheckReport>) -> ReportDocument {
        ReportDocument {
            digest: format!("fnv1a64:{:016x}", fnv1a64(input_description.as_bytes())),
            checks,
        }
    }

    /// Whether every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    /// Render as structured text with a stable key order: one `digest`
    /// line, a `checks` count, then per check a `check`/`verdict` pair
    /// followed by its indented defect entries.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("digest: {}\n", self.digest));
        out.push_str(&format!("checks: {}\n", self.checks.len()));
        for check in &self.checks {
            out.push_str(&format!("check: {}\n", check.name));
            let verdict = match check.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
            };
            out.push_str(&format!("verdict: {verdict}\n"));
            if !check.defects.is_empty() {
                out.push_str(&format!("defects: {}\n", check.defects.len()));
                for entry in &check.defects {
                    out.push_str(&format!("  {} = {}\n", entry.label, entry.value));
                }
            }
        }
        out
    }

    /// Render as pretty-printed JSON with the same deterministic order.
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// The 64-bit FNV-1a hash of a byte string: a fast, deterministic content
/// fingerprint (not collision-resistant against adversaries).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Ctx, Scalar};

    fn sample() -> ReportDocument {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        let defects = vec![("codazzi(e0,e1) on e1".to_string(), x)];
        ReportDocument::new(
            "sample input",
            vec![
                CheckReport::pass("lie-axioms"),
                CheckReport::from_defects("codazzi", &["x", "y"], defects),
            ],
        )
    }

    #[test]
    fn verdicts_follow_defect_emptiness() {
        let doc = sample();
        assert!(doc.checks[0].passed());
        assert!(!doc.checks[1].passed());
        assert!(!doc.all_passed());
        assert_eq!(doc.checks[1].defects[0].value, "x");
    }

    #[test]
    fn fnv1a64_matches_the_reference_vectors() {
        // Published FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn text_rendering_is_stable_and_structured() {
        let text = sample().render_text();
        let expect = "digest: fnv1a64:f1ae3f1baf1da43b\n\
                      checks: 2\n\
                      check: lie-axioms\n\
                      verdict: pass\n\
                      check: codazzi\n\
                      verdict: fail\n\
                      defects: 1\n\
                      \x20 codazzi(e0,e1) on e1 = x\n";
        assert_eq!(text, expect);
    }

    #[test]
    fn identical_inputs_render_byte_identical_documents() {
        let a = sample();
        let b = sample();
        assert_eq!(a.render_text(), b.render_text());
        assert_eq!(a.render_json(), b.render_json());
    }

    #[test]
    fn json_rendering_parses_back_with_the_same_fields() {
        let doc = sample();
        let json = doc.render_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["digest"], doc.digest.as_str());
        assert_eq!(parsed["checks"][0]["name"], "lie-axioms");
        assert_eq!(parsed["checks"][0]["verdict"], "pass");
        assert_eq!(parsed["checks"][1]["verdict"], "fail");
        assert_eq!(
            parsed["checks"][1]["defects"][0]["label"],
            "codazzi(e0,e1) on e1"
        );
    }

    #[test]
    fn structural_failures_are_reported_as_pseudo_defects() {
        let check = CheckReport::fail_with_reason("dualize", "singular matrix: 2x2");
        assert!(!check.passed());
        assert_eq!(check.defects.len(), 1);
        assert_eq!(check.defects[0].label, "error");
    }
}
