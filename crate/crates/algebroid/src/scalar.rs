//! The exact scalar ring.
//!
//! Every coefficient in this crate is a [`Scalar`]: a reduced fraction
//! `num / den` where
//!
//! * `num` is an [`ExpPoly`] — a finite sum of *bands* `p_k(x) · e^{k·t}`
//!   indexed by integers `k`, each `p_k` a sparse multivariate polynomial
//!   with arbitrary-precision rational coefficients;
//! * `den` is a nonzero, exponential-free, *monic* polynomial (leading
//!   coefficient 1 under graded-lexicographic order) that shares no factor
//!   with the content of the numerator.
//!
//! The line variable `t`, when present, is always the **last** variable of
//! the context, and it is the only variable that may appear in exponential
//! bands.  Differentiation with respect to it follows the band rule
//! `∂t (p · e^{k·t}) = (∂t p + k·p) · e^{k·t}`.
//!
//! Because the representation is canonical (reduced, monic denominator, no
//! zero terms or bands), structural equality *is* mathematical equality and
//! [`Scalar::is_zero`] is an exact decision procedure.  Every defect
//! certificate in the crate bottoms out here.
//!
//! Division is exact and partial: only exponential-free, nonzero scalars
//! may divide (the ring is not a field in the `t` direction).  All other
//! operations are total on matching contexts; mixing scalars from different
//! contexts is a programming error and panics.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

/// Variable context a scalar lives over: the number of base variables and
/// whether the last one is the distinguished line variable `t`.
///
/// Contexts are tiny and copyable; every [`Scalar`] carries one, and the
/// arithmetic asserts that both operands agree.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Hash)]
pub struct Ctx {
    /// Total number of variables, including `t` when present.
    pub nvars: usize,
    /// Whether the last variable is the line variable `t` (the one carried
    /// by exponential bands).
    pub has_t: bool,
}

impl Ctx {
    /// A context with `nvars` ordinary variables and no line variable.
    pub fn new(nvars: usize) -> Ctx {
        Ctx { nvars, has_t: false }
    }

    /// A context whose last variable is the line variable `t`.
    pub fn with_line(nvars: usize) -> Ctx {
        assert!(nvars >= 1, "a line context needs at least the variable t");
        Ctx { nvars, has_t: true }
    }

    /// Index of the line variable, if this context has one.
    pub fn line_var(&self) -> Option<usize> {
        if self.has_t {
            Some(self.nvars - 1)
        } else {
            None
        }
    }
}

/// Convenience constructor for an arbitrary-precision rational.
pub fn rat(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "rational with zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

/// Exponent vector of a monomial.  Ordered graded-lexicographically: first
/// by total degree, then lexicographically with earlier variables weighing
/// more (`x^2 > x*y > y^2`).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    fn total(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Mono) -> Ordering {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Mono) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// A sparse multivariate polynomial with rational coefficients.
///
/// Invariant: no stored coefficient is zero.  The number of variables `n`
/// is fixed per value; arithmetic between polynomials of different arity
/// panics.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    /// The zero polynomial in `n` variables.
    pub fn zero(n: usize) -> Poly {
        Poly { n, terms: BTreeMap::new() }
    }

    /// The constant polynomial `1`.
    pub fn one(n: usize) -> Poly {
        Poly::constant(n, BigRational::one())
    }

    /// A constant polynomial.
    pub fn constant(n: usize, c: BigRational) -> Poly {
        let mut p = Poly::zero(n);
        if !c.is_zero() {
            p.terms.insert(Mono(vec![0; n]), c);
        }
        p
    }

    /// The integer constant `k`.
    pub fn int(n: usize, k: i64) -> Poly {
        Poly::constant(n, rat_int(k))
    }

    /// The variable with index `i`.
    pub fn var(n: usize, i: usize) -> Poly {
        assert!(i < n, "variable index {i} out of range for {n} variables");
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Poly::zero(n);
        p.terms.insert(Mono(e), BigRational::one());
        p
    }

    /// A single monomial with the given exponents and coefficient.
    pub fn monomial(n: usize, exps: &[u32], c: BigRational) -> Poly {
        assert_eq!(exps.len(), n);
        let mut p = Poly::zero(n);
        if !c.is_zero() {
            p.terms.insert(Mono(exps.to_vec()), c);
        }
        p
    }

    /// Number of variables of the ambient ring.
    pub fn nvars(&self) -> usize {
        self.n
    }

    /// The same polynomial reread over a ring with one extra trailing
    /// variable (which it does not use).
    pub fn append_var(&self) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.push(0);
                (Mono(e), c.clone())
            })
            .collect();
        Poly { n: self.n + 1, terms }
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether this is the constant polynomial `1`.
    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// The constant value, if this polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.total() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    /// The leading (greatest graded-lex) term, if nonzero.
    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.last_key_value()
    }

    fn insert_add(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    /// Difference of two polynomials.
    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n, "polynomial arity mismatch");
        let mut out = Poly::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let e: Vec<u32> = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                out.insert_add(Mono(e), c1 * c2);
            }
        }
        out
    }

    /// Nonnegative integer power.
    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Multiply every coefficient by a rational.
    pub fn mul_coef(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.n);
        }
        let mut out = Poly::zero(self.n);
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v * c);
        }
        out
    }

    /// Partial derivative with respect to variable `v` (plain polynomial
    /// rule; the exponential band rule lives in [`ExpPoly::partial`]).
    pub fn partial(&self, v: usize) -> Poly {
        assert!(v < self.n);
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[v] = e - 1;
            out.insert_add(Mono(exps), c * rat_int(i64::from(e)));
        }
        out
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.leading().map(|(m, _)| m.total())
    }

    /// Degree in the single variable `v`.
    pub fn deg_var(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// The coefficient of `v^e`, as a polynomial with the `v`-exponent
    /// zeroed out.
    fn coeff_of_var_power(&self, v: usize, e: u32) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            if m.0[v] == e {
                let mut exps = m.0.clone();
                exps[v] = 0;
                out.terms.insert(Mono(exps), c.clone());
            }
        }
        out
    }

    /// Multiply by `v^e`.
    fn mul_var_pow(&self, v: usize, e: u32) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            let mut exps = m.0.clone();
            exps[v] += e;
            out.terms.insert(Mono(exps), c.clone());
        }
        out
    }

    /// Exact division: returns `self / d` when the division leaves no
    /// remainder, `None` otherwise (or when `d` is zero).
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        assert_eq!(self.n, d.n, "polynomial arity mismatch");
        if d.is_zero() {
            return None;
        }
        if d.is_one() {
            return Some(self.clone());
        }
        let (dm, dc) = d.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        let mut r = self.clone();
        let mut q = Poly::zero(self.n);
        while let Some((rm, rc)) = r.leading() {
            let mut e = Vec::with_capacity(self.n);
            for (a, b) in rm.0.iter().zip(&dm.0) {
                if a < b {
                    return None;
                }
                e.push(a - b);
            }
            let tm = Mono(e);
            let tc = rc / &dc;
            let t = Poly::monomial(self.n, &tm.0, tc.clone());
            q.insert_add(tm, tc);
            r = r.sub(&t.mul(d));
        }
        Some(q)
    }

    /// Signed rational content: the rational `c` such that `self / c` has
    /// coprime integer coefficients and a positive leading coefficient.
    fn rat_content_signed(&self) -> BigRational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return BigRational::one();
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        content
    }

    /// The primitive part with positive leading coefficient.
    fn primitive_positive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.rat_content_signed();
        self.mul_coef(&c.recip())
    }

    /// Pseudo-remainder of `p` by `q` in the variable `v` (both nonzero,
    /// `deg_v q >= 1` or the loop strips `v`-powers of `p`).
    fn prem(p: &Poly, q: &Poly, v: usize) -> Poly {
        let dq = q.deg_var(v);
        let lq = q.coeff_of_var_power(v, dq);
        let mut r = p.clone();
        while !r.is_zero() {
            let dr = r.deg_var(v);
            if dr < dq {
                break;
            }
            let lr = r.coeff_of_var_power(v, dr);
            r = lq.mul(&r).sub(&lr.mul(q).mul_var_pow(v, dr - dq));
            // Stripping the rational content each step only changes the
            // remainder by a unit but keeps integer coefficients from
            // compounding across iterations.
            if !r.is_zero() {
                let c = r.rat_content_signed();
                if !c.is_one() {
                    r = r.mul_coef(&c.recip());
                }
            }
        }
        r
    }

    /// Content with respect to variable `v`: the gcd of the coefficient
    /// polynomials of the powers of `v`.
    fn content_wrt(&self, v: usize) -> Poly {
        let mut g = Poly::zero(self.n);
        for e in 0..=self.deg_var(v) {
            let c = self.coeff_of_var_power(v, e);
            if !c.is_zero() {
                g = Poly::gcd(&g, &c);
            }
        }
        g
    }

    /// Greatest common divisor, normalized to be integer-primitive with a
    /// positive leading coefficient.  Computed by a primitive polynomial
    /// remainder sequence, recursing through the variables.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        assert_eq!(a.n, b.n, "polynomial arity mismatch");
        if a.is_zero() {
            return b.primitive_positive();
        }
        if b.is_zero() {
            return a.primitive_positive();
        }
        // Nonzero constants are units of the coefficient field, so they
        // force a trivial gcd; returning early spares the remainder
        // sequence entirely.
        if a.as_constant().is_some() || b.as_constant().is_some() {
            return Poly::one(a.n);
        }
        // Main variable: among variables both sides genuinely involve, pick
        // the one minimizing the larger degree so the remainder sequence is
        // short; a variable only one side involves cannot divide the gcd,
        // so it works just as well (its content recursion strips it).
        let v = (0..a.n)
            .filter(|&v| a.deg_var(v) > 0 || b.deg_var(v) > 0)
            .min_by_key(|&v| {
                let da = a.deg_var(v);
                let db = b.deg_var(v);
                (da.max(db), da.min(db))
            });
        let Some(v) = v else {
            // Both are nonzero constants: units of the coefficient field.
            return Poly::one(a.n);
        };
        let ca = a.content_wrt(v);
        let cb = b.content_wrt(v);
        let cg = Poly::gcd(&ca, &cb);
        let mut p = a.exact_div(&ca).expect("content divides");
        let mut q = b.exact_div(&cb).expect("content divides");
        if p.deg_var(v) < q.deg_var(v) {
            std::mem::swap(&mut p, &mut q);
        }
        loop {
            let r = Poly::prem(&p, &q, v);
            if r.is_zero() {
                break;
            }
            if r.deg_var(v) == 0 {
                q = Poly::one(a.n);
                break;
            }
            p = q;
            let rc = r.content_wrt(v);
            q = r.exact_div(&rc).expect("content divides");
        }
        let qc = q.content_wrt(v);
        let prim = q.exact_div(&qc).expect("content divides");
        cg.mul(&prim).primitive_positive()
    }

    /// Render with the given variable names (used by [`Scalar::render`]).
    fn chunks<S: AsRef<str>>(&self, vars: &[S]) -> Vec<(bool, String)> {
        assert_eq!(vars.len(), self.n, "variable name count mismatch");
        let mut out = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.total() == 0 {
                factors.push(render_rat(&mag));
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if e == 1 {
                    factors.push(vars[i].as_ref().to_string());
                } else {
                    factors.push(format!("{}^{}", vars[i].as_ref(), e));
                }
            }
            out.push((neg, factors.join("*")));
        }
        out
    }
}

fn render_rat(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn join_chunks(chunks: &[(bool, String)]) -> String {
    if chunks.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (neg, body)) in chunks.iter().enumerate() {
        if i == 0 {
            if *neg {
                s.push('-');
            }
        } else if *neg {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        s.push_str(body);
    }
    s
}

// ---------------------------------------------------------------------------
// Exponential bands
// ---------------------------------------------------------------------------

/// A finite sum `Σ_k p_k · e^{k·t}` of polynomial bands over integer band
/// indices `k`.  Invariant: no stored band is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExpPoly {
    n: usize,
    bands: BTreeMap<i64, Poly>,
}

impl ExpPoly {
    /// The zero element.
    pub fn zero(n: usize) -> ExpPoly {
        ExpPoly { n, bands: BTreeMap::new() }
    }

    /// Embed an exponential-free polynomial as the band `k = 0`.
    pub fn from_poly(p: Poly) -> ExpPoly {
        let n = p.nvars();
        let mut e = ExpPoly::zero(n);
        if !p.is_zero() {
            e.bands.insert(0, p);
        }
        e
    }

    /// The same element reread over a ring with one extra trailing variable.
    pub fn append_var(&self) -> ExpPoly {
        let bands = self.bands.iter().map(|(k, p)| (*k, p.append_var())).collect();
        ExpPoly { n: self.n + 1, bands }
    }

    /// A single band `p · e^{k·t}`.
    pub fn band(k: i64, p: Poly) -> ExpPoly {
        let n = p.nvars();
        let mut e = ExpPoly::zero(n);
        if !p.is_zero() {
            e.bands.insert(k, p);
        }
        e
    }

    /// Whether this is zero.
    pub fn is_zero(&self) -> bool {
        self.bands.is_empty()
    }

    /// The underlying polynomial if no exponential band is present
    /// (zero counts as exponential-free).
    pub fn as_poly(&self) -> Option<Poly> {
        match self.bands.len() {
            0 => Some(Poly::zero(self.n)),
            1 => {
                let (k, p) = self.bands.iter().next().unwrap();
                if *k == 0 {
                    Some(p.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn insert_add(&mut self, k: i64, p: Poly) {
        if p.is_zero() {
            return;
        }
        match self.bands.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&p);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Sum.
    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (k, p) in &other.bands {
            out.insert_add(*k, p.clone());
        }
        out
    }

    /// Negation.
    pub fn neg(&self) -> ExpPoly {
        let mut out = ExpPoly::zero(self.n);
        for (k, p) in &self.bands {
            out.bands.insert(*k, p.neg());
        }
        out
    }

    /// Difference.
    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.neg())
    }

    /// Product (bands convolve: `e^{k1·t} · e^{k2·t} = e^{(k1+k2)·t}`).
    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        assert_eq!(self.n, other.n);
        let mut out = ExpPoly::zero(self.n);
        for (k1, p1) in &self.bands {
            for (k2, p2) in &other.bands {
                out.insert_add(k1 + k2, p1.mul(p2));
            }
        }
        out
    }

    /// Multiply every band by an exponential-free polynomial.
    pub fn mul_poly(&self, p: &Poly) -> ExpPoly {
        let mut out = ExpPoly::zero(self.n);
        for (k, q) in &self.bands {
            let prod = q.mul(p);
            if !prod.is_zero() {
                out.bands.insert(*k, prod);
            }
        }
        out
    }

    /// Multiply every coefficient by a rational.
    pub fn mul_coef(&self, c: &BigRational) -> ExpPoly {
        if c.is_zero() {
            return ExpPoly::zero(self.n);
        }
        let mut out = ExpPoly::zero(self.n);
        for (k, p) in &self.bands {
            out.bands.insert(*k, p.mul_coef(c));
        }
        out
    }

    /// Partial derivative with respect to variable `v`.  When `v` is the
    /// line variable (`line == Some(v)`), each band obeys
    /// `∂t (p · e^{k·t}) = (∂t p + k·p) · e^{k·t}`.
    pub fn partial(&self, v: usize, line: Option<usize>) -> ExpPoly {
        let mut out = ExpPoly::zero(self.n);
        for (k, p) in &self.bands {
            let mut dp = p.partial(v);
            if line == Some(v) {
                dp = dp.add(&p.mul_coef(&rat_int(*k)));
            }
            out.insert_add(*k, dp);
        }
        out
    }

    /// Polynomial gcd of all bands (integer-primitive, positive leading).
    pub fn content(&self) -> Poly {
        let mut g = Poly::zero(self.n);
        for p in self.bands.values() {
            g = Poly::gcd(&g, p);
        }
        g
    }

    /// Exact division of every band by an exponential-free polynomial.
    pub fn exact_div_poly(&self, d: &Poly) -> Option<ExpPoly> {
        let mut out = ExpPoly::zero(self.n);
        for (k, p) in &self.bands {
            out.bands.insert(*k, p.exact_div(d)?);
        }
        Some(out)
    }

    fn chunks<S: AsRef<str>>(&self, vars: &[S]) -> Vec<(bool, String)> {
        let mut out = Vec::new();
        for (k, p) in &self.bands {
            if *k == 0 {
                out.extend(p.chunks(vars));
                continue;
            }
            let arg = match *k {
                1 => vars[self.n - 1].as_ref().to_string(),
                -1 => format!("-{}", vars[self.n - 1].as_ref()),
                k => format!("{}*{}", k, vars[self.n - 1].as_ref()),
            };
            let pchunks = p.chunks(vars);
            if pchunks.len() == 1 {
                let (neg, body) = pchunks.into_iter().next().unwrap();
                if body == "1" {
                    out.push((neg, format!("exp({arg})")));
                } else {
                    out.push((neg, format!("{body}*exp({arg})")));
                }
            } else {
                out.push((false, format!("({})*exp({arg})", join_chunks(&pchunks))));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

/// A reduced fraction of an [`ExpPoly`] numerator over an exponential-free
/// monic polynomial denominator.  See the module docs for the invariants.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scalar {
    ctx: Ctx,
    num: ExpPoly,
    den: Poly,
}

impl Scalar {
    fn make(ctx: Ctx, num: ExpPoly, den: Poly) -> Scalar {
        Scalar { ctx, num, den }.reduce()
    }

    fn reduce(mut self) -> Scalar {
        assert!(!self.den.is_zero(), "scalar with zero denominator");
        if self.num.is_zero() {
            self.den = Poly::one(self.ctx.nvars);
            return self;
        }
        if self.den.is_one() {
            return self;
        }
        if self.den.as_constant().is_none() {
            let g = Poly::gcd(&self.num.content(), &self.den);
            if !g.is_one() {
                self.num = self.num.exact_div_poly(&g).expect("gcd divides numerator");
                self.den = self.den.exact_div(&g).expect("gcd divides denominator");
            }
        }
        let lc = self.den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = lc.recip();
            self.den = self.den.mul_coef(&inv);
            self.num = self.num.mul_coef(&inv);
        }
        self
    }

    /// The context this scalar lives over.
    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// The zero scalar.
    pub fn zero(ctx: Ctx) -> Scalar {
        Scalar {
            ctx,
            num: ExpPoly::zero(ctx.nvars),
            den: Poly::one(ctx.nvars),
        }
    }

    /// The unit scalar.
    pub fn one(ctx: Ctx) -> Scalar {
        Scalar::int(ctx, 1)
    }

    /// An integer constant.
    pub fn int(ctx: Ctx, k: i64) -> Scalar {
        Scalar {
            ctx,
            num: ExpPoly::from_poly(Poly::int(ctx.nvars, k)),
            den: Poly::one(ctx.nvars),
        }
    }

    /// A rational constant `n / d`.  Panics when `d == 0`.
    pub fn rational(ctx: Ctx, n: i64, d: i64) -> Scalar {
        Scalar::from_rat(ctx, rat(n, d))
    }

    /// An arbitrary rational constant.
    pub fn from_rat(ctx: Ctx, c: BigRational) -> Scalar {
        Scalar {
            ctx,
            num: ExpPoly::from_poly(Poly::constant(ctx.nvars, c)),
            den: Poly::one(ctx.nvars),
        }
    }

    /// The variable with index `i`.
    pub fn var(ctx: Ctx, i: usize) -> Scalar {
        Scalar {
            ctx,
            num: ExpPoly::from_poly(Poly::var(ctx.nvars, i)),
            den: Poly::one(ctx.nvars),
        }
    }

    /// Embed an exponential-free polynomial.
    pub fn from_poly(ctx: Ctx, p: Poly) -> Scalar {
        assert_eq!(p.nvars(), ctx.nvars);
        Scalar {
            ctx,
            num: ExpPoly::from_poly(p),
            den: Poly::one(ctx.nvars),
        }
    }

    /// The pure exponential `e^{k·t}`.  Panics when the context has no line
    /// variable; callers that handle untrusted input validate first.
    pub fn exp_t(ctx: Ctx, k: i64) -> Scalar {
        assert!(ctx.has_t, "exponential scalar requires a line variable in the context");
        Scalar {
            ctx,
            num: ExpPoly::band(k, Poly::one(ctx.nvars)),
            den: Poly::one(ctx.nvars),
        }
    }

    /// Whether this scalar is exactly zero.  Because the representation is
    /// canonical, this is a complete decision procedure.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Whether this scalar is exactly one.
    pub fn is_one(&self) -> bool {
        self.den.is_one()
            && self
                .num
                .as_poly()
                .map(|p| p.is_one())
                .unwrap_or(false)
    }

    /// The underlying polynomial when the scalar is exponential-free with
    /// trivial denominator.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.den.is_one() {
            self.num.as_poly()
        } else {
            None
        }
    }

    /// The constant value, when the scalar is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    /// Sum.
    pub fn add(&self, other: &Scalar) -> Scalar {
        assert_eq!(self.ctx, other.ctx, "scalar context mismatch");
        let num = self
            .num
            .mul_poly(&other.den)
            .add(&other.num.mul_poly(&self.den));
        let den = self.den.mul(&other.den);
        Scalar::make(self.ctx, num, den)
    }

    /// Difference.
    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Scalar {
        Scalar {
            ctx: self.ctx,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    /// Product.
    pub fn mul(&self, other: &Scalar) -> Scalar {
        assert_eq!(self.ctx, other.ctx, "scalar context mismatch");
        Scalar::make(self.ctx, self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// Multiply by an integer.
    pub fn mul_int(&self, k: i64) -> Scalar {
        Scalar {
            ctx: self.ctx,
            num: self.num.mul_coef(&rat_int(k)),
            den: self.den.clone(),
        }
        .reduce()
    }

    /// Multiply by a rational.
    pub fn mul_rat(&self, c: &BigRational) -> Scalar {
        Scalar {
            ctx: self.ctx,
            num: self.num.mul_coef(c),
            den: self.den.clone(),
        }
        .reduce()
    }

    /// Nonnegative integer power.
    pub fn pow(&self, k: u32) -> Scalar {
        let mut out = Scalar::one(self.ctx);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Exact division.  Fails when the divisor is zero
    /// ([`Error::DivisionByZero`]) or carries exponential bands
    /// ([`Error::ExponentialDivisor`]).
    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        assert_eq!(self.ctx, other.ctx, "scalar context mismatch");
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dnum = other.num.as_poly().ok_or(Error::ExponentialDivisor)?;
        let num = self.num.mul_poly(&other.den);
        let den = self.den.mul(&dnum);
        Ok(Scalar::make(self.ctx, num, den))
    }

    /// Multiplicative inverse, under the same restrictions as [`Self::div`].
    pub fn invert(&self) -> Result<Scalar> {
        Scalar::one(self.ctx).div(self)
    }

    /// Partial derivative with respect to variable `v`, by the quotient
    /// rule; the line variable additionally applies the band rule.
    pub fn partial(&self, v: usize) -> Scalar {
        assert!(v < self.ctx.nvars, "variable index out of range");
        let line = self.ctx.line_var();
        let dnum = self.num.partial(v, line);
        let dden = self.den.partial(v);
        if dden.is_zero() {
            return Scalar::make(self.ctx, dnum, self.den.clone());
        }
        // (n/d)' = (n' d - n d') / d^2
        let num = dnum.mul_poly(&self.den).sub(&self.num.mul_poly(&dden));
        let den = self.den.mul(&self.den);
        Scalar::make(self.ctx, num, den)
    }

    /// Reread this scalar over the patch extended by the line variable `t`
    /// appended after the existing variables.  The value is unchanged; only
    /// the ambient context grows.  Panics if the context already has `t`.
    pub fn lift_line(&self) -> Scalar {
        assert!(!self.ctx.has_t, "scalar already lives over a line extension");
        let ctx = Ctx::with_line(self.ctx.nvars + 1);
        Scalar {
            ctx,
            num: self.num.append_var(),
            den: self.den.append_var(),
        }
    }

    /// Render to the textual grammar accepted by the parser, using the
    /// given variable names (ordered; the line variable, when present, is
    /// last).  Rendering is deterministic: equal scalars render equally.
    pub fn render<S: AsRef<str>>(&self, vars: &[S]) -> String {
        assert_eq!(vars.len(), self.ctx.nvars, "variable name count mismatch");
        let chunks = self.num.chunks(vars);
        let num_str = join_chunks(&chunks);
        if self.den.is_one() {
            return num_str;
        }
        let num_wrapped = if chunks.len() > 1 {
            format!("({num_str})")
        } else {
            num_str
        };
        let den_chunks = self.den.chunks(vars);
        let den_str = join_chunks(&den_chunks);
        let den_wrapped = if den_chunks.len() > 1 {
            format!("({den_str})")
        } else {
            den_str
        };
        format!("{num_wrapped}/{den_wrapped}")
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::add(self, rhs)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::sub(self, rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::mul(self, rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_scalar;

    const XY: [&str; 2] = ["x", "y"];

    fn sc(src: &str) -> Scalar {
        parse_scalar(src, &XY, false).unwrap()
    }

    #[test]
    fn addition_cancels_exactly() {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        assert!(x.add(&x.neg()).is_zero());
    }

    #[test]
    fn exponential_bands_multiply_by_adding_exponents() {
        let ctx = Ctx::with_line(1);
        let e = Scalar::exp_t(ctx, -1);
        assert_eq!(e.mul(&e), Scalar::exp_t(ctx, -2));
    }

    #[test]
    fn fractions_combine_over_common_denominator() {
        let ctx = Ctx::new(2);
        let one = Scalar::one(ctx);
        let x = Scalar::var(ctx, 0);
        let inv_x = one.div(&x).unwrap();
        let inv_x2 = one.div(&x.mul(&x)).unwrap();
        let sum = inv_x.add(&inv_x2);
        let expected = sc("x + 1").div(&sc("x^2")).unwrap();
        assert_eq!(sum, expected);
        assert_eq!(sum.render(&XY), "(x + 1)/x^2");
    }

    #[test]
    fn derivative_of_reciprocal() {
        let ctx = Ctx::new(2);
        let inv_x = Scalar::one(ctx).div(&Scalar::var(ctx, 0)).unwrap();
        let d = inv_x.partial(0);
        assert_eq!(d.render(&XY), "-1/x^2");
        let expected = Scalar::int(ctx, -1).div(&sc("x^2")).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn line_derivative_applies_band_rule() {
        let vars = ["x", "t"];
        let ctx = Ctx::with_line(2);
        // d/dt (x e^{2t}) = 2x e^{2t}
        let x = Scalar::var(ctx, 0);
        let f = x.mul(&Scalar::exp_t(ctx, 2));
        assert_eq!(f.partial(1), f.mul_int(2));
        // d/dt (t e^{t}) = (t + 1) e^{t}
        let t = Scalar::var(ctx, 1);
        let g = t.mul(&Scalar::exp_t(ctx, 1));
        let expected = t.add(&Scalar::one(ctx)).mul(&Scalar::exp_t(ctx, 1));
        assert_eq!(g.partial(1), expected);
        assert_eq!(g.partial(1).render(&vars), "(t + 1)*exp(t)");
    }

    #[test]
    fn division_reduces_common_factors() {
        let num = sc("x^2 - 1");
        let den = sc("x - 1");
        let q = num.div(&den).unwrap();
        assert_eq!(q, sc("x + 1"));
    }

    #[test]
    fn denominators_are_monic() {
        let ctx = Ctx::new(2);
        let q = Scalar::one(ctx).div(&sc("2*x")).unwrap();
        assert_eq!(q.render(&XY), "1/2/x");
        assert_eq!(q.mul(&sc("2*x")), Scalar::one(ctx));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let ctx = Ctx::new(2);
        let x = Scalar::var(ctx, 0);
        assert_eq!(x.div(&Scalar::zero(ctx)), Err(Error::DivisionByZero));
    }

    #[test]
    fn exponential_divisors_are_rejected() {
        let ctx = Ctx::with_line(1);
        let one = Scalar::one(ctx);
        let e = Scalar::exp_t(ctx, 1);
        assert_eq!(one.div(&e), Err(Error::ExponentialDivisor));
        // Multiplying by the opposite band is the supported way to cancel
        // exponentials.
        assert!(e.mul(&Scalar::exp_t(ctx, -1)).is_one());
    }

    #[test]
    fn gcd_handles_multivariate_content() {
        let g = Poly::gcd(
            &sc("x^2*y + x*y^2").as_poly().unwrap(),
            &sc("x*y").as_poly().unwrap(),
        );
        assert_eq!(g, sc("x*y").as_poly().unwrap());
        let g2 = Poly::gcd(
            &sc("x^2 - y^2").as_poly().unwrap(),
            &sc("x^2 + 2*x*y + y^2").as_poly().unwrap(),
        );
        assert_eq!(g2, sc("x + y").as_poly().unwrap());
    }

    #[test]
    fn rendering_is_deterministic_and_readable() {
        let vars = ["x", "y", "t"];
        let ctx = Ctx::with_line(3);
        let x = Scalar::var(ctx, 0);
        let y = Scalar::var(ctx, 1);
        let f = x
            .mul(&Scalar::exp_t(ctx, -2))
            .add(&y.neg())
            .add(&Scalar::exp_t(ctx, -2));
        assert_eq!(f.render(&vars), "(x + 1)*exp(-2*t) - y");
    }
}
