//! JSON encoding of the core types.
//!
//! Every `*_from_json` takes a path string (like `$.functions.m.pieces[0]`) that
//! is prefixed to error messages, so malformed scenes report where they broke.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::distributions::{AsymptoticSeries, DTerm, PCoeff, RDistribution, Window};
use crate::error::{Error, Result};
use crate::linalg;
use crate::piecewise::{Piece, PiecewiseQP};
use crate::polyhedron::{Halfspace, Polyhedron};
use crate::pushforward::QuotientMap;
use crate::quasipoly::{KPoly, QuasiPolynomial};
use crate::scalars::rational::{dot, fmt_q, parse_q, primitive_q, q, vsub, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly, Periodic, Ring};

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn obj<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let m = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(err(path, format!("unknown field '{k}'")));
        }
    }
    Ok(m)
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| err(path, format!("missing field '{key}'")))
}

fn arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

pub fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| err(path, "expected a non-negative integer"))
}

pub fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

// ---- scalars ----

pub fn q_to_json(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

/// Accepts "p/q" strings and JSON integers.
pub fn q_from_json(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| err(path, e)),
        Value::Number(n) => n.as_i64().map(q).ok_or_else(|| err(path, format!("malformed rational {n}: use \"p/q\""))),
        _ => Err(err(path, "expected a rational \"p/q\"")),
    }
}

pub fn qvec_to_json(v: &[Q]) -> Value {
    Value::Array(v.iter().map(q_to_json).collect())
}

pub fn qvec_from_json(v: &Value, path: &str, len: Option<usize>) -> Result<QVec> {
    // a bare scalar stands for a vector of length one
    if matches!(v, Value::String(_) | Value::Number(_)) && len.unwrap_or(1) == 1 {
        return Ok(vec![q_from_json(v, path)?]);
    }
    let a = arr(v, path)?;
    if let Some(n) = len {
        if a.len() != n {
            return Err(err(path, format!("expected {n} entries, got {}", a.len())));
        }
    }
    a.iter().enumerate().map(|(i, x)| q_from_json(x, &format!("{path}[{i}]"))).collect()
}

/// Rational values are written as plain strings, everything else as {level, coeffs}.
pub fn cyc_to_json(c: &Cyclotomic) -> Value {
    match c.as_rational() {
        Some(r) => q_to_json(r),
        None => json!({"level": c.level(), "coeffs": qvec_to_json(c.coeffs())}),
    }
}

pub fn cyc_from_json(v: &Value, path: &str) -> Result<Cyclotomic> {
    if v.is_object() {
        let m = obj(v, path, &["level", "coeffs"])?;
        let level = as_u64(field(m, "level", path)?, &format!("{path}.level"))?;
        let coeffs = qvec_from_json(field(m, "coeffs", path)?, &format!("{path}.coeffs"), None)?;
        Cyclotomic::normalize(&coeffs, level).map_err(|e| err(path, e))
    } else {
        Ok(Cyclotomic::from_q(q_from_json(v, path)?))
    }
}

pub fn periodic_to_json(p: &Periodic) -> Value {
    match p.as_constant() {
        Some(c) => cyc_to_json(c),
        None => json!({"period": p.period(), "table": p.table().iter().map(cyc_to_json).collect::<Vec<_>>()}),
    }
}

pub fn periodic_from_json(v: &Value, path: &str) -> Result<Periodic> {
    if v.get("period").is_some() || v.get("table").is_some() {
        let m = obj(v, path, &["period", "table"])?;
        let t = arr(field(m, "table", path)?, &format!("{path}.table"))?;
        if t.is_empty() {
            return Err(err(path, "empty table"));
        }
        if let Some(p) = m.get("period") {
            if as_u64(p, &format!("{path}.period"))? != t.len() as u64 {
                return Err(err(path, "period does not match table length"));
            }
        }
        let vals = t.iter().enumerate().map(|(i, x)| cyc_from_json(x, &format!("{path}.table[{i}]"))).collect::<Result<_>>()?;
        Ok(Periodic::from_table(vals))
    } else {
        Ok(Periodic::constant(cyc_from_json(v, path)?))
    }
}

// ---- polynomials ----

pub fn poly_to_json<C: Ring>(p: &MultiPoly<C>, coeff: impl Fn(&C) -> Value) -> Value {
    let terms: Vec<Value> = p.terms().map(|(e, c)| json!({"exp": e, "c": coeff(c)})).collect();
    json!({"nvars": p.nvars(), "terms": terms})
}

/// Structured form {nvars, terms:[{exp, c}]} or an expression string in `names`.
pub fn poly_from_json<C: Ring>(
    v: &Value,
    path: &str,
    nvars: usize,
    names: &[String],
    coeff: impl Fn(&Value, &str) -> Result<C>,
) -> Result<MultiPoly<C>> {
    if let Value::String(s) = v {
        return Ok(parse_poly_expr(s, names).map_err(|e| err(path, e))?.to_ring());
    }
    if let Value::Number(_) = v {
        return Ok(MultiPoly::from_q(nvars, &q_from_json(v, path)?).to_ring::<Q>().map_coeffs(|c| C::r_from_q(c)));
    }
    let m = obj(v, path, &["nvars", "terms"])?;
    if let Some(n) = m.get("nvars") {
        if as_u64(n, &format!("{path}.nvars"))? as usize != nvars {
            return Err(err(path, format!("expected {nvars} variables")));
        }
    }
    let mut p = MultiPoly::zero(nvars);
    for (i, t) in arr(field(m, "terms", path)?, &format!("{path}.terms"))?.iter().enumerate() {
        let tp = format!("{path}.terms[{i}]");
        let tm = obj(t, &tp, &["exp", "c"])?;
        let e: Vec<u32> = arr(field(tm, "exp", &tp)?, &format!("{tp}.exp"))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| err(&tp, "exponents must be non-negative integers")))
            .collect::<Result<_>>()?;
        if e.len() != nvars {
            return Err(err(&tp, format!("exponent vector must have {nvars} entries")));
        }
        p.add_term(e, coeff(field(tm, "c", &tp)?, &format!("{tp}.c"))?);
    }
    Ok(p)
}

/// Polynomial expressions with + - * / ^ and parentheses over the given
/// variable names, e.g. "k/2 - l1/4 + (x+1)^2".  Division only by constants.
pub fn parse_poly_expr(s: &str, names: &[String]) -> Result<MultiPoly<Q>> {
    let toks = tokenize(s)?;
    let mut p = ExprParser { toks, pos: 0, names, n: names.len() };
    let r = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("unexpected '{}' in {:?}", p.toks[p.pos], s)));
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(num_bigint::BigInt),
    Id(String),
    Op(char),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Id(s) => write!(f, "{s}"),
            Tok::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push(Tok::Num(t.parse().expect("digits")));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Id(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in {s:?}")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
    n: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MultiPoly<Q>> {
        let mut r = self.term()?;
        loop {
            if self.eat('+') {
                r = r.add(&self.term()?);
            } else if self.eat('-') {
                r = r.sub(&self.term()?);
            } else {
                return Ok(r);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly<Q>> {
        let mut r = self.unary()?;
        loop {
            if self.eat('*') {
                r = r.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                let c = d.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| Error::Parse("division by a non-constant or zero".into()))?;
                r = r.scale_q(&(Q::one() / c));
            } else if matches!(self.peek(), Some(Tok::Id(_)) | Some(Tok::Op('('))) {
                // implicit product like "2k" or "3(x+1)"
                r = r.mul(&self.unary()?);
            } else {
                return Ok(r);
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly<Q>> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) => {
                    self.pos += 1;
                    let e: u32 = e.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                    Ok(base.pow(e))
                }
                _ => Err(Error::Parse("exponent must be a non-negative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MultiPoly<Q>> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(MultiPoly::from_q(self.n, &Q::from_integer(v)))
            }
            Some(Tok::Id(s)) => {
                self.pos += 1;
                let i = self
                    .names
                    .iter()
                    .position(|x| *x == s)
                    .ok_or_else(|| Error::Parse(format!("unknown variable '{s}' (expected one of {})", self.names.join(", "))))?;
                Ok(MultiPoly::var(self.n, i))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let r = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(r)
            }
            Some(t) => Err(Error::Parse(format!("unexpected '{t}'"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

/// Variable names of quasi-polynomials: k, l1..ld.
pub fn kpoly_names(d: usize) -> Vec<String> {
    std::iter::once("k".to_string()).chain((1..=d).map(|i| format!("l{i}"))).collect()
}

/// Variable names of test polynomials on V: x, y, z, w (or x1..xd).
pub fn test_poly_names(d: usize) -> Vec<String> {
    crate::scalars::poly::default_names(d)
}

pub fn qpoly_from_json(v: &Value, path: &str, d: usize) -> Result<MultiPoly<Q>> {
    poly_from_json(v, path, d, &test_poly_names(d), q_from_json)
}

// ---- polyhedra ----

pub fn polyhedron_to_json(p: &Polyhedron) -> Value {
    let ineqs: Vec<Value> = p
        .constraints()
        .iter()
        .map(|h| {
            let mut m = json!({"a": qvec_to_json(&h.a), "c": q_to_json(&h.c)});
            if h.eq {
                m["eq"] = Value::Bool(true);
            }
            m
        })
        .collect();
    let mut out = json!({"ineqs": ineqs});
    if !p.is_empty() {
        let vs = |xs: &[QVec]| Value::Array(xs.iter().map(|v| qvec_to_json(v)).collect());
        out["generators"] = json!({"vertices": vs(p.vertices()), "rays": vs(p.rays()), "lineality": vs(p.lineality())});
    }
    out
}

/// Accepted forms: {ineqs}, {interval:[a,b]}, {box:{lo,hi}}, {point}, {vertices},
/// {cone:{apex, rays, lines}} and the string "whole".
pub fn polyhedron_from_json(v: &Value, path: &str, d: usize) -> Result<Polyhedron> {
    if v.as_str() == Some("whole") {
        return Ok(Polyhedron::whole(d));
    }
    let m = obj(v, path, &["ineqs", "generators", "interval", "box", "point", "vertices", "cone"])?;
    let forms = ["ineqs", "interval", "box", "point", "vertices", "cone"].iter().filter(|k| m.contains_key(**k)).count();
    if forms != 1 {
        return Err(err(path, "give exactly one of ineqs, interval, box, point, vertices, cone"));
    }
    if let Some(x) = m.get("ineqs") {
        let mut cons = Vec::new();
        for (i, h) in arr(x, &format!("{path}.ineqs"))?.iter().enumerate() {
            let hp = format!("{path}.ineqs[{i}]");
            let hm = obj(h, &hp, &["a", "c", "eq"])?;
            let a = qvec_from_json(field(hm, "a", &hp)?, &format!("{hp}.a"), Some(d))?;
            let c = q_from_json(field(hm, "c", &hp)?, &format!("{hp}.c"))?;
            let eq = match hm.get("eq") {
                None => false,
                Some(b) => b.as_bool().ok_or_else(|| err(&hp, "eq must be a boolean"))?,
            };
            cons.push(Halfspace { a, c, eq });
        }
        return Polyhedron::try_new(d, cons).map_err(|e| err(path, e));
    }
    if let Some(x) = m.get("interval") {
        if d != 1 {
            return Err(err(path, "interval needs dimension 1"));
        }
        let ab = qvec_from_json(x, &format!("{path}.interval"), Some(2))?;
        return Ok(Polyhedron::interval(ab[0].clone(), ab[1].clone()));
    }
    if let Some(x) = m.get("box") {
        let bp = format!("{path}.box");
        let bm = obj(x, &bp, &["lo", "hi"])?;
        let lo = qvec_from_json(field(bm, "lo", &bp)?, &format!("{bp}.lo"), Some(d))?;
        let hi = qvec_from_json(field(bm, "hi", &bp)?, &format!("{bp}.hi"), Some(d))?;
        return Ok(Polyhedron::cuboid(&lo, &hi));
    }
    if let Some(x) = m.get("point") {
        return Ok(Polyhedron::point(&qvec_from_json(x, &format!("{path}.point"), Some(d))?));
    }
    if let Some(x) = m.get("vertices") {
        let vp = format!("{path}.vertices");
        let pts: Vec<QVec> =
            arr(x, &vp)?.iter().enumerate().map(|(i, p)| qvec_from_json(p, &format!("{vp}[{i}]"), Some(d))).collect::<Result<_>>()?;
        return convex_hull(&pts, d).map_err(|e| err(path, e));
    }
    let cp = format!("{path}.cone");
    let cm = obj(&m["cone"], &cp, &["apex", "rays", "lines"])?;
    let apex = qvec_from_json(field(cm, "apex", &cp)?, &format!("{cp}.apex"), Some(d))?;
    let list = |key: &str| -> Result<Vec<QVec>> {
        match cm.get(key) {
            None => Ok(vec![]),
            Some(x) => arr(x, &format!("{cp}.{key}"))?
                .iter()
                .enumerate()
                .map(|(i, r)| qvec_from_json(r, &format!("{cp}.{key}[{i}]"), Some(d)))
                .collect(),
        }
    };
    let rays = list("rays")?;
    let lines = list("lines")?;
    let mut all = rays.clone();
    all.extend(lines.iter().cloned());
    if linalg::rank(&all) != all.len() {
        return Err(err(&cp, "rays and lines must be linearly independent"));
    }
    Ok(Polyhedron::from_generators(&apex, &rays, &lines))
}

/// Convex hull of finitely many points, by testing every hyperplane through
/// affinely independent subsets inside the affine hull.  Fine for a handful of points.
pub fn convex_hull(pts: &[QVec], d: usize) -> Result<Polyhedron> {
    let v0 = pts.first().ok_or_else(|| Error::InvalidArgument("no vertices".into()))?;
    let diffs: Vec<QVec> = pts.iter().map(|p| vsub(p, v0)).collect();
    let hull = crate::polyhedron::AffineSubspace::new(v0.clone(), &diffs);
    let mut cons: Vec<Halfspace> = hull.equations().into_iter().map(|(a, c)| Halfspace::equal(a, c)).collect();
    let basis = {
        let mut b: Vec<QVec> = Vec::new();
        for x in &diffs {
            let mut t = b.clone();
            t.push(x.clone());
            if linalg::rank(&t) == t.len() {
                b = t;
            }
        }
        b
    };
    let r = basis.len();
    if r == 0 {
        return Ok(Polyhedron::point(v0));
    }
    // Coordinates of each point in the basis via least squares (exact: points lie in the span).
    let g: Vec<QVec> = basis.iter().map(|u| basis.iter().map(|w| dot(u, w)).collect()).collect();
    let ginv = linalg::inverse(&g).expect("independent basis");
    let coords: Vec<QVec> = diffs.iter().map(|x| linalg::mat_vec(&ginv, &basis.iter().map(|u| dot(u, x)).collect::<Vec<_>>())).collect();
    let mut seen: Vec<(QVec, Q)> = Vec::new();
    for subset in itertools::Itertools::combinations(0..pts.len(), r) {
        // hyperplane ⟨a,t⟩ = c through the chosen points: null vector of [t_i, -1]
        let rows: Vec<QVec> = subset.iter().map(|&i| coords[i].iter().cloned().chain(std::iter::once(-Q::one())).collect()).collect();
        let ns = linalg::nullspace(&rows, r + 1);
        if ns.len() != 1 {
            continue;
        }
        let n = &ns[0];
        let a_t: QVec = n[..r].to_vec();
        if a_t.iter().all(|x| x.is_zero()) {
            continue;
        }
        let c = n[r].clone();
        let side: Vec<Q> = coords.iter().map(|t| dot(&a_t, t) - &c).collect();
        let sign = if side.iter().all(|s| !s.is_negative()) {
            Q::one()
        } else if side.iter().all(|s| !s.is_positive()) {
            -Q::one()
        } else {
            continue;
        };
        // lift to V: a with ⟨a,u_j⟩ = (a_t)_j, a in span(basis)
        let lam = linalg::mat_vec(&ginv, &a_t);
        let mut a = vec![Q::zero(); d];
        for (j, u) in basis.iter().enumerate() {
            for i in 0..d {
                a[i] += &lam[j] * &u[i];
            }
        }
        let a: QVec = a.iter().map(|x| x * &sign).collect();
        let c = &c * &sign + dot(&a, v0);
        let ap = primitive_q(&a);
        let cc = c * first_ratio(&ap, &a);
        let a = ap;
        let key = (a.clone(), cc.clone());
        if !seen.contains(&key) {
            seen.push(key);
            cons.push(Halfspace::ge(a, cc));
        }
    }
    Polyhedron::try_new(d, cons)
}

fn first_ratio(scaled: &[Q], orig: &[Q]) -> Q {
    for (s, o) in scaled.iter().zip(orig) {
        if !o.is_zero() {
            return s / o;
        }
    }
    Q::one()
}

// ---- quasi-polynomials and piecewise functions ----

pub fn kpoly_to_json(p: &KPoly) -> Value {
    poly_to_json(p, cyc_to_json)
}

pub fn qp_to_json(qp: &QuasiPolynomial) -> Value {
    let terms: Vec<Value> =
        qp.terms().map(|(u, g, p)| json!({"u": q_to_json(u), "g": qvec_to_json(g), "poly": kpoly_to_json(p)})).collect();
    json!({"terms": terms})
}

/// {terms:[{u?, g?, poly | p}]} or a bare expression string in k, l1..ld.
pub fn qp_from_json(v: &Value, path: &str, d: usize) -> Result<QuasiPolynomial> {
    let names = kpoly_names(d);
    if v.is_string() || v.is_number() {
        let p: KPoly = poly_from_json(v, path, d + 1, &names, cyc_from_json)?;
        return Ok(QuasiPolynomial::from_poly(d, p));
    }
    let m = obj(v, path, &["terms"])?;
    let mut out = QuasiPolynomial::zero(d);
    for (i, t) in arr(field(m, "terms", path)?, &format!("{path}.terms"))?.iter().enumerate() {
        let tp = format!("{path}.terms[{i}]");
        let tm = obj(t, &tp, &["u", "g", "poly", "p"])?;
        let u = match tm.get("u") {
            Some(x) => q_from_json(x, &format!("{tp}.u"))?,
            None => Q::zero(),
        };
        let g = match tm.get("g") {
            Some(x) => qvec_from_json(x, &format!("{tp}.g"), Some(d))?,
            None => vec![Q::zero(); d],
        };
        let pv = match (tm.get("poly"), tm.get("p")) {
            (Some(x), None) | (None, Some(x)) => x,
            _ => return Err(err(&tp, "give exactly one of 'poly' or 'p'")),
        };
        let p: KPoly = poly_from_json(pv, &format!("{tp}.poly"), d + 1, &names, cyc_from_json)?;
        out.add_term(u, g, p);
    }
    Ok(out)
}

pub fn pqp_to_json(m: &PiecewiseQP) -> Value {
    let pieces: Vec<Value> = m
        .pieces()
        .iter()
        .map(|pc| json!({"q": qp_to_json(&pc.q), "cone": {"P": polyhedron_to_json(&pc.p), "sigma": qvec_to_json(&pc.sigma)}}))
        .collect();
    json!({"dim": m.dim(), "pieces": pieces})
}

pub fn pqp_from_json(v: &Value, path: &str, default_dim: Option<usize>) -> Result<PiecewiseQP> {
    let m = obj(v, path, &["dim", "pieces"])?;
    let d = match (m.get("dim"), default_dim) {
        (Some(x), _) => as_u64(x, &format!("{path}.dim"))? as usize,
        (None, Some(d)) => d,
        (None, None) => return Err(err(path, "missing field 'dim'")),
    };
    if d == 0 {
        return Err(err(path, "dimension must be positive"));
    }
    let mut pieces = Vec::new();
    for (i, pc) in arr(field(m, "pieces", path)?, &format!("{path}.pieces"))?.iter().enumerate() {
        let pp = format!("{path}.pieces[{i}]");
        let pm = obj(pc, &pp, &["q", "cone"])?;
        let qq = match pm.get("q") {
            Some(x) => qp_from_json(x, &format!("{pp}.q"), d)?,
            None => QuasiPolynomial::one(d),
        };
        let cp = format!("{pp}.cone");
        let cm = obj(field(pm, "cone", &pp)?, &cp, &["P", "sigma"])?;
        let p = polyhedron_from_json(field(cm, "P", &cp)?, &format!("{cp}.P"), d)?;
        let sigma = match cm.get("sigma") {
            Some(x) => qvec_from_json(x, &format!("{cp}.sigma"), Some(d))?,
            None => vec![Q::zero(); d],
        };
        pieces.push(Piece::new(qq, p, sigma));
    }
    PiecewiseQP::from_pieces(d, pieces).map_err(|e| err(path, e))
}

// ---- distributions and series ----

pub fn pcoeff_to_json(c: &PCoeff) -> Value {
    poly_to_json(c, periodic_to_json)
}

pub fn rdist_to_json(r: &RDistribution) -> Value {
    let terms: Vec<Value> = r
        .terms()
        .iter()
        .map(|t| {
            json!({
                "face": polyhedron_to_json(&t.face),
                "dirs": t.dirs.iter().map(|x| qvec_to_json(x)).collect::<Vec<_>>(),
                "coeff": pcoeff_to_json(&t.coeff),
            })
        })
        .collect();
    json!({"terms": terms})
}

pub fn rdist_from_json(v: &Value, path: &str, d: usize) -> Result<RDistribution> {
    let m = obj(v, path, &["terms"])?;
    let mut r = RDistribution::zero(d);
    let names = test_poly_names(d);
    for (i, t) in arr(field(m, "terms", path)?, &format!("{path}.terms"))?.iter().enumerate() {
        let tp = format!("{path}.terms[{i}]");
        let tm = obj(t, &tp, &["face", "dirs", "coeff"])?;
        let face = polyhedron_from_json(field(tm, "face", &tp)?, &format!("{tp}.face"), d)?;
        let dirs = match tm.get("dirs") {
            None => vec![],
            Some(x) => arr(x, &format!("{tp}.dirs"))?
                .iter()
                .enumerate()
                .map(|(j, y)| qvec_from_json(y, &format!("{tp}.dirs[{j}]"), Some(d)))
                .collect::<Result<_>>()?,
        };
        let coeff = poly_from_json(field(tm, "coeff", &tp)?, &format!("{tp}.coeff"), d, &names, periodic_from_json)?;
        r.push(DTerm { face, dirs, coeff });
    }
    Ok(r)
}

pub fn series_to_json(s: &AsymptoticSeries) -> Value {
    json!({
        "dim": s.dim(),
        "s": s.leading_exponent(),
        "N": s.order(),
        "coefficients": s.coeffs().iter().map(rdist_to_json).collect::<Vec<_>>(),
    })
}

pub fn series_from_json(v: &Value, path: &str) -> Result<AsymptoticSeries> {
    let m = obj(v, path, &["dim", "s", "N", "coefficients"])?;
    let d = as_u64(field(m, "dim", path)?, &format!("{path}.dim"))? as usize;
    let s = as_i64(field(m, "s", path)?, &format!("{path}.s"))?;
    let cs: Vec<RDistribution> = arr(field(m, "coefficients", path)?, &format!("{path}.coefficients"))?
        .iter()
        .enumerate()
        .map(|(i, c)| rdist_from_json(c, &format!("{path}.coefficients[{i}]"), d))
        .collect::<Result<_>>()?;
    if cs.is_empty() {
        return Err(err(path, "a series needs at least one coefficient"));
    }
    if let Some(n) = m.get("N") {
        if as_u64(n, &format!("{path}.N"))? as usize + 1 != cs.len() {
            return Err(err(path, "N must equal the number of coefficients minus one"));
        }
    }
    Ok(AsymptoticSeries::from_coeffs(d, s, cs))
}

// ---- windows and maps ----

pub fn window_to_json(w: &Window) -> Value {
    Value::String(w.to_string())
}

pub fn window_from_json(v: &Value, path: &str, d: usize) -> Result<Window> {
    let s = v.as_str().ok_or_else(|| err(path, "expected a window string like \"[-1,2]x(0,1]\""))?;
    let w = Window::parse(s).map_err(|e| err(path, e))?;
    if w.dim() != d {
        return Err(err(path, format!("window has dimension {}, expected {d}", w.dim())));
    }
    Ok(w)
}

pub fn qmap_to_json(pi: &QuotientMap) -> Value {
    json!({
        "matrix": pi.matrix().iter().map(|r| qvec_to_json(r)).collect::<Vec<_>>(),
        "image_basis": pi.image_basis().iter().map(|r| qvec_to_json(r)).collect::<Vec<_>>(),
    })
}

/// {matrix, image_basis?} or {kernel}.  With an image basis B the matrix is taken
/// to be already normalized and the original map is B·matrix.
pub fn qmap_from_json(v: &Value, path: &str, d: usize) -> Result<QuotientMap> {
    let m = obj(v, path, &["matrix", "image_basis", "kernel"])?;
    let rows_of = |key: &str| -> Result<Vec<QVec>> {
        arr(field(m, key, path)?, &format!("{path}.{key}"))?
            .iter()
            .enumerate()
            .map(|(i, r)| qvec_from_json(r, &format!("{path}.{key}[{i}]"), None))
            .collect()
    };
    if m.contains_key("kernel") {
        if m.contains_key("matrix") {
            return Err(err(path, "give either 'matrix' or 'kernel'"));
        }
        let ker = rows_of("kernel")?;
        if ker.iter().any(|r| r.len() != d) {
            return Err(err(path, format!("kernel vectors must have {d} entries")));
        }
        return QuotientMap::quotient_by(&ker, d).map_err(|e| err(path, e));
    }
    let rows = rows_of("matrix")?;
    if rows.iter().any(|r| r.len() != d) {
        return Err(err(path, format!("matrix rows must have {d} entries")));
    }
    let matrix = if m.contains_key("image_basis") {
        let basis = rows_of("image_basis")?;
        let dp = rows.len();
        if basis.len() != dp || basis.iter().any(|b| b.len() != dp) {
            return Err(err(path, "image_basis must be a square basis of the target"));
        }
        let bm = linalg::from_cols(&basis, dp);
        linalg::mat_mul(&bm, &rows, d)
    } else {
        rows
    };
    QuotientMap::new(&matrix, d).map_err(|e| err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand;
    use crate::scalars::rational::{qf, qvec};

    fn roundtrip(v: Value, parse: impl Fn(&Value) -> Result<Value>) {
        let again = parse(&v).unwrap();
        assert_eq!(again, v);
    }

    #[test]
    fn rationals_and_cyclotomics() {
        assert_eq!(q_from_json(&json!("3/6"), "$").unwrap(), qf(1, 2));
        assert_eq!(q_from_json(&json!(-4), "$").unwrap(), q(-4));
        let e = q_from_json(&json!("1/0"), "$.sigma").unwrap_err().to_string();
        assert!(e.contains("$.sigma") && e.contains("zero denominator"), "{e}");
        let c = Cyclotomic::exp2pi(&qf(1, 3));
        let j = cyc_to_json(&c);
        assert_eq!(cyc_from_json(&j, "$").unwrap(), c);
        let p = Periodic::from_fn(3, Cyclotomic::from_i64);
        assert_eq!(periodic_from_json(&periodic_to_json(&p), "$").unwrap(), p);
    }

    #[test]
    fn expressions() {
        let names = kpoly_names(2);
        let p = parse_poly_expr("k/2 - l2/4 + (l1+1)^2", &names).unwrap();
        assert_eq!(p.eval(&[q(2), q(3), q(4)]), q(16));
        assert_eq!(parse_poly_expr("2k", &names).unwrap().eval(&[q(5), q(0), q(0)]), q(10));
        assert!(parse_poly_expr("k/l1", &names).is_err());
        assert!(parse_poly_expr("m", &names).is_err());
        assert!(parse_poly_expr("(k", &names).is_err());
    }

    #[test]
    fn hull_of_points() {
        let t = convex_hull(&[qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[0, 0])], 2).unwrap();
        assert!(t.contains(&[qf(1, 3), qf(1, 3)]));
        assert!(!t.contains(&[q(1), q(1)]));
        assert_eq!(t.vertices().len(), 3);
        let seg = convex_hull(&[qvec(&[0, 0]), qvec(&[2, 2]), qvec(&[1, 1])], 2).unwrap();
        assert_eq!(seg.dim(), 1);
        assert!(seg.contains(&[q(1), q(1)]) && !seg.contains(&[q(3), q(3)]));
    }

    #[test]
    fn core_roundtrips() {
        let pv = polyhedron_to_json(&Polyhedron::from_ineqs(2, &[(qvec(&[1, 0]), q(0)), (qvec(&[-1, -1]), q(-1))]));
        roundtrip(pv, |v| Ok(polyhedron_to_json(&polyhedron_from_json(v, "$", 2)?)));

        let mut m = crate::catalog::final_example();
        m.push(QuasiPolynomial::k_twist(2, qf(1, 3)), Polyhedron::point(&qvec(&[1, 0])), vec![qf(1, 2), q(0)]);
        roundtrip(pqp_to_json(&m), |v| Ok(pqp_to_json(&pqp_from_json(v, "$", None)?)));

        let m1 = PiecewiseQP::single(QuasiPolynomial::character(&[qf(1, 3)]), Polyhedron::interval(q(0), q(1)), vec![qf(1, 3)]);
        let a = expand(&m1, 3).unwrap().series;
        roundtrip(series_to_json(&a), |v| Ok(series_to_json(&series_from_json(v, "$")?)));

        let pi = QuotientMap::new(&[qvec(&[2, 4])], 2).unwrap();
        roundtrip(qmap_to_json(&pi), |v| Ok(qmap_to_json(&qmap_from_json(v, "$", 2)?)));
        let w = Window::parse("[-1,2]x(0,1/2]").unwrap();
        roundtrip(window_to_json(&w), |v| Ok(window_to_json(&window_from_json(v, "$", 2)?)));
    }

    #[test]
    fn location_tagged_errors() {
        let bad = json!({"dim": 1, "pieces": [{"cone": {"P": {"interval": ["0", "1"]}, "sigma": ["1/0"]}}]});
        let e = pqp_from_json(&bad, "$.functions.m", None).unwrap_err().to_string();
        assert!(e.contains("$.functions.m.pieces[0].cone.sigma[0]"), "{e}");
        let extra = json!({"dim": 1, "pieces": [], "colour": 1});
        assert!(pqp_from_json(&extra, "$", None).unwrap_err().to_string().contains("unknown field 'colour'"));
    }
}
