//! Point-mass samples Θ(m;k), distributions Σ ∂^β(p δ_F) on faces with
//! k-periodic polynomial coefficients, and asymptotic series built from them.

use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{saturated_basis, to_q};
use crate::linalg;
use crate::piecewise::PiecewiseQP;
use crate::polyhedron::{enumerate_lattice_points, integrate_poly_over_polytope, AffineSubspace, Halfspace, Polyhedron};
use crate::quasipoly::{split_by_k_degree, QuasiPolynomial};
use crate::scalars::poly::default_names;
use crate::scalars::rational::{dot, fmt_q, primitive_q, q, qf, vscale, vsub, vzero, Q, QVec};
use crate::scalars::{Cyclotomic, MultiPoly, Periodic};

/// Polynomial in v with k-periodic coefficients.
pub type PCoeff = MultiPoly<Periodic>;

/// Axis-parallel box with per-facet open/closed flags.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub lo: QVec,
    pub hi: QVec,
    pub lo_open: Vec<bool>,
    pub hi_open: Vec<bool>,
}

impl Window {
    pub fn closed(lo: QVec, hi: QVec) -> Self {
        let d = lo.len();
        Window { lo, hi, lo_open: vec![false; d], hi_open: vec![false; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        (0..self.dim()).all(|i| {
            let lo_ok = if self.lo_open[i] { x[i] > self.lo[i] } else { x[i] >= self.lo[i] };
            let hi_ok = if self.hi_open[i] { x[i] < self.hi[i] } else { x[i] <= self.hi[i] };
            lo_ok && hi_ok
        })
    }

    /// Closure of the window as a polyhedron.
    pub fn to_polyhedron(&self) -> Polyhedron {
        Polyhedron::cuboid(&self.lo, &self.hi)
    }

    /// Parse "[-1,2]x(0,1/2]": one interval per axis, brackets choose closedness.
    pub fn parse(s: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut lo_open = Vec::new();
        let mut hi_open = Vec::new();
        for part in s.split('x').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::Parse(format!("malformed interval '{part}'"));
            let first = part.chars().next().ok_or_else(bad)?;
            let last = part.chars().last().ok_or_else(bad)?;
            let lo_o = match first {
                '[' => false,
                '(' => true,
                _ => return Err(bad()),
            };
            let hi_o = match last {
                ']' => false,
                ')' => true,
                _ => return Err(bad()),
            };
            let inner = &part[1..part.len() - 1];
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            lo.push(crate::scalars::rational::parse_q(a.trim())?);
            hi.push(crate::scalars::rational::parse_q(b.trim())?);
            lo_open.push(lo_o);
            hi_open.push(hi_o);
        }
        if lo.is_empty() {
            return Err(Error::Parse("empty window".into()));
        }
        Ok(Window { lo, hi, lo_open, hi_open })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.dim())
            .map(|i| {
                format!(
                    "{}{},{}{}",
                    if self.lo_open[i] { '(' } else { '[' },
                    fmt_q(&self.lo[i]),
                    fmt_q(&self.hi[i]),
                    if self.hi_open[i] { ')' } else { ']' }
                )
            })
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Atoms (λ/k, m(k,λ)) of Θ(m;k) inside a window, sorted by point.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSample {
    pub k: i64,
    pub window: Window,
    pub atoms: Vec<(QVec, Cyclotomic)>,
}

impl ThetaSample {
    pub fn from_atoms(k: i64, window: Window, atoms: Vec<(QVec, Cyclotomic)>) -> Self {
        let mut merged: Vec<(QVec, Cyclotomic)> = Vec::new();
        for (x, w) in atoms.into_iter().sorted_by(|a, b| a.0.cmp(&b.0)) {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1.add_ref(&w),
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|(x, w)| !w.is_zero() && window.contains(x));
        ThetaSample { k, window, atoms: merged }
    }

    pub fn total_mass(&self) -> Cyclotomic {
        self.atoms.iter().fold(Cyclotomic::zero(), |a, (_, w)| a.add_ref(w))
    }

    /// Column names of the tabular export: coordinates, then the weight.
    pub fn header(&self) -> Vec<String> {
        let mut h = default_names(self.window.dim());
        h.push("weight".into());
        h
    }

    /// One row per atom: coordinates as "p/q"; the weight as "p/q" when rational,
    /// else as cyclotomic JSON {level, coeffs}.
    pub fn rows(&self) -> Vec<Vec<String>> {
        self.atoms
            .iter()
            .map(|(x, w)| {
                let mut r: Vec<String> = x.iter().map(fmt_q).collect();
                r.push(match w.as_rational() {
                    Some(v) => fmt_q(v),
                    None => crate::serialize::cyc_to_json(w).to_string(),
                });
                r
            })
            .collect()
    }
}

/// Θ(m;k) restricted to a window.
pub fn theta_sample(m: &PiecewiseQP, k: i64, window: &Window) -> Result<ThetaSample> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    if window.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: window.dim() });
    }
    let scaled = window.to_polyhedron().scale_translate(&q(k), &vzero(m.dim()));
    let kinv = qf(1, k);
    let mut atoms = Vec::new();
    for lam in enumerate_lattice_points(&scaled)? {
        let x = vscale(&to_q(&lam), &kinv);
        if !window.contains(&x) {
            continue;
        }
        let w = m.eval_z(k, &lam)?;
        if !w.is_zero() {
            atoms.push((x, w));
        }
    }
    Ok(ThetaSample::from_atoms(k, window.clone(), atoms))
}

#[derive(Clone, Debug)]
pub enum Region {
    /// Whole space; every piece must have a bounded polyhedron.
    Global,
    Window(Window),
}

/// ⟨Θ(m;k), φ⟩ = Σ m(k,λ) φ(λ/k).
pub fn theta_pair_poly(m: &PiecewiseQP, k: i64, phi: &MultiPoly<Q>, region: &Region) -> Result<Cyclotomic> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!("level k must be positive, got {k}")));
    }
    let kinv = qf(1, k);
    match region {
        Region::Window(w) => {
            let s = theta_sample(m, k, w)?;
            Ok(s.atoms.iter().fold(Cyclotomic::zero(), |acc, (x, wt)| acc.add_ref(&wt.scale(&phi.eval(x)))))
        }
        Region::Global => {
            let mut acc = Cyclotomic::zero();
            for pc in m.pieces() {
                if !pc.p.is_bounded() {
                    return Err(Error::Unbounded(
                        "global pairing needs bounded pieces; use a window or the exponential oracle".into(),
                    ));
                }
                for lam in enumerate_lattice_points(&pc.p.scale_translate(&q(k), &pc.sigma))? {
                    let lq = to_q(&lam);
                    let w = pc.q.eval(k, &lq);
                    acc = acc.add_ref(&w.scale(&phi.eval(&vscale(&lq, &kinv))));
                }
            }
            Ok(acc)
        }
    }
}

/// ∂_{dirs}(coeff · δ_face), δ_face normalized by the lattice Z^d ∩ lin(face).
#[derive(Clone, Debug)]
pub struct DTerm {
    pub face: Polyhedron,
    pub dirs: Vec<QVec>,
    pub coeff: PCoeff,
}

impl DTerm {
    fn order(&self) -> usize {
        self.dirs.len()
    }
}

/// Finite sum of [`DTerm`]s in R^d.
#[derive(Clone, Debug)]
pub struct RDistribution {
    d: usize,
    terms: Vec<DTerm>,
}

fn eval_coeff(c: &PCoeff, k: i64) -> MultiPoly<Cyclotomic> {
    c.map_coeffs(|p| p.at(k).clone())
}

fn derive_all<C: crate::scalars::Ring>(p: &MultiPoly<C>, dirs: &[QVec]) -> MultiPoly<C> {
    let mut r = p.clone();
    for d in dirs {
        r = r.directional_at(d, 0).expect("dimension checked");
    }
    r
}

/// Normal coordinates of an affine subspace: pivot columns of its reduced
/// equations, with the rows that express a vector's normal part.
fn normal_data(h: &AffineSubspace) -> (Vec<usize>, Vec<QVec>) {
    let mut rows: Vec<QVec> = h.equations().into_iter().map(|(a, _)| a).collect();
    let piv = linalg::rref(&mut rows);
    (piv, rows)
}

/// p δ_F only sees p on aff(F): eliminate the pivot coordinates of the
/// hull equations so equal distributions get equal coefficients.
fn restrict_to_hull(p: &PCoeff, h: &AffineSubspace) -> PCoeff {
    let d = h.ambient_dim();
    let mut rows: Vec<QVec> = h
        .equations()
        .into_iter()
        .map(|(a, c)| {
            let mut r = a;
            r.push(c);
            r
        })
        .collect();
    if rows.is_empty() {
        return p.clone();
    }
    let piv = linalg::rref(&mut rows);
    let mut m: Vec<QVec> = (0..d).map(|i| unit(d, i)).collect();
    let mut b = vzero(d);
    for (r, &pc) in rows.iter().zip(&piv) {
        let mut row: QVec = r[..d].iter().map(|x| -x).collect();
        row[pc] = q(0);
        m[pc] = row;
        b[pc] = r[d].clone();
    }
    p.compose_affine(&m, &b, d)
}

fn unit(d: usize, i: usize) -> QVec {
    let mut e = vzero(d);
    e[i] = q(1);
    e
}

impl RDistribution {
    pub fn zero(d: usize) -> Self {
        RDistribution { d, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[DTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// coeff · δ_face (lattice-normalized measure on the face).
    pub fn measure(face: Polyhedron, coeff: PCoeff) -> Self {
        let d = face.ambient_dim();
        let mut r = Self::zero(d);
        r.push(DTerm { face, dirs: vec![], coeff });
        r
    }

    pub fn push(&mut self, t: DTerm) {
        if !t.coeff.is_zero() && !t.face.is_empty() {
            self.terms.push(t);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for t in &o.terms {
            r.push(t.clone());
        }
        r
    }

    pub fn add_assign(&mut self, o: &Self) {
        for t in &o.terms {
            self.push(t.clone());
        }
    }

    pub fn scale_periodic(&self, c: &Periodic) -> Self {
        let mut r = Self::zero(self.d);
        for t in &self.terms {
            r.push(DTerm { face: t.face.clone(), dirs: t.dirs.clone(), coeff: t.coeff.map_coeffs(|x| x.mul_ref(c)) });
        }
        r
    }

    pub fn scale_q(&self, s: &Q) -> Self {
        self.scale_periodic(&Periodic::from_q(s.clone()))
    }

    pub fn neg(&self) -> Self {
        self.scale_q(&q(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// ∂_dir applied to the distribution.
    pub fn derivative(&self, dir: &[Q]) -> Self {
        let mut r = self.clone();
        for t in &mut r.terms {
            t.dirs.push(dir.to_vec());
        }
        r
    }

    /// f·T via f·∂_{D}(pδ) = Σ_{S⊆D} (−1)^{|S|} ∂_{D∖S}((∂_S f) p δ).
    pub fn mul_function(&self, f: &PCoeff) -> Self {
        let mut r = Self::zero(self.d);
        for t in &self.terms {
            let m = t.dirs.len();
            for sz in 0..=m {
                for sub in (0..m).combinations(sz) {
                    let sdirs: Vec<QVec> = sub.iter().map(|&i| t.dirs[i].clone()).collect();
                    let df = derive_all(f, &sdirs);
                    if df.is_zero() {
                        continue;
                    }
                    let rest: Vec<QVec> = (0..m).filter(|i| !sub.contains(i)).map(|i| t.dirs[i].clone()).collect();
                    let mut c = df.mul(&t.coeff);
                    if sz % 2 == 1 {
                        c = c.neg();
                    }
                    r.push(DTerm { face: t.face.clone(), dirs: rest, coeff: c });
                }
            }
        }
        r
    }

    pub fn max_period(&self) -> u64 {
        let mut l = 1u64;
        for t in &self.terms {
            for (_, c) in t.coeff.terms() {
                l = crate::scalars::rational::lcm_u(l, c.period());
            }
        }
        l
    }

    /// ⟨T, φ⟩ at level k; every face must be bounded.
    pub fn pair(&self, k: i64, phi: &MultiPoly<Q>) -> Result<Cyclotomic> {
        let phic: MultiPoly<Cyclotomic> = phi.to_ring();
        let mut acc = Cyclotomic::zero();
        for t in &self.terms {
            let dphi = derive_all(&phic, &t.dirs);
            if dphi.is_zero() {
                continue;
            }
            let integrand = eval_coeff(&t.coeff, k).mul(&dphi);
            let mut v = integrate_poly_over_polytope(&integrand, &t.face)?;
            if t.order() % 2 == 1 {
                v = v.neg_ref();
            }
            acc = acc.add_ref(&v);
        }
        Ok(acc)
    }

    /// Pairing with every face clipped to the box. After removing tangential
    /// derivatives this equals ⟨T, φ⟩ whenever the box contains supp T.
    pub fn pair_window(&self, k: i64, phi: &MultiPoly<Q>, lo: &[Q], hi: &[Q]) -> Result<Cyclotomic> {
        let clip = Polyhedron::cuboid(lo, hi);
        let normal = self.remove_tangential();
        let mut clipped = Self::zero(self.d);
        for t in &normal.terms {
            clipped.push(DTerm { face: t.face.intersect(&clip), dirs: t.dirs.clone(), coeff: t.coeff.clone() });
        }
        clipped.pair(k, phi)
    }

    /// T_v: keep the terms whose face contains v and replace each face by its
    /// tangent cone at v.
    pub fn tangent_at(&self, v: &[Q]) -> Self {
        let mut r = Self::zero(self.d);
        for t in &self.terms {
            if t.face.contains(v) {
                r.push(DTerm { face: t.face.tangent_cone(v), dirs: t.dirs.clone(), coeff: t.coeff.clone() });
            }
        }
        r
    }

    /// Rewrite every term as ∂_N^γ(p δ_F) with N the normal coordinates of
    /// aff(F), using ∂_t(pδ_F) = (∂_t p)δ_F + Σ_G ⟨a_G,t⟩ p δ_G over facets G
    /// with primitive inward normals a_G.
    pub fn remove_tangential(&self) -> Self {
        let mut out = Self::zero(self.d);
        let mut work: Vec<DTerm> = self.terms.clone();
        while let Some(t) = work.pop() {
            if t.coeff.is_zero() || t.face.is_empty() {
                continue;
            }
            let hull = t.face.hull().expect("non-empty").clone();
            let (piv, rows) = normal_data(&hull);
            let normal_part = |v: &QVec| -> QVec {
                let mut nv = vzero(self.d);
                for (r, &p) in rows.iter().zip(&piv) {
                    nv[p] = dot(r, v);
                }
                nv
            };
            let pos = t.dirs.iter().position(|v| normal_part(v) != *v);
            let Some(i) = pos else {
                // all normal: expand into unit directions e_p, p ∈ N
                let mut acc: Vec<(Vec<usize>, Q)> = vec![(vec![], q(1))];
                for v in &t.dirs {
                    let mut next = Vec::new();
                    for (idx, c) in &acc {
                        for &p in &piv {
                            if v[p].is_zero() {
                                continue;
                            }
                            let mut i2 = idx.clone();
                            i2.push(p);
                            next.push((i2, c * &v[p]));
                        }
                    }
                    acc = next;
                }
                for (idx, c) in acc {
                    let dirs = idx.iter().sorted().map(|&p| unit(self.d, p)).collect();
                    out.push(DTerm { face: t.face.clone(), dirs, coeff: t.coeff.scale_q(&c) });
                }
                continue;
            };
            let v = t.dirs[i].clone();
            let nv = normal_part(&v);
            let tv = vsub(&v, &nv);
            let mut rest = t.dirs.clone();
            rest.remove(i);
            if nv.iter().any(|x| !x.is_zero()) {
                let mut d2 = rest.clone();
                d2.push(nv);
                work.push(DTerm { face: t.face.clone(), dirs: d2, coeff: t.coeff.clone() });
            }
            let dp = t.coeff.directional_at(&tv, 0).expect("dimension");
            work.push(DTerm { face: t.face.clone(), dirs: rest.clone(), coeff: dp });
            for (g, w) in facet_weights(&t.face, &tv) {
                work.push(DTerm { face: g, dirs: rest.clone(), coeff: t.coeff.scale_q(&w) });
            }
        }
        out.merge_equal()
    }

    fn merge_equal(&self) -> Self {
        let mut out: Vec<DTerm> = Vec::new();
        for t in &self.terms {
            let key = t.face.key();
            match out.iter_mut().find(|o| o.dirs == t.dirs && o.face.key() == key) {
                Some(o) => o.coeff = o.coeff.add(&t.coeff),
                None => out.push(t.clone()),
            }
        }
        let mut r = Self::zero(self.d);
        for t in out {
            r.push(t);
        }
        r
    }

    /// Canonical form: tangential derivatives removed, and within each
    /// (affine hull, normal derivative) group the face combination rewritten
    /// over `candidates` (faces of the reference polyhedra). Groups that cannot
    /// be expressed that way fall back to arrangement cells and are reported.
    pub fn normal_form(&self, candidates: &[Polyhedron]) -> (Self, Vec<String>) {
        let base = self.remove_tangential();
        let mut groups: Vec<(AffineSubspace, Vec<QVec>, Vec<(Polyhedron, PCoeff)>)> = Vec::new();
        for t in base.terms {
            let h = t.face.hull().expect("non-empty").clone();
            let coeff = restrict_to_hull(&t.coeff, &h);
            if coeff.is_zero() {
                continue;
            }
            match groups.iter_mut().find(|(h2, d2, _)| *h2 == h && *d2 == t.dirs) {
                Some(g) => g.2.push((t.face, coeff)),
                None => groups.push((h, t.dirs, vec![(t.face, coeff)])),
            }
        }
        let mut out = Self::zero(self.d);
        let mut warnings = Vec::new();
        for (h, dirs, items) in groups {
            let cands: Vec<Polyhedron> = candidates
                .iter()
                .filter(|c| !c.is_empty() && c.hull().map(|x| *x == h).unwrap_or(false))
                .cloned()
                .collect();
            let single_candidate = items.len() == 1 && cands.iter().any(|c| c.same_set(&items[0].0));
            if single_candidate {
                out.push(DTerm { face: items[0].0.clone(), dirs, coeff: items[0].1.clone() });
                continue;
            }
            match rewrite_group(&h, &items, &cands) {
                Ok(parts) => {
                    for (f, c) in parts {
                        out.push(DTerm { face: f, dirs: dirs.clone(), coeff: c });
                    }
                }
                Err(cells) => {
                    if !cells.is_empty() {
                        warnings.push(format!("auxiliary faces kept on hull of dimension {}", h.dim()));
                    }
                    for (f, c) in cells {
                        out.push(DTerm { face: f, dirs: dirs.clone(), coeff: c });
                    }
                }
            }
        }
        out.terms.sort_by(term_order);
        (out, warnings)
    }

    pub fn is_zero_structural(&self) -> bool {
        self.remove_tangential().normal_form(&[]).0.is_empty()
    }

    pub fn fmt_terms(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = default_names(self.d);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.terms
            .iter()
            .map(|t| {
                let c = t.coeff.fmt_with(&refs);
                let c = if t.coeff.n_terms() > 1 { format!("({c})") } else { c };
                let mut s = c;
                if !t.dirs.is_empty() {
                    s.push_str(" * ");
                    s.push_str(&fmt_dirs(&t.dirs, &refs));
                }
                s.push_str(" * ");
                s.push_str(&fmt_measure(&t.face));
                s
            })
            .join(" + ")
    }
}

fn term_order(a: &DTerm, b: &DTerm) -> std::cmp::Ordering {
    b.face
        .dim()
        .cmp(&a.face.dim())
        .then(a.dirs.len().cmp(&b.dirs.len()))
        .then(a.face.key().cmp(&b.face.key()))
        .then(a.dirs.cmp(&b.dirs))
}

fn fmt_dirs(dirs: &[QVec], names: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (v, n) in &dirs.iter().chunk_by(|v| (*v).clone()) {
        let count = n.count();
        let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
        let base = if nz.len() == 1 && v[nz[0]].is_one() {
            format!("d{}", names[nz[0]])
        } else {
            format!("d({})", v.iter().map(fmt_q).join(","))
        };
        parts.push(if count == 1 { base } else { format!("{base}^{count}") });
    }
    parts.join(" ")
}

pub fn fmt_measure(f: &Polyhedron) -> String {
    if f.dim() == 0 {
        let v = &f.vertices()[0];
        if v.len() == 1 {
            format!("delta_{}", fmt_q(&v[0]))
        } else {
            format!("delta_({})", v.iter().map(fmt_q).join(","))
        }
    } else {
        format!("mu_{}", f)
    }
}

impl fmt::Display for RDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_terms())
    }
}

/// Facets G of F with ⟨a_G, t⟩ for the primitive inward normal a_G of G in
/// the lattice Z^d ∩ lin(F); t must be parallel to F.
fn facet_weights(face: &Polyhedron, t: &[Q]) -> Vec<(Polyhedron, Q)> {
    let d = face.ambient_dim();
    let Some(full) = face.full_face() else { return vec![] };
    let hull = face.hull().expect("non-empty");
    let basis: Vec<QVec> = saturated_basis(&hull.basis, d).iter().map(|b| to_q(b)).collect();
    let mut out = Vec::new();
    for g in face.facets_of(&full) {
        let Some(&ci) = g.tight.iter().find(|i| !full.tight.contains(i)) else { continue };
        let a = &face.constraints()[ci].a;
        let at = dot(a, t);
        if at.is_zero() {
            continue;
        }
        let vals: QVec = basis.iter().map(|b| dot(a, b)).collect();
        let prim = primitive_q(&vals);
        let j = (0..vals.len()).find(|&j| !vals[j].is_zero()).expect("facet normal not parallel to hull");
        let scale = (&vals[j] / &prim[j]).abs();
        out.push((face.face_poly(&g), at / scale));
    }
    out
}

/// Hyperplane of the arrangement restricted to a hull, normalized.
fn restricted_hyperplane(h: &Halfspace, hull: &AffineSubspace) -> Option<(QVec, Q, Halfspace)> {
    let w: QVec = hull.basis.iter().map(|b| dot(&h.a, b)).collect();
    if w.iter().all(|x| x.is_zero()) {
        return None;
    }
    let c = &h.c - dot(&h.a, &hull.point);
    let j = w.iter().position(|x| !x.is_zero()).unwrap();
    let s = q(1) / &w[j];
    let s = if s.is_negative() { -s } else { s };
    let mut wn = vscale(&w, &s);
    let mut cn = &c * &s;
    let sign = if wn[j].is_negative() { -1 } else { 1 };
    if sign < 0 {
        wn = vscale(&wn, &q(-1));
        cn = -cn;
    }
    Some((wn, cn, h.clone()))
}

/// Rewrite Σ p_F 1_F (a.e. on the hull) as a combination of candidate faces,
/// or return the nonzero arrangement cells when that is impossible.
#[allow(clippy::type_complexity)]
fn rewrite_group(
    hull: &AffineSubspace,
    items: &[(Polyhedron, PCoeff)],
    cands: &[Polyhedron],
) -> std::result::Result<Vec<(Polyhedron, PCoeff)>, Vec<(Polyhedron, PCoeff)>> {
    let d = hull.ambient_dim();
    let e = hull.dim() as isize;
    let mut planes: Vec<(QVec, Q, Halfspace)> = Vec::new();
    for p in items.iter().map(|(p, _)| p).chain(cands.iter()) {
        for h in p.constraints() {
            if let Some(r) = restricted_hyperplane(h, hull) {
                if !planes.iter().any(|(w, c, _)| *w == r.0 && *c == r.1) {
                    planes.push(r);
                }
            }
        }
    }
    let eqs: Vec<Halfspace> = hull.equations().into_iter().map(|(a, c)| Halfspace::equal(a, c)).collect();
    // enumerate full-dimensional cells by sign vectors
    let mut cells: Vec<Polyhedron> = Vec::new();
    let mut stack: Vec<(usize, Vec<Halfspace>)> = vec![(0, eqs.clone())];
    while let Some((i, cons)) = stack.pop() {
        if i == planes.len() {
            cells.push(Polyhedron::new(d, cons));
            continue;
        }
        let h = &planes[i].2;
        for s in [1i64, -1] {
            let mut c2 = cons.clone();
            c2.push(Halfspace::ge(vscale(&h.a, &q(s)), &h.c * q(s)));
            let p = Polyhedron::new(d, c2.clone());
            if p.dim() == e {
                stack.push((i + 1, c2));
            }
        }
    }
    let points: Vec<QVec> = cells.iter().map(|c| c.relative_interior_point().expect("non-empty cell")).collect();
    let values: Vec<PCoeff> = points
        .iter()
        .map(|x| {
            items.iter().filter(|(f, _)| f.contains(x)).fold(PCoeff::zero(d), |a, (_, c)| a.add(c))
        })
        .collect();
    if values.iter().all(|v| v.is_zero()) {
        return Ok(vec![]);
    }
    // order candidates: bounded first, then deterministic by key
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[b].is_bounded().cmp(&cands[a].is_bounded()).then(cands[a].key().cmp(&cands[b].key())));
    let n = order.len();
    let mut mat: Vec<QVec> = points
        .iter()
        .map(|x| order.iter().map(|&j| if cands[j].contains(x) { q(1) } else { q(0) }).collect())
        .collect();
    let mut rhs = values.clone();
    // Gaussian elimination with polynomial right-hand sides
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..mat.len()).find(|&i| !mat[i][c].is_zero()) else { continue };
        mat.swap(r, p);
        rhs.swap(r, p);
        let inv = q(1) / &mat[r][c];
        mat[r] = vscale(&mat[r], &inv);
        rhs[r] = rhs[r].scale_q(&inv);
        for i in 0..mat.len() {
            if i != r && !mat[i][c].is_zero() {
                let f = mat[i][c].clone();
                mat[i] = vsub(&mat[i], &vscale(&mat[r], &f));
                rhs[i] = rhs[i].sub(&rhs[r].scale_q(&f));
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    let consistent = (r..mat.len()).all(|i| rhs[i].is_zero());
    if consistent {
        let mut out = Vec::new();
        for (row, &c) in piv_cols.iter().enumerate() {
            if !rhs[row].is_zero() {
                out.push((cands[order[c]].clone(), rhs[row].clone()));
            }
        }
        return Ok(out);
    }
    Err(cells.into_iter().zip(values).filter(|(_, v)| !v.is_zero()).collect())
}

/// k^s Σ_{n=0}^{N} k^{−n} θ_n(k); exact through the power k^{s−N}.
#[derive(Clone, Debug)]
pub struct AsymptoticSeries {
    d: usize,
    s: i64,
    coeffs: Vec<RDistribution>,
}

fn kpow(k: i64, e: i64) -> Q {
    let kq = q(k);
    if e >= 0 {
        num_traits::pow(kq, e as usize)
    } else {
        q(1) / num_traits::pow(kq, (-e) as usize)
    }
}

impl AsymptoticSeries {
    pub fn zero(d: usize, s: i64, order: usize) -> Self {
        AsymptoticSeries { d, s, coeffs: vec![RDistribution::zero(d); order + 1] }
    }

    pub fn from_coeffs(d: usize, s: i64, coeffs: Vec<RDistribution>) -> Self {
        assert!(!coeffs.is_empty());
        AsymptoticSeries { d, s, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn leading_exponent(&self) -> i64 {
        self.s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Lowest power of k that is exact.
    pub fn floor(&self) -> i64 {
        self.s - self.order() as i64
    }

    pub fn coeff(&self, n: usize) -> &RDistribution {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[RDistribution] {
        &self.coeffs
    }

    /// Coefficient of k^e (zero outside the stored range).
    pub fn at_power(&self, e: i64) -> RDistribution {
        let n = self.s - e;
        if n < 0 || n as usize >= self.coeffs.len() {
            RDistribution::zero(self.d)
        } else {
            self.coeffs[n as usize].clone()
        }
    }

    /// Re-grade to leading exponent s and floor f.
    pub fn regrade(&self, s: i64, floor: i64) -> Self {
        let n = (s - floor).max(0) as usize;
        let coeffs = (0..=n).map(|i| self.at_power(s - i as i64)).collect();
        AsymptoticSeries { d: self.d, s, coeffs }
    }

    pub fn tangent_at(&self, v: &[Q]) -> Self {
        AsymptoticSeries { d: self.d, s: self.s, coeffs: self.coeffs.iter().map(|c| c.tangent_at(v)).collect() }
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.regrade(self.s, self.s - order as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_empty())
    }

    pub fn add(&self, o: &Self) -> Self {
        let s = self.s.max(o.s);
        let f = self.floor().max(o.floor());
        let a = self.regrade(s, f);
        let b = o.regrade(s, f);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.add(y)).collect();
        AsymptoticSeries { d: self.d, s, coeffs }
    }

    pub fn scale_periodic(&self, c: &Periodic) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.scale_periodic(c)).collect();
        AsymptoticSeries { d: self.d, s: self.s, coeffs }
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        self.scale_periodic(&Periodic::from_q(c.clone()))
    }

    pub fn neg(&self) -> Self {
        self.scale_q(&q(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul_k_power(&self, j: i64) -> Self {
        AsymptoticSeries { d: self.d, s: self.s + j, coeffs: self.coeffs.clone() }
    }

    /// e^{−∂_σ/k} A: θ_n contributes (−1)^j ∂_σ^j θ_n / j! to θ_{n+j}.
    pub fn translate(&self, sigma: &[Q]) -> Self {
        if sigma.iter().all(|x| x.is_zero()) {
            return self.clone();
        }
        let n = self.order();
        let mut coeffs = vec![RDistribution::zero(self.d); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut cur = c.clone();
            let mut fact = q(1);
            for j in 0..=(n - i) {
                if j > 0 {
                    cur = cur.derivative(sigma);
                    fact *= q(j as i64);
                }
                let sgn = if j % 2 == 0 { q(1) } else { q(-1) };
                coeffs[i + j].add_assign(&cur.scale_q(&(sgn / &fact)));
            }
        }
        AsymptoticSeries { d: self.d, s: self.s, coeffs }
    }

    /// Multiply by h(k, kv) for a quasi-polynomial h without λ-characters.
    pub fn scale_h(&self, h: &QuasiPolynomial) -> Result<Self> {
        if h.terms().any(|(_, g, _)| g.iter().any(|x| !x.is_zero())) {
            return Err(Error::InvalidArgument("scaling function must be polynomial in λ".into()));
        }
        let parts = split_by_k_degree(h, &vzero(self.d));
        if parts.is_empty() {
            return Ok(Self::zero(self.d, self.s, self.order()));
        }
        let jmax = parts.len() as i64 - 1;
        let mut acc = Self::zero(self.d, self.s + jmax, self.order());
        for (j, pj) in parts.iter().enumerate() {
            if pj.is_zero() {
                continue;
            }
            let coeffs = self.coeffs.iter().map(|c| c.mul_function(pj)).collect();
            let term = AsymptoticSeries { d: self.d, s: self.s + j as i64, coeffs };
            acc = acc.add(&term.regrade(self.s + jmax, self.floor() + j as i64));
        }
        Ok(acc.regrade(self.s + jmax, self.floor()))
    }

    /// k^s Σ k^{−n} ⟨θ_n(k), φ⟩ with bounded faces.
    pub fn pair(&self, k: i64, phi: &MultiPoly<Q>) -> Result<Cyclotomic> {
        let mut acc = Cyclotomic::zero();
        for (n, c) in self.coeffs.iter().enumerate() {
            let v = c.pair(k, phi)?;
            acc = acc.add_ref(&v.scale(&kpow(k, self.s - n as i64)));
        }
        Ok(acc)
    }

    /// Pairing with faces clipped to a box containing the support.
    pub fn pair_window(&self, k: i64, phi: &MultiPoly<Q>, lo: &[Q], hi: &[Q]) -> Result<Cyclotomic> {
        let mut acc = Cyclotomic::zero();
        for (n, c) in self.coeffs.iter().enumerate() {
            let v = c.pair_window(k, phi, lo, hi)?;
            acc = acc.add_ref(&v.scale(&kpow(k, self.s - n as i64)));
        }
        Ok(acc)
    }

    pub fn normal_form(&self, candidates: &[Polyhedron]) -> (Self, Vec<String>) {
        let mut warnings = Vec::new();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let (n, w) = c.normal_form(candidates);
                warnings.extend(w);
                n
            })
            .collect();
        warnings.sort();
        warnings.dedup();
        (AsymptoticSeries { d: self.d, s: self.s, coeffs }, warnings)
    }

    /// Drop vanishing leading coefficients (after a normal form).
    pub fn trim_leading(&self) -> Self {
        let mut r = self.clone();
        while r.coeffs.len() > 1 && r.coeffs[0].is_empty() {
            r.coeffs.remove(0);
            r.s -= 1;
        }
        r
    }

    pub fn pretty(&self) -> String {
        let mut lines = Vec::new();
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_empty() {
                continue;
            }
            let e = self.s - n as i64;
            let kp = match e {
                0 => String::new(),
                1 => "k * ".to_string(),
                _ => format!("k^{e} * "),
            };
            lines.push(format!("{kp}[{}]", c.fmt_terms()));
        }
        if lines.is_empty() {
            return format!("0 + O(k^{})", self.floor() - 1);
        }
        format!("{} + O(k^{})", lines.join("\n + "), self.floor() - 1)
    }
}

impl fmt::Display for AsymptoticSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

/// Faces of every piece polyhedron, used as normal-form candidates.
pub fn reference_faces(polys: &[&Polyhedron]) -> Vec<Polyhedron> {
    let mut out: Vec<Polyhedron> = Vec::new();
    for p in polys {
        for f in p.faces() {
            let fp = p.face_poly(&f);
            if !out.iter().any(|o| o.same_set(&fp)) {
                out.push(fp);
            }
        }
    }
    out
}

/// Constant periodic coefficient polynomial.
pub fn pconst(d: usize, c: Periodic) -> PCoeff {
    PCoeff::constant(d, c)
}

pub fn pconst_q(d: usize, c: Q) -> PCoeff {
    PCoeff::constant(d, Periodic::from_q(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::qvec;

    fn x1() -> MultiPoly<Q> {
        MultiPoly::var(1, 0)
    }

    fn m1() -> PiecewiseQP {
        PiecewiseQP::indicator(Polyhedron::interval(q(0), q(1)))
    }

    #[test]
    fn theta_samples() {
        let w = Window::parse("[-1,2]").unwrap();
        let s = theta_sample(&m1(), 3, &w).unwrap();
        let pts: Vec<QVec> = s.atoms.iter().map(|a| a.0.clone()).collect();
        assert_eq!(pts, vec![vec![q(0)], vec![qf(1, 3)], vec![qf(2, 3)], vec![q(1)]]);
        let m2 = m1().translate(&qvec(&[2])).unwrap();
        let s2 = theta_sample(&m2, 3, &w).unwrap();
        assert_eq!(s2.atoms.len(), 4);
        assert_eq!(s2.atoms[0].0, vec![qf(2, 3)]);
        assert!(theta_sample(&PiecewiseQP::zero(1), 3, &w).unwrap().atoms.is_empty());
        let open = Window::parse("(0,1)").unwrap();
        assert_eq!(theta_sample(&m1(), 3, &open).unwrap().atoms.len(), 2);
    }

    #[test]
    fn theta_pairings() {
        for k in 1..8 {
            let kq = q(k);
            let p0 = theta_pair_poly(&m1(), k, &MultiPoly::one(1), &Region::Global).unwrap();
            assert_eq!(p0, Cyclotomic::from_q(&kq + q(1)));
            let p1 = theta_pair_poly(&m1(), k, &x1(), &Region::Global).unwrap();
            assert_eq!(p1, Cyclotomic::from_q((&kq + q(1)) / q(2)));
            let p2 = theta_pair_poly(&m1(), k, &x1().mul(&x1()), &Region::Global).unwrap();
            assert_eq!(p2, Cyclotomic::from_q(&kq / q(3) + qf(1, 2) + q(1) / (q(6) * &kq)));
        }
        let half = PiecewiseQP::indicator(Polyhedron::ray_from(q(0)));
        assert!(theta_pair_poly(&half, 2, &x1(), &Region::Global).is_err());
    }

    #[test]
    fn rdist_pairings() {
        let pt = |a: i64| Polyhedron::point(&qvec(&[a]));
        let half = q(1) / q(2);
        let t = RDistribution::measure(pt(0), pconst_q(1, half.clone())).add(&RDistribution::measure(pt(1), pconst_q(1, half)));
        assert_eq!(t.pair(1, &x1().mul(&x1())).unwrap(), Cyclotomic::from_q(qf(1, 2)));
        let mu = RDistribution::measure(Polyhedron::interval(q(0), q(1)), pconst_q(1, q(1)));
        assert_eq!(mu.pair(1, &x1()).unwrap(), Cyclotomic::from_q(qf(1, 2)));
        let dd = RDistribution::measure(pt(1), pconst_q(1, q(1))).derivative(&qvec(&[1]));
        assert_eq!(dd.pair(1, &x1().mul(&x1())).unwrap(), Cyclotomic::from_i64(-2));
    }

    #[test]
    fn tangential_derivatives_become_boundary_terms() {
        // ∂μ_[0,∞) = δ_0 through the inward normal at 0
        let t = RDistribution::measure(Polyhedron::ray_from(q(0)), pconst_q(1, q(1))).derivative(&qvec(&[1]));
        let n = t.remove_tangential();
        assert_eq!(n.terms().len(), 1);
        assert_eq!(n.terms()[0].face.dim(), 0);
        let phi = x1().mul(&x1()).add(&MultiPoly::one(1));
        assert_eq!(n.pair(1, &phi).unwrap(), Cyclotomic::from_i64(1));
        // ∂μ_[0,∞) − δ_0 vanishes, seen through a window
        let z = t.sub(&RDistribution::measure(Polyhedron::point(&qvec(&[0])), pconst_q(1, q(1))));
        assert!(z.pair_window(1, &phi, &qvec(&[-5]), &qvec(&[5])).unwrap().is_zero());
    }

    #[test]
    fn arrangement_rewrite() {
        let one = pconst_q(1, q(1));
        let t = RDistribution::measure(Polyhedron::ray_from(q(0)), one.clone())
            .add(&RDistribution::measure(Polyhedron::ray_to(q(1)), one.clone()))
            .sub(&RDistribution::measure(Polyhedron::whole(1), one.clone()));
        let cands = reference_faces(&[&Polyhedron::interval(q(0), q(1))]);
        let (n, w) = t.normal_form(&cands);
        assert!(w.is_empty());
        assert_eq!(n.terms().len(), 1);
        assert!(n.terms()[0].face.same_set(&Polyhedron::interval(q(0), q(1))));
        assert!(t.sub(&t).is_zero_structural());
    }

    #[test]
    fn facet_weights_respect_lattice_normalization() {
        // segment from (0,0) to (2,2): facets at the endpoints with weights ±1 along (1,1)
        let seg = Polyhedron::from_ineqs(
            2,
            &[(qvec(&[1, -1]), q(0)), (qvec(&[-1, 1]), q(0)), (qvec(&[1, 0]), q(0)), (qvec(&[-1, 0]), q(-2))],
        );
        let w = facet_weights(&seg, &qvec(&[1, 1]));
        let mut vals: Vec<Q> = w.iter().map(|x| x.1.clone()).collect();
        vals.sort();
        assert_eq!(vals, vec![q(-1), q(1)]);
        // ⟨∂_{(1,1)} μ_seg, φ⟩ = −∫ ∂φ = φ(0) − φ(2,2) for φ = x
        let t = RDistribution::measure(seg, pconst(2, Periodic::one())).derivative(&qvec(&[1, 1]));
        let phi = MultiPoly::var(2, 0);
        assert_eq!(t.pair(1, &phi).unwrap(), Cyclotomic::from_i64(-2));
        assert_eq!(t.remove_tangential().pair(1, &phi).unwrap(), Cyclotomic::from_i64(-2));
    }

    #[test]
    fn series_translation_round_trip() {
        let mu = RDistribution::measure(Polyhedron::interval(q(0), q(1)), pconst_q(1, q(1)));
        let a = AsymptoticSeries::from_coeffs(1, 1, vec![mu, RDistribution::zero(1), RDistribution::zero(1), RDistribution::zero(1)]);
        let b = a.translate(&qvec(&[2])).translate(&qvec(&[-2]));
        let phi = x1().mul(&x1()).mul(&x1());
        for k in 1..5 {
            assert_eq!(a.pair(k, &phi).unwrap(), b.pair(k, &phi).unwrap());
        }
    }

    #[test]
    fn window_parse_errors() {
        assert!(Window::parse("[0,1/0]").is_err());
        assert!(Window::parse("0,1").is_err());
        let w = Window::parse("[-1,2]x(0,1]").unwrap();
        assert_eq!(w.to_string(), "[-1,2]x(0,1]");
    }
}
