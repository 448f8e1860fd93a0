//! Rational polyhedra in H-representation with lazily computed generators,
//! faces, tangent cones, signed cone decompositions and exact integration.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{saturated_basis, to_q, ZVec};
use crate::linalg;
use crate::scalars::rational::{dot, factorial, primitive_q, q, qf, qint, vadd, vscale, vsub, vzero, Q, QVec};
use crate::scalars::{MultiPoly, Ring};

/// ⟨a,x⟩ ≥ c, or ⟨a,x⟩ = c when `eq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub a: QVec,
    pub c: Q,
    pub eq: bool,
}

impl Halfspace {
    pub fn ge(a: QVec, c: Q) -> Self {
        Halfspace { a, c, eq: false }
    }

    pub fn equal(a: QVec, c: Q) -> Self {
        Halfspace { a, c, eq: true }
    }

    pub fn slack(&self, x: &[Q]) -> Q {
        dot(&self.a, x) - &self.c
    }

    pub fn holds(&self, x: &[Q]) -> bool {
        let s = self.slack(x);
        if self.eq {
            s.is_zero()
        } else {
            !s.is_negative()
        }
    }
}

/// point + span(basis); the basis is kept in reduced row echelon form and the
/// point has zero entries at pivot coordinates, so equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineSubspace {
    pub point: QVec,
    pub basis: Vec<QVec>,
}

impl AffineSubspace {
    pub fn new(point: QVec, vectors: &[QVec]) -> Self {
        let mut b: Vec<QVec> = vectors.to_vec();
        let piv = if b.is_empty() { vec![] } else { linalg::rref(&mut b) };
        let mut p = point;
        for (row, &c) in b.iter().zip(&piv) {
            let f = p[c].clone();
            if !f.is_zero() {
                p = vsub(&p, &vscale(row, &f));
            }
        }
        AffineSubspace { point: p, basis: b }
    }

    pub fn ambient_dim(&self) -> usize {
        self.point.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        linalg::in_span(&self.basis, &vsub(x, &self.point))
    }

    /// Normals n with ⟨n,x⟩ = ⟨n,point⟩ cutting out the subspace.
    pub fn equations(&self) -> Vec<(QVec, Q)> {
        let d = self.ambient_dim();
        let normals = if self.basis.is_empty() { linalg::identity(d) } else { linalg::nullspace(&self.basis, d) };
        normals
            .into_iter()
            .map(|n| {
                let n = primitive_q(&n);
                let c = dot(&n, &self.point);
                (n, c)
            })
            .collect()
    }

    /// Nearest point to the origin.
    pub fn min_norm_point(&self) -> QVec {
        if self.basis.is_empty() {
            return self.point.clone();
        }
        let k = self.basis.len();
        let gram: Vec<QVec> = (0..k).map(|i| (0..k).map(|j| dot(&self.basis[i], &self.basis[j])).collect()).collect();
        let rhs: QVec = self.basis.iter().map(|b| dot(b, &self.point)).collect();
        let c = linalg::solve(&gram, &rhs, k).expect("gram matrix is invertible");
        let mut x = self.point.clone();
        for (ci, b) in c.iter().zip(&self.basis) {
            x = vsub(&x, &vscale(b, ci));
        }
        x
    }
}

/// Generator data of a non-empty polyhedron P = conv(V) + cone(R) + L,
/// with V and R taken inside the orthogonal complement of L.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub empty: bool,
    pub vertices: Vec<QVec>,
    /// Primitive integer directions of the extreme rays.
    pub rays: Vec<QVec>,
    /// Lineality space basis in reduced row echelon form.
    pub lineality: Vec<QVec>,
    pub hull: Option<AffineSubspace>,
}

/// A face given by the indices of the parent's vertices and rays it contains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub verts: Vec<usize>,
    pub rays: Vec<usize>,
    pub tight: Vec<usize>,
    pub dim: usize,
}

/// Canonical identity of a polyhedron: lineality, vertices and rays.
pub type PolyKey = (Vec<QVec>, Vec<QVec>, Vec<QVec>);

#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    cons: Vec<Halfspace>,
    info: Arc<OnceLock<Analysis>>,
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        if self.dim == 1 {
            let info = self.info();
            if info.lineality.len() == 1 {
                return write!(f, "R");
            }
            let v: Vec<String> = info.vertices.iter().map(|v| crate::scalars::rational::fmt_q(&v[0])).collect();
            return match (info.vertices.len(), info.rays.first()) {
                (1, None) => write!(f, "{{{}}}", v[0]),
                (1, Some(r)) if r[0].is_positive() => write!(f, "[{},∞)", v[0]),
                (1, Some(_)) => write!(f, "(-∞,{}]", v[0]),
                _ => {
                    let (a, b) = if info.vertices[0][0] < info.vertices[1][0] { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
                    write!(f, "[{},{}]", a, b)
                }
            };
        }
        let info = self.info();
        let fv = |v: &QVec| format!("({})", v.iter().map(crate::scalars::rational::fmt_q).join(","));
        write!(f, "conv{{{}}}", info.vertices.iter().map(fv).join(" "))?;
        if !info.rays.is_empty() {
            write!(f, "+cone{{{}}}", info.rays.iter().map(fv).join(" "))?;
        }
        if !info.lineality.is_empty() {
            write!(f, "+lin{{{}}}", info.lineality.iter().map(fv).join(" "))?;
        }
        Ok(())
    }
}

impl Polyhedron {
    pub fn new(dim: usize, cons: Vec<Halfspace>) -> Self {
        for h in &cons {
            assert_eq!(h.a.len(), dim, "constraint dimension");
        }
        Polyhedron { dim, cons, info: Arc::new(OnceLock::new()) }
    }

    pub fn try_new(dim: usize, cons: Vec<Halfspace>) -> Result<Self> {
        for h in &cons {
            if h.a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.a.len() });
            }
        }
        Ok(Self::new(dim, cons))
    }

    fn with_info(dim: usize, cons: Vec<Halfspace>, info: Analysis) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(info);
        Polyhedron { dim, cons, info: Arc::new(cell) }
    }

    pub fn from_ineqs(dim: usize, ineqs: &[(QVec, Q)]) -> Self {
        Self::new(dim, ineqs.iter().map(|(a, c)| Halfspace::ge(a.clone(), c.clone())).collect())
    }

    pub fn whole(dim: usize) -> Self {
        Self::new(dim, vec![])
    }

    pub fn empty(dim: usize) -> Self {
        Self::new(dim, vec![Halfspace::ge(vzero(dim), q(1))])
    }

    pub fn point(p: &[Q]) -> Self {
        let d = p.len();
        let cons = (0..d)
            .map(|i| {
                let mut a = vzero(d);
                a[i] = q(1);
                Halfspace::equal(a, p[i].clone())
            })
            .collect();
        Self::new(d, cons)
    }

    /// Closed box Π [lo_i, hi_i].
    pub fn cuboid(lo: &[Q], hi: &[Q]) -> Self {
        let d = lo.len();
        let mut cons = Vec::new();
        for i in 0..d {
            let mut a = vzero(d);
            a[i] = q(1);
            cons.push(Halfspace::ge(a.clone(), lo[i].clone()));
            cons.push(Halfspace::ge(vscale(&a, &q(-1)), -hi[i].clone()));
        }
        Self::new(d, cons)
    }

    pub fn interval(a: Q, b: Q) -> Self {
        Self::cuboid(&[a], &[b])
    }

    /// [a, ∞) in one dimension.
    pub fn ray_from(a: Q) -> Self {
        Self::new(1, vec![Halfspace::ge(vec![q(1)], a)])
    }

    /// (-∞, b] in one dimension.
    pub fn ray_to(b: Q) -> Self {
        Self::new(1, vec![Halfspace::ge(vec![q(-1)], -b)])
    }

    /// Closed cone apex + cone(gens) + span(lineality), for independent generators.
    pub fn from_generators(apex: &[Q], gens: &[QVec], lineality: &[QVec]) -> Self {
        let d = apex.len();
        let mut cols: Vec<QVec> = gens.to_vec();
        cols.extend(lineality.iter().cloned());
        let s = gens.len();
        let t = lineality.len();
        let mut comp = Vec::new();
        for i in 0..d {
            let mut e = vzero(d);
            e[i] = q(1);
            let mut trial = cols.clone();
            trial.extend(comp.iter().cloned());
            trial.push(e.clone());
            if linalg::rank(&trial) == trial.len() {
                comp.push(e);
            }
        }
        cols.extend(comp);
        let m = linalg::from_cols(&cols, d);
        let inv = linalg::inverse(&m).expect("generators must be independent");
        let mut cons = Vec::new();
        for (i, row) in inv.iter().enumerate() {
            if i >= s && i < s + t {
                continue;
            }
            let a = primitive_q(row);
            let c = dot(&a, apex);
            cons.push(if i < s { Halfspace::ge(a, c) } else { Halfspace::equal(a, c) });
        }
        Self::new(d, cons)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Halfspace] {
        &self.cons
    }

    pub fn with_constraint(&self, h: Halfspace) -> Self {
        let mut c = self.cons.clone();
        c.push(h);
        Self::new(self.dim, c)
    }

    pub fn intersect(&self, o: &Polyhedron) -> Self {
        let mut c = self.cons.clone();
        c.extend(o.cons.iter().cloned());
        Self::new(self.dim, c)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.cons.iter().all(|h| h.holds(x))
    }

    pub fn info(&self) -> &Analysis {
        self.info.get_or_init(|| analyze(self.dim, &self.cons))
    }

    pub fn is_empty(&self) -> bool {
        self.info().empty
    }

    /// Dimension of the affine hull, -1 when empty.
    pub fn dim(&self) -> isize {
        match &self.info().hull {
            Some(h) => h.dim() as isize,
            None => -1,
        }
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.info().vertices
    }

    pub fn rays(&self) -> &[QVec] {
        &self.info().rays
    }

    pub fn lineality(&self) -> &[QVec] {
        &self.info().lineality
    }

    pub fn is_bounded(&self) -> bool {
        let i = self.info();
        i.empty || (i.rays.is_empty() && i.lineality.is_empty())
    }

    pub fn is_pointed(&self) -> bool {
        self.info().lineality.is_empty()
    }

    /// A cone in the sense of having a single minimal face.
    pub fn is_cone(&self) -> bool {
        !self.is_empty() && self.info().vertices.len() == 1
    }

    pub fn hull(&self) -> Result<&AffineSubspace> {
        self.info().hull.as_ref().ok_or(Error::EmptyPolyhedron)
    }

    /// (affine hull, apex set, lineality basis). The apex set is the minimal
    /// face when P is a cone and the lineality translate of a vertex otherwise.
    pub fn affine_hull_and_apex(&self) -> Result<(AffineSubspace, AffineSubspace, Vec<QVec>)> {
        let hull = self.hull()?.clone();
        let info = self.info();
        let apex = AffineSubspace::new(info.vertices[0].clone(), &info.lineality);
        Ok((hull, apex, info.lineality.clone()))
    }

    /// Apex set of a cone.
    pub fn apex(&self) -> Option<AffineSubspace> {
        if !self.is_cone() {
            return None;
        }
        let info = self.info();
        Some(AffineSubspace::new(info.vertices[0].clone(), &info.lineality))
    }

    pub fn key(&self) -> PolyKey {
        let info = self.info();
        let mut v = info.vertices.clone();
        v.sort();
        let mut r = info.rays.clone();
        r.sort();
        (info.lineality.clone(), v, r)
    }

    pub fn same_set(&self, o: &Polyhedron) -> bool {
        self.dim == o.dim && self.key() == o.key()
    }

    pub fn tight_at(&self, x: &[Q]) -> Vec<usize> {
        (0..self.cons.len()).filter(|&i| self.cons[i].slack(x).is_zero()).collect()
    }

    /// Tangent cone at v; empty when v ∉ P.
    pub fn tangent_cone(&self, v: &[Q]) -> Polyhedron {
        if !self.contains(v) {
            return Polyhedron::empty(self.dim);
        }
        let cons = self.tight_at(v).into_iter().map(|i| self.cons[i].clone()).collect();
        Polyhedron::new(self.dim, cons)
    }

    fn gens_dim(&self, verts: &[usize], rays: &[usize]) -> usize {
        let info = self.info();
        let v0 = &info.vertices[verts[0]];
        let mut vs: Vec<QVec> = verts[1..].iter().map(|&i| vsub(&info.vertices[i], v0)).collect();
        vs.extend(rays.iter().map(|&i| info.rays[i].clone()));
        vs.extend(info.lineality.iter().cloned());
        if vs.is_empty() {
            0
        } else {
            linalg::rank(&vs)
        }
    }

    fn face_from_gens(&self, verts: Vec<usize>, rays: Vec<usize>) -> Face {
        let info = self.info();
        let tight = (0..self.cons.len())
            .filter(|&i| {
                let h = &self.cons[i];
                h.eq || (verts.iter().all(|&v| h.slack(&info.vertices[v]).is_zero())
                    && rays.iter().all(|&r| dot(&h.a, &info.rays[r]).is_zero()))
            })
            .collect();
        let dim = self.gens_dim(&verts, &rays);
        Face { verts, rays, tight, dim }
    }

    pub fn full_face(&self) -> Option<Face> {
        if self.is_empty() {
            return None;
        }
        let info = self.info();
        Some(self.face_from_gens((0..info.vertices.len()).collect(), (0..info.rays.len()).collect()))
    }

    /// Facets of a face, as faces of self.
    pub fn facets_of(&self, f: &Face) -> Vec<Face> {
        let info = self.info();
        let mut out: Vec<Face> = Vec::new();
        let mut seen = HashSet::new();
        for (i, h) in self.cons.iter().enumerate() {
            if f.tight.contains(&i) {
                continue;
            }
            let verts: Vec<usize> = f.verts.iter().copied().filter(|&v| h.slack(&info.vertices[v]).is_zero()).collect();
            if verts.is_empty() {
                continue;
            }
            let rays: Vec<usize> = f.rays.iter().copied().filter(|&r| dot(&h.a, &info.rays[r]).is_zero()).collect();
            if !seen.insert((verts.clone(), rays.clone())) {
                continue;
            }
            let g = self.face_from_gens(verts, rays);
            if g.dim + 1 == f.dim {
                out.push(g);
            }
        }
        out
    }

    /// All non-empty faces including P itself, by decreasing dimension.
    pub fn faces(&self) -> Vec<Face> {
        let Some(top) = self.full_face() else { return vec![] };
        let mut all = vec![top.clone()];
        let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
        seen.insert((top.verts.clone(), top.rays.clone()));
        let mut frontier = vec![top];
        while let Some(f) = frontier.pop() {
            for g in self.facets_of(&f) {
                if seen.insert((g.verts.clone(), g.rays.clone())) {
                    frontier.push(g.clone());
                    all.push(g);
                }
            }
        }
        all.sort_by(|a, b| b.dim.cmp(&a.dim).then(a.verts.cmp(&b.verts)).then(a.rays.cmp(&b.rays)));
        all
    }

    pub fn face_poly(&self, f: &Face) -> Polyhedron {
        let info = self.info();
        let cons: Vec<Halfspace> = self
            .cons
            .iter()
            .enumerate()
            .map(|(i, h)| if f.tight.contains(&i) { Halfspace::equal(h.a.clone(), h.c.clone()) } else { h.clone() })
            .collect();
        let vertices: Vec<QVec> = f.verts.iter().map(|&i| info.vertices[i].clone()).collect();
        let rays: Vec<QVec> = f.rays.iter().map(|&i| info.rays[i].clone()).collect();
        let a = from_generators_info(&vertices, &rays, &info.lineality);
        Polyhedron::with_info(self.dim, cons, a)
    }

    pub fn tangent_cone_at_face(&self, f: &Face) -> Polyhedron {
        let cons = f.tight.iter().map(|&i| self.cons[i].clone()).collect();
        Polyhedron::new(self.dim, cons)
    }

    /// kP + σ.
    pub fn scale_translate(&self, k: &Q, sigma: &[Q]) -> Polyhedron {
        let cons = self
            .cons
            .iter()
            .map(|h| Halfspace { a: h.a.clone(), c: k * &h.c + dot(&h.a, sigma), eq: h.eq })
            .collect();
        Polyhedron::new(self.dim, cons)
    }

    pub fn translate(&self, sigma: &[Q]) -> Polyhedron {
        self.scale_translate(&q(1), sigma)
    }

    /// {y ∈ Q^n : M y + b ∈ P} for a dim×n matrix M.
    pub fn preimage(&self, m: &[QVec], b: &[Q], n: usize) -> Polyhedron {
        let mt = linalg::transpose(m, n);
        let cons = self
            .cons
            .iter()
            .map(|h| Halfspace { a: linalg::mat_vec(&mt, &h.a), c: &h.c - dot(&h.a, b), eq: h.eq })
            .collect();
        Polyhedron::new(n, cons)
    }

    /// Bounded interior-ish point: barycenter of vertices plus the sum of rays.
    pub fn relative_interior_point(&self) -> Option<QVec> {
        if self.is_empty() {
            return None;
        }
        let info = self.info();
        let n = q(info.vertices.len() as i64);
        let mut p = vzero(self.dim);
        for v in &info.vertices {
            p = vadd(&p, v);
        }
        p = vscale(&p, &(q(1) / n));
        for r in &info.rays {
            p = vadd(&p, r);
        }
        Some(p)
    }
}

fn from_generators_info(vertices: &[QVec], rays: &[QVec], lineality: &[QVec]) -> Analysis {
    let v0 = vertices[0].clone();
    let mut lin: Vec<QVec> = vertices[1..].iter().map(|v| vsub(v, &v0)).collect();
    lin.extend(rays.iter().cloned());
    lin.extend(lineality.iter().cloned());
    Analysis {
        empty: false,
        vertices: vertices.to_vec(),
        rays: rays.to_vec(),
        lineality: lineality.to_vec(),
        hull: Some(AffineSubspace::new(v0, &lin)),
    }
}

fn rref_basis(vs: &[QVec]) -> Vec<QVec> {
    let mut b = vs.to_vec();
    if b.is_empty() {
        return b;
    }
    linalg::rref(&mut b);
    b
}

fn analyze(dim: usize, cons: &[Halfspace]) -> Analysis {
    let empty = Analysis { empty: true, vertices: vec![], rays: vec![], lineality: vec![], hull: None };
    let rows: Vec<QVec> = cons.iter().map(|h| h.a.clone()).collect();
    let lineality = if rows.is_empty() { linalg::identity(dim) } else { rref_basis(&linalg::nullspace(&rows, dim)) };
    // work inside L^⊥ so that every minimal face is a vertex
    let mut eq_a: Vec<QVec> = Vec::new();
    let mut eq_c: Vec<Q> = Vec::new();
    for h in cons.iter().filter(|h| h.eq) {
        eq_a.push(h.a.clone());
        eq_c.push(h.c.clone());
    }
    for l in &lineality {
        eq_a.push(l.clone());
        eq_c.push(Q::zero());
    }
    let ineq: Vec<usize> = (0..cons.len()).filter(|&i| !cons[i].eq).collect();
    let r0 = if eq_a.is_empty() { 0 } else { linalg::rank(&eq_a) };
    let need = dim - r0;

    let mut vset: BTreeSet<QVec> = BTreeSet::new();
    for sub in ineq.iter().combinations(need) {
        let mut a = eq_a.clone();
        let mut c = eq_c.clone();
        for &&i in &sub {
            a.push(cons[i].a.clone());
            c.push(cons[i].c.clone());
        }
        if linalg::rank(&a) < dim {
            continue;
        }
        let Some(x) = linalg::solve(&a, &c, dim) else { continue };
        if cons.iter().all(|h| h.holds(&x)) {
            vset.insert(x);
        }
    }
    if vset.is_empty() {
        return empty;
    }
    let vertices: Vec<QVec> = vset.into_iter().collect();

    let mut rset: BTreeSet<QVec> = BTreeSet::new();
    if need >= 1 {
        for sub in ineq.iter().combinations(need - 1) {
            let mut a = eq_a.clone();
            for &&i in &sub {
                a.push(cons[i].a.clone());
            }
            let ns = if a.is_empty() { linalg::identity(dim) } else { linalg::nullspace(&a, dim) };
            if ns.len() != 1 {
                continue;
            }
            let r = &ns[0];
            let vals: Vec<Q> = ineq.iter().map(|&i| dot(&cons[i].a, r)).collect();
            let dir = if vals.iter().all(|v| !v.is_negative()) {
                r.clone()
            } else if vals.iter().all(|v| !v.is_positive()) {
                vscale(r, &q(-1))
            } else {
                continue;
            };
            rset.insert(primitive_q(&dir));
        }
    }
    let rays: Vec<QVec> = rset.into_iter().collect();
    from_generators_info(&vertices, &rays, &lineality)
}

/// Signed tangent-cone decomposition of a bounded polyhedron.
pub fn brianchon_gram(p: &Polyhedron) -> Result<Vec<(i32, Polyhedron)>> {
    if p.is_empty() {
        return Err(Error::EmptyPolyhedron);
    }
    if !p.is_bounded() {
        return Err(Error::Unbounded("Brianchon-Gram needs a bounded polyhedron".into()));
    }
    Ok(brianchon_gram_general(p))
}

/// [P] = Σ_F (-1)^{dim F - dim L} [T_F P] over faces F that are bounded modulo
/// the lineality space L. Valid for every non-empty polyhedron.
pub fn brianchon_gram_general(p: &Polyhedron) -> Vec<(i32, Polyhedron)> {
    let l = p.lineality().len();
    p.faces()
        .into_iter()
        .filter(|f| f.rays.is_empty())
        .map(|f| {
            let sign = if (f.dim - l).is_multiple_of(2) { 1 } else { -1 };
            (sign, p.tangent_cone_at_face(&f))
        })
        .collect()
}

/// Coordinates of the vectors in a basis of their span.
fn span_coords(vs: &[QVec]) -> (Vec<QVec>, Vec<QVec>) {
    let basis = rref_basis(vs);
    let coords = vs.iter().map(|v| linalg::coords_in(&basis, v).expect("in span")).collect();
    (basis, coords)
}

/// Inward facet normals (in span coordinates) of cone(gens), deduplicated.
fn cone_facets(coords: &[QVec], e: usize) -> Vec<QVec> {
    let mut out: BTreeSet<QVec> = BTreeSet::new();
    if e == 0 {
        return vec![];
    }
    for sub in (0..coords.len()).combinations(e - 1) {
        let rows: Vec<QVec> = sub.iter().map(|&i| coords[i].clone()).collect();
        let ns = if rows.is_empty() { linalg::identity(e) } else { linalg::nullspace(&rows, e) };
        if ns.len() != 1 {
            continue;
        }
        let n = &ns[0];
        let vals: Vec<Q> = coords.iter().map(|c| dot(n, c)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            out.insert(primitive_q(n));
        } else if vals.iter().all(|v| !v.is_positive()) {
            out.insert(primitive_q(&vscale(n, &q(-1))));
        }
    }
    out.into_iter().collect()
}

fn dedupe_directions(gens: &[QVec]) -> Vec<QVec> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in gens {
        if g.iter().all(|x| x.is_zero()) {
            continue;
        }
        if seen.insert(primitive_q(g)) {
            out.push(g.clone());
        }
    }
    out
}

/// Is cone(gens) pointed (contains no line)?
pub fn cone_is_pointed(gens: &[QVec]) -> bool {
    let gens = dedupe_directions(gens);
    if gens.is_empty() {
        return true;
    }
    let (_, coords) = span_coords(&gens);
    let e = coords[0].len();
    let normals = cone_facets(&coords, e);
    !normals.is_empty() && linalg::rank(&normals) == e
}

/// Pulling triangulation of a pointed cone given by generators; later
/// generators are pulled first, so non-extreme generators split the cone.
pub fn triangulate_cone(gens: &[QVec]) -> Vec<Vec<QVec>> {
    let gens = dedupe_directions(gens);
    if gens.is_empty() {
        return vec![vec![]];
    }
    let e = linalg::rank(&gens);
    if gens.len() == e {
        return vec![gens];
    }
    let (_, coords) = span_coords(&gens);
    let p = gens.len() - 1;
    let mut out = Vec::new();
    for n in cone_facets(&coords, e) {
        if dot(&n, &coords[p]).is_zero() {
            continue;
        }
        let facet: Vec<QVec> = (0..gens.len()).filter(|&j| dot(&n, &coords[j]).is_zero()).map(|j| gens[j].clone()).collect();
        for mut s in triangulate_cone(&facet) {
            s.push(gens[p].clone());
            out.push(s);
        }
    }
    out
}

/// Pulling triangulation of a polytope into simplices (vertex lists).
pub fn triangulate_polytope(vertices: &[QVec]) -> Vec<Vec<QVec>> {
    let lifted: Vec<QVec> = vertices
        .iter()
        .map(|v| {
            let mut w = vec![q(1)];
            w.extend(v.iter().cloned());
            w
        })
        .collect();
    triangulate_cone(&lifted)
        .into_iter()
        .map(|s| s.into_iter().map(|w| vscale(&w[1..], &(q(1) / &w[0]))).collect())
        .collect()
}

/// apex + {Σ c_i g_i : c_i ≥ 0, c_i > 0 where open_i} + span(lineality).
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialCone {
    pub apex: QVec,
    pub gens: Vec<QVec>,
    pub open: Vec<bool>,
    pub lineality: Vec<QVec>,
}

impl SimplicialCone {
    pub fn contains(&self, x: &[Q]) -> bool {
        let mut cols = self.gens.clone();
        cols.extend(self.lineality.iter().cloned());
        let rel = vsub(x, &self.apex);
        if cols.is_empty() {
            return rel.iter().all(|t| t.is_zero());
        }
        let Some(c) = linalg::coords_in(&cols, &rel) else { return false };
        let m = linalg::from_cols(&cols, x.len());
        if linalg::mat_vec(&m, &c) != rel {
            return false;
        }
        (0..self.gens.len()).all(|i| if self.open[i] { c[i].is_positive() } else { !c[i].is_negative() })
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        Polyhedron::from_generators(&self.apex, &self.gens, &self.lineality)
    }

    /// Signed closed cones whose indicators sum to this half-open cone.
    pub fn closed_expansion(&self) -> Vec<(i32, Polyhedron)> {
        let open: Vec<usize> = (0..self.gens.len()).filter(|&i| self.open[i]).collect();
        let mut out = Vec::new();
        for r in 0..=open.len() {
            for drop in open.iter().combinations(r) {
                let gens: Vec<QVec> =
                    (0..self.gens.len()).filter(|i| !drop.contains(&i)).map(|i| self.gens[i].clone()).collect();
                let sign = if r % 2 == 0 { 1 } else { -1 };
                out.push((sign, Polyhedron::from_generators(&self.apex, &gens, &self.lineality)));
            }
        }
        out
    }
}

/// Half-open triangulation of apex + cone(gens) + span(lineality) into
/// disjoint simplicial cones: a generic interior point y decides, for each
/// facet of each simplex, whether it is kept (y on its inner side).
pub fn half_open_decomposition(apex: &[Q], gens: &[QVec], lineality: &[QVec]) -> Vec<SimplicialCone> {
    let gens = dedupe_directions(gens);
    let simplices = triangulate_cone(&gens);
    if gens.is_empty() {
        return vec![SimplicialCone { apex: apex.to_vec(), gens: vec![], open: vec![], lineality: lineality.to_vec() }];
    }
    for t in [qf(1, 3), qf(1, 5), qf(1, 7), qf(2, 11), qf(3, 13), qf(5, 17), qf(7, 19), qf(4, 23)] {
        let mut y = vzero(apex.len());
        let mut w = q(1);
        for g in &gens {
            w *= &t;
            y = vadd(&y, &vscale(g, &(q(1) + &w)));
        }
        let mut cones = Vec::new();
        let mut ok = true;
        for s in &simplices {
            let c = linalg::coords_in(s, &y).expect("y in span");
            if c.iter().any(|x| x.is_zero()) {
                ok = false;
                break;
            }
            cones.push(SimplicialCone {
                apex: apex.to_vec(),
                gens: s.clone(),
                open: c.iter().map(|x| x.is_negative()).collect(),
                lineality: lineality.to_vec(),
            });
        }
        if ok {
            return cones;
        }
    }
    panic!("no generic interior point found");
}

/// Integer points of the half-open parallelepiped {Σ c_i g_i : c_i ∈ [0,1)},
/// with (0,1] for open generators. Generators must be integral and independent.
pub fn parallelepiped_points(gens: &[QVec], open: &[bool]) -> Vec<ZVec> {
    let d = gens.first().map(|g| g.len()).unwrap_or(0);
    if gens.is_empty() {
        return vec![vec![BigInt::zero(); d]];
    }
    let mut lo = vec![BigInt::zero(); d];
    let mut hi = vec![BigInt::zero(); d];
    for g in gens {
        for i in 0..d {
            let x = g[i].to_integer();
            if x.is_negative() {
                lo[i] += &x;
            } else {
                hi[i] += &x;
            }
        }
    }
    let basis = rref_basis(gens);
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        let x = to_q(&cur);
        if linalg::in_span(&basis, &x) {
            if let Some(c) = linalg::coords_in(gens, &x) {
                let inside = c.iter().zip(open).all(|(ci, &o)| {
                    if o {
                        ci.is_positive() && *ci <= q(1)
                    } else {
                        !ci.is_negative() && *ci < q(1)
                    }
                });
                if inside {
                    out.push(cur.clone());
                }
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            cur[i] += 1;
            if cur[i] <= hi[i] {
                break;
            }
            cur[i] = lo[i].clone();
            i += 1;
        }
    }
}

/// A simplicial piece of a cone with its primitive integral generators and the
/// coset representatives of their lattice in Z^d ∩ span.
#[derive(Clone, Debug)]
pub struct UnimodularPiece {
    pub gens: Vec<QVec>,
    pub open: Vec<bool>,
    pub reps: Vec<ZVec>,
}

/// C ∩ Z^d = ⊔_pieces ⊔_δ (δ + Σ Z≥0 α_i) for a pointed cone with apex 0.
pub fn triangulate_and_unimodularize(gens: &[QVec]) -> Result<Vec<UnimodularPiece>> {
    if !cone_is_pointed(gens) {
        return Err(Error::NotPointed);
    }
    let prim: Vec<QVec> = gens.iter().map(|g| primitive_q(g)).collect();
    let d = gens.first().map(|g| g.len()).unwrap_or(0);
    Ok(half_open_decomposition(&vzero(d), &prim, &[])
        .into_iter()
        .map(|c| {
            let reps = parallelepiped_points(&c.gens, &c.open);
            UnimodularPiece { gens: c.gens, open: c.open, reps }
        })
        .collect())
}

/// Nearest point of P to the origin (standard inner product).
pub fn nearest_point(p: &Polyhedron) -> Result<QVec> {
    if p.is_empty() {
        return Err(Error::EmptyPolyhedron);
    }
    let mut best: Option<(Q, QVec)> = None;
    for f in p.faces() {
        let fp = p.face_poly(&f);
        let x = fp.hull()?.min_norm_point();
        if !p.contains(&x) {
            continue;
        }
        let n = dot(&x, &x);
        if best.as_ref().is_none_or(|(b, _)| n < *b) {
            best = Some((n, x));
        }
    }
    Ok(best.expect("some face contains its nearest point").1)
}

/// A signed closed cone carrying the shift of the piece it came from.
#[derive(Clone, Debug)]
pub struct SignedCone {
    pub sign: i32,
    pub cone: Polyhedron,
    pub shift: QVec,
}

fn project_out(v: &[Q], lineality: &[QVec]) -> QVec {
    if lineality.is_empty() {
        return v.to_vec();
    }
    let s = AffineSubspace::new(v.to_vec(), lineality);
    s.min_norm_point()
}

/// Edges of the tangent cone at a vertex, as directions orthogonal to L.
fn vertex_edges(p: &Polyhedron, v: &[Q]) -> Vec<QVec> {
    p.tangent_cone(v).rays().to_vec()
}

/// Flip the generators of each half-open simplicial tangent cone so that all
/// of them pair positively with ξ. The identity Σ (±) [flipped] = [P] holds
/// exactly when ξ is positive on the recession cone and generic on edges.
pub fn polarized_decomposition_with_direction(p: &Polyhedron, xi: &[Q]) -> Result<Vec<(i32, Polyhedron)>> {
    if p.is_empty() {
        return Ok(vec![]);
    }
    let info = p.info();
    for r in &info.rays {
        if !dot(xi, r).is_positive() {
            return Err(Error::InvalidArgument("direction must be positive on the recession cone".into()));
        }
    }
    let mut out = Vec::new();
    for v in &info.vertices {
        let edges = vertex_edges(p, v);
        for c in half_open_decomposition(v, &edges, &info.lineality) {
            let mut sign = 1;
            let mut gens = Vec::new();
            let mut open = Vec::new();
            for (g, &o) in c.gens.iter().zip(&c.open) {
                let s = dot(xi, g);
                if s.is_zero() {
                    return Err(Error::InvalidArgument("direction is orthogonal to an edge".into()));
                }
                if s.is_negative() {
                    sign = -sign;
                    gens.push(vscale(g, &q(-1)));
                    open.push(!o);
                } else {
                    gens.push(g.clone());
                    open.push(o);
                }
            }
            let flipped = SimplicialCone { apex: c.apex.clone(), gens, open, lineality: c.lineality.clone() };
            for (s2, poly) in flipped.closed_expansion() {
                out.push((sign * s2, poly));
            }
        }
    }
    Ok(merge_signed(out))
}

/// Combine equal polyhedra and drop zero multiplicities.
pub fn merge_signed(items: Vec<(i32, Polyhedron)>) -> Vec<(i32, Polyhedron)> {
    let mut out: Vec<(i32, Polyhedron)> = Vec::new();
    for (s, p) in items {
        if p.is_empty() {
            continue;
        }
        match out.iter_mut().find(|(_, o)| o.same_set(&p)) {
            Some(e) => e.0 += s,
            None => out.push((s, p)),
        }
    }
    out.retain(|(s, _)| *s != 0);
    out
}

fn generic_direction(p: &Polyhedron, base: &[Q]) -> QVec {
    let info = p.info();
    let d = p.ambient_dim();
    let mut edges: Vec<QVec> = Vec::new();
    for v in &info.vertices {
        edges.extend(vertex_edges(p, v));
    }
    // positive on the recession cone
    let mut g = vzero(d);
    for h in p.constraints().iter().filter(|h| !h.eq) {
        g = vadd(&g, &h.a);
    }
    for attempt in 1..40i64 {
        let mut h = vzero(d);
        let mut w = q(1);
        for (i, hi) in h.iter_mut().enumerate() {
            w *= qf(1, 3 + attempt + i as i64);
            *hi = w.clone();
        }
        let gen = project_out(&vadd(&vscale(&g, &qf(1, 1000)), &vscale(&h, &qf(1, 1000))), &info.lineality);
        // keep the sign pattern of base on edges where it is non-zero
        let mut eps = q(1);
        for e in &edges {
            let b = dot(base, e).abs();
            let t = dot(&gen, e).abs();
            if b.is_positive() && t.is_positive() {
                let lim = b / (q(2) * t);
                if lim < eps {
                    eps = lim;
                }
            }
        }
        let xi = vadd(base, &vscale(&gen, &eps));
        let generic = edges.iter().all(|e| !dot(&xi, e).is_zero());
        let positive = info.rays.iter().all(|r| dot(&xi, r).is_positive());
        if generic && positive {
            return xi;
        }
    }
    panic!("no generic polarizing direction");
}

/// Decompose each piece into signed closed cones lying in H(β_P), β_P the
/// nearest point of P; pieces that are already cones are kept as they are.
pub fn polarized_cone_decomposition(pieces: &[(Polyhedron, QVec)]) -> Result<Vec<SignedCone>> {
    let mut out = Vec::new();
    for (p, sigma) in pieces {
        if p.is_empty() {
            continue;
        }
        if p.is_cone() {
            out.push(SignedCone { sign: 1, cone: p.clone(), shift: sigma.clone() });
            continue;
        }
        let beta = nearest_point(p)?;
        let xi = generic_direction(p, &beta);
        for (s, c) in polarized_decomposition_with_direction(p, &xi)? {
            out.push(SignedCone { sign: s, cone: c, shift: sigma.clone() });
        }
    }
    Ok(out)
}

/// Polarized: every apex set has a half-space H through it with
/// all cones of that apex inside H and meeting ∂H only in the apex.
pub fn is_polarized(cones: &[Polyhedron]) -> bool {
    let mut groups: Vec<(AffineSubspace, Vec<QVec>)> = Vec::new();
    for c in cones {
        let Some(apex) = c.apex() else { return false };
        let rays = c.rays().to_vec();
        match groups.iter_mut().find(|(a, _)| *a == apex) {
            Some(g) => g.1.extend(rays),
            None => groups.push((apex, rays)),
        }
    }
    groups.iter().all(|(a, rays)| {
        let proj: Vec<QVec> = rays.iter().map(|r| project_out(r, &a.basis)).collect();
        proj.iter().all(|r| r.iter().any(|x| !x.is_zero())) && cone_is_pointed(&proj)
    })
}

/// Lattice-normalized volume factor of the parallelepiped spanned by `edges`.
pub fn lattice_volume(edges: &[QVec], d: usize) -> Q {
    if edges.is_empty() {
        return q(1);
    }
    let sat = saturated_basis(edges, d);
    let cols: Vec<QVec> = sat.iter().map(|c| to_q(c)).collect();
    let coords: Vec<QVec> = edges.iter().map(|e| linalg::coords_in(&cols, e).expect("in span")).collect();
    linalg::det(&linalg::from_cols(&coords, cols.len())).abs()
}

/// ∫_F p dμ_F with μ_F normalized by the lattice Z^d ∩ lin(F).
pub fn integrate_poly_over_polytope<C: Ring>(p: &MultiPoly<C>, f: &Polyhedron) -> Result<C> {
    if f.is_empty() {
        return Ok(C::r_zero());
    }
    if !f.is_bounded() {
        return Err(Error::Unbounded("integration over an unbounded face".into()));
    }
    let d = f.ambient_dim();
    let e = f.dim() as usize;
    if e == 0 {
        return Ok(p.eval(&f.vertices()[0]));
    }
    let mut total = C::r_zero();
    for s in triangulate_polytope(f.vertices()) {
        let v0 = &s[0];
        let edges: Vec<QVec> = s[1..].iter().map(|v| vsub(v, v0)).collect();
        let vol = lattice_volume(&edges, d);
        let m: Vec<QVec> = (0..d).map(|i| edges.iter().map(|w| w[i].clone()).collect()).collect();
        let pt = p.compose_affine(&m, v0, e);
        let mut acc = C::r_zero();
        for (ex, c) in pt.terms() {
            let num: BigInt = ex.iter().map(|&a| factorial(a)).product();
            let den = factorial(e as u32 + ex.iter().sum::<u32>());
            acc = acc.r_add(&c.r_scale(&Q::new(num, den)));
        }
        total = total.r_add(&acc.r_scale(&vol));
    }
    Ok(total)
}

/// Lattice points of a bounded polyhedron.
pub fn enumerate_lattice_points(f: &Polyhedron) -> Result<Vec<ZVec>> {
    if f.is_empty() {
        return Ok(vec![]);
    }
    if !f.is_bounded() {
        return Err(Error::Unbounded("lattice point enumeration needs a bounded polyhedron".into()));
    }
    let d = f.ambient_dim();
    let mut lo = vec![BigInt::zero(); d];
    let mut hi = vec![BigInt::zero(); d];
    for i in 0..d {
        let vals = f.vertices().iter().map(|v| v[i].clone());
        lo[i] = vals.clone().min().expect("vertex").ceil().to_integer();
        hi[i] = vals.max().expect("vertex").floor().to_integer();
    }
    // constraints checkable once coordinates 0..=i are fixed
    let last: Vec<usize> =
        f.constraints().iter().map(|h| h.a.iter().rposition(|x| !x.is_zero()).unwrap_or(0)).collect();
    let mut out = Vec::new();
    let mut cur: QVec = vzero(d);
    fn rec(
        i: usize,
        d: usize,
        f: &Polyhedron,
        lo: &[BigInt],
        hi: &[BigInt],
        last: &[usize],
        cur: &mut QVec,
        out: &mut Vec<ZVec>,
    ) {
        if i == d {
            out.push(cur.iter().map(|x| x.to_integer()).collect());
            return;
        }
        let mut x = lo[i].clone();
        while x <= hi[i] {
            cur[i] = qint(&x);
            let ok = f.constraints().iter().zip(last).all(|(h, &l)| l != i || h.holds(cur));
            if ok {
                rec(i + 1, d, f, lo, hi, last, cur, out);
            }
            x += 1;
        }
        cur[i] = Q::zero();
    }
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Ok(vec![]);
    }
    rec(0, d, f, &lo, &hi, &last, &mut cur, &mut out);
    Ok(out)
}

/// Probe points for signed indicator identities: vertices, face barycenters
/// (shifted along rays) and their ±1/7 perturbations along each axis.
pub fn probe_grid(polys: &[&Polyhedron]) -> Vec<QVec> {
    let mut pts: BTreeSet<QVec> = BTreeSet::new();
    for p in polys {
        if p.is_empty() {
            continue;
        }
        for f in p.faces() {
            if let Some(x) = p.face_poly(&f).relative_interior_point() {
                pts.insert(x);
            }
        }
        for v in p.vertices() {
            pts.insert(v.clone());
        }
    }
    let base: Vec<QVec> = pts.iter().cloned().collect();
    for x in &base {
        for i in 0..x.len() {
            for s in [qf(1, 7), qf(-1, 7)] {
                let mut y = x.clone();
                y[i] += &s;
                pts.insert(y);
            }
        }
    }
    pts.into_iter().collect()
}

/// Σ sign·[P](x) at a point.
pub fn signed_indicator(items: &[(i32, Polyhedron)], x: &[Q]) -> i64 {
    items.iter().filter(|(_, p)| p.contains(x)).map(|(s, _)| *s as i64).sum()
}

/// Check Σ lhs = Σ rhs at every probe point; returns the first counterexample.
pub fn indicator_identity(lhs: &[(i32, Polyhedron)], rhs: &[(i32, Polyhedron)], extra: &[QVec]) -> Option<QVec> {
    let refs: Vec<&Polyhedron> = lhs.iter().chain(rhs).map(|(_, p)| p).collect();
    let mut pts = probe_grid(&refs);
    pts.extend(extra.iter().cloned());
    pts.into_iter().find(|x| signed_indicator(lhs, x) != signed_indicator(rhs, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::qvec;

    fn half(a: &[i64], c: i64) -> Halfspace {
        Halfspace::ge(qvec(a), q(c))
    }

    fn simplex2() -> Polyhedron {
        Polyhedron::new(2, vec![half(&[1, 0], 0), half(&[0, 1], 0), half(&[-1, -1], -1)])
    }

    #[test]
    fn generators_of_square() {
        let p = Polyhedron::cuboid(&qvec(&[0, 0]), &qvec(&[1, 1]));
        assert_eq!(p.vertices().len(), 4);
        assert!(p.rays().is_empty());
        assert_eq!(p.dim(), 2);
        assert_eq!(p.faces().len(), 9);
    }

    #[test]
    fn hull_and_apex() {
        let orth = Polyhedron::new(2, vec![half(&[1, 0], 0), half(&[0, 1], 0)]);
        let (_, apex, lin) = orth.affine_hull_and_apex().unwrap();
        assert_eq!(apex.dim(), 0);
        assert!(lin.is_empty());
        let hp = Polyhedron::new(2, vec![half(&[1, 0], 0)]);
        let (_, apex, lin) = hp.affine_hull_and_apex().unwrap();
        assert_eq!(apex.basis, vec![qvec(&[0, 1])]);
        assert_eq!(lin.len(), 1);
        let seg = Polyhedron::interval(q(0), q(1));
        assert_eq!(seg.hull().unwrap().dim(), 1);
        assert!(matches!(Polyhedron::empty(2).affine_hull_and_apex(), Err(Error::EmptyPolyhedron)));
    }

    #[test]
    fn tangent_cones() {
        let sq = Polyhedron::cuboid(&qvec(&[0, 0]), &qvec(&[1, 1]));
        let t = sq.tangent_cone(&qvec(&[0, 0]));
        assert!(t.same_set(&Polyhedron::new(2, vec![half(&[1, 0], 0), half(&[0, 1], 0)])));
        assert!(sq.tangent_cone(&qvec(&[2, 0])).is_empty());
        let seg = Polyhedron::interval(q(0), q(1));
        assert!(seg.tangent_cone(&[qf(1, 2)]).same_set(&Polyhedron::whole(1)));
    }

    #[test]
    fn brianchon_gram_interval() {
        let seg = Polyhedron::interval(q(0), q(1));
        let bg = brianchon_gram(&seg).unwrap();
        assert_eq!(bg.len(), 3);
        let want = [(1, "[0,∞)"), (1, "(-∞,1]"), (-1, "R")];
        for (s, txt) in want {
            assert!(bg.iter().any(|(t, p)| *t == s && p.to_string() == txt), "{:?}", bg);
        }
        assert!(indicator_identity(&[(1, seg)], &bg, &[]).is_none());
        let pt = Polyhedron::point(&qvec(&[2, 3]));
        let bg = brianchon_gram(&pt).unwrap();
        assert_eq!(bg.len(), 1);
        assert!(bg[0].1.same_set(&pt));
        assert!(brianchon_gram(&Polyhedron::ray_from(q(0))).is_err());
    }

    #[test]
    fn brianchon_gram_simplex() {
        let s = simplex2();
        let bg = brianchon_gram(&s).unwrap();
        assert_eq!(bg.iter().filter(|(t, _)| *t == 1).count(), 4);
        assert_eq!(bg.iter().filter(|(t, _)| *t == -1).count(), 3);
        assert!(indicator_identity(&[(1, s)], &bg, &[]).is_none());
    }

    #[test]
    fn general_brianchon_gram_unbounded() {
        let p = Polyhedron::new(2, vec![half(&[1, 0], 0), half(&[0, 1], 0), half(&[1, 1], 1)]);
        let bg = brianchon_gram_general(&p);
        assert_eq!(bg.len(), 3);
        assert!(indicator_identity(&[(1, p)], &bg, &[qvec(&[5, 5]), qvec(&[-1, 5])]).is_none());
    }

    #[test]
    fn unimodularize_examples() {
        let pieces = triangulate_and_unimodularize(&[qvec(&[1, 0]), qvec(&[1, 2])]).unwrap();
        assert_eq!(pieces.len(), 1);
        let mut reps = pieces[0].reps.clone();
        reps.sort();
        assert_eq!(reps, vec![crate::lattice::zvec(&[0, 0]), crate::lattice::zvec(&[1, 1])]);
        let pieces = triangulate_and_unimodularize(&[qvec(&[1, 0]), qvec(&[0, 1])]).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].reps.len(), 1);
        let pieces = triangulate_and_unimodularize(&[qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])]).unwrap();
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|p| p.gens.contains(&qvec(&[1, 1]))));
        assert!(triangulate_and_unimodularize(&[qvec(&[1]), qvec(&[-1])]).is_err());
    }

    #[test]
    fn nearest_points() {
        let p = Polyhedron::new(2, vec![half(&[1, 0], 1)]);
        assert_eq!(nearest_point(&p).unwrap(), qvec(&[1, 0]));
        assert_eq!(nearest_point(&simplex2()).unwrap(), qvec(&[0, 0]));
        let p = Polyhedron::new(2, vec![half(&[1, 1], 2), half(&[1, 0], 0), half(&[0, 1], 0)]);
        assert_eq!(nearest_point(&p).unwrap(), qvec(&[1, 1]));
    }

    #[test]
    fn expansion_to_the_left() {
        let seg = Polyhedron::interval(q(-1), q(1));
        let dec = polarized_decomposition_with_direction(&seg, &qvec(&[-1])).unwrap();
        let txt: BTreeSet<(i32, String)> = dec.iter().map(|(s, p)| (*s, p.to_string())).collect();
        let want: BTreeSet<(i32, String)> =
            [(1, "(-∞,1]".to_string()), (-1, "(-∞,-1]".to_string()), (1, "{-1}".to_string())].into_iter().collect();
        assert_eq!(txt, want);
        // nearest point on the left forces the same shape
        let seg = Polyhedron::interval(q(-3), q(-1));
        let dec = polarized_cone_decomposition(&[(seg.clone(), qvec(&[0]))]).unwrap();
        let txt: BTreeSet<(i32, String)> = dec.iter().map(|c| (c.sign, c.cone.to_string())).collect();
        let want: BTreeSet<(i32, String)> =
            [(1, "(-∞,-1]".to_string()), (-1, "(-∞,-3]".to_string()), (1, "{-3}".to_string())].into_iter().collect();
        assert_eq!(txt, want);
    }

    #[test]
    fn polarized_triangle() {
        let tri = simplex2().translate(&qvec(&[5, 3]));
        let dec = polarized_cone_decomposition(&[(tri.clone(), qvec(&[0, 0]))]).unwrap();
        let items: Vec<(i32, Polyhedron)> = dec.iter().map(|c| (c.sign, c.cone.clone())).collect();
        assert!(indicator_identity(&[(1, tri.clone())], &items, &[]).is_none());
        let beta = nearest_point(&tri).unwrap();
        let b2 = dot(&beta, &beta);
        for (_, c) in &items {
            for v in c.vertices() {
                assert!(dot(&beta, v) >= b2);
            }
            for r in c.rays() {
                assert!(!dot(&beta, r).is_negative());
            }
        }
        let cones: Vec<Polyhedron> = items.iter().map(|(_, c)| c.clone()).collect();
        assert!(is_polarized(&cones));
        let apexes: BTreeSet<QVec> = cones.iter().map(|c| c.vertices()[0].clone()).collect();
        assert_eq!(apexes.len(), 3);
    }

    #[test]
    fn integration() {
        let sq = Polyhedron::cuboid(&qvec(&[0, 0]), &qvec(&[1, 1]));
        assert_eq!(integrate_poly_over_polytope(&MultiPoly::<Q>::one(2), &sq).unwrap(), q(1));
        let x = MultiPoly::<Q>::var(2, 0);
        assert_eq!(integrate_poly_over_polytope(&x, &simplex2()).unwrap(), qf(1, 6));
        let seg = Polyhedron::new(2, vec![Halfspace::equal(qvec(&[1, -1]), q(0)), half(&[1, 0], 0), half(&[-1, 0], -2)]);
        assert_eq!(integrate_poly_over_polytope(&MultiPoly::<Q>::one(2), &seg).unwrap(), q(2));
    }

    #[test]
    fn lattice_points() {
        let s3 = simplex2().scale_translate(&q(3), &qvec(&[0, 0]));
        assert_eq!(enumerate_lattice_points(&s3).unwrap().len(), 10);
        assert!(enumerate_lattice_points(&Polyhedron::empty(2)).unwrap().is_empty());
        let sq = Polyhedron::cuboid(&qvec(&[0, 0]), &qvec(&[1, 1]));
        assert_eq!(enumerate_lattice_points(&sq).unwrap().len(), 4);
    }

    #[test]
    fn from_generators_roundtrip() {
        let c = Polyhedron::from_generators(&qvec(&[1, 1]), &[qvec(&[1, 0]), qvec(&[1, 2])], &[]);
        assert!(c.contains(&qvec(&[2, 1])));
        assert!(c.contains(&qvec(&[2, 3])));
        assert!(!c.contains(&qvec(&[1, 2])));
        assert_eq!(c.vertices(), &[qvec(&[1, 1])]);
    }
}
