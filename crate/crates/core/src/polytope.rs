//! Exact rational H-polytopes `{m : <m, u_F> ≥ -a_F}` with primitive facet
//! normals.
//!
//! Vertices are found by brute force over `n`-subsets of the inequalities,
//! which is fine for the desk-scale inputs this crate targets. Volumes are
//! lattice-normalized: the volume of a facet is measured in coordinates of a
//! ℤ-basis of `M ∩ u_F^⊥`, and the volume of `P` comes from the pyramid
//! decomposition `vol(P) = (1/n) Σ_F dist(v₀, F) · latvol(F)` over a fixed
//! vertex `v₀`, applied recursively down to points (which have volume 1).

use crate::lattice::{integer_kernel, is_primitive};
use crate::linalg::{dot_int, pair, rank, rat_from_int, solve_square, to_rat_vec, Int, Rat};
use crate::par::{self, Execution};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("polytope dimension must be at least 1")]
    ZeroDimension,
    #[error("facet {facet}: normal has length {found}, expected {expected}")]
    DimensionMismatch { facet: usize, expected: usize, found: usize },
    #[error("facet {facet}: normal is not primitive")]
    NonPrimitiveNormal { facet: usize },
    #[error("facets {first} and {second} share the same normal")]
    DuplicateNormal { first: usize, second: usize },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is empty")]
    Empty,
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("inequality {facet} is redundant (does not define a facet)")]
    Redundant { facet: usize },
    #[error("facet index {index} out of range (polytope has {count} facets)")]
    BadFacetIndex { index: usize, count: usize },
}

impl PolytopeError {
    pub fn kind(&self) -> &'static str {
        match self {
            PolytopeError::ZeroDimension => "ZeroDimension",
            PolytopeError::DimensionMismatch { .. } => "DimensionMismatch",
            PolytopeError::NonPrimitiveNormal { .. } => "NonPrimitiveNormal",
            PolytopeError::DuplicateNormal { .. } => "DuplicateNormal",
            PolytopeError::Unbounded => "Unbounded",
            PolytopeError::Empty => "Empty",
            PolytopeError::NotFullDimensional => "NotFullDimensional",
            PolytopeError::Redundant { .. } => "Redundant",
            PolytopeError::BadFacetIndex { .. } => "BadFacetIndex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Facet {
    pub normal: Vec<Int>,
    pub support: Rat,
}

impl Facet {
    pub fn new(normal: Vec<Int>, support: Rat) -> Self {
        Facet { normal, support }
    }
}

/// A valid (bounded, full-dimensional, irredundant) rational polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<Rat>>,
    vertex_facets: Vec<BTreeSet<usize>>,
}

/// A face, identified by the set of facets containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub active_facets: BTreeSet<usize>,
    pub vertices: Vec<usize>,
    pub dim: usize,
    pub relint_point: Vec<Rat>,
}

impl Face {
    pub fn is_whole(&self) -> bool {
        self.active_facets.is_empty()
    }

    pub fn id(&self) -> String {
        if self.active_facets.is_empty() {
            return "P".to_string();
        }
        let ids: Vec<String> = self.active_facets.iter().map(|f| f.to_string()).collect();
        format!("F{{{}}}", ids.join(","))
    }
}

/// A torus-invariant divisor `Σ c_F D_F`, keyed by facet index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DivisorClass {
    pub coefficients: BTreeMap<usize, Rat>,
}

impl DivisorClass {
    pub fn zero() -> Self {
        DivisorClass::default()
    }

    pub fn from_coefficients(coeffs: &[Rat]) -> Self {
        let mut d = DivisorClass::zero();
        for (i, c) in coeffs.iter().enumerate() {
            d.add_term(i, c.clone());
        }
        d
    }

    pub fn prime(facet: usize) -> Self {
        let mut d = DivisorClass::zero();
        d.add_term(facet, Rat::one());
        d
    }

    pub fn add_term(&mut self, facet: usize, c: Rat) {
        let e = self.coefficients.entry(facet).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.coefficients.remove(&facet);
        }
    }

    pub fn coefficient(&self, facet: usize) -> Rat {
        self.coefficients.get(&facet).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn scaled(&self, k: &Rat) -> Self {
        let mut d = DivisorClass::zero();
        for (f, c) in &self.coefficients {
            d.add_term(*f, c * k);
        }
        d
    }

    pub fn plus(&self, other: &DivisorClass) -> Self {
        let mut d = self.clone();
        for (f, c) in &other.coefficients {
            d.add_term(*f, c.clone());
        }
        d
    }

    /// Dense coefficient vector over `count` facets.
    pub fn to_vec(&self, count: usize) -> Vec<Rat> {
        (0..count).map(|f| self.coefficient(f)).collect()
    }
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vertices of `{m ∈ ℝ^dim : <m, u_i> ≥ -a_i}` with the set of tight
/// inequalities at each. The system may be redundant; only its vertices
/// are reported (an unbounded system reports those of its pointed part).
pub(crate) fn system_vertices(dim: usize, normals: &[Vec<Int>], supports: &[Rat]) -> Vec<(Vec<Rat>, BTreeSet<usize>)> {
    let tight_set = |m: &[Rat]| -> Option<BTreeSet<usize>> {
        let mut tight = BTreeSet::new();
        for (i, (u, a)) in normals.iter().zip(supports).enumerate() {
            let s = pair(m, u) + a;
            if s.is_negative() {
                return None;
            }
            if s.is_zero() {
                tight.insert(i);
            }
        }
        Some(tight)
    };
    if dim == 0 {
        return tight_set(&[]).map(|t| vec![(Vec::new(), t)]).unwrap_or_default();
    }
    let mut found: BTreeMap<Vec<Rat>, BTreeSet<usize>> = BTreeMap::new();
    for subset in combinations(normals.len(), dim) {
        let a: Vec<Vec<Rat>> = subset.iter().map(|&i| to_rat_vec(&normals[i])).collect();
        let b: Vec<Rat> = subset.iter().map(|&i| -supports[i].clone()).collect();
        let Some(m) = solve_square(&a, &b) else { continue };
        if found.contains_key(&m) {
            continue;
        }
        if let Some(t) = tight_set(&m) {
            found.insert(m, t);
        }
    }
    found.into_iter().collect()
}

pub(crate) fn affine_rank(points: &[&Vec<Rat>], dim: usize) -> usize {
    let Some((first, rest)) = points.split_first() else {
        return 0;
    };
    let diffs: Vec<Vec<Rat>> = rest.iter().map(|p| p.iter().zip(first.iter()).map(|(x, y)| x - y).collect()).collect();
    rank(&diffs, dim)
}

/// `true` iff the cone `{d : <d, u_i> ≥ 0 ∀i}` is nonzero.
pub(crate) fn has_recession(dim: usize, normals: &[Vec<Int>]) -> bool {
    let rows: Vec<Vec<Rat>> = normals.iter().map(|u| to_rat_vec(u)).collect();
    if rank(&rows, dim) < dim {
        return true;
    }
    // a pointed nonzero cone has an extreme ray cut out by dim-1 independent normals
    for subset in combinations(normals.len(), dim - 1) {
        let sub: Vec<Vec<Rat>> = subset.iter().map(|&i| rows[i].clone()).collect();
        let ns = crate::linalg::nullspace(&sub, dim);
        if ns.len() != 1 {
            continue;
        }
        let d = &ns[0];
        for sign in [Rat::one(), -Rat::one()] {
            let dir: Vec<Rat> = d.iter().map(|x| x * &sign).collect();
            if rows.iter().all(|u| !crate::linalg::dot_rat(&dir, u).is_negative()) {
                return true;
            }
        }
    }
    false
}

/// Normalizes a raw system: primitive normals (supports divided by the
/// content), constant rows checked and dropped, parallel rows merged to
/// the tightest. Returns `None` if a constant row is violated.
fn normalize_system(normals: &[Vec<Int>], supports: &[Rat]) -> Option<(Vec<Vec<Int>>, Vec<Rat>)> {
    let mut merged: BTreeMap<Vec<Int>, Rat> = BTreeMap::new();
    for (u, a) in normals.iter().zip(supports) {
        let g = crate::linalg::gcd_vec(u);
        if g.is_zero() {
            if a.is_negative() {
                return None;
            }
            continue;
        }
        let prim: Vec<Int> = u.iter().map(|x| x / &g).collect();
        let s = a / rat_from_int(&g);
        merged
            .entry(prim)
            .and_modify(|cur| {
                if s < *cur {
                    *cur = s.clone();
                }
            })
            .or_insert(s);
    }
    Some(merged.into_iter().unzip())
}

/// Lattice-normalized volume of a raw (possibly redundant or degenerate)
/// bounded system. Empty or lower-dimensional systems have volume 0; a
/// nonempty 0-dimensional system has volume 1.
pub(crate) fn system_volume(dim: usize, normals: &[Vec<Int>], supports: &[Rat]) -> Rat {
    let Some((normals, supports)) = normalize_system(normals, supports) else {
        return Rat::zero();
    };
    let verts = system_vertices(dim, &normals, &supports);
    if verts.is_empty() {
        return Rat::zero();
    }
    if dim == 0 {
        return Rat::one();
    }
    let pts: Vec<&Vec<Rat>> = verts.iter().map(|(p, _)| p).collect();
    if affine_rank(&pts, dim) < dim {
        return Rat::zero();
    }
    let v0 = &verts[0].0;
    let mut total = Rat::zero();
    for i in 0..normals.len() {
        let dist = pair(v0, &normals[i]) + &supports[i];
        if dist.is_zero() {
            continue;
        }
        total += dist * restricted_facet_volume(dim, &normals, &supports, &verts, i);
    }
    total / Rat::from_integer(Int::from(dim))
}

/// Volume and per-inequality facet volumes of a system whose normals are
/// primitive and pairwise distinct. Inequalities that do not define facets
/// get volume 0; an empty or flat system gets all zeros.
pub(crate) fn system_volume_and_latvols(dim: usize, normals: &[Vec<Int>], supports: &[Rat]) -> (Rat, Vec<Rat>) {
    let zeros = vec![Rat::zero(); normals.len()];
    let verts = system_vertices(dim, normals, supports);
    if verts.is_empty() {
        return (Rat::zero(), zeros);
    }
    let pts: Vec<&Vec<Rat>> = verts.iter().map(|(p, _)| p).collect();
    if affine_rank(&pts, dim) < dim {
        return (Rat::zero(), zeros);
    }
    let latvols: Vec<Rat> =
        (0..normals.len()).map(|i| restricted_facet_volume(dim, normals, supports, &verts, i)).collect();
    let v0 = &verts[0].0;
    let total: Rat = (0..normals.len()).map(|i| (pair(v0, &normals[i]) + &supports[i]) * &latvols[i]).sum();
    (total / Rat::from_integer(Int::from(dim)), latvols)
}

/// Volume of the face cut out by inequality `i`, in lattice coordinates of
/// `u_i^⊥ ∩ M`; zero if that face is not a facet.
fn restricted_facet_volume(
    dim: usize,
    normals: &[Vec<Int>],
    supports: &[Rat],
    verts: &[(Vec<Rat>, BTreeSet<usize>)],
    i: usize,
) -> Rat {
    let on_facet: Vec<&Vec<Rat>> = verts.iter().filter(|(_, t)| t.contains(&i)).map(|(p, _)| p).collect();
    if on_facet.is_empty() || affine_rank(&on_facet, dim) < dim - 1 {
        return Rat::zero();
    }
    if dim == 1 {
        return Rat::one();
    }
    let base = on_facet[0];
    let basis = integer_kernel(std::slice::from_ref(&normals[i]), dim);
    let mut sub_normals = Vec::with_capacity(normals.len());
    let mut sub_supports = Vec::with_capacity(normals.len());
    for (j, (u, a)) in normals.iter().zip(supports).enumerate() {
        if j == i {
            continue;
        }
        sub_normals.push(basis.iter().map(|w| dot_int(w, u)).collect::<Vec<Int>>());
        sub_supports.push(a + pair(base, u));
    }
    system_volume(dim - 1, &sub_normals, &sub_supports)
}

impl HPolytope {
    pub fn new(dim: usize, facets: Vec<Facet>) -> Result<Self, PolytopeError> {
        if dim == 0 {
            return Err(PolytopeError::ZeroDimension);
        }
        for (i, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(PolytopeError::DimensionMismatch { facet: i, expected: dim, found: f.normal.len() });
            }
            if !is_primitive(&f.normal) {
                return Err(PolytopeError::NonPrimitiveNormal { facet: i });
            }
            for (j, g) in facets.iter().enumerate().take(i) {
                if g.normal == f.normal {
                    return Err(PolytopeError::DuplicateNormal { first: j, second: i });
                }
            }
        }
        let normals: Vec<Vec<Int>> = facets.iter().map(|f| f.normal.clone()).collect();
        let supports: Vec<Rat> = facets.iter().map(|f| f.support.clone()).collect();
        if has_recession(dim, &normals) {
            return Err(PolytopeError::Unbounded);
        }
        let verts = system_vertices(dim, &normals, &supports);
        if verts.is_empty() {
            return Err(PolytopeError::Empty);
        }
        let pts: Vec<&Vec<Rat>> = verts.iter().map(|(p, _)| p).collect();
        if affine_rank(&pts, dim) < dim {
            return Err(PolytopeError::NotFullDimensional);
        }
        for i in 0..facets.len() {
            let on: Vec<&Vec<Rat>> = verts.iter().filter(|(_, t)| t.contains(&i)).map(|(p, _)| p).collect();
            if on.is_empty() || affine_rank(&on, dim) < dim - 1 {
                return Err(PolytopeError::Redundant { facet: i });
            }
        }
        let (vertices, vertex_facets) = verts.into_iter().unzip();
        Ok(HPolytope { dim, facets, vertices, vertex_facets })
    }

    /// Convenience constructor from integer normals and rational supports.
    pub fn from_parts(dim: usize, normals: &[Vec<Int>], supports: &[Rat]) -> Result<Self, PolytopeError> {
        let facets = normals.iter().zip(supports).map(|(u, a)| Facet::new(u.clone(), a.clone())).collect();
        HPolytope::new(dim, facets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn normals(&self) -> Vec<Vec<Int>> {
        self.facets.iter().map(|f| f.normal.clone()).collect()
    }

    pub fn supports(&self) -> Vec<Rat> {
        self.facets.iter().map(|f| f.support.clone()).collect()
    }

    pub fn check_facet(&self, index: usize) -> Result<(), PolytopeError> {
        if index >= self.facets.len() {
            return Err(PolytopeError::BadFacetIndex { index, count: self.facets.len() });
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    /// Facets tight at each vertex, parallel to [`HPolytope::vertices`].
    pub fn vertex_facets(&self) -> &[BTreeSet<usize>] {
        &self.vertex_facets
    }

    pub fn contains(&self, m: &[Rat]) -> bool {
        self.facets.iter().all(|f| !(pair(m, &f.normal) + &f.support).is_negative())
    }

    pub fn contains_in_interior(&self, m: &[Rat]) -> bool {
        self.facets.iter().all(|f| (pair(m, &f.normal) + &f.support).is_positive())
    }

    /// All nonempty faces, from the vertex tight sets closed under intersection.
    pub fn face_lattice(&self) -> Vec<Face> {
        let mut sets: BTreeSet<BTreeSet<usize>> = self.vertex_facets.iter().cloned().collect();
        sets.insert(BTreeSet::new());
        loop {
            let current: Vec<BTreeSet<usize>> = sets.iter().cloned().collect();
            let mut grew = false;
            for (i, a) in current.iter().enumerate() {
                for b in &current[i + 1..] {
                    let c: BTreeSet<usize> = a.intersection(b).cloned().collect();
                    if sets.insert(c) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut faces: Vec<Face> = sets
            .into_iter()
            .map(|active| {
                let vertices: Vec<usize> =
                    (0..self.vertices.len()).filter(|&v| active.is_subset(&self.vertex_facets[v])).collect();
                let pts: Vec<&Vec<Rat>> = vertices.iter().map(|&v| &self.vertices[v]).collect();
                let dim = affine_rank(&pts, self.dim);
                let relint_point = barycenter(&pts, self.dim);
                Face { active_facets: active, vertices, dim, relint_point }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.active_facets.cmp(&b.active_facets)));
        faces
    }

    /// Lattice volume of facet `index`.
    pub fn facet_latvol(&self, index: usize) -> Result<Rat, PolytopeError> {
        self.check_facet(index)?;
        let verts: Vec<(Vec<Rat>, BTreeSet<usize>)> =
            self.vertices.iter().cloned().zip(self.vertex_facets.iter().cloned()).collect();
        Ok(restricted_facet_volume(self.dim, &self.normals(), &self.supports(), &verts, index))
    }

    pub fn facet_latvols(&self) -> Vec<Rat> {
        self.facet_latvols_with(Execution::default())
    }

    pub fn facet_latvols_with(&self, exec: Execution) -> Vec<Rat> {
        par::map_range(exec, self.facets.len(), |i| self.facet_latvol(i).expect("index in range"))
    }

    /// `deg_P(D) = Σ_F c_F · latvol(F)`.
    pub fn degree(&self, d: &DivisorClass) -> Result<Rat, PolytopeError> {
        let mut total = Rat::zero();
        for (&f, c) in &d.coefficients {
            total += c * self.facet_latvol(f)?;
        }
        Ok(total)
    }

    pub fn volume(&self) -> Rat {
        system_volume(self.dim, &self.normals(), &self.supports())
    }

    /// `P + t`.
    pub fn translate(&self, t: &[Rat]) -> HPolytope {
        let facets =
            self.facets.iter().map(|f| Facet::new(f.normal.clone(), &f.support - pair(t, &f.normal))).collect();
        HPolytope::new(self.dim, facets).expect("translation preserves validity")
    }

    /// `k · P` for `k > 0`.
    pub fn dilate(&self, k: &Rat) -> HPolytope {
        assert!(k.is_positive(), "dilation factor must be positive");
        let facets = self.facets.iter().map(|f| Facet::new(f.normal.clone(), &f.support * k)).collect();
        HPolytope::new(self.dim, facets).expect("dilation preserves validity")
    }

    /// Maximal cones of the normal fan, as sets of facet normals.
    pub fn maximal_cones(&self) -> BTreeSet<BTreeSet<Vec<Int>>> {
        self.vertex_facets.iter().map(|t| t.iter().map(|&f| self.facets[f].normal.clone()).collect()).collect()
    }

    /// `Σ_F latvol(F) · u_F`; zero for every valid polytope.
    pub fn weighted_normal_sum(&self) -> Vec<Rat> {
        let vols = self.facet_latvols();
        let mut s = vec![Rat::zero(); self.dim];
        for (f, v) in self.facets.iter().zip(&vols) {
            for (x, u) in s.iter_mut().zip(&f.normal) {
                *x += v * rat_from_int(u);
            }
        }
        s
    }
}

pub(crate) fn barycenter(pts: &[&Vec<Rat>], dim: usize) -> Vec<Rat> {
    let mut c = vec![Rat::zero(); dim];
    if pts.is_empty() {
        return c;
    }
    for p in pts {
        for (x, y) in c.iter_mut().zip(p.iter()) {
            *x += y;
        }
    }
    let k = Rat::from_integer(Int::from(pts.len()));
    c.iter().map(|x| x / &k).collect()
}

pub fn vertices(p: &HPolytope) -> &[Vec<Rat>] {
    p.vertices()
}

pub fn face_lattice(p: &HPolytope) -> Vec<Face> {
    p.face_lattice()
}

pub fn same_normal_fan(p: &HPolytope, q: &HPolytope) -> bool {
    if p.dim != q.dim {
        return false;
    }
    let np: BTreeSet<Vec<Int>> = p.normals().into_iter().collect();
    let nq: BTreeSet<Vec<Int>> = q.normals().into_iter().collect();
    np == nq && p.maximal_cones() == q.maximal_cones()
}

pub fn facet_latvol(p: &HPolytope, facet: usize) -> Result<Rat, PolytopeError> {
    p.facet_latvol(facet)
}

pub fn degree(p: &HPolytope, d: &DivisorClass) -> Result<Rat, PolytopeError> {
    p.degree(d)
}

pub fn volume(p: &HPolytope) -> Rat {
    p.volume()
}
