//! Torus-equivariant reflexive sheaves as families of increasing
//! filtrations, one per facet.
//!
//! A filtration is stored sparsely as its jumps `(i, E(i))`: indices strictly
//! increase, spaces strictly increase, and the last space is all of `E`.
//! Below the first jump the filtration is zero. Subspaces live in `ℚ^r` and
//! are kept in reduced row-echelon form, so equality is structural.

use crate::linalg::{dot_rat, nullspace, rank, rref, Rat};
use crate::polytope::{DivisorClass, Face, HPolytope};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KlyachkoError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("vector of length {found} in a space of dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("facet {facet}: {reason}")]
    InvalidFiltration { facet: usize, reason: String },
    #[error("sheaves have {left} and {right} facets")]
    FacetMismatch { left: usize, right: usize },
    #[error("subspace must be nonzero")]
    ZeroSubspace,
    #[error("matrix has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    MatrixShape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
}

impl KlyachkoError {
    pub fn kind(&self) -> &'static str {
        match self {
            KlyachkoError::ZeroRank => "ZeroRank",
            KlyachkoError::DimensionMismatch { .. } => "DimensionMismatch",
            KlyachkoError::InvalidFiltration { .. } => "InvalidFiltration",
            KlyachkoError::FacetMismatch { .. } => "FacetMismatch",
            KlyachkoError::ZeroSubspace => "ZeroSubspace",
            KlyachkoError::MatrixShape { .. } => "MatrixShape",
        }
    }
}

/// A linear subspace of `ℚ^ambient` in canonical (RREF) form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<Rat>>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> =
            self.rows.iter().map(|r| r.iter().map(crate::linalg::format_rational).collect()).collect();
        write!(f, "Subspace({}; {:?})", self.ambient, rows)
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let rows = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { Rat::from_integer(1.into()) } else { Rat::zero() }).collect())
            .collect();
        Subspace { ambient, rows }
    }

    pub fn span(ambient: usize, vectors: &[Vec<Rat>]) -> Result<Self, KlyachkoError> {
        for v in vectors {
            if v.len() != ambient {
                return Err(KlyachkoError::DimensionMismatch { expected: ambient, found: v.len() });
            }
        }
        Ok(Subspace { ambient, rows: rref(vectors, ambient).0 })
    }

    pub fn line(v: Vec<Rat>) -> Self {
        let n = v.len();
        Subspace { ambient: n, rows: rref(&[v], n).0 }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    pub fn contains_vector(&self, v: &[Rat]) -> bool {
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        rank(&rows, self.ambient) == self.rows.len()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|v| other.contains_vector(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Subspace { ambient: self.ambient, rows: rref(&rows, self.ambient).0 }
    }

    /// Basis of `{y : <v, y> = 0 for all v in self}`.
    pub fn annihilator(&self) -> Vec<Vec<Rat>> {
        nullspace(&self.rows, self.ambient)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.is_full() {
            return other.clone();
        }
        if other.is_full() {
            return self.clone();
        }
        let mut ann = self.annihilator();
        ann.extend(other.annihilator());
        Subspace { ambient: self.ambient, rows: rref(&nullspace(&ann, self.ambient), self.ambient).0 }
    }

    /// Image under the linear map given by `matrix` (rows = target coordinates).
    pub fn image(&self, matrix: &[Vec<Rat>], target: usize) -> Subspace {
        let imgs: Vec<Vec<Rat>> =
            self.rows.iter().map(|v| matrix.iter().map(|row| dot_rat(row, v)).collect()).collect();
        Subspace { ambient: target, rows: rref(&imgs, target).0 }
    }

    /// Embeds `self ⊆ ℚ^a` into `ℚ^(offset + a + pad)`.
    fn embed(&self, offset: usize, total: usize) -> Vec<Vec<Rat>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![Rat::zero(); total];
                v[offset..offset + r.len()].clone_from_slice(r);
                v
            })
            .collect()
    }
}

/// An increasing ℤ-filtration of `ℚ^r`, stored by its jumps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    rank: usize,
    jumps: Vec<(i64, Subspace)>,
}

impl Filtration {
    /// Validates strictly increasing indices and spaces ending in `ℚ^r`.
    pub fn new(rank: usize, jumps: Vec<(i64, Subspace)>) -> Result<Self, String> {
        if jumps.is_empty() {
            return Err("filtration has no jumps".into());
        }
        for (k, (i, v)) in jumps.iter().enumerate() {
            if v.ambient() != rank {
                return Err(format!("subspace at index {i} lives in dimension {}, expected {rank}", v.ambient()));
            }
            if v.is_zero() {
                return Err(format!("zero subspace listed at index {i}"));
            }
            if k > 0 {
                let (j, w) = &jumps[k - 1];
                if j >= i {
                    return Err(format!("indices not strictly increasing ({j} then {i})"));
                }
                if !w.is_subspace_of(v) || w.dim() == v.dim() {
                    return Err(format!("spaces at indices {j} and {i} are not strictly nested"));
                }
            }
        }
        if !jumps.last().map(|(_, v)| v.is_full()).unwrap_or(false) {
            return Err("last space is not the whole space".into());
        }
        Ok(Filtration { rank, jumps })
    }

    /// Builds a filtration from sample values `(i, E(i))` sorted by `i` and
    /// increasing, dropping samples that do not enlarge the space.
    pub(crate) fn from_samples(rank: usize, samples: Vec<(i64, Subspace)>) -> Self {
        let mut jumps: Vec<(i64, Subspace)> = Vec::new();
        for (i, v) in samples {
            if v.is_zero() {
                continue;
            }
            match jumps.last() {
                Some((_, w)) if w.dim() >= v.dim() => continue,
                _ => jumps.push((i, v)),
            }
        }
        Filtration { rank, jumps }
    }

    pub fn single_jump(rank: usize, at: i64) -> Self {
        Filtration { rank, jumps: vec![(at, Subspace::full(rank))] }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn jumps(&self) -> &[(i64, Subspace)] {
        &self.jumps
    }

    pub fn first_index(&self) -> i64 {
        self.jumps[0].0
    }

    pub fn last_index(&self) -> i64 {
        self.jumps[self.jumps.len() - 1].0
    }

    /// `E(i)`.
    pub fn at(&self, i: i64) -> Subspace {
        match self.jumps.iter().rev().find(|(j, _)| *j <= i) {
            Some((_, v)) => v.clone(),
            None => Subspace::zero(self.rank),
        }
    }

    /// `min{i : V ⊆ E(i)}`; `V` must be nonzero for this to be informative.
    pub fn entry_index(&self, v: &Subspace) -> i64 {
        self.jumps.iter().find(|(_, w)| v.is_subspace_of(w)).map(|(i, _)| *i).expect("last space is everything")
    }

    /// `min{i : E(i) ⊄ V}` for a proper subspace `V`.
    pub fn escape_index(&self, v: &Subspace) -> i64 {
        self.jumps.iter().find(|(_, w)| !w.is_subspace_of(v)).map(|(i, _)| *i).expect("last space is everything")
    }

    pub fn dimension_jumps(&self) -> BTreeMap<i64, i64> {
        let mut prev = 0i64;
        let mut out = BTreeMap::new();
        for (i, v) in &self.jumps {
            let d = v.dim() as i64;
            out.insert(*i, prev - d);
            prev = d;
        }
        out
    }

    /// `-Σ_i i·e(i)`.
    pub fn det_index(&self) -> i64 {
        -self.dimension_jumps().iter().map(|(i, e)| i * e).sum::<i64>()
    }

    pub fn shifted(&self, delta: i64) -> Filtration {
        Filtration { rank: self.rank, jumps: self.jumps.iter().map(|(i, v)| (i + delta, v.clone())).collect() }
    }
}

/// A family of filtrations of `E = ℚ^r`, one per facet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationSheaf {
    rank: usize,
    filtrations: Vec<Filtration>,
}

impl FiltrationSheaf {
    pub fn new(rank: usize, filtrations: Vec<Filtration>) -> Result<Self, KlyachkoError> {
        if rank == 0 {
            return Err(KlyachkoError::ZeroRank);
        }
        for (facet, f) in filtrations.iter().enumerate() {
            if f.rank != rank {
                return Err(KlyachkoError::InvalidFiltration {
                    facet,
                    reason: format!("filtration of rank {} in a rank-{rank} sheaf", f.rank),
                });
            }
            Filtration::new(rank, f.jumps.clone())
                .map_err(|reason| KlyachkoError::InvalidFiltration { facet, reason })?;
        }
        Ok(FiltrationSheaf { rank, filtrations })
    }

    /// Builds from raw jump lists per facet, validating each.
    pub fn from_jumps(rank: usize, jumps: Vec<Vec<(i64, Subspace)>>) -> Result<Self, KlyachkoError> {
        if rank == 0 {
            return Err(KlyachkoError::ZeroRank);
        }
        let filtrations = jumps
            .into_iter()
            .enumerate()
            .map(|(facet, j)| {
                Filtration::new(rank, j).map_err(|reason| KlyachkoError::InvalidFiltration { facet, reason })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiltrationSheaf { rank, filtrations })
    }

    /// The rank-one sheaf with a single jump at `jumps[F]` on facet `F`,
    /// i.e. `O(-Σ jumps[F]·D_F)`.
    pub fn rank_one(jumps: &[i64]) -> Self {
        FiltrationSheaf { rank: 1, filtrations: jumps.iter().map(|&a| Filtration::single_jump(1, a)).collect() }
    }

    /// `O(D)` for an integral divisor `D = Σ c_F D_F`.
    pub fn line_bundle(coefficients: &[i64]) -> Self {
        let jumps: Vec<i64> = coefficients.iter().map(|c| -c).collect();
        FiltrationSheaf::rank_one(&jumps)
    }

    pub fn structure_sheaf(facets: usize) -> Self {
        FiltrationSheaf::rank_one(&vec![0; facets])
    }

    /// Rank-`n` sheaf with the line `ℚ·u_F` at index −1 and `E` at 0 on each
    /// facet. On a smooth variety this is the tangent sheaf.
    pub fn tangent(p: &HPolytope) -> Self {
        let n = p.dim();
        let filtrations = p
            .facets()
            .iter()
            .map(|f| {
                let line = Subspace::line(crate::linalg::to_rat_vec(&f.normal));
                if n == 1 {
                    Filtration::single_jump(1, -1)
                } else {
                    Filtration { rank: n, jumps: vec![(-1, line), (0, Subspace::full(n))] }
                }
            })
            .collect();
        FiltrationSheaf { rank: n, filtrations }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn facet_count(&self) -> usize {
        self.filtrations.len()
    }

    pub fn filtrations(&self) -> &[Filtration] {
        &self.filtrations
    }

    pub fn filtration(&self, facet: usize) -> &Filtration {
        &self.filtrations[facet]
    }

    pub fn dimension_jumps(&self, facet: usize) -> BTreeMap<i64, i64> {
        self.filtrations[facet].dimension_jumps()
    }

    pub fn det_indices(&self) -> Vec<i64> {
        self.filtrations.iter().map(Filtration::det_index).collect()
    }

    pub fn first_chern(&self) -> DivisorClass {
        let coeffs: Vec<Rat> = self.det_indices().iter().map(|&i| Rat::from_integer((-i).into())).collect();
        DivisorClass::from_coefficients(&coeffs)
    }

    /// The equivariant subsheaf `F ↦ W ∩ E^F(·)`, expressed in a basis of `W`.
    pub fn subsheaf(&self, w: &Subspace) -> Result<FiltrationSheaf, KlyachkoError> {
        if w.ambient() != self.rank {
            return Err(KlyachkoError::DimensionMismatch { expected: self.rank, found: w.ambient() });
        }
        if w.is_zero() {
            return Err(KlyachkoError::ZeroSubspace);
        }
        let k = w.dim();
        let coords = |v: &Subspace| -> Subspace {
            // coordinates of vectors of v in the RREF basis of w: read off w's pivot columns
            let pivots: Vec<usize> =
                w.basis().iter().map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero row")).collect();
            let rows: Vec<Vec<Rat>> =
                v.basis().iter().map(|r| pivots.iter().map(|&p| r[p].clone()).collect()).collect();
            Subspace { ambient: k, rows: rref(&rows, k).0 }
        };
        let filtrations = self
            .filtrations
            .iter()
            .map(|f| {
                let samples = f.jumps.iter().map(|(i, v)| (*i, coords(&v.intersect(w)))).collect();
                Filtration::from_samples(k, samples)
            })
            .collect();
        Ok(FiltrationSheaf { rank: k, filtrations })
    }

    /// Det indices of the subsheaf at `w` without building it.
    pub fn subsheaf_det_indices(&self, w: &Subspace) -> Vec<i64> {
        self.filtrations
            .iter()
            .map(|f| {
                let mut prev = 0i64;
                let mut total = 0i64;
                for (i, v) in &f.jumps {
                    let d = v.intersect(w).dim() as i64;
                    total += i * (d - prev);
                    prev = d;
                }
                total
            })
            .collect()
    }

    /// `⋂_{F ⊇ Q} E^F(<m, u_F>)`; the whole space when `Q = P`.
    pub fn sections_on_chart(&self, p: &HPolytope, q: &Face, m: &[crate::linalg::Int]) -> Subspace {
        let mut acc = Subspace::full(self.rank);
        for &f in &q.active_facets {
            let pairing = crate::linalg::dot_int(m, &p.facets()[f].normal);
            let i = i64::try_from(&pairing).unwrap_or(if pairing.sign() == num_bigint::Sign::Minus {
                i64::MIN
            } else {
                i64::MAX
            });
            acc = acc.intersect(&self.filtrations[f].at(i));
        }
        acc
    }

    pub fn direct_sum(&self, other: &FiltrationSheaf) -> Result<FiltrationSheaf, KlyachkoError> {
        if self.facet_count() != other.facet_count() {
            return Err(KlyachkoError::FacetMismatch { left: self.facet_count(), right: other.facet_count() });
        }
        let r = self.rank + other.rank;
        let filtrations = self
            .filtrations
            .iter()
            .zip(&other.filtrations)
            .map(|(a, b)| {
                let mut idx: Vec<i64> = a.jumps.iter().chain(&b.jumps).map(|(i, _)| *i).collect();
                idx.sort_unstable();
                idx.dedup();
                let samples = idx
                    .into_iter()
                    .map(|i| {
                        let mut rows = a.at(i).embed(0, r);
                        rows.extend(b.at(i).embed(self.rank, r));
                        (i, Subspace { ambient: r, rows: rref(&rows, r).0 })
                    })
                    .collect();
                Filtration::from_samples(r, samples)
            })
            .collect();
        Ok(FiltrationSheaf { rank: r, filtrations })
    }

    /// Shifts every jump on `facet` by `delta` (tensoring with `O(-delta·D_F)`).
    pub fn shift_facet(&self, facet: usize, delta: i64) -> FiltrationSheaf {
        let mut s = self.clone();
        s.filtrations[facet] = s.filtrations[facet].shifted(delta);
        s
    }

    /// Keeps the facets listed, in order.
    pub fn restrict(&self, facets: &[usize]) -> FiltrationSheaf {
        FiltrationSheaf { rank: self.rank, filtrations: facets.iter().map(|&f| self.filtrations[f].clone()).collect() }
    }

    /// All jump subspaces (including `E`), deduplicated.
    pub fn jump_subspaces(&self) -> Vec<Subspace> {
        let mut v: Vec<Subspace> =
            self.filtrations.iter().flat_map(|f| f.jumps.iter().map(|(_, s)| s.clone())).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Whether `matrix` (target rank × source rank) preserves every filtration.
pub fn is_morphism(
    source: &FiltrationSheaf,
    target: &FiltrationSheaf,
    matrix: &[Vec<Rat>],
) -> Result<bool, KlyachkoError> {
    if source.facet_count() != target.facet_count() {
        return Err(KlyachkoError::FacetMismatch { left: source.facet_count(), right: target.facet_count() });
    }
    let rows = matrix.len();
    let cols = matrix.first().map(|r| r.len()).unwrap_or(source.rank);
    if rows != target.rank || cols != source.rank || matrix.iter().any(|r| r.len() != cols) {
        return Err(KlyachkoError::MatrixShape { rows, cols, expected_rows: target.rank, expected_cols: source.rank });
    }
    Ok(source
        .filtrations
        .iter()
        .zip(&target.filtrations)
        .all(|(a, b)| a.jumps.iter().all(|(i, v)| v.image(matrix, target.rank).is_subspace_of(&b.at(*i)))))
}

pub fn dimension_jumps(s: &FiltrationSheaf, facet: usize) -> BTreeMap<i64, i64> {
    s.dimension_jumps(facet)
}

pub fn det_indices(s: &FiltrationSheaf) -> Vec<i64> {
    s.det_indices()
}

pub fn first_chern(s: &FiltrationSheaf) -> DivisorClass {
    s.first_chern()
}

pub fn subsheaf(s: &FiltrationSheaf, w: &Subspace) -> Result<FiltrationSheaf, KlyachkoError> {
    s.subsheaf(w)
}

pub fn direct_sum(a: &FiltrationSheaf, b: &FiltrationSheaf) -> Result<FiltrationSheaf, KlyachkoError> {
    a.direct_sum(b)
}
