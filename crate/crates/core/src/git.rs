//! GIT quotients of a polarized toric variety by a subtorus.
//!
//! A setup is a polytope `P` (its translation is the linearization) and a
//! saturated sublattice `N₀ ⊂ N`. With `U = N₀^⊥ ⊗ ℝ` a face `Q` is
//! semistable when it meets `U`, stable when its relative interior meets `U`
//! and `dir(Q) + U` is everything. `U` is parametrized by the rows `w_j` of
//! the quotient projection, so `m = Σ y_j w_j` and `<m, u> = <y, π(u)>`; the
//! quotient polytope `P_Y = P ∩ U` lives in these `y` coordinates.

use crate::klyachko::{Filtration, FiltrationSheaf, KlyachkoError};
use crate::lattice::{primitive_content, Lattice, LatticeError, QuotientLattice, Sublattice};
use crate::linalg::{rank, rat_from_int, to_rat_vec, Int, Rat};
use crate::polytope::{barycenter, system_vertices, Face, Facet, HPolytope, PolytopeError};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GitError {
    #[error("setup is not generic (strictly semistable faces or empty stable locus)")]
    NotGeneric,
    #[error("sublattice lives in dimension {found}, polytope in {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sheaf has {found} facets, expected {expected}")]
    FacetMismatch { expected: usize, found: usize },
    #[error("index vector keys {found:?} differ from the unstable facets {expected:?}")]
    IndexKeyMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Klyachko(#[from] KlyachkoError),
}

impl GitError {
    pub fn kind(&self) -> &'static str {
        match self {
            GitError::NotGeneric => "NotGeneric",
            GitError::DimensionMismatch { .. } => "DimensionMismatch",
            GitError::FacetMismatch { .. } => "FacetMismatch",
            GitError::IndexKeyMismatch { .. } => "IndexKeyMismatch",
            GitError::Lattice(e) => e.kind(),
            GitError::Polytope(e) => e.kind(),
            GitError::Klyachko(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaceStatus {
    Stable,
    StrictlySemistable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedFace {
    pub face: Face,
    pub status: FaceStatus,
    /// A point of `relint(Q ∩ U)` in `M` coordinates when `Q` is semistable.
    pub witness: Option<Vec<Rat>>,
}

/// Prescribed jumps `i_F` on the unstable facets.
pub type UnstableIndexVector = BTreeMap<usize, i64>;

#[derive(Debug, Clone)]
pub struct GitSetup {
    polytope: HPolytope,
    n0: Sublattice,
    quotient: QuotientLattice,
    projected: Vec<Vec<Int>>,
    faces: Vec<ClassifiedFace>,
    stable_facets: Vec<usize>,
    unstable_facets: Vec<usize>,
    generic: bool,
    quotient_data: Option<(HPolytope, Vec<Int>)>,
}

impl GitSetup {
    pub fn new(polytope: HPolytope, n0: Sublattice) -> Result<Self, GitError> {
        let n = polytope.dim();
        if n0.ambient() != n {
            return Err(GitError::DimensionMismatch { expected: n, found: n0.ambient() });
        }
        let quotient = QuotientLattice::new(Lattice::new(n), &n0)?;
        let k = quotient.rank();
        let projected: Vec<Vec<Int>> = polytope.facets().iter().map(|f| quotient.project(&f.normal)).collect();
        let supports = polytope.supports();
        let u_vertices = system_vertices(k, &projected, &supports);
        let w_rows: Vec<Vec<Rat>> = quotient.projection_matrix().iter().map(|w| to_rat_vec(w)).collect();
        let to_m = |y: &[Rat]| -> Vec<Rat> {
            let mut m = vec![Rat::zero(); n];
            for (c, w) in y.iter().zip(&w_rows) {
                for (x, wi) in m.iter_mut().zip(w) {
                    *x += c * wi;
                }
            }
            m
        };

        let faces: Vec<ClassifiedFace> = polytope
            .face_lattice()
            .into_iter()
            .map(|face| {
                let meeting: Vec<&(Vec<Rat>, BTreeSet<usize>)> =
                    u_vertices.iter().filter(|(_, t)| face.active_facets.is_subset(t)).collect();
                if meeting.is_empty() {
                    return ClassifiedFace { face, status: FaceStatus::Unstable, witness: None };
                }
                let mut common = meeting[0].1.clone();
                for (_, t) in &meeting[1..] {
                    common = common.intersection(t).cloned().collect();
                }
                let pts: Vec<&Vec<Rat>> = meeting.iter().map(|(y, _)| y).collect();
                let witness = to_m(&barycenter(&pts, k));
                let mut dirs: Vec<Vec<Rat>> = face
                    .vertices
                    .iter()
                    .skip(1)
                    .map(|&v| {
                        let a = &polytope.vertices()[v];
                        let b = &polytope.vertices()[face.vertices[0]];
                        a.iter().zip(b).map(|(x, y)| x - y).collect()
                    })
                    .collect();
                dirs.extend(w_rows.iter().cloned());
                let transversal = rank(&dirs, n) == n;
                let status = if common == face.active_facets && transversal {
                    FaceStatus::Stable
                } else {
                    FaceStatus::StrictlySemistable
                };
                ClassifiedFace { face, status, witness: Some(witness) }
            })
            .collect();

        let facet_status = |f: usize| {
            faces
                .iter()
                .find(|c| c.face.active_facets.len() == 1 && c.face.active_facets.contains(&f))
                .map(|c| c.status)
                .expect("every facet is a face")
        };
        let (stable_facets, unstable_facets): (Vec<usize>, Vec<usize>) =
            (0..polytope.facet_count()).partition(|&f| facet_status(f) == FaceStatus::Stable);
        let generic = n0.rank() < n
            && faces.iter().all(|c| c.status != FaceStatus::StrictlySemistable)
            && faces.iter().any(|c| c.status == FaceStatus::Stable);

        let mut setup = GitSetup {
            polytope,
            n0,
            quotient,
            projected,
            faces,
            stable_facets,
            unstable_facets,
            generic,
            quotient_data: None,
        };
        if generic {
            setup.quotient_data = Some(setup.build_quotient_polytope()?);
        }
        Ok(setup)
    }

    fn build_quotient_polytope(&self) -> Result<(HPolytope, Vec<Int>), GitError> {
        let mut facets = Vec::new();
        let mut b = Vec::new();
        for &f in &self.stable_facets {
            let (prim, content) = primitive_content(&self.projected[f])?;
            let support = &self.polytope.facets()[f].support / rat_from_int(&content);
            facets.push(Facet::new(prim, support));
            b.push(content);
        }
        Ok((HPolytope::new(self.quotient.rank(), facets)?, b))
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.polytope
    }

    pub fn sublattice(&self) -> &Sublattice {
        &self.n0
    }

    pub fn quotient_lattice(&self) -> &QuotientLattice {
        &self.quotient
    }

    /// `π(u_F)` for every facet of `P`.
    pub fn projected_normals(&self) -> &[Vec<Int>] {
        &self.projected
    }

    pub fn classification(&self) -> &[ClassifiedFace] {
        &self.faces
    }

    pub fn stable_facets(&self) -> &[usize] {
        &self.stable_facets
    }

    pub fn unstable_facets(&self) -> &[usize] {
        &self.unstable_facets
    }

    pub fn is_generic(&self) -> bool {
        self.generic
    }

    pub fn quotient_dim(&self) -> usize {
        self.quotient.rank()
    }

    fn data(&self) -> Result<&(HPolytope, Vec<Int>), GitError> {
        self.quotient_data.as_ref().ok_or(GitError::NotGeneric)
    }

    /// `P_Y`, whose facet `j` corresponds to `stable_facets()[j]`.
    pub fn quotient_polytope(&self) -> Result<&HPolytope, GitError> {
        Ok(&self.data()?.0)
    }

    /// `b_F` for each stable facet, in `stable_facets()` order.
    pub fn b(&self) -> Result<&[Int], GitError> {
        Ok(&self.data()?.1)
    }

    fn b_i64(&self) -> Result<Vec<i64>, GitError> {
        Ok(self.b()?.iter().map(|x| x.to_i64().expect("b_F fits in i64")).collect())
    }

    fn check_x_sheaf(&self, s: &FiltrationSheaf) -> Result<(), GitError> {
        if s.facet_count() != self.polytope.facet_count() {
            return Err(GitError::FacetMismatch { expected: self.polytope.facet_count(), found: s.facet_count() });
        }
        Ok(())
    }

    fn check_y_sheaf(&self, s: &FiltrationSheaf) -> Result<(), GitError> {
        if s.facet_count() != self.stable_facets.len() {
            return Err(GitError::FacetMismatch { expected: self.stable_facets.len(), found: s.facet_count() });
        }
        Ok(())
    }

    /// Restriction to the stable facets, in `stable_facets()` order.
    pub fn restrict_to_stable(&self, s: &FiltrationSheaf) -> Result<FiltrationSheaf, GitError> {
        self.check_x_sheaf(s)?;
        Ok(s.restrict(&self.stable_facets))
    }

    /// `Ě^F̌(i) = E^F(b_F·i)`.
    pub fn pushforward(&self, s: &FiltrationSheaf) -> Result<FiltrationSheaf, GitError> {
        self.check_x_sheaf(s)?;
        let b = self.b_i64()?;
        let filtrations = self
            .stable_facets
            .iter()
            .zip(&b)
            .map(|(&f, &bf)| {
                let mut jumps: Vec<(i64, crate::klyachko::Subspace)> = Vec::new();
                for (i, v) in s.filtration(f).jumps() {
                    let j = Integer::div_ceil(i, &bf);
                    match jumps.last_mut() {
                        Some((last, space)) if *last == j => *space = v.clone(),
                        _ => jumps.push((j, v.clone())),
                    }
                }
                Filtration::new(s.rank(), jumps).expect("pushforward keeps a valid filtration")
            })
            .collect();
        Ok(FiltrationSheaf::new(s.rank(), filtrations)?)
    }

    /// `E^F(i) = Ě^F̌(⌊i / b_F⌋)` on the stable facets.
    pub fn pullback(&self, e: &FiltrationSheaf) -> Result<FiltrationSheaf, GitError> {
        self.check_y_sheaf(e)?;
        let b = self.b_i64()?;
        let filtrations = e
            .filtrations()
            .iter()
            .zip(&b)
            .map(|(f, &bf)| {
                let jumps = f.jumps().iter().map(|(i, v)| (i * bf, v.clone())).collect();
                Filtration::new(e.rank(), jumps).expect("pullback keeps a valid filtration")
            })
            .collect();
        Ok(FiltrationSheaf::new(e.rank(), filtrations)?)
    }

    /// Every jump on a stable facet is divisible by `b_F`.
    pub fn descends(&self, s: &FiltrationSheaf) -> Result<bool, GitError> {
        self.check_x_sheaf(s)?;
        let b = self.b_i64()?;
        Ok(self
            .stable_facets
            .iter()
            .zip(&b)
            .all(|(&f, &bf)| s.filtration(f).jumps().iter().all(|(i, _)| i.rem_euclid(bf) == 0)))
    }

    fn check_index(&self, i: &UnstableIndexVector) -> Result<(), GitError> {
        let keys: Vec<usize> = i.keys().cloned().collect();
        if keys != self.unstable_facets {
            return Err(GitError::IndexKeyMismatch { expected: self.unstable_facets.clone(), found: keys });
        }
        Ok(())
    }

    /// The zero index vector.
    pub fn zero_index(&self) -> UnstableIndexVector {
        self.unstable_facets.iter().map(|&f| (f, 0)).collect()
    }

    /// `𝔓_𝐢(Ě)`: pullback on stable facets, one full jump at `i_F` elsewhere.
    pub fn pullback_functor(&self, i: &UnstableIndexVector, e: &FiltrationSheaf) -> Result<FiltrationSheaf, GitError> {
        self.check_index(i)?;
        let pulled = self.pullback(e)?;
        let r = e.rank();
        let mut filtrations: Vec<Option<Filtration>> = vec![None; self.polytope.facet_count()];
        for (k, &f) in self.stable_facets.iter().enumerate() {
            filtrations[f] = Some(pulled.filtration(k).clone());
        }
        for (&f, &at) in i {
            filtrations[f] = Some(Filtration::single_jump(r, at));
        }
        let filtrations = filtrations.into_iter().map(|f| f.expect("facet covered")).collect();
        Ok(FiltrationSheaf::new(r, filtrations)?)
    }

    /// Whether `s` lies in the image of `𝔓_𝐢`.
    pub fn in_image(&self, i: &UnstableIndexVector, s: &FiltrationSheaf) -> Result<bool, GitError> {
        self.check_index(i)?;
        if !self.descends(s)? {
            return Ok(false);
        }
        Ok(i.iter().all(|(&f, &at)| {
            let jumps = s.filtration(f).jumps();
            jumps.len() == 1 && jumps[0].0 == at
        }))
    }

    /// `P_Y` has `dim(Y) + 1` facets.
    pub fn is_weighted_projective_quotient(&self) -> Result<bool, GitError> {
        let py = self.quotient_polytope()?;
        Ok(py.facet_count() == py.dim() + 1)
    }
}

pub fn classify_faces(setup: &GitSetup) -> &[ClassifiedFace] {
    setup.classification()
}

pub fn is_generic(setup: &GitSetup) -> bool {
    setup.is_generic()
}
