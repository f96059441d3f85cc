//! Constructors for standard polytopes and projectivized split bundles.
//!
//! Hirzebruch surfaces `𝔽_a` use the normals `e₁, e₂, -e₁ + a·e₂, -e₂` in
//! that order; callers supply the four supports.

use crate::git::{GitError, GitSetup};
use crate::lattice::Sublattice;
use crate::linalg::{Int, Rat};
use crate::polytope::{DivisorClass, Facet, HPolytope, PolytopeError};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("assembled polytope is invalid ({0}); try dilating the base supports")]
    NotAmple(PolytopeError),
    #[error("the formula needs a surface base and rank-3 bundle (got base dimension {base_dim}, r = {r})")]
    WrongDimensions { base_dim: usize, r: usize },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Git(#[from] GitError),
}

impl BuildError {
    pub fn kind(&self) -> &'static str {
        match self {
            BuildError::InvalidParameter(_) => "InvalidParameter",
            BuildError::NotAmple(_) => "NotAmple",
            BuildError::WrongDimensions { .. } => "WrongDimensions",
            BuildError::Polytope(e) => e.kind(),
            BuildError::Git(e) => e.kind(),
        }
    }
}

fn unit(n: usize, i: usize) -> Vec<Int> {
    (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()
}

/// `k·Δ_n` with normals `e_1, …, e_n, -Σe_i` and supports `(0, …, 0, k)`.
pub fn projective_space(n: usize, k: i64) -> Result<HPolytope, BuildError> {
    if n == 0 || k < 1 {
        return Err(BuildError::InvalidParameter(format!(
            "projective_space needs n ≥ 1 and k ≥ 1 (got n = {n}, k = {k})"
        )));
    }
    let mut facets: Vec<Facet> = (0..n).map(|i| Facet::new(unit(n, i), Rat::zero())).collect();
    facets.push(Facet::new(vec![-Int::one(); n], Rat::from_integer(k.into())));
    Ok(HPolytope::new(n, facets)?)
}

pub fn hirzebruch(a: i64, supports: &[Rat; 4]) -> Result<HPolytope, BuildError> {
    if a < 0 {
        return Err(BuildError::InvalidParameter(format!("hirzebruch needs a ≥ 0 (got {a})")));
    }
    let normals = [vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]];
    let facets = normals
        .iter()
        .zip(supports)
        .map(|(u, s)| Facet::new(u.iter().map(|&x| Int::from(x)).collect(), s.clone()))
        .collect();
    Ok(HPolytope::new(2, facets)?)
}

/// `[lo, hi] ⊂ ℝ` with facets `e₁` (support `-lo`) and `-e₁` (support `hi`).
pub fn segment(lo: Rat, hi: Rat) -> Result<HPolytope, BuildError> {
    Ok(HPolytope::new(1, vec![Facet::new(vec![Int::one()], -lo), Facet::new(vec![-Int::one()], hi)])?)
}

/// `P × Q`: facets of `P` first, then those of `Q`.
pub fn product(p: &HPolytope, q: &HPolytope) -> Result<HPolytope, BuildError> {
    let n = p.dim() + q.dim();
    let mut facets = Vec::with_capacity(p.facet_count() + q.facet_count());
    for f in p.facets() {
        let mut u = f.normal.clone();
        u.resize(n, Int::zero());
        facets.push(Facet::new(u, f.support.clone()));
    }
    for f in q.facets() {
        let mut u = vec![Int::zero(); p.dim()];
        u.extend(f.normal.iter().cloned());
        facets.push(Facet::new(u, f.support.clone()));
    }
    Ok(HPolytope::new(n, facets)?)
}

/// `ℙ(O ⊕ O(D_1) ⊕ … ⊕ O(D_r))` over the toric variety of `base`, with
/// `divisors[i][ρ]` the coefficient of `D_ρ` in `D_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSpec {
    pub base: HPolytope,
    pub divisors: Vec<Vec<Int>>,
}

impl BundleSpec {
    pub fn new(base: HPolytope, divisors: Vec<Vec<Int>>) -> Result<Self, BuildError> {
        if divisors.is_empty() {
            return Err(BuildError::InvalidParameter("bundle needs r ≥ 1 summands beyond O".into()));
        }
        for (i, d) in divisors.iter().enumerate() {
            if d.len() != base.facet_count() {
                return Err(BuildError::InvalidParameter(format!(
                    "divisor {} has {} coefficients, base has {} facets",
                    i + 1,
                    d.len(),
                    base.facet_count()
                )));
            }
        }
        Ok(BundleSpec { base, divisors })
    }

    pub fn r(&self) -> usize {
        self.divisors.len()
    }

    /// The facets of the total space: base facets first (lifted by the
    /// divisor coefficients), then the section facets `e₀ = -Σe_i, e_1, …, e_r`.
    pub fn total_polytope(&self) -> Result<HPolytope, BuildError> {
        let ny = self.base.dim();
        let r = self.r();
        let n = ny + r;
        let mut facets = Vec::with_capacity(self.base.facet_count() + r + 1);
        for (rho, f) in self.base.facets().iter().enumerate() {
            let mut u = f.normal.clone();
            u.extend(self.divisors.iter().map(|d| d[rho].clone()));
            facets.push(Facet::new(u, f.support.clone()));
        }
        let mut e0 = vec![Int::zero(); ny];
        e0.extend(vec![-Int::one(); r]);
        facets.push(Facet::new(e0, Rat::one()));
        for i in 0..r {
            facets.push(Facet::new(unit(n, ny + i), Rat::one()));
        }
        HPolytope::new(n, facets).map_err(BuildError::NotAmple)
    }

    /// `N₀ = {0} × ℤ^r`.
    pub fn fiber_sublattice(&self) -> Sublattice {
        let ny = self.base.dim();
        let n = ny + self.r();
        let gens: Vec<Vec<Int>> = (0..self.r()).map(|i| unit(n, ny + i)).collect();
        Sublattice::new(n, &gens).expect("unit generators")
    }
}

pub fn projectivized_bundle(spec: &BundleSpec) -> Result<GitSetup, BuildError> {
    Ok(GitSetup::new(spec.total_polytope()?, spec.fiber_sublattice())?)
}

/// `3·L_Y + D_1 + D_2` on a surface base with a rank-3 bundle, where `L_Y`
/// is the divisor of the base supports.
pub fn alpha_surface_formula(spec: &BundleSpec) -> Result<DivisorClass, BuildError> {
    if spec.base.dim() != 2 || spec.r() != 2 {
        return Err(BuildError::WrongDimensions { base_dim: spec.base.dim(), r: spec.r() });
    }
    let three = Rat::from_integer(3.into());
    let coeffs: Vec<Rat> = spec
        .base
        .facets()
        .iter()
        .enumerate()
        .map(|(rho, f)| {
            &f.support * &three + spec.divisors.iter().map(|d| Rat::from_integer(d[rho].clone())).sum::<Rat>()
        })
        .collect();
    Ok(DivisorClass::from_coefficients(&coeffs))
}
