//! JSON transfer objects for polytopes, sheaves, setups and bundle specs.
//!
//! Rationals travel as `"p/q"` strings (plain JSON integers are accepted on
//! input). Domain types never derive serde; conversions live here.

use crate::build::{BuildError, BundleSpec};
use crate::git::{GitError, GitSetup};
use crate::klyachko::{FiltrationSheaf, KlyachkoError, Subspace};
use crate::lattice::{LatticeError, Sublattice};
use crate::linalg::{format_rational, parse_rational, Int, Rat};
use crate::polytope::{Facet, HPolytope, PolytopeError};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Klyachko(#[from] KlyachkoError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Git(#[from] GitError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

impl JsonError {
    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            JsonError::Schema(_) => "json",
            JsonError::Polytope(_) => "polytope",
            JsonError::Klyachko(_) => "klyachko",
            JsonError::Lattice(_) => "lattice",
            JsonError::Git(_) => "git",
            JsonError::Build(_) => "build",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            JsonError::Schema(_) => "Schema",
            JsonError::Polytope(e) => e.kind(),
            JsonError::Klyachko(e) => e.kind(),
            JsonError::Lattice(e) => e.kind(),
            JsonError::Git(e) => e.kind(),
            JsonError::Build(e) => e.kind(),
        }
    }
}

/// A rational given as `"p/q"`, `"p"` or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalDto {
    Text(String),
    Integer(i64),
}

impl RationalDto {
    pub fn from_rat(q: &Rat) -> Self {
        RationalDto::Text(format_rational(q))
    }

    pub fn to_rat(&self) -> Result<Rat, JsonError> {
        match self {
            RationalDto::Text(s) => parse_rational(s).map_err(|e| JsonError::Schema(e.to_string())),
            RationalDto::Integer(i) => Ok(Rat::from_integer((*i).into())),
        }
    }
}

pub fn int_to_i64(x: &Int) -> Result<i64, JsonError> {
    x.to_i64().ok_or_else(|| JsonError::Schema(format!("integer {x} does not fit in 64 bits")))
}

pub fn ints_to_i64(v: &[Int]) -> Result<Vec<i64>, JsonError> {
    v.iter().map(int_to_i64).collect()
}

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetDto {
    pub normal: Vec<i64>,
    pub support: RationalDto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDto {
    pub n: usize,
    pub facets: Vec<FacetDto>,
}

impl PolytopeDto {
    pub fn to_domain(&self) -> Result<HPolytope, JsonError> {
        let facets = self
            .facets
            .iter()
            .map(|f| Ok(Facet::new(ints(&f.normal), f.support.to_rat()?)))
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(HPolytope::new(self.n, facets)?)
    }

    pub fn from_domain(p: &HPolytope) -> Result<Self, JsonError> {
        let facets = p
            .facets()
            .iter()
            .map(|f| Ok(FacetDto { normal: ints_to_i64(&f.normal)?, support: RationalDto::from_rat(&f.support) }))
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(PolytopeDto { n: p.dim(), facets })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpDto {
    pub i: i64,
    pub basis: Vec<Vec<RationalDto>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafDto {
    pub rank: usize,
    pub filtrations: BTreeMap<String, Vec<JumpDto>>,
}

pub fn subspace_from_rows(rank: usize, rows: &[Vec<RationalDto>]) -> Result<Subspace, JsonError> {
    let vecs = rows
        .iter()
        .map(|r| r.iter().map(RationalDto::to_rat).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Subspace::span(rank, &vecs)?)
}

pub fn subspace_to_rows(w: &Subspace) -> Vec<Vec<RationalDto>> {
    w.basis().iter().map(|r| r.iter().map(RationalDto::from_rat).collect()).collect()
}

impl SheafDto {
    /// Facet keys must be exactly `"0"`, …, `"d-1"`.
    pub fn to_domain(&self) -> Result<FiltrationSheaf, JsonError> {
        let d = self.filtrations.len();
        let mut jumps = vec![None; d];
        for (key, list) in &self.filtrations {
            let f: usize = key
                .parse()
                .ok()
                .filter(|&f| f < d)
                .ok_or_else(|| JsonError::Schema(format!("facet key {key:?} is not an index below {d}")))?;
            let parsed = list
                .iter()
                .map(|j| Ok((j.i, subspace_from_rows(self.rank, &j.basis)?)))
                .collect::<Result<Vec<_>, JsonError>>()?;
            jumps[f] = Some(parsed);
        }
        let jumps = jumps
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| JsonError::Schema("duplicate facet keys".into()))?;
        Ok(FiltrationSheaf::from_jumps(self.rank, jumps)?)
    }

    pub fn from_domain(s: &FiltrationSheaf) -> Self {
        let filtrations = s
            .filtrations()
            .iter()
            .enumerate()
            .map(|(f, filt)| {
                let jumps = filt.jumps().iter().map(|(i, w)| JumpDto { i: *i, basis: subspace_to_rows(w) }).collect();
                (f.to_string(), jumps)
            })
            .collect();
        SheafDto { rank: s.rank(), filtrations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupDto {
    pub polytope: PolytopeDto,
    pub sublattice: Vec<Vec<i64>>,
}

impl SetupDto {
    pub fn to_domain(&self) -> Result<GitSetup, JsonError> {
        let p = self.polytope.to_domain()?;
        let gens: Vec<Vec<Int>> = self.sublattice.iter().map(|g| ints(g)).collect();
        let n0 = Sublattice::new(p.dim(), &gens)?;
        Ok(GitSetup::new(p, n0)?)
    }

    pub fn from_domain(s: &GitSetup) -> Result<Self, JsonError> {
        Ok(SetupDto {
            polytope: PolytopeDto::from_domain(s.polytope())?,
            sublattice: s.sublattice().basis().iter().map(|g| ints_to_i64(g)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDto {
    pub base: PolytopeDto,
    pub divisors: Vec<Vec<i64>>,
}

impl BundleDto {
    pub fn to_domain(&self) -> Result<BundleSpec, JsonError> {
        let base = self.base.to_domain()?;
        Ok(BundleSpec::new(base, self.divisors.iter().map(|d| ints(d)).collect())?)
    }
}

/// Converts an unstable index map to string keys for JSON.
pub fn index_to_json(i: &BTreeMap<usize, i64>) -> BTreeMap<String, i64> {
    i.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn index_from_json(i: &BTreeMap<String, i64>) -> Result<BTreeMap<usize, i64>, JsonError> {
    i.iter()
        .map(|(k, v)| {
            k.parse::<usize>()
                .map(|f| (f, *v))
                .map_err(|_| JsonError::Schema(format!("index key {k:?} is not a facet number")))
        })
        .collect()
}
