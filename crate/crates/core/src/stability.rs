//! Slopes and slope stability of equivariant reflexive sheaves.
//!
//! Equivariant saturated subsheaves correspond to subspaces `W ⊆ E`, so
//! stability reduces to comparing `μ(E_W)` with `μ(E)` over subspaces. Two
//! families are handled exactly:
//!
//! * lines: a line `ℓ` enters `E^F` at `p_F(ℓ) = min{i : ℓ ⊆ E^F(i)}`, and
//!   `V = ⋂_F E^F(p_F(ℓ))` contains `ℓ` with the same profile. So the best
//!   line slope is a maximum over the ∩-closure of the jump subspaces.
//! * hyperplanes: `H` satisfies `i_F(det E_H) = i_F(det E) - q_F(H)` with
//!   `q_F(H) = min{i : E^F(i) ⊄ H}`, and the best hyperplane is found over
//!   proper members of the +-closure of the jump subspaces (including `0`).
//!
//! Intermediate dimensions are searched over the ∩/+ closure and random
//! subspaces, and verdicts record whether the search was complete.

use crate::klyachko::{FiltrationSheaf, KlyachkoError, Subspace};
use crate::linalg::{to_f64, Rat};
use crate::par::{self, Execution};
use crate::polytope::HPolytope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

pub const DEFAULT_CAP: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed_f7a1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("sheaf has {sheaf} facets but the polarization has {polarization}")]
    FacetMismatch { sheaf: usize, polarization: usize },
    #[error(transparent)]
    Klyachko(#[from] KlyachkoError),
}

impl StabilityError {
    pub fn kind(&self) -> &'static str {
        match self {
            StabilityError::FacetMismatch { .. } => "FacetMismatch",
            StabilityError::Klyachko(e) => e.kind(),
        }
    }
}

/// Facet degrees `deg(D_F)` of a polarization, exact or floating.
#[derive(Debug, Clone, PartialEq)]
pub enum Polarization {
    Exact(Vec<Rat>),
    Numeric { degrees: Vec<f64>, tie_tol: f64 },
}

/// A slope value matching the polarization kind.
#[derive(Debug, Clone, PartialEq)]
pub enum SlopeValue {
    Exact(Rat),
    Numeric(f64),
}

impl SlopeValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            SlopeValue::Exact(q) => to_f64(q),
            SlopeValue::Numeric(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            SlopeValue::Exact(q) => Some(q),
            SlopeValue::Numeric(_) => None,
        }
    }
}

impl Polarization {
    pub fn from_polytope(p: &HPolytope) -> Self {
        Polarization::Exact(p.facet_latvols())
    }

    pub fn numeric(degrees: Vec<f64>, tie_tol: f64) -> Self {
        Polarization::Numeric { degrees, tie_tol }
    }

    pub fn facet_count(&self) -> usize {
        match self {
            Polarization::Exact(d) => d.len(),
            Polarization::Numeric { degrees, .. } => degrees.len(),
        }
    }

    /// `-(1/rank) Σ_F det[F]·deg_F`.
    pub fn slope(&self, det: &[i64], rank: usize) -> SlopeValue {
        match self {
            Polarization::Exact(deg) => {
                let s: Rat = det.iter().zip(deg).map(|(&i, d)| d * Rat::from_integer(i.into())).sum();
                SlopeValue::Exact(-s / Rat::from_integer(rank.into()))
            }
            Polarization::Numeric { degrees, .. } => {
                let s: f64 = det.iter().zip(degrees).map(|(&i, d)| i as f64 * d).sum();
                SlopeValue::Numeric(-s / rank as f64)
            }
        }
    }

    /// Compares two slopes, treating numeric values within `tie_tol` as equal.
    pub fn compare(&self, a: &SlopeValue, b: &SlopeValue) -> Ordering {
        match (self, a, b) {
            (_, SlopeValue::Exact(x), SlopeValue::Exact(y)) => x.cmp(y),
            (Polarization::Numeric { tie_tol, .. }, _, _) => {
                let (x, y) = (a.to_f64(), b.to_f64());
                let scale = 1.0f64.max(x.abs()).max(y.abs());
                if (x - y).abs() <= tie_tol * scale {
                    Ordering::Equal
                } else {
                    x.partial_cmp(&y).unwrap_or(Ordering::Equal)
                }
            }
            _ => a.to_f64().partial_cmp(&b.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityStatus {
    Stable,
    Semistable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct StabilityOptions {
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            cap: DEFAULT_CAP,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            execution: Execution::default(),
        }
    }
}

/// Where a slope-table entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    Closure,
    LineProfile,
    HyperplaneProfile,
    Random,
}

#[derive(Debug, Clone)]
pub struct SlopeEntry {
    pub subspace: Subspace,
    pub slope: SlopeValue,
    pub source: CandidateSource,
}

#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    pub certainty: Certainty,
    pub slope: SlopeValue,
    pub witness: Option<SlopeEntry>,
    pub slope_table: Vec<SlopeEntry>,
    pub seed: u64,
    pub cap_hit: bool,
    pub random_samples: usize,
    pub field: &'static str,
}

fn check_facets(s: &FiltrationSheaf, pol: &Polarization) -> Result<(), StabilityError> {
    if s.facet_count() != pol.facet_count() {
        return Err(StabilityError::FacetMismatch { sheaf: s.facet_count(), polarization: pol.facet_count() });
    }
    Ok(())
}

/// `μ(S)` under the polarization.
pub fn slope_with(s: &FiltrationSheaf, pol: &Polarization) -> Result<SlopeValue, StabilityError> {
    check_facets(s, pol)?;
    Ok(pol.slope(&s.det_indices(), s.rank()))
}

/// Exact `μ_P(S) = -(1/r) Σ_F i_F(det S)·latvol(F)`.
pub fn slope(s: &FiltrationSheaf, p: &HPolytope) -> Result<Rat, StabilityError> {
    match slope_with(s, &Polarization::from_polytope(p))? {
        SlopeValue::Exact(q) => Ok(q),
        SlopeValue::Numeric(_) => unreachable!("exact polarization"),
    }
}

/// Slope of the subsheaf at `w`.
pub fn subsheaf_slope(s: &FiltrationSheaf, w: &Subspace, pol: &Polarization) -> SlopeValue {
    pol.slope(&s.subsheaf_det_indices(w), w.dim())
}

fn closure(seed: Vec<Subspace>, cap: usize, with_sum: bool, with_meet: bool) -> (Vec<Subspace>, bool) {
    let mut set: BTreeSet<Subspace> = seed.into_iter().collect();
    let mut frontier: Vec<Subspace> = set.iter().cloned().collect();
    while !frontier.is_empty() {
        let current: Vec<Subspace> = set.iter().cloned().collect();
        let mut next = Vec::new();
        for a in &frontier {
            for b in &current {
                let mut products = Vec::with_capacity(2);
                if with_meet {
                    products.push(a.intersect(b));
                }
                if with_sum {
                    products.push(a.sum(b));
                }
                for c in products {
                    if !set.contains(&c) {
                        if set.len() >= cap {
                            return (set.into_iter().collect(), true);
                        }
                        set.insert(c.clone());
                        next.push(c);
                    }
                }
            }
        }
        frontier = next;
    }
    (set.into_iter().collect(), false)
}

/// Proper jump subspaces closed under pairwise `∩` and `+`. The boolean
/// reports whether `cap` stopped the closure early.
pub fn candidate_subspaces(s: &FiltrationSheaf, cap: usize) -> (Vec<Subspace>, bool) {
    let r = s.rank();
    let proper: Vec<Subspace> = s.jump_subspaces().into_iter().filter(|v| !v.is_full()).collect();
    let (all, hit) = closure(proper, cap, true, true);
    (all.into_iter().filter(|v| !v.is_zero() && v.dim() < r).collect(), hit)
}

fn line_profile_candidates(s: &FiltrationSheaf, cap: usize) -> (Vec<Subspace>, bool) {
    let (all, hit) = closure(s.jump_subspaces(), cap, false, true);
    (all.into_iter().filter(|v| !v.is_zero()).collect(), hit)
}

fn hyperplane_profile_candidates(s: &FiltrationSheaf, cap: usize) -> (Vec<Subspace>, bool) {
    let mut seed: Vec<Subspace> = s.jump_subspaces().into_iter().filter(|v| !v.is_full()).collect();
    seed.push(Subspace::zero(s.rank()));
    let (all, hit) = closure(seed, cap, true, false);
    (all.into_iter().filter(|v| !v.is_full()).collect(), hit)
}

fn hyperplane_containing(v: &Subspace) -> Subspace {
    let ann = v.annihilator();
    let y = &ann[0];
    let r = v.ambient();
    let rows = crate::linalg::nullspace(std::slice::from_ref(y), r);
    Subspace::span(r, &rows).expect("dimensions agree")
}

fn random_subspace(rng: &mut ChaCha8Rng, r: usize, k: usize) -> Subspace {
    loop {
        let rows: Vec<Vec<Rat>> =
            (0..k).map(|_| (0..r).map(|_| Rat::from_integer(rng.gen_range(-9i64..=9).into())).collect()).collect();
        let w = Subspace::span(r, &rows).expect("dimensions agree");
        if w.dim() == k {
            return w;
        }
    }
}

/// Seeded random subspaces of every proper dimension, deterministic per index.
pub fn random_subspaces(r: usize, count: usize, seed: u64, exec: Execution) -> Vec<Subspace> {
    if r < 2 {
        return Vec::new();
    }
    par::map_range(exec, count, |idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let k = 1 + idx % (r - 1);
        random_subspace(&mut rng, r, k)
    })
}

/// Best line: `(slope, witness line)` via the ∩-closure profile argument.
pub fn max_line_slope(s: &FiltrationSheaf, pol: &Polarization, cap: usize) -> Option<(SlopeValue, Subspace, bool)> {
    if s.rank() < 2 {
        return None;
    }
    let (cands, hit) = line_profile_candidates(s, cap);
    let mut best: Option<(SlopeValue, Subspace)> = None;
    for v in cands {
        let line = Subspace::line(v.basis()[0].clone());
        let value = subsheaf_slope(s, &line, pol);
        if best.as_ref().map(|(b, _)| pol.compare(&value, b) == Ordering::Greater).unwrap_or(true) {
            best = Some((value, line));
        }
    }
    best.map(|(v, l)| (v, l, hit))
}

/// Best hyperplane via the +-closure profile argument.
pub fn max_hyperplane_slope(
    s: &FiltrationSheaf,
    pol: &Polarization,
    cap: usize,
) -> Option<(SlopeValue, Subspace, bool)> {
    if s.rank() < 2 {
        return None;
    }
    let (cands, hit) = hyperplane_profile_candidates(s, cap);
    let mut best: Option<(SlopeValue, Subspace)> = None;
    for v in cands {
        let h = hyperplane_containing(&v);
        let value = subsheaf_slope(s, &h, pol);
        if best.as_ref().map(|(b, _)| pol.compare(&value, b) == Ordering::Greater).unwrap_or(true) {
            best = Some((value, h));
        }
    }
    best.map(|(v, h)| (v, h, hit))
}

/// Stability verdict against an exact polytope polarization.
pub fn check_stability(
    s: &FiltrationSheaf,
    p: &HPolytope,
    opts: &StabilityOptions,
) -> Result<StabilityVerdict, StabilityError> {
    check_stability_with(s, &Polarization::from_polytope(p), opts)
}

pub fn check_stability_with(
    s: &FiltrationSheaf,
    pol: &Polarization,
    opts: &StabilityOptions,
) -> Result<StabilityVerdict, StabilityError> {
    check_facets(s, pol)?;
    let r = s.rank();
    let mu = pol.slope(&s.det_indices(), r);
    let mut verdict = StabilityVerdict {
        status: StabilityStatus::Stable,
        certainty: Certainty::Certified,
        slope: mu.clone(),
        witness: None,
        slope_table: Vec::new(),
        seed: opts.seed,
        cap_hit: false,
        random_samples: 0,
        field: "Q",
    };
    if r == 1 {
        return Ok(verdict);
    }

    let (cands, closure_hit) = candidate_subspaces(s, opts.cap);
    let mut table: Vec<SlopeEntry> = par::map(opts.execution, &cands, |w| SlopeEntry {
        subspace: w.clone(),
        slope: subsheaf_slope(s, w, pol),
        source: CandidateSource::Closure,
    });
    let mut hit = closure_hit;
    if let Some((v, l, h)) = max_line_slope(s, pol, opts.cap) {
        hit |= h;
        table.push(SlopeEntry { subspace: l, slope: v, source: CandidateSource::LineProfile });
    }
    if let Some((v, hp, h)) = max_hyperplane_slope(s, pol, opts.cap) {
        hit |= h;
        table.push(SlopeEntry { subspace: hp, slope: v, source: CandidateSource::HyperplaneProfile });
    }

    // lines and hyperplanes exhaust the proper subspaces when r ≤ 3
    let jump_dims_extreme =
        s.jump_subspaces().iter().filter(|v| !v.is_full()).all(|v| v.dim() == 1 || v.dim() == r - 1);
    let complete = !hit && (r <= 3 || jump_dims_extreme);
    if !complete {
        let randoms = random_subspaces(r, opts.samples, opts.seed, opts.execution);
        verdict.random_samples = randoms.len();
        table.extend(par::map(opts.execution, &randoms, |w| SlopeEntry {
            subspace: w.clone(),
            slope: subsheaf_slope(s, w, pol),
            source: CandidateSource::Random,
        }));
        verdict.certainty = Certainty::Heuristic;
    }
    verdict.cap_hit = hit;

    let mut best: Option<&SlopeEntry> = None;
    for e in &table {
        if best.map(|b| pol.compare(&e.slope, &b.slope) == Ordering::Greater).unwrap_or(true) {
            best = Some(e);
        }
    }
    if let Some(b) = best {
        match pol.compare(&b.slope, &mu) {
            Ordering::Greater => {
                verdict.status = StabilityStatus::Unstable;
                // an explicit destabilizer settles the question regardless of search completeness
                verdict.certainty = Certainty::Certified;
                verdict.witness = Some(b.clone());
            }
            Ordering::Equal => {
                verdict.status = StabilityStatus::Semistable;
                verdict.witness = Some(b.clone());
            }
            Ordering::Less => {}
        }
    }
    verdict.slope_table = table;
    Ok(verdict)
}

/// Exact comparison helper for tests and reports: `μ(S) - μ(S_W)`.
pub fn slope_gap(s: &FiltrationSheaf, w: &Subspace, p: &HPolytope) -> Result<Rat, StabilityError> {
    let pol = Polarization::from_polytope(p);
    check_facets(s, &pol)?;
    let a = pol.slope(&s.det_indices(), s.rank());
    let b = subsheaf_slope(s, w, &pol);
    match (a, b) {
        (SlopeValue::Exact(x), SlopeValue::Exact(y)) => Ok(x - y),
        _ => unreachable!("exact polarization"),
    }
}
