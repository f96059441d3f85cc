//! The Minkowski condition for GIT setups, a numerical Minkowski solver, the
//! quotient class `α`, the slope identity, the converse falsifier and the
//! compatible-subgroup search.
//!
//! The solver maximizes `ln vol(P(a))` on the slice `Σ f_F a_F = K`. The
//! gradient of `vol` in `a` is the vector of facet lattice volumes, so at the
//! maximizer the facet volumes are proportional to the targets `f`. Each
//! iterate is rounded to dyadic rationals and evaluated exactly by the
//! polytope module; steps use Barzilai–Borwein lengths with a backtracking
//! safeguard. The result is rescaled to match the targets and translated so
//! that its vertex barycenter sits at the origin.

use crate::git::{GitError, GitSetup, UnstableIndexVector};
use crate::klyachko::FiltrationSheaf;
use crate::lattice::{primitive_content, Sublattice};
use crate::linalg::{rank_int, rat_from_int, rational_from_f64, to_f64, Int, Rat};
use crate::par::{self, Execution};
use crate::polytope::{combinations, system_vertices, system_volume_and_latvols, Facet, HPolytope, PolytopeError};
use crate::stability::{slope, Polarization};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

const DYADIC_BITS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinkowskiError {
    #[error("weighted normals do not sum to zero")]
    InfeasibleTargets { defect: Vec<Rat> },
    #[error("target {index} is not positive")]
    NonPositiveTarget { index: usize },
    #[error("normals do not span the space")]
    NormalsDoNotSpan,
    #[error("{normals} normals but {targets} targets")]
    LengthMismatch { normals: usize, targets: usize },
    #[error("normal {index} is not primitive of the right length, or repeats another")]
    BadNormal { index: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("the Minkowski condition fails for this setup")]
    MinkowskiFails,
    #[error("the quotient is a curve; facet volumes carry no information")]
    CurveQuotient,
    #[error("the quotient has dimension {dim}, not 1")]
    NotCurveQuotient { dim: usize },
    #[error(transparent)]
    Git(#[from] GitError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

impl MinkowskiError {
    pub fn kind(&self) -> &'static str {
        match self {
            MinkowskiError::InfeasibleTargets { .. } => "InfeasibleTargets",
            MinkowskiError::NonPositiveTarget { .. } => "NonPositiveTarget",
            MinkowskiError::NormalsDoNotSpan => "NormalsDoNotSpan",
            MinkowskiError::LengthMismatch { .. } => "LengthMismatch",
            MinkowskiError::BadNormal { .. } => "BadNormal",
            MinkowskiError::NoConvergence { .. } => "NoConvergence",
            MinkowskiError::MinkowskiFails => "MinkowskiFails",
            MinkowskiError::CurveQuotient => "CurveQuotient",
            MinkowskiError::NotCurveQuotient { .. } => "NotCurveQuotient",
            MinkowskiError::Git(e) => e.kind(),
            MinkowskiError::Polytope(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinkowskiReport {
    pub defect: Vec<Rat>,
    pub holds: bool,
}

/// `Σ_{F stable} deg_L(D_F)·π(u_F)`.
pub fn minkowski_condition(setup: &GitSetup) -> Result<MinkowskiReport, MinkowskiError> {
    if !setup.is_generic() {
        return Err(GitError::NotGeneric.into());
    }
    let p = setup.polytope();
    let mut defect = vec![Rat::zero(); setup.quotient_dim()];
    for &f in setup.stable_facets() {
        let vol = p.facet_latvol(f).expect("facet index in range");
        for (d, x) in defect.iter_mut().zip(&setup.projected_normals()[f]) {
            *d += &vol * rat_from_int(x);
        }
    }
    let holds = defect.iter().all(Zero::is_zero);
    Ok(MinkowskiReport { defect, holds })
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// 0 starts from `a = 1`; other values perturb the start with `seed`.
    pub restart: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-6, max_iter: 10_000, seed: 7, restart: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MinkowskiSolution {
    pub supports: Vec<f64>,
    pub exact_supports: Vec<Rat>,
    pub facet_volumes: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub polytope: HPolytope,
}

struct Evaluation {
    vol: Rat,
    latvols: Vec<Rat>,
}

struct Problem<'a> {
    dim: usize,
    normals: &'a [Vec<Int>],
    targets: Vec<f64>,
}

impl Problem<'_> {
    fn rounded(&self, a: &[f64]) -> Vec<Rat> {
        a.iter().map(|&x| rational_from_f64(x, DYADIC_BITS)).collect()
    }

    fn eval(&self, a: &[f64]) -> Evaluation {
        let (vol, latvols) = system_volume_and_latvols(self.dim, self.normals, &self.rounded(a));
        Evaluation { vol, latvols }
    }

    fn proportionality_gap(&self, lat: &[f64]) -> (f64, f64) {
        let lambda = dot(lat, &self.targets) / dot(&self.targets, &self.targets);
        let gap = lat.iter().zip(&self.targets).map(|(l, f)| (l / (lambda * f) - 1.0).abs()).fold(0.0, f64::max);
        (gap, lambda)
    }

    fn project(&self, g: &[f64]) -> Vec<f64> {
        let c = dot(g, &self.targets) / dot(&self.targets, &self.targets);
        g.iter().zip(&self.targets).map(|(x, f)| x - c * f).collect()
    }

    /// Rescales to the targets and recenters at the vertex barycenter.
    fn finalize(&self, a: &[f64], lambda: f64) -> Vec<f64> {
        let t = (1.0 / lambda).powf(1.0 / (self.dim as f64 - 1.0));
        let scaled: Vec<f64> = a.iter().map(|x| x * t).collect();
        let verts = system_vertices(self.dim, self.normals, &self.rounded(&scaled));
        if verts.is_empty() {
            return scaled;
        }
        let mut c = vec![0.0; self.dim];
        for (v, _) in &verts {
            for (ci, x) in c.iter_mut().zip(v) {
                *ci += to_f64(x) / verts.len() as f64;
            }
        }
        scaled
            .iter()
            .zip(self.normals)
            .map(|(x, u)| x + u.iter().zip(&c).map(|(ui, ci)| ui.to_f64().unwrap_or(0.0) * ci).sum::<f64>())
            .collect()
    }

    fn residual(&self, lat: &[Rat]) -> f64 {
        lat.iter().zip(&self.targets).map(|(l, f)| (to_f64(l) - f).abs() / f).fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn validate(normals: &[Vec<Int>], targets: &[Rat], dim: usize) -> Result<(), MinkowskiError> {
    if normals.len() != targets.len() {
        return Err(MinkowskiError::LengthMismatch { normals: normals.len(), targets: targets.len() });
    }
    for (i, u) in normals.iter().enumerate() {
        if u.len() != dim || !crate::lattice::is_primitive(u) || normals[..i].contains(u) {
            return Err(MinkowskiError::BadNormal { index: i });
        }
    }
    if let Some(index) = targets.iter().position(|t| !t.is_positive()) {
        return Err(MinkowskiError::NonPositiveTarget { index });
    }
    if rank_int(normals, dim) < dim {
        return Err(MinkowskiError::NormalsDoNotSpan);
    }
    let mut defect = vec![Rat::zero(); dim];
    for (u, f) in normals.iter().zip(targets) {
        for (d, x) in defect.iter_mut().zip(u) {
            *d += f * rat_from_int(x);
        }
    }
    if defect.iter().any(|d| !d.is_zero()) {
        return Err(MinkowskiError::InfeasibleTargets { defect });
    }
    Ok(())
}

/// Finds supports `a` with `latvol(F) = targets[F]` within `tol` (relative).
pub fn solve_minkowski(
    dim: usize,
    normals: &[Vec<Int>],
    targets: &[Rat],
    opts: &SolverOptions,
) -> Result<MinkowskiSolution, MinkowskiError> {
    validate(normals, targets, dim)?;
    if dim == 1 {
        if targets.iter().all(One::is_one) {
            let half = Rat::new(Int::one(), Int::from(2));
            let exact = vec![half.clone(), half];
            let polytope = HPolytope::from_parts(1, normals, &exact)?;
            return Ok(MinkowskiSolution {
                supports: vec![0.5, 0.5],
                exact_supports: exact,
                facet_volumes: vec![1.0, 1.0],
                residual: 0.0,
                iterations: 0,
                polytope,
            });
        }
        return Err(MinkowskiError::CurveQuotient);
    }
    let problem = Problem { dim, normals, targets: targets.iter().map(to_f64).collect() };
    let f = &problem.targets;

    let mut a: Vec<f64> = vec![1.0; normals.len()];
    if opts.restart > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(opts.restart));
        for x in a.iter_mut() {
            *x += rng.gen_range(-0.25..0.25);
        }
    }
    let k = f.iter().sum::<f64>();
    let shift = (k - dot(f, &a)) / dot(f, f);
    for (x, fi) in a.iter_mut().zip(f) {
        *x += shift * fi;
    }

    let mut cur = problem.eval(&a);
    if !cur.vol.is_positive() {
        return Err(MinkowskiError::NoConvergence { iterations: 0, residual: f64::INFINITY });
    }
    let grad = |e: &Evaluation| -> Vec<f64> {
        let v = to_f64(&e.vol);
        problem.project(&e.latvols.iter().map(|l| to_f64(l) / v).collect::<Vec<_>>())
    };
    let mut g = grad(&cur);
    let mut step = 0.1 / dot(&g, &g).sqrt().max(1e-300);
    let inner_tol = opts.tol * 0.25;
    let mut last_residual = f64::INFINITY;

    for iter in 0..opts.max_iter {
        let lat: Vec<f64> = cur.latvols.iter().map(to_f64).collect();
        let (gap, lambda) = problem.proportionality_gap(&lat);
        if gap <= inner_tol {
            let out = problem.finalize(&a, lambda);
            let exact = problem.rounded(&out);
            let (_, lv) = system_volume_and_latvols(dim, normals, &exact);
            last_residual = problem.residual(&lv);
            if last_residual <= opts.tol {
                let facets: Vec<Facet> =
                    normals.iter().zip(&exact).map(|(u, s)| Facet::new(u.clone(), s.clone())).collect();
                let polytope = HPolytope::new(dim, facets)
                    .map_err(|_| MinkowskiError::NoConvergence { iterations: iter, residual: last_residual })?;
                return Ok(MinkowskiSolution {
                    supports: out,
                    exact_supports: exact,
                    facet_volumes: lv.iter().map(to_f64).collect(),
                    residual: last_residual,
                    iterations: iter,
                    polytope,
                });
            }
        }

        // backtracking on ln vol, evaluated as the log of an exact ratio
        let gg = dot(&g, &g);
        let mut s = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = a.iter().zip(&g).map(|(x, d)| x + s * d).collect();
            let e = problem.eval(&trial);
            if e.vol.is_positive() {
                let gain = to_f64(&(&e.vol / &cur.vol)).ln();
                if gain >= 1e-4 * s * gg - 1e-15 {
                    accepted = Some((trial, e));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((next_a, next)) = accepted else {
            return Err(MinkowskiError::NoConvergence { iterations: iter, residual: last_residual.min(gap) });
        };
        let next_g = grad(&next);
        let da: Vec<f64> = next_a.iter().zip(&a).map(|(x, y)| x - y).collect();
        let dg: Vec<f64> = next_g.iter().zip(&g).map(|(x, y)| x - y).collect();
        let curvature = -dot(&da, &dg);
        step = if curvature > 0.0 { dot(&da, &da) / curvature } else { s * 2.0 };
        a = next_a;
        cur = next;
        g = next_g;
    }
    Err(MinkowskiError::NoConvergence { iterations: opts.max_iter, residual: last_residual })
}

/// The quotient class `α` as a numeric polytope over `N_Y`.
#[derive(Debug, Clone)]
pub struct AmpleClassNumeric {
    pub supports: Vec<f64>,
    pub exact_supports: Vec<Rat>,
    pub targets: Vec<Rat>,
    pub facet_volumes: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub polytope: HPolytope,
}

impl AmpleClassNumeric {
    /// Facet degrees of `α` as a floating polarization on `Y`.
    pub fn polarization(&self, tie_tol: f64) -> Polarization {
        Polarization::numeric(self.facet_volumes.clone(), tie_tol)
    }
}

/// Targets `b_F·deg_L(D_F)` on the quotient facets.
pub fn alpha_targets(setup: &GitSetup) -> Result<Vec<Rat>, MinkowskiError> {
    let b = setup.b()?;
    Ok(setup
        .stable_facets()
        .iter()
        .zip(b)
        .map(|(&f, bf)| rat_from_int(bf) * setup.polytope().facet_latvol(f).expect("facet index in range"))
        .collect())
}

pub fn ample_class_alpha(setup: &GitSetup, opts: &SolverOptions) -> Result<AmpleClassNumeric, MinkowskiError> {
    if !minkowski_condition(setup)?.holds {
        return Err(MinkowskiError::MinkowskiFails);
    }
    if setup.quotient_dim() < 2 {
        return Err(MinkowskiError::CurveQuotient);
    }
    let py = setup.quotient_polytope()?;
    let targets = alpha_targets(setup)?;
    let sol = solve_minkowski(py.dim(), &py.normals(), &targets, opts)?;
    Ok(AmpleClassNumeric {
        supports: sol.supports,
        exact_supports: sol.exact_supports,
        targets,
        facet_volumes: sol.facet_volumes,
        residual: sol.residual,
        iterations: sol.iterations,
        polytope: sol.polytope,
    })
}

fn correction(setup: &GitSetup, i: &UnstableIndexVector) -> Rat {
    i.iter()
        .map(|(&f, &at)| Rat::from_integer(at.into()) * setup.polytope().facet_latvol(f).expect("facet index in range"))
        .sum()
}

#[derive(Debug, Clone)]
pub struct SlopeIdentity {
    /// `μ_L(𝔓_𝐢(Ě))`, exact.
    pub lhs: Rat,
    /// `μ_α(Ě)`, floating.
    pub mu_alpha: f64,
    /// `Σ_{F unstable} i_F·deg_L(D_F)`.
    pub correction: Rat,
    pub rhs: f64,
    pub residual: f64,
}

pub fn verify_slope_identity(
    setup: &GitSetup,
    e: &FiltrationSheaf,
    i: &UnstableIndexVector,
    alpha: &AmpleClassNumeric,
) -> Result<SlopeIdentity, MinkowskiError> {
    let x_sheaf = setup.pullback_functor(i, e)?;
    let lhs = slope(&x_sheaf, setup.polytope()).map_err(|_| GitError::NotGeneric)?;
    let mu_alpha = alpha.polarization(0.0).slope(&e.det_indices(), e.rank()).to_f64();
    let correction = correction(setup, i);
    let rhs = mu_alpha - to_f64(&correction);
    Ok(SlopeIdentity { residual: (to_f64(&lhs) - rhs).abs(), lhs, mu_alpha, correction, rhs })
}

/// Curve quotients: `μ_L(𝔓_𝐢(Ě)) + Σ i_F deg_L(D_F)` against `c·μ_deg(Ě)`.
#[derive(Debug, Clone)]
pub struct CurveProportionality {
    pub corrected_lhs: Rat,
    pub mu_deg: Rat,
    /// `b_F·deg_L(D_F)` per stable facet.
    pub constants: Vec<Rat>,
    pub constant: bool,
    pub holds: bool,
}

pub fn curve_proportionality(
    setup: &GitSetup,
    e: &FiltrationSheaf,
    i: &UnstableIndexVector,
) -> Result<CurveProportionality, MinkowskiError> {
    if setup.quotient_dim() != 1 {
        return Err(MinkowskiError::NotCurveQuotient { dim: setup.quotient_dim() });
    }
    let x_sheaf = setup.pullback_functor(i, e)?;
    let lhs = slope(&x_sheaf, setup.polytope()).map_err(|_| GitError::NotGeneric)?;
    let corrected_lhs = lhs + correction(setup, i);
    let r = Rat::from_integer(e.rank().into());
    let mu_deg = -e.det_indices().iter().map(|&d| Rat::from_integer(d.into())).sum::<Rat>() / r;
    let constants = alpha_targets(setup)?;
    let constant = constants.windows(2).all(|w| w[0] == w[1]);
    let holds = constant && corrected_lhs == &constants[0] * &mu_deg;
    Ok(CurveProportionality { corrected_lhs, mu_deg, constants, constant, holds })
}

/// A pair of line bundles on `Y` whose lifts have equal slopes on `X` but
/// whose `Y`-degrees are not proportional to any fixed constant.
#[derive(Debug, Clone)]
pub struct ConverseCounterexample {
    pub facets: (usize, usize),
    pub quotient_facets: (usize, usize),
    pub multiplicities: (i64, i64),
    pub sheaf: FiltrationSheaf,
    pub x_slopes: (Rat, Rat),
    /// `c_F = b_F·deg_L(D_F) / deg_α(D_F̌)` for the reference class `α = P_Y`.
    pub ratios: Vec<Rat>,
    pub y_degrees: (Rat, Rat),
    pub defect: Vec<Rat>,
}

pub fn converse_falsifier(setup: &GitSetup) -> Result<Option<ConverseCounterexample>, MinkowskiError> {
    let report = minkowski_condition(setup)?;
    if report.holds {
        return Ok(None);
    }
    let py = setup.quotient_polytope()?;
    let targets = alpha_targets(setup)?;
    let ratios: Vec<Rat> =
        targets.iter().enumerate().map(|(j, t)| t / py.facet_latvol(j).expect("facet index in range")).collect();
    // some ratio differs from another, else Σ targets·ǔ would vanish
    let lo = (0..ratios.len()).min_by(|&x, &y| ratios[x].cmp(&ratios[y])).expect("stable facets exist");
    let hi = (0..ratios.len()).max_by(|&x, &y| ratios[x].cmp(&ratios[y])).expect("stable facets exist");
    debug_assert!(ratios[lo] != ratios[hi]);
    let denom = targets.iter().fold(Int::one(), |l, t| l.lcm(t.denom()));
    let scale = rat_from_int(&denom);
    let d1 = (&targets[hi] * &scale).to_integer().to_i64().expect("multiplicity fits in i64");
    let d2 = (&targets[lo] * &scale).to_integer().to_i64().expect("multiplicity fits in i64");
    let m = py.facet_count();
    let mut c1 = vec![0i64; m];
    c1[lo] = d1;
    let mut c2 = vec![0i64; m];
    c2[hi] = d2;
    let l1 = FiltrationSheaf::line_bundle(&c1);
    let l2 = FiltrationSheaf::line_bundle(&c2);
    let zero = setup.zero_index();
    let x1 = slope(&setup.pullback_functor(&zero, &l1)?, setup.polytope()).map_err(|_| GitError::NotGeneric)?;
    let x2 = slope(&setup.pullback_functor(&zero, &l2)?, setup.polytope()).map_err(|_| GitError::NotGeneric)?;
    let y1 = Rat::from_integer(d1.into()) * py.facet_latvol(lo).expect("facet index in range");
    let y2 = Rat::from_integer(d2.into()) * py.facet_latvol(hi).expect("facet index in range");
    let stable = setup.stable_facets();
    Ok(Some(ConverseCounterexample {
        facets: (stable[lo], stable[hi]),
        quotient_facets: (lo, hi),
        multiplicities: (d1, d2),
        sheaf: l1.direct_sum(&l2).expect("same facets"),
        x_slopes: (x1, x2),
        ratios,
        y_degrees: (y1, y2),
        defect: report.defect,
    }))
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub k_max: i64,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { k_max: 6, execution: Execution::default() }
    }
}

#[derive(Debug, Clone)]
pub struct CompatibleSubgroup {
    pub generator: Vec<Int>,
    pub subset: Vec<usize>,
    pub dilation: i64,
    pub translation: Vec<Int>,
    pub from_vertex: bool,
    pub weighted_projective: bool,
    pub setup: GitSetup,
}

#[derive(Debug, Clone)]
pub struct CompatibleSubgroupReport {
    pub subgroups: Vec<CompatibleSubgroup>,
    pub subsets_examined: usize,
    pub all_u_nonzero: bool,
    /// `Σ_{k=n}^{d-1} C(d,k)` when every `u_𝐃` is nonzero.
    pub upper_bound: Option<u128>,
    pub vertex_subsets: Vec<(Vec<usize>, bool)>,
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn sign_normalized(v: Vec<Int>) -> Vec<Int> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

fn translations(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (-bound..=bound).map(move |x| {
                    let mut t2 = t.clone();
                    t2.push(x);
                    t2
                })
            })
            .collect();
    }
    out.sort_by_key(|t| (t.iter().map(|x| x.abs()).sum::<i64>(), t.clone()));
    out
}

/// `u_𝐃 = Σ_{F ∈ 𝐃} latvol(F)·u_F`.
pub fn weighted_normal(p: &HPolytope, subset: &[usize]) -> Vec<Rat> {
    let mut u = vec![Rat::zero(); p.dim()];
    for &f in subset {
        let vol = p.facet_latvol(f).expect("facet index in range");
        for (x, c) in u.iter_mut().zip(&p.facets()[f].normal) {
            *x += &vol * rat_from_int(c);
        }
    }
    u
}

fn search_linearization(
    p: &HPolytope,
    generator: &[Int],
    subset: &[usize],
    opts: &SearchOptions,
) -> Option<(i64, Vec<Int>, GitSetup)> {
    let n = p.dim();
    let n0 = Sublattice::new(n, &[generator.to_vec()]).ok()?;
    let wanted: Vec<usize> = subset.to_vec();
    for k in 1..=opts.k_max {
        let dilated = p.dilate(&Rat::from_integer(k.into()));
        let ts = translations(n, k * n as i64);
        let found = par::find_map_first(opts.execution, &ts, |t| {
            let shift: Vec<Rat> = t.iter().map(|&x| Rat::from_integer(x.into())).collect();
            let setup = GitSetup::new(dilated.translate(&shift), n0.clone()).ok()?;
            if !setup.is_generic() || setup.stable_facets() != wanted.as_slice() {
                return None;
            }
            if !minkowski_condition(&setup).ok()?.holds {
                return None;
            }
            Some((k, t.iter().map(|&x| Int::from(x)).collect::<Vec<Int>>(), setup))
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

pub fn compatible_subgroups(p: &HPolytope, opts: &SearchOptions) -> CompatibleSubgroupReport {
    let n = p.dim();
    let d = p.facet_count();
    let subsets: Vec<Vec<usize>> = (n..d).flat_map(|size| combinations(d, size)).collect();
    let vertex_sets: BTreeSet<Vec<usize>> =
        p.vertex_facets().iter().filter(|t| t.len() == n).map(|t| t.iter().cloned().collect()).collect();
    let generators: Vec<Option<Vec<Int>>> = par::map(opts.execution, &subsets, |s| {
        let u = weighted_normal(p, s);
        if u.iter().all(Zero::is_zero) {
            return None;
        }
        let ints = crate::linalg::clear_denominators(&u);
        Some(sign_normalized(primitive_content(&ints).expect("nonzero").0))
    });
    let all_u_nonzero = generators.iter().all(Option::is_some);
    let candidates: Vec<(Vec<usize>, Vec<Int>)> =
        subsets.iter().zip(&generators).filter_map(|(s, g)| g.clone().map(|g| (s.clone(), g))).collect();
    let results = par::map(opts.execution, &candidates, |(s, g)| search_linearization(p, g, s, opts));

    let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
    let mut subgroups = Vec::new();
    let mut found_subsets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for ((s, g), r) in candidates.iter().zip(results) {
        let Some((k, t, setup)) = r else { continue };
        found_subsets.insert(s.clone());
        if !seen.insert(g.clone()) {
            continue;
        }
        let weighted_projective = setup.is_weighted_projective_quotient().unwrap_or(false);
        subgroups.push(CompatibleSubgroup {
            generator: g.clone(),
            subset: s.clone(),
            dilation: k,
            translation: t,
            from_vertex: vertex_sets.contains(s),
            weighted_projective,
            setup,
        });
    }
    let upper_bound = all_u_nonzero.then(|| (n..d).map(|k| binomial(d, k)).sum());
    CompatibleSubgroupReport {
        subgroups,
        subsets_examined: subsets.len(),
        all_u_nonzero,
        upper_bound,
        vertex_subsets: vertex_sets
            .into_iter()
            .map(|s| {
                let ok = found_subsets.contains(&s);
                (s, ok)
            })
            .collect(),
    }
}

pub fn is_weighted_projective_quotient(setup: &GitSetup) -> Result<bool, MinkowskiError> {
    Ok(setup.is_weighted_projective_quotient()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, rat};

    fn square_normals() -> Vec<Vec<Int>> {
        vec![int_vec(&[1, 0]), int_vec(&[-1, 0]), int_vec(&[0, 1]), int_vec(&[0, -1])]
    }

    fn setup(normals: &[&[i64]], supports: &[i64], n0: &[i64]) -> GitSetup {
        let n: Vec<Vec<Int>> = normals.iter().map(|u| int_vec(u)).collect();
        let a: Vec<Rat> = supports.iter().map(|&x| rat(x, 1)).collect();
        let p = HPolytope::from_parts(2, &n, &a).unwrap();
        GitSetup::new(p, Sublattice::new(2, &[int_vec(n0)]).unwrap()).unwrap()
    }

    #[test]
    fn condition_examples() {
        let s = setup(&[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1], &[1, 1]);
        assert!(minkowski_condition(&s).unwrap().holds);
        let perturbed = setup(&[&[1, 0], &[0, 1], &[-1, -1], &[0, -1]], &[1, 1, 2, 2], &[1, 1]);
        let r = minkowski_condition(&perturbed).unwrap();
        assert!(!r.holds);
        assert_eq!(r.defect.len(), 1);
        assert_eq!(r.defect[0].abs(), rat(1, 1));
    }

    #[test]
    fn solver_square_and_rectangle() {
        let sol = solve_minkowski(2, &square_normals(), &vec![rat(1, 1); 4], &SolverOptions::default()).unwrap();
        for a in &sol.supports {
            assert!((a - 0.5).abs() < 1e-6);
        }
        let targets = [rat(2, 1), rat(2, 1), rat(1, 1), rat(1, 1)];
        let sol = solve_minkowski(2, &square_normals(), &targets, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-6);
        assert!((sol.supports[0] - 0.5).abs() < 1e-5 && (sol.supports[2] - 1.0).abs() < 1e-5);
        let bad = [rat(2, 1), rat(1, 1), rat(1, 1), rat(1, 1)];
        assert!(matches!(
            solve_minkowski(2, &square_normals(), &bad, &SolverOptions::default()),
            Err(MinkowskiError::InfeasibleTargets { .. })
        ));
    }

    #[test]
    fn solver_restarts_agree() {
        let normals = vec![int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[-1, -1]), int_vec(&[-1, 0])];
        // targets of a valid trapezoid
        let p = HPolytope::from_parts(2, &normals, &[rat(1, 1), rat(1, 1), rat(3, 1), rat(1, 1)]).unwrap();
        let targets = p.facet_latvols();
        let a = solve_minkowski(2, &normals, &targets, &SolverOptions::default()).unwrap();
        let b = solve_minkowski(2, &normals, &targets, &SolverOptions { restart: 3, ..Default::default() }).unwrap();
        for (x, y) in a.supports.iter().zip(&b.supports) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn curve_quotient_for_p2() {
        let s = setup(&[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1], &[1, 1]);
        assert!(matches!(ample_class_alpha(&s, &SolverOptions::default()), Err(MinkowskiError::CurveQuotient)));
        let e = FiltrationSheaf::rank_one(&[1, -2]);
        let mut i = s.zero_index();
        i.insert(2, 3);
        let c = curve_proportionality(&s, &e, &i).unwrap();
        assert!(c.constant && c.holds);
    }

    #[test]
    fn falsifier() {
        let perturbed = setup(&[&[1, 0], &[0, 1], &[-1, -1], &[0, -1]], &[1, 1, 2, 2], &[1, 1]);
        let cx = converse_falsifier(&perturbed).unwrap().unwrap();
        assert_eq!(cx.x_slopes.0, cx.x_slopes.1);
        assert_ne!(cx.ratios[0], cx.ratios[1]);
        assert_ne!(cx.y_degrees.0, cx.y_degrees.1);
        let ok = setup(&[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1], &[1, 1]);
        assert!(converse_falsifier(&ok).unwrap().is_none());
    }

    #[test]
    fn subgroups_of_p2() {
        let p = HPolytope::from_parts(
            2,
            &[int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[-1, -1])],
            &[rat(0, 1), rat(0, 1), rat(1, 1)],
        )
        .unwrap();
        let r = compatible_subgroups(&p, &SearchOptions::default());
        let gens: BTreeSet<Vec<Int>> = r.subgroups.iter().map(|s| s.generator.clone()).collect();
        let expected: BTreeSet<Vec<Int>> = [int_vec(&[1, 1]), int_vec(&[1, 0]), int_vec(&[0, 1])].into_iter().collect();
        assert_eq!(gens, expected);
        assert!(r.subgroups.iter().all(|s| s.weighted_projective && s.from_vertex));
        assert_eq!(r.upper_bound, Some(3));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 0), 1);
    }
}
