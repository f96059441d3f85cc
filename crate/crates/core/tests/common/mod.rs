#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toricgit::build::{product, segment};
use toricgit::linalg::{int_vec, rank, rat, Int, Rat};
use toricgit::{FiltrationSheaf, GitSetup, HPolytope, Sublattice, Subspace, UnstableIndexVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn poly(dim: usize, normals: &[&[i64]], supports: &[i64]) -> HPolytope {
    let n: Vec<Vec<Int>> = normals.iter().map(|u| int_vec(u)).collect();
    let a: Vec<Rat> = supports.iter().map(|&x| rat(x, 1)).collect();
    HPolytope::from_parts(dim, &n, &a).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, r: usize) -> Vec<Rat> {
    (0..r).map(|_| rat(rng.gen_range(-3..=3), 1)).collect()
}

/// `r` linearly independent rows, drawing some from `pool` to create coincidences.
pub fn random_frame(rng: &mut ChaCha8Rng, r: usize, pool: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    loop {
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(r);
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(rng);
        for i in order {
            if rows.len() < r && rng.gen_bool(0.6) {
                rows.push(pool[i].clone());
            }
        }
        while rows.len() < r {
            rows.push(random_vector(rng, r));
        }
        if rank(&rows, r) == r {
            return rows;
        }
    }
}

pub fn random_pool(rng: &mut ChaCha8Rng, r: usize) -> Vec<Vec<Rat>> {
    (0..r + 1).map(|_| random_vector(rng, r)).filter(|v| v.iter().any(|x| *x != rat(0, 1))).collect()
}

/// Jump list of a random filtration with indices in `lo..=hi`.
pub fn random_jumps(rng: &mut ChaCha8Rng, r: usize, lo: i64, hi: i64, pool: &[Vec<Rat>]) -> Vec<(i64, Subspace)> {
    let m = rng.gen_range(1..=r.min((hi - lo + 1) as usize));
    let mut dims: Vec<usize> = (1..r).collect();
    dims.shuffle(rng);
    let mut dims: Vec<usize> = dims.into_iter().take(m - 1).collect();
    dims.sort_unstable();
    dims.push(r);
    let mut idx: Vec<i64> = (lo..=hi).collect();
    idx.shuffle(rng);
    let mut idx: Vec<i64> = idx.into_iter().take(m).collect();
    idx.sort_unstable();
    let frame = random_frame(rng, r, pool);
    idx.into_iter().zip(dims).map(|(i, d)| (i, Subspace::span(r, &frame[..d]).unwrap())).collect()
}

pub fn random_sheaf(rng: &mut ChaCha8Rng, r: usize, facets: usize, lo: i64, hi: i64) -> FiltrationSheaf {
    let pool = random_pool(rng, r);
    let jumps = (0..facets).map(|_| random_jumps(rng, r, lo, hi, &pool)).collect();
    FiltrationSheaf::from_jumps(r, jumps).unwrap()
}

/// Random sheaf whose jumps on facet `F` are multiples of `moduli[F]` with
/// probability `p_multiple`.
pub fn random_sheaf_mod(rng: &mut ChaCha8Rng, r: usize, moduli: &[i64], p_multiple: f64) -> FiltrationSheaf {
    let pool = random_pool(rng, r);
    let jumps = moduli
        .iter()
        .map(|&b| {
            let raw = random_jumps(rng, r, -3, 3, &pool);
            if rng.gen_bool(p_multiple) {
                raw.into_iter().map(|(i, v)| (i * b, v)).collect()
            } else {
                raw
            }
        })
        .collect();
    FiltrationSheaf::from_jumps(r, jumps).unwrap()
}

pub fn random_index(rng: &mut ChaCha8Rng, setup: &GitSetup) -> UnstableIndexVector {
    setup.unstable_facets().iter().map(|&f| (f, rng.gen_range(-3..=3))).collect()
}

fn base_polytopes() -> Vec<HPolytope> {
    vec![
        poly(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1]),
        poly(2, &[&[1, 0], &[0, 1], &[-1, -1], &[0, -1]], &[1, 1, 2, 2]),
        poly(2, &[&[2, 1], &[-1, 0], &[0, 1], &[0, -1]], &[3, 3, 3, 3]),
        poly(2, &[&[1, 0], &[0, 1], &[-1, 2], &[0, -1]], &[1, 1, 4, 2]),
        poly(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[1, 2, 1, 2]),
        poly(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]], &[1, 1, 1, 2]),
        product(&poly(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1]), &segment(rat(-1, 1), rat(2, 1)).unwrap())
            .unwrap(),
    ]
}

fn random_primitive(rng: &mut ChaCha8Rng, n: usize) -> Vec<Int> {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
        if g == 1 {
            return int_vec(&v);
        }
    }
}

/// A random member of the polytope family, dilated and translated.
pub fn random_polytope(rng: &mut ChaCha8Rng) -> HPolytope {
    let bases = base_polytopes();
    let base = bases.choose(rng).unwrap();
    let k = rng.gen_range(1..=3);
    let t: Vec<Rat> = (0..base.dim()).map(|_| rat(rng.gen_range(-2..=2), 1)).collect();
    base.dilate(&rat(k, 1)).translate(&t)
}

/// A random generic setup from a small family of polytopes, dilated,
/// translated and quotiented by a random rank-1 sublattice.
pub fn random_generic_setup(rng: &mut ChaCha8Rng) -> GitSetup {
    let bases = base_polytopes();
    loop {
        let base = bases.choose(rng).unwrap();
        let n = base.dim();
        let k = rng.gen_range(1..=2);
        let t: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-1..=1), 1)).collect();
        let p = base.dilate(&rat(k, 1)).translate(&t);
        let n0 = Sublattice::new(n, &[random_primitive(rng, n)]).unwrap();
        let Ok(setup) = GitSetup::new(p, n0) else { continue };
        if setup.is_generic() {
            return setup;
        }
    }
}
