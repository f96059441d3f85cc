//! Integer lattices: Hermite and Smith normal forms, saturation, quotient
//! lattices and primitive vectors.
//!
//! `N` and `M = Hom(N, ℤ)` are both modelled as `ℤ^n` with the standard
//! pairing. Sublattices are stored by a row-style Hermite normal form of
//! their generators, so two sublattices are equal iff their stored bases are.

use crate::linalg::{gcd_vec, inverse_unimodular, transpose, Int};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("sublattice is not saturated (index {index} in its saturation)")]
    NotSaturated { index: Int },
}

impl LatticeError {
    pub fn kind(&self) -> &'static str {
        match self {
            LatticeError::DimensionMismatch { .. } => "DimensionMismatch",
            LatticeError::ZeroVector => "ZeroVector",
            LatticeError::NotSaturated { .. } => "NotSaturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub rank: usize,
}

impl Lattice {
    pub fn new(rank: usize) -> Self {
        Lattice { rank }
    }

    pub fn check(&self, v: &[Int]) -> Result<(), LatticeError> {
        if v.len() != self.rank {
            return Err(LatticeError::DimensionMismatch { expected: self.rank, found: v.len() });
        }
        Ok(())
    }
}

/// Row-style Hermite normal form with transform.
///
/// Returns `(H, U)` with `U · A = H`, `U` unimodular, `H` in row echelon
/// form with positive pivots and entries above each pivot reduced into
/// `[0, pivot)`. Zero rows are kept at the bottom of `H`.
pub fn hermite_with_transform(a: &[Vec<Int>], ncols: usize) -> (Vec<Vec<Int>>, Vec<Vec<Int>>) {
    let m = a.len();
    let mut h: Vec<Vec<Int>> = a.to_vec();
    let mut u: Vec<Vec<Int>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()).collect();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        loop {
            // bring the smallest nonzero entry of this column (rows >= r) to row r
            let pick = (r..m).filter(|&i| !h[i][c].is_zero()).min_by(|&i, &j| h[i][c].abs().cmp(&h[j][c].abs()));
            let Some(p) = pick else { break };
            h.swap(r, p);
            u.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if h[i][c].is_zero() {
                    continue;
                }
                let q = h[i][c].div_floor(&h[r][c]);
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
                if !h[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            for x in h[r].iter_mut() {
                *x = -&*x;
            }
            for x in u[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            if !q.is_zero() {
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
            }
        }
        r += 1;
    }
    (h, u)
}

fn row_sub(a: &mut [Vec<Int>], target: usize, src: usize, q: &Int) {
    let src_row = a[src].clone();
    for (x, s) in a[target].iter_mut().zip(&src_row) {
        *x = &*x - q * s;
    }
}

/// Nonzero rows of the Hermite normal form.
pub fn hermite(a: &[Vec<Int>], ncols: usize) -> Vec<Vec<Int>> {
    let (h, _) = hermite_with_transform(a, ncols);
    h.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect()
}

/// Column transform `W` (unimodular, `n × n`) with `A · W = [L | 0]`,
/// together with `rank(A)`.
pub fn column_transform(a: &[Vec<Int>], ncols: usize) -> (Vec<Vec<Int>>, usize) {
    let at = transpose(a, ncols);
    let (h, u) = hermite_with_transform(&at, a.len());
    let rank = h.iter().filter(|r| r.iter().any(|x| !x.is_zero())).count();
    (transpose(&u, ncols), rank)
}

/// ℤ-basis of `{x ∈ ℤ^n : A x = 0}`.
pub fn integer_kernel(a: &[Vec<Int>], ncols: usize) -> Vec<Vec<Int>> {
    let (w, rank) = column_transform(a, ncols);
    (rank..ncols).map(|j| w.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Invariant factors (nonzero Smith diagonal entries) of an integer matrix.
pub fn smith_diagonal(a: &[Vec<Int>], ncols: usize) -> Vec<Int> {
    let mut m: Vec<Vec<Int>> = a.to_vec();
    let mut cols = ncols;
    // alternate row and column Hermite reduction until diagonal
    for _ in 0..64 {
        m = hermite(&m, cols);
        let rows = m.len();
        if is_diagonal(&m) {
            break;
        }
        m = hermite(&transpose(&m, cols), rows);
        cols = rows;
        if is_diagonal(&m) {
            break;
        }
    }
    let mut d: Vec<Int> =
        m.iter().enumerate().filter_map(|(i, r)| r.get(i).filter(|x| !x.is_zero()).map(|x| x.abs())).collect();
    // enforce divisibility d_i | d_{i+1}
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

fn is_diagonal(m: &[Vec<Int>]) -> bool {
    m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| i == j || x.is_zero()))
}

/// Splits `v = content · primitive` with `content ≥ 1`.
pub fn primitive_content(v: &[Int]) -> Result<(Vec<Int>, Int), LatticeError> {
    let g = gcd_vec(v);
    if g.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    Ok((v.iter().map(|x| x / &g).collect(), g))
}

pub fn is_primitive(v: &[Int]) -> bool {
    gcd_vec(v).is_one()
}

/// A sublattice of `ℤ^ambient`, stored by its Hermite basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sublattice {
    ambient: usize,
    basis: Vec<Vec<Int>>,
}

impl Sublattice {
    pub fn new(ambient: usize, generators: &[Vec<Int>]) -> Result<Self, LatticeError> {
        let lattice = Lattice::new(ambient);
        for g in generators {
            lattice.check(g)?;
            if g.iter().all(|x| x.is_zero()) {
                return Err(LatticeError::ZeroVector);
            }
        }
        Ok(Sublattice { ambient, basis: hermite(generators, ambient) })
    }

    pub fn zero(ambient: usize) -> Self {
        Sublattice { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let id: Vec<Vec<Int>> = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect();
        Sublattice { ambient, basis: id }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Int>] {
        &self.basis
    }

    /// `ℝ-span(S) ∩ ℤ^n`.
    pub fn saturate(&self) -> Sublattice {
        if self.basis.is_empty() {
            return self.clone();
        }
        let (w, rank) = column_transform(&self.basis, self.ambient);
        let winv = inverse_unimodular(&w);
        Sublattice { ambient: self.ambient, basis: hermite(&winv[..rank], self.ambient) }
    }

    pub fn is_saturated(&self) -> bool {
        self.saturate() == *self
    }

    /// `[saturate(S) : S]`, the product of the invariant factors of the basis.
    pub fn saturation_index(&self) -> Int {
        smith_diagonal(&self.basis, self.ambient).iter().product()
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        hermite(&rows, self.ambient) == self.basis
    }
}

/// `N / N₀` for a saturated `N₀`, with an explicit projection and section.
///
/// `projection` has one row per quotient coordinate: `π(x)_j = <w_j, x>`,
/// where the `w_j` form a ℤ-basis of `N₀^⊥ ⊂ M`. `section` has one row per
/// quotient coordinate as well, holding the lift `s(e_j) ∈ N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientLattice {
    ambient: Lattice,
    kernel: Sublattice,
    projection: Vec<Vec<Int>>,
    section: Vec<Vec<Int>>,
}

impl QuotientLattice {
    pub fn new(ambient: Lattice, kernel: &Sublattice) -> Result<Self, LatticeError> {
        if kernel.ambient() != ambient.rank {
            return Err(LatticeError::DimensionMismatch { expected: ambient.rank, found: kernel.ambient() });
        }
        if !kernel.is_saturated() {
            return Err(LatticeError::NotSaturated { index: kernel.saturation_index() });
        }
        let n = ambient.rank;
        let g = kernel.rank();
        let (w, rank) = if g == 0 {
            let id: Vec<Vec<Int>> =
                (0..n).map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()).collect();
            (id, 0)
        } else {
            column_transform(kernel.basis(), n)
        };
        debug_assert_eq!(rank, g);
        let winv = inverse_unimodular(&w);
        let projection = (g..n).map(|j| w.iter().map(|row| row[j].clone()).collect()).collect();
        let section = winv[g..].to_vec();
        Ok(QuotientLattice { ambient, kernel: kernel.clone(), projection, section })
    }

    pub fn ambient(&self) -> Lattice {
        self.ambient
    }

    pub fn kernel(&self) -> &Sublattice {
        &self.kernel
    }

    pub fn rank(&self) -> usize {
        self.projection.len()
    }

    /// Rows `w_j`: a ℤ-basis of `N₀^⊥` in `M`.
    pub fn projection_matrix(&self) -> &[Vec<Int>] {
        &self.projection
    }

    pub fn section_matrix(&self) -> &[Vec<Int>] {
        &self.section
    }

    pub fn project(&self, v: &[Int]) -> Vec<Int> {
        self.projection.iter().map(|w| crate::linalg::dot_int(w, v)).collect()
    }

    pub fn lift(&self, y: &[Int]) -> Vec<Int> {
        let n = self.ambient.rank;
        let mut out = vec![Int::zero(); n];
        for (coef, row) in y.iter().zip(&self.section) {
            for (o, s) in out.iter_mut().zip(row) {
                *o += coef * s;
            }
        }
        out
    }
}

pub fn saturate(s: &Sublattice) -> Sublattice {
    s.saturate()
}

pub fn quotient(n: Lattice, n0: &Sublattice) -> Result<QuotientLattice, LatticeError> {
    QuotientLattice::new(n, n0)
}
