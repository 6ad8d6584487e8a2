//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::rational::Rational;

/// Sparse row as `(column, value)` pairs sorted by column with no zeros.
pub type SparseRow = Vec<(usize, Rational)>;

/// Incrementally built row-echelon basis of a row space.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    /// Leading column -> row normalized so the leading entry is one.
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Echelon {
        Echelon { ncols, pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Reduces `row` against the basis; returns the leftover (empty when dependent).
    pub fn reduce(&self, row: &SparseRow) -> SparseRow {
        let mut cur: BTreeMap<usize, Rational> = row.iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
        let mut cursor = 0;
        while let Some((&col, _)) = cur.range(cursor..).next() {
            match self.pivots.get(&col) {
                Some(prow) => {
                    let factor = cur.remove(&col).expect("present");
                    for (c, v) in prow.iter().skip(1) {
                        let e = cur.entry(*c).or_insert_with(Rational::zero);
                        *e -= &factor * v;
                        if e.is_zero() {
                            cur.remove(c);
                        }
                    }
                    cursor = col + 1;
                }
                None => cursor = col + 1,
            }
        }
        cur.into_iter().collect()
    }

    /// Adds a row; returns true when the rank grew.
    pub fn insert(&mut self, row: &SparseRow) -> bool {
        let reduced = self.reduce(row);
        let Some((lead, lc)) = reduced.first().cloned() else {
            return false;
        };
        debug_assert!(lead < self.ncols);
        let inv = Rational::one() / lc;
        let normalized: SparseRow = reduced.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        self.pivots.insert(lead, normalized);
        true
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivots.contains_key(c)).collect();
        free.iter().map(|&f| self.solve_with_free(f)).collect()
    }

    fn solve_with_free(&self, free_col: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.ncols];
        v[free_col] = Rational::one();
        for (&p, row) in self.pivots.iter().rev() {
            let mut s = Rational::zero();
            for (c, val) in row.iter().skip(1) {
                if !v[*c].is_zero() {
                    s += val * &v[*c];
                }
            }
            v[p] = -s;
        }
        v
    }

    /// True when `v` is orthogonal to every stored row, i.e. `A v = 0`.
    pub fn annihilates(&self, v: &[Rational]) -> bool {
        self.pivots.values().all(|row| dot(row, v).is_zero())
    }
}

pub fn dot(row: &SparseRow, v: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (c, val) in row {
        if !v[*c].is_zero() {
            s += val * &v[*c];
        }
    }
    s
}
