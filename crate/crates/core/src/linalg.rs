//! Gaussian elimination over GF(2^ℓ) for the interpolation steps of the
//! Reed-Solomon decoders and rank checks of inner generator matrices.

use crate::field::Gf2m;

/// Dense row-major matrix of raw field values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u16>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u16>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u16 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u16) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u16] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Reduces in place to reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self, field: &Gf2m) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for k in 0..self.cols {
                    self.data.swap(p * self.cols + k, r * self.cols + k);
                }
            }
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for k in c..self.cols {
                let v = field.mul(self.get(r, k), inv);
                self.set(r, k, v);
            }
            for i in 0..self.rows {
                let factor = self.get(i, c);
                if i != r && factor != 0 {
                    for k in c..self.cols {
                        let v = self.get(i, k) ^ field.mul(factor, self.get(r, k));
                        self.set(i, k, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &Gf2m) -> usize {
        self.clone().rref(field).len()
    }

    /// A nonzero vector `v` with `self · v = 0`, if the kernel is nontrivial.
    /// The free variable chosen is the first non-pivot column, set to 1.
    pub fn kernel_vector(&self, field: &Gf2m) -> Option<Vec<u16>> {
        let mut m = self.clone();
        let pivots = m.rref(field);
        let free = (0..m.cols).find(|c| !pivots.contains(c))?;
        let mut v = vec![0u16; m.cols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = m.get(r, free);
        }
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        let f = Gf2m::with_degree(4).unwrap();
        let a = Matrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]]);
        // Second row is x times the first.
        assert_eq!(a.rank(&f), 1);
        let v = a.kernel_vector(&f).unwrap();
        assert!(v.iter().any(|&x| x != 0));
        for r in 0..a.rows {
            let dot = a.row(r).iter().zip(&v).fold(0, |acc, (&x, &y)| acc ^ f.mul(x, y));
            assert_eq!(dot, 0);
        }
        let id = Matrix::from_rows(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(id.kernel_vector(&f), None);
        assert_eq!(id.rank(&f), 2);
    }
}
