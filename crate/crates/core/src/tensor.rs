//! Dense rank-4 tensor used for two-electron integrals and 2-RDMs.

use nalgebra::DMatrix;

/// Dense `n x n x n x n` array, row-major in `(p, q, r, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    #[inline]
    pub fn add(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Writes `v` to all eight real-orbital permutation images of `(pq|rs)`.
    pub fn set_8fold(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            self.set(a, b, c, d, v);
        }
    }

    /// Slice `[idx, idx, idx, idx]` for an ordered index list.
    /// Overwrites every permutation image with the value stored at the
    /// canonical index `p >= q, r >= s, pq >= rs`.
    pub fn close_symmetry(&mut self) {
        let n = self.n;
        for p in 0..n {
            for q in 0..=p {
                for r in 0..=p {
                    let s_max = if r == p { q } else { r };
                    for s in 0..=s_max {
                        let v = self.get(p, q, r, s);
                        self.set_8fold(p, q, r, s, v);
                    }
                }
            }
        }
    }

    pub fn slice(&self, idx: &[usize]) -> Tensor4 {
        let m = idx.len();
        let mut out = Tensor4::zeros(m);
        for (a, &p) in idx.iter().enumerate() {
            for (b, &q) in idx.iter().enumerate() {
                for (c, &r) in idx.iter().enumerate() {
                    for (d, &s) in idx.iter().enumerate() {
                        out.set(a, b, c, d, self.get(p, q, r, s));
                    }
                }
            }
        }
        out
    }

    /// Largest deviation between `(pq|rs)` and its permutation images.
    pub fn max_symmetry_error(&self) -> f64 {
        let n = self.n;
        let mut err = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            err = err.max((v - self.get(a, b, c, d)).abs());
                        }
                    }
                }
            }
        }
        err
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Rank-4 array with independent extents; intermediate of the four-index
/// transformation.
#[derive(Debug, Clone)]
pub(crate) struct Tensor4Rect {
    pub dims: [usize; 4],
    pub data: Vec<f64>,
}

impl Tensor4Rect {
    pub fn from_square(t: Tensor4) -> Self {
        let n = t.n;
        Tensor4Rect {
            dims: [n, n, n, n],
            data: t.data,
        }
    }

    /// `out[b, c, d, p] = sum_a self[a, b, c, d] * m[a, p]`
    pub fn contract_first_and_rotate(&self, m: &DMatrix<f64>) -> Tensor4Rect {
        let [d0, d1, d2, d3] = self.dims;
        assert_eq!(m.nrows(), d0);
        let n_out = m.ncols();
        let inner = d1 * d2 * d3;
        let mut data = vec![0.0; inner * n_out];
        for a in 0..d0 {
            let src = &self.data[a * inner..(a + 1) * inner];
            for p in 0..n_out {
                let cv = m[(a, p)];
                if cv == 0.0 {
                    continue;
                }
                for (k, &v) in src.iter().enumerate() {
                    data[k * n_out + p] += v * cv;
                }
            }
        }
        Tensor4Rect {
            dims: [d1, d2, d3, n_out],
            data,
        }
    }

    pub fn into_square(self) -> Tensor4 {
        let [a, b, c, d] = self.dims;
        assert!(a == b && b == c && c == d);
        Tensor4 {
            n: a,
            data: self.data,
        }
    }
}

/// The eight index permutations that leave real chemist-notation integrals
/// `(pq|rs)` invariant.
pub fn eightfold(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_8fold_fills_all_images() {
        let mut t = Tensor4::zeros(3);
        t.set_8fold(0, 1, 2, 1, 0.75);
        assert_eq!(t.get(1, 0, 1, 2), 0.75);
        assert_eq!(t.get(2, 1, 0, 1), 0.75);
        assert_eq!(t.max_symmetry_error(), 0.0);
    }

    #[test]
    fn slice_picks_subblock() {
        let mut t = Tensor4::zeros(3);
        t.set_8fold(2, 2, 1, 1, 0.3);
        let s = t.slice(&[1, 2]);
        assert_eq!(s.get(1, 1, 0, 0), 0.3);
        assert_eq!(s.get(0, 0, 1, 1), 0.3);
    }
}
