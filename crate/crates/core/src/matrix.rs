//! Dense square matrix of pairwise distances.

/// Row-major dense `n x n` matrix of `f64`.
///
/// Used for focal distance matrices and their metric closures. Symmetry is a
/// property of how the pipeline fills it, not an enforced invariant of the
/// container.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    /// All-zero matrix of side `n`.
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from row-major data; `data.len()` must equal `n * n`.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must be n*n");
        SquareMatrix { n, data }
    }

    /// Symmetric matrix from explicit `(i, j, d)` entries, zero elsewhere.
    pub fn from_pairs(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for &(i, j, d) in entries {
            assert_ne!(i, j, "diagonal stays zero");
            m.set(i, j, d);
            m.set(j, i, d);
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Upper-triangle entries `(i, j, d)` with `i < j`.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    /// Total length of the path `order[0] -> order[1] -> ..` under this matrix.
    pub fn path_length(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.get(w[0], w[1])).sum()
    }

    /// Max over `|m[i][j] - m[j][i]|`; zero for a symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, d) in self.upper_triangle() {
            worst = worst.max((d - self.get(j, i)).abs());
        }
        worst
    }
}
