//! Square boolean rasters: flood fill, dilation, distance transforms.

use alloc::vec;
use alloc::vec::Vec;

/// `n × n` boolean raster, row-major (`row` indexes the imaginary axis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    n: usize,
    cells: Vec<bool>,
}

const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

impl Mask {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * n],
        }
    }

    pub fn from_cells(n: usize, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), n * n, "raster size mismatch");
        Self { n, cells }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(n);
        for row in 0..n {
            for col in 0..n {
                m.cells[row * n + col] = f(row, col);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n + col]
    }

    /// Out-of-range cells read as unset.
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        let n = self.n as isize;
        row >= 0 && col >= 0 && row < n && col < n && self.get(row as usize, col as usize)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.n + col] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i / self.n, i % self.n))
    }

    /// 4-connected component containing `(row, col)`; empty if that cell is unset.
    pub fn component(&self, row: usize, col: usize) -> Mask {
        let mut out = Mask::new(self.n);
        if !self.get(row, col) {
            return out;
        }
        let mut stack = vec![(row, col)];
        out.set(row, col, true);
        while let Some((r, c)) = stack.pop() {
            for (dr, dc) in NEIGHBORS_4 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if self.get_signed(nr, nc) && !out.get_signed(nr, nc) {
                    out.set(nr as usize, nc as usize, true);
                    stack.push((nr as usize, nc as usize));
                }
            }
        }
        out
    }

    /// Whether the set cells form a single 4-connected component.
    pub fn is_connected(&self) -> bool {
        match self.iter_set().next() {
            None => true,
            Some((r, c)) => self.component(r, c).count() == self.count(),
        }
    }

    /// One step of 8-neighbour dilation.
    pub fn dilate(&self) -> Mask {
        let mut out = self.clone();
        for (r, c) in self.iter_set() {
            for (dr, dc) in NEIGHBORS_8 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr >= 0 && nc >= 0 && (nr as usize) < self.n && (nc as usize) < self.n {
                    out.set(nr as usize, nc as usize, true);
                }
            }
        }
        out
    }

    /// Cells whose eight neighbours are all set (and which are set themselves).
    pub fn interior(&self) -> Mask {
        Mask::from_fn(self.n, |r, c| {
            self.get(r, c)
                && NEIGHBORS_8
                    .iter()
                    .all(|&(dr, dc)| self.get_signed(r as isize + dr, c as isize + dc))
        })
    }

    /// Set cells of `self` that are unset in `other`.
    pub fn difference_count(&self, other: &Mask) -> usize {
        self.cells
            .iter()
            .zip(&other.cells)
            .filter(|(&a, &b)| a && !b)
            .count()
    }

    pub fn is_subset(&self, other: &Mask) -> bool {
        self.difference_count(other) == 0
    }

    /// Mirror image under `(row, col) -> (n - row, n - col)`, the point
    /// reflection through the centre cell `(n/2, n/2)`. Row/column 0 has no
    /// partner and is dropped.
    pub fn point_reflection(&self) -> Mask {
        let n = self.n;
        Mask::from_fn(n, |r, c| r > 0 && c > 0 && self.get(n - r, n - c))
    }

    /// Mirror image under `row -> n - row` (complex conjugation).
    pub fn conjugate_reflection(&self) -> Mask {
        let n = self.n;
        Mask::from_fn(n, |r, c| r > 0 && self.get(n - r, c))
    }

    /// Squared Euclidean distance (in cells) from every cell to the nearest set cell.
    pub fn distance_transform_sq(&self) -> Vec<f64> {
        let n = self.n;
        let mut grid: Vec<f64> = self.cells.iter().map(|&c| if c { 0.0 } else { FAR }).collect();
        let mut f = vec![0.0; n];
        let mut d = vec![0.0; n];
        // Columns, then rows.
        for col in 0..n {
            for row in 0..n {
                f[row] = grid[row * n + col];
            }
            edt_1d(&f, &mut d);
            for row in 0..n {
                grid[row * n + col] = d[row];
            }
        }
        for row in 0..n {
            f.copy_from_slice(&grid[row * n..(row + 1) * n]);
            edt_1d(&f, &mut d);
            grid[row * n..(row + 1) * n].copy_from_slice(&d);
        }
        grid
    }

    /// `max_{a ∈ self} dist(a, other)` in cells; infinite if `other` is empty
    /// and `self` is not.
    pub fn directed_distance(&self, other: &Mask) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let dt = other.distance_transform_sq();
        let worst = self
            .cells
            .iter()
            .zip(&dt)
            .filter(|(&c, _)| c)
            .map(|(_, &d)| d)
            .fold(0.0, f64::max);
        libm::sqrt(worst)
    }

    /// Symmetric Hausdorff distance in cells.
    pub fn hausdorff(&self, other: &Mask) -> f64 {
        self.directed_distance(other).max(other.directed_distance(self))
    }
}

/// Stand-in for an infinite distance; far above any squared distance on a
/// raster, far below overflow.
const FAR: f64 = 1e20;

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let apex = |q: usize| f[q] + (q * q) as f64;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = (apex(q) - apex(p)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut j = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        let dq = q as f64 - p as f64;
        *out = (dq * dq + f[p]).min(FAR);
    }
}
