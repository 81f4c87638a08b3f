use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported dimension of the fast variable.
pub const MAX_DIM: usize = 3;

/// Multi-index or step in index units; entries past `d` are zero.
pub type Offset = [i64; MAX_DIM];

/// Uniform cubic grid `[-R, R]^d` with `n` nodes per axis; axis 0 varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    d: usize,
    n: usize,
    radius: T,
    h: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(d: usize, n: usize, radius: T) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("node count {n} must be odd and >= 5")));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParams("radius must be positive".into()));
        }
        let h = T::two() * radius / T::from_usize_lossy(n - 1);
        Ok(Self { d, n, radius, h })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the node at the origin.
    pub fn center(&self) -> usize {
        self.index(&[(self.n / 2) as i64; MAX_DIM]).expect("center inside grid")
    }

    pub fn multi_index(&self, mut idx: usize) -> Offset {
        let mut m = [0; MAX_DIM];
        for slot in m.iter_mut().take(self.d) {
            *slot = (idx % self.n) as i64;
            idx /= self.n;
        }
        m
    }

    pub fn index(&self, m: &Offset) -> Option<usize> {
        let mut idx = 0usize;
        for k in (0..self.d).rev() {
            if m[k] < 0 || m[k] >= self.n as i64 {
                return None;
            }
            idx = idx * self.n + m[k] as usize;
        }
        Some(idx)
    }

    /// Neighbor reached by `step` (index units), if inside the grid.
    pub fn shift(&self, idx: usize, step: &Offset) -> Option<usize> {
        let mut m = self.multi_index(idx);
        for k in 0..self.d {
            m[k] += step[k];
        }
        self.index(&m)
    }

    pub fn coord(&self, idx: usize, axis: usize) -> T {
        let m = self.multi_index(idx);
        T::from_i64(m[axis] - (self.n / 2) as i64).expect("small integer") * self.h
    }

    pub fn coords(&self, idx: usize) -> Vec<T> {
        (0..self.d).map(|k| self.coord(idx, k)).collect()
    }

    /// Number of steps to the nearest face of the cube (0 on the boundary).
    pub fn boundary_distance(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        (0..self.d).map(|k| (m[k] as usize).min(self.n - 1 - m[k] as usize)).min().unwrap_or(0)
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary_distance(idx) == 0
    }

    /// L1 distance from the center in index units.
    pub fn l1_steps(&self, idx: usize) -> i64 {
        let m = self.multi_index(idx);
        let c = (self.n / 2) as i64;
        (0..self.d).map(|k| (m[k] - c).abs()).sum()
    }

    /// Index of the node nearest to `x`, clamped to the grid; also reports
    /// whether clamping happened.
    pub fn nearest(&self, x: &[T]) -> (usize, bool) {
        let mut m = [0; MAX_DIM];
        let mut clamped = false;
        let c = (self.n / 2) as i64;
        for k in 0..self.d {
            let j = (x[k] / self.h).round().to_i64().unwrap_or(i64::MAX / 2) + c;
            let jc = j.clamp(0, self.n as i64 - 1);
            clamped |= jc != j;
            m[k] = jc;
        }
        (self.index(&m).expect("clamped"), clamped)
    }

    /// Node indices at which `x` is mirrored through the origin.
    pub fn mirror(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        let mut r = [0; MAX_DIM];
        for k in 0..self.d {
            r[k] = self.n as i64 - 1 - m[k];
        }
        self.index(&r).expect("mirror inside grid")
    }
}

/// Unit axis step `e_axis` in index units.
pub fn axis_step(axis: usize) -> Offset {
    let mut s = [0; MAX_DIM];
    s[axis] = 1;
    s
}

/// Transfer direction `e_j - e_i` for a transfer from account `i` to account
/// `j`, where account 0 (cash) contributes no coordinate.
pub fn transfer_direction(i: usize, j: usize) -> Offset {
    let mut s = [0; MAX_DIM];
    if j > 0 {
        s[j - 1] += 1;
    }
    if i > 0 {
        s[i - 1] -= 1;
    }
    s
}

pub fn negate(s: &Offset) -> Offset {
    [-s[0], -s[1], -s[2]]
}
