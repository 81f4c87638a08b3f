//! Classification of a converged grid into transaction regions, the fixed
//! color legend, CSV/PPM emission and a few geometric predicates on the
//! no-transaction set.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corrector::CorrectorSolution;
use crate::error::{Error, Result};
use crate::grid::{axis_step, Grid, MAX_DIM};
use crate::scalar::Scalar;

/// Set of unordered account pairs `i/j` (i < j <= 3) stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PairSet(u8);

const UNORDERED: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl PairSet {
    pub const EMPTY: PairSet = PairSet(0);

    fn bit(i: usize, j: usize) -> u8 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let pos = UNORDERED.iter().position(|&p| p == (a, b)).expect("pair of accounts 0..=3");
        1 << pos
    }

    pub fn from_ordered(pairs: &[(usize, usize)]) -> Self {
        PairSet(pairs.iter().fold(0, |m, &(i, j)| m | Self::bit(i, j)))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0 & Self::bit(i, j) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        UNORDERED.iter().enumerate().filter(|(k, _)| self.0 & (1 << k) != 0).map(|(_, &p)| p).collect()
    }

    /// `NT`, or the sorted pairs joined with `+`, e.g. `0/1+0/2`.
    pub fn label(&self) -> String {
        if self.is_empty() {
            return "NT".to_string();
        }
        self.pairs().iter().map(|(i, j)| format!("{i}/{j}")).collect::<Vec<_>>().join("+")
    }
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLUE: Rgb = [0, 0, 255];
pub const RED: Rgb = [255, 0, 0];
pub const YELLOW: Rgb = [255, 255, 0];
pub const ORANGE: Rgb = [255, 165, 0];
pub const VIOLET: Rgb = [238, 130, 238];
pub const GREEN: Rgb = [0, 128, 0];
pub const BLACK: Rgb = [0, 0, 0];

/// Legend for up to two assets; `None` for labels involving a third asset.
pub fn legend_color(label: PairSet) -> Option<Rgb> {
    let (c1, c2, a12) = (label.contains(0, 1), label.contains(0, 2), label.contains(1, 2));
    let extra = label.pairs().iter().any(|&(_, j)| j > 2);
    if extra {
        return None;
    }
    Some(match (c1, c2, a12) {
        (false, false, false) => WHITE,
        (false, false, true) => BLUE,
        (true, false, false) => RED,
        (false, true, false) => YELLOW,
        (true, true, false) => ORANGE,
        (true, false, true) => VIOLET,
        (false, true, true) => GREEN,
        (true, true, true) => BLACK,
    })
}

/// Grid labelled by binding gradient constraints.
#[derive(Debug, Clone)]
pub struct RegionMap<T> {
    pub grid: Grid<T>,
    pub labels: Vec<PairSet>,
    pub w: Vec<T>,
    pub a_bar: T,
    pub tol_bind: T,
    /// All NT nodes belong to the component of the origin.
    pub nt_connected: bool,
}

/// Labels every node from its binding set; fails when the origin is not in
/// the NT region.
pub fn classify_regions<T: Scalar>(sol: &CorrectorSolution<T>) -> Result<RegionMap<T>> {
    let map = label_regions(sol);
    if !map.labels[map.grid.center()].is_empty() {
        return Err(Error::EmptyNTRegion);
    }
    Ok(map)
}

/// Labels without the NT check, for artifacts of degenerate solutions.
pub fn label_regions<T: Scalar>(sol: &CorrectorSolution<T>) -> RegionMap<T> {
    let grid = sol.grid.clone();
    let labels: Vec<PairSet> = sol.binding_sets.iter().map(|b| PairSet::from_ordered(b)).collect();
    let center = grid.center();
    let total_nt = labels.iter().filter(|l| l.is_empty()).count();
    let component = if labels[center].is_empty() { nt_component(&grid, &labels, center) } else { 0 };
    RegionMap { grid, labels, w: sol.w.clone(), a_bar: sol.a_bar, tol_bind: sol.tol_bind, nt_connected: component == total_nt }
}

/// Size of the axis-connected NT component containing `start`.
fn nt_component<T: Scalar>(grid: &Grid<T>, labels: &[PairSet], start: usize) -> usize {
    let mut seen = vec![false; labels.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 0;
    while let Some(k) = stack.pop() {
        count += 1;
        for axis in 0..grid.d() {
            let s = axis_step(axis);
            for step in [s, crate::grid::negate(&s)] {
                if let Some(nb) = grid.shift(k, &step) {
                    if !seen[nb] && labels[nb].is_empty() {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
    }
    count
}

impl<T: Scalar> RegionMap<T> {
    pub fn colors(&self) -> Vec<Option<Rgb>> {
        self.labels.iter().map(|&l| legend_color(l)).collect()
    }

    pub fn count_with(&self, i: usize, j: usize) -> usize {
        self.labels.iter().filter(|l| l.contains(i, j)).count()
    }

    pub fn nt_points(&self) -> Vec<Vec<T>> {
        (0..self.labels.len()).filter(|&k| self.labels[k].is_empty()).map(|k| self.grid.coords(k)).collect()
    }

    /// Per-axis `(min, max)` coordinates of NT nodes.
    pub fn nt_bounding_box(&self) -> Vec<(T, T)> {
        let pts = self.nt_points();
        (0..self.grid.d())
            .map(|k| {
                pts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])))
            })
            .collect()
    }

    /// Width of the NT set along each axis, counting whole cells.
    pub fn nt_extents(&self) -> Vec<T> {
        self.nt_bounding_box().into_iter().map(|(lo, hi)| hi - lo + self.grid.h()).collect()
    }

    /// Hausdorff distance between the NT nodes and the box `[lo, hi]`,
    /// the box side sampled at a quarter of the grid spacing.
    pub fn hausdorff_to_box(&self, lo: &[T], hi: &[T]) -> T {
        let pts = self.nt_points();
        let d = self.grid.d();
        let dist = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt();
        let mut worst = T::zero();
        for p in &pts {
            let proj: Vec<T> = (0..d).map(|k| p[k].max(lo[k]).min(hi[k])).collect();
            worst = worst.max(dist(p, &proj));
        }
        let step = self.grid.h() / T::lit(4.0);
        let counts: Vec<usize> = (0..d).map(|k| ((hi[k] - lo[k]) / step).ceil().to_usize().unwrap_or(0) + 1).collect();
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut y = vec![T::zero(); d];
            for k in 0..d {
                let i = rem % counts[k];
                rem /= counts[k];
                let t = if counts[k] > 1 { T::from_usize_lossy(i) / T::from_usize_lossy(counts[k] - 1) } else { T::zero() };
                y[k] = lo[k] + t * (hi[k] - lo[k]);
            }
            let near = pts.iter().map(|p| dist(p, &y)).fold(T::infinity(), T::min);
            worst = worst.max(near);
        }
        worst
    }

    /// Labels are invariant under `rho -> -rho`.
    pub fn is_point_symmetric(&self) -> bool {
        (0..self.labels.len()).all(|k| self.labels[k] == self.labels[self.grid.mirror(k)])
    }

    /// Correlation coefficient of the NT node coordinates (2D); its sign
    /// gives the direction of a shear.
    pub fn nt_correlation(&self) -> Option<T> {
        if self.grid.d() != 2 {
            return None;
        }
        let pts = self.nt_points();
        let n = T::from_usize_lossy(pts.len());
        let m0 = pts.iter().map(|p| p[0]).sum::<T>() / n;
        let m1 = pts.iter().map(|p| p[1]).sum::<T>() / n;
        let (mut c00, mut c11, mut c01) = (T::zero(), T::zero(), T::zero());
        for p in &pts {
            c00 += (p[0] - m0) * (p[0] - m0);
            c11 += (p[1] - m1) * (p[1] - m1);
            c01 += (p[0] - m0) * (p[1] - m1);
        }
        Some(c01 / (c00 * c11).sqrt())
    }

    /// Largest depth (distance to the hull boundary) of a non-NT node lying
    /// inside the convex hull of the NT nodes; zero for a convex NT set (2D).
    pub fn nt_convexity_defect(&self) -> Option<T> {
        if self.grid.d() != 2 {
            return None;
        }
        let hull = convex_hull(&self.nt_points());
        if hull.len() < 3 {
            return Some(T::zero());
        }
        let mut worst = T::zero();
        for k in 0..self.labels.len() {
            if self.labels[k].is_empty() {
                continue;
            }
            let p = self.grid.coords(k);
            if let Some(depth) = depth_inside(&hull, &p) {
                worst = worst.max(depth);
            }
        }
        Some(worst)
    }

    /// CSV text: a `# tol_bind=` comment, the header, then one row per node.
    pub fn to_csv(&self) -> String {
        let d = self.grid.d();
        let mut out = String::new();
        let _ = writeln!(out, "# tol_bind={:e}", self.tol_bind);
        let header: Vec<String> = (1..=d).map(|k| format!("rho{k}")).chain(["label", "w", "aBar"].map(String::from)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for k in 0..self.labels.len() {
            for x in self.grid.coords(k) {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{},{},{}", self.labels[k].label(), self.w[k], self.a_bar);
        }
        out
    }

    /// Binary PPM (P6); `rho1` grows rightward and `rho2` upward.
    pub fn to_ppm(&self, scale: usize) -> Result<Vec<u8>> {
        if self.grid.d() != 2 {
            return Err(Error::UnsupportedDimension(self.grid.d()));
        }
        let scale = scale.max(1);
        let n = self.grid.n();
        let side = n * scale;
        let mut bytes = format!("P6\n{side} {side}\n255\n").into_bytes();
        bytes.reserve(side * side * 3);
        for py in 0..side {
            let j = n - 1 - py / scale;
            for px in 0..side {
                let i = px / scale;
                let mut m = [0i64; MAX_DIM];
                m[0] = i as i64;
                m[1] = j as i64;
                let k = self.grid.index(&m).expect("pixel inside grid");
                bytes.extend_from_slice(&legend_color(self.labels[k]).unwrap_or(BLACK));
            }
        }
        Ok(bytes)
    }
}

pub fn emit_csv<T: Scalar>(map: &RegionMap<T>, path: &Path) -> Result<()> {
    fs::write(path, map.to_csv())?;
    Ok(())
}

pub fn emit_image<T: Scalar>(map: &RegionMap<T>, path: &Path, scale: usize) -> Result<()> {
    let bytes = map.to_ppm(scale)?;
    fs::write(path, bytes)?;
    Ok(())
}

fn cross<T: Scalar>(o: &[T], a: &[T], b: &[T]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull by the monotone chain.
fn convex_hull<T: Scalar>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<T>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<T>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from `p` to the boundary of a CCW hull when `p` is strictly inside.
fn depth_inside<T: Scalar>(hull: &[Vec<T>], p: &[T]) -> Option<T> {
    let mut depth = T::infinity();
    for e in 0..hull.len() {
        let a = &hull[e];
        let b = &hull[(e + 1) % hull.len()];
        let len = ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
        let signed = cross(a, b, p) / len;
        if signed <= T::zero() {
            return None;
        }
        depth = depth.min(signed);
    }
    Some(depth)
}
