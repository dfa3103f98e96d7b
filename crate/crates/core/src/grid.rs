//! Finite sampling of the parameter space `Y`.
//!
//! Every supremum or minimum over `Y` in this crate is taken over the points
//! of a [`BaseGrid`]. The grid records its covering radius (`spacing`) so that
//! tolerances can be scaled with the resolution.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const COORD_TOL: f64 = 1e-12;

/// Tensor structure of a grid: sorted coordinates per axis and the map from
/// multi-indices to point indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorIndex {
    pub axes: Vec<Vec<f64>>,
    /// `multi[k]` is the multi-index of point `k`.
    multi: Vec<Vec<usize>>,
    /// Flat (row-major) multi-index position to point index.
    flat_to_point: Vec<usize>,
}

impl TensorIndex {
    pub fn multi_index(&self, point: usize) -> &[usize] {
        &self.multi[point]
    }

    pub fn point_at(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for (axis, &i) in self.axes.iter().zip(multi) {
            flat = flat * axis.len() + i;
        }
        self.flat_to_point[flat]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseGrid {
    m: usize,
    y_box: Vec<(f64, f64)>,
    points: Vec<Vec<f64>>,
    spacing: f64,
    tensor: Option<TensorIndex>,
}

/// Wire form: `{"y_box": [[lo, hi], ...], "points": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub y_box: Vec<[f64; 2]>,
    pub points: Vec<Vec<f64>>,
}

impl BaseGrid {
    /// Uniform tensor grid with `points_per_axis` points on every axis,
    /// endpoints included.
    pub fn tensor(y_box: Vec<(f64, f64)>, points_per_axis: usize) -> Result<Self> {
        validate_box(&y_box)?;
        if points_per_axis == 0 {
            return Err(invalid("points_per_axis must be positive"));
        }
        let axes: Vec<Vec<f64>> = y_box
            .iter()
            .map(|&(lo, hi)| linspace(lo, hi, points_per_axis))
            .collect();
        let mut points = Vec::new();
        let mut multi = vec![0usize; y_box.len()];
        loop {
            points.push(multi.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
            if !advance(&mut multi, &axes) {
                break;
            }
        }
        Self::from_points(y_box, points)
    }

    /// Grid from an explicit list of points. Tensor structure is detected
    /// automatically.
    pub fn from_points(y_box: Vec<(f64, f64)>, points: Vec<Vec<f64>>) -> Result<Self> {
        validate_box(&y_box)?;
        let m = y_box.len();
        if points.is_empty() {
            return Err(invalid("grid has no points"));
        }
        for p in &points {
            if p.len() != m {
                return Err(invalid(format!("grid point {p:?} does not have {m} coordinates")));
            }
            if !in_box(&y_box, p) {
                return Err(invalid(format!("grid point {p:?} lies outside the box")));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if max_abs_diff(&points[i], &points[j]) <= COORD_TOL {
                    return Err(invalid(format!("duplicate grid point {:?}", points[i])));
                }
            }
        }
        let tensor = detect_tensor(&points, m);
        let spacing = match &tensor {
            Some(t) => tensor_spacing(&y_box, &t.axes),
            None => sampled_spacing(&y_box, &points),
        };
        Ok(Self {
            m,
            y_box,
            points,
            spacing,
            tensor,
        })
    }

    pub fn from_json(json: &GridJson) -> Result<Self> {
        let y_box = json.y_box.iter().map(|b| (b[0], b[1])).collect();
        Self::from_points(y_box, json.points.clone())
    }

    pub fn to_json(&self) -> GridJson {
        GridJson {
            y_box: self.y_box.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            points: self.points.clone(),
        }
    }

    /// The same box restricted to a subset of points (in the given order).
    pub fn subgrid(&self, indices: &[usize]) -> Result<Self> {
        Self::from_points(
            self.y_box.clone(),
            indices.iter().map(|&i| self.points[i].clone()).collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn y_box(&self) -> &[(f64, f64)] {
        &self.y_box
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Covering radius: the largest distance from a box point to the
    /// nearest grid point. Exact for tensor grids, estimated by dense
    /// sampling otherwise.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn tensor_index(&self) -> Option<&TensorIndex> {
        self.tensor.as_ref()
    }

    /// Tensor grid whose outermost coordinates coincide with the box faces.
    pub fn is_full_tensor(&self) -> bool {
        match &self.tensor {
            Some(t) => t.axes.iter().zip(&self.y_box).all(|(axis, &(lo, hi))| {
                (axis[0] - lo).abs() <= COORD_TOL && (axis[axis.len() - 1] - hi).abs() <= COORD_TOL
            }),
            None => false,
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.m && in_box(&self.y_box, y)
    }

    /// Index of the grid point equal to `y` (coordinate-wise within 1e-12).
    pub fn index_of(&self, y: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| max_abs_diff(p, y) <= COORD_TOL)
    }

    /// Index of the nearest grid point; ties resolve to the lowest index.
    pub fn nearest(&self, y: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (k, p) in self.points.iter().enumerate() {
            let d = dist2(p, y);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Sequences of grid points approaching `index`, one per direction, each
    /// listed from the closest point outward and truncated to `depth`
    /// entries. On tensor grids the directions are the positive and negative
    /// axis directions; on scattered grids every near neighbour forms its own
    /// one-element sequence.
    pub fn approach_sequences(&self, index: usize, depth: usize) -> Vec<Vec<usize>> {
        match &self.tensor {
            Some(t) => {
                let base = t.multi_index(index).to_vec();
                let mut out = Vec::new();
                for axis in 0..self.m {
                    for dir in [1isize, -1] {
                        let mut seq = Vec::new();
                        for step in 1..=depth as isize {
                            let pos = base[axis] as isize + dir * step;
                            if pos < 0 || pos >= t.axes[axis].len() as isize {
                                break;
                            }
                            let mut mi = base.clone();
                            mi[axis] = pos as usize;
                            seq.push(t.point_at(&mi));
                        }
                        if !seq.is_empty() {
                            out.push(seq);
                        }
                    }
                }
                out
            }
            None => self.scattered_neighbours(index).into_iter().map(|j| vec![j]).collect(),
        }
    }

    /// Unordered neighbour pairs `(i, j)` with `i < j`.
    pub fn neighbour_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            for seq in self.approach_sequences(i, 1) {
                let j = seq[0];
                if i < j {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    fn scattered_neighbours(&self, index: usize) -> Vec<usize> {
        let p = &self.points[index];
        let nn = self
            .points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != index)
            .map(|(_, q)| dist2(p, q).sqrt())
            .fold(f64::INFINITY, f64::min);
        if !nn.is_finite() {
            return Vec::new();
        }
        self.points
            .iter()
            .enumerate()
            .filter(|&(j, q)| j != index && dist2(p, q).sqrt() <= 1.5 * nn)
            .map(|(j, _)| j)
            .collect()
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn in_box(y_box: &[(f64, f64)], y: &[f64]) -> bool {
    y_box
        .iter()
        .zip(y)
        .all(|(&(lo, hi), &v)| v >= lo - COORD_TOL && v <= hi + COORD_TOL)
}

fn validate_box(y_box: &[(f64, f64)]) -> Result<()> {
    if y_box.is_empty() {
        return Err(invalid("parameter box must have at least one axis"));
    }
    for &(lo, hi) in y_box {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid(format!("invalid box interval [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 || lo == hi {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn advance(multi: &mut [usize], axes: &[Vec<f64>]) -> bool {
    for axis in (0..multi.len()).rev() {
        multi[axis] += 1;
        if multi[axis] < axes[axis].len() {
            return true;
        }
        multi[axis] = 0;
    }
    false
}

fn detect_tensor(points: &[Vec<f64>], m: usize) -> Option<TensorIndex> {
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(m);
    for axis in 0..m {
        let mut coords: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        coords.sort_by(f64::total_cmp);
        coords.dedup_by(|a, b| (*a - *b).abs() <= COORD_TOL);
        axes.push(coords);
    }
    let total: usize = axes.iter().map(Vec::len).product();
    if total != points.len() {
        return None;
    }
    let locate = |axis: &[f64], v: f64| axis.iter().position(|&c| (c - v).abs() <= COORD_TOL);
    let mut multi = Vec::with_capacity(points.len());
    let mut flat_to_point = vec![usize::MAX; total];
    for (k, p) in points.iter().enumerate() {
        let mi: Vec<usize> = (0..m).map(|a| locate(&axes[a], p[a])).collect::<Option<_>>()?;
        let mut flat = 0;
        for (axis, &i) in axes.iter().zip(&mi) {
            flat = flat * axis.len() + i;
        }
        if flat_to_point[flat] != usize::MAX {
            return None;
        }
        flat_to_point[flat] = k;
        multi.push(mi);
    }
    Some(TensorIndex {
        axes,
        multi,
        flat_to_point,
    })
}

fn tensor_spacing(y_box: &[(f64, f64)], axes: &[Vec<f64>]) -> f64 {
    axes.iter()
        .zip(y_box)
        .map(|(axis, &(lo, hi))| {
            let mut r = (axis[0] - lo).max(hi - axis[axis.len() - 1]);
            for w in axis.windows(2) {
                r = r.max((w[1] - w[0]) / 2.0);
            }
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

fn sampled_spacing(y_box: &[(f64, f64)], points: &[Vec<f64>]) -> f64 {
    let m = y_box.len();
    let per_axis = ((4096f64).powf(1.0 / m as f64).floor() as usize).max(2);
    let axes: Vec<Vec<f64>> = y_box.iter().map(|&(lo, hi)| linspace(lo, hi, per_axis)).collect();
    let mut multi = vec![0usize; m];
    let mut worst: f64 = 0.0;
    loop {
        let s: Vec<f64> = multi.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let nearest = points.iter().map(|p| dist2(p, &s)).fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest.sqrt());
        if !advance(&mut multi, &axes) {
            break;
        }
    }
    worst
}
