//! Zero level set of the phase field by marching squares on the dual grid.

use std::collections::HashMap;

use serde::Serialize;

use crate::grid_fields::{ScalarField, TorusGrid};
use crate::scalar::{min_image, Real};

/// Closed polyline. Coordinates are unwrapped, so a loop that crosses the
/// torus seam is continuous in the plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Loop<T> {
    pub points: Vec<[T; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Interface<T> {
    /// `d = 2`: closed loops.
    Loops(Vec<Loop<T>>),
    /// `d = 3`: edge crossings.
    Cloud(Vec<[T; 3]>),
}

impl<T: Real> Loop<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> T {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// Shoelace area (unsigned).
    pub fn area(&self) -> T {
        let n = self.points.len();
        let twice = (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .fold(T::zero(), |acc, v| acc + v);
        (twice * T::of(0.5)).abs()
    }

    /// `L^2 / (4 pi A)`; equals 1 for a circle.
    pub fn isoperimetric_ratio(&self) -> T {
        let l = self.length();
        l * l / (T::of(4.0) * T::PI() * self.area())
    }

    pub fn centroid(&self) -> [T; 2] {
        let n = T::of_usize(self.points.len().max(1));
        let s = self
            .points
            .iter()
            .fold([T::zero(); 2], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }
}

impl<T: Real> Interface<T> {
    pub fn loops(&self) -> &[Loop<T>] {
        match self {
            Interface::Loops(l) => l,
            Interface::Cloud(_) => &[],
        }
    }

    /// All points as `d`-vectors, wrapped into the unit cell.
    pub fn points(&self) -> Vec<Vec<T>> {
        let wrap = |x: T| x - x.floor();
        match self {
            Interface::Loops(loops) => loops
                .iter()
                .flat_map(|l| l.points.iter().map(|p| vec![wrap(p[0]), wrap(p[1])]))
                .collect(),
            Interface::Cloud(pts) => pts.iter().map(|p| vec![wrap(p[0]), wrap(p[1]), wrap(p[2])]).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Interface::Loops(l) => l.is_empty(),
            Interface::Cloud(p) => p.is_empty(),
        }
    }
}

/// Crossing point on the grid edge from cell `idx` to its `+axis` neighbour.
fn edge_point<T: Real>(grid: TorusGrid, v: &[T], idx: usize, axis: usize) -> [T; 3] {
    let j = grid.neighbor(idx, axis, true);
    let (a, b) = (v[idx], v[j]);
    let t = a / (a - b);
    let mut x = grid.cell_center::<T>(idx);
    x[axis] = x[axis] + t * grid.spacing::<T>();
    x
}

#[inline]
fn crosses<T: Real>(a: T, b: T) -> bool {
    (a > T::zero()) != (b > T::zero())
}

/// Extracts the zero level set; empty when `phi` has no sign change.
pub fn extract_interface<T: Real>(phi: &ScalarField<T>) -> Interface<T> {
    let grid = phi.grid();
    let v = phi.values();
    if grid.dim() == 3 {
        let mut pts = Vec::new();
        for idx in 0..grid.len() {
            for axis in 0..3 {
                if crosses(v[idx], v[grid.neighbor(idx, axis, true)]) {
                    pts.push(edge_point(grid, v, idx, axis));
                }
            }
        }
        return Interface::Cloud(pts);
    }
    Interface::Loops(march_squares(grid, v))
}

fn march_squares<T: Real>(grid: TorusGrid, v: &[T]) -> Vec<Loop<T>> {
    // Edge id: 2 * cell + axis, for the edge from `cell` towards `+axis`.
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for c00 in 0..grid.len() {
        let c10 = grid.neighbor(c00, 0, true);
        let c01 = grid.neighbor(c00, 1, true);
        let c11 = grid.neighbor(c10, 1, true);
        let bottom = 2 * c00;
        let right = 2 * c10 + 1;
        let top = 2 * c01;
        let left = 2 * c00 + 1;
        let edges = [
            (bottom, crosses(v[c00], v[c10])),
            (right, crosses(v[c10], v[c11])),
            (top, crosses(v[c01], v[c11])),
            (left, crosses(v[c00], v[c01])),
        ];
        let hits: Vec<usize> = edges.iter().filter(|e| e.1).map(|e| e.0).collect();
        match hits.len() {
            2 => segments.push([hits[0], hits[1]]),
            4 => {
                let centre = (v[c00] + v[c10] + v[c01] + v[c11]) * T::of(0.25);
                if (centre > T::zero()) == (v[c00] > T::zero()) {
                    // c00 and c11 joined through the centre: cut off c10 and c01.
                    segments.push([bottom, right]);
                    segments.push([top, left]);
                } else {
                    segments.push([bottom, left]);
                    segments.push([right, top]);
                }
            }
            _ => {}
        }
    }

    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let point = |edge: usize| -> [T; 2] {
        let p = edge_point(grid, v, edge / 2, edge % 2);
        [p[0], p[1]]
    };

    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first_edge = segments[start][0];
        let mut edge = segments[start][1];
        let mut pts = vec![point(first_edge)];
        loop {
            if edge == first_edge {
                break;
            }
            let prev = *pts.last().unwrap();
            let raw = point(edge);
            pts.push([
                prev[0] + min_image(raw[0] - prev[0]),
                prev[1] + min_image(raw[1] - prev[1]),
            ]);
            let next = by_edge[&edge].iter().copied().find(|&s| !used[s]);
            match next {
                Some(s) => {
                    used[s] = true;
                    edge = if segments[s][0] == edge { segments[s][1] } else { segments[s][0] };
                }
                None => break,
            }
        }
        loops.push(Loop { points: pts });
    }
    loops
}
