//! Lattice discretisation with Shortley-Weller cut fractions.

use crate::error::{Error, Result};
use crate::geometry::domain::POLY_PER_SEGMENT;
use crate::geometry::{DomainSpec, Point2};
use rayon::prelude::*;
use std::sync::Arc;

/// Environment variable holding the grid memory cap in megabytes.
pub const MEMORY_CAP_ENV: &str = "LIOUVILLE_MAX_GRID_MB";

/// Rough bytes per unknown: node data, Jacobian, sparse LU fill and work vectors.
const BYTES_PER_UNKNOWN: usize = 1500;

/// Smallest cut fraction kept; closer cuts are moved to this distance.
const MIN_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmTarget {
    /// Neighbouring interior unknown.
    Node(usize),
    /// Boundary point where the arm is cut.
    Boundary(Point2),
}

/// One of the four stencil arms, with its length as a fraction of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub frac: f64,
    pub target: ArmTarget,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub i: i64,
    pub j: i64,
    pub p: Point2,
    /// Distance to the boundary.
    pub d: f64,
    /// East, west, north, south.
    pub arms: [Arm; 4],
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: Arc<DomainSpec>,
    pub h: f64,
    /// Lattice offset in units of `h`; node `(i, j)` sits at `(offset + (i, j)) h`.
    pub offset: [f64; 2],
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    /// Interior index or `u32::MAX` for nodes outside or on the boundary.
    index: Vec<u32>,
    pub nodes: Vec<Node>,
}

const OUTSIDE: u32 = u32::MAX;

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, i: i64, j: i64) -> Point2 {
        Point2::new((self.offset[0] + i as f64) * self.h, (self.offset[1] + j as f64) * self.h)
    }

    /// Interior index of lattice node `(i, j)`.
    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        if i < self.i0 || j < self.j0 {
            return None;
        }
        let (a, b) = ((i - self.i0) as usize, (j - self.j0) as usize);
        if a >= self.nx || b >= self.ny {
            return None;
        }
        let k = self.index[b * self.nx + a];
        (k != OUTSIDE).then_some(k as usize)
    }

    /// Lattice extents `(i0, j0, nx, ny)`.
    pub fn extents(&self) -> (i64, i64, usize, usize) {
        (self.i0, self.j0, self.nx, self.ny)
    }

    /// Lower-left lattice indices of the cell containing `p`.
    pub fn cell_of(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.h - self.offset[0]).floor() as i64, (p.y / self.h - self.offset[1]).floor() as i64)
    }
}

fn memory_cap() -> Option<usize> {
    std::env::var(MEMORY_CAP_ENV).ok().and_then(|v| v.trim().parse::<f64>().ok()).map(|mb| (mb * 1024.0 * 1024.0) as usize)
}

/// Level crossings of the boundary with the lines `coord = (offset + m) h`, keyed by `m`.
fn crossings(domain: &DomainSpec, axis: usize, h: f64, offset: f64, m0: i64, count: usize) -> Vec<Vec<f64>> {
    let poly = domain.polyline();
    let mut out = vec![Vec::new(); count];
    let coord = |p: Point2| if axis == 0 { p.x } else { p.y };
    let other = |p: Point2| if axis == 0 { p.y } else { p.x };
    for k in 0..poly.len() - 1 {
        let (a, b) = (poly[k], poly[k + 1]);
        let (ca, cb) = (coord(a), coord(b));
        let (lo, hi) = (ca.min(cb), ca.max(cb));
        let mut m = ((lo / h - offset).floor() as i64).max(m0);
        let (seg, ta) = domain.polyline_param(k);
        let tb = ta + 1.0 / POLY_PER_SEGMENT as f64;
        while m < m0 + count as i64 {
            let c = (offset + m as f64) * h;
            if c > hi {
                break;
            }
            if (ca > c) != (cb > c) {
                let t = domain.segments()[seg].refine_level(axis, c, ta, tb);
                out[(m - m0) as usize].push(other(domain.segments()[seg].point(t)));
            }
            m += 1;
        }
    }
    for v in &mut out {
        v.sort_by(f64::total_cmp);
    }
    out
}

/// Builds the lattice problem for `domain` with spacing `h`.
pub fn discretize(domain: Arc<DomainSpec>, h: f64, offset: [f64; 2]) -> Result<Grid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")));
    }
    let (lo, hi) = domain.bounding_box();
    let i0 = (lo.x / h - offset[0]).floor() as i64 - 1;
    let j0 = (lo.y / h - offset[1]).floor() as i64 - 1;
    let nx = ((hi.x / h - offset[0]).ceil() as i64 + 2 - i0) as usize;
    let ny = ((hi.y / h - offset[1]).ceil() as i64 + 2 - j0) as usize;
    let est_unknowns = nx * ny;
    if let Some(cap) = memory_cap() {
        let bytes = nx * ny * 8 + est_unknowns * BYTES_PER_UNKNOWN / 2;
        if bytes > cap {
            return Err(Error::MemoryCap { nodes: nx * ny, bytes, cap });
        }
    }
    let rows = crossings(&domain, 1, h, offset[1], j0, ny);
    let cols = crossings(&domain, 0, h, offset[0], i0, nx);
    let on_tol = 1e-10 * h;

    // Candidate interior nodes by parity along rows.
    let mut cand: Vec<(i64, i64, Point2)> = Vec::new();
    for (b, xs) in rows.iter().enumerate() {
        if xs.is_empty() {
            continue;
        }
        let j = j0 + b as i64;
        for a in 0..nx {
            let i = i0 + a as i64;
            let p = Point2::new((offset[0] + i as f64) * h, (offset[1] + j as f64) * h);
            let left = xs.partition_point(|&x| x < p.x);
            let on_crossing = xs.get(left).is_some_and(|&x| (x - p.x).abs() <= on_tol) || (left > 0 && (p.x - xs[left - 1]).abs() <= on_tol);
            if left % 2 == 1 && !on_crossing {
                cand.push((i, j, p));
            }
        }
    }
    let dists: Vec<f64> = cand.par_iter().map(|&(_, _, p)| domain.nearest(p).1.dist).collect();
    let mut index = vec![OUTSIDE; nx * ny];
    let mut kept = Vec::with_capacity(cand.len());
    for (c, &d) in cand.iter().zip(&dists) {
        if d > on_tol {
            index[((c.1 - j0) as usize) * nx + (c.0 - i0) as usize] = kept.len() as u32;
            kept.push((c.0, c.1, c.2, d));
        }
    }
    let idx = |i: i64, j: i64| -> Option<usize> {
        let (a, b) = (i - i0, j - j0);
        if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny {
            return None;
        }
        let k = index[b as usize * nx + a as usize];
        (k != OUTSIDE).then_some(k as usize)
    };
    let mut nodes = Vec::with_capacity(kept.len());
    for &(i, j, p, d) in &kept {
        let row = &rows[(j - j0) as usize];
        let col = &cols[(i - i0) as usize];
        let mut arms = [Arm { frac: 1.0, target: ArmTarget::Node(0) }; 4];
        for (k, (di, dj)) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].into_iter().enumerate() {
            let (line, x0, sign) = if dj == 0 { (row, p.x, di as f64) } else { (col, p.y, dj as f64) };
            // Nearest crossing strictly beyond the node and at most h away.
            let cut = line.iter().map(|&c| (c - x0) * sign).filter(|&s| s > 0.0 && s <= h * (1.0 + 1e-12)).fold(f64::INFINITY, f64::min);
            let nb = idx(i + di, j + dj);
            arms[k] = match (nb, cut.is_finite()) {
                (Some(n), false) => Arm { frac: 1.0, target: ArmTarget::Node(n) },
                (Some(_), true) => {
                    if cut >= h * (1.0 - 1e-10) {
                        // Crossing at the neighbour itself within rounding: the neighbour is interior by parity.
                        Arm { frac: 1.0, target: ArmTarget::Node(nb.unwrap()) }
                    } else {
                        return Err(Error::Discretization(format!("domain thinner than 2h near ({}, {}); refine the grid", p.x, p.y)));
                    }
                }
                (None, true) => {
                    let frac = (cut / h).clamp(MIN_FRACTION, 1.0);
                    let q = if dj == 0 { Point2::new(p.x + sign * cut, p.y) } else { Point2::new(p.x, p.y + sign * cut) };
                    Arm { frac, target: ArmTarget::Boundary(q) }
                }
                (None, false) => {
                    let q = Point2::new(p.x + di as f64 * h, p.y + dj as f64 * h);
                    Arm { frac: 1.0, target: ArmTarget::Boundary(q) }
                }
            };
        }
        nodes.push(Node { i, j, p, d, arms });
    }
    if nodes.is_empty() {
        return Err(Error::Discretization("no interior nodes; the grid is too coarse".into()));
    }
    Ok(Grid { domain, h, offset, i0, j0, nx, ny, index, nodes })
}
