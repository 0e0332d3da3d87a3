//! Damped Newton iteration for the discrete problem
//! `L_h w + Delta b - e^{2(b + w)} = 0` with Dirichlet data for `w` at cut points.

use super::grid::{ArmTarget, Grid};
use crate::error::{Error, Result};
use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::SparseColMat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Neighbour coefficients, diagonal, right-hand side, neighbour indices and row scale of one node.
type StencilRow = ([f64; 4], f64, f64, [u32; 4], f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Tolerance on the row-scaled residual max-norm.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Relative residual required from each linear solve.
    pub linear_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-10, max_iter: 50, max_halvings: 30, linear_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
    /// Residual max-norm before each iteration and after the last one.
    pub history: Vec<f64>,
}

/// Assembled stencil data. Rows are scaled by the modulus of the Laplacian diagonal,
/// which makes the residual norm a measure of the size of the next correction.
pub(crate) struct Problem {
    /// `[east, west, north, south]` coefficients, already scaled.
    coef: Vec<[f64; 4]>,
    /// Scaled Laplacian diagonal.
    diag: Vec<f64>,
    /// `1 / |c0|`.
    scale: Vec<f64>,
    nbr: Vec<[u32; 4]>,
    /// Scaled contribution of the boundary values plus the background Laplacian.
    rhs: Vec<f64>,
    b: Vec<f64>,
    symbolic: Option<SymbolicLu<usize>>,
}

const NO_NODE: u32 = u32::MAX;

impl Problem {
    /// `b` and `lap_b` are the background at the nodes, `boundary(p)` the value of
    /// `w` at a cut point.
    pub(crate) fn new(grid: &Grid, b: Vec<f64>, lap_b: &[f64], boundary: &(dyn Fn(crate::Point2) -> Result<f64> + Sync)) -> Result<Self> {
        let h2 = grid.h * grid.h;
        let n = grid.len();
        let rows: Vec<Result<StencilRow>> = grid
            .nodes
            .par_iter()
            .enumerate()
            .map(|(k, node)| {
                let [e, w, nn, s] = node.arms;
                let (he, hw, hn, hs) = (e.frac, w.frac, nn.frac, s.frac);
                let c = [2.0 / (h2 * he * (he + hw)), 2.0 / (h2 * hw * (he + hw)), 2.0 / (h2 * hn * (hn + hs)), 2.0 / (h2 * hs * (hn + hs))];
                let c0 = -2.0 / (h2 * he * hw) - 2.0 / (h2 * hn * hs);
                let sc = 1.0 / c0.abs();
                let mut nb = [NO_NODE; 4];
                let mut r = lap_b[k];
                for (a, arm) in node.arms.iter().enumerate() {
                    match arm.target {
                        ArmTarget::Node(m) => nb[a] = m as u32,
                        ArmTarget::Boundary(q) => r += c[a] * boundary(q)?,
                    }
                }
                Ok((c.map(|x| x * sc), c0 * sc, sc, nb, r * sc))
            })
            .collect();
        let mut p = Problem {
            coef: Vec::with_capacity(n),
            diag: Vec::with_capacity(n),
            scale: Vec::with_capacity(n),
            nbr: Vec::with_capacity(n),
            rhs: Vec::with_capacity(n),
            b,
            symbolic: None,
        };
        for r in rows {
            let (c, d, s, nb, rhs) = r?;
            p.coef.push(c);
            p.diag.push(d);
            p.scale.push(s);
            p.nbr.push(nb);
            p.rhs.push(rhs);
        }
        Ok(p)
    }

    pub(crate) fn background(&self) -> &[f64] {
        &self.b
    }

    /// Scaled residual and the scaled derivative of the nonlinear term.
    fn residual(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (0..w.len())
            .into_par_iter()
            .map(|i| {
                let mut r = self.diag[i] * w[i] + self.rhs[i];
                for a in 0..4 {
                    let m = self.nbr[i][a];
                    if m != NO_NODE {
                        r += self.coef[i][a] * w[m as usize];
                    }
                }
                let e = (2.0 * (self.b[i] + w[i])).exp() * self.scale[i];
                (r - e, 2.0 * e)
            })
            .unzip()
    }

    fn apply(&self, jd: &[f64], x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .into_par_iter()
            .map(|i| {
                let mut r = (self.diag[i] - jd[i]) * x[i];
                for a in 0..4 {
                    let m = self.nbr[i][a];
                    if m != NO_NODE {
                        r += self.coef[i][a] * x[m as usize];
                    }
                }
                r
            })
            .collect()
    }

    /// Solves `J x = rhs` for the Jacobian with nonlinear diagonal part `jd`.
    fn linear_solve(&mut self, jd: &[f64], rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut trip = Vec::with_capacity(5 * n);
        for (i, &j) in jd.iter().enumerate().take(n) {
            trip.push((i, i, self.diag[i] - j));
            for a in 0..4 {
                let m = self.nbr[i][a];
                if m != NO_NODE {
                    trip.push((i, m as usize, self.coef[i][a]));
                }
            }
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        if self.symbolic.is_none() {
            self.symbolic = Some(SymbolicLu::try_new(mat.symbolic()).map_err(|e| Error::LinearSolve(format!("{e:?}")))?);
        }
        let sym = self.symbolic.clone().expect("symbolic factorisation present");
        let lu = Lu::try_new_with_symbolic(sym, mat.as_ref()).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let bnorm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        for _ in 0..4 {
            let col = faer::Col::<f64>::from_fn(n, |i| r[i]);
            let dx = lu.solve(&col);
            for i in 0..n {
                x[i] += dx[i];
            }
            let ax = self.apply(jd, &x);
            r = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !rn.is_finite() {
                return Err(Error::LinearSolve("non-finite residual".into()));
            }
            if rn <= tol * bnorm.max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
        }
        let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rn <= 1e3 * tol * bnorm {
            Ok(x)
        } else {
            Err(Error::LinearSolve(format!("relative residual {:e} after refinement", rn / bnorm)))
        }
    }

    pub(crate) fn solve(&mut self, w: &mut [f64], cfg: &NewtonConfig) -> Result<NewtonStats> {
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        let (mut res, mut jd) = self.residual(w);
        let mut rn = norm(&res);
        let mut history = vec![rn];
        for it in 0..=cfg.max_iter {
            if rn <= cfg.tol {
                return Ok(NewtonStats { iterations: it, residual: rn, history });
            }
            if it == cfg.max_iter {
                break;
            }
            let neg: Vec<f64> = res.iter().map(|v| -v).collect();
            let dx = self.linear_solve(&jd, &neg, cfg.linear_tol)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=cfg.max_halvings {
                let trial: Vec<f64> = w.iter().zip(&dx).map(|(a, b)| a + lambda * b).collect();
                let (r2, j2) = self.residual(&trial);
                let n2 = norm(&r2);
                if n2 < rn {
                    w.copy_from_slice(&trial);
                    res = r2;
                    jd = j2;
                    rn = n2;
                    history.push(rn);
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NonConvergence { iterations: it + 1, residual: rn });
            }
        }
        Err(Error::NonConvergence { iterations: cfg.max_iter, residual: rn })
    }
}

impl Problem {
    pub(crate) fn set_symbolic(&mut self, s: SymbolicLu<usize>) {
        self.symbolic = Some(s);
    }

    pub(crate) fn take_symbolic(&mut self) -> Option<SymbolicLu<usize>> {
        self.symbolic.take()
    }
}
