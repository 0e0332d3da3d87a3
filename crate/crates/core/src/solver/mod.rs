//! Finite-difference solver for blow-up solutions on a lattice.
//!
//! The unknown is split as `u = b + w` with a smooth background `b` whose Laplacian
//! is known at every node. The background absorbs the logarithmic blow-up, so `w`
//! is bounded and satisfies homogeneous Dirichlet data at the Shortley-Weller cut
//! points. With `b = 0` the same code solves ordinary Dirichlet problems.

mod background;
mod export;
mod grid;
mod newton;

pub use background::{Blend, BlendCoordinate, Cutoff, SoftMin, ZeroBackground};
pub use export::{read_binary, write_binary, write_csv, BinaryDump};
pub use grid::{discretize, Arm, ArmTarget, Grid, Node, MEMORY_CAP_ENV};
pub use newton::{NewtonConfig, NewtonStats};

use crate::closedform::ModelExpansion;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{DomainSpec, Point2};
use newton::Problem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// How the infinite boundary condition is approximated.
#[derive(Clone, Debug)]
pub enum BoundaryMode {
    /// Solve with boundary value `k` for each `k` in turn and stop once successive
    /// solutions agree on the trust region. `reference` shapes the background
    /// `-log(e^{-m} + e^{-k})` and defaults to the domain's defining function.
    ConstantK { ks: Vec<f64>, reference: Option<ModelExpansion> },
    /// Background built from a boundary model; the discrete solution satisfies
    /// `u - model = 0` at the cut points.
    Matched { model: ModelExpansion },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub h: f64,
    /// Lattice offset in units of `h`.
    pub lattice_offset: [f64; 2],
    pub newton: NewtonConfig,
    /// Nodes with `d >= trust_factor * h` form the trust region.
    pub trust_factor: f64,
    /// Constant-k sequences stop when the trust-region increment falls below this.
    pub increment_tol: f64,
    /// Allowed violation of `u_k <= u_{k+1}`.
    pub monotone_tol: f64,
    /// Blend band `[a, b]` for smooth models, as fractions of the feature scale.
    pub smooth_band: [f64; 2],
    /// Blend band for corner models, as fractions of the chart radius.
    pub corner_band: [f64; 2],
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 1.0 / 64.0,
            lattice_offset: [0.0, 0.0],
            newton: NewtonConfig::default(),
            trust_factor: 10.0,
            increment_tol: 1e-6,
            monotone_tol: 1e-6,
            smooth_band: [0.3, 0.6],
            corner_band: [0.5, 1.0],
        }
    }
}

impl SolverConfig {
    pub fn with_h(h: f64) -> Self {
        SolverConfig { h, ..Default::default() }
    }
}

/// The default constant-k sequence `2, 4, ..., 24`.
pub fn default_k_sequence() -> Vec<f64> {
    (1..=12).map(|k| 2.0 * k as f64).collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: String,
    pub newton_iterations: usize,
    pub residual: f64,
    /// One entry per `k` of a constant-k run.
    pub k_history: Vec<KStep>,
    /// Whether a constant-k run met its increment tolerance.
    pub settled: bool,
    /// Newton residual history of the last nonlinear solve.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KStep {
    pub k: f64,
    /// Largest change from the previous `k` on the trust region (infinite for the first `k`).
    pub increment: f64,
    /// Smallest nodal change `u_k - u_{k-1}` over all nodes (infinite for the first `k`).
    pub min_change: f64,
}

pub struct GridSolution {
    pub grid: Arc<Grid>,
    pub background: Arc<dyn Field>,
    /// Correction `w = u - b` at the interior nodes.
    pub w: Vec<f64>,
    /// Nodal values `u = b + w`.
    pub u: Vec<f64>,
    pub trust_factor: f64,
    pub report: SolveReport,
}

impl GridSolution {
    pub fn in_trust(&self, node: usize) -> bool {
        self.grid.nodes[node].d >= self.trust_factor * self.grid.h
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_factor * self.grid.h
    }
}

fn node_jets(grid: &Grid, bg: &dyn Field) -> Result<(Vec<f64>, Vec<f64>)> {
    let jets: Vec<Result<(f64, f64)>> = grid.nodes.par_iter().map(|n| bg.jet(n.p).map(|j| (j.value, j.laplacian))).collect();
    let mut b = Vec::with_capacity(jets.len());
    let mut l = Vec::with_capacity(jets.len());
    for j in jets {
        let (v, lap) = j?;
        if !(v.is_finite() && lap.is_finite()) {
            return Err(Error::Discretization("background is not finite at a node".into()));
        }
        b.push(v);
        l.push(lap);
    }
    Ok((b, l))
}

/// Background for a matched run: exact closed forms are used as they are, boundary
/// models are blended into the defining-function model away from the boundary.
pub fn matched_background(domain: &Arc<DomainSpec>, model: &ModelExpansion, cfg: &SolverConfig) -> Result<Arc<dyn Field>> {
    Ok(match model {
        ModelExpansion::SmoothModel { .. } => {
            if !domain.corners().is_empty() {
                return Err(Error::InvalidParameter("a smooth-model background needs a corner-free domain".into()));
            }
            let s = domain.feature_scale();
            Arc::new(Blend {
                model: model.clone(),
                fallback: defining(domain)?,
                domain: domain.clone(),
                coordinate: BlendCoordinate::Distance,
                cutoff: Cutoff { a: cfg.smooth_band[0] * s, b: cfg.smooth_band[1] * s },
            })
        }
        ModelExpansion::CornerModel { corner, .. } => {
            let c = domain.corner(*corner)?;
            let r = domain.chart_radius(*corner)?;
            Arc::new(Blend {
                model: model.clone(),
                fallback: defining(domain)?,
                domain: domain.clone(),
                coordinate: BlendCoordinate::Radius(c.vertex),
                cutoff: Cutoff { a: cfg.corner_band[0] * r, b: cfg.corner_band[1] * r },
            })
        }
        other => Arc::new(other.clone()),
    })
}

fn defining(domain: &Arc<DomainSpec>) -> Result<ModelExpansion> {
    if domain.region().is_none() {
        return Err(Error::InvalidParameter(format!("domain {} has no defining region", domain.name())));
    }
    Ok(ModelExpansion::Defining { domain: domain.clone() })
}

/// Solves the blow-up problem on `domain` with the given boundary treatment.
pub fn solve_blowup(domain: Arc<DomainSpec>, mode: &BoundaryMode, cfg: &SolverConfig) -> Result<GridSolution> {
    let grid = Arc::new(discretize(domain.clone(), cfg.h, cfg.lattice_offset)?);
    solve_on_grid(grid, mode, cfg)
}

pub fn solve_on_grid(grid: Arc<Grid>, mode: &BoundaryMode, cfg: &SolverConfig) -> Result<GridSolution> {
    let domain = grid.domain.clone();
    let zero = |_: Point2| Ok(0.0);
    match mode {
        BoundaryMode::Matched { model } => {
            let bg = matched_background(&domain, model, cfg)?;
            let (b, lap) = node_jets(&grid, bg.as_ref())?;
            let mut prob = Problem::new(&grid, b, &lap, &zero)?;
            let mut w = vec![0.0; grid.len()];
            let stats = prob.solve(&mut w, &cfg.newton)?;
            let u = prob.background().iter().zip(&w).map(|(b, w)| b + w).collect();
            Ok(GridSolution {
                grid,
                background: bg,
                w,
                u,
                trust_factor: cfg.trust_factor,
                report: SolveReport {
                    mode: format!("matched({})", model.name()),
                    newton_iterations: stats.iterations,
                    residual: stats.residual,
                    k_history: vec![],
                    settled: true,
                    residual_history: stats.history,
                },
            })
        }
        BoundaryMode::ConstantK { ks, reference } => {
            if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter("k sequence must be non-empty and strictly increasing".into()));
            }
            let reference: Arc<dyn Field> = match reference {
                Some(m) => matched_background(&domain, m, cfg)?,
                None => Arc::new(defining(&domain)?),
            };
            let ref_jets: Vec<crate::field::Jet> = grid.nodes.par_iter().map(|n| reference.jet(n.p)).collect::<Result<Vec<_>>>()?;
            let trust: Vec<bool> = grid.nodes.iter().map(|n| n.d >= cfg.trust_factor * grid.h).collect();
            let mut prev_u: Option<Vec<f64>> = None;
            let mut report = SolveReport { mode: "constant-k".into(), ..Default::default() };
            let mut last = None;
            let mut symbolic = None;
            for &k in ks {
                let soft = SoftMin { reference: reference.clone(), k };
                let (b, lap): (Vec<f64>, Vec<f64>) = ref_jets
                    .iter()
                    .map(|m| {
                        let sigma = 1.0 / (1.0 + (m.value - k).exp());
                        let v = m.value.min(k) - (-(m.value - k).abs()).exp().ln_1p();
                        (v, sigma * m.laplacian - sigma * (1.0 - sigma) * m.grad.norm2())
                    })
                    .unzip();
                let mut prob = Problem::new(&grid, b.clone(), &lap, &zero)?;
                if let Some(s) = symbolic.take() {
                    prob.set_symbolic(s);
                }
                let mut w: Vec<f64> = match &prev_u {
                    Some(pu) => pu.iter().zip(&b).map(|(u, b)| u - b).collect(),
                    None => vec![0.0; grid.len()],
                };
                let stats = prob.solve(&mut w, &cfg.newton)?;
                symbolic = prob.take_symbolic();
                report.newton_iterations += stats.iterations;
                report.residual = stats.residual;
                report.residual_history = stats.history;
                let u: Vec<f64> = b.iter().zip(&w).map(|(b, w)| b + w).collect();
                let mut inc = f64::INFINITY;
                let mut min_change = f64::INFINITY;
                if let Some(pu) = &prev_u {
                    inc = 0.0;
                    for i in 0..u.len() {
                        min_change = min_change.min(u[i] - pu[i]);
                        if pu[i] > u[i] + cfg.monotone_tol {
                            return Err(Error::Sequence(format!("u_k decreased by {:e} at node {i} when k rose to {k}", pu[i] - u[i])));
                        }
                        if trust[i] {
                            inc = inc.max((u[i] - pu[i]).abs());
                        }
                    }
                }
                report.k_history.push(KStep { k, increment: inc, min_change });
                last = Some((soft, w));
                prev_u = Some(u);
                if inc < cfg.increment_tol {
                    report.settled = true;
                    break;
                }
            }
            let (soft, w) = last.expect("at least one k");
            Ok(GridSolution { grid, background: Arc::new(soft), w, u: prev_u.expect("at least one k"), trust_factor: cfg.trust_factor, report })
        }
    }
}

/// Dirichlet problem `Delta u = e^{2u}` with bounded data `g` on the boundary.
pub fn solve_dirichlet(domain: Arc<DomainSpec>, g: &dyn Field, cfg: &SolverConfig) -> Result<GridSolution> {
    let grid = Arc::new(discretize(domain, cfg.h, cfg.lattice_offset)?);
    let n = grid.len();
    let data = |p: Point2| g.value(p);
    let mut prob = Problem::new(&grid, vec![0.0; n], &vec![0.0; n], &data)?;
    let mut w = vec![0.0; n];
    let stats = prob.solve(&mut w, &cfg.newton)?;
    Ok(GridSolution {
        grid,
        background: Arc::new(ZeroBackground),
        u: w.clone(),
        w,
        trust_factor: cfg.trust_factor,
        report: SolveReport {
            mode: "dirichlet".into(),
            newton_iterations: stats.iterations,
            residual: stats.residual,
            k_history: vec![],
            settled: true,
            residual_history: stats.history,
        },
    })
}

/// Value of the discrete solution at `p` inside the trust region: the background
/// exactly plus the bilinear interpolant of `w`.
pub fn evaluate(sol: &GridSolution, p: Point2) -> Result<f64> {
    let g = &sol.grid;
    let dr = g.domain.distance_to_boundary(p)?;
    if dr.d < sol.trust_radius() {
        return Err(Error::InvalidQuery(format!("d = {} is outside the trust region d >= {}", dr.d, sol.trust_radius())));
    }
    let (i, j) = g.cell_of(p);
    let mut idx = [0usize; 4];
    for (k, (di, dj)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        idx[k] = g.index_of(i + di, j + dj).ok_or_else(|| Error::InvalidQuery("cell corner outside the grid".into()))?;
    }
    let p00 = g.position(i, j);
    let tx = (p.x - p00.x) / g.h;
    let ty = (p.y - p00.y) / g.h;
    let w = &sol.w;
    let wi = (1.0 - tx) * (1.0 - ty) * w[idx[0]] + tx * (1.0 - ty) * w[idx[1]] + (1.0 - tx) * ty * w[idx[2]] + tx * ty * w[idx[3]];
    Ok(sol.background.value(p)? + wi)
}

impl Field for GridSolution {
    fn value(&self, p: Point2) -> Result<f64> {
        evaluate(self, p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub max_error: f64,
    pub nodes: usize,
    /// Observed order against the previous (coarser) row.
    pub order: Option<f64>,
}

/// Max nodal error against `exact` on `{d >= min_distance}` for each spacing.
pub fn convergence_study(
    domain: Arc<DomainSpec>,
    exact: &dyn Field,
    mode: &BoundaryMode,
    hs: &[f64],
    cfg: &SolverConfig,
    min_distance: f64,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &h in hs {
        let c = SolverConfig { h, ..cfg.clone() };
        let sol = solve_blowup(domain.clone(), mode, &c)?;
        let errs: Vec<Result<f64>> =
            sol.grid.nodes.par_iter().zip(&sol.u).filter(|(n, _)| n.d >= min_distance).map(|(n, u)| Ok((u - exact.value(n.p)?).abs())).collect();
        let mut e = 0.0f64;
        let mut count = 0;
        for r in errs {
            e = e.max(r?);
            count += 1;
        }
        if count == 0 {
            return Err(Error::InsufficientSamples { found: 0, needed: 1 });
        }
        let order = rows.last().map(|prev| (prev.max_error / e).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow { h, max_error: e, nodes: count, order });
    }
    Ok(rows)
}

/// Self-convergence against a fine reference solution on a nested lattice.
///
/// Errors are measured on the trust region of the coarsest grid so every row sees the same point set.
pub fn self_convergence(domain: Arc<DomainSpec>, mode: &BoundaryMode, hs: &[f64], h_ref: f64, cfg: &SolverConfig) -> Result<Vec<ConvergenceRow>> {
    let reference = solve_blowup(domain.clone(), mode, &SolverConfig { h: h_ref, ..cfg.clone() })?;
    let d_min = cfg.trust_factor * hs.iter().cloned().fold(0.0, f64::max);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &h in hs {
        let ratio = h / h_ref;
        if (ratio - ratio.round()).abs() > 1e-9 || cfg.lattice_offset != [0.0, 0.0] {
            return Err(Error::InvalidParameter("self-convergence needs nested lattices through the origin".into()));
        }
        let m = ratio.round() as i64;
        let sol = solve_blowup(domain.clone(), mode, &SolverConfig { h, ..cfg.clone() })?;
        let mut e = 0.0f64;
        let mut count = 0;
        for (k, n) in sol.grid.nodes.iter().enumerate() {
            if n.d < d_min {
                continue;
            }
            if let Some(r) = reference.grid.index_of(n.i * m, n.j * m) {
                e = e.max((sol.u[k] - reference.u[r]).abs());
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InsufficientSamples { found: 0, needed: 1 });
        }
        let order = rows.last().map(|prev| (prev.max_error / e).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow { h, max_error: e, nodes: count, order });
    }
    Ok(rows)
}
