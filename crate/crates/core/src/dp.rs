//! Backward induction for the truncated single-experiment problem and the
//! fixed-point search for the optimal rejection cost.
//!
//! The single-experiment problem charges κ for abandoning the current
//! experiment and asks for the cheapest way to reach the acceptance region:
//!
//!   W(n, S) = 0                                   S in the acceptance region
//!   W(k, S) = κ + c                               otherwise, at the horizon
//!   W(n, S) = min{ 1 + E[W(n+1, ·) | S],  κ + c } otherwise
//!
//! Rejecting charges the flat restart cost; continuing pays one observation
//! and moves the sufficient statistic by its posterior predictive step. At
//! the right κ the thresholds of this problem are the optimal rejection
//! thresholds of the full renewal problem, and that κ is the fixed point of
//! f(κ) = 1 + E[W(1, S₁ | κ)]: f(κ) < κ above the fixed point and
//! f(κ) > κ below it, which is what the bisection exploits. A fixed
//! per-experiment cost c enters as κ + c in the reject branch.
//!
//! The Bernoulli lattice is solved exactly. The Normal model runs on the
//! posterior-mean martingale Y_n = (γμ₀ + S_n)/(n + γ), whose innovations
//! shrink like σ²/((n+γ)(n+γ+1)), so one fixed grid covers every n; the
//! transition kernel is cell-integrated (CDF differences) while it is wide
//! enough to resolve, and switches to a variance-matched three-point step
//! once it narrows below a cell.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundarySeries;
use crate::error::{Error, Result};
use crate::model::{DiscoveryCriterion, ExperimentState, ModelSpec};
use crate::special::normal_cdf;

/// Default number of Y-grid points for the Normal model.
pub const DEFAULT_GRID_POINTS: u32 = 4001;

/// Default half-width of the Y grid, in prior standard deviations around s.
const GRID_HALF_WIDTH_SIGMA0: f64 = 8.0;

/// Maximum rejection-cost bracket before the search is declared divergent.
const MAX_KAPPA: f64 = (1u64 << 40) as f64;

/// Entry mass allowed to fall off the grid before the problem is rejected.
const MAX_ENTRY_LEAKAGE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Problem description
// ---------------------------------------------------------------------------

/// State-space discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// The exact integer lattice S ∈ [0, n] (Bernoulli model).
    ExactLattice,
    /// Uniform grid on the posterior-mean axis (Normal model).
    YGrid { lo: f64, hi: f64, points: u32 },
}

/// The k-truncated single-experiment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedProblem {
    pub model: ModelSpec,
    pub criterion: DiscoveryCriterion,
    pub k: u32,
    pub c: f64,
    pub grid: GridSpec,
}

impl TruncatedProblem {
    /// Builds a problem with the default discretization for the model.
    pub fn new(model: ModelSpec, criterion: DiscoveryCriterion, k: u32, c: f64) -> Result<Self> {
        let grid = match model {
            ModelSpec::BetaBernoulli { .. } => GridSpec::ExactLattice,
            ModelSpec::NormalKnownVariance { sigma0, .. } => GridSpec::YGrid {
                lo: criterion.s - GRID_HALF_WIDTH_SIGMA0 * sigma0,
                hi: criterion.s + GRID_HALF_WIDTH_SIGMA0 * sigma0,
                points: DEFAULT_GRID_POINTS,
            },
        };
        Self::with_grid(model, criterion, k, c, grid)
    }

    pub fn with_grid(
        model: ModelSpec,
        criterion: DiscoveryCriterion,
        k: u32,
        c: f64,
        grid: GridSpec,
    ) -> Result<Self> {
        let problem = Self {
            model,
            criterion,
            k,
            c,
            grid,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.criterion.validate_for(&self.model)?;
        if self.k == 0 {
            return Err(Error::Config("truncation horizon k must be at least 1".into()));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!(
                "fixed cost c must be finite and non-negative, got {}",
                self.c
            )));
        }
        match (&self.model, &self.grid) {
            (ModelSpec::BetaBernoulli { .. }, GridSpec::ExactLattice) => {}
            (ModelSpec::NormalKnownVariance { .. }, GridSpec::YGrid { lo, hi, points }) => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Config(format!("bad grid range [{lo}, {hi}]")));
                }
                if *points < 3 || points % 2 == 0 {
                    return Err(Error::Config(format!(
                        "grid points must be odd and at least 3, got {points}"
                    )));
                }
            }
            _ => {
                return Err(Error::Config(
                    "grid kind does not match the model variant".into(),
                ))
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Outputs
// ---------------------------------------------------------------------------

/// Result of one backward-induction pass at a fixed rejection cost.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionOutcome {
    /// r̄_n at index n−1, in statistic units: the largest lattice value that
    /// is rejected, or the upper cell edge of the reject region on a grid.
    /// `None` means the policy never rejects at that n.
    pub thresholds: Vec<Option<f64>>,
    /// f(κ) = 1 + E[W(1, S₁ | κ)].
    pub f_value: f64,
}

/// One evaluation of the bisection trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub kappa: f64,
    pub f: f64,
}

/// Converged policy for the truncated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub model: ModelSpec,
    pub criterion: DiscoveryCriterion,
    pub k: u32,
    pub c: f64,
    pub kappa_star: f64,
    /// Acceptance boundary a_1..a_k in statistic units.
    pub a: Vec<Option<f64>>,
    /// Rejection thresholds r_1..r_k in statistic units.
    pub r: Vec<Option<f64>>,
    pub grid: GridSpec,
    pub iterations: Vec<BisectionStep>,
}

impl PolicyTable {
    /// W_k(n, S | κ*): expected remaining cost of the converged policy,
    /// recomputed on demand from the stored boundaries.
    pub fn value_at(&self, state: ExperimentState) -> Result<f64> {
        state.validate_for(&self.model)?;
        if state.n == 0 || state.n > self.k {
            return Err(Error::HorizonExceeded {
                n: state.n,
                horizon: self.k,
            });
        }
        let reject_cost = self.kappa_star + self.c;
        match self.model {
            ModelSpec::BetaBernoulli { .. } => {
                let sweep = LatticeSweep::new(&self.model, &self.a, self.k, reject_cost)?;
                let mut w = vec![0.0; self.k as usize + 1];
                sweep.terminal_row(&mut w);
                for n in (state.n..self.k).rev() {
                    sweep.step_into(n, &mut w);
                }
                Ok(w[state.s as usize])
            }
            ModelSpec::NormalKnownVariance { .. } => {
                let sweep = GridSweep::new(&self.model, &self.a, self.grid, self.k, reject_cost)?;
                let mut w = vec![0.0; sweep.points];
                let mut next = vec![0.0; sweep.points];
                sweep.terminal_row(&mut next);
                for n in (state.n..self.k).rev() {
                    sweep.step(n, &next, &mut w);
                    core::mem::swap(&mut w, &mut next);
                }
                let y = self.model.posterior_mean_unchecked(state);
                let idx = sweep.cell_of(y).ok_or_else(|| {
                    Error::Domain(format!("posterior mean {y} lies outside the grid"))
                })?;
                Ok(next[idx])
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Holds the problem plus the precomputed acceptance boundaries.
#[derive(Debug, Clone)]
pub struct DpSolver {
    problem: TruncatedProblem,
    boundaries: BoundarySeries,
}

impl DpSolver {
    pub fn new(problem: TruncatedProblem) -> Result<Self> {
        problem.validate()?;
        let boundaries = BoundarySeries::compute(problem.model, problem.criterion, problem.k)?;
        let solver = Self {
            problem,
            boundaries,
        };
        solver.check_grid_coverage()?;
        Ok(solver)
    }

    pub fn problem(&self) -> &TruncatedProblem {
        &self.problem
    }

    pub fn boundaries(&self) -> &BoundarySeries {
        &self.boundaries
    }

    fn check_grid_coverage(&self) -> Result<()> {
        let GridSpec::YGrid { lo, hi, points } = self.problem.grid else {
            return Ok(());
        };
        let model = &self.problem.model;
        let gamma = model.gamma().expect("normal model");
        let ModelSpec::NormalKnownVariance { mu0, sigma, .. } = *model else {
            unreachable!()
        };
        // the first posterior mean must land on the grid
        let sd1 = sigma / libm::sqrt(gamma * (gamma + 1.0));
        let h = (hi - lo) / (points as f64 - 1.0);
        let leak = normal_cdf((lo - 0.5 * h - mu0) / sd1)
            + (1.0 - normal_cdf((hi + 0.5 * h - mu0) / sd1));
        if leak > MAX_ENTRY_LEAKAGE {
            return Err(Error::GridTooCoarse(format!(
                "{leak:.3e} of the first-step mass falls outside [{lo}, {hi}]; widen or recenter the grid"
            )));
        }
        // the acceptance region must be visible at the flattest boundary
        let a_k = self.boundaries.acceptance(self.problem.k)?.expect("normal boundary");
        let y_acc = (a_k + gamma * mu0) / (self.problem.k as f64 + gamma);
        if y_acc >= hi {
            return Err(Error::GridTooCoarse(format!(
                "acceptance boundary {y_acc} at the horizon lies above the grid top {hi}"
            )));
        }
        Ok(())
    }

    /// One backward-induction pass at rejection cost `kappa`.
    pub fn backward_induction(&self, kappa: f64) -> Result<InductionOutcome> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!(
                "rejection cost must be positive and finite, got {kappa}"
            )));
        }
        let reject_cost = kappa + self.problem.c;
        let k = self.problem.k;
        let mut thresholds: Vec<Option<f64>> = vec![None; k as usize];
        match self.problem.model {
            ModelSpec::BetaBernoulli { .. } => {
                let sweep =
                    LatticeSweep::new(&self.problem.model, self.boundaries.values(), k, reject_cost)?;
                let mut w = vec![0.0; k as usize + 1];
                thresholds[k as usize - 1] = sweep.terminal_row(&mut w);
                for n in (1..k).rev() {
                    thresholds[n as usize - 1] = sweep.step_into(n, &mut w);
                }
                Ok(InductionOutcome {
                    thresholds,
                    f_value: sweep.f_value(&w),
                })
            }
            ModelSpec::NormalKnownVariance { .. } => {
                let sweep = GridSweep::new(
                    &self.problem.model,
                    self.boundaries.values(),
                    self.problem.grid,
                    k,
                    reject_cost,
                )?;
                let mut next = vec![0.0; sweep.points];
                let mut w = vec![0.0; sweep.points];
                thresholds[k as usize - 1] = sweep.terminal_row(&mut next);
                for n in (1..k).rev() {
                    thresholds[n as usize - 1] = sweep.step(n, &next, &mut w);
                    core::mem::swap(&mut w, &mut next);
                }
                Ok(InductionOutcome {
                    thresholds,
                    f_value: sweep.f_value(&next),
                })
            }
        }
    }

    /// Bisection on f(κ) − κ down to `tol` (relative); returns the policy
    /// at the fixed point κ* ≈ T_k*.
    pub fn solve_optimal(&self, tol: f64) -> Result<PolicyTable> {
        self.solve_optimal_from(tol, 2.0)
    }

    /// Same as [`solve_optimal`](Self::solve_optimal) but starting the
    /// bracket expansion at `initial_hi`; two starts converging to the same
    /// κ* is the fixed-point uniqueness probe used in tests.
    pub fn solve_optimal_from(&self, tol: f64, initial_hi: f64) -> Result<PolicyTable> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        if self
            .boundaries
            .values()
            .iter()
            .all(|boundary| boundary.is_none())
        {
            return Err(Error::NonConvergence(format!(
                "the discovery criterion is unreachable within k = {} observations",
                self.problem.k
            )));
        }

        let mut trace: Vec<BisectionStep> = Vec::new();
        let eval = |kappa: f64, trace: &mut Vec<BisectionStep>| -> Result<InductionOutcome> {
            let outcome = self.backward_induction(kappa)?;
            trace.push(BisectionStep {
                kappa,
                f: outcome.f_value,
            });
            Ok(outcome)
        };

        // W >= 0 gives f(kappa) >= 1, so kappa = 1 always sits at or below
        // the fixed point.
        let mut lo = 1.0;
        let first = eval(lo, &mut trace)?;
        if (first.f_value - lo).abs() <= tol * lo {
            return Ok(self.assemble(lo, first, trace));
        }

        let mut hi = initial_hi.max(lo * 2.0);
        loop {
            let outcome = eval(hi, &mut trace)?;
            if outcome.f_value < hi {
                break;
            }
            lo = hi;
            hi *= 2.0;
            if hi > MAX_KAPPA {
                return Err(Error::NonConvergence(format!(
                    "f(kappa) >= kappa beyond kappa = {MAX_KAPPA:e}; expected discovery time diverges"
                )));
            }
        }

        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let outcome = eval(mid, &mut trace)?;
            if outcome.f_value > mid {
                lo = mid;
            } else {
                hi = mid;
            }
            // residual within tolerance and bracket pinned, so the answer
            // does not depend on where the expansion started
            if (outcome.f_value - mid).abs() <= tol * mid && (hi - lo) <= tol * mid {
                return Ok(self.assemble(mid, outcome, trace));
            }
        }
        Err(Error::NonConvergence(
            "bisection did not meet the tolerance within 200 iterations".into(),
        ))
    }

    fn assemble(
        &self,
        kappa_star: f64,
        outcome: InductionOutcome,
        trace: Vec<BisectionStep>,
    ) -> PolicyTable {
        PolicyTable {
            model: self.problem.model,
            criterion: self.problem.criterion,
            k: self.problem.k,
            c: self.problem.c,
            kappa_star,
            a: self.boundaries.values().to_vec(),
            r: outcome.thresholds,
            grid: self.problem.grid,
            iterations: trace,
        }
    }
}

/// Convenience wrapper: build the solver and run the fixed-point search.
pub fn solve_optimal(problem: TruncatedProblem, tol: f64) -> Result<PolicyTable> {
    DpSolver::new(problem)?.solve_optimal(tol)
}

// ---------------------------------------------------------------------------
// Bernoulli lattice sweep
// ---------------------------------------------------------------------------

struct LatticeSweep<'a> {
    a_shape: f64,
    b_shape: f64,
    accept: &'a [Option<f64>],
    k: u32,
    reject_cost: f64,
}

impl<'a> LatticeSweep<'a> {
    fn new(
        model: &ModelSpec,
        accept: &'a [Option<f64>],
        k: u32,
        reject_cost: f64,
    ) -> Result<Self> {
        let ModelSpec::BetaBernoulli { a, b } = *model else {
            return Err(Error::Config("lattice sweep requires the Bernoulli model".into()));
        };
        if accept.len() < k as usize {
            return Err(Error::Config("acceptance boundaries shorter than horizon".into()));
        }
        Ok(Self {
            a_shape: a,
            b_shape: b,
            accept,
            k,
            reject_cost,
        })
    }

    #[inline]
    fn accepts(&self, n: u32, hits: u32) -> bool {
        match self.accept[n as usize - 1] {
            Some(a_n) => (hits as f64) >= a_n,
            None => false,
        }
    }

    /// Fills W(k, ·); returns r_k (every non-accepted state rejects).
    fn terminal_row(&self, w: &mut [f64]) -> Option<f64> {
        let mut largest_rejected = None;
        for hits in 0..=self.k {
            w[hits as usize] = if self.accepts(self.k, hits) {
                0.0
            } else {
                largest_rejected = Some(hits as f64);
                self.reject_cost
            };
        }
        largest_rejected
    }

    /// In-place transform of row n+1 into row n; safe because position S
    /// only reads positions S and S+1 of the old row.
    fn step_into(&self, n: u32, w: &mut [f64]) -> Option<f64> {
        let total = self.a_shape + self.b_shape + n as f64;
        let mut largest_rejected = None;
        for hits in 0..=n {
            let idx = hits as usize;
            if self.accepts(n, hits) {
                w[idx] = 0.0;
                continue;
            }
            let p = (self.a_shape + hits as f64) / total;
            let cont = 1.0 + p * w[idx + 1] + (1.0 - p) * w[idx];
            // ties break toward Continue
            if self.reject_cost < cont {
                w[idx] = self.reject_cost;
                largest_rejected = Some(hits as f64);
            } else {
                w[idx] = cont;
            }
        }
        largest_rejected
    }

    fn f_value(&self, w1: &[f64]) -> f64 {
        let p1 = self.a_shape / (self.a_shape + self.b_shape);
        1.0 + p1 * w1[1] + (1.0 - p1) * w1[0]
    }
}

// ---------------------------------------------------------------------------
// Normal grid sweep
// ---------------------------------------------------------------------------

struct GridSweep {
    mu0: f64,
    sigma: f64,
    gamma: f64,
    lo: f64,
    h: f64,
    points: usize,
    /// Acceptance boundary per n in posterior-mean units.
    y_accept: Vec<f64>,
    k: u32,
    reject_cost: f64,
}

impl GridSweep {
    fn new(
        model: &ModelSpec,
        accept: &[Option<f64>],
        grid: GridSpec,
        k: u32,
        reject_cost: f64,
    ) -> Result<Self> {
        let ModelSpec::NormalKnownVariance { mu0, sigma, .. } = *model else {
            return Err(Error::Config("grid sweep requires the normal model".into()));
        };
        let GridSpec::YGrid { lo, hi, points } = grid else {
            return Err(Error::Config("grid sweep requires a Y grid".into()));
        };
        if accept.len() < k as usize {
            return Err(Error::Config("acceptance boundaries shorter than horizon".into()));
        }
        let gamma = model.gamma().expect("normal model");
        let y_accept = (1..=k)
            .map(|n| {
                let a_n = accept[n as usize - 1].ok_or_else(|| {
                    Error::Config(format!(
                        "missing acceptance boundary at n = {n}; normal boundaries are always finite"
                    ))
                })?;
                Ok((a_n + gamma * mu0) / (n as f64 + gamma))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            mu0,
            sigma,
            gamma,
            lo,
            h: (hi - lo) / (points as f64 - 1.0),
            points: points as usize,
            y_accept,
            k,
            reject_cost,
        })
    }

    #[inline]
    fn center(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    /// Nearest cell, or `None` outside the grid (beyond half a cell).
    fn cell_of(&self, y: f64) -> Option<usize> {
        let pos = (y - self.lo) / self.h;
        let idx = libm::round(pos);
        if idx < -0.5 || idx > self.points as f64 - 0.5 {
            return None;
        }
        Some((idx.max(0.0) as usize).min(self.points - 1))
    }

    fn step_variance(&self, n: u32) -> f64 {
        let m = n as f64 + self.gamma;
        self.sigma * self.sigma / (m * (m + 1.0))
    }

    /// Cell-integrated transition weights for offsets −d..=d, conserving
    /// mass exactly: outer tails are folded into the extreme offsets. Below
    /// one cell width the kernel degenerates, so a three-point stencil with
    /// the exact step variance stands in.
    fn stencil(&self, var: f64, buf: &mut Vec<f64>) -> usize {
        let sd = libm::sqrt(var);
        buf.clear();
        if sd < self.h {
            let p = var / (2.0 * self.h * self.h);
            buf.extend_from_slice(&[p, 1.0 - 2.0 * p, p]);
            return 1;
        }
        let reach = libm::ceil(8.0 * sd / self.h) as usize + 1;
        let d_max = reach.min(self.points - 1);
        let edge = |d: isize| normal_cdf(((d as f64 + 0.5) * self.h) / sd);
        let mut below = edge(-(d_max as isize) - 1);
        for d in -(d_max as isize)..=(d_max as isize) {
            let up = edge(d);
            buf.push(up - below);
            below = up;
        }
        // fold the residual tails into the extreme cells
        let first = buf.first_mut().expect("non-empty stencil");
        *first += edge(-(d_max as isize) - 1);
        let last = buf.last_mut().expect("non-empty stencil");
        *last += 1.0 - below;
        d_max
    }

    fn terminal_row(&self, w: &mut [f64]) -> Option<f64> {
        let y_acc = self.y_accept[self.k as usize - 1];
        let mut largest_rejected = None;
        for (i, cell) in w.iter_mut().enumerate().take(self.points) {
            if self.center(i) > y_acc {
                *cell = 0.0;
            } else {
                *cell = self.reject_cost;
                largest_rejected = Some(i);
            }
        }
        largest_rejected.map(|i| self.threshold_from_cell(self.k, i))
    }

    /// Upper edge of the last rejected cell, mapped to statistic units.
    fn threshold_from_cell(&self, n: u32, cell: usize) -> f64 {
        let y_edge = self.center(cell) + 0.5 * self.h;
        y_edge * (n as f64 + self.gamma) - self.gamma * self.mu0
    }

    fn step(&self, n: u32, w_next: &[f64], w: &mut [f64]) -> Option<f64> {
        let mut weights = Vec::new();
        let d_max = self.stencil(self.step_variance(n), &mut weights);
        let y_acc = self.y_accept[n as usize - 1];
        let m = self.points;
        let mut largest_rejected = None;
        for (i, cell) in w.iter_mut().enumerate().take(m) {
            if self.center(i) > y_acc {
                *cell = 0.0;
                continue;
            }
            let mut acc = 0.0;
            if i >= d_max && i + d_max < m {
                let base = i - d_max;
                for (j, wgt) in weights.iter().enumerate() {
                    acc += wgt * w_next[base + j];
                }
            } else {
                for (j, wgt) in weights.iter().enumerate() {
                    let raw = i as isize + j as isize - d_max as isize;
                    let idx = raw.clamp(0, m as isize - 1) as usize;
                    acc += wgt * w_next[idx];
                }
            }
            let cont = 1.0 + acc;
            if self.reject_cost < cont {
                *cell = self.reject_cost;
                largest_rejected = Some(i);
            } else {
                *cell = cont;
            }
        }
        largest_rejected.map(|i| self.threshold_from_cell(n, i))
    }

    /// 1 + E[W(1, Y₁)] with Y₁ ~ Normal(μ₀, σ²/(γ(γ+1))) integrated per cell.
    fn f_value(&self, w1: &[f64]) -> f64 {
        let sd = self.sigma / libm::sqrt(self.gamma * (self.gamma + 1.0));
        let mut acc = 0.0;
        let mut below = 0.0_f64;
        for (i, &value) in w1.iter().enumerate().take(self.points) {
            let upper = if i + 1 == self.points {
                1.0
            } else {
                normal_cdf((self.center(i) + 0.5 * self.h - self.mu0) / sd)
            };
            acc += (upper - below) * value;
            below = upper;
        }
        1.0 + acc
    }
}
