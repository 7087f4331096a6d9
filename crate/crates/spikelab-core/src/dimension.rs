//! Box-counting dimension estimation in the Euclidean and flow-adapted
//! quasi-metrics, separated-set counts, and the orbit covering-count
//! experiment.
//!
//! The quasi-norm |u|_a = max_j |u_j|^{1/c_j} over the expanding
//! coordinates is dilated by exactly e^t under the flow; its delta-balls
//! are boxes with side lengths 2 delta^{c_j}, so counting hit cells of an
//! anisotropic grid estimates the quasi-metric box dimension.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ExactLattice2, Vec2Q};
use crate::flow::FlowSpec;
use crate::lattice::Norm;
use crate::region::BoxRegion;
use crate::util::ols_fit;

/// Quasi-metric of a flow, restricted to the expanding coordinates.
#[derive(Clone, Debug)]
pub struct QuasiMetric {
    /// positive exponents c_j, in coordinate order
    cs: Vec<f64>,
    /// quasi-triangle constant: d(u,w) <= C (d(u,v) + d(v,w))
    pub triangle_constant: f64,
}

impl QuasiMetric {
    pub fn from_flow(flow: &FlowSpec) -> Self {
        let cs: Vec<f64> = flow
            .exponents()
            .iter()
            .copied()
            .filter(|c| *c > 0.0)
            .collect();
        Self::from_positive_exponents(cs).expect("flow has expanding coordinates")
    }

    pub fn from_positive_exponents(cs: Vec<f64>) -> Result<Self> {
        if cs.is_empty() || cs.iter().any(|c| *c <= 0.0) {
            return Err(Error::InvalidInput(
                "quasi-metric needs positive exponents".into(),
            ));
        }
        // per coordinate, |a+b|^{1/c} <= 2^{max(0, 1/c - 1)} (|a|^{1/c} + |b|^{1/c})
        let triangle_constant = cs
            .iter()
            .map(|c| 2f64.powf((1.0 / c - 1.0).max(0.0)))
            .fold(1.0f64, f64::max);
        Ok(Self {
            cs,
            triangle_constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.cs.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.cs
    }

    /// Sum of the exponents: the quasi-metric box dimension of the full
    /// expanding space.
    pub fn expansion_rate(&self) -> f64 {
        self.cs.iter().sum()
    }

    pub fn quasi_norm(&self, u: &[f64]) -> f64 {
        self.ln_quasi_norm_of_diff(u, &vec![0.0; u.len()]).exp()
    }

    pub fn quasi_dist(&self, u: &[f64], v: &[f64]) -> f64 {
        self.ln_quasi_norm_of_diff(u, v).exp()
    }

    /// ln |u - v|_a = max_j (1/c_j) ln |u_j - v_j|.
    pub fn ln_quasi_norm_of_diff(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.cs.len());
        u.iter()
            .zip(v)
            .zip(&self.cs)
            .map(|((x, y), c)| (x - y).abs().ln() / c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// ln of the distance between the flowed points a_t u and a_t v,
    /// computed in log domain: per coordinate (ln|u_j - v_j| + c_j t)/c_j.
    pub fn ln_quasi_dist_flowed(&self, u: &[f64], v: &[f64], t: f64) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.cs)
            .map(|((x, y), c)| ((x - y).abs().ln() + c * t) / c)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Greedy delta-separated subset size (deterministic insertion order).
/// A maximal separated set is within the doubling constant of the true
/// maximum, which the slope fits absorb. The exact branch-and-bound is
/// available for cross-checks on small instances.
pub fn separated_count(
    points: &[Vec<f64>],
    delta: f64,
    metric: Option<&QuasiMetric>,
) -> usize {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        match metric {
            Some(m) => m.quasi_dist(a, b),
            None => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    };
    let mut kept: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if kept.iter().all(|q| dist(p, q) >= delta) {
            kept.push(p);
        }
    }
    kept.len()
}

/// Exact maximum delta-separated subset size by branch and bound.
/// Exponential worst case; guarded by a node budget.
pub fn separated_count_exact(
    points: &[Vec<f64>],
    delta: f64,
    metric: Option<&QuasiMetric>,
    node_budget: u64,
) -> Result<usize> {
    let greedy_seed = separated_count(points, delta, metric);
    if points.len() > 2000 {
        return Err(Error::BudgetExceeded(
            "exact separated count limited to 2000 points".into(),
        ));
    }
    let n = points.len();
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        match metric {
            Some(m) => m.quasi_dist(a, b),
            None => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    };
    // conflict adjacency
    let mut conflicts = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) < delta {
                conflicts[i][j] = true;
                conflicts[j][i] = true;
            }
        }
    }
    struct Bb<'a> {
        conflicts: &'a [Vec<bool>],
        best: usize,
        nodes: u64,
        budget: u64,
    }
    impl Bb<'_> {
        fn go(&mut self, idx: usize, chosen: &mut Vec<usize>, n: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded(
                    "exact separated count budget".into(),
                ));
            }
            if idx == n {
                self.best = self.best.max(chosen.len());
                return Ok(());
            }
            // bound: even taking everything left cannot beat best
            if chosen.len() + (n - idx) <= self.best {
                return Ok(());
            }
            if chosen.iter().all(|&c| !self.conflicts[c][idx]) {
                chosen.push(idx);
                self.go(idx + 1, chosen, n)?;
                chosen.pop();
            }
            self.go(idx + 1, chosen, n)
        }
    }
    let mut bb = Bb {
        conflicts: &conflicts,
        best: greedy_seed,
        nodes: 0,
        budget: node_budget,
    };
    bb.go(0, &mut Vec::new(), n)?;
    Ok(bb.best)
}

/// Input of a box-counting run: sample points or a union of boxes
/// (counted without sampling error).
#[derive(Clone, Debug)]
pub enum CoverInput {
    Points(Vec<Vec<f64>>),
    Boxes(BoxRegion),
}

/// Metric used for box counting: delta-cells are cubes (Euclidean) or
/// boxes with side lengths delta^{c_j} (quasi).
#[derive(Clone, Debug)]
pub enum CoverMetric {
    Euclidean,
    Quasi(QuasiMetric),
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    /// (delta, hit-cell count) per scale, finest first or as supplied
    pub scales: Vec<(f64, u64)>,
    /// OLS slope of ln N against ln 1/delta
    pub slope: f64,
    pub residual_rms: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

fn cell_sides(metric: &CoverMetric, delta: f64, dim: usize) -> Vec<f64> {
    match metric {
        CoverMetric::Euclidean => vec![delta; dim],
        CoverMetric::Quasi(q) => q.exponents().iter().map(|c| delta.powf(*c)).collect(),
    }
}

/// Number of anisotropic grid cells hit by the input at one scale.
pub fn cover_count(input: &CoverInput, metric: &CoverMetric, delta: f64) -> Result<u64> {
    const CELL_BUDGET: usize = 50_000_000;
    match input {
        CoverInput::Points(pts) => {
            if pts.is_empty() {
                return Err(Error::InvalidInput("no points to cover".into()));
            }
            let dim = pts[0].len();
            let sides = cell_sides(metric, delta, dim);
            let mut cells: HashSet<Vec<i64>> = HashSet::new();
            for p in pts {
                let idx: Vec<i64> = p
                    .iter()
                    .zip(&sides)
                    .map(|(x, s)| (x / s).floor() as i64)
                    .collect();
                cells.insert(idx);
            }
            Ok(cells.len() as u64)
        }
        CoverInput::Boxes(region) => {
            let dim = region.dim();
            let sides = cell_sides(metric, delta, dim);
            let mut cells: HashSet<Vec<i64>> = HashSet::new();
            for b in region.boxes() {
                // per coordinate, cells [i s, (i+1) s) meeting the open (l, u)
                let ranges: Vec<(i64, i64)> = b
                    .iter()
                    .zip(&sides)
                    .map(|(&(l, u), s)| {
                        let lo = (l / s).floor() as i64;
                        let hi = ((u / s).ceil() as i64 - 1).max(lo);
                        (lo, hi)
                    })
                    .collect();
                let total: usize = ranges
                    .iter()
                    .map(|(lo, hi)| (hi - lo + 1) as usize)
                    .product();
                if cells.len() + total > CELL_BUDGET {
                    return Err(Error::BudgetExceeded(format!(
                        "cover count needs more than {CELL_BUDGET} cells"
                    )));
                }
                let mut cursor: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                loop {
                    cells.insert(cursor.clone());
                    let mut k = 0;
                    loop {
                        cursor[k] += 1;
                        if cursor[k] <= ranges[k].1 {
                            break;
                        }
                        cursor[k] = ranges[k].0;
                        k += 1;
                        if k == dim {
                            break;
                        }
                    }
                    if k == dim {
                        break;
                    }
                }
            }
            Ok(cells.len() as u64)
        }
    }
}

/// Box-counting dimension estimate over the given scales (at least 4).
pub fn dim_estimate(
    input: &CoverInput,
    metric: &CoverMetric,
    deltas: &[f64],
) -> Result<DimensionEstimate> {
    if deltas.len() < 4 {
        return Err(Error::InvalidInput("need at least 4 scales".into()));
    }
    if deltas.iter().any(|d| *d <= 0.0) {
        return Err(Error::InvalidInput("scales must be positive".into()));
    }
    let mut scales = Vec::with_capacity(deltas.len());
    for &d in deltas {
        scales.push((d, cover_count(input, metric, d)?));
    }
    fit_scales(scales)
}

pub(crate) fn fit_scales(scales: Vec<(f64, u64)>) -> Result<DimensionEstimate> {
    let counts: Vec<u64> = scales.iter().map(|(_, c)| *c).collect();
    if counts.iter().all(|c| *c == counts[0]) {
        return Err(Error::DegenerateFit("all counts equal".into()));
    }
    let xs: Vec<f64> = scales.iter().map(|(d, _)| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let (slope, _, residual_rms) = ols_fit(&xs, &ys);
    let delta_min = scales.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
    let delta_max = scales
        .iter()
        .map(|(d, _)| *d)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DimensionEstimate {
        scales,
        slope,
        residual_rms,
        delta_min,
        delta_max,
    })
}

/// Dyadic scale ladder 2^-from .. 2^-to inclusive.
pub fn dyadic_scales(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// Report of the orbit covering-count experiment.
#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    /// number of quasi-metric balls of radius r e^{-T} covering the
    /// surviving unstable parameters
    pub count: u64,
    /// the closed-form budget C e^{D |I|}, with e^D = 3 in the
    /// 1-dimensional unstable direction
    pub bound: f64,
    pub base_count: u64,
    pub excursion_times: usize,
    pub leaf_radius: f64,
    pub surviving_measure: f64,
}

/// Covering-count experiment along a d = 2 orbit.
///
/// The set E_{y,T} of unstable perturbations gamma that stay within
/// Euclidean distance r of the orbit of y at every integer time t <= T
/// outside the thin part I is refined level by level: at each time t the
/// surviving intervals are re-sampled at step r e^{-t}/10 and the torus
/// distance is evaluated by the exact flowed closest-point machinery.
/// The final covering by balls of radius r e^{-T} is compared against the
/// budget C 3^{|I|}.
///
/// The fiber distance between the perturbed grid y + (gamma, 0) and y is
/// sigma of the difference grid with offset (gamma, 0): the base grid's
/// own offset cancels, so the experiment is determined by the lattice.
pub fn covering_experiment(
    lattice: &ExactLattice2,
    r: f64,
    t_max: u32,
    thin_threshold: f64,
) -> Result<CoveringReport> {
    if t_max > 25 {
        return Err(Error::BudgetExceeded("covering experiment needs T <= 25".into()));
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::InvalidInput("need 0 < r < 1/2".into()));
    }
    // fiber injectivity radius: half the shortest lattice vector (sup)
    let lambda1 = lattice.lambda1_sup_ln(1.0, 0.0).exp();
    let leaf_radius = 0.5 * lambda1;
    if r >= leaf_radius {
        return Err(Error::InvalidInput(format!(
            "r = {r} must be below the leaf radius {leaf_radius}"
        )));
    }
    // thin-part visits: integer times with lambda1(a_t x) below threshold
    let mut excursion_times = 0usize;
    let mut in_thin = vec![false; t_max as usize + 1];
    for t in 1..=t_max {
        if lattice.lambda1_sup_ln(1.0, t as f64).exp() < thin_threshold {
            in_thin[t as usize] = true;
            excursion_times += 1;
        }
    }
    // level-by-level refinement of surviving intervals of gamma
    let mut intervals: Vec<(f64, f64)> = vec![(-leaf_radius, leaf_radius)];
    for t in 1..=t_max {
        if in_thin[t as usize] {
            continue;
        }
        let tf = t as f64;
        let step = r * (-tf).exp() / 10.0;
        let predicted: f64 = intervals
            .iter()
            .map(|(lo, hi)| (hi - lo) / step + 2.0)
            .sum();
        if predicted > 3e6 {
            return Err(Error::BudgetExceeded(format!(
                "covering refinement needs ~{predicted:e} samples at t = {t}"
            )));
        }
        let mut survivors: Vec<(f64, f64)> = Vec::new();
        for &(lo, hi) in &intervals {
            let samples = ((hi - lo) / step).ceil() as usize + 1;
            let mut run_start: Option<f64> = None;
            let mut prev_ok = f64::NAN;
            for k in 0..=samples {
                let gamma = lo + (hi - lo) * k as f64 / samples as f64;
                // fiber torus distance between the perturbed and base
                // orbits: sigma of the difference grid, offset (gamma, 0)
                let diff = Vec2Q::new(
                    crate::lattice::exact_from_f64(gamma),
                    num_traits::Zero::zero(),
                );
                let d_ln =
                    lattice.sigma_ln_capped(&diff, 1.0, tf, Norm::Euclidean, r.ln() + 1.0)?;
                if d_ln <= r.ln() {
                    if run_start.is_none() {
                        run_start = Some(gamma);
                    }
                    prev_ok = gamma;
                } else if let Some(s) = run_start.take() {
                    survivors.push((s - step / 2.0, prev_ok + step / 2.0));
                }
            }
            if let Some(s) = run_start.take() {
                survivors.push((s - step / 2.0, prev_ok + step / 2.0));
            }
        }
        intervals = survivors;
        if intervals.is_empty() {
            break;
        }
    }
    // cover by quasi-balls of radius r e^{-T}: in the 1-D unstable
    // direction with c = 1 these are intervals of length 2 r e^{-T}
    let ball = 2.0 * r * (-(t_max as f64)).exp();
    let count: u64 = intervals
        .iter()
        .map(|(lo, hi)| ((hi - lo) / ball).ceil().max(1.0) as u64)
        .sum();
    let base_count = (2.0 * leaf_radius / (2.0 * r)).ceil() as u64;
    let bound = base_count as f64 * 3f64.powi(excursion_times as i32);
    Ok(CoveringReport {
        count,
        bound,
        base_count,
        excursion_times,
        leaf_radius,
        surviving_measure: intervals.iter().map(|(lo, hi)| hi - lo).sum(),
    })
}
