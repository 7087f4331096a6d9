//! Construction of a lattice with a full-dimension set of bad grid
//! offsets, from a continued fraction with rapidly growing quotients.
//!
//! The orbit of x_alpha dips below the threshold once per convergent; each
//! dip excludes a neighborhood of a discrete subgroup of offsets, and the
//! surviving offsets form a nested interval family whose hierarchical
//! (equal-split) measure satisfies a mass-distribution bound, forcing the
//! dimension of the intersection toward 1.
//!
//! All endpoints, spacings and exclusion radii are exact rationals: with
//! threshold theta the dip at convergent i starts at t_i = ln(q_i/theta),
//! so e^{-t_i} = theta/q_i is rational and so is everything built from it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cf::Convergents;
use crate::dimension::{fit_scales, DimensionEstimate};
use crate::error::{Error, Result};
use crate::exact::{q_ceil_int, q_floor_int, q_ln_abs, q_to_f64, ExactLattice2, Vec2Q};
use crate::lattice::{exact_from_f64, Lattice, Norm};
use crate::util::par_map_ordered;

pub type Q = BigRational;

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// The lattice of a continued fraction [0; n_1, n_2, ...], with its
/// convergents and exact evaluation machinery.
#[derive(Clone, Debug)]
pub struct CfLattice {
    conv: Convergents,
    lattice: Lattice,
    exact: ExactLattice2,
    /// threshold theta for excursions (default 1/10), exact
    theta: Q,
}

impl CfLattice {
    /// Build from partial quotients, keeping depth + 2 of them so every
    /// depth-level quantity is exact. Depth 0 is rejected (alpha = 0).
    pub fn build(n_seq: &[u64], depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InsufficientDepth("depth must be >= 1".into()));
        }
        if depth > n_seq.len() {
            return Err(Error::InsufficientDepth(format!(
                "depth {depth} exceeds the {} supplied quotients",
                n_seq.len()
            )));
        }
        let keep = (depth + 2).min(n_seq.len());
        let conv = Convergents::from_quotients(&n_seq[..keep])?;
        let lattice = Lattice::from_vector_rational(&[conv.value().clone()]);
        let exact = ExactLattice2::from_convergents(&conv);
        Ok(Self {
            conv,
            lattice,
            exact,
            theta: Q::new(BigInt::one(), BigInt::from(10)),
        })
    }

    pub fn with_threshold(mut self, theta: Q) -> Result<Self> {
        if !theta.is_positive() || theta >= Q::one() {
            return Err(Error::InvalidInput("threshold must lie in (0,1)".into()));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn convergents(&self) -> &Convergents {
        &self.conv
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn exact(&self) -> &ExactLattice2 {
        &self.exact
    }

    pub fn theta(&self) -> &Q {
        &self.theta
    }

    pub fn ln_theta(&self) -> f64 {
        q_ln_abs(&self.theta)
    }
}

/// Exact data of excursion i: the dip interval (t_i, s_{i+1}), its
/// governing lattice vector, and the spacing of the axis subgroup cut out
/// by translates of the governing line.
#[derive(Clone, Debug)]
pub struct ExcursionDatum {
    pub index: usize,
    /// dip start: ln lambda1 crosses the threshold going down
    pub t_i: f64,
    /// dip end: recovery time s_{i+1}
    pub s_next: f64,
    /// governing vector (q_i alpha - p_i, q_i), exact
    pub vector: (Q, Q),
    /// spacing of the intersections of translated governing lines with
    /// the horizontal axis, at time t_i
    pub ell: f64,
    /// the same spacing as an exact rational: e^{t_i} = q_i / theta is
    /// rational, so ell = (q_i / theta) / denom(p_i / q_i) is too
    pub ell_exact: Q,
    /// e^{-t_i} = theta / q_i, exact
    pub scale: Q,
}

/// Excursion data for i = 1..=depth. Every datum satisfies the endpoint
/// identities e^{-t_i} |v_2| = theta and e^{s_{i+1}} |v_1| = theta by
/// construction; the caller sees them as log-domain identities.
pub fn excursion_data(cf: &CfLattice, depth: usize) -> Result<Vec<ExcursionDatum>> {
    if depth == 0 || depth + 1 > cf.conv.depth() {
        return Err(Error::InsufficientDepth(format!(
            "need at least {} convergents for depth {depth}",
            depth + 1
        )));
    }
    let theta = &cf.theta;
    let ln_theta = cf.ln_theta();
    let mut out = Vec::with_capacity(depth);
    for i in 1..=depth {
        let (p, q) = cf.conv.pair(i);
        let delta = cf.conv.error(i);
        // a dip exists iff q_i * delta_i < theta^2
        if Q::from_integer(q.clone()) * &delta >= theta * theta {
            return Err(Error::NoDip { index: i });
        }
        let t_i = crate::exact::ln_bigint(q) - ln_theta;
        let s_next = ln_theta - q_ln_abs(&delta);
        // translates of the governing line meet the horizontal axis in the
        // subgroup e^{t_i} (alpha - v_1/v_2) Z + e^{t_i} Z = e^{t_i}/q_i' Z
        let v1 = Q::from_integer(q.clone()) * cf.conv.value() - Q::from_integer(p.clone());
        let v2 = Q::from_integer(q.clone());
        let beta_line = cf.conv.value() - &v1 / &v2;
        let denom = beta_line.denom().clone();
        let scale = theta / Q::from_integer(q.clone());
        // e^{t_i} = 1/scale exactly
        let ell_exact = Q::new(BigInt::one(), BigInt::one()) / (&scale * Q::from_integer(denom));
        out.push(ExcursionDatum {
            index: i,
            t_i,
            s_next,
            vector: (v1, v2),
            ell: q_to_f64(&ell_exact),
            ell_exact,
            scale,
        });
    }
    Ok(out)
}

/// One exclusion level: offsets within `radius` of `spacing * Z` are
/// removed. Both quantities are exact.
#[derive(Clone, Debug)]
pub struct LevelSpec {
    pub spacing: Q,
    pub radius: Q,
}

impl LevelSpec {
    fn from_datum(d: &ExcursionDatum) -> Self {
        // spacing = e^{-t_i} ell_i, radius = 2 e^{-t_i}; both rational
        // because e^{-t_i} = scale is
        LevelSpec {
            spacing: &d.scale * &d.ell_exact,
            radius: &d.scale * q_int(2),
        }
    }

    /// Index range of the surviving pieces [k g + rho, (k+1) g - rho]
    /// clipped to [a, b].
    fn child_range(&self, a: &Q, b: &Q) -> (BigInt, BigInt) {
        // k > (a + rho)/g - 1 and k < (b - rho)/g
        let x = (a + &self.radius) / &self.spacing - Q::one();
        let y = (b - &self.radius) / &self.spacing;
        let k_min = q_floor_int(&x) + 1;
        let k_max = q_ceil_int(&y) - 1;
        (k_min, k_max)
    }

    fn child_bounds(&self, a: &Q, b: &Q, k: &BigInt) -> (Q, Q) {
        let kq = Q::from_integer(k.clone());
        let lo = &kq * &self.spacing + &self.radius;
        let hi = (&kq + Q::one()) * &self.spacing - &self.radius;
        (if &lo > a { lo } else { a.clone() }, if &hi < b { hi } else { b.clone() })
    }
}

/// Nested interval family: the intersection of the per-level survivor
/// sets inside [0, 1], carrying the hierarchical measure that splits each
/// interval's mass over its children proportionally to length (normalized
/// Lebesgue at every level). Children of equal length share equally; the
/// occasional clipped edge interval receives proportionally less, which
/// keeps the density uniform within each interval.
///
/// Shallow levels are materialized exactly; beyond the materialization
/// budget the per-level counts and lengths are extended by the
/// equidistribution recursion (splits ~ length/spacing), which is
/// accurate to about one part in the per-level interval count.
#[derive(Clone, Debug)]
pub struct CantorApprox {
    pub depth: usize,
    pub levels: Vec<LevelSpec>,
    /// exact interval lists for levels 1..=materialized_depth
    materialized: Vec<Vec<(Q, Q)>>,
    /// K_i: interval counts per level (exact up to exact_depth)
    pub counts: Vec<f64>,
    /// L_i: total lengths per level
    pub lengths: Vec<f64>,
    pub exact_depth: usize,
}

/// Build the survivor intersection for the given excursion data.
pub fn bad_interval_sets(
    data: &[ExcursionDatum],
    materialize_budget: usize,
) -> Result<CantorApprox> {
    if data.is_empty() {
        return Err(Error::InsufficientDepth("no excursion data".into()));
    }
    let depth = data.len();
    let levels: Vec<LevelSpec> = data.iter().map(LevelSpec::from_datum).collect();
    for (i, lev) in levels.iter().enumerate() {
        // survivors exist only when the exclusion diameter stays below the
        // spacing, i.e. ell > 4
        if &lev.radius * q_int(2) >= lev.spacing {
            return Err(Error::EmptyIntersection { depth: i + 1 });
        }
    }
    let mut materialized: Vec<Vec<(Q, Q)>> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    let mut lengths: Vec<f64> = Vec::new();
    let mut frontier = vec![(Q::zero(), Q::one())];
    let mut exact_depth = 0usize;
    for (li, lev) in levels.iter().enumerate() {
        // exact child sweep over the frontier
        let mut next: Vec<(Q, Q)> = Vec::new();
        let mut count = 0f64;
        let mut length = 0f64;
        let over_budget = {
            // predicted children: length/spacing per unit
            let predicted: f64 = frontier
                .iter()
                .map(|(a, b)| q_to_f64(&(b - a)) / q_to_f64(&lev.spacing) + 2.0)
                .sum();
            predicted > materialize_budget as f64
        };
        if over_budget {
            break;
        }
        for (a, b) in &frontier {
            let (k_min, k_max) = lev.child_range(a, b);
            let mut k = k_min.clone();
            while k <= k_max {
                let (lo, hi) = lev.child_bounds(a, b, &k);
                if lo < hi {
                    count += 1.0;
                    length += q_to_f64(&(&hi - &lo));
                    next.push((lo, hi));
                }
                k += 1;
            }
        }
        if next.is_empty() {
            return Err(Error::EmptyIntersection { depth: li + 1 });
        }
        counts.push(count);
        lengths.push(length);
        materialized.push(next.clone());
        frontier = next;
        exact_depth = li + 1;
    }
    // extend counts and lengths by the equidistribution recursion
    for li in exact_depth..depth {
        let lev = &levels[li];
        let g = q_to_f64(&lev.spacing);
        let shrink = 1.0 - 2.0 * q_to_f64(&lev.radius) / g;
        let (k_prev, l_prev) = (counts[li - 1], lengths[li - 1]);
        let splits = (l_prev / g - k_prev).max(0.0);
        counts.push(k_prev + splits);
        lengths.push(l_prev * shrink);
    }
    Ok(CantorApprox {
        depth,
        levels,
        materialized,
        counts,
        lengths,
        exact_depth,
    })
}

impl CantorApprox {
    /// Exact interval list of the intersection down to `level` (1-based);
    /// available only within the materialization budget.
    pub fn intervals_at(&self, level: usize) -> Result<&[(Q, Q)]> {
        if level == 0 || level > self.materialized.len() {
            return Err(Error::BudgetExceeded(format!(
                "level {level} not materialized (have {})",
                self.materialized.len()
            )));
        }
        Ok(&self.materialized[level - 1])
    }

    /// Mean per-interval weight at the given materialized level (the
    /// weights are uniform when all intervals at the level have the same
    /// length, as at level 1).
    pub fn weight_at(&self, level: usize) -> Result<f64> {
        self.intervals_at(level)?;
        Ok(1.0 / self.counts[level - 1])
    }

    /// Resolved scale range for mass queries:
    /// [spacing_depth, theta * spacing_1] (the latter is e^{-t_1}).
    pub fn resolved_range(&self) -> (f64, f64) {
        let lo = q_to_f64(&self.levels[self.depth - 1].spacing);
        let hi = q_to_f64(&self.levels[0].radius) / 2.0;
        if lo >= hi {
            // depth-1 families have no deeper structure; extend downward
            (hi / 100.0, hi)
        } else {
            (lo, hi)
        }
    }

    /// Hierarchical mass of the interval [c, d], by exact recursion:
    /// at each level, whole children inside the query are counted
    /// arithmetically and only the two boundary children recurse.
    pub fn mass(&self, c: &Q, d: &Q) -> f64 {
        self.mass_node(&Q::zero(), &Q::one(), 1, 1.0, c, d)
    }

    fn mass_node(&self, a: &Q, b: &Q, level: usize, weight: f64, c: &Q, d: &Q) -> f64 {
        // clamp the query to the node
        let c = if c > a { c.clone() } else { a.clone() };
        let d = if d < b { d.clone() } else { b.clone() };
        if c >= d {
            return 0.0;
        }
        if level > self.depth {
            // uniform within the deepest intervals
            let len = q_to_f64(&(b - a));
            let olap = q_to_f64(&(&d - &c));
            return weight * (olap / len).clamp(0.0, 1.0);
        }
        let lev = &self.levels[level - 1];
        let (k_min, k_max) = lev.child_range(a, b);
        if k_min > k_max {
            return 0.0;
        }
        // whole node inside the query: all children contribute
        if &c <= a && &d >= b {
            return weight;
        }
        // child lengths: interior children are full, the two edge children
        // may be clipped by the node
        let full = q_to_f64(&(&lev.spacing - &lev.radius * q_int(2)));
        let child_len = |k: &BigInt| -> f64 {
            if k == &k_min || k == &k_max {
                let (lo, hi) = lev.child_bounds(a, b, k);
                q_to_f64(&(hi - lo))
            } else {
                full
            }
        };
        let n_children = (&k_max - &k_min + BigInt::one())
            .to_f64()
            .unwrap_or(f64::INFINITY);
        let mut total_len = (n_children - 2.0).max(0.0) * full;
        total_len += child_len(&k_min);
        if k_max > k_min {
            total_len += child_len(&k_max);
        }
        // boundary child indices: first child with hi > c, last with lo < d
        let x = (&c + &lev.radius) / &lev.spacing - Q::one();
        let k_c = (q_floor_int(&x) + BigInt::one()).max(k_min.clone());
        let y = (&d - &lev.radius) / &lev.spacing;
        let k_d = (q_ceil_int(&y) - BigInt::one()).min(k_max.clone());
        if k_c > k_d {
            return 0.0;
        }
        // children strictly between the boundary ones are fully inside:
        // their summed length, with edge-clipped lengths where applicable
        let n_span = (&k_d - &k_c - BigInt::one())
            .to_f64()
            .map(|x| x.max(0.0))
            .unwrap_or(0.0);
        let mut span_len = n_span * full;
        if k_min > k_c && k_min < k_d {
            span_len += child_len(&k_min) - full;
        }
        if k_max > k_c && k_max < k_d {
            span_len += child_len(&k_max) - full;
        }
        let mut total = weight * span_len / total_len;
        let (lo, hi) = lev.child_bounds(a, b, &k_c);
        if lo < hi {
            let w = weight * child_len(&k_c) / total_len;
            total += self.mass_node(&lo, &hi, level + 1, w, &c, &d);
        }
        if k_d > k_c {
            let (lo, hi) = lev.child_bounds(a, b, &k_d);
            if lo < hi {
                let w = weight * child_len(&k_d) / total_len;
                total += self.mass_node(&lo, &hi, level + 1, w, &c, &d);
            }
        }
        total
    }

    /// Deterministic stratified center inside the intersection, anchored
    /// at u in [0, 1]: descend the levels picking the child containing
    /// (or nearest to) the anchor; returns the midpoint of the deepest
    /// interval on that path.
    pub fn center_from_anchor(&self, u: f64) -> Q {
        let mut a = Q::zero();
        let mut b = Q::one();
        let mut anchor = exact_from_f64(u.clamp(0.0, 1.0));
        for lev in &self.levels {
            let (k_min, k_max) = lev.child_range(&a, &b);
            if k_min > k_max {
                break;
            }
            // candidate child: the one whose cell contains the anchor
            let k0 = q_floor_int(&(&anchor / &lev.spacing));
            let k = k0.clamp(k_min.clone(), k_max.clone());
            let (lo, hi) = lev.child_bounds(&a, &b, &k);
            a = lo;
            b = hi;
            if anchor < a {
                anchor = a.clone();
            } else if anchor > b {
                anchor = b.clone();
            }
        }
        (&a + &b) / q_int(2)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MassCheckReport {
    pub max_ratio: f64,
    pub pass: bool,
    pub centers: usize,
    pub radii: usize,
}

/// Mass-distribution check: max over stratified centers x and radii r of
/// mu(B(x, r)) / r^{1-eps}, which must stay at or below 1 on the resolved
/// scale range for the dimension bound to follow.
pub fn mass_distribution_check(
    approx: &CantorApprox,
    eps: f64,
    r_list: &[f64],
    centers: usize,
) -> Result<MassCheckReport> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::InvalidInput("eps must lie in (0,1)".into()));
    }
    let (lo, hi) = approx.resolved_range();
    for &r in r_list {
        if !(lo <= r && r <= hi) {
            return Err(Error::ScaleOutOfRange { r, lo, hi });
        }
    }
    let mut max_ratio = 0.0f64;
    for j in 0..centers {
        let u = (j as f64 + 0.5) / centers as f64;
        let x = approx.center_from_anchor(u);
        for &r in r_list {
            let rq = exact_from_f64(r);
            let c = &x - &rq;
            let d = &x + &rq;
            let mu = approx.mass(&c, &d);
            let ratio = mu / r.powf(1.0 - eps);
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(MassCheckReport {
        max_ratio,
        pass: max_ratio <= 1.0,
        centers,
        radii: r_list.len(),
    })
}

/// Geometric radii ladder spanning the resolved range (endpoints clamped
/// against float drift).
pub fn resolved_radii(approx: &CantorApprox, per_level: usize) -> Vec<f64> {
    let (lo, hi) = approx.resolved_range();
    let n = (approx.depth * per_level).max(4);
    let ratio = (hi / lo).powf(1.0 / (n as f64 - 1.0));
    (0..n)
        .map(|k| (lo * ratio.powi(k as i32)).clamp(lo, hi))
        .collect()
}

/// Box-count slope of the depth-n approximation.
///
/// At scale delta only the levels with exclusion diameter >= delta are
/// visible; the hit-cell count is the interval count at that level plus
/// total length / delta (each interval contributes its ceiling of cells,
/// and the gaps exceed delta so no cell is shared).
pub fn dim_lower_estimate(approx: &CantorApprox) -> Result<DimensionEstimate> {
    let visible = |delta: f64| -> usize {
        let mut j = 0usize;
        for (i, lev) in approx.levels.iter().enumerate() {
            if 2.0 * q_to_f64(&lev.radius) >= delta {
                j = i + 1;
            }
        }
        j
    };
    let count_at = |delta: f64| -> u64 {
        let j = visible(delta);
        if j == 0 {
            (1.0 / delta).ceil() as u64
        } else {
            (approx.counts[j - 1] + approx.lengths[j - 1] / delta).round() as u64
        }
    };
    // scales: geometric ladder from the coarsest exclusion diameter down
    // to the finest; a depth-1 family is scanned above its exclusion
    // scale, where it covers like a full interval
    let (top, bottom) = if approx.depth == 1 {
        (0.5, 2.0 * q_to_f64(&approx.levels[0].radius) * 1.01)
    } else {
        (
            2.0 * q_to_f64(&approx.levels[0].radius) * 0.99,
            2.0 * q_to_f64(&approx.levels[approx.depth - 1].radius) * 0.99,
        )
    };
    let n = (4 * approx.depth).max(8);
    let ratio = (bottom / top).powf(1.0 / (n as f64 - 1.0));
    let scales: Vec<(f64, u64)> = (0..n)
        .map(|k| {
            let d = top * ratio.powi(k as i32);
            (d, count_at(d))
        })
        .collect();
    fit_scales(scales)
}

#[derive(Clone, Debug, Serialize)]
pub struct OffsetSigmaReport {
    pub pass: bool,
    pub min_sigma: f64,
    pub gamma_samples: usize,
    pub t_samples: usize,
}

/// Check that every sampled grid x + (gamma, 0), gamma drawn stratified
/// from the level-i survivor set, keeps its shortest point at norm >= 1
/// throughout the dip [t_i, s_{i+1}]. Exact closest-point evaluations.
pub fn verify_offset_sigma(
    cf: &CfLattice,
    datum: &ExcursionDatum,
    gamma_samples: usize,
    t_samples: usize,
    threads: usize,
) -> Result<OffsetSigmaReport> {
    if gamma_samples == 0 || t_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let lev = LevelSpec::from_datum(datum);
    // survivor pieces inside [0, 1]
    let (k_min, k_max) = lev.child_range(&Q::zero(), &Q::one());
    let pieces = (&k_max - &k_min + BigInt::one())
        .to_f64()
        .unwrap_or(f64::INFINITY);
    if pieces < 1.0 {
        return Err(Error::EmptyIntersection { depth: datum.index });
    }
    // stratified gammas: spread over the pieces, golden stepping inside
    let golden = 0.618033988749895f64;
    let gammas: Vec<Q> = (0..gamma_samples)
        .map(|j| {
            let pos = (j as f64 + 0.5) / gamma_samples as f64 * pieces;
            let k = &k_min + BigInt::from(pos.floor() as i64);
            let (lo, hi) = lev.child_bounds(&Q::zero(), &Q::one(), &k);
            let frac = exact_from_f64((j as f64 * golden).fract());
            &lo + (hi - &lo) * frac
        })
        .collect();
    let ts: Vec<f64> = (0..t_samples)
        .map(|j| {
            if t_samples == 1 {
                datum.t_i
            } else {
                datum.t_i + (datum.s_next - datum.t_i) * j as f64 / (t_samples as f64 - 1.0)
            }
        })
        .collect();
    let exact = cf.exact.clone();
    // values far above 1 are irrelevant: cap the certified search at 4
    let cap_ln = 4f64.ln();
    let results: Vec<Result<f64>> = par_map_ordered(gammas, threads, move |g| {
        let off = Vec2Q::new(g, Q::zero());
        let mut min_ln = f64::INFINITY;
        for &t in &ts {
            let ln = exact.sigma_ln_capped(&off, 1.0, t, Norm::Sup, cap_ln)?;
            min_ln = min_ln.min(ln);
        }
        Ok(min_ln)
    });
    let mut min_ln = f64::INFINITY;
    for r in results {
        min_ln = min_ln.min(r?);
    }
    Ok(OffsetSigmaReport {
        pass: min_ln >= -1e-9,
        min_sigma: min_ln.exp(),
        gamma_samples,
        t_samples,
    })
}

/// Sharpness counterpart: the excluded offset gamma = 0 gives the lattice
/// itself, whose shortest nonzero vector at the dip start has norm exactly
/// theta (the threshold).
pub fn dip_start_lambda1(cf: &CfLattice, datum: &ExcursionDatum) -> f64 {
    cf.exact.lambda1_sup_ln(1.0, datum.t_i).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// max excursion (above-threshold) length: through the dips sigma
    /// stays at or above 1 and can decay by at most e^{-C} in between
    pub c_bound: f64,
    /// radius e^{-C}/2 of the sup ball the sampled grids avoid
    pub radius: f64,
    pub pass: bool,
    pub min_certified_sigma: f64,
    pub grids_checked: usize,
}

/// Assembled witness for the headline construction: sampled offsets
/// (gamma, s) with gamma in the depth-level intersection and s in [-1, 1]
/// give grids that avoid the sup ball of radius e^{-C}/2 at every time in
/// [0, t_depth].
///
/// Certification: sigma is 1-Lipschitz in log scale along the flow, so a
/// sample grid of step h with sigma >= radius e^{h/2} everywhere certifies
/// sigma >= radius between samples. An avoided ball means the grid meets
/// the spike of that ball in at most the finitely many points already
/// inside it at time 0.
pub fn proposition_witness(
    cf: &CfLattice,
    data: &[ExcursionDatum],
    approx: &CantorApprox,
    gamma_samples: usize,
    s_samples: usize,
    threads: usize,
) -> Result<WitnessReport> {
    if data.is_empty() {
        return Err(Error::InsufficientDepth("no excursion data".into()));
    }
    // excursion lengths: [s_i, t_i] with s_1 = 0
    let mut c_bound = data[0].t_i; // first excursion [0, t_1]
    for w in data.windows(2) {
        c_bound = c_bound.max(w[1].t_i - w[0].s_next);
    }
    let radius = 0.5 * (-c_bound).exp();
    let t_max = data[data.len() - 1].t_i;
    let step = 0.25f64;
    let n_steps = (t_max / step).ceil() as usize + 1;
    let margin = radius * (step / 2.0).exp();
    let mut grids = Vec::new();
    for j in 0..gamma_samples {
        let gamma = approx.center_from_anchor((j as f64 + 0.5) / gamma_samples as f64);
        for k in 0..s_samples {
            let s = -1.0 + 2.0 * (k as f64 + 0.5) / s_samples as f64;
            grids.push((gamma.clone(), exact_from_f64(s)));
        }
    }
    let grids_checked = grids.len();
    let exact = cf.exact.clone();
    let cap_ln = margin.ln() + 1.0;
    let mins: Vec<Result<f64>> = par_map_ordered(grids, threads, move |(gamma, s)| {
        let off = Vec2Q::new(gamma, s);
        let mut min_ln = f64::INFINITY;
        for j in 0..n_steps {
            let t = (j as f64 * step).min(t_max);
            let ln = exact.sigma_ln_capped(&off, 1.0, t, Norm::Sup, cap_ln)?;
            min_ln = min_ln.min(ln);
            if min_ln < margin.ln() {
                break;
            }
        }
        Ok(min_ln)
    });
    let mut min_ln = f64::INFINITY;
    for r in mins {
        min_ln = min_ln.min(r?);
    }
    Ok(WitnessReport {
        c_bound,
        radius,
        pass: min_ln >= margin.ln(),
        min_certified_sigma: min_ln.exp(),
        grids_checked,
    })
}
