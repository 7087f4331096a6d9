//! Orbit-level analysis: shortest-vector time series, threshold
//! excursions, empirical measures along the time-one map, and heaviness
//! diagnostics.
//!
//! All d = 2 computations go through the exact convergent ladder, so deep
//! times (far past float range) are handled without loss. Dimensions 3 and
//! 4 fall back to direct float evaluation under the overflow guard.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ExactLattice2;
use crate::flow::FlowSpec;
use crate::interval::IntervalSet;
use crate::lattice::{Lattice, Norm};

/// Piecewise-linear plateau functions of lambda1 with dyadic thresholds:
/// psi_i = 1 where lambda1 >= 2^-i, 0 where lambda1 <= 2^-(i+1), linear
/// between. Their unit sets grow with i and exhaust the space of lattices
/// with lambda1 bounded below.
#[derive(Clone, Debug)]
pub struct PsiFamily {
    i_max: usize,
}

impl PsiFamily {
    pub fn dyadic(i_max: usize) -> Result<Self> {
        if i_max == 0 || i_max > 60 {
            return Err(Error::InvalidInput("need 1 <= i_max <= 60".into()));
        }
        Ok(Self { i_max })
    }

    pub fn len(&self) -> usize {
        self.i_max
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// psi_i(lambda1), i is 1-based.
    pub fn eval(&self, i: usize, lambda1: f64) -> f64 {
        debug_assert!(i >= 1 && i <= self.i_max);
        let hi = 2f64.powi(-(i as i32));
        let lo = hi / 2.0;
        ((lambda1 - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

/// Birkhoff averages of the psi family along the time-one orbit.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalMeasureReport {
    pub t_count: u64,
    /// masses[i-1] = (1/T) sum_{k<T} psi_i(lambda1(a^k x))
    pub masses: Vec<f64>,
    pub min_lambda1: f64,
}

/// Interval decomposition of an orbit by a lambda1 threshold.
#[derive(Clone, Debug)]
pub struct ExcursionList {
    pub threshold: f64,
    /// closed intervals where lambda1 >= threshold, within [0, t_max]
    pub above: IntervalSet,
    /// open complementary dips, with the lattice vector governing each
    pub dips: Vec<Dip>,
    pub t_max: f64,
}

/// One sub-threshold dip (t_i, s_{i+1}) and the vector whose flowed norm
/// realizes lambda1 throughout it.
#[derive(Clone, Debug)]
pub struct Dip {
    pub start: f64,
    pub end: f64,
    /// unflowed coordinates of the governing vector
    pub vector: (f64, f64),
}

/// lambda1(a_t x) at each sample time (sup norm).
pub fn lambda1_series(flow: &FlowSpec, x: &Lattice, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "t_grid must be strictly increasing".into(),
        ));
    }
    if x.dim() != flow.dim() {
        return Err(Error::InvalidInput("flow/lattice dimension mismatch".into()));
    }
    if x.dim() == 2 {
        let rate = flow.rate_2d()?;
        let ex = ExactLattice2::from_lattice(x)?;
        Ok(t_grid
            .iter()
            .map(|&t| (t, ex.lambda1_sup_ln(rate, t).exp()))
            .collect())
    } else {
        t_grid
            .iter()
            .map(|&t| Ok((t, x.flow(flow, t)?.lambda1(Norm::Sup)?)))
            .collect()
    }
}

/// Exact excursion decomposition for d = 2: per lattice vector the
/// sub-threshold window solves max(e^{rt}|v1|, e^{-rt}|v2|) = threshold in
/// closed form; the above-threshold set is the complement of their union.
pub fn excursions(
    flow: &FlowSpec,
    x: &Lattice,
    threshold: f64,
    t_max: f64,
) -> Result<ExcursionList> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput("threshold must lie in (0,1)".into()));
    }
    if t_max <= 0.0 {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    let rate = flow.rate_2d()?;
    let ex = ExactLattice2::from_lattice(x)?;
    let windows = ex.sub_threshold_windows(rate, threshold.ln());
    let mut below = IntervalSet::empty();
    for w in &windows {
        let lo = w.lo.max(0.0);
        let hi = w.hi.min(t_max);
        if lo < hi {
            below = below.union(&IntervalSet::single(lo, hi));
        }
    }
    let above = below.complement_within(0.0, t_max);
    let mut dips = Vec::new();
    for &(lo, hi) in below.intervals() {
        // governing vector: the one realizing lambda1 at the dip midpoint
        let mid = 0.5 * (lo + hi);
        let (_, who) = ex.lambda1_sup_ln_governing(rate, mid);
        let v = ex.governing_vector(who);
        dips.push(Dip {
            start: lo,
            end: hi,
            vector: (crate::exact::q_to_f64(&v.x), crate::exact::q_to_f64(&v.y)),
        });
    }
    Ok(ExcursionList {
        threshold,
        above,
        dips,
        t_max,
    })
}

/// Masses of the psi family averaged over a window of the time-one orbit:
/// (1/count) sum_{k=from}^{from+count-1} psi_i(lambda1(a^k x)).
pub fn empirical_masses_window(
    flow: &FlowSpec,
    x: &Lattice,
    from: u64,
    count: u64,
    psi: &PsiFamily,
) -> Result<EmpiricalMeasureReport> {
    if count == 0 {
        return Err(Error::InvalidInput("need at least one orbit point".into()));
    }
    if x.dim() != flow.dim() {
        return Err(Error::InvalidInput("flow/lattice dimension mismatch".into()));
    }
    let mut sums = vec![0.0f64; psi.len()];
    let mut min_l1 = f64::INFINITY;
    if x.dim() == 2 {
        let rate = flow.rate_2d()?;
        let ex = ExactLattice2::from_lattice(x)?;
        for k in from..from + count {
            let l1 = ex.lambda1_sup_ln(rate, k as f64).exp();
            min_l1 = min_l1.min(l1);
            for i in 1..=psi.len() {
                sums[i - 1] += psi.eval(i, l1);
            }
        }
    } else {
        for k in from..from + count {
            let l1 = x.flow(flow, k as f64)?.lambda1(Norm::Sup)?;
            min_l1 = min_l1.min(l1);
            for i in 1..=psi.len() {
                sums[i - 1] += psi.eval(i, l1);
            }
        }
    }
    Ok(EmpiricalMeasureReport {
        t_count: count,
        masses: sums.iter().map(|s| s / count as f64).collect(),
        min_lambda1: min_l1,
    })
}

/// Empirical measure of the first T orbit points of the time-one map.
pub fn empirical_measure(
    flow: &FlowSpec,
    x: &Lattice,
    t_count: u64,
    psi: &PsiFamily,
) -> Result<EmpiricalMeasureReport> {
    empirical_masses_window(flow, x, 0, t_count, psi)
}

/// Finite-scale heaviness verdict. `ConsistentWith` is a witness, never a
/// proof: the defining condition quantifies over all of time, which no
/// finite computation decides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HeavinessVerdict {
    ConsistentWith,
    EscapeObserved,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavinessReport {
    pub rows: Vec<EmpiricalMeasureReport>,
    pub eta: Vec<f64>,
    pub verdict: HeavinessVerdict,
}

/// Evaluate the empirical masses at each horizon in `t_list` and compare
/// against the tolerance sequence eta: the verdict is ConsistentWith when
/// some horizon has masses[i] >= 1 - eta[i] for every i.
pub fn heaviness_profile(
    flow: &FlowSpec,
    x: &Lattice,
    t_list: &[u64],
    eta: &[f64],
    psi: &PsiFamily,
) -> Result<HeavinessReport> {
    if eta.len() != psi.len() {
        return Err(Error::InvalidInput("eta length must match psi family".into()));
    }
    if eta.iter().any(|e| *e < 0.0) || eta.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "eta must be nonnegative and nonincreasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(t_list.len());
    let mut consistent = false;
    for &t_count in t_list {
        let row = empirical_measure(flow, x, t_count, psi)?;
        if row
            .masses
            .iter()
            .zip(eta)
            .all(|(m, e)| *m >= 1.0 - e - 1e-12)
        {
            consistent = true;
        }
        rows.push(row);
    }
    Ok(HeavinessReport {
        rows,
        eta: eta.to_vec(),
        verdict: if consistent {
            HeavinessVerdict::ConsistentWith
        } else {
            HeavinessVerdict::EscapeObserved
        },
    })
}

/// Continued-fraction heaviness statistic:
/// (1/N) sum_{k=1}^{N} max(log(eps * a_k), 0).
/// Small values witness heaviness of the number with those partial
/// quotients; it is monotone in eps and in each quotient.
pub fn cf_heaviness(quotients: &[u64], eps: f64, n: usize) -> Result<f64> {
    if n == 0 || n > quotients.len() {
        return Err(Error::InvalidInput(
            "need 1 <= N <= number of quotients".into(),
        ));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let sum: f64 = quotients[..n]
        .iter()
        .map(|&a| (eps * a as f64).ln().max(0.0))
        .sum();
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::Convergents;

    fn flow2() -> FlowSpec {
        FlowSpec::standard_2d()
    }

    /// x_phi truncated deep enough that the ladder is faithful to the
    /// golden ratio over the sampled horizon.
    fn golden_lattice(depth: usize) -> Lattice {
        let conv = Convergents::from_quotients(&vec![1u64; depth]).unwrap();
        Lattice::from_vector_rational(&[conv.value().clone()])
    }

    #[test]
    fn series_on_standard_lattice() {
        let s = lambda1_series(&flow2(), &Lattice::standard(2), &[0.0, 1.0, 2.0]).unwrap();
        let e = 1f64.exp();
        assert!((s[0].1 - 1.0).abs() < 1e-12);
        assert!((s[1].1 - 1.0 / e).abs() < 1e-12);
        assert!((s[2].1 - 1.0 / (e * e)).abs() < 1e-12);
    }

    #[test]
    fn series_singleton_is_lambda1() {
        let x = golden_lattice(60);
        let s = lambda1_series(&flow2(), &x, &[0.0]).unwrap();
        assert!((s[0].1 - x.lambda1(Norm::Sup).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn golden_orbit_stays_high() {
        // dense scan: lambda1(a_t x_phi) never falls below 0.4 on [0, 20]
        let x = golden_lattice(120);
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
        let s = lambda1_series(&flow2(), &x, &grid).unwrap();
        let min = s.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.4, "golden orbit dipped to {min}");
    }

    #[test]
    fn excursions_z2_single_vector() {
        let ex = excursions(&flow2(), &Lattice::standard(2), 0.5, 4.0).unwrap();
        // lambda1 = e^{-t}: drops below 1/2 at t = ln 2 and never returns
        assert_eq!(ex.above.intervals().len(), 1);
        let (s1, t1) = ex.above.intervals()[0];
        assert!(s1.abs() < 1e-12);
        assert!((t1 - 2f64.ln()).abs() < 1e-12);
        assert_eq!(ex.dips.len(), 1);
        assert!((ex.dips[0].vector.1.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excursions_golden_never_dip() {
        let x = golden_lattice(120);
        let ex = excursions(&flow2(), &x, 0.1, 20.0).unwrap();
        assert_eq!(ex.above.intervals(), &[(0.0, 20.0)]);
        assert!(ex.dips.is_empty());
    }

    #[test]
    fn excursions_first_dip_of_geometric_cf() {
        // alpha = [0; 10, 100, 1000, ...]: t_1 = ln(10 q_1) = ln 100 and
        // s_2 = -ln(10 |q_1 alpha - p_1|)
        let conv = Convergents::from_quotients(&[10, 100, 1000, 10000, 100000]).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let ex = excursions(&flow2(), &x, 0.1, 12.0).unwrap();
        assert!(!ex.dips.is_empty());
        let d = &ex.dips[0];
        assert!((d.start - 100f64.ln()).abs() < 1e-9, "t_1 = {}", d.start);
        let err1 = crate::exact::q_to_f64(&conv.error(1));
        let s2 = -(10.0 * err1).ln();
        assert!((d.end - s2).abs() < 1e-9, "s_2 = {} vs {s2}", d.end);
        // numeric anchors from the exact convergents
        assert!((d.start - 4.6052).abs() < 1e-3);
        assert!((d.end - 4.6062).abs() < 1e-3);
    }

    /// Dip endpoint identities: at a dip governed by v,
    /// e^{-t_i} |v_2| = threshold and e^{s_{i+1}} |v_1| = threshold,
    /// exactly in log domain.
    #[test]
    fn dip_endpoint_identities() {
        let conv = Convergents::from_quotients(&[10, 100, 1000, 10000, 100000]).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let ex = excursions(&flow2(), &x, 0.1, 25.0).unwrap();
        assert!(ex.dips.len() >= 2);
        for d in &ex.dips {
            let (v1, v2) = d.vector;
            let lhs1 = v2.abs().ln() - d.start;
            let lhs2 = v1.abs().ln() + d.end;
            let target = 0.1f64.ln();
            assert!((lhs1 - target).abs() < 1e-9, "start identity");
            assert!((lhs2 - target).abs() < 1e-9, "end identity");
        }
    }

    /// On each dip the governing vector realizes lambda1 at sampled times.
    #[test]
    fn dip_governing_vector_realizes_lambda1() {
        let conv = Convergents::from_quotients(&[10, 100, 1000, 10000, 100000]).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let ex = excursions(&flow2(), &x, 0.1, 25.0).unwrap();
        let exact = ExactLattice2::from_lattice(&x).unwrap();
        for d in &ex.dips {
            for k in 1..10 {
                let t = d.start + (d.end - d.start) * k as f64 / 10.0;
                let l1 = exact.lambda1_sup_ln(1.0, t);
                let (v1, v2) = d.vector;
                let vec_norm = (t + v1.abs().ln()).max(-t + v2.abs().ln());
                assert!((l1 - vec_norm).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empirical_measure_golden_all_ones() {
        // ln q grows by ln(phi) ~ 0.481 per quotient; depth 2200 keeps the
        // ladder faithful past t = 1000
        let x = golden_lattice(2200);
        let psi = PsiFamily::dyadic(5).unwrap();
        let rep = empirical_measure(&flow2(), &x, 1000, &psi).unwrap();
        assert!(rep.masses.iter().all(|m| (*m - 1.0).abs() < 1e-12));
        assert!(rep.min_lambda1 > 0.5);
    }

    #[test]
    fn empirical_measure_single_term() {
        let x = golden_lattice(60);
        let psi = PsiFamily::dyadic(4).unwrap();
        let rep = empirical_measure(&flow2(), &x, 1, &psi).unwrap();
        let l1 = x.lambda1(Norm::Sup).unwrap();
        for i in 1..=4 {
            assert!((rep.masses[i - 1] - psi.eval(i, l1)).abs() < 1e-12);
        }
    }

    /// Averaging: the report over 2T is the mean of the two half-window
    /// reports, by linearity of the Birkhoff sum.
    #[test]
    fn empirical_measure_averages() {
        let conv =
            Convergents::from_quotients(&[10, 100, 1000, 10000, 100000, 1000000]).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let psi = PsiFamily::dyadic(6).unwrap();
        let t = 16u64;
        let full = empirical_measure(&flow2(), &x, 2 * t, &psi).unwrap();
        let a = empirical_masses_window(&flow2(), &x, 0, t, &psi).unwrap();
        let b = empirical_masses_window(&flow2(), &x, t, t, &psi).unwrap();
        for i in 0..psi.len() {
            let mean = 0.5 * (a.masses[i] + b.masses[i]);
            assert!((full.masses[i] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn masses_monotone_in_index() {
        let conv = Convergents::from_quotients(&[10, 100, 1000, 10000]).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let psi = PsiFamily::dyadic(8).unwrap();
        let rep = empirical_measure(&flow2(), &x, 64, &psi).unwrap();
        for w in rep.masses.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
            assert!(w[0] >= 0.0 && w[1] <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn heaviness_golden_consistent() {
        let x = golden_lattice(2200);
        let psi = PsiFamily::dyadic(5).unwrap();
        let eta: Vec<f64> = (1..=5).map(|i| 2f64.powi(-i)).collect();
        let rep = heaviness_profile(&flow2(), &x, &[100, 1000], &eta, &psi).unwrap();
        assert_eq!(rep.verdict, HeavinessVerdict::ConsistentWith);
    }

    #[test]
    fn heaviness_escape_for_fast_growth() {
        // deep dips of growing length leak mass out of every psi level
        let quots = crate::cf::geometric_quotients(10, 18).unwrap();
        let conv = Convergents::from_quotients(&quots).unwrap();
        let x = Lattice::from_vector_rational(&[conv.value().clone()]);
        let psi = PsiFamily::dyadic(6).unwrap();
        let eta = vec![1e-3; 6];
        let rep = heaviness_profile(&flow2(), &x, &[200, 2000, 20000], &eta, &psi).unwrap();
        assert_eq!(rep.verdict, HeavinessVerdict::EscapeObserved);
    }

    #[test]
    fn heaviness_empty_list_is_escape() {
        let x = golden_lattice(60);
        let psi = PsiFamily::dyadic(3).unwrap();
        let rep = heaviness_profile(&flow2(), &x, &[], &[0.5, 0.25, 0.125], &psi).unwrap();
        assert_eq!(rep.verdict, HeavinessVerdict::EscapeObserved);
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn cf_heaviness_values() {
        assert_eq!(cf_heaviness(&[1; 10], 1.0, 10).unwrap(), 0.0);
        assert_eq!(cf_heaviness(&[1; 50], 0.5, 50).unwrap(), 0.0);
        // a_k = k, eps = 1: (1/100) ln(100!) ~ 3.6374
        let quots: Vec<u64> = (1..=100).collect();
        let direct: f64 = (1..=100).map(|k| (k as f64).ln()).sum::<f64>() / 100.0;
        let got = cf_heaviness(&quots, 1.0, 100).unwrap();
        assert!((got - direct).abs() < 1e-12);
        assert!((got - 3.6374).abs() < 1e-4);
    }

    #[test]
    fn cf_heaviness_monotone() {
        let quots: Vec<u64> = (1..=60).map(|k| (k * k) as u64).collect();
        let a = cf_heaviness(&quots, 0.1, 60).unwrap();
        let b = cf_heaviness(&quots, 0.2, 60).unwrap();
        assert!(b >= a);
        let bigger: Vec<u64> = quots.iter().map(|q| q + 5).collect();
        let c = cf_heaviness(&bigger, 0.1, 60).unwrap();
        assert!(c >= a);
    }

    #[test]
    fn psi_family_shape() {
        let psi = PsiFamily::dyadic(3).unwrap();
        // plateau at 1 above 2^-i, 0 below 2^-(i+1)
        assert_eq!(psi.eval(1, 0.6), 1.0);
        assert_eq!(psi.eval(1, 0.25), 0.0);
        assert!((psi.eval(1, 0.375) - 0.5).abs() < 1e-12);
        // unit sets increase with i
        for l1 in [0.03, 0.1, 0.3, 0.9] {
            for i in 1..3 {
                assert!(psi.eval(i + 1, l1) >= psi.eval(i, l1));
            }
        }
    }
}
