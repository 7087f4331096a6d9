//! Spike hit-times and finite spike intersections of grids.
//!
//! The positive spike of an open region O under the flow is the union of
//! its backward images over t > 0. A point p lies in it exactly when some
//! t > 0 has a_t p inside O; for box regions those times solve per
//! coordinate in closed form via logarithms.

use crate::error::{Error, Result};
use crate::flow::FlowSpec;
use crate::interval::IntervalSet;
use crate::lattice::{grid_points_in_box, Grid};
use crate::region::BoxRegion;

/// Default cell budget for certified grid enumeration.
pub const DEFAULT_ENUM_BUDGET: f64 = 1e8;

/// Exact set of times t > 0 with a_t p inside the region, as a finite
/// union of open intervals (possibly unbounded above).
///
/// For one coordinate the condition l_j < e^{c_j t} p_j < u_j either holds
/// for all t (p_j = 0 and l_j < 0 < u_j), never, or on one open interval
/// solved by logarithms.
pub fn hit_times(flow: &FlowSpec, p: &[f64], region: &BoxRegion) -> Result<IntervalSet> {
    if p.len() != flow.dim() || region.dim() != flow.dim() {
        return Err(Error::InvalidInput(
            "point/region/flow dimensions must agree".into(),
        ));
    }
    let mut result = IntervalSet::empty();
    for b in region.boxes() {
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut feasible = true;
        for (j, &(l, u)) in b.iter().enumerate() {
            let c = flow.exponent(j);
            let x = p[j];
            if x == 0.0 {
                if l < 0.0 && 0.0 < u {
                    continue; // holds for every t
                }
                feasible = false;
                break;
            }
            // reduce to s_lo < e^{c t} < s_hi with the scale positive
            let (s_lo, s_hi) = if x > 0.0 {
                (l / x, u / x)
            } else {
                (u / x, l / x)
            };
            if s_hi <= 0.0 {
                feasible = false;
                break;
            }
            // lower bound active only when positive
            if s_lo > 0.0 {
                let bound = s_lo.ln() / c;
                if c > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            } else if c < 0.0 {
                // e^{ct} > s_lo always holds; nothing to do
            }
            let bound = s_hi.ln() / c;
            if c > 0.0 {
                hi = hi.min(bound);
            } else {
                lo = lo.max(bound);
            }
            if lo >= hi {
                feasible = false;
                break;
            }
        }
        if feasible && lo < hi {
            result = result.union(&IntervalSet::single(lo, hi));
        }
    }
    Ok(result)
}

/// A grid point together with its integer coefficients; the layer is the
/// final coefficient (the index of the translated sublattice copy the
/// point belongs to).
#[derive(Clone, Debug)]
pub struct LayeredPoint {
    pub point: Vec<f64>,
    pub coeffs: Vec<i64>,
    pub layer: i64,
}

/// All grid points whose hit-times meet (0, t_max], with those times.
///
/// Completeness: a point hit by time t <= t_max lies in the union of the
/// backward images a_t^{-1} O, whose coordinate ranges are monotone in t;
/// the certified enumeration box is computed from the extremes at t -> 0
/// and t = t_max.
pub fn grid_spike_points(
    flow: &FlowSpec,
    grid: &Grid,
    region: &BoxRegion,
    t_max: f64,
    budget: f64,
) -> Result<Vec<(LayeredPoint, IntervalSet)>> {
    if t_max <= 0.0 {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    if grid.dim() != flow.dim() || region.dim() != flow.dim() {
        return Err(Error::InvalidInput(
            "grid/region/flow dimensions must agree".into(),
        ));
    }
    let bbox = region.bounding_box();
    let mut ranges = Vec::with_capacity(flow.dim());
    for (j, &(l, u)) in bbox.iter().enumerate() {
        let s_end = flow.scale_at(j, -t_max)?; // e^{-c_j t_max}
        let lo = (l * s_end).min(l);
        let hi = (u * s_end).max(u);
        ranges.push((lo, hi));
    }
    let points = grid_points_in_box(grid, &ranges, budget)?;
    let mut out = Vec::new();
    for (p, coeffs) in points {
        let times = hit_times(flow, &p, region)?.intersect_interval(0.0, t_max);
        if !times.is_empty() {
            let layer = *coeffs.last().unwrap();
            out.push((
                LayeredPoint {
                    point: p,
                    coeffs,
                    layer,
                },
                times,
            ));
        }
    }
    Ok(out)
}

/// True when no grid point is hit within the time window [r, t_max]:
/// the grid avoids the region over that window.
pub fn avoid_test(
    flow: &FlowSpec,
    grid: &Grid,
    region: &BoxRegion,
    r: f64,
    t_max: f64,
    budget: f64,
) -> Result<bool> {
    if !(0.0 <= r && r < t_max) {
        return Err(Error::InvalidInput("need 0 <= r < t_max".into()));
    }
    // points whose hit interval meets [r, t_max]; the same certified box
    // works since [r, t_max] is inside (0, t_max]
    let hits = grid_spike_points(flow, grid, region, t_max, budget)?;
    for (_, times) in &hits {
        let clipped = times.intersect_interval(r, t_max);
        if !clipped.is_empty() {
            return Ok(false);
        }
    }
    // a region containing the origin is hit at every time by a grid
    // point at the origin
    if grid.offset().iter().all(|x| x.abs() < 1e-15) && region.contains(grid.offset()) {
        return Ok(false);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn flow2() -> FlowSpec {
        FlowSpec::standard_2d()
    }

    fn cube(r: f64) -> BoxRegion {
        BoxRegion::centered_cube(2, r).unwrap()
    }

    #[test]
    fn hit_times_closed_form() {
        let times = hit_times(&flow2(), &[0.1, 2.0], &cube(0.5)).unwrap();
        assert_eq!(times.count(), 1);
        let (lo, hi) = times.intervals()[0];
        assert!((lo - 4f64.ln()).abs() < 1e-12);
        assert!((hi - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hit_times_empty_when_growing_coordinate_outside() {
        let times = hit_times(&flow2(), &[0.6, 0.1], &cube(0.5)).unwrap();
        assert!(times.is_empty());
    }

    #[test]
    fn hit_times_unbounded_for_zero_coordinate() {
        let times = hit_times(&flow2(), &[0.0, 5.0], &cube(0.5)).unwrap();
        assert_eq!(times.count(), 1);
        let (lo, hi) = times.intervals()[0];
        assert!((lo - 10f64.ln()).abs() < 1e-12);
        assert_eq!(hi, f64::INFINITY);
    }

    /// Dense sampling oracle: scan t and compare membership transitions.
    #[test]
    fn hit_times_match_dense_sampling() {
        let flow = flow2();
        let region = BoxRegion::new(vec![
            vec![(-0.5, 0.5), (-0.5, 0.5)],
            vec![(1.0, 2.0), (-0.25, 0.75)],
        ])
        .unwrap();
        let mut rng = crate::util::SplitMix64::new(7);
        for _ in 0..40 {
            let p = [rng.next_f64() * 4.0 - 2.0, rng.next_f64() * 4.0 - 2.0];
            let times = hit_times(&flow, &p, &region).unwrap();
            let mut t = 1e-4;
            while t < 8.0 {
                let inside = region.contains(&flow.apply_point(t, &p).unwrap());
                let predicted = times.contains(t);
                if inside != predicted {
                    // mismatches may only happen within 2e-4 of an endpoint
                    let near_edge = times
                        .intervals()
                        .iter()
                        .any(|(lo, hi)| (t - lo).abs() < 2e-4 || (t - hi).abs() < 2e-4);
                    assert!(near_edge, "mismatch at t={t} for p={p:?}");
                }
                t += 1e-4;
            }
        }
    }

    #[test]
    fn spike_points_standard_lattice() {
        // Z^2 against the quarter cube up to t = 5. Enumeration oracle:
        // points (m, n) with m != 0 never enter (e^t |m| >= 1); the origin
        // is inside for every t; (0, +-n) enters once e^{-t} n < 1/4,
        // i.e. for 1 <= n <= 37 = floor(e^5 / 4). Total 75 points.
        let grid = Lattice::standard(2).grid(vec![0.0, 0.0]).unwrap();
        let hits = grid_spike_points(&flow2(), &grid, &cube(0.25), 5.0, 1e8).unwrap();
        assert_eq!(hits.len(), 75);
        for (lp, times) in &hits {
            let n = lp.point[1].round();
            assert!(lp.point[0].abs() < 1e-12);
            let (lo, hi) = times.intervals()[0];
            assert!((hi - 5.0).abs() < 1e-12);
            if n == 0.0 {
                assert!(lo.abs() < 1e-12);
            } else {
                assert!((lo - (4.0 * n.abs()).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spike_points_empty_for_half_offset() {
        let grid = Lattice::standard(2).grid(vec![0.5, 0.5]).unwrap();
        let hits = grid_spike_points(&flow2(), &grid, &cube(0.25), 3.0, 1e8).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn spike_points_rejects_bad_t_max() {
        let grid = Lattice::standard(2).grid(vec![0.0, 0.0]).unwrap();
        assert!(grid_spike_points(&flow2(), &grid, &cube(0.25), 0.0, 1e8).is_err());
    }

    /// Enumeration oracle: doubling the certified box never adds points.
    #[test]
    fn spike_enumeration_is_complete() {
        let flow = flow2();
        let mut rng = crate::util::SplitMix64::new(99);
        for trial in 0..100 {
            // random shear lattice and offset
            let s = rng.next_f64() * 2.0 - 1.0;
            let lat = Lattice::from_basis(vec![vec![1.0, 0.0], vec![s, 1.0]]).unwrap();
            let grid = lat
                .grid(vec![rng.next_f64(), rng.next_f64()])
                .unwrap();
            let region = cube(0.3 + 0.2 * rng.next_f64());
            let t_max = 2.0 + rng.next_f64();
            let hits = grid_spike_points(&flow, &grid, &region, t_max, 1e8).unwrap();
            // brute force over a doubled coefficient range
            let mut brute = 0usize;
            for i in -40i64..=40 {
                for j in -40i64..=40 {
                    let p = [
                        i as f64 + s * j as f64 + grid.offset()[0],
                        j as f64 + grid.offset()[1],
                    ];
                    let times = hit_times(&flow, &p, &region)
                        .unwrap()
                        .intersect_interval(0.0, t_max);
                    if !times.is_empty() {
                        brute += 1;
                    }
                }
            }
            assert_eq!(hits.len(), brute, "trial {trial}");
        }
    }

    #[test]
    fn avoid_grid_with_origin_never_avoids() {
        let grid = Lattice::standard(2).grid(vec![0.0, 0.0]).unwrap();
        assert!(!avoid_test(&flow2(), &grid, &cube(0.25), 0.0, 3.0, 1e8).unwrap());
    }

    #[test]
    fn avoid_half_offset_grid() {
        let grid = Lattice::standard(2).grid(vec![0.5, 0.5]).unwrap();
        assert!(avoid_test(&flow2(), &grid, &cube(0.25), 0.0, 3.0, 1e8).unwrap());
    }

    /// Finite inclusion: once the enumerated spike points of a grid are
    /// all hit before some time r, the grid avoids the region on
    /// [r, t_max]. Random shear grids.
    #[test]
    fn finitely_many_spikes_give_avoidance_window() {
        let flow = flow2();
        let mut rng = crate::util::SplitMix64::new(314);
        for trial in 0..100 {
            let s = rng.next_f64() * 2.0 - 1.0;
            let lat = Lattice::from_basis(vec![vec![1.0, 0.0], vec![s, 1.0]]).unwrap();
            let grid = lat.grid(vec![rng.next_f64(), rng.next_f64()]).unwrap();
            let region = cube(0.2 + 0.1 * rng.next_f64());
            let t_max = 3.0;
            let hits = grid_spike_points(&flow, &grid, &region, t_max, 1e8).unwrap();
            // r just past the last hit; 0 when nothing is hit at all
            let last_hit = hits
                .iter()
                .filter_map(|(_, times)| times.max())
                .fold(0.0f64, f64::max);
            if last_hit + 1e-6 < t_max {
                let r = last_hit + 1e-6;
                assert!(
                    avoid_test(&flow, &grid, &region, r, t_max, 1e8).unwrap(),
                    "trial {trial}: window [{r}, {t_max}] not avoided"
                );
            }
        }
    }

    #[test]
    fn avoid_rejects_degenerate_window() {
        let grid = Lattice::standard(2).grid(vec![0.5, 0.5]).unwrap();
        assert!(avoid_test(&flow2(), &grid, &cube(0.25), 3.0, 3.0, 1e8).is_err());
    }
}
