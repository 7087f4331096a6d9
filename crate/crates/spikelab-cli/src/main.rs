//! spikelab: reproducible experiment driver.
//!
//! Every run resolves its configuration (defaults <- config file <- --set
//! overrides <- explicit flags), executes deterministically for the given
//! seed and thread count, and writes artifacts atomically with a full
//! config echo. Identical config and seed give byte-identical artifacts
//! at any thread count.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{
    parse_quotients, resolve, AcceptParams, CorrespondenceParams, CoveringParams,
    DimEstimateParams, FractalParams, HeavinessParams, MinkowskiParams, OrbitParams,
    ScanBadParams,
};
use emit::Emitter;
use spikelab_core::accept;
use spikelab_core::cf::Convergents;
use spikelab_core::dimension::{
    covering_experiment, dim_estimate, dyadic_scales, CoverInput, CoverMetric, QuasiMetric,
};
use spikelab_core::diophantine::{
    bad_set_scan, bad_subspace_test, minkowski_solutions, spike_correspondence, AffineSubspace,
    BadTestConfig,
};
use spikelab_core::dynamics::{excursions, heaviness_profile, lambda1_series, PsiFamily};
use spikelab_core::exact::ExactLattice2;
use spikelab_core::flow::FlowSpec;
use spikelab_core::fractal::{
    bad_interval_sets, dim_lower_estimate, dip_start_lambda1, excursion_data,
    mass_distribution_check, proposition_witness, resolved_radii, verify_offset_sigma, CfLattice,
};
use spikelab_core::lattice::Lattice;
use spikelab_core::region::BoxRegion;
use spikelab_core::util::{fmt_sig12, SplitMix64};
use spikelab_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "spikelab",
    about = "Desk-scale experiments on diagonal flows, spikes and bad targets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file with the experiment parameters
    #[arg(long)]
    config: Option<PathBuf>,
    /// dotted-path overrides, e.g. --set eps=0.05
    #[arg(long = "set")]
    sets: Vec<String>,
    /// worker threads (SPIKELAB_THREADS, then 1, when absent)
    #[arg(long)]
    threads: Option<usize>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// seed for the deterministic sampling streams
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn threads(&self) -> usize {
        self.threads
            .or_else(|| {
                std::env::var("SPIKELAB_THREADS")
                    .ok()
                    .and_then(|s| s.parse().ok())
            })
            .unwrap_or(1)
            .max(1)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Survivor scan of the truncated bad-target set over a dyadic grid
    ScanBad {
        #[command(flatten)]
        common: Common,
        /// components of v, comma separated
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<f64>>,
        #[arg(long)]
        eps: Option<f64>,
        /// truncation window
        #[arg(long = "K")]
        k_max: Option<u64>,
        /// dyadic resolution
        #[arg(long = "R")]
        resolution: Option<u32>,
    },
    /// Layer correspondence between bad targets and spike points
    Correspondence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instances: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "K")]
        k_max: Option<u64>,
    },
    /// Integer points satisfying the convex-body distance bound
    Minkowski {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Full fractal pipeline: excursions, intervals, sigma floor, slopes
    Fractal {
        #[command(flatten)]
        common: Common,
        /// quotient generator, e.g. geometric:10
        #[arg(long = "n-seq")]
        n_seq: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Shortest-vector series and threshold excursions of one orbit
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        quotients: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Empirical-measure masses against a tolerance sequence
    Heaviness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        quotients: Option<String>,
        #[arg(long = "t-list", value_delimiter = ',')]
        t_list: Option<Vec<u64>>,
    },
    /// Box-counting dimension of a standard shape
    DimEstimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<f64>>,
    },
    /// Orbit covering-count experiment against the exponential budget
    Covering {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        quotients: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long = "T")]
        t_max: Option<u32>,
    },
    /// Run the acceptance suite and write per-criterion results
    Accept {
        #[command(flatten)]
        common: Common,
        /// run only these criterion ids
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // budget errors exit 2, everything else 1
            for cause in e.chain() {
                if let Some(core) = cause.downcast_ref::<CoreError>() {
                    if matches!(
                        core,
                        CoreError::BudgetExceeded(_) | CoreError::EnumerationTooLarge { .. }
                    ) {
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::ScanBad {
            common,
            v,
            eps,
            k_max,
            resolution,
        } => {
            let mut p: ScanBadParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(v) = v {
                p.v = v;
            }
            if let Some(e) = eps {
                p.eps = e;
            }
            if let Some(k) = k_max {
                p.k_max = k;
            }
            if let Some(r) = resolution {
                p.resolution = r;
            }
            run_scan_bad(&common, p)
        }
        Command::Correspondence {
            common,
            instances,
            eps,
            k_max,
        } => {
            let mut p: CorrespondenceParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(i) = instances {
                p.instances = i;
            }
            if let Some(e) = eps {
                p.eps = e;
            }
            if let Some(k) = k_max {
                p.k_max = k;
            }
            if let Some(s) = common.seed {
                p.seed = s;
            }
            run_correspondence(&common, p)
        }
        Command::Minkowski { common, bound } => {
            let mut p: MinkowskiParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(b) = bound {
                p.bound = b;
            }
            run_minkowski(&common, p)
        }
        Command::Fractal {
            common,
            n_seq,
            depth,
        } => {
            let mut p: FractalParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(n) = n_seq {
                p.n_seq = n;
            }
            if let Some(d) = depth {
                p.depth = d;
            }
            run_fractal(&common, p)
        }
        Command::Orbit {
            common,
            quotients,
            depth,
            t_max,
            step,
        } => {
            let mut p: OrbitParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(q) = quotients {
                p.quotients = q;
            }
            if let Some(d) = depth {
                p.depth = d;
            }
            if let Some(t) = t_max {
                p.t_max = t;
            }
            if let Some(s) = step {
                p.step = s;
            }
            run_orbit(&common, p)
        }
        Command::Heaviness {
            common,
            quotients,
            t_list,
        } => {
            let mut p: HeavinessParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(q) = quotients {
                p.quotients = q;
            }
            if let Some(t) = t_list {
                p.t_list = t;
            }
            run_heaviness(&common, p)
        }
        Command::DimEstimate {
            common,
            shape,
            exponents,
        } => {
            let mut p: DimEstimateParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(s) = shape {
                p.shape = s;
            }
            if let Some(e) = exponents {
                p.exponents = e;
            }
            run_dim_estimate(&common, p)
        }
        Command::Covering {
            common,
            quotients,
            r,
            t_max,
        } => {
            let mut p: CoveringParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(q) = quotients {
                p.quotients = q;
            }
            if let Some(rr) = r {
                p.r = rr;
            }
            if let Some(t) = t_max {
                p.t_max = t;
            }
            run_covering(&common, p)
        }
        Command::Accept { common, only } => {
            let mut p: AcceptParams = resolve(common.config.as_deref(), &common.sets)?;
            if let Some(o) = only {
                p.only = o;
            }
            run_accept(&common, p)
        }
    }
}

fn echo<T: serde::Serialize>(kind: &str, common: &Common, params: &T) -> serde_json::Value {
    json!({
        "kind": kind,
        "threads": common.threads(),
        "seed": common.seed.unwrap_or(0),
        "params": params,
    })
}

fn run_scan_bad(common: &Common, p: ScanBadParams) -> Result<ExitCode> {
    let mut cfg = BadTestConfig::new(p.v.clone(), p.eps, p.k_max)?;
    if let Some(w) = &p.weights {
        cfg = cfg.with_weights(w.clone())?;
    }
    let scan = bad_set_scan(&cfg, p.resolution, common.threads())?;
    let mut em = Emitter::new(&common.out, echo("scan-bad", common, &p))?;
    em.csv("scan.csv", &accept::scan_csv_string(&scan))?;
    em.json(
        "scan.summary.json",
        json!({
            "survivor_count": scan.survivor_count,
            "survivor_fraction": fmt_sig12(scan.survivor_fraction),
            "per_scale_counts": scan.per_scale_counts,
            "box_dim_slope": fmt_sig12(scan.box_dim_slope),
            "corner_counts": scan.corner_counts,
        }),
    )?;
    println!(
        "scan-bad: {} survivors of {} cells (fraction {:.6}), slope {:.4}",
        scan.survivor_count,
        scan.survivors.len(),
        scan.survivor_fraction,
        scan.box_dim_slope
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_correspondence(common: &Common, p: CorrespondenceParams) -> Result<ExitCode> {
    let mut rng = SplitMix64::new(p.seed);
    let mut rows = Vec::new();
    let mut all = true;
    for _ in 0..p.instances {
        let v = rng.next_f64();
        let w = rng.next_f64();
        let s = rng.next_f64();
        let r = spike_correspondence(&[v], &[w], s, p.eps, p.k_max)?;
        all &= r.consistent;
        rows.push(json!({
            "v": fmt_sig12(v),
            "w": fmt_sig12(w),
            "s": fmt_sig12(s),
            "bad_proxy": r.bad_proxy,
            "spike_count": r.spike_count,
            "consistent": r.consistent,
        }));
    }
    let mut em = Emitter::new(&common.out, echo("correspondence", common, &p))?;
    em.json(
        "correspondence.json",
        json!({"all_consistent": all, "rows": rows}),
    )?;
    println!(
        "correspondence: {} instances, all consistent: {all}",
        p.instances
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_minkowski(common: &Common, p: MinkowskiParams) -> Result<ExitCode> {
    let dim = p
        .spanning
        .first()
        .map(|v| v.len())
        .context("need at least one spanning vector")?;
    let offset = p.offset.clone().unwrap_or_else(|| vec![0.0; dim]);
    let sub = AffineSubspace::new(p.spanning.clone(), offset)?;
    let mut em = Emitter::new(&common.out, echo("minkowski", common, &p))?;
    let mut body = json!({});
    if sub.is_linear() {
        let sols = minkowski_solutions(&sub, p.bound)?;
        let mut csv = (0..dim)
            .map(|i| format!("k{}", i + 1))
            .collect::<Vec<_>>()
            .join(",")
            + "\n";
        for k in &sols {
            csv.push_str(&(k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") + "\n"));
        }
        em.csv("minkowski.csv", &csv)?;
        body["solutions"] = json!(sols.len());
        println!(
            "minkowski: {} solutions within |k| <= {}",
            sols.len(),
            p.bound
        );
    }
    if let Some(eps) = p.eps {
        let r = bad_subspace_test(&sub, eps, p.bound)?;
        body["bad_subspace"] = json!({
            "verdict": r.verdict,
            "min_value": fmt_sig12(r.min_value),
            "argmin": r.argmin,
        });
        println!(
            "bad-subspace: verdict {} with min value {:.6}",
            r.verdict, r.min_value
        );
    }
    em.json("minkowski.json", body)?;
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_fractal(common: &Common, p: FractalParams) -> Result<ExitCode> {
    let quots = parse_quotients(&p.n_seq, p.depth + 2)?;
    let cf = CfLattice::build(&quots, p.depth)?;
    let data = excursion_data(&cf, p.depth)?;
    let approx = bad_interval_sets(&data, p.materialize_budget)?;
    let mut em = Emitter::new(&common.out, echo("fractal", common, &p))?;
    em.json(
        "excursions.json",
        json!(data
            .iter()
            .map(|d| json!({
                "index": d.index,
                "t_i": fmt_sig12(d.t_i),
                "s_next": fmt_sig12(d.s_next),
                "vector": [d.vector.0.to_string(), d.vector.1.to_string()],
                "ell": fmt_sig12(d.ell),
            }))
            .collect::<Vec<_>>()),
    )?;
    // interval lists for the materialized levels
    let mut levels = Vec::new();
    for lv in 1..=approx.exact_depth {
        let iv = approx.intervals_at(lv)?;
        levels.push(json!({
            "level": lv,
            "count": iv.len(),
            "intervals": if iv.len() <= 4096 {
                json!(iv.iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect::<Vec<_>>())
            } else {
                json!("omitted (too many intervals)")
            },
        }));
    }
    em.json(
        "intervals.json",
        json!({
            "depth": approx.depth,
            "exact_depth": approx.exact_depth,
            "counts": approx.counts,
            "lengths": approx.lengths,
            "levels": levels,
        }),
    )?;
    // sigma floor through the dips
    let mut cla_rows = Vec::new();
    let mut min_sigma = f64::INFINITY;
    for d in &data {
        let rep = verify_offset_sigma(&cf, d, p.gamma_samples, p.t_samples, common.threads())?;
        min_sigma = min_sigma.min(rep.min_sigma);
        cla_rows.push(json!({
            "index": d.index,
            "pass": rep.pass,
            "min_sigma": fmt_sig12(rep.min_sigma),
        }));
    }
    let witness = proposition_witness(
        &cf,
        &data,
        &approx,
        p.gamma_samples.min(20),
        p.s_samples,
        common.threads(),
    )?;
    em.json(
        "cla_report.json",
        json!({
            "per_excursion": cla_rows,
            "sharpness_dip_start_lambda1": fmt_sig12(dip_start_lambda1(&cf, &data[0])),
            "witness": {
                "c_bound": fmt_sig12(witness.c_bound),
                "radius": fmt_sig12(witness.radius),
                "pass": witness.pass,
                "min_certified_sigma": fmt_sig12(witness.min_certified_sigma),
                "grids_checked": witness.grids_checked,
            },
        }),
    )?;
    // dimension table
    let est = dim_lower_estimate(&approx)?;
    let mut csv = String::from("delta,count\n");
    for (d, c) in &est.scales {
        csv.push_str(&format!("{},{c}\n", fmt_sig12(*d)));
    }
    em.csv("dim.csv", &csv)?;
    // mass check on the resolved range
    let radii = resolved_radii(&approx, 4);
    let mass = mass_distribution_check(&approx, 0.3, &radii, 24)?;
    em.json(
        "mass.json",
        json!({
            "eps": 0.3,
            "max_ratio": fmt_sig12(mass.max_ratio),
            "pass": mass.pass,
            "slope": fmt_sig12(est.slope),
        }),
    )?;
    println!(
        "fractal: depth {}, min sigma {:.6}, slope {:.4}, mass ratio {:.4}",
        p.depth, min_sigma, est.slope, mass.max_ratio
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_orbit(common: &Common, p: OrbitParams) -> Result<ExitCode> {
    let quots = config::quotients_for_horizon(&p.quotients, p.depth + 2, p.t_max)?;
    let conv = Convergents::from_quotients(&quots)?;
    let x = Lattice::from_vector_rational(&[conv.value().clone()]);
    let flow = FlowSpec::standard_2d();
    let steps = (p.t_max / p.step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * p.step).collect();
    let series = lambda1_series(&flow, &x, &grid)?;
    let mut csv = String::from("t,lambda1\n");
    for (t, l) in &series {
        csv.push_str(&format!("{},{}\n", fmt_sig12(*t), fmt_sig12(*l)));
    }
    let exc = excursions(&flow, &x, p.threshold, p.t_max)?;
    let mut em = Emitter::new(&common.out, echo("orbit", common, &p))?;
    em.csv("series.csv", &csv)?;
    em.json(
        "excursions.json",
        json!(exc
            .above
            .intervals()
            .iter()
            .map(|(s, t)| json!({"s": fmt_sig12(*s), "t": fmt_sig12(*t)}))
            .collect::<Vec<_>>()),
    )?;
    let min = series.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
    println!(
        "orbit: {} samples, min lambda1 {:.6}, {} excursions above {}",
        series.len(),
        min,
        exc.above.intervals().len(),
        p.threshold
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_heaviness(common: &Common, p: HeavinessParams) -> Result<ExitCode> {
    let horizon = p.t_list.iter().copied().max().unwrap_or(0) as f64;
    let quots = config::quotients_for_horizon(&p.quotients, p.depth + 2, horizon)?;
    let conv = Convergents::from_quotients(&quots)?;
    let x = Lattice::from_vector_rational(&[conv.value().clone()]);
    let flow = FlowSpec::standard_2d();
    let psi = PsiFamily::dyadic(p.i_max)?;
    let eta: Vec<f64> = p
        .eta
        .clone()
        .unwrap_or_else(|| (1..=p.i_max).map(|i| 2f64.powi(-(i as i32))).collect());
    let report = heaviness_profile(&flow, &x, &p.t_list, &eta, &psi)?;
    let mut csv = String::from("T,i,mass\n");
    for row in &report.rows {
        for (i, m) in row.masses.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", row.t_count, i + 1, fmt_sig12(*m)));
        }
    }
    let mut em = Emitter::new(&common.out, echo("heaviness", common, &p))?;
    em.csv("heaviness.csv", &csv)?;
    em.json(
        "heaviness.json",
        json!({
            "verdict": format!("{:?}", report.verdict),
            "note": "a finite horizon never proves heaviness; the verdict only says the \
                     sampled masses are consistent with it",
        }),
    )?;
    println!("heaviness: verdict {:?}", report.verdict);
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_dim_estimate(common: &Common, p: DimEstimateParams) -> Result<ExitCode> {
    let flow = FlowSpec::new(p.exponents.clone())?;
    let quasi = QuasiMetric::from_flow(&flow);
    let input = match p.shape.as_str() {
        "box" => CoverInput::Boxes(BoxRegion::new(vec![vec![(0.0, 1.0), (0.0, 1.0)]])?),
        "segment" => CoverInput::Boxes(BoxRegion::new(vec![vec![(0.0, 1.0), (0.0, 1e-12)]])?),
        other => anyhow::bail!("unknown shape '{other}' (box | segment)"),
    };
    let scales = dyadic_scales(p.scale_from, p.scale_to);
    let metric = if p.euclidean {
        CoverMetric::Euclidean
    } else {
        CoverMetric::Quasi(quasi)
    };
    let est = dim_estimate(&input, &metric, &scales)?;
    let mut csv = String::from("delta,count\n");
    for (d, c) in &est.scales {
        csv.push_str(&format!("{},{c}\n", fmt_sig12(*d)));
    }
    let mut em = Emitter::new(&common.out, echo("dim-estimate", common, &p))?;
    em.csv("dim.csv", &csv)?;
    em.json(
        "dim.json",
        json!({
            "slope": fmt_sig12(est.slope),
            "residual_rms": fmt_sig12(est.residual_rms),
            "delta_min": fmt_sig12(est.delta_min),
            "delta_max": fmt_sig12(est.delta_max),
        }),
    )?;
    println!(
        "dim-estimate: slope {:.4} (rms {:.3e})",
        est.slope, est.residual_rms
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_covering(common: &Common, p: CoveringParams) -> Result<ExitCode> {
    let quots = parse_quotients(&p.quotients, p.depth + 2)?;
    let conv = Convergents::from_quotients(&quots)?;
    let lat =
        ExactLattice2::from_lattice(&Lattice::from_vector_rational(&[conv.value().clone()]))?;
    let rep = covering_experiment(&lat, p.r, p.t_max, p.threshold)?;
    let mut em = Emitter::new(&common.out, echo("covering", common, &p))?;
    em.json(
        "covering.json",
        json!({
            "count": rep.count,
            "bound": fmt_sig12(rep.bound),
            "base_count": rep.base_count,
            "excursion_times": rep.excursion_times,
            "leaf_radius": fmt_sig12(rep.leaf_radius),
            "surviving_measure": fmt_sig12(rep.surviving_measure),
            "within_budget": (rep.count as f64) <= rep.bound,
        }),
    )?;
    println!(
        "covering: count {} vs budget {:.1} (|I| = {})",
        rep.count, rep.bound, rep.excursion_times
    );
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_accept(common: &Common, p: AcceptParams) -> Result<ExitCode> {
    let ids = if p.only.is_empty() {
        accept::criterion_ids()
    } else {
        p.only.clone()
    };
    let mut results = Vec::new();
    let mut all = true;
    for id in ids {
        let r = accept::run_criterion(id, common.threads());
        println!(
            "{} criterion {:2}: {}: {} ({:.2}s)",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.details,
            r.seconds
        );
        all &= r.pass;
        results.push(r);
    }
    let mut em = Emitter::new(&common.out, echo("accept", common, &p))?;
    em.json(
        "acceptance.json",
        json!({
            "all_pass": all,
            "criteria": results,
        }),
    )?;
    for path in em.written() {
        println!("wrote {}", path.display());
    }
    Ok(if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
