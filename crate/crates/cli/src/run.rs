//! Workflow execution. Every command writes CSV rows plus `manifest.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;
use sbp_core::ansatz::{PeakConfig, PotentialSpec, ReductionParams};
use sbp_core::bpfield::{solve_potential_direct, solve_potential_spectral, BPParams};
use sbp_core::energy::{EnergyContext, EnergyOptions};
use sbp_core::fields::{norm_l2, ScalarField3D, UniformGrid};
use sbp_core::groundstate::{constants, solve_ground_state, GroundStateConstants, RadialProfile};
use sbp_core::reduction::{
    asymptotic_formula, pseudo_critical_residual, reduced_energy, search_interval, solve_point, Cluster,
    GridPolicy, SearchOptions, SweepRow, SWEEP_HEADER,
};
use sbp_core::SbpError;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] SbpError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Process exit code for a failed run.
pub fn exit_code(err: &RunError) -> i32 {
    match err {
        RunError::Core(SbpError::NoConvergence { .. }) => 2,
        RunError::Core(SbpError::EmptyAdmissible) => 3,
        _ => 1,
    }
}

/// What a run produced. `failures` holds per-point errors that did not stop the run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<(f64, RunError)>,
    pub truncated: Vec<f64>,
    pub rows: Vec<SweepRow<f64>>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        let codes: Vec<i32> = self.failures.iter().map(|(_, e)| exit_code(e)).collect();
        if codes.contains(&2) {
            2
        } else if codes.contains(&3) {
            3
        } else if codes.is_empty() {
            0
        } else {
            1
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, RunError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let mut report = RunReport::default();
    let mut extra = serde_json::Map::new();
    match cfg.command {
        Command::GroundState => ground_state(cfg, &mut report)?,
        Command::FieldCheck => field_check(cfg, &mut report)?,
        Command::AnsatzCheck => ansatz_check(cfg, &pool, &mut report)?,
        Command::Landscape => landscape(cfg, &pool, &mut report)?,
        Command::Solve => sweep(cfg, &pool, &mut report, true)?,
        Command::Sweep => sweep(cfg, &pool, &mut report, false)?,
        Command::VerifyTheorem => {
            sweep(cfg, &pool, &mut report, false)?;
            extra.insert("trends".into(), trends(&report.rows));
        }
    }
    let manifest = json!({
        "command": cfg.command.name(),
        "config": cfg.echo,
        "workers": cfg.workers,
        "seed": cfg.seed,
        "grid": cfg.grid.map(|(l, n)| json!({"L": l, "n": n})),
        "versions": {
            "sbp-cli": env!("CARGO_PKG_VERSION"),
        },
        "started_unix": started,
        "wall_seconds": clock.elapsed().as_secs_f64(),
        "files": report.files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
        "truncated_eps": report.truncated,
        "failures": report.failures.iter().map(|(e, err)| json!({"eps": e, "error": err.to_string()})).collect::<Vec<_>>(),
        "extra": Value::Object(extra),
    });
    let path = cfg.output_dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    report.files.push(path);
    Ok(report)
}

/// Run `f` over `jobs` on the pool; `sink` sees results in input order as they complete.
fn ordered_map<J, R, F, S>(pool: &ThreadPool, jobs: Vec<J>, f: F, mut sink: S) -> Result<(), RunError>
where
    J: Send,
    R: Send,
    F: Fn(J) -> R + Sync,
    S: FnMut(usize, R) -> Result<(), RunError>,
{
    let (tx, rx) = mpsc::channel();
    pool.in_place_scope(|s| {
        for (i, job) in jobs.into_iter().enumerate() {
            let tx = tx.clone();
            let f = &f;
            s.spawn(move |_| {
                let _ = tx.send((i, f(job)));
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&next) {
                sink(next, r)?;
                next += 1;
            }
        }
        Ok(())
    })
}

fn profile_and_constants(cfg: &RunConfig) -> Result<(RadialProfile<f64>, GroundStateConstants<f64>), RunError> {
    let profile = solve_ground_state(cfg.params.p, cfg.profile_rmax, 1e-10)?;
    let consts = constants(&profile, cfg.k)?;
    Ok((profile, consts))
}

fn fixed_grid(cfg: &RunConfig) -> Result<Option<UniformGrid<f64>>, RunError> {
    Ok(match cfg.grid {
        Some((l, n)) => Some(UniformGrid::new(l, n)?),
        None => None,
    })
}

fn grid_at(
    cfg: &RunConfig,
    params: &ReductionParams<f64>,
    profile: &RadialProfile<f64>,
) -> Result<UniformGrid<f64>, SbpError> {
    match cfg.grid {
        Some((l, n)) => UniformGrid::new(l, n),
        None => {
            let (_, hi) =
                sbp_core::ansatz::admissible_interval(params, &cfg.pot).ok_or(SbpError::EmptyAdmissible)?;
            GridPolicy::default().grid_for(hi, profile)
        }
    }
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    w.flush()?;
    Ok(w)
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn ground_state(cfg: &RunConfig, report: &mut RunReport) -> Result<(), RunError> {
    let (profile, c) = profile_and_constants(cfg)?;
    let cache = cfg.output_dir.join(format!("profile_p{}.sbpc", cfg.params.p));
    profile.save(&cache)?;
    report.files.push(cache);
    let path = cfg.output_dir.join("constants.csv");
    let mut w = csv_writer(&path, &["quantity", "value"])?;
    let rows = [
        ("p", c.p),
        ("U0", profile.u0()),
        ("eta_fit", profile.eta_fit),
        ("C0", c.c0),
        ("C1", c.c1),
        ("norm_l2_sq", c.norm_l2_sq),
        ("norm_grad_sq", c.norm_grad_sq),
        ("norm_lp1", c.norm_lp1),
        ("norm_d1u_h1_sq", c.norm_d1u_h1_sq),
        ("sigma", c.sigma),
        ("gamma", c.gamma),
        ("nehari_residual", c.nehari_residual()),
        ("pohozaev_residual", c.pohozaev_residual()),
    ];
    for (name, v) in rows {
        w.write_record([name.to_string(), fmt(v)])?;
    }
    w.flush()?;
    report.files.push(path);
    Ok(())
}

/// Spectral against direct convolution on random smooth sources.
fn field_check(cfg: &RunConfig, report: &mut RunReport) -> Result<(), RunError> {
    let grid = fixed_grid(cfg)?.unwrap_or(UniformGrid::new(8.0, 32)?);
    let bp = BPParams::new(cfg.params.a, cfg.params.eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let path = cfg.output_dir.join("field_check.csv");
    let mut w = csv_writer(&path, &["source", "rel_l2_error", "pass"])?;
    let half = grid.half_width;
    for s in 0..10 {
        let bumps: Vec<([f64; 3], f64, f64)> = (0..3)
            .map(|_| {
                let c = [0, 1, 2].map(|_| rng.gen_range(-half / 3.0..half / 3.0));
                (c, rng.gen_range(0.8..1.5), rng.gen_range(-1.0..1.0))
            })
            .collect();
        let src = ScalarField3D::from_fn(grid, |x| {
            bumps
                .iter()
                .map(|(c, width, amp)| {
                    let r2: f64 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum();
                    amp * (-r2 / (width * width)).exp()
                })
                .sum()
        });
        let spectral = solve_potential_spectral(&src, bp);
        let direct = solve_potential_direct(&src, bp)?;
        let err = norm_l2(&spectral.sub(&direct)) / norm_l2(&direct);
        w.write_record([s.to_string(), fmt(err), (err < 1e-3).to_string()])?;
    }
    w.flush()?;
    report.files.push(path);
    Ok(())
}

/// Residual of the ansatz at the reference radius for each `ε`.
fn ansatz_check(cfg: &RunConfig, pool: &ThreadPool, report: &mut RunReport) -> Result<(), RunError> {
    let (profile, consts) = profile_and_constants(cfg)?;
    let path = cfg.output_dir.join("ansatz_check.csv");
    let mut w = csv_writer(&path, &["eps", "r", "grad_norm", "energy_w", "formula", "gram_min", "gram_max"])?;
    let job = |eps: f64| -> Result<Vec<String>, SbpError> {
        let params = cfg.params_at(eps);
        let grid = grid_at(cfg, &params, &profile)?;
        let ctx = EnergyContext::new(params, Some(&cfg.pot), grid, EnergyOptions::default())?;
        let (lo, hi) = search_interval(&params, &cfg.pot, &profile, &grid, cfg.k)?;
        let r = params.center_radius().max(lo).min(hi);
        let pc = PeakConfig::new(r, 0.0, std::f64::consts::FRAC_PI_2, cfg.k)?;
        let cluster = Cluster::kgon(&pc, &profile, &ctx)?;
        let eig = cluster.tangent.gram.clone().symmetric_eigenvalues();
        Ok(vec![
            fmt(eps),
            fmt(r),
            fmt(pseudo_critical_residual(&cluster, &ctx)),
            fmt(ctx.energy(&cluster.w)),
            fmt(asymptotic_formula(&pc, &consts, Some(&cfg.pot), &params, EnergyOptions::default())),
            fmt(eig.min()),
            fmt(eig.max()),
        ])
    };
    let eps_list = cfg.eps_list.clone();
    ordered_map(pool, eps_list.clone(), job, |i, res| {
        match res {
            Ok(rec) => {
                w.write_record(&rec)?;
                w.flush()?;
            }
            Err(e) => report.failures.push((eps_list[i], e.into())),
        }
        Ok(())
    })?;
    report.files.push(path);
    Ok(())
}

/// `Φ_ε` on log-spaced radii across the searchable interval.
fn landscape(cfg: &RunConfig, pool: &ThreadPool, report: &mut RunReport) -> Result<(), RunError> {
    let (profile, consts) = profile_and_constants(cfg)?;
    let mut jobs = Vec::new();
    let mut grids = BTreeMap::new();
    for (i, &eps) in cfg.eps_list.iter().enumerate() {
        let params = cfg.params_at(eps);
        let prep = grid_at(cfg, &params, &profile)
            .and_then(|g| search_interval(&params, &cfg.pot, &profile, &g, cfg.k).map(|iv| (g, iv)));
        match prep {
            Ok((grid, (lo, hi))) => {
                grids.insert(i, grid);
                let m = cfg.landscape_points;
                for j in 0..m {
                    let r = lo * ((hi / lo).ln() * j as f64 / (m - 1) as f64).exp();
                    jobs.push((i, eps, r));
                }
            }
            Err(SbpError::GridBudget { .. }) => report.truncated.push(eps),
            Err(e) => report.failures.push((eps, e.into())),
        }
    }
    let path = cfg.output_dir.join("landscape.csv");
    let mut w = csv_writer(&path, &["eps", "r", "phi_eps", "energy_w", "formula", "n_norm", "c_rad", "grid_n", "grid_L"])?;
    let contexts: BTreeMap<usize, EnergyContext<f64>> = grids
        .iter()
        .map(|(&i, &g)| {
            EnergyContext::new(cfg.params_at(cfg.eps_list[i]), Some(&cfg.pot), g, EnergyOptions::default())
                .map(|c| (i, c))
        })
        .collect::<Result<_, _>>()?;
    let job = |(i, eps, r): (usize, f64, f64)| -> Result<Vec<String>, SbpError> {
        let ctx = &contexts[&i];
        let pc = PeakConfig::new(r, 0.0, std::f64::consts::FRAC_PI_2, cfg.k)?;
        let cluster = Cluster::kgon(&pc, &profile, ctx)?;
        let (phi, aux) = reduced_energy(&cluster, ctx)?;
        Ok(vec![
            fmt(eps),
            fmt(r),
            fmt(phi),
            fmt(ctx.energy(&cluster.w)),
            fmt(asymptotic_formula(&pc, &consts, Some(&cfg.pot), &ctx.params, EnergyOptions::default())),
            fmt(aux.n_norm),
            fmt(aux.multipliers[0]),
            ctx.grid.n.to_string(),
            fmt(ctx.grid.half_width),
        ])
    };
    let eps_of: Vec<f64> = jobs.iter().map(|j| j.1).collect();
    ordered_map(pool, jobs, job, |i, res| {
        match res {
            Ok(rec) => {
                w.write_record(&rec)?;
                w.flush()?;
            }
            Err(e) => report.failures.push((eps_of[i], e.into())),
        }
        Ok(())
    })?;
    report.files.push(path);
    Ok(())
}

/// Minimize and verify at each `ε`. `solve` also dumps the solution fields.
fn sweep(cfg: &RunConfig, pool: &ThreadPool, report: &mut RunReport, dump: bool) -> Result<(), RunError> {
    let (profile, consts) = profile_and_constants(cfg)?;
    let search = SearchOptions {
        scan: cfg.scan,
        coarse: cfg.coarse,
        ..SearchOptions::default()
    };
    let pot: &PotentialSpec<f64> = &cfg.pot;
    let job = |eps: f64| -> Result<(SweepRow<f64>, ScalarField3D<f64>), SbpError> {
        let params = cfg.params_at(eps);
        let grid = grid_at(cfg, &params, &profile)?;
        solve_point(&params, pot, &profile, &consts, cfg.k, grid, search, EnergyOptions::default())
    };
    let path = cfg.output_dir.join("results.csv");
    let mut w = csv_writer(&path, &SWEEP_HEADER)?;
    let eps_list = cfg.eps_list.clone();
    let out_dir = cfg.output_dir.clone();
    let mut dumps = Vec::new();
    ordered_map(pool, eps_list.clone(), job, |i, res| {
        match res {
            Ok((row, field)) => {
                w.write_record(row.record())?;
                w.flush()?;
                if dump {
                    let p = out_dir.join(format!("solution_eps{}.sbpf", eps_list[i]));
                    field.save(&p)?;
                    dumps.push(p);
                }
                report.rows.push(row);
            }
            Err(SbpError::GridBudget { .. }) => report.truncated.push(eps_list[i]),
            Err(e) => report.failures.push((eps_list[i], e.into())),
        }
        Ok(())
    })?;
    report.files.push(path);
    report.files.extend(dumps);
    Ok(())
}

/// Monotone trends along rows ordered by decreasing `ε`.
pub fn trends(rows: &[SweepRow<f64>]) -> Value {
    let mut sorted: Vec<&SweepRow<f64>> = rows.iter().collect();
    sorted.sort_by(|a, b| b.params.eps.total_cmp(&a.params.eps));
    let pairs = |f: &dyn Fn(&SweepRow<f64>) -> f64, up: bool| {
        sorted.windows(2).all(|w| {
            let (x, y) = (f(w[0]), f(w[1]));
            if up {
                y > x
            } else {
                y < x
            }
        })
    };
    json!({
        "points": sorted.len(),
        "r_star_increasing": pairs(&|r| r.minimum.0, true),
        "eps_r_star_decreasing": pairs(&|r| r.params.eps * r.minimum.0, false),
        "n_norm_decreasing": pairs(&|r| r.n_norm, false),
        "all_verified": sorted.iter().all(|r| r.verified),
        "any_boundary": sorted.iter().any(|r| r.boundary),
    })
}
