//! Parameter sweeps written as long-format CSV tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lvim::lvim::march;
use lvim::problems::{
    buckled_bar, classify_elastica, defaults_for, elastica, pendulum_frequency_sweep, LoadType,
    ELASTICA_DEFAULT_CASES,
};
use lvim::shooting::{solve_buckled_bar, ShootingOptions, ShotIntegrator, ShotResult, FOLLOWER_GUESSES};
use lvim::trajectory::Trajectory;

use crate::args::{SweepArgs, SweepKind};
use crate::report::fmt_f64;
use crate::{exit, CliError};

/// Fraction of `c` left out at the end of each elastica curve.
const ELASTICA_MARGIN: f64 = 0.1;
/// Uniform slope samples used to bracket dead-load solutions.
const SLOPE_SAMPLES: usize = 200;

/// Worker count from `LVIM_THREADS`; unset, empty or `0` means serial.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("LVIM_THREADS") {
        Err(_) => Ok(1),
        Ok(s) if s.trim().is_empty() => Ok(1),
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("LVIM_THREADS must be a non-negative integer, got {s:?}")))?;
            Ok(n.max(1))
        }
    }
}

/// Applies `f` to every item on up to `threads` workers. Results keep the
/// order of `items` whatever the schedule.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("no worker panics while holding a slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot is filled"))
        .collect()
}

/// Header plus rows of already formatted fields.
pub struct SweepTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_curve(dir: &Path, name: &str, header: [&str; 3], traj: &Trajectory) -> Result<(), CliError> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let cols = traj.dim() + 1;
    w.write_record(&header[..cols])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(s.iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn pendulum_table(amplitudes: &[f64], threads: usize) -> Result<SweepTable, CliError> {
    let results = parallel_map(amplitudes, threads, |&a| pendulum_frequency_sweep(&[a]));
    let mut rows = Vec::new();
    for r in results {
        let (a, freq) = r?[0];
        rows.push(vec![fmt_f64(a), fmt_f64(freq), fmt_f64(2.0 * std::f64::consts::PI / freq)]);
    }
    Ok(SweepTable {
        header: vec!["amplitude", "frequency", "period"],
        rows,
    })
}

/// One elastica curve per `(a, c)` pair on `[0, 0.9 c]`.
pub fn elastica_curves(cases: &[(f64, f64)], threads: usize) -> Result<Vec<(f64, f64, &'static str, Trajectory)>, CliError> {
    let cfg = defaults_for("elastica")?.solver_config();
    let results = parallel_map(cases, threads, |&(a, c)| -> Result<_, CliError> {
        let regime = classify_elastica(a, c)?;
        let spec = elastica(a, c, ELASTICA_MARGIN)?;
        let traj = march(spec.system.as_ref(), spec.t0, spec.tf, &spec.x0, &cfg)?;
        Ok((a, c, regime.label(), traj))
    });
    results.into_iter().collect()
}

/// Brackets `(lo, hi)` of initial slopes in `(0, 2√P)` across which `θ′(1)`
/// of the dead-load bar changes sign.
pub fn dead_load_brackets(load: f64, integrator: &ShotIntegrator) -> Result<Vec<(f64, f64)>, CliError> {
    if !(load > 0.0) {
        return Ok(Vec::new());
    }
    let top = 2.0 * load.sqrt();
    let mut slopes: Vec<f64> = (1..SLOPE_SAMPLES).map(|k| top * k as f64 / SLOPE_SAMPLES as f64).collect();
    // solutions crowd towards the separatrix slope 2√P
    slopes.extend((3..=10).map(|k| top * (1.0 - 10f64.powi(-k))));
    let spec = buckled_bar(LoadType::Dead, load, 0.0)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut brackets = Vec::new();
    for v in slopes {
        let traj = match integrator {
            ShotIntegrator::Lvim(cfg) => march(spec.system.as_ref(), 0.0, 1.0, &[0.0, v], cfg)?,
            ShotIntegrator::Rk(cfg) => lvim::rk::rk45_integrate(spec.system.as_ref(), 0.0, 1.0, &[0.0, v], cfg)?,
        };
        let r = traj.final_state()[1];
        if let Some((pv, pr)) = prev {
            if pr.signum() != r.signum() {
                brackets.push((pv, v));
            }
        }
        prev = Some((v, r));
    }
    Ok(brackets)
}

/// Every non-trivial solution for each load: one per sign change of
/// `θ′(1)` for the dead load, one from the default guesses for followers.
pub fn bar_solutions(load_type: LoadType, loads: &[f64], threads: usize) -> Result<Vec<Vec<ShotResult>>, CliError> {
    let integrator = ShotIntegrator::lvim_default();
    let results = parallel_map(loads, threads, |&load| -> Result<Vec<ShotResult>, CliError> {
        if load_type.is_follower() {
            let r = solve_buckled_bar(load_type, load, FOLLOWER_GUESSES, &ShootingOptions::default(), &integrator)?;
            return Ok(vec![r]);
        }
        let mut out = Vec::new();
        for (lo, hi) in dead_load_brackets(load, &integrator)? {
            let options = ShootingOptions {
                window: Some((lo, hi)),
                ..ShootingOptions::default()
            };
            out.push(solve_buckled_bar(load_type, load, (lo, hi), &options, &integrator)?);
        }
        Ok(out)
    });
    results.into_iter().collect()
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let threads = thread_count()?;
    if let Some(dir) = &args.curve_dir {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let table = match args.kind {
        SweepKind::PendulumFrequency => {
            let amps = match &args.amplitudes {
                Some(a) => a.clone(),
                None => {
                    if args.count < 2 {
                        return Err(CliError::usage("--count must be at least 2"));
                    }
                    let step = (args.to - args.from) / (args.count - 1) as f64;
                    (0..args.count).map(|k| args.from + k as f64 * step).collect()
                }
            };
            pendulum_table(&amps, threads)?
        }
        SweepKind::ElasticaRegimes => {
            let cases = args.cases.clone().unwrap_or_else(|| ELASTICA_DEFAULT_CASES.to_vec());
            let curves = elastica_curves(&cases, threads)?;
            let mut rows = Vec::new();
            for (i, (a, c, regime, traj)) in curves.iter().enumerate() {
                if let Some(dir) = &args.curve_dir {
                    write_curve(dir, &format!("elastica_{i}_{regime}.csv"), ["x", "y", ""], traj)?;
                }
                for (x, s) in traj.times.iter().zip(&traj.states) {
                    rows.push(vec![
                        i.to_string(),
                        fmt_f64(*a),
                        fmt_f64(*c),
                        regime.to_string(),
                        fmt_f64(*x),
                        fmt_f64(s[0]),
                    ]);
                }
                writeln!(stderr, "curve {i}: a = {a}, c = {c}, {regime} family, y(end) = {}", traj.final_state()[0])?;
            }
            SweepTable {
                header: vec!["curve", "a", "c", "regime", "x", "y"],
                rows,
            }
        }
        SweepKind::BarLoad => {
            let solutions = bar_solutions(args.load_type, &args.loads, threads)?;
            let mut rows = Vec::new();
            for (load, sols) in args.loads.iter().zip(&solutions) {
                if sols.is_empty() {
                    writeln!(stderr, "P = {load}: only the straight solution")?;
                }
                for (k, r) in sols.iter().enumerate() {
                    writeln!(
                        stderr,
                        "P = {load}, solution {k}: theta'(0) = {:.12}, tip angle {:.12}",
                        r.theta_prime_0,
                        r.tip_angle()
                    )?;
                    if let Some(dir) = &args.curve_dir {
                        let name = format!("bar_{}_P{load}_{k}.csv", r.load_type);
                        write_curve(dir, &name, ["s", "theta", "theta_prime"], &r.trajectory)?;
                    }
                    for (s, st) in r.trajectory.times.iter().zip(&r.trajectory.states) {
                        rows.push(vec![
                            fmt_f64(*load),
                            k.to_string(),
                            fmt_f64(r.theta_prime_0),
                            fmt_f64(*s),
                            fmt_f64(st[0]),
                            fmt_f64(st[1]),
                        ]);
                    }
                }
            }
            SweepTable {
                header: vec!["load", "solution", "theta_prime_0", "s", "theta", "theta_prime"],
                rows,
            }
        }
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            table.write(BufWriter::new(file))?;
        }
        None => table.write(stdout)?,
    }
    Ok(exit::SUCCESS)
}
