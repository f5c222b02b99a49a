//! Command-line front end for the `photon-echo` simulator: single runs,
//! parameter sweeps and phase-matching scans rendered as tables, JSON or CSV.

pub mod args;
pub mod config;
pub mod error;
pub mod report;

use std::fs;
use std::path::Path;

use photon_echo::{observe, random_directions, sample_atoms, BeamGeometry, DirectionalResponse, Vector3};

pub use args::{Cli, Command, CommonArgs, Format, ProtocolName, ScanArgs, SweepArgs, SweepParam};
pub use config::{Epsilon, RunConfig};
pub use error::{CliError, Result};
pub use report::{render_run, render_runs, render_scan, RunRecord, ScanOutcome};

use error::usage;

/// Stream offset separating the direction sampler from the atom sampler.
const DIRECTION_STREAM: u64 = 0xD1B5_4A32_D192_ED03;

pub fn cmd_run(config: &RunConfig) -> Result<RunRecord> {
    let spec = config.spec()?;
    let report = observe(&config.protocol()?, &spec)?;
    Ok(RunRecord::new(config.name(), spec.n_atoms, spec.epsilon, config.shape(), report))
}

pub fn cmd_sweep(config: &RunConfig, param: SweepParam, values: &[f64]) -> Result<Vec<RunRecord>> {
    if values.is_empty() {
        return usage("sweep needs at least one value");
    }
    values.iter().map(|&v| cmd_run(&config.with_param(param, v)?)).collect()
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: f64) -> Result<Vec<f64>> {
    if count.fract() != 0.0 || count < 1.0 {
        return usage(format!("range count must be a positive integer, got {count}"));
    }
    let n = count as usize;
    if n == 1 {
        return Ok(vec![start]);
    }
    Ok((0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect())
}

/// Reads observation directions, one `x,y,z` (or whitespace separated)
/// triple per line. Blank lines, `#` comments and a `direction_x` header are
/// skipped; extra columns are ignored.
pub fn read_directions(path: &Path) -> Result<Vec<Vector3<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("direction_x") {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let coords: Option<Vec<f64>> = parts.iter().take(3).map(|s| s.parse().ok()).collect();
        match coords {
            Some(c) if c.len() == 3 && c.iter().all(|v| v.is_finite()) && c.iter().any(|&v| v != 0.0) => {
                out.push(Vector3::new(c[0], c[1], c[2]).normalize());
            }
            _ => return usage(format!("{}:{}: expected a non-zero x,y,z triple, got {line:?}", path.display(), n + 1)),
        }
    }
    if out.is_empty() {
        return usage(format!("{} contains no directions", path.display()));
    }
    Ok(out)
}

pub fn cmd_scan_phase_matching(args: &ScanArgs) -> Result<ScanOutcome> {
    if args.m == 0 {
        return usage("--m must be at least 1");
    }
    let geometry = match args.box_size.as_slice() {
        &[s] => [s; 3],
        &[x, y, z] => [x, y, z],
        other => return usage(format!("--box takes one or three values, got {}", other.len())),
    };
    let mut config = RunConfig::from_args(&args.common)?;
    config.n_atoms = args.m as f64;
    let protocol = config.protocol()?;
    let eps = config.epsilon();
    let beams = BeamGeometry::tilted(args.tilt)?;
    let matched = beams.matched_direction()?;
    let others = match &args.directions {
        Some(path) => read_directions(path)?,
        None if args.n_directions == 0 => return usage("--n-directions must be at least 1"),
        None => random_directions(args.n_directions, args.common.seed ^ DIRECTION_STREAM),
    };
    let ens = sample_atoms(args.m, geometry, args.common.seed)?;
    let response = DirectionalResponse::compute(&protocol, &ens, &beams, protocol.echo_time())?;
    let mut directions = vec![matched];
    directions.extend(others);
    let rows = response.scan(&directions)?;
    let mut rest: Vec<f64> = rows[1..].iter().map(|r| r.intensity).collect();
    rest.sort_by(f64::total_cmp);
    let median = match rest.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => rest[n / 2],
        n => (rest[n / 2 - 1] + rest[n / 2]) / 2.0,
    };
    let fluorescence = response.fluorescence();
    Ok(ScanOutcome {
        m: args.m,
        epsilon: eps,
        matched_direction: [matched.x, matched.y, matched.z],
        fluorescence,
        matched_snr: if fluorescence > 0.0 { rows[0].intensity / fluorescence } else { f64::NAN },
        matched_over_median: rows[0].intensity / median,
        rows,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs a parsed command line and writes its output.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let record = cmd_run(&RunConfig::from_args(args)?)?;
            emit(&render_run(&record, args.format)?, args.out.as_deref())
        }
        Command::Sweep(args) => {
            let values = match &args.range {
                Some(r) => linspace(r[0], r[1], r[2])?,
                None => args.values.clone(),
            };
            let records = cmd_sweep(&RunConfig::from_args(&args.common)?, args.param, &values)?;
            emit(&render_runs(&records, args.common.format)?, args.common.out.as_deref())
        }
        Command::ScanPhaseMatching(args) => {
            let scan = cmd_scan_phase_matching(args)?;
            emit(&render_scan(&scan, args.common.format)?, args.common.out.as_deref())
        }
    }
}
