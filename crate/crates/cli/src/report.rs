use photon_echo::{ObservableReport, ScanRow, Vector3, CLASSICAL_FIDELITY_LIMIT};
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::error::Result;

/// One simulated run, as written by every output format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: String,
    pub n_atoms: f64,
    pub epsilon: f64,
    pub separation: Option<f64>,
    pub theta2: Option<f64>,
    pub theta3: Option<f64>,
    #[serde(flatten)]
    pub report: ObservableReport,
    /// Best fidelity achievable by measure-and-prepare storage.
    pub classical_fidelity_limit: f64,
}

impl RunRecord {
    pub fn new(
        protocol: &str,
        n_atoms: f64,
        epsilon: f64,
        shape: Option<(f64, f64, f64)>,
        report: ObservableReport,
    ) -> Self {
        Self {
            protocol: protocol.to_owned(),
            n_atoms,
            epsilon,
            separation: shape.map(|s| s.0),
            theta2: shape.map(|s| s.1),
            theta3: shape.map(|s| s.2),
            report,
            classical_fidelity_limit: CLASSICAL_FIDELITY_LIMIT,
        }
    }

    /// Column names and values in output order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let r = &self.report;
        vec![
            ("protocol", self.protocol.clone()),
            ("n_atoms", num(self.n_atoms)),
            ("epsilon", num(self.epsilon)),
            ("separation", opt(self.separation)),
            ("theta2", opt(self.theta2)),
            ("theta3", opt(self.theta3)),
            ("polarization_initial_re", num(r.polarization_initial.re)),
            ("polarization_initial_im", num(r.polarization_initial.im)),
            ("polarization_echo_re", num(r.polarization_echo.re)),
            ("polarization_echo_im", num(r.polarization_echo.im)),
            ("i_echo", num(r.i_echo)),
            ("i_input", num(r.i_input)),
            ("i_noise", num(r.i_noise)),
            ("snr", num(r.snr)),
            ("efficiency_bound", num(r.efficiency_bound)),
            ("fidelity", num(r.fidelity)),
            ("classical_fidelity_limit", num(self.classical_fidelity_limit)),
        ]
    }
}

/// Formats like a JSON number (shortest representation that parses back to
/// the same `f64`), with `inf`/`NaN` for non-finite values.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        v.to_string()
    }
}

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn columns(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out += &line(row.iter().map(|c| if c.is_empty() { "-" } else { c.as_str() }).collect());
    }
    out
}

/// Renders a single run.
pub fn render_run(record: &RunRecord, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(record)? + "\n"),
        Format::Csv => render_runs(std::slice::from_ref(record), Format::Csv),
        Format::Table => {
            let fields = record.fields();
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            Ok(fields.iter().map(|(k, v)| format!("{k:<width$}  {}\n", if v.is_empty() { "-" } else { v })).collect())
        }
    }
}

/// Renders sweep results, one row per run in input order.
pub fn render_runs(records: &[RunRecord], format: Format) -> Result<String> {
    let header: Vec<&str> = match records.first() {
        Some(r) => r.fields().iter().map(|(k, _)| *k).collect(),
        None => return Ok(String::new()),
    };
    let rows: Vec<Vec<String>> = records.iter().map(|r| r.fields().into_iter().map(|(_, v)| v).collect()).collect();
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(records)? + "\n"),
        Format::Csv => csv_string(&header, rows.into_iter()),
        Format::Table => Ok(columns(&header, &rows)),
    }
}

/// Result of a phase-matching scan. The first row is the matched direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub m: usize,
    pub epsilon: f64,
    pub matched_direction: [f64; 3],
    pub fluorescence: f64,
    pub matched_snr: f64,
    /// Matched intensity over the median of the other rows.
    pub matched_over_median: f64,
    pub rows: Vec<ScanRow>,
}

impl ScanOutcome {
    pub fn matched(&self) -> Vector3<f64> {
        Vector3::from(self.matched_direction)
    }
}

pub fn render_scan(scan: &ScanOutcome, format: Format) -> Result<String> {
    let header = ["direction_x", "direction_y", "direction_z", "intensity"];
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| [r.direction_x, r.direction_y, r.direction_z, r.intensity].map(num).to_vec())
        .collect();
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(scan)? + "\n"),
        Format::Csv => {
            let mut buf = Vec::new();
            photon_echo::write_scan_csv(&scan.rows, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
        }
        Format::Table => {
            let mut out = format!(
                "# M = {}, epsilon = {}, fluorescence = {}\n# matched SNR = {}, matched/median = {}\n",
                scan.m,
                num(scan.epsilon),
                num(scan.fluorescence),
                num(scan.matched_snr),
                num(scan.matched_over_median)
            );
            out += &columns(&header, &rows);
            Ok(out)
        }
    }
}
