//! Lens and bare-array bounds over a grid of lens widths and arrival angles.

use std::path::{Path, PathBuf};

use lens_crlb::fisher::{crlb_lens, crlb_ula, d_moments, positivity_margin};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{CliError, Result};
use crate::format::sig12;
use crate::plot;

pub const SWEEP_HEADER: [&str; 8] = [
    "phi_deg",
    "sigma_c",
    "crlb_lens",
    "crlb_ula",
    "d0",
    "d1",
    "d2",
    "margin",
];
pub const SWEEP_FILE: &str = "sweep.csv";
pub const PLOT_FILE: &str = "sweep.svg";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub phi_deg: f64,
    pub sigma_c: f64,
    pub crlb_lens: f64,
    pub crlb_ula: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub margin: f64,
}

impl SweepRow {
    fn fields(&self) -> [f64; 8] {
        [
            self.phi_deg,
            self.sigma_c,
            self.crlb_lens,
            self.crlb_ula,
            self.d0,
            self.d1,
            self.d2,
            self.margin,
        ]
    }
}

/// Rows ordered by lens width (outer, config order) then angle (inner, ascending).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Distinct lens widths in row order.
    pub fn sigma_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.sigma_c) {
                out.push(r.sigma_c);
            }
        }
        out
    }

    pub fn series(&self, sigma_c: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.sigma_c == sigma_c)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        w.write_record(SWEEP_HEADER).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.fields().map(sig12)).expect("in-memory write");
        }
        finish(w)
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let records = parse_csv(text, path, &SWEEP_HEADER)?;
        let rows = records
            .into_iter()
            .map(|f| SweepRow {
                phi_deg: f[0],
                sigma_c: f[1],
                crlb_lens: f[2],
                crlb_ula: f[3],
                d0: f[4],
                d1: f[5],
                d2: f[6],
                margin: f[7],
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_csv(&text, path)
    }
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is ASCII")
}

/// Parses a numeric CSV with the exact expected header.
pub(crate) fn parse_csv(text: &str, path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let malformed = |reason: String| CliError::Csv {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| malformed(e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(malformed(format!("expected header {}", header.join(","))));
    }
    reader
        .records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec.map_err(|e| malformed(e.to_string()))?;
            rec.iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|_| malformed(format!("row {}: '{field}' is not a number", line + 1)))
                })
                .collect()
        })
        .collect()
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Evaluates every `(sigma_c, phi)` pair. Grid points run in parallel; row
/// order is fixed by the grid, not by scheduling.
pub fn compute_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let cfg = config.array_config()?;
    let angles = config.phi_grid.degrees();
    let lenses = config
        .sigma_c_list
        .iter()
        .map(|&s| config.lens_config(s))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = (0..lenses.len())
        .flat_map(|li| angles.iter().map(move |&phi| (li, phi)))
        .collect();

    let rows = points
        .par_iter()
        .map(|&(li, phi_deg)| {
            let lens = &lenses[li];
            let params = config.signal_params(phi_deg)?;
            let m = d_moments(&cfg, lens, params.doa());
            let row = SweepRow {
                phi_deg,
                sigma_c: lens.sigma_c(),
                crlb_lens: crlb_lens(&cfg, lens, &params)?,
                crlb_ula: crlb_ula(&cfg, &params)?,
                d0: m.d0,
                d1: m.d1,
                d2: m.d2,
                margin: positivity_margin(&cfg, lens, params.doa()),
            };
            let positive = |v: f64| v.is_finite() && v > 0.0;
            if !(positive(row.crlb_lens) && positive(row.crlb_ula) && positive(row.margin)) {
                return Err(CliError::Numerical(format!(
                    "non-positive bound or margin at sigma_c = {}, phi = {phi_deg} deg: {row:?}",
                    lens.sigma_c()
                )));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

/// Computes the sweep and writes `sweep.csv` (and `sweep.svg` when the
/// output format asks for it) into `out_dir`.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<SweepOutput> {
    let result = compute_sweep(config)?;
    let csv_path = out_dir.join(SWEEP_FILE);
    write_file(&csv_path, &result.to_csv())?;
    let svg_path = match config.output.format {
        OutputFormat::Csv => None,
        OutputFormat::Svg => {
            let path = out_dir.join(PLOT_FILE);
            plot::emit_plot(&result, &path)?;
            Some(path)
        }
    };
    Ok(SweepOutput {
        result,
        csv_path,
        svg_path,
    })
}
