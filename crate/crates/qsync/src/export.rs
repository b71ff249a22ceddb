//! CSV, JSON and SVG writers. Every file carries the provenance block.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::artifact::{Provenance, RunArtifact};
use crate::error::{Error, Result};
use crate::scenario::Format;
use crate::svg;

/// Formats a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

pub fn provenance_json(p: &Provenance) -> Result<String> {
    serde_json::to_string(p).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes the requested formats into `dir` and returns the created paths.
pub fn export(artifact: &RunArtifact, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let stem = artifact.provenance.scenario.name.clone();
    let mut written = Vec::new();
    for format in formats {
        let files = match format {
            Format::Csv => csv_files(artifact)?,
            Format::Json => vec![(format!("{stem}.json"), artifact.to_json()?.into_bytes())],
            Format::Svg => svg_files(artifact)?,
        };
        for (name, bytes) in files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(Error::io(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// In-memory CSV documents as `(file name, bytes)`.
pub fn csv_files(artifact: &RunArtifact) -> Result<Vec<(String, Vec<u8>)>> {
    let stem = &artifact.provenance.scenario.name;
    let prov = provenance_json(&artifact.provenance)?;
    let mut files = Vec::new();
    if let Some(table) = &artifact.trajectory {
        let mut header = vec!["t [1/omega1]".to_string()];
        header.extend(table.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)));
        let rows = table.times.iter().enumerate().map(|(k, t)| {
            std::iter::once(format_f64(*t))
                .chain(table.columns.iter().map(|c| format_f64(c.values[k])))
                .collect::<Vec<_>>()
        });
        files.push((format!("{stem}.csv"), csv_document(&prov, &header, rows)?));
    }
    if !artifact.sync.is_empty() {
        let times = artifact
            .trajectory
            .as_ref()
            .map(|t| t.times.clone())
            .unwrap_or_default();
        let mut header = vec!["t [1/omega1]".to_string()];
        header.extend(artifact.sync.iter().map(|s| format!("C({},{}) [1]", s.a, s.b)));
        let rows = times.iter().enumerate().map(|(k, t)| {
            std::iter::once(format_f64(*t))
                .chain(
                    artifact
                        .sync
                        .iter()
                        .map(|s| format_opt(s.pearson.get(k).copied().flatten())),
                )
                .collect::<Vec<_>>()
        });
        files.push((format!("{stem}_pearson.csv"), csv_document(&prov, &header, rows)?));
    }
    if let Some(spec) = &artifact.spectrum {
        let header = ["re [omega1]", "im [omega1]"].map(String::from);
        let rows = spec
            .eigenvalues
            .iter()
            .map(|[re, im]| vec![format_f64(*re), format_f64(*im)]);
        files.push((format!("{stem}_spectrum.csv"), csv_document(&prov, &header, rows)?));
    }
    if let Some(scan) = &artifact.dephasing_scan {
        let header = ["gamma_z [omega1]", "gap_ratio [1]", "max_shift_error [omega1]"].map(String::from);
        let rows = (0..scan.gamma_z.len()).map(|k| {
            vec![
                format_f64(scan.gamma_z[k]),
                format_opt(scan.gap_ratio[k]),
                format_f64(scan.max_shift_error[k]),
            ]
        });
        files.push((format!("{stem}_dephasing.csv"), csv_document(&prov, &header, rows)?));
    }
    if let Some(sweep) = &artifact.sweep {
        let header = ["lambda [omega1^2]", "omega2 [omega1]", "abs_C [1]"].map(String::from);
        let n = sweep.omegas.len();
        let rows = (0..sweep.values.len()).map(|k| {
            vec![
                format_f64(sweep.lambdas[k / n]),
                format_f64(sweep.omegas[k % n]),
                format_opt(sweep.values[k]),
            ]
        });
        files.push((format!("{stem}_sweep.csv"), csv_document(&prov, &header, rows)?));
    }
    Ok(files)
}

fn csv_document<I>(provenance: &str, header: &[String], rows: I) -> Result<Vec<u8>>
where
    I: Iterator<Item = Vec<String>>,
{
    let mut buf = Vec::new();
    writeln!(buf, "# {provenance}").map_err(|e| Error::Serialize(e.to_string()))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf);
    let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn svg_files(artifact: &RunArtifact) -> Result<Vec<(String, Vec<u8>)>> {
    let stem = &artifact.provenance.scenario.name;
    let prov = provenance_json(&artifact.provenance)?;
    let mut files = Vec::new();
    if let Some(table) = &artifact.trajectory {
        files.push((
            format!("{stem}.svg"),
            svg::trajectory_chart(table, &artifact.sync, &prov).into_bytes(),
        ));
    }
    if let Some(sweep) = &artifact.sweep {
        files.push((format!("{stem}_sweep.svg"), svg::heatmap(sweep, &prov).into_bytes()));
    }
    Ok(files)
}
