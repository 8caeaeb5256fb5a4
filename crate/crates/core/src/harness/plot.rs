use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{write_atomic, ExperimentReport, Provenance};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotEntry {
    pub file: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub provenance: Provenance,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotManifest {
    pub experiment: String,
    pub config_hash: String,
    pub figures: Vec<PlotEntry>,
}

/// One `<series>.dat` per series (`x y` rows after a `#` header line) plus
/// `manifest.json`. Returns the paths written, manifest last.
pub fn emit_plot_data(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut figures = Vec::new();
    for s in &report.series {
        let file = format!("{}.dat", s.name);
        let mut text = format!("# {}\t{}\n", s.x_label, s.y_label);
        for [x, y] in &s.points {
            writeln!(text, "{x}\t{y}").expect("writing to a string");
        }
        let path = dir.join(&file);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
        figures.push(PlotEntry {
            file,
            title: s.title.clone(),
            x_label: s.x_label.clone(),
            y_label: s.y_label.clone(),
            provenance: s.provenance,
            rows: s.points.len(),
        });
    }
    let manifest = PlotManifest {
        experiment: report.experiment.clone(),
        config_hash: report.config_hash.clone(),
        figures,
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;
    written.push(path);
    Ok(written)
}
