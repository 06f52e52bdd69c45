//! Plot-ready exports of results directories.
//!
//! Produces three long-format CSVs (`series,t,value`), one per panel:
//! normalized cumulative regret, utility deviation and parameter deviation,
//! plus a `plot-meta.json` sidecar naming axes and scales. Values are copied
//! verbatim from the per-seed metrics files and `summary.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};

/// `(output file stem, metrics column, summary column, y label, y scale)`.
const PANELS: [(&str, &str, &str, &str, &str); 3] = [
    ("regret", "norm_regret", "norm_regret_mean", "normalized cumulative regret Reg(t)/R(S*)", "log"),
    ("util_dev", "util_dev", "util_dev_mean", "‖θᵀX − v‖ / ‖v‖", "linear"),
    ("theta_dev", "theta_dev", "theta_dev_mean", "‖θ − θ*‖ / ‖θ*‖", "linear"),
];

struct ResultsDir {
    label: String,
    seeds: Vec<(usize, PathBuf)>,
    summary: PathBuf,
}

fn scan(dir: &Path) -> Result<ResultsDir> {
    let config = dir.join("config.json");
    if !config.is_file() {
        return Err(Error::MissingFile(config));
    }
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&config)?)?;
    let label = doc.get("agent").and_then(|a| a.as_str()).unwrap_or("agent").to_string();
    let summary = dir.join("summary.csv");
    if !summary.is_file() {
        return Err(Error::MissingFile(summary));
    }
    let mut seeds = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(idx) = name.strip_prefix("metrics-").and_then(|s| s.strip_suffix(".csv")) {
            if let Ok(idx) = idx.parse::<usize>() {
                seeds.push((idx, path));
            }
        }
    }
    if seeds.is_empty() {
        return Err(Error::MissingFile(dir.join("metrics-0.csv")));
    }
    seeds.sort();
    Ok(ResultsDir { label, seeds, summary })
}

/// `(t, value)` string pairs of one column, untouched.
fn column(path: &Path, name: &str) -> Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("{} has no column `{name}`", path.display())))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push((row[0].to_string(), row[idx].to_string()));
    }
    Ok(out)
}

/// Writes `regret.csv`, `util_dev.csv`, `theta_dev.csv` and `plot-meta.json`
/// into `out_dir`. Each results directory contributes one series per seed
/// (`<agent>/seed-<k>`) and its cross-seed mean (`<agent>/mean`).
pub fn export_plot(results: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = results.iter().map(|d| scan(d)).collect::<Result<Vec<_>>>()?;
    // Disambiguate repeated agent labels by directory name.
    for i in 0..dirs.len() {
        if dirs.iter().filter(|d| d.label == dirs[i].label).count() > 1 {
            let tag = results[i].file_name().and_then(|n| n.to_str()).unwrap_or("run").to_string();
            dirs[i].label = format!("{}@{tag}", dirs[i].label);
        }
    }

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut meta = serde_json::Map::new();
    for (stem, metric, mean_col, ylabel, scale) in PANELS {
        let path = out_dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["series", "t", "value"])?;
        for d in &dirs {
            for (seed, file) in &d.seeds {
                let name = format!("{}/seed-{seed}", d.label);
                for (t, v) in column(file, metric)? {
                    w.write_record([name.as_str(), &t, &v])?;
                }
            }
            let name = format!("{}/mean", d.label);
            for (t, v) in column(&d.summary, mean_col)? {
                w.write_record([name.as_str(), &t, &v])?;
            }
        }
        w.flush()?;
        meta.insert(
            stem.to_string(),
            json!({ "file": format!("{stem}.csv"), "x": "t", "x_scale": "linear", "y": ylabel, "y_scale": scale }),
        );
        written.push(path);
    }
    let meta_path = out_dir.join("plot-meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")?;
    written.push(meta_path);
    Ok(written)
}
