use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::experiments::ExperimentRecord;
use super::HarnessError;

/// Paths written for one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub realizations_csv: Option<PathBuf>,
    pub json: PathBuf,
}

/// Writes `<stem>.csv`, `<stem>_realizations.csv` (when present) and the
/// `<stem>.json` sidecar into `dir`, creating it if needed.
pub fn write_record(record: &ExperimentRecord, dir: &Path) -> Result<OutputFiles, HarnessError> {
    fs::create_dir_all(dir)?;
    let stem = record.config.output_stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    write_table(&record.table, &csv_path)?;
    let realizations_csv = match &record.realizations {
        Some(t) => {
            let p = dir.join(format!("{stem}_realizations.csv"));
            write_table(t, &p)?;
            Some(p)
        }
        None => None,
    };
    let sidecar = json!({
        "kind": record.kind,
        "config": record.config,
        "csv": file_name(&csv_path),
        "realizations_csv": realizations_csv.as_deref().map(file_name),
        "columns": record.table.columns,
        "summary": record.summary,
        "n_skipped": record.skips.len(),
        "skips": record.skips,
        "seeds": record.seeds,
    });
    let json_path = dir.join(format!("{stem}.json"));
    let mut w = BufWriter::new(File::create(&json_path)?);
    serde_json::to_writer_pretty(&mut w, &sidecar).map_err(|e| HarnessError::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(OutputFiles {
        csv: csv_path,
        realizations_csv,
        json: json_path,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_table(t: &super::Table, path: &Path) -> Result<(), HarnessError> {
    let f = BufWriter::new(File::create(path)?);
    t.write_csv(f).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}
