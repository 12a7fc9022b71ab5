use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// A CSV row with a fixed column order. The writer adds `experiment` in
/// front and `timestamp` at the end.
pub trait Record {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Seconds since the Unix epoch, shared by every row of one run.
pub fn run_timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn write_csv<R: Record, W: Write>(experiment: &str, rows: &[R], sink: W, timestamp: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["experiment"];
    header.extend_from_slice(R::HEADER);
    header.push("timestamp");
    w.write_record(&header)?;
    let ts = timestamp.to_string();
    for row in rows {
        let mut fields = vec![experiment.to_string()];
        fields.extend(row.fields());
        debug_assert_eq!(fields.len(), R::HEADER.len() + 1);
        fields.push(ts.clone());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// `<out>.config.json` next to the CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config.json");
    out.with_file_name(name)
}

pub fn write_sidecar<C: Serialize>(out: &Path, config: &C) -> Result<()> {
    let json = serde_json::to_string_pretty(config)?;
    std::fs::write(sidecar_path(out), json + "\n")?;
    Ok(())
}

/// Directory for plots: beside the CSV, or the working directory.
pub fn plot_dir(out: Option<&Path>) -> PathBuf {
    out.and_then(Path::parent)
        .filter(|p| !p.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

pub(crate) fn f(v: f64) -> String {
    v.to_string()
}
