use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CliError, CliResult, ExperimentConfig, SCHEMA};

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    schema: u32,
    config: &'a ExperimentConfig,
    result: &'a R,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Write `bytes` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

/// Emit to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

pub fn report_bytes<R: Serialize>(config: &ExperimentConfig, result: &R) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Report { schema: SCHEMA, config, result })
        .map_err(|e| CliError::Data(format!("serializing report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn is_csv(out: Option<&Path>) -> bool {
    out.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Serialize rows with a header into CSV bytes.
pub fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}
