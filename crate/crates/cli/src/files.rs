//! File access with path-qualified errors and atomic writes.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::User(format!("cannot open {}: {e}", path.display())))
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Writes through a sibling temporary file and renames it over `path`, so
/// readers never see a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> gsi_core::error::Result<()>,
{
    let tmp = temp_path(path);
    let result = (|| {
        let file = File::create(&tmp).map_err(|e| CliError::User(format!("cannot create {}: {e}", tmp.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(|e| CliError::from_core(e).context(path))?;
        w.flush()
            .and_then(|_| w.get_ref().sync_all())
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
        fs::rename(&tmp, path).map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Default diagnostics path: `out.csv` becomes `out.csv.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
