//! Small filesystem helpers shared by the pipeline stages.

use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Write a file atomically: write to a sibling temp file, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let display = path.display().to_string();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(&display, e))?;
        }
    }
    let tmp = path.with_extension("tmp_write");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&display, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&display, e))?;
        f.sync_all().map_err(|e| Error::io(&display, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(&display, e))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}
