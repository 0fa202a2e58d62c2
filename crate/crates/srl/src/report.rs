//! Deterministic CSV/JSON emission.
//!
//! Reals print with 17 significant digits and a '.' decimal point, enough
//! for exact double round-trips, so reruns of the same seed produce
//! byte-identical files. File writes go through a temp file and rename.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// 17 significant digits, locale-independent.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `content` atomically: temp file in the same directory, then
/// rename over the target.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| Error::Io(format!("create {}: {e}", tmp.display())))?;
        f.write_all(content.as_bytes())
            .map_err(|e| Error::Io(format!("write {}: {e}", tmp.display())))?;
        f.sync_all()
            .map_err(|e| Error::Io(format!("sync {}: {e}", tmp.display())))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        Error::Io(format!(
            "rename {} -> {}: {e}",
            tmp.display(),
            path.display()
        ))
    })?;
    Ok(())
}

/// Writes to the path when given, otherwise to stdout. A consumer that
/// closes the pipe early (`head`, `less q`) is not an error.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => atomic_write(path, content),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match lock
                .write_all(content.as_bytes())
                .and_then(|_| lock.flush())
            {
                Ok(()) => Ok(()),
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(Error::Io(e.to_string())),
            }
        }
    }
}

/// A CSV table under construction; owns the header/row-width contract.
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            out: format!("{}\n", header.join(",")),
            width: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.width, "csv row width");
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub fn int_field(v: usize) -> String {
    v.to_string()
}

pub fn u64_field(v: u64) -> String {
    v.to_string()
}

pub fn bool_field(v: bool) -> String {
    if v {
        "1".into()
    } else {
        "0".into()
    }
}
