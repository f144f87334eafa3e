use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Full-precision scientific notation (shortest round-trip digits).
pub(crate) fn num(v: f64) -> String {
    format!("{v:e}")
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Writes a file through a sibling temporary and a rename, so readers never
/// see a truncated file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut set = StagedFiles::default();
    set.stage(path, bytes)?;
    set.commit()
}

/// Files written to temporaries and renamed into place together. Anything
/// not committed is removed on drop.
#[derive(Default)]
pub(crate) struct StagedFiles {
    staged: Vec<(PathBuf, PathBuf)>,
}

impl StagedFiles {
    pub(crate) fn stage(&mut self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        let tmp = temp_path(path);
        fs::write(&tmp, bytes)?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub(crate) fn commit(mut self) -> io::Result<()> {
        for (tmp, dest) in std::mem::take(&mut self.staged) {
            fs::rename(&tmp, &dest)?;
        }
        Ok(())
    }
}

impl Drop for StagedFiles {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}

/// Writes to a file atomically, or to `stdout` when no path is given.
pub(crate) fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn io::Write) -> io::Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    }
}
