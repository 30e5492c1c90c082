use std::io::Write;
use std::path::{Path, PathBuf};

use qvss::Error;
use tempfile::NamedTempFile;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FORMAT: u8 = 3;
pub const EXIT_INCOMPLETE: u8 = 4;
pub const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Size(_) | Error::Index { .. } | Error::Argument(_) => EXIT_USAGE,
            Error::Format { .. } | Error::Integrity(_) | Error::StateCorruption { .. } => EXIT_FORMAT,
            Error::IncompleteShares { .. } => EXIT_INCOMPLETE,
            Error::Io(_) => EXIT_IO,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::io(path, e))
}

/// Files staged next to their destination and renamed into place only once
/// every one of them has been written.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn add(&mut self, path: PathBuf, bytes: &[u8]) -> CliResult<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| Failure::io(&dir, e))?;
        tmp.write_all(bytes).map_err(|e| Failure::io(&path, e))?;
        tmp.as_file().sync_all().map_err(|e| Failure::io(&path, e))?;
        self.files.push((tmp, path));
        Ok(())
    }

    pub fn commit(self) -> CliResult<()> {
        for (tmp, path) in self.files {
            tmp.persist(&path).map_err(|e| Failure::io(&path, e.error))?;
        }
        Ok(())
    }
}

/// Writes one file atomically.
pub fn write_atomic(path: PathBuf, bytes: &[u8]) -> CliResult<()> {
    let mut staged = Staged::default();
    staged.add(path, bytes)?;
    staged.commit()
}

/// Uses the given seed or draws one and announces it for replay.
pub fn seed_or_entropy(seed: Option<u64>, what: &str) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        println!("{what} seed: {s} (pass --seed {s} to replay)");
        s
    })
}
