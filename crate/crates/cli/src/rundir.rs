//! Timestamped output directories.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Utc;

/// Creates `<root>/<command>-<UTC timestamp>`, adding `-2`, `-3`, ... when
/// that name is taken. An existing directory is never reused.
pub fn create(root: &Path, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let stamp = Utc::now().format("%Y%m%dT%H%M%SZ");
    for k in 1.. {
        let name = if k == 1 { format!("{command}-{stamp}") } else { format!("{command}-{stamp}-{k}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    unreachable!()
}

pub fn writer(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let p = dir.join(name);
    Ok(BufWriter::new(fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut w = writer(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = writer(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let p = dir.join(name);
    let f = fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?;
    serde_json::from_reader(std::io::BufReader::new(f)).with_context(|| format!("parsing {}", p.display()))
}
