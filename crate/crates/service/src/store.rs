//! Append-only JSON-lines logs, one file per session.

use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::session::SessionEvent;

const SESSIONS_DIR: &str = "sessions";
const EXTENSION: &str = "jsonl";

#[derive(Debug, Clone, Default)]
pub struct EventStore {
    dir: Option<PathBuf>,
}

impl EventStore {
    /// Keeps nothing on disk; sessions die with the process.
    pub fn in_memory() -> Self {
        EventStore { dir: None }
    }

    pub fn open(data_dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = data_dir.as_ref().join(SESSIONS_DIR);
        fs::create_dir_all(&dir)?;
        Ok(EventStore { dir: Some(dir) })
    }

    pub fn is_persistent(&self) -> bool {
        self.dir.is_some()
    }

    fn path(dir: &Path, session_id: &str) -> PathBuf {
        dir.join(format!("{session_id}.{EXTENSION}"))
    }

    pub fn append(&self, session_id: &str, event: &SessionEvent) -> io::Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut line = serde_json::to_string(event).map_err(io::Error::other)?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(Self::path(dir, session_id))?;
        file.write_all(line.as_bytes())?;
        file.sync_data()
    }

    pub fn read(&self, session_id: &str) -> io::Result<Vec<SessionEvent>> {
        let Some(dir) = &self.dir else {
            return Ok(Vec::new());
        };
        read_log(&Self::path(dir, session_id))
    }

    /// Every stored log, ordered by session id.
    pub fn load_all(&self) -> io::Result<Vec<(String, Vec<SessionEvent>)>> {
        let Some(dir) = &self.dir else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(EXTENSION) {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            out.push((id.to_string(), read_log(&path)?));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
}

fn read_log(path: &Path) -> io::Result<Vec<SessionEvent>> {
    let file = fs::File::open(path)?;
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), n + 1),
            )
        })?;
        events.push(event);
    }
    Ok(events)
}
