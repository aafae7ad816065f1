//! Append-only registry journal: one JSON object per line, tagged by `event`.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::AliasRecord;
use crate::codec::AliasCode;
use crate::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RegistryEvent {
    Issued {
        at: Timestamp,
        record: AliasRecord,
    },
    FirstUse {
        at: Timestamp,
        alias: AliasCode,
    },
    Expired {
        at: Timestamp,
        alias: AliasCode,
    },
    Revoked {
        at: Timestamp,
        alias: AliasCode,
    },
    ValidityChanged {
        at: Timestamp,
        alias: AliasCode,
        validity_days: Option<u32>,
    },
    Purged {
        alias: AliasCode,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal io: {0}")]
    Io(#[from] io::Error),
    #[error("journal line {line}: {source}")]
    Decode {
        line: usize,
        source: serde_json::Error,
    },
}

/// Read every event from a journal. Blank lines are skipped.
pub fn read_events<R: io::Read>(reader: R) -> Result<Vec<RegistryEvent>, JournalError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|source| JournalError::Decode {
            line: i + 1,
            source,
        })?;
        out.push(ev);
    }
    Ok(out)
}

pub fn write_events<W: Write>(mut w: W, events: &[RegistryEvent]) -> io::Result<()> {
    for ev in events {
        serde_json::to_writer(&mut w, ev)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Durable sink; every append is flushed before the call returns.
pub struct Journal {
    out: Box<dyn Write + Send + Sync>,
}

impl Journal {
    pub fn append_to(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Journal::from_writer(BufWriter::new(file)))
    }

    pub fn from_writer<W: Write + Send + Sync + 'static>(w: W) -> Self {
        Journal { out: Box::new(w) }
    }

    pub fn append(&mut self, ev: &RegistryEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, ev)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub(crate) fn open_existing(path: &Path) -> io::Result<Option<File>> {
    match File::open(path) {
        Ok(f) => Ok(Some(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}
