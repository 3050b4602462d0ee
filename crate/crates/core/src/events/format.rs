//! Event list CSV: `port,x,y,t_ns`, one pixel event per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::path::{Path, PathBuf};

use super::{PhotonEvent, Port};
use crate::error::{Error, Result};
use crate::io::fmt_f64;

pub const EVENT_HEADER: &str = "port,x,y,t_ns";

/// Writes events and returns how many were written.
pub fn write_events<I>(path: &Path, events: I) -> Result<u64>
where
    I: IntoIterator<Item = PhotonEvent>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{EVENT_HEADER}").map_err(io)?;
    let mut n = 0;
    for ev in events {
        writeln!(w, "{},{},{},{}", ev.port, fmt_f64(ev.x), fmt_f64(ev.y), fmt_f64(ev.t)).map_err(io)?;
        n += 1;
    }
    w.flush().map_err(io)?;
    Ok(n)
}

/// Streaming reader; yields one `Result` per data line.
pub struct EventReader {
    path: PathBuf,
    lines: Lines<BufReader<fs::File>>,
    lineno: usize,
}

impl EventReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        match lines.next() {
            None => Err(Error::Empty(path.display().to_string())),
            Some(Err(e)) => Err(Error::io(path, e)),
            Some(Ok(h)) if h.trim() != EVENT_HEADER => Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: format!("expected header `{EVENT_HEADER}`"),
            }),
            Some(Ok(_)) => Ok(Self {
                path: path.to_path_buf(),
                lines,
                lineno: 1,
            }),
        }
    }

    fn parse(&self, line: &str) -> Result<PhotonEvent> {
        let err = |msg: String| Error::Parse {
            path: self.path.clone(),
            line: self.lineno,
            msg,
        };
        let toks: Vec<&str> = line.split(',').map(str::trim).collect();
        if toks.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", toks.len())));
        }
        let port: Port = toks[0].parse().map_err(|e| err(format!("{e}")))?;
        let num = |k: usize| -> Result<f64> {
            toks[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number `{}`", toks[k])))
        };
        Ok(PhotonEvent {
            port,
            x: num(1)?,
            y: num(2)?,
            t: num(3)?,
        })
    }
}

impl Iterator for EventReader {
    type Item = Result<PhotonEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.lineno += 1;
            match line {
                Err(e) => return Some(Err(Error::io(&self.path, e))),
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => return Some(self.parse(&l)),
            }
        }
    }
}

pub fn read_events(path: &Path) -> Result<Vec<PhotonEvent>> {
    EventReader::open(path)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ev.csv");
        let evs = vec![
            PhotonEvent { port: Port::C, x: 1.0, y: 2.0, t: 0.1 + 0.2 },
            PhotonEvent { port: Port::D, x: 255.0, y: 0.0, t: 1.0e10 / 3.0 },
        ];
        assert_eq!(write_events(&p, evs.clone()).unwrap(), 2);
        assert_eq!(read_events(&p).unwrap(), evs);
    }

    #[test]
    fn malformed_line_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ev.csv");
        fs::write(&p, "port,x,y,t_ns\nC,1,2,3\nE,1,2,3\n").unwrap();
        match read_events(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "port,x,y,t_ns\nC,1,2\n").unwrap();
        assert!(matches!(read_events(&p), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "").unwrap();
        assert!(matches!(read_events(&p), Err(Error::Empty(_))));
    }
}
