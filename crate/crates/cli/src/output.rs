//! Artifact writer honouring the configured formats.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.output_dir)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
        Ok(Self { dir: cfg.output_dir.clone(), formats: cfg.formats.clone(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.formats.contains(&Format::Json) {
            return Ok(());
        }
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        let p = self.path(name);
        fs::write(&p, s).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))
    }

    /// Writes `text` to a file and echoes it to stdout.
    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        print!("{text}");
        if !self.formats.contains(&Format::Text) {
            return Ok(());
        }
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))
    }

    pub fn csv<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(BufWriter<fs::File>) -> mapvol::Result<()>,
    {
        if !self.formats.contains(&Format::Csv) {
            return Ok(());
        }
        let p = self.path(name);
        let f = fs::File::create(&p).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))?;
        write(BufWriter::new(f)).map_err(CliError::from)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<(), CliError> {
        if !self.formats.contains(&Format::Svg) {
            return Ok(());
        }
        let p = self.path(name);
        fs::write(&p, svg).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
