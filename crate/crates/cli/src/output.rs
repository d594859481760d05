use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use neurodyn::Table;
use serde::Deserialize;

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct OutputArgs {
    /// Output file (parent directories are created). Standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl OutputArgs {
    pub fn destination(&self) -> String {
        match &self.out {
            Some(p) => p.display().to_string(),
            None => "stdout".into(),
        }
    }

    pub fn write(&self, table: &Table) -> Result<()> {
        match &self.out {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                emit(table, self.format, &mut w)?;
                w.flush()?;
            }
            None => {
                let mut buf = Vec::new();
                emit(table, self.format, &mut buf)?;
                let mut w = io::stdout().lock();
                // A closed pipe (`| head`) is not a failure.
                match w.write_all(&buf).and_then(|_| w.flush()) {
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                    r => r?,
                }
            }
        }
        Ok(())
    }
}

fn emit(table: &Table, format: Format, w: &mut impl Write) -> Result<()> {
    match format {
        Format::Csv => table.write_csv(w)?,
        Format::Json => table.write_json(w)?,
    }
    Ok(())
}
