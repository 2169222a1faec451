use std::cell::Cell;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use mnlab::export::to_json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    /// Arguments that violate a precondition. Exit code 2.
    Usage(String),
    /// A solver failed. Exit code 3.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<mnlab::Error> for CliError {
    fn from(e: mnlab::Error) -> Self {
        match e {
            mnlab::Error::Domain(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Where tables and side files go. Tables are printed to stdout unless an
/// output directory is given; trajectories and plots always go to a
/// directory (the current one by default).
pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub plot: bool,
    printed: Cell<bool>,
}

impl Sink {
    pub fn new(format: Format, out: Option<PathBuf>, plot: bool) -> CliResult<Self> {
        if let Some(dir) = &out {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            format,
            out,
            plot,
            printed: Cell::new(false),
        })
    }

    pub fn dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("."))
    }

    /// Emits one table, as `csv` or as the JSON form of `value`.
    pub fn table<T: Serialize + ?Sized>(
        &self,
        name: &str,
        csv: impl FnOnce() -> String,
        value: &T,
    ) -> CliResult {
        let (ext, body) = match self.format {
            Format::Csv => ("csv", csv()),
            Format::Json => {
                let mut s = to_json(value).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                ("json", s)
            }
        };
        match &self.out {
            Some(dir) => fs::write(dir.join(format!("{name}.{ext}")), body)?,
            None => self.print(&body)?,
        }
        Ok(())
    }

    /// A CSV-only table, such as a summary next to the main output.
    pub fn extra_csv(&self, name: &str, body: &str) -> CliResult {
        match &self.out {
            Some(dir) => fs::write(dir.join(format!("{name}.csv")), body)?,
            None => self.print(body)?,
        }
        Ok(())
    }

    /// Prints to stdout; successive CSV tables are separated by a blank line.
    fn print(&self, body: &str) -> io::Result<()> {
        let mut stdout = io::stdout().lock();
        if self.printed.replace(true) && self.format == Format::Csv {
            stdout.write_all(b"\n")?;
        }
        stdout.write_all(body.as_bytes())
    }

    /// Writes a side file into the output directory and returns its name.
    pub fn file(&self, name: &str, body: &str) -> CliResult<String> {
        fs::create_dir_all(self.dir())?;
        fs::write(self.dir().join(name), body)?;
        Ok(name.to_string())
    }

    pub fn svg(&self, name: &str, plot: &crate::plot::Plot) -> CliResult {
        if self.plot {
            self.file(name, &plot.render())?;
        }
        Ok(())
    }
}

/// Joins CSV fields; only the note columns can contain commas or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
