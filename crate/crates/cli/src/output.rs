//! Output staging. Files are buffered in memory and only written, via a
//! temporary name and a rename, once the whole run has succeeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value as Json};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV table; floats are written with 17 significant digits.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: Vec<String>,
    body: String,
    rows: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    F(f64),
    I(i64),
    U(u64),
    S(&'a str),
    B(bool),
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::F(x) if x.is_nan() => self.body.push_str("nan"),
                Cell::F(x) => write!(self.body, "{x:.16e}").unwrap(),
                Cell::I(x) => write!(self.body, "{x}").unwrap(),
                Cell::U(x) => write!(self.body, "{x}").unwrap(),
                Cell::S(s) => self.body.push_str(s),
                Cell::B(b) => self.body.push_str(if *b { "true" } else { "false" }),
            }
        }
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn render(&self) -> Vec<u8> {
        let mut s = self.columns.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s.into_bytes()
    }
}

/// A named artifact with its metadata sidecar.
#[derive(Debug)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    pub columns: Option<Vec<String>>,
    pub rows: Option<usize>,
    pub results: Json,
}

impl Artifact {
    pub fn csv(name: impl Into<String>, csv: &Csv, results: Json) -> Self {
        Self {
            name: name.into(),
            bytes: csv.render(),
            columns: Some(csv.columns().to_vec()),
            rows: Some(csv.rows()),
            results,
        }
    }

    pub fn binary(name: impl Into<String>, bytes: Vec<u8>, results: Json) -> Self {
        Self {
            name: name.into(),
            bytes,
            columns: None,
            rows: None,
            results,
        }
    }

    pub fn json(name: impl Into<String>, value: &Json) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("json value");
        bytes.push(b'\n');
        Self {
            name: name.into(),
            bytes,
            columns: None,
            rows: None,
            results: Json::Null,
        }
    }

    /// JSON documents are their own metadata.
    fn wants_sidecar(&self) -> bool {
        !self.name.ends_with(".json")
    }
}

pub fn sidecar_name(name: &str) -> String {
    let stem = Path::new(name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string());
    format!("{stem}.meta.json")
}

/// Run-wide facts shared by every sidecar.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub command: String,
    pub config: Json,
    pub derived: Json,
    pub seed: Option<u64>,
    pub dt: Json,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

fn meta(a: &Artifact, run: &RunInfo) -> Json {
    json!({
        "schema_version": SCHEMA_VERSION,
        "file": a.name,
        "columns": a.columns,
        "rows": a.rows,
        "command": run.command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "git_describe": env!("DHARPER_GIT_DESCRIBE"),
        "config": run.config,
        "derived": run.derived,
        "seed": run.seed,
        "dt": run.dt,
        "threads": run.threads,
        "wall_clock_seconds": run.wall_clock_seconds,
        "results": a.results,
    })
}

/// Writes every artifact and its sidecar into `dir` atomically per file.
pub fn commit(dir: &Path, artifacts: &[Artifact], run: &RunInfo) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut staged = Vec::new();
    for a in artifacts {
        staged.push((a.name.clone(), a.bytes.clone()));
        if a.wants_sidecar() {
            let mut m = serde_json::to_vec_pretty(&meta(a, run)).expect("json value");
            m.push(b'\n');
            staged.push((sidecar_name(&a.name), m));
        }
    }
    let mut written = Vec::new();
    for (name, bytes) in staged {
        let target = dir.join(&name);
        let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
        fs::write(&tmp, &bytes).map_err(io(&tmp))?;
        fs::rename(&tmp, &target).map_err(io(&target))?;
        written.push(target);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let mut c = Csv::new(&["t", "l", "ok"]);
        c.row(&[Cell::F(0.1), Cell::I(-3), Cell::B(true)]);
        c.row(&[Cell::F(f64::NAN), Cell::I(0), Cell::B(false)]);
        let s = String::from_utf8(c.render()).unwrap();
        assert_eq!(s, "t,l,ok\n1.0000000000000001e-1,-3,true\nnan,0,false\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_name("dispersion.csv"), "dispersion.meta.json");
        assert_eq!(sidecar_name("floquet.bin"), "floquet.meta.json");
    }
}
