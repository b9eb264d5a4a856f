//! CSV and JSON writers for experiment outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::homogeneous::SkewState;

/// Shared JSON summary attached to every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub verdict: bool,
    pub key_values: BTreeMap<String, f64>,
}

/// Collects output files as they are written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<csv::Writer<fs::File>> {
        self.written.push(name.to_string());
        Ok(csv::Writer::from_path(self.root.join(name))?)
    }

    /// Two-column curve `x,y`.
    pub fn curve<X: ToString>(&mut self, name: &str, header: [&str; 2], rows: impl IntoIterator<Item = (X, f64)>) -> Result<()> {
        let mut w = self.open(name)?;
        w.write_record(header)?;
        for (x, y) in rows {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Arbitrary table with a header row.
    pub fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = self.open(name)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `step,u,v,theta,vbar1,vbar2`, with `(u, v, theta)` the Iwasawa
    /// coordinates of the base representative.
    pub fn trajectory(&mut self, name: &str, states: &[SkewState]) -> Result<()> {
        let rows = states.iter().enumerate().map(|(k, s)| {
            let (u, v, theta) = s.x.iwasawa();
            vec![k.to_string(), u.to_string(), v.to_string(), theta.to_string(), s.vbar[0].to_string(), s.vbar[1].to_string()]
        });
        self.table(name, &["step", "u", "v", "theta", "vbar1", "vbar2"], rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.written.push(name.to_string());
        write_atomic(&self.root.join(name), &serde_json::to_vec_pretty(value)?)
    }
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// File-name label for a character, `[1, 0]` becomes `1_0`.
pub fn character_label(m: &[i64]) -> String {
    m.iter().map(i64::to_string).collect::<Vec<_>>().join("_")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.curve("orbit.csv", ["n", "distance"], [(1, 0.5), (2, 0.25)]).unwrap();
        let text = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
        assert_eq!(text, "n,distance\n1,0.5\n2,0.25\n");
        assert_eq!(out.files(), ["orbit.csv"]);
        assert_eq!(character_label(&[1, -2]), "1_-2");
    }

    #[test]
    fn atomic_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let s = Summary {
            experiment: "cantor".into(),
            params: serde_json::json!({"m": 1}),
            seed: 7,
            verdict: true,
            key_values: BTreeMap::from([("modulus".to_string(), 0.37)]),
        };
        out.json("summary.json", &s).unwrap();
        let back: Summary = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(!dir.path().join("summary.json.tmp").exists());
    }
}
