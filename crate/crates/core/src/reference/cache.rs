use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::ReferenceSolution;
use crate::error::{Error, Result};

/// Directory of reference solutions, one text file per problem key.
#[derive(Clone, Debug)]
pub struct ReferenceCache {
    dir: PathBuf,
}

const MAGIC: &str = "# shcgm reference solution v1";

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex SHA-256 of the problem description.
    pub fn key(description: &str) -> String {
        let digest = Sha256::digest(description.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn path_for(&self, description: &str) -> PathBuf {
        self.dir.join(format!("{}.ref", Self::key(description)))
    }

    pub fn load(&self, description: &str) -> Result<Option<ReferenceSolution>> {
        let path = self.path_for(description);
        match fs::read_to_string(&path) {
            Ok(text) => decode(&text, description).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes to a temporary file in the same directory, then renames.
    pub fn store(&self, description: &str, solution: &ReferenceSolution) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(description);
        let tmp = self.dir.join(format!(
            ".{}.{}.tmp",
            Self::key(description),
            std::process::id()
        ));
        fs::write(&tmp, encode(description, solution))?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn get_or_compute(
        &self,
        description: &str,
        compute: impl FnOnce() -> Result<ReferenceSolution>,
    ) -> Result<ReferenceSolution> {
        if let Some(hit) = self.load(description)? {
            return Ok(hit);
        }
        let sol = compute()?;
        self.store(description, &sol)?;
        Ok(sol)
    }
}

fn encode(description: &str, s: &ReferenceSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# problem: {}", description.replace('\n', " "));
    let _ = writeln!(out, "# provenance: {}", s.provenance);
    let _ = writeln!(out, "key {}", ReferenceCache::key(description));
    let _ = writeln!(out, "f_star {:?}", s.f_star);
    let _ = writeln!(out, "feasibility {:?}", s.feasibility);
    match s.dual_norm_estimate {
        Some(v) => {
            let _ = writeln!(out, "dual_norm {v:?}");
        }
        None => {
            let _ = writeln!(out, "dual_norm none");
        }
    }
    let _ = writeln!(out, "low_confidence {}", s.low_confidence);
    let _ = writeln!(out, "provenance {}", s.provenance);
    let _ = writeln!(out, "x {}", s.x_star.len());
    for v in &s.x_star {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

fn decode(text: &str, description: &str) -> Result<ReferenceSolution> {
    let bad = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "not a reference solution file".into())),
    }
    let mut field = |name: &str| -> Result<(usize, String)> {
        for (no, line) in lines.by_ref() {
            if line.starts_with('#') {
                continue;
            }
            return match line.split_once(' ') {
                Some((k, v)) if k == name => Ok((no, v.to_string())),
                _ => Err(bad(no, format!("expected `{name}`"))),
            };
        }
        Err(bad(0, format!("missing `{name}`")))
    };
    let float = |(no, v): (usize, String)| -> Result<f64> {
        v.trim().parse().map_err(|_| bad(no, format!("invalid number {v:?}")))
    };
    let (no, key) = field("key")?;
    if key != ReferenceCache::key(description) {
        return Err(bad(no, "cache key does not match the problem".into()));
    }
    let f_star = float(field("f_star")?)?;
    let feasibility = float(field("feasibility")?)?;
    let dual = field("dual_norm")?;
    let dual_norm_estimate = if dual.1 == "none" { None } else { Some(float(dual)?) };
    let (no, lc) = field("low_confidence")?;
    let low_confidence = lc
        .parse()
        .map_err(|_| bad(no, format!("invalid flag {lc:?}")))?;
    let (_, provenance) = field("provenance")?;
    let (no, n) = field("x")?;
    let n: usize = n.parse().map_err(|_| bad(no, format!("invalid length {n:?}")))?;
    let mut x_star = Vec::with_capacity(n);
    for (no, line) in lines.by_ref().take(n) {
        x_star.push(float((no, line.to_string()))?);
    }
    if x_star.len() != n {
        return Err(bad(0, format!("expected {n} entries, found {}", x_star.len())));
    }
    Ok(ReferenceSolution {
        x_star,
        f_star,
        feasibility,
        dual_norm_estimate,
        provenance,
        low_confidence,
    })
}
