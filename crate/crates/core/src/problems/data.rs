//! Synthetic dataset generators, the MovieLens loader, and a plain-text dump
//! format for datasets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rating {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticKind {
    /// Isotropic Gaussian blobs around centers pairwise `separation` apart.
    Clusters {
        clusters: usize,
        per_cluster: usize,
        dim: usize,
        separation: f64,
        spread: f64,
    },
    /// Block-diagonal `Σ` from `blocks` rank-one blocks `φφᵀ`, `φ ~ U[−1,1]`.
    Covariance { n: usize, blocks: usize },
    /// Low-rank matrix rescaled into `[1, 5]`, a fraction of it observed.
    Ratings {
        rows: usize,
        cols: usize,
        rank: usize,
        observed: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetHandle {
    Clusters {
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
        centers: Vec<Vec<f64>>,
    },
    Covariance {
        /// `Σ = F Fᵀ`, `F` is `n × blocks` with one nonzero run per column.
        factor: DenseMatrix,
    },
    Ratings {
        rows: usize,
        cols: usize,
        train: Vec<Rating>,
        test: Vec<Rating>,
        /// Ground-truth matrix for synthetic data.
        truth: Option<DenseMatrix>,
    },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn generate_synthetic(kind: &SyntheticKind, seed: u64) -> Result<DatasetHandle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        SyntheticKind::Clusters {
            clusters,
            per_cluster,
            dim,
            separation,
            spread,
        } => {
            if clusters == 0 || per_cluster == 0 || dim == 0 || !(spread >= 0.0) {
                return Err(invalid("clusters need positive counts and spread >= 0"));
            }
            if clusters > dim {
                return Err(invalid(format!(
                    "{clusters} equidistant centers need dim >= {clusters}"
                )));
            }
            // scaled standard basis vectors, pairwise `separation` apart
            let centers: Vec<Vec<f64>> = (0..clusters)
                .map(|c| {
                    let mut v = vec![0.0; dim];
                    v[c] = separation / std::f64::consts::SQRT_2;
                    v
                })
                .collect();
            let mut points = Vec::with_capacity(clusters * per_cluster);
            let mut labels = Vec::with_capacity(clusters * per_cluster);
            for (c, center) in centers.iter().enumerate() {
                for _ in 0..per_cluster {
                    points.push(
                        center
                            .iter()
                            .map(|m| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                m + spread * z
                            })
                            .collect(),
                    );
                    labels.push(c);
                }
            }
            Ok(DatasetHandle::Clusters {
                points,
                labels,
                centers,
            })
        }
        SyntheticKind::Covariance { n, blocks } => {
            if blocks == 0 || n < blocks {
                return Err(invalid(format!("need n >= blocks >= 1, got n={n} blocks={blocks}")));
            }
            let mut factor = DenseMatrix::zeros(n, blocks);
            let mut start = 0;
            for b in 0..blocks {
                let size = n / blocks + usize::from(b < n % blocks);
                for i in start..start + size {
                    factor.set(i, b, rng.random_range(-1.0..=1.0));
                }
                start += size;
            }
            Ok(DatasetHandle::Covariance { factor })
        }
        SyntheticKind::Ratings {
            rows,
            cols,
            rank,
            observed,
        } => {
            if rows == 0 || cols == 0 || rank == 0 || !(observed > 0.0 && observed <= 1.0) {
                return Err(invalid("ratings need positive shape, rank and observed fraction"));
            }
            let u = DenseMatrix::random(rows, rank, &mut rng);
            let v = DenseMatrix::random(cols, rank, &mut rng);
            let raw = DenseMatrix::from_fn(rows, cols, |i, j| {
                (0..rank).map(|r| u.get(i, r) * v.get(j, r)).sum()
            });
            let (mn, mx) = raw
                .as_slice()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let span = if mx > mn { mx - mn } else { 1.0 };
            let truth = DenseMatrix::from_fn(rows, cols, |i, j| 1.0 + 4.0 * (raw.get(i, j) - mn) / span);
            let mut cells: Vec<usize> = (0..rows * cols).collect();
            cells.shuffle(&mut rng);
            let m = ((observed * (rows * cols) as f64).round() as usize).max(1);
            let to_rating = |p: usize| Rating {
                row: p / cols,
                col: p % cols,
                value: truth.get(p / cols, p % cols),
            };
            let mut train: Vec<Rating> = cells[..m].iter().map(|&p| to_rating(p)).collect();
            let mut test: Vec<Rating> = cells[m..].iter().map(|&p| to_rating(p)).collect();
            let key = |r: &Rating| (r.row, r.col);
            train.sort_by_key(key);
            test.sort_by_key(key);
            Ok(DatasetHandle::Ratings {
                rows,
                cols,
                train,
                test,
                truth: Some(truth),
            })
        }
    }
}

/// Parses MovieLens u-data lines `user\titem\trating\ttimestamp` (1-based ids).
pub fn parse_udata(text: &str) -> Result<Vec<Rating>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(err(format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let id = |s: &str, what: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(err(format!("invalid {what} id {s:?}"))),
            }
        };
        let row = id(fields[0], "user")?;
        let col = id(fields[1], "item")?;
        let value: u8 = fields[2]
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid rating {:?}", fields[2])))?;
        if !(1..=5).contains(&value) {
            return Err(err(format!("rating {value} outside [1, 5]")));
        }
        out.push(Rating {
            row,
            col,
            value: f64::from(value),
        });
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no ratings found".into(),
        });
    }
    Ok(out)
}

fn shape(ratings: &[Rating]) -> (usize, usize) {
    ratings.iter().fold((0, 0), |(r, c), x| (r.max(x.row + 1), c.max(x.col + 1)))
}

/// Loads one u-data file and splits it 80/20 with the given seed.
pub fn load_movielens_file(path: &Path, seed: u64) -> Result<DatasetHandle> {
    let mut all = parse_udata(&fs::read_to_string(path)?)?;
    let (rows, cols) = shape(&all);
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (all.len() * 4).div_ceil(5);
    let test = all.split_off(cut);
    Ok(DatasetHandle::Ratings {
        rows,
        cols,
        train: all,
        test,
        truth: None,
    })
}

/// Loads MovieLens-100k. A directory with `ub.train`/`ub.test` uses that
/// split; otherwise `u.data` (or the file itself) is split 80/20.
pub fn load_movielens(path: &Path, seed: u64) -> Result<DatasetHandle> {
    if path.is_dir() {
        let (tr, te) = (path.join("ub.train"), path.join("ub.test"));
        if tr.is_file() && te.is_file() {
            let train = parse_udata(&fs::read_to_string(tr)?)?;
            let test = parse_udata(&fs::read_to_string(te)?)?;
            let (r1, c1) = shape(&train);
            let (r2, c2) = shape(&test);
            return Ok(DatasetHandle::Ratings {
                rows: r1.max(r2),
                cols: c1.max(c2),
                train,
                test,
                truth: None,
            });
        }
        return load_movielens_file(&path.join("u.data"), seed);
    }
    load_movielens_file(path, seed)
}

fn join(values: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = values.map(|v| format!("{v:?}")).collect();
    parts.join(" ")
}

impl DatasetHandle {
    pub fn kind(&self) -> &'static str {
        match self {
            DatasetHandle::Clusters { .. } => "clusters",
            DatasetHandle::Covariance { .. } => "covariance",
            DatasetHandle::Ratings { .. } => "ratings",
        }
    }

    /// Self-describing text dump. Floats use the shortest round-trip form,
    /// so `from_text(to_text(d)) == d`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# shcgm dataset\nkind {}\n", self.kind());
        match self {
            DatasetHandle::Clusters {
                points,
                labels,
                centers,
            } => {
                let _ = writeln!(s, "centers {}", centers.len());
                for c in centers {
                    let _ = writeln!(s, "{}", join(c.iter().copied()));
                }
                let _ = writeln!(s, "points {}", points.len());
                for (p, l) in points.iter().zip(labels) {
                    let _ = writeln!(s, "{l} {}", join(p.iter().copied()));
                }
            }
            DatasetHandle::Covariance { factor } => {
                let _ = writeln!(s, "factor {} {}", factor.rows(), factor.cols());
                for i in 0..factor.rows() {
                    let _ = writeln!(s, "{}", join((0..factor.cols()).map(|j| factor.get(i, j))));
                }
            }
            DatasetHandle::Ratings {
                rows,
                cols,
                train,
                test,
                truth,
            } => {
                let _ = writeln!(s, "shape {rows} {cols}");
                for (name, set) in [("train", train), ("test", test)] {
                    let _ = writeln!(s, "{name} {}", set.len());
                    for r in set {
                        let _ = writeln!(s, "{} {} {:?}", r.row, r.col, r.value);
                    }
                }
                if let Some(t) = truth {
                    let _ = writeln!(s, "truth");
                    for i in 0..t.rows() {
                        let _ = writeln!(s, "{}", join((0..t.cols()).map(|j| t.get(i, j))));
                    }
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unexpected end of dump, expected {what}"),
            })?;
            Ok((no, line.split_whitespace().map(str::to_string).collect()))
        };
        fn num<T: std::str::FromStr>(line: usize, tok: Option<&String>) -> Result<T> {
            tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
                line,
                message: format!("invalid number {tok:?}"),
            })
        }
        fn floats(line: usize, toks: &[String]) -> Result<Vec<f64>> {
            toks.iter().map(|t| num(line, Some(t))).collect()
        }
        let (no, head) = next("kind")?;
        if head.first().map(String::as_str) != Some("kind") {
            return Err(Error::Parse {
                line: no,
                message: "expected `kind`".into(),
            });
        }
        match head.get(1).map(String::as_str) {
            Some("clusters") => {
                let (no, h) = next("centers")?;
                let nc: usize = num(no, h.get(1))?;
                let mut centers = Vec::with_capacity(nc);
                for _ in 0..nc {
                    let (no, t) = next("center")?;
                    centers.push(floats(no, &t)?);
                }
                let (no, h) = next("points")?;
                let np: usize = num(no, h.get(1))?;
                let (mut points, mut labels) = (Vec::new(), Vec::new());
                for _ in 0..np {
                    let (no, t) = next("point")?;
                    labels.push(num(no, t.first())?);
                    points.push(floats(no, &t[1..])?);
                }
                Ok(DatasetHandle::Clusters {
                    points,
                    labels,
                    centers,
                })
            }
            Some("covariance") => {
                let (no, h) = next("factor")?;
                let (r, c): (usize, usize) = (num(no, h.get(1))?, num(no, h.get(2))?);
                let mut data = Vec::with_capacity(r * c);
                for _ in 0..r {
                    let (no, t) = next("factor row")?;
                    data.extend(floats(no, &t)?);
                }
                Ok(DatasetHandle::Covariance {
                    factor: DenseMatrix::from_row_major(r, c, data)?,
                })
            }
            Some("ratings") => {
                let (no, h) = next("shape")?;
                let (rows, cols): (usize, usize) = (num(no, h.get(1))?, num(no, h.get(2))?);
                let mut sets = Vec::new();
                for what in ["train", "test"] {
                    let (no, h) = next(what)?;
                    let m: usize = num(no, h.get(1))?;
                    let mut set = Vec::with_capacity(m);
                    for _ in 0..m {
                        let (no, t) = next("rating")?;
                        set.push(Rating {
                            row: num(no, t.first())?,
                            col: num(no, t.get(1))?,
                            value: num(no, t.get(2))?,
                        });
                    }
                    sets.push(set);
                }
                let truth = match next("truth") {
                    Ok(_) => {
                        let mut data = Vec::with_capacity(rows * cols);
                        for _ in 0..rows {
                            let (no, t) = next("truth row")?;
                            data.extend(floats(no, &t)?);
                        }
                        Some(DenseMatrix::from_row_major(rows, cols, data)?)
                    }
                    Err(_) => None,
                };
                let test = sets.pop().unwrap_or_default();
                let train = sets.pop().unwrap_or_default();
                Ok(DatasetHandle::Ratings {
                    rows,
                    cols,
                    train,
                    test,
                    truth,
                })
            }
            other => Err(Error::Parse {
                line: no,
                message: format!("unknown dataset kind {other:?}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn udata_line() {
        let r = parse_udata("1\t2\t5\t881250949\n").unwrap();
        assert_eq!(
            r,
            vec![Rating {
                row: 0,
                col: 1,
                value: 5.0
            }]
        );
    }

    #[test]
    fn udata_errors_carry_line_numbers() {
        assert!(parse_udata("").is_err());
        match parse_udata("1\t1\t3\t0\n1\tx\t3\t0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_udata("1\t1\t6\t0\n").is_err());
        assert!(parse_udata("1\t1\t0\t0\n").is_err());
    }

    #[test]
    fn ratings_split_is_a_partition() {
        let kind = SyntheticKind::Ratings {
            rows: 10,
            cols: 8,
            rank: 2,
            observed: 0.3,
        };
        let DatasetHandle::Ratings {
            train, test, truth, ..
        } = generate_synthetic(&kind, 4).unwrap()
        else {
            panic!()
        };
        assert_eq!(train.len(), 24);
        assert_eq!(train.len() + test.len(), 80);
        let truth = truth.unwrap();
        let mut seen = vec![false; 80];
        for r in train.iter().chain(&test) {
            assert!(!seen[r.row * 8 + r.col]);
            seen[r.row * 8 + r.col] = true;
            assert_eq!(r.value, truth.get(r.row, r.col));
            assert!((1.0..=5.0).contains(&r.value));
        }
    }

    #[test]
    fn dumps_round_trip() {
        for kind in [
            SyntheticKind::Clusters {
                clusters: 3,
                per_cluster: 2,
                dim: 3,
                separation: 5.0,
                spread: 0.1,
            },
            SyntheticKind::Covariance { n: 12, blocks: 5 },
            SyntheticKind::Ratings {
                rows: 4,
                cols: 3,
                rank: 1,
                observed: 0.5,
            },
        ] {
            let d = generate_synthetic(&kind, 9).unwrap();
            assert_eq!(DatasetHandle::from_text(&d.to_text()).unwrap(), d);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let kind = SyntheticKind::Covariance { n: 20, blocks: 10 };
        assert_eq!(generate_synthetic(&kind, 1).unwrap(), generate_synthetic(&kind, 1).unwrap());
        assert_ne!(generate_synthetic(&kind, 1).unwrap(), generate_synthetic(&kind, 2).unwrap());
    }
}
