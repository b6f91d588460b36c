//! File formats: constraint graphs, spin systems and target graphs as JSON,
//! samples as JSONL with a `.meta.json` sidecar.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use hcolor::sampling::SampleSet;
use hcolor::scalar::parse_rational;
use hcolor::{Coloring, ConstraintGraph, Potential, SpinSystem, TargetGraph, WeightedGraph};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub q: usize,
    pub edges: Vec<(usize, usize)>,
}

impl ConstraintFile {
    pub fn of(h: &ConstraintGraph) -> Self {
        Self {
            q: h.q(),
            edges: h.edges().collect(),
        }
    }

    pub fn build(&self) -> Result<ConstraintGraph, CliError> {
        Ok(ConstraintGraph::new(self.q, self.edges.iter().copied())?)
    }
}

/// A real number written either as a JSON number or as an exact `"p/q"`
/// string.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Float(f64),
    Exact(BigRational),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Float(x) => *x,
            Number::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact value; floats convert to the rational they represent.
    pub fn to_exact(&self) -> Result<BigRational, CliError> {
        match self {
            Number::Exact(r) => Ok(r.clone()),
            Number::Float(x) => BigRational::from_float(*x)
                .ok_or_else(|| CliError::Input(format!("non-finite number {x}"))),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Float(x) => write!(f, "{x}"),
            Number::Exact(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Float(x) => s.serialize_f64(*x),
            Number::Exact(r) => s.serialize_str(&r.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(x) => Ok(Number::Float(x)),
            Raw::S(s) => parse_rational(&s)
                .map(Number::Exact)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid rational {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub q: usize,
    /// `null` marks a forbidden pair.
    #[serde(rename = "J")]
    pub j: Vec<Vec<Option<Number>>>,
    pub h: Vec<Number>,
}

impl SystemFile {
    /// True when every `J` entry is forbidden or given as an exact rational.
    pub fn couplings_exact(&self) -> bool {
        self.j
            .iter()
            .flatten()
            .all(|x| !matches!(x, Some(Number::Float(_))))
    }

    fn check_q(&self) -> Result<(), CliError> {
        if self.j.len() != self.q {
            return Err(CliError::Input(format!(
                "J has {} rows, expected q = {}",
                self.j.len(),
                self.q
            )));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Result<SpinSystem<f64>, CliError> {
        self.check_q()?;
        let j = self
            .j
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        x.as_ref()
                            .map_or(Potential::Forbidden, |x| Potential::Finite(x.to_f64()))
                    })
                    .collect()
            })
            .collect();
        Ok(SpinSystem::new(
            j,
            self.h.iter().map(Number::to_f64).collect(),
        )?)
    }

    pub fn to_exact(&self) -> Result<SpinSystem<BigRational>, CliError> {
        self.check_q()?;
        let mut j = Vec::with_capacity(self.q);
        for row in &self.j {
            let mut out = Vec::with_capacity(row.len());
            for x in row {
                out.push(match x {
                    Some(x) => Potential::Finite(x.to_exact()?),
                    None => Potential::Forbidden,
                });
            }
            j.push(out);
        }
        let h = self
            .h
            .iter()
            .map(Number::to_exact)
            .collect::<Result<_, _>>()?;
        Ok(SpinSystem::new(j, h)?)
    }

    pub fn of(s: &SpinSystem<f64>) -> Self {
        let q = s.q();
        Self {
            q,
            j: (0..q)
                .map(|a| {
                    (0..q)
                        .map(|b| s.coupling(a, b).finite().map(|x| Number::Float(*x)))
                        .collect()
                })
                .collect(),
            h: s.fields().iter().map(|x| Number::Float(*x)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Keys are `"u,v"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_weights: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_weights: Option<Vec<f64>>,
}

fn parse_edge_key(key: &str) -> Result<(usize, usize), CliError> {
    let bad = || {
        CliError::Input(format!(
            "edge_weights key {key:?} is not of the form \"u,v\""
        ))
    };
    let (u, v) = key.split_once(',').ok_or_else(bad)?;
    Ok((
        u.trim().parse().map_err(|_| bad())?,
        v.trim().parse().map_err(|_| bad())?,
    ))
}

impl TargetFile {
    pub fn of(g: &TargetGraph) -> Self {
        Self {
            n: g.n(),
            edges: g.edges().collect(),
            edge_weights: None,
            vertex_weights: None,
        }
    }

    pub fn of_weighted(gw: &WeightedGraph<f64>) -> Self {
        Self {
            edge_weights: Some(
                gw.edge_weights()
                    .iter()
                    .map(|(&(u, v), &w)| (format!("{u},{v}"), w))
                    .collect(),
            ),
            vertex_weights: Some(gw.vertex_weights().to_vec()),
            ..Self::of(gw.graph())
        }
    }

    pub fn graph(&self) -> Result<TargetGraph, CliError> {
        Ok(TargetGraph::new(self.n, self.edges.iter().copied())?)
    }

    /// Missing weights default to 1.
    pub fn weighted(&self) -> Result<WeightedGraph<f64>, CliError> {
        let g = self.graph()?;
        let mut edge_weights: BTreeMap<(usize, usize), f64> = g.edges().map(|e| (e, 1.0)).collect();
        if let Some(map) = &self.edge_weights {
            for (key, &w) in map {
                let (u, v) = parse_edge_key(key)?;
                let e = (u.min(v), u.max(v));
                if !g.has_edge(u, v) {
                    return Err(CliError::Input(format!(
                        "edge_weights names non-edge {key:?}"
                    )));
                }
                edge_weights.insert(e, w);
            }
        }
        let vertex_weights = self
            .vertex_weights
            .clone()
            .unwrap_or_else(|| vec![1.0; self.n]);
        Ok(WeightedGraph::new(g, edge_weights, vertex_weights)?)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_constraint(path: &Path) -> Result<ConstraintGraph, CliError> {
    read_json::<ConstraintFile>(path)?.build()
}

pub fn read_system(path: &Path) -> Result<SystemFile, CliError> {
    read_json(path)
}

pub fn read_target(path: &Path) -> Result<TargetFile, CliError> {
    read_json(path)
}

/// Parses JSONL colorings; errors carry the 1-based line number.
pub fn parse_colorings(text: &str) -> Result<Vec<Coloring>, CliError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let c: Vec<usize> = serde_json::from_str(line)
            .map_err(|e| CliError::Input(format!("line {}: {e}", k + 1)))?;
        out.push(Coloring(c));
    }
    Ok(out)
}

pub fn write_colorings<W: Write>(
    mut w: W,
    colorings: impl IntoIterator<Item = Coloring>,
) -> Result<(), CliError> {
    for c in colorings {
        serde_json::to_writer(&mut w, &c.0).map_err(|e| CliError::Input(e.to_string()))?;
        w.write_all(b"\n")
            .map_err(|e| CliError::Io(PathBuf::from("-"), e.to_string()))?;
    }
    Ok(())
}

/// Sidecar path `<samples>.meta.json`.
pub fn sidecar_path(samples: &Path) -> PathBuf {
    let mut s = samples.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the samples as JSONL and the remaining metadata to the sidecar.
pub fn write_sample_set(path: &Path, set: &SampleSet) -> Result<(), CliError> {
    let io_err = |p: &Path, e: std::io::Error| CliError::Io(p.to_path_buf(), e.to_string());
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_colorings(&mut w, set.samples.iter().cloned())?;
    w.flush().map_err(|e| io_err(path, e))?;
    let meta = SampleSet {
        samples: Vec::new(),
        ..set.clone()
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Input(e.to_string()))?;
    fs::write(&side, text).map_err(|e| io_err(&side, e))
}

/// Reads JSONL samples and, when present, the sidecar metadata. Without a
/// sidecar the set is wrapped with `n` taken from the first line.
pub fn read_sample_set(path: &Path) -> Result<SampleSet, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        text.push_str(&line.map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?);
        text.push('\n');
    }
    let samples = parse_colorings(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let side = sidecar_path(path);
    if side.exists() {
        let mut meta: SampleSet = read_json(&side)?;
        meta.samples = samples;
        return Ok(meta);
    }
    let n = samples.first().map_or(0, Coloring::len);
    Ok(SampleSet::from_samples(n, samples))
}
