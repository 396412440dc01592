//! Built-in channel and state specs (`erasure:p=0.25`, `isotropic:F=0.8`, `file:<path>`, ...)
//! and their JSON file formats.

use std::collections::BTreeMap;
use std::path::Path;

use csc_core::channel::KrausChannel;
use csc_core::linalg::{c, CMatrix, CVector};
use csc_core::superactivation::{bell_diagonal_state, candidate_state_library, horodecki_ppt_state, isotropic_state};
use csc_core::LabeledState;
use serde::Deserialize;

use crate::error::CliError;

type Params = BTreeMap<String, f64>;

fn parse_params(spec: &str, body: &str, allowed: &[&str]) -> Result<Params, CliError> {
    let mut out = Params::new();
    for item in body.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("`{spec}`: expected key=value, got `{item}`")))?;
        if !allowed.contains(&k) {
            return Err(CliError::config(format!(
                "`{spec}`: unknown parameter `{k}` (expected one of {})",
                allowed.join(", ")
            )));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::config(format!("`{spec}`: `{v}` is not a number")))?;
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

fn require(spec: &str, p: &Params, key: &str) -> Result<f64, CliError> {
    p.get(key)
        .copied()
        .ok_or_else(|| CliError::config(format!("`{spec}`: missing parameter `{key}`")))
}

fn dimension(spec: &str, p: &Params, key: &str, default: Option<usize>) -> Result<usize, CliError> {
    match p.get(key) {
        None => default.ok_or_else(|| CliError::config(format!("`{spec}`: missing parameter `{key}`"))),
        Some(&v) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
        Some(v) => Err(CliError::config(format!(
            "`{spec}`: `{key}` must be a positive integer, got {v}"
        ))),
    }
}

fn invalid(spec: &str) -> impl Fn(csc_core::Error) -> CliError + '_ {
    move |e| CliError::config(format!("`{spec}`: {e}"))
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read `{path}`: {e}")))
}

/// serde_json error with its line and column.
pub(crate) fn json_error(path: &Path, e: &serde_json::Error) -> CliError {
    CliError::config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

fn complex_matrix(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMatrix, CliError> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(CliError::config(format!(
            "{what}: rows must be non-empty and of equal length"
        )));
    }
    Ok(CMatrix::from_fn(nr, nc, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// `{kind, params, kraus}` channel description.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub kind: String,
    #[serde(default)]
    pub params: Params,
    /// Kraus operators as rows of `[re, im]` pairs.
    #[serde(default)]
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

fn channel_from_file(path: &str) -> Result<KrausChannel, CliError> {
    let text = read_file(path)?;
    let file: ChannelFile = serde_json::from_str(&text).map_err(|e| json_error(Path::new(path), &e))?;
    if file.kind == "kraus" {
        let ops = file
            .kraus
            .iter()
            .enumerate()
            .map(|(k, m)| complex_matrix(m, &format!("{path}: Kraus operator {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        return KrausChannel::new(ops).map_err(invalid(path));
    }
    if !file.kraus.is_empty() {
        return Err(CliError::config(format!(
            "{path}: `kraus` is only read for kind \"kraus\""
        )));
    }
    let body: Vec<String> = file.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    builtin_channel(&format!("{}:{}", file.kind, body.join(",")), path)
}

fn builtin_channel(spec: &str, shown: &str) -> Result<KrausChannel, CliError> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let ch = match kind {
        "identity" => {
            let p = parse_params(shown, body, &["d"])?;
            KrausChannel::identity(dimension(shown, &p, "d", Some(2))?)
        }
        "erasure" => {
            let p = parse_params(shown, body, &["p", "d"])?;
            KrausChannel::erasure(require(shown, &p, "p")?, dimension(shown, &p, "d", Some(2))?)
        }
        "depolarizing" => KrausChannel::depolarizing(require(shown, &parse_params(shown, body, &["p"])?, "p")?),
        "dephasing" => KrausChannel::dephasing(require(shown, &parse_params(shown, body, &["p"])?, "p")?),
        _ => {
            return Err(CliError::config(format!(
                "unknown channel `{shown}` (expected identity, erasure, depolarizing, dephasing or kraus-file:<path>)"
            )))
        }
    };
    ch.map_err(invalid(shown))
}

/// Parses a channel spec; the spec string becomes the channel's description.
pub fn parse_channel(spec: &str) -> Result<KrausChannel, CliError> {
    let ch = match spec.strip_prefix("kraus-file:") {
        Some(path) => channel_from_file(path)?,
        None => builtin_channel(spec, spec)?,
    };
    Ok(ch.with_description(spec))
}

/// `{systems: [[label, dim], ...], density | vector}` state description.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub systems: Vec<(String, usize)>,
    #[serde(default)]
    pub density: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub vector: Option<Vec<[f64; 2]>>,
}

fn state_from_file(path: &str) -> Result<LabeledState, CliError> {
    let text = read_file(path)?;
    let file: StateFile = serde_json::from_str(&text).map_err(|e| json_error(Path::new(path), &e))?;
    let systems: Vec<(&str, usize)> = file.systems.iter().map(|(l, d)| (l.as_str(), *d)).collect();
    match (&file.density, &file.vector) {
        (Some(rows), None) => LabeledState::mixed(complex_matrix(rows, path)?, &systems).map_err(invalid(path)),
        (None, Some(v)) => {
            let v = CVector::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])));
            LabeledState::pure(v, &systems).map_err(invalid(path))
        }
        _ => Err(CliError::config(format!(
            "{path}: give exactly one of `density` or `vector`"
        ))),
    }
}

fn trivial() -> csc_core::Result<LabeledState> {
    LabeledState::basis("A2", 1, 0)?.tensor(&LabeledState::basis("B2", 1, 0)?)
}

fn cc_correlated(d: usize) -> csc_core::Result<LabeledState> {
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        m[(i * d + i, i * d + i)] = c(1.0 / d as f64, 0.0);
    }
    LabeledState::mixed(m, &[("A2", d), ("B2", d)])
}

/// Parses a state spec. Built-in states live on `(A2, B2)`; ids from the
/// candidate library are accepted as well.
pub fn parse_state(spec: &str) -> Result<LabeledState, CliError> {
    if let Some(path) = spec.strip_prefix("file:") {
        return state_from_file(path);
    }
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let state = match kind {
        "trivial" => {
            parse_params(spec, body, &[])?;
            trivial()
        }
        "bell" => {
            let p = parse_params(spec, body, &["d"])?;
            LabeledState::maximally_entangled("A2", "B2", dimension(spec, &p, "d", Some(2))?)
        }
        "isotropic" => {
            let p = parse_params(spec, body, &["F", "d"])?;
            isotropic_state(dimension(spec, &p, "d", Some(2))?, require(spec, &p, "F")?)
        }
        "maximally-mixed" => {
            let p = parse_params(spec, body, &["d"])?;
            let d = dimension(spec, &p, "d", None)?;
            LabeledState::maximally_mixed("A2", d).and_then(|m| m.tensor(&LabeledState::basis("B2", 1, 0)?))
        }
        "cc-correlated" => {
            let p = parse_params(spec, body, &["d"])?;
            cc_correlated(dimension(spec, &p, "d", Some(2))?)
        }
        "bell-diagonal" => {
            let p = parse_params(spec, body, &["w0", "w1", "w2", "w3"])?;
            let w = [
                require(spec, &p, "w0")?,
                require(spec, &p, "w1")?,
                require(spec, &p, "w2")?,
                require(spec, &p, "w3")?,
            ];
            bell_diagonal_state(w)
        }
        "horodecki" => horodecki_ppt_state(require(spec, &parse_params(spec, body, &["a"])?, "a")?),
        _ => {
            let lib = candidate_state_library().map_err(invalid(spec))?;
            return lib.into_iter().find(|c| c.id == spec).map(|c| c.state).ok_or_else(|| {
                CliError::config(format!(
                    "unknown state `{spec}` (expected trivial, bell, isotropic, maximally-mixed, cc-correlated, \
                     bell-diagonal, horodecki, file:<path> or a library id)"
                ))
            });
        }
    };
    state.map_err(invalid(spec))
}
