pub mod attack;
pub mod maps;
pub mod report;
pub mod shadow;
pub mod train;

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dynsleuth_core::env_families::{builtin_candidate_set, CandidateSet, DynamicsCandidate, BUILTIN_SETS};
use dynsleuth_core::gridworld::parse_map;
use dynsleuth_core::GridMap;

/// `HxW`, e.g. `7x7`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("size {s:?} is not HxW"))?;
    let (h, w): (usize, usize) = (h.trim().parse()?, w.trim().parse()?);
    if h == 0 || w == 0 {
        bail!("size {s:?} has a zero dimension");
    }
    Ok((h, w))
}

/// `r,c` (zero-based row and column).
pub fn parse_cell(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("cell {s:?} is not r,c"))?;
    Ok((r.trim().parse()?, c.trim().parse()?))
}

pub fn read_map(path: &Path) -> Result<GridMap> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading map {}", path.display()))?;
    parse_map(&text).with_context(|| format!("parsing map {}", path.display()))
}

/// A built-in set name or a `.candidates.json` path.
pub fn load_candidates(spec: &str) -> Result<CandidateSet> {
    if BUILTIN_SETS.contains(&spec) {
        return Ok(builtin_candidate_set(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!(
            "candidate set {spec:?} is neither built in ({}) nor an existing file",
            BUILTIN_SETS.join(", ")
        );
    }
    CandidateSet::load(path).with_context(|| format!("loading candidate set {spec}"))
}

/// `<set>:<label>`.
pub fn load_candidate(spec: &str) -> Result<DynamicsCandidate> {
    let (set, label) = spec
        .rsplit_once(':')
        .ok_or_else(|| anyhow!("candidate {spec:?} is not <set>:<label>"))?;
    let set = load_candidates(set)?;
    let i = set
        .index_of(label)
        .ok_or_else(|| anyhow!("no candidate {label:?} (labels: {})", set.labels().join(", ")))?;
    Ok(set.candidates[i].clone())
}
