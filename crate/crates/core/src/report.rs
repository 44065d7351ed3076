//! JSON reports, the results table and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga_attack::{AgentKind, GaHistory};
use crate::shadow_inference::InferenceReport;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackMethod {
    Ga,
    Random,
    Rl,
}

impl AttackMethod {
    pub fn title(self) -> &'static str {
        match self {
            AttackMethod::Ga => "Genetic Algorithm",
            AttackMethod::Random => "Random Search",
            AttackMethod::Rl => "RL-based Search",
        }
    }
}

/// One attack run (one seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub best_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<f64>,
    pub evaluations: u64,
    pub seconds: f64,
    pub map: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<GaHistory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub schema_version: u32,
    pub kind: String,
    pub method: AttackMethod,
    pub agent_kind: AgentKind,
    pub target_policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_map: Option<String>,
    pub config: serde_json::Value,
    pub runs: Vec<SeedResult>,
    /// Index into `runs` of the highest-scored run (earliest on ties).
    pub best_run: usize,
    pub chosen_map: Vec<String>,
    pub best_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<f64>,
    pub seconds: f64,
}

pub const ATTACK_KIND: &str = "attack";

impl AttackReport {
    /// Picks the highest-scored run and fills the summary fields.
    pub fn new(
        method: AttackMethod,
        agent_kind: AgentKind,
        target_policy: String,
        truth_map: Option<String>,
        config: serde_json::Value,
        runs: Vec<SeedResult>,
        seconds: f64,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Domain("attack report without runs".into()));
        }
        let mut best_run = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.best_score > runs[best_run].best_score {
                best_run = i;
            }
        }
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            kind: ATTACK_KIND.into(),
            method,
            agent_kind,
            target_policy,
            truth_map,
            config,
            chosen_map: runs[best_run].map.clone(),
            best_score: runs[best_run].best_score,
            recovery: runs[best_run].recovery,
            best_run,
            runs,
            seconds,
        })
    }
}

/// Either report kind, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyReport {
    Attack(AttackReport),
    Inference(InferenceReport),
}

pub fn parse_report(text: &str) -> Result<AnyReport> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(REPORT_SCHEMA_VERSION as u64) {
        return Err(Error::Format(format!(
            "unsupported report schema_version {version:?} (expected {REPORT_SCHEMA_VERSION})"
        )));
    }
    match value.get("kind").and_then(|k| k.as_str()) {
        Some(ATTACK_KIND) => Ok(AnyReport::Attack(serde_json::from_value(value)?)),
        Some(crate::shadow_inference::INFERENCE_KIND) => Ok(AnyReport::Inference(serde_json::from_value(value)?)),
        other => Err(Error::Format(format!("unknown report kind {other:?}"))),
    }
}

pub fn load_report(path: impl AsRef<Path>) -> Result<AnyReport> {
    parse_report(&fs::read_to_string(path)?)
}

/// One line of the results table. `value` is a recovery rate for attacks
/// and a macro-average accuracy for candidate inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub environment: String,
    pub agent: String,
    pub task: String,
    pub method: String,
    pub value: Option<f64>,
    pub run_time: f64,
    pub count: usize,
}

/// Run time is in seconds.
pub const TABLE_HEADER: [&str; 6] = ["Environment", "Agent", "Task", "Method", "Recovery Rate", "Run Time"];

/// Groups attack reports by (agent, method), averaging recovery and run time
/// over maps; each inference report becomes its own row.
pub fn aggregate(reports: &[AnyReport]) -> Result<Vec<TableRow>> {
    if reports.is_empty() {
        return Err(Error::Domain("no reports to aggregate".into()));
    }
    let mut groups: BTreeMap<(AgentKind, AttackMethod), Vec<&AttackReport>> = BTreeMap::new();
    let mut rows = Vec::new();
    for r in reports {
        if let AnyReport::Attack(a) = r {
            groups.entry((a.agent_kind, a.method)).or_default().push(a);
        }
    }
    for ((agent, method), list) in groups {
        let recoveries: Option<Vec<f64>> = list.iter().map(|a| a.recovery).collect();
        rows.push(TableRow {
            environment: "Grid World".into(),
            agent: agent.title().into(),
            task: "Transition Dynamics Search".into(),
            method: method.title().into(),
            value: recoveries.map(|v| v.iter().sum::<f64>() / v.len() as f64),
            run_time: list.iter().map(|a| a.seconds).sum::<f64>() / list.len() as f64,
            count: list.len(),
        });
    }
    for r in reports {
        if let AnyReport::Inference(inf) = r {
            rows.push(TableRow {
                environment: inf.candidate_set.clone(),
                agent: inf.config.trainer.title().into(),
                task: "Candidate Inference".into(),
                method: "Linear SVM".into(),
                value: Some(inf.standardized.macro_accuracy),
                run_time: inf.seconds,
                count: 1,
            });
        }
    }
    Ok(rows)
}

pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = format!("| {} |\n", TABLE_HEADER.join(" | "));
    out.push_str(&format!("|{}\n", " --- |".repeat(TABLE_HEADER.len())));
    for r in rows {
        let value = r.value.map_or("n/a".to_string(), |v| format!("{:.2}%", 100.0 * v));
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {:.0} |",
            r.environment, r.agent, r.task, r.method, value, r.run_time
        )
        .unwrap();
    }
    out
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<PathBuf>,
    pub started: String,
    pub finished: String,
    pub version: String,
}

impl RunManifest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported manifest schema {}", m.schema_version)));
        }
        Ok(m)
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attack(method: AttackMethod, agent: AgentKind, recovery: f64) -> AttackReport {
        AttackReport::new(
            method,
            agent,
            "t.policy".into(),
            None,
            serde_json::json!({}),
            vec![SeedResult {
                seed: 0,
                best_score: 1.0,
                recovery: Some(recovery),
                evaluations: 1,
                seconds: 2.0,
                map: vec!["G".into()],
                history: None,
            }],
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn table_averages_over_maps() {
        let reports: Vec<AnyReport> = [0.5, 0.7, 0.9]
            .iter()
            .map(|&r| AnyReport::Attack(attack(AttackMethod::Ga, AgentKind::Dqn, r)))
            .collect();
        let rows = aggregate(&reports).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].value.unwrap() - 0.7).abs() < 1e-12);
        let md = render_table(&rows);
        assert!(md.starts_with("| Environment | Agent | Task | Method | Recovery Rate | Run Time |\n"));
        assert!(md.contains("| Grid World | DQN | Transition Dynamics Search | Genetic Algorithm | 70.00% | 2 |"));
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn attack_report_round_trips_and_checks_version() {
        let r = attack(AttackMethod::Random, AgentKind::Pg, 0.25);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(parse_report(&text).unwrap(), AnyReport::Attack(r));
        let bumped = text.replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(parse_report(&bumped).is_err());
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
