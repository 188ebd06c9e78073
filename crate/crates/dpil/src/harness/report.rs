//! Structured run reports and their emission as JSON plus CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::eval::{DecayPoint, SweepRow};
use crate::imitation::GailIterStats;

/// Atomic file write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Per-stage results plus provenance. Wall-clock timings are carried
/// separately so reports can be compared on numeric content alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub stages: BTreeMap<String, Value>,
    pub provenance: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl EvalReport {
    /// The deterministic comparison surface: stages and provenance, without
    /// wall-clock timings.
    pub fn deterministic_json(&self) -> String {
        #[derive(Serialize)]
        struct Surface<'a> {
            stages: &'a BTreeMap<String, Value>,
            provenance: &'a BTreeMap<String, String>,
        }
        serde_json::to_string_pretty(&Surface {
            stages: &self.stages,
            provenance: &self.provenance,
        })
        .expect("report serializes")
    }
}

// Typed rows for the eval-stage tables; they serialize into the report and
// back out when CSVs are emitted.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdRow {
    pub dataset: String,
    pub mmd_imperfect: f64,
    pub mmd_purified: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyValueRow {
    pub policy: String,
    pub mean_return: f64,
    pub stderr: f64,
    pub mean_discounted: f64,
    pub n_episodes: usize,
    /// Per-episode undiscounted returns; t-test inputs.
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtestRow {
    pub a: String,
    pub b: String,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBaselineRow {
    pub filter: String,
    pub mean_return: f64,
    pub stderr: f64,
}

/// Writes `report.json` plus one CSV per table/curve present in the report.
/// File names are stable: `sweep.csv`, `decay_curve.csv`, `mmd.csv`,
/// `ttest.csv`, `policy_values.csv`, `filter_baselines.csv`, and
/// `gail_curve_<name>.csv`. Returns the written paths.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    write_atomic(&report_path, serde_json::to_string_pretty(report)?.as_bytes())?;
    written.push(report_path);

    if let Some(eval) = report.stages.get("eval") {
        if let Some(rows) = decode::<Vec<SweepRow>>(eval, "sweep") {
            let mut csv = String::from("t_star,mean_return,stderr,seed_count\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.t_star, r.mean_return, r.stderr, r.seed_count
                ));
            }
            written.push(write_csv(dir, "sweep.csv", &csv)?);
        }
        if let Some(points) = decode::<Vec<DecayPoint>>(eval, "decay_curve") {
            let mut csv = String::from("t,mmd,null_std\n");
            for p in points {
                csv.push_str(&format!("{},{},{}\n", p.t, p.mmd, p.null_std));
            }
            written.push(write_csv(dir, "decay_curve.csv", &csv)?);
        }
        if let Some(rows) = decode::<Vec<MmdRow>>(eval, "mmd") {
            let mut csv = String::from("dataset,mmd_imperfect,mmd_purified\n");
            for r in rows {
                let purified = r
                    .mmd_purified
                    .map(|v| format!("{v}"))
                    .unwrap_or_default();
                csv.push_str(&format!("{},{},{}\n", r.dataset, r.mmd_imperfect, purified));
            }
            written.push(write_csv(dir, "mmd.csv", &csv)?);
        }
        if let Some(rows) = decode::<Vec<TtestRow>>(eval, "ttest") {
            let mut csv = String::from("a,b,p_value\n");
            for r in rows {
                csv.push_str(&format!("{},{},{}\n", r.a, r.b, r.p_value));
            }
            written.push(write_csv(dir, "ttest.csv", &csv)?);
        }
        if let Some(rows) = decode::<Vec<PolicyValueRow>>(eval, "policy_values") {
            let mut csv = String::from("policy,mean_return,stderr,mean_discounted,n_episodes\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.policy, r.mean_return, r.stderr, r.mean_discounted, r.n_episodes
                ));
            }
            written.push(write_csv(dir, "policy_values.csv", &csv)?);
        }
        if let Some(rows) = decode::<Vec<FilterBaselineRow>>(eval, "filter_baselines") {
            let mut csv = String::from("filter,mean_return,stderr\n");
            for r in rows {
                csv.push_str(&format!("{},{},{}\n", r.filter, r.mean_return, r.stderr));
            }
            written.push(write_csv(dir, "filter_baselines.csv", &csv)?);
        }
    }
    if let Some(learner) = report.stages.get("learner") {
        if let Some(curves) = decode::<BTreeMap<String, Vec<GailIterStats>>>(learner, "gail_curves")
        {
            for (name, curve) in curves {
                let mut csv = String::from("iteration,env_return_mean,env_return_stderr,disc_loss\n");
                for p in curve {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        p.iteration, p.env_return_mean, p.env_return_stderr, p.disc_loss
                    ));
                }
                let fname = format!("gail_curve_{}.csv", name.replace(':', "_"));
                written.push(write_csv(dir, &fname, &csv)?);
            }
        }
    }
    Ok(written)
}

fn decode<T: serde::de::DeserializeOwned>(stage: &Value, key: &str) -> Option<T> {
    stage
        .get(key)
        .and_then(|v| serde_json::from_value(v.clone()).ok())
}

fn write_csv(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write_atomic(&path, content.as_bytes())?;
    Ok(path)
}
