//! Scenario directory format.
//!
//! A scenario is a directory holding `meta.json` (horizon, change rate,
//! HHI settings, operators, type table, optional per-station cost
//! overrides), `stations.csv`, `clusters.csv` and `demand.csv`. Coverage
//! and distances are derived, never stored. All CSV files are UTF-8,
//! comma-separated, with a header row; the demand table must be complete
//! over all (cluster, period, operator) triples.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{
    BaseStation, CostOverride, Scenario, StationType, SubscriberCluster,
};
use super::validate::validate;
use crate::error::IoError;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    horizon: u32,
    change_rate: u32,
    h_max: f64,
    phi: f64,
    operators: Vec<String>,
    types: Vec<StationType>,
    #[serde(default)]
    cost_overrides: Vec<CostOverride>,
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, detail: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

/// Writes a scenario to `dir`, creating it if needed. Output is
/// deterministic: equal scenarios serialize to identical bytes.
pub fn save(sc: &Scenario, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let meta = Meta {
        horizon: sc.horizon,
        change_rate: sc.change_rate,
        h_max: sc.h_max,
        phi: sc.phi,
        operators: sc.operators.clone(),
        types: sc.types.clone(),
        cost_overrides: collect_overrides(sc),
    };
    let meta_path = dir.join("meta.json");
    let mut json = serde_json::to_string_pretty(&meta)
        .map_err(|e| parse_err(&meta_path, e.to_string()))?;
    json.push('\n');
    fs::write(&meta_path, json).map_err(|e| io_err(&meta_path, e))?;

    let st_path = dir.join("stations.csv");
    let mut w = csv::Writer::from_path(&st_path).map_err(|e| parse_err(&st_path, e.to_string()))?;
    w.write_record(["id", "x", "y", "initial_type", "owner", "allowed_types"])
        .map_err(|e| parse_err(&st_path, e.to_string()))?;
    for b in &sc.stations {
        let allowed: Vec<&str> = b
            .allowed_types
            .iter()
            .map(|&t| sc.types[t].id.as_str())
            .collect();
        w.write_record([
            b.id.as_str(),
            &b.x.to_string(),
            &b.y.to_string(),
            sc.types[b.initial_type].id.as_str(),
            sc.operators[b.owner].as_str(),
            &allowed.join("|"),
        ])
        .map_err(|e| parse_err(&st_path, e.to_string()))?;
    }
    w.flush().map_err(|e| io_err(&st_path, e))?;

    let cl_path = dir.join("clusters.csv");
    let mut w = csv::Writer::from_path(&cl_path).map_err(|e| parse_err(&cl_path, e.to_string()))?;
    w.write_record(["id", "x", "y"])
        .map_err(|e| parse_err(&cl_path, e.to_string()))?;
    for c in &sc.clusters {
        w.write_record([c.id.as_str(), &c.x.to_string(), &c.y.to_string()])
            .map_err(|e| parse_err(&cl_path, e.to_string()))?;
    }
    w.flush().map_err(|e| io_err(&cl_path, e))?;

    let dm_path = dir.join("demand.csv");
    let mut w = csv::Writer::from_path(&dm_path).map_err(|e| parse_err(&dm_path, e.to_string()))?;
    w.write_record(["cluster", "period", "operator", "traffic"])
        .map_err(|e| parse_err(&dm_path, e.to_string()))?;
    for (ci, c) in sc.clusters.iter().enumerate() {
        for k in 1..=sc.horizon {
            for (oi, op) in sc.operators.iter().enumerate() {
                w.write_record([
                    c.id.as_str(),
                    &k.to_string(),
                    op.as_str(),
                    &sc.demand(ci, k, oi).to_string(),
                ])
                .map_err(|e| parse_err(&dm_path, e.to_string()))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(&dm_path, e))?;
    Ok(())
}

fn collect_overrides(sc: &Scenario) -> Vec<CostOverride> {
    let mut out = Vec::new();
    for (bi, b) in sc.stations.iter().enumerate() {
        for (ti, t) in sc.types.iter().enumerate() {
            if sc.cost(bi, ti) != t.cost {
                out.push(CostOverride {
                    station: b.id.clone(),
                    type_id: t.id.clone(),
                    cost: sc.cost(bi, ti),
                });
            }
        }
    }
    out
}

/// Loads a scenario from `dir`. Parse errors name the file and offending
/// field; a structurally sound scenario that violates invariants is
/// rejected with the full violation list.
pub fn load(dir: &Path) -> Result<Scenario, IoError> {
    let meta_path = dir.join("meta.json");
    let raw = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: Meta =
        serde_json::from_str(&raw).map_err(|e| parse_err(&meta_path, e.to_string()))?;

    let type_index = |id: &str| -> Option<usize> { meta.types.iter().position(|t| t.id == id) };
    let op_index = |id: &str| -> Option<usize> { meta.operators.iter().position(|o| o == id) };

    let st_path = dir.join("stations.csv");
    let mut stations = Vec::new();
    let mut rdr =
        csv::Reader::from_path(&st_path).map_err(|e| parse_err(&st_path, e.to_string()))?;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(&st_path, e.to_string()))?;
        let field = |i: usize, name: &str| -> Result<&str, IoError> {
            rec.get(i)
                .ok_or_else(|| parse_err(&st_path, format!("line {}: missing {name}", line + 2)))
        };
        let id = field(0, "id")?.to_string();
        let x: f64 = field(1, "x")?
            .parse()
            .map_err(|_| parse_err(&st_path, format!("line {}: bad x", line + 2)))?;
        let y: f64 = field(2, "y")?
            .parse()
            .map_err(|_| parse_err(&st_path, format!("line {}: bad y", line + 2)))?;
        let init = field(3, "initial_type")?;
        let initial_type = type_index(init)
            .ok_or_else(|| parse_err(&st_path, format!("line {}: unknown type {init}", line + 2)))?;
        let owner_id = field(4, "owner")?;
        let owner = op_index(owner_id).ok_or_else(|| {
            parse_err(&st_path, format!("line {}: unknown operator {owner_id}", line + 2))
        })?;
        let mut allowed_types = Vec::new();
        for t in field(5, "allowed_types")?.split('|').filter(|s| !s.is_empty()) {
            allowed_types.push(type_index(t).ok_or_else(|| {
                parse_err(&st_path, format!("line {}: unknown type {t}", line + 2))
            })?);
        }
        stations.push(BaseStation {
            id,
            x,
            y,
            initial_type,
            allowed_types,
            owner,
        });
    }

    let cl_path = dir.join("clusters.csv");
    let mut clusters = Vec::new();
    let mut rdr =
        csv::Reader::from_path(&cl_path).map_err(|e| parse_err(&cl_path, e.to_string()))?;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(&cl_path, e.to_string()))?;
        let get = |i: usize| -> Result<&str, IoError> {
            rec.get(i)
                .ok_or_else(|| parse_err(&cl_path, format!("line {}: short record", line + 2)))
        };
        clusters.push(SubscriberCluster {
            id: get(0)?.to_string(),
            x: get(1)?
                .parse()
                .map_err(|_| parse_err(&cl_path, format!("line {}: bad x", line + 2)))?,
            y: get(2)?
                .parse()
                .map_err(|_| parse_err(&cl_path, format!("line {}: bad y", line + 2)))?,
        });
    }

    let cluster_index: std::collections::HashMap<&str, usize> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();

    let dm_path = dir.join("demand.csv");
    let hor = meta.horizon as usize;
    let n_ops = meta.operators.len();
    let mut demand = vec![f64::NAN; clusters.len() * hor * n_ops];
    let mut rdr =
        csv::Reader::from_path(&dm_path).map_err(|e| parse_err(&dm_path, e.to_string()))?;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(&dm_path, e.to_string()))?;
        let get = |i: usize| -> Result<&str, IoError> {
            rec.get(i)
                .ok_or_else(|| parse_err(&dm_path, format!("line {}: short record", line + 2)))
        };
        let cid = get(0)?;
        let &c = cluster_index.get(cid).ok_or_else(|| {
            parse_err(&dm_path, format!("line {}: unknown cluster {cid}", line + 2))
        })?;
        let k: u32 = get(1)?
            .parse()
            .map_err(|_| parse_err(&dm_path, format!("line {}: bad period", line + 2)))?;
        if k < 1 || k > meta.horizon {
            return Err(parse_err(
                &dm_path,
                format!("line {}: period {k} outside 1..={}", line + 2, meta.horizon),
            ));
        }
        let oid = get(2)?;
        let o = op_index(oid).ok_or_else(|| {
            parse_err(&dm_path, format!("line {}: unknown operator {oid}", line + 2))
        })?;
        let traffic: f64 = get(3)?
            .parse()
            .map_err(|_| parse_err(&dm_path, format!("line {}: bad traffic", line + 2)))?;
        demand[c * hor * n_ops + (k as usize - 1) * n_ops + o] = traffic;
    }
    for (c, cl) in clusters.iter().enumerate() {
        for k in 1..=meta.horizon {
            for o in 0..n_ops {
                if demand[c * hor * n_ops + (k as usize - 1) * n_ops + o].is_nan() {
                    return Err(IoError::MissingDemand {
                        cluster: cl.id.clone(),
                        period: k,
                        operator: meta.operators[o].clone(),
                    });
                }
            }
        }
    }

    let sc = Scenario::new(
        meta.types,
        stations,
        clusters,
        meta.operators,
        meta.horizon,
        meta.change_rate,
        meta.h_max,
        meta.phi,
        demand,
        &meta.cost_overrides,
    )?;
    let violations = validate(&sc);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(IoError::Invalid(list.join("; ")));
    }
    Ok(sc)
}
