//! Per-period plan reports and their on-disk form.
//!
//! `schedule.csv` lists every change with its effect kind and the phase
//! that produced it; `metrics.csv` carries one row per period;
//! `summary.json` holds status, settings and totals. `verify_report`
//! re-derives the metrics change counts and cumulative cost from
//! `schedule.csv` alone and demands byte-identical fields, which is the
//! report-integrity gate.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assessment::{hhi, Assessor, Mode, NetworkView, ProportionalAssessor};
use crate::error::IoError;
use crate::planner::{PhaseEvent, PlanResult, PlanStatus};
use crate::scenario::{Period, Scenario, Schedule, TypeIdx};

/// What one change does to its station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeKind {
    Create,
    Enhance,
    Decommission,
}

impl ChangeKind {
    pub fn name(self) -> &'static str {
        match self {
            ChangeKind::Create => "create",
            ChangeKind::Enhance => "enhance",
            ChangeKind::Decommission => "decommission",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodMetrics {
    pub period: Period,
    /// Total market demand.
    pub demand: f64,
    /// Total served capacity.
    pub capacity: f64,
    /// Aggregated sigma - tau over all clusters.
    pub unused: f64,
    pub creations: usize,
    pub enhancements: usize,
    pub decommissions: usize,
    /// Integrated operating cost of periods 1..=k.
    pub cumulative_cost: f64,
    /// Fraction of counted clusters with HHI at or below the ceiling.
    pub hhi_compliance: f64,
    /// Served traffic attributed to each station type.
    pub served_per_type: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PlanReport {
    pub mode: Mode,
    pub periods: Vec<PeriodMetrics>,
    /// Final-network cost: cost of every station's last type.
    pub final_cost: f64,
    /// Integrated cost over the whole horizon.
    pub total_cost: f64,
}

/// Builds the full per-period report for a schedule. One assessment pass
/// per period; contexts are prepared once.
pub fn build_report(sc: &Scenario, schedule: &Schedule, mode: Mode) -> PlanReport {
    let assessor = ProportionalAssessor;
    let views: Vec<NetworkView> = match mode {
        Mode::Shared => vec![NetworkView::pooled(sc)],
        Mode::Independent => (0..sc.operators.len())
            .map(|o| NetworkView::operator(sc, o))
            .collect(),
    };
    let ctxs: Vec<_> = views.iter().map(|v| assessor.prepare(sc, v)).collect();
    let mut in_view: Vec<Vec<bool>> = Vec::new();
    for v in &views {
        let mut f = vec![false; sc.stations.len()];
        for &b in &v.stations {
            f[b] = true;
        }
        in_view.push(f);
    }
    let traj = schedule.trajectory(sc);
    let kinds = change_kinds(sc, schedule);
    let hor = sc.horizon as usize;

    let mut periods = Vec::with_capacity(hor);
    let mut cumulative_cost = 0.0;
    for k in 1..=sc.horizon {
        // Market sigma per cluster: per-view totals summed in view order,
        // each view's total in ascending station order.
        let mut sigma = vec![0.0; sc.clusters.len()];
        for g in 0..views.len() {
            for c in 0..sc.clusters.len() {
                let mut sum = 0.0;
                for &b in sc.candidate_stations(c) {
                    if !in_view[g][b] {
                        continue;
                    }
                    let t = traj[b][k as usize - 1];
                    sum += assessor.contribution(sc, &ctxs[g], b, t, c, k);
                }
                sigma[c] += sum;
            }
        }

        let mut demand = 0.0;
        let mut capacity = 0.0;
        let mut unused = 0.0;
        let mut counted = 0usize;
        let mut compliant = 0usize;
        // Served-demand fraction per cluster, for type attribution.
        let mut served_scale = vec![0.0; sc.clusters.len()];
        for c in 0..sc.clusters.len() {
            let tau = sc.total_demand(c, k);
            demand += tau;
            capacity += sigma[c];
            unused += sigma[c] - tau;
            if sigma[c] > 0.0 {
                served_scale[c] = sigma[c].min(tau) / sigma[c];
            }
            if tau > 0.0 {
                counted += 1;
                let h = match mode {
                    Mode::Shared => hhi(sigma[c], &[tau]),
                    Mode::Independent => {
                        let per_op: Vec<f64> =
                            (0..sc.operators.len()).map(|o| sc.demand(c, k, o)).collect();
                        hhi(sigma[c], &per_op)
                    }
                };
                if !h.degenerate && h.value <= sc.h_max {
                    compliant += 1;
                }
            }
        }

        let mut served_per_type = vec![0.0; sc.types.len()];
        for (g, _) in views.iter().enumerate() {
            for b in 0..sc.stations.len() {
                if !in_view[g][b] {
                    continue;
                }
                let t = traj[b][k as usize - 1];
                for &c in sc.coverage_of(b, t) {
                    let s = assessor.contribution(sc, &ctxs[g], b, t, c, k);
                    served_per_type[t] += s * served_scale[c];
                }
            }
        }

        let mut period_cost = 0.0;
        for b in 0..sc.stations.len() {
            period_cost += sc.cost(b, traj[b][k as usize - 1]);
        }
        cumulative_cost += period_cost;

        let mut creations = 0;
        let mut enhancements = 0;
        let mut decommissions = 0;
        for (&(_, p), &kind) in &kinds {
            if p != k {
                continue;
            }
            match kind {
                ChangeKind::Create => creations += 1,
                ChangeKind::Enhance => enhancements += 1,
                ChangeKind::Decommission => decommissions += 1,
            }
        }

        periods.push(PeriodMetrics {
            period: k,
            demand,
            capacity,
            unused,
            creations,
            enhancements,
            decommissions,
            cumulative_cost,
            hhi_compliance: if counted == 0 {
                1.0
            } else {
                compliant as f64 / counted as f64
            },
            served_per_type,
        });
    }

    let final_cost = (0..sc.stations.len())
        .map(|b| sc.cost(b, traj[b][hor - 1]))
        .sum();
    PlanReport {
        mode,
        periods,
        final_cost,
        total_cost: cumulative_cost,
    }
}

/// Classifies every change by replaying each station's trajectory.
fn change_kinds(sc: &Scenario, schedule: &Schedule) -> HashMap<(usize, Period), ChangeKind> {
    let mut changes = schedule.changes().to_vec();
    changes.sort_by_key(|ch| (ch.station, ch.period));
    let mut cur: Vec<TypeIdx> = sc.stations.iter().map(|s| s.initial_type).collect();
    let mut out = HashMap::new();
    for ch in changes {
        let from = cur[ch.station];
        if from == ch.to_type {
            continue;
        }
        let kind = if from == sc.off_type {
            ChangeKind::Create
        } else if ch.to_type == sc.off_type {
            ChangeKind::Decommission
        } else {
            ChangeKind::Enhance
        };
        out.insert((ch.station, ch.period), kind);
        cur[ch.station] = ch.to_type;
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible_reason: Option<String>,
    pub mode: Mode,
    pub horizon: Period,
    pub change_rate: u32,
    pub h_max: f64,
    pub phi: f64,
    pub changes: usize,
    pub creations: usize,
    pub enhancements: usize,
    pub decommissions: usize,
    pub final_cost: f64,
    pub total_cost: f64,
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `schedule.csv`, `metrics.csv` and `summary.json` into `dir`.
pub fn write_report(
    dir: &Path,
    sc: &Scenario,
    result: &PlanResult,
    report: &PlanReport,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    // Phase of each committed change, for the schedule listing.
    let mut phases: HashMap<(usize, Period), &'static str> = HashMap::new();
    for ev in &result.events {
        if let PhaseEvent::Commit { phase, change, .. } = ev {
            phases.insert((change.station, change.period), phase.name());
        }
    }
    let kinds = change_kinds(sc, &result.schedule);

    let sched_path = dir.join("schedule.csv");
    {
        let mut w = csv::Writer::from_path(&sched_path)
            .map_err(|e| IoError::Parse {
                path: sched_path.display().to_string(),
                detail: e.to_string(),
            })?;
        w.write_record(["station", "period", "from_type", "to_type", "kind", "phase"])
            .map_err(|e| IoError::Parse {
                path: sched_path.display().to_string(),
                detail: e.to_string(),
            })?;
        let mut rows = result.schedule.changes().to_vec();
        rows.sort_by_key(|ch| (ch.period, ch.station));
        // Replay per station to recover the from-type of each change.
        let mut by_station = rows.clone();
        by_station.sort_by_key(|ch| (ch.station, ch.period));
        let mut cur: Vec<TypeIdx> = sc.stations.iter().map(|s| s.initial_type).collect();
        let mut from_of: HashMap<(usize, Period), TypeIdx> = HashMap::new();
        for ch in &by_station {
            from_of.insert((ch.station, ch.period), cur[ch.station]);
            cur[ch.station] = ch.to_type;
        }
        for ch in &rows {
            let from = from_of[&(ch.station, ch.period)];
            let kind = kinds
                .get(&(ch.station, ch.period))
                .map(|k| k.name())
                .unwrap_or("noop");
            let phase = phases
                .get(&(ch.station, ch.period))
                .copied()
                .unwrap_or("unknown");
            w.write_record([
                sc.stations[ch.station].id.as_str(),
                &ch.period.to_string(),
                sc.types[from].id.as_str(),
                sc.types[ch.to_type].id.as_str(),
                kind,
                phase,
            ])
            .map_err(|e| IoError::Parse {
                path: sched_path.display().to_string(),
                detail: e.to_string(),
            })?;
        }
        w.flush().map_err(|e| io_err(&sched_path, e))?;
    }

    let metrics_path = dir.join("metrics.csv");
    {
        let mut header = vec![
            "period".to_string(),
            "demand".to_string(),
            "capacity".to_string(),
            "unused".to_string(),
            "creations".to_string(),
            "enhancements".to_string(),
            "decommissions".to_string(),
            "cumulative_cost".to_string(),
            "hhi_compliance".to_string(),
        ];
        for t in &sc.types {
            header.push(format!("served_{}", t.id));
        }
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        for m in &report.periods {
            let mut row = vec![
                m.period.to_string(),
                m.demand.to_string(),
                m.capacity.to_string(),
                m.unused.to_string(),
                m.creations.to_string(),
                m.enhancements.to_string(),
                m.decommissions.to_string(),
                m.cumulative_cost.to_string(),
                m.hhi_compliance.to_string(),
            ];
            for v in &m.served_per_type {
                row.push(v.to_string());
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(&metrics_path, out).map_err(|e| io_err(&metrics_path, e))?;
    }

    let (status, reason) = match &result.status {
        PlanStatus::Success => ("success".to_string(), None),
        PlanStatus::Infeasible { phase, reason } => (
            "infeasible".to_string(),
            Some(format!("phase {}: {}", phase.name(), reason)),
        ),
    };
    let summary = Summary {
        status,
        infeasible_reason: reason,
        mode: report.mode,
        horizon: sc.horizon,
        change_rate: sc.change_rate,
        h_max: sc.h_max,
        phi: sc.phi,
        changes: result.schedule.changes().len(),
        creations: result.counts.creations,
        enhancements: result.counts.enhancements,
        decommissions: result.counts.decommissions,
        final_cost: report.final_cost,
        total_cost: report.total_cost,
    };
    let summary_path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(&summary_path, text).map_err(|e| io_err(&summary_path, e))?;
    Ok(())
}

/// Report-integrity check: recomputes per-period change counts and
/// cumulative cost from `schedule.csv` alone and compares against the
/// corresponding `metrics.csv` fields as raw strings — byte equality,
/// not numeric closeness. Returns the list of mismatches.
pub fn verify_report(dir: &Path, sc: &Scenario) -> Result<Vec<String>, IoError> {
    let sched_path = dir.join("schedule.csv");
    let metrics_path = dir.join("metrics.csv");
    let hor = sc.horizon as usize;

    // Rebuild the trajectory and per-period counts purely from the CSV.
    #[derive(Deserialize)]
    struct Row {
        station: String,
        period: Period,
        #[allow(dead_code)]
        from_type: String,
        to_type: String,
        kind: String,
        #[allow(dead_code)]
        phase: String,
    }
    let mut rdr = csv::Reader::from_path(&sched_path).map_err(|e| IoError::Parse {
        path: sched_path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut traj: Vec<Vec<TypeIdx>> = sc
        .stations
        .iter()
        .map(|s| vec![s.initial_type; hor])
        .collect();
    let mut counts = vec![[0usize; 3]; hor];
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| IoError::Parse {
            path: sched_path.display().to_string(),
            detail: e.to_string(),
        })?;
        let b = sc
            .station_index(&row.station)
            .ok_or_else(|| IoError::Parse {
                path: sched_path.display().to_string(),
                detail: format!("unknown station {}", row.station),
            })?;
        let t = sc.type_index(&row.to_type).ok_or_else(|| IoError::Parse {
            path: sched_path.display().to_string(),
            detail: format!("unknown type {}", row.to_type),
        })?;
        for k in row.period as usize..=hor {
            traj[b][k - 1] = t;
        }
        let slot = match row.kind.as_str() {
            "create" => 0,
            "enhance" => 1,
            "decommission" => 2,
            other => {
                return Err(IoError::Parse {
                    path: sched_path.display().to_string(),
                    detail: format!("unknown change kind {other}"),
                })
            }
        };
        counts[row.period as usize - 1][slot] += 1;
    }

    let mut cumulative = Vec::with_capacity(hor);
    let mut acc = 0.0;
    for k in 0..hor {
        let mut period_cost = 0.0;
        for b in 0..sc.stations.len() {
            period_cost += sc.cost(b, traj[b][k]);
        }
        acc += period_cost;
        cumulative.push(acc);
    }

    let text = fs::read_to_string(&metrics_path).map_err(|e| io_err(&metrics_path, e))?;
    let mut mismatches = Vec::new();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name);
    let (Some(ci_p), Some(ci_cr), Some(ci_en), Some(ci_de), Some(ci_cost)) = (
        col("period"),
        col("creations"),
        col("enhancements"),
        col("decommissions"),
        col("cumulative_cost"),
    ) else {
        return Err(IoError::Parse {
            path: metrics_path.display().to_string(),
            detail: "missing expected columns".to_string(),
        });
    };
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let k: usize = fields[ci_p].parse().map_err(|_| IoError::Parse {
            path: metrics_path.display().to_string(),
            detail: format!("bad period field {}", fields[ci_p]),
        })?;
        let expect = [
            (ci_cr, counts[k - 1][0].to_string(), "creations"),
            (ci_en, counts[k - 1][1].to_string(), "enhancements"),
            (ci_de, counts[k - 1][2].to_string(), "decommissions"),
            (ci_cost, cumulative[k - 1].to_string(), "cumulative_cost"),
        ];
        for (i, want, name) in expect {
            if fields[i] != want {
                mismatches.push(format!(
                    "period {k}: {name} is {:?} in metrics.csv but {want:?} recomputed",
                    fields[i]
                ));
            }
        }
    }
    Ok(mismatches)
}
