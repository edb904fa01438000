//! Synthetic scenario generator.
//!
//! Instances follow the reference-scenario shape: a monthly horizon,
//! geometric demand growth, and an urban/rural density mixture so that
//! deploy-in-urban / decommission-in-rural behavior is observable. Every
//! site hosts one legacy 3G station per operator (redundant coverage,
//! which is what sharing exploits) plus co-located LTE candidate
//! stations starting in the off state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::types::{
    BaseStation, Scenario, StationType, SubscriberCluster, TechClass,
};
use crate::error::GeneratorError;

/// The default, config-overridable type table. Only the off-type zeros
/// are structural; the other numbers are placeholders.
pub fn default_type_table() -> Vec<StationType> {
    vec![
        StationType {
            id: "off".into(),
            tech: TechClass::Off,
            sectors: 0,
            capacity: 0.0,
            radius_km: 0.0,
            cost: 0.0,
        },
        StationType {
            id: "3g".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 100.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "lte1".into(),
            tech: TechClass::Lte,
            sectors: 1,
            capacity: 300.0,
            radius_km: 3.0,
            cost: 1.2,
        },
        StationType {
            id: "lte2".into(),
            tech: TechClass::Lte,
            sectors: 2,
            capacity: 600.0,
            radius_km: 3.0,
            cost: 1.5,
        },
        StationType {
            id: "lte3".into(),
            tech: TechClass::Lte,
            sectors: 3,
            capacity: 900.0,
            radius_km: 3.0,
            cost: 1.8,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub stations: usize,
    pub clusters: usize,
    pub operators: usize,
    pub horizon: u32,
    /// Demand growth factor over the horizon, g >= 1.
    pub growth: f64,
    pub seed: u64,
    /// Side of the square area in km; derived from the cluster count when
    /// `None`, keeping density roughly constant across sizes.
    pub area_km: Option<f64>,
    /// Changes per period; a heuristic default when `None`.
    pub change_rate: Option<u32>,
    pub h_max: f64,
    pub phi: f64,
    /// Fraction of clusters placed inside dense urban disks.
    pub urban_fraction: f64,
    pub urban_centers: usize,
    /// Probability that a site hosts an LTE candidate per operator.
    pub candidate_fraction: f64,
    /// Initial demand as a fraction of the equally-split initial capacity.
    pub demand_load: f64,
    /// Extra demand scale applied to clusters outside the urban disks.
    /// Values below one make rural coverage redundant relative to its load.
    pub rural_load: f64,
    pub type_table: Option<Vec<StationType>>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            stations: 100,
            clusters: 400,
            operators: 2,
            horizon: 60,
            growth: 6.0,
            seed: 1,
            area_km: None,
            change_rate: None,
            h_max: 1.0,
            phi: 0.7,
            urban_fraction: 0.6,
            urban_centers: 3,
            candidate_fraction: 1.0,
            demand_load: 0.55,
            rural_load: 1.0,
            type_table: None,
        }
    }
}

/// Generates a deterministic scenario. Demand follows the geometric law
/// `tau(c, k) = tau(c, 1) * g^((k - 1) / (K - 1))`, so period-K demand is
/// exactly `g` times the initial one.
pub fn generate(params: &GeneratorParams) -> Result<Scenario, GeneratorError> {
    if params.stations == 0 || params.clusters == 0 || params.operators == 0 {
        return Err(GeneratorError::NonPositiveCounts);
    }
    if params.growth < 1.0 {
        return Err(GeneratorError::BadGrowth(params.growth));
    }
    if params.horizon < 2 {
        return Err(GeneratorError::BadHorizon(params.horizon));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let types = params
        .type_table
        .clone()
        .unwrap_or_else(default_type_table);
    let off = types.iter().position(|t| t.tech == TechClass::Off).unwrap();
    let threeg = types
        .iter()
        .position(|t| t.tech == TechClass::ThreeG)
        .expect("type table needs a 3G type");
    let lte: Vec<usize> = (0..types.len())
        .filter(|&t| types[t].tech == TechClass::Lte)
        .collect();
    let lte_radius = lte
        .iter()
        .map(|&t| types[t].radius_km)
        .fold(f64::INFINITY, f64::min);

    let area = params
        .area_km
        .unwrap_or_else(|| (params.clusters as f64).sqrt().max(4.0));

    // Urban disks.
    let disk_r = (area / 8.0).max(1.0);
    let centers: Vec<(f64, f64)> = (0..params.urban_centers.max(1))
        .map(|_| (rng.gen::<f64>() * area, rng.gen::<f64>() * area))
        .collect();

    // Cluster positions: dense disks plus uniform background.
    let mut clusters = Vec::with_capacity(params.clusters);
    let mut urban = Vec::with_capacity(params.clusters);
    for i in 0..params.clusters {
        let is_urban = rng.gen::<f64>() < params.urban_fraction;
        urban.push(is_urban);
        let (x, y) = if is_urban {
            let (cx, cy) = centers[rng.gen_range(0..centers.len())];
            let ang = rng.gen::<f64>() * std::f64::consts::TAU;
            let r = disk_r * rng.gen::<f64>().sqrt();
            (
                (cx + r * ang.cos()).clamp(0.0, area),
                (cy + r * ang.sin()).clamp(0.0, area),
            )
        } else {
            (rng.gen::<f64>() * area, rng.gen::<f64>() * area)
        };
        clusters.push(SubscriberCluster {
            id: format!("c{i:05}"),
            x,
            y,
        });
    }

    // Sites are drawn at cluster positions (density-matched); every site
    // hosts a 3G station per operator, plus LTE candidates.
    let per_site = params.operators as f64 * (1.0 + params.candidate_fraction);
    let n_sites = ((params.stations as f64 / per_site).round() as usize).max(1);
    let mut order: Vec<usize> = (0..params.clusters).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut sites: Vec<(f64, f64)> = (0..n_sites)
        .map(|i| {
            let c = &clusters[order[i % order.len()]];
            (
                c.x + rng.gen_range(-0.5..0.5),
                c.y + rng.gen_range(-0.5..0.5),
            )
        })
        .collect();

    // Coverage fix-up: any cluster farther than the LTE radius (with a
    // margin for station offsets) from every site gets its own site.
    let margin = 0.5;
    for c in &clusters {
        let near = sites
            .iter()
            .any(|&(sx, sy)| ((sx - c.x).powi(2) + (sy - c.y).powi(2)).sqrt() <= lte_radius - margin);
        if !near {
            sites.push((c.x, c.y));
        }
    }

    let mut stations = Vec::new();
    for (s, &(sx, sy)) in sites.iter().enumerate() {
        for o in 0..params.operators {
            let (dx, dy) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            stations.push(BaseStation {
                id: format!("b{s:05}g{o}"),
                x: sx + dx,
                y: sy + dy,
                initial_type: threeg,
                allowed_types: vec![threeg, off],
                owner: o,
            });
            if rng.gen::<f64>() < params.candidate_fraction {
                let (dx, dy) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
                let mut allowed = vec![off];
                allowed.extend_from_slice(&lte);
                stations.push(BaseStation {
                    id: format!("b{s:05}l{o}"),
                    x: sx + dx,
                    y: sy + dy,
                    initial_type: off,
                    allowed_types: allowed,
                    owner: o,
                });
            }
        }
    }

    // Initial demand proportional to the equally-split initial capacity
    // reachable at each cluster, then geometric growth.
    let n_cov: Vec<usize> = stations
        .iter()
        .map(|b| {
            let r = types[b.initial_type].radius_km;
            if r <= 0.0 {
                return 0;
            }
            clusters
                .iter()
                .filter(|c| (b.x - c.x).powi(2) + (b.y - c.y).powi(2) <= r * r)
                .count()
        })
        .collect();
    let hor = params.horizon as usize;
    let n_ops = params.operators;
    let mut base: Vec<f64> = Vec::with_capacity(params.clusters);
    for c in &clusters {
        let mut proxy = 0.0;
        for (bi, b) in stations.iter().enumerate() {
            let r = types[b.initial_type].radius_km;
            if r > 0.0
                && n_cov[bi] > 0
                && (b.x - c.x).powi(2) + (b.y - c.y).powi(2) <= r * r
            {
                proxy += types[b.initial_type].capacity / n_cov[bi] as f64;
            }
        }
        base.push(params.demand_load * proxy);
    }
    for (ci, b) in base.iter_mut().enumerate() {
        if !urban[ci] {
            *b *= params.rural_load;
        }
    }

    // Feasibility calibration: at the final period the fully built-out
    // LTE network must still be able to serve every cluster with margin.
    // Under proportional allocation a cluster is servable when
    // sum_b cap_b / tau(S_b) >= 1 over its covering stations, so clusters
    // below the margin get their base demand damped; damping only helps
    // the neighbours, so a few sweeps converge.
    let cap_max = lte
        .iter()
        .map(|&t| types[t].capacity)
        .fold(0.0f64, f64::max);
    let cand_cov: Vec<(usize, Vec<usize>)> = stations
        .iter()
        .enumerate()
        .filter(|(_, b)| b.initial_type == off)
        .map(|(bi, b)| {
            let r = types[lte[lte.len() - 1]].radius_km;
            let r = lte
                .iter()
                .map(|&t| types[t].radius_km)
                .fold(r, f64::max);
            let cov = clusters
                .iter()
                .enumerate()
                .filter(|(_, c)| (b.x - c.x).powi(2) + (b.y - c.y).powi(2) <= r * r)
                .map(|(ci, _)| ci)
                .collect();
            (bi, cov)
        })
        .collect();
    // A single covering station at final-period load cap / margin then
    // serves its whole neighbourhood on its own, so the damped instance
    // stays feasible for every operator subset as well.
    let margin = 1.25;
    let limit = cap_max / (params.growth * margin);
    for _ in 0..8 {
        for (_, cov) in &cand_cov {
            let total: f64 = cov.iter().map(|&c| base[c]).sum();
            if total > limit {
                let s = limit / total;
                for &c in cov {
                    base[c] *= s;
                }
            }
        }
    }

    let mut demand = vec![0.0; params.clusters * hor * n_ops];
    for (ci, _c) in clusters.iter().enumerate() {
        let base = base[ci];
        // Asymmetric per-cluster operator split.
        let mut w: Vec<f64> = (0..n_ops).map(|_| 0.5 + rng.gen::<f64>()).collect();
        let wsum: f64 = w.iter().sum();
        for x in &mut w {
            *x /= wsum;
        }
        for k in 1..=params.horizon {
            let f = params
                .growth
                .powf((k as f64 - 1.0) / (params.horizon as f64 - 1.0));
            for o in 0..n_ops {
                demand[ci * hor * n_ops + (k as usize - 1) * n_ops + o] = base * w[o] * f;
            }
        }
    }

    let change_rate = params
        .change_rate
        .unwrap_or_else(|| (((2 * stations.len()) as f64 / hor as f64).ceil() as u32).max(1));
    let operators: Vec<String> = (0..n_ops).map(|o| format!("op{}", o + 1)).collect();

    Ok(Scenario::new(
        types,
        stations,
        clusters,
        operators,
        params.horizon,
        change_rate,
        params.h_max,
        params.phi,
        demand,
        &[],
    )
    .expect("generated scenario is structurally sound"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::validate;

    fn small() -> GeneratorParams {
        GeneratorParams {
            stations: 30,
            clusters: 100,
            operators: 2,
            horizon: 12,
            growth: 6.0,
            seed: 7,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.stations, b.stations);
        assert_eq!(a.clusters, b.clusters);
        for c in 0..a.clusters.len() {
            for k in 1..=a.horizon {
                for o in 0..a.operators.len() {
                    assert_eq!(a.demand(c, k, o).to_bits(), b.demand(c, k, o).to_bits());
                }
            }
        }
    }

    #[test]
    fn generated_instance_is_valid() {
        let sc = generate(&small()).unwrap();
        let vs = validate(&sc);
        assert!(vs.is_empty(), "{vs:?}");
    }

    #[test]
    fn demand_growth_hits_the_target_factor() {
        let params = small();
        let sc = generate(&params).unwrap();
        let demanded: Vec<usize> = (0..sc.clusters.len())
            .filter(|&c| sc.total_demand(c, 1) > 0.0)
            .collect();
        assert!(!demanded.is_empty());
        for c in demanded {
            let ratio = sc.total_demand(c, params.horizon) / sc.total_demand(c, 1);
            assert!((ratio - params.growth).abs() < 1e-9, "ratio {ratio}");
        }
    }

    #[test]
    fn every_demanded_cluster_is_reachable_by_lte() {
        let sc = generate(&small()).unwrap();
        for c in 0..sc.clusters.len() {
            if !sc.is_demanded(c) {
                continue;
            }
            let ok = sc.candidate_stations(c).iter().any(|&b| {
                sc.stations[b]
                    .allowed_types
                    .iter()
                    .any(|&t| sc.types[t].capacity > 0.0 && sc.covers(b, c, t))
            });
            assert!(ok, "cluster {} unreachable", sc.clusters[c].id);
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let mut p = small();
        p.growth = 0.5;
        assert!(generate(&p).is_err());
        let mut p = small();
        p.horizon = 1;
        assert!(generate(&p).is_err());
        let mut p = small();
        p.clusters = 0;
        assert!(generate(&p).is_err());
    }

    #[test]
    fn station_count_is_close_to_requested() {
        let sc = generate(&small()).unwrap();
        // Sites are rounded and coverage fix-up can add a few extra.
        assert!(sc.stations.len() >= 24, "{}", sc.stations.len());
    }
}
