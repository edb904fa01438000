//! Semantic invariant checks over a [`Scenario`].
//!
//! Violations are data, not faults: `validate` returns a list naming the
//! invariant and the offending entity, and an empty list means the
//! scenario is well formed.

use std::fmt;

use super::types::{Scenario, TechClass};

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Short stable name of the invariant, e.g. `"off-type coverage"`.
    pub invariant: &'static str,
    /// Id of the offending entity.
    pub entity: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.invariant, self.entity, self.detail)
    }
}

/// Checks every scenario invariant and returns all violations found.
pub fn validate(sc: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    let off_count = sc.types.iter().filter(|t| t.tech == TechClass::Off).count();
    if off_count != 1 {
        out.push(Violation {
            invariant: "single off type",
            entity: "type table".into(),
            detail: format!("expected exactly one off type, found {off_count}"),
        });
    }
    let off = &sc.types[sc.off_type];
    if off.capacity != 0.0 || off.cost != 0.0 {
        out.push(Violation {
            invariant: "off type is free and idle",
            entity: off.id.clone(),
            detail: "decommissioned type must have zero capacity and zero cost".into(),
        });
    }
    for t in &sc.types {
        if !(t.capacity.is_finite() && t.capacity >= 0.0)
            || !(t.cost.is_finite() && t.cost >= 0.0)
            || !(t.radius_km.is_finite() && t.radius_km >= 0.0)
        {
            out.push(Violation {
                invariant: "finite non-negative type parameters",
                entity: t.id.clone(),
                detail: "capacity, cost and radius must be finite and >= 0".into(),
            });
        }
    }
    for (b, st) in sc.stations.iter().enumerate() {
        for &t in &st.allowed_types {
            if !(sc.cost(b, t).is_finite() && sc.cost(b, t) >= 0.0) {
                out.push(Violation {
                    invariant: "finite non-negative cost override",
                    entity: st.id.clone(),
                    detail: format!("kappa({}, {}) is invalid", st.id, sc.types[t].id),
                });
            }
        }
    }

    // A decommissioned station covers nothing.
    for (b, st) in sc.stations.iter().enumerate() {
        if !sc.coverage_of(b, sc.off_type).is_empty() {
            out.push(Violation {
                invariant: "off-type coverage",
                entity: st.id.clone(),
                detail: "gamma(b, c, off) must be 0 for all clusters".into(),
            });
        }
    }

    for st in &sc.stations {
        if !st.allowed_types.contains(&st.initial_type) {
            out.push(Violation {
                invariant: "initial type allowed",
                entity: st.id.clone(),
                detail: "initial_type must be a member of allowed_types".into(),
            });
        }
        if !st.allowed_types.contains(&sc.off_type) {
            out.push(Violation {
                invariant: "off type always reachable",
                entity: st.id.clone(),
                detail: "allowed_types must contain the off type".into(),
            });
        }
        let init = &sc.types[st.initial_type];
        for &t in &st.allowed_types {
            if t == st.initial_type || t == sc.off_type {
                continue;
            }
            let dest = &sc.types[t];
            let legal = match (init.tech, dest.tech) {
                // New LTE stations are created from the off state.
                (TechClass::Off, TechClass::Lte) => true,
                // Sectorization can only grow.
                (TechClass::Lte, TechClass::Lte) => dest.sectors > init.sectors,
                // 3G stations can only be decommissioned.
                _ => false,
            };
            if !legal {
                out.push(Violation {
                    invariant: "change graph",
                    entity: st.id.clone(),
                    detail: format!("illegal destination type {} from {}", dest.id, init.id),
                });
            }
        }
    }

    for (c, cl) in sc.clusters.iter().enumerate() {
        for k in 1..=sc.horizon {
            for o in 0..sc.operators.len() {
                if sc.demand(c, k, o) < 0.0 || !sc.demand(c, k, o).is_finite() {
                    out.push(Violation {
                        invariant: "non-negative demand",
                        entity: cl.id.clone(),
                        detail: format!("tau(c, {k}, {}) is invalid", sc.operators[o]),
                    });
                }
            }
        }
    }

    if !(0.0..=1.0).contains(&sc.h_max) {
        out.push(Violation {
            invariant: "h_max in [0, 1]",
            entity: "meta".into(),
            detail: format!("h_max = {}", sc.h_max),
        });
    }
    if !(0.0..=1.0).contains(&sc.phi) {
        out.push(Violation {
            invariant: "phi in [0, 1]",
            entity: "meta".into(),
            detail: format!("phi = {}", sc.phi),
        });
    }

    // Every cluster with positive demand must be coverable by some station
    // under a non-off allowed type.
    for (c, cl) in sc.clusters.iter().enumerate() {
        if !sc.is_demanded(c) {
            continue;
        }
        let coverable = sc.candidate_stations(c).iter().any(|&b| {
            sc.stations[b]
                .allowed_types
                .iter()
                .any(|&t| t != sc.off_type && sc.covers(b, c, t))
        });
        if !coverable {
            out.push(Violation {
                invariant: "uncoverable cluster",
                entity: cl.id.clone(),
                detail: "positive demand but no station covers it under any allowed type".into(),
            });
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate, GeneratorParams};

    #[test]
    fn generated_scenarios_validate_clean() {
        let sc = generate(&GeneratorParams {
            stations: 40,
            clusters: 120,
            horizon: 12,
            seed: 3,
            ..GeneratorParams::default()
        })
        .unwrap();
        assert!(validate(&sc).is_empty());
    }

    #[test]
    fn negative_demand_is_flagged() {
        let mut sc = generate(&GeneratorParams {
            stations: 10,
            clusters: 20,
            horizon: 4,
            seed: 3,
            ..GeneratorParams::default()
        })
        .unwrap();
        sc.set_demand_for_test(0, 1, 0, -1.0);
        let vs = validate(&sc);
        assert!(vs.iter().any(|v| v.invariant.contains("demand")), "{vs:?}");
    }

    #[test]
    fn bad_h_max_is_flagged() {
        let mut sc = generate(&GeneratorParams {
            stations: 10,
            clusters: 20,
            horizon: 4,
            seed: 3,
            ..GeneratorParams::default()
        })
        .unwrap();
        sc.h_max = 1.5;
        let vs = validate(&sc);
        assert!(!vs.is_empty());
    }
}
