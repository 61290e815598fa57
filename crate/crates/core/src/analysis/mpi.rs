use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ComponentKind, Network};
use crate::results::SystemResult;

/// Expansion of one storage component at one bus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpiRow {
    /// Installation id, or the shared store's entity for hub stores.
    pub component: String,
    pub technology: String,
    pub kind: ComponentKind,
    pub bus: String,
    /// Optimized minus existing capacity, MW or MWh, never negative.
    pub expanded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpiTable {
    pub kind: ComponentKind,
    pub rows: Vec<MpiRow>,
}

impl MpiTable {
    /// Sum over all rows.
    pub fn aggregate(&self) -> f64 {
        self.rows.iter().map(|r| r.expanded).sum()
    }

    /// Aggregate per technology class, ordered by name.
    pub fn by_technology(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry(r.technology.clone()).or_insert(0.0) += r.expanded;
        }
        out
    }
}

/// Per-bus expansion of every component of `kind`. With a region filter,
/// only buses whose id or country code is listed are kept.
pub fn market_potential(
    result: &SystemResult,
    network: &Network,
    kind: ComponentKind,
    region: Option<&[String]>,
) -> MpiTable {
    let keep = |bus: &str| {
        region.map_or(true, |names| {
            let country = network.buses.iter().find(|b| b.id == bus).map(|b| b.country.as_str());
            names.iter().any(|n| n == bus || Some(n.as_str()) == country)
        })
    };
    let mut rows = Vec::new();
    let mut seen_stores = std::collections::HashSet::new();
    for r in &result.storage {
        let Some(tech) = network.storage(&r.id) else {
            continue;
        };
        if !keep(&tech.bus) {
            continue;
        }
        let component = if kind == ComponentKind::Store {
            if !seen_stores.insert(r.store_entity.clone()) {
                continue;
            }
            r.store_entity.clone()
        } else {
            r.id.clone()
        };
        // A shared store belongs to no single technology class.
        let technology = if kind == ComponentKind::Store && r.store_entity != r.id {
            r.store_entity.clone()
        } else {
            tech.technology.clone()
        };
        rows.push(MpiRow {
            component,
            technology,
            kind,
            bus: tech.bus.clone(),
            expanded: (r.capacity(kind) - tech.component(kind).existing).max(0.0),
        });
    }
    MpiTable { kind, rows }
}

/// Aggregate MPI keyed by `"<technology>/<kind>"` for all three kinds.
pub fn component_mpi(result: &SystemResult, network: &Network) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for kind in ComponentKind::ALL {
        for (tech, v) in market_potential(result, network, kind, None).by_technology() {
            out.insert(format!("{tech}/{kind}"), v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotValuable,
    Valuable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaVerdict {
    pub component: String,
    /// Aggregate MPI per scenario, in input order.
    pub mpi: Vec<f64>,
    pub verdict: Verdict,
    pub threshold_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub first: String,
    pub second: String,
    /// Component with the larger aggregate MPI per scenario; `None` on ties.
    pub winner: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub scenarios: Vec<String>,
    pub threshold_mw: f64,
    pub verdicts: Vec<CriteriaVerdict>,
    pub rankings: Vec<Ranking>,
}

impl CriteriaReport {
    pub fn verdict(&self, component: &str) -> Option<&CriteriaVerdict> {
        self.verdicts.iter().find(|v| v.component == component)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CriteriaError {
    #[error("no scenario tables given")]
    NoScenarios,
    #[error("unknown component {0}")]
    UnknownComponent(String),
}

/// Expansion below this many MW is solver noise and counts as zero.
pub const MPI_ZERO_MW: f64 = 1e-6;

/// Applies the market potential rules to per-scenario aggregates.
///
/// A component is valuable when its MPI is positive in at least one
/// scenario, and passes the threshold rule when it exceeds `threshold_mw`
/// in at least one scenario. Pairs in `comparisons` are ranked by MPI.
/// Components missing from a scenario count as zero there.
pub fn evaluate_criteria(
    scenarios: &[(String, BTreeMap<String, f64>)],
    threshold_mw: f64,
    comparisons: &[(String, String)],
) -> Result<CriteriaReport, CriteriaError> {
    if scenarios.is_empty() {
        return Err(CriteriaError::NoScenarios);
    }
    let mut components: Vec<&String> = scenarios.iter().flat_map(|(_, m)| m.keys()).collect();
    components.sort();
    components.dedup();
    let mpi_of = |c: &str| -> Vec<f64> { scenarios.iter().map(|(_, m)| m.get(c).copied().unwrap_or(0.0)).collect() };
    let verdicts = components
        .iter()
        .map(|c| {
            let mpi = mpi_of(c);
            CriteriaVerdict {
                component: (*c).clone(),
                verdict: if mpi.iter().any(|&v| v > MPI_ZERO_MW) { Verdict::Valuable } else { Verdict::NotValuable },
                threshold_pass: mpi.iter().any(|&v| v > threshold_mw),
                mpi,
            }
        })
        .collect();
    let mut rankings = Vec::new();
    for (a, b) in comparisons {
        for c in [a, b] {
            if !components.contains(&c) {
                return Err(CriteriaError::UnknownComponent(c.clone()));
            }
        }
        let (ma, mb) = (mpi_of(a), mpi_of(b));
        let winner = ma
            .iter()
            .zip(&mb)
            .map(|(x, y)| {
                if x - y > MPI_ZERO_MW {
                    Some(a.clone())
                } else if y - x > MPI_ZERO_MW {
                    Some(b.clone())
                } else {
                    None
                }
            })
            .collect();
        rankings.push(Ranking { first: a.clone(), second: b.clone(), winner });
    }
    Ok(CriteriaReport {
        scenarios: scenarios.iter().map(|(s, _)| s.clone()).collect(),
        threshold_mw,
        verdicts,
        rankings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(name: &str, values: &[(&str, f64)]) -> (String, BTreeMap<String, f64>) {
        (name.to_string(), values.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn zero_everywhere_is_not_valuable() {
        let s = [one("a", &[("x", 0.0)]), one("b", &[("x", 0.0)]), one("c", &[("x", 0.0)])];
        let r = evaluate_criteria(&s, 1000.0, &[]).unwrap();
        assert_eq!(r.verdict("x").unwrap().verdict, Verdict::NotValuable);
    }

    #[test]
    fn solver_noise_is_zero() {
        let r = evaluate_criteria(
            &[one("a", &[("x/discharger", 1e-9), ("y/discharger", 0.0)])],
            1.0,
            &[("x/discharger".into(), "y/discharger".into())],
        )
        .unwrap();
        assert_eq!(r.verdicts[0].verdict, Verdict::NotValuable);
        assert_eq!(r.rankings[0].winner, vec![None]);
    }

    #[test]
    fn five_gigawatt_passes_one_gigawatt_threshold() {
        let s = [one("a", &[("x", 5000.0)])];
        let r = evaluate_criteria(&s, 1000.0, &[]).unwrap();
        assert!(r.verdict("x").unwrap().threshold_pass);
        assert_eq!(r.verdict("x").unwrap().verdict, Verdict::Valuable);
    }

    #[test]
    fn bigger_is_better() {
        let s = [one("a", &[("A", 10.0), ("B", 2.0)])];
        let r = evaluate_criteria(&s, 1000.0, &[("B".into(), "A".into())]).unwrap();
        assert_eq!(r.rankings[0].winner, vec![Some("A".to_string())]);
    }

    #[test]
    fn unknown_component_in_comparison() {
        let s = [one("a", &[("A", 1.0)])];
        assert_eq!(
            evaluate_criteria(&s, 1.0, &[("A".into(), "Z".into())]).unwrap_err(),
            CriteriaError::UnknownComponent("Z".into())
        );
        assert_eq!(evaluate_criteria(&[], 1.0, &[]).unwrap_err(), CriteriaError::NoScenarios);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn raising_threshold_never_flips_fail_to_pass(
                values in prop::collection::vec(0.0f64..5000.0, 1..5),
                t1 in 0.0f64..5000.0,
                dt in 0.0f64..5000.0,
            ) {
                let s: Vec<_> = values.iter().enumerate()
                    .map(|(i, v)| (format!("s{i}"), BTreeMap::from([("x".to_string(), *v)])))
                    .collect();
                let low = evaluate_criteria(&s, t1, &[]).unwrap();
                let high = evaluate_criteria(&s, t1 + dt, &[]).unwrap();
                if !low.verdicts[0].threshold_pass {
                    prop_assert!(!high.verdicts[0].threshold_pass);
                }
            }
        }
    }
}
