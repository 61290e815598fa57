use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GeneratorResult, LineResult, StorageResult, SystemResult};
use crate::analysis::NodalPrices;
use crate::ingest::StorageMode;
use crate::model::Network;
use crate::solver::SolveStatus;

#[derive(Debug, Error)]
pub enum ResultIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {detail}")]
    Format { path: String, detail: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ResultIoError + '_ {
    move |source| ResultIoError::Io { path: path.display().to_string(), source }
}

fn format_err(path: &Path, detail: impl Into<String>) -> ResultIoError {
    ResultIoError::Format { path: path.display().to_string(), detail: detail.into() }
}

/// Writes `bytes` to a sibling temporary file and renames it into place,
/// so readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultMeta {
    scenario: String,
    status: String,
    objective: f64,
    iterations: usize,
    co2_price: Option<f64>,
    degenerate_price_buses: Vec<String>,
}

pub const CAPACITIES: &str = "capacities.csv";
pub const DISPATCH: &str = "dispatch.csv";
pub const FLOWS: &str = "flows.csv";
pub const STORAGE: &str = "storage.csv";
pub const PRICES: &str = "prices.csv";
pub const RESULT_META: &str = "result.json";

/// Writes the solution tables and `result.json` into `dir`.
pub fn write_result_tables(
    result: &SystemResult,
    network: &Network,
    dir: &Path,
) -> Result<Vec<PathBuf>, ResultIoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let ts = &network.snapshots.timestamps;
    let num = |v: f64| v.to_string();
    let mut written = Vec::new();
    let mut put = |file: &str, bytes: Vec<u8>| -> Result<(), ResultIoError> {
        let path = dir.join(file);
        atomic_write(&path, &bytes).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };

    let mut rows = vec![vec!["kind".into(), "id".into(), "existing".into(), "optimal".into()]];
    for g in &result.generators {
        rows.push(vec!["generator".into(), g.id.clone(), num(g.existing), num(g.capacity)]);
    }
    for l in &result.lines {
        rows.push(vec!["line".into(), l.id.clone(), num(l.existing), num(l.capacity)]);
    }
    let mut stores_seen = std::collections::HashSet::new();
    for s in &result.storage {
        let tech = network.storage(&s.id);
        let existing = |k| tech.map_or(0.0, |t| t.component(k).existing);
        use crate::model::ComponentKind as K;
        rows.push(vec!["charger".into(), s.id.clone(), num(existing(K::Charger)), num(s.charger)]);
        rows.push(vec!["discharger".into(), s.id.clone(), num(existing(K::Discharger)), num(s.discharger)]);
        if stores_seen.insert(s.store_entity.clone()) {
            rows.push(vec!["store".into(), s.store_entity.clone(), num(existing(K::Store)), num(s.store)]);
        }
    }
    put(CAPACITIES, csv_bytes(rows))?;

    let wide = |names: Vec<String>, series: Vec<&Vec<f64>>| {
        let mut rows = vec![std::iter::once("timestamp".to_string()).chain(names).collect::<Vec<_>>()];
        for (t, stamp) in ts.iter().enumerate() {
            rows.push(std::iter::once(stamp.clone()).chain(series.iter().map(|s| num(s[t]))).collect());
        }
        csv_bytes(rows)
    };
    put(
        DISPATCH,
        wide(
            result.generators.iter().map(|g| g.id.clone()).collect(),
            result.generators.iter().map(|g| &g.dispatch).collect(),
        ),
    )?;
    put(
        FLOWS,
        wide(result.lines.iter().map(|l| l.id.clone()).collect(), result.lines.iter().map(|l| &l.flow).collect()),
    )?;
    put(PRICES, wide(result.prices.buses.clone(), result.prices.price.iter().collect()))?;

    let mut rows = vec![["timestamp", "id", "store", "charge", "discharge", "level", "spill"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for s in &result.storage {
        for (t, stamp) in ts.iter().enumerate() {
            rows.push(vec![
                stamp.clone(),
                s.id.clone(),
                s.store_entity.clone(),
                num(s.charge[t]),
                num(s.discharge[t]),
                num(s.level[t]),
                num(s.spill[t]),
            ]);
        }
    }
    put(STORAGE, csv_bytes(rows))?;

    let meta = ResultMeta {
        scenario: result.mode.as_str().into(),
        status: result.status.as_str().into(),
        objective: result.objective,
        iterations: result.iterations,
        co2_price: result.co2_price,
        degenerate_price_buses: result
            .prices
            .buses
            .iter()
            .zip(&result.prices.degenerate)
            .filter(|(_, &d)| d)
            .map(|(b, _)| b.clone())
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&meta).expect("serializable");
    json.push(b'\n');
    put(RESULT_META, json)?;
    Ok(written)
}

struct Wide {
    path: PathBuf,
    columns: HashMap<String, Vec<f64>>,
}

fn read_wide(dir: &Path, file: &str, n_t: usize) -> Result<Wide, ResultIoError> {
    let path = dir.join(file);
    let mut r = csv::Reader::from_path(&path).map_err(|e| format_err(&path, e.to_string()))?;
    let headers: Vec<String> =
        r.headers().map_err(|e| format_err(&path, e.to_string()))?.iter().map(str::to_string).collect();
    let mut columns: HashMap<String, Vec<f64>> = headers[1..].iter().map(|h| (h.clone(), Vec::new())).collect();
    for rec in r.records() {
        let rec = rec.map_err(|e| format_err(&path, e.to_string()))?;
        for (h, v) in headers[1..].iter().zip(rec.iter().skip(1)) {
            let v: f64 = v.parse().map_err(|_| format_err(&path, format!("bad number `{v}` in {h}")))?;
            columns.get_mut(h).expect("header").push(v);
        }
    }
    if columns.values().any(|c| c.len() != n_t) {
        return Err(format_err(&path, format!("expected {n_t} rows")));
    }
    Ok(Wide { path, columns })
}

impl Wide {
    fn take(&mut self, id: &str) -> Result<Vec<f64>, ResultIoError> {
        self.columns.remove(id).ok_or_else(|| format_err(&self.path, format!("missing column {id}")))
    }
}

/// Reloads a result written by [`write_result_tables`] for `network`.
/// Solve timings are not stored with the tables and read back as zero.
pub fn read_result_dir(dir: &Path, network: &Network) -> Result<SystemResult, ResultIoError> {
    let n_t = network.snapshots.len();
    let meta_path = dir.join(RESULT_META);
    let meta: ResultMeta = serde_json::from_slice(&fs::read(&meta_path).map_err(io_err(&meta_path))?)
        .map_err(|e| format_err(&meta_path, e.to_string()))?;
    let mode = StorageMode::parse(&meta.scenario).ok_or_else(|| format_err(&meta_path, "unknown scenario"))?;
    let status = [SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded, SolveStatus::IterationLimit]
        .into_iter()
        .find(|s| s.as_str() == meta.status)
        .ok_or_else(|| format_err(&meta_path, "unknown status"))?;

    let cap_path = dir.join(CAPACITIES);
    let mut caps: HashMap<(String, String), (f64, f64)> = HashMap::new();
    let mut r = csv::Reader::from_path(&cap_path).map_err(|e| format_err(&cap_path, e.to_string()))?;
    for rec in r.records() {
        let rec = rec.map_err(|e| format_err(&cap_path, e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse = |s: &str| s.parse::<f64>().map_err(|_| format_err(&cap_path, format!("bad number `{s}`")));
        caps.insert((field(0).into(), field(1).into()), (parse(field(2))?, parse(field(3))?));
    }
    let cap = |kind: &str, id: &str| -> Result<(f64, f64), ResultIoError> {
        caps.get(&(kind.to_string(), id.to_string()))
            .copied()
            .ok_or_else(|| format_err(&cap_path, format!("no {kind} row for {id}")))
    };

    let mut dispatch = read_wide(dir, DISPATCH, n_t)?;
    let mut generators = Vec::new();
    for g in &network.generators {
        let (existing, capacity) = cap("generator", &g.id)?;
        generators.push(GeneratorResult { id: g.id.clone(), existing, capacity, dispatch: dispatch.take(&g.id)? });
    }
    let mut flows = read_wide(dir, FLOWS, n_t)?;
    let mut lines = Vec::new();
    for l in &network.lines {
        let (existing, capacity) = cap("line", &l.id)?;
        lines.push(LineResult { id: l.id.clone(), existing, capacity, flow: flows.take(&l.id)? });
    }
    let mut prices_t = read_wide(dir, PRICES, n_t)?;
    let mut price = Vec::new();
    for b in &network.buses {
        price.push(prices_t.take(&b.id)?);
    }
    let prices = NodalPrices {
        buses: network.buses.iter().map(|b| b.id.clone()).collect(),
        price,
        degenerate: network.buses.iter().map(|b| meta.degenerate_price_buses.contains(&b.id)).collect(),
    };

    let st_path = dir.join(STORAGE);
    let mut series: HashMap<String, (String, [Vec<f64>; 4])> = HashMap::new();
    let mut r = csv::Reader::from_path(&st_path).map_err(|e| format_err(&st_path, e.to_string()))?;
    for rec in r.records() {
        let rec = rec.map_err(|e| format_err(&st_path, e.to_string()))?;
        let id = rec.get(1).unwrap_or("").to_string();
        let entry = series.entry(id).or_insert_with(|| (rec.get(2).unwrap_or("").to_string(), Default::default()));
        for k in 0..4 {
            let s = rec.get(3 + k).unwrap_or("");
            entry.1[k].push(s.parse().map_err(|_| format_err(&st_path, format!("bad number `{s}`")))?);
        }
    }
    let mut storage = Vec::new();
    for s in &network.storage_techs {
        let (entity, [charge, discharge, level, spill]) =
            series.remove(&s.id).ok_or_else(|| format_err(&st_path, format!("no rows for {}", s.id)))?;
        if charge.len() != n_t {
            return Err(format_err(&st_path, format!("{} has {} rows, expected {n_t}", s.id, charge.len())));
        }
        storage.push(StorageResult {
            id: s.id.clone(),
            charger: cap("charger", &s.id)?.1,
            discharger: cap("discharger", &s.id)?.1,
            store: cap("store", &entity)?.1,
            store_entity: entity,
            charge,
            discharge,
            level,
            spill,
        });
    }

    Ok(SystemResult {
        mode,
        status,
        objective: meta.objective,
        iterations: meta.iterations,
        solve_seconds: 0.0,
        generators,
        lines,
        storage,
        prices,
        co2_price: meta.co2_price,
    })
}
