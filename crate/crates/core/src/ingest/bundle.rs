use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{
    validate_network, Bus, Carrier, ComponentKind, Coupling, Generator, Line, Network, SnapshotSet,
    StorageComponentSpec, StorageTech, ValidationReport,
};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("{file}:{line}: column `{column}`: {detail}")]
    MalformedRow { file: String, line: u64, column: String, detail: String },
    #[error("network failed validation:\n{0}")]
    ValidationFailed(ValidationReport),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const BUSES: &str = "buses.csv";
pub const CARRIERS: &str = "carriers.csv";
pub const GENERATORS: &str = "generators.csv";
pub const LINES: &str = "lines.csv";
pub const STORAGE: &str = "storage.csv";
pub const LOADS: &str = "loads.csv";
pub const AVAILABILITY: &str = "availability.csv";
pub const INFLOW: &str = "inflow.csv";

const COMPONENT_FIELDS: [&str; 8] =
    ["investment", "fom", "lifetime", "efficiency", "discount_rate", "existing", "extendable", "capacity_max"];

struct Table {
    file: String,
    headers: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(dir: &Path, file: &str) -> Result<Table, BundleError> {
        let path = dir.join(file);
        if !path.is_file() {
            return Err(BundleError::MissingFile(file.to_string()));
        }
        let malformed = |line: u64, detail: String| BundleError::MalformedRow {
            file: file.to_string(),
            line,
            column: String::new(),
            detail,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(&path)
            .map_err(|e| malformed(1, e.to_string()))?;
        let headers: Vec<String> =
            reader.headers().map_err(|e| malformed(1, e.to_string()))?.iter().map(str::to_string).collect();
        let mut index = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if index.insert(h.clone(), i).is_some() {
                return Err(malformed(1, format!("duplicate column {h}")));
            }
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                malformed(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Table { file: file.to_string(), headers, index, rows })
    }

    fn read_optional(dir: &Path, file: &str) -> Result<Option<Table>, BundleError> {
        if dir.join(file).is_file() {
            Table::read(dir, file).map(Some)
        } else {
            Ok(None)
        }
    }

    fn error(&self, line: u64, column: &str, detail: impl Into<String>) -> BundleError {
        BundleError::MalformedRow { file: self.file.clone(), line, column: column.to_string(), detail: detail.into() }
    }

    fn require(&self, columns: &[&str]) -> Result<(), BundleError> {
        for c in columns {
            if !self.index.contains_key(*c) {
                return Err(self.error(1, c, "column missing from header"));
            }
        }
        Ok(())
    }

    fn str<'a>(&self, row: &'a (u64, csv::StringRecord), column: &str) -> &'a str {
        self.index.get(column).and_then(|&i| row.1.get(i)).unwrap_or("")
    }

    fn f64(&self, row: &(u64, csv::StringRecord), column: &str) -> Result<f64, BundleError> {
        let s = self.str(row, column);
        s.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| self.error(row.0, column, format!("expected a number, got `{s}`")))
    }

    /// Blank means `None`.
    fn opt_f64(&self, row: &(u64, csv::StringRecord), column: &str) -> Result<Option<f64>, BundleError> {
        if self.str(row, column).is_empty() {
            Ok(None)
        } else {
            self.f64(row, column).map(Some)
        }
    }

    fn f64_or(&self, row: &(u64, csv::StringRecord), column: &str, default: f64) -> Result<f64, BundleError> {
        Ok(self.opt_f64(row, column)?.unwrap_or(default))
    }

    fn bool(&self, row: &(u64, csv::StringRecord), column: &str) -> Result<bool, BundleError> {
        match self.str(row, column) {
            "true" | "1" => Ok(true),
            "false" | "0" | "" => Ok(false),
            s => Err(self.error(row.0, column, format!("expected true/false, got `{s}`"))),
        }
    }
}

/// Reads a bundle without validating it.
pub fn read_network_bundle(dir: impl AsRef<Path>) -> Result<Network, BundleError> {
    let dir = dir.as_ref();
    // Check presence of every mandatory file up front for a clear error.
    for f in [SNAPSHOTS, BUSES, CARRIERS, GENERATORS, LINES, STORAGE, LOADS] {
        if !dir.join(f).is_file() {
            return Err(BundleError::MissingFile(f.to_string()));
        }
    }

    let snaps = Table::read(dir, SNAPSHOTS)?;
    snaps.require(&["timestamp", "weight"])?;
    let mut timestamps = Vec::new();
    let mut weights = Vec::new();
    for row in &snaps.rows {
        timestamps.push(snaps.str(row, "timestamp").to_string());
        weights.push(snaps.f64(row, "weight")?);
    }
    let n_t = timestamps.len();

    let buses_t = Table::read(dir, BUSES)?;
    buses_t.require(&["id", "country"])?;
    let mut buses = Vec::new();
    for row in &buses_t.rows {
        let lat = buses_t.opt_f64(row, "lat")?;
        let lon = buses_t.opt_f64(row, "lon")?;
        buses.push(Bus {
            id: buses_t.str(row, "id").to_string(),
            country: buses_t.str(row, "country").to_string(),
            coordinates: lat.zip(lon),
        });
    }

    let carriers_t = Table::read(dir, CARRIERS)?;
    carriers_t.require(&["name", "emission_factor"])?;
    let mut carriers = Vec::new();
    for row in &carriers_t.rows {
        carriers.push(Carrier {
            name: carriers_t.str(row, "name").to_string(),
            emission_factor: carriers_t.f64(row, "emission_factor")?,
            variable_renewable: carriers_t.bool(row, "variable_renewable")?,
        });
    }

    let gens_t = Table::read(dir, GENERATORS)?;
    gens_t.require(&["id", "bus", "carrier", "existing_capacity", "extendable", "capital_cost", "marginal_cost"])?;
    let mut generators = Vec::new();
    for row in &gens_t.rows {
        generators.push(Generator {
            id: gens_t.str(row, "id").to_string(),
            bus: gens_t.str(row, "bus").to_string(),
            carrier: gens_t.str(row, "carrier").to_string(),
            existing_capacity: gens_t.f64(row, "existing_capacity")?,
            extendable: gens_t.bool(row, "extendable")?,
            capacity_min: gens_t.f64_or(row, "capacity_min", 0.0)?,
            capacity_max: gens_t.f64_or(row, "capacity_max", f64::INFINITY)?,
            capital_cost: gens_t.f64(row, "capital_cost")?,
            marginal_cost: gens_t.f64(row, "marginal_cost")?,
            availability: vec![1.0; n_t],
        });
    }

    let lines_t = Table::read(dir, LINES)?;
    lines_t.require(&[
        "id",
        "bus_from",
        "bus_to",
        "reactance",
        "length",
        "existing_capacity",
        "extendable",
        "capital_cost",
    ])?;
    let mut lines = Vec::new();
    for row in &lines_t.rows {
        lines.push(Line {
            id: lines_t.str(row, "id").to_string(),
            bus_from: lines_t.str(row, "bus_from").to_string(),
            bus_to: lines_t.str(row, "bus_to").to_string(),
            reactance: lines_t.f64(row, "reactance")?,
            length: lines_t.f64(row, "length")?,
            existing_capacity: lines_t.f64(row, "existing_capacity")?,
            extendable: lines_t.bool(row, "extendable")?,
            capacity_max: lines_t.f64_or(row, "capacity_max", f64::INFINITY)?,
            capital_cost: lines_t.f64(row, "capital_cost")?,
            availability: vec![1.0; n_t],
        });
    }

    let storage_t = Table::read(dir, STORAGE)?;
    let mut required = vec!["id".to_string(), "bus".to_string(), "coupling".to_string()];
    for kind in ComponentKind::ALL {
        for field in &COMPONENT_FIELDS[..5] {
            required.push(format!("{kind}_{field}"));
        }
    }
    storage_t.require(&required.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut storage_techs = Vec::new();
    for row in &storage_t.rows {
        let coupling_s = storage_t.str(row, "coupling");
        let coupling = Coupling::parse(coupling_s)
            .ok_or_else(|| storage_t.error(row.0, "coupling", format!("unknown coupling `{coupling_s}`")))?;
        let component = |kind: ComponentKind| -> Result<StorageComponentSpec, BundleError> {
            let col = |f: &str| format!("{kind}_{f}");
            Ok(StorageComponentSpec {
                kind,
                investment: storage_t.f64(row, &col("investment"))?,
                fom_frac: storage_t.f64(row, &col("fom"))?,
                lifetime: storage_t.f64(row, &col("lifetime"))?,
                efficiency: storage_t.f64(row, &col("efficiency"))?,
                discount_rate: storage_t.f64(row, &col("discount_rate"))?,
                existing: storage_t.f64_or(row, &col("existing"), 0.0)?,
                extendable: match storage_t.str(row, &col("extendable")) {
                    "" => true,
                    _ => storage_t.bool(row, &col("extendable"))?,
                },
                capacity_max: storage_t.f64_or(row, &col("capacity_max"), f64::INFINITY)?,
            })
        };
        let hub = storage_t.str(row, "hub_id");
        let id = storage_t.str(row, "id").to_string();
        let technology = match storage_t.str(row, "technology") {
            "" => id.clone(),
            t => t.to_string(),
        };
        storage_techs.push(StorageTech {
            id,
            technology,
            bus: storage_t.str(row, "bus").to_string(),
            charger: component(ComponentKind::Charger)?,
            store: component(ComponentKind::Store)?,
            discharger: component(ComponentKind::Discharger)?,
            ep_ratio_hours: storage_t.opt_f64(row, "ep_ratio_hours")?,
            coupling,
            hub_id: (!hub.is_empty()).then(|| hub.to_string()),
            shared_converter: storage_t.bool(row, "shared_converter")?,
            inflow: None,
            spillage_allowed: storage_t.bool(row, "spillage_allowed")?,
            dispatch_epsilon_cost: storage_t.opt_f64(row, "epsilon_cost")?,
        });
    }

    let loads_t = Table::read(dir, LOADS)?;
    let bus_pos: HashMap<String, usize> = buses.iter().enumerate().map(|(i, b)| (b.id.clone(), i)).collect();
    let mut loads = vec![vec![0.0; n_t]; buses.len()];
    read_series(&loads_t, &timestamps, |column, t, v| {
        let &i = bus_pos.get(column).ok_or("not a bus id")?;
        loads[i][t] = v;
        Ok(())
    })?;

    if let Some(avail_t) = Table::read_optional(dir, AVAILABILITY)? {
        let gen_pos: HashMap<String, usize> = generators.iter().enumerate().map(|(i, g)| (g.id.clone(), i)).collect();
        let line_pos: HashMap<String, usize> = lines.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();
        read_series(&avail_t, &timestamps, |column, t, v| {
            match (gen_pos.get(column), line_pos.get(column)) {
                (Some(&g), None) => generators[g].availability[t] = v,
                (None, Some(&l)) => lines[l].availability[t] = v,
                (Some(_), Some(_)) => return Err("ambiguous: both a generator and a line id"),
                (None, None) => return Err("not a generator or line id"),
            }
            Ok(())
        })?;
    }

    if let Some(inflow_t) = Table::read_optional(dir, INFLOW)? {
        let pos: HashMap<String, usize> = storage_techs.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        read_series(&inflow_t, &timestamps, |column, t, v| {
            let &s = pos.get(column).ok_or("not a storage id")?;
            storage_techs[s].inflow.get_or_insert_with(|| vec![0.0; n_t])[t] = v;
            Ok(())
        })?;
    }

    Ok(Network {
        buses,
        lines,
        generators,
        storage_techs,
        carriers,
        snapshots: SnapshotSet::new(timestamps, weights),
        loads,
    })
}

/// Column-per-entity time series; rows must follow the snapshot order.
fn read_series(
    table: &Table,
    timestamps: &[String],
    mut set: impl FnMut(&str, usize, f64) -> Result<(), &'static str>,
) -> Result<(), BundleError> {
    if table.headers.first().map(String::as_str) != Some("timestamp") {
        return Err(table.error(1, "timestamp", "first column must be timestamp"));
    }
    if table.rows.len() != timestamps.len() {
        let line = table.rows.last().map_or(1, |r| r.0);
        return Err(table.error(
            line,
            "timestamp",
            format!("{} rows for {} snapshots", table.rows.len(), timestamps.len()),
        ));
    }
    for (t, row) in table.rows.iter().enumerate() {
        let ts = table.str(row, "timestamp");
        if ts != timestamps[t] {
            return Err(table.error(row.0, "timestamp", format!("expected `{}`, got `{ts}`", timestamps[t])));
        }
        for column in &table.headers[1..] {
            let v = table.f64(row, column)?;
            set(column, t, v).map_err(|detail| table.error(1, column, detail))?;
        }
    }
    Ok(())
}

/// Reads and validates a bundle.
pub fn parse_network_bundle(dir: impl AsRef<Path>) -> Result<Network, BundleError> {
    let network = read_network_bundle(dir)?;
    let report = validate_network(&network);
    if report.is_valid() {
        Ok(network)
    } else {
        Err(BundleError::ValidationFailed(report))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes `network` in the layout [`read_network_bundle`] expects.
pub fn write_network_bundle(network: &Network, dir: impl AsRef<Path>) -> Result<(), BundleError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| BundleError::Io { path: dir.display().to_string(), source })?;
    let write = |file: &str, rows: Vec<Vec<String>>| -> Result<(), BundleError> {
        let path = dir.join(file);
        let io = |e: csv::Error| BundleError::Io { path: path.display().to_string(), source: e.into() };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|source| BundleError::Io { path: path.display().to_string(), source })
    };
    let header = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let s = &network.snapshots;

    let mut rows = vec![header(&["timestamp", "weight"])];
    rows.extend(s.timestamps.iter().zip(&s.weights).map(|(t, w)| vec![t.clone(), num(*w)]));
    write(SNAPSHOTS, rows)?;

    let mut rows = vec![header(&["id", "country", "lat", "lon"])];
    for b in &network.buses {
        rows.push(vec![
            b.id.clone(),
            b.country.clone(),
            opt(b.coordinates.map(|c| c.0)),
            opt(b.coordinates.map(|c| c.1)),
        ]);
    }
    write(BUSES, rows)?;

    let mut rows = vec![header(&["name", "emission_factor", "variable_renewable"])];
    for c in &network.carriers {
        rows.push(vec![c.name.clone(), num(c.emission_factor), c.variable_renewable.to_string()]);
    }
    write(CARRIERS, rows)?;

    let mut rows = vec![header(&[
        "id",
        "bus",
        "carrier",
        "existing_capacity",
        "extendable",
        "capacity_min",
        "capacity_max",
        "capital_cost",
        "marginal_cost",
    ])];
    for g in &network.generators {
        rows.push(vec![
            g.id.clone(),
            g.bus.clone(),
            g.carrier.clone(),
            num(g.existing_capacity),
            g.extendable.to_string(),
            num(g.capacity_min),
            num(g.capacity_max),
            num(g.capital_cost),
            num(g.marginal_cost),
        ]);
    }
    write(GENERATORS, rows)?;

    let mut rows = vec![header(&[
        "id",
        "bus_from",
        "bus_to",
        "reactance",
        "length",
        "existing_capacity",
        "extendable",
        "capacity_max",
        "capital_cost",
    ])];
    for l in &network.lines {
        rows.push(vec![
            l.id.clone(),
            l.bus_from.clone(),
            l.bus_to.clone(),
            num(l.reactance),
            num(l.length),
            num(l.existing_capacity),
            l.extendable.to_string(),
            num(l.capacity_max),
            num(l.capital_cost),
        ]);
    }
    write(LINES, rows)?;

    let mut head = header(&[
        "id",
        "technology",
        "bus",
        "coupling",
        "hub_id",
        "ep_ratio_hours",
        "shared_converter",
        "spillage_allowed",
        "epsilon_cost",
    ]);
    for kind in ComponentKind::ALL {
        head.extend(COMPONENT_FIELDS.iter().map(|f| format!("{kind}_{f}")));
    }
    let mut rows = vec![head];
    for st in &network.storage_techs {
        let mut r = vec![
            st.id.clone(),
            st.technology.clone(),
            st.bus.clone(),
            st.coupling.as_str().to_string(),
            st.hub_id.clone().unwrap_or_default(),
            opt(st.ep_ratio_hours),
            st.shared_converter.to_string(),
            st.spillage_allowed.to_string(),
            opt(st.dispatch_epsilon_cost),
        ];
        for kind in ComponentKind::ALL {
            let c = st.component(kind);
            r.extend([
                num(c.investment),
                num(c.fom_frac),
                num(c.lifetime),
                num(c.efficiency),
                num(c.discount_rate),
                num(c.existing),
                c.extendable.to_string(),
                num(c.capacity_max),
            ]);
        }
        rows.push(r);
    }
    write(STORAGE, rows)?;

    let series = |names: Vec<String>, values: Vec<&Vec<f64>>| {
        let mut rows = vec![std::iter::once("timestamp".to_string()).chain(names).collect::<Vec<_>>()];
        for (t, ts) in s.timestamps.iter().enumerate() {
            rows.push(std::iter::once(ts.clone()).chain(values.iter().map(|v| num(v[t]))).collect());
        }
        rows
    };
    write(LOADS, series(network.buses.iter().map(|b| b.id.clone()).collect(), network.loads.iter().collect()))?;

    let mut names = Vec::new();
    let mut values = Vec::new();
    for g in network.generators.iter().filter(|g| g.availability.iter().any(|&a| a != 1.0)) {
        names.push(g.id.clone());
        values.push(&g.availability);
    }
    for l in network.lines.iter().filter(|l| l.availability.iter().any(|&a| a != 1.0)) {
        names.push(l.id.clone());
        values.push(&l.availability);
    }
    let avail_path = dir.join(AVAILABILITY);
    if !names.is_empty() {
        write(AVAILABILITY, series(names, values))?;
    } else if avail_path.exists() {
        fs::remove_file(&avail_path)
            .map_err(|source| BundleError::Io { path: avail_path.display().to_string(), source })?;
    }

    let with_inflow: Vec<&StorageTech> = network.storage_techs.iter().filter(|s| s.inflow.is_some()).collect();
    if !with_inflow.is_empty() {
        write(
            INFLOW,
            series(
                with_inflow.iter().map(|s| s.id.clone()).collect(),
                with_inflow.iter().map(|s| s.inflow.as_ref().expect("filtered")).collect(),
            ),
        )?;
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("step {step} does not divide {count} snapshots")]
    NotDivisible { step: usize, count: usize },
}

/// Merges every `step` consecutive snapshots into one. The merged weight is
/// the group's total; series become weight-weighted group means, so every
/// Σ w·x is preserved. The first timestamp of each group is kept.
pub fn resample_snapshots(network: &Network, step: usize) -> Result<Network, ResampleError> {
    let count = network.snapshots.len();
    if step == 0 || count % step != 0 {
        return Err(ResampleError::NotDivisible { step, count });
    }
    if step == 1 {
        return Ok(network.clone());
    }
    let w = &network.snapshots.weights;
    let groups: Vec<std::ops::Range<usize>> = (0..count / step).map(|g| g * step..(g + 1) * step).collect();
    let new_w: Vec<f64> = groups.iter().map(|r| w[r.clone()].iter().sum()).collect();
    let mean = |series: &[f64]| -> Vec<f64> {
        groups.iter().zip(&new_w).map(|(r, &total)| r.clone().map(|t| w[t] * series[t]).sum::<f64>() / total).collect()
    };
    let mut out = network.clone();
    out.snapshots =
        SnapshotSet::new(groups.iter().map(|r| network.snapshots.timestamps[r.start].clone()).collect(), new_w.clone());
    out.loads = network.loads.iter().map(|l| mean(l)).collect();
    for g in &mut out.generators {
        g.availability = mean(&g.availability);
    }
    for l in &mut out.lines {
        l.availability = mean(&l.availability);
    }
    for s in &mut out.storage_techs {
        if let Some(inflow) = &s.inflow {
            s.inflow = Some(mean(inflow));
        }
    }
    Ok(out)
}
