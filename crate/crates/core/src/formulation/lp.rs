use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// What a column of the LP stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    GenCapacity,
    LineCapacity,
    ChargerCapacity,
    DischargerCapacity,
    StoreCapacity,
    Dispatch,
    Flow,
    Charge,
    Discharge,
    Level,
    Spill,
    /// Columns of hand-written or imported programs.
    Generic,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::GenCapacity => "gen_cap",
            VarKind::LineCapacity => "line_cap",
            VarKind::ChargerCapacity => "charger_cap",
            VarKind::DischargerCapacity => "discharger_cap",
            VarKind::StoreCapacity => "store_cap",
            VarKind::Dispatch => "dispatch",
            VarKind::Flow => "flow",
            VarKind::Charge => "charge",
            VarKind::Discharge => "discharge",
            VarKind::Level => "level",
            VarKind::Spill => "spill",
            VarKind::Generic => "x",
        }
    }
}

/// What a row of the LP stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    Balance,
    GenAvailability,
    FlowUpper,
    FlowLower,
    Kvl,
    ChargeLimit,
    DischargeLimit,
    EnergyBalance,
    LevelLimit,
    ConverterCoupling,
    EpRatio,
    Emission,
    Equity,
    LineVolume,
    Generic,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Balance => "balance",
            RowKind::GenAvailability => "gen_avail",
            RowKind::FlowUpper => "flow_up",
            RowKind::FlowLower => "flow_lo",
            RowKind::Kvl => "kvl",
            RowKind::ChargeLimit => "charge_lim",
            RowKind::DischargeLimit => "discharge_lim",
            RowKind::EnergyBalance => "energy_bal",
            RowKind::LevelLimit => "level_lim",
            RowKind::ConverterCoupling => "converter",
            RowKind::EpRatio => "ep_ratio",
            RowKind::Emission => "co2",
            RowKind::Equity => "equity",
            RowKind::LineVolume => "line_volume",
            RowKind::Generic => "c",
        }
    }
}

/// Registry key: kind, entity id and optional snapshot index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key<K> {
    pub kind: K,
    pub entity: String,
    pub snapshot: Option<usize>,
}

impl<K> Key<K> {
    pub fn new(kind: K, entity: impl Into<String>, snapshot: Option<usize>) -> Self {
        Self { kind, entity: entity.into(), snapshot }
    }
}

pub type VarKey = Key<VarKind>;
pub type RowKey = Key<RowKind>;

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_key(f, self.kind.as_str(), &self.entity, self.snapshot)
    }
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_key(f, self.kind.as_str(), &self.entity, self.snapshot)
    }
}

fn fmt_key(f: &mut fmt::Formatter<'_>, kind: &str, entity: &str, t: Option<usize>) -> fmt::Result {
    match t {
        Some(t) => write!(f, "{kind}[{entity},{t}]"),
        None => write!(f, "{kind}[{entity}]"),
    }
}

/// Bidirectional index ↔ key map.
#[derive(Debug, Clone)]
pub struct Registry<K: Eq + std::hash::Hash> {
    keys: Vec<Key<K>>,
    index: HashMap<Key<K>, usize>,
}

impl<K: Eq + std::hash::Hash> Default for Registry<K> {
    fn default() -> Self {
        Self { keys: Vec::new(), index: HashMap::new() }
    }
}

impl<K: Copy + Eq + std::hash::Hash> Registry<K> {
    /// Panics on a duplicate key; every index must map to exactly one key.
    fn insert(&mut self, key: Key<K>) -> usize {
        let i = self.keys.len();
        let prev = self.index.insert(key.clone(), i);
        assert!(prev.is_none(), "duplicate registry key");
        self.keys.push(key);
        i
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, i: usize) -> &Key<K> {
        &self.keys[i]
    }

    pub fn keys(&self) -> &[Key<K>] {
        &self.keys
    }

    pub fn get(&self, kind: K, entity: &str, snapshot: Option<usize>) -> Option<usize> {
        self.index.get(&Key::new(kind, entity, snapshot)).copied()
    }

    pub fn count(&self, kind: K) -> usize {
        self.keys.iter().filter(|k| k.kind == kind).count()
    }

    pub fn contains_key(&self, key: &Key<K>) -> bool {
        self.index.contains_key(key)
    }
}

pub type VariableRegistry = Registry<VarKind>;
pub type ConstraintRegistry = Registry<RowKind>;

/// `min costᵀx + offset` subject to per-row relations and variable bounds.
///
/// The matrix is held as `(row, col, value)` triplets sorted by row then
/// column, with duplicates merged and zeros dropped.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
    pub objective_offset: f64,
    pub variables: VariableRegistry,
    pub constraints: ConstraintRegistry,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn var(&self, kind: VarKind, entity: &str, snapshot: Option<usize>) -> Option<usize> {
        self.variables.get(kind, entity, snapshot)
    }

    pub fn row(&self, kind: RowKind, entity: &str, snapshot: Option<usize>) -> Option<usize> {
        self.constraints.get(kind, entity, snapshot)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.n_rows()];
        for &(r, c, v) in &self.triplets {
            act[r] += v * x[c];
        }
        act
    }

    /// Structural checks the solver relies on.
    pub fn check(&self) -> Result<(), String> {
        let n = self.n_vars();
        let m = self.n_rows();
        if self.lower.len() != n || self.upper.len() != n || self.variables.len() != n {
            return Err("variable arrays have inconsistent lengths".into());
        }
        if self.relations.len() != m || self.constraints.len() != m {
            return Err("row arrays have inconsistent lengths".into());
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(format!(
                    "bounds of {} are inconsistent: [{}, {}]",
                    self.variables.key(j),
                    self.lower[j],
                    self.upper[j]
                ));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(format!("bounds of {} are infinite", self.variables.key(j)));
            }
            if !self.costs[j].is_finite() {
                return Err(format!("cost of {} is not finite", self.variables.key(j)));
            }
        }
        if self.rhs.iter().any(|b| !b.is_finite()) {
            return Err("right-hand side contains non-finite values".into());
        }
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in &self.triplets {
            if r >= m || c >= n {
                return Err(format!("triplet ({r}, {c}) out of range"));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(format!("triplet ({r}, {c}) has value {v}"));
            }
            if let Some(p) = prev {
                if p >= (r, c) {
                    return Err(format!("triplets not strictly sorted at ({r}, {c})"));
                }
            }
            prev = Some((r, c));
        }
        Ok(())
    }
}

/// Incremental construction of a [`LinearProgram`].
#[derive(Debug, Default)]
pub struct LpBuilder {
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    offset: f64,
    variables: VariableRegistry,
    constraints: ConstraintRegistry,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, key: VarKey, cost: f64, lower: f64, upper: f64) -> usize {
        let j = self.variables.insert(key);
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        j
    }

    pub fn add_cost(&mut self, var: usize, cost: f64) {
        self.costs[var] += cost;
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn add_row(
        &mut self,
        key: RowKey,
        entries: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let r = self.constraints.insert(key);
        self.relations.push(relation);
        self.rhs.push(rhs);
        self.triplets.extend(entries.into_iter().map(|(c, v)| (r, c, v)));
        r
    }

    pub fn n_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn var(&self, kind: VarKind, entity: &str, snapshot: Option<usize>) -> Option<usize> {
        self.variables.get(kind, entity, snapshot)
    }

    pub fn lower(&self, var: usize) -> f64 {
        self.lower[var]
    }

    pub fn upper(&self, var: usize) -> f64 {
        self.upper[var]
    }

    pub fn build(self) -> LinearProgram {
        let mut t = self.triplets;
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        LinearProgram {
            costs: self.costs,
            lower: self.lower,
            upper: self.upper,
            relations: self.relations,
            rhs: self.rhs,
            triplets: merged,
            objective_offset: self.offset,
            variables: self.variables,
            constraints: self.constraints,
        }
    }
}

/// Convenience for small hand-written programs: generic column names
/// `x[0]`, `x[1]`, ... and row names `c[0]`, ...
pub fn dense_lp(costs: &[f64], bounds: &[(f64, f64)], rows: &[(Vec<f64>, Relation, f64)]) -> LinearProgram {
    let mut b = LpBuilder::new();
    for (j, (&c, &(lo, hi))) in costs.iter().zip(bounds).enumerate() {
        b.add_var(Key::new(VarKind::Generic, j.to_string(), None), c, lo, hi);
    }
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        b.add_row(
            Key::new(RowKind::Generic, i.to_string(), None),
            coeffs.iter().copied().enumerate().filter(|(_, v)| *v != 0.0),
            *rel,
            *rhs,
        );
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_merges_duplicates_and_drops_zeros() {
        let mut b = LpBuilder::new();
        let x = b.add_var(Key::new(VarKind::Generic, "x", None), 1.0, 0.0, 1.0);
        let y = b.add_var(Key::new(VarKind::Generic, "y", None), 1.0, 0.0, 1.0);
        b.add_row(Key::new(RowKind::Generic, "r", None), [(y, 1.0), (x, 2.0), (x, -2.0), (y, 0.5)], Relation::Le, 3.0);
        let lp = b.build();
        assert_eq!(lp.triplets, vec![(0, 1, 1.5)]);
        lp.check().unwrap();
    }

    #[test]
    #[should_panic(expected = "duplicate registry key")]
    fn duplicate_key_rejected() {
        let mut b = LpBuilder::new();
        b.add_var(Key::new(VarKind::Generic, "x", None), 0.0, 0.0, 1.0);
        b.add_var(Key::new(VarKind::Generic, "x", None), 0.0, 0.0, 1.0);
    }

    #[test]
    fn key_display() {
        let k = VarKey::new(VarKind::Dispatch, "wind", Some(3));
        assert_eq!(k.to_string(), "dispatch[wind,3]");
    }
}
