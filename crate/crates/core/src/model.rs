//! Per-robot weighted transition systems and the implicit synchronous
//! product over them. The joint state space is never materialized; the
//! product transition rule, weights and labels are exposed as queries.

use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

pub type RobotStateId = u32;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("model format error: {0}")]
    Format(String),
    #[error("robot {robot}: negative weight {weight} on edge {src} -> {dst}")]
    NegativeWeight {
        robot: u32,
        src: String,
        dst: String,
        weight: f64,
    },
    #[error("robot {robot}: edge endpoint {state:?} is not a declared state")]
    DanglingEdge { robot: u32, state: String },
    #[error("robot {robot}: initial state {state:?} is not a declared state")]
    MissingInitial { robot: u32, state: String },
    #[error("invalid transition between joint states")]
    InvalidTransition,
}

/// One robot's mobility graph: directed weighted edges over region
/// states, each state labeled with the atoms it satisfies.
#[derive(Debug, Clone)]
pub struct Wts {
    pub robot_id: u32,
    state_names: Vec<String>,
    state_index: HashMap<String, RobotStateId>,
    initial: RobotStateId,
    /// out-edges per state in declaration order
    out: Vec<Vec<(RobotStateId, f64)>>,
    /// in-edges per state (populated for reverse enumeration)
    inc: Vec<Vec<(RobotStateId, f64)>>,
    labels: Vec<BTreeSet<String>>,
    num_edges: usize,
}

impl Wts {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn initial(&self) -> RobotStateId {
        self.initial
    }

    pub fn state_name(&self, q: RobotStateId) -> &str {
        &self.state_names[q as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<RobotStateId> {
        self.state_index.get(name).copied()
    }

    pub fn labels(&self, q: RobotStateId) -> &BTreeSet<String> {
        &self.labels[q as usize]
    }

    /// One-hop successors in declaration order (self included when a
    /// self-loop exists).
    pub fn successors(&self, q: RobotStateId) -> &[(RobotStateId, f64)] {
        &self.out[q as usize]
    }

    pub fn predecessors(&self, q: RobotStateId) -> &[(RobotStateId, f64)] {
        &self.inc[q as usize]
    }

    pub fn has_edge(&self, src: RobotStateId, dst: RobotStateId) -> bool {
        self.out[src as usize].iter().any(|&(d, _)| d == dst)
    }

    pub fn edge_weight(&self, src: RobotStateId, dst: RobotStateId) -> Option<f64> {
        self.out[src as usize]
            .iter()
            .find(|&&(d, _)| d == dst)
            .map(|&(_, w)| w)
    }
}

/// A joint state of the product transition system: one state index per
/// robot, in robot order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PtsState(pub Vec<RobotStateId>);

impl PtsState {
    pub fn robot(&self, i: usize) -> RobotStateId {
        self.0[i]
    }
}

/// The team model: N weighted transition systems with a shared atom
/// namespace (per-robot atom sets are disjoint).
#[derive(Debug, Clone)]
pub struct MultiRobotModel {
    robots: Vec<Wts>,
    alphabet: BTreeSet<String>,
}

// ---- JSON schema ----

#[derive(Deserialize)]
struct ModelFile {
    robots: Vec<RobotFile>,
}

#[derive(Deserialize)]
struct RobotFile {
    id: u32,
    states: Vec<String>,
    initial: String,
    edges: Vec<(String, String, WeightValue)>,
    #[serde(default)]
    labels: Option<BTreeMap<String, Vec<String>>>,
}

/// Weights are accepted as JSON numbers or as decimal strings.
#[derive(Deserialize)]
#[serde(untagged)]
enum WeightValue {
    Num(f64),
    Text(String),
}

impl WeightValue {
    fn parse(&self) -> Result<f64, ModelError> {
        match self {
            WeightValue::Num(x) => Ok(*x),
            WeightValue::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| ModelError::Format(format!("bad weight string {s:?}: {e}"))),
        }
    }
}

impl MultiRobotModel {
    /// Load and validate a model from its JSON form. Returns the model
    /// together with non-fatal warnings (robots lacking self-loops: the
    /// synchronous rule makes every robot take an edge each step, so
    /// waiting in place requires one).
    pub fn load(text: &str) -> Result<(Self, Vec<String>), ModelError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if file.robots.is_empty() {
            return Err(ModelError::Format("model must declare at least one robot".into()));
        }

        let mut robots = Vec::new();
        let mut warnings = Vec::new();
        let mut seen_ids = BTreeSet::new();
        for rf in &file.robots {
            if !seen_ids.insert(rf.id) {
                return Err(ModelError::Format(format!("duplicate robot id {}", rf.id)));
            }
            robots.push(build_wts(rf, &mut warnings)?);
        }

        // Atom namespaces must be disjoint across robots.
        let mut alphabet: BTreeSet<String> = BTreeSet::new();
        for wts in &robots {
            let mut mine: BTreeSet<&String> = BTreeSet::new();
            for q in 0..wts.num_states() as u32 {
                mine.extend(wts.labels(q));
            }
            for atom in mine {
                if !alphabet.insert(atom.clone()) {
                    return Err(ModelError::Format(format!(
                        "atom {atom:?} is labeled by more than one robot"
                    )));
                }
            }
        }

        Ok((MultiRobotModel { robots, alphabet }, warnings))
    }

    pub fn robots(&self) -> &[Wts] {
        &self.robots
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robot(&self, i: usize) -> &Wts {
        &self.robots[i]
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn initial_pts(&self) -> PtsState {
        PtsState(self.robots.iter().map(|r| r.initial()).collect())
    }

    /// Joint transition rule: an edge must exist for every robot.
    pub fn pts_transition(&self, from: &PtsState, to: &PtsState) -> bool {
        self.robots
            .iter()
            .zip(from.0.iter().zip(to.0.iter()))
            .all(|(r, (&a, &b))| r.has_edge(a, b))
    }

    /// Sum of the per-robot edge weights.
    pub fn pts_weight(&self, from: &PtsState, to: &PtsState) -> Result<f64, ModelError> {
        let mut total = 0.0;
        for (r, (&a, &b)) in self.robots.iter().zip(from.0.iter().zip(to.0.iter())) {
            total += r.edge_weight(a, b).ok_or(ModelError::InvalidTransition)?;
        }
        Ok(total)
    }

    /// Union of the per-robot label sets.
    pub fn pts_label(&self, q: &PtsState) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (r, &qi) in self.robots.iter().zip(q.0.iter()) {
            out.extend(r.labels(qi).iter().cloned());
        }
        out
    }

    /// One-hop successor set of robot `i` from `q_i`, in edge order.
    pub fn robot_reachable(&self, i: usize, q: RobotStateId) -> Vec<RobotStateId> {
        self.robots[i]
            .successors(q)
            .iter()
            .map(|&(d, _)| d)
            .collect()
    }

    pub fn pts_state_count(&self) -> Option<u64> {
        self.robots
            .iter()
            .try_fold(1u64, |acc, r| acc.checked_mul(r.num_states() as u64))
    }
}

fn build_wts(rf: &RobotFile, warnings: &mut Vec<String>) -> Result<Wts, ModelError> {
    if rf.states.is_empty() {
        return Err(ModelError::Format(format!(
            "robot {}: state list is empty",
            rf.id
        )));
    }
    let mut state_index = HashMap::new();
    for (i, name) in rf.states.iter().enumerate() {
        if state_index.insert(name.clone(), i as u32).is_some() {
            return Err(ModelError::Format(format!(
                "robot {}: duplicate state name {name:?}",
                rf.id
            )));
        }
    }
    let initial = *state_index
        .get(&rf.initial)
        .ok_or_else(|| ModelError::MissingInitial {
            robot: rf.id,
            state: rf.initial.clone(),
        })?;

    let n = rf.states.len();
    let mut out: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut inc: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut num_edges = 0;
    for (src, dst, weight) in &rf.edges {
        let s = *state_index.get(src).ok_or_else(|| ModelError::DanglingEdge {
            robot: rf.id,
            state: src.clone(),
        })?;
        let d = *state_index.get(dst).ok_or_else(|| ModelError::DanglingEdge {
            robot: rf.id,
            state: dst.clone(),
        })?;
        let w = weight.parse()?;
        if !w.is_finite() || w < 0.0 {
            return Err(ModelError::NegativeWeight {
                robot: rf.id,
                src: src.clone(),
                dst: dst.clone(),
                weight: w,
            });
        }
        if out[s as usize].iter().any(|&(e, _)| e == d) {
            return Err(ModelError::Format(format!(
                "robot {}: duplicate edge {src} -> {dst}",
                rf.id
            )));
        }
        out[s as usize].push((d, w));
        inc[d as usize].push((s, w));
        num_edges += 1;
    }

    let labels: Vec<BTreeSet<String>> = rf
        .states
        .iter()
        .map(|name| match &rf.labels {
            Some(map) => map
                .get(name)
                .map(|atoms| atoms.iter().cloned().collect())
                .unwrap_or_default(),
            None => [format!("r{}@{}", rf.id, name)].into(),
        })
        .collect();

    let missing_loops = (0..n as u32)
        .filter(|&q| !out[q as usize].iter().any(|&(d, _)| d == q))
        .count();
    if missing_loops > 0 {
        warnings.push(format!(
            "robot {}: {missing_loops} state(s) lack self-loops; the robot cannot wait there",
            rf.id
        ));
    }

    Ok(Wts {
        robot_id: rf.id,
        state_names: rf.states.clone(),
        state_index,
        initial,
        out,
        inc,
        labels,
        num_edges,
    })
}
