//! Input file schemas and loaders: systems, abstract models, graphs, and
//! second-law chain configurations, all JSON.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use infodiag::algebra::{AbstractModel, AlgebraBackend, Cocycle, FiniteAbelianGroup, FiniteMonoid};
use infodiag::prob::{DiscreteSystem, Variable};
use infodiag::graph::Graph;
use infodiag::VarSubset;

use crate::CliError;

/// A system file: named variables with label lists, outcomes as label
/// tuples, a probability vector `P` aligned with the outcomes, and an
/// optional reference vector `Q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub variables: Vec<VariableSpec>,
    pub outcomes: Vec<Vec<String>>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub labels: Vec<String>,
}

impl SystemFile {
    pub fn into_system(self) -> Result<DiscreteSystem, CliError> {
        let variables: Vec<Variable> = self
            .variables
            .iter()
            .map(|v| Variable { name: v.name.clone(), labels: v.labels.clone() })
            .collect();
        let mut outcomes = Vec::with_capacity(self.outcomes.len());
        for (row, outcome) in self.outcomes.iter().enumerate() {
            if outcome.len() != self.variables.len() {
                return Err(CliError::Schema(format!(
                    "outcome {row} has {} entries, expected one per variable ({})",
                    outcome.len(),
                    self.variables.len()
                )));
            }
            let mut coded = Vec::with_capacity(outcome.len());
            for (var, label) in self.variables.iter().zip(outcome) {
                let code = var.labels.iter().position(|l| l == label).ok_or_else(|| {
                    CliError::Schema(format!(
                        "outcome {row}: label {label:?} is not a label of variable {:?}",
                        var.name
                    ))
                })?;
                coded.push(code as u16);
            }
            outcomes.push(coded);
        }
        Ok(DiscreteSystem::new(variables, outcomes, self.p, self.q)?)
    }
}

/// An abstract model file: a commutative idempotent monoid table with its
/// identity, cyclic group factors, an action table, a chain-rule function
/// given either directly (`cocycle`) or by a generating group element
/// (`psi_generator`), and the monoid element of each variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub monoid_table: Vec<Vec<usize>>,
    pub identity: usize,
    pub group_factors: Vec<u32>,
    pub action_table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_generator: Option<usize>,
    pub variables: Vec<usize>,
}

impl ModelFile {
    pub fn into_backend(self) -> Result<AlgebraBackend, CliError> {
        let monoid = FiniteMonoid::new(self.monoid_table, self.identity)?;
        let group = FiniteAbelianGroup::new(self.group_factors)?;
        let model = Arc::new(AbstractModel::new(monoid, group, self.action_table)?);
        let cocycle = match (self.cocycle, self.psi_generator) {
            (Some(values), None) => Cocycle::new(&model, values)?,
            (None, Some(g)) => model.generate_cocycle(g)?,
            (Some(_), Some(_)) => {
                return Err(CliError::Schema(
                    "give either \"cocycle\" or \"psi_generator\", not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Schema(
                    "one of \"cocycle\" or \"psi_generator\" is required".into(),
                ))
            }
        };
        Ok(AlgebraBackend::new(model, cocycle, self.variables)?)
    }
}

/// A graph file: vertex count and 1-based edge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<Graph, CliError> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for &(a, b) in &self.edges {
            if a < 1 || a > self.n || b < 1 || b > self.n {
                return Err(CliError::Schema(format!(
                    "edge ({a}, {b}) is out of range for n = {} (vertices are 1-based)",
                    self.n
                )));
            }
            edges.push((a - 1, b - 1));
        }
        Ok(Graph::new(self.n, &edges)?)
    }
}

/// A second-law configuration: two initial distributions over the same
/// state space and the transition matrices of the shared chain. With a
/// single matrix and `steps`, the matrix is repeated `steps - 1` times.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondLawFile {
    #[serde(rename = "P1")]
    pub p1: Vec<f64>,
    #[serde(rename = "Q1")]
    pub q1: Vec<f64>,
    pub transitions: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl SecondLawFile {
    pub fn into_chain_parts(self) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<Vec<f64>>>), CliError> {
        let transitions = match self.steps {
            None => self.transitions,
            Some(steps) => {
                if self.transitions.len() != 1 {
                    return Err(CliError::Schema(
                        "\"steps\" needs exactly one transition matrix to repeat".into(),
                    ));
                }
                if steps < 2 {
                    return Err(CliError::Schema("\"steps\" must be at least 2".into()));
                }
                vec![self.transitions[0].clone(); steps - 1]
            }
        };
        Ok((self.p1, self.q1, transitions))
    }
}

/// Reads and deserializes one JSON file, attributing failures to the path.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Parses a comma-separated list of 1-based variable indices ("" is empty).
pub fn parse_indices(n: usize, text: &str) -> Result<VarSubset, CliError> {
    let mut indices = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i: usize = token
            .parse()
            .map_err(|_| CliError::Schema(format!("{token:?} is not a variable index")))?;
        if i < 1 || i > n {
            return Err(CliError::Schema(format!(
                "variable index {i} is out of range 1..={n}"
            )));
        }
        indices.push(i - 1);
    }
    VarSubset::from_indices(n, &indices)
        .map_err(|e| CliError::Schema(format!("bad index list {text:?}: {e}")))
}

/// Parses a partition block list: blocks separated by `;`, indices by `,`,
/// e.g. `1,2;3` for the blocks {1,2} and {3}.
pub fn parse_blocks(n: usize, text: &str) -> Result<Vec<VarSubset>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|b| !b.is_empty())
        .map(|b| parse_indices(n, b))
        .collect()
}
