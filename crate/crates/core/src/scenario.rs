//! JSON scenario files. Agent indices are 1-based on disk.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Diagnostic, Edge, InfluenceNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub k: Vec<f64>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// `from` is influenced by `to` with weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub w: f64,
}

impl ScenarioFile {
    pub fn to_network(&self) -> Result<InfluenceNetwork<f64>> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for (idx, e) in self.edges.iter().enumerate() {
            if e.from == 0 || e.to == 0 {
                return Err(Error::InvalidArgument(format!(
                    "edge #{} ({} -> {}): agent indices are 1-based",
                    idx + 1,
                    e.from,
                    e.to
                )));
            }
            edges.push(Edge::new(e.from - 1, e.to - 1, e.w));
        }
        let net = InfluenceNetwork::new(self.n, self.horizon, self.x0.clone(), self.k.clone(), edges);
        Ok(match &self.name {
            Some(name) => net.with_name(name.clone()),
            None => net,
        })
    }

    pub fn from_network(net: &InfluenceNetwork<f64>) -> Self {
        Self {
            n: net.n,
            horizon: net.horizon,
            x0: net.x0.clone(),
            k: net.k.clone(),
            edges: net.edges.iter().map(|e| EdgeRecord { from: e.from + 1, to: e.to + 1, w: e.w }).collect(),
            name: net.name.clone(),
        }
    }
}

/// Parses and validates a scenario. Returns the network with any warnings.
pub fn parse_scenario(text: &str) -> Result<(InfluenceNetwork<f64>, Vec<Diagnostic>)> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let net = file.to_network()?;
    let diagnostics = net.validate();
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(Error::InvalidNetwork(diagnostics));
    }
    Ok((net, diagnostics))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<(InfluenceNetwork<f64>, Vec<Diagnostic>)> {
    parse_scenario(&fs::read_to_string(path)?)
}

pub fn scenario_to_json(net: &InfluenceNetwork<f64>) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_network(net)).expect("scenario serialises")
}

pub fn save_scenario(net: &InfluenceNetwork<f64>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scenario_to_json(net) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "n": 3, "T": 2.5, "x0": [0.1, 0.5, 0.9], "k": [0.2, 0.0, 0.1],
        "edges": [{"from": 2, "to": 1, "w": 1.5}, {"from": 3, "to": 2, "w": 0.25}],
        "name": "chain"
    }"#;

    #[test]
    fn parses_one_based_edges() {
        let (net, warnings) = parse_scenario(SAMPLE).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(net.name.as_deref(), Some("chain"));
        assert_eq!(net.edges[0], Edge::new(1, 0, 1.5));
        assert_eq!(net.weight_matrix()[(2, 1)], 0.25);
    }

    #[test]
    fn round_trip_is_lossless() {
        let (net, _) = parse_scenario(SAMPLE).unwrap();
        let (back, _) = parse_scenario(&scenario_to_json(&net)).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = SAMPLE.replace("\"name\"", "\"label\"");
        assert!(matches!(parse_scenario(&text), Err(Error::Parse(_))));
        let edge = SAMPLE.replace("\"w\": 1.5", "\"w\": 1.5, \"weight\": 2");
        assert!(matches!(parse_scenario(&edge), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_indices_rejected() {
        let zero = SAMPLE.replace("\"from\": 2", "\"from\": 0");
        assert!(matches!(parse_scenario(&zero), Err(Error::InvalidArgument(_))));
        let high = SAMPLE.replace("\"to\": 2", "\"to\": 7");
        assert!(matches!(parse_scenario(&high), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn out_of_range_opinion_is_a_warning() {
        let text = SAMPLE.replace("[0.1, 0.5, 0.9]", "[1.5, 0.5, 0.9]");
        let (_, warnings) = parse_scenario(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(!warnings[0].is_error());
    }
}
