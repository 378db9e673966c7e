//! Ten-agent scenarios used for the opinion-vs-time figures.

use crate::graph::{Edge, InfluenceNetwork};

pub const AGENTS: usize = 10;
pub const HORIZON: f64 = 5.0;

/// Figure presets in canonical order.
pub const FIGURES: [&str; 6] = ["fig1b", "fig1c", "fig2b", "fig2c", "fig3b", "fig3c"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub network: InfluenceNetwork<f64>,
    pub note: &'static str,
}

/// `0.05, 0.15, …, 0.95`
pub fn initial_opinions() -> Vec<f64> {
    (0..AGENTS).map(|i| (2 * i + 1) as f64 / 20.0).collect()
}

fn complete(w: f64, k: f64) -> InfluenceNetwork<f64> {
    let mut edges = Vec::new();
    for i in 0..AGENTS {
        for j in 0..AGENTS {
            if i != j {
                edges.push(Edge::new(i, j, w));
            }
        }
    }
    InfluenceNetwork::new(AGENTS, HORIZON, initial_opinions(), vec![k; AGENTS], edges)
}

fn leader(w: f64, k: f64) -> InfluenceNetwork<f64> {
    let edges = (1..AGENTS).map(|i| Edge::new(i, 0, w)).collect();
    InfluenceNetwork::new(AGENTS, HORIZON, initial_opinions(), vec![k; AGENTS], edges)
}

/// Leaders are agents 1 and 10; followers-1 are agents 2–5, followers-10
/// are agents 6–9.
fn two_leaders(own_leader_1: f64, f1_on_f10: f64) -> InfluenceNetwork<f64> {
    const OWN_LEADER: f64 = 10.0;
    const OTHER_LEADER: f64 = 0.1;
    const WITHIN: f64 = 2.0;
    const CROSS: f64 = 0.2;
    let (l1, l10) = (0, AGENTS - 1);
    let f1: Vec<usize> = (1..5).collect();
    let f10: Vec<usize> = (5..9).collect();
    let mut edges = Vec::new();
    for &i in &f1 {
        edges.push(Edge::new(i, l1, own_leader_1));
        edges.push(Edge::new(i, l10, OTHER_LEADER));
        edges.extend(f1.iter().filter(|&&j| j != i).map(|&j| Edge::new(i, j, WITHIN)));
        edges.extend(f10.iter().map(|&j| Edge::new(i, j, CROSS)));
    }
    for &i in &f10 {
        edges.push(Edge::new(i, l10, OWN_LEADER));
        edges.push(Edge::new(i, l1, OTHER_LEADER));
        edges.extend(f10.iter().filter(|&&j| j != i).map(|&j| Edge::new(i, j, WITHIN)));
        edges.extend(f1.iter().map(|&j| Edge::new(i, j, f1_on_f10)));
    }
    InfluenceNetwork::new(AGENTS, HORIZON, initial_opinions(), vec![0.2; AGENTS], edges)
}

fn build(name: &str) -> Option<(&'static str, InfluenceNetwork<f64>, &'static str)> {
    Some(match name {
        "fig1b" => ("fig1b", complete(2.0, 0.2), "complete graph, w = 2, k = 0.2"),
        "fig1c" => ("fig1c", complete(0.4, 0.04), "complete graph, w = 0.4, k = 0.04"),
        "fig1_k0" => ("fig1_k0", complete(2.0, 0.0), "complete graph, w = 2, no stubbornness"),
        "fig2b" => ("fig2b", leader(2.0, 0.2), "single leader (agent 1), w_i1 = 2, k = 0.2"),
        "fig2c" => ("fig2c", leader(0.4, 0.04), "single leader (agent 1), w_i1 = 0.4, k = 0.04"),
        "fig3b" => ("fig3b", two_leaders(10.0, 0.2), "leaders 1 and 10, followers 2-5 and 6-9"),
        "fig3c" => ("fig3c", two_leaders(20.0, 10.0), "as fig3b with leader-1 pull 20 and followers-1 -> followers-10 pull 10"),
        _ => return None,
    })
}

fn canonical(name: &str) -> &str {
    match name {
        "fig1" => "fig1b",
        "fig1_weak" => "fig1c",
        "fig2" => "fig2b",
        "fig2_weak" => "fig2c",
        "fig3" => "fig3b",
        other => other,
    }
}

pub fn preset(name: &str) -> Option<ScenarioPreset> {
    build(canonical(name)).map(|(name, network, note)| ScenarioPreset {
        name,
        network: network.with_name(name),
        note,
    })
}

/// Every accepted preset name, aliases included.
pub fn preset_names() -> Vec<&'static str> {
    vec![
        "fig1b", "fig1c", "fig2b", "fig2c", "fig3b", "fig3c", "fig1_k0", "fig1", "fig1_weak", "fig2", "fig2_weak", "fig3",
    ]
}
