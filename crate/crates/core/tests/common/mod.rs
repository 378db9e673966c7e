#![allow(dead_code)]

use consensus_game::{Edge, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed network: every ordered pair is an edge with probability
/// `density`, weights in `[0, 3]`, stubbornness in `[0, 1]`, opinions in `[0, 1]`.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, density: f64, horizon: f64) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                edges.push(Edge::new(i, j, rng.random_range(0.0..3.0)));
            }
        }
    }
    let x0 = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let k = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    Network::new(n, horizon, x0, k, edges)
}

/// Star into agent 1 with `k_i, w_i1` drawn from `[0, 3]`.
pub fn random_leader_network(rng: &mut ChaCha8Rng, n: usize, horizon: f64) -> Network {
    let edges = (1..n).map(|i| Edge::new(i, 0, rng.random_range(0.0..3.0))).collect();
    let x0 = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let k = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    Network::new(n, horizon, x0, k, edges)
}

pub fn complete_network(n: usize, w: f64, k: f64, horizon: f64, x0: Vec<f64>) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                edges.push(Edge::new(i, j, w));
            }
        }
    }
    Network::new(n, horizon, x0, vec![k; n], edges)
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
