//! Game instances and the coupling matrices assembled from them.
//!
//! Agents are indexed from 0 internally; diagnostics and files use 1-based
//! labels.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Directed influence: agent `to` influences agent `from` with weight `w`
/// (the `w_ij` of agent `i = from`'s cost).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub from: usize,
    pub to: usize,
    pub w: T,
}

impl<T> Edge<T> {
    pub fn new(from: usize, to: usize, w: T) -> Self {
        Self { from, to, w }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceNetwork<T> {
    pub n: usize,
    pub edges: Vec<Edge<T>>,
    /// Stubbornness per agent.
    pub k: Vec<T>,
    /// Initial opinions.
    pub x0: Vec<T>,
    pub horizon: T,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

impl<T: Real> InfluenceNetwork<T> {
    pub fn new(n: usize, horizon: T, x0: Vec<T>, k: Vec<T>, edges: Vec<Edge<T>>) -> Self {
        Self { n, edges, k, x0, horizon, name: None }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Checks every structural invariant. Opinions outside `[0, 1]` only
    /// produce warnings.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Diagnostic::error("network must have at least one agent"));
        }
        if !(self.horizon.is_finite() && self.horizon > T::zero()) {
            out.push(Diagnostic::error(format!("horizon T must be positive and finite, got {}", self.horizon)));
        }
        if self.x0.len() != self.n {
            out.push(Diagnostic::error(format!(
                "x0 has {} entries but n = {}",
                self.x0.len(),
                self.n
            )));
        }
        if self.k.len() != self.n {
            out.push(Diagnostic::error(format!("k has {} entries but n = {}", self.k.len(), self.n)));
        }
        for (i, &ki) in self.k.iter().enumerate() {
            if !ki.is_finite() || ki < T::zero() {
                out.push(Diagnostic::error(format!("agent {}: stubbornness k = {ki} must be >= 0", i + 1)));
            }
        }
        for (i, &xi) in self.x0.iter().enumerate() {
            if !xi.is_finite() {
                out.push(Diagnostic::error(format!("agent {}: initial opinion is not finite", i + 1)));
            } else if xi < T::zero() || xi > T::one() {
                out.push(Diagnostic::warning(format!(
                    "agent {}: initial opinion {xi} lies outside [0, 1]",
                    i + 1
                )));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            let label = format!("edge ({}, {})", e.from + 1, e.to + 1);
            if e.from >= self.n || e.to >= self.n {
                out.push(Diagnostic::error(format!("{label}: agent index out of range 1..={}", self.n)));
                continue;
            }
            if e.from == e.to {
                out.push(Diagnostic::error(format!("{label}: self-edge")));
            }
            if !e.w.is_finite() || e.w < T::zero() {
                out.push(Diagnostic::error(format!("{label}: weight {} must be >= 0", e.w)));
            }
            if !seen.insert((e.from, e.to)) {
                out.push(Diagnostic::error(format!("{label}: duplicate edge")));
            }
        }
        out
    }

    /// Returns `self` if validation reports no errors.
    pub fn validated(self) -> Result<Self> {
        let errors: Vec<_> = self.validate().into_iter().filter(Diagnostic::is_error).collect();
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidNetwork(errors))
        }
    }

    /// Neighbourhood η_i: agents that influence agent `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.from == i).map(|e| e.to)
    }

    /// Dense influence weights, `weights[(i, j)] = w_ij`.
    pub fn weight_matrix(&self) -> DenseMatrix<T> {
        let mut w = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.from, e.to)] = w[(e.from, e.to)] + e.w;
        }
        w
    }

    /// Relabels agents: old agent `i` becomes agent `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut x0 = vec![T::zero(); self.n];
        let mut k = vec![T::zero(); self.n];
        for (old, &new) in perm.iter().enumerate() {
            x0[new] = self.x0[old];
            k[new] = self.k[old];
        }
        let edges = self.edges.iter().map(|e| Edge::new(perm[e.from], perm[e.to], e.w)).collect();
        Self { n: self.n, edges, k, x0, horizon: self.horizon, name: self.name.clone() }
    }

    pub fn mean_opinion(&self) -> T {
        self.x0.iter().copied().sum::<T>() / T::from_usize(self.n).expect("n fits")
    }
}

/// Coupling matrices of the state–costate system.
#[derive(Debug, Clone, PartialEq)]
pub struct GameMatrices<T> {
    /// Laplacian-like matrix: diagonal `q_i`, off-diagonal `−w_ij`.
    pub w: DenseMatrix<T>,
    /// Diagonal of `K`.
    pub k: Vec<T>,
    /// Diagonal of `W`: `q_i = Σ_j w_ij + k_i`.
    pub q: Vec<T>,
}

impl<T: Real> GameMatrices<T> {
    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn k_matrix(&self) -> DenseMatrix<T> {
        DenseMatrix::from_diagonal(&self.k)
    }
}

pub fn build_matrices<T: Real>(net: &InfluenceNetwork<T>) -> Result<GameMatrices<T>> {
    let net = net.clone().validated()?;
    let weights = net.weight_matrix();
    let n = net.n;
    let q: Vec<T> = (0..n)
        .map(|i| weights.row(i).iter().copied().sum::<T>() + net.k[i])
        .collect();
    let w = DenseMatrix::from_fn(n, n, |i, j| if i == j { q[i] } else { -weights[(i, j)] });
    Ok(GameMatrices { w, k: net.k.clone(), q })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology<T> {
    /// Every ordered pair is an edge with one common weight, and all
    /// stubbornness values are equal.
    CompleteUniform { w: T, k: T },
    /// Agent 1 has no neighbours and every other agent listens only to agent 1.
    SingleLeader,
    General,
}

impl<T> Topology<T> {
    pub fn has_closed_form(&self) -> bool {
        !matches!(self, Topology::General)
    }
}

pub fn classify_topology<T: Real>(net: &InfluenceNetwork<T>) -> Topology<T> {
    let n = net.n;
    let mut pairs: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
    for e in &net.edges {
        if e.from < n && e.to < n {
            pairs[e.from][e.to] = Some(e.w);
        }
    }

    if n >= 2 {
        let w = pairs[0][1];
        let complete = (0..n).all(|i| (0..n).all(|j| i == j || (pairs[i][j].is_some() && pairs[i][j] == w)));
        let k_uniform = net.k.iter().all(|&k| k == net.k[0]);
        if complete && k_uniform && net.edges.len() == n * (n - 1) {
            return Topology::CompleteUniform { w: w.expect("complete"), k: net.k[0] };
        }
    }

    let leader_isolated = net.edges.iter().all(|e| e.from != 0);
    let followers_on_leader = (1..n).all(|i| {
        let mut nb = net.neighbors(i);
        matches!((nb.next(), nb.next()), (Some(0), None))
    });
    if leader_isolated && followers_on_leader {
        return Topology::SingleLeader;
    }
    Topology::General
}
