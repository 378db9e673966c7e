//! Analytic equilibria for the complete uniform graph and the single-leader star.

use crate::error::{Error, Result};
use crate::graph::{classify_topology, InfluenceNetwork, Topology};
use crate::kernels::cosh_ratio;
use crate::scalar::{count, lit, Real};

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteUniformParams<T> {
    pub n: usize,
    pub w: T,
    pub k: T,
    /// `k + n w`
    pub lambda1: T,
    pub horizon: T,
}

impl<T: Real> CompleteUniformParams<T> {
    pub fn new(n: usize, w: T, k: T, horizon: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(w >= T::zero() && k >= T::zero()) || !w.is_finite() || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("w = {w}, k = {k} must be finite and nonnegative")));
        }
        if w == T::zero() && k == T::zero() {
            return Err(Error::InvalidArgument("w = k = 0 is degenerate (lambda1 = 0)".into()));
        }
        if !horizon.is_finite() || horizon <= T::zero() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { n, w, k, lambda1: k + count::<T>(n) * w, horizon })
    }

    pub fn from_network(net: &InfluenceNetwork<T>) -> Result<Self> {
        match classify_topology(net) {
            Topology::CompleteUniform { w, k } => Self::new(net.n, w, k, net.horizon),
            _ => Err(Error::Unsupported("network is not a complete graph with uniform weights".into())),
        }
    }

    fn check_time(&self, t: T) -> Result<()> {
        check_time(t, self.horizon)
    }

    fn check_len(&self, x0: &[T]) -> Result<()> {
        if x0.len() != self.n {
            return Err(Error::DimensionMismatch(format!("x0 has {} entries, expected {}", x0.len(), self.n)));
        }
        Ok(())
    }
}

fn check_time<T: Real>(t: T, horizon: T) -> Result<()> {
    if t >= T::zero() && t <= horizon {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t = {t} outside [0, {horizon}]")))
    }
}

fn mean<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / count::<T>(x.len())
}

/// `γ(t) = k/λ1 + (n w/λ1) cosh(√λ1 (T − t)) / cosh(√λ1 T)`.
pub fn gamma<T: Real>(p: &CompleteUniformParams<T>, t: T) -> Result<T> {
    p.check_time(t)?;
    Ok(gamma_unchecked(p, t))
}

fn gamma_unchecked<T: Real>(p: &CompleteUniformParams<T>, t: T) -> T {
    let nw = count::<T>(p.n) * p.w;
    p.k / p.lambda1 + nw / p.lambda1 * cosh_ratio(p.lambda1, p.horizon - t, p.horizon)
}

pub fn complete_trajectory<T: Real>(p: &CompleteUniformParams<T>, x0: &[T], t: T) -> Result<Vec<T>> {
    p.check_len(x0)?;
    let pull = T::one() - gamma(p, t)?;
    let avg = mean(x0);
    Ok(x0.iter().map(|&x| x - pull * (x - avg)).collect())
}

/// Long-horizon limit `avg + (k/λ1)(x0^i − avg)`.
pub fn complete_limit<T: Real>(p: &CompleteUniformParams<T>, x0: &[T]) -> Result<Vec<T>> {
    p.check_len(x0)?;
    let avg = mean(x0);
    let pull = count::<T>(p.n) * p.w / p.lambda1;
    Ok(x0.iter().map(|&x| x - pull * (x - avg)).collect())
}

pub fn complete_pairwise_distance<T: Real>(p: &CompleteUniformParams<T>, x0i: T, x0j: T, t: T) -> Result<T> {
    Ok(gamma(p, t)? * (x0i - x0j).abs())
}

/// Earliest `t` with `max_i |x^i(t) − avg| ≤ eps`, or `None` if that never
/// happens on `[0, T]`.
pub fn epsilon_consensus_time<T: Real>(p: &CompleteUniformParams<T>, x0: &[T], eps: T) -> Result<Option<T>> {
    p.check_len(x0)?;
    check_eps(eps)?;
    let avg = mean(x0);
    let spread = x0.iter().fold(T::zero(), |m, &x| m.max((x - avg).abs()));
    Ok(first_time_below(p.horizon, eps, |t| gamma_unchecked(p, t) * spread))
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")))
    }
}

/// Bisection for the first crossing of a non-increasing function.
fn first_time_below<T: Real>(horizon: T, eps: T, f: impl Fn(T) -> T) -> Option<T> {
    if f(T::zero()) <= eps {
        return Some(T::zero());
    }
    if f(horizon) > eps {
        return None;
    }
    let (mut lo, mut hi) = (T::zero(), horizon);
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Star network: agent 1 (index 0) is the leader, every follower `i` listens
/// only to the leader with weight `w_i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderParams<T> {
    /// Stubbornness of every agent, leader first.
    pub k: Vec<T>,
    /// Weight on the leader; entry 0 is unused and zero.
    pub w_leader: Vec<T>,
    /// `λ_i = k_i + w_i1`; entry 0 is `k_1`.
    pub lambda: Vec<T>,
    pub horizon: T,
}

impl<T: Real> LeaderParams<T> {
    pub fn new(k: Vec<T>, w_leader: Vec<T>, horizon: T) -> Result<Self> {
        if k.is_empty() || k.len() != w_leader.len() {
            return Err(Error::DimensionMismatch(format!(
                "k has {} entries, w_leader has {}",
                k.len(),
                w_leader.len()
            )));
        }
        if k.iter().chain(&w_leader).any(|&v| !v.is_finite() || v < T::zero()) {
            return Err(Error::InvalidArgument("k and w_leader must be finite and nonnegative".into()));
        }
        if !horizon.is_finite() || horizon <= T::zero() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        let mut w_leader = w_leader;
        w_leader[0] = T::zero();
        let lambda = k.iter().zip(&w_leader).map(|(&k, &w)| k + w).collect();
        Ok(Self { k, w_leader, lambda, horizon })
    }

    pub fn from_network(net: &InfluenceNetwork<T>) -> Result<Self> {
        if classify_topology(net) != Topology::SingleLeader {
            return Err(Error::Unsupported("network is not a single-leader star".into()));
        }
        let mut w_leader = vec![T::zero(); net.n];
        for e in &net.edges {
            w_leader[e.from] = e.w;
        }
        Self::new(net.k.clone(), w_leader, net.horizon)
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    fn check_len(&self, x0: &[T]) -> Result<()> {
        if x0.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("x0 has {} entries, expected {}", x0.len(), self.n())));
        }
        Ok(())
    }

    fn check_follower(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.n() {
            return Err(Error::InvalidArgument(format!("agent index {i} is not a follower")));
        }
        Ok(())
    }

    /// `ξ_i(t) = (w_i1/λ_i) cosh(√λ_i (T − t)) / cosh(√λ_i T)`.
    pub fn xi(&self, i: usize, t: T) -> T {
        let l = self.lambda[i];
        if i == 0 || l == T::zero() {
            return T::zero();
        }
        self.w_leader[i] / l * cosh_ratio(l, self.horizon - t, self.horizon)
    }

    /// Weights `(ρ_i, σ_i)` with `x^i(t) = ρ_i x0^1 + σ_i x0^i`.
    pub fn weights(&self, i: usize, t: T) -> (T, T) {
        let l = self.lambda[i];
        if i == 0 {
            return (T::one(), T::zero());
        }
        if l == T::zero() {
            return (T::zero(), T::one());
        }
        let xi = self.xi(i, t);
        (self.w_leader[i] / l - xi, self.k[i] / l + xi)
    }
}

pub fn leader_trajectory<T: Real>(p: &LeaderParams<T>, x0: &[T], t: T) -> Result<Vec<T>> {
    p.check_len(x0)?;
    check_time(t, p.horizon)?;
    let leader = x0[0];
    Ok((0..p.n())
        .map(|i| {
            let l = p.lambda[i];
            if i == 0 || l == T::zero() {
                x0[i]
            } else {
                (p.k[i] * x0[i] + p.w_leader[i] * leader) / l + p.xi(i, t) * (x0[i] - leader)
            }
        })
        .collect())
}

/// Same trajectory through the `(ρ_i, σ_i)` affine weights.
pub fn leader_trajectory_weighted<T: Real>(p: &LeaderParams<T>, x0: &[T], t: T) -> Result<Vec<T>> {
    p.check_len(x0)?;
    check_time(t, p.horizon)?;
    Ok((0..p.n())
        .map(|i| {
            let (rho, sigma) = p.weights(i, t);
            rho * x0[0] + sigma * x0[i]
        })
        .collect())
}

pub fn leader_limit<T: Real>(p: &LeaderParams<T>, x0: &[T]) -> Result<Vec<T>> {
    p.check_len(x0)?;
    Ok((0..p.n())
        .map(|i| {
            let l = p.lambda[i];
            if i == 0 || l == T::zero() {
                x0[i]
            } else {
                (p.k[i] * x0[i] + p.w_leader[i] * x0[0]) / l
            }
        })
        .collect())
}

/// `|x^i(t) − x^1(t)| = (k_i/λ_i + ξ_i(t)) |x0^i − x0^1|`, zero-based `i ≥ 1`.
pub fn leader_distance<T: Real>(p: &LeaderParams<T>, i: usize, x0: &[T], t: T) -> Result<T> {
    p.check_len(x0)?;
    p.check_follower(i)?;
    check_time(t, p.horizon)?;
    Ok(p.weights(i, t).1 * (x0[i] - x0[0]).abs())
}

/// Earliest `t` with every follower within `eps` of the leader.
pub fn leader_epsilon_time<T: Real>(p: &LeaderParams<T>, x0: &[T], eps: T) -> Result<Option<T>> {
    p.check_len(x0)?;
    check_eps(eps)?;
    Ok(first_time_below(p.horizon, eps, |t| {
        (1..p.n()).fold(T::zero(), |m, i| m.max(p.weights(i, t).1 * (x0[i] - x0[0]).abs()))
    }))
}

/// Analytic solution matched to a network's topology.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm<T> {
    Complete(CompleteUniformParams<T>),
    Leader(LeaderParams<T>),
}

impl<T: Real> ClosedForm<T> {
    /// `None` for general topologies.
    pub fn for_network(net: &InfluenceNetwork<T>) -> Result<Option<Self>> {
        match classify_topology(net) {
            Topology::CompleteUniform { .. } => Ok(Some(Self::Complete(CompleteUniformParams::from_network(net)?))),
            Topology::SingleLeader => Ok(Some(Self::Leader(LeaderParams::from_network(net)?))),
            Topology::General => Ok(None),
        }
    }

    pub fn at(&self, x0: &[T], t: T) -> Result<Vec<T>> {
        match self {
            Self::Complete(p) => complete_trajectory(p, x0, t),
            Self::Leader(p) => leader_trajectory(p, x0, t),
        }
    }

    pub fn limit(&self, x0: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Complete(p) => complete_limit(p, x0),
            Self::Leader(p) => leader_limit(p, x0),
        }
    }

    pub fn epsilon_time(&self, x0: &[T], eps: T) -> Result<Option<T>> {
        match self {
            Self::Complete(p) => epsilon_consensus_time(p, x0, eps),
            Self::Leader(p) => leader_epsilon_time(p, x0, eps),
        }
    }
}
