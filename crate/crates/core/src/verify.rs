//! Independent checks of the Nash property.
//!
//! Costs are integrated with composite Simpson. Best responses use a
//! Galerkin transcription: the agent's opinion is piecewise linear on the
//! grid (so its control is piecewise constant), rivals are frozen and
//! linearly interpolated, and every integral is exact for those
//! interpolants. The discrete objective is then a strictly convex quadratic
//! in the free nodal opinions with a tridiagonal optimality system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{build_matrices, InfluenceNetwork};
use crate::scalar::{count, lit, Real};
use crate::solver::EquilibriumTrajectory;

/// Amplitudes of random deviations, relative to `‖u^i‖∞ + 1`.
pub const DEVIATION_LEVELS: [f64; 3] = [1e-3, 1e-2, 1e-1];
/// Highest harmonic (over the horizon) in a random deviation.
pub const DEVIATION_HARMONICS: usize = 6;
pub const DEFAULT_DEVIATION_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_TERMINAL_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_CONTROL_TOLERANCE: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 3;
const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Cost of one agent split by integrand term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown<T> {
    /// Zero-based agent index.
    pub agent: usize,
    pub influence: T,
    pub stubbornness: T,
    pub control: T,
    pub total: T,
}

/// Composite quadrature weights on a uniform grid: Simpson for an odd number
/// of points, Simpson plus a closing 3/8 panel for an even number, and the
/// trapezoid rule for two points.
pub fn quadrature_weights<T: Real>(samples: usize, h: T) -> Result<Vec<T>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("quadrature needs at least 2 samples, got {samples}")));
    }
    let mut w = vec![T::zero(); samples];
    if samples == 2 {
        w[0] = h / lit(2.0);
        w[1] = h / lit(2.0);
        return Ok(w);
    }
    let intervals = samples - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let third = h / lit(3.0);
    for j in (0..simpson_end).step_by(2) {
        w[j] = w[j] + third;
        w[j + 1] = w[j + 1] + lit::<T>(4.0) * third;
        w[j + 2] = w[j + 2] + third;
    }
    if simpson_end < intervals {
        let e = lit::<T>(3.0) * h / lit(8.0);
        let s = simpson_end;
        w[s] = w[s] + e;
        w[s + 1] = w[s + 1] + lit::<T>(3.0) * e;
        w[s + 2] = w[s + 2] + lit::<T>(3.0) * e;
        w[s + 3] = w[s + 3] + e;
    }
    Ok(w)
}

fn check_inputs<T: Real>(net: &InfluenceNetwork<T>, traj: &EquilibriumTrajectory<T>, i: usize) -> Result<()> {
    if traj.agents() != net.n || traj.u.cols() != net.n {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} agents, network has {}",
            traj.agents(),
            net.n
        )));
    }
    if i >= net.n {
        return Err(Error::InvalidArgument(format!("agent index {i} out of range for n = {}", net.n)));
    }
    if traj.samples() < 2 {
        return Err(Error::InvalidArgument("grid too coarse: need at least 2 samples".into()));
    }
    Ok(())
}

fn step<T: Real>(net: &InfluenceNetwork<T>, samples: usize) -> T {
    net.horizon / count::<T>(samples - 1)
}

/// In-neighbours of `i` with their weights (`w_ij` for every edge `i → j`).
fn in_weights<T: Real>(net: &InfluenceNetwork<T>, i: usize) -> Vec<(usize, T)> {
    net.edges.iter().filter(|e| e.from == i).map(|e| (e.to, e.w)).collect()
}

/// `½∫ Σ_j w_ij (x^i − x^j)² + ½∫ k_i (x^i − x0^i)² + ½∫ (u^i)²` by quadrature.
pub fn evaluate_cost<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
    i: usize,
) -> Result<CostBreakdown<T>> {
    check_inputs(net, traj, i)?;
    let m = traj.samples();
    let weights = quadrature_weights(m, step(net, m))?;
    let neighbours = in_weights(net, i);
    let half = lit::<T>(0.5);
    let (mut influence, mut stubbornness, mut control) = (T::zero(), T::zero(), T::zero());
    for (r, &q) in weights.iter().enumerate() {
        let x = traj.x.row(r);
        let xi = x[i];
        let coupling: T = neighbours.iter().map(|&(j, w)| w * (xi - x[j]) * (xi - x[j])).sum();
        let drift = xi - net.x0[i];
        let u = traj.u[(r, i)];
        influence = influence + q * half * coupling;
        stubbornness = stubbornness + q * half * net.k[i] * drift * drift;
        control = control + q * half * u * u;
    }
    Ok(CostBreakdown { agent: i, influence, stubbornness, control, total: influence + stubbornness + control })
}

/// The same cost written as `½∫ (zᵀ G z + u²)`, with `z` the stacked
/// differences `x^i − x^j` (all `j ≠ i`) followed by `x^i − x0^i`, and
/// `G = diag(w_i·, k_i)`.
pub fn quadratic_cost<T: Real>(net: &InfluenceNetwork<T>, traj: &EquilibriumTrajectory<T>, i: usize) -> Result<T> {
    check_inputs(net, traj, i)?;
    let n = net.n;
    let m = traj.samples();
    let weights = quadrature_weights(m, step(net, m))?;
    let row = net.weight_matrix().row(i).to_vec();
    let mut g: Vec<T> = (0..n).filter(|&j| j != i).map(|j| row[j]).collect();
    g.push(net.k[i]);
    let mut total = T::zero();
    let mut z = vec![T::zero(); n];
    for (r, &q) in weights.iter().enumerate() {
        let x = traj.x.row(r);
        for (slot, j) in (0..n).filter(|&j| j != i).enumerate() {
            z[slot] = x[i] - x[j];
        }
        z[n - 1] = x[i] - net.x0[i];
        let form: T = z.iter().zip(&g).map(|(&zi, &gi)| zi * gi * zi).sum();
        let u = traj.u[(r, i)];
        total = total + q * (form + u * u);
    }
    Ok(total / lit(2.0))
}

/// Outcome of one agent's best response against frozen rivals.
#[derive(Debug, Clone)]
pub struct BestResponseResult<T> {
    pub agent: usize,
    /// Piecewise-constant control, one value per grid interval.
    pub control: Vec<T>,
    /// Nodal opinions, starting at `x0^i`.
    pub trajectory: Vec<T>,
    /// Transcribed cost of the best response.
    pub cost: T,
    /// Transcribed cost of the candidate's own opinion path.
    pub equilibrium_cost: T,
    /// `equilibrium_cost − cost`; nonnegative up to rounding.
    pub gap: T,
    /// Max-norm of the objective gradient at the returned control.
    pub gradient_norm: T,
}

/// Agent `i`'s transcribed problem with rivals frozen.
struct Transcription<T> {
    h: T,
    /// `Σ_j w_ij + k_i`
    q: T,
    /// Nodal values of `Σ_j w_ij x^j + k_i x0^i`.
    source: Vec<T>,
    neighbours: Vec<(usize, T)>,
    k: T,
    x0: T,
}

impl<T: Real> Transcription<T> {
    fn new(net: &InfluenceNetwork<T>, traj: &EquilibriumTrajectory<T>, i: usize) -> Self {
        let neighbours = in_weights(net, i);
        let k = net.k[i];
        let q = neighbours.iter().map(|&(_, w)| w).sum::<T>() + k;
        let source = (0..traj.samples())
            .map(|r| {
                let x = traj.x.row(r);
                neighbours.iter().map(|&(j, w)| w * x[j]).sum::<T>() + k * net.x0[i]
            })
            .collect();
        Self { h: step(net, traj.samples()), q, source, neighbours, k, x0: net.x0[i] }
    }

    fn nodes(&self) -> usize {
        self.source.len()
    }

    /// Exact cost of the piecewise-linear path `x` against interpolated rivals.
    fn cost(&self, x: &[T], traj: &EquilibriumTrajectory<T>) -> T {
        let h = self.h;
        let sq = |a: T, b: T| h * (a * a + a * b + b * b) / lit(3.0);
        let mut total = T::zero();
        for j in 0..self.nodes() - 1 {
            let (a, b) = (x[j], x[j + 1]);
            let (ra, rb) = (traj.x.row(j), traj.x.row(j + 1));
            for &(k, w) in &self.neighbours {
                total = total + w * sq(a - ra[k], b - rb[k]);
            }
            total = total + self.k * sq(a - self.x0, b - self.x0);
            total = total + (b - a) * (b - a) / h;
        }
        total / lit(2.0)
    }

    fn mass_apply(&self, v: &[T], j: usize) -> T {
        let h = self.h;
        let last = self.nodes() - 1;
        let sixth = h / lit(6.0);
        let mut out = sixth * v[j - 1];
        if j < last {
            out = out + lit::<T>(4.0) * sixth * v[j] + sixth * v[j + 1];
        } else {
            out = out + lit::<T>(2.0) * sixth * v[j];
        }
        out
    }

    fn stiffness_apply(&self, v: &[T], j: usize) -> T {
        let last = self.nodes() - 1;
        let mut out = v[j] - v[j - 1];
        if j < last {
            out = out + v[j] - v[j + 1];
        }
        out / self.h
    }

    /// Gradient with respect to the free nodes `x_1 … x_N`.
    fn node_gradient(&self, x: &[T]) -> Vec<T> {
        (1..self.nodes())
            .map(|j| self.q * self.mass_apply(x, j) - self.mass_apply(&self.source, j) + self.stiffness_apply(x, j))
            .collect()
    }

    /// Gradient with respect to the interval controls `u_0 … u_{N−1}`.
    fn control_gradient(&self, x: &[T]) -> Vec<T> {
        let gx = self.node_gradient(x);
        let mut out = vec![T::zero(); gx.len()];
        let mut acc = T::zero();
        for l in (0..gx.len()).rev() {
            acc = acc + gx[l];
            out[l] = self.h * acc;
        }
        out
    }

    fn minimise(&self) -> Result<Vec<T>> {
        let nf = self.nodes() - 1;
        let h = self.h;
        let off = self.q * h / lit(6.0) - T::one() / h;
        let diag: Vec<T> = (1..=nf)
            .map(|j| {
                if j < nf {
                    self.q * lit::<T>(2.0) * h / lit(3.0) + lit::<T>(2.0) / h
                } else {
                    self.q * h / lit(3.0) + T::one() / h
                }
            })
            .collect();
        let mut rhs: Vec<T> = (1..=nf).map(|j| self.mass_apply(&self.source, j)).collect();
        rhs[0] = rhs[0] - off * self.x0;

        let scale = rhs.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let mut x = vec![self.x0; nf + 1];
        let mut correction = thomas(&diag, off, &rhs);
        let mut residual = T::infinity();
        for _ in 0..=REFINEMENT_STEPS {
            for (xj, c) in x[1..].iter_mut().zip(&correction) {
                *xj = *xj + *c;
            }
            let g = self.node_gradient(&x);
            residual = g.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if residual <= lit::<T>(GRADIENT_TOLERANCE) * scale {
                return Ok(x);
            }
            let neg: Vec<T> = g.iter().map(|&v| -v).collect();
            correction = thomas(&diag, off, &neg);
        }
        Err(Error::NoConvergence {
            iterations: REFINEMENT_STEPS + 1,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Symmetric tridiagonal solve with constant off-diagonal.
fn thomas<T: Real>(diag: &[T], off: T, rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut denom = diag[0];
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for j in 1..n {
        denom = diag[j] - off * c[j - 1];
        c[j] = off / denom;
        d[j] = (rhs[j] - off * d[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        d[j] = d[j] - c[j] * d[j + 1];
    }
    d
}

/// Best response of agent `i` to the rivals' paths in `traj`.
pub fn best_response<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
    i: usize,
) -> Result<BestResponseResult<T>> {
    check_inputs(net, traj, i)?;
    let tr = Transcription::new(net, traj, i);
    let own = traj.opinion(i);
    let best = tr.minimise()?;
    let cost = tr.cost(&best, traj);
    let equilibrium_cost = tr.cost(&own, traj);
    let control = best.windows(2).map(|w| (w[1] - w[0]) / tr.h).collect();
    let gradient_norm = tr.control_gradient(&best).iter().fold(T::zero(), |m, v| m.max(v.abs()));
    Ok(BestResponseResult {
        agent: i,
        control,
        trajectory: best,
        cost,
        equilibrium_cost,
        gap: equilibrium_cost - cost,
        gradient_norm,
    })
}

/// Max-norm of the transcribed objective's control gradient at the
/// candidate's own path.
pub fn candidate_gradient<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
    i: usize,
) -> Result<T> {
    check_inputs(net, traj, i)?;
    let tr = Transcription::new(net, traj, i);
    Ok(tr.control_gradient(&traj.opinion(i)).iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

/// `max_i (J^i_eq − J^i_best) / max(1, J^i_eq)`.
pub fn nash_residual<T: Real>(net: &InfluenceNetwork<T>, traj: &EquilibriumTrajectory<T>) -> Result<T> {
    let mut worst = T::neg_infinity();
    for i in 0..net.n {
        let br = best_response(net, traj, i)?;
        worst = worst.max(br.gap / br.equilibrium_cost.max(T::one()));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub value: T,
    pub tolerance: T,
}

impl<T: Real> Residual<T> {
    pub fn ok(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Necessary-condition residuals of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentStationarity<T> {
    pub agent: usize,
    /// `max |u + p|`
    pub control: Residual<T>,
    /// Central difference of `x` against `u`.
    pub state: Residual<T>,
    /// Central difference of `p` against `−(W x)_i + k_i x0^i`.
    pub costate: Residual<T>,
    /// `|x(0) − x0|`, required to be exactly zero.
    pub initial: Residual<T>,
    /// `|p(T)|`
    pub terminal: Residual<T>,
}

impl<T: Real> AgentStationarity<T> {
    pub fn ok(&self) -> bool {
        [self.control, self.state, self.costate, self.initial, self.terminal].iter().all(Residual::ok)
    }
}

/// Checks `u = −p`, `ẋ = u`, `ṗ = −W x + K x0`, `x(0) = x0` and `p(T) = 0`.
///
/// Finite-difference tolerances are twice the central-difference error bound
/// `h²/6 · max|f'''|`, with `|x'''| ≤ ‖W‖∞ max|p|` and `|p'''| ≤ ‖W‖∞ max|ṗ|`,
/// plus a rounding floor `64 ε S / h` where `S` is the largest sampled
/// magnitude of `x` or `p`.
#[allow(clippy::needless_range_loop)]
pub fn stationarity_check<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
) -> Result<Vec<AgentStationarity<T>>> {
    check_inputs(net, traj, 0)?;
    let gm = build_matrices(net)?;
    let m = traj.samples();
    let h = step(net, m);
    let w_norm = gm.w.norm_inf();
    let bound = lit::<T>(2.0) * h * h / lit(6.0) * w_norm;
    let magnitude = traj.x.max_abs().max(traj.p.max_abs());
    let floor = lit::<T>(64.0) * T::epsilon() * magnitude / h;
    let kx0: Vec<T> = gm.k.iter().zip(&net.x0).map(|(&k, &x)| k * x).collect();
    let rhs: Vec<Vec<T>> = (0..m)
        .map(|r| {
            let wx = gm.w.mul_vec(traj.x.row(r));
            wx.iter().zip(&kx0).map(|(&a, &b)| b - a).collect()
        })
        .collect();

    // The bounds on `(W p)_i` and `(W ṗ)_i` involve every agent.
    let p_max = traj.p.max_abs();
    let rhs_max = rhs.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut out = Vec::with_capacity(net.n);
    for i in 0..net.n {
        let (mut control, mut state, mut costate) = (T::zero(), T::zero(), T::zero());
        for r in 0..m {
            control = control.max((traj.u[(r, i)] + traj.p[(r, i)]).abs());
        }
        for r in 1..m.saturating_sub(1) {
            let two_h = lit::<T>(2.0) * h;
            let dx = (traj.x[(r + 1, i)] - traj.x[(r - 1, i)]) / two_h;
            let dp = (traj.p[(r + 1, i)] - traj.p[(r - 1, i)]) / two_h;
            state = state.max((dx - traj.u[(r, i)]).abs());
            costate = costate.max((dp - rhs[r][i]).abs());
        }
        out.push(AgentStationarity {
            agent: i,
            control: Residual { value: control, tolerance: lit(DEFAULT_CONTROL_TOLERANCE) },
            state: Residual { value: state, tolerance: bound * p_max + floor },
            costate: Residual { value: costate, tolerance: bound * rhs_max + floor },
            initial: Residual { value: (traj.x[(0, i)] - net.x0[i]).abs(), tolerance: T::zero() },
            terminal: Residual { value: traj.p[(m - 1, i)].abs(), tolerance: lit(DEFAULT_TERMINAL_TOLERANCE) },
        });
    }
    Ok(out)
}

/// Band-limited control deviation
/// `δ(t) = a Σ_f (α_f sin ω_f t + β_f cos ω_f t) / Σ_f (|α_f| + |β_f|)`
/// with `ω_f = 2π f / T`, so `|δ| ≤ a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub amplitude: T,
    pub sin: Vec<T>,
    pub cos: Vec<T>,
}

impl<T: Real> Perturbation<T> {
    pub fn zero() -> Self {
        Self { amplitude: T::zero(), sin: vec![T::zero()], cos: vec![T::zero()] }
    }

    fn random(rng: &mut ChaCha8Rng, amplitude: T) -> Self {
        let mut draw = || lit::<T>(rng.sample::<f64, _>(StandardNormal));
        let sin = (0..DEVIATION_HARMONICS).map(|_| draw()).collect();
        let cos = (0..DEVIATION_HARMONICS).map(|_| draw()).collect();
        Self { amplitude, sin, cos }
    }

    fn norm(&self) -> T {
        let s: T = self.sin.iter().chain(&self.cos).map(|v| v.abs()).sum();
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    }

    /// `(δ(t), ∫_0^t δ)`, both in closed form.
    pub fn eval(&self, t: T, horizon: T) -> (T, T) {
        let scale = self.amplitude / self.norm();
        let (mut du, mut dx) = (T::zero(), T::zero());
        for (f, (&a, &b)) in self.sin.iter().zip(&self.cos).enumerate() {
            let omega = T::TAU() * count::<T>(f + 1) / horizon;
            let (s, c) = (omega * t).sin_cos();
            du = du + a * s + b * c;
            dx = dx + (a * (T::one() - c) + b * s) / omega;
        }
        (scale * du, scale * dx)
    }
}

/// Cost decrease `J^i(candidate) − J^i(candidate + δ)` with rivals frozen,
/// both costs by [`evaluate_cost`].
pub fn deviation_gain<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
    i: usize,
    perturbation: &Perturbation<T>,
) -> Result<T> {
    let base = evaluate_cost(net, traj, i)?.total;
    let mut moved = traj.clone();
    for (r, &t) in traj.grid.iter().enumerate() {
        let (du, dx) = perturbation.eval(t, net.horizon);
        moved.x[(r, i)] = traj.x[(r, i)] + dx;
        moved.u[(r, i)] = traj.u[(r, i)] + du;
        moved.p[(r, i)] = -moved.u[(r, i)];
    }
    Ok(base - evaluate_cost(net, &moved, i)?.total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationOutcome<T> {
    pub agent: usize,
    pub trials: usize,
    /// Largest cost decrease found; negative when every deviation hurts.
    pub worst_gain: T,
    pub passed: bool,
}

/// `count` seeded random deviations of agent `i`'s control, cycling through
/// [`DEVIATION_LEVELS`]. Passes iff no deviation lowers the cost by more than
/// `tolerance`. Each agent draws from its own ChaCha stream of `seed`.
pub fn deviation_test<T: Real>(
    net: &InfluenceNetwork<T>,
    traj: &EquilibriumTrajectory<T>,
    i: usize,
    count: usize,
    seed: u64,
    tolerance: T,
) -> Result<DeviationOutcome<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("deviation count must be at least 1".into()));
    }
    check_inputs(net, traj, i)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let u_max = traj.u.column(i).iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut worst = T::neg_infinity();
    for trial in 0..count {
        let level = lit::<T>(DEVIATION_LEVELS[trial % DEVIATION_LEVELS.len()]);
        let pert = Perturbation::random(&mut rng, level * (u_max + T::one()));
        worst = worst.max(deviation_gain(net, traj, i, &pert)?);
    }
    Ok(DeviationOutcome { agent: i, trials: count, worst_gain: worst, passed: worst <= tolerance })
}
