//! Open-loop Nash equilibrium of the opinion game as a two-point boundary
//! value problem in the stacked state/costate `(x, p)`:
//!
//! ```text
//! d/dt [x; p] = A [x; p] + K̂ [x(0); p(0)],   A = [[0, −I], [−W, 0]],   K̂ = [[0, 0], [K, 0]]
//! x(0) = x0,   p(T) = 0,   u = −p
//! ```
//!
//! Two block routes are provided: exponentials of `A` (any `W`) and the
//! eigen-decomposition route (real spectra only). `solve_equilibrium` uses a
//! backward sweep over exact exponential sub-steps so that the growing
//! `cosh(√λ t)` modes never cancel against each other.

use crate::error::{Error, Result};
use crate::graph::{build_matrices, GameMatrices, InfluenceNetwork};
use crate::kernels::{kernel_cosh, kernel_coshm1, kernel_sinhc};
use crate::linalg::{exp_with_integral, symmetric_eigen, DenseMatrix, LinalgConfig, Lu};
use crate::scalar::{count, lit, Real};

/// Default number of grid points (including both endpoints).
pub const DEFAULT_SAMPLES: usize = 501;

#[derive(Debug, Clone)]
pub struct StateCostateSystem<T> {
    pub a: DenseMatrix<T>,
    pub k_hat: DenseMatrix<T>,
}

impl<T: Real> StateCostateSystem<T> {
    pub fn n(&self) -> usize {
        self.a.rows() / 2
    }
}

pub fn assemble_system<T: Real>(gm: &GameMatrices<T>) -> StateCostateSystem<T> {
    let n = gm.n();
    let mut a = DenseMatrix::zeros(2 * n, 2 * n);
    a.set_block(0, n, &-&DenseMatrix::identity(n));
    a.set_block(n, 0, &-&gm.w);
    let mut k_hat = DenseMatrix::zeros(2 * n, 2 * n);
    k_hat.set_block(n, 0, &gm.k_matrix());
    StateCostateSystem { a, k_hat }
}

/// Partitions of `Φ(t) = e^{At}` and `Ψ(t) = ∫_0^t e^{A(t−τ)} dτ` together
/// with the `ζ` blocks that map `[x(0); p(0)]` to `[x(t); p(t)]`.
#[derive(Debug, Clone)]
pub struct BlockTransition<T> {
    pub t: T,
    pub phi11: DenseMatrix<T>,
    pub phi12: DenseMatrix<T>,
    pub phi21: DenseMatrix<T>,
    pub phi22: DenseMatrix<T>,
    pub psi12: DenseMatrix<T>,
    pub psi22: DenseMatrix<T>,
    pub zeta11: DenseMatrix<T>,
    pub zeta12: DenseMatrix<T>,
    pub zeta21: DenseMatrix<T>,
    pub zeta22: DenseMatrix<T>,
}

impl<T: Real> BlockTransition<T> {
    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        t: T,
        phi11: DenseMatrix<T>,
        phi12: DenseMatrix<T>,
        phi21: DenseMatrix<T>,
        phi22: DenseMatrix<T>,
        psi12: DenseMatrix<T>,
        psi22: DenseMatrix<T>,
        k: &DenseMatrix<T>,
    ) -> Self {
        let zeta11 = &phi11 + &(&psi12 * k);
        let zeta21 = &phi21 + &(&psi22 * k);
        let zeta12 = phi12.clone();
        let zeta22 = phi22.clone();
        Self { t, phi11, phi12, phi21, phi22, psi12, psi22, zeta11, zeta12, zeta21, zeta22 }
    }

    /// Largest entry of any block; the scale for relative comparisons.
    pub fn scale(&self) -> T {
        [&self.phi11, &self.phi12, &self.phi21, &self.phi22, &self.psi12, &self.psi22]
            .iter()
            .map(|m| m.max_abs())
            .fold(T::one(), T::max)
    }

    /// Worst relative defect of `φ22 = φ11`, `ψ22 = −φ12`, `φ21 = W φ12`.
    pub fn identity_defect(&self, w: &DenseMatrix<T>) -> T {
        let s = self.scale();
        let d1 = self.phi22.max_abs_diff(&self.phi11);
        let d2 = self.psi22.max_abs_diff(&-&self.phi12);
        let d3 = self.phi21.max_abs_diff(&(w * &self.phi12));
        d1.max(d2).max(d3) / s
    }

    /// Worst relative entrywise difference against another block set.
    pub fn max_relative_diff(&self, other: &Self) -> T {
        let pairs = [
            (&self.phi11, &other.phi11),
            (&self.phi12, &other.phi12),
            (&self.phi21, &other.phi21),
            (&self.phi22, &other.phi22),
            (&self.psi12, &other.psi12),
            (&self.psi22, &other.psi22),
            (&self.zeta11, &other.zeta11),
            (&self.zeta21, &other.zeta21),
        ];
        let s = self.scale().max(other.scale());
        pairs.iter().map(|(a, b)| a.max_abs_diff(b)).fold(T::zero(), T::max) / s
    }
}

/// Blocks from the exponential of `A` (valid for any `W`).
pub fn transition_blocks<T: Real>(
    sys: &StateCostateSystem<T>,
    gm: &GameMatrices<T>,
    t: T,
) -> Result<BlockTransition<T>> {
    let n = sys.n();
    if gm.n() != n {
        return Err(Error::DimensionMismatch(format!("system has n = {n}, matrices n = {}", gm.n())));
    }
    let (phi, psi) = exp_with_integral(&sys.a, t)?;
    Ok(BlockTransition::from_parts(
        t,
        phi.block(0, 0, n, n),
        phi.block(0, n, n, n),
        phi.block(n, 0, n, n),
        phi.block(n, n, n, n),
        psi.block(0, n, n, n),
        psi.block(n, n, n, n),
        &gm.k_matrix(),
    ))
}

/// Eigen-decomposition `W = V diag(λ) V⁻¹` with real eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    pub lambdas: Vec<T>,
    pub v: DenseMatrix<T>,
    pub v_inv: DenseMatrix<T>,
}

impl<T: Real> SpectralData<T> {
    /// Complete graph with common weight `w` and stubbornness `k`:
    /// `λ = k + n w` (multiplicity n − 1) with eigenvectors `e_j − e_n`,
    /// and `λ = k` with eigenvector `1`.
    pub fn complete_uniform(n: usize, w: T, k: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("complete graph needs n >= 2".into()));
        }
        let lambda1 = k + count::<T>(n) * w;
        let mut lambdas = vec![lambda1; n - 1];
        lambdas.push(k);
        let v = DenseMatrix::from_fn(n, n, |i, j| {
            if j == n - 1 || i == j {
                T::one()
            } else if i == n - 1 {
                -T::one()
            } else {
                T::zero()
            }
        });
        let v_inv = Lu::factor(&v)?.inverse();
        Ok(Self { lambdas, v, v_inv })
    }

    /// Single-leader network (agent 1 is the leader): `λ_i = q_i` and unit
    /// lower-triangular `V` with first column `ν_i1 = w_i1 / (q_i − q_1)`.
    pub fn single_leader(gm: &GameMatrices<T>) -> Result<Self> {
        let n = gm.n();
        let q1 = gm.q[0];
        let mut v = DenseMatrix::identity(n);
        let mut v_inv = DenseMatrix::identity(n);
        for i in 1..n {
            let w_i1 = -gm.w[(i, 0)];
            let gap = gm.q[i] - q1;
            if w_i1 != T::zero() && gap == T::zero() {
                return Err(Error::Unsupported(format!(
                    "agent {}: q_i equals the leader's q_1, eigenvector formula undefined",
                    i + 1
                )));
            }
            let nu = if w_i1 == T::zero() { T::zero() } else { w_i1 / gap };
            v[(i, 0)] = nu;
            v_inv[(i, 0)] = -nu;
        }
        Ok(Self { lambdas: gm.q.clone(), v, v_inv })
    }

    /// Symmetric `W` via Jacobi rotations.
    pub fn symmetric(w: &DenseMatrix<T>) -> Result<Self> {
        let (lambdas, v) = symmetric_eigen(w)?;
        let v_inv = v.transpose();
        Ok(Self { lambdas, v, v_inv })
    }

    /// Relative residual `‖W V − V Λ‖ / ‖W‖`.
    pub fn residual(&self, w: &DenseMatrix<T>) -> T {
        let lhs = w * &self.v;
        let rhs = &self.v * &DenseMatrix::from_diagonal(&self.lambdas);
        lhs.max_abs_diff(&rhs) / w.max_abs().max(T::min_positive_value())
    }

    fn conjugate(&self, diag: &[T]) -> DenseMatrix<T> {
        &(&self.v * &DenseMatrix::from_diagonal(diag)) * &self.v_inv
    }
}

/// Blocks from the closed-form kernels of each eigenvalue.
pub fn spectral_blocks<T: Real>(
    sd: &SpectralData<T>,
    gm: &GameMatrices<T>,
    t: T,
) -> Result<BlockTransition<T>> {
    if sd.lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::Unsupported("spectral route requires a real, finite spectrum".into()));
    }
    if sd.residual(&gm.w) > lit(1e-8) {
        return Err(Error::InvalidArgument("spectral data does not diagonalise W".into()));
    }
    let pi: Vec<T> = sd.lambdas.iter().map(|&l| kernel_cosh(l, t)).collect();
    let pi_hat: Vec<T> = sd.lambdas.iter().map(|&l| kernel_sinhc(l, t)).collect();
    let pi_tilde: Vec<T> = sd.lambdas.iter().map(|&l| kernel_coshm1(l, t)).collect();

    let phi11 = sd.conjugate(&pi);
    let phi12 = -&sd.conjugate(&pi_hat);
    let psi12 = -&sd.conjugate(&pi_tilde);
    let phi21 = &gm.w * &phi12;
    let phi22 = phi11.clone();
    let psi22 = -&phi12;
    Ok(BlockTransition::from_parts(t, phi11, phi12, phi21, phi22, psi12, psi22, &gm.k_matrix()))
}

/// `p(0) = −ζ22(T)⁻¹ ζ21(T) x0`, which enforces `p(T) = 0`.
pub fn initial_costate<T: Real>(bt_final: &BlockTransition<T>, x0: &[T]) -> Result<Vec<T>> {
    initial_costate_with(bt_final, x0, &LinalgConfig::default())
}

pub fn initial_costate_with<T: Real>(
    bt_final: &BlockTransition<T>,
    x0: &[T],
    config: &LinalgConfig,
) -> Result<Vec<T>> {
    if x0.len() != bt_final.zeta21.cols() {
        return Err(Error::DimensionMismatch(format!(
            "x0 has {} entries, blocks are {}x{}",
            x0.len(),
            bt_final.zeta21.rows(),
            bt_final.zeta21.cols()
        )));
    }
    let lu = Lu::factor(&bt_final.zeta22)?;
    lu.check_conditioning(config.rcond_threshold)?;
    let rhs: Vec<T> = bt_final.zeta21.mul_vec(x0).into_iter().map(|v| -v).collect();
    Ok(lu.solve_vec(&rhs))
}

/// Sampled equilibrium: one row per grid point, one column per agent.
#[derive(Debug, Clone)]
pub struct EquilibriumTrajectory<T> {
    pub grid: Vec<T>,
    pub x: DenseMatrix<T>,
    pub p: DenseMatrix<T>,
    pub u: DenseMatrix<T>,
}

impl<T: Real> EquilibriumTrajectory<T> {
    pub fn samples(&self) -> usize {
        self.grid.len()
    }

    pub fn agents(&self) -> usize {
        self.x.cols()
    }

    pub fn step(&self) -> T {
        self.grid[1] - self.grid[0]
    }

    pub fn opinion(&self, agent: usize) -> Vec<T> {
        self.x.column(agent)
    }

    pub fn terminal(&self) -> &[T] {
        self.x.row(self.samples() - 1)
    }

    /// Builds a trajectory from `x` and `p`, setting `u = −p`.
    pub fn from_state_costate(grid: Vec<T>, x: DenseMatrix<T>, p: DenseMatrix<T>) -> Result<Self> {
        if x.rows() != grid.len() || p.rows() != grid.len() || x.cols() != p.cols() {
            return Err(Error::DimensionMismatch("trajectory shapes disagree with grid".into()));
        }
        let u = -&p;
        Ok(Self { grid, x, p, u })
    }

    /// Everyone holds their initial opinion with zero costate.
    pub fn constant(net: &InfluenceNetwork<T>, samples: usize) -> Result<Self> {
        let grid = uniform_grid(net.horizon, samples)?;
        let x = DenseMatrix::from_fn(samples, net.n, |_, j| net.x0[j]);
        let p = DenseMatrix::zeros(samples, net.n);
        Self::from_state_costate(grid, x, p)
    }
}

/// `samples` equally spaced points on `[0, T]`, endpoints included.
pub fn uniform_grid<T: Real>(horizon: T, samples: usize) -> Result<Vec<T>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let last = samples - 1;
    Ok((0..samples)
        .map(|j| if j == last { horizon } else { horizon * count::<T>(j) / count::<T>(last) })
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub samples: usize,
    /// Upper bound on `√‖W‖∞ · h` for one exact sub-step of the sweep.
    pub max_substep_growth: f64,
    pub linalg: LinalgConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, max_substep_growth: 1.0, linalg: LinalgConfig::default() }
    }
}

pub fn solve_equilibrium<T: Real>(
    net: &InfluenceNetwork<T>,
    samples: usize,
) -> Result<EquilibriumTrajectory<T>> {
    solve_equilibrium_with(net, &SolverConfig { samples, ..SolverConfig::default() })
}

/// Equilibrium on a uniform grid.
///
/// The costate is carried as `p(t) = P(t) x(t) + r(t)`. `P, r` are swept
/// backwards from `P(T) = 0, r(T) = 0` through the exact one-step map
/// `z ↦ Φ(h) z + Ψ(h) [0; K x0]`; the forward pass then propagates `(x, p)`
/// one sub-step at a time, re-anchoring `p` to the sweep. The final costate
/// is the propagated value, so `p(T)` remains a genuine residual.
pub fn solve_equilibrium_with<T: Real>(
    net: &InfluenceNetwork<T>,
    config: &SolverConfig,
) -> Result<EquilibriumTrajectory<T>> {
    let gm = build_matrices(net)?;
    let sys = assemble_system(&gm);
    let grid = uniform_grid(net.horizon, config.samples)?;
    let n = net.n;
    let intervals = config.samples - 1;
    let h = net.horizon / count::<T>(intervals);

    let growth = gm.w.norm_inf().sqrt() * h / lit(config.max_substep_growth);
    let substeps = growth.ceil().to_usize().unwrap_or(1).max(1);
    let hs = h / count::<T>(substeps);
    let total = intervals * substeps;

    let (phi, psi) = exp_with_integral(&sys.a, hs)?;
    let a = phi.block(0, 0, n, n);
    let b = phi.block(0, n, n, n);
    let c = phi.block(n, 0, n, n);
    let d = phi.block(n, n, n, n);
    let kx0: Vec<T> = gm.k.iter().zip(&net.x0).map(|(&k, &x)| k * x).collect();
    let f = psi.block(0, n, n, n).mul_vec(&kx0);
    let g = psi.block(n, n, n, n).mul_vec(&kx0);

    let mut gains = vec![DenseMatrix::zeros(n, n); total + 1];
    let mut offsets = vec![vec![T::zero(); n]; total + 1];
    for j in (0..total).rev() {
        let p_next = &gains[j + 1];
        let r_next = &offsets[j + 1];
        let lu = Lu::factor(&(&d - &(p_next * &b)))?;
        lu.check_conditioning(config.linalg.rcond_threshold)?;
        let gain = lu.solve(&(&(p_next * &a) - &c));
        let pf = p_next.mul_vec(&f);
        let rhs: Vec<T> = (0..n).map(|i| pf[i] + r_next[i] - g[i]).collect();
        offsets[j] = lu.solve_vec(&rhs);
        gains[j] = gain;
    }

    let mut xs = DenseMatrix::zeros(config.samples, n);
    let mut ps = DenseMatrix::zeros(config.samples, n);
    let mut x = net.x0.clone();
    let mut p = add(&gains[0].mul_vec(&x), &offsets[0]);
    xs.row_mut(0).copy_from_slice(&x);
    ps.row_mut(0).copy_from_slice(&p);
    for j in 0..total {
        let x_next = add(&add(&a.mul_vec(&x), &b.mul_vec(&p)), &f);
        let p_prop = add(&add(&c.mul_vec(&x), &d.mul_vec(&p)), &g);
        p = if j + 1 == total { p_prop } else { add(&gains[j + 1].mul_vec(&x_next), &offsets[j + 1]) };
        x = x_next;
        if (j + 1) % substeps == 0 {
            let row = (j + 1) / substeps;
            xs.row_mut(row).copy_from_slice(&x);
            ps.row_mut(row).copy_from_slice(&p);
        }
    }
    EquilibriumTrajectory::from_state_costate(grid, xs, ps)
}

/// Single-shot evaluation `x(t) = [ζ11(t) − ζ12(t) ζ22(T)⁻¹ ζ21(T)] x0`.
///
/// Loses roughly `log10 cosh(√λ_max T)` digits to cancellation; use
/// [`solve_equilibrium`] for long horizons.
pub fn direct_trajectory<T: Real>(
    net: &InfluenceNetwork<T>,
    samples: usize,
) -> Result<EquilibriumTrajectory<T>> {
    let gm = build_matrices(net)?;
    let sys = assemble_system(&gm);
    let grid = uniform_grid(net.horizon, samples)?;
    let p0 = initial_costate(&transition_blocks(&sys, &gm, net.horizon)?, &net.x0)?;
    let mut xs = DenseMatrix::zeros(samples, net.n);
    let mut ps = DenseMatrix::zeros(samples, net.n);
    for (row, &t) in grid.iter().enumerate() {
        let bt = transition_blocks(&sys, &gm, t)?;
        let x = add(&bt.zeta11.mul_vec(&net.x0), &bt.zeta12.mul_vec(&p0));
        let p = add(&bt.zeta21.mul_vec(&net.x0), &bt.zeta22.mul_vec(&p0));
        xs.row_mut(row).copy_from_slice(&x);
        ps.row_mut(row).copy_from_slice(&p);
    }
    xs.row_mut(0).copy_from_slice(&net.x0);
    EquilibriumTrajectory::from_state_costate(grid, xs, ps)
}

fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn complete(n: usize, w: f64, k: f64, horizon: f64) -> InfluenceNetwork<f64> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    edges.push(Edge::new(i, j, w));
                }
            }
        }
        let x0 = (0..n).map(|i| 0.05 + 0.1 * i as f64).collect();
        InfluenceNetwork::new(n, horizon, x0, vec![k; n], edges)
    }

    #[test]
    fn single_agent_system_blocks() {
        let net = InfluenceNetwork::new(1, 1.0, vec![0.4], vec![0.7], vec![]);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        assert_eq!(sys.a, DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![-0.7, 0.0]]).unwrap());
        assert_eq!(sys.k_hat, DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![0.7, 0.0]]).unwrap());
    }

    #[test]
    fn system_structure() {
        let gm = build_matrices(&complete(3, 1.0, 0.5, 1.0)).unwrap();
        let sys = assemble_system(&gm);
        assert_eq!(sys.a.block(3, 0, 3, 3), -&gm.w);
        let trace: f64 = sys.a.diagonal().iter().sum();
        assert_eq!(trace, 0.0);
        assert_eq!(sys.a.block(0, 0, 3, 3).max_abs(), 0.0);
        assert_eq!(sys.a.block(3, 3, 3, 3).max_abs(), 0.0);
    }

    #[test]
    fn blocks_at_time_zero() {
        let gm = build_matrices(&complete(4, 2.0, 0.2, 5.0)).unwrap();
        let sys = assemble_system(&gm);
        let id = DenseMatrix::identity(4);
        for bt in [
            transition_blocks(&sys, &gm, 0.0).unwrap(),
            spectral_blocks(&SpectralData::complete_uniform(4, 2.0, 0.2).unwrap(), &gm, 0.0).unwrap(),
        ] {
            assert!(bt.zeta11.max_abs_diff(&id) <= 1e-15);
            assert!(bt.zeta22.max_abs_diff(&id) <= 1e-15);
            assert!(bt.zeta12.max_abs() <= 1e-15);
            assert!(bt.zeta21.max_abs() <= 1e-15);
            assert!(bt.psi12.max_abs() <= 1e-15 && bt.psi22.max_abs() <= 1e-15);
        }
    }

    #[test]
    fn scalar_blocks_are_hyperbolic() {
        let lambda: f64 = 1.7;
        let net = InfluenceNetwork::new(1, 3.0, vec![0.4], vec![lambda], vec![]);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        for t in [0.25, 1.0, 2.5] {
            let bt = transition_blocks(&sys, &gm, t).unwrap();
            let a = lambda.sqrt() * t;
            assert!((bt.phi11[(0, 0)] - a.cosh()).abs() <= 1e-13 * a.cosh());
            assert!((bt.phi12[(0, 0)] + a.sinh() / lambda.sqrt()).abs() <= 1e-13 * a.cosh());
        }
    }

    #[test]
    fn spectral_complete_uniform_matches_exponential() {
        let gm = build_matrices(&complete(5, 2.0, 0.2, 5.0)).unwrap();
        let sys = assemble_system(&gm);
        let sd = SpectralData::complete_uniform(5, 2.0, 0.2).unwrap();
        let mut lambdas = sd.lambdas.clone();
        lambdas.sort_by(f64::total_cmp);
        assert!((lambdas[0] - 0.2).abs() < 1e-15);
        assert!(lambdas[1..].iter().all(|&l| (l - 10.2).abs() < 1e-14));
        assert!(sd.residual(&gm.w) <= 1e-12);
        for t in [0.5, 2.0, 5.0] {
            let a = transition_blocks(&sys, &gm, t).unwrap();
            let b = spectral_blocks(&sd, &gm, t).unwrap();
            assert!(a.max_relative_diff(&b) <= 1e-10, "t={t}: {}", a.max_relative_diff(&b));
        }
    }

    #[test]
    fn spectral_leader_matches_exponential() {
        let edges = vec![Edge::new(1, 0, 2.0), Edge::new(2, 0, 0.5), Edge::new(3, 0, 1.2)];
        let net = InfluenceNetwork::new(4, 5.0, vec![0.05, 0.3, 0.6, 0.9], vec![0.2, 0.1, 0.4, 0.3], edges);
        let gm = build_matrices(&net).unwrap();
        let sd = SpectralData::single_leader(&gm).unwrap();
        assert!(sd.residual(&gm.w) <= 1e-12);
        assert!((&sd.v * &sd.v_inv).max_abs_diff(&DenseMatrix::identity(4)) <= 1e-14);
        let sys = assemble_system(&gm);
        for t in [0.3, 1.5, 5.0] {
            let a = transition_blocks(&sys, &gm, t).unwrap();
            let b = spectral_blocks(&sd, &gm, t).unwrap();
            assert!(a.max_relative_diff(&b) <= 1e-10);
        }
    }

    #[test]
    fn leader_with_equal_q_is_rejected() {
        let edges = vec![Edge::new(1, 0, 0.3)];
        let net = InfluenceNetwork::new(2, 1.0, vec![0.1, 0.2], vec![0.5, 0.2], edges);
        let gm = build_matrices(&net).unwrap();
        assert!(matches!(SpectralData::single_leader(&gm), Err(Error::Unsupported(_))));
    }

    #[test]
    fn block_identities_hold_on_exponential_route() {
        let edges = vec![Edge::new(0, 1, 0.3), Edge::new(1, 2, 1.7), Edge::new(2, 0, 0.9), Edge::new(0, 2, 2.0)];
        let net = InfluenceNetwork::new(3, 4.0, vec![0.0, 0.5, 1.0], vec![0.1, 0.0, 0.6], edges);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        for t in [0.0, 0.5, 2.0, 4.0] {
            assert!(transition_blocks(&sys, &gm, t).unwrap().identity_defect(&gm.w) <= 1e-10);
        }
    }

    #[test]
    fn decoupled_agents_have_zero_costate() {
        let net = InfluenceNetwork::new(3, 2.0, vec![0.1, 0.5, 0.9], vec![0.0; 3], vec![]);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        let bt = transition_blocks(&sys, &gm, 2.0).unwrap();
        assert_eq!(bt.zeta21.max_abs(), 0.0);
        assert_eq!(initial_costate(&bt, &net.x0).unwrap(), vec![0.0; 3]);
        let traj = solve_equilibrium(&net, 11).unwrap();
        for r in 0..11 {
            assert_eq!(traj.x.row(r), net.x0.as_slice());
            assert!(traj.u.row(r).iter().all(|&u| u == 0.0));
        }
    }

    #[test]
    fn single_stubborn_agent_stays_put() {
        let net = InfluenceNetwork::<f64>::new(1, 3.0, vec![0.4], vec![0.8], vec![]);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        let p0 = initial_costate(&transition_blocks(&sys, &gm, 3.0).unwrap(), &net.x0).unwrap();
        assert!(p0[0].abs() <= 1e-15);
        let traj = solve_equilibrium(&net, 31).unwrap();
        assert!(traj.x.column(0).iter().all(|&x| (x - 0.4).abs() <= 1e-15));
    }

    #[test]
    fn sweep_costate_matches_direct_formula_on_short_horizon() {
        let net = complete(4, 0.5, 0.1, 1.0);
        let sweep = solve_equilibrium(&net, 21).unwrap();
        let direct = direct_trajectory(&net, 21).unwrap();
        assert!(sweep.x.max_abs_diff(&direct.x) <= 1e-12);
        assert!(sweep.p.max_abs_diff(&direct.p) <= 1e-12);
    }

    #[test]
    fn initial_costate_agrees_with_sweep_on_long_horizon() {
        let net = complete(10, 2.0, 0.2, 5.0);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        let p0 = initial_costate(&transition_blocks(&sys, &gm, 5.0).unwrap(), &net.x0).unwrap();
        let traj = solve_equilibrium(&net, 101).unwrap();
        let scale = p0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in p0.iter().zip(traj.p.row(0)) {
            assert!((a - b).abs() <= 1e-6 * scale, "{a} vs {b}");
        }
        let p_t = traj.p.row(100);
        assert!(p_t.iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn rejects_tiny_grids_and_bad_networks() {
        let net = complete(3, 1.0, 0.1, 1.0);
        assert!(solve_equilibrium(&net, 1).is_err());
        let mut bad = net.clone();
        bad.edges.push(Edge::new(0, 0, 1.0));
        assert!(matches!(solve_equilibrium(&bad, 11), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = uniform_grid(5.0f64, 501).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[500], 5.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn works_in_single_precision() {
        let net = InfluenceNetwork::<f32>::new(
            2,
            1.0,
            vec![0.2, 0.8],
            vec![0.1, 0.1],
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)],
        );
        let traj = solve_equilibrium(&net, 11).unwrap();
        let mean = traj.terminal().iter().sum::<f32>() / 2.0;
        assert!((mean - 0.5).abs() < 1e-5);
        assert!(traj.p.row(10).iter().all(|v| v.abs() < 1e-4));
    }
}
