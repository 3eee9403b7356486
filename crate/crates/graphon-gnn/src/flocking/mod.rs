//! Planar flocking: agent dynamics, communication graphs, the
//! collision-avoidance potential, the centralized expert controller, and
//! the per-agent feature map used for imitation learning.
//!
//! Agents are double integrators in the plane. A communication link
//! exists between agents within `comm_radius` of each other; the
//! communication graph's GSO is what a learned controller operates on.
//! The expert steers every velocity toward the swarm mean while a
//! short-range potential keeps agents apart.

mod rollout;

pub use rollout::{
    generate_dataset, relative_cost, rollout, trajectory_csv_header, ImitationTask, Policy,
    RelativeCost, Trajectory, TrajectoryStep,
};

use nalgebra::{DMatrix, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::SampledGraph;
use crate::seed;

fn default_comm_radius() -> f64 {
    2.0
}

fn default_ca_radius() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    0.02
}

fn default_u_bound() -> f64 {
    10.0
}

fn default_min_init_dist() -> f64 {
    0.1
}

fn default_vel_range() -> f64 {
    3.0
}

/// Swarm geometry, dynamics timing, and the initial-condition
/// distribution. Unknown JSON keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlockConfig {
    /// Communication radius in meters: agents closer than this are linked.
    #[serde(default = "default_comm_radius")]
    pub comm_radius: f64,
    /// Radius in meters below which the collision-avoidance potential is
    /// active.
    #[serde(default = "default_ca_radius")]
    pub ca_radius: f64,
    /// Integration interval in seconds.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Per-axis acceleration clamp in m/s^2 for learned policy actions.
    /// The centralized expert is exempt; see [`expert_controller`].
    #[serde(default = "default_u_bound")]
    pub u_bound: f64,
    /// Minimum pairwise distance in meters enforced at initialization.
    #[serde(default = "default_min_init_dist")]
    pub min_init_dist: f64,
    /// Radius of the disc agents start in. Defaults to sqrt(n/pi), which
    /// keeps the initial density at one agent per square meter at every
    /// swarm size.
    #[serde(default)]
    pub init_disc_radius: Option<f64>,
    /// Half-width in m/s of the common velocity bias, drawn once per
    /// swarm, uniform per axis.
    #[serde(default = "default_vel_range")]
    pub vel_bias_range: f64,
    /// Half-width in m/s of the per-agent velocity perturbation.
    #[serde(default = "default_vel_range")]
    pub vel_noise_range: f64,
    /// Episode length in steps.
    pub horizon: usize,
    /// Use the interaction term with the sign it is usually written with
    /// flipped: the potential gradient itself (attractive) instead of its
    /// negation. Exists for comparison runs; collisions are expected.
    #[serde(default)]
    pub literal_ca_sign: bool,
}

impl Default for FlockConfig {
    fn default() -> Self {
        FlockConfig {
            comm_radius: default_comm_radius(),
            ca_radius: default_ca_radius(),
            dt: default_dt(),
            u_bound: default_u_bound(),
            min_init_dist: default_min_init_dist(),
            init_disc_radius: None,
            vel_bias_range: default_vel_range(),
            vel_noise_range: default_vel_range(),
            horizon: 100,
            literal_ca_sign: false,
        }
    }
}

impl FlockConfig {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("comm_radius", self.comm_radius),
            ("ca_radius", self.ca_radius),
            ("dt", self.dt),
            ("u_bound", self.u_bound),
            ("min_init_dist", self.min_init_dist),
            ("vel_bias_range", self.vel_bias_range),
            ("vel_noise_range", self.vel_noise_range),
        ];
        for (name, value) in positives {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if let Some(r) = self.init_disc_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!(
                    "init_disc_radius must be positive and finite, got {r}"
                )));
            }
        }
        if self.ca_radius > self.comm_radius {
            return Err(Error::config(format!(
                "ca_radius {} exceeds comm_radius {}",
                self.ca_radius, self.comm_radius
            )));
        }
        Ok(())
    }

    /// Initial-placement disc radius for a swarm of `n` agents.
    pub fn disc_radius(&self, n: usize) -> f64 {
        self.init_disc_radius.unwrap_or_else(|| (n as f64 / std::f64::consts::PI).sqrt())
    }
}

/// Positions and velocities of the swarm at one time step, both `n x 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlockState {
    positions: DMatrix<f64>,
    velocities: DMatrix<f64>,
    t: usize,
}

impl FlockState {
    pub fn new(positions: DMatrix<f64>, velocities: DMatrix<f64>) -> Result<Self> {
        if positions.ncols() != 2 || velocities.ncols() != 2 {
            return Err(Error::shape(format!(
                "positions and velocities must have 2 columns, got {} and {}",
                positions.ncols(),
                velocities.ncols()
            )));
        }
        if positions.nrows() != velocities.nrows() || positions.nrows() == 0 {
            return Err(Error::shape(format!(
                "need matching non-empty agent counts, got {} positions and {} velocities",
                positions.nrows(),
                velocities.nrows()
            )));
        }
        if !positions.iter().chain(velocities.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "flock state".to_string(),
                sample_index: None,
            });
        }
        Ok(FlockState { positions, velocities, t: 0 })
    }

    pub fn n(&self) -> usize {
        self.positions.nrows()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn positions(&self) -> &DMatrix<f64> {
        &self.positions
    }

    pub fn velocities(&self) -> &DMatrix<f64> {
        &self.velocities
    }

    pub fn position(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.positions[(i, 0)], self.positions[(i, 1)])
    }

    pub fn velocity(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.velocities[(i, 0)], self.velocities[(i, 1)])
    }

    pub fn mean_velocity(&self) -> Vector2<f64> {
        let n = self.n() as f64;
        Vector2::new(self.velocities.column(0).sum() / n, self.velocities.column(1).sum() / n)
    }

    /// Smallest pairwise distance, or infinity for a single agent.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                min = min.min((self.position(i) - self.position(j)).norm());
            }
        }
        min
    }
}

/// Places `n` agents uniformly in the configured disc with all pairwise
/// distances at least `min_init_dist`, then draws velocities as a common
/// per-axis bias plus per-agent perturbations. Deterministic per seed.
pub fn init_swarm(n: usize, config: &FlockConfig, seed_value: u64) -> Result<FlockState> {
    config.validate()?;
    if n == 0 {
        return Err(Error::domain("init_swarm needs n >= 1"));
    }
    const MAX_ATTEMPTS: usize = 1_000_000;
    let radius = config.disc_radius(n);
    let mut rng = seed::stream(seed_value, &[seed::tag::SWARM]);
    let mut positions = DMatrix::zeros(n, 2);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < n {
        if attempts >= MAX_ATTEMPTS {
            return Err(Error::Placement {
                n,
                min_dist: config.min_init_dist,
                attempts: MAX_ATTEMPTS,
            });
        }
        attempts += 1;
        let x = rng.gen_range(-radius..radius);
        let y = rng.gen_range(-radius..radius);
        if x * x + y * y > radius * radius {
            continue;
        }
        let candidate = Vector2::new(x, y);
        let clear = (0..placed).all(|i| {
            (candidate - Vector2::new(positions[(i, 0)], positions[(i, 1)])).norm()
                >= config.min_init_dist
        });
        if clear {
            positions[(placed, 0)] = x;
            positions[(placed, 1)] = y;
            placed += 1;
        }
    }
    let b = config.vel_bias_range;
    let bias = Vector2::new(rng.gen_range(-b..b), rng.gen_range(-b..b));
    let w = config.vel_noise_range;
    let mut velocities = DMatrix::zeros(n, 2);
    for i in 0..n {
        velocities[(i, 0)] = bias.x + rng.gen_range(-w..w);
        velocities[(i, 1)] = bias.y + rng.gen_range(-w..w);
    }
    FlockState::new(positions, velocities)
}

/// Builds the communication graph: an undirected edge wherever two
/// distinct agents are within `comm_radius` (inclusive). The returned
/// graph provides the adjacency and its GSO `A/n`.
pub fn comm_graph(positions: &DMatrix<f64>, comm_radius: f64) -> Result<SampledGraph> {
    if positions.ncols() != 2 || positions.nrows() == 0 {
        return Err(Error::shape(format!(
            "positions must be a non-empty n x 2 matrix, got {} x {}",
            positions.nrows(),
            positions.ncols()
        )));
    }
    if comm_radius <= 0.0 || comm_radius.is_nan() {
        return Err(Error::domain(format!("comm_radius must be positive, got {comm_radius}")));
    }
    let n = positions.nrows();
    let mut adjacency = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = positions[(i, 0)] - positions[(j, 0)];
            let dy = positions[(i, 1)] - positions[(j, 1)];
            if (dx * dx + dy * dy).sqrt() <= comm_radius {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    SampledGraph::stochastic(adjacency)
}

/// Collision-avoidance potential and its gradient with respect to `r_i`.
///
/// For `d = ||r_i - r_j|| <= ca_radius` the potential is
/// `1/d^2 - log(d^2)` and the gradient is `-2 (r_i - r_j) (1/d^4 + 1/d^2)`;
/// beyond `ca_radius` the potential continues as the constant boundary
/// value (so it stays continuous) and the gradient vanishes.
pub fn ca_potential_and_gradient(
    r_i: Vector2<f64>,
    r_j: Vector2<f64>,
    ca_radius: f64,
) -> Result<(f64, Vector2<f64>)> {
    if ca_radius <= 0.0 || ca_radius.is_nan() {
        return Err(Error::domain(format!("ca_radius must be positive, got {ca_radius}")));
    }
    let diff = r_i - r_j;
    let d2 = diff.norm_squared();
    if d2 == 0.0 {
        return Err(Error::Singularity { i: 0, j: 0, step: None });
    }
    if d2 <= ca_radius * ca_radius {
        let value = 1.0 / d2 - d2.ln();
        let grad = -2.0 * diff * (1.0 / (d2 * d2) + 1.0 / d2);
        Ok((value, grad))
    } else {
        let r2 = ca_radius * ca_radius;
        Ok((1.0 / r2 - r2.ln(), Vector2::zeros()))
    }
}

fn with_agent_indices(err: Error, i: usize, j: usize) -> Error {
    match err {
        Error::Singularity { step, .. } => Error::Singularity { i, j, step },
        other => other,
    }
}

/// The centralized expert: each agent accelerates toward the mean swarm
/// velocity while close pairs repel through the potential term. The
/// interaction sums over all pairs (the expert is centralized), though
/// terms vanish beyond `ca_radius`.
///
/// Expert actions are deliberately not clamped: near-contact repulsion
/// needs its full magnitude to keep agents separated, and capping it at
/// `u_bound` lets the saturated consensus term steer agents into each
/// other during the initial transient. Learned policies live in the
/// plant's action box and are clamped in `rollout`; imitation targets
/// are projected onto the same box in `generate_dataset`.
pub fn expert_controller(state: &FlockState, config: &FlockConfig) -> Result<DMatrix<f64>> {
    config.validate()?;
    let n = state.n();
    let v_bar = state.mean_velocity();
    let mut actions = DMatrix::zeros(n, 2);
    for i in 0..n {
        let mut u = -(n as f64) * (state.velocity(i) - v_bar);
        for j in 0..n {
            if j == i {
                continue;
            }
            let (_, grad) =
                ca_potential_and_gradient(state.position(i), state.position(j), config.ca_radius)
                    .map_err(|e| with_agent_indices(e, i, j))?;
            u += if config.literal_ca_sign { grad } else { -grad };
        }
        actions[(i, 0)] = u.x;
        actions[(i, 1)] = u.y;
    }
    Ok(actions)
}

/// Advances the double integrator one step:
/// `r' = u dt^2 / 2 + v dt + r`, `v' = u dt + v`.
pub fn step_dynamics(state: &FlockState, actions: &DMatrix<f64>, dt: f64) -> Result<FlockState> {
    let n = state.n();
    if actions.nrows() != n || actions.ncols() != 2 {
        return Err(Error::shape(format!(
            "actions must be {n} x 2, got {} x {}",
            actions.nrows(),
            actions.ncols()
        )));
    }
    if !actions.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { context: "actions".to_string(), sample_index: None });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive and finite, got {dt}")));
    }
    let positions = actions * (dt * dt / 2.0) + state.velocities() * dt + state.positions();
    let velocities = actions * dt + state.velocities();
    let mut next = FlockState::new(positions, velocities)?;
    next.t = state.t + 1;
    Ok(next)
}

/// Per-agent imitation features, `n x 6`: the neighbor sums of
/// `[v_i - v_j, r_ij/||r_ij||^4, r_ij/||r_ij||^2]` with `r_ij = r_i - r_j`.
/// Isolated agents get zero rows.
pub fn agent_features(state: &FlockState, adjacency: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = state.n();
    if adjacency.nrows() != n || adjacency.ncols() != n {
        return Err(Error::shape(format!(
            "adjacency is {} x {} but the state has {n} agents",
            adjacency.nrows(),
            adjacency.ncols()
        )));
    }
    let mut features = DMatrix::zeros(n, 6);
    for i in 0..n {
        for j in 0..n {
            if adjacency[(i, j)] == 0.0 {
                continue;
            }
            let dv = state.velocity(i) - state.velocity(j);
            let dr = state.position(i) - state.position(j);
            let d2 = dr.norm_squared();
            if d2 == 0.0 {
                return Err(Error::Singularity { i, j, step: None });
            }
            features[(i, 0)] += dv.x;
            features[(i, 1)] += dv.y;
            features[(i, 2)] += dr.x / (d2 * d2);
            features[(i, 3)] += dr.y / (d2 * d2);
            features[(i, 4)] += dr.x / d2;
            features[(i, 5)] += dr.y / d2;
        }
    }
    Ok(features)
}

/// Velocity variation of the team: the summed squared deviation of agent
/// velocities from the swarm mean. Zero exactly at velocity consensus.
pub fn velocity_variation(state: &FlockState) -> f64 {
    let v_bar = state.mean_velocity();
    (0..state.n()).map(|i| (state.velocity(i) - v_bar).norm_squared()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config() -> FlockConfig {
        FlockConfig::default()
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = config();
        assert_eq!(cfg.comm_radius, 2.0);
        assert_eq!(cfg.ca_radius, 1.0);
        assert_eq!(cfg.dt, 0.02);
        assert_eq!(cfg.u_bound, 10.0);
        assert_eq!(cfg.min_init_dist, 0.1);
        assert!(cfg.validate().is_ok());

        let mut bad = config();
        bad.ca_radius = 3.0;
        assert!(bad.validate().is_err());
        let mut bad = config();
        bad.dt = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = config();
        bad.init_disc_radius = Some(-1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_is_strict() {
        let cfg: FlockConfig = serde_json::from_str(r#"{"horizon": 50}"#).unwrap();
        assert_eq!(cfg.horizon, 50);
        assert_eq!(cfg.comm_radius, 2.0);
        assert!(serde_json::from_str::<FlockConfig>(r#"{"horizon": 50, "commradius": 1}"#).is_err());
        assert!(serde_json::from_str::<FlockConfig>(r#"{}"#).is_err());
    }

    #[test]
    fn disc_radius_default_tracks_density() {
        let cfg = config();
        assert_abs_diff_eq!(
            cfg.disc_radius(25),
            (25.0 / std::f64::consts::PI).sqrt(),
            epsilon = 1e-12
        );
        let mut fixed = config();
        fixed.init_disc_radius = Some(7.0);
        assert_eq!(fixed.disc_radius(25), 7.0);
    }

    #[test]
    fn init_swarm_single_agent_velocity_range() {
        for seed_value in 0..20 {
            let state = init_swarm(1, &config(), seed_value).unwrap();
            let v = state.velocity(0);
            assert!(v.x.abs() <= 6.0 && v.y.abs() <= 6.0, "velocity {v:?} out of range");
            let r = state.position(0).norm();
            assert!(r <= config().disc_radius(1));
        }
    }

    #[test]
    fn init_swarm_respects_min_distance() {
        for seed_value in 0..5 {
            let state = init_swarm(50, &config(), seed_value).unwrap();
            assert!(state.min_pairwise_distance() >= 0.1);
        }
    }

    #[test]
    fn init_swarm_is_deterministic() {
        let a = init_swarm(12, &config(), 9).unwrap();
        let b = init_swarm(12, &config(), 9).unwrap();
        assert_eq!(a, b);
        let c = init_swarm(12, &config(), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_swarm_overcrowded_disc_fails() {
        let mut cramped = config();
        cramped.init_disc_radius = Some(0.2);
        cramped.min_init_dist = 0.5;
        match init_swarm(20, &cramped, 0) {
            Err(Error::Placement { n, .. }) => assert_eq!(n, 20),
            other => panic!("expected placement error, got {other:?}"),
        }
    }

    #[test]
    fn comm_graph_three_point_line() {
        let positions = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 5.0, 0.0]);
        let graph = comm_graph(&positions, 2.0).unwrap();
        let a = graph.adjacency();
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 0)], 1.0);
        assert_eq!(a[(0, 2)], 0.0);
        assert_eq!(a[(1, 2)], 0.0);
        assert_eq!(a.diagonal().sum(), 0.0);
    }

    #[test]
    fn comm_graph_close_swarm_is_complete() {
        let positions = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 0.1, 0.0, 0.0, 0.1]);
        let graph = comm_graph(&positions, 2.0).unwrap();
        assert_eq!(graph.edge_density(), 1.0);
        let single = comm_graph(&DMatrix::zeros(1, 2), 2.0).unwrap();
        assert_eq!(single.adjacency().sum(), 0.0);
    }

    #[test]
    fn comm_graph_matches_brute_force() {
        let state = init_swarm(30, &config(), 3).unwrap();
        let graph = comm_graph(state.positions(), 2.0).unwrap();
        let a = graph.adjacency();
        for i in 0..30 {
            for j in 0..30 {
                let expected = if i != j && (state.position(i) - state.position(j)).norm() <= 2.0 {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(a[(i, j)], expected, "edge ({i}, {j})");
                assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn ca_potential_hand_values() {
        // d = 0.5 toward the origin: value 4 + log 4, gradient (-20, 0).
        let (value, grad) =
            ca_potential_and_gradient(Vector2::new(0.5, 0.0), Vector2::zeros(), 1.0).unwrap();
        assert_abs_diff_eq!(value, 4.0 + 4.0_f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(grad.x, -20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grad.y, 0.0, epsilon = 1e-12);

        // Beyond the cutoff: the constant branch.
        let (value, grad) =
            ca_potential_and_gradient(Vector2::new(1.5, 0.0), Vector2::zeros(), 1.0).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(grad, Vector2::zeros());
    }

    #[test]
    fn ca_potential_continuous_at_cutoff() {
        let at =
            ca_potential_and_gradient(Vector2::new(1.0, 0.0), Vector2::zeros(), 1.0).unwrap().0;
        assert_abs_diff_eq!(at, 1.0, epsilon = 1e-12);
        let just_outside =
            ca_potential_and_gradient(Vector2::new(1.0 + 1e-9, 0.0), Vector2::zeros(), 1.0)
                .unwrap()
                .0;
        let just_inside =
            ca_potential_and_gradient(Vector2::new(1.0 - 1e-9, 0.0), Vector2::zeros(), 1.0)
                .unwrap()
                .0;
        assert_abs_diff_eq!(just_outside, just_inside, epsilon = 1e-7);

        // Same continuity at a non-unit cutoff.
        let r = 0.7;
        let inside =
            ca_potential_and_gradient(Vector2::new(r - 1e-9, 0.0), Vector2::zeros(), r).unwrap().0;
        let outside =
            ca_potential_and_gradient(Vector2::new(r + 1e-9, 0.0), Vector2::zeros(), r).unwrap().0;
        assert_abs_diff_eq!(inside, outside, epsilon = 1e-6);
    }

    #[test]
    fn ca_gradient_matches_finite_differences() {
        let h = 1e-6;
        for &d in &[0.2, 0.5, 0.9] {
            // Angle the pair so both components are exercised.
            let r_j = Vector2::new(0.3, -0.2);
            let r_i = r_j + Vector2::new(d * 0.6, d * 0.8);
            let (_, grad) = ca_potential_and_gradient(r_i, r_j, 1.0).unwrap();
            for axis in 0..2 {
                let mut plus = r_i;
                let mut minus = r_i;
                plus[axis] += h;
                minus[axis] -= h;
                let fp = ca_potential_and_gradient(plus, r_j, 1.0).unwrap().0;
                let fm = ca_potential_and_gradient(minus, r_j, 1.0).unwrap().0;
                let numeric = (fp - fm) / (2.0 * h);
                assert_abs_diff_eq!(grad[axis], numeric, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn ca_potential_rejects_coincident_points() {
        let p = Vector2::new(0.4, 0.4);
        match ca_potential_and_gradient(p, p, 1.0) {
            Err(Error::Singularity { step: None, .. }) => {}
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn expert_two_agent_consensus() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 0.0]);
        let velocities = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let state = FlockState::new(positions, velocities).unwrap();
        let u = expert_controller(&state, &config()).unwrap();
        assert_abs_diff_eq!(u[(0, 0)], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(1, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn expert_consensus_reached_is_zero() {
        let positions = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 3.0, 0.0, 0.0, 3.0]);
        let velocities = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let state = FlockState::new(positions, velocities).unwrap();
        let u = expert_controller(&state, &config()).unwrap();
        assert!(u.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn expert_actions_stay_unclamped() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 5.0, 0.0]);
        let velocities = DMatrix::from_row_slice(2, 2, &[7.5, -1.5, -7.5, 1.5]);
        let state = FlockState::new(positions, velocities).unwrap();
        // Consensus action for agent 0 is (-15, 3), past the policy clamp.
        let u = expert_controller(&state, &config()).unwrap();
        assert_abs_diff_eq!(u[(0, 0)], -15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(0, 1)], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn expert_repulsion_pushes_apart_unless_literal() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        let velocities = DMatrix::zeros(2, 2);
        let state = FlockState::new(positions, velocities).unwrap();
        let u = expert_controller(&state, &config()).unwrap();
        assert!(u[(0, 0)] > 0.0, "agent 0 should be pushed in +x, got {}", u[(0, 0)]);
        assert!(u[(1, 0)] < 0.0);

        let mut literal = config();
        literal.literal_ca_sign = true;
        let u = expert_controller(&state, &literal).unwrap();
        assert!(u[(0, 0)] < 0.0, "literal sign should attract, got {}", u[(0, 0)]);
    }

    #[test]
    fn dynamics_hand_step() {
        let state = FlockState::new(
            DMatrix::from_row_slice(1, 2, &[0.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        )
        .unwrap();
        let u = DMatrix::from_row_slice(1, 2, &[10.0, 0.0]);
        let next = step_dynamics(&state, &u, 0.02).unwrap();
        assert_abs_diff_eq!(next.positions()[(0, 0)], 0.022, epsilon = 1e-15);
        assert_abs_diff_eq!(next.velocities()[(0, 0)], 1.2, epsilon = 1e-15);
        assert_eq!(next.t(), 1);
    }

    #[test]
    fn dynamics_ballistic_and_linear_in_time() {
        let state = FlockState::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[0.5, -0.25, 1.0, 2.0]),
        )
        .unwrap();
        let zero = DMatrix::zeros(2, 2);
        let one = step_dynamics(&state, &zero, 0.02).unwrap();
        assert_eq!(one.velocities(), state.velocities());
        let two = step_dynamics(&one, &zero, 0.02).unwrap();
        let direct = step_dynamics(&state, &zero, 0.04).unwrap();
        assert_abs_diff_eq!((two.positions() - direct.positions()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dynamics_position_recoverable() {
        // r is recoverable from (r', v, u): r = r' - u dt^2/2 - v dt.
        let state = FlockState::new(
            DMatrix::from_row_slice(1, 2, &[0.3, -0.8]),
            DMatrix::from_row_slice(1, 2, &[2.0, 1.0]),
        )
        .unwrap();
        let u = DMatrix::from_row_slice(1, 2, &[-4.0, 9.0]);
        let dt = 0.02;
        let next = step_dynamics(&state, &u, dt).unwrap();
        let recovered = next.positions() - &u * (dt * dt / 2.0) - state.velocities() * dt;
        assert_abs_diff_eq!((recovered - state.positions()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dynamics_rejects_non_finite_actions() {
        let state = FlockState::new(DMatrix::zeros(1, 2), DMatrix::zeros(1, 2)).unwrap();
        let u = DMatrix::from_row_slice(1, 2, &[f64::NAN, 0.0]);
        assert!(step_dynamics(&state, &u, 0.02).is_err());
    }

    #[test]
    fn features_hand_value() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let velocities = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let state = FlockState::new(positions, velocities).unwrap();
        let adjacency = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let x = agent_features(&state, &adjacency).unwrap();
        let expected = [1.0, 0.0, -1.0, 0.0, -1.0, 0.0];
        for (col, want) in expected.iter().enumerate() {
            assert_abs_diff_eq!(x[(0, col)], *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn features_isolated_agent_is_zero() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 50.0, 0.0]);
        let velocities = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let state = FlockState::new(positions, velocities).unwrap();
        let graph = comm_graph(state.positions(), 2.0).unwrap();
        let x = agent_features(&state, graph.adjacency()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn features_symmetric_neighbors_cancel_position_terms() {
        let positions = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        let velocities = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.5, 0.0, 0.5, 0.0]);
        let state = FlockState::new(positions, velocities).unwrap();
        let graph = comm_graph(state.positions(), 1.5).unwrap();
        let x = agent_features(&state, graph.adjacency()).unwrap();
        // Agent 0 sees both neighbors; their position terms cancel.
        assert_abs_diff_eq!(x[(0, 0)], 3.0, epsilon = 1e-12);
        for col in 2..6 {
            assert_abs_diff_eq!(x[(0, col)], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn features_are_permutation_equivariant() {
        let state = init_swarm(15, &config(), 6).unwrap();
        let graph = comm_graph(state.positions(), 2.0).unwrap();
        let x = agent_features(&state, graph.adjacency()).unwrap();

        // Reverse-order relabeling.
        let n = state.n();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut pos_p = DMatrix::zeros(n, 2);
        let mut vel_p = DMatrix::zeros(n, 2);
        for (new_i, &old_i) in perm.iter().enumerate() {
            for c in 0..2 {
                pos_p[(new_i, c)] = state.positions()[(old_i, c)];
                vel_p[(new_i, c)] = state.velocities()[(old_i, c)];
            }
        }
        let state_p = FlockState::new(pos_p, vel_p).unwrap();
        let graph_p = comm_graph(state_p.positions(), 2.0).unwrap();
        let x_p = agent_features(&state_p, graph_p.adjacency()).unwrap();
        for (new_i, &old_i) in perm.iter().enumerate() {
            for c in 0..6 {
                assert_abs_diff_eq!(x_p[(new_i, c)], x[(old_i, c)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn features_detect_collisions() {
        let positions = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let velocities = DMatrix::zeros(2, 2);
        let state = FlockState::new(positions, velocities).unwrap();
        let graph = comm_graph(state.positions(), 2.0).unwrap();
        match agent_features(&state, graph.adjacency()) {
            Err(Error::Singularity { i: 0, j: 1, step: None }) => {}
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn velocity_variation_values() {
        let positions = DMatrix::zeros(2, 2);
        let equal = FlockState::new(
            positions.clone(),
            DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 1.5, -2.0]),
        )
        .unwrap();
        assert_eq!(velocity_variation(&equal), 0.0);

        let opposed =
            FlockState::new(positions, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]))
                .unwrap();
        assert_abs_diff_eq!(velocity_variation(&opposed), 2.0, epsilon = 1e-12);

        let doubled = FlockState::new(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, -2.0, 0.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(velocity_variation(&doubled), 8.0, epsilon = 1e-12);
    }
}
