//! HHT-α time integration of `M d̈ + C ḋ + K d = F(t)`.
//!
//! The Newmark parameters follow α: `β = (1 − α)² / 4`, `γ = (1 − 2α) / 2`.
//! With `α = 0` the scheme is the trapezoidal rule. The effective matrix
//! depends only on `dt`, so it is factorized once.

use std::f64::consts::PI;

use crate::assembly::{apply_dirichlet, solve_static, ReducedSystem};
use crate::sparse::SparseMatrix;
use crate::{Error, Result, Vec2, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Full-size initial displacement, zero when absent.
    pub initial_displacement: Option<Vector>,
    /// Full-size initial velocity, zero when absent.
    pub initial_velocity: Option<Vector>,
}

impl DynamicsConfig {
    pub fn new(alpha: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = DynamicsConfig {
            alpha,
            dt,
            t_end,
            initial_displacement: None,
            initial_velocity: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0 / 3.0..=0.0).contains(&self.alpha) {
            return Err(Error::Argument(format!("alpha {} outside [-1/3, 0]", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Argument(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Argument(format!("end time must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha).powi(2) / 4.0
    }

    pub fn gamma(&self) -> f64 {
        (1.0 - 2.0 * self.alpha) / 2.0
    }

    /// Number of steps to reach `t_end`, rounding to the nearest step.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Scalar load factor `f(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant,
    /// `a t + b` for `t ≤ cutoff`, zero afterwards.
    RampCutoff { slope: f64, intercept: f64, cutoff: f64 },
    /// `cos(ω t)`.
    Harmonic { omega: f64 },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant => 1.0,
            Schedule::RampCutoff {
                slope,
                intercept,
                cutoff,
            } => {
                if t <= cutoff {
                    slope * t + intercept
                } else {
                    0.0
                }
            }
            Schedule::Harmonic { omega } => (omega * t).cos(),
        }
    }
}

/// `F(t) = f(t) F₀ + F_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadHistory {
    pub spatial: Vector,
    pub schedule: Schedule,
    /// Always-on part, typically gravity.
    pub constant: Vector,
}

impl LoadHistory {
    pub fn new(spatial: Vector, schedule: Schedule) -> Self {
        let n = spatial.len();
        LoadHistory {
            spatial,
            schedule,
            constant: Vector::zeros(n),
        }
    }

    pub fn with_constant(mut self, constant: Vector) -> Self {
        self.constant = constant;
        self
    }

    pub fn at(&self, t: f64) -> Vector {
        &self.spatial * self.schedule.value(t) + &self.constant
    }
}

/// Full-size mass, damping and stiffness with time-independent Dirichlet
/// constraints.
#[derive(Debug, Clone)]
pub struct DynamicSystem {
    pub m: SparseMatrix,
    pub c: SparseMatrix,
    pub k: SparseMatrix,
    pub constraints: Vec<(usize, f64)>,
}

impl DynamicSystem {
    pub fn num_dofs(&self) -> usize {
        self.k.nrows()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_dofs();
        for (name, a) in [("mass", &self.m), ("damping", &self.c), ("stiffness", &self.k)] {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Argument(format!(
                    "{name} matrix is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Static answer under `F(t)` at a fixed `t`.
    pub fn static_response(&self, loads: &LoadHistory, t: f64) -> Result<Vector> {
        let sys = apply_dirichlet(&self.k, &loads.at(t), &self.constraints)?;
        Ok(solve_static(&sys)?.u)
    }
}

/// Time history of a run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub probe_nodes: Vec<usize>,
    /// `probes[step][k]` is the displacement of `probe_nodes[k]`.
    pub probes: Vec<Vec<Vec2>>,
    /// `½ ḋᵀ M ḋ + ½ dᵀ K d` at every stored time.
    pub energy: Vec<f64>,
    /// Full states `(t, d)` every `snapshot_every` steps, if requested.
    pub snapshots: Vec<(f64, Vector)>,
    pub displacement: Vector,
    pub velocity: Vector,
    pub acceleration: Vector,
}

impl Trajectory {
    /// `t, u1, u2, ...` per probe node, one row per step.
    pub fn probe_csv(&self) -> String {
        let mut s = String::from("t");
        for n in &self.probe_nodes {
            s.push_str(&format!(",u1_{n},u2_{n}"));
        }
        s.push('\n');
        for (t, row) in self.times.iter().zip(&self.probes) {
            s.push_str(&format!("{t:.17e}"));
            for u in row {
                s.push_str(&format!(",{:.17e},{:.17e}", u.x, u.y));
            }
            s.push('\n');
        }
        s
    }
}

/// HHT-α integration from `t = 0` to `config.t_end`.
///
/// `probe_nodes` are recorded at every step; full displacement snapshots
/// are kept every `snapshot_every` steps when it is non-zero.
pub fn integrate(
    system: &DynamicSystem,
    loads: &LoadHistory,
    config: &DynamicsConfig,
    probe_nodes: &[usize],
    snapshot_every: usize,
) -> Result<Trajectory> {
    config.validate()?;
    system.check()?;
    let n = system.num_dofs();
    if loads.spatial.len() != n || loads.constant.len() != n {
        return Err(Error::Argument(format!("load vectors must have {n} entries")));
    }
    if let Some(&bad) = probe_nodes.iter().find(|&&p| 2 * p + 1 >= n) {
        return Err(Error::Argument(format!("probe node {bad} out of range")));
    }
    let full = |v: &Option<Vector>, what: &str| -> Result<Vector> {
        match v {
            Some(v) if v.len() != n => Err(Error::Argument(format!("{what} must have {n} entries"))),
            Some(v) => Ok(v.clone()),
            None => Ok(Vector::zeros(n)),
        }
    };
    let d_full = full(&config.initial_displacement, "initial displacement")?;
    let v_full = full(&config.initial_velocity, "initial velocity")?;

    // Prescribed values enter every step as the constant force -K_fc u_c.
    let zero = Vector::zeros(n);
    let base: ReducedSystem = apply_dirichlet(&system.k, &zero, &system.constraints)?;
    let free = &base.free;
    let m = system.m.select(free)?;
    let c = system.c.select(free)?;
    let k = system.k.select(free)?;
    let correction = &base.f;
    let force = |t: f64| base.restrict(&loads.at(t)) + correction;

    let (alpha, dt) = (config.alpha, config.dt);
    let (beta, gamma) = (config.beta(), config.gamma());

    let mut d = base.restrict(&d_full);
    let mut v = base.restrict(&v_full);
    let rhs0 = force(0.0) - c.mul_vec(&v) - k.mul_vec(&d);
    let mut a = m
        .factorize()
        .map_err(|e| Error::Singular(format!("mass matrix: {e}")))?
        .solve(&rhs0);

    let eff = m
        .linear_combination(1.0, &c, (1.0 + alpha) * gamma * dt)?
        .linear_combination(1.0, &k, (1.0 + alpha) * beta * dt * dt)?;
    let eff = eff
        .factorize()
        .map_err(|e| Error::Singular(format!("effective matrix: {e}")))?;

    let mut out = Trajectory {
        probe_nodes: probe_nodes.to_vec(),
        ..Default::default()
    };
    let record = |out: &mut Trajectory, step: usize, t: f64, d: &Vector, v: &Vector| {
        let u = base.expand(d);
        out.times.push(t);
        out.probes
            .push(probe_nodes.iter().map(|&p| Vec2::new(u[2 * p], u[2 * p + 1])).collect());
        out.energy
            .push(0.5 * v.dot(&m.mul_vec(v)) + 0.5 * d.dot(&k.mul_vec(d)));
        if snapshot_every > 0 && step % snapshot_every == 0 {
            out.snapshots.push((t, u));
        }
    };
    record(&mut out, 0, 0.0, &d, &v);

    let mut f_prev = force(0.0);
    for step in 1..=config.steps() {
        let t = step as f64 * dt;
        let f_next = force(t);
        let f_alpha = &f_next * (1.0 + alpha) - &f_prev * alpha;
        let d_pred = &d + &v * dt + &a * (0.5 * dt * dt * (1.0 - 2.0 * beta));
        let v_pred = &v + &a * (dt * (1.0 - gamma));
        let rhs = f_alpha - (c.mul_vec(&v_pred) + k.mul_vec(&d_pred)) * (1.0 + alpha)
            + (c.mul_vec(&v) + k.mul_vec(&d)) * alpha;
        a = eff.solve(&rhs);
        d = d_pred + &a * (beta * dt * dt);
        v = v_pred + &a * (gamma * dt);
        if !d.iter().all(|x| x.is_finite()) {
            return Err(Error::Singular(format!("non-finite displacement at t = {t}")));
        }
        record(&mut out, step, t, &d, &v);
        f_prev = f_next;
    }
    out.displacement = base.expand(&d);
    out.velocity = base.expand(&v);
    for &(g, _) in &base.prescribed {
        out.velocity[g] = 0.0;
    }
    out.acceleration = Vector::zeros(n);
    for (i, &g) in free.iter().enumerate() {
        out.acceleration[g] = a[i];
    }
    Ok(out)
}

/// Prismatic cantilever used for the first-frequency estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverBeam {
    pub length: f64,
    pub depth: f64,
    pub thickness: f64,
    pub young: f64,
    pub density: f64,
}

impl CantileverBeam {
    /// 3000 × 200 mm, 20 mm thick steel (N, mm, s, t).
    pub fn standard() -> Self {
        CantileverBeam {
            length: 3000.0,
            depth: 200.0,
            thickness: 20.0,
            young: 200_000.0,
            density: 7.85e-9,
        }
    }
}

/// First bending frequency in Hz by Euler–Bernoulli theory:
/// `f₁ = (1.875104² / 2π) √(E I / (ρ A L⁴))`.
pub fn lowest_frequency_estimate(beam: &CantileverBeam) -> f64 {
    let area = beam.thickness * beam.depth;
    let inertia = beam.thickness * beam.depth.powi(3) / 12.0;
    let root = 1.875104f64;
    root * root / (2.0 * PI) * (beam.young * inertia / (beam.density * area * beam.length.powi(4))).sqrt()
}

/// The step bound `(1 / f₁) / 30`.
pub fn admissible_time_step(beam: &CantileverBeam) -> f64 {
    1.0 / lowest_frequency_estimate(beam) / 30.0
}
