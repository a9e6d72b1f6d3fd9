//! Backward-Euler time stepping with a fixed-point loop for the strain
//! nonlinearity.
//!
//! Each pass solves the full (w, ε, p) system with the bilinear strain term
//! evaluated at the previous iterate. The system matrix therefore does not
//! change inside a step and is factored once.

use crate::assembly::{
    assemble_divergence, assemble_elastic, assemble_laplace, assemble_loads, assemble_mass,
    assemble_strain_coupling, assemble_strain_nonlinear, assemble_viscous, Constraints, DofLayout,
};
use crate::error::{Error, Result};
use crate::linsolve::{dense_inverse, LuSolver};
use crate::mesh::Mesh;
use crate::params::ModelParams;
use crate::sources::Sources;
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::tensor::{strain_rhs, Tensor2};

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainMode {
    /// Vertices never move.
    #[default]
    Fixed,
    /// Vertices follow the velocity after every step.
    Moving,
}

impl DomainMode {
    pub fn name(&self) -> &'static str {
        match self {
            DomainMode::Fixed => "fixed",
            DomainMode::Moving => "moving",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(DomainMode::Fixed),
            "moving" => Some(DomainMode::Moving),
            _ => None,
        }
    }
}

/// Nodal fields at one time level. Vector and strain fields are stacked
/// component-major (see [`DofLayout`]).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub w: Vec<f64>,
    pub eps: Vec<f64>,
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    pub mesh: Mesh,
}

impl State {
    /// Rest state with uniform pressure `p0`.
    pub fn at_rest(mesh: Mesh, p0: f64) -> Self {
        let layout = DofLayout::new(&mesh);
        Self {
            t: 0.0,
            w: vec![0.0; layout.n_w()],
            eps: vec![0.0; layout.n_eps()],
            p: vec![p0; layout.n_p()],
            u: vec![0.0; layout.n_w()],
            mesh,
        }
    }

    pub fn zero(mesh: Mesh) -> Self {
        Self::at_rest(mesh, 0.0)
    }

    pub fn layout(&self) -> DofLayout {
        DofLayout::new(&self.mesh)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.layout();
        let lens = [
            ("w", self.w.len(), l.n_w()),
            ("eps", self.eps.len(), l.n_eps()),
            ("p", self.p.len(), l.n_p()),
            ("u", self.u.len(), l.n_w()),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::InvalidInput(format!(
                    "state field {name} has length {got}, expected {want}"
                )));
            }
        }
        let finite = self.t.is_finite()
            && self
                .w
                .iter()
                .chain(&self.eps)
                .chain(&self.p)
                .chain(&self.u)
                .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput(
                "state contains non-finite values".into(),
            ));
        }
        Ok(())
    }

    /// Strain tensor at node `i`; slot 12 fills both off-diagonal entries.
    pub fn strain_at(&self, i: usize) -> Tensor2 {
        let nv = self.mesh.n_vertices();
        match self.mesh.dim() {
            1 => Tensor2::new1(self.eps[i]),
            _ => Tensor2::from_slots(self.eps[i], self.eps[nv + i], self.eps[2 * nv + i]),
        }
    }

    /// Largest absolute entry over all fields.
    pub fn max_abs(&self) -> f64 {
        self.w
            .iter()
            .chain(&self.eps)
            .chain(&self.p)
            .chain(&self.u)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub fixed_point_iters: usize,
    pub final_update_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub reports: Vec<StepReport>,
}

/// Matrices of one mesh and the factored, constrained system.
struct StepOperator {
    layout: DofLayout,
    mass_w: SparseMatrix,
    mass_eps: SparseMatrix,
    laplace: SparseMatrix,
    constraints: Constraints,
    lift: Vec<f64>,
    lu: LuSolver,
}

impl StepOperator {
    fn new(mesh: &Mesh, params: &ModelParams) -> Result<Self> {
        let layout = DofLayout::new(mesh);
        let dt = params.dt;
        let m = assemble_mass(mesh, 1);
        let mass_w = m.block_diag(layout.dim);
        let mass_eps = m.block_diag(layout.n_slots());
        let laplace = assemble_laplace(mesh);
        let div = assemble_divergence(mesh);
        let s_vis = assemble_viscous(mesh, params);
        let s_el = assemble_elastic(mesh, params);
        let b = assemble_strain_coupling(mesh);

        let (ow, oe, op) = (0, layout.eps_offset(), layout.p_offset());
        let n = layout.total();
        let mut k = TripletBuilder::with_capacity(n, n, 0);
        k.add_block(ow, ow, &mass_w, params.rho);
        k.add_block(ow, ow, &s_vis, dt);
        k.add_block(ow, oe, &s_el, dt);
        k.add_block(ow, op, &div.transpose(), -dt);
        k.add_block(oe, ow, &b, -dt);
        k.add_block(oe, oe, &mass_eps, 1.0 + params.alpha * dt);
        k.add_block(op, ow, &div, 1.0);
        k.add_block(op, op, &laplace, params.kappa + params.beta);
        let k = k.build();

        let constraints = Constraints::essential(mesh, params);
        let (k, lift) = constraints.apply_matrix(&k);
        let lu = LuSolver::factor(&k)?;
        Ok(Self {
            layout,
            mass_w,
            mass_eps,
            laplace,
            constraints,
            lift,
            lu,
        })
    }
}

/// Advances states with fixed parameters and sources.
pub struct TimeStepper<'a> {
    params: ModelParams,
    sources: &'a dyn Sources,
    mode: DomainMode,
    tol: f64,
    max_iters: usize,
}

impl<'a> TimeStepper<'a> {
    pub fn new(params: ModelParams, sources: &'a dyn Sources) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            sources,
            mode: DomainMode::Fixed,
            tol: FIXED_POINT_TOL,
            max_iters: FIXED_POINT_MAX_ITERS,
        })
    }

    pub fn with_mode(mut self, mode: DomainMode) -> Self {
        self.mode = mode;
        self
    }

    /// Overrides the fixed-point stopping rule.
    pub fn with_iteration_control(mut self, tol: f64, max_iters: usize) -> Self {
        self.tol = tol;
        self.max_iters = max_iters.max(1);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mode(&self) -> DomainMode {
        self.mode
    }

    pub fn step(&self, state: &State) -> Result<(State, StepReport)> {
        state.validate()?;
        let op = StepOperator::new(&state.mesh, &self.params)?;
        self.step_with(&op, state)
    }

    /// Applies `step` `n_steps` times, calling `observer` after each step.
    pub fn run(
        &self,
        initial: &State,
        n_steps: usize,
        observer: &mut dyn FnMut(&State, &StepReport),
    ) -> Result<RunSummary> {
        if n_steps == 0 {
            return Err(Error::InvalidInput("n_steps must be at least 1".into()));
        }
        initial.validate()?;
        let mut state = initial.clone();
        let mut reports = Vec::with_capacity(n_steps);
        let mut cached: Option<StepOperator> = None;
        for index in 0..n_steps {
            let wrap = |e: Error| Error::Step {
                index,
                source: Box::new(e),
            };
            // the fixed-domain operator never changes, a moving mesh needs a new one
            if cached.is_none() || self.mode == DomainMode::Moving {
                cached = Some(StepOperator::new(&state.mesh, &self.params).map_err(wrap)?);
            }
            let op = cached.as_ref().expect("operator built above");
            let (next, report) = self.step_with(op, &state).map_err(wrap)?;
            observer(&next, &report);
            reports.push(report);
            state = next;
        }
        Ok(RunSummary {
            final_state: state,
            reports,
        })
    }

    fn step_with(&self, op: &StepOperator, state: &State) -> Result<(State, StepReport)> {
        let p = &self.params;
        let layout = op.layout;
        let mesh = &state.mesh;
        let t_new = state.t + p.dt;

        let (bw, bp) = assemble_loads(mesh, p, t_new, self.sources);
        let mw = op.mass_w.mul_vec(&state.w);
        let me = op.mass_eps.mul_vec(&state.eps);
        let lp = op.laplace.mul_vec(&state.p);
        let mut base = Vec::with_capacity(layout.total());
        base.extend(mw.iter().zip(&bw).map(|(m, b)| p.rho * m + p.dt * b));
        base.extend_from_slice(&me);
        base.extend(lp.iter().zip(&bp).map(|(l, b)| p.beta * l + b));

        let mut x: Vec<f64> = state
            .w
            .iter()
            .chain(&state.eps)
            .chain(&state.p)
            .copied()
            .collect();
        let mut update = f64::INFINITY;
        let mut iters = 0;
        while iters < self.max_iters {
            iters += 1;
            let (w, eps, _) = layout.split(&x);
            let nl = assemble_strain_nonlinear(mesh, w, eps);
            let mut rhs = base.clone();
            for (r, v) in rhs[layout.eps_offset()..layout.p_offset()]
                .iter_mut()
                .zip(&nl)
            {
                *r -= p.dt * v;
            }
            if !nl.iter().all(|v| v.is_finite()) {
                // the iterates blew up: divergence, not a singular operator
                return Err(Error::NonConvergence {
                    iterations: iters,
                    update_norm: f64::INFINITY,
                });
            }
            let rhs = op.constraints.apply_rhs(&rhs, &op.lift);
            let next = op.lu.solve(&rhs)?;
            update = relative_change(&x, &next);
            x = next;
            if update <= self.tol {
                break;
            }
        }
        if !(update <= self.tol) {
            return Err(Error::NonConvergence {
                iterations: iters,
                update_norm: update,
            });
        }

        let (w, eps, pr) = layout.split(&x);
        let u: Vec<f64> = state.u.iter().zip(w).map(|(u, w)| u + p.dt * w).collect();
        let mesh = match self.mode {
            DomainMode::Fixed => state.mesh.clone(),
            DomainMode::Moving => state.mesh.move_vertices(w, p.dt)?,
        };
        let next = State {
            t: t_new,
            w: w.to_vec(),
            eps: eps.to_vec(),
            p: pr.to_vec(),
            u,
            mesh,
        };
        Ok((
            next,
            StepReport {
                fixed_point_iters: iters,
                final_update_norm: update,
                converged: true,
            },
        ))
    }
}

/// ‖new − old‖∞ / ‖new‖∞, zero when nothing changed.
fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let diff = old
        .iter()
        .zip(new)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if diff == 0.0 {
        return 0.0;
    }
    let scale = new.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    diff / scale
}

/// One step with default iteration control.
pub fn step(
    state: &State,
    params: &ModelParams,
    sources: &dyn Sources,
) -> Result<(State, StepReport)> {
    TimeStepper::new(*params, sources)?.step(state)
}

/// Nodal strain tensors stored with all four entries, so the skew part is free
/// to develop. Used to check that the strain law preserves symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct FullStrainField {
    pub tensors: Vec<Tensor2>,
}

impl FullStrainField {
    pub fn from_state(state: &State) -> Self {
        Self {
            tensors: (0..state.mesh.n_vertices())
                .map(|i| state.strain_at(i))
                .collect(),
        }
    }

    /// Backward-Euler step of Dε/Dt = strain_rhs(ε, ∇w) at every node, with
    /// the velocity gradient held fixed over the step.
    pub fn advance(&self, gradients: &[Tensor2], alpha: f64, dt: f64) -> Result<Self> {
        if gradients.len() != self.tensors.len() {
            return Err(Error::InvalidInput(
                "gradient count does not match node count".into(),
            ));
        }
        let tensors = self
            .tensors
            .iter()
            .zip(gradients)
            .map(|(eps, g)| backward_euler_strain(eps, g, alpha, dt))
            .collect::<Result<_>>()?;
        Ok(Self { tensors })
    }
}

fn backward_euler_strain(eps: &Tensor2, grad: &Tensor2, alpha: f64, dt: f64) -> Result<Tensor2> {
    let d = eps.dim();
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
    let f0 = strain_rhs(&Tensor2::zeros(d), grad, alpha)?;
    // the law is affine in ε: F(ε) = J ε + F(0)
    let mut jac = vec![vec![0.0; slots.len()]; slots.len()];
    for (k, &(a, b)) in slots.iter().enumerate() {
        let mut e = Tensor2::zeros(d);
        e.set(a, b, 1.0);
        let col = strain_rhs(&e, grad, alpha)? - f0;
        for (r, &(i, j)) in slots.iter().enumerate() {
            jac[r][k] = -dt * col.get(i, j) + if r == k { 1.0 } else { 0.0 };
        }
    }
    let inv = dense_inverse(&jac)?;
    let rhs: Vec<f64> = slots
        .iter()
        .map(|&(i, j)| eps.get(i, j) + dt * f0.get(i, j))
        .collect();
    let mut out = Tensor2::zeros(d);
    for (r, &(i, j)) in slots.iter().enumerate() {
        out.set(i, j, inv[r].iter().zip(&rhs).map(|(a, b)| a * b).sum());
    }
    Ok(out)
}
