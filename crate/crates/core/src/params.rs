use crate::error::{Error, Result};

/// Physical and numerical scalars of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Density.
    pub rho: f64,
    /// Lamé parameters.
    pub mu: f64,
    pub lambda: f64,
    /// Viscosity coefficients of σ_vis = μ₁ sym(∇w) + μ₂ tr(sym(∇w)) I.
    pub mu1: f64,
    pub mu2: f64,
    /// Permeability over fluid viscosity.
    pub kappa: f64,
    /// Growth-relaxation rate, G = αε.
    pub alpha: f64,
    /// Pressure stabilization parameter.
    pub beta: f64,
    pub dt: f64,
    /// Ambient pressure on Γ₂.
    pub p0: f64,
}

impl Default for ModelParams {
    /// Unit-square benchmark values: 2μ = λ = 1, μ₁ = μ₂ = 1, ρ = α = 1, Δt = 0.1.
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 0.5,
            lambda: 1.0,
            mu1: 1.0,
            mu2: 1.0,
            kappa: 1e-2,
            alpha: 1.0,
            beta: 0.0,
            dt: 0.1,
            p0: 0.0,
        }
    }
}

impl ModelParams {
    /// Longitudinal modulus 2μ + λ.
    pub fn e_modulus(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// Total viscosity μ₁ + μ₂.
    pub fn mu_vis(&self) -> f64 {
        self.mu1 + self.mu2
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Checks the sign constraints; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("dt", self.dt),
            ("p0", self.p0),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be finite")));
        }
        let checks = [
            (self.rho > 0.0, "rho > 0"),
            (self.mu > 0.0, "mu > 0"),
            (self.lambda >= 0.0, "lambda >= 0"),
            (self.mu1 >= 0.0, "mu1 >= 0"),
            (self.mu2 >= 0.0, "mu2 >= 0"),
            (self.kappa > 0.0, "kappa > 0"),
            (self.dt > 0.0, "dt > 0"),
            (self.beta >= 0.0, "beta >= 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => Err(Error::InvalidInput(format!(
                "parameter constraint violated: {what}"
            ))),
            None => Ok(()),
        }
    }
}
