//! Body forces, fluid sources and boundary data.

use std::f64::consts::PI;

/// Right-hand-side data of the model. Every term defaults to zero.
///
/// In 1D only the first component of vector-valued data is used.
pub trait Sources: Sync {
    /// Body force f_u(t, x).
    fn body_force(&self, _t: f64, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Fluid injection/extraction f_p(t, x).
    fn fluid_source(&self, _t: f64, _x: [f64; 2]) -> f64 {
        0.0
    }

    /// Prescribed fluid flux g_N on Γ₁.
    fn boundary_flux(&self, _t: f64, _x: [f64; 2]) -> f64 {
        0.0
    }

    /// Traction f_b on Γ₂.
    fn traction(&self, _t: f64, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Named source presets available from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scenario {
    /// Vertical body force f_u = (0, e^{-t} sin(2πt)), homogeneous everything else.
    #[default]
    PaperBodyForce,
    /// All sources zero.
    Unforced,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::PaperBodyForce => "paper_bodyforce",
            Scenario::Unforced => "unforced",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "paper_bodyforce" => Some(Scenario::PaperBodyForce),
            "unforced" | "zero" => Some(Scenario::Unforced),
            _ => None,
        }
    }
}

impl Sources for Scenario {
    fn body_force(&self, t: f64, _x: [f64; 2]) -> [f64; 2] {
        match self {
            Scenario::PaperBodyForce => [0.0, (-t).exp() * (2.0 * PI * t).sin()],
            Scenario::Unforced => [0.0, 0.0],
        }
    }
}
