use std::fmt;
use std::sync::Arc;

use crate::numeric::linalg::Mat2;

/// Phase point `(q1, q2, p1, p2)`.
pub type Phase = [f64; 4];

/// Inner dynamics on the unperturbed separatrix, `q' = K(q) ∇S(q)`.
#[derive(Clone)]
pub struct Separatrix {
    pub grad_s: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
    pub kinetic: Arc<dyn Fn([f64; 2]) -> Mat2 + Send + Sync>,
}

impl Separatrix {
    pub fn momentum(&self, q: [f64; 2]) -> [f64; 2] {
        (self.grad_s)(q)
    }

    pub fn velocity(&self, q: [f64; 2]) -> [f64; 2] {
        crate::numeric::linalg::mul_vec(&(self.kinetic)(q), &(self.grad_s)(q))
    }
}

type Family = Arc<dyn Fn(f64, f64) -> Phase + Send + Sync>;

/// A perturbation `H*` together with the loop family of a resonant torus
/// of homoclinic loops.
#[derive(Clone)]
pub struct PerturbationModel {
    pub h_star: Arc<dyn Fn(&Phase) -> f64 + Send + Sync>,
    /// `x̄(t, s)`, with `x̄(0, s)` lying over `κ(s)`.
    pub loop_family: Family,
    pub kappa: Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
    /// Exponential rate at which family members approach the equilibrium.
    pub decay_rate: f64,
    /// Multiplies `|s|` when sizing the time window.
    pub time_scale: f64,
    /// Integrands of the first two `s`-derivatives of the reduced potential.
    pub family_derivatives: Option<Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>>,
    pub separatrix: Option<Separatrix>,
    pub origin: Phase,
}

impl fmt::Debug for PerturbationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationModel")
            .field("decay_rate", &self.decay_rate)
            .field("time_scale", &self.time_scale)
            .field("family_derivatives", &self.family_derivatives.is_some())
            .field("separatrix", &self.separatrix.is_some())
            .finish()
    }
}

impl PerturbationModel {
    pub fn new(
        h_star: impl Fn(&Phase) -> f64 + Send + Sync + 'static,
        loop_family: impl Fn(f64, f64) -> Phase + Send + Sync + 'static,
        kappa: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        decay_rate: f64,
    ) -> Self {
        Self {
            h_star: Arc::new(h_star),
            loop_family: Arc::new(loop_family),
            kappa: Arc::new(kappa),
            decay_rate,
            time_scale: 1.0,
            family_derivatives: None,
            separatrix: None,
            origin: [0.0; 4],
        }
    }

    pub fn with_time_scale(mut self, scale: f64) -> Self {
        self.time_scale = scale;
        self
    }

    pub fn with_family_derivatives(mut self, d: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        self.family_derivatives = Some(Arc::new(d));
        self
    }

    pub fn with_separatrix(mut self, s: Separatrix) -> Self {
        self.separatrix = Some(s);
        self
    }

    pub fn h_star_origin(&self) -> f64 {
        (self.h_star)(&self.origin)
    }
}
