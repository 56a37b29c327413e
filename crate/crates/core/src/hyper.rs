use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Prior hyperparameters and sampler tuning constants.
///
/// Priors: `beta ~ N(xi, psi)`, `tau_g ~ Gamma(alpha/2, rate delta/2)`,
/// `mu_g | tau_g ~ N_d(0, omega2 / tau_g I)`, `lambda ~ Dirichlet(nu, ..., nu)`
/// and `G ~ Poisson(1)` truncated to `1..=g_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Hyperparams<T: Real> {
    pub xi: T,
    pub psi: T,
    pub alpha: T,
    pub delta: T,
    pub nu: T,
    pub omega2: T,
    /// Latent space dimension.
    pub d: usize,
    /// Largest number of mixture components the sampler may visit.
    pub g_max: usize,
    /// Per-coordinate variance of the random-walk position proposal.
    pub sigma_z2: T,
    /// Variance of the random-walk intercept proposal.
    pub sigma_beta2: T,
    /// Parameter `a` of the symmetric Beta(a, a) used by ejection.
    pub a_eject: T,
}

impl<T: Real> Hyperparams<T> {
    /// Default settings for a network of `n` actors: `xi = 0, psi = 2,
    /// alpha = 2, delta = 0.103, nu = 3, omega2 = 10, d = 2`,
    /// `g_max = floor(n / 2)` (at least 1) and `a_eject = 1`.
    ///
    /// The proposal variances default to 1 and are expected to be tuned.
    pub fn defaults_for(n: usize) -> Self {
        Self {
            xi: T::zero(),
            psi: T::of(2.0),
            alpha: T::of(2.0),
            delta: T::of(0.103),
            nu: T::of(3.0),
            omega2: T::of(10.0),
            d: 2,
            g_max: (n / 2).max(1),
            sigma_z2: T::one(),
            sigma_beta2: T::one(),
            a_eject: T::one(),
        }
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_g_max(mut self, g_max: usize) -> Self {
        self.g_max = g_max;
        self
    }

    pub fn with_proposals(mut self, sigma_z2: T, sigma_beta2: T) -> Self {
        self.sigma_z2 = sigma_z2;
        self.sigma_beta2 = sigma_beta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("psi", self.psi),
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("nu", self.nu),
            ("omega2", self.omega2),
            ("sigma_z2", self.sigma_z2),
            ("sigma_beta2", self.sigma_beta2),
            ("a_eject", self.a_eject),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.xi.is_finite() {
            return Err(invalid("xi must be finite"));
        }
        if self.d == 0 {
            return Err(invalid("latent dimension d must be at least 1"));
        }
        if self.g_max == 0 {
            return Err(invalid("g_max must be at least 1"));
        }
        Ok(())
    }

    /// Probability of attempting an ejection (rather than an absorption)
    /// when the chain has `g` components.
    pub fn eject_probability(&self, g: usize) -> T {
        if g >= self.g_max {
            T::zero()
        } else if g <= 1 {
            T::one()
        } else {
            T::of(0.5)
        }
    }

    pub(crate) fn inv_omega2(&self) -> T {
        T::one() / self.omega2
    }
}
