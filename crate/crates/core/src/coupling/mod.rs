//! The coupling problem for a finite set of nonzero reals.
//!
//! Given `sigma` and coupling constants `eta` in `R ∪ {∞}`, find real
//! polynomials `phi_minus`, `phi_plus` with
//!
//! - `phi_minus(l) = eta(l) phi_plus(l)` on `sigma` (`phi_plus(l) = 0` when
//!   `eta(l) = ∞`),
//! - `z phi_minus phi_plus / W` Herglotz-Nevanlinna,
//! - `phi_minus(0) = phi_plus(0) = 1`.
//!
//! Admissible data (`eta(l) / (l W'(l)) <= 0` wherever `eta` is finite)
//! always has exactly one solution, built by [`solve`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::herglotz::{ContinuedFraction, HerglotzError};
use crate::poly::Polynomial;
use crate::scalar::{cmp_scalar, Scalar};

mod solve;
mod stability;
mod truncate;
mod verify;

pub use solve::{reduce, solve, solve_general, solve_strict, solve_with, Reduction, SolveOptions};
pub use stability::{perturb, stability_distances};
pub use truncate::{
    circle_grid, grid_distance, solve_truncated, LadderStep, TruncatedSolution, TruncationOptions,
};
pub use verify::{halton, sample_points, verify, CheckResult, VerificationReport, VerifyOptions};

/// Value of a coupling constant.
#[derive(Clone, Debug, PartialEq)]
pub enum Coupling<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Coupling<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Coupling::Finite(v) => Some(v),
            Coupling::Infinite => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite().is_some_and(|v| v.is_zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Coupling::Infinite)
    }
}

impl<T: fmt::Display> fmt::Display for Coupling<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Finite(v) => v.fmt(f),
            Coupling::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CouplingError {
    #[error("sigma contains zero")]
    ZeroLambda,
    #[error("sigma contains {lambda} twice")]
    DuplicateLambda { lambda: String },
    #[error("sigma and eta have different lengths ({sigma} vs {eta})")]
    LengthMismatch { sigma: usize, eta: usize },
    #[error("coupling constants are not admissible at lambda = {lambda}")]
    NotAdmissible { lambda: String },
    #[error("the strict solver needs finite nonzero coupling constants")]
    HasZeroOrInfiniteEta,
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(&'static str),
    #[error(transparent)]
    Expansion(#[from] HerglotzError),
    #[error("no solution: phi_plus does not vanish at {}", points.join(", "))]
    NoSolution { points: Vec<String> },
    #[error("no convergence after {steps} truncations (last discrepancy {discrepancy:e})")]
    BudgetExhausted { steps: usize, discrepancy: f64 },
    #[error("invalid option: {0}")]
    InvalidOptions(&'static str),
}

/// Finite set `sigma` (sorted, nonzero, distinct) with a coupling constant
/// attached to every point.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingData<T> {
    sigma: Vec<T>,
    eta: Vec<Coupling<T>>,
}

impl<T: Scalar> CouplingData<T> {
    /// Sorts the points by `lambda` and validates them.
    pub fn new(mut points: Vec<(T, Coupling<T>)>) -> Result<Self, CouplingError> {
        points.sort_by(|a, b| cmp_scalar(&a.0, &b.0));
        if points.iter().any(|(l, _)| l.is_zero()) {
            return Err(CouplingError::ZeroLambda);
        }
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(CouplingError::DuplicateLambda {
                lambda: w[0].0.to_string(),
            });
        }
        let (sigma, eta) = points.into_iter().unzip();
        Ok(CouplingData { sigma, eta })
    }

    pub fn from_parts(sigma: Vec<T>, eta: Vec<Coupling<T>>) -> Result<Self, CouplingError> {
        if sigma.len() != eta.len() {
            return Err(CouplingError::LengthMismatch {
                sigma: sigma.len(),
                eta: eta.len(),
            });
        }
        CouplingData::new(sigma.into_iter().zip(eta).collect())
    }

    pub fn empty() -> Self {
        CouplingData {
            sigma: Vec::new(),
            eta: Vec::new(),
        }
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn eta(&self) -> &[Coupling<T>] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (&T, &Coupling<T>)> {
        self.sigma.iter().zip(&self.eta)
    }

    /// `W = prod (1 - z / lambda)` over `sigma`.
    pub fn wronskian(&self) -> Polynomial<T> {
        build_w(&self.sigma)
    }
}

/// Solution of a coupling problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPair<T> {
    pub phi_minus: Polynomial<T>,
    pub phi_plus: Polynomial<T>,
    pub trace: Option<SolverTrace<T>>,
}

impl<T: Scalar> SolutionPair<T> {
    pub fn new(phi_minus: Polynomial<T>, phi_plus: Polynomial<T>) -> Self {
        SolutionPair {
            phi_minus,
            phi_plus,
            trace: None,
        }
    }
}

/// Intermediate data of the construction, kept for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace<T> {
    /// Expansion of the Step-1 function of the reduced problem.
    pub cf: ContinuedFraction<T>,
    /// Pivot index, 1-based; zero when the reduced problem is empty.
    pub n0: usize,
    pub delta: T,
    /// Points with zero coupling constant.
    pub sigma_minus: Vec<T>,
    /// Points with infinite coupling constant.
    pub sigma_plus: Vec<T>,
}

/// `prod (1 - z / lambda)`.
pub fn build_w<T: Scalar>(sigma: &[T]) -> Polynomial<T> {
    Polynomial::from_unit_roots(sigma)
}

/// `eta(l) / (l W'(l))` at a point of `sigma`, for finite `eta`.
pub(crate) fn admissibility_ratio<T: Scalar>(eta: &T, lambda: &T, dw: &Polynomial<T>) -> T {
    eta.clone() / (lambda.clone() * dw.eval(lambda))
}

/// First point where admissibility fails, if any.
pub fn first_inadmissible<T: Scalar>(data: &CouplingData<T>) -> Option<&T> {
    let dw = data.wronskian().derivative();
    data.points()
        .find(|(l, e)| {
            e.finite()
                .is_some_and(|v| admissibility_ratio(v, l, &dw).is_positive())
        })
        .map(|(l, _)| l)
}

pub fn is_admissible<T: Scalar>(data: &CouplingData<T>) -> bool {
    first_inadmissible(data).is_none()
}
