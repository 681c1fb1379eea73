use alloc::vec::Vec;

use super::{solve, Coupling, CouplingData, CouplingError, SolutionPair};
use crate::poly::Polynomial;
use crate::scalar::{cmp_scalar, Rational, Scalar};

/// Controls the truncation ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationOptions {
    /// Radius of the comparison circle.
    pub radius: f64,
    /// Number of equally spaced points on the comparison circle.
    pub grid_points: usize,
    /// Cutoffs on `|lambda|`; `None` uses every distinct modulus in turn.
    pub schedule: Option<Vec<Rational>>,
    /// Stop once successive truncations differ by less than this on the
    /// grid.
    pub tol: f64,
    /// Maximal number of truncated problems to solve.
    pub budget: usize,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            radius: 1.0,
            grid_points: 32,
            schedule: None,
            tol: 1e-8,
            budget: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderStep {
    /// Cutoff on `|lambda|`.
    pub cutoff: Rational,
    /// Number of points kept.
    pub points: usize,
    /// Grid distance to the previous rung; infinite on the first rung.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSolution<T> {
    pub pair: SolutionPair<T>,
    pub steps: Vec<LadderStep>,
    /// Last discrepancy.
    pub discrepancy: f64,
    /// The last rung kept every point, so `pair` solves the full problem.
    pub exact: bool,
}

/// `count` equally spaced points on the circle `|z| = radius`.
pub fn circle_grid(count: usize, radius: f64) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let t = core::f64::consts::TAU * k as f64 / count as f64;
            (radius * libm::cos(t), radius * libm::sin(t))
        })
        .collect()
}

fn eval_f64(p: &[f64], z: (f64, f64)) -> (f64, f64) {
    p.iter().rev().fold((0.0, 0.0), |(re, im), c| {
        (re * z.0 - im * z.1 + c, re * z.1 + im * z.0)
    })
}

/// Largest `|a - b|` over both components and the grid, evaluated in
/// double precision. By the maximum principle this bounds the distance on
/// the whole disk.
pub fn grid_distance<T: Scalar>(
    a: &SolutionPair<T>,
    b: &SolutionPair<T>,
    grid: &[(f64, f64)],
) -> f64 {
    let diff = |x: &Polynomial<T>, y: &Polynomial<T>| -> Vec<f64> {
        (x - y).coeffs().iter().map(Scalar::to_f64).collect()
    };
    let dm = diff(&a.phi_minus, &b.phi_minus);
    let dp = diff(&a.phi_plus, &b.phi_plus);
    grid.iter()
        .flat_map(|&z| [eval_f64(&dm, z), eval_f64(&dp, z)])
        .map(|(re, im)| libm::hypot(re, im))
        .fold(0.0, f64::max)
}

/// Solves the problems obtained by keeping the points with `|lambda|` up to
/// successive cutoffs, until two consecutive solutions agree on the grid.
///
/// Locally uniform convergence of the truncations is guaranteed for
/// admissible data, but no rate is, so the stopping rule is a heuristic.
pub fn solve_truncated<T: Scalar>(
    full: &[(T, Coupling<T>)],
    opts: &TruncationOptions,
) -> Result<TruncatedSolution<T>, CouplingError> {
    if opts.grid_points == 0
        || opts.radius.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater)
        || opts.tol.is_nan()
    {
        return Err(CouplingError::InvalidOptions(
            "grid, radius and tolerance must be positive",
        ));
    }
    let mut points: Vec<(T, Coupling<T>)> = full.to_vec();
    points.sort_by(|a, b| cmp_scalar(&a.0.abs(), &b.0.abs()));
    let moduli: Vec<Rational> = points.iter().map(|(l, _)| l.abs().to_rational()).collect();
    let schedule = match &opts.schedule {
        Some(s) => s.clone(),
        None => {
            let mut s = moduli.clone();
            s.dedup();
            s
        }
    };
    let grid = circle_grid(opts.grid_points, opts.radius);
    let mut prev: Option<SolutionPair<T>> = None;
    let mut steps = Vec::new();
    for cutoff in schedule {
        if steps.len() >= opts.budget {
            return Err(CouplingError::BudgetExhausted {
                steps: steps.len(),
                discrepancy: steps
                    .last()
                    .map_or(f64::INFINITY, |s: &LadderStep| s.discrepancy),
            });
        }
        let kept = moduli.iter().take_while(|m| **m <= cutoff).count();
        let data = CouplingData::new(points[..kept].to_vec())?;
        let pair = solve(&data)?;
        let discrepancy = prev
            .as_ref()
            .map_or(f64::INFINITY, |p| grid_distance(&pair, p, &grid));
        steps.push(LadderStep {
            cutoff,
            points: kept,
            discrepancy,
        });
        // an infinite tolerance accepts the first rung too
        let accept = discrepancy < opts.tol || opts.tol == f64::INFINITY;
        if accept {
            return Ok(TruncatedSolution {
                pair,
                steps,
                discrepancy,
                exact: kept == points.len(),
            });
        }
        prev = Some(pair);
    }
    let last = steps.last().map_or(0, |s| s.points);
    if last == points.len() {
        let discrepancy = steps.last().map_or(0.0, |s| s.discrepancy);
        Ok(TruncatedSolution {
            pair: prev.unwrap_or_else(|| SolutionPair::new(Polynomial::one(), Polynomial::one())),
            steps,
            discrepancy,
            exact: true,
        })
    } else {
        Err(CouplingError::BudgetExhausted {
            steps: steps.len(),
            discrepancy: steps.last().map_or(f64::INFINITY, |s| s.discrepancy),
        })
    }
}
