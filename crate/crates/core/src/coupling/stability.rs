use alloc::vec::Vec;

use super::{circle_grid, grid_distance, solve, Coupling, CouplingData, CouplingError};
use crate::scalar::Scalar;

/// `η_k(λ) = η(λ) (1 + 2^{-k} u_λ)`. Zero and infinite constants are left
/// alone. With `|u_λ| < 1` the factor is positive, so admissibility is
/// preserved.
pub fn perturb<T: Scalar>(data: &CouplingData<T>, u: &[T], k: u32) -> CouplingData<T> {
    let step = (0..k).fold(T::one(), |acc, _| acc / T::from_i64(2));
    let eta = data
        .eta()
        .iter()
        .zip(u)
        .map(|(e, u)| match e {
            Coupling::Finite(v) => Coupling::Finite(v.clone() * (T::one() + step.clone() * u)),
            Coupling::Infinite => Coupling::Infinite,
        })
        .collect();
    CouplingData::from_parts(data.sigma().to_vec(), eta).expect("same sigma")
}

/// Grid distance between `solve(perturb(data, u, k))` and `solve(data)` for
/// `k = 1..=steps`, on `grid_points` points of the circle `|z| = radius`.
pub fn stability_distances<T: Scalar>(
    data: &CouplingData<T>,
    u: &[T],
    steps: u32,
    radius: f64,
    grid_points: usize,
) -> Result<Vec<f64>, CouplingError> {
    if u.len() != data.len() {
        return Err(CouplingError::InvalidOptions(
            "one perturbation per point is required",
        ));
    }
    let grid = circle_grid(grid_points, radius);
    let target = solve(data)?;
    (1..=steps)
        .map(|k| Ok(grid_distance(&solve(&perturb(data, u, k))?, &target, &grid)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, Rational};
    use alloc::vec;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn perturbation_keeps_special_values() {
        let d = CouplingData::new(vec![
            (q("1"), Coupling::Finite(q("2"))),
            (q("2"), Coupling::Finite(q("0"))),
            (q("3"), Coupling::Infinite),
        ])
        .unwrap();
        let p = perturb(&d, &[q("1/2"), q("1/2"), q("1/2")], 2);
        assert_eq!(
            p.eta(),
            &[
                Coupling::Finite(q("9/4")),
                Coupling::Finite(q("0")),
                Coupling::Infinite
            ]
        );
    }

    #[test]
    fn distances_shrink() {
        let d = CouplingData::new(vec![
            (q("-2"), Coupling::Finite(q("3"))),
            (q("1"), Coupling::Finite(q("1/2"))),
        ])
        .unwrap();
        let dist = stability_distances(&d, &[q("1/3"), q("-1/2")], 12, 1.0, 32).unwrap();
        assert!(dist.windows(2).all(|w| w[1] <= w[0]));
        assert!(dist[11] < 1e-3);
    }
}
