use alloc::string::ToString;
use alloc::vec::Vec;

use super::{
    admissibility_ratio, build_w, first_inadmissible, Coupling, CouplingData, CouplingError,
    SolutionPair, SolverTrace,
};
use crate::herglotz::{cf_expand_with, ContinuedFraction, ExpandOptions, HerglotzRational};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance of the internal cross-checks and of the expansion
    /// residual for the float kind. Exact kinds compare exactly.
    pub rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_tol: 1e-9 }
    }
}

/// Zero and infinite coupling constants factored out of a problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction<T> {
    pub reduced: CouplingData<T>,
    pub sigma_minus: Vec<T>,
    pub sigma_plus: Vec<T>,
    pub factor_minus: Polynomial<T>,
    pub factor_plus: Polynomial<T>,
}

/// Removes the points with `eta = 0` (`sigma_minus`) and `eta = ∞`
/// (`sigma_plus`), rescaling the remaining constants so that
/// `(factor_minus * phi_minus~, factor_plus * phi_plus~)` solves the
/// original problem whenever `(phi_minus~, phi_plus~)` solves the reduced one.
pub fn reduce<T: Scalar>(data: &CouplingData<T>) -> Reduction<T> {
    let mut sigma_minus = Vec::new();
    let mut sigma_plus = Vec::new();
    for (l, e) in data.points() {
        if e.is_zero() {
            sigma_minus.push(l.clone());
        } else if e.is_infinite() {
            sigma_plus.push(l.clone());
        }
    }
    let factor_minus = build_w(&sigma_minus);
    let factor_plus = build_w(&sigma_plus);
    let points = data
        .points()
        .filter_map(|(l, e)| {
            let v = e.finite().filter(|v| !v.is_zero())?;
            let scaled = v.clone() * factor_plus.eval(l) / factor_minus.eval(l);
            Some((l.clone(), Coupling::Finite(scaled)))
        })
        .collect();
    Reduction {
        reduced: CouplingData::new(points).expect("subset of valid data"),
        sigma_minus,
        sigma_plus,
        factor_minus,
        factor_plus,
    }
}

pub fn solve<T: Scalar>(data: &CouplingData<T>) -> Result<SolutionPair<T>, CouplingError> {
    solve_with(data, &SolveOptions::default())
}

/// Unique solution of an admissible problem.
pub fn solve_with<T: Scalar>(
    data: &CouplingData<T>,
    opts: &SolveOptions,
) -> Result<SolutionPair<T>, CouplingError> {
    if let Some(l) = first_inadmissible(data) {
        return Err(CouplingError::NotAdmissible {
            lambda: l.to_string(),
        });
    }
    let red = reduce(data);
    let inner = if red.reduced.is_empty() {
        SolutionPair {
            phi_minus: Polynomial::one(),
            phi_plus: Polynomial::one(),
            trace: Some(SolverTrace {
                cf: ContinuedFraction::default(),
                n0: 0,
                delta: T::zero(),
                sigma_minus: Vec::new(),
                sigma_plus: Vec::new(),
            }),
        }
    } else {
        solve_strict_with(&red.reduced, opts)?
    };
    let mut trace = inner.trace.expect("strict solver always records a trace");
    trace.sigma_minus = red.sigma_minus;
    trace.sigma_plus = red.sigma_plus;
    Ok(SolutionPair {
        phi_minus: &inner.phi_minus * &red.factor_minus,
        phi_plus: &inner.phi_plus * &red.factor_plus,
        trace: Some(trace),
    })
}

/// Solves a problem whose coupling constants are all finite and nonzero.
pub fn solve_strict<T: Scalar>(data: &CouplingData<T>) -> Result<SolutionPair<T>, CouplingError> {
    solve_strict_with(data, &SolveOptions::default())
}

fn solve_strict_with<T: Scalar>(
    data: &CouplingData<T>,
    opts: &SolveOptions,
) -> Result<SolutionPair<T>, CouplingError> {
    if data.eta().iter().any(|e| e.is_zero() || e.is_infinite()) {
        return Err(CouplingError::HasZeroOrInfiniteEta);
    }
    let w = data.wronskian();
    let dw = w.derivative();
    let two = T::from_i64(2);
    let mut poles = Vec::with_capacity(data.len());
    for (l, e) in data.points() {
        let eta = e.finite().expect("checked above");
        let ratio = admissibility_ratio(eta, l, &dw);
        if ratio.is_positive() {
            return Err(CouplingError::NotAdmissible {
                lambda: l.to_string(),
            });
        }
        poles.push((l.clone(), -ratio / &two));
    }
    let m = HerglotzRational::new(T::zero(), T::zero(), two.recip(), poles)?;
    let cf = cf_expand_with(
        &m,
        ExpandOptions {
            rel_tol: opts.rel_tol,
        },
    )?;
    let pq = cf.pq_sequence();
    let rs = cf.rs_sequence();
    let n = cf.len();

    let two_z_w = w.shift_up().scale(&two);
    let (p_n, q_n) = &pq[n];
    if !poly_close(&(-q_n), &two_z_w, opts.rel_tol) {
        return Err(CouplingError::InternalConsistency("-q_N != 2zW"));
    }
    for (l, e) in data.points() {
        let eta = e.finite().expect("checked above");
        let diff = p_n.eval(l) + eta;
        if !diff.near_zero(&(eta.abs() + T::one()), opts.rel_tol) {
            return Err(CouplingError::InternalConsistency(
                "p_N(lambda) != -eta(lambda)",
            ));
        }
    }
    for k in [1i64, -2, 3] {
        let x = T::from_i64(k) / T::from_i64(7);
        let target = two_z_w.eval(&x);
        let scale = target.abs() + T::one();
        for ((p, q), (r, s)) in pq.iter().zip(&rs) {
            let lhs = q.eval(&x) * r.eval(&x) - p.eval(&x) * s.eval(&x);
            if !(lhs - &target).near_zero(&scale, opts.rel_tol) {
                return Err(CouplingError::InternalConsistency(
                    "q_n r_n - p_n s_n != 2zW",
                ));
            }
        }
    }

    // smallest n0 with l_1 + ... + l_n0 > 1
    let one = T::one();
    let mut partial = T::zero();
    let mut pivot = None;
    for (i, t) in cf.triples.iter().enumerate() {
        partial = partial + &t.l;
        if partial > one {
            pivot = Some(i + 1);
            break;
        }
    }
    let n0 = pivot.ok_or(CouplingError::InternalConsistency(
        "sum of l_n does not exceed 1",
    ))?;
    let delta = partial - &one;

    let (p_prev, _) = &pq[n0 - 1];
    let (_, q_pivot) = &pq[n0];
    let (r_prev, _) = &rs[n0 - 1];
    let (_, s_pivot) = &rs[n0];
    let minus_z_phi_minus = q_pivot + &p_prev.shift_up().scale(&delta);
    let minus_z_phi_plus = s_pivot + &r_prev.shift_up().scale(&delta);
    let phi_minus = (-&minus_z_phi_minus).shift_down();
    let phi_plus = (-&minus_z_phi_plus).shift_down();

    let unit = |p: &Polynomial<T>| (p.eval(&T::zero()) - &one).near_zero(&one, opts.rel_tol);
    if !unit(&phi_minus) || !unit(&phi_plus) {
        return Err(CouplingError::InternalConsistency("normalization at zero"));
    }

    Ok(SolutionPair {
        phi_minus,
        phi_plus,
        trace: Some(SolverTrace {
            cf,
            n0,
            delta,
            sigma_minus: Vec::new(),
            sigma_plus: Vec::new(),
        }),
    })
}

fn poly_close<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>, rel_tol: f64) -> bool {
    if T::is_exact() {
        return a == b;
    }
    let scale = T::max_of(a.max_abs_coeff(), b.max_abs_coeff());
    (a - b).max_abs_coeff().near_zero(&scale, rel_tol)
}

/// Solves arbitrary (not necessarily admissible) data, or reports that no
/// solution exists.
///
/// Points where admissibility fails are given coupling constant zero; the
/// modified problem is admissible, and the original one is solvable exactly
/// when `phi_plus` of the modified solution vanishes on those points.
pub fn solve_general<T: Scalar>(data: &CouplingData<T>) -> Result<SolutionPair<T>, CouplingError> {
    let dw = data.wronskian().derivative();
    let mut rho = Vec::new();
    let points = data
        .points()
        .map(|(l, e)| {
            let bad = e
                .finite()
                .is_some_and(|v| admissibility_ratio(v, l, &dw).is_positive());
            if bad {
                rho.push(l.clone());
                (l.clone(), Coupling::Finite(T::zero()))
            } else {
                (l.clone(), e.clone())
            }
        })
        .collect();
    let modified = CouplingData::new(points)?;
    let pair = solve(&modified)?;
    let failing: Vec<_> = rho
        .iter()
        .filter(|l| !vanishes(&pair.phi_plus, l, data.sigma()))
        .map(|l| l.to_string())
        .collect();
    if failing.is_empty() {
        Ok(pair)
    } else {
        Err(CouplingError::NoSolution { points: failing })
    }
}

fn vanishes<T: Scalar>(p: &Polynomial<T>, l: &T, sigma: &[T]) -> bool {
    let scale = sigma
        .iter()
        .fold(T::one(), |acc, k| acc * (T::one() + (l.clone() / k).abs()));
    p.eval(l).near_zero(&scale, 1e-20)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, Float, Rational};
    use alloc::vec;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn data(points: &[(&str, &str)]) -> CouplingData<Rational> {
        CouplingData::new(
            points
                .iter()
                .map(|(l, e)| {
                    let e = if *e == "inf" {
                        Coupling::Infinite
                    } else {
                        Coupling::Finite(q(e))
                    };
                    (q(l), e)
                })
                .collect(),
        )
        .unwrap()
    }

    fn poly(cs: &[&str]) -> Polynomial<Rational> {
        Polynomial::new(cs.iter().map(|s| q(s)).collect())
    }

    #[test]
    fn single_point_examples() {
        let s = solve_strict(&data(&[("1", "2")])).unwrap();
        assert_eq!(s.phi_minus, poly(&["1"]));
        assert_eq!(s.phi_plus, poly(&["1", "-1/2"]));
        let t = s.trace.unwrap();
        assert_eq!(t.n0, 1);
        assert_eq!(t.delta, q("1/3"));

        let s = solve_strict(&data(&[("1", "1/2")])).unwrap();
        assert_eq!(s.phi_minus, poly(&["1", "-1/2"]));
        assert_eq!(s.phi_plus, poly(&["1"]));
    }

    #[test]
    fn two_mass_string_instance() {
        let s = solve(&data(&[("3", "1"), ("9", "-1")])).unwrap();
        assert_eq!(s.phi_minus, poly(&["1", "-1/9"]));
        assert_eq!(s.phi_plus, poly(&["1", "-1/9"]));
    }

    #[test]
    fn strict_solver_rejects_zero_and_infinity() {
        assert_eq!(
            solve_strict(&data(&[("1", "0")])),
            Err(CouplingError::HasZeroOrInfiniteEta)
        );
        assert_eq!(
            solve_strict(&data(&[("1", "inf")])),
            Err(CouplingError::HasZeroOrInfiniteEta)
        );
    }

    #[test]
    fn reduction_examples() {
        let r = reduce(&data(&[("1", "inf")]));
        assert!(r.reduced.is_empty());
        assert_eq!(r.factor_plus, poly(&["1", "-1"]));
        assert_eq!(r.factor_minus, poly(&["1"]));

        let r = reduce(&data(&[("1", "0")]));
        assert!(r.reduced.is_empty());
        assert_eq!(r.factor_minus, poly(&["1", "-1"]));

        let r = reduce(&data(&[("1", "0"), ("2", "4")]));
        assert_eq!(r.reduced.sigma(), &[q("2")]);
        assert_eq!(r.reduced.eta(), &[Coupling::Finite(q("-4"))]);
        assert_eq!(r.factor_minus, poly(&["1", "-1"]));
    }

    #[test]
    fn full_solver_examples() {
        let s = solve(&data(&[("1", "inf")])).unwrap();
        assert_eq!(s.phi_minus, poly(&["1"]));
        assert_eq!(s.phi_plus, poly(&["1", "-1"]));

        let s = solve(&CouplingData::<Rational>::empty()).unwrap();
        assert_eq!(s.phi_minus, poly(&["1"]));
        assert_eq!(s.phi_plus, poly(&["1"]));
        assert_eq!(s.trace.unwrap().n0, 0);

        assert!(matches!(
            solve(&data(&[("1", "-1")])),
            Err(CouplingError::NotAdmissible { .. })
        ));
    }

    #[test]
    fn general_solver() {
        assert!(matches!(
            solve_general(&data(&[("1", "-1")])),
            Err(CouplingError::NoSolution { .. })
        ));
        let d = data(&[("3", "1"), ("9", "-1")]);
        assert_eq!(solve_general(&d), solve(&d));
        // rho = {9}, and phi_plus of the zeroed problem vanishes there
        let s = solve_general(&data(&[("3", "1"), ("9", "1")])).unwrap();
        assert_eq!(s.phi_minus, poly(&["1", "-1/9"]));
        assert_eq!(s.phi_plus, poly(&["1", "-1/9"]));
        // rho = {3}; the zeroed problem has phi_plus = 1
        assert_eq!(
            solve_general(&data(&[("3", "-1"), ("9", "-1")])),
            Err(CouplingError::NoSolution {
                points: vec!["3".into()]
            })
        );
    }

    #[test]
    fn float_kind_matches_exact() {
        let exact = solve(&data(&[
            ("-3", "2"),
            ("1", "5"),
            ("4", "inf"),
            ("7", "1/3"),
        ]))
        .unwrap();
        let d = CouplingData::new(vec![
            (Float::from_i64(-3), Coupling::Finite(Float::from_i64(2))),
            (Float::from_i64(1), Coupling::Finite(Float::from_i64(5))),
            (Float::from_i64(4), Coupling::Infinite),
            (
                Float::from_i64(7),
                Coupling::Finite(Float::one() / Float::from_i64(3)),
            ),
        ])
        .unwrap();
        let approx = solve(&d).unwrap();
        for (a, e) in [
            (&approx.phi_minus, &exact.phi_minus),
            (&approx.phi_plus, &exact.phi_plus),
        ] {
            assert_eq!(a.degree(), e.degree());
            for (x, y) in a.coeffs().iter().zip(e.coeffs()) {
                assert!((Scalar::to_f64(x) - Scalar::to_f64(y)).abs() < 1e-12);
            }
        }
    }
}
