//! Rational Herglotz-Nevanlinna functions with a pole at zero and their
//! continued-fraction expansion.
//!
//! A function of this class is stored in partial-fraction form
//!
//! ```text
//! m(z) = alpha + beta z - c0 / z + sum_j w_j / (lambda_j - z)
//! ```
//!
//! with `beta >= 0`, `c0 > 0`, `w_j > 0`. Every such `m` equals `p_N / q_N`
//! for polynomials generated by the two-term recursion
//!
//! ```text
//! q_0 = 0,  p_0 = 1,
//! q_n = q_{n-1} - l_n z p_{n-1},
//! p_n = p_{n-1} + (omega_n + upsilon_n z) q_n,
//! ```
//!
//! with `l_n > 0` and `upsilon_n >= 0`. [`cf_expand`] recovers the triples
//! `(l_n, omega_n, upsilon_n)` by repeated division with remainder on the
//! cleared form `P / Q`, peeling index `N` first.

use alloc::vec::Vec;

use crate::poly::Polynomial;
use crate::scalar::{cmp_scalar, Complex, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HerglotzError {
    #[error("evaluation point is a pole")]
    PoleHit,
    #[error("not a Herglotz-Nevanlinna function with a pole at zero: {0}")]
    InvalidRepresentation(&'static str),
    #[error("expansion step {step} violates the Herglotz sign conditions: {reason}")]
    NotHerglotz { step: usize, reason: &'static str },
    #[error("remainder vanished before the last pole was peeled (step {step})")]
    ZeroRemainderUnexpected { step: usize },
    #[error("reconstruction residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
}

/// Partial-fraction form `alpha + beta z - c0/z + sum w_j/(lambda_j - z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzRational<T> {
    pub alpha: T,
    pub beta: T,
    pub c0: T,
    /// `(lambda_j, w_j)`, sorted by `lambda_j`.
    pub poles: Vec<(T, T)>,
}

impl<T: Scalar> HerglotzRational<T> {
    pub fn new(alpha: T, beta: T, c0: T, mut poles: Vec<(T, T)>) -> Result<Self, HerglotzError> {
        if beta.is_negative() {
            return Err(HerglotzError::InvalidRepresentation("beta < 0"));
        }
        if !c0.is_positive() {
            return Err(HerglotzError::InvalidRepresentation("c0 <= 0"));
        }
        if poles.iter().any(|(l, w)| l.is_zero() || !w.is_positive()) {
            return Err(HerglotzError::InvalidRepresentation(
                "poles must be nonzero with positive weights",
            ));
        }
        poles.sort_by(|a, b| cmp_scalar(&a.0, &b.0));
        if poles.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(HerglotzError::InvalidRepresentation("repeated pole"));
        }
        Ok(HerglotzRational {
            alpha,
            beta,
            c0,
            poles,
        })
    }

    /// Number of poles including the one at zero.
    pub fn pole_count(&self) -> usize {
        self.poles.len() + 1
    }

    /// Cleared form `(P, Q)` with `Q = z prod (1 - z/lambda_j)`.
    pub fn rational_form(&self) -> (Polynomial<T>, Polynomial<T>) {
        let lambdas: Vec<T> = self.poles.iter().map(|(l, _)| l.clone()).collect();
        let prod = Polynomial::from_unit_roots(&lambdas);
        let q = prod.shift_up();
        let affine = Polynomial::linear(self.alpha.clone(), self.beta.clone());
        let mut p = &(&affine * &q) - &prod.scale(&self.c0);
        for (j, (lambda, w)) in self.poles.iter().enumerate() {
            let others = Polynomial::from_unit_roots(
                lambdas
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, l)| l),
            );
            p = &p + &others.shift_up().scale(&(w.clone() / lambda));
        }
        (p, q)
    }
}

/// Value of `m` at `z`.
pub fn hn_eval<T: Scalar>(
    m: &HerglotzRational<T>,
    z: &Complex<T>,
) -> Result<Complex<T>, HerglotzError> {
    let mut acc = Complex::new(
        m.alpha.clone() + m.beta.clone() * &z.re,
        m.beta.clone() * &z.im,
    );
    let inv_z = Complex::one().div(z).ok_or(HerglotzError::PoleHit)?;
    acc = acc.sub(&inv_z.scale(&m.c0));
    for (lambda, w) in &m.poles {
        let d = Complex::real(lambda.clone()).sub(z);
        let term = Complex::real(w.clone())
            .div(&d)
            .ok_or(HerglotzError::PoleHit)?;
        acc = acc.add(&term);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfTriple<T> {
    pub l: T,
    pub omega: T,
    pub upsilon: T,
}

/// Coefficient triples in bottom-up order: index 0 holds `(l_1, omega_1,
/// upsilon_1)`, the innermost level.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction<T> {
    pub triples: Vec<CfTriple<T>>,
}

impl<T> Default for ContinuedFraction<T> {
    fn default() -> Self {
        ContinuedFraction {
            triples: Vec::new(),
        }
    }
}

impl<T: Scalar> ContinuedFraction<T> {
    pub fn new(triples: Vec<CfTriple<T>>) -> Result<Self, HerglotzError> {
        for (step, t) in triples.iter().enumerate() {
            if !t.l.is_positive() {
                return Err(HerglotzError::NotHerglotz {
                    step: step + 1,
                    reason: "l <= 0",
                });
            }
            if t.upsilon.is_negative() {
                return Err(HerglotzError::NotHerglotz {
                    step: step + 1,
                    reason: "upsilon < 0",
                });
            }
        }
        Ok(ContinuedFraction { triples })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn sum_l(&self) -> T {
        self.triples.iter().fold(T::zero(), |s, t| s + &t.l)
    }

    /// All `(p_n, q_n)` for `n = 0..=N`.
    pub fn pq_sequence(&self) -> Vec<(Polynomial<T>, Polynomial<T>)> {
        let mut out = Vec::with_capacity(self.triples.len() + 1);
        let mut p = Polynomial::one();
        let mut q = Polynomial::zero();
        out.push((p.clone(), q.clone()));
        for t in &self.triples {
            q = &q - &p.shift_up().scale(&t.l);
            p = &p + &(&Polynomial::linear(t.omega.clone(), t.upsilon.clone()) * &q);
            out.push((p.clone(), q.clone()));
        }
        out
    }

    /// All `(r_n, s_n)` for `n = 0..=N` from the backward recursion
    /// `r_N = -1`, `s_N = 0`,
    /// `r_n = r_{n+1} - (omega_{n+1} + upsilon_{n+1} z) s_{n+1}`,
    /// `s_n = s_{n+1} + l_{n+1} z r_n`.
    pub fn rs_sequence(&self) -> Vec<(Polynomial<T>, Polynomial<T>)> {
        let n = self.triples.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut r = Polynomial::constant(-T::one());
        let mut s = Polynomial::zero();
        out.push((r.clone(), s.clone()));
        for t in self.triples.iter().rev() {
            r = &r - &(&Polynomial::linear(t.omega.clone(), t.upsilon.clone()) * &s);
            s = &s + &r.shift_up().scale(&t.l);
            out.push((r.clone(), s.clone()));
        }
        out.reverse();
        out
    }
}

/// `(p_N, q_N)` of the recursion.
pub fn cf_reconstruct<T: Scalar>(cf: &ContinuedFraction<T>) -> (Polynomial<T>, Polynomial<T>) {
    cf.pq_sequence().pop().expect("sequence is never empty")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpandOptions {
    /// Relative tolerance for float-kind sign checks and the reconstruction
    /// residual. Ignored for exact scalars.
    pub rel_tol: f64,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions { rel_tol: 1e-9 }
    }
}

pub fn cf_expand<T: Scalar>(
    m: &HerglotzRational<T>,
) -> Result<ContinuedFraction<T>, HerglotzError> {
    cf_expand_with(m, ExpandOptions::default())
}

pub fn cf_expand_with<T: Scalar>(
    m: &HerglotzRational<T>,
    opts: ExpandOptions,
) -> Result<ContinuedFraction<T>, HerglotzError> {
    let (p, q) = m.rational_form();
    let cf = expand_cleared(p.clone(), q.clone(), m.pole_count(), opts)?;
    if !T::is_exact() {
        let residual = reconstruction_residual(&cf, &p, &q);
        if residual.is_nan() || residual > opts.rel_tol {
            return Err(HerglotzError::ResidualTooLarge {
                residual,
                tolerance: opts.rel_tol,
            });
        }
    }
    Ok(cf)
}

/// Relative size of `P q_N - Q p_N` in the max-coefficient norm.
pub fn reconstruction_residual<T: Scalar>(
    cf: &ContinuedFraction<T>,
    p: &Polynomial<T>,
    q: &Polynomial<T>,
) -> f64 {
    let (pn, qn) = cf_reconstruct(cf);
    let diff = &(p * &qn) - &(q * &pn);
    let scale = p.max_abs_coeff() * qn.max_abs_coeff() + q.max_abs_coeff() * pn.max_abs_coeff();
    if scale.is_zero() {
        return if diff.is_zero() { 0.0 } else { f64::INFINITY };
    }
    (diff.max_abs_coeff() / scale).to_f64()
}

/// Expansion of `p / q` where `q(0) = 0` and `q` has `poles` simple real
/// zeros.
fn expand_cleared<T: Scalar>(
    mut p: Polynomial<T>,
    mut q: Polynomial<T>,
    poles: usize,
    opts: ExpandOptions,
) -> Result<ContinuedFraction<T>, HerglotzError> {
    let cap = 2 * poles + 2;
    let mut peeled = Vec::new();
    loop {
        let step = poles - peeled.len();
        if peeled.len() >= cap {
            return Err(HerglotzError::NotHerglotz {
                step,
                reason: "iteration cap exceeded",
            });
        }
        let dq = match q.degree() {
            Some(d) if d >= 1 => d,
            _ => return Err(HerglotzError::ZeroRemainderUnexpected { step }),
        };
        let (affine, r) = p.div_rem(&q);
        if affine.degree().is_some_and(|d| d > 1) {
            return Err(HerglotzError::NotHerglotz {
                step,
                reason: "polynomial part has degree > 1",
            });
        }
        let omega = affine.coeff(0);
        let mut upsilon = affine.coeff(1);
        if upsilon.is_negative() {
            let scale = p.max_abs_coeff() / q.max_abs_coeff();
            if !upsilon.near_zero(&scale, opts.rel_tol) {
                return Err(HerglotzError::NotHerglotz {
                    step,
                    reason: "upsilon < 0",
                });
            }
            if T::is_exact() {
                upsilon = T::zero();
            }
        }
        let Some(lead_r) = r.coeffs().get(dq - 1).filter(|c| !c.is_zero()).cloned() else {
            return if r.is_zero() {
                Err(HerglotzError::ZeroRemainderUnexpected { step })
            } else {
                Err(HerglotzError::NotHerglotz {
                    step,
                    reason: "remainder degree dropped by more than one",
                })
            };
        };
        let l = -(q.leading().expect("nonzero").clone()) / &lead_r;
        if !l.is_positive() {
            return Err(HerglotzError::NotHerglotz {
                step,
                reason: "l <= 0",
            });
        }
        peeled.push(CfTriple {
            l: l.clone(),
            omega,
            upsilon,
        });
        if dq == 1 {
            break;
        }
        // the top coefficient of q + l z r cancels by the choice of l
        let next_q = (&q + &r.shift_up().scale(&l)).truncate(dq);
        p = r;
        q = next_q;
        if !T::is_exact() {
            let s = q.max_abs_coeff().recip();
            p = p.scale(&s);
            q = q.scale(&s);
        }
    }
    peeled.reverse();
    Ok(ContinuedFraction { triples: peeled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, Float, Rational};
    use alloc::vec;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn triple(l: &str, w: &str, u: &str) -> CfTriple<Rational> {
        CfTriple {
            l: q(l),
            omega: q(w),
            upsilon: q(u),
        }
    }

    fn step_one_single() -> HerglotzRational<Rational> {
        HerglotzRational::new(q("0"), q("0"), q("1/2"), vec![(q("1"), q("1"))]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let m = HerglotzRational::new(q("0"), q("0"), q("1/2"), vec![]).unwrap();
        let v = hn_eval(&m, &Complex::i()).unwrap();
        assert_eq!(v, Complex::new(q("0"), q("1/2")));

        let v = hn_eval(&step_one_single(), &Complex::real(q("2"))).unwrap();
        assert_eq!(v, Complex::real(q("-5/4")));

        let v = hn_eval(&step_one_single(), &Complex::i()).unwrap();
        assert!(v.im.is_positive());

        assert_eq!(
            hn_eval(&step_one_single(), &Complex::real(q("1"))),
            Err(HerglotzError::PoleHit)
        );
        assert_eq!(
            hn_eval(&step_one_single(), &Complex::zero()),
            Err(HerglotzError::PoleHit)
        );
    }

    #[test]
    fn invalid_representations() {
        assert!(HerglotzRational::new(q("0"), q("-1"), q("1"), vec![]).is_err());
        assert!(HerglotzRational::new(q("0"), q("0"), q("0"), vec![]).is_err());
        assert!(HerglotzRational::new(q("0"), q("0"), q("1"), vec![(q("1"), q("0"))]).is_err());
        assert!(HerglotzRational::new(q("0"), q("0"), q("1"), vec![(q("0"), q("1"))]).is_err());
        assert!(HerglotzRational::new(
            q("0"),
            q("0"),
            q("1"),
            vec![(q("2"), q("1")), (q("2"), q("3"))]
        )
        .is_err());
    }

    #[test]
    fn base_case_expansion() {
        let m = HerglotzRational::new(q("0"), q("0"), q("1/2"), vec![]).unwrap();
        let cf = cf_expand(&m).unwrap();
        assert_eq!(cf.triples, vec![triple("2", "0", "0")]);

        let m = HerglotzRational::new(q("1"), q("1"), q("1"), vec![]).unwrap();
        let cf = cf_expand(&m).unwrap();
        assert_eq!(cf.triples, vec![triple("1", "1", "1")]);
    }

    #[test]
    fn single_pole_expansion() {
        let cf = cf_expand(&step_one_single()).unwrap();
        assert_eq!(
            cf.triples,
            vec![triple("4/3", "9/4", "0"), triple("2/3", "0", "0")]
        );
        assert_eq!(cf.sum_l(), q("2"));
    }

    #[test]
    fn inner_slope_absorbs_a_pole() {
        let m = HerglotzRational::new(
            q("0"),
            q("0"),
            q("1"),
            vec![(q("-2/3"), q("6")), (q("2"), q("2"))],
        )
        .unwrap();
        let cf = cf_expand(&m).unwrap();
        assert_eq!(cf.len(), 2);
        assert!(cf.triples[0].upsilon.is_positive());
        let (p, qn) = cf_reconstruct(&cf);
        let (pm, qm) = m.rational_form();
        assert_eq!(&p * &qm, &pm * &qn);
    }

    #[test]
    fn reconstruct_examples() {
        let cf = ContinuedFraction::new(vec![triple("2", "0", "0")]).unwrap();
        let (p, qn) = cf_reconstruct(&cf);
        assert_eq!(p, Polynomial::one());
        assert_eq!(qn, Polynomial::linear(q("0"), q("-2")));

        let cf = ContinuedFraction::new(vec![triple("4/3", "9/4", "0"), triple("2/3", "0", "0")])
            .unwrap();
        let (p, qn) = cf_reconstruct(&cf);
        assert_eq!(qn, Polynomial::new(vec![q("0"), q("-2"), q("2")]));
        assert_eq!(p.eval(&q("1")), q("-2"));

        let (p, qn) = cf_reconstruct(&ContinuedFraction::<Rational>::default());
        assert_eq!(p, Polynomial::one());
        assert!(qn.is_zero());
    }

    #[test]
    fn invalid_triples_are_rejected() {
        assert!(ContinuedFraction::new(vec![triple("0", "1", "0")]).is_err());
        assert!(ContinuedFraction::new(vec![triple("1", "1", "-1")]).is_err());
    }

    #[test]
    fn non_herglotz_cleared_form_is_reported() {
        // -( -1/(2z) ): residue of the wrong sign
        let p = Polynomial::constant(q("1"));
        let qz = Polynomial::linear(q("0"), q("2"));
        let err = expand_cleared(p, qz, 1, ExpandOptions::default()).unwrap_err();
        assert!(matches!(err, HerglotzError::NotHerglotz { .. }));
    }

    #[test]
    fn backward_recursion_matches_wronskian_identity() {
        let cf = cf_expand(&step_one_single()).unwrap();
        let pq = cf.pq_sequence();
        let rs = cf.rs_sequence();
        let target = &(&pq[2].1 * &rs[2].0) - &(&pq[2].0 * &rs[2].1);
        for n in 0..=2 {
            let lhs = &(&pq[n].1 * &rs[n].0) - &(&pq[n].0 * &rs[n].1);
            assert_eq!(lhs, target);
        }
    }

    #[test]
    fn float_expansion_validates_residual() {
        let m = HerglotzRational::new(
            Float::zero(),
            Float::zero(),
            Float::from_f64(0.5),
            vec![
                (Float::from_f64(1.0), Float::from_f64(0.25)),
                (Float::from_f64(-3.0), Float::from_f64(2.0)),
                (Float::from_f64(7.5), Float::from_f64(0.125)),
            ],
        )
        .unwrap();
        let cf = cf_expand(&m).unwrap();
        assert_eq!(cf.len(), 4);
        assert!((cf.sum_l().to_f64() - 2.0).abs() < 1e-60);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rational(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Rational> {
            (lo..=hi, 1..=den).prop_map(|(n, d)| Rational::from_i64(n) / Rational::from_i64(d))
        }

        fn herglotz() -> impl Strategy<Value = HerglotzRational<Rational>> {
            (
                rational(-10, 10, 4),
                prop_oneof![Just(Rational::zero()), rational(1, 10, 4)],
                rational(1, 10, 4),
                proptest::collection::btree_map(-40i64..40, rational(1, 12, 5), 0..8),
            )
                .prop_map(|(alpha, beta, c0, poles)| {
                    let poles = poles
                        .into_iter()
                        .filter(|(l, _)| *l != 0)
                        .map(|(l, w)| (Rational::from_i64(l) / Rational::from_i64(3), w))
                        .collect();
                    HerglotzRational::new(alpha, beta, c0, poles).unwrap()
                })
        }

        proptest! {
            #[test]
            fn expansion_round_trips(m in herglotz()) {
                let cf = cf_expand(&m).unwrap();
                // a slope upsilon > 0 on an inner level absorbs a pole
                prop_assert!(cf.len() <= m.pole_count());
                let (p, qn) = cf_reconstruct(&cf);
                let (pm, qm) = m.rational_form();
                prop_assert_eq!(&p * &qm, &pm * &qn);
                prop_assert_eq!(qn.degree(), qm.degree());
                prop_assert_eq!(cf.sum_l(), m.c0.recip());
            }

            #[test]
            fn prefixes_are_normalized_and_positive(m in herglotz()) {
                let cf = cf_expand(&m).unwrap();
                for (n, (p, qn)) in cf.pq_sequence().iter().enumerate() {
                    prop_assert_eq!(p.eval(&Rational::zero()), Rational::one());
                    prop_assert_eq!(qn.eval(&Rational::zero()), Rational::zero());
                    if n == 0 {
                        continue;
                    }
                    // Im(p/q) >= 0 in the upper half-plane: Im(p conj(q)) >= 0
                    for k in 1..=20i64 {
                        let z = Complex::new(
                            Rational::from_i64(k * 7 % 23 - 11) / Rational::from_i64(3),
                            Rational::from_i64(k) / Rational::from_i64(5),
                        );
                        let v = p.eval_complex(&z).mul(&qn.eval_complex(&z).conj());
                        prop_assert!(!v.im.is_negative());
                    }
                }
            }
        }
    }
}
