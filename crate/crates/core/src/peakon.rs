//! Camassa-Holm multipeakons through coupling problems.
//!
//! For `u = Σ p_i e^{-|x - q_i|}` the measure `ω = u - u_xx = 2 Σ p_i δ_{q_i}`
//! defines the spectral problem `-f'' + f/4 = z ω f`. Between peakons
//! `f = A e^{x/2} + B e^{-x/2}`, and crossing `q_i` the slope jumps by
//! `-2 z p_i f(q_i)`. Starting from `φ₋ = e^{x/2}` on the left, the
//! coefficients after the last peakon give the Wronskian `W = A` and, at
//! each zero `λ` of `W`, the coupling `c_λ = B(λ)` with `φ₋ = c_λ φ₊`.
//!
//! The flow is linear on this data, `c_λ(t) = c_λ(0) e^{t/(2λ)}`, and
//! `u(x, t) = (Φ₋'(0) + Φ₊'(0))/2 + Σ 1/(2λ)` where `(Φ₋, Φ₊)` solves the
//! coupling problem with `η(λ) = c_λ(t) e^{-x}`.

use alloc::vec::Vec;

use crate::coupling::{is_admissible, solve, Coupling, CouplingData, CouplingError};
use crate::poly::Polynomial;
use crate::roots::{isolate_rational, polish_root, AlgebraError};
use crate::scalar::{Float, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PeakonError {
    #[error("invalid multipeakon: {0}")]
    InvalidPeakon(&'static str),
    #[error("spectrum is not simple and nonzero")]
    DegenerateSpectrum,
    #[error("sum of 1/lambda disagrees with -W'(0)")]
    InconsistentSpectrum,
    #[error(transparent)]
    Solver(#[from] CouplingError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `u(x) = Σ p_i e^{-|x - q_i|}` with increasing `q_i` and positive `p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipeakon<T> {
    q: Vec<T>,
    p: Vec<T>,
}

impl<T: Scalar> Multipeakon<T> {
    pub fn new(q: Vec<T>, p: Vec<T>) -> Result<Self, PeakonError> {
        if q.len() != p.len() {
            return Err(PeakonError::InvalidPeakon("q and p differ in length"));
        }
        if q.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PeakonError::InvalidPeakon("q must be strictly increasing"));
        }
        if p.iter().any(|v| !v.is_positive()) {
            return Err(PeakonError::InvalidPeakon("weights must be positive"));
        }
        Ok(Multipeakon { q, p })
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

impl Multipeakon<Float> {
    /// `Σ p_i e^{-|x - q_i|}`.
    pub fn profile(&self, x: &Float) -> Float {
        self.q
            .iter()
            .zip(&self.p)
            .fold(Float::zero(), |acc, (q, p)| {
                acc + p.clone() * (-(x.clone() - q).abs()).exp()
            })
    }
}

/// Eigenvalues, couplings at `t = 0` and Wronskian of a multipeakon.
#[derive(Clone, Debug, PartialEq)]
pub struct ChSpectralData {
    pub eigenvalues: Vec<Float>,
    pub couplings0: Vec<Float>,
    pub wronskian: Polynomial<Float>,
}

/// `(A, B)` to the right of all peakons for the solution that equals
/// `e^{x/2}` to the left of them.
fn transfer(mp: &Multipeakon<Float>) -> (Polynomial<Float>, Polynomial<Float>) {
    let half = Float::one() / Float::from_i64(2);
    let mut a = Polynomial::one();
    let mut b = Polynomial::zero();
    for (q, p) in mp.q.iter().zip(&mp.p) {
        let e = (q.clone() * &half).exp();
        let f = &a.scale(&e) + &b.scale(&e.recip());
        let delta = f.shift_up().scale(&(Float::from_i64(-2) * p));
        a = &a + &delta.scale(&e.recip());
        b = &b - &delta.scale(&e);
    }
    (a, b)
}

pub fn ch_forward(mp: &Multipeakon<Float>) -> Result<ChSpectralData, PeakonError> {
    let (w, b) = transfer(mp);
    let n = mp.len();
    if n == 0 {
        return Ok(ChSpectralData {
            eigenvalues: Vec::new(),
            couplings0: Vec::new(),
            wronskian: w,
        });
    }
    let exact = w.to_rational();
    let roots = isolate_rational(&exact, &Rational::one())?;
    if roots.distinct() != n || !roots.all_simple() {
        return Err(PeakonError::DegenerateSpectrum);
    }
    let prec = w.coeffs().iter().map(Float::precision).max().unwrap_or(64);
    let rel_tol = libm::ldexp(1.0, 8 - prec.min(1000) as i32);
    let mut eigenvalues = Vec::with_capacity(n);
    for iv in &roots.intervals {
        let lambda = match iv.exact_value() {
            Some(r) => Float::from_rational(r),
            None => polish_root(
                &w,
                Float::from_rational(&iv.lo),
                Float::from_rational(&iv.hi),
                rel_tol,
                4 * prec,
            ),
        };
        if lambda.is_zero() {
            return Err(PeakonError::DegenerateSpectrum);
        }
        eigenvalues.push(lambda);
    }
    let trace = eigenvalues
        .iter()
        .fold(Float::zero(), |acc, l| acc + l.recip());
    let dw0 = -w.coeff(1);
    if !(trace.clone() - &dw0).near_zero(&trace, 1e-20) {
        return Err(PeakonError::InconsistentSpectrum);
    }
    let couplings0 = eigenvalues.iter().map(|l| b.eval(l)).collect();
    Ok(ChSpectralData {
        eigenvalues,
        couplings0,
        wronskian: w,
    })
}

/// `η(λ) = c_λ(0) e^{t/(2λ) - x}`.
pub fn ch_eta(
    d: &ChSpectralData,
    x: &Float,
    t: &Float,
) -> Result<CouplingData<Float>, PeakonError> {
    let two = Float::from_i64(2);
    let points = d
        .eigenvalues
        .iter()
        .zip(&d.couplings0)
        .map(|(l, c)| {
            let exponent = t.clone() / (two.clone() * l) - x;
            (l.clone(), Coupling::Finite(c.clone() * exponent.exp()))
        })
        .collect();
    Ok(CouplingData::new(points)?)
}

/// `u(x, t) = (Φ₋'(0) + Φ₊'(0))/2 + Σ 1/(2λ)`.
pub fn ch_reconstruct_u(d: &ChSpectralData, x: &Float, t: &Float) -> Result<Float, PeakonError> {
    let pair = solve(&ch_eta(d, x, t)?)?;
    let two = Float::from_i64(2);
    let trace = d
        .eigenvalues
        .iter()
        .fold(Float::zero(), |acc, l| acc + l.recip());
    Ok((pair.phi_minus.coeff(1) + pair.phi_plus.coeff(1) + trace) / two)
}

/// `u` as a quarter of the second derivative at zero of
/// `z Φ₋ Φ₊ / W`, with `W` taken from the forward transfer rather than the
/// eigenvalues.
pub fn ch_reconstruct_u_alt(
    d: &ChSpectralData,
    x: &Float,
    t: &Float,
) -> Result<Float, PeakonError> {
    let pair = solve(&ch_eta(d, x, t)?)?;
    let num = (&pair.phi_minus * &pair.phi_plus).shift_up();
    // power series of num / W to order 2, W(0) = 1
    let w = &d.wronskian;
    let w0 = w.coeff(0);
    let mut h: Vec<Float> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut acc = num.coeff(k);
        for (j, hj) in h.iter().enumerate() {
            acc = acc - hj.clone() * w.coeff(k - j);
        }
        h.push(acc / &w0);
    }
    Ok(h[2].clone() / Float::from_i64(2))
}

/// One cell of a sampled field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub t: Float,
    pub x: Float,
    pub u: Result<Float, PeakonError>,
}

/// `u` on the product grid, row-major over `(t, x)`.
pub fn ch_sample_field(d: &ChSpectralData, xs: &[Float], ts: &[Float]) -> Vec<FieldSample> {
    ts.iter()
        .flat_map(|t| {
            xs.iter().map(move |x| FieldSample {
                t: t.clone(),
                x: x.clone(),
                u: ch_reconstruct_u(d, x, t),
            })
        })
        .collect()
}

/// Admissibility of the coupling data at `(x, t)`.
pub fn ch_admissible(d: &ChSpectralData, x: &Float, t: &Float) -> Result<bool, PeakonError> {
    Ok(is_admissible(&ch_eta(d, x, t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn f(x: f64) -> Float {
        Float::from_f64(x)
    }

    #[test]
    fn single_peakon_spectrum() {
        let mp = Multipeakon::new(vec![f(0.0)], vec![f(0.5)]).unwrap();
        let d = ch_forward(&mp).unwrap();
        assert!((d.eigenvalues[0].to_f64() - 1.0).abs() < 1e-60);
        assert!((d.couplings0[0].to_f64() - 1.0).abs() < 1e-60);

        let mp = Multipeakon::new(vec![f(0.0)], vec![f(2.0)]).unwrap();
        let d = ch_forward(&mp).unwrap();
        assert!((d.eigenvalues[0].to_f64() - 0.25).abs() < 1e-60);
        assert_eq!(d.wronskian.coeff(0), Float::one());
    }

    #[test]
    fn eta_at_origin_is_the_coupling() {
        let mp = Multipeakon::new(vec![f(-1.0), f(0.5)], vec![f(1.0), f(0.25)]).unwrap();
        let d = ch_forward(&mp).unwrap();
        let data = ch_eta(&d, &Float::zero(), &Float::zero()).unwrap();
        for (e, c) in data.eta().iter().zip(&d.couplings0) {
            assert_eq!(e.finite().unwrap(), c);
        }
    }

    #[test]
    fn one_peakon_travels() {
        let c = 0.75;
        let mp = Multipeakon::new(vec![f(0.0)], vec![f(c)]).unwrap();
        let d = ch_forward(&mp).unwrap();
        for (x, t) in [(0.3, 0.0), (-2.0, 1.0), (1.5, 2.0), (4.0, 1.0)] {
            let u = ch_reconstruct_u(&d, &f(x), &f(t)).unwrap().to_f64();
            let expected = c * libm::exp(-libm::fabs(x - c * t));
            assert!((u - expected).abs() < 1e-12, "{u} vs {expected}");
            let alt = ch_reconstruct_u_alt(&d, &f(x), &f(t)).unwrap().to_f64();
            assert!((alt - u).abs() < 1e-12);
        }
    }

    #[test]
    fn two_peakon_round_trip() {
        let mp = Multipeakon::new(vec![f(-1.0), f(0.5)], vec![f(1.0), f(0.25)]).unwrap();
        let d = ch_forward(&mp).unwrap();
        for x in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let u = ch_reconstruct_u(&d, &f(x), &Float::zero()).unwrap();
            let e = mp.profile(&f(x));
            assert!((u - e).abs().to_f64() < 1e-12);
        }
    }

    #[test]
    fn empty_field_is_zero() {
        let mp = Multipeakon::<Float>::new(vec![], vec![]).unwrap();
        let d = ch_forward(&mp).unwrap();
        assert!(ch_reconstruct_u(&d, &f(1.0), &f(2.0)).unwrap().is_zero());
        assert!(ch_reconstruct_u_alt(&d, &f(1.0), &f(2.0))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn invalid_peakons() {
        assert!(Multipeakon::new(vec![f(1.0), f(0.0)], vec![f(1.0), f(1.0)]).is_err());
        assert!(Multipeakon::new(vec![f(0.0)], vec![f(-1.0)]).is_err());
    }
}
