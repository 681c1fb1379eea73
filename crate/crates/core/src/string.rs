//! Discrete strings: point masses on `(0, 1)` with Dirichlet ends.
//!
//! The spectral problem `-f'' = z ω f` with `ω = Σ m_i δ_{x_i}` has affine
//! solutions between masses whose slope jumps by `-z m_i f(x_i)` across
//! `x_i`. `φ` starts at `x = 0` with value 0 and slope 1, `ψ` ends at
//! `x = 1` with value 0 and slope -1, and their Wronskian is `W(z) = φ(z, 1)`.
//!
//! For `x` in `(0, 1)` the pair `(φ(·, x)/x, ψ(·, x)/(1 - x))` solves the
//! coupling problem on the spectrum with constants
//! `η(λ) = -γ_λ² / (λ W'(λ)) · (1 - x)/x`. Since
//! `-x Φ₋'(0) = ∫₀ˣ ∫₀ˢ r dω(r) ds`, solving these problems for varying `x`
//! recovers the masses from the spectral data alone.

use alloc::vec::Vec;

use crate::coupling::{build_w, solve, Coupling, CouplingData, CouplingError, SolutionPair};
use crate::poly::Polynomial;
use crate::roots::{isolate_rational, polish_root, AlgebraError};
use crate::scalar::{Float, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StringError {
    #[error("invalid string: {0}")]
    InvalidString(&'static str),
    #[error("x must lie strictly between 0 and 1")]
    OutOfInterval,
    #[error("spectrum is not simple and positive")]
    DegenerateSpectrum,
    #[error("found {found} kinks, expected {expected}")]
    KinkCountMismatch { found: usize, expected: usize },
    #[error("recovery used its budget of {evaluations} evaluations")]
    BudgetExhausted { evaluations: usize },
    #[error(transparent)]
    Solver(#[from] CouplingError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Finitely many point masses on `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteString<T> {
    positions: Vec<T>,
    masses: Vec<T>,
}

impl<T: Scalar> DiscreteString<T> {
    pub fn new(positions: Vec<T>, masses: Vec<T>) -> Result<Self, StringError> {
        if positions.len() != masses.len() {
            return Err(StringError::InvalidString(
                "positions and masses differ in length",
            ));
        }
        if positions.iter().any(|x| !x.is_positive() || *x >= T::one()) {
            return Err(StringError::InvalidString("positions must lie in (0, 1)"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StringError::InvalidString(
                "positions must be strictly increasing",
            ));
        }
        if masses.iter().any(|m| !m.is_positive()) {
            return Err(StringError::InvalidString("masses must be positive"));
        }
        Ok(DiscreteString { positions, masses })
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    fn atoms(&self) -> impl DoubleEndedIterator<Item = (&T, &T)> {
        self.positions.iter().zip(&self.masses)
    }
}

/// Value and (left-continuous) slope of a solution at some `x`, as
/// polynomials in the spectral parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Transfer<T> {
    pub value: Polynomial<T>,
    pub slope: Polynomial<T>,
}

/// `φ(·, x)` and `φ'(·, x-)`.
pub fn phi_at<T: Scalar>(s: &DiscreteString<T>, x: &T) -> Transfer<T> {
    let mut value = Polynomial::zero();
    let mut slope = Polynomial::one();
    let mut at = T::zero();
    for (xi, mi) in s.atoms().take_while(|(xi, _)| *xi < x) {
        value = &value + &slope.scale(&(xi.clone() - &at));
        slope = &slope - &value.shift_up().scale(mi);
        at = xi.clone();
    }
    value = &value + &slope.scale(&(x.clone() - &at));
    Transfer { value, slope }
}

/// `ψ(·, x)` and `ψ'(·, x-)`.
pub fn psi_at<T: Scalar>(s: &DiscreteString<T>, x: &T) -> Transfer<T> {
    let mut value = Polynomial::zero();
    let mut slope = Polynomial::constant(-T::one());
    let mut at = T::one();
    for (xi, mi) in s.atoms().rev().take_while(|(xi, _)| *xi >= x) {
        value = &value - &slope.scale(&(at.clone() - xi));
        slope = &slope + &value.shift_up().scale(mi);
        at = xi.clone();
    }
    value = &value - &slope.scale(&(at - x));
    Transfer { value, slope }
}

/// `W(z) = φ(z, 1)`; equals `ψ φ' - ψ' φ` at every `x`.
pub fn string_wronskian<T: Scalar>(s: &DiscreteString<T>) -> Polynomial<T> {
    phi_at(s, &T::one()).value
}

/// `γ² = ∫₀¹ φ'(λ, x)² dx` for real `λ`.
pub fn norming_constant<T: Scalar>(s: &DiscreteString<T>, lambda: &T) -> T {
    let mut value = T::zero();
    let mut slope = T::one();
    let mut at = T::zero();
    let mut total = T::zero();
    for (xi, mi) in s.atoms() {
        let len = xi.clone() - &at;
        total = total + len.clone() * slope.square();
        value = value + slope.clone() * &len;
        slope = slope - lambda.clone() * mi * &value;
        at = xi.clone();
    }
    total + (T::one() - at) * slope.square()
}

/// Dirichlet eigenvalues, norming constants and Wronskian of a string.
#[derive(Clone, Debug, PartialEq)]
pub struct StringSpectralData<T> {
    pub eigenvalues: Vec<T>,
    pub norming_sq: Vec<T>,
    pub wronskian: Polynomial<T>,
}

impl<T: Scalar> StringSpectralData<T> {
    pub fn new(eigenvalues: Vec<T>, norming_sq: Vec<T>) -> Result<Self, StringError> {
        if eigenvalues.len() != norming_sq.len() {
            return Err(StringError::InvalidString(
                "eigenvalues and norming constants differ in length",
            ));
        }
        if eigenvalues.iter().any(|l| !l.is_positive())
            || eigenvalues.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(StringError::DegenerateSpectrum);
        }
        if norming_sq.iter().any(|g| !g.is_positive()) {
            return Err(StringError::InvalidString(
                "norming constants must be positive",
            ));
        }
        let wronskian = build_w(&eigenvalues);
        Ok(StringSpectralData {
            eigenvalues,
            norming_sq,
            wronskian,
        })
    }
}

/// Spectral data of a string with rational masses, with eigenvalues as
/// floats of `prec` bits. The Wronskian is exact before rounding.
pub fn string_spectrum(
    s: &DiscreteString<Rational>,
    prec: usize,
) -> Result<StringSpectralData<Float>, StringError> {
    let w = string_wronskian(s);
    let mut roots = isolate_rational(&w, &Rational::from_i64(1))?;
    if roots.distinct() != s.len() || !roots.all_simple() {
        return Err(StringError::DegenerateSpectrum);
    }
    // W(0) = 1, so a simple root in (lo, hi] with lo <= 0 is positive
    // exactly when W changes sign on (0, hi]
    for iv in &mut roots.intervals {
        if !iv.lo.is_positive() {
            let at_hi = w.eval(&iv.hi);
            if !iv.hi.is_positive() || at_hi.is_positive() {
                return Err(StringError::DegenerateSpectrum);
            }
            if !at_hi.is_zero() {
                iv.lo = Rational::zero();
            }
        }
    }
    let wf = w.map(|c| Float::with_precision(c, prec));
    let fs = DiscreteString {
        positions: s
            .positions
            .iter()
            .map(|x| Float::with_precision(x, prec))
            .collect(),
        masses: s
            .masses
            .iter()
            .map(|m| Float::with_precision(m, prec))
            .collect(),
    };
    let rel_tol = libm::ldexp(1.0, 8 - prec.min(1000) as i32);
    let mut eigenvalues = Vec::with_capacity(s.len());
    for iv in &roots.intervals {
        let lambda = match iv.exact_value() {
            Some(r) => Float::with_precision(r, prec),
            None => polish_root(
                &wf,
                Float::with_precision(&iv.lo, prec),
                Float::with_precision(&iv.hi, prec),
                rel_tol,
                4 * prec,
            ),
        };
        eigenvalues.push(lambda);
    }
    let norming_sq = eigenvalues
        .iter()
        .map(|l| norming_constant(&fs, l))
        .collect();
    Ok(StringSpectralData {
        eigenvalues,
        norming_sq,
        wronskian: wf,
    })
}

/// Exact spectral data when every eigenvalue is rational.
pub fn exact_spectrum(s: &DiscreteString<Rational>) -> Option<StringSpectralData<Rational>> {
    let w = string_wronskian(s);
    let roots = isolate_rational(&w, &Rational::from_i64(1)).ok()?;
    if roots.distinct() != s.len() || !roots.all_simple() {
        return None;
    }
    let eigenvalues: Vec<Rational> = roots
        .intervals
        .iter()
        .map(|iv| iv.rational_root(&w))
        .collect::<Option<_>>()?;
    let norming_sq = eigenvalues.iter().map(|l| norming_constant(s, l)).collect();
    Some(StringSpectralData {
        eigenvalues,
        norming_sq,
        wronskian: w,
    })
}

/// Coupling constants `η(λ) = -γ_λ² / (λ W'(λ)) · (1 - x)/x`.
pub fn string_eta<T: Scalar>(
    x: &T,
    d: &StringSpectralData<T>,
) -> Result<CouplingData<T>, StringError> {
    if !x.is_positive() || *x >= T::one() {
        return Err(StringError::OutOfInterval);
    }
    let dw = build_w(&d.eigenvalues).derivative();
    let ratio = (T::one() - x) / x;
    let points = d
        .eigenvalues
        .iter()
        .zip(&d.norming_sq)
        .map(|(l, g)| {
            let eta = -(g.clone() / (l.clone() * dw.eval(l))) * &ratio;
            (l.clone(), Coupling::Finite(eta))
        })
        .collect();
    Ok(CouplingData::new(points)?)
}

/// `M(x) = -x Φ₋'(0)` from the solution of the coupling problem at `x`.
pub fn string_moment<T: Scalar>(x: &T, d: &StringSpectralData<T>) -> Result<T, StringError> {
    let pair = solve(&string_eta(x, d)?)?;
    Ok(-(x.clone() * pair.phi_minus.coeff(1)))
}

/// `∫₀ˣ ∫₀ˢ r dω(r) ds = Σ_{x_i < x} m_i x_i (x - x_i)`, straight from the
/// masses.
pub fn direct_moment<T: Scalar>(s: &DiscreteString<T>, x: &T) -> T {
    s.atoms()
        .take_while(|(xi, _)| *xi < x)
        .fold(T::zero(), |acc, (xi, mi)| {
            acc + mi.clone() * xi * &(x.clone() - xi)
        })
}

/// `(φ(·, x)/x, ψ(·, x)/(1 - x))`, the solution the coupling problem at `x`
/// must reproduce.
pub fn normalized_pair<T: Scalar>(s: &DiscreteString<T>, x: &T) -> SolutionPair<T> {
    let phi = phi_at(s, x).value.scale(&x.recip());
    let psi = psi_at(s, x).value.scale(&(T::one() - x).recip());
    SolutionPair::new(phi, psi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoverOptions {
    /// Relative tolerance below which two slopes, or a moment value and a
    /// supporting line, count as equal.
    pub kink_tol: f64,
    /// Maximal number of moment evaluations.
    pub budget: usize,
    /// Step of the one-sided difference quotients.
    pub epsilon: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            kink_tol: 1e-20,
            budget: 400,
            epsilon: 1e-24,
        }
    }
}

struct Moment<'a, T> {
    data: &'a StringSpectralData<T>,
    evaluations: usize,
    budget: usize,
}

impl<T: Scalar> Moment<'_, T> {
    fn at(&mut self, x: &T) -> Result<T, StringError> {
        if self.evaluations >= self.budget {
            return Err(StringError::BudgetExhausted {
                evaluations: self.evaluations,
            });
        }
        self.evaluations += 1;
        string_moment(x, self.data)
    }
}

/// A piece `[a, b]` of the unit interval with the values of `M` and its
/// one-sided slopes just inside the ends.
struct Piece<T> {
    a: T,
    ma: T,
    sa: T,
    b: T,
    mb: T,
    sb: T,
}

/// Recovers the masses from spectral data.
///
/// `M` is convex and piecewise linear with a kink of height `m_i x_i` at each
/// `x_i`. On a piece whose end slopes differ, the two supporting lines meet
/// at `x*`; `M(x*)` lies on them exactly when the piece holds one kink, at
/// `x*`. Otherwise the piece is split at `x*` using one-sided difference
/// quotients there.
pub fn string_recover<T: Scalar>(
    d: &StringSpectralData<T>,
    opts: &RecoverOptions,
) -> Result<DiscreteString<T>, StringError> {
    let n = d.eigenvalues.len();
    if n == 0 {
        return Ok(DiscreteString {
            positions: Vec::new(),
            masses: Vec::new(),
        });
    }
    let mut m = Moment {
        data: d,
        evaluations: 0,
        budget: opts.budget,
    };
    let tol = T::from_f64(opts.kink_tol);
    let eps = T::from_f64(opts.epsilon);
    let one = T::one();

    // M(1) = Σ 1/λ; the slope at the right end from a point just inside
    let m1 = d
        .eigenvalues
        .iter()
        .fold(T::zero(), |acc, l| acc + l.recip());
    let near = one.clone() - T::from_f64(1e-9);
    let m_near = m.at(&near)?;
    let s_right = (m1.clone() - &m_near) / (one.clone() - &near);

    let mut kinks: Vec<(T, T)> = Vec::new();
    let mut stack = alloc::vec![Piece {
        a: T::zero(),
        ma: T::zero(),
        sa: T::zero(),
        b: one,
        mb: m1,
        sb: s_right.clone(),
    }];
    while let Some(p) = stack.pop() {
        let jump = p.sb.clone() - &p.sa;
        if jump.near_zero(&s_right, opts.kink_tol) || jump.is_negative() {
            continue;
        }
        // intersection of y = ma + sa (x - a) and y = mb + sb (x - b)
        let x = (p.ma.clone() - p.sa.clone() * &p.a - &p.mb + p.sb.clone() * &p.b) / &jump;
        if !(x > p.a && x < p.b) {
            return Err(StringError::KinkCountMismatch {
                found: kinks.len(),
                expected: n,
            });
        }
        let line = p.ma.clone() + p.sa.clone() * &(x.clone() - &p.a);
        let mx = m.at(&x)?;
        let scale = T::max_of(mx.abs(), s_right.clone() * &x);
        if (mx.clone() - &line).abs() <= tol.clone() * &scale {
            kinks.push((x, jump));
            continue;
        }
        let left = (mx.clone() - m.at(&(x.clone() - &eps))?) / &eps;
        let right = (m.at(&(x.clone() + &eps))? - &mx) / &eps;
        let inner = right.clone() - &left;
        if !inner.near_zero(&s_right, opts.kink_tol.max(1e-12)) && inner.is_positive() {
            kinks.push((x.clone(), inner));
        }
        stack.push(Piece {
            a: p.a,
            ma: p.ma,
            sa: p.sa,
            b: x.clone(),
            mb: mx.clone(),
            sb: left,
        });
        stack.push(Piece {
            a: x,
            ma: mx,
            sa: right,
            b: p.b,
            mb: p.mb,
            sb: p.sb,
        });
    }
    if kinks.len() != n {
        return Err(StringError::KinkCountMismatch {
            found: kinks.len(),
            expected: n,
        });
    }
    kinks.sort_by(|a, b| crate::scalar::cmp_scalar(&a.0, &b.0));
    let (positions, masses) = kinks
        .into_iter()
        .map(|(x, jump)| {
            let mass = jump / &x;
            (x, mass)
        })
        .unzip();
    DiscreteString::new(positions, masses)
}
