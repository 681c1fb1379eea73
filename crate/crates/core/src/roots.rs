//! Real-root isolation with Sturm sequences, and interlacing checks.

use alloc::vec;
use alloc::vec::Vec;

use dashu_int::ops::{Gcd, UnsignedAbs};
use dashu_int::{IBig, UBig};

use crate::poly::Polynomial;
use crate::scalar::{Rational, Scalar, ScalarKind};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("root isolation needs exact coefficients; lift the float polynomial first")]
    FloatKindUnsupported,
    #[error("root isolation of the zero polynomial")]
    ZeroPolynomial,
    #[error("isolation width must be positive")]
    NonPositiveWidth,
    #[error("input sequence is not strictly increasing")]
    UnsortedInput,
}

/// Half-open interval `(lo, hi]` holding exactly one distinct real root, or
/// the single point `lo == hi` when the root was found exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity: usize,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact_value(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn midpoint(&self) -> Rational {
        (self.lo.clone() + &self.hi) / Rational::from_i64(2)
    }

    pub fn width(&self) -> Rational {
        self.hi.clone() - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if self.is_exact() {
            *x == self.lo
        } else {
            *x > self.lo && *x <= self.hi
        }
    }

    /// Simplest rational in the interval if it is a root of `p`.
    pub fn rational_root(&self, p: &Polynomial<Rational>) -> Option<Rational> {
        if let Some(r) = self.exact_value() {
            return Some(r.clone());
        }
        let candidate = Rational::simplest_in(self.lo.clone(), self.hi.clone());
        if p.eval(&candidate).is_zero() {
            return Some(candidate);
        }
        if p.eval(&self.hi).is_zero() {
            return Some(self.hi.clone());
        }
        None
    }
}

/// Sorted isolating intervals of the distinct real roots.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RealRoots {
    pub intervals: Vec<RootInterval>,
}

impl RealRoots {
    pub fn distinct(&self) -> usize {
        self.intervals.len()
    }

    pub fn count_with_multiplicity(&self) -> usize {
        self.intervals.iter().map(|i| i.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.intervals.iter().all(|i| i.multiplicity == 1)
    }

    pub fn midpoints(&self) -> Vec<Rational> {
        self.intervals.iter().map(RootInterval::midpoint).collect()
    }
}

/// Positive multiple of `p` with coprime integer coefficients. Signs of
/// values are unchanged, and evaluation needs no rational normalization.
#[derive(Clone, Debug)]
struct IntPoly(Vec<IBig>);

impl IntPoly {
    fn new(p: &Polynomial<Rational>) -> Self {
        let lcm = p.coeffs().iter().fold(UBig::ONE, |l, c| {
            let d = c.denominator();
            let g = (&l).gcd(d);
            l / g * d
        });
        let lcm = IBig::from(lcm);
        let ints: Vec<IBig> = p
            .coeffs()
            .iter()
            .map(|c| c.numerator() * (&lcm / IBig::from(c.denominator().clone())))
            .collect();
        let content = ints
            .iter()
            .filter(|c| **c != IBig::ZERO)
            .fold(UBig::ZERO, |g, c| {
                if g == UBig::ZERO {
                    c.unsigned_abs()
                } else {
                    (&g).gcd(c)
                }
            });
        if content > UBig::ONE {
            let content = IBig::from(content);
            IntPoly(ints.into_iter().map(|c| c / &content).collect())
        } else {
            IntPoly(ints)
        }
    }

    /// Sign of `p(x)`, from `den^n p(num/den)` in integer arithmetic.
    fn sign_at(&self, x: &Rational) -> i8 {
        let (num, den) = (x.numerator(), IBig::from(x.denominator().clone()));
        let Some((lead, rest)) = self.0.split_last() else {
            return 0;
        };
        let mut acc = lead.clone();
        let mut den_pow = IBig::ONE;
        for c in rest.iter().rev() {
            den_pow *= &den;
            acc = acc * num + c * &den_pow;
        }
        match acc.signum() {
            s if s == IBig::ZERO => 0,
            s if s == IBig::ONE => 1,
            _ => -1,
        }
    }
}

/// Sturm chain of a polynomial: `p, p', -rem(p, p'), ...`.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    ints: Vec<IntPoly>,
}

impl SturmSequence {
    pub fn new(p: &Polynomial<Rational>) -> Self {
        let mut chain = vec![p.clone()];
        let mut prev = p.clone();
        let mut cur = p.derivative();
        while !cur.is_zero() {
            chain.push(cur.clone());
            let (_, r) = prev.div_rem(&cur);
            prev = cur;
            cur = -&r;
        }
        SturmSequence {
            ints: chain.iter().map(IntPoly::new).collect(),
        }
    }

    /// Sign of the first chain element at `x`.
    fn sign_at(&self, x: &Rational) -> i8 {
        self.ints[0].sign_at(x)
    }

    /// Sign changes at `x`, zeros skipped.
    pub fn sign_changes(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.ints {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Sign changes at `+inf` (`positive`) or `-inf`.
    fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.ints {
            let Some(lead) = p.0.last() else { continue };
            let d = p.0.len() - 1;
            let mut s: i8 = if *lead < IBig::ZERO { -1 } else { 1 };
            if !positive && d % 2 == 1 {
                s = -s;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count_in(&self, a: &Rational, b: &Rational) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }

    /// Distinct real roots below `x`, for `x` not a root.
    pub fn count_below(&self, x: &Rational) -> usize {
        self.sign_changes_at_infinity(false)
            .saturating_sub(self.sign_changes(x))
    }

    /// Distinct real roots above `x`.
    pub fn count_above(&self, x: &Rational) -> usize {
        self.sign_changes(x)
            .saturating_sub(self.sign_changes_at_infinity(true))
    }

    /// Distinct real roots on the whole line.
    pub fn count_real(&self) -> usize {
        self.sign_changes_at_infinity(false)
            .saturating_sub(self.sign_changes_at_infinity(true))
    }
}

/// `p / gcd(p, p')`.
pub fn squarefree_part(p: &Polynomial<Rational>) -> Polynomial<Rational> {
    let g = p.gcd(&p.derivative());
    if g.degree() == Some(0) {
        return p.clone();
    }
    p.div_rem(&g).0
}

/// Power of two strictly above every root modulus (Cauchy bound).
fn root_bound(p: &Polynomial<Rational>) -> Rational {
    let lead = p.leading().expect("nonzero").abs();
    let n = p.degree().unwrap_or(0);
    let m = p.coeffs()[..n].iter().fold(Rational::zero(), |m, c| {
        Rational::max_of(m, c.abs() / &lead)
    });
    let bound = m + Rational::one();
    let mut b = Rational::one();
    while b <= bound {
        b *= Rational::from_i64(2);
    }
    b
}

/// Isolates every distinct real root of `p` into an interval of width at
/// most `width`, recording multiplicities.
pub fn isolate_real_roots<T: Scalar>(
    p: &Polynomial<T>,
    width: &T,
) -> Result<RealRoots, AlgebraError> {
    if T::KIND == ScalarKind::Float {
        return Err(AlgebraError::FloatKindUnsupported);
    }
    isolate_rational(&p.to_rational(), &width.to_rational())
}

/// Exact isolation on rational coefficients.
pub fn isolate_rational(
    p: &Polynomial<Rational>,
    width: &Rational,
) -> Result<RealRoots, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    if !width.is_positive() {
        return Err(AlgebraError::NonPositiveWidth);
    }
    if p.degree() == Some(0) {
        return Ok(RealRoots::default());
    }
    let sqf = squarefree_part(p);
    let sturm = SturmSequence::new(&sqf);
    let b = root_bound(&sqf);
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    let two = Rational::from_i64(2);
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count_in(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(refine(&sturm, lo, hi, width));
            continue;
        }
        let mid = (lo.clone() + &hi) / &two;
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("rationals are ordered"));

    let chain = multiplicity_chain(p);
    for iv in &mut out {
        iv.multiplicity = chain
            .iter()
            .take_while(|(g, s)| match iv.exact_value() {
                Some(r) => g.eval(r).is_zero(),
                None => s.count_in(&iv.lo, &iv.hi) > 0,
            })
            .count();
    }
    Ok(RealRoots { intervals: out })
}

/// Shrinks `(lo, hi]` holding one root of `sqf` until it is narrower than
/// `width`, stopping early on an exact hit.
fn refine(
    sturm: &SturmSequence,
    mut lo: Rational,
    mut hi: Rational,
    width: &Rational,
) -> RootInterval {
    let two = Rational::from_i64(2);
    if sturm.sign_at(&hi) == 0 {
        return RootInterval {
            lo: hi.clone(),
            hi,
            multiplicity: 1,
        };
    }
    while hi.clone() - &lo > *width {
        let mid = (lo.clone() + &hi) / &two;
        if sturm.sign_at(&mid) == 0 {
            return RootInterval {
                lo: mid.clone(),
                hi: mid,
                multiplicity: 1,
            };
        }
        if sturm.count_in(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RootInterval {
        lo,
        hi,
        multiplicity: 1,
    }
}

/// `g_0 = p`, `g_{j+1} = gcd(g_j, g_j')`, paired with the Sturm chain of
/// each squarefree part. A root of multiplicity `k` is a root of
/// `g_0 .. g_{k-1}` only.
fn multiplicity_chain(p: &Polynomial<Rational>) -> Vec<(Polynomial<Rational>, SturmSequence)> {
    let mut out = Vec::new();
    let mut g = p.clone();
    while g.degree().is_some_and(|d| d > 0) {
        let s = squarefree_part(&g);
        out.push((g.clone(), SturmSequence::new(&s)));
        g = g.gcd(&g.derivative());
    }
    out
}

/// Safeguarded Newton iteration for a simple root of `p` with a sign change
/// on `[lo, hi]`. Steps leaving the current bracket fall back to bisection.
/// Stops when a step is below `rel_tol` relative to the iterate.
pub fn polish_root<T: Scalar>(p: &Polynomial<T>, lo: T, hi: T, rel_tol: f64, max_iter: usize) -> T {
    let dp = p.derivative();
    let two = T::from_i64(2);
    let lo_negative = p.eval(&lo).is_negative();
    let (mut a, mut b) = (lo, hi);
    let mut x = (a.clone() + &b) / &two;
    let tol = T::from_f64(rel_tol);
    for _ in 0..max_iter {
        let fx = p.eval(&x);
        if fx.is_zero() {
            return x;
        }
        if fx.is_negative() == lo_negative {
            a = x.clone();
        } else {
            b = x.clone();
        }
        let d = dp.eval(&x);
        let mut next = if d.is_zero() {
            (a.clone() + &b) / &two
        } else {
            x.clone() - fx / d
        };
        if !(next > a && next < b) {
            next = (a.clone() + &b) / &two;
        }
        let step = (next.clone() - &x).abs();
        x = next;
        if step <= tol.clone() * x.abs() {
            break;
        }
    }
    x
}

/// True iff, after discarding values common to both sequences, the merged
/// sequence alternates between `a` and `b`.
pub fn check_interlacing<T: PartialOrd + Clone>(a: &[T], b: &[T]) -> Result<bool, AlgebraError> {
    let sorted = |s: &[T]| s.windows(2).all(|w| w[0] < w[1]);
    if !sorted(a) || !sorted(b) {
        return Err(AlgebraError::UnsortedInput);
    }
    // merge, dropping common elements
    let mut tags = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            tags.push(false);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            tags.push(true);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    Ok(tags.windows(2).all(|w| w[0] != w[1]))
}
