use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{build_w, CouplingData, SolutionPair};
use crate::poly::Polynomial;
use crate::roots::{isolate_rational, SturmSequence};
use crate::scalar::{Complex, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Number of upper half-plane sample points.
    pub samples: usize,
    /// Relative tolerance for float-kind comparisons.
    pub rel_tol: f64,
    /// Float coefficients and roots this close (relative) to the values an
    /// exact solution would have are treated as equal. Unused for exact
    /// kinds.
    pub structural_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 64,
            rel_tol: 1e-12,
            structural_tol: 1e-30,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// One line per offending point or sample.
    pub failures: Vec<String>,
}

/// Outcome of [`verify`], one entry per check: `C` (coupling), `G`
/// (Herglotz property), `N` (normalization), `bound` (growth bound) and
/// `residue_signs`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Check {
    name: &'static str,
    failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            failures: Vec::new(),
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

/// Radical inverse of `k` in base `b`.
pub fn halton(mut k: u64, b: u64) -> Rational {
    let base = Rational::from_i64(b as i64);
    let mut f = base.recip();
    let mut value = Rational::zero();
    while k > 0 {
        value += f.clone() * Rational::from_i64((k % b) as i64);
        k /= b;
        f /= &base;
    }
    value
}

/// Halton points (bases 2 and 3) in the open upper half-disk of radius
/// `radius`, with rational coordinates and rational modulus.
pub fn sample_points(count: usize, radius: &Rational) -> Vec<(Complex<Rational>, Rational)> {
    let one = Rational::one();
    let two = Rational::from_i64(2);
    (1..=count as u64)
        .map(|k| {
            let r = radius.clone() * halton(k, 2);
            let h = halton(k, 3);
            let t = h.clone() / (one.clone() - &h);
            let t2 = t.square();
            let den = one.clone() + &t2;
            let re = r.clone() * (one.clone() - &t2) / &den;
            let im = r.clone() * &two * &t / &den;
            (Complex::new(re, im), r)
        })
        .collect()
}

/// Checks a candidate solution against conditions (C), (G), (N), the
/// growth bound `|phi(z)| <= prod (1 + |z|/|l|)` and the residue signs
/// `eta phi_plus^2 / (l W') <= 0`.
pub fn verify<T: Scalar>(
    data: &CouplingData<T>,
    pair: &SolutionPair<T>,
    opts: &VerifyOptions,
) -> VerificationReport {
    let w = data.wronskian();
    let dw = w.derivative();
    let (pm, pp) = (&pair.phi_minus, &pair.phi_plus);
    let tol = opts.rel_tol;
    let bound_at = |r: &T| {
        data.sigma()
            .iter()
            .fold(T::one(), |acc, l| acc * (T::one() + r.clone() / &l.abs()))
    };

    let mut c = Check::new("C");
    for (l, e) in data.points() {
        let scale = bound_at(&l.abs());
        match e.finite() {
            Some(eta) => {
                let lhs = pm.eval(l);
                let rhs = eta.clone() * &pp.eval(l);
                if !(lhs.clone() - &rhs).near_zero(&(scale * (T::one() + eta.abs())), tol) {
                    c.failures
                        .push(format!("lambda={l}: phi_minus={lhs}, eta*phi_plus={rhs}"));
                }
            }
            None => {
                let v = pp.eval(l);
                if !v.near_zero(&scale, tol) {
                    c.failures
                        .push(format!("lambda={l}: eta=inf but phi_plus={v}"));
                }
            }
        }
    }

    let mut n = Check::new("N");
    for (name, p) in [("phi_minus", pm), ("phi_plus", pp)] {
        let v = p.eval(&T::zero());
        if !(v.clone() - T::one()).near_zero(&T::one(), tol) {
            n.failures.push(format!("{name}(0)={v}"));
        }
    }

    let mut residues = Check::new("residue_signs");
    for (l, e) in data.points() {
        if let Some(eta) = e.finite() {
            let den = l.clone() * dw.eval(l);
            let v = eta.clone() * pp.eval(l).square() / &den;
            let scale = eta.abs() * bound_at(&l.abs()).square() / den.abs();
            if v.is_positive() && !v.near_zero(&scale, tol) {
                residues.failures.push(format!("lambda={l}: {v} > 0"));
            }
        }
    }

    let mut g = Check::new("G");
    if let Err(msg) = structural_herglotz(data, pair, &dw, opts) {
        g.failures.push(msg);
    }
    let mut bound = Check::new("bound");
    let radius = data.sigma().iter().fold(Rational::one(), |m, l| {
        Rational::max_of(m, l.abs().to_rational())
    }) * Rational::from_i64(2);
    let slack = T::one() + T::from_f64(if T::is_exact() { 0.0 } else { tol });
    for (zr, rr) in sample_points(opts.samples, &radius) {
        let z = Complex::new(T::from_rational(&zr.re), T::from_rational(&zr.im));
        let r = T::from_rational(&rr);
        let a = pm.eval_complex(&z);
        let b = pp.eval_complex(&z);
        let num = z.mul(&a).mul(&b);
        let wz = w.eval_complex(&z);
        let im = num.mul(&wz.conj()).im;
        if im.is_negative() {
            let scale2 = num.norm_sqr() * wz.norm_sqr();
            let tol2 = T::from_f64(tol * tol);
            if T::is_exact() || im.square() > tol2 * scale2 {
                g.failures
                    .push(format!("Im < 0 at z = {} + {}i", zr.re, zr.im));
            }
        }
        let b2 = bound_at(&r).square() * &slack;
        for (name, v) in [("phi_minus", &a), ("phi_plus", &b)] {
            if v.norm_sqr() > b2 {
                bound.failures.push(format!(
                    "|{name}| exceeds the bound at z = {} + {}i",
                    zr.re, zr.im
                ));
            }
        }
    }

    VerificationReport {
        checks: alloc::vec![
            c.finish(),
            g.finish(),
            n.finish(),
            bound.finish(),
            residues.finish()
        ],
    }
}

/// Structural test of (G): after cancelling common zeros, the zeros of
/// `z phi_minus phi_plus` and of `W` are real, simple and interlacing, the
/// residues `l phi_minus(l) phi_plus(l) / W'(l)` are `<= 0` and a linear
/// term at infinity has positive slope.
fn structural_herglotz<T: Scalar>(
    data: &CouplingData<T>,
    pair: &SolutionPair<T>,
    dw: &Polynomial<T>,
    opts: &VerifyOptions,
) -> Result<(), String> {
    let sigma: Vec<Rational> = data.sigma().iter().map(Scalar::to_rational).collect();
    let pm = lift(&pair.phi_minus, &sigma, opts.structural_tol);
    let pp = lift(&pair.phi_plus, &sigma, opts.structural_tol);
    let deg = |p: &Polynomial<Rational>| p.degree().unwrap_or(0);
    if pm.is_zero() || pp.is_zero() {
        return Err("phi_minus or phi_plus vanishes identically".into());
    }
    if deg(&pm) + deg(&pp) > sigma.len() {
        return Err(format!(
            "degree sum {} exceeds |sigma| = {}",
            deg(&pm) + deg(&pp),
            sigma.len()
        ));
    }

    let num = (&pm * &pp).shift_up();
    let w = build_w(&sigma);
    let (num, den, poles) = if T::is_exact() {
        let g = num.gcd(&w);
        let poles: Vec<Rational> = sigma
            .iter()
            .filter(|l| !g.eval(l).is_zero())
            .cloned()
            .collect();
        (num.div_rem(&g).0, w.div_rem(&g).0, poles)
    } else {
        cancel_approximate(&num, &w, &sigma, opts.structural_tol)?
    };

    zeros_interlace(&num, &poles)?;
    if deg(&num) == deg(&den) + 1 {
        let lead = num.leading().expect("nonzero").clone() / den.leading().expect("nonzero");
        if !lead.is_positive() {
            return Err("negative slope at infinity".into());
        }
    }

    for l in data.sigma() {
        let lr = l.to_rational();
        if !poles.contains(&lr) {
            continue;
        }
        let v = l.clone() * pair.phi_minus.eval(l) * pair.phi_plus.eval(l) / dw.eval(l);
        let scale =
            l.abs() * pair.phi_minus.eval(l).abs() * pair.phi_plus.eval(l).abs() / dw.eval(l).abs();
        if v.is_positive() && !v.near_zero(&scale, opts.rel_tol) {
            return Err(format!("positive residue {v} at lambda = {l}"));
        }
    }
    Ok(())
}

/// Exact rational image of `p`. Float coefficients above the degree an exact
/// solution could reach with nonnegligible size are dropped: the `k`-th
/// coefficient of a solution is bounded by the `k`-th elementary symmetric
/// function of `1/|l|`.
fn lift<T: Scalar>(p: &Polynomial<T>, sigma: &[Rational], tol: f64) -> Polynomial<Rational> {
    let exact = p.to_rational();
    if T::is_exact() {
        return exact;
    }
    let inv = sigma.iter().map(|l| l.abs().recip());
    let mut e = alloc::vec![Rational::one()];
    for x in inv {
        e.push(Rational::zero());
        for k in (1..e.len()).rev() {
            let prev = e[k - 1].clone() * &x;
            e[k] = e[k].clone() + prev;
        }
    }
    let tol = Rational::try_from(tol).unwrap_or_default();
    let mut coeffs = exact.into_coeffs();
    while coeffs.len() > 1 {
        let k = coeffs.len() - 1;
        let bound = e.get(k).cloned().unwrap_or_default() + Rational::one();
        if coeffs[k].abs() <= tol.clone() * bound {
            coeffs.pop();
        } else {
            break;
        }
    }
    Polynomial::new(coeffs)
}

/// Numerator, denominator and remaining poles.
type Cancelled = (Polynomial<Rational>, Polynomial<Rational>, Vec<Rational>);

/// Removes from `num` the real zeros lying within relative distance `tol`
/// of a point of `sigma`, and returns the remaining numerator with the
/// uncancelled poles.
fn cancel_approximate(
    num: &Polynomial<Rational>,
    w: &Polynomial<Rational>,
    sigma: &[Rational],
    tol: f64,
) -> Result<Cancelled, String> {
    let rel = Rational::try_from(tol).unwrap_or_default();
    let scale = sigma
        .iter()
        .fold(Rational::one(), |m, l| Rational::max_of(m, l.abs()));
    let roots = isolate_rational(num, &(rel.clone() * &scale)).map_err(|e| format!("{e}"))?;
    let mut num = num.clone();
    let mut den = w.clone();
    let mut poles = Vec::new();
    for l in sigma {
        let hit = roots.intervals.iter().find(|iv| {
            let mid = iv.midpoint();
            (mid - l).abs() <= rel.clone() * l.abs() + iv.width()
        });
        match hit {
            Some(iv) => {
                let root = iv.midpoint();
                num = num.div_rem(&Polynomial::linear(-root, Rational::one())).0;
                den = den
                    .div_rem(&Polynomial::linear(-l.clone(), Rational::one()))
                    .0;
            }
            None => poles.push(l.clone()),
        }
    }
    Ok((num, den, poles))
}

/// Zeros of `num` must be real, simple and strictly interlacing with the
/// sorted `poles`. Interlacing holds exactly when every gap between
/// consecutive poles holds one zero and the two outer gaps at most one, so
/// Sturm counts at the poles decide it without locating the zeros.
fn zeros_interlace(num: &Polynomial<Rational>, poles: &[Rational]) -> Result<(), String> {
    let degree = num.degree().unwrap_or(0);
    let fail = || Err("zeros and poles do not interlace".into());
    if degree == 0 {
        return if poles.len() <= 1 { Ok(()) } else { fail() };
    }
    if num.gcd(&num.derivative()).degree() != Some(0) {
        return Err("numerator has a multiple zero".into());
    }
    let sturm = SturmSequence::new(num);
    if sturm.count_real() != degree {
        return Err("numerator has non-real zeros".into());
    }
    if poles.iter().any(|l| num.eval(l).is_zero()) {
        return Err("a zero of the numerator sits on a pole".into());
    }
    let (Some(first), Some(last)) = (poles.first(), poles.last()) else {
        return if degree <= 1 { Ok(()) } else { fail() };
    };
    let outer_ok = sturm.count_below(first) <= 1 && sturm.count_above(last) <= 1;
    let inner_ok = poles.windows(2).all(|w| sturm.count_in(&w[0], &w[1]) == 1);
    if outer_ok && inner_ok {
        Ok(())
    } else {
        fail()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{solve, Coupling};
    use crate::scalar::parse_rational;
    use alloc::vec;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn poly(cs: &[&str]) -> Polynomial<Rational> {
        Polynomial::new(cs.iter().map(|s| q(s)).collect())
    }

    fn single(eta: &str) -> CouplingData<Rational> {
        CouplingData::new(vec![(q("1"), Coupling::Finite(q(eta)))]).unwrap()
    }

    #[test]
    fn halton_sequence() {
        assert_eq!(halton(1, 2), q("1/2"));
        assert_eq!(halton(2, 2), q("1/4"));
        assert_eq!(halton(3, 2), q("3/4"));
        assert_eq!(halton(1, 3), q("1/3"));
        assert_eq!(halton(4, 3), q("4/9"));
        assert_eq!(halton(5, 3), q("7/9"));
    }

    #[test]
    fn samples_lie_in_upper_half_disk() {
        for (z, r) in sample_points(64, &q("3")) {
            assert!(z.im.is_positive());
            assert_eq!(z.norm_sqr(), r.square());
            assert!(r < q("3"));
        }
    }

    #[test]
    fn correct_solution_passes() {
        let pair = SolutionPair::new(poly(&["1"]), poly(&["1", "-1/2"]));
        let report = verify(&single("2"), &pair, &VerifyOptions::default());
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn wrong_coupling_fails_c_only() {
        let pair = SolutionPair::new(poly(&["1"]), poly(&["1"]));
        let report = verify(&single("2"), &pair, &VerifyOptions::default());
        assert!(!report.get("C").unwrap().passed);
        assert!(report.get("N").unwrap().passed);
        assert!(report.get("C").unwrap().failures[0].contains("lambda=1"));
    }

    #[test]
    fn two_mass_instance_passes() {
        let d = CouplingData::new(vec![
            (q("3"), Coupling::Finite(q("1"))),
            (q("9"), Coupling::Finite(q("-1"))),
        ])
        .unwrap();
        let pair = SolutionPair::new(poly(&["1", "-1/9"]), poly(&["1", "-1/9"]));
        assert!(verify(&d, &pair, &VerifyOptions::default()).passed());
    }

    #[test]
    fn non_herglotz_pair_fails_g() {
        // z (1 + z)^2 / (1 - z): double zero
        let pair = SolutionPair::new(poly(&["1", "1"]), poly(&["1", "1"]));
        let report = verify(&single("1"), &pair, &VerifyOptions::default());
        assert!(!report.get("G").unwrap().passed);
    }

    #[test]
    fn cancellation_is_handled() {
        let d = CouplingData::new(vec![
            (q("-3"), Coupling::Infinite),
            (q("5"), Coupling::Finite(q("2"))),
        ])
        .unwrap();
        let pair = solve(&d).unwrap();
        assert!(verify(&d, &pair, &VerifyOptions::default()).passed());
    }
}
