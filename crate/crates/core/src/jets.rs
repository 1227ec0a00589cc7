//! Mixed holomorphic/antiholomorphic derivatives of scalar functions on Cⁿ.
//!
//! Two routes produce a [`Jet`]: [`analytic_jet`] reads exact derivatives off a
//! potential's truncated Taylor expansion, and [`fd_jet`] approximates them from
//! function values alone with central differences in the real coordinates
//! (`∂/∂z = (∂x − i∂y)/2`, `∂/∂z̄ = (∂x + i∂y)/2`) plus one Richardson step.
//! The second route is the oracle for the first.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialField;
use crate::series::{Series, Space, Vars};

pub const MAX_ORDER: usize = 4;

/// A point z = (z¹,…,zⁿ) with finite coordinates, n ≥ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ComplexPoint(Vec<Complex64>);

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(ComplexPoint(coords))
    }

    /// Real-coordinate convenience: `from_parts(&[(re, im), …])`.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn origin(n: usize) -> Self {
        ComplexPoint(vec![Complex64::new(0.0, 0.0); n.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub(crate) fn unchecked(coords: Vec<Complex64>) -> Self {
        ComplexPoint(coords)
    }
}

impl Deref for ComplexPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<[f64; 2]>> for ComplexPoint {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        ComplexPoint::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<ComplexPoint> for Vec<[f64; 2]> {
    fn from(p: ComplexPoint) -> Self {
        p.0.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

/// Derivatives ∂^a ∂̄^b f at a point for all |a| + |b| ≤ order.
///
/// Multi-indices are unordered (mixed partials commute); entries are stored once
/// per sorted multi-index pair.
#[derive(Clone, Debug)]
pub struct Jet {
    n: usize,
    space: Arc<Space>,
    derivs: Vec<Complex64>,
}

impl Jet {
    pub(crate) fn from_series(s: &Series) -> Jet {
        let space = Arc::clone(s.space());
        let derivs = s.coeffs().iter().enumerate().map(|(i, c)| c * space.weight(i)).collect();
        Jet { n: space.nvars() / 2, space, derivs }
    }

    /// Averages each entry with the conjugate of its mirror so a real source has an exactly Hermitian jet.
    fn real_symmetrized(mut self) -> Jet {
        let n = self.n;
        for i in 0..self.derivs.len() {
            let e = self.space.exponents(i);
            let mut m = e[n..].to_vec();
            m.extend_from_slice(&e[..n]);
            let j = self.space.index_of(&m).expect("mirror lies in the same graded space");
            if i == j {
                self.derivs[i].im = 0.0;
            } else if i < j {
                let v = (self.derivs[i] + self.derivs[j].conj()) * 0.5;
                self.derivs[i] = v;
                self.derivs[j] = v.conj();
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.space.degree()
    }

    fn exponent(&self, holo: &[usize], anti: &[usize]) -> Vec<u8> {
        let mut e = vec![0u8; 2 * self.n];
        for &a in holo {
            e[a] += 1;
        }
        for &b in anti {
            e[self.n + b] += 1;
        }
        e
    }

    /// ∂^holo ∂̄^anti f, or `None` beyond the jet's order.
    pub fn get(&self, holo: &[usize], anti: &[usize]) -> Option<Complex64> {
        if holo.len() + anti.len() > self.order() {
            return None;
        }
        self.space.index_of(&self.exponent(holo, anti)).map(|i| self.derivs[i])
    }

    /// Panics if the requested order exceeds the jet's order.
    pub fn deriv(&self, holo: &[usize], anti: &[usize]) -> Complex64 {
        self.get(holo, anti).unwrap_or_else(|| {
            panic!("derivative {holo:?};{anti:?} beyond jet order {}", self.order())
        })
    }

    pub fn value(&self) -> f64 {
        self.derivs[0].re
    }

    pub fn value_complex(&self) -> Complex64 {
        self.derivs[0]
    }

    /// ∂f/∂z^a
    pub fn d(&self, a: usize) -> Complex64 {
        self.deriv(&[a], &[])
    }

    /// ∂f/∂z̄^b
    pub fn dbar(&self, b: usize) -> Complex64 {
        self.deriv(&[], &[b])
    }

    /// ∂²f/∂z^a∂z̄^b
    pub fn d_dbar(&self, a: usize, b: usize) -> Complex64 {
        self.deriv(&[a], &[b])
    }

    /// ∂²f/∂z^a∂z^b
    pub fn d2(&self, a: usize, b: usize) -> Complex64 {
        self.deriv(&[a, b], &[])
    }

    /// ∂³f/∂z^a∂z^b∂z̄^c
    pub fn d2_dbar(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.deriv(&[a, b], &[c])
    }

    /// All entries as (sorted holomorphic indices, sorted antiholomorphic indices, value).
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, Complex64)> + '_ {
        (0..self.derivs.len()).map(move |i| {
            let e = self.space.exponents(i);
            let mut holo = Vec::new();
            let mut anti = Vec::new();
            for a in 0..self.n {
                holo.extend(std::iter::repeat_n(a, e[a] as usize));
                anti.extend(std::iter::repeat_n(a, e[self.n + a] as usize));
            }
            (holo, anti, self.derivs[i])
        })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let space = Space::get(2 * self.n, order.min(self.order()));
        Jet { n: self.n, derivs: self.derivs[..space.len()].to_vec(), space }
    }

    /// a·self + b·other on the common order.
    pub fn combine(&self, a: f64, other: &Jet, b: f64) -> Jet {
        let order = self.order().min(other.order());
        let (x, y) = (self.truncate(order), other.truncate(order));
        let derivs = x.derivs.iter().zip(&y.derivs).map(|(p, q)| p * a + q * b).collect();
        Jet { n: self.n, space: x.space, derivs }
    }

    /// Largest entrywise difference over entries of order in `orders`.
    pub fn max_abs_diff(&self, other: &Jet, orders: std::ops::RangeInclusive<usize>) -> f64 {
        let order = self.order().min(other.order());
        let mut worst = 0.0f64;
        for i in 0..Space::get(2 * self.n, order).len() {
            let deg: usize = self.space.exponents(i).iter().map(|&k| k as usize).sum();
            if orders.contains(&deg) {
                worst = worst.max((self.derivs[i] - other.derivs[i]).norm());
            }
        }
        worst
    }

    /// Largest |∂^a∂̄^b f − conj(∂^b∂̄^a f)| over all entries.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (holo, anti, v) in self.entries() {
            let mirror = self.deriv(&anti, &holo);
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }
}

/// Exact jet from the potential's closed-form expansion.
pub fn analytic_jet(p: &PotentialField, z: &ComplexPoint, order: usize) -> Result<Jet> {
    if order > p.analytic_order() {
        return Err(Error::UnsupportedOrder { requested: order, supported: p.analytic_order() });
    }
    p.check_point(z)?;
    let vars = Vars::new(z, order);
    let s = p.formula().expand(&vars)?;
    Ok(Jet::from_series(&s).real_symmetrized())
}

/// Finite-difference steps: `low` for derivative orders 1–2, `high` for 3–4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSteps {
    pub low: f64,
    pub high: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { low: 1e-4, high: 1e-2 }
    }
}

impl FdSteps {
    pub fn uniform(h: f64) -> Self {
        FdSteps { low: h, high: h }
    }

    fn for_order(&self, order: usize) -> f64 {
        if order <= 2 {
            self.low
        } else {
            self.high
        }
    }

    fn validate(&self) -> Result<()> {
        for h in [self.low, self.high] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("finite-difference step {h} must be positive")));
            }
        }
        Ok(())
    }
}

/// O(h²) central stencil for the m-th derivative: (offset, weight) pairs.
fn stencil_1d(m: u8) -> &'static [(i8, f64)] {
    match m {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("derivative order per coordinate is at most {MAX_ORDER}"),
    }
}

/// Coefficients of ((X − iY)/2)^a ((X + iY)/2)^b indexed by the power of Y.
fn wirtinger_poly(a: u8, b: u8) -> Vec<Complex64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let factors = std::iter::repeat_n(Complex64::new(0.0, -0.5), a as usize)
        .chain(std::iter::repeat_n(Complex64::new(0.0, 0.5), b as usize));
    for y_coef in factors {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c * 0.5;
            next[j + 1] += c * y_coef;
        }
        poly = next;
    }
    poly
}

struct FdEngine<'a, F> {
    f: &'a F,
    z: &'a ComplexPoint,
    steps: FdSteps,
    values: HashMap<(u64, Vec<i8>), Complex64>,
    partials: HashMap<Vec<u8>, Complex64>,
}

impl<F> FdEngine<'_, F>
where
    F: Fn(&ComplexPoint) -> Result<Complex64>,
{
    fn eval(&mut self, h: f64, offsets: &[i8]) -> Result<Complex64> {
        let key = (h.to_bits(), offsets.to_vec());
        if let Some(v) = self.values.get(&key) {
            return Ok(*v);
        }
        let n = self.z.dim();
        let coords = (0..n)
            .map(|a| self.z[a] + Complex64::new(offsets[a] as f64 * h, offsets[n + a] as f64 * h))
            .collect();
        let point = ComplexPoint::unchecked(coords);
        let v = (self.f)(&point)?;
        if !v.is_finite() {
            let value = if v.re.is_finite() { v.im } else { v.re };
            return Err(Error::NonFiniteEvaluation { point, value });
        }
        self.values.insert(key, v);
        Ok(v)
    }

    fn stencil_sum(&mut self, m: &[u8], h: f64) -> Result<Complex64> {
        let mut terms: Vec<(Vec<i8>, f64)> = vec![(vec![0i8; m.len()], 1.0)];
        for (k, &mk) in m.iter().enumerate() {
            if mk == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(terms.len() * 5);
            for (off, w) in &terms {
                for &(o, w1) in stencil_1d(mk) {
                    let mut off = off.clone();
                    off[k] = o;
                    next.push((off, w * w1));
                }
            }
            terms = next;
        }
        let degree: i32 = m.iter().map(|&k| k as i32).sum();
        let center = self.eval(h, &vec![0i8; m.len()])?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (off, w) in terms {
            acc += (self.eval(h, &off)? - center) * w;
        }
        Ok(acc / h.powi(degree))
    }

    /// Real partial ∂^m f in coordinates (x¹…xⁿ, y¹…yⁿ), Richardson-extrapolated.
    fn real_partial(&mut self, m: &[u8]) -> Result<Complex64> {
        if let Some(v) = self.partials.get(m) {
            return Ok(*v);
        }
        let degree: usize = m.iter().map(|&k| k as usize).sum();
        let h = self.steps.for_order(degree);
        let coarse = self.stencil_sum(m, h)?;
        let fine = self.stencil_sum(m, h / 2.0)?;
        let v = (fine * 4.0 - coarse) / 3.0;
        self.partials.insert(m.to_vec(), v);
        Ok(v)
    }

    fn complex_partial(&mut self, e: &[u8]) -> Result<Complex64> {
        let n = self.z.dim();
        // Expand Π_α ∂_α^{a_α} ∂̄_α^{b_α} into real partials.
        let mut combos: Vec<(Vec<u8>, Complex64)> = vec![(vec![0u8; 2 * n], Complex64::new(1.0, 0.0))];
        for a in 0..n {
            let (ha, hb) = (e[a], e[n + a]);
            if ha + hb == 0 {
                continue;
            }
            let poly = wirtinger_poly(ha, hb);
            let mut next = Vec::new();
            for (m, c) in &combos {
                for (j, pc) in poly.iter().enumerate() {
                    if pc.norm() == 0.0 {
                        continue;
                    }
                    let mut m = m.clone();
                    m[a] = ha + hb - j as u8;
                    m[n + a] = j as u8;
                    next.push((m, c * pc));
                }
            }
            combos = next;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in combos {
            acc += c * self.real_partial(&m)?;
        }
        Ok(acc)
    }
}

/// Finite-difference jet of a complex-valued function.
pub fn fd_jet_complex<F>(f: F, z: &ComplexPoint, order: usize, steps: FdSteps) -> Result<Jet>
where
    F: Fn(&ComplexPoint) -> Result<Complex64>,
{
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder { requested: order, supported: MAX_ORDER });
    }
    steps.validate()?;
    let n = z.dim();
    let space = Space::get(2 * n, order);
    let mut engine = FdEngine { f: &f, z, steps, values: HashMap::new(), partials: HashMap::new() };
    let mut derivs = Vec::with_capacity(space.len());
    derivs.push(engine.eval(steps.low, &vec![0i8; 2 * n])?);
    for i in 1..space.len() {
        derivs.push(engine.complex_partial(space.exponents(i))?);
    }
    Ok(Jet { n, space, derivs })
}

/// Finite-difference jet of a real-valued function (the oracle for [`analytic_jet`]).
pub fn fd_jet<F>(f: F, z: &ComplexPoint, order: usize, steps: FdSteps) -> Result<Jet>
where
    F: Fn(&ComplexPoint) -> Result<f64>,
{
    if order == 0 {
        return Err(Error::InvalidParameter("finite-difference order must be at least 1".into()));
    }
    fd_jet_complex(|p| f(p).map(|v| Complex64::new(v, 0.0)), z, order, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(parts: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint::from_parts(parts).unwrap()
    }

    #[test]
    fn point_validation() {
        assert!(ComplexPoint::new(vec![]).is_err());
        assert!(ComplexPoint::from_parts(&[(f64::NAN, 0.0)]).is_err());
        let p = pt(&[(0.1, 0.2), (0.3, -0.4)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[[0.1,0.2],[0.3,-0.4]]");
        let back: ComplexPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn quadratic_form_at_origin() {
        let f = |p: &ComplexPoint| Ok(p.norm_sq());
        let jet = fd_jet(f, &ComplexPoint::origin(2), 2, FdSteps::default()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((jet.d_dbar(a, b) - Complex64::new(want, 0.0)).norm() < 1e-9);
                assert!(jet.d2(a, b).norm() < 1e-9);
                assert!(jet.deriv(&[], &[a, b]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn ball_potential_first_derivative() {
        // ∂/∂z¹ of −log(1−‖z‖²) is z̄¹/(1−‖z‖²) = 0.5/0.75 at (0.5, 0)
        let f = |p: &ComplexPoint| Ok(-(1.0 - p.norm_sq()).ln());
        let jet = fd_jet(f, &pt(&[(0.5, 0.0), (0.0, 0.0)]), 1, FdSteps::default()).unwrap();
        assert!((jet.d(0) - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-9);
        assert!(jet.d(1).norm() < 1e-12);
    }

    #[test]
    fn constant_function_has_vanishing_derivatives() {
        let jet = fd_jet(|_| Ok(3.25), &pt(&[(0.2, 0.1), (-0.3, 0.0)]), 4, FdSteps::default()).unwrap();
        for (holo, anti, v) in jet.entries() {
            if holo.len() + anti.len() >= 1 {
                assert!(v.norm() <= 1e-10, "{holo:?} {anti:?} {v}");
            }
        }
        assert_eq!(jet.value(), 3.25);
    }

    #[test]
    fn holomorphic_polynomial_derivatives() {
        // f = Re(z³) = (z³ + z̄³)/2 : ∂³f/∂z³ = 3, mixed entries vanish
        let f = |p: &ComplexPoint| Ok((p[0] * p[0] * p[0]).re);
        let jet = fd_jet(f, &pt(&[(0.3, 0.2)]), 4, FdSteps::default()).unwrap();
        assert!((jet.deriv(&[0, 0, 0], &[]) - Complex64::new(3.0, 0.0)).norm() < 1e-6);
        assert!(jet.deriv(&[0, 0], &[0]).norm() < 1e-6);
        assert!(jet.deriv(&[0, 0, 0, 0], &[]).norm() < 1e-3);
    }

    #[test]
    fn non_finite_value_names_the_stencil_point() {
        let f = |p: &ComplexPoint| Ok(if p[0].re > 0.0 { f64::INFINITY } else { 0.0 });
        let err = fd_jet(f, &pt(&[(0.0, 0.0)]), 1, FdSteps::default()).unwrap_err();
        match err {
            Error::NonFiniteEvaluation { point, .. } => assert!(point[0].re > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_orders_and_steps() {
        let f = |p: &ComplexPoint| Ok(p.norm_sq());
        let z = ComplexPoint::origin(1);
        assert!(fd_jet(f, &z, 5, FdSteps::default()).is_err());
        assert!(fd_jet(f, &z, 0, FdSteps::default()).is_err());
        assert!(fd_jet(f, &z, 2, FdSteps::uniform(0.0)).is_err());
    }

    #[test]
    fn wirtinger_expansion() {
        // ∂∂̄ = (X² + Y²)/4
        let p = wirtinger_poly(1, 1);
        assert_eq!(p.len(), 3);
        assert!((p[0] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(p[1].norm() < 1e-15);
        assert!((p[2] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    }
}
