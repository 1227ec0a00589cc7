//! Truncated multivariate Taylor arithmetic in the variables (dz¹,…,dzⁿ, dz̄¹,…,dz̄ⁿ).
//!
//! A [`Series`] is the Taylor polynomial of a (generally non-holomorphic) function
//! around a base point, truncated at a fixed total degree. Holomorphic and
//! antiholomorphic increments are independent variables, so the coefficient of
//! `dz^a dz̄^b` times `a! b!` is exactly `∂^a ∂̄^b f` at the base point. Every
//! closed-form potential in the crate is written once against this type and
//! yields both values (degree 0) and exact derivatives (degree ≤ 4).
//!
//! Monomials are enumerated degree by degree with a fixed order inside each
//! degree, so the monomial list of a lower-degree space is a prefix of the list
//! of any higher-degree space with the same number of variables. Truncation and
//! differentiation rely on this.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Monomial layout shared by all series with the same variable count and degree.
pub struct Space {
    nvars: usize,
    degree: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: monomial i times monomial j is monomial k.
    mul: Vec<(u32, u32, u32)>,
    /// Π e_v! per monomial.
    weight: Vec<f64>,
    /// Monomial index after swapping dz ↔ dz̄.
    conj_perm: Vec<u32>,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("nvars", &self.nvars)
            .field("degree", &self.degree)
            .field("len", &self.exps.len())
            .finish()
    }
}

fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>) {
    if cur.len() + 1 == parts {
        cur.push(total as u8);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in (0..=total).rev() {
        cur.push(first as u8);
        compositions(total - first, parts, out, cur);
        cur.pop();
    }
}

impl Space {
    /// Shared space for `nvars` variables (always even: holomorphic then antiholomorphic)
    /// truncated at total `degree`.
    pub fn get(nvars: usize, degree: usize) -> Arc<Space> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Space>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(space) = cache.lock().expect("space cache poisoned").get(&(nvars, degree)) {
            return Arc::clone(space);
        }
        let space = Arc::new(Space::build(nvars, degree));
        cache
            .lock()
            .expect("space cache poisoned")
            .entry((nvars, degree))
            .or_insert(space)
            .clone()
    }

    fn build(nvars: usize, degree: usize) -> Space {
        assert!(nvars.is_multiple_of(2) && nvars > 0, "series spaces pair dz with dz̄");
        let mut exps = Vec::new();
        let mut offsets = Vec::with_capacity(degree + 2);
        for d in 0..=degree {
            offsets.push(exps.len());
            compositions(d, nvars, &mut exps, &mut Vec::with_capacity(nvars));
        }
        offsets.push(exps.len());
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul = Vec::new();
        let mut scratch = vec![0u8; nvars];
        for (i, ei) in exps.iter().enumerate() {
            let limit = offsets[degree - deg(ei) + 1];
            for (j, ej) in exps[..limit].iter().enumerate() {
                for v in 0..nvars {
                    scratch[v] = ei[v] + ej[v];
                }
                mul.push((i as u32, j as u32, index[&scratch] as u32));
            }
        }

        let weight = exps
            .iter()
            .map(|e| e.iter().map(|&k| factorial(k as usize)).product())
            .collect();

        let half = nvars / 2;
        let conj_perm = exps
            .iter()
            .map(|e| {
                let mut swapped = e[half..].to_vec();
                swapped.extend_from_slice(&e[..half]);
                index[&swapped] as u32
            })
            .collect();

        Space { nvars, degree, exps, index, mul, weight, conj_perm }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Π e_v! for monomial `i`; derivative = coefficient × weight.
    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Truncated Taylor polynomial with complex coefficients.
#[derive(Clone)]
pub struct Series {
    space: Arc<Space>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("nvars", &self.space.nvars)
            .field("degree", &self.space.degree)
            .field("value", &self.coeffs[0])
            .finish()
    }
}

impl Series {
    pub fn constant(space: &Arc<Space>, value: Complex64) -> Series {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); space.len()];
        coeffs[0] = value;
        Series { space: Arc::clone(space), coeffs }
    }

    pub fn real(space: &Arc<Space>, value: f64) -> Series {
        Series::constant(space, Complex64::new(value, 0.0))
    }

    pub fn zero(space: &Arc<Space>) -> Series {
        Series::real(space, 0.0)
    }

    /// `value + d(var)`: the series of a coordinate function.
    pub fn variable(space: &Arc<Space>, var: usize, value: Complex64) -> Series {
        let mut s = Series::constant(space, value);
        if space.degree >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            s.coeffs[space.index[&e]] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub(crate) fn from_coeffs(space: &Arc<Space>, coeffs: Vec<Complex64>) -> Series {
        assert_eq!(coeffs.len(), space.len());
        Series { space: Arc::clone(space), coeffs }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Value at the base point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn scale(&self, k: Complex64) -> Series {
        Series { space: Arc::clone(&self.space), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn scale_re(&self, k: f64) -> Series {
        Series { space: Arc::clone(&self.space), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn add_const(&self, k: Complex64) -> Series {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    fn check_space(&self, other: &Series) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "series arithmetic across different spaces"
        );
    }

    fn mul_ref(&self, other: &Series) -> Series {
        self.check_space(other);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.space.len()];
        for &(i, j, k) in &self.space.mul {
            let a = self.coeffs[i as usize];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            coeffs[k as usize] += a * other.coeffs[j as usize];
        }
        Series { space: Arc::clone(&self.space), coeffs }
    }

    /// Σ_k c_k u^k for a series `u` with vanishing constant term.
    fn compose_nilpotent(u: &Series, coeffs: &[Complex64]) -> Series {
        let top = coeffs.len().min(u.space.degree + 1);
        let mut acc = Series::constant(&u.space, coeffs[top - 1]);
        for k in (0..top - 1).rev() {
            acc = acc.mul_ref(u).add_const(coeffs[k]);
        }
        acc
    }

    /// Substitutes `self − value` into a univariate Taylor polynomial
    /// `Σ c_k (x − x₀)^k` whose base point `x₀` is this series' value.
    pub fn compose(&self, coeffs: &[Complex64]) -> Series {
        let u = self.add_const(-self.value());
        Series::compose_nilpotent(&u, coeffs)
    }

    fn nilpotent_ratio(&self, what: &str) -> Result<(Complex64, Series)> {
        let c0 = self.value();
        if c0.norm() == 0.0 || !c0.is_finite() {
            return Err(Error::Singular(format!("{what} of a series with value {c0}")));
        }
        let u = self.scale(c0.inv()).add_const(Complex64::new(-1.0, 0.0));
        Ok((c0, u))
    }

    pub fn recip(&self) -> Result<Series> {
        let (c0, u) = self.nilpotent_ratio("reciprocal")?;
        let coeffs: Vec<Complex64> = (0..=self.degree())
            .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Ok(Series::compose_nilpotent(&u, &coeffs).scale(c0.inv()))
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Series> {
        let (c0, u) = self.nilpotent_ratio("logarithm")?;
        let mut coeffs = vec![c0.ln()];
        for k in 1..=self.degree() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(Complex64::new(sign / k as f64, 0.0));
        }
        Ok(Series::compose_nilpotent(&u, &coeffs))
    }

    pub fn exp(&self) -> Series {
        let c0 = self.value();
        let u = self.add_const(-c0);
        let e0 = c0.exp();
        let coeffs: Vec<Complex64> = (0..=self.degree()).map(|k| e0 / factorial(k)).collect();
        Series::compose_nilpotent(&u, &coeffs)
    }

    /// Principal power `self^p`.
    pub fn powf(&self, p: f64) -> Result<Series> {
        let (c0, u) = self.nilpotent_ratio("power")?;
        let mut coeffs = Vec::with_capacity(self.degree() + 1);
        let mut binom = 1.0;
        for k in 0..=self.degree() {
            coeffs.push(Complex64::new(binom, 0.0));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        Ok(Series::compose_nilpotent(&u, &coeffs).scale(c0.powf(p)))
    }

    /// Complex conjugate function: swaps dz ↔ dz̄ and conjugates coefficients.
    pub fn conj(&self) -> Series {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[self.space.conj_perm[i] as usize] = c.conj();
        }
        Series { space: Arc::clone(&self.space), coeffs }
    }

    /// Partial derivative in variable `var`; the result has one degree less.
    ///
    /// Panics on a degree-0 series.
    pub fn diff(&self, var: usize) -> Series {
        assert!(self.degree() >= 1, "cannot differentiate a degree-0 series");
        let target = Space::get(self.space.nvars, self.degree() - 1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); target.len()];
        let mut e = vec![0u8; self.space.nvars];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            e.copy_from_slice(&target.exps[i]);
            e[var] += 1;
            let k = e[var] as f64;
            *slot = self.coeffs[self.space.index[&e]] * k;
        }
        Series { space: target, coeffs }
    }

    /// Drops every monomial above `degree`.
    pub fn truncate(&self, degree: usize) -> Series {
        assert!(degree <= self.degree());
        let target = Space::get(self.space.nvars, degree);
        let coeffs = self.coeffs[..target.len()].to_vec();
        Series { space: target, coeffs }
    }

    /// Re-expresses this series in a larger space; holomorphic variable `v` of
    /// this series becomes holomorphic variable `var_map[v]` of the target.
    pub fn embed(&self, target: &Arc<Space>, var_map: &[usize]) -> Series {
        let half = self.space.nvars / 2;
        let thalf = target.nvars / 2;
        assert_eq!(var_map.len(), half);
        assert_eq!(target.degree, self.degree());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); target.len()];
        let mut e = vec![0u8; target.nvars];
        for (i, c) in self.coeffs.iter().enumerate() {
            e.iter_mut().for_each(|x| *x = 0);
            let src = &self.space.exps[i];
            for v in 0..half {
                e[var_map[v]] = src[v];
                e[thalf + var_map[v]] = src[half + v];
            }
            coeffs[target.index[&e]] = *c;
        }
        Series { space: Arc::clone(target), coeffs }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                $body(self, rhs)
            }
        }
        impl $trait<Series> for Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Series> for Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                $body(&self, rhs)
            }
        }
        impl $trait<Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                $body(self, &rhs)
            }
        }
    };
}

fn add_impl(a: &Series, b: &Series) -> Series {
    a.check_space(b);
    Series {
        space: Arc::clone(&a.space),
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
    }
}

fn sub_impl(a: &Series, b: &Series) -> Series {
    a.check_space(b);
    Series {
        space: Arc::clone(&a.space),
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
    }
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, Series::mul_ref);

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale_re(-1.0)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale_re(-1.0)
    }
}

/// Coordinate functions z^α and z̄^α expanded around a base point.
#[derive(Clone, Debug)]
pub struct Vars {
    point: Vec<Complex64>,
    space: Arc<Space>,
    z: Vec<Series>,
    zbar: Vec<Series>,
}

impl Vars {
    pub fn new(point: &[Complex64], degree: usize) -> Vars {
        let n = point.len();
        let space = Space::get(2 * n, degree);
        let z = point.iter().enumerate().map(|(a, &p)| Series::variable(&space, a, p)).collect();
        let zbar = point
            .iter()
            .enumerate()
            .map(|(a, &p)| Series::variable(&space, n + a, p.conj()))
            .collect();
        Vars { point: point.to_vec(), space, z, zbar }
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn z(&self, a: usize) -> &Series {
        &self.z[a]
    }

    pub fn zbar(&self, a: usize) -> &Series {
        &self.zbar[a]
    }

    pub fn constant(&self, c: f64) -> Series {
        Series::real(&self.space, c)
    }

    /// Σ z^α z̄^α
    pub fn norm_sq(&self) -> Series {
        let mut acc = self.constant(0.0);
        for a in 0..self.dim() {
            acc = acc + &self.z[a] * &self.zbar[a];
        }
        acc
    }
}

/// Determinant of a square series matrix (Gaussian elimination, pivoting on
/// the constant terms).
pub fn det(matrix: &[Vec<Series>]) -> Result<Series> {
    let m = matrix.len();
    let mut a: Vec<Vec<Series>> = matrix.to_vec();
    let space = Arc::clone(a[0][0].space());
    let mut acc = Series::real(&space, 1.0);
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].value().norm().total_cmp(&a[j][col].value().norm()))
            .expect("non-empty matrix");
        if a[pivot][col].value().norm() == 0.0 {
            return Ok(Series::zero(&space));
        }
        if pivot != col {
            a.swap(pivot, col);
            acc = -acc;
        }
        let inv = a[col][col].recip()?;
        acc = &acc * &a[col][col];
        for row in col + 1..m {
            let factor = &a[row][col] * &inv;
            for k in col + 1..m {
                let update = &factor * &a[col][k];
                a[row][k] = &a[row][k] - update;
            }
        }
    }
    Ok(acc)
}

/// Inverse of a square series matrix (Gauss–Jordan, pivoting on constant terms).
pub fn inverse(matrix: &[Vec<Series>]) -> Result<Vec<Vec<Series>>> {
    let m = matrix.len();
    let space = Arc::clone(matrix[0][0].space());
    let mut a: Vec<Vec<Series>> = matrix.to_vec();
    let mut inv: Vec<Vec<Series>> = (0..m)
        .map(|i| (0..m).map(|j| Series::real(&space, if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].value().norm().total_cmp(&a[j][col].value().norm()))
            .expect("non-empty matrix");
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col].recip()?;
        for k in 0..m {
            a[col][k] = &a[col][k] * &p;
            inv[col][k] = &inv[col][k] * &p;
        }
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for k in 0..m {
                let da = &factor * &a[col][k];
                let di = &factor * &inv[col][k];
                a[row][k] = &a[row][k] - da;
                inv[row][k] = &inv[row][k] - di;
            }
        }
    }
    Ok(inv)
}
