//! Model domains: the unit ball, polydiscs, the classical bounded symmetric
//! domains of types I–IV, half-plane products and finite products, together
//! with their invariants (dimension n, rank r, Bergman exponent c_Ω), generic
//! norms, Bergman potentials, and the Cayley transform of the ball and polydisc.
//!
//! Matrix domains use row-major flattened coordinates: type I takes all `p·q`
//! entries, type II the strictly upper triangle of a skew matrix, type III the
//! upper triangle (with diagonal) of a symmetric matrix.
//!
//! Generic norms:
//!
//! | kind      | N(z)                          |
//! |-----------|-------------------------------|
//! | Ball      | 1 − ‖z‖²                      |
//! | Polydisc  | Π (1 − \|z^α\|²)              |
//! | I, III    | det(I − ZZ*)                  |
//! | II        | det(I − ZZ*)^{1/2}            |
//! | IV        | 1 − 2ZZ* + \|ZZᵗ\|²           |
//! | H^r       | Π (−Re w^α)                   |
//!
//! and the Bergman potential is `−c_Ω log N`, whose metric has Ricci curvature −1.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::ComplexPoint;
use crate::potentials::{Formula, PotentialField, ProductFormula};
use crate::series::{self, Series, Vars};

/// Descriptor serialized as `{"kind": …, "params": {…}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum DomainKind {
    Ball { n: usize },
    Polydisc { r: usize },
    #[serde(rename = "type1")]
    TypeI { p: usize, q: usize },
    #[serde(rename = "type2")]
    TypeII { m: usize },
    #[serde(rename = "type3")]
    TypeIII { m: usize },
    #[serde(rename = "type4")]
    TypeIV { m: usize },
    HalfPlaneProduct { r: usize },
    Product { factors: Vec<DomainModel> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainKind", into = "DomainKind")]
pub struct DomainModel {
    kind: DomainKind,
}

impl TryFrom<DomainKind> for DomainModel {
    type Error = Error;
    fn try_from(kind: DomainKind) -> Result<Self> {
        DomainModel::new(kind)
    }
}

impl From<DomainModel> for DomainKind {
    fn from(d: DomainModel) -> Self {
        d.kind
    }
}

/// Dimension, rank and Bergman exponent of a domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantsRecord {
    pub label: String,
    pub c: f64,
    pub n: usize,
    pub rank: usize,
    /// rank · c_Ω; for products the sum over factors.
    pub rc: f64,
}

impl InvariantsRecord {
    fn new(label: String, c: f64, n: usize, rank: usize) -> Self {
        InvariantsRecord { label, c, n, rank, rc: rank as f64 * c }
    }
}

/// Table rows of the two exceptional domains, which exist here only as data.
pub fn exceptional_invariants() -> Vec<InvariantsRecord> {
    vec![
        InvariantsRecord::new("V(16)".into(), 12.0, 16, 2),
        InvariantsRecord::new("VI(27)".into(), 18.0, 27, 3),
    ]
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl DomainModel {
    pub fn new(kind: DomainKind) -> Result<Self> {
        match &kind {
            DomainKind::Ball { n } if *n == 0 => return Err(invalid("ball dimension must be ≥ 1")),
            DomainKind::Polydisc { r } | DomainKind::HalfPlaneProduct { r } if *r == 0 => {
                return Err(invalid("product rank must be ≥ 1"))
            }
            DomainKind::TypeI { p, q } if *p == 0 || p > q => {
                return Err(invalid(format!("type I needs 1 ≤ p ≤ q, got p={p}, q={q}")))
            }
            DomainKind::TypeII { m } if *m < 3 => {
                return Err(invalid(format!("type II is restricted to m ≥ 3, got {m}")))
            }
            DomainKind::TypeIII { m } if *m == 0 => return Err(invalid("type III needs m ≥ 1")),
            DomainKind::TypeIV { m } if *m < 3 => {
                return Err(invalid(format!("type IV is restricted to m ≥ 3, got {m}")))
            }
            DomainKind::Product { factors } if factors.is_empty() => {
                return Err(invalid("a product needs at least one factor"))
            }
            _ => {}
        }
        Ok(DomainModel { kind })
    }

    pub fn ball(n: usize) -> Result<Self> {
        Self::new(DomainKind::Ball { n })
    }

    pub fn polydisc(r: usize) -> Result<Self> {
        Self::new(DomainKind::Polydisc { r })
    }

    pub fn type_i(p: usize, q: usize) -> Result<Self> {
        Self::new(DomainKind::TypeI { p, q })
    }

    pub fn type_ii(m: usize) -> Result<Self> {
        Self::new(DomainKind::TypeII { m })
    }

    pub fn type_iii(m: usize) -> Result<Self> {
        Self::new(DomainKind::TypeIII { m })
    }

    pub fn type_iv(m: usize) -> Result<Self> {
        Self::new(DomainKind::TypeIV { m })
    }

    pub fn half_plane_product(r: usize) -> Result<Self> {
        Self::new(DomainKind::HalfPlaneProduct { r })
    }

    pub fn product(factors: Vec<DomainModel>) -> Result<Self> {
        Self::new(DomainKind::Product { factors })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        match &self.kind {
            DomainKind::Ball { n } => *n,
            DomainKind::Polydisc { r } | DomainKind::HalfPlaneProduct { r } => *r,
            DomainKind::TypeI { p, q } => p * q,
            DomainKind::TypeII { m } => m * (m - 1) / 2,
            DomainKind::TypeIII { m } => m * (m + 1) / 2,
            DomainKind::TypeIV { m } => *m,
            DomainKind::Product { factors } => factors.iter().map(|f| f.n()).sum(),
        }
    }

    pub fn rank(&self) -> usize {
        match &self.kind {
            DomainKind::Ball { .. } => 1,
            DomainKind::Polydisc { r } | DomainKind::HalfPlaneProduct { r } => *r,
            DomainKind::TypeI { p, .. } => *p,
            DomainKind::TypeII { m } => m / 2,
            DomainKind::TypeIII { m } => *m,
            DomainKind::TypeIV { .. } => 2,
            DomainKind::Product { factors } => factors.iter().map(|f| f.rank()).sum(),
        }
    }

    /// Bergman exponent c_Ω. For a product with unequal factor exponents this is
    /// the rank-weighted mean, so that `rank · c` stays the sum over factors.
    pub fn c(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { n } => (n + 1) as f64,
            DomainKind::Polydisc { .. } | DomainKind::HalfPlaneProduct { .. } => 2.0,
            DomainKind::TypeI { p, q } => (p + q) as f64,
            DomainKind::TypeII { m } => 2.0 * (*m as f64 - 1.0),
            DomainKind::TypeIII { m } => (m + 1) as f64,
            DomainKind::TypeIV { m } => *m as f64,
            DomainKind::Product { factors } => {
                let rc: f64 = factors.iter().map(|f| f.rank() as f64 * f.c()).sum();
                rc / self.rank() as f64
            }
        }
    }

    pub fn invariants(&self) -> InvariantsRecord {
        InvariantsRecord::new(self.label(), self.c(), self.n(), self.rank())
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Biholomorphic to a ball: Ball(n), I(1,q), II(3), III(1), and the rank-one
    /// polydisc and half-plane; a one-factor product of any of these.
    pub fn is_ball_equivalent(&self) -> bool {
        match &self.kind {
            DomainKind::Ball { .. } => true,
            DomainKind::TypeI { p, .. } => *p == 1,
            DomainKind::TypeII { m } => *m == 3,
            DomainKind::TypeIII { m } => *m == 1,
            DomainKind::Polydisc { r } | DomainKind::HalfPlaneProduct { r } => *r == 1,
            DomainKind::TypeIV { .. } => false,
            DomainKind::Product { factors } => factors.len() == 1 && factors[0].is_ball_equivalent(),
        }
    }

    pub fn is_irreducible(&self) -> bool {
        match &self.kind {
            DomainKind::Polydisc { r } | DomainKind::HalfPlaneProduct { r } => *r == 1,
            DomainKind::Product { factors } => factors.len() == 1 && factors[0].is_irreducible(),
            _ => true,
        }
    }

    /// Square matrix I − ZZ* for the matrix kinds.
    fn defect_matrix(&self, z: &[Complex64]) -> Option<DMatrix<Complex64>> {
        let zm = match &self.kind {
            DomainKind::TypeI { p, q } => DMatrix::from_row_slice(*p, *q, z),
            DomainKind::TypeII { m } => skew_matrix(*m, z),
            DomainKind::TypeIII { m } => symmetric_matrix(*m, z),
            _ => return None,
        };
        let rows = zm.nrows();
        Some(DMatrix::identity(rows, rows) - &zm * zm.adjoint())
    }

    fn contains_coords(&self, z: &[Complex64]) -> bool {
        if z.len() != self.n() || z.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match &self.kind {
            DomainKind::Ball { .. } => norm_sq(z) < 1.0,
            DomainKind::Polydisc { .. } => z.iter().all(|c| c.norm_sqr() < 1.0),
            DomainKind::HalfPlaneProduct { .. } => z.iter().all(|c| c.re < 0.0),
            DomainKind::TypeIV { .. } => {
                let s = norm_sq(z);
                s < 1.0 && type_iv_norm(z) > 0.0
            }
            DomainKind::Product { factors } => {
                let mut offset = 0;
                factors.iter().all(|f| {
                    let k = f.n();
                    let inside = f.contains_coords(&z[offset..offset + k]);
                    offset += k;
                    inside
                })
            }
            _ => {
                let a = self.defect_matrix(z).expect("matrix kind");
                crate::hermgeo::positive_cholesky(a).is_some()
            }
        }
    }

    pub fn contains(&self, z: &ComplexPoint) -> bool {
        self.contains_coords(z)
    }

    pub(crate) fn check_point(&self, z: &ComplexPoint) -> Result<()> {
        if z.dim() != self.n() {
            return Err(invalid(format!("{} expects {} coordinates, got {}", self, self.n(), z.dim())));
        }
        if !self.contains(z) {
            return Err(Error::OutsideDomain { domain: self.label(), point: z.clone() });
        }
        Ok(())
    }

    /// Generic norm N(z): positive inside, 1 at the origin, 0 on the boundary.
    pub fn generic_norm(&self, z: &ComplexPoint) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.generic_norm_unchecked(z))
    }

    fn generic_norm_unchecked(&self, z: &[Complex64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { .. } => 1.0 - norm_sq(z),
            DomainKind::Polydisc { .. } => z.iter().map(|c| 1.0 - c.norm_sqr()).product(),
            DomainKind::HalfPlaneProduct { .. } => z.iter().map(|c| -c.re).product(),
            DomainKind::TypeIV { .. } => type_iv_norm(z),
            DomainKind::Product { factors } => {
                let mut offset = 0;
                factors
                    .iter()
                    .map(|f| {
                        let k = f.n();
                        let v = f.generic_norm_unchecked(&z[offset..offset + k]);
                        offset += k;
                        v
                    })
                    .product()
            }
            DomainKind::TypeII { .. } => self.defect_det(z).sqrt(),
            _ => self.defect_det(z),
        }
    }

    fn defect_det(&self, z: &[Complex64]) -> f64 {
        self.defect_matrix(z).expect("matrix kind").determinant().re
    }

    /// Generic-norm factors that must all be positive inside the domain
    /// (eigenvalues of I − ZZ* for matrix kinds).
    pub fn norm_factors(&self, z: &ComplexPoint) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ball { .. } => vec![1.0 - norm_sq(z)],
            DomainKind::Polydisc { .. } => z.iter().map(|c| 1.0 - c.norm_sqr()).collect(),
            DomainKind::HalfPlaneProduct { .. } => z.iter().map(|c| -c.re).collect(),
            DomainKind::TypeIV { .. } => vec![1.0 - norm_sq(z), type_iv_norm(z)],
            DomainKind::Product { factors } => {
                let mut offset = 0;
                let mut out = Vec::new();
                for f in factors {
                    let k = f.n();
                    out.extend(f.norm_factors(&ComplexPoint::unchecked(z[offset..offset + k].to_vec())));
                    offset += k;
                }
                out
            }
            _ => {
                let a = self.defect_matrix(z).expect("matrix kind");
                a.symmetric_eigenvalues().iter().copied().collect()
            }
        }
    }

    /// log N as a truncated Taylor series (non-product kinds).
    pub(crate) fn log_norm_series(&self, vars: &Vars) -> Result<Series> {
        match &self.kind {
            DomainKind::Ball { .. } => (vars.constant(1.0) - vars.norm_sq()).ln(),
            DomainKind::Polydisc { r } => {
                let mut acc = vars.constant(0.0);
                for a in 0..*r {
                    acc = acc + (vars.constant(1.0) - vars.z(a) * vars.zbar(a)).ln()?;
                }
                Ok(acc)
            }
            DomainKind::HalfPlaneProduct { r } => {
                let mut acc = vars.constant(0.0);
                for a in 0..*r {
                    acc = acc + (vars.z(a) + vars.zbar(a)).scale_re(-0.5).ln()?;
                }
                Ok(acc)
            }
            DomainKind::TypeIV { .. } => {
                let n = vars.dim();
                let mut quad = vars.constant(0.0);
                let mut quad_bar = vars.constant(0.0);
                for a in 0..n {
                    quad = quad + vars.z(a) * vars.z(a);
                    quad_bar = quad_bar + vars.zbar(a) * vars.zbar(a);
                }
                (vars.constant(1.0) - vars.norm_sq().scale_re(2.0) + quad * quad_bar).ln()
            }
            DomainKind::TypeI { p, q } => {
                let z: Vec<Vec<Series>> =
                    (0..*p).map(|i| (0..*q).map(|j| vars.z(i * q + j).clone()).collect()).collect();
                let zb: Vec<Vec<Series>> =
                    (0..*p).map(|i| (0..*q).map(|j| vars.zbar(i * q + j).clone()).collect()).collect();
                log_det_defect(vars, &z, &zb, 1.0)
            }
            DomainKind::TypeII { m } => {
                let (z, zb) = packed_series(vars, *m, PackedKind::Skew);
                log_det_defect(vars, &z, &zb, 0.5)
            }
            DomainKind::TypeIII { m } => {
                let (z, zb) = packed_series(vars, *m, PackedKind::Symmetric);
                log_det_defect(vars, &z, &zb, 1.0)
            }
            DomainKind::Product { .. } => unreachable!("products expand factorwise"),
        }
    }

    /// Uniform draws from the polydisc envelope, kept when z / cap lies in the
    /// domain (so every sample sits inside the domain scaled by `cap`).
    /// Half-plane coordinates are Cayley images of disc samples.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, cap: f64) -> Vec<ComplexPoint> {
        (0..count).map(|_| ComplexPoint::unchecked(self.sample_one(rng, cap))).collect()
    }

    /// Reproducible interior samples (radius cap 0.95).
    pub fn seeded_samples(&self, count: usize, seed: u64) -> Vec<ComplexPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_interior(&mut rng, count, 0.95)
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R, cap: f64) -> Vec<Complex64> {
        match &self.kind {
            DomainKind::Product { factors } => factors.iter().flat_map(|f| f.sample_one(rng, cap)).collect(),
            DomainKind::HalfPlaneProduct { r } => (0..*r)
                .map(|_| {
                    let z = disc_sample(rng) * cap;
                    (z - 1.0) / (z + 1.0)
                })
                .collect(),
            _ => loop {
                let z: Vec<Complex64> = (0..self.n()).map(|_| disc_sample(rng)).collect();
                let scaled: Vec<Complex64> = z.iter().map(|c| c / cap).collect();
                if self.contains_coords(&scaled) {
                    break z;
                }
            },
        }
    }

    /// A point guaranteed inside the domain (origin, or σ(0) for half-planes).
    pub fn center(&self) -> ComplexPoint {
        let coords = match &self.kind {
            DomainKind::HalfPlaneProduct { r } => vec![Complex64::new(-1.0, 0.0); *r],
            DomainKind::Product { factors } => factors.iter().flat_map(|f| f.center().into_inner()).collect(),
            _ => vec![Complex64::new(0.0, 0.0); self.n()],
        };
        ComplexPoint::unchecked(coords)
    }

    pub(crate) fn factors(&self) -> Option<&[DomainModel]> {
        match &self.kind {
            DomainKind::Product { factors } => Some(factors),
            _ => None,
        }
    }
}

impl fmt::Display for DomainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DomainKind::Ball { n } => write!(f, "Ball({n})"),
            DomainKind::Polydisc { r } => write!(f, "Polydisc({r})"),
            DomainKind::TypeI { p, q } => write!(f, "TypeI({p},{q})"),
            DomainKind::TypeII { m } => write!(f, "TypeII({m})"),
            DomainKind::TypeIII { m } => write!(f, "TypeIII({m})"),
            DomainKind::TypeIV { m } => write!(f, "TypeIV({m})"),
            DomainKind::HalfPlaneProduct { r } => write!(f, "HalfPlane^{r}"),
            DomainKind::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|d| d.to_string()).collect();
                write!(f, "{}", parts.join(" x "))
            }
        }
    }
}

fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

fn type_iv_norm(z: &[Complex64]) -> f64 {
    let s = norm_sq(z);
    let q: Complex64 = z.iter().map(|c| c * c).sum();
    1.0 - 2.0 * s + q.norm_sqr()
}

fn disc_sample<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, theta)
}

fn skew_matrix(m: usize, z: &[Complex64]) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            a[(i, j)] = z[k];
            a[(j, i)] = -z[k];
            k += 1;
        }
    }
    a
}

fn symmetric_matrix(m: usize, z: &[Complex64]) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            a[(i, j)] = z[k];
            a[(j, i)] = z[k];
            k += 1;
        }
    }
    a
}

enum PackedKind {
    Skew,
    Symmetric,
}

fn packed_series(vars: &Vars, m: usize, kind: PackedKind) -> (Vec<Vec<Series>>, Vec<Vec<Series>>) {
    let zero = vars.constant(0.0);
    let mut z = vec![vec![zero.clone(); m]; m];
    let mut zb = vec![vec![zero; m]; m];
    let mut k = 0;
    for i in 0..m {
        let start = match kind {
            PackedKind::Skew => i + 1,
            PackedKind::Symmetric => i,
        };
        for j in start..m {
            z[i][j] = vars.z(k).clone();
            zb[i][j] = vars.zbar(k).clone();
            match kind {
                PackedKind::Skew => {
                    z[j][i] = -vars.z(k);
                    zb[j][i] = -vars.zbar(k);
                }
                PackedKind::Symmetric => {
                    z[j][i] = vars.z(k).clone();
                    zb[j][i] = vars.zbar(k).clone();
                }
            }
            k += 1;
        }
    }
    (z, zb)
}

/// s · log det(I − Z Z*) with Z* built from the conjugate variables.
fn log_det_defect(vars: &Vars, z: &[Vec<Series>], zb: &[Vec<Series>], s: f64) -> Result<Series> {
    let rows = z.len();
    let cols = z[0].len();
    let mut a = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut row = Vec::with_capacity(rows);
        for k in 0..rows {
            let mut entry = vars.constant(if i == k { 1.0 } else { 0.0 });
            for j in 0..cols {
                entry = entry - &z[i][j] * &zb[k][j];
            }
            row.push(entry);
        }
        a.push(row);
    }
    Ok(series::det(&a)?.ln()?.scale_re(s))
}

/// −c_Ω log N for a single (non-product) kind.
#[derive(Debug)]
pub(crate) struct BergmanFormula {
    domain: DomainModel,
}

impl Formula for BergmanFormula {
    fn dim(&self) -> usize {
        self.domain.n()
    }

    fn analytic_order(&self) -> usize {
        crate::jets::MAX_ORDER
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        Ok(self.domain.log_norm_series(vars)?.scale_re(-self.domain.c()))
    }
}

fn bergman_formula(d: &DomainModel) -> Arc<dyn Formula> {
    match d.factors() {
        Some(factors) => Arc::new(ProductFormula::new(factors.iter().map(bergman_formula).collect())),
        None => Arc::new(BergmanFormula { domain: d.clone() }),
    }
}

/// z ↦ −c_Ω log N(z): the Bergman metric potential (Ricci −1), additive constants dropped.
pub fn bergman_potential(d: &DomainModel) -> PotentialField {
    PotentialField::from_parts(d.clone(), bergman_formula(d), 1.0, format!("bergman[{d}]"))
}

/// Bergman potential rescaled to Ricci −K.
pub fn ke_potential(d: &DomainModel, ricci: f64) -> Result<PotentialField> {
    if !(ricci > 0.0 && ricci.is_finite()) {
        return Err(invalid(format!("Ricci constant must be positive, got {ricci}")));
    }
    Ok(bergman_potential(d).rescale_ricci(ricci))
}

fn singular(what: &str) -> Error {
    Error::Singular(format!("Cayley transform is singular at {what}"))
}

/// Cayley transform of the ball or polydisc onto its Siegel model.
///
/// Polydisc: w^α = (z^α − 1)/(z^α + 1) onto the product of left half-planes.
/// Ball: w¹ = (z¹ − 1)/(z¹ + 1), w' = √2 z'/(1 + z¹) onto {2 Re w¹ + ‖w'‖² < 0},
/// which agrees with the polydisc formula on the slice z' = 0.
pub fn cayley(d: &DomainModel, z: &ComplexPoint) -> Result<ComplexPoint> {
    let one = Complex64::new(1.0, 0.0);
    if z.dim() != d.n() {
        return Err(invalid("dimension mismatch in Cayley transform"));
    }
    match d.kind() {
        DomainKind::Polydisc { .. } => {
            if z.iter().any(|c| *c + one == Complex64::new(0.0, 0.0)) {
                return Err(singular("z^α = −1"));
            }
            Ok(ComplexPoint::unchecked(z.iter().map(|c| (c - one) / (c + one)).collect()))
        }
        DomainKind::Ball { .. } => {
            if z[0] + one == Complex64::new(0.0, 0.0) {
                return Err(singular("z¹ = −1"));
            }
            let denom = z[0] + one;
            let mut w = vec![(z[0] - one) / denom];
            w.extend(z[1..].iter().map(|c| c * std::f64::consts::SQRT_2 / denom));
            Ok(ComplexPoint::unchecked(w))
        }
        _ => Err(Error::UnsupportedDomain { operation: "cayley", domain: d.label() }),
    }
}

/// Inverse of [`cayley`].
pub fn cayley_inverse(d: &DomainModel, w: &ComplexPoint) -> Result<ComplexPoint> {
    let one = Complex64::new(1.0, 0.0);
    if w.dim() != d.n() {
        return Err(invalid("dimension mismatch in inverse Cayley transform"));
    }
    match d.kind() {
        DomainKind::Polydisc { .. } => {
            if w.contains(&one) {
                return Err(singular("w^α = 1"));
            }
            Ok(ComplexPoint::unchecked(w.iter().map(|c| (one + c) / (one - c)).collect()))
        }
        DomainKind::Ball { .. } => {
            if w[0] == one {
                return Err(singular("w¹ = 1"));
            }
            let denom = one - w[0];
            let mut z = vec![(one + w[0]) / denom];
            z.extend(w[1..].iter().map(|c| c * std::f64::consts::SQRT_2 / denom));
            Ok(ComplexPoint::unchecked(z))
        }
        _ => Err(Error::UnsupportedDomain { operation: "cayley_inverse", domain: d.label() }),
    }
}

/// Bergman kernel of the left half-plane, 2/(w + w̄)².
pub fn halfplane_kernel(w: Complex64) -> Result<f64> {
    if !(w.re < 0.0) {
        return Err(Error::OutsideDomain {
            domain: "left half-plane".into(),
            point: ComplexPoint::unchecked(vec![w]),
        });
    }
    Ok(2.0 / (2.0 * w.re).powi(2))
}

/// log K_S(w) on the Siegel model of the ball or polydisc (constant dropped).
pub fn siegel_log_kernel(d: &DomainModel, w: &ComplexPoint) -> Result<f64> {
    match d.kind() {
        DomainKind::Polydisc { .. } => w.iter().map(|c| halfplane_kernel(*c).map(f64::ln)).sum(),
        DomainKind::Ball { .. } => {
            let defining = 2.0 * w[0].re + norm_sq(&w[1..]);
            if !(defining < 0.0) {
                return Err(Error::OutsideDomain { domain: "Siegel model".into(), point: w.clone() });
            }
            Ok(0.5 * d.c() * (2.0 / (defining * defining)).ln())
        }
        _ => Err(Error::UnsupportedDomain { operation: "siegel_log_kernel", domain: d.label() }),
    }
}

/// (c_Ω/2) Σ_{α ≤ r} log K_H(w^α) at w = (w¹,…,w^r,0,…,0).
pub fn siegel_log_kernel_on_polydisc_slice(d: &DomainModel, w: &ComplexPoint) -> Result<f64> {
    if w.dim() != d.n() {
        return Err(invalid("dimension mismatch on the polydisc slice"));
    }
    let r = d.rank();
    if w[r..].iter().any(|c| c.norm() != 0.0) {
        return Err(Error::OffSlice(w.clone()));
    }
    let mut acc = 0.0;
    for c in &w[..r] {
        acc += halfplane_kernel(*c)?.ln();
    }
    Ok(0.5 * d.c() * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermgeo;

    fn pt(parts: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint::from_parts(parts).unwrap()
    }

    #[test]
    fn table_formulas() {
        let cases = [
            (DomainModel::type_i(2, 3).unwrap(), 6, 2, 5.0),
            (DomainModel::type_ii(5).unwrap(), 10, 2, 8.0),
            (DomainModel::type_iii(3).unwrap(), 6, 3, 4.0),
            (DomainModel::type_iv(5).unwrap(), 5, 2, 5.0),
            (DomainModel::ball(4).unwrap(), 4, 1, 5.0),
            (DomainModel::polydisc(3).unwrap(), 3, 3, 2.0),
        ];
        for (d, n, r, c) in cases {
            assert_eq!((d.n(), d.rank(), d.c()), (n, r, c), "{d}");
        }
        let ball = DomainModel::ball(3).unwrap().invariants();
        let t = DomainModel::type_i(1, 3).unwrap().invariants();
        assert_eq!((ball.n, ball.rank, ball.c), (t.n, t.rank, t.c));
    }

    #[test]
    fn restricted_parameters_are_rejected() {
        assert!(DomainModel::type_ii(2).is_err());
        assert!(DomainModel::type_iv(2).is_err());
        assert!(DomainModel::type_i(3, 2).is_err());
        assert!(DomainModel::ball(0).is_err());
        assert!(DomainModel::product(vec![]).is_err());
    }

    #[test]
    fn product_invariants_add() {
        let d = DomainModel::product(vec![DomainModel::ball(2).unwrap(), DomainModel::type_iv(3).unwrap()]).unwrap();
        assert_eq!(d.n(), 5);
        assert_eq!(d.rank(), 3);
        assert_eq!(d.invariants().rc, 3.0 + 6.0);
        let z = pt(&[(0.1, 0.0), (0.2, 0.1), (0.1, 0.1), (0.0, 0.2), (0.1, -0.1)]);
        let n1 = DomainModel::ball(2).unwrap().generic_norm(&pt(&[(0.1, 0.0), (0.2, 0.1)])).unwrap();
        let n2 = DomainModel::type_iv(3).unwrap().generic_norm(&pt(&[(0.1, 0.1), (0.0, 0.2), (0.1, -0.1)])).unwrap();
        assert!((d.generic_norm(&z).unwrap() - n1 * n2).abs() < 1e-15);
    }

    #[test]
    fn generic_norm_examples() {
        let ball = DomainModel::ball(2).unwrap();
        assert!((ball.generic_norm(&pt(&[(0.6, 0.0), (0.0, 0.0)])).unwrap() - 0.64).abs() < 1e-15);
        let iv = DomainModel::type_iv(3).unwrap();
        let v = iv.generic_norm(&pt(&[(0.5, 0.0), (0.0, 0.0), (0.0, 0.0)])).unwrap();
        assert!((v - 0.5625).abs() < 1e-15);
        for d in [
            ball,
            iv,
            DomainModel::polydisc(2).unwrap(),
            DomainModel::type_i(2, 2).unwrap(),
            DomainModel::type_ii(4).unwrap(),
            DomainModel::type_iii(2).unwrap(),
        ] {
            assert!((d.generic_norm(&ComplexPoint::origin(d.n())).unwrap() - 1.0).abs() < 1e-15);
        }
        let outside = pt(&[(0.9, 0.0), (0.9, 0.0)]);
        assert!(matches!(
            DomainModel::ball(2).unwrap().generic_norm(&outside),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn generic_norm_vanishes_towards_the_boundary() {
        let d = DomainModel::type_i(2, 2).unwrap();
        let mut last = 1.0;
        for s in [0.5, 0.9, 0.99, 0.999] {
            // Z = s · diag(1, 0) approaches a boundary point
            let v = d.generic_norm(&pt(&[(s, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(last < 3e-3);
    }

    #[test]
    fn membership_matches_norm_factor_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [
            DomainModel::type_i(2, 2).unwrap(),
            DomainModel::type_ii(4).unwrap(),
            DomainModel::type_iii(2).unwrap(),
            DomainModel::type_iv(3).unwrap(),
            DomainModel::ball(3).unwrap(),
            DomainModel::polydisc(2).unwrap(),
        ] {
            let mut inside = 0;
            for _ in 0..400 {
                let z = ComplexPoint::unchecked(
                    (0..d.n()).map(|_| Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8))).collect(),
                );
                let all_positive = d.norm_factors(&z).iter().all(|&v| v > 0.0);
                assert_eq!(d.contains(&z), all_positive, "{d} at {z}");
                inside += d.contains(&z) as usize;
            }
            assert!(inside > 0, "{d}: sweep never entered the domain");
        }
    }

    #[test]
    fn samples_stay_inside_the_capped_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [
            DomainModel::ball(2).unwrap(),
            DomainModel::type_iii(2).unwrap(),
            DomainModel::half_plane_product(2).unwrap(),
        ] {
            for z in d.sample_interior(&mut rng, 50, 0.95) {
                assert!(d.contains(&z), "{d}: {z}");
            }
        }
    }

    #[test]
    fn bergman_metric_at_origin() {
        let cases = [
            (DomainModel::type_i(2, 2).unwrap(), 4.0),
            (DomainModel::ball(3).unwrap(), 4.0),
            (DomainModel::polydisc(2).unwrap(), 2.0),
        ];
        for (d, c) in cases {
            let frame = hermgeo::metric_from_potential(&bergman_potential(&d), &d.center()).unwrap();
            for a in 0..d.n() {
                for b in 0..d.n() {
                    let want = if a == b { c } else { 0.0 };
                    assert!((frame.g[(a, b)] - Complex64::new(want, 0.0)).norm() < 1e-12, "{d}");
                }
            }
        }
    }

    #[test]
    fn ke_rescaling_of_the_ball_is_the_standard_potential() {
        let d = DomainModel::ball(2).unwrap();
        let p = ke_potential(&d, 3.0).unwrap();
        let z = pt(&[(0.3, 0.1), (-0.2, 0.4)]);
        let want = -(1.0 - z.norm_sq()).ln();
        assert!((p.value(&z).unwrap() - want).abs() < 1e-14);
        assert!(ke_potential(&d, 0.0).is_err());
        // K equal to the source normalization is the identity
        let b = bergman_potential(&d);
        assert!((ke_potential(&d, 1.0).unwrap().value(&z).unwrap() - b.value(&z).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn cayley_examples() {
        let poly = DomainModel::polydisc(3).unwrap();
        let w = cayley(&poly, &ComplexPoint::origin(3)).unwrap();
        for c in w.iter() {
            assert_eq!(*c, Complex64::new(-1.0, 0.0));
        }
        let disc = DomainModel::polydisc(1).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let z = ComplexPoint::new(vec![(i - 1.0) / (i + 1.0)]).unwrap();
        let back = cayley(&disc, &cayley_inverse(&disc, &z).unwrap()).unwrap();
        assert!((back[0] - z[0]).norm() < 1e-12);
        let mut last = f64::NEG_INFINITY;
        for x in [0.9, 0.99, 0.999, 0.9999] {
            let w = cayley(&disc, &pt(&[(x, 0.0)])).unwrap()[0];
            assert!(w.re < 0.0 && w.re > last);
            last = w.re;
        }
        assert!(last > -1e-4);
        assert!(matches!(cayley(&disc, &pt(&[(-1.0, 0.0)])), Err(Error::Singular(_))));
    }

    #[test]
    fn ball_cayley_lands_in_the_siegel_model() {
        let d = DomainModel::ball(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for z in d.sample_interior(&mut rng, 20, 0.95) {
            let w = cayley(&d, &z).unwrap();
            assert!(2.0 * w[0].re + norm_sq(&w[1..]) < 0.0);
            let back = cayley_inverse(&d, &w).unwrap();
            for k in 0..3 {
                assert!((back[k] - z[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn halfplane_kernel_examples() {
        assert_eq!(halfplane_kernel(Complex64::new(-1.0, 0.0)).unwrap(), 0.5);
        assert_eq!(halfplane_kernel(Complex64::new(-0.5, 0.0)).unwrap(), 2.0);
        assert_eq!(halfplane_kernel(Complex64::new(-1.0, 5.0)).unwrap(), 0.5);
        assert!(halfplane_kernel(Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn slice_kernel_examples() {
        let disc = DomainModel::polydisc(1).unwrap();
        let v = siegel_log_kernel_on_polydisc_slice(&disc, &pt(&[(-1.0, 0.0)])).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
        let p2 = DomainModel::polydisc(2).unwrap();
        let two = siegel_log_kernel_on_polydisc_slice(&p2, &pt(&[(-0.7, 0.2), (-0.7, 0.2)])).unwrap();
        let one = siegel_log_kernel_on_polydisc_slice(&disc, &pt(&[(-0.7, 0.2)])).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-14);
        let ball = DomainModel::ball(2).unwrap();
        assert!(matches!(
            siegel_log_kernel_on_polydisc_slice(&ball, &pt(&[(-1.0, 0.0), (0.1, 0.0)])),
            Err(Error::OffSlice(_))
        ));
        // full Siegel kernel agrees with the slice formula on the slice
        let w = pt(&[(-0.4, 0.3), (0.0, 0.0)]);
        let full = siegel_log_kernel(&ball, &w).unwrap();
        let slice = siegel_log_kernel_on_polydisc_slice(&ball, &w).unwrap();
        assert!((full - slice).abs() < 1e-14);
    }

    #[test]
    fn descriptor_json_shape() {
        let d = DomainModel::type_i(2, 3).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json, serde_json::json!({"kind": "type1", "params": {"p": 2, "q": 3}}));
        let back: DomainModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, d);
        let bad = serde_json::json!({"kind": "type4", "params": {"m": 2}});
        assert!(serde_json::from_value::<DomainModel>(bad).is_err());
        let prod = DomainModel::product(vec![DomainModel::ball(1).unwrap(), DomainModel::polydisc(2).unwrap()]).unwrap();
        let s = serde_json::to_string(&prod).unwrap();
        assert_eq!(serde_json::from_str::<DomainModel>(&s).unwrap(), prod);
    }
}
