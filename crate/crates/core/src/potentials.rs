//! Potential functions: closed-form formulas paired with their domain and the
//! Ricci normalization K their metric targets, plus the specific potentials
//! built from them (canonical, rescaled ball, products, Kai–Ohsawa) and the
//! gradient-length comparisons.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domains::{bergman_potential, exceptional_invariants, ke_potential, DomainKind, DomainModel};
use crate::error::{Error, Result};
use crate::hermgeo::{self, MetricFrame};
use crate::jets::{analytic_jet, fd_jet, ComplexPoint, FdSteps, Jet, MAX_ORDER};
use crate::series::{Series, Vars};

/// A scalar function written against truncated Taylor arithmetic.
///
/// `expand` returns the Taylor polynomial of degree `vars.degree()` at
/// `vars.point()`; degree 0 is plain evaluation. Formulas that only support
/// evaluation report `analytic_order() == 0`.
pub trait Formula: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn analytic_order(&self) -> usize;
    fn expand(&self, vars: &Vars) -> Result<Series>;
}

#[derive(Clone)]
pub struct PotentialField {
    domain: DomainModel,
    formula: Arc<dyn Formula>,
    ricci: f64,
    label: String,
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialField")
            .field("label", &self.label)
            .field("domain", &self.domain.label())
            .field("ricci", &self.ricci)
            .field("analytic_order", &self.analytic_order())
            .finish()
    }
}

fn check_ricci(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Ricci constant must be positive, got {k}")))
    }
}

impl PotentialField {
    pub fn new(domain: DomainModel, formula: Arc<dyn Formula>, ricci: f64, label: impl Into<String>) -> Result<Self> {
        check_ricci(ricci)?;
        if formula.dim() != domain.n() {
            return Err(Error::InvalidParameter(format!(
                "formula has {} variables but {} has dimension {}",
                formula.dim(),
                domain,
                domain.n()
            )));
        }
        Ok(Self::from_parts(domain, formula, ricci, label))
    }

    pub(crate) fn from_parts(domain: DomainModel, formula: Arc<dyn Formula>, ricci: f64, label: impl Into<String>) -> Self {
        PotentialField { domain, formula, ricci, label: label.into() }
    }

    /// Potential given only by point evaluation; derivatives come from finite differences.
    pub fn from_fn<F>(domain: DomainModel, ricci: f64, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&ComplexPoint) -> Result<f64> + Send + Sync + 'static,
    {
        let dim = domain.n();
        Self::new(domain, Arc::new(FnFormula { dim, f: Box::new(f) }), ricci, label)
    }

    pub fn domain(&self) -> &DomainModel {
        &self.domain
    }

    pub fn formula(&self) -> &Arc<dyn Formula> {
        &self.formula
    }

    pub fn ricci_constant(&self) -> f64 {
        self.ricci
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.domain.n()
    }

    pub fn analytic_order(&self) -> usize {
        self.formula.analytic_order()
    }

    pub(crate) fn check_point(&self, z: &ComplexPoint) -> Result<()> {
        self.domain.check_point(z)
    }

    pub fn value(&self, z: &ComplexPoint) -> Result<f64> {
        self.check_point(z)?;
        let v = self.formula.expand(&Vars::new(z, 0))?.value().re;
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation { point: z.clone(), value: v });
        }
        Ok(v)
    }

    /// Jet of the given order: closed form when available, finite differences otherwise.
    pub fn jet(&self, z: &ComplexPoint, order: usize) -> Result<Jet> {
        if order <= self.analytic_order() {
            analytic_jet(self, z, order)
        } else {
            self.fd_jet(z, order, FdSteps::default())
        }
    }

    pub fn fd_jet(&self, z: &ComplexPoint, order: usize, steps: FdSteps) -> Result<Jet> {
        self.check_point(z)?;
        fd_jet(|w| self.value(w), z, order, steps)
    }

    /// Same metric up to scale, renormalized to Ricci −k: φ ↦ (K/k)·φ.
    pub fn rescale_ricci(&self, k: f64) -> PotentialField {
        let factor = self.ricci / k;
        let formula: Arc<dyn Formula> = if factor == 1.0 {
            Arc::clone(&self.formula)
        } else {
            Arc::new(ScaledFormula { inner: Arc::clone(&self.formula), factor })
        };
        PotentialField::from_parts(self.domain.clone(), formula, k, self.label.clone())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

struct FnFormula {
    dim: usize,
    f: Box<dyn Fn(&ComplexPoint) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for FnFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFormula").field("dim", &self.dim).finish()
    }
}

impl Formula for FnFormula {
    fn dim(&self) -> usize {
        self.dim
    }

    fn analytic_order(&self) -> usize {
        0
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        if vars.degree() > 0 {
            return Err(Error::UnsupportedOrder { requested: vars.degree(), supported: 0 });
        }
        let v = (self.f)(&ComplexPoint::unchecked(vars.point().to_vec()))?;
        Ok(vars.constant(v))
    }
}

#[derive(Debug)]
struct ScaledFormula {
    inner: Arc<dyn Formula>,
    factor: f64,
}

impl Formula for ScaledFormula {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn analytic_order(&self) -> usize {
        self.inner.analytic_order()
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        Ok(self.inner.expand(vars)?.scale_re(self.factor))
    }
}

/// Σ_i π_i* f_i over consecutive blocks of coordinates.
#[derive(Debug)]
pub(crate) struct ProductFormula {
    factors: Vec<Arc<dyn Formula>>,
}

impl ProductFormula {
    pub(crate) fn new(factors: Vec<Arc<dyn Formula>>) -> Self {
        ProductFormula { factors }
    }
}

impl Formula for ProductFormula {
    fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    fn analytic_order(&self) -> usize {
        self.factors.iter().map(|f| f.analytic_order()).min().unwrap_or(MAX_ORDER)
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        let mut acc = vars.constant(0.0);
        let mut offset = 0;
        for f in &self.factors {
            let k = f.dim();
            let sub = Vars::new(&vars.point()[offset..offset + k], vars.degree());
            let map: Vec<usize> = (offset..offset + k).collect();
            acc = acc + f.expand(&sub)?.embed(vars.space(), &map);
            offset += k;
        }
        Ok(acc)
    }
}

/// scale · (−log(1 − ‖z‖²) + 2 log|1 − ⟨z, ζ⟩|) for a unit vector ζ.
#[derive(Debug)]
struct RescaledBallFormula {
    scale: f64,
    zeta: Vec<Complex64>,
}

impl Formula for RescaledBallFormula {
    fn dim(&self) -> usize {
        self.zeta.len()
    }

    fn analytic_order(&self) -> usize {
        MAX_ORDER
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        let mut u = vars.constant(0.0);
        let mut u_bar = vars.constant(0.0);
        for (a, zeta) in self.zeta.iter().enumerate() {
            u = u + vars.z(a).scale(zeta.conj());
            u_bar = u_bar + vars.zbar(a).scale(*zeta);
        }
        let one = vars.constant(1.0);
        let ball = (&one - vars.norm_sq()).ln()?;
        let boundary = (&one - u).ln()? + (&one - u_bar).ln()?;
        Ok((boundary - ball).scale_re(self.scale))
    }
}

/// The flat potential ‖z‖² (a test fixture; its metric is not Einstein).
#[derive(Debug)]
struct FlatFormula {
    dim: usize,
}

impl Formula for FlatFormula {
    fn dim(&self) -> usize {
        self.dim
    }

    fn analytic_order(&self) -> usize {
        MAX_ORDER
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        Ok(vars.norm_sq())
    }
}

/// (1/K) log det ∂∂̄ψ for an inner potential ψ.
#[derive(Debug)]
struct CanonicalFormula {
    inner: PotentialField,
}

impl Formula for CanonicalFormula {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn analytic_order(&self) -> usize {
        self.inner.analytic_order().saturating_sub(2)
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        let z = ComplexPoint::unchecked(vars.point().to_vec());
        let inv_k = 1.0 / self.inner.ricci_constant();
        if self.inner.analytic_order() >= vars.degree() + 2 {
            let jet = hermgeo::log_det_metric_jet(&self.inner, &z, vars.degree())?;
            let series = jet_to_series(&jet, vars);
            Ok(series.scale_re(inv_k))
        } else if vars.degree() == 0 {
            let frame = MetricFrame::from_jet(&z, self.inner.jet(&z, 2)?)?;
            Ok(vars.constant(inv_k * frame.log_det_g))
        } else {
            Err(Error::UnsupportedOrder { requested: vars.degree(), supported: self.analytic_order() })
        }
    }
}

/// Taylor series with the jet's derivatives as coefficients (in the space of `vars`).
fn jet_to_series(jet: &Jet, vars: &Vars) -> Series {
    let space = vars.space();
    let coeffs = (0..space.len()).map(|i| jet_entry(jet, space.exponents(i)) / space.weight(i)).collect();
    Series::from_coeffs(space, coeffs)
}

fn jet_entry(jet: &Jet, e: &[u8]) -> Complex64 {
    let n = jet.dim();
    let mut holo = Vec::new();
    let mut anti = Vec::new();
    for a in 0..n {
        holo.extend(std::iter::repeat_n(a, e[a] as usize));
        anti.extend(std::iter::repeat_n(a, e[n + a] as usize));
    }
    jet.deriv(&holo, &anti)
}

/// log K_S∘σ on the ball or polydisc, additive constants dropped.
#[derive(Debug)]
struct KaiOhsawaFormula {
    domain: DomainModel,
}

impl Formula for KaiOhsawaFormula {
    fn dim(&self) -> usize {
        self.domain.n()
    }

    fn analytic_order(&self) -> usize {
        MAX_ORDER
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        let one = vars.constant(1.0);
        let cayley = |a: usize| -> Result<(Series, Series)> {
            let w = (vars.z(a) - &one) * (vars.z(a) + &one).recip()?;
            let w_bar = (vars.zbar(a) - &one) * (vars.zbar(a) + &one).recip()?;
            Ok((w, w_bar))
        };
        // log K_H(w) = log 2 − 2 log(−(w + w̄)); the constant is dropped
        match self.domain.kind() {
            DomainKind::Polydisc { r } => {
                let mut acc = vars.constant(0.0);
                for a in 0..*r {
                    let (w, w_bar) = cayley(a)?;
                    acc = acc - (-(w + w_bar)).ln()?.scale_re(2.0);
                }
                Ok(acc)
            }
            DomainKind::Ball { n } => {
                let (w1, w1_bar) = cayley(0)?;
                let denom = (vars.z(0) + &one).recip()?;
                let denom_bar = (vars.zbar(0) + &one).recip()?;
                let mut defining = w1 + w1_bar;
                for a in 1..*n {
                    let wa = vars.z(a) * &denom;
                    let wa_bar = vars.zbar(a) * &denom_bar;
                    defining = defining + (wa * wa_bar).scale_re(2.0);
                }
                Ok((-defining).ln()?.scale_re(-self.domain.c()))
            }
            _ => Err(Error::UnsupportedDomain { operation: "kai_ohsawa_potential", domain: self.domain.label() }),
        }
    }
}

/// φ_ρ = −log(1 − ‖z‖²) on Ball(n), whose metric has Ricci −(n+1).
pub fn ball_potential(n: usize) -> Result<PotentialField> {
    let d = DomainModel::ball(n)?;
    Ok(ke_potential(&d, (n + 1) as f64)?.with_label(format!("phi_rho[Ball({n})]")))
}

/// ‖z‖² on Ball(n), tagged with a nominal K = 1.
pub fn flat_potential(n: usize) -> Result<PotentialField> {
    PotentialField::new(DomainModel::ball(n)?, Arc::new(FlatFormula { dim: n }), 1.0, format!("flat[{n}]"))
}

/// ((n+1)/K)·(−log(1 − ‖z‖²) + 2 log|1 + z¹|), of constant gradient length (n+1)/K.
pub fn rescaled_ball_potential(n: usize, ricci: f64) -> Result<PotentialField> {
    let mut zeta = vec![Complex64::new(0.0, 0.0); n.max(1)];
    zeta[0] = Complex64::new(-1.0, 0.0);
    rescaled_ball_potential_toward(n, ricci, &zeta)
}

/// The same construction with the boundary point −e₁ replaced by a unit vector ζ:
/// ((n+1)/K)·(−log(1 − ‖z‖²) + 2 log|1 − ⟨z, ζ⟩|).
pub fn rescaled_ball_potential_toward(n: usize, ricci: f64, zeta: &[Complex64]) -> Result<PotentialField> {
    check_ricci(ricci)?;
    let d = DomainModel::ball(n)?;
    if zeta.len() != n {
        return Err(Error::InvalidParameter(format!("boundary point needs {n} coordinates")));
    }
    let norm: f64 = zeta.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("boundary point must have unit norm, got {}", norm.sqrt())));
    }
    let formula = RescaledBallFormula { scale: (n + 1) as f64 / ricci, zeta: zeta.to_vec() };
    PotentialField::new(d, Arc::new(formula), ricci, format!("rescaled-ball[{n}]"))
}

fn flatten(d: &DomainModel) -> Vec<DomainModel> {
    match d.kind() {
        DomainKind::Product { factors } => factors.clone(),
        _ => vec![d.clone()],
    }
}

/// π₁*φ₁ + π₂*φ₂ on the product of the two domains.
pub fn product_potential(p1: &PotentialField, p2: &PotentialField) -> Result<PotentialField> {
    product_potential_of(&[p1.clone(), p2.clone()])
}

/// Product of any number of potentials with a common K; one factor is returned unchanged.
pub fn product_potential_of(factors: &[PotentialField]) -> Result<PotentialField> {
    let first = factors.first().ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
    if factors.len() == 1 {
        return Ok(first.clone());
    }
    let k = first.ricci_constant();
    for p in &factors[1..] {
        if (p.ricci_constant() - k).abs() > 1e-12 * k {
            return Err(Error::NormalizationMismatch(k, p.ricci_constant()));
        }
    }
    let domain = DomainModel::product(factors.iter().flat_map(|p| flatten(p.domain())).collect())?;
    let formula = ProductFormula::new(factors.iter().map(|p| Arc::clone(p.formula())).collect());
    let label = factors.iter().map(|p| p.label().to_string()).collect::<Vec<_>>().join(" + ");
    PotentialField::new(domain, Arc::new(formula), k, label)
}

/// Relative Einstein tolerance used when validating a canonical potential.
const CANONICAL_TOL: f64 = 1e-6;

/// (1/K) log det g for the Kähler–Einstein metric of `d` with Ricci −K.
pub fn canonical_potential(d: &DomainModel, ricci: f64) -> Result<PotentialField> {
    canonical_potential_of(&ke_potential(d, ricci)?)
}

/// (1/K) log det ∂∂̄ψ for the given potential ψ, after checking at a few interior
/// points that it reproduces the metric (which holds exactly when Ric = −K g).
pub fn canonical_potential_of(inner: &PotentialField) -> Result<PotentialField> {
    let formula = CanonicalFormula { inner: inner.clone() };
    let p = PotentialField::new(
        inner.domain().clone(),
        Arc::new(formula),
        inner.ricci_constant(),
        format!("canonical[{}]", inner.label()),
    )?;
    let mut points = vec![inner.domain().center()];
    points.extend(inner.domain().seeded_samples(3, 0x5eed));
    let mut worst = 0.0f64;
    for z in &points {
        let g = MetricFrame::from_jet(z, inner.jet(z, 2)?)?.g;
        let h = p.jet(z, 2)?;
        let scale = g.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for a in 0..z.dim() {
            for b in 0..z.dim() {
                worst = worst.max((h.d_dbar(a, b) - g[(a, b)]).norm() / scale);
            }
        }
    }
    let tol = if p.analytic_order() >= 2 { CANONICAL_TOL } else { 1e-3 };
    if !(worst <= tol) {
        return Err(Error::NotEinstein { ricci: inner.ricci_constant(), residual: worst });
    }
    Ok(p)
}

/// Verified constant gradient length of a potential over a sample set.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantLengthCertificate {
    pub potential: String,
    pub ricci: f64,
    pub dim: usize,
    pub constant: f64,
    pub max_deviation: f64,
    pub sample_count: usize,
    pub tolerance: f64,
}

impl ConstantLengthCertificate {
    /// The constant is the length at the first point; every other point must agree within `tolerance`.
    pub fn certify(p: &PotentialField, points: &[ComplexPoint], tolerance: f64) -> Result<Self> {
        let lengths: Vec<f64> = points
            .par_iter()
            .map(|z| {
                let frame = hermgeo::metric_from_potential(p, z)?;
                Ok(hermgeo::gradient_length_sq(&frame, &frame.jet))
            })
            .collect::<Result<_>>()?;
        let constant = *lengths.first().ok_or_else(|| Error::InvalidParameter("no sample points".into()))?;
        let max_deviation = lengths.iter().map(|l| (l - constant).abs()).fold(0.0, f64::max);
        if !(max_deviation <= tolerance) {
            return Err(Error::NotConstantLength { deviation: max_deviation, tolerance });
        }
        Ok(ConstantLengthCertificate {
            potential: p.label().to_string(),
            ricci: p.ricci_constant(),
            dim: p.dim(),
            constant,
            max_deviation,
            sample_count: points.len(),
            tolerance,
        })
    }

    /// (n+1)/K, the smallest possible constant.
    pub fn lower_bound(&self) -> f64 {
        (self.dim + 1) as f64 / self.ricci
    }
}

/// ψ = log K_S∘σ on the ball or polydisc.
pub fn kai_ohsawa_potential(d: &DomainModel) -> Result<PotentialField> {
    match d.kind() {
        DomainKind::Ball { .. } | DomainKind::Polydisc { .. } => PotentialField::new(
            d.clone(),
            Arc::new(KaiOhsawaFormula { domain: d.clone() }),
            1.0,
            format!("log-siegel-kernel[{d}]"),
        ),
        _ => Err(Error::UnsupportedDomain { operation: "kai_ohsawa_potential", domain: d.label() }),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KaiOhsawaConstant {
    pub domain: String,
    /// ‖∂ψ‖² at the origin in the Bergman metric.
    pub value: f64,
    /// rank · c_Ω.
    pub lower_bound: f64,
    /// Largest |‖∂ψ‖²(z) − value| over the spot-check points.
    pub max_deviation: f64,
    pub points_checked: usize,
    /// ∂ψ/∂z^α at the origin.
    pub derivative_at_origin: Vec<f64>,
}

/// Spot-check tolerance for constancy of the Kai–Ohsawa length.
pub const KAI_OHSAWA_TOL: f64 = 1e-6;

/// L_Ω = ‖∂(σ* log K_S)‖² in the Bergman metric, computed at 0 and spot-checked
/// at 20 more points.
pub fn kai_ohsawa_constant(d: &DomainModel) -> Result<KaiOhsawaConstant> {
    let psi = kai_ohsawa_potential(d)?;
    let bergman = bergman_potential(d);
    let length_at = |z: &ComplexPoint| -> Result<f64> {
        let frame = MetricFrame::from_jet(z, bergman.jet(z, 2)?)?;
        Ok(hermgeo::gradient_length_sq(&frame, &psi.jet(z, 1)?))
    };
    let origin = ComplexPoint::origin(d.n());
    let value = length_at(&origin)?;
    let points = d.seeded_samples(20, 0x4b41);
    let deviations = points.iter().map(|z| Ok((length_at(z)? - value).abs())).collect::<Result<Vec<f64>>>()?;
    let max_deviation = deviations.into_iter().fold(0.0, f64::max);
    if !(max_deviation <= KAI_OHSAWA_TOL) {
        return Err(Error::NotConstantLength { deviation: max_deviation, tolerance: KAI_OHSAWA_TOL });
    }
    let jet = psi.jet(&origin, 1)?;
    Ok(KaiOhsawaConstant {
        domain: d.label(),
        value,
        lower_bound: d.invariants().rc,
        max_deviation,
        points_checked: points.len(),
        derivative_at_origin: (0..d.n()).map(|a| jet.d(a).re).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalityRow {
    pub kind: String,
    pub n: usize,
    pub rank: usize,
    pub c: f64,
    pub rc_over_k: f64,
    pub bound: f64,
    /// rc/K > (n+1)/K.
    pub strict: bool,
    pub ball_equivalent: bool,
}

fn minimality_row(kind: String, n: usize, rank: usize, c: f64, ball_equivalent: bool, ricci: f64) -> MinimalityRow {
    let rc_over_k = rank as f64 * c / ricci;
    let bound = (n + 1) as f64 / ricci;
    MinimalityRow { kind, n, rank, c, rc_over_k, bound, strict: rc_over_k > bound + 1e-12, ball_equivalent }
}

/// Rows (kind, n, rank, c, rc/K, (n+1)/K, strict) for the given kinds.
pub fn ball_minimality_report(kinds: &[DomainModel], ricci: f64) -> Result<Vec<MinimalityRow>> {
    check_ricci(ricci)?;
    Ok(kinds
        .iter()
        .map(|d| {
            let inv = d.invariants();
            minimality_row(inv.label, inv.n, inv.rank, d.c(), d.is_ball_equivalent(), ricci)
        })
        .collect())
}

/// Rows for the two exceptional domains, from tabulated invariants.
pub fn exceptional_minimality_rows(ricci: f64) -> Result<Vec<MinimalityRow>> {
    check_ricci(ricci)?;
    Ok(exceptional_invariants()
        .into_iter()
        .map(|inv| minimality_row(inv.label, inv.n, inv.rank, inv.c, false, ricci))
        .collect())
}
