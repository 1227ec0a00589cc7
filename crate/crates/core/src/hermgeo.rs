//! Hermitian geometry of a Kähler potential at a point: metric g_{αβ̄} = ∂α∂β̄φ,
//! its inverse, Christoffel symbols, gradient lengths, the covariant Hessian,
//! the Laplacian and Ricci curvature.
//!
//! Index conventions: `g[(α, β)]` is g_{αβ̄}; the inverse metric g^{αβ̄} is
//! `g_inv[(β, α)]` where `g_inv` is the matrix inverse; Γ^λ_{αβ} = g^{λμ̄} φ_{αβμ̄}.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{fd_jet, ComplexPoint, FdSteps, Jet};
use crate::potentials::PotentialField;
use crate::series::{self, Series, Vars};

/// How derivatives beyond the metric are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Closed-form Taylor expansion of the potential.
    #[default]
    Analytic,
    /// Finite differences of lower-order analytic quantities.
    FiniteDifference,
}

#[derive(Clone, Debug)]
pub struct MetricFrame {
    pub point: ComplexPoint,
    pub g: DMatrix<Complex64>,
    pub g_inv: DMatrix<Complex64>,
    /// Γ^λ_{αβ} stored as `christoffel[λ][(α, β)]`; present when the jet has order ≥ 3.
    pub christoffel: Option<Vec<DMatrix<Complex64>>>,
    pub log_det_g: f64,
    pub jet: Jet,
}

impl MetricFrame {
    /// Builds the frame from a jet of the potential of order ≥ 2.
    pub fn from_jet(point: &ComplexPoint, jet: Jet) -> Result<Self> {
        if jet.order() < 2 {
            return Err(Error::UnsupportedOrder { requested: 2, supported: jet.order() });
        }
        let n = jet.dim();
        let raw = DMatrix::from_fn(n, n, |a, b| jet.d_dbar(a, b));
        let g = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
        if g.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateMetric(point.clone()));
        }
        let chol = positive_cholesky(g.clone()).ok_or_else(|| Error::DegenerateMetric(point.clone()))?;
        let log_det_g = 2.0 * chol.l_dirty().diagonal().iter().map(|c| c.re.ln()).sum::<f64>();
        let g_inv = chol.inverse();
        let mut frame = MetricFrame { point: point.clone(), g, g_inv, christoffel: None, log_det_g, jet };
        if frame.jet.order() >= 3 {
            let gammas = (0..n)
                .map(|l| {
                    DMatrix::from_fn(n, n, |a, b| {
                        (0..n).map(|m| frame.inv(l, m) * frame.jet.d2_dbar(a, b, m)).sum()
                    })
                })
                .collect();
            frame.christoffel = Some(gammas);
        }
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// g^{αβ̄}
    pub fn inv(&self, a: usize, b: usize) -> Complex64 {
        self.g_inv[(b, a)]
    }

    /// Γ^λ_{αβ}; panics when the frame was built from a second-order jet.
    pub fn gamma(&self, l: usize, a: usize, b: usize) -> Complex64 {
        self.christoffel.as_ref().expect("Christoffel symbols need a third-order jet")[l][(a, b)]
    }

    /// v^α = g^{αβ̄} w_β̄
    pub fn raise(&self, w_bar: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| self.inv(a, b) * w_bar[b]).sum()).collect()
    }
}

/// Cholesky factorization that fails unless the Hermitian matrix is positive definite.
///
/// The complex factorization takes principal square roots of the pivots, so a
/// negative pivot shows up as a non-positive real part on the diagonal of L.
pub(crate) fn positive_cholesky(m: DMatrix<Complex64>) -> Option<Cholesky<Complex64, nalgebra::Dyn>> {
    let chol = Cholesky::new(m)?;
    let ok = chol.l_dirty().diagonal().iter().all(|d| d.re > 0.0 && d.im.abs() <= 1e-10 * d.re);
    ok.then_some(chol)
}

/// Frame from the potential's own jet (analytic when available).
pub fn metric_from_potential(p: &PotentialField, z: &ComplexPoint) -> Result<MetricFrame> {
    let order = if p.analytic_order() >= 2 { p.analytic_order().min(3) } else { 3 };
    MetricFrame::from_jet(z, p.jet(z, order)?)
}

/// Frame from finite differences of the potential's values.
pub fn metric_from_potential_fd(p: &PotentialField, z: &ComplexPoint, steps: FdSteps) -> Result<MetricFrame> {
    MetricFrame::from_jet(z, p.fd_jet(z, 3, steps)?)
}

/// ∂^α f = g^{αβ̄} ∂_β̄ f for a real function with jet `f`.
pub fn gradient(frame: &MetricFrame, f: &Jet) -> Vec<Complex64> {
    let w: Vec<Complex64> = (0..frame.dim()).map(|b| f.dbar(b)).collect();
    frame.raise(&w)
}

/// ‖∂f‖² = g^{αβ̄} f_α f_β̄.
pub fn gradient_length_sq(frame: &MetricFrame, f: &Jet) -> f64 {
    let up = gradient(frame, f);
    (0..frame.dim()).map(|a| f.d(a) * up[a]).sum::<Complex64>().re
}

/// ‖df‖² = 2‖∂f‖² for real f.
pub fn differential_length_sq(frame: &MetricFrame, f: &Jet) -> f64 {
    2.0 * gradient_length_sq(frame, f)
}

/// f_{α;β} = f_{αβ} − Γ^λ_{αβ} f_λ.
pub fn covariant_hessian(frame: &MetricFrame, f: &Jet) -> DMatrix<Complex64> {
    let n = frame.dim();
    DMatrix::from_fn(n, n, |a, b| f.d2(a, b) - (0..n).map(|l| frame.gamma(l, a, b) * f.d(l)).sum::<Complex64>())
}

/// ‖∇′²f‖² = f_{α;β} conj(f_{λ;μ}) g^{αλ̄} g^{βμ̄}.
pub fn hessian_norm_sq(frame: &MetricFrame, f: &Jet) -> f64 {
    let h = covariant_hessian(frame, f);
    let n = frame.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for l in 0..n {
                for m in 0..n {
                    acc += h[(a, b)] * h[(l, m)].conj() * frame.inv(a, l) * frame.inv(b, m);
                }
            }
        }
    }
    acc.re
}

/// Components f_{α;β} f^α + f_β; all vanish for a potential of constant gradient length.
pub fn key_equation(frame: &MetricFrame, f: &Jet) -> Vec<Complex64> {
    let h = covariant_hessian(frame, f);
    let up = gradient(frame, f);
    let n = frame.dim();
    (0..n).map(|b| (0..n).map(|a| h[(a, b)] * up[a]).sum::<Complex64>() + f.d(b)).collect()
}

/// Largest component of [`key_equation`] in absolute value.
pub fn key_equation_residual(frame: &MetricFrame, f: &Jet) -> f64 {
    key_equation(frame, f).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Δf = g^{αβ̄} f_{αβ̄} (non-positive spectrum on L²).
pub fn laplacian(frame: &MetricFrame, f: &Jet) -> f64 {
    let n = frame.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += frame.inv(a, b) * f.d_dbar(a, b);
        }
    }
    acc.re
}

/// log det(g_{αβ̄}) at `z`.
pub fn log_det_metric(p: &PotentialField, z: &ComplexPoint) -> Result<f64> {
    Ok(MetricFrame::from_jet(z, p.jet(z, 2)?)?.log_det_g)
}

/// Series of the metric entries g_{αβ̄} of degree `degree` around `z`.
fn metric_series(p: &PotentialField, z: &ComplexPoint, degree: usize) -> Result<Vec<Vec<Series>>> {
    if p.analytic_order() < degree + 2 {
        return Err(Error::UnsupportedOrder { requested: degree + 2, supported: p.analytic_order() });
    }
    p.check_point(z)?;
    let phi = p.formula().expand(&Vars::new(z, degree + 2))?;
    let n = z.dim();
    Ok((0..n).map(|a| (0..n).map(|b| phi.diff(a).diff(n + b)).collect()).collect())
}

/// Jet of log det g of order `order` from the closed form (needs analytic order + 2).
pub fn log_det_metric_jet(p: &PotentialField, z: &ComplexPoint, order: usize) -> Result<Jet> {
    let g = metric_series(p, z, order)?;
    let det = series::det(&g)?;
    if !(det.value().re > 0.0) {
        return Err(Error::DegenerateMetric(z.clone()));
    }
    Ok(Jet::from_series(&det.ln()?))
}

/// Ricci form R_{αβ̄} = −∂α∂β̄ log det g.
pub fn ricci(p: &PotentialField, z: &ComplexPoint, route: Route) -> Result<DMatrix<Complex64>> {
    let jet = match route {
        Route::Analytic => log_det_metric_jet(p, z, 2)?,
        Route::FiniteDifference => fd_jet(|w| log_det_metric(p, w), z, 2, FdSteps::default())?,
    };
    let n = z.dim();
    Ok(DMatrix::from_fn(n, n, |a, b| -jet.d_dbar(a, b)))
}

/// max |R_{αβ̄} + K g_{αβ̄}|.
pub fn einstein_residual(p: &PotentialField, z: &ComplexPoint, route: Route) -> Result<f64> {
    let r = ricci(p, z, route)?;
    let frame = MetricFrame::from_jet(z, p.jet(z, 2)?)?;
    let k = Complex64::new(p.ricci_constant(), 0.0);
    Ok((r + frame.g * k).iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Jet of F = ‖∂φ‖² of order 2 from the closed form (needs analytic order 4).
fn gradient_length_jet(p: &PotentialField, z: &ComplexPoint) -> Result<Jet> {
    let g = metric_series(p, z, 2)?;
    let inv = series::inverse(&g)?;
    let phi = p.formula().expand(&Vars::new(z, 4))?;
    let n = z.dim();
    let d: Vec<Series> = (0..n).map(|a| phi.diff(a).truncate(2)).collect();
    let dbar: Vec<Series> = (0..n).map(|b| phi.diff(n + b).truncate(2)).collect();
    let mut acc = Series::zero(g[0][0].space());
    for a in 0..n {
        for b in 0..n {
            // g^{αβ̄} is entry (β, α) of the matrix inverse
            acc = acc + &(&d[a] * &inv[b][a]) * &dbar[b];
        }
    }
    Ok(Jet::from_series(&acc))
}

/// Terms of Δ‖∂φ‖² = ‖∇′²φ‖² + n − K‖∂φ‖² at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaIdentityTerms {
    pub laplacian_of_length: f64,
    pub hessian_norm_sq: f64,
    pub gradient_length_sq: f64,
    pub dim: usize,
    pub ricci: f64,
}

impl DeltaIdentityTerms {
    pub fn residual(&self) -> f64 {
        self.laplacian_of_length - self.hessian_norm_sq - self.dim as f64 + self.ricci * self.gradient_length_sq
    }
}

pub fn delta_identity_terms(p: &PotentialField, z: &ComplexPoint, route: Route) -> Result<DeltaIdentityTerms> {
    let frame = metric_from_potential(p, z)?;
    let length_jet = match route {
        Route::Analytic => gradient_length_jet(p, z)?,
        Route::FiniteDifference => fd_jet(
            |w| {
                let f = MetricFrame::from_jet(w, p.jet(w, 2)?)?;
                Ok(gradient_length_sq(&f, &f.jet))
            },
            z,
            2,
            FdSteps::default(),
        )?,
    };
    Ok(DeltaIdentityTerms {
        laplacian_of_length: laplacian(&frame, &length_jet),
        hessian_norm_sq: hessian_norm_sq(&frame, &frame.jet),
        gradient_length_sq: gradient_length_sq(&frame, &frame.jet),
        dim: z.dim(),
        ricci: p.ricci_constant(),
    })
}

/// Δ‖∂φ‖² − ‖∇′²φ‖² − n + K‖∂φ‖².
pub fn delta_identity_residual(p: &PotentialField, z: &ComplexPoint, route: Route) -> Result<f64> {
    Ok(delta_identity_terms(p, z, route)?.residual())
}
