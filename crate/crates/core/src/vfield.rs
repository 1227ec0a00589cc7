//! The vector field V = i e^{kφ} grad φ, k = K/(n+1), built from a potential of
//! constant gradient length (n+1)/K, and its real flow.
//!
//! V is holomorphic exactly when k‖∂φ‖² ≡ 1, and then Re V generates a flow of
//! isometries. W = i grad φ is tangent to the level sets of φ, and on {φ = c}
//! V = e^{kc} W, so the two flows agree up to a constant time scale.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermgeo::{self, MetricFrame};
use crate::jets::{fd_jet_complex, ComplexPoint, FdSteps};
use crate::potentials::{ConstantLengthCertificate, PotentialField};

/// Components V^α at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorFieldAt {
    pub point: ComplexPoint,
    #[serde(with = "complex_list")]
    pub components: Vec<Complex64>,
    /// ‖V‖_ω = e^{kφ}‖∂φ‖_ω.
    pub norm: f64,
}

mod complex_list {
    use num_complex::Complex64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|c| [c.re, c.im]))
    }
}

fn exponent(p: &PotentialField) -> f64 {
    p.ricci_constant() / (p.dim() + 1) as f64
}

/// Order-3 analytic frame, falling back to finite differences.
fn frame_at(p: &PotentialField, z: &ComplexPoint) -> Result<MetricFrame> {
    hermgeo::metric_from_potential(p, z)
}

/// i e^{kφ} φ^α using the given frame.
fn components(p: &PotentialField, frame: &MetricFrame) -> Vec<Complex64> {
    let scale = Complex64::new(0.0, (exponent(p) * frame.jet.value()).exp());
    hermgeo::gradient(frame, &frame.jet).into_iter().map(|v| v * scale).collect()
}

/// i φ^α.
fn w_components(frame: &MetricFrame) -> Vec<Complex64> {
    hermgeo::gradient(frame, &frame.jet).into_iter().map(|v| v * Complex64::i()).collect()
}

/// Tolerance on the certified constant against (n+1)/K.
const CONSTANT_TOL: f64 = 1e-6;

/// A potential whose gradient length has been certified equal to (n+1)/K.
#[derive(Clone, Debug)]
pub struct HolomorphicField {
    potential: PotentialField,
    certificate: ConstantLengthCertificate,
}

impl HolomorphicField {
    pub fn new(p: &PotentialField, certificate: &ConstantLengthCertificate) -> Result<Self> {
        if certificate.potential != p.label() || certificate.ricci != p.ricci_constant() || certificate.dim != p.dim() {
            return Err(Error::Precondition(format!(
                "certificate for {} does not belong to {}",
                certificate.potential,
                p.label()
            )));
        }
        let target = (p.dim() + 1) as f64 / p.ricci_constant();
        let tol = CONSTANT_TOL.max(certificate.tolerance) * target.max(1.0);
        if (certificate.constant - target).abs() > tol {
            return Err(Error::Precondition(format!(
                "gradient length {} differs from (n+1)/K = {target}",
                certificate.constant
            )));
        }
        Ok(HolomorphicField { potential: p.clone(), certificate: certificate.clone() })
    }

    /// Certifies `p` on `samples` seeded interior points, then builds the field.
    pub fn certify(p: &PotentialField, samples: usize, seed: u64) -> Result<Self> {
        let points = p.domain().seeded_samples(samples.max(1), seed);
        let cert = ConstantLengthCertificate::certify(p, &points, 1e-8)
            .map_err(|e| Error::Precondition(format!("certification failed: {e}")))?;
        Self::new(p, &cert)
    }

    pub fn potential(&self) -> &PotentialField {
        &self.potential
    }

    pub fn certificate(&self) -> &ConstantLengthCertificate {
        &self.certificate
    }

    pub fn at(&self, z: &ComplexPoint) -> Result<VectorFieldAt> {
        let frame = frame_at(&self.potential, z)?;
        let components = components(&self.potential, &frame);
        let norm = (exponent(&self.potential) * frame.jet.value()).exp()
            * hermgeo::gradient_length_sq(&frame, &frame.jet).sqrt();
        Ok(VectorFieldAt { point: z.clone(), components, norm })
    }
}

/// V^α = i e^{kφ} g^{αβ̄} φ_β̄ for a certified potential.
pub fn vector_field(field: &HolomorphicField, z: &ComplexPoint) -> Result<VectorFieldAt> {
    field.at(z)
}

/// ‖T‖² = g_{αλ̄} g^{μβ̄} T^α_β̄ conj(T^λ_μ̄) for a mixed tensor `t[(α, β)]` = T^α_β̄.
fn mixed_norm_sq(frame: &MetricFrame, t: &DMatrix<Complex64>) -> f64 {
    let n = frame.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for l in 0..n {
                for m in 0..n {
                    acc += frame.g[(a, l)] * frame.inv(m, b) * t[(a, b)] * t[(l, m)].conj();
                }
            }
        }
    }
    acc.re
}

/// V^α_{;β̄} = e^{kφ}(k φ_β̄ φ^α + g^{αγ̄} conj(φ_{γ;β})).
pub fn dbar_tensor(p: &PotentialField, z: &ComplexPoint) -> Result<DMatrix<Complex64>> {
    let frame = frame_at(p, z)?;
    let k = exponent(p);
    let jet = &frame.jet;
    let e = (k * jet.value()).exp();
    let up = hermgeo::gradient(&frame, jet);
    let h = hermgeo::covariant_hessian(&frame, jet);
    let n = z.dim();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let second: Complex64 = (0..n).map(|c| frame.inv(a, c) * h[(c, b)].conj()).sum();
        (jet.dbar(b) * up[a] * k + second) * e
    }))
}

/// ‖∇″V‖²_ω at `z`; defined for any potential and zero for constant length (n+1)/K.
pub fn dbar_defect(p: &PotentialField, z: &ComplexPoint) -> Result<f64> {
    let frame = frame_at(p, z)?;
    Ok(mixed_norm_sq(&frame, &dbar_tensor(p, z)?))
}

/// The same norm with ∂V^α/∂z̄^β taken by finite differences of the components.
pub fn dbar_defect_fd(p: &PotentialField, z: &ComplexPoint, steps: FdSteps) -> Result<f64> {
    let n = z.dim();
    let mut t = DMatrix::zeros(n, n);
    for a in 0..n {
        let jet = fd_jet_complex(|w| Ok(components(p, &frame_at(p, w)?)[a]), z, 1, steps)?;
        for b in 0..n {
            t[(a, b)] = jet.dbar(b);
        }
    }
    Ok(mixed_norm_sq(&frame_at(p, z)?, &t))
}

/// e^{2kφ}(k‖∂φ‖² − 1)², the closed-form value proposed for ‖∇″V‖².
pub fn dbar_defect_law(p: &PotentialField, z: &ComplexPoint) -> Result<f64> {
    let frame = frame_at(p, z)?;
    let k = exponent(p);
    let length = hermgeo::gradient_length_sq(&frame, &frame.jet);
    Ok((2.0 * k * frame.jet.value()).exp() * (k * length - 1.0).powi(2))
}

/// |(Re W)φ| = |2 Re(i φ^α φ_α)| at `z`.
pub fn level_set_tangency(p: &PotentialField, z: &ComplexPoint) -> Result<f64> {
    let frame = frame_at(p, z)?;
    let w = w_components(&frame);
    let s: Complex64 = (0..z.dim()).map(|a| w[a] * frame.jet.d(a)).sum();
    Ok((2.0 * s.re).abs())
}

/// Which real field to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowField {
    /// ż^α = V^α
    ReV,
    /// ż^α = i φ^α
    ReW,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const MAX_HORIZON: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<ComplexPoint>,
    pub potential: Vec<f64>,
}

impl Trajectory {
    pub fn end(&self) -> &ComplexPoint {
        self.points.last().expect("trajectory has its initial point")
    }

    /// CSV rows `t, Re z¹, Im z¹, …, φ`.
    pub fn to_csv(&self) -> String {
        let n = self.points[0].dim();
        let mut header = vec!["t".to_string()];
        for a in 1..=n {
            header.push(format!("re_z{a}"));
            header.push(format!("im_z{a}"));
        }
        header.push("phi".into());
        let mut out = header.join(",");
        out.push('\n');
        for ((t, z), phi) in self.times.iter().zip(&self.points).zip(&self.potential) {
            let mut row = vec![t.to_string()];
            for c in z.iter() {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            row.push(phi.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn velocity(p: &PotentialField, field: FlowField, z: &[Complex64], time: f64) -> Result<Vec<Complex64>> {
    let point = ComplexPoint::unchecked(z.to_vec());
    if !p.domain().contains(&point) {
        return Err(Error::LeftDomain { time });
    }
    let frame = MetricFrame::from_jet(&point, p.jet(&point, 2)?)?;
    Ok(match field {
        FlowField::ReV => components(p, &frame),
        FlowField::ReW => w_components(&frame),
    })
}

fn axpy(z: &[Complex64], h: f64, v: &[Complex64]) -> Vec<Complex64> {
    z.iter().zip(v).map(|(a, b)| a + b * h).collect()
}

/// Fixed-step RK4 trajectory from `z0` to time `t` (negative times run backwards).
pub fn trajectory(p: &PotentialField, z0: &ComplexPoint, t: f64, dt: f64, field: FlowField) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if !(t.abs() <= MAX_HORIZON) {
        return Err(Error::InvalidParameter(format!("|t| = {} exceeds the horizon {MAX_HORIZON}", t.abs())));
    }
    p.domain().check_point(z0)?;
    let steps = (t.abs() / dt).round().max(if t == 0.0 { 0.0 } else { 1.0 }) as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut z = z0.to_vec();
    let mut traj = Trajectory { times: vec![0.0], points: vec![z0.clone()], potential: vec![p.value(z0)?] };
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = velocity(p, field, &z, s)?;
        let k2 = velocity(p, field, &axpy(&z, h / 2.0, &k1), s + h / 2.0)?;
        let k3 = velocity(p, field, &axpy(&z, h / 2.0, &k2), s + h / 2.0)?;
        let k4 = velocity(p, field, &axpy(&z, h, &k3), s + h)?;
        for a in 0..z.len() {
            z[a] += (k1[a] + k2[a] * 2.0 + k3[a] * 2.0 + k4[a]) * (h / 6.0);
        }
        let point = ComplexPoint::unchecked(z.clone());
        if !p.domain().contains(&point) {
            return Err(Error::LeftDomain { time: s + h });
        }
        traj.potential.push(p.value(&point)?);
        traj.times.push(s + h);
        traj.points.push(point);
    }
    Ok(traj)
}

/// End point of the flow of `field` after time `t`.
pub fn integrate_flow(p: &PotentialField, z0: &ComplexPoint, t: f64, dt: f64, field: FlowField) -> Result<ComplexPoint> {
    Ok(trajectory(p, z0, t, dt, field)?.end().clone())
}

/// max |((flow_t)*g − g)_{αβ̄}| at `z0`, with the Jacobian of the time-t map
/// from central differences in the 2n real directions.
pub fn pullback_defect(p: &PotentialField, z0: &ComplexPoint, t: f64, dt: f64, field: FlowField) -> Result<f64> {
    const H: f64 = 1e-4;
    let n = z0.dim();
    let image = integrate_flow(p, z0, t, dt, field)?;
    let mut jac = DMatrix::<Complex64>::zeros(n, n);
    let shifted = |a: usize, dir: Complex64| -> Result<Vec<Complex64>> {
        let mut w = z0.to_vec();
        w[a] += dir;
        Ok(integrate_flow(p, &ComplexPoint::new(w)?, t, dt, field)?.into_inner())
    };
    for a in 0..n {
        let (xp, xm) = (shifted(a, Complex64::new(H, 0.0))?, shifted(a, Complex64::new(-H, 0.0))?);
        let (yp, ym) = (shifted(a, Complex64::new(0.0, H))?, shifted(a, Complex64::new(0.0, -H))?);
        for l in 0..n {
            let dx = (xp[l] - xm[l]) / (2.0 * H);
            let dy = (yp[l] - ym[l]) / (2.0 * H);
            jac[(l, a)] = (dx - dy * Complex64::i()) * 0.5;
        }
    }
    let g0 = MetricFrame::from_jet(z0, p.jet(z0, 2)?)?.g;
    let g1 = MetricFrame::from_jet(&image, p.jet(&image, 2)?)?.g;
    let pulled = jac.transpose() * g1 * jac.map(|c| c.conj());
    Ok((pulled - g0).iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// max_s |γ_V(s) − γ_W(e^{kc} s)| over the recorded times of γ_V, where c = φ(z0).
pub fn reparametrization_defect(p: &PotentialField, z0: &ComplexPoint, t: f64, dt: f64) -> Result<f64> {
    let scale = (exponent(p) * p.value(z0)?).exp();
    let v = trajectory(p, z0, t, dt, FlowField::ReV)?;
    let stride = (v.times.len() / 10).max(1);
    let mut worst = 0.0f64;
    for i in (0..v.times.len()).step_by(stride).chain(std::iter::once(v.times.len() - 1)) {
        let w_end = integrate_flow(p, z0, scale * v.times[i], dt, FlowField::ReW)?;
        let dist = v.points[i].iter().zip(w_end.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(dist);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ball_potential, rescaled_ball_potential};

    fn pt(parts: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint::from_parts(parts).unwrap()
    }

    #[test]
    fn field_at_origin_is_i_d_dz1() {
        let p = rescaled_ball_potential(2, 3.0).unwrap();
        let field = HolomorphicField::certify(&p, 20, 1).unwrap();
        let v = vector_field(&field, &ComplexPoint::origin(2)).unwrap();
        assert!((v.components[0] - Complex64::i()).norm() < 1e-14);
        assert!(v.components[1].norm() < 1e-14);
        assert!((v.norm - 1.0).abs() < 1e-14);
        let z = pt(&[(0.2, -0.3), (0.1, 0.4)]);
        let at = field.at(&z).unwrap();
        let want = (p.value(&z).unwrap()).exp();
        assert!((at.norm - want).abs() < 1e-10);
        assert_eq!(at, field.at(&z).unwrap());
    }

    #[test]
    fn certificate_is_required() {
        let rho = ball_potential(2).unwrap();
        assert!(matches!(HolomorphicField::certify(&rho, 10, 1), Err(Error::Precondition(_))));
        let p = rescaled_ball_potential(2, 3.0).unwrap();
        let other = rescaled_ball_potential(2, 1.0).unwrap();
        let cert = ConstantLengthCertificate::certify(&other, &other.domain().seeded_samples(5, 2), 1e-8).unwrap();
        assert!(matches!(HolomorphicField::new(&p, &cert), Err(Error::Precondition(_))));
    }

    #[test]
    fn rescaled_ball_field_is_holomorphic() {
        for k in [1.0, 3.0, 4.5] {
            let p = rescaled_ball_potential(2, k).unwrap();
            for z in p.domain().seeded_samples(10, 9) {
                assert!(dbar_defect(&p, &z).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn dbar_defect_of_the_ball_potential() {
        // with K = n+1 the field is V = i z, which is holomorphic
        let rho = ball_potential(2).unwrap();
        let z = pt(&[(0.3, 0.1), (-0.2, 0.2)]);
        assert!(dbar_defect(&rho, &z).unwrap() < 1e-12);
        assert!(dbar_defect(&rho, &ComplexPoint::origin(2)).unwrap() < 1e-14);
        assert!((dbar_defect_law(&rho, &ComplexPoint::origin(2)).unwrap() - 1.0).abs() < 1e-14);
        let fd = dbar_defect_fd(&rho.rescale_ricci(1.0), &z, FdSteps::default()).unwrap();
        let exact = dbar_defect(&rho.rescale_ricci(1.0), &z).unwrap();
        assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
    }

    #[test]
    fn tangency_needs_no_constancy() {
        let rho = ball_potential(3).unwrap();
        let p = rescaled_ball_potential(3, 2.0).unwrap();
        for z in rho.domain().seeded_samples(10, 4) {
            assert!(level_set_tangency(&rho, &z).unwrap() < 1e-12);
            assert!(level_set_tangency(&p, &z).unwrap() < 1e-12);
        }
        assert_eq!(level_set_tangency(&p, &ComplexPoint::origin(3)).unwrap(), 0.0);
    }

    #[test]
    fn flow_basics() {
        let p = rescaled_ball_potential(2, 3.0).unwrap();
        let z0 = ComplexPoint::origin(2);
        assert_eq!(integrate_flow(&p, &z0, 0.0, DEFAULT_DT, FlowField::ReV).unwrap(), z0);
        let end = integrate_flow(&p, &z0, 1.0, DEFAULT_DT, FlowField::ReW).unwrap();
        assert!(p.value(&end).unwrap().abs() < 1e-6);
        assert!(integrate_flow(&p, &z0, 11.0, DEFAULT_DT, FlowField::ReW).is_err());
        assert!(integrate_flow(&p, &z0, 1.0, 0.0, FlowField::ReW).is_err());
    }

    #[test]
    fn flow_of_re_v_is_an_isometry() {
        let p = rescaled_ball_potential(2, 3.0).unwrap();
        let d = pullback_defect(&p, &ComplexPoint::origin(2), 0.5, DEFAULT_DT, FlowField::ReV).unwrap();
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn v_flow_is_a_time_change_of_w_flow() {
        let p = rescaled_ball_potential(2, 2.0).unwrap();
        let z0 = pt(&[(0.2, 0.1), (-0.1, 0.3)]);
        assert!(reparametrization_defect(&p, &z0, 0.5, DEFAULT_DT).unwrap() < 1e-5);
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = rescaled_ball_potential(1, 2.0).unwrap();
        let traj = trajectory(&p, &ComplexPoint::origin(1), 0.002, DEFAULT_DT, FlowField::ReW).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,re_z1,im_z1,phi");
        assert_eq!(lines.len(), 4);
    }
}
