//! Radially symmetric Kähler–Einstein potentials on the ball.
//!
//! For φ = Φ(t), t = ‖z‖², det g = Φ′^{n−1}(Φ′ + tΦ″), and the Einstein
//! condition φ = (1/K) log det g becomes
//!
//! ```text
//! (n − 1) log Φ′ + log(Φ′ + tΦ″) = KΦ,   i.e.   (tΦ′)′ = e^{KΦ} Φ′^{1−n}.
//! ```
//!
//! At t = 0 this forces Φ′(0) = e^{KΦ(0)/n}. Solutions form the one-parameter
//! family Φ(λt) + (n/K) log λ, each blowing up at t = 1/λ; shooting on Φ(0)
//! picks the complete one, whose blow-up sits at the boundary t = 1. The ball's
//! complete solution is −A log(1 − t) + (n/K) log A with A = (n+1)/K.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::domains::DomainModel;
use crate::error::{Error, Result};
use crate::jets::{ComplexPoint, MAX_ORDER};
use crate::potentials::{Formula, PotentialField};
use crate::series::{Series, Vars};

/// Blow-up threshold on Φ′.
pub const BLOWUP: f64 = 1e8;
/// Last grid point of a numerical solution.
pub const GRID_END: f64 = 1.0 - 1e-3;
/// Points used for the boundary extrapolation.
const LIMIT_T1: f64 = 1.0 - 1e-2;
const LIMIT_T2: f64 = 1.0 - 1e-3;
/// Terms kept in local Taylor expansions.
const TAYLOR_TERMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShootOptions {
    /// Step control: dt = min(max_step · max(1, t), eta · Φ′/Φ″, t/10).
    pub eta: f64,
    pub max_step: f64,
    pub max_iterations: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { eta: 0.004, max_step: 0.01, max_iterations: 200 }
    }
}

#[derive(Clone, Debug)]
enum Profile {
    /// −A log(1 − t) + shift
    Ball { a: f64, shift: f64 },
    Constant(f64),
    Numerical(Grid),
}

#[derive(Clone, Debug, Serialize)]
struct Grid {
    t: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

/// A radial potential Φ(t) on Ball(n) with target Ricci constant −K.
#[derive(Clone, Debug)]
pub struct RadialPotential {
    n: usize,
    ricci: f64,
    profile: Profile,
}

/// Diagnostics of a shooting run.
#[derive(Clone, Debug, Serialize)]
pub struct ShootReport {
    pub phi0: f64,
    pub blowup: f64,
    pub iterations: usize,
    /// (Φ(0), estimated blow-up point) for every trial, sorted by Φ(0).
    pub trials: Vec<(f64, f64)>,
}

fn check_params(n: usize, ricci: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
    }
    if !(ricci > 0.0 && ricci.is_finite()) {
        return Err(Error::InvalidParameter(format!("Ricci constant must be positive, got {ricci}")));
    }
    Ok(())
}

fn degenerate(n: usize, t: f64) -> Error {
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[0] = Complex64::new(t.max(0.0).sqrt(), 0.0);
    Error::DegenerateMetric(ComplexPoint::unchecked(z))
}

/// Incremental Taylor coefficients of E = e^{KΦ} and P = Φ′^{1−n}.
struct Nonlinearity {
    k: f64,
    alpha: f64,
    e: Vec<f64>,
    p: Vec<f64>,
}

impl Nonlinearity {
    fn new(k: f64, n: usize, f0: f64, big_f0: f64) -> Self {
        let alpha = 1.0 - n as f64;
        Nonlinearity { k, alpha, e: vec![(k * f0).exp()], p: vec![big_f0.powf(alpha)] }
    }

    /// Pushes E_m, P_m given Φ coefficients f[..=m] and Φ′ coefficients big_f[..=m].
    fn push(&mut self, f: &[f64], big_f: &[f64]) {
        let m = self.e.len();
        let e_m = (1..=m).map(|j| j as f64 * self.k * f[j] * self.e[m - j]).sum::<f64>() / m as f64;
        let p_m = (1..=m).map(|j| (self.alpha * j as f64 - (m - j) as f64) * big_f[j] * self.p[m - j]).sum::<f64>()
            / (m as f64 * big_f[0]);
        self.e.push(e_m);
        self.p.push(p_m);
    }

    fn g(&self, m: usize) -> f64 {
        (0..=m).map(|j| self.e[j] * self.p[m - j]).sum()
    }
}

/// Taylor coefficients of Φ at t0 = 0 with Φ(0) = f0, Φ′(0) = e^{K f0/n}.
fn taylor_at_origin(n: usize, k: f64, f0: f64, terms: usize) -> Vec<f64> {
    let big_f0 = (k * f0 / n as f64).exp();
    let mut f = vec![f0, big_f0];
    let mut big_f = vec![big_f0];
    let mut nl = Nonlinearity::new(k, n, f0, big_f0);
    for m in 1..terms {
        // Φ′_m enters P_m linearly; solve (m+1)Φ′_m = G_m for it
        big_f.push(0.0);
        nl.push(&f, &big_f);
        let partial = nl.g(m);
        let fm = partial / (m + n) as f64;
        big_f[m] = fm;
        nl.p[m] += nl.alpha * fm * nl.p[0] / big_f0;
        f.push(fm / (m + 1) as f64);
    }
    f.truncate(terms + 1);
    f
}

/// Taylor coefficients of Φ at t0 > 0 from Φ(t0), Φ′(t0).
fn taylor_at(n: usize, k: f64, t0: f64, f0: f64, big_f0: f64, terms: usize) -> Vec<f64> {
    let mut f = vec![f0, big_f0];
    let mut big_f = vec![big_f0];
    let mut nl = Nonlinearity::new(k, n, f0, big_f0);
    for m in 0..terms {
        if m > 0 {
            nl.push(&f, &big_f);
        }
        // (t0 + s)Φ′ has derivative G: (m+1)(t0 Φ′_{m+1} + Φ′_m) = G_m
        let next = (nl.g(m) / (m + 1) as f64 - big_f[m]) / t0;
        big_f.push(next);
        f.push(next / (m + 2) as f64);
    }
    f.truncate(terms + 1);
    f
}

fn eval_poly(c: &[f64], s: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, &ck) in c.iter().enumerate().rev() {
        out[0] = out[0] * s + ck;
        if k >= 1 {
            out[1] = out[1] * s + ck * k as f64;
        }
        if k >= 2 {
            out[2] = out[2] * s + ck * (k * (k - 1)) as f64;
        }
    }
    out
}

/// Φ″ from the ODE at a state (t > 0).
fn second_derivative(n: usize, k: f64, t: f64, phi: f64, dphi: f64) -> f64 {
    let g = (k * phi).exp() * dphi.powf(1.0 - n as f64);
    (g - dphi) / t
}

struct Integrator {
    n: usize,
    k: f64,
}

impl Integrator {
    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], second_derivative(self.n, self.k, t, y[0], y[1])]
    }

    fn step(&self, t: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
        let k1 = self.rhs(t, y);
        let k2 = self.rhs(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = self.rhs(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = self.rhs(t + h, add(y, k3, h));
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Series start: first node after 0 where the series is still converged.
    fn start(&self, f0: f64) -> (f64, [f64; 2]) {
        let c = taylor_at_origin(self.n, self.k, f0, TAYLOR_TERMS);
        let mut ts: f64 = 0.01;
        while c[TAYLOR_TERMS].abs() * ts.powi(TAYLOR_TERMS as i32) > 1e-16 * c[0].abs().max(1.0) && ts > 1e-8 {
            ts *= 0.5;
        }
        let v = eval_poly(&c, ts);
        (ts, [v[0], v[1]])
    }

    fn dt(&self, opts: &ShootOptions, t: f64, y: [f64; 2]) -> f64 {
        let f2 = second_derivative(self.n, self.k, t, y[0], y[1]);
        let scale = if f2 > 0.0 { y[1] / f2 } else { f64::INFINITY };
        (opts.max_step * t.max(1.0)).min(opts.eta * scale).min(0.1 * t)
    }

    /// Integrates until Φ′ exceeds [`BLOWUP`]; returns the estimate t + Φ′/Φ″.
    fn blowup(&self, f0: f64, opts: &ShootOptions) -> Result<f64> {
        let (mut t, mut y) = self.start(f0);
        for _ in 0..10_000_000 {
            let f2 = second_derivative(self.n, self.k, t, y[0], y[1]);
            if !(y[1] > 0.0) || !f2.is_finite() {
                return Err(degenerate(self.n, t));
            }
            if y[1] > BLOWUP {
                return Ok(t + y[1] / f2);
            }
            let h = self.dt(opts, t, y);
            y = self.step(t, y, h);
            t += h;
        }
        Err(Error::Resolution("blow-up not reached".into()))
    }

    /// Grid from 0 to [`GRID_END`], stopping exactly at 1 − 1e-2 on the way.
    fn grid(&self, f0: f64, opts: &ShootOptions) -> Result<Grid> {
        let big_f0 = (self.k * f0 / self.n as f64).exp();
        let mut grid = Grid { t: vec![0.0], phi: vec![f0], dphi: vec![big_f0] };
        let (mut t, mut y) = self.start(f0);
        grid.t.push(t);
        grid.phi.push(y[0]);
        grid.dphi.push(y[1]);
        let stops = [LIMIT_T1, GRID_END];
        for &stop in &stops {
            while t < stop {
                let h = self.dt(opts, t, y).min(stop - t);
                y = self.step(t, y, h);
                t = if stop - (t + h) < 1e-15 { stop } else { t + h };
                if !(y[1] > 0.0 && y[0].is_finite() && y[1] < BLOWUP) {
                    return Err(Error::Resolution(format!("solution degenerates at t = {t}")));
                }
                grid.t.push(t);
                grid.phi.push(y[0]);
                grid.dphi.push(y[1]);
            }
        }
        Ok(grid)
    }
}

impl RadialPotential {
    /// −A log(1 − t) + (n/K) log A with A = (n+1)/K.
    pub fn ball_closed_form(n: usize, ricci: f64) -> Result<Self> {
        check_params(n, ricci)?;
        let a = (n + 1) as f64 / ricci;
        Ok(RadialPotential { n, ricci, profile: Profile::Ball { a, shift: n as f64 / ricci * a.ln() } })
    }

    /// −A log(1 − t) + shift for an arbitrary A > 0 (Einstein only for A = (n+1)/K
    /// and the matching shift).
    pub fn log_profile(n: usize, ricci: f64, a: f64, shift: f64) -> Result<Self> {
        check_params(n, ricci)?;
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!("coefficient must be positive, got {a}")));
        }
        Ok(RadialPotential { n, ricci, profile: Profile::Ball { a, shift } })
    }

    pub fn constant(n: usize, ricci: f64, c: f64) -> Result<Self> {
        check_params(n, ricci)?;
        Ok(RadialPotential { n, ricci, profile: Profile::Constant(c) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ricci_constant(&self) -> f64 {
        self.ricci
    }

    /// Largest t at which the potential is available.
    pub fn grid_end(&self) -> f64 {
        match &self.profile {
            Profile::Numerical(g) => *g.t.last().expect("non-empty grid"),
            _ => 1.0,
        }
    }

    /// Grid nodes of a numerical solution.
    pub fn grid(&self) -> Option<&[f64]> {
        match &self.profile {
            Profile::Numerical(g) => Some(&g.t),
            _ => None,
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let end = self.grid_end();
        let inside = match &self.profile {
            Profile::Numerical(_) => (0.0..=end).contains(&t),
            _ => (0.0..end).contains(&t),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::Resolution(format!("t = {t} is outside [0, {end})")))
        }
    }

    /// Index of the node whose expansion covers t (the largest node < t, or 0).
    fn node_below(grid: &Grid, t: f64) -> usize {
        grid.t.partition_point(|&s| s < t).saturating_sub(1)
    }

    fn node_taylor(&self, grid: &Grid, i: usize) -> Vec<f64> {
        if grid.t[i] == 0.0 {
            taylor_at_origin(self.n, self.ricci, grid.phi[i], TAYLOR_TERMS)
        } else {
            taylor_at(self.n, self.ricci, grid.t[i], grid.phi[i], grid.dphi[i], TAYLOR_TERMS)
        }
    }

    /// Φ, Φ′, Φ″ at t.
    pub fn derivatives(&self, t: f64) -> Result<[f64; 3]> {
        self.check_t(t)?;
        Ok(match &self.profile {
            Profile::Ball { a, shift } => [-a * (1.0 - t).ln() + shift, a / (1.0 - t), a / (1.0 - t).powi(2)],
            Profile::Constant(c) => [*c, 0.0, 0.0],
            Profile::Numerical(grid) => {
                let i = Self::node_below(grid, t);
                eval_poly(&self.node_taylor(grid, i), t - grid.t[i])
            }
        })
    }

    /// Taylor coefficients Φ_k (Φ = Σ Φ_k (s − t)^k) at t, k ≤ degree.
    pub fn taylor(&self, t: f64, degree: usize) -> Result<Vec<f64>> {
        self.check_t(t)?;
        Ok(match &self.profile {
            Profile::Ball { a, shift } => {
                let mut c = vec![-a * (1.0 - t).ln() + shift];
                c.extend((1..=degree).map(|k| a / (k as f64 * (1.0 - t).powi(k as i32))));
                c
            }
            Profile::Constant(c0) => {
                let mut c = vec![0.0; degree + 1];
                c[0] = *c0;
                c
            }
            Profile::Numerical(grid) => {
                if t == 0.0 {
                    let mut c = taylor_at_origin(self.n, self.ricci, grid.phi[0], degree.max(1));
                    c.truncate(degree + 1);
                    c
                } else {
                    let [phi, dphi, _] = self.derivatives(t)?;
                    let mut c = taylor_at(self.n, self.ricci, t, phi, dphi, degree.max(1));
                    c.truncate(degree + 1);
                    c
                }
            }
        })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.derivatives(t)?[0])
    }

    /// Φ, Φ′ and an independent Φ″: at a grid node of a numerical solution the
    /// stored Φ, Φ′ are paired with Φ″ from the expansion about the previous node.
    fn residual_inputs(&self, t: f64) -> Result<[f64; 3]> {
        if let Profile::Numerical(grid) = &self.profile {
            let i = grid.t.partition_point(|&s| s < t);
            if i > 0 && i < grid.t.len() && grid.t[i] == t {
                let prev = eval_poly(&self.node_taylor(grid, i - 1), t - grid.t[i - 1]);
                return Ok([grid.phi[i], grid.dphi[i], prev[2]]);
            }
        }
        self.derivatives(t)
    }

    /// (n − 1) log Φ′ + log(Φ′ + tΦ″) − KΦ.
    pub fn ode_residual(&self, t: f64) -> Result<f64> {
        let [phi, d1, d2] = self.residual_inputs(t)?;
        let mixed = d1 + t * d2;
        if !(d1 > 0.0 && mixed > 0.0) {
            return Err(degenerate(self.n, t));
        }
        Ok((self.n as f64 - 1.0) * d1.ln() + mixed.ln() - self.ricci * phi)
    }

    /// ‖∂φ‖² = tΦ′²/(Φ′ + tΦ″).
    pub fn gradient_length(&self, t: f64) -> Result<f64> {
        let [_, d1, d2] = self.derivatives(t)?;
        let mixed = d1 + t * d2;
        if !(d1 > 0.0 && mixed > 0.0) {
            return Err(degenerate(self.n, t));
        }
        Ok(t * d1 * d1 / mixed)
    }

    /// Extrapolated lim_{t→1} ‖∂φ‖² from t = 1 − 1e-2 and 1 − 1e-3, and its
    /// deviation from (n+1)/K.
    pub fn boundary_limit(&self) -> Result<(f64, f64)> {
        if let Profile::Numerical(grid) = &self.profile {
            let end = self.grid_end();
            let last_decade = grid.t.iter().filter(|&&s| s >= LIMIT_T1).count();
            if end < LIMIT_T2 || last_decade < 10 {
                return Err(Error::Resolution(format!(
                    "grid ends at {end} with {last_decade} nodes in the last decade"
                )));
            }
        }
        let l1 = self.gradient_length(LIMIT_T1)?;
        let l2 = self.gradient_length(LIMIT_T2)?;
        let limit = l2 + (l2 - l1) / 9.0;
        Ok((limit, limit - (self.n + 1) as f64 / self.ricci))
    }

    /// CSV rows `t, phi, dphi, gradient_length` over the grid (or `samples` uniform points).
    pub fn to_csv(&self, samples: usize) -> Result<String> {
        let ts: Vec<f64> = match self.grid() {
            Some(g) => g.to_vec(),
            None => (0..samples).map(|i| GRID_END * i as f64 / (samples.max(2) - 1) as f64).collect(),
        };
        let mut out = String::from("t,phi,dphi,gradient_length\n");
        for t in ts {
            let [phi, d1, _] = self.derivatives(t)?;
            out.push_str(&format!("{t},{phi},{d1},{}\n", self.gradient_length(t)?));
        }
        Ok(out)
    }

    /// φ(z) = Φ(‖z‖²) on Ball(n).
    pub fn to_potential_field(&self) -> Result<PotentialField> {
        let d = DomainModel::ball(self.n)?;
        PotentialField::new(d, Arc::new(RadialFormula { rp: self.clone() }), self.ricci, format!("radial[{}]", self.n))
    }
}

#[derive(Debug)]
struct RadialFormula {
    rp: RadialPotential,
}

impl Formula for RadialFormula {
    fn dim(&self) -> usize {
        self.rp.n
    }

    fn analytic_order(&self) -> usize {
        MAX_ORDER
    }

    fn expand(&self, vars: &Vars) -> Result<Series> {
        let u = vars.norm_sq();
        let c = self.rp.taylor(u.value().re, vars.degree())?;
        let coeffs: Vec<Complex64> = c.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        Ok(u.compose(&coeffs))
    }
}

/// Residual of the radial Einstein equation at t.
pub fn radial_ode_residual(rp: &RadialPotential, t: f64) -> Result<f64> {
    rp.ode_residual(t)
}

pub fn radial_gradient_length(rp: &RadialPotential, t: f64) -> Result<f64> {
    rp.gradient_length(t)
}

pub fn boundary_limit_estimate(rp: &RadialPotential) -> Result<(f64, f64)> {
    rp.boundary_limit()
}

/// Bisection on Φ(0) so that the blow-up point approaches t = 1 within `tol`.
pub fn shoot(n: usize, ricci: f64, bracket: (f64, f64), tol: f64) -> Result<RadialPotential> {
    shoot_with(n, ricci, bracket, tol, &ShootOptions::default()).map(|(rp, _)| rp)
}

pub fn shoot_with(
    n: usize,
    ricci: f64,
    bracket: (f64, f64),
    tol: f64,
    opts: &ShootOptions,
) -> Result<(RadialPotential, ShootReport)> {
    check_params(n, ricci)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let integ = Integrator { n, k: ricci };
    let mut trials = Vec::new();
    let t_lo = integ.blowup(lo, opts)?;
    let t_hi = integ.blowup(hi, opts)?;
    trials.push((lo, t_lo));
    trials.push((hi, t_hi));
    if !(t_lo > 1.0 && t_hi < 1.0) {
        return Err(Error::Bracketing { lo, hi, t_lo, t_hi });
    }
    let mut best = (lo, t_lo);
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iterations {
            return Err(Error::Resolution(format!("bisection did not reach tolerance {tol}")));
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let t_mid = integ.blowup(mid, opts)?;
        trials.push((mid, t_mid));
        if (t_mid - 1.0).abs() < (best.1 - 1.0).abs() {
            best = (mid, t_mid);
        }
        if (t_mid - 1.0).abs() <= tol || hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if t_mid > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    trials.sort_by(|a, b| a.0.total_cmp(&b.0));
    if trials.windows(2).any(|w| w[1].0 > w[0].0 && !(w[1].1 < w[0].1)) {
        return Err(Error::Precondition("blow-up point is not monotone in the initial value".into()));
    }
    if (best.1 - 1.0).abs() > tol {
        return Err(Error::Resolution(format!("blow-up point {} misses 1 by more than {tol}", best.1)));
    }
    let grid = integ.grid(best.0, opts)?;
    let rp = RadialPotential { n, ricci, profile: Profile::Numerical(grid) };
    Ok((rp, ShootReport { phi0: best.0, blowup: best.1, iterations, trials }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_satisfies_the_ode() {
        for (n, k) in [(1, 1.0), (2, 3.0), (3, 4.0), (2, 1.0)] {
            let rp = RadialPotential::ball_closed_form(n, k).unwrap();
            for t in [0.0, 0.1, 0.5, 0.9, 0.999] {
                assert!(rp.ode_residual(t).unwrap().abs() < 1e-12);
            }
        }
        let disk = RadialPotential::log_profile(1, 2.0, 1.0, 0.0).unwrap();
        assert!(disk.ode_residual(0.37).unwrap().abs() < 1e-14);
        let flat = RadialPotential::constant(2, 1.0, 0.5).unwrap();
        assert!(matches!(flat.ode_residual(0.3), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn series_at_origin_matches_closed_form() {
        let (n, k) = (2, 3.0);
        let c = taylor_at_origin(n, k, 0.0, 8);
        // −log(1 − t) = Σ t^k / k
        for (i, ci) in c.iter().enumerate().skip(1) {
            assert!((ci - 1.0 / i as f64).abs() < 1e-13, "{i}: {ci}");
        }
        let a = 2.0;
        let c = taylor_at(1, 1.0, 0.4, -a * 0.6f64.ln() + a.ln(), a / 0.6, 6);
        for (i, ci) in c.iter().enumerate().skip(1) {
            let want = a / (i as f64 * 0.6f64.powi(i as i32));
            assert!((ci - want).abs() < 1e-10 * want, "{i}: {ci} vs {want}");
        }
    }

    #[test]
    fn gradient_length_examples() {
        let rp = RadialPotential::ball_closed_form(2, 3.0).unwrap();
        assert!((rp.gradient_length(0.81).unwrap() - 0.81).abs() < 1e-14);
        assert_eq!(rp.gradient_length(0.0).unwrap(), 0.0);
        let (limit, dev) = rp.boundary_limit().unwrap();
        assert!((limit - 1.0).abs() < 1e-12 && dev.abs() < 1e-12);
    }

    #[test]
    fn shooting_recovers_the_ball() {
        let rp = shoot(2, 3.0, (-4.0, 4.0), 1e-10).unwrap();
        assert!(rp.value(0.0).unwrap().abs() < 1e-6);
        let exact = RadialPotential::ball_closed_form(2, 3.0).unwrap();
        for &t in rp.grid().unwrap() {
            assert!((rp.value(t).unwrap() - exact.value(t).unwrap()).abs() < 1e-5, "t = {t}");
        }
        let (limit, _) = rp.boundary_limit().unwrap();
        assert!((limit - 1.0).abs() < 0.02);
    }

    #[test]
    fn shooting_rejects_bad_input() {
        assert!(matches!(shoot(2, 3.0, (-4.0, 4.0), 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(shoot(2, 3.0, (1.0, 2.0), 1e-8), Err(Error::Bracketing { .. })));
    }
}
