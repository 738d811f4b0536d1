//! Period integrals of the curve `w⁴ = ∏(z − x_j)` on the `(−1)`-eigenspace of `ρ²`.
//!
//! The differentials are `η_k = z^k dz/w³` for `k = 0..4` (eigenvalue `i` under `ρ*`)
//! and `η₅ = dz/w` (eigenvalue `−i`). The basic integrals are over the real
//! intervals `α_j = [x_j, x_{j+1}]` on the sheet where `w > 0` left of `x₁`,
//! approached from the upper half-plane; `α₈` runs from `x₈` through `∞` to `x₁`.
//! Then `∫_{A_j} η = 2∫_{α_j} η` and `∫_{B_j} η = λ_k ∫_{A_j} η`.
//!
//! The determination of `w` on each interval is found by continuing `w` along
//! the real axis with small upper half-circles around the branch points, picking
//! at every step the fourth root closest to the previous value.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};
use nalgebra::{Matrix6, SMatrix};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BranchConfig, Tolerances};
use crate::exact::QMat;
use crate::lattice::{self, BasisLabel, SymplecticBasis};
use crate::Error;

pub type CMat6 = Matrix6<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Eigenvalue of `ρ*` on `η_k`.
pub fn lambda(k: usize) -> Complex64 {
    if k < 5 {
        I
    } else {
        -I
    }
}

/// Power of `|∏(z − x_m)|` in `|η_k|`.
fn abs_exponent(k: usize) -> f64 {
    if k < 5 {
        -0.75
    } else {
        -0.25
    }
}

/// Power of the branch phase of `w` in `η_k`.
fn phase_power(k: usize) -> i32 {
    if k < 5 {
        -3
    } else {
        -1
    }
}

fn monomial(z: f64, k: usize) -> f64 {
    if k < 5 {
        z.powi(k as i32)
    } else {
        1.0
    }
}

type Rule = Arc<Vec<(f64, f64)>>;

/// Node/weight pairs keyed by (nodes, α in quarters, β in quarters).
static RULES: Lazy<Mutex<HashMap<(usize, i32, i32), Rule>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn jacobi_rule(n: usize, alpha_q: i32, beta_q: i32) -> Rule {
    let key = (n, alpha_q, beta_q);
    if let Some(r) = RULES.lock().unwrap().get(&key) {
        return r.clone();
    }
    let deg = NonZeroUsize::new(n).expect("positive node count");
    let pairs: Vec<(f64, f64)> = if alpha_q == 0 && beta_q == 0 {
        GaussLegendre::new(deg).as_node_weight_pairs().to_vec()
    } else {
        let a = FiniteAboveNegOneF64::new(alpha_q as f64 / 4.0).expect("exponent above −1");
        let b = FiniteAboveNegOneF64::new(beta_q as f64 / 4.0).expect("exponent above −1");
        GaussJacobi::new(deg, a, b).as_node_weight_pairs().to_vec()
    };
    let rule = Arc::new(pairs);
    RULES.lock().unwrap().insert(key, rule.clone());
    rule
}

fn quarters(e: f64) -> i32 {
    (e * 4.0).round() as i32
}

/// Result of continuing `w` along the real axis.
#[derive(Clone, Debug, Serialize)]
pub struct BranchTrack {
    /// Unit phase of `w` on `(−∞,x₁)`, `(x₁,x₂)`, …, `(x₈,∞)`.
    pub phases: [Complex64; 9],
    /// `|w_end/w_start − 1|` after returning to the start over a large upper half-circle.
    pub closure_error: f64,
}

fn poly(x: &[f64; 8], z: Complex64) -> Complex64 {
    x.iter().fold(Complex64::new(1.0, 0.0), |acc, &xm| acc * (z - xm))
}

fn nearest_fourth_root(p: Complex64, prev: Complex64) -> Complex64 {
    let r0 = p.powf(0.25);
    let mut best = r0;
    let mut d = (r0 - prev).norm();
    let mut r = r0;
    for _ in 0..3 {
        r *= I;
        let dd = (r - prev).norm();
        if dd < d {
            d = dd;
            best = r;
        }
    }
    best
}

pub fn track_branch(cfg: &BranchConfig) -> BranchTrack {
    let x = cfg.points();
    let min_gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let rad = min_gap / 4.0;
    let steps = 64;
    let start = Complex64::new(x[0] - 1.0, 0.0);
    let w0 = Complex64::new(poly(x, start).norm().powf(0.25), 0.0);
    let mut w = w0;
    let mut phases = [Complex64::new(0.0, 0.0); 9];
    phases[0] = w0 / w0.norm();

    let walk = |path: &mut dyn Iterator<Item = Complex64>, w: &mut Complex64| {
        let mut last = Complex64::new(0.0, 0.0);
        for zz in path {
            *w = nearest_fourth_root(poly(x, zz), *w);
            last = zz;
        }
        last
    };
    let segment = |a: f64, b: f64| (1..=steps).map(move |s| Complex64::new(a + (b - a) * s as f64 / steps as f64, 0.0));
    let half_circle = |c: f64, r: f64| {
        (1..=steps).map(move |s| {
            let th = std::f64::consts::PI * (1.0 - s as f64 / steps as f64);
            Complex64::new(c, 0.0) + Complex64::from_polar(r, th)
        })
    };

    let mut pos = x[0] - 1.0;
    for j in 0..8 {
        walk(&mut segment(pos, x[j] - rad), &mut w);
        walk(&mut half_circle(x[j], rad), &mut w);
        pos = x[j] + rad;
        let next = if j < 7 { x[j + 1] - rad } else { x[7] + 1.0 };
        let mid = if j < 7 { 0.5 * (x[j] + x[j + 1]) } else { x[7] + 0.5 };
        walk(&mut segment(pos, mid), &mut w);
        phases[j + 1] = w / w.norm();
        pos = mid;
        if j == 7 {
            walk(&mut segment(pos, next), &mut w);
            pos = next;
        }
    }
    // back to the start over a large half-circle in the upper half-plane
    let centre = 0.5 * (x[0] + x[7]);
    let big = (x[7] - x[0]) + 2.0;
    walk(&mut segment(pos, centre + big), &mut w);
    let arc = (1..=8 * steps).map(|s| {
        let th = std::f64::consts::PI * s as f64 / (8 * steps) as f64;
        Complex64::new(centre, 0.0) + Complex64::from_polar(big, th)
    });
    walk(&mut arc.into_iter(), &mut w);
    let z = walk(&mut segment(centre - big, x[0] - 1.0), &mut w);
    debug_assert!((z - start).norm() < 1e-12);
    BranchTrack { phases, closure_error: (w / w0 - 1.0).norm() }
}

/// Integral of `η_k` over `α_j`, `j = 1..7`, with `n` Jacobi nodes.
fn interval_integral(x: &[f64; 8], phase: Complex64, j: usize, k: usize, n: usize) -> Complex64 {
    let e = abs_exponent(k);
    let (a, b) = (x[j - 1], x[j]);
    let h2 = 0.5 * (b - a);
    let rule = jacobi_rule(n, quarters(e), quarters(e));
    let mut s = 0.0;
    for &(t, wt) in rule.iter() {
        let z = a + h2 * (1.0 + t);
        let mut g = monomial(z, k);
        for (m, &xm) in x.iter().enumerate() {
            if m != j - 1 && m != j {
                g *= (z - xm).abs().powf(e);
            }
        }
        s += wt * g;
    }
    phase.powi(phase_power(k)) * h2.powf(1.0 + 2.0 * e) * s
}

/// Shift used by the `u = 1/(z − c)` substitution for `α₈`; it sits between `x₄` and `x₅`.
fn infinity_shift(x: &[f64; 8]) -> f64 {
    0.5 * (x[3] + x[4])
}

/// `∫_{α₈} η_k` after `u = 1/(z − c)`: a single Jacobi integral over `[u₁, u₈]`.
fn infinity_integral_u(x: &[f64; 8], phase: Complex64, k: usize, n: usize) -> Complex64 {
    let e = abs_exponent(k);
    let c = infinity_shift(x);
    let u1 = 1.0 / (x[0] - c);
    let u8 = 1.0 / (x[7] - c);
    let hh = 0.5 * (u8 - u1);
    let rule = jacobi_rule(n, quarters(e), quarters(e));
    let mut s = 0.0;
    for &(t, wt) in rule.iter() {
        let u = u1 + hh * (1.0 + t);
        let mut g = if k < 5 { (c * u + 1.0).powi(k as i32) * u.powi(4 - k as i32) } else { 1.0 };
        for &xm in &x[1..7] {
            g *= (1.0 + (c - xm) * u).powf(e);
        }
        s += wt * g;
    }
    let ends = ((c - x[0]) * (x[7] - c)).powf(e);
    phase.powi(phase_power(k)) * ends * hh.powf(1.0 + 2.0 * e) * s
}

/// `∫_{α₈} η_k` on the two rays directly: a Jacobi piece next to the branch point
/// and a Legendre piece in `s = ±1/(z − x)` for the far part of each ray.
fn infinity_integral_rays(x: &[f64; 8], phase_left: Complex64, phase_right: Complex64, k: usize, n: usize) -> Complex64 {
    let e = abs_exponent(k);
    let len = x[7] - x[0];
    let l2 = 0.5 * len;
    let near = |anchor: usize, a: f64, alpha_q: i32, beta_q: i32| {
        let rule = jacobi_rule(n, alpha_q, beta_q);
        let mut s = 0.0;
        for &(t, wt) in rule.iter() {
            let z = a + l2 * (1.0 + t);
            let mut g = monomial(z, k);
            for (m, &xm) in x.iter().enumerate() {
                if m != anchor {
                    g *= (z - xm).abs().powf(e);
                }
            }
            s += wt * g;
        }
        l2.powf(1.0 + e) * s
    };
    // right: [x₈, x₈+L], singular at the left end
    let right_near = near(7, x[7], 0, quarters(e));
    // left: [x₁−L, x₁], singular at the right end
    let left_near = near(0, x[0] - len, quarters(e), 0);
    let leg = jacobi_rule(n, 0, 0);
    let tail = |x0: f64, sign: f64| {
        // z = x0 + sign/s, s ∈ (0, 1/L]
        let smax = 1.0 / len;
        let mut acc = 0.0;
        for &(t, wt) in leg.iter() {
            let s = 0.5 * smax * (1.0 + t);
            let mut g = if k < 5 { (x0 * s + sign).powi(k as i32) * s.powi(4 - k as i32) } else { 1.0 };
            for &xm in x.iter() {
                g *= (1.0 + sign * (x0 - xm) * s).abs().powf(e);
            }
            acc += wt * g;
        }
        0.5 * smax * acc
    };
    let right_tail = tail(x[7], 1.0);
    let left_tail = tail(x[0], -1.0);
    phase_right.powi(phase_power(k)) * (right_near + right_tail) + phase_left.powi(phase_power(k)) * (left_near + left_tail)
}

/// Periods with quadrature error estimates.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodMatrix {
    pub config: BranchConfig,
    /// `alpha[j-1][k] = ∫_{α_j} η_k`.
    pub alpha: [[Complex64; 6]; 8],
    /// Estimated absolute error of each `alpha` entry.
    pub error: [[f64; 6]; 8],
    /// `∫_{α₈} η_k` evaluated on the rays, for comparison with the `u` route.
    pub alpha8_rays: [Complex64; 6],
    pub branch: BranchTrack,
    /// Jacobi nodes used by the accepted rule (after refinement).
    pub nodes: usize,
}

fn refine<F: Fn(usize) -> Complex64>(f: F, n0: usize, tol: f64) -> Result<(Complex64, f64, usize), Error> {
    let mut n = n0;
    let mut prev = f(n);
    for _ in 0..4 {
        let next = f(2 * n);
        let err = (next - prev).norm();
        n *= 2;
        if err <= tol * next.norm().max(1.0) {
            return Ok((next, err, n));
        }
        prev = next;
    }
    Err(Error::Quadrature(format!("no convergence with {n} nodes")))
}

pub fn period_matrix(cfg: &BranchConfig, tol: &Tolerances) -> Result<PeriodMatrix, Error> {
    let x = *cfg.points();
    let branch = track_branch(cfg);
    if branch.closure_error > 1e-9 {
        return Err(Error::Periods(format!("branch of w does not close: {:.3e}", branch.closure_error)));
    }
    let ph = branch.phases;
    let jobs: Vec<(usize, usize)> = (1..=8).flat_map(|j| (0..6).map(move |k| (j, k))).collect();
    let results: Vec<Result<(Complex64, f64, usize), Error>> = jobs
        .par_iter()
        .map(|&(j, k)| {
            if j < 8 {
                refine(|n| interval_integral(&x, ph[j], j, k, n), tol.nodes, tol.quad)
            } else {
                refine(|n| infinity_integral_u(&x, ph[8], k, n), tol.nodes, tol.quad)
            }
        })
        .collect();
    let mut alpha = [[Complex64::new(0.0, 0.0); 6]; 8];
    let mut error = [[0.0; 6]; 8];
    let mut nodes = tol.nodes;
    for (&(j, k), r) in jobs.iter().zip(results) {
        let (v, e, n) = r?;
        alpha[j - 1][k] = v;
        error[j - 1][k] = e;
        nodes = nodes.max(n);
    }
    let mut alpha8_rays = [Complex64::new(0.0, 0.0); 6];
    for (k, slot) in alpha8_rays.iter_mut().enumerate() {
        *slot = infinity_integral_rays(&x, ph[0], ph[8], k, 2 * nodes);
    }
    Ok(PeriodMatrix { config: *cfg, alpha, error, alpha8_rays, branch, nodes })
}

impl PeriodMatrix {
    /// `∫_{A_j} η_k`, `j = 1..8`.
    pub fn a_period(&self, j: usize, k: usize) -> Complex64 {
        2.0 * self.alpha[j - 1][k]
    }

    /// The 6×12 matrix with rows `η₀..η₅` and columns `A₁..A₆, B₁..B₆`.
    pub fn pi(&self) -> SMatrix<Complex64, 6, 12> {
        SMatrix::from_fn(|k, c| if c < 6 { self.a_period(c + 1, k) } else { lambda(k) * self.a_period(c - 5, k) })
    }

    /// Periods over the rows of a basis: a 12×6 matrix (basis vectors × differentials).
    pub fn basis_periods(&self, basis: &QMat) -> SMatrix<Complex64, 12, 6> {
        let b = basis.to_f64();
        let pi = self.pi();
        SMatrix::from_fn(|r, k| (0..12).fold(Complex64::new(0.0, 0.0), |acc, c| acc + pi[(k, c)] * b[(r, c)]))
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
    }

    /// `max_k |Σ_{j=1}^{8} ∫_{A_j} η_k|`.
    pub fn boundary_residual(&self) -> f64 {
        (0..6)
            .map(|k| (1..=8).fold(Complex64::new(0.0, 0.0), |a, j| a + self.a_period(j, k)).norm())
            .fold(0.0, f64::max)
    }

    /// `max_k |Σ_{j=1}^{7} (Σ_{m<j} λ_k^m)·∫_{A_j} η_k|`.
    pub fn rho_chain_residual(&self) -> f64 {
        (0..6)
            .map(|k| {
                let l = lambda(k);
                let mut s = Complex64::new(0.0, 0.0);
                let mut coef = Complex64::new(0.0, 0.0);
                let mut lp = Complex64::new(1.0, 0.0);
                for j in 1..=7 {
                    coef += lp;
                    lp *= l;
                    s += coef * self.a_period(j, k);
                }
                s.norm()
            })
            .fold(0.0, f64::max)
    }

    /// `∫_{A₇}` as integrated against its expression in the basis.
    pub fn root7_residual(&self) -> f64 {
        let r7 = lattice::root(7);
        let pi = self.pi();
        (0..6)
            .map(|k| {
                let comb = (0..12).fold(Complex64::new(0.0, 0.0), |a, c| a + pi[(k, c)] * r7.coords[c] as f64);
                (comb - self.a_period(7, k)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |α₈ by u-substitution − α₈ on the rays|`.
    pub fn alpha8_route_gap(&self) -> f64 {
        (0..6).map(|k| (self.alpha[7][k] - self.alpha8_rays[k]).norm()).fold(0.0, f64::max)
    }
}

/// Normalized period matrix `τ = Π_a·Π_b⁻¹` of a principal basis.
#[derive(Clone, Debug, Serialize)]
pub struct NormalizedTau {
    #[serde(serialize_with = "ser_cmat6")]
    pub tau: CMat6,
    pub basis_label: BasisLabel,
    /// `‖τ − τᵗ‖/‖τ‖`.
    pub symmetry_residual: f64,
    pub min_im_eigenvalue: f64,
}

fn ser_cmat6<S: serde::Serializer>(m: &CMat6, s: S) -> Result<S::Ok, S::Error> {
    cmat6_rows(m).serialize(s)
}

pub fn cmat6_rows(m: &CMat6) -> Vec<Vec<[f64; 2]>> {
    (0..6).map(|i| (0..6).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Symmetry tolerance for accepting a normalized `τ`.
pub const TAU_SYMMETRY_GATE: f64 = 1e-6;

impl NormalizedTau {
    pub fn from_tau(tau: CMat6, basis_label: BasisLabel) -> Result<Self, Error> {
        let symmetry_residual = (tau - tau.transpose()).norm() / tau.norm();
        let y = tau.map(|z| z.im);
        let y = 0.5 * (y + y.transpose());
        let min_im_eigenvalue = y.symmetric_eigenvalues().min();
        if !(symmetry_residual < TAU_SYMMETRY_GATE) {
            return Err(Error::Periods(format!("τ is not symmetric: {symmetry_residual:.3e}")));
        }
        if !(min_im_eigenvalue > 0.0) {
            return Err(Error::Periods(format!("Im τ is not positive definite: {min_im_eigenvalue:.3e}")));
        }
        Ok(Self { tau: (tau + tau.transpose()).map(|z| z * 0.5), basis_label, symmetry_residual, min_im_eigenvalue })
    }

    /// `‖(τU)² + I‖` (Frobenius).
    pub fn rho_residual(&self) -> f64 {
        let u = u_f64();
        let tu = self.tau * u;
        (tu * tu + CMat6::identity()).norm()
    }

    pub fn imag(&self) -> Matrix6<f64> {
        let y = self.tau.map(|z| z.im);
        0.5 * (y + y.transpose())
    }
}

pub fn u_f64() -> CMat6 {
    CMat6::from_fn(|i, j| Complex64::new(lattice::U_MAT[i][j] as f64, 0.0))
}

/// `τ` of a principal basis, from the periods over its rows.
pub fn normalized_tau(pm: &PeriodMatrix, basis: &SymplecticBasis) -> Result<NormalizedTau, Error> {
    if basis.gram() != lattice::principal_gram() {
        return Err(Error::Periods("basis is not principal".into()));
    }
    let p = pm.basis_periods(&basis.vectors);
    let pa: CMat6 = p.fixed_rows::<6>(0).into_owned();
    let pb: CMat6 = p.fixed_rows::<6>(6).into_owned();
    let pbi = pb.try_inverse().ok_or_else(|| Error::Periods("b-period matrix is singular".into()))?;
    NormalizedTau::from_tau(pa * pbi, basis.label)
}

/// Blocks of a 12×12 rational matrix as complex 6×6 matrices.
pub fn blocks_f64(sigma: &QMat) -> [CMat6; 4] {
    let m = sigma.to_f64();
    let blk = |r0: usize, c0: usize| CMat6::from_fn(|i, j| Complex64::new(m[(r0 + i, c0 + j)], 0.0));
    [blk(0, 0), blk(0, 6), blk(6, 0), blk(6, 6)]
}

/// `(Aτ + B)(Cτ + D)⁻¹` and `Cτ + D`.
pub fn fractional_linear(sigma: &QMat, tau: &CMat6) -> Result<(CMat6, CMat6), Error> {
    let [a, b, c, d] = blocks_f64(sigma);
    let den = c * tau + d;
    let inv = den.try_inverse().ok_or_else(|| Error::Periods("Cτ + D is singular".into()))?;
    Ok(((a * tau + b) * inv, den))
}

/// `det(Cτ + D)` for `σ = (0 U; −U I)`.
pub fn shift_determinant(tau: &CMat6) -> Complex64 {
    let u = u_f64();
    (CMat6::identity() - u * tau).determinant()
}

/// A-periods of `dz/w` and their hermitian norm `f·H⁻¹·f*`.
#[derive(Clone, Debug, Serialize)]
pub struct BallPoint {
    pub f: [Complex64; 6],
    pub norm: f64,
}

pub fn ball_point(pm: &PeriodMatrix) -> Result<BallPoint, Error> {
    let f: [Complex64; 6] = std::array::from_fn(|j| pm.a_period(j + 1, 5));
    let h = lattice::hermitian_gram();
    let hm = CMat6::from_fn(|i, j| h[(i, j)]);
    let hi = hm.try_inverse().ok_or_else(|| Error::Periods("hermitian Gram is singular".into()))?;
    let mut n = Complex64::new(0.0, 0.0);
    for i in 0..6 {
        for j in 0..6 {
            n += f[i] * hi[(i, j)] * f[j].conj();
        }
    }
    let bp = BallPoint { f, norm: n.re };
    if !(bp.norm < 0.0) {
        return Err(Error::Periods(format!("ball norm is not negative: {:.6e}", bp.norm)));
    }
    Ok(bp)
}

/// `τ₁ = τ(Σ₁)` for a configuration.
pub fn tau1(pm: &PeriodMatrix) -> Result<NormalizedTau, Error> {
    normalized_tau(pm, lattice::sigma1())
}

/// Period matrix as labelled real/imaginary pairs.
#[derive(Serialize)]
pub struct PeriodExport {
    pub rows: Vec<&'static str>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<[f64; 2]>>,
    pub alpha_error: Vec<Vec<f64>>,
}

pub fn export(pm: &PeriodMatrix) -> PeriodExport {
    let pi = pm.pi();
    PeriodExport {
        rows: vec!["dz/w^3", "z dz/w^3", "z^2 dz/w^3", "z^3 dz/w^3", "z^4 dz/w^3", "dz/w"],
        columns: (1..=6).map(|j| format!("A{j}")).chain((1..=6).map(|j| format!("B{j}"))).collect(),
        values: (0..6).map(|k| (0..12).map(|c| [pi[(k, c)].re, pi[(k, c)].im]).collect()).collect(),
        alpha_error: pm.error.iter().map(|r| r.to_vec()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> PeriodMatrix {
        period_matrix(&BranchConfig::standard(), &Tolerances::default()).unwrap()
    }

    #[test]
    fn branch_phases_match_closed_form() {
        let t = track_branch(&BranchConfig::standard());
        assert!(t.closure_error < 1e-12);
        for j in 0..9 {
            let expect = Complex64::from_polar(1.0, -std::f64::consts::PI * (j % 8) as f64 / 4.0);
            assert!((t.phases[j] - expect).norm() < 1e-12, "interval {j}");
        }
    }

    #[test]
    fn jacobi_rule_integrates_weight() {
        // ∫(1−t)^{-3/4}(1+t)^{-3/4} dt = 2^{-1/2} B(1/4,1/4)
        let r = jacobi_rule(16, -3, -3);
        let s: f64 = r.iter().map(|p| p.1).sum();
        assert!((s - 5.244115108584239).abs() < 1e-12, "{s}");
    }

    #[test]
    fn interval_phase_pattern() {
        let pm = standard();
        for j in 1..=7 {
            for k in 0..6 {
                let expect = Complex64::from_polar(1.0, -std::f64::consts::PI * (j as f64) / 4.0).powi(phase_power(k));
                let v = pm.alpha[j - 1][k];
                let along = v / expect;
                assert!(along.im.abs() < 1e-12 * v.norm().max(1.0));
            }
        }
    }

    #[test]
    fn period_relations_at_standard_config() {
        let pm = standard();
        assert!(pm.boundary_residual() < 1e-8);
        assert!(pm.rho_chain_residual() < 1e-8);
        assert!(pm.root7_residual() < 1e-8);
        assert!(pm.alpha8_route_gap() < 1e-8);
        assert!(pm.max_error() < 1e-10);
    }

    #[test]
    fn tau1_is_a_good_period_matrix() {
        let pm = standard();
        let t = tau1(&pm).unwrap();
        assert!(t.symmetry_residual < 1e-8);
        assert!(t.min_im_eigenvalue > 0.0);
        assert!(t.rho_residual() < 1e-7);
        let d = shift_determinant(&t.tau);
        assert!((d + 8.0).norm() < 8e-6, "{d}");
    }

    #[test]
    fn ball_norm_is_negative() {
        let bp = ball_point(&standard()).unwrap();
        assert!(bp.norm < 0.0);
    }
}
