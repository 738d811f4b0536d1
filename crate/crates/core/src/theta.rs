//! Genus-6 Riemann theta functions with rational characteristics.
//!
//! `θ_m(τ, z) = Σ_{ξ∈ℤ⁶} e(½(ξ+m′)τ(ξ+m′)ᵗ + (z+m″)(ξ+m′)ᵗ)`, `e(x) = exp(2πix)`.
//!
//! The sum is truncated to the ellipsoid `π(ξ−c)Y(ξ−c)ᵗ < R²` around
//! `c = −Y⁻¹·Im z − m′`, enumerated Fincke–Pohst style on the Cholesky factor of
//! `Y = Im τ`. The radius comes from the Deconinck–Heil–Bobenko–van Hoeij–Schmies
//! tail estimate `(g/2)(2/ρ)^g Γ(g/2, (R−ρ/2)²)` with `ρ² = π·λ₁`, `λ₁` the
//! minimum of `nYnᵗ` over nonzero integer `n`. The part of each phase coming from
//! the characteristic is a rational number and is reduced mod 1 exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::exact::{frac, q, q_to_f64, qf, QMat, Q};
use crate::lattice::{self, U0};
use crate::periods::{blocks_f64, u_f64, CMat6};
use crate::Error;

const G: usize = 6;

/// `e(x)` for an exact rational `x`.
pub fn e_q(x: &Q) -> Complex64 {
    let f = q_to_f64(&frac(x));
    Complex64::from_polar(1.0, 2.0 * PI * f)
}

/// `e(x)` for a real or complex `x`.
pub fn e_c(x: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * x).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Bound on the neglected part of the series (absolute).
    pub tail_bound: f64,
    pub terms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaOptions {
    /// Target for the tail bound, relative to `exp(π·y·Y⁻¹·yᵗ)`.
    pub tol: f64,
    pub compensated: bool,
    pub max_points: usize,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self { tol: 1e-12, compensated: false, max_points: 20_000_000 }
    }
}

impl ThetaOptions {
    pub fn from_tolerances(t: &crate::Tolerances) -> Self {
        Self { tol: t.effective_theta(), compensated: t.compensated(), ..Self::default() }
    }
}

/// Per-`τ` data shared by all evaluations.
#[derive(Clone, Debug)]
pub struct ThetaKernel {
    pub tau: CMat6,
    x: Matrix6<f64>,
    y: Matrix6<f64>,
    yinv: Matrix6<f64>,
    /// Upper triangular with `Y = TᵗT`.
    t: Matrix6<f64>,
    /// Shortest nonzero value of `nYnᵗ`.
    pub lambda1: f64,
}

/// Integer points `n` with `(n−c)Y(n−c)ᵗ ≤ bound`, for upper-triangular `T`, `Y = TᵗT`.
pub fn ellipsoid_points(t: &Matrix6<f64>, c: &[f64; G], bound: f64, max_points: usize) -> Result<Vec<[i32; G]>, Error> {
    let mut out = Vec::new();
    let mut x = [0i32; G];
    fn rec(
        i: usize,
        rem: f64,
        t: &Matrix6<f64>,
        c: &[f64; G],
        x: &mut [i32; G],
        out: &mut Vec<[i32; G]>,
        max_points: usize,
    ) -> Result<(), Error> {
        let mut s = 0.0;
        for j in i + 1..G {
            s += t[(i, j)] * (x[j] as f64 - c[j]);
        }
        let tii = t[(i, i)];
        let r = rem.max(0.0).sqrt() / tii;
        let ctr = c[i] - s / tii;
        let lo = (ctr - r).ceil() as i64;
        let hi = (ctr + r).floor() as i64;
        for k in lo..=hi {
            x[i] = k as i32;
            let v = tii * (k as f64 - c[i]) + s;
            let nrem = rem - v * v;
            if nrem < 0.0 {
                continue;
            }
            if i == 0 {
                out.push(*x);
                if out.len() > max_points {
                    return Err(Error::Theta(format!("enumeration exceeds {max_points} points")));
                }
            } else {
                rec(i - 1, nrem, t, c, x, out, max_points)?;
            }
        }
        Ok(())
    }
    rec(G - 1, bound, t, c, &mut x, &mut out, max_points)?;
    Ok(out)
}

/// `Γ(3, x) = 2e^{−x}(1 + x + x²/2)`.
fn upper_gamma_3(x: f64) -> f64 {
    2.0 * (-x).exp() * (1.0 + x + 0.5 * x * x)
}

/// Tail estimate for radius `r` in the `π·Y` metric.
pub fn tail_estimate(r: f64, rho: f64) -> f64 {
    let g = G as f64;
    let a = (r - 0.5 * rho).max(0.0);
    0.5 * g * (2.0 / rho).powi(G as i32) * upper_gamma_3(a * a)
}

/// Smallest admissible radius whose tail estimate is below `tol`.
pub fn radius_for(tol: f64, rho: f64) -> f64 {
    let r_min = 0.5 * ((G as f64).sqrt() + rho);
    let mut lo = r_min;
    if tail_estimate(lo, rho) <= tol {
        return lo;
    }
    let mut hi = lo + 1.0;
    while tail_estimate(hi, rho) > tol {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail_estimate(mid, rho) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }
    fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Common-denominator numerators of a rational vector.
fn common_denominator(v: &[Q]) -> (Vec<i64>, i64) {
    let den = v.iter().fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let nums = v.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer().to_i64().expect("small numerator")).collect();
    (nums, den.to_i64().expect("small denominator"))
}

impl ThetaKernel {
    pub fn new(tau: &CMat6) -> Result<Self, Error> {
        let x = tau.map(|z| z.re);
        let y = tau.map(|z| z.im);
        let y = 0.5 * (y + y.transpose());
        let chol = y.cholesky().ok_or_else(|| Error::Theta("Im τ is not positive definite".into()))?;
        let t = chol.l().transpose();
        let yinv = chol.inverse();
        let r0 = (0..G).map(|i| y[(i, i)]).fold(f64::INFINITY, f64::min);
        let pts = ellipsoid_points(&t, &[0.0; G], r0 * (1.0 + 1e-9), 1_000_000)?;
        let lambda1 = pts
            .iter()
            .filter(|p| p.iter().any(|&v| v != 0))
            .map(|p| {
                let v = Vector6::from_fn(|i, _| p[i] as f64);
                (v.transpose() * y * v)[(0, 0)]
            })
            .fold(f64::INFINITY, f64::min);
        Ok(Self { tau: *tau, x, y, yinv, t, lambda1 })
    }

    /// `ρ = √(π·λ₁)`.
    pub fn rho(&self) -> f64 {
        (PI * self.lambda1).sqrt()
    }

    pub fn imag(&self) -> &Matrix6<f64> {
        &self.y
    }

    /// `exp(π·y·Y⁻¹·yᵗ)` with `y = Im z`: the growth factor of `|θ(z)|`.
    pub fn growth(&self, z: &[Complex64; G]) -> f64 {
        let yv = Vector6::from_fn(|i, _| z[i].im);
        (PI * (yv.transpose() * self.yinv * yv)[(0, 0)]).exp()
    }

    pub fn theta(&self, m: &Characteristic, z: &[Complex64; G], opts: &ThetaOptions) -> Result<ThetaValue, Error> {
        let (mp, _) = m.to_f64();
        let (dnum, dden) = common_denominator(m.dprime());
        let base_phase = e_q(&m.prime().iter().zip(m.dprime()).fold(Q::zero(), |acc, (a, b)| acc + a * b));
        let roots: Vec<Complex64> = (0..dden).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / dden as f64)).collect();

        let yv = Vector6::from_fn(|i, _| z[i].im);
        let cy = -(self.yinv * yv);
        let c: [f64; G] = std::array::from_fn(|i| cy[i] - mp[i]);
        let rho = self.rho();
        let r = radius_for(opts.tol, rho);
        let pts = ellipsoid_points(&self.t, &c, r * r / PI, opts.max_points)?;

        let mut acc_re = Neumaier::default();
        let mut acc_im = Neumaier::default();
        let mut plain = Complex64::new(0.0, 0.0);
        for p in &pts {
            let n: [f64; G] = std::array::from_fn(|i| p[i] as f64 + mp[i]);
            let mut qx = 0.0;
            let mut qy = 0.0;
            for i in 0..G {
                let mut sx = 0.0;
                let mut sy = 0.0;
                for j in 0..G {
                    sx += self.x[(i, j)] * n[j];
                    sy += self.y[(i, j)] * n[j];
                }
                qx += n[i] * sx;
                qy += n[i] * sy;
            }
            let mut lz = Complex64::new(0.0, 0.0);
            for i in 0..G {
                lz += z[i] * n[i];
            }
            // 2πi(½nτn + n·z)
            let ex = Complex64::new(-PI * qy - 2.0 * PI * lz.im, PI * qx + 2.0 * PI * lz.re);
            let k = p.iter().zip(&dnum).fold(0i64, |a, (&pi, &d)| a + pi as i64 * d).rem_euclid(dden);
            let term = ex.exp() * roots[k as usize];
            if opts.compensated {
                acc_re.add(term.re);
                acc_im.add(term.im);
            } else {
                plain += term;
            }
        }
        let sum = if opts.compensated { Complex64::new(acc_re.total(), acc_im.total()) } else { plain };
        Ok(ThetaValue {
            value: sum * base_phase,
            tail_bound: tail_estimate(r, rho) * self.growth(z),
            terms: pts.len(),
        })
    }

    pub fn theta_constant(&self, m: &Characteristic, opts: &ThetaOptions) -> Result<ThetaValue, Error> {
        self.theta(m, &[Complex64::new(0.0, 0.0); G], opts)
    }
}

/// One-off evaluation.
pub fn theta(m: &Characteristic, tau: &CMat6, z: &[Complex64; G], opts: &ThetaOptions) -> Result<ThetaValue, Error> {
    ThetaKernel::new(tau)?.theta(m, z, opts)
}

pub fn theta_constant(m: &Characteristic, tau: &CMat6, opts: &ThetaOptions) -> Result<ThetaValue, Error> {
    ThetaKernel::new(tau)?.theta_constant(m, opts)
}

/// Theta constants at one `τ`, memoized on the reduced characteristic.
pub struct ConstantCache<'a> {
    kernel: &'a ThetaKernel,
    opts: ThetaOptions,
    values: Mutex<HashMap<Characteristic, Complex64>>,
}

impl<'a> ConstantCache<'a> {
    pub fn new(kernel: &'a ThetaKernel, opts: ThetaOptions) -> Self {
        Self { kernel, opts, values: Mutex::new(HashMap::new()) }
    }

    /// `θ_m(τ, 0) = e(⟨m⟩′·k″)·θ_{⟨m⟩}(τ, 0)` with `m = ⟨m⟩ + k`.
    pub fn get(&self, m: &Characteristic) -> Result<Complex64, Error> {
        let red = m.reduced();
        let phase = e_q(&m.reduction_phase());
        if let Some(v) = self.values.lock().unwrap().get(&red) {
            return Ok(phase * v);
        }
        let v = self.kernel.theta_constant(&red, &self.opts)?.value;
        self.values.lock().unwrap().insert(red, v);
        Ok(phase * v)
    }
}

fn u_q() -> QMat {
    lattice::u_matrix()
}

fn row_u(v: &[Q]) -> Vec<Q> {
    QMat::left_mul(v, &u_q())
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

fn u0_q() -> Vec<Q> {
    U0.iter().map(|&x| q(x)).collect()
}

/// `θ_{m′,m″}(τ+U) = e(phase)·θ_{m′, m″+m′U+½U₀}(τ)`; returns the new characteristic and `phase`.
///
/// The phase is `−½m′Um′ᵗ − ½m′·U₀`.
pub fn tau_shift_u(m: &Characteristic) -> (Characteristic, Q) {
    let mp = m.prime();
    let mpu = row_u(mp);
    let u0 = u0_q();
    let new_dp: Vec<Q> = m.dprime().iter().zip(&mpu).zip(&u0).map(|((a, b), c)| a + b + c * qf(1, 2)).collect();
    let phase = -qf(1, 2) * dot(&mpu, mp) - qf(1, 2) * dot(mp, &u0);
    (Characteristic::from_parts(mp, &new_dp), phase)
}

/// `m# = m·σ⁻¹ + ½((C·Dᵗ)₀, (A·Bᵗ)₀)` for symplectic `σ = (A B; C D)`.
pub fn transform_characteristic(sigma: &QMat, m: &Characteristic) -> Result<Characteristic, Error> {
    if !lattice::is_symplectic(sigma) {
        return Err(Error::Theta("σ is not symplectic".into()));
    }
    let inv = sigma.inverse().expect("symplectic matrices are invertible");
    let ms = QMat::left_mul(m.entries(), &inv);
    let [a, b, c, d] = sigma.blocks();
    let cd = (&c * &d.transpose()).diagonal();
    let ab = (&a * &b.transpose()).diagonal();
    let shift: Vec<Q> = cd.into_iter().chain(ab).map(|x| x * qf(1, 2)).collect();
    Ok(Characteristic::new(ms.iter().zip(&shift).map(|(x, s)| x + s).collect()))
}

/// `σ = (0 U; −U I)`, which sends `τ` to `U(−Uτ+I)⁻¹ = ½(τ+U)` on good period matrices.
pub fn shift_sigma() -> QMat {
    let u = u_q();
    QMat::from_blocks(&QMat::zeros(6, 6), &u, &-&u, &QMat::identity(6))
}

/// Fixed branch of `(−8)^{1/2}`.
pub fn sqrt_minus_eight() -> Complex64 {
    Complex64::new(0.0, 8f64.sqrt())
}

/// `c(a,b)` as the ratio of the two sides of its defining identity, evaluated at `z`.
///
/// Returns the ratio and the smaller of the two side magnitudes.
pub fn c_constant_at(a: &[Q], b: &[Q], tau: &CMat6, z: &[Complex64; G], opts: &ThetaOptions) -> Result<(Complex64, f64), Error> {
    let u = u_f64();
    let cmat = -u;
    let den = CMat6::identity() - u * tau;
    let deni = den.try_inverse().ok_or_else(|| Error::Theta("−Uτ+I is singular".into()))?;
    let tau_s = u * deni;
    let tau_s = (tau_s + tau_s.transpose()).map(|w| w * 0.5);
    let zv = nalgebra::RowVector6::from_fn(|_, j| z[j]);
    let zs_row = zv * deni;
    let zs: [Complex64; G] = std::array::from_fn(|j| zs_row[j]);
    let lhs = theta(&Characteristic::from_parts(a, b), &tau_s, &zs, opts)?.value;
    let bu = row_u(b);
    let au = row_u(a);
    let c: Vec<Q> = bu.iter().map(|x| -x).collect();
    let u0 = u0_q();
    let d: Vec<Q> = au.iter().zip(b).zip(&u0).map(|((x, y), w)| x + y + w * qf(1, 2)).collect();
    let rhs = theta(&Characteristic::from_parts(&c, &d), tau, z, opts)?.value;
    let auto = e_c((zv * deni * cmat * zv.transpose())[(0, 0)] * 0.5);
    let denom = sqrt_minus_eight() * rhs * auto;
    Ok((lhs / denom, lhs.norm().min(rhs.norm())))
}

/// Probe point used when a side of the `c(a,b)` identity vanishes at the origin.
pub fn probe_z() -> [Complex64; G] {
    [
        Complex64::new(0.1, 0.05),
        Complex64::new(-0.07, 0.02),
        Complex64::new(0.03, -0.01),
        Complex64::new(0.05, 0.04),
        Complex64::new(-0.02, 0.03),
        Complex64::new(0.01, -0.06),
    ]
}

/// `c(a,b)`, from `z = 0` or, if a side vanishes there, from [`probe_z`].
pub fn c_constant(a: &[Q], b: &[Q], tau: &CMat6, opts: &ThetaOptions) -> Result<Complex64, Error> {
    let (r, small) = c_constant_at(a, b, tau, &[Complex64::new(0.0, 0.0); G], opts)?;
    if small > 1e-6 {
        return Ok(r);
    }
    let (r, small) = c_constant_at(a, b, tau, &probe_z(), opts)?;
    if small > 1e-9 {
        Ok(r)
    } else {
        Err(Error::Theta("both sides of the c(a,b) identity vanish at the probes".into()))
    }
}

/// `e(½bUbᵗ + a·bᵗ + ½b·U₀)`.
pub fn c_ratio_formula(a: &[Q], b: &[Q]) -> Complex64 {
    let bu = row_u(b);
    e_q(&(qf(1, 2) * dot(&bu, b) + dot(a, b) + qf(1, 2) * dot(b, &u0_q())))
}

fn half_vec(v: &[i64; 6]) -> Vec<Q> {
    v.iter().map(|&x| qf(x, 2)).collect()
}

/// `⟨x⟩ ∈ {0,½}⁶`.
fn bracket(v: &[Q]) -> Vec<Q> {
    v.iter().map(frac).collect()
}

fn ch(a: &[Q], b: &[Q]) -> Characteristic {
    Characteristic::from_parts(a, b)
}

fn half_vectors() -> Vec<Vec<Q>> {
    (0u32..64).map(|mask| (0..6).map(|i| if (mask >> i) & 1 == 1 { qf(1, 2) } else { q(0) }).collect()).collect()
}

/// Two sides of a quadratic theta relation and a scale for relative residuals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoSided {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Sum of the magnitudes of all terms.
    pub scale: f64,
}

impl TwoSided {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.scale.max(1e-300)
    }
}

fn vuv(v: &[i64; 6]) -> i64 {
    let vu = lattice::row_times_u(v);
    vu.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// The "left" prefactor exponent `−¼vUvᵗ + ¾v·U₀ − ⅜U₀·U₀`.
fn item_prefactor(v: &[i64; 6]) -> Q {
    let vu0: i64 = v.iter().zip(&U0).map(|(a, b)| a * b).sum();
    let u0u0: i64 = U0.iter().map(|a| a * a).sum();
    -qf(vuv(v), 4) + qf(3 * vu0, 4) - qf(3 * u0u0, 8)
}

/// First relation: any `v₁ ∈ ℤ⁶`, sum over `a″ ∈ {0,½}⁶`.
pub fn quadratic_item1(v: &[i64; 6], cache: &ConstantCache) -> Result<TwoSided, Error> {
    let vq: Vec<Q> = v.iter().map(|&x| q(x)).collect();
    let u0 = u0_q();
    let vm: Vec<Q> = v.iter().zip(&U0).map(|(a, b)| qf(a - b, 2)).collect();
    let t1 = cache.get(&ch(&vm, &row_u(&vm)))?;
    let hv = half_vec(v);
    let t2 = cache.get(&ch(&hv, &row_u(&hv)))?;
    let lhs = 8.0 * e_q(&item_prefactor(v)) * t1 * t2;
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut scale = lhs.norm();
    for a in half_vectors() {
        let au = row_u(&a);
        let ph = dot(&au, &a) + qf(3, 2) * dot(&a, &u0) - dot(&vq, &a);
        let p1: Vec<Q> = au.iter().zip(&u0).map(|(x, w)| x + w * qf(1, 2)).collect();
        let p2: Vec<Q> = a.iter().zip(&u0).map(|(x, w)| x + w * qf(1, 2)).collect();
        let term = e_q(&ph) * cache.get(&ch(&p1, &p2))? * cache.get(&ch(&au, &a))?;
        scale += term.norm();
        rhs += term;
    }
    Ok(TwoSided { lhs, rhs, scale })
}

/// `b″ ∈ {0,½}⁶` with `b″ ≡ ½v₁ − ½U₀`.
pub fn b_dprime(v: &[i64; 6]) -> Vec<Q> {
    bracket(&v.iter().zip(&U0).map(|(a, b)| qf(a - b, 2)).collect::<Vec<_>>())
}

fn item2_rhs(v: &[i64; 6], cache: &ConstantCache) -> Result<(Complex64, f64), Error> {
    let vq: Vec<Q> = v.iter().map(|&x| q(x)).collect();
    let u0 = u0_q();
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for a in half_vectors() {
        let ph = qf(1, 2) * dot(&a, &u0) + dot(&vq, &a);
        let br = bracket(&a.iter().zip(&u0).map(|(x, w)| x + w * qf(1, 2)).collect::<Vec<_>>());
        let term = e_q(&ph) * cache.get(&ch(&row_u(&br), &br))? * cache.get(&ch(&row_u(&a), &a))?;
        scale += term.norm();
        rhs += term;
    }
    Ok((rhs, scale))
}

fn b_and_half_v(v: &[i64; 6], cache: &ConstantCache) -> Result<Complex64, Error> {
    let b = b_dprime(v);
    let hv = half_vec(v);
    Ok(cache.get(&ch(&b, &row_u(&b)))? * cache.get(&ch(&hv, &row_u(&hv)))?)
}

fn check_01(v: &[i64; 6]) -> Result<(), Error> {
    if v.iter().all(|&x| x == 0 || x == 1) {
        Ok(())
    } else {
        Err(Error::Usage("v₁ must lie in {0,1}⁶".into()))
    }
}

/// Second relation, `v₁ ∈ {0,1}⁶`.
pub fn quadratic_item2(v: &[i64; 6], cache: &ConstantCache) -> Result<TwoSided, Error> {
    check_01(v)?;
    let vu0: i64 = v.iter().zip(&U0).map(|(a, b)| a * b).sum();
    let pre = item_prefactor(v) + qf(vu0, 2);
    let lhs = 8.0 * e_q(&pre) * b_and_half_v(v, cache)?;
    let (rhs, scale) = item2_rhs(v, cache)?;
    Ok(TwoSided { lhs, rhs, scale: scale + lhs.norm() })
}

/// Second relation in the simplified form valid when `¼v₁Uv₁ᵗ ∈ ℤ`:
/// `−8e(¼v₁·U₀)θ_{b″,b″U}θ_{½v₁,½v₁U} = Σ_{a″} …`.
pub fn quadratic_item2_integral_form(v: &[i64; 6], cache: &ConstantCache) -> Result<TwoSided, Error> {
    check_01(v)?;
    if vuv(v) % 4 != 0 {
        return Err(Error::Usage("the simplified relation needs v₁Uv₁ᵗ ∈ 4ℤ".into()));
    }
    let vu0: i64 = v.iter().zip(&U0).map(|(a, b)| a * b).sum();
    let lhs = -8.0 * e_q(&qf(vu0, 4)) * b_and_half_v(v, cache)?;
    let (rhs, scale) = item2_rhs(v, cache)?;
    Ok(TwoSided { lhs, rhs, scale: scale + lhs.norm() })
}

/// `v₁ ∈ {0,1}⁶∖{0}` with `v₁Uv₁ᵗ ∈ 4ℤ`.
pub fn admissible_v1() -> Vec<[i64; 6]> {
    (1u32..64)
        .map(|mask| std::array::from_fn(|i| ((mask >> i) & 1) as i64))
        .filter(|v: &[i64; 6]| vuv(v) % 4 == 0)
        .collect()
}

/// The four-term vanishing relation for admissible `v₁`:
/// `e(¼v₁·U₀)θ_{b″,b″U}θ_{½v₁,½v₁U} + θ_{0,0}θ_{½U₀,½U₀}`, relative to its terms.
pub fn corollary_residual(v: &[i64; 6], cache: &ConstantCache) -> Result<TwoSided, Error> {
    check_01(v)?;
    if v.iter().all(|&x| x == 0) || vuv(v) % 4 != 0 {
        return Err(Error::Usage("v₁ is not admissible".into()));
    }
    let vu0: i64 = v.iter().zip(&U0).map(|(a, b)| a * b).sum();
    let t1 = e_q(&qf(vu0, 4)) * b_and_half_v(v, cache)?;
    let hu0 = half_vec(&U0);
    let t2 = cache.get(&Characteristic::zero())? * cache.get(&ch(&hu0, &hu0))?;
    Ok(TwoSided { lhs: t1, rhs: -t2, scale: t1.norm() + t2.norm() })
}

/// All quadratic-relation checks for one admissible `v₁`.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticReport {
    pub v1: [i64; 6],
    pub corollary: f64,
    pub item1: f64,
    pub item2: f64,
    pub item2_integral_form: f64,
}

pub fn quadratic_relation_residual(v: &[i64; 6], cache: &ConstantCache) -> Result<QuadraticReport, Error> {
    Ok(QuadraticReport {
        v1: *v,
        corollary: corollary_residual(v, cache)?.residual(),
        item1: quadratic_item1(v, cache)?.residual(),
        item2: quadratic_item2(v, cache)?.residual(),
        item2_integral_form: quadratic_item2_integral_form(v, cache)?.residual(),
    })
}

/// `ι(p_k) = ξ′τ + ξ″` for `(ξ′, ξ″)` the torsion characteristic of branch point `k`.
pub fn torsion_z(k: usize, tau: &CMat6) -> Result<[Complex64; G], Error> {
    let (xp, xpp) = lattice::torsion_point(k)?.to_f64();
    Ok(std::array::from_fn(|j| {
        let mut s = Complex64::new(xpp[j], 0.0);
        for i in 0..G {
            s += tau[(i, j)] * xp[i];
        }
        s
    }))
}

/// `|θ(z)|·exp(−π·y·Y⁻¹·yᵗ)`: a size measure invariant under lattice translation of `z`.
pub fn normalized_abs(kernel: &ThetaKernel, value: Complex64, z: &[Complex64; G]) -> f64 {
    value.norm() / kernel.growth(z)
}

/// Blocks of a symplectic matrix applied to `τ`, for callers that only hold a `QMat`.
pub fn act_on_tau(sigma: &QMat, tau: &CMat6) -> Result<(CMat6, CMat6), Error> {
    let [a, b, c, d] = blocks_f64(sigma);
    let den = c * tau + d;
    let inv = den.try_inverse().ok_or_else(|| Error::Theta("Cτ + D is singular".into()))?;
    Ok(((a * tau + b) * inv, den))
}

/// `θ_m(z + rτ + s)` against `e(−½rτrᵗ − r·z)·e(m′·s − m″·r)·θ_m(z)`, relative.
pub fn quasi_periodicity_residual(
    kernel: &ThetaKernel,
    m: &Characteristic,
    z: &[Complex64; G],
    r: &[i64; G],
    s: &[i64; G],
    opts: &ThetaOptions,
) -> Result<f64, Error> {
    let tau = &kernel.tau;
    let mut z2 = *z;
    for j in 0..G {
        for i in 0..G {
            z2[j] += tau[(i, j)] * r[i] as f64;
        }
        z2[j] += s[j] as f64;
    }
    let lhs = kernel.theta(m, &z2, opts)?.value;
    let mut rtr = Complex64::new(0.0, 0.0);
    let mut rz = Complex64::new(0.0, 0.0);
    for i in 0..G {
        for j in 0..G {
            rtr += tau[(i, j)] * (r[i] * r[j]) as f64;
        }
        rz += z[i] * r[i] as f64;
    }
    let ph = m.prime().iter().zip(s).fold(Q::zero(), |a, (x, &y)| a + x * q(y))
        - m.dprime().iter().zip(r).fold(Q::zero(), |a, (x, &y)| a + x * q(y));
    let rhs = e_c(-0.5 * rtr - rz) * e_q(&ph) * kernel.theta(m, z, opts)?.value;
    Ok((lhs - rhs).norm() / rhs.norm().max(lhs.norm()))
}

/// `θ_m(τ+U, z)` against the shifted characteristic at `τ`, relative to the larger
/// side. Evaluated at [`probe_z`] since odd characteristics vanish at the origin.
pub fn tau_shift_residual(tau: &CMat6, m: &Characteristic, opts: &ThetaOptions) -> Result<f64, Error> {
    let shifted = tau + u_f64();
    let z = probe_z();
    let lhs = theta(m, &shifted, &z, opts)?.value;
    let (m2, ph) = tau_shift_u(m);
    let rhs = e_q(&ph) * theta(&m2, tau, &z, opts)?.value;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
}

/// `θ₀(iI₆)` against the sixth power of the one-dimensional series.
pub fn diagonal_oracle_gap(opts: &ThetaOptions) -> Result<f64, Error> {
    let tau = CMat6::identity().map(|z| z * Complex64::new(0.0, 1.0));
    let v = theta_constant(&Characteristic::zero(), &tau, opts)?.value;
    let one_d: f64 = (-40i32..=40).map(|n| (-PI * (n * n) as f64).exp()).sum();
    Ok((v - Complex64::new(one_d.powi(6), 0.0)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_tau() -> CMat6 {
        let mut t = CMat6::identity().map(|z| z * Complex64::new(0.0, 1.0));
        t[(0, 1)] = Complex64::new(0.2, 0.1);
        t[(1, 0)] = t[(0, 1)];
        t[(2, 4)] = Complex64::new(-0.1, -0.05);
        t[(4, 2)] = t[(2, 4)];
        t[(3, 3)] = Complex64::new(0.3, 0.8);
        t
    }

    #[test]
    fn diagonal_tau_matches_one_dimensional_series() {
        assert!(diagonal_oracle_gap(&ThetaOptions::default()).unwrap() < 1e-10);
    }

    #[test]
    fn enumeration_matches_box_scan() {
        let tau = synthetic_tau();
        let k = ThetaKernel::new(&tau).unwrap();
        let c = [0.3, -0.2, 0.1, 0.45, -0.35, 0.05];
        let bound = 2.5;
        let pts = ellipsoid_points(&k.t, &c, bound, 1_000_000).unwrap();
        let mut count = 0;
        let r = 3i32;
        let mut idx = [-r; 6];
        loop {
            let v = Vector6::from_fn(|i, _| idx[i] as f64 - c[i]);
            if (v.transpose() * k.y * v)[(0, 0)] <= bound {
                count += 1;
            }
            let mut i = 0;
            while i < 6 {
                idx[i] += 1;
                if idx[i] <= r {
                    break;
                }
                idx[i] = -r;
                i += 1;
            }
            if i == 6 {
                break;
            }
        }
        assert_eq!(pts.len(), count);
    }

    #[test]
    fn quasi_periodicity() {
        let k = ThetaKernel::new(&synthetic_tau()).unwrap();
        let m = Characteristic::from_ints([1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0], 2);
        let r = quasi_periodicity_residual(&k, &m, &probe_z(), &[1, 0, -1, 0, 1, 0], &[0, 2, 1, -1, 0, 1], &ThetaOptions::default());
        assert!(r.unwrap() < 1e-9);
    }

    #[test]
    fn shift_by_u() {
        let m = Characteristic::from_ints([1, 1, 0, 1, 0, 1, 0, 1, 1, 0, 0, 1], 2);
        let r = tau_shift_residual(&synthetic_tau(), &m, &ThetaOptions::default()).unwrap();
        assert!(r < 1e-9, "{r}");
    }

    #[test]
    fn integer_shift_of_characteristic() {
        let tau = synthetic_tau();
        let k = ThetaKernel::new(&tau).unwrap();
        let o = ThetaOptions::default();
        let m = Characteristic::from_ints([1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0], 2);
        let shifted = Characteristic::from_ints([3, -2, 1, 2, 0, 1, 1, 5, -4, 0, 1, 2], 2);
        let a = k.theta(&shifted, &probe_z(), &o).unwrap().value;
        let b = e_q(&shifted.reduction_phase()) * k.theta(&m, &probe_z(), &o).unwrap().value;
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn halving_tolerance_moves_value_less_than_tail() {
        let tau = synthetic_tau();
        let k = ThetaKernel::new(&tau).unwrap();
        let m = Characteristic::from_ints([1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1], 2);
        let o1 = ThetaOptions { tol: 1e-6, ..Default::default() };
        let o2 = ThetaOptions { tol: 5e-7, ..Default::default() };
        let a = k.theta(&m, &probe_z(), &o1).unwrap();
        let b = k.theta(&m, &probe_z(), &o2).unwrap();
        assert!((a.value - b.value).norm() < a.tail_bound);
    }

    #[test]
    fn shift_examples() {
        let (m, ph) = tau_shift_u(&Characteristic::zero());
        assert_eq!(m, Characteristic::from_ints([0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1], 2));
        assert!(ph.is_zero());
    }

    #[test]
    fn transform_examples() {
        let id = QMat::identity(12);
        let m = Characteristic::from_ints([1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0], 2);
        assert_eq!(transform_characteristic(&id, &m).unwrap(), m);
        let s = shift_sigma();
        let a = vec![qf(1, 2), q(0), qf(1, 2), q(0), q(0), qf(1, 2)];
        let au: Vec<Q> = row_u(&a).iter().map(|x| -x).collect();
        let m = Characteristic::from_parts(&au, &a);
        let hu0: Vec<Q> = U0.iter().map(|&x| qf(-x, 2)).collect();
        assert_eq!(transform_characteristic(&s, &m).unwrap(), Characteristic::from_parts(&hu0, &a));
        let v1 = [1i64, 0, 1, 1, 0, 1];
        let au0: Vec<Q> = a.iter().zip(&U0).map(|(x, w)| x + qf(*w, 2)).collect();
        let mp: Vec<Q> = row_u(&au0).iter().map(|x| -x).collect();
        let v1u = lattice::row_times_u(&v1);
        let mpp: Vec<Q> = v1u.iter().zip(&au0).map(|(x, y)| q(*x) + y).collect();
        let got = transform_characteristic(&s, &Characteristic::from_parts(&mp, &mpp)).unwrap();
        let ep: Vec<Q> = v1.iter().zip(&U0).map(|(x, w)| q(*x) - qf(*w, 2)).collect();
        assert_eq!(got, Characteristic::from_parts(&ep, &au0));
    }

    #[test]
    fn admissible_set() {
        let a = admissible_v1();
        assert_eq!(a.len(), 11);
        assert!(a.contains(&U0));
    }
}
