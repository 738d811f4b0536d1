//! Theta constants on the 105 lattices `L_g` and the polynomial map they reproduce.
//!
//! The quadruple `θ_k = θ_{½(μ_k, μ_kU)}(τ₁)`, the cross-ratio identity, the
//! squared forms `𝒯_g² = det(γτ₁+δ)⁻²·θ₀(τ#_g)²·θ_{m₃}(τ#_g)²`, the partition
//! polynomials `P_r`, and the change-of-lattice matrices built from `Σ`-traces
//! of theta functions on the auxiliary lattice `Σ_B`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::config::{BranchConfig, Tolerances};
use crate::exact::{frac, q, qf, QMat, Q};
use crate::f2geom::{Partition2222, Perm};
use crate::lattice::{self, CosetEntry, GroupElement};
use crate::periods::{self, fractional_linear, CMat6, NormalizedTau, PeriodMatrix};
use crate::theta::{e_c, e_q, normalized_abs, torsion_z, ThetaKernel, ThetaOptions};
use crate::Error;

/// The eight vectors `μ₁..μ₈`.
pub const MU: [[i64; 6]; 8] = [
    [0, 0, 0, 0, 0, 0],
    [0, 0, 1, 1, 1, 1],
    [1, 1, 0, 0, 1, 1],
    [1, 1, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 1],
    [1, 1, 0, 0, 0, 0],
    [0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 1, 1],
];

/// Index set as printed for the even part.
pub const PRINTED_EV: [usize; 4] = [1, 4, 6, 7];

/// Display order of the even indices in the printed 4×4 matrix.
pub const EV_DISPLAY_ORDER: [usize; 4] = [1, 4, 3, 2];

/// Gate on `max|τ#_direct − τ#_fractional|`.
pub const TAU_PATH_GATE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct MuTable {
    pub mu: [[i64; 6]; 8],
    /// `{j : μ_jUμ_jᵗ ∈ 4ℤ}`, 1-based.
    pub ev_indices: Vec<usize>,
}

impl MuTable {
    pub fn new() -> Self {
        let ev_indices = (1..=8).filter(|&j| mu_u_mu(j) % 4 == 0).collect();
        Self { mu: MU, ev_indices }
    }

    /// `½(μ_k, μ_kU)`, `k` 1-based.
    pub fn characteristic(&self, k: usize) -> Characteristic {
        mu_characteristic(k)
    }
}

impl Default for MuTable {
    fn default() -> Self {
        Self::new()
    }
}

fn mu_u_mu(j: usize) -> i64 {
    let mu = &MU[j - 1];
    let mu_u = lattice::row_times_u(mu);
    mu.iter().zip(&mu_u).map(|(a, b)| a * b).sum()
}

pub fn mu_characteristic(k: usize) -> Characteristic {
    Characteristic::half_with_u(&MU[k - 1])
}

/// `(θ₁, θ₂, θ₃, θ₄)` at a normalized `τ₁`.
pub fn theta_quadruple(tau1: &NormalizedTau, opts: &ThetaOptions) -> Result<[Complex64; 4], Error> {
    let k = ThetaKernel::new(&tau1.tau)?;
    let mut out = [Complex64::zero(); 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = k.theta_constant(&mu_characteristic(i + 1), opts)?.value;
    }
    Ok(out)
}

/// `(x₁−x₅)(x₂−x₆)/((x₁−x₂)(x₅−x₆))`.
pub fn cross_ratio_rhs(cfg: &BranchConfig) -> f64 {
    let x = cfg.points();
    (x[0] - x[4]) * (x[1] - x[5]) / ((x[0] - x[1]) * (x[4] - x[5]))
}

/// `(θ₂+iθ₃)²(θ₁−iθ₄)²/(4θ₁²θ₃²)`.
pub fn cross_ratio_lhs(t: &[Complex64; 4]) -> Result<Complex64, Error> {
    let i = Complex64::i();
    let den = 4.0 * t[0] * t[0] * t[2] * t[2];
    if den.norm() < 1e-300 {
        return Err(Error::Forms("θ₁θ₃ vanishes".into()));
    }
    Ok((t[1] + i * t[2]).powi(2) * (t[0] - i * t[3]).powi(2) / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossRatioReport {
    pub quadruple: [Complex64; 4],
    pub lhs: Complex64,
    pub rhs: f64,
    /// `|lhs − rhs|/|rhs|`.
    pub residual: f64,
    /// `|θ₁θ₃ − θ₂θ₄|/|θ₁θ₃|`.
    pub product_residual: f64,
    /// `|(θ₂−iθ₃)(θ₁+iθ₄) − (θ₂+iθ₃)(θ₁−iθ₄)|`, relative to the first product.
    pub conjugate_residual: f64,
}

pub fn cross_ratio_from(cfg: &BranchConfig, t: [Complex64; 4]) -> Result<CrossRatioReport, Error> {
    let i = Complex64::i();
    let lhs = cross_ratio_lhs(&t)?;
    let rhs = cross_ratio_rhs(cfg);
    let p13 = t[0] * t[2];
    let a = (t[1] - i * t[2]) * (t[0] + i * t[3]);
    let b = (t[1] + i * t[2]) * (t[0] - i * t[3]);
    Ok(CrossRatioReport {
        quadruple: t,
        lhs,
        rhs,
        residual: (lhs - rhs).norm() / rhs.abs(),
        product_residual: (p13 - t[1] * t[3]).norm() / p13.norm(),
        conjugate_residual: (a - b).norm() / a.norm().max(b.norm()),
    })
}

pub fn cross_ratio_check(cfg: &BranchConfig, tol: &Tolerances) -> Result<CrossRatioReport, Error> {
    let pm = periods::period_matrix(cfg, tol)?;
    let t1 = periods::tau1(&pm)?;
    cross_ratio_from(cfg, theta_quadruple(&t1, &ThetaOptions::from_tolerances(tol))?)
}

/// `∏(x_a − x_b)` over the pairs `a < b` of `r`.
pub fn polynomial_p_sorted(r: &Partition2222, cfg: &BranchConfig) -> f64 {
    let x = cfg.points();
    r.pairs().iter().map(|&(a, b)| x[a as usize - 1] - x[b as usize - 1]).product()
}

/// `P_r` with the sign that makes it the pull-back of `P_{r₁}` under an even
/// permutation: `(−1)^{crossings(r)}·∏(x_a − x_b)`.
pub fn polynomial_p(r: &Partition2222, cfg: &BranchConfig) -> f64 {
    let s = if r.crossings() % 2 == 0 { 1.0 } else { -1.0 };
    s * polynomial_p_sorted(r, cfg)
}

/// `sgn(σ)·∏(x_{σ(2k−1)} − x_{σ(2k)})`.
pub fn polynomial_p_by_perm(sigma: &Perm, cfg: &BranchConfig) -> f64 {
    let x = cfg.points();
    let v: f64 = (0..4).map(|k| x[sigma.apply(2 * k + 1) - 1] - x[sigma.apply(2 * k + 2) - 1]).product();
    sigma.sign() as f64 * v
}

/// 105 complex coordinates, compared projectively.
#[derive(Clone, Debug, Serialize)]
pub struct FormVector {
    pub partitions: Vec<Partition2222>,
    pub values: Vec<Complex64>,
    /// Coordinate used to normalize.
    pub reference: usize,
}

impl FormVector {
    /// The `r₁` coordinate, or the largest one if that nearly vanishes.
    pub fn new(partitions: Vec<Partition2222>, values: Vec<Complex64>) -> Result<Self, Error> {
        let base = partitions.iter().position(|p| *p == Partition2222::base());
        let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(Error::Forms("all coordinates vanish".into()));
        }
        let reference = match base {
            Some(i) if values[i].norm() > 1e-10 * max => i,
            _ => (0..values.len()).max_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm())).unwrap(),
        };
        Ok(Self { partitions, values, reference })
    }

    pub fn ratio(&self, i: usize) -> Complex64 {
        self.values[i] / self.values[self.reference]
    }

    /// `max_i |self_i/self_ref − other_i/other_ref|` with a shared reference index.
    pub fn projective_gap(&self, other: &FormVector) -> f64 {
        let r = self.reference;
        (0..self.values.len())
            .map(|i| (self.values[i] / self.values[r] - other.values[i] / other.values[r]).norm())
            .fold(0.0, f64::max)
    }
}

/// Signed `P_r` for every coset, in coset-table order.
pub fn p_map(cfg: &BranchConfig) -> Result<FormVector, Error> {
    let table = lattice::coset_representatives();
    let parts: Vec<Partition2222> = table.entries.iter().map(|e| e.partition).collect();
    let vals = parts.iter().map(|r| Complex64::new(polynomial_p(r, cfg), 0.0)).collect();
    FormVector::new(parts, vals)
}

/// `X_g = Σ_g·Σ₁⁻¹`, the matrix taking `τ₁` to `τ#_g`.
pub fn x_matrix(g: &GroupElement) -> Result<QMat, Error> {
    lattice::basis_change(&lattice::lattice_lg(g)?, lattice::sigma1())
}

#[derive(Clone, Debug, Serialize)]
pub struct TSquared {
    pub value: Complex64,
    pub det: Complex64,
    pub theta0: Complex64,
    pub theta3: Complex64,
}

/// `det(γτ+δ)⁻²·θ₀(X·τ)²·θ_{m₃}(X·τ)²` for `X = (α β; γ δ)`.
pub fn t_squared_at(x: &QMat, tau: &CMat6, opts: &ThetaOptions) -> Result<TSquared, Error> {
    let (ts, den) = fractional_linear(x, tau)?;
    let ts = (ts + ts.transpose()).map(|z| z * 0.5);
    let k = ThetaKernel::new(&ts)?;
    let theta0 = k.theta_constant(&Characteristic::zero(), opts)?.value;
    let theta3 = k.theta_constant(&mu_characteristic(3), opts)?.value;
    let det = den.determinant();
    let v = theta0 * theta3 / det;
    Ok(TSquared { value: v * v, det, theta0, theta3 })
}

/// `max|τ#_g(direct) − X_g·τ₁|`, the direct route normalizing periods on `Σ_g`.
pub fn tau_path_gap(g: &GroupElement, pm: &PeriodMatrix, tau1: &CMat6) -> Result<f64, Error> {
    let direct = periods::normalized_tau(pm, &lattice::lattice_lg(g)?)?;
    let (fl, _) = fractional_linear(&x_matrix(g)?, tau1)?;
    Ok((direct.tau - fl).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `𝒯_g²(τ₁)`, refusing if the two routes to `τ#_g` disagree.
pub fn t_squared(g: &GroupElement, pm: &PeriodMatrix, tau1: &CMat6, opts: &ThetaOptions) -> Result<TSquared, Error> {
    let gap = tau_path_gap(g, pm, tau1)?;
    if !(gap < TAU_PATH_GATE) {
        return Err(Error::Forms(format!("τ# routes disagree by {gap:.3e}")));
    }
    t_squared_at(&x_matrix(g)?, tau1, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct FormEntry {
    pub partition: Partition2222,
    pub word: Vec<u8>,
    pub p_ratio: f64,
    pub t_ratio: Complex64,
    pub residual: f64,
    pub tau_path_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaMapReport {
    pub points: [f64; 8],
    pub entries: Vec<FormEntry>,
    pub max_residual: f64,
    pub max_tau_path_gap: f64,
    pub reference: Partition2222,
    #[serde(skip)]
    pub forms: FormVector,
}

fn entry_form(e: &CosetEntry, pm: &PeriodMatrix, tau1: &CMat6, opts: &ThetaOptions) -> Result<(f64, Complex64), Error> {
    let gap = tau_path_gap(&e.element, pm, tau1)?;
    let t = t_squared_at(&x_matrix(&e.element)?, tau1, opts)
        .map_err(|err| Error::Forms(format!("{}: {err}", e.partition)))?;
    Ok((gap, t.value))
}

/// All 105 `𝒯_r²` at a configuration, compared with the signed `P_r`.
pub fn theta_map(cfg: &BranchConfig, tol: &Tolerances) -> Result<ThetaMapReport, Error> {
    let pm = periods::period_matrix(cfg, tol)?;
    theta_map_from(&pm, tol)
}

pub fn theta_map_from(pm: &PeriodMatrix, tol: &Tolerances) -> Result<ThetaMapReport, Error> {
    let cfg = &pm.config;
    let opts = ThetaOptions::from_tolerances(tol);
    let tau1 = periods::tau1(pm)?.tau;
    let table = lattice::coset_representatives();
    let computed: Vec<(f64, Complex64)> =
        table.entries.par_iter().map(|e| entry_form(e, pm, &tau1, &opts)).collect::<Result<_, _>>()?;
    let parts: Vec<Partition2222> = table.entries.iter().map(|e| e.partition).collect();
    let forms = FormVector::new(parts.clone(), computed.iter().map(|c| c.1).collect())?;
    let p = p_map(cfg)?;
    let r = forms.reference;
    let entries: Vec<FormEntry> = table
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let p_ratio = p.values[i].re / p.values[r].re;
            let t_ratio = forms.ratio(i);
            FormEntry {
                partition: e.partition,
                word: e.word.clone(),
                p_ratio,
                t_ratio,
                residual: (t_ratio - p_ratio).norm(),
                tau_path_gap: computed[i].0,
            }
        })
        .collect();
    Ok(ThetaMapReport {
        points: *cfg.points(),
        max_residual: entries.iter().map(|e| e.residual).fold(0.0, f64::max),
        max_tau_path_gap: entries.iter().map(|e| e.tau_path_gap).fold(0.0, f64::max),
        reference: parts[r],
        entries,
        forms,
    })
}

/// `𝒯²_g(h·τ)·det(γ_hτ+δ_h)⁻²` against `𝒯²_{gh}(τ)`, relative.
pub fn equivariance_residual(g: &GroupElement, h: &GroupElement, tau: &CMat6, opts: &ThetaOptions) -> Result<f64, Error> {
    let xh = x_matrix(h)?;
    let (htau, den) = fractional_linear(&xh, tau)?;
    let htau = (htau + htau.transpose()).map(|z| z * 0.5);
    let lhs = t_squared_at(&x_matrix(g)?, &htau, opts)?.value / den.determinant().powi(2);
    let rhs = t_squared_at(&x_matrix(&g.then(h))?, tau, opts)?.value;
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// Element of `ℤ[ζ₈]` as `Σ c_k ζ₈^k`, `k < 4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Cyclo8(pub [i64; 4]);

impl Cyclo8 {
    /// `e(x)` for `x ∈ ⅛ℤ`.
    pub fn root(x: &Q) -> Result<Self, Error> {
        let k = frac(x) * q(8);
        if !k.is_integer() {
            return Err(Error::Forms(format!("phase {x} is not an eighth root of unity")));
        }
        let k = k.to_integer().try_into().unwrap_or(0i64);
        let mut c = [0; 4];
        if k < 4 {
            c[k as usize] = 1;
        } else {
            c[k as usize - 4] = -1;
        }
        Ok(Self(c))
    }

    pub fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn mul(self, o: Self) -> Self {
        let mut c = [0i64; 4];
        for i in 0..4 {
            for j in 0..4 {
                let k = i + j;
                if k < 4 {
                    c[k] += self.0[i] * o.0[j];
                } else {
                    c[k - 4] -= self.0[i] * o.0[j];
                }
            }
        }
        Self(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn to_complex(self) -> Complex64 {
        (0..4).map(|k| self.0[k] as f64 * e_c(Complex64::new(k as f64 / 8.0, 0.0))).sum()
    }
}

/// Data for the `Σ`-trace on one lattice `L_g`.
#[derive(Clone, Debug)]
pub struct TraceData {
    pub sigma: QMat,
    pub delta: Characteristic,
    /// Representatives of `ℤ¹²` modulo `{pq : pq·σ ∈ (1−ρ)H}`.
    pub reps: Vec<[i64; 12]>,
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

fn ivec(v: &[i64; 12]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

impl TraceData {
    pub fn new(g: &GroupElement) -> Result<Self, Error> {
        let sigma = lattice::sigma_g(g)?;
        let delta = lattice::translation_vector(&sigma)?.delta;
        let k = lattice::one_minus_rho_in(&lattice::sigma_b().vectors);
        let w = &sigma * &k.inverse().expect("(1−ρ)H has full rank");
        let mut seen = std::collections::HashSet::new();
        let mut reps = Vec::new();
        for n in 0u32..4096 {
            let v: [i64; 12] = std::array::from_fn(|i| ((n >> (11 - i)) & 1) as i64);
            let key: Vec<Q> = QMat::left_mul(&ivec(&v), &w).iter().map(frac).collect();
            if seen.insert(key) {
                reps.push(v);
            }
        }
        Ok(Self { sigma, delta, reps })
    }

    /// `(p,q)` lies in the kernel lattice.
    pub fn in_kernel(&self, pq: &[i64; 12]) -> bool {
        let k = lattice::one_minus_rho_in(&lattice::sigma_b().vectors);
        let w = &self.sigma * &k.inverse().expect("(1−ρ)H has full rank");
        QMat::left_mul(&ivec(pq), &w).iter().all(|x| x.is_integer())
    }
}

/// Exponent of the coefficient `c^{(g)}_{(p₀,q₀),(p,q)}`:
/// `−½q·p − ½s·r − r·m_g″ + ½p₀·q₀ − ½r₀·s₀ − r₀·m_g″ − r₀·s`
/// with `(r,s) = (p,q)·σ`, `(r₀,s₀) = (p₀,q₀)·σ`.
pub fn sigma_trace_exponent(data: &TraceData, m_g: &Characteristic, p0q0: &[Q], pq: &[i64; 12]) -> Q {
    let pqv = ivec(pq);
    let rs = QMat::left_mul(&pqv, &data.sigma);
    let r0s0 = QMat::left_mul(p0q0, &data.sigma);
    let (p, qv) = pqv.split_at(6);
    let (r, s) = rs.split_at(6);
    let (p0, q0) = p0q0.split_at(6);
    let (r0, s0) = r0s0.split_at(6);
    let mpp = m_g.dprime();
    -qf(1, 2) * dot(qv, p) - qf(1, 2) * dot(s, r) - dot(r, mpp) + qf(1, 2) * dot(p0, q0)
        - qf(1, 2) * dot(r0, s0)
        - dot(r0, mpp)
        - dot(r0, s)
}

pub fn sigma_trace_coeffs(data: &TraceData, m_g: &Characteristic, p0q0: &[Q], pq: &[i64; 12]) -> Complex64 {
    e_q(&sigma_trace_exponent(data, m_g, p0q0, pq))
}

/// The `Σ`-trace as a combination of theta functions on `Σ_B`, grouped by reduced
/// characteristic: `Σ_{pq} c·θ_{m_g+(pq+p₀q₀)σ} = Σ_class coeff·θ_class`.
pub fn trace_classes(data: &TraceData, m_g: &Characteristic, p0q0: &[Q]) -> Result<BTreeMap<Characteristic, Cyclo8>, Error> {
    let mut acc: BTreeMap<Characteristic, Cyclo8> = BTreeMap::new();
    for pq in &data.reps {
        let shift: Vec<Q> = ivec(pq).iter().zip(p0q0).map(|(a, b)| a + b).collect();
        let ch = m_g.add(&Characteristic::new(QMat::left_mul(&shift, &data.sigma)));
        let c = Cyclo8::root(&sigma_trace_exponent(data, m_g, p0q0, pq))?;
        let ph = Cyclo8::root(&ch.reduction_phase())?;
        let e = acc.entry(ch.reduced()).or_default();
        *e = e.add(c.mul(ph));
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(acc)
}

/// `(0⁹, t) − ½δ_g` for `t ∈ {0,½}³` in lexicographic order.
pub fn m_g_candidates(delta: &Characteristic) -> Vec<Characteristic> {
    let half_delta = delta.scale(&qf(1, 2));
    (0..8)
        .map(|n| {
            let mut v = vec![q(0); 12];
            for i in 0..3 {
                if (n >> (2 - i)) & 1 == 1 {
                    v[9 + i] = qf(1, 2);
                }
            }
            Characteristic::new(v).sub(&half_delta)
        })
        .collect()
}

/// First candidate whose trace is not identically zero, with its index.
pub fn choose_m_g(data: &TraceData) -> Result<(usize, Characteristic), Error> {
    let zero = vec![q(0); 12];
    for (i, m) in m_g_candidates(&data.delta).into_iter().enumerate() {
        if !trace_classes(data, &m, &zero)?.is_empty() {
            return Ok((i, m));
        }
    }
    Err(Error::Forms("every candidate trace vanishes".into()))
}

/// Row characteristics `n_i = ½(μ_i, μ_iU)`.
pub fn row_characteristics() -> Vec<Characteristic> {
    (1..=8).map(mu_characteristic).collect()
}

/// Column classes: reduced `−½δ_id + (0⁹, t)`.
pub fn column_classes() -> Result<Vec<Characteristic>, Error> {
    let d = lattice::translation_vector(&lattice::sigma_g(&GroupElement::identity())?)?.delta;
    Ok(m_g_candidates(&d).iter().map(|c| c.reduced()).collect())
}

#[derive(Clone, Debug)]
pub struct CoeffMatrix {
    pub entries: DMatrix<Complex64>,
    pub m_g: Characteristic,
    pub m_g_index: usize,
}

/// `D^{(g,B)}`: row `n_i` expands the trace on `L_g` shifted by `n_i` over the column classes.
pub fn d_matrix_b(g: &GroupElement) -> Result<CoeffMatrix, Error> {
    let data = TraceData::new(g)?;
    let (m_g_index, m_g) = choose_m_g(&data)?;
    let cols = column_classes()?;
    let rows = row_characteristics();
    let mut d = DMatrix::from_element(8, 8, Complex64::zero());
    for (i, n) in rows.iter().enumerate() {
        for (cls, c) in trace_classes(&data, &m_g, n.entries())? {
            let j = cols
                .iter()
                .position(|x| *x == cls)
                .ok_or_else(|| Error::Forms(format!("trace class {cls} outside the column set")))?;
            d[(i, j)] += c.to_complex();
        }
    }
    Ok(CoeffMatrix { entries: d, m_g, m_g_index })
}

/// `D^{(g)} = D^{(g,B)}·(D^{(id,B)})⁻¹`.
pub fn d_matrix(g: &GroupElement) -> Result<DMatrix<Complex64>, Error> {
    let dg = d_matrix_b(g)?.entries;
    let di = d_matrix_b(&GroupElement::identity())?
        .entries
        .try_inverse()
        .ok_or_else(|| Error::Forms("D^(id,B) is singular".into()))?;
    Ok(dg * di)
}

/// `π(g)` preserves `{1,2,5,6} ∪ {3,4,7,8}` as a pair of blocks.
pub fn in_delta_bar_stabilizer(g: &GroupElement) -> bool {
    lattice::delta_bar().permute(&g.permutation()) == lattice::delta_bar()
}

/// `D^{(g)}` on the even indices in display order, scaled so the corner is `½−½i`.
pub fn transform_matrix_d_ev(g: &GroupElement) -> Result<(Matrix4<Complex64>, f64), Error> {
    if !in_delta_bar_stabilizer(g) {
        return Err(Error::Forms(format!("π(g) = {} does not stabilize Δ̄", g.permutation())));
    }
    let d = d_matrix(g)?;
    let idx = EV_DISPLAY_ORDER.map(|k| k - 1);
    let ev = Matrix4::from_fn(|i, j| d[(idx[i], idx[j])]);
    let corner = ev[(0, 0)];
    if corner.norm() < 1e-12 {
        return Err(Error::Forms("corner entry of D_ev vanishes".into()));
    }
    let off = (0..4)
        .flat_map(|i| (4..8).map(move |j| (i, j)))
        .map(|(i, j)| d[(i, j)].norm().max(d[(j, i)].norm()))
        .fold(0.0, f64::max);
    Ok((ev.map(|z| z * Complex64::new(0.5, -0.5) / corner), off))
}

/// The printed block matrix for `M₂,₅`.
pub fn printed_d_ev_m25() -> Matrix4<Complex64> {
    let a = Complex64::new(0.5, -0.5);
    let b = Complex64::new(-0.5, -0.5);
    let z = Complex64::zero();
    Matrix4::new(a, b, z, z, b, a, z, z, z, z, a, b, z, z, b, a)
}

/// `M₄⁻¹M₃⁻¹M₂M₃M₄`, acting on the branch points as `(2 5)`.
pub fn m25_element() -> GroupElement {
    let r = lattice::reflections();
    r[3].inverse().then(&r[2].inverse()).then(&r[1]).then(&r[2]).then(&r[3])
}

/// `θ_n(X_g·τ₁)` against `(D^{(g)}·θ(τ₁))_n` over all `n`: spread of the ratios
/// around their mean, relative, over coordinates with a nonvanishing prediction.
pub fn d_consistency(g: &GroupElement, tau1: &CMat6, opts: &ThetaOptions) -> Result<f64, Error> {
    let d = d_matrix(g)?;
    let k1 = ThetaKernel::new(tau1)?;
    let (tg, _) = fractional_linear(&x_matrix(g)?, tau1)?;
    let kg = ThetaKernel::new(&(tg + tg.transpose()).map(|z| z * 0.5))?;
    let rows = row_characteristics();
    let th1: Vec<Complex64> = rows.iter().map(|n| k1.theta_constant(n, opts).map(|v| v.value)).collect::<Result<_, _>>()?;
    let thg: Vec<Complex64> = rows.iter().map(|n| kg.theta_constant(n, opts).map(|v| v.value)).collect::<Result<_, _>>()?;
    let scale = thg.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pred: Vec<Complex64> = (0..8).map(|i| (0..8).map(|j| d[(i, j)] * th1[j]).sum()).collect();
    // single scalar by least squares, then the worst coordinate misfit
    let num: Complex64 = (0..8).map(|i| pred[i].conj() * thg[i]).sum();
    let den: f64 = pred.iter().map(|p| p.norm_sqr()).sum();
    let c = num / den;
    Ok((0..8).map(|i| (thg[i] - c * pred[i]).norm()).fold(0.0, f64::max) / scale)
}

/// `|θ_{m_k}(τ₁, ι(p_j))|·exp(−π·y·Y⁻¹·yᵗ)` for `k = 1..4`, `j = 1..8`.
#[derive(Clone, Debug, Serialize)]
pub struct VanishingTable {
    pub values: [[f64; 8]; 4],
    pub mean: f64,
    /// Vanishing order of `θ` at `p_j` mod 4, as tabulated.
    pub expected_order: [u8; 8],
}

pub const EXPECTED_ORDER: [u8; 8] = [0, 0, 2, 2, 0, 0, 2, 2];

impl VanishingTable {
    /// Worst vanishing entry and smallest nonvanishing entry, both relative to the mean.
    pub fn margins(&self) -> (f64, f64) {
        let mut worst_zero: f64 = 0.0;
        let mut least_nonzero = f64::INFINITY;
        for row in &self.values {
            for (j, v) in row.iter().enumerate() {
                let r = v / self.mean;
                if self.expected_order[j] > 0 {
                    worst_zero = worst_zero.max(r);
                } else {
                    least_nonzero = least_nonzero.min(r);
                }
            }
        }
        (worst_zero, least_nonzero)
    }
}

pub fn vanishing_table(tau1: &CMat6, opts: &ThetaOptions) -> Result<VanishingTable, Error> {
    let k = ThetaKernel::new(tau1)?;
    let mut values = [[0.0; 8]; 4];
    for (i, row) in values.iter_mut().enumerate() {
        let m = mu_characteristic(i + 1);
        for (j, v) in row.iter_mut().enumerate() {
            let z = torsion_z(j + 1, tau1)?;
            *v = normalized_abs(&k, k.theta(&m, &z, opts)?.value, &z);
        }
    }
    let mean = values.iter().flatten().sum::<f64>() / 32.0;
    Ok(VanishingTable { values, mean, expected_order: EXPECTED_ORDER })
}

/// Direct evaluation of the `Σ`-trace of `θ#_{m_g}` and its expansion, both at `z#`,
/// after translation by `(p₀, q₀)`. Returns `(direct, expansion)`.
pub fn sigma_trace_two_routes(
    data: &TraceData,
    m_g: &Characteristic,
    p0q0: &[Q],
    tau_b: &CMat6,
    zs: &[Complex64; 6],
    opts: &ThetaOptions,
) -> Result<(Complex64, Complex64), Error> {
    let (tg, den) = fractional_linear(&data.sigma, tau_b)?;
    let tg = (tg + tg.transpose()).map(|z| z * 0.5);
    let [_, _, c, _] = periods::blocks_f64(&data.sigma);
    let deni = den.try_inverse().ok_or_else(|| Error::Forms("Cτ_B + D is singular".into()))?;
    let kb = ThetaKernel::new(tau_b)?;
    let row = |v: &[Complex64; 6]| nalgebra::RowVector6::from_fn(|_, j| v[j]);
    let auto = |z: &nalgebra::RowVector6<Complex64>| e_c((z * deni * c * z.transpose())[(0, 0)] * 0.5);
    // θ#_m(w#) = e(½w(Cτ+D)⁻¹Cwᵗ)·θ_m(τ_B, w) with w = w#(Cτ+D)
    let theta_sharp = |m: &Characteristic, ws: &nalgebra::RowVector6<Complex64>| -> Result<Complex64, Error> {
        let w = ws * den;
        let wa: [Complex64; 6] = std::array::from_fn(|j| w[j]);
        Ok(auto(&w) * kb.theta(m, &wa, opts)?.value)
    };
    let f = |v: &[Q]| -> Vec<f64> { v.iter().map(crate::exact::q_to_f64).collect() };
    let (p0, q0) = (f(&p0q0[..6]), f(&p0q0[6..]));
    let p0v = nalgebra::RowVector6::from_fn(|_, j| Complex64::new(p0[j], 0.0));
    let q0v = nalgebra::RowVector6::from_fn(|_, j| Complex64::new(q0[j], 0.0));
    let zsv = row(zs);
    let trace = |w: &nalgebra::RowVector6<Complex64>| -> Result<Complex64, Error> {
        let mut tot = Complex64::zero();
        for pq in &data.reps {
            let p = nalgebra::RowVector6::from_fn(|_, j| Complex64::new(pq[j] as f64, 0.0));
            let qv = nalgebra::RowVector6::from_fn(|_, j| Complex64::new(pq[6 + j] as f64, 0.0));
            let arg = w + p * tg + qv;
            let ph = e_c((p * tg * p.transpose())[(0, 0)] * 0.5 + (p * w.transpose())[(0, 0)]);
            tot += theta_sharp(m_g, &arg)? * ph;
        }
        Ok(tot)
    };
    let shifted = zsv + p0v * tg + q0v;
    let pre = e_c((p0v * tg * p0v.transpose())[(0, 0)] * 0.5 + (p0v * (zsv + q0v).transpose())[(0, 0)]);
    let direct = pre * trace(&shifted)?;

    let w = zsv * den;
    let wa: [Complex64; 6] = std::array::from_fn(|j| w[j]);
    let mut expansion = Complex64::zero();
    for pq in &data.reps {
        let shift: Vec<Q> = ivec(pq).iter().zip(p0q0).map(|(a, b)| a + b).collect();
        let ch = m_g.add(&Characteristic::new(QMat::left_mul(&shift, &data.sigma)));
        expansion += sigma_trace_coeffs(data, m_g, p0q0, pq) * kb.theta(&ch, &wa, opts)?.value;
    }
    Ok((direct, expansion * auto(&w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use once_cell::sync::Lazy;

    static PM: Lazy<PeriodMatrix> =
        Lazy::new(|| periods::period_matrix(&BranchConfig::standard(), &Tolerances::default()).unwrap());

    fn tau1() -> CMat6 {
        periods::tau1(&PM).unwrap().tau
    }

    #[test]
    fn mu_table() {
        let t = MuTable::new();
        assert_eq!(t.ev_indices, vec![1, 2, 3, 4]);
        let mut seen = std::collections::HashSet::new();
        for k in 1..=8 {
            assert!(seen.insert(t.characteristic(k).reduced()));
        }
    }

    #[test]
    fn polynomial_signs() {
        let cfg = BranchConfig::standard();
        assert_eq!(polynomial_p_sorted(&Partition2222::base(), &cfg), 1.0);
        for e in &lattice::coset_representatives().entries {
            let a = polynomial_p(&e.partition, &cfg);
            assert!(a != 0.0);
            assert_eq!(a, polynomial_p_by_perm(&e.perm, &cfg), "{}", e.partition);
        }
    }

    #[test]
    fn quadruple_and_cross_ratio() {
        let t1 = periods::tau1(&PM).unwrap();
        let rep = cross_ratio_from(&BranchConfig::standard(), theta_quadruple(&t1, &ThetaOptions::default()).unwrap()).unwrap();
        assert!(rep.residual < 1e-8, "{rep:?}");
        assert!(rep.product_residual < 1e-8);
        assert!(rep.conjugate_residual < 1e-8);
    }

    #[test]
    fn identity_form_and_routes() {
        let g = GroupElement::identity();
        let t = tau1();
        let o = ThetaOptions::default();
        let ts = t_squared(&g, &PM, &t, &o).unwrap();
        assert!((ts.det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let k = ThetaKernel::new(&t).unwrap();
        let a = k.theta_constant(&Characteristic::zero(), &o).unwrap().value;
        let b = k.theta_constant(&mu_characteristic(3), &o).unwrap().value;
        assert!((ts.value - (a * b).powi(2)).norm() < 1e-10 * ts.value.norm());
    }

    #[test]
    fn coset_constancy_and_stabilizer() {
        let t = tau1();
        let o = ThetaOptions::default();
        let table = lattice::coset_representatives();
        let t1 = t_squared_at(&QMat::identity(12), &t, &o).unwrap().value;
        let m1 = &lattice::reflections()[0];
        assert_eq!(Partition2222::base().act(&m1.permutation()), Partition2222::base());
        let s = t_squared_at(&x_matrix(m1).unwrap(), &t, &o).unwrap().value;
        assert!((s - t1).norm() < 1e-8 * t1.norm());
        let e = &table.entries[7];
        let a = t_squared_at(&x_matrix(&e.element).unwrap(), &t, &o).unwrap().value;
        let b = t_squared_at(&x_matrix(&m1.then(&e.element)).unwrap(), &t, &o).unwrap().value;
        assert!((a - b).norm() < 1e-8 * a.norm());
    }

    #[test]
    fn equivariance_under_reflection() {
        let t = tau1();
        let o = ThetaOptions::default();
        let table = lattice::coset_representatives();
        let h = &lattice::reflections()[2];
        for e in table.entries.iter().take(4) {
            assert!(equivariance_residual(&e.element, h, &t, &o).unwrap() < 1e-7);
        }
    }

    #[test]
    fn cyclotomic_arithmetic() {
        let a = Cyclo8::root(&qf(1, 8)).unwrap();
        let b = Cyclo8::root(&qf(7, 8)).unwrap();
        assert_eq!(a.mul(b), Cyclo8([1, 0, 0, 0]));
        assert!(Cyclo8::root(&qf(1, 2)).unwrap().add(Cyclo8::root(&q(0)).unwrap()).is_zero());
        assert!((Cyclo8::root(&qf(3, 8)).unwrap().to_complex() - e_q(&qf(3, 8))).norm() < 1e-15);
        assert!(Cyclo8::root(&qf(1, 3)).is_err());
    }

    #[test]
    fn trace_representatives_and_zero_coefficient() {
        let data = TraceData::new(&GroupElement::identity()).unwrap();
        assert_eq!(data.reps.len(), 8);
        let z = vec![q(0); 12];
        let c = sigma_trace_coeffs(&data, &Characteristic::zero(), &z, &[0; 12]);
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_expansion_matches_direct_sum() {
        let tb = periods::normalized_tau(&PM, lattice::sigma_b()).unwrap().tau;
        let data = TraceData::new(&m25_element()).unwrap();
        let (_, m_g) = choose_m_g(&data).unwrap();
        let zs = [
            Complex64::new(0.07, 0.02),
            Complex64::new(-0.05, 0.01),
            Complex64::new(0.02, -0.03),
            Complex64::new(0.04, 0.015),
            Complex64::new(-0.03, 0.02),
            Complex64::new(0.01, -0.01),
        ];
        let o = ThetaOptions::default();
        for p0q0 in [vec![q(0); 12], mu_characteristic(3).entries().to_vec()] {
            let (a, b) = sigma_trace_two_routes(&data, &m_g, &p0q0, &tb, &zs, &o).unwrap();
            assert!((a - b).norm() < 1e-8 * a.norm().max(1e-3), "{a} {b}");
        }
    }

    #[test]
    fn d_matrices() {
        let di = d_matrix_b(&GroupElement::identity()).unwrap().entries;
        assert!(di.clone().try_inverse().is_some());
        let (ev, off) = transform_matrix_d_ev(&m25_element()).unwrap();
        assert_eq!(off, 0.0);
        assert!((ev - printed_d_ev_m25()).iter().all(|z| z.norm() < 1e-12), "{ev}");
        let (id, _) = transform_matrix_d_ev(&GroupElement::identity()).unwrap();
        let expect = Matrix4::identity().map(|z: Complex64| z * Complex64::new(0.5, -0.5));
        assert!((id - expect).iter().all(|z| z.norm() < 1e-12));
        assert!(transform_matrix_d_ev(&lattice::reflections()[1]).is_err());
        assert!(d_consistency(&m25_element(), &tau1(), &ThetaOptions::default()).unwrap() < 1e-8);
    }

    #[test]
    fn vanishing_pattern() {
        let v = vanishing_table(&tau1(), &ThetaOptions::default()).unwrap();
        let (zero, nonzero) = v.margins();
        assert!(zero < 1e-6, "{v:?}");
        assert!(nonzero > 1e-3, "{v:?}");
    }
}
