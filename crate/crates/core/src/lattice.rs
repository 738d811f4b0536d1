//! Exact arithmetic on the rank-12 lattice `H` spanned by `A₁..A₆, B₁..B₆`.
//!
//! Vectors are rows; a matrix `M` acts by `x ↦ x·M`. The half pairing is
//! `⟨x,y⟩ = x·(J/2)·yᵗ` with `J = (P Q; −Q P)`, and `ρ` is `x ↦ x·R` with
//! `R = (0 I; −I 0)`, i.e. `ρ(A_j) = B_j`, `ρ(B_j) = −A_j`.
//!
//! A symplectic basis is stored as a 12×12 matrix whose rows are `a₁..a₆, b₁..b₆`
//! in `(A, B)` coordinates. The three fixed bases are validated when built; the
//! orientation and scaling they actually carry is documented on each constructor.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use once_cell::sync::Lazy;
use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::exact::{q, qf, QMat, Q};
use crate::f2geom::{orthogonal_to_perm, F2Class, OrthogonalMap, Partition2222, Perm};
use crate::Error;

pub const P_MAT: [[i64; 6]; 6] = [
    [0, 1, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0],
    [0, -1, 0, 1, 0, 0],
    [0, 0, -1, 0, 1, 0],
    [0, 0, 0, -1, 0, 1],
    [0, 0, 0, 0, -1, 0],
];

pub const Q_MAT: [[i64; 6]; 6] = [
    [2, -1, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0],
    [0, -1, 2, -1, 0, 0],
    [0, 0, -1, 2, -1, 0],
    [0, 0, 0, -1, 2, -1],
    [0, 0, 0, 0, -1, 2],
];

/// Action of `ρ` on a good basis is `(0 −U; U 0)`.
pub const U_MAT: [[i64; 6]; 6] = [
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0],
    [0, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
];

/// Diagonal of `U`.
pub const U0: [i64; 6] = [1, 1, 0, 0, 1, 1];

pub fn row_times_u(v: &[i64; 6]) -> [i64; 6] {
    let mut out = [0i64; 6];
    for (i, vi) in v.iter().enumerate() {
        for j in 0..6 {
            out[j] += vi * U_MAT[i][j];
        }
    }
    out
}

fn mat6(m: &[[i64; 6]; 6]) -> QMat {
    QMat::from_fn(6, 6, |i, j| q(m[i][j]))
}

pub fn u_matrix() -> QMat {
    mat6(&U_MAT)
}

/// Full intersection matrix `(P Q; −Q P)`.
pub fn full_pairing_matrix() -> QMat {
    let p = mat6(&P_MAT);
    let qm = mat6(&Q_MAT);
    QMat::from_blocks(&p, &qm, &-&qm, &p)
}

/// Half intersection matrix, the Gram of `⟨,⟩` on `(A, B)`.
pub fn half_pairing_matrix() -> QMat {
    full_pairing_matrix().scale(&qf(1, 2))
}

/// Matrix of `ρ` on row vectors.
pub fn rho_matrix() -> QMat {
    let z = QMat::zeros(6, 6);
    let i = QMat::identity(6);
    QMat::from_blocks(&z, &i, &-&i, &z)
}

/// `(0 −I; I 0)`: the Gram matrix every principal basis used here carries under `⟨,⟩`.
pub fn principal_gram() -> QMat {
    let z = QMat::zeros(6, 6);
    let i = QMat::identity(6);
    QMat::from_blocks(&z, &-&i, &i, &z)
}

/// `(0 −U; U 0)`.
pub fn good_rho_block(u: &QMat) -> QMat {
    let z = QMat::zeros(6, 6);
    QMat::from_blocks(&z, &-u, u, &z)
}

/// `e = diag(1,1,1,2,2,2)`: the type of `Σ_B` relative to the good bases.
pub fn e_matrix() -> QMat {
    QMat::diag(&[q(1), q(1), q(1), q(2), q(2), q(2)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeVector {
    pub coords: [i64; 12],
}

impl LatticeVector {
    pub fn zero() -> Self {
        Self { coords: [0; 12] }
    }

    pub fn a(j: usize) -> Self {
        let mut v = Self::zero();
        v.coords[j - 1] = 1;
        v
    }

    pub fn b(j: usize) -> Self {
        let mut v = Self::zero();
        v.coords[5 + j] = 1;
        v
    }

    /// Sum of `c·A_j` / `c·B_j` terms, written as `('A', j, c)`.
    pub fn from_terms(terms: &[(char, usize, i64)]) -> Self {
        let mut v = Self::zero();
        for &(t, j, c) in terms {
            let idx = match t {
                'A' => j - 1,
                'B' => 5 + j,
                _ => panic!("unknown cycle {t}"),
            };
            v.coords[idx] += c;
        }
        v
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let mut out = [0i64; 12];
        for i in 0..12 {
            out[i] = self.coords[i].checked_add(other.coords[i])?;
        }
        Some(Self { coords: out })
    }

    pub fn checked_scale(&self, s: i64) -> Option<Self> {
        let mut out = [0i64; 12];
        for i in 0..12 {
            out[i] = self.coords[i].checked_mul(s)?;
        }
        Some(Self { coords: out })
    }

    pub fn to_q(&self) -> Vec<Q> {
        self.coords.iter().map(|&c| q(c)).collect()
    }

    pub fn from_q(v: &[Q]) -> Option<Self> {
        let m = QMat::row_vector(v).to_i64()?;
        Some(Self { coords: m.try_into().ok()? })
    }

    /// `x·M` for an integral matrix, with overflow checks.
    pub fn apply(&self, g: &GroupElement) -> Self {
        Self::from_q(&QMat::left_mul(&self.to_q(), &g.matrix)).expect("integral image")
    }
}

/// `⟨x,y⟩`.
pub fn pairing(x: &LatticeVector, y: &LatticeVector) -> Q {
    let jh = half_pairing_matrix();
    let xj = QMat::left_mul(&x.to_q(), &jh);
    xj.iter().zip(y.to_q()).fold(Q::zero(), |acc, (a, b)| acc + a * b)
}

/// `(x,y) = 2⟨x,y⟩`, the intersection number.
pub fn full_pairing(x: &LatticeVector, y: &LatticeVector) -> i64 {
    let v = pairing(x, y) * q(2);
    v.to_integer().try_into().expect("intersection number fits i64")
}

pub fn rho_apply(x: &LatticeVector) -> LatticeVector {
    let mut out = [0i64; 12];
    for j in 0..6 {
        out[6 + j] = x.coords[j];
        out[j] = -x.coords[6 + j];
    }
    LatticeVector { coords: out }
}

/// `h(x,y) = ⟨x,ρy⟩ − ⟨x,y⟩i`, returned as (real, imaginary).
pub fn hermitian_form(x: &LatticeVector, y: &LatticeVector) -> (Q, Q) {
    (pairing(x, &rho_apply(y)), -pairing(x, y))
}

/// `H = ½(Q − iP)` on `A₁..A₆`.
pub fn hermitian_gram() -> nalgebra::DMatrix<num_complex::Complex64> {
    nalgebra::DMatrix::from_fn(6, 6, |i, j| {
        num_complex::Complex64::new(Q_MAT[i][j] as f64 / 2.0, -(P_MAT[i][j] as f64) / 2.0)
    })
}

/// Root vector `A_p` for `p = 1..8`; `A₇`, `A₈` expressed in the basis.
pub fn root(p: usize) -> LatticeVector {
    match p {
        1..=6 => LatticeVector::a(p),
        7 => LatticeVector::from_terms(&[
            ('B', 1, 1),
            ('B', 2, 1),
            ('A', 2, -1),
            ('A', 3, -1),
            ('B', 5, 1),
            ('B', 6, 1),
            ('A', 6, -1),
        ]),
        8 => {
            let mut s = LatticeVector::zero();
            for j in 1..=7 {
                s = s.checked_add(&root(j).checked_scale(-1).unwrap()).unwrap();
            }
            s
        }
        _ => panic!("root index {p} out of range"),
    }
}

/// Reduction `H → H/(1−ρ)H ≅ V`: `A_j`, `B_j ↦ class(e_j + e_{j+1})`.
pub fn to_v(x: &[Q]) -> F2Class {
    let mut c = 0u8;
    for j in 0..6 {
        let s = &x[j] + &x[6 + j];
        assert!(s.is_integer(), "reduction needs an integral vector");
        if (s.to_integer() % 2u32) != 0u32.into() {
            c |= 1 << j;
        }
    }
    F2Class::from_coords(c)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub matrix: QMat,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self { matrix: QMat::identity(12) }
    }

    pub fn new(matrix: QMat) -> Result<Self, Error> {
        let g = Self { matrix };
        if !g.matrix.is_integral() {
            return Err(Error::Lattice("group element is not integral".into()));
        }
        if !g.preserves_pairing() || !g.commutes_with_rho() {
            return Err(Error::Lattice("group element is not unitary".into()));
        }
        Ok(g)
    }

    /// "First `self`, then `other`".
    pub fn then(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { matrix: self.matrix.inverse().expect("unitary elements are invertible") }
    }

    pub fn preserves_pairing(&self) -> bool {
        let jh = half_pairing_matrix();
        &(&self.matrix * &jh) * &self.matrix.transpose() == jh
    }

    pub fn commutes_with_rho(&self) -> bool {
        let r = rho_matrix();
        &self.matrix * &r == &r * &self.matrix
    }

    /// Induced isometry of `V` in the `class(e_j + e_{j+1})` basis.
    pub fn orthogonal_image(&self) -> OrthogonalMap {
        let mut rows = [0u8; 6];
        for j in 0..6 {
            rows[j] = to_v(&QMat::left_mul(&LatticeVector::a(j + 1).to_q(), &self.matrix)).coords();
        }
        OrthogonalMap(rows)
    }

    /// Image in 𝔖₈.
    pub fn permutation(&self) -> Perm {
        orthogonal_to_perm(&self.orthogonal_image()).expect("every unitary element induces a permutation")
    }
}

/// Complex reflection `M_{p,p+1}` with root `A_p` and eigenvalue `−ρ`.
///
/// Built from its defining data: `A_p ↦ −ρA_p`, `ρA_p ↦ A_p`, and the identity on
/// the `⟨,⟩`-orthogonal complement of `{A_p, ρA_p}`.
pub fn reflection(p: usize) -> GroupElement {
    assert!((1..=7).contains(&p), "reflection index {p} out of range");
    let jh = half_pairing_matrix();
    let a = root(p).to_q();
    let b = rho_apply(&root(p)).to_q();
    let ja = QMat::left_mul(&a, &jh.transpose());
    let jb = QMat::left_mul(&b, &jh.transpose());
    let constraints = QMat::from_fn(12, 2, |i, j| if j == 0 { ja[i].clone() } else { jb[i].clone() });
    let comp = constraints.left_nullspace();
    let mut basis = vec![a.clone(), b.clone()];
    let mut images = vec![b.iter().map(|x| -x).collect::<Vec<Q>>(), a];
    basis.extend(comp.iter().cloned());
    images.extend(comp);
    let bm = QMat::vstack(&basis);
    let im = QMat::vstack(&images);
    let g = &bm.inverse().expect("root, ρ-root and complement span") * &im;
    GroupElement::new(g).expect("reflection is unitary")
}

static REFLECTIONS: Lazy<Vec<GroupElement>> = Lazy::new(|| (1..=7).map(reflection).collect());

pub fn reflections() -> &'static [GroupElement] {
    &REFLECTIONS
}

pub fn word_element(word: &[u8]) -> GroupElement {
    word.iter().fold(GroupElement::identity(), |g, &p| g.then(&REFLECTIONS[p as usize - 1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisLabel {
    Sigma,
    Sigma1,
    SigmaB,
    SigmaG,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticBasis {
    pub label: BasisLabel,
    /// Rows `a₁..a₆, b₁..b₆` in `(A, B)` coordinates.
    pub vectors: QMat,
}

impl SymplecticBasis {
    pub fn gram(&self) -> QMat {
        &(&self.vectors * &half_pairing_matrix()) * &self.vectors.transpose()
    }

    pub fn full_gram(&self) -> QMat {
        &(&self.vectors * &full_pairing_matrix()) * &self.vectors.transpose()
    }

    /// Matrix `X` with `rows·R = X·rows`, i.e. `ρ` written in this basis.
    pub fn rho_in_basis(&self) -> QMat {
        &(&self.vectors * &rho_matrix()) * &self.vectors.inverse().expect("basis is nonsingular")
    }

    /// Good: principal Gram and `ρ` acting as `(0 −U; U 0)`.
    pub fn is_good_with(&self, u: &QMat) -> bool {
        self.gram() == principal_gram() && self.rho_in_basis() == good_rho_block(u)
    }

    pub fn is_good(&self) -> bool {
        self.is_good_with(&u_matrix())
    }

    pub fn is_rho_stable(&self) -> bool {
        self.rho_in_basis().is_integral()
    }

    /// `(1−ρ)H ⊆ span(self)`.
    pub fn contains_one_minus_rho(&self) -> bool {
        one_minus_rho_in(&self.vectors).is_integral()
    }

    /// `[H : span(self)]`.
    pub fn index(&self) -> Q {
        self.vectors.det().abs()
    }
}

/// Generators of `(1−ρ)H` in the coordinates of a basis.
pub fn one_minus_rho_in(basis: &QMat) -> QMat {
    let i_r = &QMat::identity(12) - &rho_matrix();
    &i_r * &basis.inverse().expect("basis is nonsingular")
}

fn basis_from_terms(rows: &[&[(char, usize, i64)]]) -> QMat {
    QMat::vstack(&rows.iter().map(|t| LatticeVector::from_terms(t).to_q()).collect::<Vec<_>>())
}

fn sigma1_matrix() -> QMat {
    basis_from_terms(&[
        &[('A', 1, 1)],
        &[('A', 1, 1), ('A', 2, 1), ('B', 2, 1)],
        &[('A', 1, 1), ('A', 2, 1), ('B', 2, 1), ('B', 3, 1)],
        &[('A', 1, 1), ('A', 2, 1), ('A', 4, -1), ('B', 2, 1), ('B', 3, 1), ('B', 4, 1)],
        &[('A', 1, 1), ('A', 2, 1), ('A', 5, 1), ('B', 2, 1), ('B', 3, 1)],
        &[('A', 1, 1), ('A', 2, 1), ('A', 5, 1), ('A', 6, 1), ('B', 2, 1), ('B', 3, 1), ('B', 6, 1)],
        &[('B', 1, -1)],
        &[('A', 2, 1), ('B', 1, -1), ('B', 2, -1)],
        &[('A', 2, -1), ('A', 3, -1), ('A', 4, -1), ('B', 1, 1), ('B', 2, 1), ('B', 4, -1)],
        &[('A', 2, -1), ('A', 3, -1), ('B', 1, 1), ('B', 2, 1)],
        &[('A', 2, 1), ('A', 3, 1), ('B', 1, -1), ('B', 2, -1), ('B', 5, -1)],
        &[('A', 2, 1), ('A', 3, 1), ('A', 6, 1), ('B', 1, -1), ('B', 2, -1), ('B', 5, -1), ('B', 6, -1)],
    ])
}

fn sigma_matrix() -> QMat {
    basis_from_terms(&[
        &[('A', 1, 2), ('A', 3, 2), ('A', 4, 1), ('B', 4, 1)],
        &[('A', 1, 2), ('A', 2, 1), ('A', 5, 2), ('A', 6, 2), ('B', 2, 1), ('B', 4, -2), ('B', 5, -2)],
        &[('A', 1, 1), ('A', 2, 2), ('A', 3, 1), ('A', 5, 1), ('A', 6, 2), ('B', 1, -1), ('B', 3, 1), ('B', 5, -1)],
        &[('A', 1, 1)],
        &[('A', 1, 1), ('A', 3, 1)],
        &[('A', 1, -1), ('A', 3, -1), ('B', 5, 1)],
        &[('A', 1, 2), ('A', 3, 2), ('A', 5, 1), ('A', 6, 2), ('B', 5, -1)],
        &[('A', 1, -1), ('A', 2, -2), ('A', 5, -2), ('A', 6, -2), ('B', 1, 1), ('B', 4, 2), ('B', 5, 2)],
        &[('A', 4, 1), ('A', 6, -1), ('B', 4, 1), ('B', 5, 2), ('B', 6, 1)],
        &[('A', 2, 1)],
        &[('A', 4, 1)],
        &[('A', 6, 1)],
    ])
}

/// The good basis `Σ₁`; Gram `(0 −I; I 0)` under `⟨,⟩`, `ρ` acts as `(0 −U; U 0)`.
pub fn basis_sigma1() -> SymplecticBasis {
    let b = SymplecticBasis { label: BasisLabel::Sigma1, vectors: sigma1_matrix() };
    assert!(b.is_good(), "Σ₁ failed the good-basis check");
    b
}

/// The non-principal basis `Σ`; its Gram under the full pairing `(,)` is `(0 e; −e 0)`,
/// `e = diag(2,2,2,1,1,1)` (half of that under `⟨,⟩`).
pub fn basis_sigma() -> SymplecticBasis {
    let b = SymplecticBasis { label: BasisLabel::Sigma, vectors: sigma_matrix() };
    let e = QMat::diag(&[q(2), q(2), q(2), q(1), q(1), q(1)]);
    let z = QMat::zeros(6, 6);
    assert_eq!(b.full_gram(), QMat::from_blocks(&z, &e, &-&e, &z), "Σ Gram check failed");
    b
}

/// `Σ_B`: `α_j` from `Σ`, `β_j = −β′_j` for `j = 1,2,3` and `β_j = −2β′_j` for `j = 4,5,6`.
///
/// This is the scaling that makes the basis unimodular with the same Gram as `Σ₁`,
/// `ρ`-stable, and containing `(1−ρ)H`.
pub fn basis_sigma_b() -> SymplecticBasis {
    let s = sigma_matrix();
    let mut rows: Vec<Vec<Q>> = (0..6).map(|i| s.row(i)).collect();
    for j in 0..6 {
        let f = if j < 3 { q(-1) } else { q(-2) };
        rows.push(s.row(6 + j).iter().map(|x| x * &f).collect());
    }
    let b = SymplecticBasis { label: BasisLabel::SigmaB, vectors: QMat::vstack(&rows) };
    assert_eq!(b.gram(), principal_gram(), "Σ_B Gram check failed");
    assert!(b.is_rho_stable(), "Σ_B is not ρ-stable");
    assert!(b.contains_one_minus_rho(), "Σ_B does not contain (1−ρ)H");
    b
}

/// The basis `Σ_B` obtained by doubling on the first three `β′`, kept for comparison.
pub fn basis_sigma_b_doubling_first_half() -> QMat {
    let s = sigma_matrix();
    let mut rows: Vec<Vec<Q>> = (0..6).map(|i| s.row(i)).collect();
    for j in 0..6 {
        let f = if j < 3 { q(2) } else { q(1) };
        rows.push(s.row(6 + j).iter().map(|x| x * &f).collect());
    }
    QMat::vstack(&rows)
}

static SIGMA1: Lazy<SymplecticBasis> = Lazy::new(basis_sigma1);
static SIGMA_B: Lazy<SymplecticBasis> = Lazy::new(basis_sigma_b);

pub fn sigma1() -> &'static SymplecticBasis {
    &SIGMA1
}

pub fn sigma_b() -> &'static SymplecticBasis {
    &SIGMA_B
}

/// `Σ_g = g(Σ₁)`, validated good.
pub fn lattice_lg(g: &GroupElement) -> Result<SymplecticBasis, Error> {
    let b = SymplecticBasis { label: BasisLabel::SigmaG, vectors: &SIGMA1.vectors * &g.matrix };
    if !b.is_good() {
        return Err(Error::Lattice("g(Σ₁) is not a good basis".into()));
    }
    Ok(b)
}

/// `σ` with `from = σ·to` (rows), so coordinates transform as `(r,s) = (p,q)·σ`.
pub fn basis_change(from: &SymplecticBasis, to: &SymplecticBasis) -> Result<QMat, Error> {
    let inv = to.vectors.inverse().ok_or_else(|| Error::Lattice("target basis is singular".into()))?;
    Ok(&from.vectors * &inv)
}

/// `σ·G·σᵗ = G` for the principal Gram `G`.
pub fn is_symplectic(sigma: &QMat) -> bool {
    let g = principal_gram();
    &(sigma * &g) * &sigma.transpose() == g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslationVector {
    pub delta: Characteristic,
}

impl TranslationVector {
    /// `δ′ ∈ ℤ³⊕2ℤ³` and `δ″ ∈ ℤ⁶`.
    pub fn in_expected_lattice(&self) -> bool {
        let d = self.delta.entries();
        d.iter().all(|x| x.is_integer()) && d[3..6].iter().all(|x| (x / q(2)).is_integer())
    }

    /// `δ` as printed would require `δ′ ∈ 2ℤ³⊕ℤ³`.
    pub fn in_printed_lattice(&self) -> bool {
        let d = self.delta.entries();
        d.iter().all(|x| x.is_integer()) && d[0..3].iter().all(|x| (x / q(2)).is_integer())
    }
}

/// `δ = ((ᵗC·A)₀, (e·ᵗD·B·e)₀·e⁻¹)` for `σ = (A B; C D)`.
pub fn translation_vector(sigma: &QMat) -> Result<TranslationVector, Error> {
    let [a, b, c, d] = sigma.blocks();
    let e = e_matrix();
    let dp = (&c.transpose() * &a).diagonal();
    let ed = &(&(&e * &d.transpose()) * &b) * &e;
    let dpp: Vec<Q> = ed.diagonal().iter().zip(e.diagonal()).map(|(x, ei)| x / ei).collect();
    let t = TranslationVector { delta: Characteristic::from_parts(&dp, &dpp) };
    if !t.in_expected_lattice() {
        return Err(Error::Lattice(format!("translation vector {} outside ℤ³⊕2ℤ³⊕ℤ⁶", t.delta)));
    }
    Ok(t)
}

/// Class in `V` of `½δ`, via `(1−ρ)(½δ·Σ_B)` in `H`.
pub fn half_delta_class(delta: &Characteristic) -> F2Class {
    let half: Vec<Q> = delta.entries().iter().map(|x| x * qf(1, 2)).collect();
    let x = QMat::left_mul(&half, &SIGMA_B.vectors);
    let i_r = &QMat::identity(12) - &rho_matrix();
    to_v(&QMat::left_mul(&x, &i_r))
}

/// `Δ̄ = class(e₁+e₂+e₅+e₆)`.
pub fn delta_bar() -> F2Class {
    F2Class::from_indices(&[1, 2, 5, 6]).unwrap()
}

/// `½(ξ_k, ξ_k·U)` for the 2-torsion images of the branch points.
pub fn torsion_point(k: usize) -> Result<Characteristic, Error> {
    let xi: [i64; 6] = match k {
        1 | 2 => [0; 6],
        3 | 4 => [1, 1, 0, 0, 0, 0],
        5 | 6 => [1, 1, 1, 1, 0, 0],
        7 | 8 => [1; 6],
        _ => return Err(Error::Usage(format!("branch point index {k} out of range"))),
    };
    Ok(Characteristic::half_with_u(&xi))
}

#[derive(Clone, Debug)]
pub struct CosetEntry {
    pub partition: Partition2222,
    pub word: Vec<u8>,
    pub perm: Perm,
    pub element: GroupElement,
}

#[derive(Clone, Debug)]
pub struct CosetTable {
    pub entries: Vec<CosetEntry>,
    by_partition: HashMap<Partition2222, usize>,
}

impl CosetTable {
    /// Breadth-first search over `r₁·σ`; per partition the shortest word, lexicographically first.
    fn build() -> Self {
        let perms: Vec<Perm> = REFLECTIONS.iter().map(|g| g.permutation()).collect();
        let r1 = Partition2222::base();
        let mut best: BTreeMap<Partition2222, (Vec<u8>, Perm)> = BTreeMap::new();
        best.insert(r1, (vec![], Perm::IDENTITY));
        let mut frontier = vec![r1];
        while !frontier.is_empty() {
            let mut cand: BTreeMap<Partition2222, (Vec<u8>, Perm)> = BTreeMap::new();
            for st in &frontier {
                let (w, s) = best[st].clone();
                for (k, pk) in perms.iter().enumerate() {
                    let s2 = s.then(pk);
                    let st2 = r1.act(&s2);
                    if best.contains_key(&st2) {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(k as u8 + 1);
                    match cand.get(&st2) {
                        Some((wc, _)) if *wc <= w2 => {}
                        _ => {
                            cand.insert(st2, (w2, s2));
                        }
                    }
                }
            }
            frontier = cand.keys().copied().collect();
            best.extend(cand);
        }
        let mut entries: Vec<CosetEntry> = best
            .into_iter()
            .map(|(partition, (word, perm))| CosetEntry { element: word_element(&word), partition, word, perm })
            .collect();
        entries.sort_by(|a, b| (a.word.len(), &a.word).cmp(&(b.word.len(), &b.word)));
        let by_partition = entries.iter().enumerate().map(|(i, e)| (e.partition, i)).collect();
        Self { entries, by_partition }
    }

    pub fn get(&self, r: &Partition2222) -> Option<&CosetEntry> {
        self.by_partition.get(r).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

static COSETS: Lazy<CosetTable> = Lazy::new(CosetTable::build);

pub fn coset_representatives() -> &'static CosetTable {
    &COSETS
}

/// Per-coset lattice data: `σ_g = Σ_g·Σ_B⁻¹`, `δ_g`, and the class relation value.
#[derive(Clone, Debug, Serialize)]
pub struct CosetAudit {
    pub partition: Partition2222,
    pub word: Vec<u8>,
    pub permutation: String,
    pub sigma_g: Vec<Vec<String>>,
    pub delta_g: Characteristic,
    pub half_delta_class: String,
    pub class_relation: String,
}

pub fn sigma_g(g: &GroupElement) -> Result<QMat, Error> {
    basis_change(&lattice_lg(g)?, &SIGMA_B)
}

pub fn coset_audit(entry: &CosetEntry) -> Result<CosetAudit, Error> {
    let sig = sigma_g(&entry.element)?;
    let t = translation_vector(&sig)?;
    let cls = half_delta_class(&t.delta);
    let c0 = cls.add(delta_bar().permute(&entry.perm));
    Ok(CosetAudit {
        partition: entry.partition,
        word: entry.word.clone(),
        permutation: entry.perm.to_string(),
        sigma_g: (0..12).map(|i| sig.row(i).iter().map(|x| x.to_string()).collect()).collect(),
        delta_g: t.delta,
        half_delta_class: cls.to_string(),
        class_relation: c0.to_string(),
    })
}

/// Audit records for all 105 cosets.
pub fn audit_table() -> Result<Vec<CosetAudit>, Error> {
    COSETS.entries.iter().map(coset_audit).collect()
}

/// `e·ᵗB` and `e·ᵗD` integral for `σ = (A B; C D)`.
pub fn e_integrality(sigma: &QMat) -> bool {
    let [_, b, _, d] = sigma.blocks();
    let e = e_matrix();
    (&e * &b.transpose()).is_integral() && (&e * &d.transpose()).is_integral()
}

/// `ρ`-matrix check of `Σ₁` against a supplied `U`; used by the verifier.
pub fn sigma1_rho_matches(u: &QMat) -> bool {
    SIGMA1.rho_in_basis() == good_rho_block(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing(&LatticeVector::a(1), &LatticeVector::a(2)), qf(1, 2));
        assert_eq!(pairing(&LatticeVector::a(1), &LatticeVector::b(1)), q(1));
        assert_eq!(full_pairing(&LatticeVector::a(1), &LatticeVector::b(1)), 2);
        let x = LatticeVector::from_terms(&[('A', 2, 3), ('B', 5, -1)]);
        assert_eq!(pairing(&x, &x), q(0));
    }

    #[test]
    fn intersection_determinant_is_two_to_the_six() {
        assert_eq!(full_pairing_matrix().det(), q(64));
        let j = full_pairing_matrix();
        assert_eq!(j.transpose(), -&j);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_apply(&LatticeVector::a(3)), LatticeVector::b(3));
        let r = rho_matrix();
        assert_eq!(&r * &r, -&QMat::identity(12));
        let jh = half_pairing_matrix();
        assert_eq!(&(&r * &jh) * &r.transpose(), jh);
    }

    #[test]
    fn hermitian_examples() {
        let a1 = LatticeVector::a(1);
        assert_eq!(hermitian_form(&a1, &a1), (q(1), q(0)));
        let h = hermitian_gram();
        let eig = nalgebra::DMatrix::from_fn(12, 12, |i, j| {
            let (bi, bj) = (i / 6, j / 6);
            let z = h[(i % 6, j % 6)];
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        })
        .symmetric_eigenvalues();
        let neg = eig.iter().filter(|&&x| x < 0.0).count();
        assert_eq!(neg, 2, "realified form of signature (5,1) has two negative eigenvalues");
    }

    #[test]
    fn good_bases() {
        let s1 = basis_sigma1();
        assert_eq!(s1.gram(), principal_gram());
        assert_eq!(s1.rho_in_basis(), good_rho_block(&u_matrix()));
        basis_sigma();
        let sb = basis_sigma_b();
        assert!(sb.is_rho_stable());
    }

    #[test]
    fn printed_doubling_is_not_unimodular() {
        let m = basis_sigma_b_doubling_first_half();
        let b = SymplecticBasis { label: BasisLabel::SigmaB, vectors: m };
        assert!(!b.gram().is_integral());
    }

    #[test]
    fn reflection_defining_properties() {
        let m12 = &REFLECTIONS[0];
        assert_eq!(LatticeVector::a(1).apply(m12), LatticeVector::b(1).checked_scale(-1).unwrap());
        assert_eq!(LatticeVector::a(3).apply(m12), LatticeVector::a(3));
        for (k, g) in REFLECTIONS.iter().enumerate() {
            assert!(g.preserves_pairing() && g.commutes_with_rho());
            let p = k + 1;
            assert_eq!(g.permutation(), Perm::transposition(p, p + 1));
            let sq = g.then(g);
            assert_ne!(sq, GroupElement::identity());
            assert_eq!(sq.permutation(), Perm::IDENTITY);
        }
    }

    #[test]
    fn root_sum_vanishes_in_v() {
        for p in 1..=7 {
            let a = to_v(&root(p).to_q());
            assert_eq!(a, F2Class::from_indices(&[p, p + 1]).unwrap());
        }
    }

    #[test]
    fn reflections_generate_s8() {
        let gens: Vec<Perm> = REFLECTIONS.iter().map(|g| g.permutation()).collect();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![Perm::IDENTITY];
        seen.insert(Perm::IDENTITY);
        while let Some(p) = stack.pop() {
            for g in &gens {
                let n = p.then(g);
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        assert_eq!(seen.len(), 40320);
    }

    #[test]
    fn coset_table_shape() {
        let t = coset_representatives();
        assert_eq!(t.len(), 105);
        assert!(t.entries[0].word.is_empty());
        assert_eq!(t.entries[0].partition, Partition2222::base());
        assert_eq!(t.entries.iter().map(|e| e.word.len()).max(), Some(12));
        let r26 = Partition2222::base().act(&Perm::transposition(2, 6));
        let e = t.get(&r26).unwrap();
        assert_eq!(Partition2222::base().act(&e.element.permutation()), r26);
        for e in &t.entries {
            assert_eq!(e.element.permutation(), e.perm);
            assert_eq!(Partition2222::base().act(&e.perm), e.partition);
        }
    }

    #[test]
    fn per_coset_lattice_data() {
        let sig1 = sigma_g(&GroupElement::identity()).unwrap();
        let sig1_inv = sig1.inverse().unwrap();
        let mut consts = std::collections::BTreeSet::new();
        let index1 = sigma1().index();
        for e in &coset_representatives().entries {
            let lg = lattice_lg(&e.element).unwrap();
            assert!(lg.contains_one_minus_rho());
            assert_eq!(lg.index(), index1);
            let sig = sigma_g(&e.element).unwrap();
            assert!(is_symplectic(&sig));
            assert!(is_symplectic(&(&sig * &sig1_inv)));
            assert!(e_integrality(&sig));
            let a = coset_audit(e).unwrap();
            consts.insert(a.class_relation);
        }
        assert_eq!(consts.len(), 1);
    }

    #[test]
    fn torsion_points() {
        assert_eq!(torsion_point(1).unwrap(), Characteristic::zero());
        let t5 = torsion_point(5).unwrap();
        assert_eq!(t5, Characteristic::from_ints([1, 1, 1, 1, 0, 0, 1, 1, -1, -1, 0, 0], 2));
        assert!(torsion_point(9).is_err());
    }

    #[test]
    fn delta_bar_is_singular() {
        let d = delta_bar();
        assert!(!d.is_zero());
        assert_eq!(crate::f2geom::quadratic_form(d), 0);
    }
}
