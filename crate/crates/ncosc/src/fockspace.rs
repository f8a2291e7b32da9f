//! Dense operator matrices over a truncated two-mode Fock basis.
//!
//! Basis ordering is row-major over Cartesian occupation pairs (n_x, n_y):
//! index = n_x·(n_max+1) + n_y. Tensor products put the x mode in the first
//! factor. Truncation corrupts the top occupation shell, so operator
//! identities are asserted on the *interior* subspace (total quanta at most
//! n_max − 2); helpers for that restriction live here as well.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ncspace::{
    effective_params, CouplingConvention, EffectiveParams, NCParams, OscParams,
};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated two-mode Fock basis with per-mode cutoff `n_max` (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_max must be >= 2, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Single-mode dimension n_max + 1.
    pub fn dim_single(&self) -> usize {
        self.n_max + 1
    }

    /// Two-mode dimension (n_max + 1)².
    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn index(&self, n_x: usize, n_y: usize) -> usize {
        debug_assert!(n_x <= self.n_max && n_y <= self.n_max);
        n_x * (self.n_max + 1) + n_y
    }

    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }

    pub fn total_quanta(&self, index: usize) -> usize {
        let (nx, ny) = self.occupation(index);
        nx + ny
    }

    /// Default interior margin: identities are trusted up to total quanta
    /// n_max − 2.
    pub fn interior_total(&self) -> usize {
        self.n_max - 2
    }
}

/// Whether a matrix lives on the single-mode factor or the full two-mode space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpSpace {
    SingleMode,
    TwoMode,
}

/// Dense complex matrix tied to a basis, with a diagnostic label.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    basis: FockBasis,
    space: OpSpace,
    label: String,
    entries: CMat,
}

impl OperatorMatrix {
    pub fn two_mode(basis: FockBasis, label: impl Into<String>, entries: CMat) -> Result<Self> {
        Self::with_space(basis, OpSpace::TwoMode, label, entries)
    }

    pub fn single_mode(basis: FockBasis, label: impl Into<String>, entries: CMat) -> Result<Self> {
        Self::with_space(basis, OpSpace::SingleMode, label, entries)
    }

    fn with_space(
        basis: FockBasis,
        space: OpSpace,
        label: impl Into<String>,
        entries: CMat,
    ) -> Result<Self> {
        let want = match space {
            OpSpace::SingleMode => basis.dim_single(),
            OpSpace::TwoMode => basis.dim(),
        };
        if entries.nrows() != want || entries.ncols() != want {
            return Err(Error::BasisMismatch(format!(
                "matrix is {}x{} but the basis needs {want}x{want}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self {
            basis,
            space,
            label: label.into(),
            entries,
        })
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn space(&self) -> OpSpace {
        self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis || self.space != other.space {
            return Err(Error::BasisMismatch(format!(
                "'{}' and '{}' live on different bases",
                self.label, other.label
            )));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            space: self.space,
            label: format!("{}^dag", self.label),
            entries: self.entries.adjoint(),
        }
    }

    /// max |A − A†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.entries.adjoint();
        (&self.entries - adj).camax()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            basis: self.basis,
            space: self.space,
            label: format!("{}*{}", self.label, other.label),
            entries: mul_zero_aware(&self.entries, &other.entries),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            basis: self.basis,
            space: self.space,
            label: format!("{}+{}", self.label, other.label),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            basis: self.basis,
            space: self.space,
            label: format!("{}-{}", self.label, other.label),
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            basis: self.basis,
            space: self.space,
            label: self.label.clone(),
            entries: &self.entries * factor,
        }
    }

    pub fn identity_like(&self) -> Self {
        Self {
            basis: self.basis,
            space: self.space,
            label: "I".into(),
            entries: CMat::identity(self.dim(), self.dim()),
        }
    }

    /// Apply to a state vector (no normalization).
    pub fn apply(&self, state: &QuantumState) -> Result<CVec> {
        if self.space != OpSpace::TwoMode || state.basis != self.basis {
            return Err(Error::BasisMismatch(format!(
                "cannot apply '{}' to a state over a different basis",
                self.label
            )));
        }
        Ok(&self.entries * &state.amplitudes)
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, state: &QuantumState) -> Result<Complex64> {
        let applied = self.apply(state)?;
        Ok(state.amplitudes.dotc(&applied))
    }

    fn total_quanta_of(&self, index: usize) -> usize {
        match self.space {
            OpSpace::SingleMode => index,
            OpSpace::TwoMode => self.basis.total_quanta(index),
        }
    }

    /// max |A_ij| over rows and columns with total quanta ≤ `max_total`.
    pub fn interior_max_abs(&self, max_total: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.entries.ncols() {
            if self.total_quanta_of(j) > max_total {
                continue;
            }
            for i in 0..self.entries.nrows() {
                if self.total_quanta_of(i) > max_total {
                    continue;
                }
                worst = worst.max(self.entries[(i, j)].norm());
            }
        }
        worst
    }

    /// Frobenius norm of the block with total quanta ≤ `max_total`.
    pub fn interior_frobenius(&self, max_total: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.entries.ncols() {
            if self.total_quanta_of(j) > max_total {
                continue;
            }
            for i in 0..self.entries.nrows() {
                if self.total_quanta_of(i) > max_total {
                    continue;
                }
                acc += self.entries[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Dense copy of the interior block (rows/cols with total quanta ≤ `max_total`).
    pub fn interior_block(&self, max_total: usize) -> CMat {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| self.total_quanta_of(i) <= max_total)
            .collect();
        let mut block = CMat::zeros(idx.len(), idx.len());
        for (bi, &i) in idx.iter().enumerate() {
            for (bj, &j) in idx.iter().enumerate() {
                block[(bi, bj)] = self.entries[(i, j)];
            }
        }
        block
    }
}

/// max |(A − B)_ij| over the interior block.
pub fn interior_residual(a: &OperatorMatrix, b: &OperatorMatrix, max_total: usize) -> Result<f64> {
    Ok(a.sub(b)?.interior_max_abs(max_total))
}

fn nnz(m: &CMat) -> usize {
    m.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count()
}

/// Matrix product that exploits the band sparsity of ladder-built operators
/// (a handful of nonzeros per row). Falls back to the dense kernel when both
/// operands are dense. Summation order is ascending in the contraction index
/// on every path, so results are deterministic and products of a Hermitian
/// matrix with itself stay Hermitian to the bit.
fn mul_zero_aware(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let threshold = n * n / 8;
    let (na, nb) = (nnz(a), nnz(b));
    if na >= threshold && nb >= threshold {
        return a * b;
    }
    let mut c = CMat::zeros(n, n);
    let a_data = a.as_slice();
    let b_data = b.as_slice();
    let c_data = c.as_mut_slice();
    if nb <= na {
        // axpy over the nonzeros of each column of B
        for j in 0..n {
            let bcol = &b_data[j * n..(j + 1) * n];
            let ccol = &mut c_data[j * n..(j + 1) * n];
            for (k, w) in bcol.iter().enumerate() {
                if w.re != 0.0 || w.im != 0.0 {
                    let acol = &a_data[k * n..(k + 1) * n];
                    for (ci, ai) in ccol.iter_mut().zip(acol) {
                        *ci += w * ai;
                    }
                }
            }
        }
    } else {
        // gather the nonzeros of A once, grouped by ascending column
        let mut a_nz: Vec<(usize, usize, Complex64)> = Vec::with_capacity(na);
        for k in 0..n {
            let acol = &a_data[k * n..(k + 1) * n];
            for (i, v) in acol.iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    a_nz.push((i, k, *v));
                }
            }
        }
        for j in 0..n {
            let bcol = &b_data[j * n..(j + 1) * n];
            let ccol = &mut c_data[j * n..(j + 1) * n];
            for &(i, k, v) in &a_nz {
                ccol[i] += v * bcol[k];
            }
        }
    }
    c
}

/// AB − BA.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(ab
        .sub(&ba)?
        .relabeled(format!("[{},{}]", a.label(), b.label())))
}

/// Normalized state over the truncated two-mode basis.
#[derive(Clone, Debug)]
pub struct QuantumState {
    basis: FockBasis,
    amplitudes: CVec,
}

impl QuantumState {
    /// Normalizes the amplitudes; rejects vectors of (near-)zero norm.
    pub fn new(basis: FockBasis, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "state has {} amplitudes but the basis dimension is {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} too small to normalize"
            )));
        }
        Ok(Self {
            basis,
            amplitudes: amplitudes / cre(norm),
        })
    }

    pub fn vacuum(basis: FockBasis) -> Self {
        let mut amplitudes = CVec::zeros(basis.dim());
        amplitudes[basis.index(0, 0)] = cre(1.0);
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(
                "overlap between states over different bases".into(),
            ));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Probability mass on components with total quanta > `max_total`.
    pub fn mass_above(&self, max_total: usize) -> f64 {
        (0..self.amplitudes.len())
            .filter(|&i| self.basis.total_quanta(i) > max_total)
            .map(|i| self.amplitudes[i].norm_sqr())
            .sum()
    }
}

/// Single-mode lowering/raising matrices: a[n−1, n] = √n.
pub fn ladder_1d(n_max: usize) -> Result<(CMat, CMat)> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_max must be >= 2, got {n_max}"
        )));
    }
    let dim = n_max + 1;
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = cre((n as f64).sqrt());
    }
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Cartesian mode operators a_x = a ⊗ I, a_y = I ⊗ a and their adjoints.
pub struct ModeOperators {
    pub a_x: OperatorMatrix,
    pub a_x_dag: OperatorMatrix,
    pub a_y: OperatorMatrix,
    pub a_y_dag: OperatorMatrix,
}

pub fn mode_operators(basis: FockBasis) -> ModeOperators {
    let (a, a_dag) = ladder_1d(basis.n_max()).expect("basis guarantees n_max >= 2");
    let id = CMat::identity(basis.dim_single(), basis.dim_single());
    let mk = |m: CMat, label: &str| {
        OperatorMatrix::two_mode(basis, label, m).expect("kronecker dims are consistent")
    };
    ModeOperators {
        a_x: mk(a.kronecker(&id), "a_x"),
        a_x_dag: mk(a_dag.kronecker(&id), "a_x^dag"),
        a_y: mk(id.kronecker(&a), "a_y"),
        a_y_dag: mk(id.kronecker(&a_dag), "a_y^dag"),
    }
}

/// Left/right circular annihilation operators
/// a_g = (a_x − i·a_y)/√2, a_d = (a_x + i·a_y)/√2.
pub fn circular_operators(
    a_x: &OperatorMatrix,
    a_y: &OperatorMatrix,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let inv_sqrt2 = cre(1.0 / 2.0f64.sqrt());
    let a_g = a_x
        .sub(&a_y.scale(I))?
        .scale(inv_sqrt2)
        .relabeled("a_g");
    let a_d = a_x
        .add(&a_y.scale(I))?
        .scale(inv_sqrt2)
        .relabeled("a_d");
    Ok((a_g, a_d))
}

/// Position and momentum matrices in the oscillator basis scaled by the
/// effective parameters: x = √(ħ/2MΩ)(a_x + a_x†), p_x = i√(ħMΩ/2)(a_x† − a_x).
pub struct PhaseSpaceOperators {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub p_x: OperatorMatrix,
    pub p_y: OperatorMatrix,
}

pub fn position_momentum(
    eff: &EffectiveParams,
    hbar: f64,
    basis: FockBasis,
) -> PhaseSpaceOperators {
    let ops = mode_operators(basis);
    let len = cre((hbar / (2.0 * eff.mass_eff * eff.omega_eff)).sqrt());
    let mom = I * cre((hbar * eff.mass_eff * eff.omega_eff / 2.0).sqrt());
    let x = ops
        .a_x
        .add(&ops.a_x_dag)
        .expect("same basis")
        .scale(len)
        .relabeled("x");
    let y = ops
        .a_y
        .add(&ops.a_y_dag)
        .expect("same basis")
        .scale(len)
        .relabeled("y");
    let p_x = ops
        .a_x_dag
        .sub(&ops.a_x)
        .expect("same basis")
        .scale(mom)
        .relabeled("p_x");
    let p_y = ops
        .a_y_dag
        .sub(&ops.a_y)
        .expect("same basis")
        .scale(mom)
        .relabeled("p_y");
    PhaseSpaceOperators { x, y, p_x, p_y }
}

/// Bopp-shifted operators:
/// x̂ = x − (θ/2)p_y, ŷ = y + (θ/2)p_x, p̂_x = p_x + (θ̄/2)y, p̂_y = p_y − (θ̄/2)x.
pub struct BoppOperators {
    pub x_hat: OperatorMatrix,
    pub y_hat: OperatorMatrix,
    pub px_hat: OperatorMatrix,
    pub py_hat: OperatorMatrix,
}

pub fn bopp_shift(ops: &PhaseSpaceOperators, nc: &NCParams) -> BoppOperators {
    let ht = cre(nc.theta() / 2.0);
    let hb = cre(nc.theta_bar() / 2.0);
    BoppOperators {
        x_hat: ops
            .x
            .sub(&ops.p_y.scale(ht))
            .expect("same basis")
            .relabeled("x_hat"),
        y_hat: ops
            .y
            .add(&ops.p_x.scale(ht))
            .expect("same basis")
            .relabeled("y_hat"),
        px_hat: ops
            .p_x
            .add(&ops.y.scale(hb))
            .expect("same basis")
            .relabeled("px_hat"),
        py_hat: ops
            .p_y
            .sub(&ops.x.scale(hb))
            .expect("same basis")
            .relabeled("py_hat"),
    }
}

/// L_z = x·p_y − y·p_x. x commutes with p_y, so there is no ordering ambiguity;
/// the prefactors cancel, making the matrix independent of (M, Ω).
pub fn angular_momentum(ops: &PhaseSpaceOperators) -> OperatorMatrix {
    let xpy = ops.x.matmul(&ops.p_y).expect("same basis");
    let ypx = ops.y.matmul(&ops.p_x).expect("same basis");
    xpy.sub(&ypx).expect("same basis").relabeled("L_z")
}

/// Circular number operators N_g = a_g†a_g, N_d = a_d†a_d.
pub fn number_operators(basis: FockBasis) -> (OperatorMatrix, OperatorMatrix) {
    let ops = mode_operators(basis);
    let (a_g, a_d) = circular_operators(&ops.a_x, &ops.a_y).expect("same basis");
    let n_g = a_g
        .adjoint()
        .matmul(&a_g)
        .expect("same basis")
        .relabeled("N_g");
    let n_d = a_d
        .adjoint()
        .matmul(&a_d)
        .expect("same basis")
        .relabeled("N_d");
    (n_g, n_d)
}

/// Hamiltonian assembled from the Bopp-shifted matrices:
/// H = (1/2m)(p̂_x² + p̂_y²) + (mω²/2)(x̂² + ŷ²).
pub fn hamiltonian_direct(osc: &OscParams, nc: &NCParams, basis: FockBasis) -> OperatorMatrix {
    let eff = effective_params(osc, nc);
    let ops = position_momentum(&eff, nc.hbar(), basis);
    let bopp = bopp_shift(&ops, nc);
    let kin = bopp
        .px_hat
        .matmul(&bopp.px_hat)
        .and_then(|pxx| {
            bopp.py_hat
                .matmul(&bopp.py_hat)
                .and_then(|pyy| pxx.add(&pyy))
        })
        .expect("same basis");
    let pot = bopp
        .x_hat
        .matmul(&bopp.x_hat)
        .and_then(|xx| bopp.y_hat.matmul(&bopp.y_hat).and_then(|yy| xx.add(&yy)))
        .expect("same basis");
    let m = osc.mass();
    let w = osc.omega();
    kin.scale(cre(0.5 / m))
        .add(&pot.scale(cre(0.5 * m * w * w)))
        .expect("same basis")
        .relabeled("H_direct")
}

/// Hamiltonian in circular number-operator form:
/// H = ħΩ(N_g + N_d + 1) − c·κ(N_g − N_d).
pub fn hamiltonian_ladder(
    osc: &OscParams,
    nc: &NCParams,
    basis: FockBasis,
    convention: CouplingConvention,
) -> OperatorMatrix {
    let eff = effective_params(osc, nc);
    let (n_g, n_d) = number_operators(basis);
    let id = n_g.identity_like();
    let c = convention.factor(nc.hbar());
    let sum = n_g.add(&n_d).and_then(|s| s.add(&id)).expect("same basis");
    let diff = n_g.sub(&n_d).expect("same basis");
    sum.scale(cre(nc.hbar() * eff.omega_eff))
        .sub(&diff.scale(cre(c * eff.kappa)))
        .expect("same basis")
        .relabeled("H_ladder")
}

/// Normalized circular eigenstate (a_g†)^{n_g}(a_d†)^{n_d}|0,0⟩ / √(n_g!n_d!).
pub fn eigenstate_circular(n_g: usize, n_d: usize, basis: FockBasis) -> Result<QuantumState> {
    if n_g + n_d > basis.n_max() {
        return Err(Error::TruncationOverflow(format!(
            "n_g + n_d = {} exceeds the basis cutoff n_max = {}",
            n_g + n_d,
            basis.n_max()
        )));
    }
    let ops = mode_operators(basis);
    let (a_g, a_d) = circular_operators(&ops.a_x, &ops.a_y)?;
    let g_dag = a_g.adjoint();
    let d_dag = a_d.adjoint();
    let mut v = QuantumState::vacuum(basis).amplitudes;
    for _ in 0..n_g {
        v = g_dag.entries() * v;
    }
    for _ in 0..n_d {
        v = d_dag.entries() * v;
    }
    QuantumState::new(basis, v)
}
