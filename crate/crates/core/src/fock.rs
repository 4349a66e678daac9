//! Truncated-Fock-space linear algebra.
//!
//! States and operators live on a [`HilbertSpace`]: an ordered list of
//! per-mode truncation dimensions. Multi-mode operators are embedded by
//! Kronecker products in mode order (mode 0 is the slowest index). Everything
//! is dense; the largest spaces used by the gate simulations are a few
//! hundred to ~1600 dimensions, where dense storage and eigendecomposition
//! are simple and fast enough.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for Hermiticity checks on constructed operators.
pub const HERMITICITY_RTOL: f64 = 1e-12;

/// Ordered list of per-mode Fock truncation dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(mode_dims: &[usize]) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidParameter("no modes given".into()));
        }
        if let Some(&d) = mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidParameter(format!(
                "mode dimension {d} < 2"
            )));
        }
        Ok(Self {
            mode_dims: mode_dims.to_vec(),
        })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(&[dim])
    }

    pub fn two(dim1: usize, dim2: usize) -> Result<Self> {
        Self::new(&[dim1, dim2])
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.mode_dims[mode]
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            Err(Error::InvalidMode {
                mode,
                n_modes: self.n_modes(),
            })
        } else {
            Ok(())
        }
    }

    /// Two spaces are compatible only if mode dimensions agree elementwise.
    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.mode_dims, other.mode_dims
            )))
        }
    }
}

/// Dense complex matrix tagged with its Hilbert space.
///
/// Units are angular frequency (rad/ns, ħ = 1) when the matrix represents a
/// Hamiltonian, dimensionless otherwise.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpace, entries: Array2<C64>) -> Result<Self> {
        let d = space.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "matrix is {}x{} but space dimension is {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { space, entries })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            entries: Array2::zeros((d, d)),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            entries: Array2::eye(d),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            entries: linalg::adjoint(&self.entries),
        }
    }

    /// Max |M - M^dag|, absolute.
    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.entries)
    }

    /// Hermitian within `HERMITICITY_RTOL` relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        let scale = linalg::max_abs(&self.entries).max(1.0);
        self.hermiticity_deviation() < HERMITICITY_RTOL * scale
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let scale = linalg::max_abs(&self.entries).max(1.0);
        let dev = self.hermiticity_deviation();
        let bound = HERMITICITY_RTOL * scale;
        if dev < bound {
            Ok(())
        } else {
            Err(Error::NonHermitian {
                deviation: dev,
                bound,
            })
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            entries: self.entries.dot(&other.entries),
        })
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let ab = self.entries.dot(&other.entries);
        let ba = other.entries.dot(&self.entries);
        Ok(Self {
            space: self.space.clone(),
            entries: ab - ba,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            entries: self.entries.mapv(|z| z * c),
        }
    }

    pub fn scaled_re(&self, c: f64) -> Self {
        self.scaled(C64::new(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            entries: &self.entries - &other.entries,
        })
    }

    /// Add `c * I` in place.
    pub fn add_scalar(&mut self, c: C64) {
        for i in 0..self.entries.nrows() {
            self.entries[(i, i)] += c;
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// Dense matrix-vector application.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.space.check_same(&psi.space)?;
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: self.entries.dot(&psi.amplitudes),
        })
    }

    /// <psi|M|psi>.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let applied = self.apply(psi)?;
        psi.inner(&applied)
    }

    /// Expectation of a Hermitian operator; the imaginary part (roundoff)
    /// must be below 1e-9 relative to scale.
    pub fn expectation_real(&self, psi: &StateVector) -> Result<f64> {
        let v = self.expectation(psi)?;
        let scale = v.norm().max(1.0);
        if v.im.abs() > 1e-9 * scale {
            return Err(Error::NonHermitian {
                deviation: v.im.abs(),
                bound: 1e-9 * scale,
            });
        }
        Ok(v.re)
    }
}

/// Complex amplitude vector on a Hilbert space.
#[derive(Debug, Clone)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn new(space: HilbertSpace, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::SpaceMismatch(format!(
                "vector length {} vs space dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        Ok(Self { space, amplitudes })
    }

    /// Fock basis state |n_0, n_1, ...>.
    pub fn basis(space: &HilbertSpace, occupations: &[usize]) -> Result<Self> {
        if occupations.len() != space.n_modes() {
            return Err(Error::InvalidParameter(format!(
                "{} occupation numbers for {} modes",
                occupations.len(),
                space.n_modes()
            )));
        }
        let mut index = 0;
        for (j, &n) in occupations.iter().enumerate() {
            if n >= space.mode_dim(j) {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} outside mode dimension {}",
                    space.mode_dim(j)
                )));
            }
            index = index * space.mode_dim(j) + n;
        }
        let mut amplitudes = Array1::zeros(space.total_dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.mapv_inplace(|z| z / n);
        }
        self
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            amplitudes: self.amplitudes.mapv(|z| z * c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes - &other.amplitudes,
        })
    }
}

/// Dense density matrix on a Hilbert space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: HilbertSpace,
    entries: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, entries: Array2<C64>) -> Result<Self> {
        let d = space.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "matrix is {}x{} but space dimension is {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { space, entries })
    }

    /// |psi><psi|.
    pub fn from_pure(psi: &StateVector) -> Self {
        let d = psi.amplitudes.len();
        let mut entries = Array2::zeros((d, d));
        for (i, a) in psi.amplitudes.iter().enumerate() {
            for (j, b) in psi.amplitudes.iter().enumerate() {
                entries[(i, j)] = a * b.conj();
            }
        }
        Self {
            space: psi.space.clone(),
            entries,
        }
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        let entries = Array2::eye(d) * C64::new(1.0 / d as f64, 0.0);
        Self {
            space: space.clone(),
            entries,
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.entries)
    }

    /// tr(M rho).
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        self.space.check_same(&op.space)?;
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..self.entries.nrows() {
            for k in 0..self.entries.ncols() {
                tr += op.entries[(i, k)] * self.entries[(k, i)];
            }
        }
        Ok(tr)
    }

    /// <psi|rho|psi>.
    pub fn sandwich(&self, psi: &StateVector) -> Result<C64> {
        self.space.check_same(&psi.space)?;
        let v = self.entries.dot(&psi.amplitudes);
        Ok(psi
            .amplitudes
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// <bra|rho|ket>, the coherence between two states.
    pub fn coherence(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        self.space.check_same(&bra.space)?;
        self.space.check_same(&ket.space)?;
        let v = self.entries.dot(&ket.amplitudes);
        Ok(bra
            .amplitudes
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Smallest eigenvalue (rho is symmetrized first to absorb integrator
    /// roundoff).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.entries + &linalg::adjoint(&self.entries)).mapv(|z| z * 0.5);
        let (vals, _) = linalg::eigh(&herm)?;
        Ok(vals[0])
    }
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Tensor product of two operators; the result lives on the concatenated
/// space.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let mut dims = a.space.mode_dims.clone();
    dims.extend_from_slice(&b.space.mode_dims);
    OperatorMatrix {
        space: HilbertSpace { mode_dims: dims },
        entries: kron(&a.entries, &b.entries),
    }
}

/// Tensor product of two states.
pub fn tensor_states(a: &StateVector, b: &StateVector) -> StateVector {
    let mut dims = a.space.mode_dims.clone();
    dims.extend_from_slice(&b.space.mode_dims);
    StateVector {
        space: HilbertSpace { mode_dims: dims },
        amplitudes: kron_vec(&a.amplitudes, &b.amplitudes),
    }
}

/// Embed a single-mode operator into `space` acting on `mode`, identity on
/// the rest (Kronecker product in mode order).
pub fn embed(space: &HilbertSpace, mode: usize, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    if op.space.n_modes() != 1 || op.space.mode_dim(0) != space.mode_dim(mode) {
        return Err(Error::SpaceMismatch(format!(
            "embedding a {}-dim single-mode operator at mode {mode} of dimension {}",
            op.dim(),
            space.mode_dim(mode)
        )));
    }
    let mut entries = Array2::eye(1);
    for (j, &d) in space.mode_dims.iter().enumerate() {
        if j == mode {
            entries = kron(&entries, &op.entries);
        } else {
            entries = kron(&entries, &Array2::eye(d));
        }
    }
    Ok(OperatorMatrix {
        space: space.clone(),
        entries,
    })
}

fn single_mode_annihilation(dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Annihilation operator on `mode`: <n-1|a|n> = sqrt(n), identity on the
/// other modes.
pub fn annihilation(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.mode_dim(mode);
    let single = OperatorMatrix {
        space: HilbertSpace { mode_dims: vec![d] },
        entries: single_mode_annihilation(d),
    };
    embed(space, mode, &single)
}

/// Creation operator a^dag on `mode`.
pub fn creation(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(annihilation(space, mode)?.dagger())
}

/// Number operator a^dag a on `mode`.
pub fn number(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.mode_dim(mode);
    let mut entries = Array2::zeros((d, d));
    for n in 0..d {
        entries[(n, n)] = C64::new(n as f64, 0.0);
    }
    let single = OperatorMatrix {
        space: HilbertSpace { mode_dims: vec![d] },
        entries,
    };
    embed(space, mode, &single)
}

/// Hermitian quadrature a^dag + a on `mode`.
pub fn quadrature_x(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    let a = annihilation(space, mode)?;
    a.dagger().add(&a)
}

/// Hermitian quadrature i(a^dag - a) on `mode`.
pub fn quadrature_p(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    let a = annihilation(space, mode)?;
    Ok(a.dagger().sub(&a)?.scaled(C64::new(0.0, 1.0)))
}

/// Cooper-pair number and phase operators for a transmon mode:
///
/// n = i (E~_J / 32 N E_C)^{1/4} (a^dag - a),
/// phi = (2 N E_C / E~_J)^{1/4} (a^dag + a),
///
/// where E~_J is the effective (flux-biased) Josephson energy. Both are
/// Hermitian; [phi, n] = i except at the truncation corner.
pub fn charge_phase_operators(
    space: &HilbertSpace,
    mode: usize,
    e_c: f64,
    ej_eff: f64,
    n_squid: u32,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if e_c <= 0.0 || ej_eff <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "charge/phase operators need positive energies (E_C = {e_c}, E~_J = {ej_eff})"
        )));
    }
    if n_squid < 1 {
        return Err(Error::InvalidParameter("SQUID count must be >= 1".into()));
    }
    let n = n_squid as f64;
    let charge_pref = (ej_eff / (32.0 * n * e_c)).powf(0.25);
    let phase_pref = (2.0 * n * e_c / ej_eff).powf(0.25);
    let charge = quadrature_p(space, mode)?.scaled_re(charge_pref);
    let phase = quadrature_x(space, mode)?.scaled_re(phase_pref);
    Ok((charge, phase))
}

/// f(M) for Hermitian M via eigendecomposition: U f(Lambda) U^dag.
///
/// Unconditionally stable for bounded f of an unbounded quadrature (the use
/// case is cos(phi/N)); the result is re-symmetrized to absorb roundoff.
pub fn operator_function<F: Fn(f64) -> f64>(op: &OperatorMatrix, f: F) -> Result<OperatorMatrix> {
    op.check_hermitian()?;
    let (vals, vecs) = linalg::eigh(&op.entries)?;
    let fvals = vals.mapv(|v| C64::new(f(v), 0.0));
    let lam = Array2::from_diag(&fvals);
    let rec = vecs.dot(&lam).dot(&linalg::adjoint(&vecs));
    let herm = (&rec + &linalg::adjoint(&rec)).mapv(|z| z * 0.5);
    Ok(OperatorMatrix {
        space: op.space.clone(),
        entries: herm,
    })
}

fn coherent_amplitudes(dim: usize, alpha: C64) -> (Array1<C64>, f64) {
    // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built by stable recursion.
    let mut amps = Array1::zeros(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..dim {
        amps[n] = c;
        mass += c.norm_sqr();
        c = c * alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    let tail = (1.0 - mass).max(0.0);
    (amps, tail)
}

/// Probability mass of a coherent state beyond the truncation, summed over
/// modes. The recommended truncation rule keeps this below 1e-8.
pub fn coherent_tail_mass(space: &HilbertSpace, alphas: &[C64]) -> f64 {
    let mut tail = 0.0;
    for (j, &alpha) in alphas.iter().enumerate() {
        let (_, t) = coherent_amplitudes(space.mode_dim(j), alpha);
        tail += t;
    }
    tail
}

/// Product of truncated coherent states |alpha_0, alpha_1, ...>, renormalized
/// after truncation.
pub fn coherent_state(space: &HilbertSpace, alphas: &[C64]) -> Result<StateVector> {
    if alphas.len() != space.n_modes() {
        return Err(Error::InvalidParameter(format!(
            "{} amplitudes for {} modes",
            alphas.len(),
            space.n_modes()
        )));
    }
    let mut amplitudes = Array1::from_elem(1, C64::new(1.0, 0.0));
    for (j, &alpha) in alphas.iter().enumerate() {
        let (amps, _) = coherent_amplitudes(space.mode_dim(j), alpha);
        amplitudes = kron_vec(&amplitudes, &amps);
    }
    Ok(StateVector {
        space: space.clone(),
        amplitudes,
    }
    .normalized())
}

/// Recommended per-mode truncation for coherent amplitude |alpha|:
/// D >= |alpha|^2 + 5|alpha| + 10.
pub fn fock_dim_for_amplitude(alpha_abs: f64) -> usize {
    (alpha_abs * alpha_abs + 5.0 * alpha_abs + 10.0).ceil() as usize
}

/// Copy a state into a larger space (same mode count, each target dimension
/// at least the source dimension), zero-padding the new Fock levels. Used to
/// compare runs across truncation bumps.
pub fn embed_state(psi: &StateVector, target: &HilbertSpace) -> Result<StateVector> {
    let src = psi.space();
    if src.n_modes() != target.n_modes() {
        return Err(Error::SpaceMismatch(format!(
            "{} modes vs {} modes",
            src.n_modes(),
            target.n_modes()
        )));
    }
    for j in 0..src.n_modes() {
        if target.mode_dim(j) < src.mode_dim(j) {
            return Err(Error::SpaceMismatch(format!(
                "target mode {j} dimension {} smaller than source {}",
                target.mode_dim(j),
                src.mode_dim(j)
            )));
        }
    }
    let mut amplitudes = Array1::zeros(target.total_dim());
    for (i, &amp) in psi.amplitudes().iter().enumerate() {
        // Decode occupations in the source space, re-encode in the target.
        let mut rem = i;
        let mut occ = vec![0usize; src.n_modes()];
        for j in (0..src.n_modes()).rev() {
            occ[j] = rem % src.mode_dim(j);
            rem /= src.mode_dim(j);
        }
        let mut idx = 0usize;
        for j in 0..target.n_modes() {
            idx = idx * target.mode_dim(j) + occ[j];
        }
        amplitudes[idx] = amp;
    }
    StateVector::new(target.clone(), amplitudes)
}

/// The two-mode cat pair used as R_zz computational superpositions:
///
/// |psi_even> ∝ |alpha, alpha> + |-alpha, -alpha>,
/// |psi_odd>  ∝ |alpha, -alpha> + |-alpha, alpha>,
///
/// both normalized. `alpha` is real (alpha = sqrt(P/K)).
pub fn cat_pair_states(space: &HilbertSpace, alpha: f64) -> Result<(StateVector, StateVector)> {
    if space.n_modes() != 2 {
        return Err(Error::InvalidParameter(format!(
            "cat pair needs a two-mode space, got {} modes",
            space.n_modes()
        )));
    }
    let a = C64::new(alpha, 0.0);
    let pp = coherent_state(space, &[a, a])?;
    let mm = coherent_state(space, &[-a, -a])?;
    let pm = coherent_state(space, &[a, -a])?;
    let mp = coherent_state(space, &[-a, a])?;
    let even = pp.add(&mm)?.normalized();
    let odd = pm.add(&mp)?.normalized();
    Ok((even, odd))
}
