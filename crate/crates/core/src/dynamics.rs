//! Time integration of the Schrödinger and Lindblad equations.
//!
//! The integrator is an embedded Dormand–Prince 5(4) pair with standard
//! error control (weighted RMS norm, step factor 0.9 err^{-1/5} clamped to
//! [0.2, 5]), plus a fixed-step RK4 for cross-checks. Integration always
//! lands exactly on a uniform sample grid so observable traces have a
//! reproducible schema independent of the internal steps.
//!
//! Hamiltonian parts are compiled once into a compressed sparse row form
//! that skips exact structural zeros of the dense matrices; the arithmetic
//! is unchanged (0 contributions are dropped, nothing is approximated).
//! Ladder operators, Kerr terms and even the cos(φ̂/N) blocks are mostly
//! zeros in the two-mode product basis, which is what makes lab-frame SC
//! runs tractable.
//!
//! Everything is sequential and allocation-stable, so identical inputs give
//! bit-identical trajectories.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertSpace, OperatorMatrix, StateVector};
use crate::hamiltonian::{carrier_step_cap, TimeDependentHamiltonian};

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Adaptive embedded Dormand–Prince 5(4).
    Dp54,
    /// Fixed-step classical RK4 (requires `max_step`).
    Rk4,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on the step size (ns). Lab-frame models additionally cap at
    /// 1/20 of the fastest carrier period.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    /// Renormalize the state (norm or trace) after every accepted step.
    pub renormalize: bool,
    /// Number of points of the uniform sample grid, endpoints included.
    pub samples: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::simple_model()
    }
}

impl SolverSettings {
    /// Defaults for rotating-frame (simple model) runs.
    pub fn simple_model() -> Self {
        Self {
            method: Method::Dp54,
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: None,
            initial_step: None,
            renormalize: false,
            samples: 2001,
        }
    }

    /// Defaults for lab-frame SC runs.
    pub fn sc_model() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            ..Self::simple_model()
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {tol} outside (0, 1e-2]"
                )));
            }
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "samples = {} < 2",
                self.samples
            )));
        }
        if self.method == Method::Rk4 && self.max_step.is_none() {
            return Err(Error::InvalidParameter(
                "fixed-step RK4 requires max_step".into(),
            ));
        }
        if let Some(h) = self.max_step {
            if h <= 0.0 {
                return Err(Error::InvalidParameter(format!("max_step = {h} <= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub rhs_evals: u64,
    pub min_step_used: f64,
    pub max_step_used: f64,
}

/// Sampled observables of one propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Strictly increasing sample times (ns).
    pub times: Vec<f64>,
    /// State norm (pure runs) or trace (density runs) at each sample.
    pub norms: Vec<f64>,
    /// One row per requested observable: Re<O>(t).
    pub observables: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

// ---------------------------------------------------------------------------
// Compressed parts

struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    fn from_dense(m: &Array2<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len() as u32);
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// out += coeff * A x
    ///
    /// Four independent accumulators break the FMA dependency chain; the
    /// split is fixed, so results stay bit-reproducible run to run.
    #[inline]
    fn matvec_acc(&self, coeff: C64, x: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let start = self.row_ptr[i] as usize;
            let end = self.row_ptr[i + 1] as usize;
            let vals = &self.vals[start..end];
            let cols = &self.cols[start..end];
            let mut acc0 = ZERO;
            let mut acc1 = ZERO;
            let mut acc2 = ZERO;
            let mut acc3 = ZERO;
            let mut k = 0;
            while k + 4 <= vals.len() {
                acc0 += vals[k] * x[cols[k] as usize];
                acc1 += vals[k + 1] * x[cols[k + 1] as usize];
                acc2 += vals[k + 2] * x[cols[k + 2] as usize];
                acc3 += vals[k + 3] * x[cols[k + 3] as usize];
                k += 4;
            }
            while k < vals.len() {
                acc0 += vals[k] * x[cols[k] as usize];
                k += 1;
            }
            out[i] += coeff * ((acc0 + acc1) + (acc2 + acc3));
        }
    }

    /// out += coeff * A rho, all matrices d*d row-major flat.
    #[inline]
    fn spmm_acc(&self, coeff: C64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for i in 0..d {
            let out_row = &mut out[i * d..(i + 1) * d];
            let start = self.row_ptr[i] as usize;
            let end = self.row_ptr[i + 1] as usize;
            for idx in start..end {
                let v = coeff * self.vals[idx];
                let k = self.cols[idx] as usize;
                let rho_row = &rho[k * d..(k + 1) * d];
                for (o, r) in out_row.iter_mut().zip(rho_row.iter()) {
                    *o += v * r;
                }
            }
        }
    }

    /// Sum_{ik} A_ik rho_ki (trace of A rho).
    fn trace_with(&self, rho: &[C64]) -> C64 {
        let d = self.dim;
        let mut tr = ZERO;
        for i in 0..d {
            let start = self.row_ptr[i] as usize;
            let end = self.row_ptr[i + 1] as usize;
            for idx in start..end {
                let k = self.cols[idx] as usize;
                tr += self.vals[idx] * rho[k * d + i];
            }
        }
        tr
    }

    /// <x|A|x>.
    fn expectation(&self, x: &[C64]) -> C64 {
        let mut total = ZERO;
        for i in 0..self.dim {
            let start = self.row_ptr[i] as usize;
            let end = self.row_ptr[i + 1] as usize;
            let mut acc = ZERO;
            for idx in start..end {
                acc += self.vals[idx] * x[self.cols[idx] as usize];
            }
            total += x[i].conj() * acc;
        }
        total
    }
}

type Coeff = std::sync::Arc<dyn Fn(f64) -> C64 + Send + Sync>;

struct CompiledHamiltonian {
    parts: Vec<(CsrMatrix, Coeff)>,
}

impl CompiledHamiltonian {
    fn new(h: &TimeDependentHamiltonian) -> Self {
        let parts = h
            .parts()
            .iter()
            .map(|p| (CsrMatrix::from_dense(p.matrix.entries()), p.coeff.clone()))
            .collect();
        Self { parts }
    }

    /// out = factor * H(t) x
    fn apply_vec(&self, t: f64, factor: C64, x: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        for (matrix, coeff) in &self.parts {
            let c = factor * coeff(t);
            if c != ZERO {
                matrix.matvec_acc(c, x, out);
            }
        }
    }

    /// out = H(t) rho (flat row-major).
    fn apply_left(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        for (matrix, coeff) in &self.parts {
            let c = coeff(t);
            if c != ZERO {
                matrix.spmm_acc(c, rho, out);
            }
        }
    }
}

/// Photon-loss dissipator at rate gamma on every mode:
/// (gamma/2) sum_j (2 a_j rho a_j† - n_j rho - rho n_j), applied through the
/// known ladder structure of the product basis.
struct PhotonLossDissipator {
    gamma: f64,
    dim: usize,
    /// Per mode: (occupation of each flat index, flat-index stride of one
    /// quantum, mode dimension).
    modes: Vec<(Vec<u32>, usize, usize)>,
    /// Total occupation of each flat index.
    total_occ: Vec<f64>,
}

impl PhotonLossDissipator {
    fn new(space: &HilbertSpace, gamma: f64) -> Self {
        let dim = space.total_dim();
        let n_modes = space.n_modes();
        let mut modes = Vec::with_capacity(n_modes);
        let mut total_occ = vec![0.0; dim];
        for j in 0..n_modes {
            let d_j = space.mode_dim(j);
            let stride: usize = (j + 1..n_modes).map(|k| space.mode_dim(k)).product();
            let mut occ = vec![0u32; dim];
            for (i, o) in occ.iter_mut().enumerate() {
                *o = ((i / stride) % d_j) as u32;
            }
            for i in 0..dim {
                total_occ[i] += occ[i] as f64;
            }
            modes.push((occ, stride, d_j));
        }
        Self {
            gamma,
            dim,
            modes,
            total_occ,
        }
    }

    /// out += dissipator(rho)
    fn accumulate(&self, rho: &[C64], out: &mut [C64]) {
        if self.gamma == 0.0 {
            return;
        }
        let d = self.dim;
        // -(gamma/2)(n_tot(i) + n_tot(k)) rho_ik
        for i in 0..d {
            let ni = self.total_occ[i];
            let row = &rho[i * d..(i + 1) * d];
            let out_row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                out_row[k] -= 0.5 * self.gamma * (ni + self.total_occ[k]) * row[k];
            }
        }
        // +gamma sqrt((occ_j(i)+1)(occ_j(k)+1)) rho_{i+s, k+s}
        for (occ, stride, d_j) in &self.modes {
            let (stride, d_j) = (*stride, *d_j);
            for i in 0..d {
                let oi = occ[i] as usize;
                if oi + 1 >= d_j {
                    continue;
                }
                let src_i = i + stride;
                let fi = ((oi + 1) as f64).sqrt();
                let out_row = &mut out[i * d..(i + 1) * d];
                let src_row = &rho[src_i * d..(src_i + 1) * d];
                for k in 0..d {
                    let ok = occ[k] as usize;
                    if ok + 1 >= d_j {
                        continue;
                    }
                    let f = self.gamma * fi * ((ok + 1) as f64).sqrt();
                    out_row[k] += f * src_row[k + stride];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

const STAGE_TIMES: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [&[f64]; 6] = [
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// b - b*: weights of the embedded error estimate.
const ERR_W: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Integration {
    y: Vec<C64>,
    stats: SolverStats,
}

/// Weighted RMS of the error vector, Hairer-style:
/// sqrt(mean_i |e_i / (atol + rtol max(|y0_i|, |y1_i|))|^2).
fn error_norm(err: &[C64], y0: &[C64], y1: &[C64], atol: f64, rtol: f64) -> f64 {
    let n = err.len();
    let mut acc = 0.0;
    for i in 0..n {
        let scale = atol + rtol * y0[i].norm().max(y1[i].norm());
        let r = err[i].norm() / scale;
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn integrate_dp54<R, P, S>(
    y0: &[C64],
    sample_times: &[f64],
    settings: &SolverSettings,
    hard_cap: Option<f64>,
    mut rhs: R,
    mut post_accept: P,
    mut on_sample: S,
) -> Result<Integration>
where
    R: FnMut(f64, &[C64], &mut [C64]),
    P: FnMut(&mut [C64]) -> bool,
    S: FnMut(usize, &[C64]),
{
    let n = y0.len();
    let t0 = sample_times[0];
    let t_end = *sample_times.last().expect("non-empty grid");
    let span = t_end - t0;
    let cap = settings
        .max_step
        .unwrap_or(f64::INFINITY)
        .min(hard_cap.unwrap_or(f64::INFINITY))
        .min(span);

    let mut stats = SolverStats {
        min_step_used: f64::INFINITY,
        ..Default::default()
    };
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![ZERO; n]).collect();
    let mut y_stage = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut err = vec![ZERO; n];

    let mut t = t0;
    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut k1_fresh = true;

    // Initial step heuristic: relate the state scale to the derivative scale.
    let mut h = match settings.initial_step {
        Some(h0) => h0.min(cap),
        None => {
            let d0 = error_norm(&y, &y, &y, settings.abs_tol, settings.rel_tol);
            let d1 = error_norm(&k[0], &y, &y, settings.abs_tol, settings.rel_tol);
            let guess = if d1 > 1e-300 {
                0.01 * d0 / d1
            } else {
                1e-6 * span
            };
            guess.clamp(1e-12 * span, cap)
        }
    };

    on_sample(0, &y);

    let mut rejected_last = false;
    for (si, &ts) in sample_times.iter().enumerate().skip(1) {
        while t < ts {
            if !k1_fresh {
                rhs(t, &y, &mut k[0]);
                stats.rhs_evals += 1;
                k1_fresh = true;
            }
            // Stretch slightly oversized final steps so segments always end
            // exactly on a sample time.
            let remaining = ts - t;
            let lands_on_boundary = 1.05 * h >= remaining;
            let h_try = if lands_on_boundary { remaining } else { h };
            if h_try < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }

            // Stages 2..7 (k[6] is the FSAL evaluation at the new point).
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = ZERO;
                    for (j, &a) in A[s - 1].iter().enumerate() {
                        if a != 0.0 {
                            acc += C64::new(a, 0.0) * k[j][i];
                        }
                    }
                    y_stage[i] = y[i] + C64::new(h_try, 0.0) * acc;
                }
                if s == 6 {
                    // y_new is the 5th-order solution (stage-7 state).
                    y_new.copy_from_slice(&y_stage);
                }
                let (done, rest) = k.split_at_mut(s);
                let _ = done;
                rhs(t + STAGE_TIMES[s] * h_try, &y_stage, &mut rest[0]);
                stats.rhs_evals += 1;
            }

            for i in 0..n {
                let mut acc = ZERO;
                for (j, &w) in ERR_W.iter().enumerate() {
                    if w != 0.0 {
                        acc += C64::new(w, 0.0) * k[j][i];
                    }
                }
                err[i] = C64::new(h_try, 0.0) * acc;
            }
            let err_norm = error_norm(&err, &y, &y_new, settings.abs_tol, settings.rel_tol);

            if !err_norm.is_finite() {
                stats.steps_rejected += 1;
                rejected_last = true;
                h = h_try * 0.1;
                k1_fresh = false;
                continue;
            }

            if err_norm <= 1.0 {
                t = if lands_on_boundary { ts } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6); // FSAL
                k1_fresh = true;
                if post_accept(&mut y) {
                    k1_fresh = false;
                }
                stats.steps_accepted += 1;
                stats.min_step_used = stats.min_step_used.min(h_try);
                stats.max_step_used = stats.max_step_used.max(h_try);
                if y.iter().any(|z| !z.is_finite()) {
                    return Err(Error::NonFinite { t });
                }
                let mut factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                if rejected_last {
                    factor = factor.min(1.0);
                }
                rejected_last = false;
                h = (h_try * factor).min(cap);
            } else {
                stats.steps_rejected += 1;
                rejected_last = true;
                let factor = (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
                h = h_try * factor;
            }
        }
        on_sample(si, &y);
    }

    if stats.min_step_used == f64::INFINITY {
        stats.min_step_used = 0.0;
    }
    Ok(Integration { y, stats })
}

fn integrate_rk4<R, P, S>(
    y0: &[C64],
    sample_times: &[f64],
    max_step: f64,
    mut rhs: R,
    mut post_accept: P,
    mut on_sample: S,
) -> Result<Integration>
where
    R: FnMut(f64, &[C64], &mut [C64]),
    P: FnMut(&mut [C64]) -> bool,
    S: FnMut(usize, &[C64]),
{
    let n = y0.len();
    let mut stats = SolverStats {
        min_step_used: f64::INFINITY,
        ..Default::default()
    };
    let mut y = y0.to_vec();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut y_stage = vec![ZERO; n];

    on_sample(0, &y);
    for (si, window) in sample_times.windows(2).enumerate() {
        let (t_a, t_b) = (window[0], window[1]);
        let segment = t_b - t_a;
        let steps = (segment / max_step).ceil().max(1.0) as u64;
        let h = segment / steps as f64;
        for step in 0..steps {
            let t = t_a + h * step as f64;
            rhs(t, &y, &mut k1);
            for i in 0..n {
                y_stage[i] = y[i] + C64::new(0.5 * h, 0.0) * k1[i];
            }
            rhs(t + 0.5 * h, &y_stage, &mut k2);
            for i in 0..n {
                y_stage[i] = y[i] + C64::new(0.5 * h, 0.0) * k2[i];
            }
            rhs(t + 0.5 * h, &y_stage, &mut k3);
            for i in 0..n {
                y_stage[i] = y[i] + C64::new(h, 0.0) * k3[i];
            }
            rhs(t + h, &y_stage, &mut k4);
            for i in 0..n {
                y[i] += C64::new(h / 6.0, 0.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            post_accept(&mut y);
            stats.rhs_evals += 4;
            stats.steps_accepted += 1;
            stats.min_step_used = stats.min_step_used.min(h);
            stats.max_step_used = stats.max_step_used.max(h);
            if y.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite { t });
            }
        }
        on_sample(si + 1, &y);
    }
    if stats.min_step_used == f64::INFINITY {
        stats.min_step_used = 0.0;
    }
    Ok(Integration { y, stats })
}

fn sample_grid(t0: f64, t1: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "time span [{t0}, {t1}] is empty"
        )));
    }
    let n = samples.max(2);
    Ok((0..n)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
        .collect())
}

fn vec_norm(y: &[C64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Propagate the Schrödinger equation i dψ/dt = H(t) ψ from t0 to t1,
/// sampling the requested Hermitian observables on the uniform grid.
pub fn schrodinger_propagate(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    settings: &SolverSettings,
    observables: &[&OperatorMatrix],
) -> Result<(StateVector, Trajectory)> {
    settings.validate()?;
    h.space().check_same(psi0.space())?;
    for obs in observables {
        h.space().check_same(obs.space())?;
    }
    let compiled = CompiledHamiltonian::new(h);
    let obs_csr: Vec<CsrMatrix> = observables
        .iter()
        .map(|o| CsrMatrix::from_dense(o.entries()))
        .collect();

    let times = sample_grid(t0, t1, settings.samples)?;
    let mut norms = Vec::with_capacity(times.len());
    let mut obs_rows: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); obs_csr.len()];

    let y0: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let renorm = settings.renormalize;

    let rhs = |t: f64, y: &[C64], dydt: &mut [C64]| {
        compiled.apply_vec(t, MINUS_I, y, dydt);
    };
    let post = |y: &mut [C64]| {
        if renorm {
            let nrm = vec_norm(y);
            if nrm > 0.0 {
                let inv = C64::new(1.0 / nrm, 0.0);
                y.iter_mut().for_each(|z| *z *= inv);
            }
            true
        } else {
            false
        }
    };
    let on_sample = |_si: usize, y: &[C64]| {
        norms.push(vec_norm(y));
        for (row, csr) in obs_rows.iter_mut().zip(obs_csr.iter()) {
            row.push(csr.expectation(y).re);
        }
    };

    let out = match settings.method {
        Method::Dp54 => integrate_dp54(
            &y0,
            &times,
            settings,
            carrier_step_cap(h),
            rhs,
            post,
            on_sample,
        )?,
        Method::Rk4 => {
            let max_step = settings
                .max_step
                .expect("validated")
                .min(carrier_step_cap(h).unwrap_or(f64::INFINITY));
            integrate_rk4(&y0, &times, max_step, rhs, post, on_sample)?
        }
    };

    let psi = StateVector::new(h.space().clone(), Array1::from_vec(out.y))?;
    Ok((
        psi,
        Trajectory {
            times,
            norms,
            observables: obs_rows,
            stats: out.stats,
        },
    ))
}

/// Propagate the Lindblad master equation
/// dρ/dt = -i[H, ρ] + (γ/2) Σ_j (2 a_j ρ a_j† - a_j†a_j ρ - ρ a_j†a_j)
/// with photon loss at rate γ on every mode. ρ is re-Hermitized after every
/// accepted step; γ = 0 reduces to coherent evolution.
pub fn lindblad_propagate(
    h: &TimeDependentHamiltonian,
    rho0: &DensityMatrix,
    gamma: f64,
    t0: f64,
    t1: f64,
    settings: &SolverSettings,
    observables: &[&OperatorMatrix],
) -> Result<(DensityMatrix, Trajectory)> {
    settings.validate()?;
    h.space().check_same(rho0.space())?;
    for obs in observables {
        h.space().check_same(obs.space())?;
    }
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} < 0")));
    }
    let d = h.space().total_dim();
    let compiled = CompiledHamiltonian::new(h);
    let dissipator = PhotonLossDissipator::new(h.space(), gamma);
    let obs_csr: Vec<CsrMatrix> = observables
        .iter()
        .map(|o| CsrMatrix::from_dense(o.entries()))
        .collect();

    let times = sample_grid(t0, t1, settings.samples)?;
    let mut norms = Vec::with_capacity(times.len());
    let mut obs_rows: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); obs_csr.len()];

    let y0: Vec<C64> = rho0.entries().iter().copied().collect();
    let renorm = settings.renormalize;
    let mut scratch = vec![ZERO; d * d];

    let rhs = move |t: f64, y: &[C64], dydt: &mut [C64]| {
        // M = H(t) rho; -i[H, rho] = -i(M - M†).
        compiled.apply_left(t, y, &mut scratch);
        for i in 0..d {
            for k in 0..d {
                let m_ik = scratch[i * d + k];
                let m_ki = scratch[k * d + i];
                dydt[i * d + k] = MINUS_I * (m_ik - m_ki.conj());
            }
        }
        dissipator.accumulate(y, dydt);
    };
    let post = |y: &mut [C64]| {
        // rho <- (rho + rho†)/2
        for i in 0..d {
            for k in (i + 1)..d {
                let a = y[i * d + k];
                let b = y[k * d + i];
                let sym = 0.5 * (a + b.conj());
                y[i * d + k] = sym;
                y[k * d + i] = sym.conj();
            }
            y[i * d + i] = C64::new(y[i * d + i].re, 0.0);
        }
        if renorm {
            let tr: f64 = (0..d).map(|i| y[i * d + i].re).sum();
            if tr != 0.0 {
                let inv = C64::new(1.0 / tr, 0.0);
                y.iter_mut().for_each(|z| *z *= inv);
            }
        }
        true
    };
    let on_sample = |_si: usize, y: &[C64]| {
        let tr: f64 = (0..d).map(|i| y[i * d + i].re).sum();
        norms.push(tr);
        for (row, csr) in obs_rows.iter_mut().zip(obs_csr.iter()) {
            row.push(csr.trace_with(y).re);
        }
    };

    let out = match settings.method {
        Method::Dp54 => integrate_dp54(
            &y0,
            &times,
            settings,
            carrier_step_cap(h),
            rhs,
            post,
            on_sample,
        )?,
        Method::Rk4 => {
            let max_step = settings
                .max_step
                .expect("validated")
                .min(carrier_step_cap(h).unwrap_or(f64::INFINITY));
            integrate_rk4(&y0, &times, max_step, rhs, post, on_sample)?
        }
    };

    let entries = Array2::from_shape_vec((d, d), out.y)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rho = DensityMatrix::new(h.space().clone(), entries)?;
    Ok((
        rho,
        Trajectory {
            times,
            norms,
            observables: obs_rows,
            stats: out.stats,
        },
    ))
}

/// Propagate each state with the gate-free reference generator U_0 for the
/// gate duration; `h_ref` must be the model with the gate pulse amplitude
/// forced to zero (all other drives unchanged).
pub fn reference_propagate(
    h_ref: &TimeDependentHamiltonian,
    states: &[StateVector],
    t_g: f64,
    settings: &SolverSettings,
) -> Result<Vec<StateVector>> {
    let quiet = SolverSettings {
        samples: 2,
        ..*settings
    };
    states
        .iter()
        .map(|psi| {
            schrodinger_propagate(h_ref, psi, 0.0, t_g, &quiet, &[])
                .map(|(out, _)| out)
                .map_err(|e| e.with_context("reference propagation"))
        })
        .collect()
}
