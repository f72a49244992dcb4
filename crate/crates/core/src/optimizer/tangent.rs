//! Rotation paths through a projection along a tangent direction.
//!
//! For a partial isometry `v` from `range(e)` into `range(1−e)`, the
//! matrices `p = v*v`, `q = vv*`, `v`, `v*` span a copy of `M₂`, and
//! `e(θ) = e − p + cos²θ p + sin²θ q + sinθ cosθ (v + v*)` is a projection
//! for every `θ` with `e(0) = e` and `ė(0) = v + v*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, ProjectionMatrix, C64};
use crate::random::{complex_normal, seeded};

const PROJECTION_TOL: f64 = 1e-10;
const STEPS: [f64; 2] = [1e-2, 1e-3];

#[derive(Clone, Debug)]
pub struct TangentProbe {
    e: ProjectionMatrix,
    v: CMatrix,
    p: CMatrix,
    q: CMatrix,
    z: HermitianMatrix,
}

impl TangentProbe {
    /// Checks that `v = (1−e) v e` and that `v*v` is a projection.
    pub fn new(e: ProjectionMatrix, v: CMatrix) -> Result<Self> {
        v.check_dim(e.dim())?;
        let f = e.complement();
        let offset = v.dist(&(f.matrix() * &(&v * e.matrix())));
        if offset > PROJECTION_TOL {
            return Err(Error::Precondition(format!("v does not map range(e) into range(1-e), residual {offset:.3e}")));
        }
        let p = &v.adjoint() * &v;
        ProjectionMatrix::new(p.clone())?;
        let q = &v * &v.adjoint();
        let z = HermitianMatrix::symmetrized(&(&v + &v.adjoint()));
        Ok(TangentProbe { e, v, p, q, z })
    }

    pub fn e(&self) -> &ProjectionMatrix {
        &self.e
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// The tangent direction `v + v*`.
    pub fn z(&self) -> &HermitianMatrix {
        &self.z
    }

    pub fn at(&self, theta: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        let base = self.e.matrix() - &self.p;
        let rot = &(&self.p.scale_re(c * c) + &self.q.scale_re(s * s)) + &self.z.scale_re(s * c);
        &base + &rot
    }

    /// Error of the symmetric difference quotient at step `h` against `Z`.
    pub fn quotient_error(&self, h: f64) -> f64 {
        let dq = (&self.at(h) - &self.at(-h)).scale_re(0.5 / h);
        dq.dist(&self.z)
    }

    pub fn report(&self) -> TangentReport {
        let samples = 16;
        let projection_residual = (0..=samples)
            .map(|k| {
                let m = self.at(std::f64::consts::PI * k as f64 / samples as f64);
                m.dist(&(&m * &m)).max(m.dist(&m.adjoint()))
            })
            .fold(0.0, f64::max);
        let e = self.e.matrix();
        let f = self.e.complement();
        let corner = (e * &(&**self.z() * e)).hs_norm().max((f.matrix() * &(&**self.z() * f.matrix())).hs_norm());
        let start_residual = self.at(0.0).dist(e);
        let coarse = self.quotient_error(STEPS[0]);
        let fine = self.quotient_error(STEPS[1]);
        let ratio = coarse / fine;
        let passed = projection_residual <= PROJECTION_TOL
            && corner <= PROJECTION_TOL
            && start_residual <= PROJECTION_TOL
            && (50.0..=200.0).contains(&ratio);
        TangentReport {
            rank: self.p.trace().re.round() as usize,
            z_norm: self.z.hs_norm(),
            projection_residual,
            corner_residual: corner,
            start_residual,
            steps: STEPS,
            quotient_errors: [coarse, fine],
            error_ratio: ratio,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    /// Rank of `v*v`.
    pub rank: usize,
    pub z_norm: f64,
    /// Worst `max(‖e(θ)² − e(θ)‖, ‖e(θ)* − e(θ)‖)` over `θ ∈ [0, π]`.
    pub projection_residual: f64,
    /// `max(‖eZe‖, ‖(1−e)Z(1−e)‖)`.
    pub corner_residual: f64,
    pub start_residual: f64,
    pub steps: [f64; 2],
    pub quotient_errors: [f64; 2],
    /// Close to `(h₁/h₂)² = 100` for a second-order quotient.
    pub error_ratio: f64,
    pub passed: bool,
}

/// Polar part `U V*` of a Ginibre `rows × cols` matrix.
fn random_isometry(rng: &mut crate::random::SeededRng, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    let g = DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng));
    let svd = g.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::EigenFailure { dim: rows.max(cols) }),
    }
}

/// Probe along a random partial isometry from `range(e)` into `range(1−e)`.
pub fn tangent_probe(e: &ProjectionMatrix, seed: u64) -> Result<TangentReport> {
    let qe = e.range_basis()?;
    let qf = e.complement().range_basis()?;
    if qe.ncols() == 0 || qf.ncols() == 0 {
        return Err(Error::Precondition("tangent probe needs 0 < τ(e) < 1".into()));
    }
    let mut rng = seeded(seed);
    let w = random_isometry(&mut rng, qf.ncols(), qe.ncols())?;
    let v = CMatrix::new(&qf * w * qe.adjoint())?;
    Ok(TangentProbe::new(e.clone(), v)?.report())
}
