//! First Dirichlet eigenvalue of −Δ_g on geodesic balls, and the ball limit λ₁(M).

use crate::discretization::radial_weights;
use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;

/// Iteration controls for the inverse power method.
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Relative residual `‖Ky − λMy‖_{M⁻¹} / (λ‖y‖_M)` at which iteration stops.
    pub tol: f64,
    /// Residual accepted once the iteration has stalled at rounding level.
    pub stall_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            tol: 1e-11,
            stall_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BallEigen {
    pub eigenvalue: f64,
    /// Values at r_i = iR/Nr, i = 0..=Nr; positive inside, zero at r = R, unit L²(B_R) norm.
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

// Solves the symmetric tridiagonal system with diagonal `d` and off-diagonal `e` in place of `rhs`.
pub(crate) fn thomas(d: &[f64], e: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    scratch[0] = e.first().copied().unwrap_or(0.0) / d[0];
    rhs[0] /= d[0];
    for i in 1..n {
        let denom = d[i] - e[i - 1] * scratch[i - 1];
        if i + 1 < n {
            scratch[i] = e[i] / denom;
        }
        rhs[i] = (rhs[i] - e[i - 1] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Stiffness (diagonal, off-diagonal) and diagonal mass of the radial Dirichlet problem on
/// `B_R`, unknowns at r_0..r_{Nr−1}, natural (Neumann) condition at the pole.
pub fn radial_operator(model: &ManifoldModel, r: f64, nr: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mass, stiff) = radial_weights(model, r, nr);
    let omega = model.omega();
    let mut diag = vec![0.0; nr];
    let mut off = vec![0.0; nr - 1];
    for (i, &k) in stiff.iter().enumerate() {
        let k = omega * k;
        diag[i] += k;
        if i + 1 < nr {
            diag[i + 1] += k;
            off[i] = -k;
        }
    }
    let m = mass[..nr].iter().map(|v| omega * v).collect();
    (diag, off, m)
}

pub fn lambda1_ball(model: &ManifoldModel, r: f64, nr: usize) -> Result<BallEigen> {
    lambda1_ball_with(model, r, nr, EigenOptions::default())
}

pub fn lambda1_ball_with(
    model: &ManifoldModel,
    r: f64,
    nr: usize,
    opts: EigenOptions,
) -> Result<BallEigen> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "ball radius must be positive, got {r}"
        )));
    }
    if nr < 64 {
        return Err(Error::Config(format!(
            "radial eigenproblem needs Nr >= 64, got {nr}"
        )));
    }
    discrete_lambda1(model, r, nr, opts)
}

/// [`lambda1_ball_with`] without the resolution floor, for matching a solver grid exactly.
pub(crate) fn discrete_lambda1(
    model: &ManifoldModel,
    r: f64,
    nr: usize,
    opts: EigenOptions,
) -> Result<BallEigen> {
    let (diag, off, mass) = radial_operator(model, r, nr);
    if diag.iter().chain(&mass).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "radial operator",
            r,
        });
    }

    let apply_k = |y: &[f64], out: &mut [f64]| {
        for i in 0..nr {
            let mut v = diag[i] * y[i];
            if i > 0 {
                v += off[i - 1] * y[i - 1];
            }
            if i + 1 < nr {
                v += off[i] * y[i + 1];
            }
            out[i] = v;
        }
    };
    let m_norm = |y: &[f64]| {
        y.iter()
            .zip(&mass)
            .map(|(a, m)| m * a * a)
            .sum::<f64>()
            .sqrt()
    };

    let mut y: Vec<f64> = (0..nr)
        .map(|i| (0.5 * std::f64::consts::PI * i as f64 / nr as f64).cos())
        .collect();
    let mut ky = vec![0.0; nr];
    let mut scratch = vec![0.0; nr];
    let mut residual = f64::INFINITY;
    let mut best = (f64::INFINITY, 0usize);
    for it in 1..=opts.max_iterations {
        let norm = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= norm);
        apply_k(&y, &mut ky);
        let lambda = ky.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        residual = ky
            .iter()
            .zip(&y)
            .zip(&mass)
            .map(|((k, v), m)| {
                let d = k - lambda * m * v;
                d * d / m
            })
            .sum::<f64>()
            .sqrt()
            / lambda;
        if residual < 0.999 * best.0 {
            best = (residual, it);
        }
        // Past the rounding floor the residual stops improving.
        let stalled = it - best.1 >= 50;
        if residual <= opts.tol || (stalled && residual <= opts.stall_tol) {
            let mut eigenfunction = y.clone();
            eigenfunction.push(0.0);
            return Ok(BallEigen {
                eigenvalue: lambda,
                eigenfunction,
                iterations: it,
                residual,
            });
        }
        for (v, m) in y.iter_mut().zip(&mass) {
            *v *= m;
        }
        thomas(&diag, &off, &mut y, &mut scratch);
    }
    Err(Error::NonConvergence {
        what: "inverse power iteration",
        iterations: opts.max_iterations,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct SpectralSweep {
    /// (R, λ₁(B_R)) for every radius of the schedule.
    pub entries: Vec<(f64, f64)>,
    /// First value whose change from its predecessor is below the tolerance, or the last value.
    pub plateau: f64,
    pub converged: bool,
}

/// λ₁(B_R) along an increasing schedule at fixed mesh width `dr`, so the grids nest and the
/// sequence is monotone at the discrete level.
pub fn lambda1_manifold(
    model: &ManifoldModel,
    schedule: &[f64],
    tol: f64,
    dr: f64,
) -> Result<SpectralSweep> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "R schedule must be nonempty and increasing".into(),
        ));
    }
    if !(dr > 0.0) || !(tol > 0.0) {
        return Err(Error::Config(
            "spectrum tolerance and mesh width must be positive".into(),
        ));
    }
    let mut entries: Vec<(f64, f64)> = Vec::with_capacity(schedule.len());
    let mut plateau = None;
    for &r in schedule {
        let nr = ((r / dr).round() as usize).max(64);
        let e = lambda1_ball(model, r, nr)?;
        if plateau.is_none() {
            if let Some(&(_, prev)) = entries.last() {
                if (prev - e.eigenvalue).abs() < tol {
                    plateau = Some(e.eigenvalue);
                }
            }
        }
        entries.push((r, e.eigenvalue));
    }
    let last = entries.last().unwrap().1;
    Ok(SpectralSweep {
        entries,
        plateau: plateau.unwrap_or(last),
        converged: plateau.is_some(),
    })
}
