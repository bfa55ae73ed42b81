//! Warping profiles of constant scalar curvature: the profile ODE and its classification.

use crate::error::{Error, Result};
use crate::geometry::PsiProfile;

/// Closed-form profile of a model with constant scalar curvature κ ≤ 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileDescriptor {
    Euclidean,
    Hyperbolic { alpha: f64 },
}

impl ProfileDescriptor {
    pub fn profile(&self) -> PsiProfile {
        match *self {
            ProfileDescriptor::Euclidean => PsiProfile::Euclidean,
            ProfileDescriptor::Hyperbolic { alpha } => PsiProfile::Hyperbolic { alpha },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileDescriptor::Euclidean => "euclidean",
            ProfileDescriptor::Hyperbolic { .. } => "hyperbolic",
        }
    }
}

fn reject_positive(kappa: f64) -> Error {
    Error::HypothesisViolation(format!(
        "scalar curvature {kappa} > 0 makes psi vanish at finite r, so psi cannot stay positive on (0, inf)"
    ))
}

/// κ < 0 gives ψ = sinh(αr)/α with α = √(|κ|/(n(n−1))); κ = 0 gives ψ = r.
pub fn classify_constant_curvature(n: usize, kappa: f64) -> Result<ProfileDescriptor> {
    if n < 2 {
        return Err(Error::Config(format!("dimension must be >= 2, got {n}")));
    }
    if !kappa.is_finite() {
        return Err(Error::Config(format!(
            "curvature must be finite, got {kappa}"
        )));
    }
    if kappa > 0.0 {
        return Err(reject_positive(kappa));
    }
    if kappa == 0.0 {
        return Ok(ProfileDescriptor::Euclidean);
    }
    let nf = n as f64;
    Ok(ProfileDescriptor::Hyperbolic {
        alpha: (-kappa / (nf * (nf - 1.0))).sqrt(),
    })
}

/// Cubic Taylor coefficient of ψ at the pole: ψ = r + c₃r³ + O(r⁵).
pub fn series_c3(n: usize, kappa: f64) -> f64 {
    let nf = n as f64;
    -kappa / (6.0 * nf * (nf - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSample {
    pub r: f64,
    pub psi: f64,
    pub dpsi: f64,
}

#[derive(Clone, Debug)]
pub struct OdeRun {
    pub n: usize,
    pub kappa: f64,
    /// β = κ/(n−1)
    pub beta: f64,
    pub h: f64,
    pub seed: f64,
    /// The series seed first, then the uniform nodes k·h.
    pub samples: Vec<OdeSample>,
    pub comparison: ProfileDescriptor,
    /// max |ψ − ψ_exact|/ψ_exact over the samples.
    pub max_rel_deviation: f64,
}

impl OdeRun {
    /// The sample at the uniform node nearest to `r`, if any.
    pub fn sample_at(&self, r: f64) -> Option<&OdeSample> {
        self.samples
            .iter()
            .skip(1)
            .min_by(|a, b| (a.r - r).abs().total_cmp(&(b.r - r).abs()))
    }
}

/// Default series-seed radius.
pub const SEED_RADIUS: f64 = 1e-4;

const RAMP_END: f64 = 0.5;
const RAMP_STEP: f64 = 10.0;

/// RK4 integration of 2ψ″ + (n−2)((ψ′)²−1)/ψ + βψ = 0 from the series seed at r = 1e−4.
pub fn integrate_profile_ode(n: usize, kappa: f64, r_max: f64, h: f64) -> Result<OdeRun> {
    integrate_profile_ode_seeded(n, kappa, r_max, h, SEED_RADIUS)
}

/// Same as [`integrate_profile_ode`] with the series seed at `seed` ∈ (0, 1e−3].
pub fn integrate_profile_ode_seeded(
    n: usize,
    kappa: f64,
    r_max: f64,
    h: f64,
    seed: f64,
) -> Result<OdeRun> {
    if !(seed > 0.0 && seed <= 1e-3) {
        return Err(Error::Config(format!(
            "seed must lie in (0, 1e-3], got {seed}"
        )));
    }
    if n < 3 {
        return Err(Error::Config(format!("profile ODE needs n >= 3, got {n}")));
    }
    if kappa > 0.0 {
        return Err(reject_positive(kappa));
    }
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::Config(format!(
            "step must lie in (0, 1e-3], got {h}"
        )));
    }
    if !(r_max > 0.0 && r_max <= 10.0) {
        return Err(Error::Config(format!(
            "r_max must lie in (0, 10], got {r_max}"
        )));
    }
    integrate_core(n, kappa, r_max, h, seed)
}

// The state is (ψ, z) with z = ψ′ − 1, so that (ψ′)² − 1 = z(z + 2) keeps full relative
// precision near the pole.
fn rhs(n: f64, beta: f64, psi: f64, z: f64) -> (f64, f64) {
    (
        1.0 + z,
        -0.5 * ((n - 2.0) * z * (z + 2.0) / psi + beta * psi),
    )
}

fn rk4_step(n: f64, beta: f64, r: f64, psi: f64, z: f64, h: f64) -> Result<(f64, f64)> {
    let (a1, b1) = rhs(n, beta, psi, z);
    let (a2, b2) = rhs(n, beta, psi + 0.5 * h * a1, z + 0.5 * h * b1);
    let (a3, b3) = rhs(n, beta, psi + 0.5 * h * a2, z + 0.5 * h * b2);
    let (a4, b4) = rhs(n, beta, psi + h * a3, z + h * b3);
    let psi = psi + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    let z = z + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    if !(psi > 0.0) || !z.is_finite() {
        return Err(Error::Singularity(format!(
            "psi reached zero near r = {}",
            r + h
        )));
    }
    Ok((psi, z))
}

/// Unchecked integrator: any step size, any κ, any seed below the first uniform node.
pub(crate) fn integrate_core(n: usize, kappa: f64, r_max: f64, h: f64, eps: f64) -> Result<OdeRun> {
    let nf = n as f64;
    let beta = kappa / (nf - 1.0);
    let c3 = series_c3(n, kappa);
    let mut psi = eps + c3 * eps.powi(3);
    let mut z = 3.0 * c3 * eps * eps;
    let mut samples = vec![OdeSample {
        r: eps,
        psi,
        dpsi: 1.0 + z,
    }];

    // Near the pole the ODE behaves like z′ ≈ −(n−2)z/r, so fixed steps lose accuracy there.
    // A geometric ramp with relative step proportional to h carries the solution out to the
    // first uniform node at or beyond RAMP_END, where uniform RK4 takes over.
    let steps = (r_max / h).round() as usize;
    let first = ((RAMP_END / h).ceil() as usize).max(n - 1).min(steps);
    let r_start = first as f64 * h;
    if eps >= r_start {
        return Err(Error::Config(format!(
            "seed {eps} must lie below the first uniform node {r_start}"
        )));
    }
    let q = (RAMP_STEP * h).min(1.0 / (nf - 1.0));
    let mut r = eps;
    while r < r_start {
        let step = (q * r).min(r_start - r);
        let (p, z1) = rk4_step(nf, beta, r, psi, z, step)?;
        psi = p;
        z = z1;
        r = if r + step >= r_start {
            r_start
        } else {
            r + step
        };
    }
    samples.push(OdeSample {
        r: r_start,
        psi,
        dpsi: 1.0 + z,
    });
    for k in first..steps {
        let (p, q) = rk4_step(nf, beta, k as f64 * h, psi, z, h)?;
        psi = p;
        z = q;
        samples.push(OdeSample {
            r: (k + 1) as f64 * h,
            psi,
            dpsi: 1.0 + z,
        });
    }

    let comparison = if kappa <= 0.0 {
        classify_constant_curvature(n, kappa)?
    } else {
        ProfileDescriptor::Euclidean
    };
    let exact = comparison.profile();
    let max_rel_deviation = samples
        .iter()
        .map(|s| {
            let e = exact.value(s.r);
            (s.psi - e).abs() / e
        })
        .fold(0.0, f64::max);
    Ok(OdeRun {
        n,
        kappa,
        beta,
        h,
        seed: eps,
        samples,
        comparison,
        max_rel_deviation,
    })
}
