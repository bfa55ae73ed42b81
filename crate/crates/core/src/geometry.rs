//! Rotationally symmetric models `dr² + ψ(r)² dΘ²` and the quantities derived from ψ.

use crate::error::{Error, Result};
use crate::quadrature::simpson;
use crate::report::ConditionReport;
use std::f64::consts::PI;

/// Value and first two derivatives of the warping function at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Logarithmic form of a jet, usable where ψ itself overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogJet {
    pub ln_value: f64,
    /// ψ′/ψ
    pub d1_ratio: f64,
    /// ψ″/ψ
    pub d2_ratio: f64,
}

/// Growth laws for the far field of a blended profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthLaw {
    /// e^{ar}
    Exp { a: f64 },
    /// e^{r^a}
    ExpPower { a: f64 },
    /// r^b e^{ar}
    PolyExp { a: f64, b: f64 },
    /// r^b e^{r^a}
    PolyExpPower { a: f64, b: f64 },
}

// c·r^e with the convention 0·(anything) = 0, so that vanishing coefficients
// do not produce NaN at r = 0.
fn mono(c: f64, r: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * r.powf(e)
    }
}

impl GrowthLaw {
    fn validate(&self) -> Result<()> {
        let (a, b) = match *self {
            GrowthLaw::Exp { a } | GrowthLaw::ExpPower { a } => (a, 1.0),
            GrowthLaw::PolyExp { a, b } | GrowthLaw::PolyExpPower { a, b } => (a, b),
        };
        if !(a >= 1.0) {
            return Err(Error::Config(format!(
                "growth exponent a must be >= 1, got {a}"
            )));
        }
        if !(b > 0.0) {
            return Err(Error::Config(format!(
                "growth power b must be > 0, got {b}"
            )));
        }
        Ok(())
    }

    pub fn jet(&self, r: f64) -> PsiJet {
        match *self {
            GrowthLaw::Exp { a } => {
                let e = (a * r).exp();
                PsiJet {
                    value: e,
                    d1: a * e,
                    d2: a * a * e,
                }
            }
            GrowthLaw::ExpPower { a } => {
                let e = r.powf(a).exp();
                PsiJet {
                    value: e,
                    d1: mono(a, r, a - 1.0) * e,
                    d2: (mono(a * (a - 1.0), r, a - 2.0) + mono(a * a, r, 2.0 * a - 2.0)) * e,
                }
            }
            GrowthLaw::PolyExp { a, b } => {
                let e = (a * r).exp();
                PsiJet {
                    value: mono(1.0, r, b) * e,
                    d1: (mono(b, r, b - 1.0) + mono(a, r, b)) * e,
                    d2: (mono(b * (b - 1.0), r, b - 2.0)
                        + mono(2.0 * a * b, r, b - 1.0)
                        + mono(a * a, r, b))
                        * e,
                }
            }
            GrowthLaw::PolyExpPower { a, b } => {
                let e = r.powf(a).exp();
                PsiJet {
                    value: mono(1.0, r, b) * e,
                    d1: (mono(b, r, b - 1.0) + mono(a, r, a + b - 1.0)) * e,
                    d2: (mono(b * (b - 1.0), r, b - 2.0)
                        + mono(2.0 * a * b + a * (a - 1.0), r, a + b - 2.0)
                        + mono(a * a, r, 2.0 * a + b - 2.0))
                        * e,
                }
            }
        }
    }

    /// Requires r > 0.
    pub fn log_jet(&self, r: f64) -> LogJet {
        match *self {
            GrowthLaw::Exp { a } => LogJet {
                ln_value: a * r,
                d1_ratio: a,
                d2_ratio: a * a,
            },
            GrowthLaw::ExpPower { a } => {
                let l1 = a * r.powf(a - 1.0);
                LogJet {
                    ln_value: r.powf(a),
                    d1_ratio: l1,
                    d2_ratio: l1 * l1 + mono(a * (a - 1.0), r, a - 2.0),
                }
            }
            GrowthLaw::PolyExp { a, b } => {
                let l1 = b / r + a;
                LogJet {
                    ln_value: b * r.ln() + a * r,
                    d1_ratio: l1,
                    d2_ratio: l1 * l1 - b / (r * r),
                }
            }
            GrowthLaw::PolyExpPower { a, b } => {
                let l1 = b / r + a * r.powf(a - 1.0);
                LogJet {
                    ln_value: b * r.ln() + r.powf(a),
                    d1_ratio: l1,
                    d2_ratio: l1 * l1 - b / (r * r) + mono(a * (a - 1.0), r, a - 2.0),
                }
            }
        }
    }
}

/// The warping function ψ of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PsiProfile {
    /// ψ(r) = r
    Euclidean,
    /// ψ(r) = sinh(αr)/α
    Hyperbolic { alpha: f64 },
    /// sinh(r) on [0, r0], `target` on [2 r0, ∞), quintic Hermite blend in between.
    Blended { target: GrowthLaw, r0: f64 },
    /// A growth law used all the way down to r = 0. Generally violates the pole
    /// conditions; kept so that they can be demonstrated to fail.
    Raw(GrowthLaw),
}

// Quintic smoothstep and its derivatives: s(0)=0, s(1)=1, s', s'' vanish at both ends.
fn smoothstep(x: f64) -> (f64, f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    (
        x3 * (10.0 - 15.0 * x + 6.0 * x2),
        30.0 * x2 * (1.0 - x) * (1.0 - x),
        60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
    )
}

fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

impl PsiProfile {
    pub fn hyperbolic(alpha: f64) -> Self {
        PsiProfile::Hyperbolic { alpha }
    }

    pub fn blended(target: GrowthLaw) -> Self {
        PsiProfile::Blended { target, r0: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PsiProfile::Euclidean => Ok(()),
            PsiProfile::Hyperbolic { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            PsiProfile::Hyperbolic { alpha } => {
                Err(Error::Config(format!("psi.alpha must be > 0, got {alpha}")))
            }
            PsiProfile::Blended { target, r0 } => {
                if !(r0 > 0.0 && r0.is_finite()) {
                    return Err(Error::Config(format!("psi.r0 must be > 0, got {r0}")));
                }
                target.validate()
            }
            PsiProfile::Raw(target) => target.validate(),
        }
    }

    /// ψ, ψ′, ψ″ at `r ≥ 0`. Values may be non-finite for fast-growing laws; see [`Self::try_jet`].
    pub fn jet(&self, r: f64) -> PsiJet {
        match *self {
            PsiProfile::Euclidean => PsiJet {
                value: r,
                d1: 1.0,
                d2: 0.0,
            },
            PsiProfile::Hyperbolic { alpha } => {
                let x = alpha * r;
                PsiJet {
                    value: x.sinh() / alpha,
                    d1: x.cosh(),
                    d2: alpha * x.sinh(),
                }
            }
            PsiProfile::Blended { target, r0 } => {
                if r <= r0 {
                    PsiJet {
                        value: r.sinh(),
                        d1: r.cosh(),
                        d2: r.sinh(),
                    }
                } else if r >= 2.0 * r0 {
                    target.jet(r)
                } else {
                    let inner = PsiJet {
                        value: r.sinh(),
                        d1: r.cosh(),
                        d2: r.sinh(),
                    };
                    let outer = target.jet(r);
                    let (s, s1, s2) = smoothstep((r - r0) / r0);
                    let (s1, s2) = (s1 / r0, s2 / (r0 * r0));
                    let dv = outer.value - inner.value;
                    let dd1 = outer.d1 - inner.d1;
                    PsiJet {
                        value: inner.value + s * dv,
                        d1: inner.d1 + s * dd1 + s1 * dv,
                        d2: inner.d2 + s * (outer.d2 - inner.d2) + 2.0 * s1 * dd1 + s2 * dv,
                    }
                }
            }
            PsiProfile::Raw(target) => target.jet(r),
        }
    }

    pub fn try_jet(&self, r: f64) -> Result<PsiJet> {
        let j = self.jet(r);
        if j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite() {
            Ok(j)
        } else {
            Err(Error::NonFinite { what: "psi", r })
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    /// Logarithmic jet for `r > 0`.
    pub fn log_jet(&self, r: f64) -> LogJet {
        match *self {
            PsiProfile::Euclidean => LogJet {
                ln_value: r.ln(),
                d1_ratio: 1.0 / r,
                d2_ratio: 0.0,
            },
            PsiProfile::Hyperbolic { alpha } => {
                let x = alpha * r;
                LogJet {
                    ln_value: ln_sinh(x) - alpha.ln(),
                    d1_ratio: alpha / x.tanh(),
                    d2_ratio: alpha * alpha,
                }
            }
            PsiProfile::Blended { target, r0 } if r >= 2.0 * r0 => target.log_jet(r),
            PsiProfile::Blended { .. } => {
                let j = self.jet(r);
                LogJet {
                    ln_value: j.value.ln(),
                    d1_ratio: j.d1 / j.value,
                    d2_ratio: j.d2 / j.value,
                }
            }
            PsiProfile::Raw(target) => target.log_jet(r),
        }
    }

    /// The two curvature quotients `((ψ′)² − 1)/ψ²` and `ψ″/ψ` at `r > 0`.
    pub fn curvature_quotients(&self, r: f64) -> (f64, f64) {
        match *self {
            PsiProfile::Euclidean => (0.0, 0.0),
            PsiProfile::Hyperbolic { alpha } => (alpha * alpha, alpha * alpha),
            PsiProfile::Blended { r0, .. } if r < 2.0 * r0 => {
                let j = self.jet(r);
                (
                    (j.d1 - 1.0) * (j.d1 + 1.0) / (j.value * j.value),
                    j.d2 / j.value,
                )
            }
            _ => {
                let l = self.log_jet(r);
                (
                    l.d1_ratio * l.d1_ratio - (-2.0 * l.ln_value).exp(),
                    l.d2_ratio,
                )
            }
        }
    }
}

/// Area of the unit sphere `S^dim ⊂ ℝ^{dim+1}`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    // 2 π^{m} / Γ(m) with m = (dim+1)/2, Γ at integers and half-integers by recursion.
    let twice_m = dim + 1;
    let mut gamma = if twice_m.is_multiple_of(2) {
        1.0
    } else {
        PI.sqrt()
    };
    let mut x = if twice_m.is_multiple_of(2) { 1.0 } else { 0.5 };
    let m = twice_m as f64 / 2.0;
    while x < m {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(m) / gamma
}

/// A Riemannian model: dimension plus warping profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldModel {
    n: usize,
    profile: PsiProfile,
    omega: f64,
}

impl ManifoldModel {
    pub fn new(n: usize, profile: PsiProfile) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("dimension must be >= 2, got {n}")));
        }
        profile.validate()?;
        Ok(Self {
            n,
            profile,
            omega: unit_sphere_area(n - 1),
        })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(n, PsiProfile::Euclidean)
    }

    pub fn hyperbolic(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, PsiProfile::Hyperbolic { alpha })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &PsiProfile {
        &self.profile
    }

    /// Area of the unit sphere `S^{n-1}`, the ω_n in `S(r) = ω_n ψ^{n-1}`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    /// φ(r) = ψ(r)/r, with φ(0) = 1.
    pub fn phi(&self, r: f64) -> f64 {
        if r < 1e-12 {
            1.0
        } else {
            self.profile.value(r) / r
        }
    }

    pub fn ln_phi(&self, r: f64) -> f64 {
        if r < 1e-12 {
            0.0
        } else {
            self.profile.log_jet(r).ln_value - r.ln()
        }
    }
}

/// Pole conditions ψ(0)=0, ψ′(0)=1, ψ″(0)=0 and positivity of ψ on (0, 10].
pub fn check_pole_conditions(profile: &PsiProfile, tol: f64) -> Result<ConditionReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let j = profile.try_jet(0.0)?;
    let mut report = ConditionReport::new();
    report.push("psi(0) = 0", j.value.abs() <= tol, j.value.abs(), "");
    report.push(
        "psi'(0) = 1",
        (j.d1 - 1.0).abs() <= tol,
        (j.d1 - 1.0).abs(),
        "",
    );
    report.push("psi''(0) = 0", j.d2.abs() <= tol, j.d2.abs(), "");

    let mut worst = f64::INFINITY;
    let mut worst_r = 0.0;
    for k in 1..=200 {
        let r = 0.05 * k as f64;
        let ln = profile.log_jet(r).ln_value;
        if ln.is_nan() || ln == f64::INFINITY {
            return Err(Error::NonFinite { what: "psi", r });
        }
        if ln < worst {
            worst = ln;
            worst_r = r;
        }
    }
    report.push(
        "psi > 0 on (0, 10]",
        worst > f64::NEG_INFINITY,
        worst.exp(),
        format!("min at r = {worst_r}"),
    );
    Ok(report)
}

/// K(r) = −2(n−1)ψ″/ψ − (n−1)(n−2)((ψ′)²−1)/ψ².
pub fn scalar_curvature(model: &ManifoldModel, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "scalar curvature needs r > 0, got {r}"
        )));
    }
    let n = model.dim() as f64;
    let (tangential, radial) = model.profile().curvature_quotients(r);
    let k = -2.0 * (n - 1.0) * radial - (n - 1.0) * (n - 2.0) * tangential;
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFinite {
            what: "scalar curvature",
            r,
        })
    }
}

/// Thresholds for the empirical boundedness test in [`curvature_bounds_report_with`].
#[derive(Clone, Copy, Debug)]
pub struct CurvatureCaps {
    /// A quotient exceeding this anywhere on the grid counts as unbounded.
    pub cap: f64,
    /// A quotient whose grid-tail value exceeds `growth` times its mid-grid value
    /// (and exceeds 1) counts as still growing, hence unbounded.
    pub growth: f64,
}

impl Default for CurvatureCaps {
    fn default() -> Self {
        Self {
            cap: 1e3,
            growth: 2.0,
        }
    }
}

pub fn curvature_bounds_report(model: &ManifoldModel, r_grid: &[f64]) -> Result<ConditionReport> {
    curvature_bounds_report_with(model, r_grid, CurvatureCaps::default())
}

/// Nonpositive sectional curvature (both quotients ≥ 0) and Ricci-lower-bound
/// (both quotients bounded above) checks over a grid.
pub fn curvature_bounds_report_with(
    model: &ManifoldModel,
    r_grid: &[f64],
    caps: CurvatureCaps,
) -> Result<ConditionReport> {
    if r_grid.is_empty() {
        return Err(Error::Domain("empty radial grid".into()));
    }
    let mut tangential = Vec::with_capacity(r_grid.len());
    let mut radial = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "grid points must be positive, got {r}"
            )));
        }
        let (t, q) = model.profile().curvature_quotients(r);
        if !t.is_finite() || !q.is_finite() {
            return Err(Error::NonFinite {
                what: "curvature quotient",
                r,
            });
        }
        tangential.push(t);
        radial.push(q);
    }

    let mut report = ConditionReport::new();
    for (label, values) in [("((psi')^2-1)/psi^2", &tangential), ("psi''/psi", &radial)] {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail = *values.last().unwrap();
        let mid = values[values.len() / 2];
        let growing = tail > 1.0 && tail > caps.growth * mid.abs();
        report.push(
            format!("sec bound: {label} >= 0"),
            min >= -1e-12,
            min,
            "inf over grid",
        );
        report.push(
            format!("ricci bound: sup {label} < inf"),
            sup <= caps.cap && !growing,
            sup,
            format!("tail {tail:e}, mid-grid {mid:e}, cap {:e}", caps.cap),
        );
    }
    Ok(report)
}

/// Default Simpson resolution for ball volumes.
pub const VOLUME_INTERVALS: usize = 10_000;

/// Area of the geodesic sphere and volume of the geodesic ball of radius `r`.
pub fn sphere_area_ball_volume(model: &ManifoldModel, r: f64) -> Result<(f64, f64)> {
    sphere_area_ball_volume_with(model, r, VOLUME_INTERVALS)
}

pub fn sphere_area_ball_volume_with(
    model: &ManifoldModel,
    r: f64,
    intervals: usize,
) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let k = (model.dim() - 1) as i32;
    let psi_r = model.profile().try_jet(r)?.value;
    let area = model.omega() * psi_r.powi(k);
    let volume = model.omega() * simpson(0.0, r, intervals, |t| model.psi(t).powi(k));
    if !volume.is_finite() {
        return Err(Error::NonFinite {
            what: "ball volume",
            r,
        });
    }
    Ok((area, volume))
}
