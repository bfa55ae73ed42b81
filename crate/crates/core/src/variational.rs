//! The action functional, the Nehari manifold, and the ground-state minimizer.
//!
//! Admissible fields vanish on the outer row r = R_max and are constant on the pole row.
//! Gradients are taken in node space, `Φ′(u) = K u − w ∘ f(r, u)`, and turned into
//! descent directions through the Riesz map of the discrete norm `uᵀ(K + sM)u`.

use crate::discretization::{apply_stiffness, AxisymmetricField, DiscreteGeometry};
use crate::error::{Error, Result};
use crate::nonlinearity::{
    check_compactness_hypotheses_with, default_check_grid, CompactnessOptions, Evaluation,
    Nonlinearity,
};
use crate::report::ConditionReport;
use crate::spectral::{discrete_lambda1, thomas, BallEigen, EigenOptions};
use crate::symmetry::{foliated_schwarz_check, SymmetryReport};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Starting field of the descent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Initialization {
    /// exp(−r²)
    RadialBump,
    /// exp(−(r−1)²)·(1 + ½·r/(1+r)·cos(σ − σ₀))
    TiltedBump { sigma0: f64 },
    /// Smooth random field, mostly positive, reproducible from the seed.
    RandomSeeded { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_outer_iterations: usize,
    /// First trial step, in units where a unit step is the full preconditioned gradient.
    pub initial_step: f64,
    /// Step shrink factor on a rejected trial.
    pub backtrack: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step growth factor after an accepted trial (≥ 1).
    pub step_growth: f64,
    /// Relative accuracy of the Nehari scaling.
    pub nehari_tol: f64,
    /// Stop when ‖Φ′(u)‖_* / ‖u‖_* falls below this.
    pub residual_tol: f64,
    pub init: Initialization,
    pub radial_only: bool,
    /// Clamp every iterate to u ≥ 0.
    pub positive_cone: bool,
    /// Skip the compactness and spectral gate.
    pub override_hypotheses: bool,
    /// Extent and resolution of the grid on which the compactness hypotheses are sampled.
    pub check_rmax: f64,
    pub check_points: usize,
    /// Relative tolerance handed to the symmetry diagnostics.
    pub symmetry_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 5000,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            step_growth: 1.5,
            nehari_tol: 1e-14,
            residual_tol: 1e-7,
            init: Initialization::TiltedBump { sigma0: 0.0 },
            radial_only: false,
            positive_cone: false,
            override_hypotheses: false,
            check_rmax: 60.0,
            check_points: 600,
            symmetry_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    /// Defaults with the radial bump and the radial restriction.
    pub fn radial() -> Self {
        Self {
            radial_only: true,
            init: Initialization::RadialBump,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64, closed: bool| {
            if v > 0.0 && (v < 1.0 || (closed && v == 1.0)) {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "solver.{name} must lie in (0, 1), got {v}"
                )))
            }
        };
        unit("step", self.initial_step, true)?;
        unit("backtrack", self.backtrack, false)?;
        unit("armijo", self.armijo, false)?;
        if !(self.step_growth >= 1.0 && self.step_growth.is_finite()) {
            return Err(Error::Config(format!(
                "solver.growth must be >= 1, got {}",
                self.step_growth
            )));
        }
        for (name, v) in [
            ("nehari_tol", self.nehari_tol),
            ("residual_tol", self.residual_tol),
            ("symmetry_tol", self.symmetry_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "solver.{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::Config(
                "solver.max_iterations must be positive".into(),
            ));
        }
        if let Initialization::TiltedBump { sigma0 } = self.init {
            if !(0.0..=PI).contains(&sigma0) {
                return Err(Error::Config(format!(
                    "tilt angle must lie in [0, pi], got {sigma0}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub field: AxisymmetricField,
    /// Φ(u), the computed level c (or c_r in radial mode).
    pub energy: f64,
    /// Nehari scaling t_v of every accepted iterate.
    pub t_history: Vec<f64>,
    /// Φ along accepted iterates; nonincreasing.
    pub energy_history: Vec<f64>,
    /// Dual H¹ norm of Φ′(u) over ‖u‖_{H¹}.
    pub pde_residual: f64,
    pub pde_residual_abs: f64,
    pub iterations: usize,
    pub converged: bool,
    /// I(u) = ⟨Φ′(u), u⟩
    pub nehari_residual: f64,
    pub symmetry: SymmetryReport,
}

/// Riesz map of `uᵀ(K + sM)u` on admissible fields.
///
/// In σ the operator is diagonalized by the generalized eigenvectors of the angular
/// stiffness and mass; each angular mode then leaves a tridiagonal radial system.
struct Riesz {
    nr: usize,
    cols: usize,
    /// Column-major: `modes[k * cols + j]` is mode k at node j, Mσ-orthonormal.
    modes: Vec<f64>,
    /// Radial tridiagonals per mode, diagonal and off-diagonal.
    diag: Vec<Vec<f64>>,
    off: Vec<Vec<f64>>,
    radial_only: bool,
}

impl Riesz {
    fn new(geom: &DiscreteGeometry, shift: f64, radial_only: bool) -> Result<Self> {
        let nr = geom.nr();
        let cols = geom.nsigma() + 1;
        let ms = geom.sigma_mass();
        let ks = geom.sigma_stiffness();
        let mut a = DMatrix::<f64>::zeros(cols, cols);
        for (j, &k) in ks.iter().enumerate() {
            a[(j, j)] += k;
            a[(j + 1, j + 1)] += k;
            a[(j, j + 1)] -= k;
            a[(j + 1, j)] -= k;
        }
        let inv_sqrt: Vec<f64> = ms.iter().map(|m| 1.0 / m.sqrt()).collect();
        for r in 0..cols {
            for c in 0..cols {
                a[(r, c)] *= inv_sqrt[r] * inv_sqrt[c];
            }
        }
        let eig = SymmetricEigen::new(a);
        let lowest = eig.eigenvalues.iamin();
        let total: f64 = ms.iter().sum();
        let mut order: Vec<usize> = (0..cols).filter(|&k| k != lowest).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let mut modes = vec![1.0 / total.sqrt(); cols];
        let mut mu = vec![0.0];
        for &k in &order {
            modes.extend((0..cols).map(|j| eig.eigenvectors[(j, k)] * inv_sqrt[j]));
            mu.push(eig.eigenvalues[k].max(0.0));
        }

        let c = geom.angular_area();
        let kr = geom.radial_stiffness();
        let mr = geom.radial_mass();
        let ma = geom.angular_radial_mass();
        let used = if radial_only { 1 } else { cols };
        let mut diag = Vec::with_capacity(used);
        let mut off = Vec::with_capacity(used);
        for (k, &m) in mu.iter().enumerate().take(used) {
            let first = if k == 0 { 0 } else { 1 };
            let mut d: Vec<f64> = (first..nr)
                .map(|i| c * (shift * mr[i] + m * ma[i]))
                .collect();
            let mut e = vec![0.0; d.len().saturating_sub(1)];
            for i in 0..nr {
                let w = c * kr[i];
                if i >= first {
                    d[i - first] += w;
                }
                if i + 1 < nr {
                    d[i + 1 - first] += w;
                    if i >= first {
                        e[i - first] = -w;
                    }
                }
            }
            if d.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Domain(format!(
                    "norm shift {shift} leaves the Riesz operator indefinite"
                )));
            }
            diag.push(d);
            off.push(e);
        }
        Ok(Self {
            nr,
            cols,
            modes,
            diag,
            off,
            radial_only,
        })
    }

    /// z with (K + sM) z = g tested against every admissible field.
    fn solve(&self, g: &[f64]) -> Vec<f64> {
        let (nr, cols) = (self.nr, self.cols);
        let used = self.diag.len();
        let mut hat = vec![0.0; used * nr];
        for i in 0..nr {
            let row = &g[i * cols..(i + 1) * cols];
            let kmax = if i == 0 { 1 } else { used };
            for k in 0..kmax {
                let m = &self.modes[k * cols..(k + 1) * cols];
                hat[k * nr + i] = m.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        let mut scratch = vec![0.0; nr];
        for k in 0..used {
            let first = if k == 0 { 0 } else { 1 };
            let rhs = &mut hat[k * nr + first..(k + 1) * nr];
            thomas(&self.diag[k], &self.off[k], rhs, &mut scratch);
        }
        let mut z = vec![0.0; (nr + 1) * cols];
        for i in 0..nr {
            let kmax = if i == 0 { 1 } else { used };
            let out = &mut z[i * cols..(i + 1) * cols];
            for k in 0..kmax {
                let c = hat[k * nr + i];
                let m = &self.modes[k * cols..(k + 1) * cols];
                out.iter_mut().zip(m).for_each(|(o, v)| *o += c * v);
            }
        }
        if self.radial_only {
            debug_assert_eq!(used, 1);
        }
        z
    }
}

/// The per-row evaluators of f together with the grid.
struct Problem<'a> {
    geom: &'a DiscreteGeometry,
    rows: Vec<Box<dyn Fn(f64) -> Evaluation + 'a>>,
}

impl<'a> Problem<'a> {
    fn new(geom: &'a DiscreteGeometry, f: &'a dyn Nonlinearity) -> Self {
        let rows = geom.r_nodes().iter().map(|&r| f.at_radius(r)).collect();
        Self { geom, rows }
    }

    fn cols(&self) -> usize {
        self.geom.nsigma() + 1
    }

    fn for_each(&self, v: &[f64], t: f64, mut g: impl FnMut(usize, f64, f64, Evaluation)) {
        let cols = self.cols();
        let w = self.geom.weights();
        for (i, ev) in self.rows.iter().enumerate() {
            for j in 0..cols {
                let k = i * cols + j;
                let s = t * v[k];
                g(k, w[k], s, ev(s));
            }
        }
    }

    fn stiffness_form(&self, v: &[f64]) -> f64 {
        let mut kv = vec![0.0; v.len()];
        apply_stiffness(self.geom, v, &mut kv);
        kv.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn mass_form(&self, v: &[f64]) -> f64 {
        self.geom
            .weights()
            .iter()
            .zip(v)
            .map(|(w, x)| w * x * x)
            .sum()
    }

    /// (Σ w f(tv)·tv, Σ w [f′(tv)(tv)² − f(tv)·tv])
    fn fiber_sums(&self, v: &[f64], t: f64) -> (f64, f64) {
        let (mut a, mut b) = (0.0, 0.0);
        self.for_each(v, t, |_, w, s, e| {
            a += w * e.f * s;
            b += w * (e.df * s * s - e.f * s);
        });
        (a, b)
    }

    fn action(&self, u: &[f64]) -> f64 {
        let mut big_f = 0.0;
        self.for_each(u, 1.0, |_, w, _, e| big_f += w * e.big_f);
        0.5 * self.stiffness_form(u) - big_f
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        apply_stiffness(self.geom, u, &mut g);
        self.for_each(u, 1.0, |k, w, _, e| g[k] -= w * e.f);
        g
    }

    /// Root of χ(t)/t² = A − Σ w f(tv)tv / t², decreasing in t under (f2).
    fn project(&self, v: &[f64], tol: f64) -> Result<f64> {
        let a = self.stiffness_form(v);
        if !(a > 0.0) {
            return Err(Error::Domain(
                "Nehari projection of a field with zero Dirichlet energy".into(),
            ));
        }
        let chi = |t: f64| {
            let (n, d) = self.fiber_sums(v, t);
            (a - n / (t * t), -d / (t * t * t))
        };
        let (lo_bound, hi_bound) = (1e-12, 1e12);
        let mut t = 1.0;
        let mut g = chi(t).0;
        let mut dg;
        if g == 0.0 {
            return Ok(t);
        }
        let (mut lo, mut hi);
        if g > 0.0 {
            lo = t;
            loop {
                t *= 2.0;
                if t > hi_bound {
                    return Err(no_root());
                }
                (g, dg) = chi(t);
                if !g.is_finite() {
                    return Err(Error::NonFinite {
                        what: "Nehari fiber",
                        r: f64::NAN,
                    });
                }
                if g <= 0.0 {
                    hi = t;
                    break;
                }
                lo = t;
            }
        } else {
            hi = t;
            loop {
                t *= 0.5;
                if t < lo_bound {
                    return Err(no_root());
                }
                (g, dg) = chi(t);
                if g >= 0.0 {
                    lo = t;
                    break;
                }
                hi = t;
            }
        }
        if g == 0.0 {
            return Ok(t);
        }
        for _ in 0..200 {
            let newton = t - g / dg;
            let next = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                (lo * hi).sqrt()
            };
            let step = (next - t).abs();
            t = next;
            (g, dg) = chi(t);
            if g == 0.0 {
                return Ok(t);
            }
            if g > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if step <= tol * t || hi - lo <= tol * t {
                return Ok(t);
            }
        }
        Ok(t)
    }
}

fn no_root() -> Error {
    Error::HypothesisViolation(
        "no Nehari scaling in [1e-12, 1e12]: the quadratic part is not positive (lambda >= lambda1?) or h vanishes on the support".into(),
    )
}

fn check_field(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<()> {
    if field.shape() != geom.shape() {
        return Err(Error::ShapeMismatch {
            expected: geom.shape(),
            found: field.shape(),
        });
    }
    field.validate()
}

/// Φ(u) = ½∫|∇_g u|² − ∫F(r, u).
pub fn action(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<f64> {
    check_field(field, geom)?;
    Ok(Problem::new(geom, f).action(field.values()))
}

/// Node-space gradient K u − w ∘ f(r, u); its pairing with δ is the derivative of Φ along δ.
pub fn action_gradient(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<AxisymmetricField> {
    check_field(field, geom)?;
    AxisymmetricField::from_values(
        field.shape(),
        Problem::new(geom, f).gradient(field.values()),
    )
}

/// I(u) = ∫|∇_g u|² − ∫f(r, u)u.
pub fn nehari_residual(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<f64> {
    check_field(field, geom)?;
    if field.max_abs() == 0.0 {
        return Err(Error::Domain("Nehari residual of the zero field".into()));
    }
    let p = Problem::new(geom, f);
    let (n, _) = p.fiber_sums(field.values(), 1.0);
    Ok(p.stiffness_form(field.values()) - n)
}

/// The unique t_v > 0 with t_v·v on the Nehari manifold, and t_v·v itself.
pub fn nehari_project(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<(f64, AxisymmetricField)> {
    nehari_project_with(field, geom, f, SolverConfig::default().nehari_tol)
}

pub fn nehari_project_with(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    tol: f64,
) -> Result<(f64, AxisymmetricField)> {
    check_field(field, geom)?;
    if field.max_abs() == 0.0 {
        return Err(Error::Domain("Nehari projection of the zero field".into()));
    }
    let t = Problem::new(geom, f).project(field.values(), tol)?;
    Ok((t, field.scaled(t)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxEnergy {
    /// Φ(t_v v), the maximum of Φ on the fiber.
    pub energy: f64,
    pub t_v: f64,
    /// Largest Φ(tv) over the supplied scan.
    pub scan_max: f64,
}

pub fn minimax_energy(
    v: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    t_grid: &[f64],
) -> Result<MinimaxEnergy> {
    let (t_v, u) = nehari_project(v, geom, f)?;
    let p = Problem::new(geom, f);
    let energy = p.action(u.values());
    let scan_max = t_grid
        .iter()
        .map(|&t| p.action(v.scaled(t).values()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MinimaxEnergy {
        energy,
        t_v,
        scan_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeResidual {
    /// sup over admissible v of |Φ′(u)v| / ‖v‖_{H¹}
    pub absolute: f64,
    /// `absolute / ‖u‖_{H¹}`
    pub relative: f64,
}

pub fn pde_residual(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<PdeResidual> {
    check_field(field, geom)?;
    let riesz = Riesz::new(geom, 1.0, false)?;
    let p = Problem::new(geom, f);
    Ok(residual_in(&p, &riesz, 1.0, field.values()))
}

fn residual_in(p: &Problem, riesz: &Riesz, shift: f64, u: &[f64]) -> PdeResidual {
    let g = p.gradient(u);
    let z = riesz.solve(&g);
    let absolute = dot(&g, &z).max(0.0).sqrt();
    let norm = (p.stiffness_form(u) + shift * p.mass_form(u)).sqrt();
    PdeResidual {
        absolute,
        relative: if norm > 0.0 {
            absolute / norm
        } else {
            f64::INFINITY
        },
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Zeroes the outer row and averages the pole row.
fn make_admissible(field: &mut AxisymmetricField) {
    field.enforce_pole_regularity();
    let last = field.shape().0 - 1;
    field.row_mut(last).iter_mut().for_each(|v| *v = 0.0);
}

pub fn initial_field(geom: &DiscreteGeometry, init: Initialization) -> AxisymmetricField {
    let mut field = match init {
        Initialization::RadialBump => AxisymmetricField::from_fn(geom, |r, _| (-r * r).exp()),
        Initialization::TiltedBump { sigma0 } => AxisymmetricField::from_fn(geom, |r, s| {
            (-(r - 1.0) * (r - 1.0)).exp() * (1.0 + 0.5 * r / (1.0 + r) * (s - sigma0).cos())
        }),
        Initialization::RandomSeeded { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let center: f64 = rng.gen_range(0.0..2.0);
            let width: f64 = rng.gen_range(1.0..3.0);
            let coef: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            AxisymmetricField::from_fn(geom, |r, s| {
                let modes: f64 = coef
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k + 1) as f64 * s).cos())
                    .sum();
                (-(r - center) * (r - center) / width).exp() * (1.0 + 0.25 * r / (1.0 + r) * modes)
            })
        }
    };
    make_admissible(&mut field);
    field
}

/// The discrete first Dirichlet eigenpair on the solver grid.
pub fn grid_lambda1(geom: &DiscreteGeometry) -> Result<BallEigen> {
    discrete_lambda1(
        geom.model(),
        geom.r_max(),
        geom.nr(),
        EigenOptions::default(),
    )
}

/// Compactness hypotheses for the weight of `f` plus λ < λ₁(B_{R_max}) on the solver grid.
pub fn hypothesis_gate(
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    config: &SolverConfig,
) -> Result<ConditionReport> {
    let grid = default_check_grid(config.check_rmax, config.check_points);
    let mut report = check_compactness_hypotheses_with(
        geom.model(),
        |r| f.ln_weight(r),
        f.exponent(),
        &grid,
        &CompactnessOptions::default(),
    )?;
    let l1 = grid_lambda1(geom)?.eigenvalue;
    report.push(
        "lambda < lambda1(B_R)",
        f.lambda() < l1,
        l1,
        format!("lambda = {}", f.lambda()),
    );
    Ok(report)
}

struct Descent {
    field: Vec<f64>,
    t: f64,
    energy: f64,
    t_history: Vec<f64>,
    energy_history: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
    /// The last step search ended with trials whose fibers had no Nehari point.
    hit_fiber_boundary: bool,
}

/// Projected gradient descent of Ψ(v) = Φ(t_v v) over the unit sphere of ‖·‖_*.
fn descend(
    p: &Problem,
    riesz: &Riesz,
    shift: f64,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<Descent> {
    let norm = |v: &[f64]| (p.stiffness_form(v) + shift * p.mass_form(v)).sqrt();
    let normalize = |mut v: Vec<f64>| -> Result<Vec<f64>> {
        if cfg.positive_cone {
            v.iter_mut().for_each(|x| *x = x.max(0.0));
        }
        let nv = norm(&v);
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(Error::Domain("descent iterate lost its norm".into()));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        Ok(v)
    };
    let mut v = normalize(start.to_vec())?;
    let mut t = p.project(&v, cfg.nehari_tol)?;
    let mut u: Vec<f64> = v.iter().map(|x| t * x).collect();
    let mut energy = p.action(&u);
    let positive = |e: f64| {
        if e > 0.0 {
            Ok(())
        } else {
            Err(Error::HypothesisViolation(format!(
                "Nehari level {e} <= 0 contradicts (f2)"
            )))
        }
    };
    positive(energy)?;
    let mut out = Descent {
        field: Vec::new(),
        t,
        energy,
        t_history: vec![t],
        energy_history: vec![energy],
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
        hit_fiber_boundary: false,
    };
    let mut step = cfg.initial_step;
    for it in 0..cfg.max_outer_iterations {
        out.iterations = it;
        let g = p.gradient(&u);
        let z = riesz.solve(&g);
        let z2 = dot(&g, &z).max(0.0);
        out.residual = z2.sqrt() / t;
        if out.residual < cfg.residual_tol {
            out.converged = true;
            break;
        }
        // Tangential part of the Riesz gradient at v, scaled so a unit step is natural.
        let zv = dot(&g, &v);
        let d: Vec<f64> = z.iter().zip(&v).map(|(a, b)| (a - zv * b) / t).collect();
        let d2 = (z2 - zv * zv).max(0.0) / (t * t);
        let mut accepted = false;
        let mut fiber_failed = false;
        while step > 1e-14 {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a - step * b).collect();
            let trial = match normalize(trial) {
                Ok(x) => x,
                Err(_) => {
                    step *= cfg.backtrack;
                    continue;
                }
            };
            match p.project(&trial, cfg.nehari_tol) {
                Ok(tt) => {
                    let ut: Vec<f64> = trial.iter().map(|x| tt * x).collect();
                    let et = p.action(&ut);
                    if et <= energy - cfg.armijo * step * t * t * d2 {
                        positive(et)?;
                        v = trial;
                        t = tt;
                        u = ut;
                        energy = et;
                        accepted = true;
                        break;
                    }
                }
                Err(Error::HypothesisViolation(_)) => fiber_failed = true,
                Err(e) => return Err(e),
            }
            step *= cfg.backtrack;
        }
        if !accepted {
            out.hit_fiber_boundary = fiber_failed;
            break;
        }
        out.t_history.push(t);
        out.energy_history.push(energy);
        step = (step * cfg.step_growth).min(1.0);
        out.iterations = it + 1;
    }
    out.field = u;
    out.t = t;
    out.energy = energy;
    Ok(out)
}

fn norm_shift(geom: &DiscreteGeometry, f: &dyn Nonlinearity) -> Result<f64> {
    let lambda = f.lambda();
    if lambda <= 0.0 {
        return Ok(-lambda);
    }
    let l1 = grid_lambda1(geom)?.eigenvalue;
    Ok(if lambda < l1 { -lambda } else { 1.0 })
}

/// Minimizes Φ over the Nehari manifold from `config.init`.
pub fn solve_ground_state(
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    config: &SolverConfig,
) -> Result<GroundStateResult> {
    solve_from(geom, f, config, &initial_field(geom, config.init))
}

/// [`solve_ground_state`] from a given starting field.
pub fn solve_from(
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    config: &SolverConfig,
    start: &AxisymmetricField,
) -> Result<GroundStateResult> {
    config.validate()?;
    check_field(start, geom)?;
    if !config.override_hypotheses {
        let report = hypothesis_gate(geom, f, config)?;
        if !report.all_passed() {
            let names: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
            return Err(Error::HypothesisViolation(format!(
                "failed checks: {}",
                names.join("; ")
            )));
        }
    }
    let mut start = start.clone();
    if config.radial_only {
        radialize(&mut start, geom);
    }
    make_admissible(&mut start);

    let shift = norm_shift(geom, f)?;
    let riesz = Riesz::new(geom, shift, config.radial_only)?;
    let p = Problem::new(geom, f);
    let run = descend(&p, &riesz, shift, start.values(), config)?;

    let field = AxisymmetricField::from_values(geom.shape(), run.field)?;
    let pde = pde_residual(&field, geom, f)?;
    let nehari = nehari_residual(&field, geom, f)?;
    let symmetry = foliated_schwarz_check(&field, geom, config.symmetry_tol)?;
    Ok(GroundStateResult {
        field,
        energy: run.energy,
        t_history: run.t_history,
        energy_history: run.energy_history,
        pde_residual: pde.relative,
        pde_residual_abs: pde.absolute,
        iterations: run.iterations,
        converged: run.converged,
        nehari_residual: nehari,
        symmetry,
    })
}

// Replaces every row by its σ-mass average.
fn radialize(field: &mut AxisymmetricField, geom: &DiscreteGeometry) {
    let ms = geom.sigma_mass();
    let total: f64 = ms.iter().sum();
    for i in 0..field.shape().0 {
        let row = field.row_mut(i);
        let mean = dot(row, ms) / total;
        row.iter_mut().for_each(|v| *v = mean);
    }
}

/// Outcome of one positive-cone descent in the regime λ > λ₁(B_R).
#[derive(Clone, Debug)]
pub struct ProbeCandidate {
    pub label: String,
    /// The Nehari fiber of the start or of a later iterate had no root.
    pub projection_failed: bool,
    pub converged: bool,
    pub one_signed: bool,
    pub residual: f64,
    /// ∫h(r,u)φ₁ − (λ₁ − λ)∫uφ₁, positive for every nonnegative u ≠ 0.
    pub margin: f64,
    /// margin / (‖φ₁‖ ‖u‖) in H¹, a lower bound on the relative residual of u.
    pub residual_lower_bound: f64,
}

#[derive(Clone, Debug)]
pub struct NonexistenceReport {
    pub lambda: f64,
    pub lambda1: f64,
    pub candidates: Vec<ProbeCandidate>,
    /// Some candidate converged to a one-signed critical point.
    pub falsified: bool,
}

/// Searches the positive cone for a solution with λ above the first Dirichlet eigenvalue.
pub fn nonexistence_probe(
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
    config: &SolverConfig,
) -> Result<NonexistenceReport> {
    config.validate()?;
    let eig = grid_lambda1(geom)?;
    let lambda1 = eig.eigenvalue;
    let lambda = f.lambda();
    if !(lambda > lambda1) {
        return Err(Error::Domain(format!(
            "probe needs lambda > lambda1(B_R) = {lambda1}, got {lambda}"
        )));
    }
    let cols = geom.nsigma() + 1;
    let phi1: Vec<f64> = (0..geom.nr() + 1)
        .flat_map(|i| std::iter::repeat_n(eig.eigenfunction[i], cols))
        .collect();
    let p = Problem::new(geom, f);
    let shift = 1.0;
    let riesz = Riesz::new(geom, shift, config.radial_only)?;
    let phi_norm = (p.stiffness_form(&phi1) + shift * p.mass_form(&phi1)).sqrt();
    let cfg = SolverConfig {
        positive_cone: true,
        ..config.clone()
    };

    let mut starts: Vec<(String, AxisymmetricField)> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&w| {
            (
                format!("bump width {w}"),
                AxisymmetricField::from_fn(geom, move |r, _| (-(r / w).powi(2)).exp()),
            )
        })
        .collect();
    starts.push((
        "tilted bump".into(),
        initial_field(geom, Initialization::TiltedBump { sigma0: 0.0 }),
    ));
    for seed in 0..3 {
        starts.push((
            format!("random seed {seed}"),
            initial_field(geom, Initialization::RandomSeeded { seed }),
        ));
    }

    let mut candidates = Vec::new();
    for (label, mut start) in starts {
        if cfg.radial_only {
            radialize(&mut start, geom);
        }
        make_admissible(&mut start);
        start.values_mut().iter_mut().for_each(|x| *x = x.max(0.0));
        let (u, projection_failed, converged, residual) =
            match descend(&p, &riesz, shift, start.values(), &cfg) {
                Ok(run) => {
                    let field = run.field;
                    let res = residual_in(&p, &riesz, shift, &field).relative;
                    (field, run.hit_fiber_boundary, run.converged, res)
                }
                Err(Error::HypothesisViolation(_)) => {
                    let res = residual_in(&p, &riesz, shift, start.values()).relative;
                    (start.into_values(), true, false, res)
                }
                Err(e) => return Err(e),
            };
        let mut hu = 0.0;
        let mut uu = 0.0;
        p.for_each(&u, 1.0, |k, w, s, e| {
            hu += w * (e.f - lambda * s) * phi1[k];
            uu += w * s * phi1[k];
        });
        let margin = hu - (lambda1 - lambda) * uu;
        let u_norm = (p.stiffness_form(&u) + shift * p.mass_form(&u)).sqrt();
        let field = AxisymmetricField::from_values(geom.shape(), u)?;
        let one_signed = foliated_schwarz_check(&field, geom, cfg.symmetry_tol)?.sign
            != crate::symmetry::Sign::Mixed;
        candidates.push(ProbeCandidate {
            label,
            projection_failed,
            converged,
            one_signed,
            residual,
            margin,
            residual_lower_bound: margin / (phi_norm * u_norm),
        });
    }
    let falsified = candidates
        .iter()
        .any(|c| c.converged && c.one_signed && c.residual < cfg.residual_tol);
    Ok(NonexistenceReport {
        lambda,
        lambda1,
        candidates,
        falsified,
    })
}
