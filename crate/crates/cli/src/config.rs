//! `key = value` run configuration with `[section]` headers or dotted keys.

use groundstate_core::geometry::{GrowthLaw, ManifoldModel, PsiProfile};
use groundstate_core::nonlinearity::{PowerLaw, WeightSpec};
use groundstate_core::variational::{Initialization, SolverConfig};
use groundstate_core::{DiscreteGeometry, Error, Result};
use std::collections::HashSet;
use std::path::PathBuf;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub psi: PsiProfile,
    pub lambda: f64,
    pub p: f64,
    /// Defaults to p + 1.
    pub mu: Option<f64>,
    pub weight: WeightSpec,
    pub rmax: f64,
    pub nr: usize,
    pub nsigma: usize,
    pub solver: SolverConfig,
    /// Also run the radial restriction and report c_r.
    pub compare_radial: bool,
    pub spectrum_schedule: Vec<f64>,
    pub spectrum_tol: f64,
    pub spectrum_dr: f64,
    pub curvature_rmax: f64,
    pub curvature_points: usize,
    pub field_path: PathBuf,
    pub summary_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            psi: PsiProfile::Hyperbolic { alpha: 1.0 },
            lambda: 0.0,
            p: 2.0,
            mu: None,
            weight: WeightSpec::PhiPower(1.0),
            rmax: 8.0,
            nr: 200,
            nsigma: 64,
            solver: SolverConfig::default(),
            compare_radial: true,
            spectrum_schedule: vec![1.0, 2.0, 4.0, 8.0, 16.0, 25.0],
            spectrum_tol: 1e-3,
            spectrum_dr: 0.01,
            curvature_rmax: 10.0,
            curvature_points: 100,
            field_path: PathBuf::from("field.csv"),
            summary_path: None,
        }
    }
}

// Raw profile parameters, assembled once all lines are read.
#[derive(Default)]
struct PsiKeys {
    kind: Option<String>,
    alpha: Option<f64>,
    target: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    r0: Option<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| parse_err(line, format!("{key}: cannot parse {v:?}")))
}

fn flag(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(
            line,
            format!("{key}: expected true or false, got {v:?}"),
        )),
    }
}

fn weight(line: usize, v: &str) -> Result<WeightSpec> {
    let (kind, arg) = v.split_once(':').ok_or_else(|| {
        parse_err(
            line,
            format!("f.weight: expected const:<c> or phipow:<alpha>, got {v:?}"),
        )
    })?;
    let x: f64 = num(line, "f.weight", arg.trim())?;
    match kind.trim() {
        "const" => Ok(WeightSpec::Constant(x)),
        "phipow" => Ok(WeightSpec::PhiPower(x)),
        other => Err(parse_err(line, format!("f.weight: unknown kind {other:?}"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut psi = PsiKeys::default();
        let mut seen = HashSet::new();
        let mut section = String::new();
        let mut seed = None;
        let mut sigma0 = None;
        let mut init = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, got {body:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let key = if section.is_empty() {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            if !seen.insert(key.clone()) {
                return Err(parse_err(line, format!("duplicate key {key}")));
            }
            let s = &mut cfg.solver;
            match key.as_str() {
                "n" => cfg.n = num(line, &key, v)?,
                "psi.kind" => psi.kind = Some(v.to_string()),
                "psi.alpha" => psi.alpha = Some(num(line, &key, v)?),
                "psi.target" => psi.target = Some(v.to_string()),
                "psi.a" => psi.a = Some(num(line, &key, v)?),
                "psi.b" => psi.b = Some(num(line, &key, v)?),
                "psi.r0" => psi.r0 = Some(num(line, &key, v)?),
                "f.lambda" => cfg.lambda = num(line, &key, v)?,
                "f.p" => cfg.p = num(line, &key, v)?,
                "f.mu" => cfg.mu = Some(num(line, &key, v)?),
                "f.weight" => cfg.weight = weight(line, v)?,
                "grid.rmax" => cfg.rmax = num(line, &key, v)?,
                "grid.nr" => cfg.nr = num(line, &key, v)?,
                "grid.nsigma" => cfg.nsigma = num(line, &key, v)?,
                "solver.max_iterations" => s.max_outer_iterations = num(line, &key, v)?,
                "solver.step" => s.initial_step = num(line, &key, v)?,
                "solver.backtrack" => s.backtrack = num(line, &key, v)?,
                "solver.armijo" => s.armijo = num(line, &key, v)?,
                "solver.growth" => s.step_growth = num(line, &key, v)?,
                "solver.nehari_tol" => s.nehari_tol = num(line, &key, v)?,
                "solver.residual_tol" => s.residual_tol = num(line, &key, v)?,
                "solver.symmetry_tol" => s.symmetry_tol = num(line, &key, v)?,
                "solver.init" => init = Some((line, v.to_string())),
                "solver.sigma0" => sigma0 = Some(num::<f64>(line, &key, v)?),
                "solver.seed" => seed = Some(num::<u64>(line, &key, v)?),
                "solver.radial_only" => s.radial_only = flag(line, &key, v)?,
                "solver.override_hypotheses" => s.override_hypotheses = flag(line, &key, v)?,
                "solver.compare_radial" => cfg.compare_radial = flag(line, &key, v)?,
                "check.rmax" => s.check_rmax = num(line, &key, v)?,
                "check.points" => s.check_points = num(line, &key, v)?,
                "spectrum.schedule" => {
                    cfg.spectrum_schedule = v
                        .split(',')
                        .map(|x| num(line, &key, x.trim()))
                        .collect::<Result<Vec<f64>>>()?
                }
                "spectrum.tol" => cfg.spectrum_tol = num(line, &key, v)?,
                "spectrum.dr" => cfg.spectrum_dr = num(line, &key, v)?,
                "curvature.rmax" => cfg.curvature_rmax = num(line, &key, v)?,
                "curvature.points" => cfg.curvature_points = num(line, &key, v)?,
                "output.field" => cfg.field_path = PathBuf::from(v),
                "output.summary" => cfg.summary_path = Some(PathBuf::from(v)),
                _ => return Err(parse_err(line, format!("unknown key {key}"))),
            }
        }

        cfg.psi = build_psi(psi)?;
        cfg.solver.init = match init.as_ref().map(|(l, s)| (*l, s.as_str())) {
            None if seed.is_some() => Initialization::RandomSeeded {
                seed: seed.unwrap(),
            },
            None | Some((_, "tilted")) => Initialization::TiltedBump {
                sigma0: sigma0.unwrap_or(0.0),
            },
            Some((_, "radial")) => Initialization::RadialBump,
            Some((_, "random")) => Initialization::RandomSeeded {
                seed: seed.unwrap_or(0),
            },
            Some((l, other)) => {
                return Err(parse_err(l, format!("solver.init: unknown mode {other:?}")))
            }
        };
        if cfg.solver.radial_only && init.is_none() && seed.is_none() {
            cfg.solver.init = Initialization::RadialBump;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        self.nonlinearity()?;
        self.solver.validate()?;
        if !self.nsigma.is_multiple_of(2) || self.nsigma < 8 || self.nr < 16 || !(self.rmax > 0.0) {
            return Err(Error::Config(format!(
                "grid needs rmax > 0, nr >= 16 and even nsigma >= 8, got rmax = {}, nr = {}, nsigma = {}",
                self.rmax, self.nr, self.nsigma
            )));
        }
        if self.curvature_points < 2 || !(self.curvature_rmax > 0.0) {
            return Err(Error::Config(
                "curvature grid needs rmax > 0 and at least 2 points".into(),
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ManifoldModel> {
        ManifoldModel::new(self.n, self.psi)
    }

    pub fn nonlinearity(&self) -> Result<PowerLaw> {
        let model = self.model()?;
        PowerLaw::new(
            self.lambda,
            self.p,
            self.mu.unwrap_or(self.p + 1.0),
            self.weight,
            model,
        )
    }

    pub fn geometry(&self) -> Result<DiscreteGeometry> {
        DiscreteGeometry::build(self.model()?, self.rmax, self.nr, self.nsigma)
    }

    pub fn weight_label(&self) -> String {
        match self.weight {
            WeightSpec::Constant(c) => format!("const:{c}"),
            WeightSpec::PhiPower(a) => format!("phipow:{a}"),
        }
    }
}

fn build_psi(k: PsiKeys) -> Result<PsiProfile> {
    let law = |k: &PsiKeys| -> Result<GrowthLaw> {
        let a = k.a.unwrap_or(1.0);
        let b = k.b.unwrap_or(1.0);
        match k.target.as_deref().unwrap_or("exp") {
            "exp" => Ok(GrowthLaw::Exp { a }),
            "exp_power" => Ok(GrowthLaw::ExpPower { a }),
            "poly_exp" => Ok(GrowthLaw::PolyExp { a, b }),
            "poly_exp_power" => Ok(GrowthLaw::PolyExpPower { a, b }),
            other => Err(Error::Config(format!(
                "psi.target: unknown growth law {other:?}"
            ))),
        }
    };
    let profile = match k.kind.as_deref().unwrap_or("hyperbolic") {
        "euclidean" => PsiProfile::Euclidean,
        "hyperbolic" => PsiProfile::Hyperbolic {
            alpha: k.alpha.unwrap_or(1.0),
        },
        "blended" => PsiProfile::Blended {
            target: law(&k)?,
            r0: k.r0.unwrap_or(1.0),
        },
        "raw" => PsiProfile::Raw(law(&k)?),
        other => {
            return Err(Error::Config(format!(
                "psi.kind: unknown profile {other:?}"
            )))
        }
    };
    profile.validate()?;
    Ok(profile)
}
