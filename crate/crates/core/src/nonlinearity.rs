//! Nonlinearities f(r, s), their primitives, and the structural and compactness checks.

use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::report::ConditionReport;

/// f, ∂f/∂s, F = ∫₀ˢ f and H = F − λs²/2 at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub df: f64,
    pub big_f: f64,
    pub big_h: f64,
}

/// A nonlinearity of the form f(r, s) = λs + h(r, s).
pub trait Nonlinearity {
    fn lambda(&self) -> f64;
    /// Ambrosetti–Rabinowitz constant μ > 2.
    fn mu(&self) -> f64;
    /// Growth exponent p.
    fn exponent(&self) -> f64;
    /// Radial weight W(r) in the growth bounds.
    fn weight(&self, r: f64) -> f64;
    /// ln W(r); override where W under- or overflows.
    fn ln_weight(&self, r: f64) -> f64 {
        self.weight(r).ln()
    }
    fn evaluate(&self, r: f64, s: f64) -> Evaluation;

    /// Evaluator frozen at one radius. Implementations may hoist r-dependent work here.
    fn at_radius(&self, r: f64) -> Box<dyn Fn(f64) -> Evaluation + '_> {
        Box::new(move |s| self.evaluate(r, s))
    }
}

/// Radial weight W of the shipped family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    /// W(r) = φ(r)^{−α}
    PhiPower(f64),
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Constant(c) if c >= 0.0 && c.is_finite() => Ok(()),
            WeightSpec::PhiPower(a) if a >= 0.0 && a.is_finite() => Ok(()),
            other => Err(Error::Config(format!(
                "weight parameters must be finite and >= 0: {other:?}"
            ))),
        }
    }

    pub fn ln_eval(&self, model: &ManifoldModel, r: f64) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c.ln(),
            WeightSpec::PhiPower(a) => -a * model.ln_phi(r),
        }
    }

    pub fn eval(&self, model: &ManifoldModel, r: f64) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::PhiPower(0.0) => 1.0,
            WeightSpec::PhiPower(_) => self.ln_eval(model, r).exp(),
        }
    }
}

/// Critical Sobolev exponent 2n/(n−2), infinite for n ≤ 2.
pub fn critical_exponent(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        2.0 * n as f64 / (n as f64 - 2.0)
    }
}

/// f(r, s) = λs + W(r)|s|^{p−1}s.
#[derive(Clone, Copy, Debug)]
pub struct PowerLaw {
    lambda: f64,
    p: f64,
    mu: f64,
    weight: WeightSpec,
    model: ManifoldModel,
}

impl PowerLaw {
    pub fn new(
        lambda: f64,
        p: f64,
        mu: f64,
        weight: WeightSpec,
        model: ManifoldModel,
    ) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Config(format!(
                "f.lambda must be finite, got {lambda}"
            )));
        }
        let upper = critical_exponent(model.dim()) - 1.0;
        if !(p > 1.0 && p < upper) {
            return Err(Error::Config(format!(
                "f.p must lie in (1, {upper}), got {p}"
            )));
        }
        if !(mu > 2.0) {
            return Err(Error::Config(format!("f.mu must be > 2, got {mu}")));
        }
        weight.validate()?;
        Ok(Self {
            lambda,
            p,
            mu,
            weight,
            model,
        })
    }

    /// μ = p + 1, the sharp Ambrosetti–Rabinowitz constant of the family.
    pub fn with_sharp_mu(
        lambda: f64,
        p: f64,
        weight: WeightSpec,
        model: ManifoldModel,
    ) -> Result<Self> {
        Self::new(lambda, p, p + 1.0, weight, model)
    }

    pub fn weight_spec(&self) -> WeightSpec {
        self.weight
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }
}

#[inline]
fn power_eval(lambda: f64, p: f64, w: f64, s: f64) -> Evaluation {
    let a = s.abs();
    // |s|^{p-1}
    let q = if p == 2.0 {
        a
    } else if p == 3.0 {
        a * a
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(p - 1.0)
    };
    let h = w * q * s;
    let big_h = w * q * s * s / (p + 1.0);
    Evaluation {
        f: lambda * s + h,
        df: lambda + p * w * q,
        big_f: 0.5 * lambda * s * s + big_h,
        big_h,
    }
}

impl Nonlinearity for PowerLaw {
    fn lambda(&self) -> f64 {
        self.lambda
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn exponent(&self) -> f64 {
        self.p
    }
    fn weight(&self, r: f64) -> f64 {
        self.weight.eval(&self.model, r)
    }
    fn ln_weight(&self, r: f64) -> f64 {
        self.weight.ln_eval(&self.model, r)
    }
    fn evaluate(&self, r: f64, s: f64) -> Evaluation {
        power_eval(self.lambda, self.p, self.weight(r), s)
    }
    fn at_radius(&self, r: f64) -> Box<dyn Fn(f64) -> Evaluation + '_> {
        let w = self.weight(r);
        Box::new(move |s| power_eval(self.lambda, self.p, w, s))
    }
}

type EvalFn = Box<dyn Fn(f64, f64) -> Evaluation + Send + Sync>;
type WeightFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied nonlinearity. Only sampled against the structural conditions, never proved.
pub struct FnNonlinearity {
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    weight: WeightFn,
    eval: EvalFn,
}

impl FnNonlinearity {
    pub fn new(
        lambda: f64,
        mu: f64,
        p: f64,
        weight: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eval: impl Fn(f64, f64) -> Evaluation + Send + Sync + 'static,
    ) -> Self {
        Self {
            lambda,
            mu,
            p,
            weight: Box::new(weight),
            eval: Box::new(eval),
        }
    }
}

impl Nonlinearity for FnNonlinearity {
    fn lambda(&self) -> f64 {
        self.lambda
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn exponent(&self) -> f64 {
        self.p
    }
    fn weight(&self, r: f64) -> f64 {
        (self.weight)(r)
    }
    fn evaluate(&self, r: f64, s: f64) -> Evaluation {
        (self.eval)(r, s)
    }
}

/// Samples (f2), (f3), (f4) on the given (r, s) pairs.
///
/// `lambda1`, when known, adds the λ < λ₁(M) clause of (f3).
pub fn check_structural_conditions(
    f: &dyn Nonlinearity,
    sample: &[(f64, f64)],
    lambda1: Option<f64>,
) -> Result<ConditionReport> {
    if sample.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    let lambda = f.lambda();
    let p = f.exponent();
    let mu = f.mu();

    let mut zero_dev = 0.0f64;
    let mut f2_max = f64::NEG_INFINITY;
    let mut lower_c = 0.0f64;
    let mut upper_c = 0.0f64;
    let mut upper_ok = true;
    let mut f4_violation = 0.0f64;
    let mut f4_ok = true;

    for &(r, s) in sample {
        zero_dev = zero_dev.max(f.evaluate(r, 0.0).f.abs());
        if s == 0.0 {
            continue;
        }
        let e = f.evaluate(r, s);
        f2_max = f2_max.max(e.f * s - e.df * s * s);

        let growth = f.weight(r) * s.abs().powf(p - 1.0);
        lower_c = lower_c.max(-(e.df + growth));
        if growth > 0.0 {
            upper_c = upper_c.max((e.df - lambda) / growth);
        } else if e.df > lambda {
            upper_ok = false;
        }

        let h = e.f - lambda * s;
        let lhs = mu * e.big_h;
        let rhs = h * s;
        let slack = 1e-12 * rhs.abs().max(lhs.abs());
        if !(lhs > 0.0) {
            f4_ok = false;
            f4_violation = f4_violation.max(-lhs);
        }
        if lhs > rhs + slack {
            f4_ok = false;
            f4_violation = f4_violation.max(lhs - rhs);
        }
    }

    let mut report = ConditionReport::new();
    report.push("f(r,0) = 0", zero_dev == 0.0, zero_dev, "");
    report.push(
        "(f2) f s - f' s^2 < 0",
        f2_max < 0.0,
        f2_max,
        "max over samples with s != 0",
    );
    report.push(
        "(f3) lower growth bound",
        lower_c.is_finite(),
        lower_c,
        "smallest C with f' >= -C - W|s|^(p-1)",
    );
    report.push(
        "(f3) upper growth bound",
        upper_ok && upper_c.is_finite(),
        upper_c,
        "smallest K with f' <= lambda + K W|s|^(p-1)",
    );
    if let Some(l1) = lambda1 {
        report.push(
            "(f3) lambda < lambda1(M)",
            lambda < l1,
            l1 - lambda,
            format!("lambda = {lambda}, lambda1 = {l1}"),
        );
    }
    report.push(
        "(f4) 0 < mu H <= h s",
        f4_ok,
        f4_violation,
        format!("mu = {mu}, largest violation"),
    );
    Ok(report)
}

/// Knobs for [`check_compactness_hypotheses`].
#[derive(Clone, Copy, Debug)]
pub struct CompactnessOptions {
    /// The grid must reach at least this radius.
    pub min_extent: f64,
    /// (iii) passes when the tail sup of Wφ^{(p−1)/2} is below `decay_tol` times its value at R.
    pub decay_tol: f64,
    /// Same, for the embedding quantity of the weighted Sobolev embedding.
    pub embedding_decay_tol: f64,
    /// Fraction of trailing grid points forming the tail.
    pub tail_fraction: f64,
    /// Relative slack when testing monotonicity of log-quantities.
    pub monotone_tol: f64,
}

impl Default for CompactnessOptions {
    fn default() -> Self {
        Self {
            min_extent: 50.0,
            decay_tol: 1e-3,
            embedding_decay_tol: 1e-1,
            tail_fraction: 0.1,
            monotone_tol: 1e-12,
        }
    }
}

/// Uniform grid on (0, r_max] suitable for the compactness checks.
pub fn default_check_grid(r_max: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|k| r_max * k as f64 / points as f64)
        .collect()
}

pub fn check_compactness_hypotheses(
    model: &ManifoldModel,
    weight: &WeightSpec,
    p: f64,
    r_grid: &[f64],
    opts: &CompactnessOptions,
) -> Result<ConditionReport> {
    weight.validate()?;
    check_compactness_hypotheses_with(model, |r| weight.ln_eval(model, r), p, r_grid, opts)
}

// First index from which `g` is nondecreasing to the end of the grid.
fn monotone_from(g: &[f64], tol: f64) -> usize {
    let mut start = g.len().saturating_sub(1);
    while start > 0 {
        let (a, b) = (g[start - 1], g[start]);
        if b >= a - tol * (1.0 + a.abs()) {
            start -= 1;
        } else {
            break;
        }
    }
    start
}

/// Like [`check_compactness_hypotheses`] with an arbitrary weight given through ln W.
pub fn check_compactness_hypotheses_with(
    model: &ManifoldModel,
    ln_weight: impl Fn(f64) -> f64,
    p: f64,
    r_grid: &[f64],
    opts: &CompactnessOptions,
) -> Result<ConditionReport> {
    let n = model.dim();
    if n < 3 {
        return Err(Error::Config(format!(
            "compactness theory needs n >= 3, got {n}"
        )));
    }
    if !(p > 1.0) {
        return Err(Error::Config(format!("exponent must exceed 1, got {p}")));
    }
    let last = match r_grid.last() {
        Some(&r) if r >= opts.min_extent => r,
        Some(&r) => {
            return Err(Error::Config(format!(
                "check grid ends at r = {r}, needs to reach {}",
                opts.min_extent
            )))
        }
        None => return Err(Error::Config("empty check grid".into())),
    };
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) || !(r_grid[0] > 0.0) {
        return Err(Error::Config(
            "check grid must be positive and increasing".into(),
        ));
    }
    let nf = n as f64;
    let ln_phi: Vec<f64> = r_grid.iter().map(|&r| model.ln_phi(r)).collect();
    if let Some(i) = ln_phi.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "phi",
            r: r_grid[i],
        });
    }
    let ln_w: Vec<f64> = r_grid.iter().map(|&r| ln_weight(r)).collect();

    let mut report = ConditionReport::new();

    // (i)
    let min_ln_phi = ln_phi.iter().copied().fold(f64::INFINITY, f64::min);
    report.push(
        "(i) phi >= 1",
        min_ln_phi >= -1e-12,
        min_ln_phi.exp(),
        "min phi over grid",
    );

    // (ii)
    let g1: Vec<f64> = ln_phi
        .iter()
        .zip(&ln_w)
        .map(|(lp, lw)| (nf - 1.0) * lp + lw)
        .collect();
    let g2: Vec<f64> = ln_phi.iter().map(|lp| (nf - 3.0) * lp).collect();
    let i_r = monotone_from(&g1, opts.monotone_tol).max(monotone_from(&g2, opts.monotone_tol));
    let big_r = r_grid[i_r];
    report.push(
        "(ii) phi^(n-1) W, phi^(n-3) nondecreasing on [R, inf)",
        big_r <= 0.5 * last,
        big_r,
        "detected R",
    );

    // (iii)
    let q: Vec<f64> = ln_phi
        .iter()
        .zip(&ln_w)
        .map(|(lp, lw)| lw + 0.5 * (p - 1.0) * lp)
        .collect();
    let tail_len =
        ((r_grid.len() as f64 * opts.tail_fraction).ceil() as usize).clamp(1, r_grid.len());
    let tail_start = r_grid.len() - tail_len;
    let ref_idx = if i_r <= tail_start { i_r } else { 0 };
    let q_tail = q[tail_start..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio_ln = q_tail - q[ref_idx];
    report.push(
        "(iii) W phi^((p-1)/2) -> 0",
        ratio_ln.is_nan() || ratio_ln <= opts.decay_tol.ln() || q_tail == f64::NEG_INFINITY,
        ratio_ln.exp(),
        format!("tail sup relative to r = {}", r_grid[ref_idx]),
    );

    // Embedding quantity b0^{1/(p+1)} b1^{-1/2} δ^{n/(p+1) - n/2 + 1} with δ = 1/φ.
    let expo = nf / (p + 1.0) - nf / 2.0 + 1.0;
    let mut ln_e = Vec::new();
    let mut c_delta = 1.0f64;
    let mut delta_ok = true;
    for &r in r_grid.iter().filter(|&&r| r >= 3.0) {
        let ln_delta = -model.ln_phi(r);
        let delta = ln_delta.exp();
        delta_ok &= delta <= r / 3.0 + 1e-12;
        let (lo, hi) = (r - delta, r + delta);
        let ln_b0 = (nf - 1.0) * model.ln_phi(hi) + ln_weight(hi);
        let ln_b1 = (nf - 3.0) * model.ln_phi(lo);
        ln_e.push(ln_b0 / (p + 1.0) - 0.5 * ln_b1 + expo * ln_delta);
        for y in [lo, hi] {
            let ratio = (model.ln_phi(r) - model.ln_phi(y)).abs().exp();
            c_delta = c_delta.max(ratio);
        }
    }
    report.push(
        "embedding: delta <= r/3 for r >= 3",
        delta_ok,
        c_delta,
        "c_delta",
    );
    let decays = if ln_e.is_empty() {
        false
    } else {
        let k = ((ln_e.len() as f64 * opts.tail_fraction).ceil() as usize).clamp(1, ln_e.len());
        let tail = ln_e[ln_e.len() - k..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let d = tail - ln_e[0];
        report.push(
            "embedding quantity -> 0",
            d.is_nan() || d <= opts.embedding_decay_tol.ln() || tail == f64::NEG_INFINITY,
            d.exp(),
            "tail sup relative to r = 3",
        );
        true
    };
    if !decays {
        report.push(
            "embedding quantity -> 0",
            false,
            f64::NAN,
            "grid has no points beyond r = 3",
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use proptest::prelude::*;

    fn hyp() -> ManifoldModel {
        ManifoldModel::hyperbolic(3, 1.0).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let e3 = ManifoldModel::euclidean(3).unwrap();
        let f = PowerLaw::new(0.0, 3.0, 4.0, WeightSpec::Constant(1.0), e3).unwrap();
        let v = f.evaluate(0.7, 2.0);
        assert_eq!((v.f, v.big_f), (8.0, 4.0));

        let f = PowerLaw::new(1.0, 2.0, 3.0, WeightSpec::Constant(1.0), e3).unwrap();
        let v = f.evaluate(0.7, -1.0);
        assert_eq!((v.f, v.df), (-2.0, 3.0));

        let f = PowerLaw::new(0.5, 2.0, 3.0, WeightSpec::PhiPower(2.0), hyp()).unwrap();
        let v = f.evaluate(1.0, 1.0);
        let oracle = 0.5 + 1.0 / (1f64.sinh() * 1f64.sinh());
        assert!((v.f - oracle).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = hyp();
        assert!(PowerLaw::new(0.0, 1.0, 3.0, WeightSpec::Constant(1.0), m).is_err());
        assert!(PowerLaw::new(0.0, 5.0, 6.0, WeightSpec::Constant(1.0), m).is_err());
        assert!(PowerLaw::new(0.0, 2.0, 2.0, WeightSpec::Constant(1.0), m).is_err());
        assert!(PowerLaw::new(0.0, 2.0, 3.0, WeightSpec::PhiPower(-1.0), m).is_err());
    }

    #[test]
    fn at_radius_matches_evaluate() {
        let f = PowerLaw::new(-0.3, 2.5, 3.5, WeightSpec::PhiPower(1.0), hyp()).unwrap();
        let g = f.at_radius(2.0);
        for s in [-3.0, -0.1, 0.0, 0.4, 7.0] {
            assert_eq!(g(s), f.evaluate(2.0, s));
        }
    }

    fn sample() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for i in 0..20 {
            for j in -10..=10 {
                v.push((0.5 * i as f64, 0.37 * j as f64));
            }
        }
        v
    }

    #[test]
    fn structural_conditions_for_power_family() {
        let f = PowerLaw::with_sharp_mu(0.0, 2.0, WeightSpec::PhiPower(1.0), hyp()).unwrap();
        let rep = check_structural_conditions(&f, &sample(), Some(1.0)).unwrap();
        assert!(rep.all_passed(), "{rep}");
        assert!((rep.get("(f3) upper growth bound").unwrap().measured - 2.0).abs() < 1e-12);

        let above = f.with_lambda(1.5);
        let rep = check_structural_conditions(&above, &sample(), Some(1.0)).unwrap();
        assert!(!rep.passed("(f3) lambda < lambda1(M)"));
    }

    #[test]
    fn mu_above_p_plus_one_fails_f4() {
        let f = PowerLaw::new(0.0, 2.0, 3.5, WeightSpec::Constant(1.0), hyp()).unwrap();
        let rep = check_structural_conditions(&f, &sample(), None).unwrap();
        assert!(!rep.passed("(f4) 0 < mu H <= h s"));
    }

    #[test]
    fn compactness_truth_table() {
        let grid = default_check_grid(60.0, 600);
        let opts = CompactnessOptions::default();
        let e = ManifoldModel::euclidean(3).unwrap();
        for w in [WeightSpec::PhiPower(1.0), WeightSpec::Constant(2.0)] {
            let rep = check_compactness_hypotheses(&e, &w, 2.0, &grid, &opts).unwrap();
            assert!(!rep.all_passed());
            assert!(!rep.passed("(iii) W phi^((p-1)/2) -> 0"));
        }
        let rep =
            check_compactness_hypotheses(&hyp(), &WeightSpec::PhiPower(1.0), 2.0, &grid, &opts)
                .unwrap();
        assert!(rep.all_passed(), "{rep}");
        let rep =
            check_compactness_hypotheses(&hyp(), &WeightSpec::Constant(1.0), 2.0, &grid, &opts)
                .unwrap();
        assert!(!rep.passed("(iii) W phi^((p-1)/2) -> 0"));
    }

    #[test]
    fn short_grid_is_a_config_error() {
        let grid = default_check_grid(20.0, 100);
        let err = check_compactness_hypotheses(
            &hyp(),
            &WeightSpec::PhiPower(1.0),
            2.0,
            &grid,
            &Default::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn f2_quantity_negative(r in 0.0f64..20.0, s in -50.0f64..50.0, p in 1.05f64..4.9, a in 0.0f64..2.0, lambda in -3.0f64..3.0) {
            prop_assume!(s != 0.0);
            let f = PowerLaw::with_sharp_mu(lambda, p, WeightSpec::PhiPower(a), hyp()).unwrap();
            let e = f.evaluate(r, s);
            prop_assert!(e.f * s - e.df * s * s < 0.0);
            prop_assert!(e.big_h > 0.0);
            prop_assert!((e.big_f - e.big_h - 0.5 * lambda * s * s).abs() <= 1e-12 * e.big_f.abs().max(1.0));
        }

        #[test]
        fn primitive_is_antiderivative(r in 0.0f64..5.0, s in -4.0f64..4.0, p in 1.2f64..4.5) {
            let f = PowerLaw::with_sharp_mu(0.3, p, WeightSpec::PhiPower(0.7), hyp()).unwrap();
            let h = 1e-5;
            let fd = (f.evaluate(r, s + h).big_f - f.evaluate(r, s - h).big_f) / (2.0 * h);
            prop_assert!((fd - f.evaluate(r, s).f).abs() <= 1e-6 * (1.0 + fd.abs()));
        }

        #[test]
        fn larger_alpha_keeps_iii_passing(a in 0.6f64..3.0, extra in 0.0f64..2.0) {
            let grid = default_check_grid(60.0, 300);
            let opts = CompactnessOptions::default();
            let m = hyp();
            let lo = check_compactness_hypotheses(&m, &WeightSpec::PhiPower(a), 2.0, &grid, &opts).unwrap();
            let hi = check_compactness_hypotheses(&m, &WeightSpec::PhiPower(a + extra), 2.0, &grid, &opts).unwrap();
            let name = "(iii) W phi^((p-1)/2) -> 0";
            prop_assert!(!lo.passed(name) || hi.passed(name));
        }
    }
}
