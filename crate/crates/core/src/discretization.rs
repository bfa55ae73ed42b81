//! Tensor grids on the geodesic ball, quadrature with the Riemannian volume element,
//! the discrete Dirichlet form, and field containers.

use crate::error::{Error, Result};
use crate::geometry::{sphere_area_ball_volume, unit_sphere_area, ManifoldModel};
use crate::quadrature::{gauss_legendre, hat_moments};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Uniform (r, σ) grid on `B_{R_max}` with precomputed product-integration weights.
///
/// All one-dimensional weights are integrals of hat functions against the exact
/// density, so for a field interpolated bilinearly the quadrature is exact up to
/// the Gauss–Legendre error inside each cell.
#[derive(Clone, Debug)]
pub struct DiscreteGeometry {
    model: ManifoldModel,
    r_max: f64,
    nr: usize,
    ns: usize,
    dr: f64,
    ds: f64,
    /// |S^{n−2}|
    c_ang: f64,
    r: Vec<f64>,
    sigma: Vec<f64>,
    /// ∫ hat_i ψ^{n−1} dr
    mass_r: Vec<f64>,
    /// ∫ hat_i ψ^{n−3} dr (zero at the pole)
    mass_ang: Vec<f64>,
    /// ∫_{r_i}^{r_{i+1}} ψ^{n−1} dr / Δr²
    stiff_r: Vec<f64>,
    /// ∫_{r_i}^{r_{i+1}} r² ψ^{n−3} dr / Δr², the Euclidean-weighted counterpart
    stiff_r_euclid: Vec<f64>,
    /// ∫ hat_j sin^{n−2} dσ
    mass_s: Vec<f64>,
    /// ∫_{σ_j}^{σ_{j+1}} sin^{n−2} dσ / Δσ²
    stiff_s: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteGeometry {
    pub fn build(model: ManifoldModel, r_max: f64, nr: usize, ns: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Config(format!(
                "grid.rmax must be positive, got {r_max}"
            )));
        }
        if nr < 16 {
            return Err(Error::Config(format!("grid.nr must be >= 16, got {nr}")));
        }
        if ns < 8 {
            return Err(Error::Config(format!("grid.nsigma must be >= 8, got {ns}")));
        }
        if !ns.is_multiple_of(2) {
            return Err(Error::Config(format!("grid.nsigma must be even, got {ns}")));
        }
        let n = model.dim();
        let dr = r_max / nr as f64;
        let ds = PI / ns as f64;
        let r: Vec<f64> = (0..=nr).map(|i| i as f64 * dr).collect();
        let sigma: Vec<f64> = (0..=ns).map(|j| j as f64 * ds).collect();
        let ka = n as i32 - 3;
        let psi = |t: f64| model.psi(t);

        let (mass_r, stiff_r) = radial_weights(&model, r_max, nr);
        let mut mass_ang = vec![0.0; nr + 1];
        let mut stiff_r_euclid = vec![0.0; nr];
        for i in 0..nr {
            let (a, b) = (r[i], r[i + 1]);
            if i > 0 || ka >= 0 {
                let (lo, hi) = hat_moments(a, b, |t| psi(t).powi(ka));
                mass_ang[i] += lo;
                mass_ang[i + 1] += hi;
            } else {
                // ψ^{n−3} is singular at the pole for n = 2; only the right hat is needed.
                let (_, hi) = hat_moments(a, b, |t| if t > 0.0 { psi(t).powi(ka) } else { 0.0 });
                mass_ang[i + 1] += hi;
            }
            stiff_r_euclid[i] = gauss_legendre(a, b, |t| {
                if t > 0.0 {
                    t * t * psi(t).powi(ka)
                } else {
                    0.0
                }
            }) / (dr * dr);
        }
        // The angular term is dropped at the pole.
        mass_ang[0] = 0.0;

        let ks = (n - 2) as i32;
        let half = ns / 2;
        let mut mass_s = vec![0.0; ns + 1];
        let mut stiff_s = vec![0.0; ns];
        for j in 0..half {
            let (a, b) = (sigma[j], sigma[j + 1]);
            let (lo, hi) = hat_moments(a, b, |t| t.sin().powi(ks));
            mass_s[j] += lo;
            mass_s[j + 1] += hi;
            stiff_s[j] = gauss_legendre(a, b, |t| t.sin().powi(ks)) / (ds * ds);
        }
        mass_s[half] *= 2.0;
        for j in 0..half {
            mass_s[ns - j] = mass_s[j];
            stiff_s[ns - 1 - j] = stiff_s[j];
        }

        let c_ang = unit_sphere_area(n - 2);
        let mut weights = Vec::with_capacity((nr + 1) * (ns + 1));
        for &mr in &mass_r {
            for &ms in &mass_s {
                weights.push(c_ang * mr * ms);
            }
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                what: "quadrature weight",
                r: r[k / (ns + 1)],
            });
        }

        let geom = Self {
            model,
            r_max,
            nr,
            ns,
            dr,
            ds,
            c_ang,
            r,
            sigma,
            mass_r,
            mass_ang,
            stiff_r,
            stiff_r_euclid,
            mass_s,
            stiff_s,
            weights,
        };
        let (_, volume) = sphere_area_ball_volume(&model, r_max)?;
        let total = geom.weights.iter().sum::<f64>();
        if (total - volume).abs() > 1e-6 * volume {
            return Err(Error::Domain(format!(
                "weight sum {total:e} disagrees with ball volume {volume:e}"
            )));
        }
        Ok(geom)
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn nr(&self) -> usize {
        self.nr
    }
    pub fn nsigma(&self) -> usize {
        self.ns
    }
    pub fn dr(&self) -> f64 {
        self.dr
    }
    pub fn dsigma(&self) -> f64 {
        self.ds
    }
    /// (Nr + 1, Nσ + 1)
    pub fn shape(&self) -> (usize, usize) {
        (self.nr + 1, self.ns + 1)
    }
    pub fn r_nodes(&self) -> &[f64] {
        &self.r
    }
    pub fn sigma_nodes(&self) -> &[f64] {
        &self.sigma
    }
    pub fn angular_area(&self) -> f64 {
        self.c_ang
    }
    pub fn radial_mass(&self) -> &[f64] {
        &self.mass_r
    }
    pub fn angular_radial_mass(&self) -> &[f64] {
        &self.mass_ang
    }
    pub fn radial_stiffness(&self) -> &[f64] {
        &self.stiff_r
    }
    pub fn sigma_mass(&self) -> &[f64] {
        &self.mass_s
    }
    pub fn sigma_stiffness(&self) -> &[f64] {
        &self.stiff_s
    }
    /// Row-major quadrature weights w_ij.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * (self.ns + 1) + j]
    }

    fn check_shape(&self, field: &AxisymmetricField) -> Result<()> {
        if field.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: field.shape(),
            });
        }
        Ok(())
    }
}

/// Radial mass `∫ hat_i ψ^{n−1}` (i = 0..=nr) and edge stiffness `∫_{cell} ψ^{n−1} / Δr²`
/// (one per cell) on the uniform grid of `[0, r_max]`.
pub fn radial_weights(model: &ManifoldModel, r_max: f64, nr: usize) -> (Vec<f64>, Vec<f64>) {
    let dr = r_max / nr as f64;
    let k = (model.dim() - 1) as i32;
    let mut mass = vec![0.0; nr + 1];
    let mut stiff = vec![0.0; nr];
    for i in 0..nr {
        let (a, b) = (i as f64 * dr, (i + 1) as f64 * dr);
        let (lo, hi) = hat_moments(a, b, |t| model.psi(t).powi(k));
        mass[i] += lo;
        mass[i + 1] += hi;
        stiff[i] = gauss_legendre(a, b, |t| model.psi(t).powi(k)) / (dr * dr);
    }
    (mass, stiff)
}

/// Samples u_ij = u(r_i, σ_j), stored row-major over r.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisymmetricField {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl AxisymmetricField {
    pub fn zeros(geom: &DiscreteGeometry) -> Self {
        let (rows, cols) = geom.shape();
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_values(shape: (usize, usize), values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.0 * shape.1 {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: (values.len(), 1),
            });
        }
        Ok(Self {
            rows: shape.0,
            cols: shape.1,
            values,
        })
    }

    pub fn from_fn(geom: &DiscreteGeometry, mut g: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(geom.weights.len());
        for &r in &geom.r {
            for &s in &geom.sigma {
                values.push(g(r, s));
            }
        }
        let (rows, cols) = geom.shape();
        Self { rows, cols, values }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| t * v).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::Domain(format!(
                "non-finite field value at node ({}, {})",
                k / self.cols,
                k % self.cols
            ))),
        }
    }

    pub fn is_pole_regular(&self, tol: f64) -> bool {
        let row = self.row(0);
        row.iter().all(|v| (v - row[0]).abs() <= tol)
    }

    /// Replaces the pole row by its mean.
    pub fn enforce_pole_regularity(&mut self) {
        let mean = self.row(0).iter().sum::<f64>() / self.cols as f64;
        self.row_mut(0).fill(mean);
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Samples u_i = u(r_i).
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn from_fn(geom: &DiscreteGeometry, g: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: geom.r.iter().copied().map(g).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::Domain(format!(
                "non-finite radial value at node {i}"
            ))),
        }
    }

    pub fn to_axisymmetric(&self, geom: &DiscreteGeometry) -> Result<AxisymmetricField> {
        if self.values.len() != geom.nr + 1 {
            return Err(Error::ShapeMismatch {
                expected: geom.shape(),
                found: (self.values.len(), 1),
            });
        }
        let mut values = Vec::with_capacity(geom.weights.len());
        for &v in &self.values {
            values.extend(std::iter::repeat_n(v, geom.ns + 1));
        }
        AxisymmetricField::from_values(geom.shape(), values)
    }
}

/// Σ w_ij u_ij
pub fn integrate(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<f64> {
    geom.check_shape(field)?;
    Ok(field
        .values
        .iter()
        .zip(&geom.weights)
        .map(|(u, w)| u * w)
        .sum())
}

/// Σ w_ij g(r_i, σ_j)
pub fn integrate_fn(geom: &DiscreteGeometry, mut g: impl FnMut(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (i, &r) in geom.r.iter().enumerate() {
        for (j, &s) in geom.sigma.iter().enumerate() {
            acc += geom.weight(i, j) * g(r, s);
        }
    }
    acc
}

/// ∫ |∇_g u|² dV_g with edge differences: radial differences on each r-cell,
/// angular differences ψ^{−2} u_σ² on each σ-cell, pole row excluded from the latter.
pub fn dirichlet_energy(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<f64> {
    geom.check_shape(field)?;
    Ok(energy_with(field, geom, &geom.stiff_r))
}

fn energy_with(field: &AxisymmetricField, geom: &DiscreteGeometry, stiff_r: &[f64]) -> f64 {
    let ns = geom.ns;
    let mut radial = 0.0;
    for (i, &kr) in stiff_r.iter().enumerate() {
        let (a, b) = (field.row(i), field.row(i + 1));
        let mut row = 0.0;
        for j in 0..=ns {
            let d = b[j] - a[j];
            row += geom.mass_s[j] * d * d;
        }
        radial += kr * row;
    }
    let mut angular = 0.0;
    for i in 1..=geom.nr {
        let u = field.row(i);
        let mut row = 0.0;
        for j in 0..ns {
            let d = u[j + 1] - u[j];
            row += geom.stiff_s[j] * d * d;
        }
        angular += geom.mass_ang[i] * row;
    }
    geom.c_ang * (radial + angular)
}

/// `out = K u` where `uᵀ K u` is [`dirichlet_energy`]. Treats every node as independent.
pub fn apply_stiffness(geom: &DiscreteGeometry, u: &[f64], out: &mut [f64]) {
    let cols = geom.ns + 1;
    debug_assert_eq!(u.len(), (geom.nr + 1) * cols);
    out.iter_mut().for_each(|o| *o = 0.0);
    let c = geom.c_ang;
    for i in 0..geom.nr {
        let k = c * geom.stiff_r[i];
        for j in 0..cols {
            let a = i * cols + j;
            let b = a + cols;
            let t = k * geom.mass_s[j] * (u[b] - u[a]);
            out[a] -= t;
            out[b] += t;
        }
    }
    for i in 1..=geom.nr {
        let k = c * geom.mass_ang[i];
        for j in 0..geom.ns {
            let a = i * cols + j;
            let t = k * geom.stiff_s[j] * (u[a + 1] - u[a]);
            out[a] -= t;
            out[a + 1] += t;
        }
    }
}

/// `(‖u‖_{L^q(M)}, ‖u‖_{L^q(ℝⁿ; φ^{n−1})})`; the second from weights built on r^{n−1}φ^{n−1}.
pub fn weighted_euclidean_norms(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    q: f64,
) -> Result<(f64, f64)> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q must be >= 1, got {q}")));
    }
    geom.check_shape(field)?;
    let model = geom.model;
    let k = (model.dim() - 1) as i32;
    let mut euclid_r = vec![0.0; geom.nr + 1];
    for i in 0..geom.nr {
        let (lo, hi) = hat_moments(geom.r[i], geom.r[i + 1], |t| (t * model.phi(t)).powi(k));
        euclid_r[i] += lo;
        euclid_r[i + 1] += hi;
    }
    let mut m = 0.0;
    let mut e = 0.0;
    for (i, &er) in euclid_r.iter().enumerate() {
        for j in 0..=geom.ns {
            let v = field.get(i, j).abs().powf(q);
            m += geom.weight(i, j) * v;
            e += geom.c_ang * er * geom.mass_s[j] * v;
        }
    }
    Ok((m.powf(1.0 / q), e.powf(1.0 / q)))
}

/// Squared norms `(‖u‖²_{H¹(M)}, ‖u‖²_{W^{1,2}(ℝⁿ; φ^{n−1}, φ^{n−3})})`.
///
/// The second uses the Euclidean gradient weighted by φ^{n−3} and the L² weight φ^{n−1};
/// the angular parts coincide, the radial parts differ by the factor φ².
pub fn h1_norms_squared(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<(f64, f64)> {
    geom.check_shape(field)?;
    let l2 = {
        let sq = AxisymmetricField {
            rows: field.rows,
            cols: field.cols,
            values: field.values.iter().map(|v| v * v).collect(),
        };
        integrate(&sq, geom)?
    };
    let manifold = energy_with(field, geom, &geom.stiff_r) + l2;
    let euclid = energy_with(field, geom, &geom.stiff_r_euclid)
        + weighted_euclidean_norms(field, geom, 2.0)?.1.powi(2);
    Ok((manifold, euclid))
}

/// Writes `r,sigma,u` rows.
pub fn write_field_csv(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    mut out: impl Write,
) -> Result<()> {
    geom.check_shape(field)?;
    writeln!(out, "r,sigma,u")?;
    for (i, &r) in geom.r.iter().enumerate() {
        for (j, &s) in geom.sigma.iter().enumerate() {
            writeln!(out, "{r},{s},{}", field.get(i, j))?;
        }
    }
    Ok(())
}

/// A field read back from CSV together with the grid it was sampled on.
#[derive(Clone, Debug)]
pub struct FieldCsv {
    pub r_max: f64,
    pub nr: usize,
    pub nsigma: usize,
    pub values: Vec<f64>,
}

impl FieldCsv {
    pub fn into_field(self, geom: &DiscreteGeometry) -> Result<AxisymmetricField> {
        if (self.nr, self.nsigma) != (geom.nr, geom.ns)
            || (self.r_max - geom.r_max).abs() > 1e-9 * geom.r_max
        {
            return Err(Error::ShapeMismatch {
                expected: geom.shape(),
                found: (self.nr + 1, self.nsigma + 1),
            });
        }
        AxisymmetricField::from_values(geom.shape(), self.values)
    }
}

/// Parses the format of [`write_field_csv`]; rows must be ordered by r, then σ.
pub fn read_field_csv(input: impl BufRead) -> Result<FieldCsv> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == "r,sigma,u" => {}
        Some((_, Err(e))) => return Err(e.into()),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header r,sigma,u".into(),
            })
        }
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: k + 1,
                message: format!("{s:?}: {e}"),
            })
        };
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: k + 1,
                message: "expected three columns".into(),
            });
        }
        rows.push((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
    }
    let cols = rows.iter().take_while(|row| row.0 == rows[0].0).count();
    if cols < 2 || !rows.len().is_multiple_of(cols) {
        return Err(Error::Parse {
            line: 0,
            message: "rows do not form a tensor grid".into(),
        });
    }
    let nr = rows.len() / cols - 1;
    let r_max = rows.last().map(|row| row.0).unwrap_or(0.0);
    Ok(FieldCsv {
        r_max,
        nr,
        nsigma: cols - 1,
        values: rows.into_iter().map(|row| row.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn weight_sums_match_volumes() {
        let g = DiscreteGeometry::build(ManifoldModel::euclidean(3).unwrap(), 1.0, 64, 16).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!(rel(total, 4.0 * PI / 3.0) < 1e-6);

        let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 1.0, 64, 16)
            .unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!(rel(total, 4.0 * PI * (2f64.sinh() / 4.0 - 0.5)) < 1e-6);

        let g = DiscreteGeometry::build(ManifoldModel::euclidean(2).unwrap(), 1.0, 32, 8).unwrap();
        assert!(rel(g.weights().iter().sum(), PI) < 1e-10);
    }

    #[test]
    fn parity_and_size_rules() {
        let m = ManifoldModel::euclidean(3).unwrap();
        assert!(matches!(
            DiscreteGeometry::build(m, 1.0, 64, 7),
            Err(Error::Config(_))
        ));
        assert!(DiscreteGeometry::build(m, 1.0, 15, 8).is_err());
        assert!(DiscreteGeometry::build(m, 1.0, 16, 6).is_err());
        assert!(DiscreteGeometry::build(m, -1.0, 16, 8).is_err());
    }

    #[test]
    fn weights_are_symmetric_about_equator() {
        let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(4, 1.0).unwrap(), 2.0, 32, 12)
            .unwrap();
        for i in 0..=g.nr() {
            for j in 0..=g.nsigma() {
                assert_eq!(g.weight(i, j), g.weight(i, g.nsigma() - j));
                assert!(g.weight(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let g =
            DiscreteGeometry::build(ManifoldModel::euclidean(3).unwrap(), 1.0, 128, 16).unwrap();
        let one = AxisymmetricField::from_fn(&g, |_, _| 1.0);
        assert!(rel(integrate(&one, &g).unwrap(), 4.0 * PI / 3.0) < 1e-12);
        let c = AxisymmetricField::from_fn(&g, |_, s| s.cos());
        assert!(integrate(&c, &g).unwrap().abs() < 1e-14);
        let r = AxisymmetricField::from_fn(&g, |r, _| r);
        assert!(rel(integrate(&r, &g).unwrap(), PI) < 1e-4);
        assert_eq!(integrate_fn(&g, |_, _| 1.0), integrate(&one, &g).unwrap());
    }

    #[test]
    fn integrate_shape_mismatch() {
        let m = ManifoldModel::euclidean(3).unwrap();
        let g = DiscreteGeometry::build(m, 1.0, 32, 16).unwrap();
        let h = DiscreteGeometry::build(m, 1.0, 16, 16).unwrap();
        let f = AxisymmetricField::zeros(&h);
        assert!(matches!(
            integrate(&f, &g),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(dirichlet_energy(&f, &g).is_err());
    }

    #[test]
    fn quadrature_is_second_order() {
        let m = ManifoldModel::hyperbolic(3, 1.0).unwrap();
        // ∫ e^{-r} cos²σ dV = 2π ∫ e^{-r} sinh²r dr · ∫ cos²σ sinσ dσ
        let exact = {
            let radial = |r: f64| -> f64 {
                // e^{-r} sinh² r = (e^{r} - 2e^{-r} + e^{-3r})/4
                0.25 * (r.exp() - 1.0) - 0.5 * (1.0 - (-r).exp()) + (1.0 - (-3.0 * r).exp()) / 12.0
            };
            2.0 * PI * radial(2.0) * (2.0 / 3.0)
        };
        let err = |nr: usize, ns: usize| {
            let g = DiscreteGeometry::build(m, 2.0, nr, ns).unwrap();
            (integrate_fn(&g, |r, s| (-r).exp() * s.cos().powi(2)) - exact).abs()
        };
        let e1 = err(16, 8);
        let e2 = err(32, 16);
        assert!(e1 / e2 >= 3.5, "{e1} {e2}");
    }

    #[test]
    fn energy_examples() {
        let g = DiscreteGeometry::build(ManifoldModel::euclidean(3).unwrap(), 1.0, 64, 16).unwrap();
        let c = AxisymmetricField::from_fn(&g, |_, _| 3.0);
        assert_eq!(dirichlet_energy(&c, &g).unwrap(), 0.0);
        let u = AxisymmetricField::from_fn(&g, |r, _| r);
        assert!(rel(dirichlet_energy(&u, &g).unwrap(), 4.0 * PI / 3.0) < 1e-10);

        // u = cos σ on hyperbolic(1): ∫ sinh^{-2} sin²σ dV = 2π · R · 4/3; the pole
        // row is excluded, which costs half a radial cell.
        let nr = 400;
        let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 2.0, nr, 64)
            .unwrap();
        let u = AxisymmetricField::from_fn(&g, |_, s| s.cos());
        let exact = 2.0 * PI * 2.0 * 4.0 / 3.0;
        let got = dirichlet_energy(&u, &g).unwrap();
        assert!(rel(got, exact) < 3e-3, "{got} vs {exact}");
    }

    #[test]
    fn stiffness_is_energy_gradient() {
        let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 3.0, 20, 8)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = AxisymmetricField::from_fn(&g, |_, _| rng.gen_range(-1.0..1.0));
        let mut ku = vec![0.0; u.values().len()];
        apply_stiffness(&g, u.values(), &mut ku);
        let quad: f64 = ku.iter().zip(u.values()).map(|(a, b)| a * b).sum();
        assert!(rel(quad, dirichlet_energy(&u, &g).unwrap()) < 1e-12);
    }

    #[test]
    fn norms_agree_on_euclidean_and_for_constants() {
        let g = DiscreteGeometry::build(ManifoldModel::euclidean(3).unwrap(), 2.0, 64, 16).unwrap();
        let u = AxisymmetricField::from_fn(&g, |r, s| (1.0 + r) * s.cos());
        let (a, b) = weighted_euclidean_norms(&u, &g, 3.0).unwrap();
        assert!(rel(a, b) < 1e-13);
        let h = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 2.0, 64, 16)
            .unwrap();
        let one = AxisymmetricField::from_fn(&h, |_, _| 1.0);
        let (a, b) = weighted_euclidean_norms(&one, &h, 1.0).unwrap();
        let v = 4.0 * PI * (4f64.sinh() / 4.0 - 1.0);
        assert!(rel(a, v) < 1e-6 && rel(b, v) < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 2.0, 16, 8)
            .unwrap();
        let u = AxisymmetricField::from_fn(&g, |r, s| (r * 1.3).sin() + s.cos() / 3.0);
        let mut buf = Vec::new();
        write_field_csv(&u, &g, &mut buf).unwrap();
        let parsed = read_field_csv(&buf[..]).unwrap();
        assert_eq!((parsed.nr, parsed.nsigma), (16, 8));
        assert_eq!(parsed.into_field(&g).unwrap(), u);
        assert!(read_field_csv(&b"x,y\n"[..]).is_err());
    }

    #[test]
    fn pole_regularity() {
        let g = DiscreteGeometry::build(ManifoldModel::euclidean(3).unwrap(), 1.0, 16, 8).unwrap();
        let mut u = AxisymmetricField::from_fn(&g, |r, s| r + s);
        assert!(!u.is_pole_regular(1e-12));
        u.enforce_pole_regularity();
        assert!(u.is_pole_regular(0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn energy_nonnegative_and_zero_only_for_constants(seed in 0u64..10_000, c in -5.0f64..5.0) {
            let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 2.0, 16, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = AxisymmetricField::from_fn(&g, |_, _| rng.gen_range(-1.0..1.0));
            prop_assert!(dirichlet_energy(&u, &g).unwrap() > 0.0);
            let k = AxisymmetricField::from_fn(&g, |_, _| c);
            prop_assert!(dirichlet_energy(&k, &g).unwrap() == 0.0);
        }

        #[test]
        fn h1_dominates_weighted_norm(seed in 0u64..10_000) {
            let g = DiscreteGeometry::build(ManifoldModel::hyperbolic(3, 1.0).unwrap(), 3.0, 24, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = AxisymmetricField::from_fn(&g, |_, _| rng.gen_range(-1.0..1.0));
            let (m, e) = h1_norms_squared(&u, &g).unwrap();
            prop_assert!(m >= e * (1.0 - 1e-12));
        }
    }
}
