//! Polarization about the north pole, foliated Schwarz diagnostics, and separability.

use crate::discretization::{dirichlet_energy, AxisymmetricField, DiscreteGeometry};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Mixed,
}

impl Sign {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Decreasing,
    Increasing,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Decreasing => "decreasing",
            Direction::Increasing => "increasing",
        }
    }
}

/// Sign, radiality and σ-monotonicity of a field, with the symmetry axis at the north pole.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub sign: Sign,
    /// Largest σ-variation of any row is below tolerance.
    pub is_radial: bool,
    pub is_sigma_monotone: bool,
    /// Decreasing for positive fields, increasing for negative ones; `None` when not monotone.
    pub direction: Option<Direction>,
    /// The field's σ-maximum sat at the south pole and the axis was flipped before testing.
    pub axis_flipped: bool,
    /// Rows with at least one drop larger than the tolerance.
    pub strict_rows: usize,
    pub polarization_energy_gap: f64,
    pub product_form_residual: f64,
}

impl SymmetryReport {
    pub fn theta0_convention(&self) -> &'static str {
        "north pole"
    }

    /// One-signed and either radial or monotone in σ.
    pub fn foliated_schwarz(&self) -> bool {
        self.sign != Sign::Mixed && (self.is_radial || self.is_sigma_monotone)
    }
}

/// u_H(r, σ) = max(u(r,σ), u(r,π−σ)) on the northern half, the min on the southern half.
pub fn polarize(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<AxisymmetricField> {
    if field.shape() != geom.shape() {
        return Err(Error::ShapeMismatch {
            expected: geom.shape(),
            found: field.shape(),
        });
    }
    let ns = geom.nsigma();
    let mut out = field.clone();
    for i in 0..field.shape().0 {
        let row = out.row_mut(i);
        for j in 0..ns / 2 {
            let (a, b) = (row[j], row[ns - j]);
            row[j] = a.max(b);
            row[ns - j] = a.min(b);
        }
    }
    Ok(out)
}

// Σ w_ij g(i, u_ij), summing mirrored nodes first so that a pairwise swap
// leaves every partial sum bit-identical.
fn mirrored_sum(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    mut g: impl FnMut(usize, f64) -> f64,
) -> f64 {
    let ns = geom.nsigma();
    let mut total = 0.0;
    for i in 0..field.shape().0 {
        let row = field.row(i);
        let mut acc = geom.weight(i, ns / 2) * g(i, row[ns / 2]);
        for j in 0..ns / 2 {
            acc += geom.weight(i, j) * (g(i, row[j]) + g(i, row[ns - j]));
        }
        total += acc;
    }
    total
}

/// Absolute changes of the three integrals under polarization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationGaps {
    pub dirichlet: f64,
    pub primitive: f64,
    pub fu: f64,
}

pub fn polarization_invariance_check(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    f: &dyn Nonlinearity,
) -> Result<PolarizationGaps> {
    let polar = polarize(field, geom)?;
    let rows: Vec<_> = geom.r_nodes().iter().map(|&r| f.at_radius(r)).collect();
    let big_f = |u: &AxisymmetricField| mirrored_sum(u, geom, |i, s| rows[i](s).big_f);
    let fu = |u: &AxisymmetricField| mirrored_sum(u, geom, |i, s| rows[i](s).f * s);
    Ok(PolarizationGaps {
        dirichlet: (dirichlet_energy(&polar, geom)? - dirichlet_energy(field, geom)?).abs(),
        primitive: (big_f(&polar) - big_f(field)).abs(),
        fu: (fu(&polar) - fu(field)).abs(),
    })
}

/// Invariance under the whole family of reflections σ_a ↔ σ_b (a < b) that keep the larger
/// value on the side of the north pole. Holds iff every row is nonincreasing in σ.
pub fn polarization_family_invariant(field: &AxisymmetricField, tol: f64) -> bool {
    (0..field.shape().0).all(|i| {
        let row = field.row(i);
        (0..row.len()).all(|a| (a + 1..row.len()).all(|b| row[a] >= row[b] - tol))
    })
}

pub fn foliated_schwarz_check(
    field: &AxisymmetricField,
    geom: &DiscreteGeometry,
    tol: f64,
) -> Result<SymmetryReport> {
    if field.shape() != geom.shape() {
        return Err(Error::ShapeMismatch {
            expected: geom.shape(),
            found: field.shape(),
        });
    }
    field.validate()?;
    let (rows, cols) = field.shape();
    // The Dirichlet row is zero by construction and carries no sign information.
    let interior = rows - 1;
    let scale = field.max_abs();
    let eps = tol * scale;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..interior {
        for &v in field.row(i) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let sign = if scale == 0.0 {
        Sign::Mixed
    } else if lo >= -eps && hi > eps {
        Sign::Positive
    } else if hi <= eps && lo < -eps {
        Sign::Negative
    } else {
        Sign::Mixed
    };
    let s = if sign == Sign::Negative { -1.0 } else { 1.0 };

    let variation = |row: &[f64]| {
        let (a, b) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        b - a
    };
    let (widest, max_var) = (0..rows)
        .map(|i| (i, variation(field.row(i))))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let is_radial = max_var <= eps;

    let argmax = field
        .row(widest)
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| {
            if s * v > acc.1 {
                (j, s * v)
            } else {
                acc
            }
        })
        .0;
    let axis_flipped = !is_radial && argmax > (cols - 1) / 2;

    let mut monotone = true;
    let mut strict_rows = 0;
    for i in 0..rows {
        let row: Vec<f64> = if axis_flipped {
            field.row(i).iter().rev().map(|v| s * v).collect()
        } else {
            field.row(i).iter().map(|v| s * v).collect()
        };
        let mut strict = false;
        for w in row.windows(2) {
            if w[1] > w[0] + eps {
                monotone = false;
            }
            if w[0] - w[1] > eps {
                strict = true;
            }
        }
        strict_rows += strict as usize;
    }
    let is_sigma_monotone = monotone;
    let direction = monotone.then_some({
        if s > 0.0 {
            Direction::Decreasing
        } else {
            Direction::Increasing
        }
    });

    let polar = polarize(field, geom)?;
    let polarization_energy_gap =
        (dirichlet_energy(&polar, geom)? - dirichlet_energy(field, geom)?).abs();
    let product_form_residual = if scale == 0.0 {
        0.0
    } else {
        product_form_residual(field, geom)?
    };

    Ok(SymmetryReport {
        sign,
        is_radial,
        is_sigma_monotone,
        direction,
        axis_flipped,
        strict_rows,
        polarization_energy_gap,
        product_form_residual,
    })
}

/// Relative error of the best rank-one approximation R(r)h(σ) in the quadrature-weighted
/// Frobenius norm, by alternating least squares.
pub fn product_form_residual(field: &AxisymmetricField, geom: &DiscreteGeometry) -> Result<f64> {
    if field.shape() != geom.shape() {
        return Err(Error::ShapeMismatch {
            expected: geom.shape(),
            found: field.shape(),
        });
    }
    let (rows, cols) = field.shape();
    // The weights factor as c·m_r(i)·m_σ(j), so scaling rows and columns by their square
    // roots turns the weighted problem into an unweighted one.
    let sr: Vec<f64> = geom
        .radial_mass()
        .iter()
        .map(|m| (geom.angular_area() * m).sqrt())
        .collect();
    let ss: Vec<f64> = geom.sigma_mass().iter().map(|m| m.sqrt()).collect();
    let b: Vec<f64> = (0..rows * cols)
        .map(|k| sr[k / cols] * ss[k % cols] * field.values()[k])
        .collect();
    let norm2: f64 = b.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(Error::Domain("product form of the zero field".into()));
    }
    let (a, h) = rank_one_als(&b, rows, cols, 1e-10, 10_000);
    let mut err2 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let d = b[i * cols + j] - a[i] * h[j];
            err2 += d * d;
        }
    }
    Ok((err2 / norm2).sqrt())
}

/// Best rank-one factors `a hᵀ` of the row-major matrix `b`.
fn rank_one_als(
    b: &[f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, Vec<f64>) {
    // Start from the column of largest norm so the first update cannot vanish.
    let best_col = (0..cols)
        .max_by(|&x, &y| {
            let nx: f64 = (0..rows).map(|i| b[i * cols + x].powi(2)).sum();
            let ny: f64 = (0..rows).map(|i| b[i * cols + y].powi(2)).sum();
            nx.total_cmp(&ny)
        })
        .unwrap_or(0);
    let mut a: Vec<f64> = (0..rows).map(|i| b[i * cols + best_col]).collect();
    let mut h = vec![0.0; cols];
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        let aa: f64 = a.iter().map(|v| v * v).sum();
        for (j, hj) in h.iter_mut().enumerate() {
            *hj = (0..rows).map(|i| b[i * cols + j] * a[i]).sum::<f64>() / aa;
        }
        let hh: f64 = h.iter().map(|v| v * v).sum();
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = b[i * cols..(i + 1) * cols]
                .iter()
                .zip(&h)
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / hh;
        }
        let s = a.iter().map(|v| v * v).sum::<f64>().sqrt()
            * h.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (s - prev).abs() <= tol * s {
            break;
        }
        prev = s;
    }
    (a, h)
}
