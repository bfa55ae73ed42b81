//! Small fixed-rule quadratures used to build grid weights.

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre rule on `[a, b]`; exact for polynomials of degree 9.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut g: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * g(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite Simpson rule with `intervals` subintervals (rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, intervals: usize, mut g: F) -> f64 {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(x);
    }
    acc * h / 3.0
}

/// Integrals of the two hat functions living on `[a, b]` against `g`:
/// returns `(∫ g·(b-x)/(b-a), ∫ g·(x-a)/(b-a))`.
pub fn hat_moments<F: FnMut(f64) -> f64>(a: f64, b: f64, mut g: F) -> (f64, f64) {
    let len = b - a;
    let half = 0.5 * len;
    let mid = 0.5 * (a + b);
    let mut left = 0.0;
    let mut right = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        let t = mid + half * x;
        let v = w * g(t);
        left += v * (b - t) / len;
        right += v * (t - a) / len;
    }
    (left * half, right * half)
}
