//! Quadrature rules shared by the special functions, the solvers and the tests.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rules of common orders.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static R8: OnceLock<GaussLegendre> = OnceLock::new();
    static R16: OnceLock<GaussLegendre> = OnceLock::new();
    static R32: OnceLock<GaussLegendre> = OnceLock::new();
    static R64: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        8 => R8.get_or_init(|| GaussLegendre::new(8)),
        16 => R16.get_or_init(|| GaussLegendre::new(16)),
        32 => R32.get_or_init(|| GaussLegendre::new(32)),
        64 => R64.get_or_init(|| GaussLegendre::new(64)),
        _ => panic!("no cached Gauss-Legendre rule of order {n}"),
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate> {
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if pieces.len() >= max_intervals {
            return Err(Error::Quadrature { estimate: err });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, pv, pe) = pieces.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, m);
        let (v2, e2) = gk15(&f, m, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        pieces.push((lo, m, v1, e1));
        pieces.push((m, hi, v2, e2));
        if err < 0.0 {
            err = pieces.iter().map(|p| p.3).sum();
        }
    }
    let value = pieces.iter().map(|p| p.2).sum();
    Ok(Estimate { value, error: err })
}

/// Adaptive quadrature on [a, ∞) through t = a + s/(1 - s).
pub fn adaptive_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let one = 1.0 - s;
        f(a + s / one) / (one * one)
    };
    adaptive(g, 0.0, 1.0, abs_tol, rel_tol, 4000)
}

/// Precomputed composite Gauss–Legendre nodes on [0, upper] for sine transforms
/// `∫₀^upper g(ω) sin(ωτ) dω` evaluated at many τ.
#[derive(Debug, Clone)]
pub struct SineTransform {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
}

impl SineTransform {
    /// `panel` must resolve both the oscillation at the largest τ and the scale of `g`.
    pub fn new<G: Fn(f64) -> f64>(g: G, upper: f64, panel: f64) -> Self {
        let rule = gauss_legendre(8);
        let n_panels = (upper / panel).ceil().max(1.0) as usize;
        let width = upper / n_panels as f64;
        let mut nodes = Vec::with_capacity(8 * n_panels);
        let mut weighted = Vec::with_capacity(8 * n_panels);
        for p in 0..n_panels {
            let lo = p as f64 * width;
            for (x, w) in rule.mapped(lo, lo + width) {
                nodes.push(x);
                weighted.push(w * g(x));
            }
        }
        Self { nodes, weighted }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weighted)
            .map(|(w, gw)| gw * (w * tau).sin())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let r = GaussLegendre::new(10);
        let v = r.integrate(|x| x.powi(18) + 3.0 * x.powi(5), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_sharp_peak() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let est = adaptive(f, -1.0, 1.0, 1e-12, 1e-12, 2000).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((est.value - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let est = adaptive_semi_infinite(|t| (-t).exp(), 2.0, 1e-14, 1e-13).unwrap();
        assert!((est.value - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn sine_transform_of_gaussian() {
        // ∫₀^∞ e^{-ω} sin(ωτ) dω = τ / (1 + τ²)
        let st = SineTransform::new(|w| (-w).exp(), 60.0, 0.1);
        for tau in [0.1, 1.0, 7.0, 20.0] {
            let exact = tau / (1.0 + tau * tau);
            assert!((st.eval(tau) - exact).abs() < 1e-12, "tau={tau}");
        }
    }
}
