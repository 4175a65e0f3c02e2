//! Independent integration oracles for unit tests. Nothing here shares code
//! with the library's quadrature paths.

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// One Simpson panel: end points, samples at both ends and the midpoint,
/// and the panel's Simpson estimate.
#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Self {
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        Self::from_samples(a, b, fa, fm, fb)
    }

    fn from_samples(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Self {
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        Self {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        }
    }
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let left = Panel::from_samples(p.a, m, p.fa, f(0.5 * (p.a + m)), p.fm);
    let right = Panel::from_samples(m, p.b, p.fm, f(0.5 * (m + p.b)), p.fb);
    let delta = left.whole + right.whole - p.whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left.whole + right.whole + delta / 15.0;
    }
    simpson_step(f, left, 0.5 * tol, depth - 1) + simpson_step(f, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson with Richardson correction, started on 64 panels so
/// narrow peaks are not missed.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            simpson_step(&f, Panel::new(&f, lo, lo + h), tol / panels as f64, 40)
        })
        .sum()
}

/// `∫ f dμ` over `[-12, 12]` for the standard Gaussian `μ`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F) -> f64 {
    adaptive_simpson(|x| f(x) * normal_pdf(x), -12.0, 12.0, 1e-13)
}
