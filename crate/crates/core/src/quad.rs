//! Composite-Simpson quadrature with step halving.

/// Integrate `f` over `[a, b]`, refining until two successive Simpson
/// evaluations agree within `tol` (absolute). Deterministic: panel counts
/// double from 8 up to a fixed cap.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut n = 8usize;
    let mut prev = simpson_n(f, a, b, n);
    loop {
        n *= 2;
        let cur = simpson_n(f, a, b, n);
        if (cur - prev).abs() <= tol || n >= 1 << 20 {
            return cur;
        }
        prev = cur;
    }
}

fn simpson_n<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}
