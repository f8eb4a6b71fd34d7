//! Cross-correlations of scaled Laguerre functions `L_n(x) e^{-x/2}` on the
//! half line, by closed form and by quadrature.

/// `L_n^α(x)` by the three-term recurrence.
pub fn generalized_laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn scaled(n: usize, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        generalized_laguerre(n, 0.0, x) * (-x / 2.0).exp()
    }
}

/// `∫_0^∞ f_m(u + t) f_n(t) dt` in closed form, `f_k(x) = L_k(x) e^{-x/2}` on `x ≥ 0`.
pub fn closed_form(m: usize, n: usize, u: f64) -> f64 {
    use std::cmp::Ordering;
    match m.cmp(&n) {
        Ordering::Equal => (-u.abs() / 2.0).exp(),
        Ordering::Less if u <= 0.0 => generalized_laguerre(n - m, -1.0, -u) * (u / 2.0).exp(),
        Ordering::Greater if u > 0.0 => generalized_laguerre(m - n, -1.0, u) * (-u / 2.0).exp(),
        _ => 0.0,
    }
}

/// Composite Simpson approximation of the same integral on
/// `[max(0, −u), T]`; the step is shrunk so the interval splits evenly.
pub fn convolution_quadrature(m: usize, n: usize, u: f64, upper: f64, step: f64) -> f64 {
    let lo = (-u).max(0.0);
    if upper <= lo {
        return 0.0;
    }
    let mut panels = ((upper - lo) / step).ceil() as usize;
    panels += panels % 2;
    let h = (upper - lo) / panels as f64;
    let f = |t: f64| scaled(m, u + t) * scaled(n, t);
    let mut sum = f(lo) + f(upper);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + k as f64 * h);
    }
    sum * h / 3.0
}

/// Largest deviation between quadrature and closed form over `u_grid`.
pub fn laguerre_identity_error(m: usize, n: usize, u_grid: &[f64], step: f64) -> f64 {
    let top = u_grid.iter().copied().fold(0.0_f64, f64::max);
    let upper = top + 40.0 * (m + n).max(1) as f64;
    u_grid
        .iter()
        .map(|&u| (convolution_quadrature(m, n, u, upper, step) - closed_form(m, n, u)).abs())
        .fold(0.0, f64::max)
}
