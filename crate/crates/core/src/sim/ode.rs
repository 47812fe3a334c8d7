use crate::model::{Disutility, Drift, Problem};

/// Absolute tolerance of the adaptive Simpson rule used for the discounted
/// running disutility.
pub const SIMPSON_TOLERANCE: f64 = 1e-10;

const MAX_DEPTH: u32 = 40;

/// Population after moving for `dt` days in regime `i` from `x0`, using the
/// exact solution of the drift. The result is clamped into `[0, 1]`.
pub fn ode_segment(problem: &Problem, i: usize, x0: f64, dt: f64) -> f64 {
    if x0 <= 0.0 || dt <= 0.0 {
        return x0.clamp(0.0, 1.0);
    }
    let x = match &problem.drift {
        Drift::Logistic { mu, eta, capacity } => {
            logistic(mu - eta * problem.chain.discharge(i), mu / capacity[i], x0, dt)
        }
        Drift::Linear(coef) => x0 * libm::exp(coef[i] * dt),
        Drift::Still => x0,
    };
    x.clamp(0.0, 1.0)
}

/// `x' = rho x - kappa x^2` from `x0 > 0`.
fn logistic(rho: f64, kappa: f64, x0: f64, t: f64) -> f64 {
    if rho == 0.0 {
        return x0 / (1.0 + kappa * x0 * t);
    }
    let s = rho * t;
    if s > 0.0 {
        // divide through by e^{s} so nothing overflows
        let decay = libm::exp(-s);
        rho * x0 / (rho * decay - kappa * x0 * libm::expm1(-s))
    } else {
        rho * x0 * libm::exp(s) / (rho + kappa * x0 * libm::expm1(s))
    }
}

/// Classical fourth-order Runge-Kutta with sub-step at most `h`.
pub fn ode_segment_rk4(problem: &Problem, i: usize, x0: f64, dt: f64, h: f64) -> f64 {
    if dt <= 0.0 {
        return x0;
    }
    let steps = libm::ceil(dt / h).max(1.0) as usize;
    let h = dt / steps as f64;
    let f = |x: f64| problem.drift_at(i, x);
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x.clamp(0.0, 1.0)
}

/// `int_0^dt h(x(s)) e^{-delta (t0 + s)} ds` along the exact trajectory from
/// `x0` in regime `i`.
pub fn discounted_disutility(problem: &Problem, i: usize, x0: f64, t0: f64, dt: f64) -> f64 {
    if dt <= 0.0 {
        return 0.0;
    }
    let delta = problem.discount;
    let weight = libm::exp(-delta * t0);
    let flat = |c: f64| c * weight * -libm::expm1(-delta * dt) / delta;
    match problem.disutility {
        Disutility::Constant(c) => return flat(c),
        _ if x0 <= 0.0 => return flat(problem.disutility_at(0.0)),
        _ => {}
    }
    if matches!(problem.drift, Drift::Still) {
        return flat(problem.disutility_at(x0));
    }
    let g = |s: f64| problem.disutility_at(ode_segment(problem, i, x0, s)) * libm::exp(-delta * s);
    let (fa, fm, fb) = (g(0.0), g(0.5 * dt), g(dt));
    let whole = dt / 6.0 * (fa + 4.0 * fm + fb);
    weight * simpson(&g, 0.0, dt, fa, fm, fb, whole, SIMPSON_TOLERANCE / weight.max(1e-300), MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    g: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, RegimeChain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem() -> Problem {
        let chain = RegimeChain::frozen(RegimeChain::uniform_levels(41, 0.5, 1.25)).unwrap();
        Problem::from_params(chain, &ModelParams::reference()).unwrap()
    }

    #[test]
    fn origin_is_absorbing() {
        let p = problem();
        assert_eq!(ode_segment(&p, 3, 0.0, 7.0), 0.0);
    }

    #[test]
    fn interior_equilibrium_is_fixed() {
        let p = problem();
        let Drift::Logistic { mu, eta, capacity } = &p.drift else {
            unreachable!()
        };
        let xs = capacity[0] * (1.0 - eta * 0.5 / mu);
        for dt in [0.1, 1.0, 50.0] {
            assert!((ode_segment(&p, 0, xs, dt) - xs).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_rk4() {
        let p = problem();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let i = rng.random_range(0..41);
            let x0 = rng.random_range(0.0..1.0);
            let dt = rng.random_range(0.0..5.0);
            let exact = ode_segment(&p, i, x0, dt);
            let rk = ode_segment_rk4(&p, i, x0, dt, 1e-3);
            assert!((exact - rk).abs() <= 1e-8, "i={i} x0={x0} dt={dt}");
        }
    }

    #[test]
    fn zero_net_growth_limit() {
        // rho = 0 exactly: mu = eta Q
        let chain = RegimeChain::frozen(alloc::vec![5.0, 10.0]).unwrap();
        let mut params = ModelParams::reference();
        params.eta = 0.1;
        params.a = 0.0;
        let p = Problem::from_params(chain, &params).unwrap();
        let x = ode_segment(&p, 0, 0.4, 2.0);
        assert!((x - 0.4 / (1.0 + 0.5 * 0.4 * 2.0)).abs() < 1e-15);
        assert!((x - ode_segment_rk4(&p, 0, 0.4, 2.0, 1e-3)).abs() < 1e-10);
    }

    #[test]
    fn disutility_integral_against_fine_trapezoid() {
        let p = problem();
        let (i, x0, t0, dt) = (2, 0.3, 1.5, 4.0);
        let got = discounted_disutility(&p, i, x0, t0, dt);
        let n = 200_000;
        let h = dt / n as f64;
        let g = |s: f64| {
            let x = ode_segment(&p, i, x0, s);
            x * x * libm::exp(-0.2 * (t0 + s))
        };
        let mut trap = 0.5 * (g(0.0) + g(dt));
        for k in 1..n {
            trap += g(k as f64 * h);
        }
        trap *= h;
        assert!((got - trap).abs() < 1e-9, "{got} vs {trap}");
    }

    #[test]
    fn constant_disutility_is_exact() {
        let p = problem().with_disutility(Disutility::Constant(1.0));
        let v = discounted_disutility(&p, 0, 0.5, 0.0, 1e4);
        assert!((v - 5.0).abs() < 1e-12);
    }
}
