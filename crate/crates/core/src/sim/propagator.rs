/// Exact flow over `dt` of `v'' + a v' + b v = 0`, written for `(v, v')`.
///
/// `b = |ξ|^{2σ}` and `a = |ξ|^{2δ}`. With `μ = a/2` and `d = b - μ²` the flow is
/// `e^{-μ dt} [C·I + S·(A + μI)]`, where `C, S` are `cos, sin/ω` (d > 0), `cosh, sinh/κ`
/// (d < 0) or `1, dt` (d = 0). The overdamped branch is written with the two real roots so
/// that strongly damped modes do not lose the slow root to cancellation.
pub fn linear_propagator_coefficients(xi_sq_sigma: f64, xi_sq_delta: f64, dt: f64) -> [[f64; 2]; 2] {
    let b = xi_sq_sigma;
    let mu = 0.5 * xi_sq_delta;
    let d = b - mu * mu;
    // (e^{-μt}C, e^{-μt}S)
    let (ec, es) = if d > 0.0 {
        let omega = d.sqrt();
        let decay = (-mu * dt).exp();
        let x = omega * dt;
        (decay * x.cos(), decay * x.sin() / omega)
    } else if d < 0.0 {
        let kappa = (-d).sqrt();
        // slow root -μ+κ = -b/(μ+κ), fast root -μ-κ
        let slow = -b / (mu + kappa);
        let fast = -mu - kappa;
        let e_slow = (slow * dt).exp();
        let e_fast = (fast * dt).exp();
        // (e_slow - e_fast)/(2κ) = e_fast·expm1(2κt)/(2κ), exact as κ → 0
        let s = if 2.0 * kappa * dt < 1.0 {
            e_fast * (2.0 * kappa * dt).exp_m1() / (2.0 * kappa)
        } else {
            (e_slow - e_fast) / (2.0 * kappa)
        };
        (0.5 * (e_slow + e_fast), s)
    } else {
        let decay = (-mu * dt).exp();
        (decay, decay * dt)
    };
    [[ec + mu * es, es], [-b * es, ec - mu * es]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rk4(a: f64, b: f64, y: [f64; 2], t: f64, steps: usize) -> [f64; 2] {
        let h = t / steps as f64;
        let f = |y: [f64; 2]| [y[1], -b * y[0] - a * y[1]];
        let mut y = y;
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    fn apply(m: [[f64; 2]; 2], y: [f64; 2]) -> [f64; 2] {
        [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]
    }

    #[test]
    fn zero_symbol_is_free_drift() {
        assert_eq!(linear_propagator_coefficients(0.0, 0.0, 0.3), [[1.0, 0.3], [0.0, 1.0]]);
    }

    #[test]
    fn pure_friction_mean_mode() {
        let m = linear_propagator_coefficients(0.0, 1.0, 0.5);
        assert!((m[0][1] - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((m[1][1] - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(m[1][0], 0.0);
    }

    #[test]
    fn matches_rk4_in_all_regimes() {
        // under-, critically and over-damped, plus a near-critical pair
        for &(a, b) in &[(0.3, 2.0), (2.0, 1.0), (5.0, 0.5), (2.0, 1.0 + 1e-9), (40.0, 1e-3)] {
            let dt = 0.01;
            let m = linear_propagator_coefficients(b, a, dt);
            let mut y = [1.0, -0.4];
            for _ in 0..1000 {
                y = apply(m, y);
            }
            let reference = rk4(a, b, [1.0, -0.4], 10.0, 200_000);
            let scale = reference[0].abs().max(reference[1].abs());
            for i in 0..2 {
                assert!((y[i] - reference[i]).abs() < 1e-10 * scale, "a={a} b={b} i={i}: {} vs {}", y[i], reference[i]);
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let m1 = linear_propagator_coefficients(3.0, 0.7, 0.2);
        let m2 = linear_propagator_coefficients(3.0, 0.7, 0.4);
        let y = apply(m1, apply(m1, [0.3, 1.1]));
        let z = apply(m2, [0.3, 1.1]);
        assert!((y[0] - z[0]).abs() < 1e-14 && (y[1] - z[1]).abs() < 1e-14);
    }

    #[test]
    fn stiff_modes_stay_bounded() {
        let m = linear_propagator_coefficients(1e12, 1e6, 0.5);
        assert!(m.iter().flatten().all(|v| v.is_finite() && v.abs() <= 1.0));
        let m = linear_propagator_coefficients(1e8, 1e10, 0.5);
        assert!(m.iter().flatten().all(|v| v.is_finite()));
    }
}
