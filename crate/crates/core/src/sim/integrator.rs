use nalgebra::SVector;

/// One classical fourth-order Runge–Kutta step of `ẋ = f(x)`.
pub fn rk4_step<const N: usize, E>(
    x: &SVector<f64, N>,
    dt: f64,
    mut f: impl FnMut(&SVector<f64, N>) -> Result<SVector<f64, N>, E>,
) -> Result<SVector<f64, N>, E> {
    let k1 = f(x)?;
    let k2 = f(&(x + k1 * (dt / 2.0)))?;
    let k3 = f(&(x + k2 * (dt / 2.0)))?;
    let k4 = f(&(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;
    use std::convert::Infallible;

    fn oscillator(x: &Vector2<f64>) -> Result<Vector2<f64>, Infallible> {
        Ok(Vector2::new(x.y, -x.x))
    }

    fn integrate(dt: f64, t_end: f64) -> Vector2<f64> {
        let mut x = Vector2::new(1.0, 0.0);
        for _ in 0..(t_end / dt).round() as usize {
            x = rk4_step(&x, dt, oscillator).unwrap();
        }
        x
    }

    #[test]
    fn fourth_order_on_harmonic_oscillator() {
        let exact = Vector2::new(2f64.cos(), -2f64.sin());
        let e1 = (integrate(0.1, 2.0) - exact).norm();
        let e2 = (integrate(0.05, 2.0) - exact).norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.9 && order < 4.1, "{order}");
    }

    #[test]
    fn constant_acceleration_is_exact() {
        let f = |x: &Vector2<f64>| Ok::<_, Infallible>(Vector2::new(x.y, -9.81));
        let mut x = Vector2::zeros();
        for _ in 0..1000 {
            x = rk4_step(&x, 1e-3, f).unwrap();
        }
        assert!((x.x + 4.905).abs() < 1e-12);
    }
}
