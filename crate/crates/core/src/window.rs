//! Smooth compactly supported windows.

fn smooth_zero(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    let a = smooth_zero(t);
    let b = smooth_zero(1.0 - t);
    a / (a + b)
}

/// Plateau window: 1 for |x − c| ≤ radius/2, 0 for |x − c| ≥ radius, C^∞ between.
pub fn plateau(x: &[f64], center: &[f64], radius: f64) -> f64 {
    let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / radius;
    1.0 - smooth_step(2.0 * r - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(&[0.1, 0.0], &[0.0, 0.0], 0.4), 1.0);
        assert_eq!(plateau(&[0.4, 0.0], &[0.0, 0.0], 0.4), 0.0);
        let mid = plateau(&[0.3, 0.0], &[0.0, 0.0], 0.4);
        assert!((mid - 0.5).abs() < 1e-12);
    }
}
