use crate::error::{MmError, Result};
use crate::special::{bisect_increasing, erf, gamma_p, integrate};

/// `I(r) = γ¹[0, r] = Φ(r) − ½`.
pub fn std_normal_interval(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(MmError::arg("I(r) needs r ≥ 0"));
    }
    Ok(0.5 * erf(r / std::f64::consts::SQRT_2))
}

/// `I⁻¹(v)` for `v ∈ [0, ½)`.
pub fn std_normal_interval_inv(v: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&v) {
        return Err(MmError::arg(format!("I⁻¹ needs a value in [0, ½), got {v}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    Ok(bisect_increasing(|r| 0.5 * erf(r / std::f64::consts::SQRT_2), v, 0.0, 40.0))
}

/// `2λ I⁻¹((1 − κ)/2)`: the observable diameter of `γ¹_{λ²}` at `κ`.
pub fn gaussian_obs_diameter(lambda: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(MmError::arg("κ must lie in (0, 1)"));
    }
    Ok(2.0 * lambda * std_normal_interval_inv((1.0 - kappa) / 2.0)?)
}

/// `γ^{n+1}{θ√n ≤ ‖x‖₂ ≤ θ⁻¹√n}`, from the chi-square law of `‖x‖₂²`.
pub fn gaussian_annulus_mass(n: usize, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(MmError::arg("θ must lie in (0, 1]"));
    }
    if theta == 1.0 {
        return Ok(0.0);
    }
    let (a, n) = ((n as f64 + 1.0) / 2.0, n as f64);
    Ok((gamma_p(a, n / (2.0 * theta * theta)) - gamma_p(a, theta * theta * n / 2.0)).max(0.0))
}

/// Normalized volume of a geodesic ball of radius `t` in `S^n(r)`:
/// `∫₀^{t/r} sin^{n−1} / ∫₀^π sin^{n−1}`.
pub fn spherical_cap_mass(n: usize, t: f64, r: f64) -> Result<f64> {
    use std::f64::consts::{FRAC_PI_2, PI};
    if n == 0 || !(r > 0.0) || !(t >= 0.0 && t <= PI * r) {
        return Err(MmError::arg("cap needs n ≥ 1, r > 0 and 0 ≤ t ≤ πr"));
    }
    let phi = t / r;
    let f = |s: f64| s.sin().powi(n as i32 - 1);
    let half = integrate(&f, 0.0, FRAC_PI_2, 1e-15);
    if phi <= FRAC_PI_2 {
        Ok((integrate(&f, 0.0, phi, 1e-15) / (2.0 * half)).min(0.5))
    } else {
        Ok((1.0 - integrate(&f, 0.0, PI - phi, 1e-15) / (2.0 * half)).max(0.5))
    }
}

/// Shortest interval carrying mass `q` under the Rayleigh law `r e^{−r²/2} dr`; the
/// interval's length is `diam(([0, ∞), r e^{−r²/2} dr); q)`.
pub fn rayleigh_min_window(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(MmError::arg("window mass must lie in (0, 1)"));
    }
    let density = |r: f64| r * (-r * r / 2.0).exp();
    // right end of the window of mass q starting at a
    let right = |a: f64| (-2.0 * ((-a * a / 2.0).exp() - q).ln()).sqrt();
    let a_max = (-2.0 * q.ln()).sqrt();
    // the optimal window has equal density at both ends
    let (mut lo, mut hi) = (0.0f64, a_max);
    while hi - lo > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if density(mid) < density(right(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = [lo, hi].into_iter().map(|a| (a, right(a))).min_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)));
    Ok(best.expect("two candidates"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_interval_values() {
        assert_eq!(std_normal_interval(0.0).unwrap(), 0.0);
        assert!((std_normal_interval_inv(0.45).unwrap() - 1.6448536269514722).abs() < 1e-12);
        assert!((gaussian_obs_diameter(1.0, 0.1).unwrap() - 3.2897072539029444).abs() < 1e-12);
        assert!(std_normal_interval_inv(0.5).is_err());
        let r = std_normal_interval_inv(0.3).unwrap();
        assert!((std_normal_interval(r).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn annulus_values() {
        assert_eq!(gaussian_annulus_mass(10, 1.0).unwrap(), 0.0);
        assert!((gaussian_annulus_mass(100, 0.8).unwrap() - 0.9981342647869573).abs() < 1e-12);
        assert!((gaussian_annulus_mass(500, 0.9).unwrap() - 0.9990937909640909).abs() < 1e-12);
        assert!((gaussian_annulus_mass(50, 0.9).unwrap() - 0.709601420621847).abs() < 1e-12);
    }

    #[test]
    fn annulus_grows_with_dimension() {
        for theta in [0.5, 0.8, 0.9, 0.95] {
            let mut last = 0.0;
            for n in [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 5000] {
                let v = gaussian_annulus_mass(n, theta).unwrap();
                assert!(v >= last - 1e-15, "θ = {theta}, n = {n}");
                last = v;
            }
            assert!(last > 0.99);
        }
    }

    #[test]
    fn cap_values() {
        use std::f64::consts::PI;
        assert_eq!(spherical_cap_mass(4, PI * 2.0, 2.0).unwrap(), 1.0);
        assert!((spherical_cap_mass(7, PI / 2.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((spherical_cap_mass(2, PI / 3.0, 1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((spherical_cap_mass(10, 0.5, 1.0).unwrap() - 8.784258984370429e-05).abs() < 1e-12);
        assert!((spherical_cap_mass(10, 1.0, 1.0).unwrap() - 0.03487460015292375).abs() < 1e-12);
        assert!((spherical_cap_mass(200, 1.4, 1.0).unwrap() - 0.007796220015915375).abs() < 1e-12);
        let lo = spherical_cap_mass(3, 2.0, 1.0).unwrap();
        assert!((lo + spherical_cap_mass(3, PI - 2.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_window_matches_pinned_value_and_a_sweep() {
        let (a, b) = rayleigh_min_window(0.9).unwrap();
        assert!((b - a - 2.0459020932026735).abs() < 1e-10, "{}", b - a);
        // independent route: cumulative Simpson on a grid, then a two-pointer sweep
        let h = 1e-3;
        let density = |r: f64| r * (-r * r / 2.0).exp();
        let grid: Vec<f64> = (0..=12_000).map(|i| i as f64 * h).collect();
        let mut cdf = vec![0.0];
        for w in grid.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            let last = *cdf.last().unwrap();
            cdf.push(last + h / 6.0 * (density(w[0]) + 4.0 * density(m) + density(w[1])));
        }
        let (mut best, mut j) = (f64::INFINITY, 0);
        for i in 0..grid.len() {
            while j < grid.len() && cdf[j] - cdf[i] < 0.9 {
                j += 1;
            }
            if j == grid.len() {
                break;
            }
            best = best.min(grid[j] - grid[i]);
        }
        assert!((best - (b - a)).abs() < 2.0 * h, "{best}");
    }
}
