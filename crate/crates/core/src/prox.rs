//! Proximal mapping of `t ↦ λ|t|^q` under a quadratic coupling of weight γ.
//!
//! For a scalar `s` the prox minimizes
//! `h(t) = (γ/2)(t − s)² + λ|t|^q`. On `t > 0` (after reducing to `s ≥ 0`)
//! the derivative `h′(t) = γ(t − s) + λq t^{q−1}` is convex, decreasing up to
//! the inflection point `ν̄ = (λq(1−q)/γ)^{1/(2−q)}` and increasing after it.
//! The only candidates are therefore `0` and the larger root of `h′`, which is
//! bracketed by `[ν̄, s]`.

use crate::error::{Error, Result};

/// Magnitudes below this are treated as exact zeros by the prox.
pub const SUBNORMAL_GUARD: f64 = 1e-300;

/// Values of `h(t₂) − h(0)` within this band (scaled by `max(1, h(0))`) are a
/// tie, resolved in favour of 0.
pub const TIE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    gamma: f64,
    lam: f64,
    q: f64,
}

impl ProxParams {
    pub fn new(gamma: f64, lam: f64, q: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lam}"
            )));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1), got {q}"
            )));
        }
        Ok(Self { gamma, lam, q })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `((λ/γ)q(1−q))^{1/(2−q)}`: the inflection point of `h′`, and a lower
    /// bound on the magnitude of any nonzero prox output.
    pub fn nonzero_floor(&self) -> f64 {
        (self.lam * self.q * (1.0 - self.q) / self.gamma).powf(1.0 / (2.0 - self.q))
    }

    /// `h(t) = (γ/2)(t − s)² + λ|t|^q`.
    pub fn objective(&self, t: f64, s: f64) -> f64 {
        0.5 * self.gamma * (t - s) * (t - s) + self.lam * t.abs().powf(self.q)
    }
}

/// A global minimizer of `h(t) = (γ/2)(t − s)² + λ|t|^q`. Ties go to 0.
pub fn scalar_prox(s: f64, p: &ProxParams) -> f64 {
    if s.is_nan() {
        return f64::NAN;
    }
    let a = s.abs();
    if a < SUBNORMAL_GUARD {
        return 0.0;
    }
    let ProxParams { gamma, lam, q } = *p;
    let dh = |t: f64| gamma * (t - a) + lam * q * t.powf(q - 1.0);
    let nu = p.nonzero_floor();
    if nu >= a || dh(nu) > 0.0 {
        return 0.0;
    }

    // dh is increasing on [nu, a] with dh(nu) <= 0 < dh(a).
    let tol = 4.0 * f64::EPSILON * a;
    let (mut lo, mut hi) = (nu, a);
    let mut t = a;
    for _ in 0..200 {
        let f = dh(t);
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope = gamma + lam * q * (q - 1.0) * t.powf(q - 2.0);
        let mut next = t - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - t).abs();
        t = next;
        if moved <= tol || hi - lo <= tol {
            break;
        }
    }

    // h(t) − h(0) without cancellation against (γ/2)s²
    let diff = 0.5 * gamma * t * (t - 2.0 * a) + lam * t.powf(q);
    let h0 = 0.5 * gamma * a * a;
    if diff < -TIE_TOLERANCE * h0.max(1.0) {
        t.copysign(s)
    } else {
        0.0
    }
}

/// Coordinatewise [`scalar_prox`].
pub fn vector_prox(y: &[f64], p: &ProxParams) -> Vec<f64> {
    y.iter().map(|&s| scalar_prox(s, p)).collect()
}

/// Brute-force oracle for [`scalar_prox`]: argmin of `h` over a uniform grid on
/// `[−2|s|−1, 2|s|+1]`, refined by golden-section search on the neighbouring
/// cells of the best grid point. Intended for tests; `grid_points` should be at
/// least `1e5`.
pub fn brute_force_prox(s: f64, p: &ProxParams, grid_points: usize) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let n = grid_points.max(2);
    let radius = 2.0 * s.abs() + 1.0;
    let step = 2.0 * radius / n as f64;
    let h = |t: f64| p.objective(t, s);
    let (mut best_t, mut best_h) = (0.0, h(0.0));
    for i in 0..=n {
        let t = -radius + step * i as f64;
        let v = h(t);
        if v < best_h {
            best_t = t;
            best_h = v;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_t - step, best_t + step);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    let refined = 0.5 * (a + b);
    if h(refined) < best_h {
        refined
    } else {
        best_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(gamma: f64, lam: f64, q: f64) -> ProxParams {
        ProxParams::new(gamma, lam, q).unwrap()
    }

    #[test]
    fn zero_input_maps_to_zero() {
        assert_eq!(scalar_prox(0.0, &params(1.0, 1.0, 0.5)), 0.0);
        assert_eq!(scalar_prox(1e-301, &params(1.0, 1.0, 0.5)), 0.0);
        assert_eq!(brute_force_prox(0.0, &params(1.0, 1.0, 0.5), 100_000), 0.0);
    }

    #[test]
    fn small_input_thresholded() {
        // a grid scan over [-0.2, 0.2] at 1e-7 resolution: nothing beats h(0)
        let p = params(1.0, 1.0, 0.5);
        let s = 0.1;
        let h0 = p.objective(0.0, s);
        let mut i = -2_000_000i64;
        while i <= 2_000_000 {
            let t = i as f64 * 1e-7;
            assert!(p.objective(t, s) >= h0);
            i += 1;
        }
        assert_eq!(scalar_prox(s, &p), 0.0);
    }

    #[test]
    fn large_input_kept() {
        let p = params(1.0, 1.0, 0.5);
        let t = scalar_prox(10.0, &p);
        // stationarity: t - 10 + 0.5 t^{-1/2} = 0
        assert!((t - 10.0 + 0.5 / t.sqrt()).abs() < 1e-12);
        // reference root from a 30-digit solve, confirmed by a 1e-5 grid scan
        assert!((t - 9.840_610_768_298_15).abs() < 1e-9, "{t}");
        assert!(t >= p.nonzero_floor());
        let brute = brute_force_prox(10.0, &p, 100_000);
        assert!(p.objective(t, 10.0) <= p.objective(brute, 10.0) + 1e-12);
    }

    #[test]
    fn vector_prox_example() {
        let p = params(1.0, 1.0, 0.5);
        let out = vector_prox(&[0.1, 10.0], &p);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], scalar_prox(10.0, &p));
        assert_eq!(vector_prox(&[0.0; 3], &p), vec![0.0; 3]);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ProxParams::new(0.0, 1.0, 0.5).is_err());
        assert!(ProxParams::new(1.0, -1.0, 0.5).is_err());
        assert!(ProxParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ProxParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn brute_force_magnitude_monotone_in_s() {
        let p = params(2.0, 0.7, 0.5);
        let mut prev = 0.0;
        for i in 0..200 {
            let s = i as f64 * 0.02;
            let m = brute_force_prox(s, &p, 100_000).abs();
            assert!(m + 1e-6 >= prev, "s={s} m={m} prev={prev}");
            prev = m;
        }
    }

    proptest! {
        #[test]
        fn odd_symmetry(s in -50.0f64..50.0, gamma in 0.01f64..100.0, lam in 0.001f64..10.0, q in 0.05f64..0.95) {
            let p = params(gamma, lam, q);
            prop_assert_eq!(scalar_prox(-s, &p), -scalar_prox(s, &p));
        }

        #[test]
        fn never_worse_than_zero_or_identity(s in -50.0f64..50.0, gamma in 0.01f64..100.0, lam in 0.001f64..10.0, q in 0.05f64..0.95) {
            let p = params(gamma, lam, q);
            let t = scalar_prox(s, &p);
            let ht = p.objective(t, s);
            let bound = p.objective(0.0, s).min(p.objective(s, s));
            prop_assert!(ht <= bound + 1e-12 * bound.abs().max(1.0));
            if t != 0.0 {
                prop_assert!(t.abs() >= p.nonzero_floor() - 1e-12);
            }
        }

        #[test]
        fn stationary_points_recovered(scale in 1.01f64..20.0, gamma in 0.01f64..100.0, lam in 0.001f64..10.0, q in 0.05f64..0.95, neg in any::<bool>()) {
            let p = params(gamma, lam, q);
            // beyond (2λ(1−q)/γ)^{1/(2−q)} a stationary point is the global minimizer
            let global = (2.0 * lam * (1.0 - q) / gamma).powf(1.0 / (2.0 - q));
            let mut t = scale * global.max(p.nonzero_floor());
            if neg { t = -t; }
            let s = t + (lam * q / gamma) * t.signum() * t.abs().powf(q - 1.0);
            let got = scalar_prox(s, &p);
            prop_assert!((got - t).abs() <= 1e-9 * t.abs().max(1.0), "got {} want {}", got, t);
        }

        #[test]
        fn permutation_equivariance(y in proptest::collection::vec(-10.0f64..10.0, 1..20), rot in 0usize..20) {
            let p = params(1.3, 0.4, 0.5);
            let k = rot % y.len();
            let mut rotated = y.clone();
            rotated.rotate_left(k);
            let mut expected = vector_prox(&y, &p);
            expected.rotate_left(k);
            prop_assert_eq!(vector_prox(&rotated, &p), expected);
        }
    }
}
