use serde::{Deserialize, Serialize};

/// Cubic (or lower) polynomial in local time `τ = t − t_a`, valid on
/// `[t_a, t_b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPiece {
    /// `c[0] + c[1]·τ + c[2]·τ² + c[3]·τ³`
    pub coeffs: [f64; 4],
    pub t_a: f64,
    pub t_b: f64,
}

impl PolynomialPiece {
    pub fn constant(value: f64, t_a: f64, t_b: f64) -> Self {
        PolynomialPiece { coeffs: [value, 0.0, 0.0, 0.0], t_a, t_b }
    }

    /// Cubic through `(t_a, p0, v0)` and `(t_b, p1, v1)`.
    pub fn hermite(p0: f64, v0: f64, p1: f64, v1: f64, t_a: f64, t_b: f64) -> Self {
        let h = t_b - t_a;
        let c2 = (3.0 * (p1 - p0) - (2.0 * v0 + v1) * h) / (h * h);
        let c3 = (2.0 * (p0 - p1) + (v0 + v1) * h) / (h * h * h);
        PolynomialPiece { coeffs: [p0, v0, c2, c3], t_a, t_b }
    }

    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }

    pub fn value(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs;
        let s = t - self.t_a;
        c0 + s * (c1 + s * (c2 + s * c3))
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let [_, c1, c2, c3] = self.coeffs;
        let s = t - self.t_a;
        c1 + s * (2.0 * c2 + s * 3.0 * c3)
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        let [_, _, c2, c3] = self.coeffs;
        2.0 * c2 + 6.0 * c3 * (t - self.t_a)
    }

    /// Largest `|acceleration|` on the window; linear in time, so an endpoint.
    pub fn max_abs_acceleration(&self) -> f64 {
        self.acceleration(self.t_a).abs().max(self.acceleration(self.t_b).abs())
    }
}

/// Per-axis acceleration bounds for a move in direction `theta`.
pub fn axis_accel_bound(a_max: f64, theta: f64) -> (f64, f64) {
    (a_max * theta.cos().abs(), a_max * theta.sin().abs())
}

/// Signed cruise velocity of the three-phase profile covering `x0 → xf` in
/// `[t0, tf]` with acceleration bound `a`, or `None` when no such profile
/// exists (the move is too long for the window).
pub fn cruise_velocity(x0: f64, xf: f64, t0: f64, tf: f64, a: f64) -> Option<f64> {
    let dist = (xf - x0).abs();
    let span = tf - t0;
    let disc = span * span * a * a - 4.0 * dist * a;
    if disc < 0.0 {
        return None;
    }
    // (Ta − √D)/2 cancels badly when D ≈ T²a²; use the conjugate form.
    let v = 2.0 * dist * a / (span * a + disc.sqrt());
    Some(v.copysign(xf - x0))
}

/// How a profile deviated from the requested window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Cruise at the speed cap; the move ends late.
    SpeedCap,
    /// The speed cap cannot be reached: accelerate then decelerate with no
    /// cruise; the move ends late.
    Triangular,
}

/// One axis of a translation.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisProfile {
    pub pieces: Vec<PolynomialPiece>,
    /// Actual end time; later than the requested one after a fallback.
    pub t_end: f64,
    pub fallback: Option<Fallback>,
}

/// Rest-to-rest motion `x0 → xf` starting at `t0`, meant to end at `tf`:
/// accelerate at `a`, cruise, decelerate at `a`. When the window is too short
/// the cruise speed is capped at `v_cap` (or never reached) and the profile
/// ends after `tf`.
pub fn refine_translation(x0: f64, xf: f64, t0: f64, tf: f64, a: f64, v_cap: f64) -> AxisProfile {
    if xf == x0 || a <= 0.0 {
        return AxisProfile { pieces: vec![PolynomialPiece::constant(x0, t0, tf)], t_end: tf, fallback: None };
    }
    let dist = (xf - x0).abs();
    let dir = (xf - x0).signum();
    let (speed, t_end, fallback) = match cruise_velocity(x0, xf, t0, tf, a) {
        Some(v) => (v.abs(), tf, None),
        None if v_cap > 0.0 && dist >= v_cap * v_cap / a => {
            (v_cap, t0 + dist / v_cap + v_cap / a, Some(Fallback::SpeedCap))
        }
        None => {
            let peak = (dist * a).sqrt();
            (peak, t0 + 2.0 * peak / a, Some(Fallback::Triangular))
        }
    };
    let t_r = (speed / a).min(0.5 * (t_end - t0));
    let v = dir * speed;
    let acc = dir * a;

    let mut pieces = Vec::with_capacity(3);
    let t1 = t0 + t_r;
    let t2 = t_end - t_r;
    pieces.push(PolynomialPiece { coeffs: [x0, 0.0, 0.5 * acc, 0.0], t_a: t0, t_b: t1 });
    let x_r = x0 + 0.5 * acc * t_r * t_r;
    if t2 > t1 {
        pieces.push(PolynomialPiece { coeffs: [x_r, v, 0.0, 0.0], t_a: t1, t_b: t2 });
    }
    let x_s = x_r + v * (t2 - t1).max(0.0);
    pieces.push(PolynomialPiece::hermite(x_s, v, xf, 0.0, t2.max(t1), t_end));
    pieces.retain(|p| p.duration() > 0.0);
    AxisProfile { pieces, t_end, fallback }
}

/// Cubic from rest at `theta0` to rest at the branch of `thetaf` closest to
/// `theta0`.
pub fn refine_rotation(theta0: f64, thetaf: f64, t0: f64, tf: f64) -> PolynomialPiece {
    let target = theta0 + crate::geometry::shortest_angle_diff(theta0, thetaf);
    if target == theta0 {
        return PolynomialPiece::constant(theta0, t0, tf);
    }
    PolynomialPiece::hermite(theta0, 0.0, target, 0.0, t0, tf)
}
