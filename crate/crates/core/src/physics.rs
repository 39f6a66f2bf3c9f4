//! Physics stress proxies (stream B).
//!
//! Four per-window scalars computed in closed form from the same 30-sample
//! window the autoencoder sees:
//!
//! * `e_susp`: integral of squared vertical jerk after gravity compensation,
//!   (m/s^3)^2 * s;
//! * `e_lat`: integral of squared lateral jerk, same units;
//! * `w_drive`: integral of clamped tractive power
//!   `max(0, (m*(a_x + g*sin(theta)) + F_rr) * v)`, joules;
//! * `e_brake`: integral of `max(0, -m*a_x) * v`, joules.
//!
//! Jerk pipeline: gravity compensation, symmetric central difference
//! (one-sided at the ends), zero-phase 5-point moving average, then a
//! trapezoidal integral of the squared signal over the 29 intervals
//! (2.9 s spanned). Rolling resistance is speed-independent:
//! `F_rr = c_rr * m * g`.
//!
//! Pitch comes from the telemetry when every sample carries it; otherwise it
//! is estimated per sample as `asin(clamp((a_x - vdot)/g, -1, 1))` from the
//! smoothed central difference of speed, then smoothed, and the output is
//! flagged [`ThetaSource::Estimated`].

use crate::telemetry::{Window, DT};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Standard gravity, m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.80665;
/// Default rolling-resistance coefficient for a loaded truck tire on asphalt.
pub const DEFAULT_C_RR: f64 = 0.008;
/// Valid rolling-resistance range.
pub const C_RR_RANGE: (f64, f64) = (0.0, 0.05);

/// Parameters shared by the proxy computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub g: f64,
    pub c_rr: f64,
    /// Vehicle mass in kg; per-mission, from the sidecar metadata.
    pub mass: f64,
    /// Sample spacing; the stack assumes exactly 0.1 s.
    pub dt: f64,
}

impl PhysicsParams {
    pub fn new(mass: f64) -> PhysicsParams {
        PhysicsParams { g: STANDARD_GRAVITY, c_rr: DEFAULT_C_RR, mass, dt: DT }
    }

    pub fn with_mass(&self, mass: f64) -> PhysicsParams {
        PhysicsParams { mass, ..*self }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(PhysicsError::BadParam("g must be > 0"));
        }
        if !(self.c_rr >= C_RR_RANGE.0 && self.c_rr <= C_RR_RANGE.1) {
            return Err(PhysicsError::BadParam("c_rr must be within 0..0.05"));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(PhysicsError::BadParam("mass must be > 0"));
        }
        if self.dt != DT {
            return Err(PhysicsError::BadParam("dt is fixed at 0.1 s"));
        }
        Ok(())
    }
}

/// Where the per-sample pitch series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSource {
    Given,
    Estimated,
}

impl ThetaSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaSource::Given => "given",
            ThetaSource::Estimated => "estimated",
        }
    }

    pub fn parse(s: &str) -> Option<ThetaSource> {
        match s {
            "given" => Some(ThetaSource::Given),
            "estimated" => Some(ThetaSource::Estimated),
            _ => None,
        }
    }
}

/// The four per-window proxies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsProxies {
    pub e_susp: f64,
    pub e_lat: f64,
    pub w_drive: f64,
    pub e_brake: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicsError {
    /// Central difference needs at least 3 points.
    SeriesTooShort { len: usize },
    BadParam(&'static str),
}

impl fmt::Display for PhysicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhysicsError::SeriesTooShort { len } => {
                write!(f, "central difference needs >= 3 points, got {}", len)
            }
            PhysicsError::BadParam(msg) => f.write_str(msg),
        }
    }
}

/// Symmetric central difference with one-sided endpoints.
pub fn central_diff(series: &[f64], dt: f64) -> Result<Vec<f64>, PhysicsError> {
    let n = series.len();
    if n < 3 {
        return Err(PhysicsError::SeriesTooShort { len: n });
    }
    let mut d = vec![0.0; n];
    d[0] = (series[1] - series[0]) / dt;
    for i in 1..n - 1 {
        d[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    }
    d[n - 1] = (series[n - 1] - series[n - 2]) / dt;
    Ok(d)
}

/// Zero-phase 5-point moving average; the window truncates symmetrically at
/// the edges (3 terms at the first sample, 4 at the second).
pub fn smooth_ma5(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(2);
        let hi = if i + 2 < n { i + 2 } else { n - 1 };
        let mut acc = 0.0;
        for v in &series[lo..=hi] {
            acc += v;
        }
        out.push(acc / (hi - lo + 1) as f64);
    }
    out
}

/// Remove the gravity component from vertical acceleration:
/// `a_z_gc[i] = a_z[i] - g * cos(theta[i])`.
pub fn gravity_compensate(a_z: &[f64], theta: &[f64], g: f64) -> Vec<f64> {
    debug_assert_eq!(a_z.len(), theta.len());
    a_z.iter()
        .zip(theta)
        .map(|(&az, &th)| az - g * th.cos())
        .collect()
}

/// Trapezoidal integral over uniformly spaced samples.
pub fn trapezoid(f: &[f64], dt: f64) -> f64 {
    let mut acc = 0.0;
    for pair in f.windows(2) {
        acc += (pair[0] + pair[1]) * 0.5 * dt;
    }
    acc
}

/// Per-sample pitch for a window.
///
/// If every sample carries `theta` it is returned verbatim. Otherwise the
/// whole window is estimated from longitudinal kinematics: the specific
/// force surplus `a_x - vdot` is attributed to gravity along the body x
/// axis, with `vdot` the smoothed central difference of speed, and the
/// resulting angle series is smoothed again.
pub fn estimate_pitch(window: &Window, params: &PhysicsParams) -> (Vec<f64>, ThetaSource) {
    let samples = window.samples();
    if samples.iter().all(|s| s.theta.is_some()) {
        let theta = samples.iter().map(|s| s.theta.unwrap()).collect();
        return (theta, ThetaSource::Given);
    }
    let v: Vec<f64> = samples.iter().map(|s| s.v).collect();
    let vdot = smooth_ma5(&central_diff(&v, params.dt).expect("window holds 30 samples"));
    let raw: Vec<f64> = samples
        .iter()
        .zip(&vdot)
        .map(|(s, &vd)| {
            let ratio = ((s.a_x - vd) / params.g).clamp(-1.0, 1.0);
            ratio.asin()
        })
        .collect();
    (smooth_ma5(&raw), ThetaSource::Estimated)
}

fn jerk_energy(series: &[f64], dt: f64) -> f64 {
    let jerk = smooth_ma5(&central_diff(series, dt).expect("window holds 30 samples"));
    let sq: Vec<f64> = jerk.iter().map(|j| j * j).collect();
    trapezoid(&sq, dt)
}

/// Suspension stress with an explicit pitch series (shared by
/// [`physics_vector`]).
pub fn suspension_stress_with(window: &Window, theta: &[f64], params: &PhysicsParams) -> f64 {
    let a_z: Vec<f64> = window.samples().iter().map(|s| s.a_z).collect();
    let gc = gravity_compensate(&a_z, theta, params.g);
    jerk_energy(&gc, params.dt)
}

/// `e_susp`: integral of squared gravity-compensated vertical jerk.
pub fn suspension_stress(window: &Window, params: &PhysicsParams) -> f64 {
    let (theta, _) = estimate_pitch(window, params);
    suspension_stress_with(window, &theta, params)
}

/// `e_lat`: integral of squared lateral jerk (no gravity term).
pub fn lateral_stress(window: &Window, params: &PhysicsParams) -> f64 {
    let a_y: Vec<f64> = window.samples().iter().map(|s| s.a_y).collect();
    jerk_energy(&a_y, params.dt)
}

/// Per-sample clamped tractive power, `max(0, (m*(a_x + g*sin(theta)) + F_rr) * v)`.
///
/// Exposed for diagnostics; `w_drive` is its trapezoidal integral.
pub fn drive_power(window: &Window, theta: &[f64], params: &PhysicsParams) -> Vec<f64> {
    let f_rr = params.c_rr * params.mass * params.g;
    window
        .samples()
        .iter()
        .zip(theta)
        .map(|(s, &th)| {
            let p = (params.mass * (s.a_x + params.g * th.sin()) + f_rr) * s.v;
            p.max(0.0)
        })
        .collect()
}

/// Drivetrain stress with an explicit pitch series.
pub fn drivetrain_stress_with(window: &Window, theta: &[f64], params: &PhysicsParams) -> f64 {
    trapezoid(&drive_power(window, theta, params), params.dt)
}

/// `w_drive`: integral of clamped tractive power, joules.
pub fn drivetrain_stress(window: &Window, params: &PhysicsParams) -> f64 {
    let (theta, _) = estimate_pitch(window, params);
    drivetrain_stress_with(window, &theta, params)
}

/// `e_brake`: integral of `max(0, -m*a_x) * v`, joules.
pub fn braking_stress(window: &Window, params: &PhysicsParams) -> f64 {
    let b: Vec<f64> = window
        .samples()
        .iter()
        .map(|s| (-params.mass * s.a_x).max(0.0) * s.v)
        .collect();
    trapezoid(&b, params.dt)
}

/// All four proxies for one window, estimating pitch once.
///
/// Each component is bit-identical to its standalone operation because the
/// same pitch series and the same code paths are used.
pub fn physics_vector(window: &Window, params: &PhysicsParams) -> (PhysicsProxies, ThetaSource) {
    debug_assert_eq!(
        window.mass, params.mass,
        "params should be built from the window's mission mass"
    );
    let (theta, source) = estimate_pitch(window, params);
    let proxies = PhysicsProxies {
        e_susp: suspension_stress_with(window, &theta, params),
        e_lat: lateral_stress(window, params),
        w_drive: drivetrain_stress_with(window, &theta, params),
        e_brake: braking_stress(window, params),
    };
    (proxies, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{Sample, WINDOW_LEN};
    use alloc::string::ToString;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn window_from(
        mut f: impl FnMut(usize) -> (f64, f64, f64, f64, Option<f64>),
        mass: f64,
    ) -> Window {
        let samples: Vec<Sample> = (0..WINDOW_LEN)
            .map(|i| {
                let (a_x, a_y, a_z, v, theta) = f(i);
                Sample { t: i as f64 * DT, a_x, a_y, a_z, v, theta }
            })
            .collect();
        Window::new("m".to_string(), 0, mass, None, samples).unwrap()
    }

    #[test]
    fn central_diff_exact_on_quadratic() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * DT).powi(2)).collect();
        let d = central_diff(&xs, DT).unwrap();
        for i in 1..29 {
            assert_relative_eq!(d[i], 2.0 * (i as f64 * DT), max_relative = 1e-12);
        }
        // one-sided endpoints are first order: error is dt for this parabola
        assert_relative_eq!(d[0], DT, epsilon = 1e-12);
        assert_relative_eq!(d[29], 2.0 * 29.0 * DT - DT, max_relative = 1e-12);
    }

    #[test]
    fn central_diff_cubic_interior_error_is_dt_squared() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * DT).powi(3)).collect();
        let d = central_diff(&xs, DT).unwrap();
        for i in 1..29 {
            let t = i as f64 * DT;
            assert_relative_eq!(d[i], 3.0 * t * t + DT * DT, max_relative = 1e-9);
        }
    }

    #[test]
    fn central_diff_rejects_short_series() {
        assert_eq!(
            central_diff(&[1.0, 2.0], DT),
            Err(PhysicsError::SeriesTooShort { len: 2 })
        );
    }

    #[test]
    fn ma5_impulse_response() {
        let out = smooth_ma5(&[0.0, 0.0, 1.0, 0.0, 0.0]);
        let expect = [1.0 / 3.0, 0.25, 0.2, 0.25, 1.0 / 3.0];
        for (o, e) in out.iter().zip(expect) {
            assert_relative_eq!(*o, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn ma5_preserves_constants_and_short_inputs() {
        let out = smooth_ma5(&[3.5; 9]);
        for o in out {
            assert_relative_eq!(o, 3.5, epsilon = 1e-14);
        }
        assert_eq!(smooth_ma5(&[2.0]), vec![2.0]);
        assert_eq!(smooth_ma5(&[]), Vec::<f64>::new());
    }

    #[test]
    fn gravity_compensation_at_60_degrees() {
        let theta = [core::f64::consts::FRAC_PI_3; 4];
        let a_z = [STANDARD_GRAVITY; 4];
        let gc = gravity_compensate(&a_z, &theta, STANDARD_GRAVITY);
        for v in gc {
            assert_relative_eq!(v, 4.903325, epsilon = 1e-9);
        }
    }

    #[test]
    fn pitch_passthrough_when_given() {
        let w = window_from(|i| (0.0, 0.0, 9.8, 10.0, Some(0.01 * i as f64)), 10000.0);
        let (theta, source) = estimate_pitch(&w, &PhysicsParams::new(10000.0));
        assert_eq!(source, ThetaSource::Given);
        assert_relative_eq!(theta[7], 0.07, epsilon = 1e-15);
    }

    #[test]
    fn pitch_fallback_recovers_constant_grade() {
        let g = STANDARD_GRAVITY;
        let w = window_from(|_| ((0.1f64).sin() * g, 0.0, 9.7, 10.0, None), 10000.0);
        let (theta, source) = estimate_pitch(&w, &PhysicsParams::new(10000.0));
        assert_eq!(source, ThetaSource::Estimated);
        for th in theta {
            assert_relative_eq!(th, 0.1, epsilon = 1e-6);
        }
    }

    #[test]
    fn pitch_estimated_when_any_sample_lacks_theta() {
        let w = window_from(
            |i| (0.0, 0.0, 9.8, 10.0, if i == 17 { None } else { Some(0.0) }),
            10000.0,
        );
        let (_, source) = estimate_pitch(&w, &PhysicsParams::new(10000.0));
        assert_eq!(source, ThetaSource::Estimated);
    }

    #[test]
    fn pitch_clamps_unphysical_ratio() {
        // a_x far beyond g: ratio clamps to 1, angle to pi/2, no NaN
        let w = window_from(|_| (30.0, 0.0, 9.8, 10.0, None), 10000.0);
        let (theta, _) = estimate_pitch(&w, &PhysicsParams::new(10000.0));
        for th in theta {
            assert!(th.is_finite());
            assert!(th <= core::f64::consts::FRAC_PI_2 + 1e-12);
        }
    }

    // Independent straight-line oracle for the jerk pipeline.
    fn oracle_jerk_energy(series: &[f64], dt: f64) -> f64 {
        let n = series.len();
        let mut d = vec![0.0f64; n];
        d[0] = (series[1] - series[0]) / dt;
        d[n - 1] = (series[n - 1] - series[n - 2]) / dt;
        for i in 1..n - 1 {
            d[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
        }
        let mut s = vec![0.0f64; n];
        for i in 0..n {
            let lo = if i >= 2 { i - 2 } else { 0 };
            let hi = core::cmp::min(i + 2, n - 1);
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for j in lo..=hi {
                acc += d[j];
                cnt += 1.0;
            }
            s[i] = acc / cnt;
        }
        let mut total = 0.0;
        for i in 0..n - 1 {
            total += 0.5 * (s[i] * s[i] + s[i + 1] * s[i + 1]) * dt;
        }
        total
    }

    #[test]
    fn suspension_sine_matches_independent_oracle() {
        let g = STANDARD_GRAVITY;
        let w = window_from(
            |i| {
                let t = i as f64 * DT;
                (0.0, 0.0, g + (2.0 * core::f64::consts::PI * t).sin(), 15.0, Some(0.0))
            },
            10000.0,
        );
        let params = PhysicsParams::new(10000.0);
        let e = suspension_stress(&w, &params);
        let a_gc: Vec<f64> = w.samples().iter().map(|s| s.a_z - g).collect();
        assert_relative_eq!(e, oracle_jerk_energy(&a_gc, DT), max_relative = 1e-9);
        assert!(e > 0.0);
    }

    #[test]
    fn suspension_scales_quadratically() {
        let params = PhysicsParams::new(10000.0);
        let mk = |amp: f64| {
            window_from(
                |i| {
                    let t = i as f64 * DT;
                    (0.0, 0.0, STANDARD_GRAVITY + amp * (4.0 * t).sin(), 15.0, Some(0.0))
                },
                10000.0,
            )
        };
        let e1 = suspension_stress(&mk(1.0), &params);
        let e2 = suspension_stress(&mk(2.0), &params);
        assert_relative_eq!(e2, 4.0 * e1, max_relative = 1e-12);
    }

    #[test]
    fn level_cruise_drive_work() {
        let w = window_from(|_| (0.0, 0.0, STANDARD_GRAVITY, 20.0, Some(0.0)), 10000.0);
        let params = PhysicsParams::new(10000.0);
        let (theta, _) = estimate_pitch(&w, &params);
        let p = drive_power(&w, &theta, &params);
        for pi in &p {
            assert_relative_eq!(*pi, 15690.64, max_relative = 1e-12);
        }
        assert_relative_eq!(
            drivetrain_stress(&w, &params),
            45502.856,
            max_relative = 1e-9
        );
    }

    #[test]
    fn hard_decel_clamps_drive_power_to_zero() {
        let w = window_from(|_| (-3.0, 0.0, STANDARD_GRAVITY, 12.0, Some(0.0)), 10000.0);
        let params = PhysicsParams::new(10000.0);
        assert_eq!(drivetrain_stress(&w, &params), 0.0);
    }

    #[test]
    fn constant_braking_energy() {
        let w = window_from(|_| (-2.0, 0.0, STANDARD_GRAVITY, 15.0, Some(0.0)), 10000.0);
        let params = PhysicsParams::new(10000.0);
        assert_relative_eq!(braking_stress(&w, &params), 870000.0, max_relative = 1e-9);
    }

    #[test]
    fn acceleration_contributes_no_braking_energy() {
        let w = window_from(|_| (1.5, 0.0, STANDARD_GRAVITY, 15.0, Some(0.0)), 10000.0);
        let params = PhysicsParams::new(10000.0);
        assert_eq!(braking_stress(&w, &params), 0.0);
    }

    #[test]
    fn vector_matches_standalone_ops_bit_exactly() {
        let w = window_from(
            |i| {
                let t = i as f64 * DT;
                (
                    0.4 * (3.0 * t).sin(),
                    0.2 * (5.0 * t).cos(),
                    STANDARD_GRAVITY + 0.8 * (7.0 * t).sin(),
                    14.0 + t,
                    None,
                )
            },
            13500.0,
        );
        let params = PhysicsParams::new(13500.0);
        let (p, source) = physics_vector(&w, &params);
        assert_eq!(source, ThetaSource::Estimated);
        assert_eq!(p.e_susp, suspension_stress(&w, &params));
        assert_eq!(p.e_lat, lateral_stress(&w, &params));
        assert_eq!(p.w_drive, drivetrain_stress(&w, &params));
        assert_eq!(p.e_brake, braking_stress(&w, &params));
    }

    #[test]
    fn params_validation() {
        assert!(PhysicsParams::new(10000.0).validate().is_ok());
        let mut p = PhysicsParams::new(10000.0);
        p.c_rr = 0.06;
        assert!(p.validate().is_err());
        let mut p = PhysicsParams::new(10000.0);
        p.dt = 0.2;
        assert!(p.validate().is_err());
        assert!(PhysicsParams::new(0.0).validate().is_err());
    }

    proptest! {
        // jerk-based proxies and e_brake are nonnegative by construction;
        // w_drive is nonnegative because the integrand is clamped
        #[test]
        fn proxies_are_nonnegative(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let w = window_from(
                |_| {
                    (
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-5.0..25.0),
                        rng.gen_range(0.0..40.0),
                        if rng.gen_bool(0.5) { Some(rng.gen_range(-0.3..0.3)) } else { None },
                    )
                },
                10000.0,
            );
            let (p, _) = physics_vector(&w, &PhysicsParams::new(10000.0));
            prop_assert!(p.e_susp >= 0.0);
            prop_assert!(p.e_lat >= 0.0);
            prop_assert!(p.w_drive >= 0.0);
            prop_assert!(p.e_brake >= 0.0);
        }

        // doubling mass at fixed kinematics scales w_drive and e_brake
        // linearly and leaves the jerk proxies untouched
        #[test]
        fn mass_scaling_is_linear_in_force_proxies(scale in 1.1f64..4.0) {
            let w1 = window_from(
                |i| {
                    let t = i as f64 * DT;
                    (0.3 * (2.0 * t).sin(), 0.1, STANDARD_GRAVITY, 12.0, Some(0.02))
                },
                10000.0,
            );
            let p1 = PhysicsParams::new(10000.0);
            let p2 = PhysicsParams::new(10000.0 * scale);
            let (a, _) = physics_vector(&w1, &p1);
            let w2 = Window::new(
                "m".to_string(), 0, 10000.0 * scale, None, w1.samples().to_vec()
            ).unwrap();
            let (b, _) = physics_vector(&w2, &p2);
            prop_assert!((b.w_drive - scale * a.w_drive).abs() <= 1e-9 * b.w_drive.abs().max(1.0));
            prop_assert!((b.e_brake - scale * a.e_brake).abs() <= 1e-9 * b.e_brake.abs().max(1.0));
            prop_assert_eq!(a.e_susp, b.e_susp);
            prop_assert_eq!(a.e_lat, b.e_lat);
        }
    }
}
