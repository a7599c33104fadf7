/// PID gains. `direction` is the sign of d(output)/d(power) needed to drive
/// the error to zero and is taken from the plant sensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    /// per second
    pub ki: f64,
    /// seconds
    pub kd: f64,
    pub direction: f64,
}

/// Positional PID with a bias set on engagement and conditional integration
/// as anti-windup.
#[derive(Debug, Clone, PartialEq)]
pub struct Pid {
    pub gains: PidGains,
    pub integral: f64,
    pub previous_error: Option<f64>,
    pub bias: f64,
    /// The last output hit a limit.
    pub saturated: bool,
}

impl Pid {
    pub fn new(gains: PidGains) -> Self {
        Self { gains, integral: 0.0, previous_error: None, bias: 0.0, saturated: false }
    }

    /// Bumpless start: the next output with zero error equals `output`.
    pub fn engage(&mut self, output: f64) {
        self.bias = output;
        self.integral = 0.0;
        self.previous_error = None;
        self.saturated = false;
    }

    fn raw(&self, error: f64, integral: f64, derivative: f64) -> f64 {
        let g = &self.gains;
        self.bias + g.direction * (g.kp * error + g.ki * integral + g.kd * derivative)
    }

    /// One update with `error` (setpoint minus measurement) over `dt` seconds,
    /// clamped to `[lo, hi]`.
    pub fn update(&mut self, error: f64, dt: f64, (lo, hi): (f64, f64)) -> f64 {
        let derivative = self.previous_error.map_or(0.0, |p| (error - p) / dt);
        self.previous_error = Some(error);
        let candidate = self.integral + error * dt;
        let unclamped = self.raw(error, candidate, derivative);
        let pushing_out = (unclamped > hi && self.gains.direction * error > 0.0)
            || (unclamped < lo && self.gains.direction * error < 0.0);
        if !pushing_out {
            self.integral = candidate;
        }
        let out = self.raw(error, self.integral, derivative);
        self.saturated = out < lo || out > hi;
        out.clamp(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pi(kp: f64, ki: f64) -> Pid {
        Pid::new(PidGains { kp, ki, kd: 0.0, direction: 1.0 })
    }

    #[test]
    fn engage_is_bumpless() {
        let mut p = pi(2.0, 0.1);
        p.engage(3.5);
        assert_eq!(p.update(0.0, 60.0, (-5.0, 10.0)), 3.5);
    }

    #[test]
    fn integral_action_removes_offset_on_a_static_plant() {
        // plant y = 0.5·u, setpoint 2
        let mut p = pi(0.3, 0.3 / 60.0);
        let mut u = 0.0;
        for _ in 0..200 {
            u = p.update(2.0 - 0.5 * u, 60.0, (-10.0, 10.0));
        }
        assert!((0.5 * u - 2.0).abs() < 1e-9, "{u}");
    }

    #[test]
    fn derivative_term_uses_error_change() {
        let mut p = Pid::new(PidGains { kp: 0.0, ki: 0.0, kd: 10.0, direction: 1.0 });
        assert_eq!(p.update(1.0, 2.0, (-100.0, 100.0)), 0.0);
        assert_eq!(p.update(3.0, 2.0, (-100.0, 100.0)), 10.0);
    }

    #[test]
    fn negative_direction_flips_output() {
        let mut p = Pid::new(PidGains { kp: 1.0, ki: 0.0, kd: 0.0, direction: -1.0 });
        assert_eq!(p.update(2.0, 1.0, (-10.0, 10.0)), -2.0);
    }

    proptest! {
        #[test]
        fn integral_frozen_while_saturated(errors in proptest::collection::vec(0.1f64..5.0, 1..40), dir in prop_oneof![Just(1.0), Just(-1.0)]) {
            let mut p = Pid::new(PidGains { kp: 1.0, ki: 0.5, kd: 0.0, direction: dir });
            p.engage(0.0);
            let limits = (-1.0, 1.0);
            for e in errors {
                let before = p.integral;
                let out = p.update(e, 1.0, limits);
                prop_assert!(out >= limits.0 && out <= limits.1);
                if p.saturated {
                    prop_assert_eq!(p.integral, before);
                }
            }
        }

        #[test]
        fn output_respects_limits(e in -1e3f64..1e3, lo in -10.0f64..0.0, w in 0.0f64..20.0) {
            let mut p = pi(3.0, 0.2);
            let out = p.update(e, 60.0, (lo, lo + w));
            prop_assert!(out >= lo && out <= lo + w);
        }
    }
}
