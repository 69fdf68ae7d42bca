//! A travelling wave on the cylinder `S¹ × [0, π]` driven by the Lorenz
//! system, integrated with classical fixed-step RK4.
//!
//! The Lorenz part does not depend on the driven coordinates, so its RK4
//! stage values can be computed once and shared by every driven particle.
//! [`FlowSystem::flow`] (the full five-dimensional system) and
//! [`DrivingPath::advance`] both go through [`driven_step`], so they agree
//! bit for bit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Backward driving integration is abandoned once any component exceeds
/// this magnitude.
const BLOW_UP: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzParams {
    pub sigma: f64,
    pub beta: f64,
    pub rho: f64,
    /// Divides the whole vector field, slowing the attractor down.
    pub time_scale: f64,
    pub initial: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            beta: 8.0 / 3.0,
            rho: 28.0,
            time_scale: 6.6685,
            initial: [0.0, 1.0, 1.5],
        }
    }
}

pub fn lorenz_rhs(p: &LorenzParams, z: [f64; 3]) -> [f64; 3] {
    [
        p.sigma * (z[1] - z[0]) / p.time_scale,
        (p.rho * z[0] - z[1] - z[0] * z[2]) / p.time_scale,
        (-p.beta * z[2] + z[0] * z[1]) / p.time_scale,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveParams {
    /// Drift `c` of the stream function.
    pub speed: f64,
    /// Base amplitude `A₀`.
    pub amplitude: f64,
    /// Coefficient `ν` of the driving phase.
    pub phase_speed: f64,
    /// The driving phase is `phase_scale · z₁`.
    pub phase_scale: f64,
    /// Amplitude is `A₀ (1 + depth · sin(frequency · phase))`.
    pub modulation_depth: f64,
    pub modulation_frequency: f64,
    /// Strength of the mixing perturbation in `ẋ`; zero switches it off.
    pub epsilon: f64,
}

impl WaveParams {
    /// Modulated wave with the localised mixing perturbation.
    pub fn perturbed() -> Self {
        Self {
            speed: 0.5,
            amplitude: 1.0,
            phase_speed: 0.25,
            phase_scale: 6.6685,
            modulation_depth: 0.125,
            modulation_frequency: 5f64.sqrt(),
            epsilon: 1.0,
        }
    }

    /// Plain travelling wave with phase `ν z₁` and constant amplitude.
    pub fn travelling() -> Self {
        Self {
            phase_scale: 1.0,
            modulation_depth: 0.0,
            epsilon: 0.0,
            ..Self::perturbed()
        }
    }

    /// Everything the driven field needs from the driving state.
    pub fn stage(&self, z1: f64) -> DrivingStage {
        let phase = self.phase_scale * z1;
        DrivingStage {
            shift: self.phase_speed * phase,
            amplitude: self.amplitude
                * (1.0 + self.modulation_depth * (self.modulation_frequency * phase).sin()),
            forcing: self.epsilon * (phase / 2.0).sin(),
        }
    }

    /// `(ẋ, ẏ)` at driving coordinate `z1`.
    pub fn rhs(&self, z1: f64, x: f64, y: f64) -> [f64; 2] {
        driven_rhs(self.speed, &self.stage(z1), x, y)
    }
}

impl Default for WaveParams {
    fn default() -> Self {
        Self::perturbed()
    }
}

/// Driving-dependent coefficients of the wave field at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrivingStage {
    /// `ν · phase`, subtracted from `x`.
    pub shift: f64,
    pub amplitude: f64,
    /// `ε sin(phase / 2)`.
    pub forcing: f64,
}

/// `1 / (ψ² + 1)²`
fn bump(psi: f64) -> f64 {
    let d = psi * psi + 1.0;
    1.0 / (d * d)
}

#[inline]
pub fn driven_rhs(speed: f64, s: &DrivingStage, x: f64, y: f64) -> [f64; 2] {
    let (sx, cx) = (x - s.shift).sin_cos();
    // Reflect so that sin(π) is exactly zero and the top wall stays invariant.
    let (sy, cy) = if y > FRAC_PI_2 {
        let (s, c) = (PI - y).sin_cos();
        (s, -c)
    } else {
        y.sin_cos()
    };
    let mut dx = speed - s.amplitude * sx * cy;
    if s.forcing != 0.0 {
        dx += s.forcing * bump(sx * sy + y / 2.0 - FRAC_PI_4);
    }
    [dx, s.amplitude * cx * sy]
}

/// One RK4 step of the driven coordinates given the four stage values of
/// the driving system. `x` is reduced mod 2π and `y` clamped to the walls.
#[inline]
pub fn driven_step(speed: f64, stages: &[DrivingStage; 4], h: f64, x: f64, y: f64) -> (f64, f64) {
    let k1 = driven_rhs(speed, &stages[0], x, y);
    let k2 = driven_rhs(speed, &stages[1], x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]);
    let k3 = driven_rhs(speed, &stages[2], x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]);
    let k4 = driven_rhs(speed, &stages[3], x + h * k3[0], y + h * k3[1]);
    let x = x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    let y = y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    (wrap_angle(x), y.clamp(0.0, PI))
}

fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn axpy(z: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [z[0] + h * k[0], z[1] + h * k[1], z[2] + h * k[2]]
}

/// One RK4 step of the driving system; returns the four stage points and
/// the new state.
pub fn lorenz_step(p: &LorenzParams, z: [f64; 3], h: f64) -> ([[f64; 3]; 4], [f64; 3]) {
    let k1 = lorenz_rhs(p, z);
    let z2 = axpy(z, 0.5 * h, k1);
    let k2 = lorenz_rhs(p, z2);
    let z3 = axpy(z, 0.5 * h, k2);
    let k3 = lorenz_rhs(p, z3);
    let z4 = axpy(z, h, k3);
    let k4 = lorenz_rhs(p, z4);
    let next = std::array::from_fn(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    ([z, z2, z3, z4], next)
}

/// Number of steps of size `h` covering `duration`, and the length of the
/// last one, which is shortened to land exactly on the endpoint.
pub fn step_plan(duration: f64, h: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let count = ((duration / h) - 1e-9).ceil().max(1.0) as usize;
    (count, duration - (count - 1) as f64 * h)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub z: [f64; 3],
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSystem {
    pub lorenz: LorenzParams,
    pub wave: WaveParams,
    pub step: f64,
    /// Reach negative driving times by integrating the Lorenz system
    /// backwards instead of refusing them.
    pub allow_backward: bool,
}

impl Default for FlowSystem {
    fn default() -> Self {
        Self {
            lorenz: LorenzParams::default(),
            wave: WaveParams::perturbed(),
            step: 0.01,
            allow_backward: false,
        }
    }
}

impl FlowSystem {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!("integration step {} must be positive", self.step)));
        }
        if !(self.lorenz.time_scale.is_finite() && self.lorenz.time_scale != 0.0) {
            return Err(Error::Config("Lorenz time scale must be nonzero".into()));
        }
        Ok(())
    }

    fn stages(&self, points: &[[f64; 3]; 4]) -> [DrivingStage; 4] {
        std::array::from_fn(|i| self.wave.stage(points[i][0]))
    }

    /// Advance the full system by `duration ≥ 0`.
    pub fn flow(&self, state: State, duration: f64) -> Result<State> {
        if duration < 0.0 {
            return Err(Error::Precondition(
                "the driven coordinates only flow forward in time".into(),
            ));
        }
        let (count, last) = step_plan(duration, self.step);
        let mut s = state;
        for i in 0..count {
            let h = if i + 1 == count { last } else { self.step };
            let (points, next) = lorenz_step(&self.lorenz, s.z, h);
            let (x, y) = driven_step(self.wave.speed, &self.stages(&points), h, s.x, s.y);
            s = State { z: next, x, y };
        }
        if !(s.z.iter().all(|v| v.is_finite()) && s.x.is_finite() && s.y.is_finite()) {
            return Err(Error::Integration {
                elapsed: duration,
                reason: "state became non-finite".into(),
            });
        }
        Ok(s)
    }

    /// Driving state after `duration` time units from `z`. Negative
    /// durations integrate backwards with a tenth of the step size.
    pub fn driving_flow(&self, z: [f64; 3], duration: f64) -> Result<[f64; 3]> {
        let backward = duration < 0.0;
        let h = if backward { self.step / 10.0 } else { self.step };
        let (count, last) = step_plan(duration.abs(), h);
        let mut z = z;
        for i in 0..count {
            let hi = if i + 1 == count { last } else { h };
            z = lorenz_step(&self.lorenz, z, if backward { -hi } else { hi }).1;
            if !z.iter().all(|v| v.is_finite() && v.abs() <= BLOW_UP) {
                return Err(Error::Integration {
                    elapsed: (i + 1) as f64 * h * duration.signum(),
                    reason: format!(
                        "driving state left the box |z| <= {BLOW_UP:e}{}",
                        if backward { " while integrating backwards" } else { "" }
                    ),
                });
            }
        }
        Ok(z)
    }

    /// Driving state at time `t`, where `t = 0` is the configured initial
    /// point.
    pub fn driving_state_at(&self, t: f64) -> Result<[f64; 3]> {
        if t < 0.0 && !self.allow_backward {
            return Err(Error::Precondition(format!(
                "driving time {t} precedes the initial point and backward integration is disabled"
            )));
        }
        self.driving_flow(self.lorenz.initial, t)
    }
}

#[derive(Clone, Debug)]
struct PathStep {
    h: f64,
    stages: [DrivingStage; 4],
}

/// Precomputed driving stages for a run starting at a fixed time, split
/// into consecutive segments that each end on a requested snapshot.
#[derive(Clone, Debug)]
pub struct DrivingPath {
    speed: f64,
    start: f64,
    snapshots: Vec<f64>,
    steps: Vec<PathStep>,
    marks: Vec<usize>,
}

impl DrivingPath {
    /// `snapshots` are strictly increasing elapsed times measured from
    /// `start`.
    pub fn new(system: &FlowSystem, start: f64, snapshots: &[f64]) -> Result<Self> {
        system.validate()?;
        if snapshots.is_empty() {
            return Err(Error::Precondition("a driving path needs at least one snapshot".into()));
        }
        let mut prev = 0.0;
        for &s in snapshots {
            if !(s.is_finite() && s > prev) {
                return Err(Error::Precondition(format!(
                    "snapshot times must be positive and increasing, got {snapshots:?}"
                )));
            }
            prev = s;
        }
        let mut z = system.driving_state_at(start)?;
        let mut steps = Vec::new();
        let mut marks = Vec::with_capacity(snapshots.len());
        let mut prev = 0.0;
        for &s in snapshots {
            let (count, last) = step_plan(s - prev, system.step);
            for i in 0..count {
                let h = if i + 1 == count { last } else { system.step };
                let (points, next) = lorenz_step(&system.lorenz, z, h);
                steps.push(PathStep {
                    h,
                    stages: system.stages(&points),
                });
                z = next;
            }
            marks.push(steps.len());
            prev = s;
        }
        Ok(Self {
            speed: system.wave.speed,
            start,
            snapshots: snapshots.to_vec(),
            steps,
            marks,
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn snapshots(&self) -> &[f64] {
        &self.snapshots
    }

    /// Positions of the driven particle at each snapshot.
    pub fn advance(&self, x: f64, y: f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.marks.len());
        let (mut x, mut y) = (x, y);
        let mut done = 0;
        for (&mark, &t) in self.marks.iter().zip(&self.snapshots) {
            for step in &self.steps[done..mark] {
                (x, y) = driven_step(self.speed, &step.stages, step.h, x, y);
            }
            done = mark;
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::Integration {
                    elapsed: t,
                    reason: "driven particle became non-finite".into(),
                });
            }
            out.push((x, y));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorenz_examples() {
        let p = LorenzParams::default();
        assert_eq!(lorenz_rhs(&p, [0.0; 3]), [0.0; 3]);
        let v = lorenz_rhs(&p, [0.0, 1.0, 1.5]);
        let want = [10.0 / 6.6685, -1.0 / 6.6685, -4.0 / 6.6685];
        for i in 0..3 {
            assert!((v[i] - want[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn unscaled_lorenz_divergence_is_constant() {
        let p = LorenzParams {
            time_scale: 1.0,
            ..LorenzParams::default()
        };
        let eps = 1e-6;
        for z in [[1.0, 2.0, 3.0], [-7.0, 0.5, 20.0], [0.0, 0.0, 0.0]] {
            let mut div = 0.0;
            for i in 0..3 {
                let mut a = z;
                let mut b = z;
                a[i] += eps;
                b[i] -= eps;
                div += (lorenz_rhs(&p, a)[i] - lorenz_rhs(&p, b)[i]) / (2.0 * eps);
            }
            assert!((div + (10.0 + 1.0 + 8.0 / 3.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn wave_examples() {
        let w = WaveParams::travelling();
        assert_eq!(w.rhs(0.3, 1.0, 0.0)[1], 0.0);
        let v = w.rhs(0.0, FRAC_PI_2, FRAC_PI_2);
        assert!((v[0] - 0.5).abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn zero_epsilon_is_the_modulated_wave() {
        let p = WaveParams::perturbed();
        let q = WaveParams {
            epsilon: 0.0,
            ..p.clone()
        };
        for &(z1, x, y) in &[(0.4f64, 1.0f64, 2.0f64), (-3.0, 5.0, 0.3)] {
            let s = q.stage(z1);
            let (sx, cx) = (x - s.shift).sin_cos();
            let want = [0.5 - s.amplitude * sx * y.cos(), s.amplitude * cx * y.sin()];
            let got = q.rhs(z1, x, y);
            assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
            assert_ne!(p.rhs(z1, x, y)[0], q.rhs(z1, x, y)[0]);
            assert_eq!(p.rhs(z1, x, y)[1], q.rhs(z1, x, y)[1]);
        }
    }

    #[test]
    fn walls_are_invariant() {
        let p = WaveParams::perturbed();
        for k in 0..50 {
            let x = k as f64 * 0.13;
            let z1 = k as f64 * 0.7 - 15.0;
            assert_eq!(p.rhs(z1, x, 0.0)[1], 0.0);
            assert_eq!(p.rhs(z1, x, PI)[1], 0.0);
        }
        let sys = FlowSystem::default();
        let s = State { z: [0.0, 1.0, 1.5], x: 1.0, y: PI };
        let out = sys.flow(s, 3.0).unwrap();
        assert_eq!(out.y, PI);
    }

    #[test]
    fn zero_duration_is_identity() {
        let sys = FlowSystem::default();
        let s = State { z: [0.0, 1.0, 1.5], x: 2.0, y: 1.0 };
        assert_eq!(sys.flow(s, 0.0).unwrap(), s);
        assert!(sys.flow(s, -1.0).is_err());
    }

    #[test]
    fn flow_composes() {
        let sys = FlowSystem::default();
        let s = State { z: [0.0, 1.0, 1.5], x: 2.0, y: 1.0 };
        let whole = sys.flow(s, 3.0).unwrap();
        let split = sys.flow(sys.flow(s, 1.25).unwrap(), 1.75).unwrap();
        for (a, b) in whole.z.iter().zip(&split.z) {
            assert!((a - b).abs() < 1e-9);
        }
        let dx = (whole.x - split.x).abs();
        assert!(dx.min(TAU - dx) < 1e-9);
        assert!((whole.y - split.y).abs() < 1e-9);
    }

    #[test]
    fn lorenz_stays_bounded() {
        let sys = FlowSystem::default();
        let mut z = sys.lorenz.initial;
        for _ in 0..200 {
            z = sys.driving_flow(z, 1.0).unwrap();
            assert!(z.iter().all(|v| v.abs() < 60.0), "{z:?}");
        }
    }

    #[test]
    fn halving_the_step_barely_moves_ten_unit_flows() {
        let coarse = FlowSystem::default();
        let fine = FlowSystem {
            step: 0.005,
            ..FlowSystem::default()
        };
        let z = coarse.lorenz.initial;
        let dz = coarse.driving_flow(z, 10.0).unwrap();
        let fz = fine.driving_flow(z, 10.0).unwrap();
        for i in 0..3 {
            assert!((dz[i] - fz[i]).abs() < 1e-6);
        }
        // Particles are stretched by the mixing, so check the fourth-order
        // rate of the step error rather than an absolute bound.
        let finer = FlowSystem {
            step: 0.0025,
            ..FlowSystem::default()
        };
        let gap = |p: State, q: State| {
            let dx = (p.x - q.x).abs();
            dx.min(TAU - dx).max((p.y - q.y).abs())
        };
        let mut ratios = Vec::new();
        let mut worst: f64 = 0.0;
        for a in 0..12 {
            for b in 0..6 {
                let s = State { z, x: 0.25 + a as f64 * 0.5, y: 0.25 + b as f64 * 0.5 };
                let p = coarse.flow(s, 10.0).unwrap();
                let q = fine.flow(s, 10.0).unwrap();
                let r = finer.flow(s, 10.0).unwrap();
                worst = worst.max(gap(p, q));
                ratios.push(gap(p, q) / gap(q, r));
            }
        }
        ratios.sort_by(f64::total_cmp);
        assert!(ratios[ratios.len() / 2] > 12.0, "median ratio {}", ratios[ratios.len() / 2]);
        assert!(worst < 1e-4, "worst {worst:e}");
    }

    #[test]
    fn path_matches_direct_integration_bitwise() {
        let sys = FlowSystem::default();
        let start = 2.5;
        let path = DrivingPath::new(&sys, start, &[0.5, 1.0, 1.37]).unwrap();
        let z0 = sys.driving_state_at(start).unwrap();
        for &(x, y) in &[(0.1, 0.2), (3.0, 1.5), (6.2, 3.1), (1.0, PI)] {
            let got = path.advance(x, y).unwrap();
            let mut s = State { z: z0, x, y };
            let mut prev = 0.0;
            for (&t, g) in path.snapshots().iter().zip(&got) {
                s = sys.flow(s, t - prev).unwrap();
                prev = t;
                assert_eq!((s.x, s.y), *g);
            }
        }
    }

    #[test]
    fn backward_driving_is_opt_in_and_guarded() {
        let sys = FlowSystem::default();
        assert!(matches!(sys.driving_state_at(-1.0), Err(Error::Precondition(_))));
        let back = FlowSystem {
            allow_backward: true,
            ..FlowSystem::default()
        };
        let z = back.driving_state_at(-0.2).unwrap();
        let again = back.driving_flow(z, 0.2).unwrap();
        for i in 0..3 {
            assert!((again[i] - back.lorenz.initial[i]).abs() < 1e-6);
        }
        assert!(matches!(
            back.driving_state_at(-40.0),
            Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn path_rejects_bad_snapshots() {
        let sys = FlowSystem::default();
        assert!(DrivingPath::new(&sys, 0.0, &[]).is_err());
        assert!(DrivingPath::new(&sys, 0.0, &[1.0, 1.0]).is_err());
    }
}
