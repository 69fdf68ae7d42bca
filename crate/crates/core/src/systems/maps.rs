//! Expanding circle maps and the families built from them.

use crate::error::{Error, Result};

/// Something that maps the circle `[0, 1)` to itself.
pub trait CircleMap: Sync {
    fn apply(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> CircleMap for F {
    fn apply(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Shift used by the aperiodic family.
pub const QUARTER_TURN: f64 = 0.25;

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 for tiny negative inputs.
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Five-branch piecewise-linear circle map with slope ±3 and an
/// almost-invariant split at `1/2` for small `a`.
pub fn eval_h(a: f64, x: f64) -> f64 {
    let y = if x < 1.0 / 6.0 + a / 2.0 {
        3.0 * x
    } else if x < 1.0 / 3.0 + 2.0 * a / 3.0 {
        -3.0 * x + 3.0 * a + 1.0
    } else if x < 2.0 / 3.0 + 2.0 * a / 3.0 {
        3.0 * x - a - 1.0
    } else if x < 5.0 / 6.0 + a / 2.0 {
        -3.0 * x + 3.0 * a + 3.0
    } else {
        3.0 * x - 2.0
    };
    wrap(y)
}

pub fn rotate(x: f64, shift: f64) -> f64 {
    wrap(x + shift)
}

/// Slope-3 map that is Markov for the six-box partition: on box `i`
/// (1-based) it sends `x` to `3x - (i-1)/2 + offsets[i]/6`.
pub fn eval_markov(offsets: &[i32; 6], x: f64) -> f64 {
    let i = ((x * 6.0).floor() as usize).min(5);
    wrap(3.0 * x - i as f64 / 2.0 + offsets[i] as f64 / 6.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapFamily {
    /// One Markov map, used for every symbol `1`.
    Single { offsets: [i32; 6] },
    /// Three Markov maps applied in turn, symbols `1..=3`.
    Periodic3 { offsets: [[i32; 6]; 3] },
    /// Four perturbations of [`eval_h`] conjugated by quarter turns,
    /// symbols `1..=4`.
    Aperiodic4 { perturbations: [f64; 4] },
}

impl MapFamily {
    pub fn single() -> Self {
        MapFamily::Single {
            offsets: [0, 0, 1, 4, 3, 3],
        }
    }

    pub fn periodic3() -> Self {
        MapFamily::Periodic3 {
            offsets: [[3, 2, 2, 0, 5, 5], [2, 1, 4, 5, 4, 1], [1, 3, 3, 4, 0, 0]],
        }
    }

    pub fn aperiodic4() -> Self {
        use std::f64::consts::{E, PI};
        MapFamily::Aperiodic4 {
            perturbations: [
                PI / 40.0,
                2.0 * 2f64.sqrt() / 40.0,
                3f64.sqrt() / 40.0,
                E / 40.0,
            ],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapFamily::Single { .. } => "single",
            MapFamily::Periodic3 { .. } => "periodic3",
            MapFamily::Aperiodic4 { .. } => "aperiodic4",
        }
    }

    pub fn symbol_count(&self) -> u8 {
        match self {
            MapFamily::Single { .. } => 1,
            MapFamily::Periodic3 { .. } => 3,
            MapFamily::Aperiodic4 { .. } => 4,
        }
    }

    fn check(&self, symbol: u8) -> Result<usize> {
        if symbol == 0 || symbol > self.symbol_count() {
            return Err(Error::UnknownSymbol {
                family: self.name(),
                symbol,
            });
        }
        Ok(symbol as usize - 1)
    }

    pub fn eval(&self, symbol: u8, x: f64) -> Result<f64> {
        let s = self.check(symbol)?;
        Ok(self.eval_unchecked(s, x))
    }

    fn eval_unchecked(&self, s: usize, x: f64) -> f64 {
        match self {
            MapFamily::Single { offsets } => eval_markov(offsets, x),
            MapFamily::Periodic3 { offsets } => eval_markov(&offsets[s], x),
            MapFamily::Aperiodic4 { perturbations } => {
                let a = perturbations[s];
                match s {
                    0 => eval_h(a, x),
                    1 => rotate(eval_h(a, x), QUARTER_TURN),
                    2 => eval_h(a, rotate(x, -QUARTER_TURN)),
                    _ => rotate(eval_h(a, rotate(x, -QUARTER_TURN)), QUARTER_TURN),
                }
            }
        }
    }

    /// The map attached to `symbol`.
    pub fn map(&self, symbol: u8) -> Result<impl CircleMap + '_> {
        let s = self.check(symbol)?;
        Ok(move |x: f64| self.eval_unchecked(s, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_examples() {
        assert_eq!(eval_h(0.0, 0.0), 0.0);
        // Second branch, -3x + 1.
        assert!((eval_h(0.0, 0.25) - 0.25).abs() < 1e-15);
        // Continuity at the branch points for a = 0.
        for b in [1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0] {
            let l = eval_h(0.0, b - 1e-12);
            let r = eval_h(0.0, b);
            let d = (l - r).abs();
            assert!(d.min(1.0 - d) < 1e-10, "jump at {b}");
        }
    }

    #[test]
    fn h0_keeps_the_halves() {
        for k in 0..=5000 {
            let x = 0.5 * k as f64 / 5000.0;
            let y = eval_h(0.0, x.min(0.4999999999));
            assert!((0.0..=0.5).contains(&y), "H0({x}) = {y}");
        }
    }

    #[test]
    fn aperiodic_examples() {
        let fam = MapFamily::aperiodic4();
        assert!((fam.eval(2, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            fam.eval(5, 0.1),
            Err(Error::UnknownSymbol { symbol: 5, .. })
        ));
        assert!(fam.eval(0, 0.1).is_err());
        for s in 1..=4 {
            for k in 0..1000 {
                let y = fam.eval(s, k as f64 / 1000.0).unwrap();
                assert!((0.0..1.0).contains(&y));
            }
        }
    }

    #[test]
    fn markov_examples() {
        let single = MapFamily::single();
        assert!((single.eval(1, 0.1).unwrap() - 0.3).abs() < 1e-15);
        assert!(single.eval(2, 0.1).is_err());

        // The first periodic map sends most of [0, 1/2] into [1/3, 5/6].
        let fam = MapFamily::periodic3();
        let m = fam.map(1).unwrap();
        let samples = 6000;
        let inside = (0..samples)
            .map(|k| (k as f64 + 0.5) / samples as f64 * 0.5)
            .filter(|&x| (1.0 / 3.0..=5.0 / 6.0).contains(&m.apply(x)))
            .count();
        assert!(inside as f64 / samples as f64 > 0.85);
    }

    #[test]
    fn closures_are_circle_maps() {
        let r = |x: f64| rotate(x, 0.25);
        assert_eq!(r.apply(0.875), 0.125);
    }
}
