//! Operating scenarios: flows, feed concentrations and initial data.

use serde::{Deserialize, Serialize};

use crate::asm1::{Particulates, Solubles};
use crate::error::{Error, Result};

/// Default alkalinity [mol CaCO₃/m³] used where no value is tabulated.
pub const DEFAULT_ALKALINITY: f64 = 30.0;

/// A piecewise-constant function of time given as `(start_time, value)`
/// breakpoints in increasing time order. The first value also applies
/// before the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    from = "ScheduleRepr<T>",
    into = "ScheduleRepr<T>",
    bound(serialize = "T: Clone + Serialize", deserialize = "T: Deserialize<'de>")
)]
pub struct Schedule<T> {
    steps: Vec<(f64, T)>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScheduleRepr<T> {
    Constant(T),
    Steps(Vec<(f64, T)>),
}

impl<T> From<ScheduleRepr<T>> for Schedule<T> {
    fn from(r: ScheduleRepr<T>) -> Self {
        match r {
            ScheduleRepr::Constant(v) => Schedule { steps: vec![(0.0, v)] },
            ScheduleRepr::Steps(steps) => Schedule { steps },
        }
    }
}

impl<T: Clone> From<Schedule<T>> for ScheduleRepr<T> {
    fn from(s: Schedule<T>) -> Self {
        if s.steps.len() == 1 && s.steps[0].0 == 0.0 {
            ScheduleRepr::Constant(s.steps[0].1.clone())
        } else {
            ScheduleRepr::Steps(s.steps)
        }
    }
}

impl<T: Clone> Schedule<T> {
    pub fn constant(value: T) -> Self {
        Schedule {
            steps: vec![(0.0, value)],
        }
    }

    pub fn steps(steps: Vec<(f64, T)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::invalid("schedule", "at least one breakpoint is required"));
        }
        if steps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("schedule", "breakpoint times must be strictly increasing"));
        }
        Ok(Schedule { steps })
    }

    pub fn at(&self, t: f64) -> &T {
        let i = self.steps.partition_point(|(s, _)| *s <= t);
        &self.steps[i.saturating_sub(1)].1
    }

    /// First breakpoint strictly after `t`, if any.
    pub fn next_change(&self, t: f64) -> Option<f64> {
        self.steps.iter().map(|(s, _)| *s).find(|s| *s > t)
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.steps.iter().map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    /// Feed flow `Q_f` [m³/h].
    pub feed_flow: Schedule<f64>,
    /// Underflow `Q_u` [m³/h].
    pub underflow: Schedule<f64>,
    pub feed_particulates: Schedule<Particulates>,
    pub feed_solubles: Schedule<Solubles>,
}

impl Scenario {
    pub fn constant(label: &str, q_f: f64, q_u: f64, c_f: Particulates, s_f: Solubles) -> Self {
        Scenario {
            label: label.to_string(),
            feed_flow: Schedule::constant(q_f),
            underflow: Schedule::constant(q_u),
            feed_particulates: Schedule::constant(c_f),
            feed_solubles: Schedule::constant(s_f),
        }
    }

    /// Closed column: no feed, no outflow.
    pub fn batch() -> Self {
        Self::constant("batch", 0.0, 0.0, Particulates::default(), Solubles::default())
    }

    /// `(Q_f, Q_u, Q_e)` at time `t`.
    pub fn flows(&self, t: f64) -> (f64, f64, f64) {
        let q_f = *self.feed_flow.at(t);
        let q_u = *self.underflow.at(t);
        (q_f, q_u, q_f - q_u)
    }

    /// Earliest time after `t` where any input changes.
    pub fn next_change(&self, t: f64) -> Option<f64> {
        [
            self.feed_flow.next_change(t),
            self.underflow.next_change(t),
            self.feed_particulates.next_change(t),
            self.feed_solubles.next_change(t),
        ]
        .into_iter()
        .flatten()
        .reduce(f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        for (t, q_f) in &self.feed_flow.steps {
            let q_u = *self.underflow.at(*t);
            check_flows(*q_f, q_u)?;
        }
        for (t, q_u) in &self.underflow.steps {
            check_flows(*self.feed_flow.at(*t), *q_u)?;
        }
        for c in self.feed_particulates.values() {
            if c.0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid("scenario", "feed particulates must be non-negative"));
            }
        }
        for s in self.feed_solubles.values() {
            if s.0[..6].iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !s.0[6].is_finite() {
                return Err(Error::invalid("scenario", "feed solubles must be non-negative"));
            }
        }
        Ok(())
    }
}

fn check_flows(q_f: f64, q_u: f64) -> Result<()> {
    if !(q_u >= 0.0 && q_f >= q_u && q_f.is_finite()) {
        return Err(Error::invalid(
            "scenario",
            format!("flows must satisfy Q_f >= Q_u >= 0, got Q_f = {q_f}, Q_u = {q_u}"),
        ));
    }
    Ok(())
}

fn with_alkalinity(s: [f64; 6]) -> Solubles {
    Solubles([s[0], s[1], s[2], s[3], s[4], s[5], DEFAULT_ALKALINITY])
}

/// Pilot-plant scenario with the lowest sludge blanket.
pub fn scenario_l() -> Scenario {
    Scenario::constant(
        "L",
        1.0,
        0.5,
        Particulates([1053.50, 46.12, 1716.60, 107.71, 872.55, 0.04]),
        with_alkalinity([14.8, 0.01, 4.5, 10.95, 0.022, 0.0]),
    )
}

/// Pilot-plant scenario used for the dispersion calibration.
pub fn scenario_m() -> Scenario {
    Scenario::constant(
        "M",
        0.65,
        0.15,
        Particulates([914.08, 40.02, 1489.41, 93.45, 757.08, 3.30]),
        with_alkalinity([17.0, 0.01, 5.2, 7.0, 0.01, 0.01]),
    )
}

/// Pilot-plant scenario with a high sludge blanket and nitrate load.
pub fn scenario_h() -> Scenario {
    Scenario::constant(
        "H",
        0.65,
        0.15,
        Particulates([1309.94, 57.35, 2134.44, 133.92, 1084.95, 4.73]),
        with_alkalinity([18.0, 0.01, 4.48, 12.65, 0.021, 0.01]),
    )
}

pub fn bundled(label: &str) -> Option<Scenario> {
    match label {
        "L" | "l" => Some(scenario_l()),
        "M" | "m" => Some(scenario_m()),
        "H" | "h" => Some(scenario_h()),
        _ => None,
    }
}

/// Constant initial particulates used for the dynamic demonstrations.
pub fn initial_particulates() -> Particulates {
    Particulates([650.0, 150.0, 800.0, 150.0, 700.0, 100.0])
}

/// Constant initial solubles. The published vector has a malformed
/// fourth entry ("6.07.5"); it is read as `S_NO = 6.0`, `S_NH = 7.5`.
pub fn initial_solubles() -> Solubles {
    with_alkalinity([30.0, 2.0, 0.4, 6.0, 7.5, 5.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lookup() {
        let s = Schedule::steps(vec![(0.0, 1.0), (2.0, 3.0), (5.0, 4.0)]).unwrap();
        assert_eq!(*s.at(-1.0), 1.0);
        assert_eq!(*s.at(1.99), 1.0);
        assert_eq!(*s.at(2.0), 3.0);
        assert_eq!(*s.at(10.0), 4.0);
        assert_eq!(s.next_change(2.0), Some(5.0));
        assert_eq!(s.next_change(5.0), None);
        assert!(Schedule::steps(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn bundled_flows() {
        assert_eq!(scenario_l().flows(0.0), (1.0, 0.5, 0.5));
        let (qf, qu, qe) = scenario_m().flows(3.0);
        assert_eq!((qf, qu), (0.65, 0.15));
        assert!((qe - 0.5).abs() < 1e-15);
        for s in [scenario_l(), scenario_m(), scenario_h()] {
            s.validate().unwrap();
        }
    }

    #[test]
    fn invalid_flows_rejected() {
        let mut s = scenario_m();
        s.underflow = Schedule::constant(1.0);
        assert!(s.validate().is_err());
    }
}
