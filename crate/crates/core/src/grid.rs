use crate::error::{Error, Result};

/// Partition 0 = t_0 < t_1 < ... < t_N of the time interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidConfig(
                "time grid needs at least two levels".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig(
                "time levels must be strictly increasing".into(),
            ));
        }
        Ok(Self { times })
    }

    /// Steps of exactly `dt` from 0; the final step is shortened so the
    /// grid ends at `t_end`.
    pub fn uniform(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need dt > 0 and T > 0 (dt={dt}, T={t_end})"
            )));
        }
        let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
        let mut times: Vec<f64> = (0..steps).map(|n| n as f64 * dt).collect();
        times.push(t_end);
        Self::new(times)
    }

    /// `steps` steps of exactly `dt`.
    pub fn fixed_steps(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || steps == 0 {
            return Err(Error::InvalidConfig(format!(
                "need dt > 0 and steps > 0 (dt={dt})"
            )));
        }
        Self::new((0..=steps).map(|n| n as f64 * dt).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn levels(&self) -> usize {
        self.times.len()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t(&self, n: usize) -> f64 {
        self.times[n]
    }

    pub fn dt(&self, n: usize) -> f64 {
        self.times[n + 1] - self.times[n]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index n of the interval [t_n, t_{n+1}] containing `t`. A grid level
    /// t_n (n > 0) belongs to the interval it ends, so rates evaluated there
    /// are left limits.
    pub fn interval(&self, t: f64) -> usize {
        let last = self.steps() - 1;
        match self.times.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(n) => n.saturating_sub(1).min(last),
            Err(0) => 0,
            Err(n) => (n - 1).min(last),
        }
    }

    /// Fraction (t - t_n) / dt_n within interval n.
    pub fn fraction(&self, n: usize, t: f64) -> f64 {
        (t - self.times[n]) / self.dt(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_truncates_last_step() {
        let g = TimeGrid::uniform(1.0, 0.3).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((g.dt(0) - 0.3).abs() < 1e-15);
        assert!((g.dt(3) - 0.1).abs() < 1e-12);
        let g = TimeGrid::uniform(1.0, 0.2).unwrap();
        assert_eq!(g.steps(), 5);
        assert_eq!(g.t_end(), 1.0);
        let g = TimeGrid::uniform(1.0, 10.0).unwrap();
        assert_eq!(g.steps(), 1);
    }

    #[test]
    fn interval_lookup() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.interval(0.0), 0);
        assert_eq!(g.interval(0.25), 0);
        assert_eq!(g.interval(0.5), 0);
        assert_eq!(g.interval(0.5 + 1e-12), 1);
        assert_eq!(g.interval(1.0), 1);
        assert_eq!(g.interval(2.0), 1);
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
    }
}
