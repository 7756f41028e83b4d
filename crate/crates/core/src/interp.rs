//! Piecewise-linear interpolation over strictly increasing nodes, with no
//! extrapolation.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("need at least one node")]
    Empty,
    #[error("nodes must be strictly increasing: {prev} then {next}")]
    NotIncreasing { prev: f64, next: f64 },
    #[error("{x} is outside the tabulated range [{min}, {max}]")]
    OutOfRange { x: f64, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, InterpError> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs.is_empty() {
            return Err(InterpError::Empty);
        }
        if let Some(w) = xs
            .windows(2)
            .find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(InterpError::NotIncreasing {
                prev: w[0],
                next: w[1],
            });
        }
        Ok(Self { xs, ys })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// Value at `x`; exact at nodes, never outside the bracketing node values.
    pub fn eval(&self, x: f64) -> Result<f64, InterpError> {
        let (min, max) = self.domain();
        if !self.contains(x) {
            return Err(InterpError::OutOfRange { x, min, max });
        }
        // first node >= x
        let k = self.xs.partition_point(|&n| n < x);
        if self.xs[k] == x {
            return Ok(self.ys[k]);
        }
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        let t = (x - x0) / (x1 - x0);
        let y = y0 + t * (y1 - y0);
        Ok(y.clamp(y0.min(y1), y0.max(y1)))
    }
}
