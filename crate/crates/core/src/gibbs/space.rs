use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of states in a product space.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;
/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "HGIBBS_MAX_STATES";

/// The cap in effect: `HGIBBS_MAX_STATES` when set and valid, else the default.
pub fn state_cap() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// Finite product space `X₀ × … × X_{n−1}` with a mixed-radix state code.
///
/// Coordinate 0 varies fastest: `stride[0] = 1`, `stride[i+1] = stride[i]·size[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpace {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl ProductSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        Self::with_cap(sizes, state_cap())
    }

    pub fn with_cap(sizes: Vec<usize>, cap: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidSpace("at least one coordinate is required".into()));
        }
        if let Some(i) = sizes.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSpace(format!("coordinate {i} has size 0")));
        }
        let mut strides = Vec::with_capacity(sizes.len());
        let mut total: usize = 1;
        for &d in &sizes {
            strides.push(total);
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(Error::StateSpaceTooLarge { states: total.saturating_mul(d), cap })?;
        }
        Ok(ProductSpace { sizes, strides, total })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_coords(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    pub fn encode(&self, config: &[usize]) -> Result<usize> {
        if config.len() != self.n_coords() {
            return Err(Error::DimensionMismatch { expected: self.n_coords(), found: config.len() });
        }
        let mut idx = 0;
        for (i, (&x, &d)) in config.iter().zip(&self.sizes).enumerate() {
            if x >= d {
                return Err(Error::InvalidSpace(format!("coordinate {i} value {x} out of range 0..{d}")));
            }
            idx += x * self.strides[i];
        }
        Ok(idx)
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.n_coords()).map(|i| self.coord(index, i)).collect()
    }

    pub fn coord(&self, index: usize, i: usize) -> usize {
        (index / self.strides[i]) % self.sizes[i]
    }

    /// Coordinates not in `block`, ascending.
    pub fn complement(&self, block: &[usize]) -> Vec<usize> {
        (0..self.n_coords()).filter(|i| !block.contains(i)).collect()
    }

    /// The product of the listed coordinates, in the listed order.
    pub fn sub_space(&self, coords: &[usize]) -> Result<ProductSpace> {
        ProductSpace::with_cap(coords.iter().map(|&i| self.sizes[i]).collect(), usize::MAX)
    }

    pub(crate) fn validate_coords(&self, coords: &[usize]) -> Result<()> {
        for (pos, &i) in coords.iter().enumerate() {
            if i >= self.n_coords() {
                return Err(Error::InvalidSpace(format!("coordinate {i} out of range 0..{}", self.n_coords())));
            }
            if coords[..pos].contains(&i) {
                return Err(Error::InvalidSpace(format!("coordinate {i} listed twice")));
            }
            if pos > 0 && coords[pos - 1] > i {
                return Err(Error::InvalidSpace("coordinates must be ascending".into()));
            }
        }
        Ok(())
    }
}
