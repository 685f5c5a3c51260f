use super::space::ProductSpace;
use crate::error::{Error, Result};
use crate::report::fingerprint_floats;
use crate::spectral::ProbVec;

/// A probability distribution on a finite product space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    space: ProductSpace,
    weights: ProbVec,
}

/// States sharing the same values off a block of coordinates.
#[derive(Debug, Clone)]
pub struct Fiber {
    /// State indices, ordered so that position `a` is the block configuration
    /// with sub-space index `a`.
    pub members: Vec<usize>,
    pub mass: f64,
    /// Values of the coordinates outside the block, ascending by coordinate.
    pub complement: Vec<usize>,
}

impl JointDistribution {
    pub fn new(space: ProductSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.total() {
            return Err(Error::DimensionMismatch { expected: space.total(), found: weights.len() });
        }
        Ok(JointDistribution { space, weights: ProbVec::new(weights)? })
    }

    /// Independent coordinates with the given (unnormalized) marginals.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let normalized = marginals.iter().map(|m| ProbVec::new(m.clone())).collect::<Result<Vec<_>>>()?;
        let space = ProductSpace::new(marginals.iter().map(|m| m.len()).collect())?;
        let weights = (0..space.total())
            .map(|idx| normalized.iter().enumerate().map(|(i, m)| m.get(space.coord(idx, i))).product())
            .collect();
        JointDistribution::new(space, weights)
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn weights(&self) -> &ProbVec {
        &self.weights
    }

    pub fn n_coords(&self) -> usize {
        self.space.n_coords()
    }

    pub fn total(&self) -> usize {
        self.space.total()
    }

    pub fn fingerprint(&self) -> String {
        let sizes: Vec<f64> = self.space.sizes().iter().map(|&d| d as f64).collect();
        fingerprint_floats("joint", sizes.iter().chain(self.weights.as_slice()))
    }

    /// Partition of the states by their values off `block`.
    ///
    /// Fibers are ordered by their smallest member, which is the member with
    /// every block coordinate at 0.
    pub fn fibers(&self, block: &[usize]) -> Result<Vec<Fiber>> {
        self.space.validate_coords(block)?;
        let total = self.total();
        let mut fiber_of_key = vec![usize::MAX; total];
        let mut fibers: Vec<Fiber> = Vec::new();
        let complement_coords = self.space.complement(block);
        for idx in 0..total {
            let key = idx - block.iter().map(|&i| self.space.coord(idx, i) * self.space.stride(i)).sum::<usize>();
            let id = if fiber_of_key[key] == usize::MAX {
                fiber_of_key[key] = fibers.len();
                let config = self.space.decode(key);
                fibers.push(Fiber {
                    members: Vec::new(),
                    mass: 0.0,
                    complement: complement_coords.iter().map(|&i| config[i]).collect(),
                });
                fibers.len() - 1
            } else {
                fiber_of_key[key]
            };
            fibers[id].members.push(idx);
            fibers[id].mass += self.weights.get(idx);
        }
        Ok(fibers)
    }

    fn fiber_members(&self, block: &[usize], complement: &[usize]) -> Result<Vec<usize>> {
        self.space.validate_coords(block)?;
        let others = self.space.complement(block);
        if complement.len() != others.len() {
            return Err(Error::DimensionMismatch { expected: others.len(), found: complement.len() });
        }
        let mut base = vec![0; self.n_coords()];
        for (&i, &v) in others.iter().zip(complement) {
            base[i] = v;
        }
        let base_idx = self.space.encode(&base)?;
        let sub = self.space.sub_space(block)?;
        Ok((0..sub.total())
            .map(|a| {
                let local = sub.decode(a);
                base_idx + block.iter().zip(&local).map(|(&i, &v)| v * self.space.stride(i)).sum::<usize>()
            })
            .collect())
    }

    /// Conditional law of the block given the other coordinates, as a joint
    /// distribution on the block's sub-space.
    pub fn block_conditional(&self, block: &[usize], complement: &[usize]) -> Result<JointDistribution> {
        let members = self.fiber_members(block, complement)?;
        let w: Vec<f64> = members.iter().map(|&x| self.weights.get(x)).collect();
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::NullConditioningEvent { coords: block.to_vec(), complement: complement.to_vec() });
        }
        JointDistribution::new(self.space.sub_space(block)?, w)
    }

    /// `Π_{i,y}`: law of coordinate `i` given the remaining coordinates equal `y`.
    pub fn conditional(&self, i: usize, complement: &[usize]) -> Result<ProbVec> {
        Ok(self.block_conditional(&[i], complement)?.weights)
    }

    /// Marginal law of the kept coordinates on their sub-space.
    pub fn marginal(&self, keep: &[usize]) -> Result<ProbVec> {
        if keep.is_empty() {
            return Err(Error::InvalidSpace("marginal needs at least one coordinate".into()));
        }
        self.space.validate_coords(keep)?;
        let sub = self.space.sub_space(keep)?;
        let mut w = vec![0.0; sub.total()];
        for idx in 0..self.total() {
            let local: Vec<usize> = keep.iter().map(|&i| self.space.coord(idx, i)).collect();
            w[sub.encode(&local)?] += self.weights.get(idx);
        }
        ProbVec::new(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint_2x2() -> JointDistribution {
        JointDistribution::new(ProductSpace::new(vec![2, 2]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap()
    }

    #[test]
    fn conditional_of_first_coordinate() {
        let c = joint_2x2().conditional(0, &[0]).unwrap();
        assert!((c.get(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.get(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn independent_coins_have_uniform_conditionals() {
        let j = JointDistribution::product(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for i in 0..2 {
            for y in 0..2 {
                assert_eq!(j.conditional(i, &[y]).unwrap().as_slice(), &[0.5, 0.5]);
            }
        }
    }

    #[test]
    fn zero_mass_conditioning_is_an_error() {
        let j = JointDistribution::new(ProductSpace::new(vec![2, 2]).unwrap(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(j.conditional(0, &[1]), Err(Error::NullConditioningEvent { .. })));
    }

    #[test]
    fn marginals() {
        let j = joint_2x2();
        let m = j.marginal(&[1]).unwrap();
        assert!((m.get(0) - 0.3).abs() < 1e-15 && (m.get(1) - 0.7).abs() < 1e-15);
        let all = j.marginal(&[0, 1]).unwrap();
        for (a, b) in all.as_slice().iter().zip(j.weights().as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = JointDistribution::product(&[vec![1.0, 3.0], vec![2.0, 1.0, 1.0]]).unwrap();
        let m0 = p.marginal(&[0]).unwrap();
        assert!((m0.get(1) - 0.75).abs() < 1e-15);
        assert!(p.marginal(&[]).is_err());
    }

    #[test]
    fn fibers_partition_states() {
        let s = ProductSpace::new(vec![2, 3, 2]).unwrap();
        let j = JointDistribution::new(s, (1..=12).map(|v| v as f64).collect()).unwrap();
        let fibers = j.fibers(&[0, 2]).unwrap();
        assert_eq!(fibers.len(), 3);
        let mut seen = [false; 12];
        for f in &fibers {
            assert_eq!(f.members.len(), 4);
            for (a, &x) in f.members.iter().enumerate() {
                assert!(!seen[x]);
                seen[x] = true;
                let cfg = j.space().decode(x);
                assert_eq!(cfg[1], f.complement[0]);
                assert_eq!(cfg[0] + 2 * cfg[2], a);
            }
        }
        assert!(seen.iter().all(|&s| s));
        let cond = j.block_conditional(&[0, 2], &[1]).unwrap();
        assert_eq!(cond.total(), 4);
    }
}
