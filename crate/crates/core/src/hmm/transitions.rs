use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::topology::{Order, TopologySpec};

/// Transition probabilities with their structural masks, stored row-major.
///
/// For a first-order chain `first[i * n + j]` is `a_ij`. For a second-order
/// chain `first` drives the step from the first to the second frame and
/// `second[(i * n + j) * n + k]` is `a_ijk` afterwards. `second` is empty for
/// first-order models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    pub num_states: usize,
    pub order: Order,
    pub initial: Vec<f64>,
    pub initial_mask: Vec<bool>,
    pub first: Vec<f64>,
    pub first_mask: Vec<bool>,
    pub second: Vec<f64>,
    pub second_mask: Vec<bool>,
}

fn uniform_groups(mask: &[bool], group: usize) -> Vec<f64> {
    mask.chunks(group)
        .flat_map(|g| {
            let allowed = g.iter().filter(|&&m| m).count();
            g.iter()
                .map(move |&m| if m { 1.0 / allowed as f64 } else { 0.0 })
        })
        .collect()
}

/// Structural mask plus a transition model uniform over the allowed entries
/// of every normalisation group.
pub fn build_topology(spec: &TopologySpec) -> Result<TransitionModel> {
    spec.validate()?;
    let n = spec.num_states;
    let initial_mask = spec.initial_mask();
    let first_mask = spec.first_order_mask();
    let (second, second_mask) = match spec.order {
        Order::First => (Vec::new(), Vec::new()),
        Order::Second => {
            let mask = spec.second_order_mask();
            (uniform_groups(&mask, n), mask)
        }
    };
    Ok(TransitionModel {
        num_states: n,
        order: spec.order,
        initial: uniform_groups(&initial_mask, n),
        initial_mask,
        first: uniform_groups(&first_mask, n),
        first_mask,
        second,
        second_mask,
    })
}

impl TransitionModel {
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.first[i * self.num_states + j]
    }

    pub fn a3(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.num_states;
        self.second[(i * n + j) * n + k]
    }

    /// Checks shapes, structural zeros and group stochasticity.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.num_states;
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.initial.len() != n || self.initial_mask.len() != n {
            return bad("initial distribution has the wrong length".into());
        }
        if self.first.len() != n * n || self.first_mask.len() != n * n {
            return bad("first-order matrix has the wrong shape".into());
        }
        let expect_second = match self.order {
            Order::First => 0,
            Order::Second => n * n * n,
        };
        if self.second.len() != expect_second || self.second_mask.len() != expect_second {
            return bad("second-order tensor has the wrong shape".into());
        }
        check_groups("initial", &self.initial, &self.initial_mask, n, tol)?;
        check_groups("first-order", &self.first, &self.first_mask, n, tol)?;
        check_groups("second-order", &self.second, &self.second_mask, n, tol)
    }
}

fn check_groups(name: &str, p: &[f64], mask: &[bool], group: usize, tol: f64) -> Result<()> {
    for (g, (pg, mg)) in p.chunks(group).zip(mask.chunks(group)).enumerate() {
        let mut sum = 0.0;
        let mut any = false;
        for (&v, &m) in pg.iter().zip(mg) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidModel(format!("{name} group {g}: entry {v} outside [0, 1]")));
            }
            if !m && v != 0.0 {
                return Err(Error::InvalidModel(format!("{name} group {g}: mass on a masked entry")));
            }
            any |= m;
            sum += v;
        }
        if any && (sum - 1.0).abs() > tol {
            return Err(Error::InvalidModel(format!("{name} group {g} sums to {sum}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::topology::TopologyKind::*;

    fn allowed(mask: &[bool], n: usize) -> Vec<(usize, usize)> {
        (0..n * n)
            .filter(|&x| mask[x])
            .map(|x| (x / n + 1, x % n + 1))
            .collect()
    }

    #[test]
    fn left_to_right_first_order() {
        let t = build_topology(&TopologySpec::new(LeftToRight, Order::First, 3).unwrap()).unwrap();
        assert_eq!(allowed(&t.first_mask, 3), vec![(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)]);
        t.validate(1e-12).unwrap();
        assert_eq!(t.initial, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn circular_first_order_is_irreducible() {
        let t = build_topology(&TopologySpec::new(Circular, Order::First, 3).unwrap()).unwrap();
        assert!(allowed(&t.first_mask, 3).contains(&(3, 1)));
        // reachability by repeated squaring of the boolean adjacency
        let n = 3;
        let mut reach = t.first_mask.clone();
        for _ in 0..n {
            let prev = reach.clone();
            for i in 0..n {
                for j in 0..n {
                    reach[i * n + j] |= (0..n).any(|k| prev[i * n + k] && t.first_mask[k * n + j]);
                }
            }
        }
        assert!(reach.iter().all(|&r| r));
    }

    #[test]
    fn left_to_right_never_goes_back() {
        let t = build_topology(&TopologySpec::new(LeftToRight, Order::First, 5).unwrap()).unwrap();
        for i in 0..5 {
            for j in 0..i {
                assert!(!t.first_mask[i * 5 + j]);
            }
        }
    }

    #[test]
    fn circular_second_order_group() {
        let t = build_topology(&TopologySpec::new(Circular, Order::Second, 3).unwrap()).unwrap();
        // pair (2,3) -> k in {3, 1}, 1-based
        let ks: Vec<usize> = (0..3).filter(|&k| t.second_mask[(3 + 2) * 3 + k]).map(|k| k + 1).collect();
        assert_eq!(ks, vec![1, 3]);
        assert!(((0..3).map(|k| t.a3(1, 2, k)).sum::<f64>() - 1.0).abs() < 1e-15);
        t.validate(1e-12).unwrap();
    }

    #[test]
    fn circular_needs_two_states() {
        assert!(TopologySpec::new(Circular, Order::First, 1).is_err());
        assert!(build_topology(&TopologySpec {
            kind: Circular,
            order: Order::Second,
            num_states: 1
        })
        .is_err());
        assert!(TopologySpec::new(LeftToRight, Order::First, 1).is_ok());
    }

    #[test]
    fn validate_catches_masked_mass() {
        let mut t = build_topology(&TopologySpec::new(LeftToRight, Order::First, 3).unwrap()).unwrap();
        t.first[2] = 0.1;
        assert!(t.validate(1e-9).is_err());
    }
}
