use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::logsumexp;

/// Lower bound on variances: one value for every dimension, or one per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VarFloor {
    Uniform(f64),
    PerDim(Vec<f64>),
}

impl VarFloor {
    pub fn at(&self, d: usize) -> f64 {
        match self {
            VarFloor::Uniform(v) => *v,
            VarFloor::PerDim(v) => v[d],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match self {
            VarFloor::Uniform(v) => v.is_finite() && *v > 0.0,
            VarFloor::PerDim(v) => v.len() == dim && v.iter().all(|x| x.is_finite() && *x > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("variance floor {self:?} unusable for dimension {dim}")))
        }
    }
}

impl From<f64> for VarFloor {
    fn from(v: f64) -> Self {
        VarFloor::Uniform(v)
    }
}

impl From<Vec<f64>> for VarFloor {
    fn from(v: Vec<f64>) -> Self {
        VarFloor::PerDim(v)
    }
}

/// Diagonal-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gmm {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl Gmm {
    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, var_floor: impl Into<VarFloor>) -> Result<()> {
        let var_floor = var_floor.into();
        let m = self.weights.len();
        if m == 0 || self.means.len() != m || self.variances.len() != m {
            return Err(Error::InvalidModel("mixture component counts disagree".into()));
        }
        let d = self.dim();
        if self.means.iter().chain(&self.variances).any(|v| v.len() != d) {
            return Err(Error::InvalidModel("mixture dimensions disagree".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidModel(format!("mixture weights sum to {total}")));
        }
        var_floor.validate(d)?;
        if self
            .variances
            .iter()
            .flat_map(|v| v.iter().enumerate())
            .any(|(i, &v)| !v.is_finite() || v < var_floor.at(i))
        {
            return Err(Error::InvalidModel("variance below floor".into()));
        }
        Ok(())
    }

    pub fn prepare(&self) -> PreparedGmm {
        let comps = self
            .weights
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((&w, mean), var)| PreparedComponent {
                log_const: w.ln() - 0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>(),
                mean: mean.clone(),
                inv_var: var.iter().map(|v| 1.0 / v).collect(),
            })
            .collect();
        PreparedGmm { comps }
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.prepare().log_density(x)
    }
}

struct PreparedComponent {
    log_const: f64,
    mean: Vec<f64>,
    inv_var: Vec<f64>,
}

/// A mixture with normalising constants and inverse variances cached.
pub struct PreparedGmm {
    comps: Vec<PreparedComponent>,
}

impl PreparedGmm {
    /// Writes `ln w_m + ln N(x; mu_m, sigma_m)` for every component.
    pub fn component_terms(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.comps.iter().map(|c| {
            let q: f64 = x
                .iter()
                .zip(&c.mean)
                .zip(&c.inv_var)
                .map(|((xi, mi), iv)| (xi - mi) * (xi - mi) * iv)
                .sum();
            c.log_const - 0.5 * q
        }));
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut buf = Vec::with_capacity(self.comps.len());
        self.component_terms(x, &mut buf);
        logsumexp(&buf)
    }
}

/// Sufficient statistics for one mixture under soft assignments.
#[derive(Debug, Clone)]
pub(crate) struct GmmAccumulator {
    pub occ: Vec<f64>,
    pub sum: Vec<Vec<f64>>,
    pub sum_sq: Vec<Vec<f64>>,
}

impl GmmAccumulator {
    pub fn new(components: usize, dim: usize) -> Self {
        Self {
            occ: vec![0.0; components],
            sum: vec![vec![0.0; dim]; components],
            sum_sq: vec![vec![0.0; dim]; components],
        }
    }

    pub fn add(&mut self, component: usize, weight: f64, x: &[f64]) {
        self.occ[component] += weight;
        let (s, s2) = (&mut self.sum[component], &mut self.sum_sq[component]);
        for ((a, b), &v) in s.iter_mut().zip(s2.iter_mut()).zip(x) {
            *a += weight * v;
            *b += weight * v * v;
        }
    }

    pub fn total(&self) -> f64 {
        self.occ.iter().sum()
    }

    /// Maximum-likelihood update with variances clamped at `var_floor`.
    /// Components with no occupancy keep their parameters and get weight 0.
    pub fn update(&self, gmm: &mut Gmm, var_floor: &VarFloor) {
        let total = self.total();
        if total <= 0.0 {
            return;
        }
        for m in 0..self.occ.len() {
            let occ = self.occ[m];
            gmm.weights[m] = occ / total;
            if occ <= 0.0 {
                continue;
            }
            for d in 0..self.sum[m].len() {
                let mean = self.sum[m][d] / occ;
                let var = self.sum_sq[m][d] / occ - mean * mean;
                gmm.means[m][d] = mean;
                gmm.variances[m][d] = var.max(var_floor.at(d));
            }
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Seeded Lloyd's k-means followed by per-cluster moments.
pub fn kmeans_init(data: &[&[f64]], components: usize, var_floor: impl Into<VarFloor>, seed: u64) -> Result<Gmm> {
    if data.is_empty() {
        return Err(Error::Training("no frames to initialise a mixture from".into()));
    }
    let dim = data[0].len();
    let var_floor = var_floor.into();
    var_floor.validate(dim)?;
    let k = components.clamp(1, data.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = sample(&mut rng, data.len(), k)
        .into_iter()
        .map(|i| data[i].to_vec())
        .collect();

    let mut assign = vec![0usize; data.len()];
    for _ in 0..20 {
        let mut changed = false;
        for (i, x) in data.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(x, &centroids[a]).total_cmp(&sq_dist(x, &centroids[b])))
                .unwrap();
            changed |= assign[i] != best;
            assign[i] = best;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&[f64]> = data
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(x, _)| *x)
                .collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..dim {
                centroid[d] = members.iter().map(|x| x[d]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }

    let pooled = moments(data, dim, &var_floor);
    let mut gmm = Gmm {
        weights: Vec::with_capacity(k),
        means: Vec::with_capacity(k),
        variances: Vec::with_capacity(k),
    };
    for (c, centroid) in centroids.into_iter().enumerate() {
        let members: Vec<&[f64]> = data
            .iter()
            .zip(&assign)
            .filter(|(_, &a)| a == c)
            .map(|(x, _)| *x)
            .collect();
        gmm.weights.push(members.len() as f64);
        if members.len() < 2 {
            gmm.means.push(centroid);
            gmm.variances.push(pooled.1.clone());
        } else {
            let (mean, var) = moments(&members, dim, &var_floor);
            gmm.means.push(mean);
            gmm.variances.push(var);
        }
    }
    // empty clusters still get a little weight so every component stays live
    let floor_w = 0.5;
    gmm.weights.iter_mut().for_each(|w| *w = w.max(floor_w));
    let total: f64 = gmm.weights.iter().sum();
    gmm.weights.iter_mut().for_each(|w| *w /= total);
    Ok(gmm)
}

fn moments(data: &[&[f64]], dim: usize, var_floor: &VarFloor) -> (Vec<f64>, Vec<f64>) {
    let n = data.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|d| data.iter().map(|x| x[d]).sum::<f64>() / n).collect();
    let var = (0..dim)
        .map(|d| {
            let v = data.iter().map(|x| (x[d] - mean[d]).powi(2)).sum::<f64>() / n;
            v.max(var_floor.at(d))
        })
        .collect();
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_density() {
        let g = Gmm {
            weights: vec![1.0],
            means: vec![vec![1.0, -2.0]],
            variances: vec![vec![0.5, 2.0]],
        };
        let x = [0.3, 0.1];
        let direct = -0.5 * ((2.0 * PI * 0.5f64).ln() + (0.7f64 * 0.7) / 0.5)
            - 0.5 * ((2.0 * PI * 2.0f64).ln() + (2.1f64 * 2.1) / 2.0);
        assert!((g.log_density(&x) - direct).abs() < 1e-12);
    }

    #[test]
    fn mixture_density_is_weighted_sum() {
        let g = Gmm {
            weights: vec![0.3, 0.7],
            means: vec![vec![0.0], vec![3.0]],
            variances: vec![vec![1.0], vec![0.25]],
        };
        let pdf = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        let x = 1.7;
        let expected = (0.3 * pdf(x, 0.0, 1.0) + 0.7 * pdf(x, 3.0, 0.25)).ln();
        assert!((g.log_density(&[x]) - expected).abs() < 1e-12);
    }

    #[test]
    fn kmeans_is_seeded_and_valid() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i % 2 == 0 { 0.0 } else { 10.0 } + i as f64 * 0.01, 1.0])
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let a = kmeans_init(&refs, 2, 1e-4, 5).unwrap();
        let b = kmeans_init(&refs, 2, 1e-4, 5).unwrap();
        assert_eq!(a, b);
        a.validate(1e-4).unwrap();
        let mut centres: Vec<f64> = a.means.iter().map(|m| m[0]).collect();
        centres.sort_by(f64::total_cmp);
        assert!(centres[0] < 1.0 && centres[1] > 9.0);
    }

    #[test]
    fn kmeans_with_fewer_points_than_components() {
        let pts = [vec![1.0], vec![2.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let g = kmeans_init(&refs, 4, 1e-4, 1).unwrap();
        assert_eq!(g.num_components(), 2);
        g.validate(1e-4).unwrap();
    }
}
