use crate::error::{Error, Result};

/// Regression deltas over a `±width` frame window with edge replication.
pub fn compute_delta(statics: &[Vec<f64>], width: usize) -> Result<Vec<Vec<f64>>> {
    let needed = 2 * width + 1;
    if statics.len() < needed {
        return Err(Error::TooFewFrames {
            frames: statics.len(),
            needed,
        });
    }
    let t_max = statics.len() as isize - 1;
    let dim = statics[0].len();
    let denom = 2.0 * (1..=width).map(|k| (k * k) as f64).sum::<f64>();
    let at = |t: isize| &statics[t.clamp(0, t_max) as usize];
    Ok((0..statics.len() as isize)
        .map(|t| {
            let mut d = vec![0.0; dim];
            for k in 1..=width as isize {
                let (fwd, back) = (at(t + k), at(t - k));
                for i in 0..dim {
                    d[i] += k as f64 * (fwd[i] - back[i]);
                }
            }
            d.iter_mut().for_each(|x| *x /= denom);
            d
        })
        .collect())
}
