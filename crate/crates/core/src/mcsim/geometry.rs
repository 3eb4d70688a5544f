use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use std::f64::consts::PI;

use super::McError;

/// Width of one common-random-number ring, in units of `1/√λ`.
pub const RING_WIDTH_FACTOR: f64 = 5.0;

/// Independent substreams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub(crate) enum Stream {
    RingPoints = 1,
    RingGains = 2,
    Signal = 3,
    Channel = 4,
}

/// Counter-derived generator for `(seed, trial, stream, index, attempt)`.
pub(crate) fn stream_rng(seed: u64, trial: u64, stream: Stream, index: u32, attempt: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..20].copy_from_slice(&(stream as u32).to_le_bytes());
    key[20..24].copy_from_slice(&index.to_le_bytes());
    key[24..28].copy_from_slice(&attempt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    /// Typical user at the origin, cluster = `l` nearest BSs to the origin.
    Comm { l: u32 },
    /// Typical target at the origin, cluster = serving BS plus its `q − 1`
    /// nearest neighbours.
    Sense { q: u32 },
}

/// One BS layout in a disk around the origin, with the serving/cluster/
/// interferer split.
#[derive(Debug, Clone, PartialEq)]
pub struct PppRealization {
    pub points: Vec<[f64; 2]>,
    pub serving_index: usize,
    /// Sorted by distance to the origin (comm) or to the serving BS (sense);
    /// the serving BS comes first.
    pub cluster_indices: Vec<usize>,
    pub interferer_indices: Vec<usize>,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Indices of the `n` smallest keys, sorted ascending.
fn smallest(keys: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    let by_key = |a: &usize, b: &usize| keys[*a].total_cmp(&keys[*b]).then(a.cmp(b));
    if n < idx.len() {
        idx.select_nth_unstable_by(n, by_key);
        idx.truncate(n);
    }
    idx.sort_by(by_key);
    idx
}

impl PppRealization {
    /// Partition a point set. Fails when there are not enough points to
    /// fill the cluster (comm) or no point at all (sense).
    pub fn from_points(points: Vec<[f64; 2]>, partition: Partition) -> Result<Self, McError> {
        if points.is_empty() {
            return Err(McError::EmptyRealization);
        }
        let origin = [0.0, 0.0];
        let d0: Vec<f64> = points.iter().map(|&p| dist2(p, origin)).collect();
        let cluster_indices = match partition {
            Partition::Comm { l } => {
                if points.len() < l as usize {
                    return Err(McError::EmptyRealization);
                }
                smallest(&d0, l as usize)
            }
            Partition::Sense { q } => {
                let serving = smallest(&d0, 1)[0];
                let ds: Vec<f64> = points
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| if i == serving { -1.0 } else { dist2(p, points[serving]) })
                    .collect();
                smallest(&ds, (q as usize).min(points.len()))
            }
        };
        let serving_index = cluster_indices[0];
        let mut in_cluster = vec![false; points.len()];
        for &i in &cluster_indices {
            in_cluster[i] = true;
        }
        let interferer_indices = (0..points.len()).filter(|&i| !in_cluster[i]).collect();
        Ok(PppRealization { points, serving_index, cluster_indices, interferer_indices })
    }

    pub fn serving(&self) -> [f64; 2] {
        self.points[self.serving_index]
    }

    pub fn distance_to_origin(&self, i: usize) -> f64 {
        dist2(self.points[i], [0.0, 0.0]).sqrt()
    }

    pub fn distance_to_serving(&self, i: usize) -> f64 {
        self.distance2_to_serving(i).sqrt()
    }

    pub fn distance2_to_origin(&self, i: usize) -> f64 {
        dist2(self.points[i], [0.0, 0.0])
    }

    pub fn distance2_to_serving(&self, i: usize) -> f64 {
        dist2(self.points[i], self.serving())
    }
}

/// Uniform points in the disk of radius `window_radius`, count Poisson.
pub fn sample_points<R: Rng + ?Sized>(lambda_b: f64, window_radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    annulus_points(lambda_b, 0.0, window_radius, rng)
}

fn annulus_points<R: Rng + ?Sized>(lambda_b: f64, inner: f64, outer: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let area = PI * (outer * outer - inner * inner);
    let mean = lambda_b * area;
    let n = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(rng) as usize } else { 0 };
    (0..n)
        .map(|_| {
            let r = (inner * inner + rng.random::<f64>() * (outer * outer - inner * inner)).sqrt();
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            [r * c, r * s]
        })
        .collect()
}

/// One PPP draw in a disk with the requested partition.
pub fn sample_ppp<R: Rng + ?Sized>(
    lambda_b: f64,
    window_radius: f64,
    partition: Partition,
    rng: &mut R,
) -> Result<PppRealization, McError> {
    if !(window_radius > 0.0 && lambda_b > 0.0) {
        return Err(McError::InvalidConfig(format!("window radius {window_radius} and density {lambda_b} must be > 0")));
    }
    PppRealization::from_points(sample_points(lambda_b, window_radius, rng), partition)
}

/// Layout built ring by ring from independent streams, so that enlarging
/// the window keeps every inner point and its gain unchanged.
#[derive(Debug, Clone)]
pub(crate) struct RingLayout {
    pub points: Vec<[f64; 2]>,
    /// `Γ(gain_shape, 1)` mark of each point.
    pub gains: Vec<f64>,
}

pub(crate) fn ring_layout(
    lambda_b: f64,
    window_radius: f64,
    gain_shape: f64,
    seed: u64,
    trial: u64,
    attempt: u32,
) -> RingLayout {
    let width = RING_WIDTH_FACTOR / lambda_b.sqrt();
    let rings = (window_radius / width - 1e-12).ceil().max(1.0) as u32;
    let gamma = (gain_shape > 0.0).then(|| Gamma::new(gain_shape, 1.0).expect("positive shape"));
    let mut points = Vec::new();
    let mut gains = Vec::new();
    for ring in 0..rings {
        let (inner, outer) = (ring as f64 * width, (ring + 1) as f64 * width);
        let mut prng = stream_rng(seed, trial, Stream::RingPoints, ring, attempt);
        let mut grng = stream_rng(seed, trial, Stream::RingGains, ring, attempt);
        for p in annulus_points(lambda_b, inner, outer, &mut prng) {
            let g = gamma.map_or(0.0, |d| d.sample(&mut grng));
            if dist2(p, [0.0, 0.0]) <= window_radius * window_radius {
                points.push(p);
                gains.push(g);
            }
        }
    }
    RingLayout { points, gains }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_cover_the_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for partition in [Partition::Comm { l: 3 }, Partition::Sense { q: 4 }] {
            let r = sample_ppp(1.0, 6.0, partition, &mut rng).unwrap();
            let mut all: Vec<usize> = r.cluster_indices.iter().chain(&r.interferer_indices).copied().collect();
            all.sort();
            assert_eq!(all, (0..r.points.len()).collect::<Vec<_>>());
            assert_eq!(r.cluster_indices[0], r.serving_index);
        }
    }

    #[test]
    fn serving_is_nearest_and_clusters_are_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = sample_ppp(1.0, 8.0, Partition::Sense { q: 5 }, &mut rng).unwrap();
        let d_serv = r.distance_to_origin(r.serving_index);
        assert!((0..r.points.len()).all(|i| r.distance_to_origin(i) >= d_serv));
        let ds: Vec<f64> = r.cluster_indices.iter().map(|&i| r.distance_to_serving(i)).collect();
        assert!(ds.windows(2).all(|w| w[0] <= w[1]));
        let farthest = *ds.last().unwrap();
        assert!(r.interferer_indices.iter().all(|&i| r.distance_to_serving(i) >= farthest));

        let c = sample_ppp(1.0, 8.0, Partition::Comm { l: 4 }, &mut rng).unwrap();
        let d: Vec<f64> = c.cluster_indices.iter().map(|&i| c.distance_to_origin(i)).collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.interferer_indices.iter().all(|&i| c.distance_to_origin(i) >= d[3]));
    }

    #[test]
    fn empty_window_is_reported() {
        assert_eq!(PppRealization::from_points(vec![], Partition::Sense { q: 1 }), Err(McError::EmptyRealization));
        assert_eq!(PppRealization::from_points(vec![[1.0, 0.0]], Partition::Comm { l: 2 }), Err(McError::EmptyRealization));
    }

    #[test]
    fn larger_window_keeps_inner_rings() {
        let small = ring_layout(1.0, 20.0, 2.0, 77, 3, 0);
        let big = ring_layout(1.0, 40.0, 2.0, 77, 3, 0);
        let inner: Vec<_> = big.points.iter().zip(&big.gains).filter(|(p, _)| dist2(**p, [0.0, 0.0]) <= 400.0).collect();
        assert_eq!(inner.len(), small.points.len());
        for ((p, g), (q, h)) in inner.iter().zip(small.points.iter().zip(&small.gains)) {
            assert_eq!(**p, *q);
            assert_eq!(**g, *h);
        }
    }

    #[test]
    fn fractional_window_truncates_last_ring() {
        let l = ring_layout(1.0, 7.0, 1.0, 1, 1, 0);
        assert!(l.points.iter().all(|&p| dist2(p, [0.0, 0.0]) <= 49.0));
    }
}
