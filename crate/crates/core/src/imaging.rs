//! Absorption imaging as a binned position measurement.
//!
//! A [`PixelGrid`] splits the line into `N_p` pixels plus two outer bins.
//! An image records how many particles land in each bin; its probability is
//! the integral of the normalized density over the corresponding box. With
//! coordinates kept ascending across bins this reduces to
//! `P(𝔫) = ∫_{A ∩ ordered} |ψ̃|² / 𝒩²`.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe::{dnorm_sq_dc, norm_sq, solve_bethe, ModelParams, StateSpec};
use crate::error::{invalid, Error, Result};
use crate::fisher::default_order;
use crate::integrals::box_quadrature;
use crate::wavefunction::{amplitudes, eval_unchecked};

/// Pixels `[a0 + (j-1) dx, a0 + j dx]` for `j = 1..=N_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub a0: f64,
    pub dx: f64,
    pub n_pixels: usize,
}

impl PixelGrid {
    pub fn new(a0: f64, dx: f64, n_pixels: usize) -> Result<Self> {
        if n_pixels < 1 {
            return invalid("a pixel grid needs at least one pixel");
        }
        if !(dx > 0.0 && dx.is_finite() && a0.is_finite()) {
            return invalid("pixel width must be positive and the origin finite");
        }
        Ok(PixelGrid { a0, dx, n_pixels })
    }

    /// `N_p` equal pixels exactly covering `[0, L]`.
    pub fn tiling(l: f64, n_pixels: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return invalid("system size must be positive");
        }
        if n_pixels < 1 {
            return invalid("a pixel grid needs at least one pixel");
        }
        PixelGrid::new(0.0, l / n_pixels as f64, n_pixels)
    }

    pub fn n_bins(&self) -> usize {
        self.n_pixels + 2
    }

    pub fn edge(&self, j: usize) -> f64 {
        if j == self.n_pixels {
            // avoid rounding past the last edge of an exact tiling
            self.a0 + self.dx * self.n_pixels as f64
        } else {
            self.a0 + self.dx * j as f64
        }
    }

    pub fn covers(&self, l: f64) -> bool {
        self.a0 <= 0.0 && self.edge(self.n_pixels) >= l
    }

    /// Bin `j` (0 and `N_p + 1` are the outer bins) clipped to `[0, L]`; `None` if empty.
    pub fn clipped_bin(&self, j: usize, l: f64) -> Option<(f64, f64)> {
        let (lo, hi) = if j == 0 {
            (f64::NEG_INFINITY, self.a0)
        } else if j <= self.n_pixels {
            (self.edge(j - 1), self.edge(j))
        } else {
            (self.edge(self.n_pixels), f64::INFINITY)
        };
        let (lo, hi) = (lo.max(0.0), hi.min(l));
        (hi > lo).then_some((lo, hi))
    }
}

/// Occupation numbers `(𝔫_0, 𝔫_1, ..., 𝔫_{N_p+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbsorptionImage {
    pub counts: Vec<u32>,
}

impl AbsorptionImage {
    pub fn new(counts: Vec<u32>) -> Self {
        AbsorptionImage { counts }
    }

    pub fn particles(&self) -> u32 {
        self.counts.iter().sum()
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// Number of images, `(N + N_p + 1)! / ((N_p + 1)! N!)`.
pub fn image_count(n: usize, n_pixels: usize) -> Option<u128> {
    binomial((n + n_pixels + 1) as u128, n as u128)
}

pub const DEFAULT_IMAGE_CAP: u128 = 2_000_000;

pub fn enumerate_images(n: usize, n_pixels: usize) -> Result<Vec<AbsorptionImage>> {
    enumerate_images_capped(n, n_pixels, DEFAULT_IMAGE_CAP)
}

/// All weak compositions of `N` into `N_p + 2` bins, first bin descending.
pub fn enumerate_images_capped(n: usize, n_pixels: usize, cap: u128) -> Result<Vec<AbsorptionImage>> {
    if n < 1 || n_pixels < 1 {
        return invalid("enumeration needs N >= 1 and N_p >= 1");
    }
    let count = image_count(n, n_pixels)
        .filter(|c| *c <= cap)
        .ok_or_else(|| Error::ResourceLimit(format!("more than {cap} images for N = {n}, N_p = {n_pixels}")))?;
    let bins = n_pixels + 2;
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0u32; bins];
    counts[0] = n as u32;
    loop {
        out.push(AbsorptionImage::new(counts.clone()));
        // move one particle from the last non-final occupied bin one step right,
        // gathering everything beyond it
        let Some(j) = (0..bins - 1).rev().find(|&j| counts[j] > 0) else { break };
        let tail = counts[bins - 1];
        counts[bins - 1] = 0;
        counts[j] -= 1;
        counts[j + 1] = tail + 1;
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

/// Multinomial coefficient `N! / Π 𝔫_j!`.
pub fn multiplicity(image: &AbsorptionImage) -> u128 {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &m in &image.counts {
        total += m as u128;
        acc = acc.saturating_mul(binomial(total, m as u128).unwrap_or(u128::MAX));
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image: AbsorptionImage,
    pub probability: f64,
    pub dprob_dc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageDistribution {
    pub grid: PixelGrid,
    pub state: StateSpec,
    pub params: ModelParams,
    pub quadrature_order: usize,
    pub entries: Vec<ImageEntry>,
}

impl ImageDistribution {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn total_derivative(&self) -> f64 {
        self.entries.iter().map(|e| e.dprob_dc).sum()
    }
}

/// Default per-dimension order for pixel boxes.
pub fn default_box_order(n: usize, n_pixels: usize) -> usize {
    default_order(n).div_ceil(n_pixels).max(16)
}

pub fn image_distribution(spec: &StateSpec, params: &ModelParams, grid: &PixelGrid) -> Result<ImageDistribution> {
    image_distribution_with(spec, params, grid, default_box_order(spec.n(), grid.n_pixels))
}

pub fn image_distribution_with(
    spec: &StateSpec,
    params: &ModelParams,
    grid: &PixelGrid,
    order: usize,
) -> Result<ImageDistribution> {
    let sol = solve_bethe(spec, params)?;
    let table = amplitudes(&sol)?;
    let norm = norm_sq(&sol.k, &sol.params, sol.bc()).norm_sq;
    let dnorm = dnorm_sq_dc(spec, params)?;
    let l = sol.params.l;
    let images = enumerate_images(spec.n(), grid.n_pixels)?;

    let entries = images
        .into_par_iter()
        .map(|image| -> Result<ImageEntry> {
            let mut intervals = Vec::with_capacity(spec.n());
            let mut inv_fact = 1.0;
            for (j, &m) in image.counts.iter().enumerate() {
                if m == 0 {
                    continue;
                }
                let Some(iv) = grid.clipped_bin(j, l) else {
                    return Ok(ImageEntry { image, probability: 0.0, dprob_dc: 0.0 });
                };
                intervals.extend(std::iter::repeat_n(iv, m as usize));
                inv_fact /= (1..=m).map(f64::from).product::<f64>();
            }
            let [dens, cross]: [f64; 2] = box_quadrature(
                |x| {
                    let (v, dv) = eval_unchecked(&table, &sol, x);
                    [v.norm_sqr(), 2.0 * (v.conj() * dv).re]
                },
                &intervals,
                order,
            )?;
            let probability = inv_fact * dens / norm;
            let dprob_dc = inv_fact * (cross / norm - dnorm * dens / (norm * norm));
            Ok(ImageEntry { image, probability, dprob_dc })
        })
        .collect::<Result<Vec<_>>>()?;

    let dist =
        ImageDistribution { grid: *grid, state: spec.clone(), params: sol.params, quadrature_order: order, entries };
    let total = dist.total_probability();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Consistency(format!("image probabilities sum to {total}")));
    }
    Ok(dist)
}

/// Probabilities below this are treated as impossible outcomes.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// `Σ (dP/dc)² / P` over the realizable images.
pub fn imaging_cfi(dist: &ImageDistribution) -> f64 {
    dist.entries
        .iter()
        .filter(|e| e.probability > PROBABILITY_FLOOR)
        .map(|e| e.dprob_dc * e.dprob_dc / e.probability)
        .sum()
}

/// Indices into `dist.entries` of `shots` independent draws.
pub fn sample_indices(dist: &ImageDistribution, shots: usize, seed: u64) -> Result<Vec<usize>> {
    if shots == 0 {
        return invalid("at least one shot is required");
    }
    let weights = dist.entries.iter().map(|e| e.probability.max(0.0));
    let sampler = WeightedIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| sampler.sample(&mut rng)).collect())
}

pub fn sample_images(dist: &ImageDistribution, shots: usize, seed: u64) -> Result<Vec<AbsorptionImage>> {
    Ok(sample_indices(dist, shots, seed)?.into_iter().map(|i| dist.entries[i].image.clone()).collect())
}

/// `log P(𝔫 | c)` for every image at every grid value of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    pub c_grid: Vec<f64>,
    pub images: Vec<AbsorptionImage>,
    /// `log_p[i][j]` for `c_grid[i]` and `images[j]`.
    pub log_p: Vec<Vec<f64>>,
    lookup: HashMap<AbsorptionImage, usize>,
}

impl LikelihoodTable {
    pub fn build(spec: &StateSpec, l: f64, grid: &PixelGrid, c_grid: &[f64]) -> Result<Self> {
        if c_grid.is_empty() {
            return invalid("empty c grid");
        }
        if c_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("c grid must be strictly increasing");
        }
        let mut images = Vec::new();
        let mut log_p = Vec::with_capacity(c_grid.len());
        for &c in c_grid {
            let dist = image_distribution(spec, &ModelParams::new(c, l)?, grid)?;
            if images.is_empty() {
                images = dist.entries.iter().map(|e| e.image.clone()).collect();
            }
            log_p.push(
                dist.entries
                    .iter()
                    .map(|e| if e.probability > PROBABILITY_FLOOR { e.probability.ln() } else { f64::NEG_INFINITY })
                    .collect(),
            );
        }
        let lookup = images.iter().cloned().enumerate().map(|(i, im)| (im, i)).collect();
        Ok(LikelihoodTable { c_grid: c_grid.to_vec(), images, log_p, lookup })
    }

    pub fn index_of(&self, image: &AbsorptionImage) -> Option<usize> {
        self.lookup.get(image).copied()
    }

    /// Log-likelihood at every grid value for images given as table indices.
    pub fn log_likelihood(&self, indices: &[usize]) -> Vec<f64> {
        let mut hist = vec![0u64; self.images.len()];
        for &i in indices {
            hist[i] += 1;
        }
        self.log_p
            .iter()
            .map(|row| hist.iter().zip(row).filter(|(h, _)| **h > 0).map(|(h, lp)| *h as f64 * lp).sum())
            .collect()
    }

    pub fn estimate_indices(&self, indices: &[usize]) -> Result<MleResult> {
        if indices.is_empty() {
            return invalid("no images to estimate from");
        }
        if indices.iter().any(|&i| i >= self.images.len()) {
            return invalid("image index out of range");
        }
        let loglik = self.log_likelihood(indices);
        let best = loglik.iter().enumerate().fold(0, |b, (i, v)| if *v > loglik[b] { i } else { b });
        let n = self.c_grid.len();
        let at_edge = n > 1 && (best == 0 || best == n - 1);
        let c_hat = if n < 3 || at_edge || !loglik[best].is_finite() {
            self.c_grid[best]
        } else {
            parabola_vertex(
                (self.c_grid[best - 1], loglik[best - 1]),
                (self.c_grid[best], loglik[best]),
                (self.c_grid[best + 1], loglik[best + 1]),
            )
        };
        Ok(MleResult { c_hat, c_grid: self.c_grid.clone(), loglik, at_edge })
    }

    pub fn estimate(&self, images: &[AbsorptionImage]) -> Result<MleResult> {
        let indices = images
            .iter()
            .map(|im| {
                self.index_of(im).ok_or_else(|| {
                    Error::InvalidArgument(format!("image {:?} is not realizable on this grid", im.counts))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.estimate_indices(&indices)
    }
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> f64 {
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !num.is_finite() || !den.is_finite() {
        return x1;
    }
    (x1 - 0.5 * num / den).clamp(x0, x2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub c_hat: f64,
    pub c_grid: Vec<f64>,
    pub loglik: Vec<f64>,
    /// The grid maximum sits on the first or last grid value.
    pub at_edge: bool,
}

/// Maximum-likelihood estimate of `c` from a batch of images.
pub fn mle_estimate(
    images: &[AbsorptionImage],
    spec: &StateSpec,
    l: f64,
    grid: &PixelGrid,
    c_grid: &[f64],
) -> Result<MleResult> {
    LikelihoodTable::build(spec, l, grid, c_grid)?.estimate(images)
}
