mod common;

use common::{composite, legendre_rule};

use llfisher::bethe::*;
use llfisher::fisher::cfi;
use llfisher::imaging::*;
use llfisher::wavefunction::{amplitudes, eval_symmetric};

fn ring2() -> StateSpec {
    ground_state(BoundaryCondition::Periodic, 2).unwrap()
}

/// Two-particle image probabilities from composite Gauss rules on each pixel pair.
fn two_particle_oracle(spec: &StateSpec, p: &ModelParams, grid: &PixelGrid, image: &AbsorptionImage) -> f64 {
    let sol = solve_bethe(spec, p).unwrap();
    let table = amplitudes(&sol).unwrap();
    let nsq = norm_sq(&sol.k, p, spec.bc()).norm_sq;
    let rule = legendre_rule(20);
    let bins: Vec<usize> =
        image.counts.iter().enumerate().flat_map(|(j, &m)| std::iter::repeat_n(j, m as usize)).collect();
    let (Some(a), Some(b)) = (grid.clipped_bin(bins[0], p.l), grid.clipped_bin(bins[1], p.l)) else {
        return 0.0;
    };
    let dens = |x: f64, y: f64| eval_symmetric(&table, &sol, &[x.min(y), x.max(y)]).unwrap().value.norm_sqr();
    let mut s = 0.0;
    if bins[0] == bins[1] {
        // same pixel: the ordered triangle avoids the cusp on the diagonal
        for (y, wy) in composite(a.0, a.1, 2, &rule) {
            for (x, wx) in composite(a.0, y, 2, &rule) {
                s += wx * wy * dens(x, y);
            }
        }
    } else {
        for (x, wx) in composite(a.0, a.1, 2, &rule) {
            for (y, wy) in composite(b.0, b.1, 2, &rule) {
                s += wx * wy * dens(x, y);
            }
        }
    }
    s / nsq
}

#[test]
fn probabilities_match_tensor_oracle() {
    for spec in [ring2(), ground_state(BoundaryCondition::HardWall, 2).unwrap()] {
        let p = ModelParams::new(0.7, 3.0).unwrap();
        // a grid that overhangs the left wall and stops short of the right one
        let grid = PixelGrid::new(-0.4, 0.8, 4).unwrap();
        let dist = image_distribution(&spec, &p, &grid).unwrap();
        for e in &dist.entries {
            let o = two_particle_oracle(&spec, &p, &grid, &e.image);
            assert!((e.probability - o).abs() < 1e-10, "{spec} {:?}: {} vs {o}", e.image.counts, e.probability);
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for spec in [ring2(), type1_excitation(BoundaryCondition::HardWall, 3, 1).unwrap()] {
        let (c, l, h) = (0.5, 4.0, 1e-4);
        let grid = PixelGrid::tiling(l, 4).unwrap();
        let dist = image_distribution(&spec, &ModelParams::new(c, l).unwrap(), &grid).unwrap();
        let up = image_distribution(&spec, &ModelParams::new(c + h, l).unwrap(), &grid).unwrap();
        let dn = image_distribution(&spec, &ModelParams::new(c - h, l).unwrap(), &grid).unwrap();
        for ((e, u), d) in dist.entries.iter().zip(&up.entries).zip(&dn.entries) {
            let fd = (u.probability - d.probability) / (2.0 * h);
            assert!((fd - e.dprob_dc).abs() < 1e-4, "{spec} {:?}: {fd} vs {}", e.image.counts, e.dprob_dc);
        }
    }
}

#[test]
fn distribution_is_complete() {
    for spec in [ring2(), ground_state(BoundaryCondition::HardWall, 2).unwrap()] {
        let l = 5.0;
        let dist =
            image_distribution(&spec, &ModelParams::new(0.3, l).unwrap(), &PixelGrid::tiling(l, 16).unwrap()).unwrap();
        assert_eq!(dist.entries.len(), image_count(2, 16).unwrap() as usize);
        assert!((dist.total_probability() - 1.0).abs() < 1e-8);
        assert!(dist.total_derivative().abs() < 1e-8);
        assert!(dist.entries.iter().all(|e| e.probability >= -1e-15));
        // outer bins are empty when the grid tiles the box exactly
        for e in &dist.entries {
            if e.image.counts[0] > 0 || e.image.counts[17] > 0 {
                assert_eq!(e.probability, 0.0);
            }
        }
    }
}

#[test]
fn offset_grid_still_sums_to_one() {
    let spec = type2_excitation(BoundaryCondition::Periodic, 3, 1).unwrap();
    let l = 2.0;
    let grid = PixelGrid::new(0.3, 0.25, 5).unwrap();
    let dist = image_distribution(&spec, &ModelParams::new(1.5, l).unwrap(), &grid).unwrap();
    assert!((dist.total_probability() - 1.0).abs() < 1e-8);
    assert!(dist.total_derivative().abs() < 1e-8);
}

#[test]
fn sample_frequencies_within_three_sigma() {
    let l = 4.0;
    let dist =
        image_distribution(&ring2(), &ModelParams::new(0.5, l).unwrap(), &PixelGrid::tiling(l, 4).unwrap()).unwrap();
    let shots = 100_000;
    let idx = sample_indices(&dist, shots, 7).unwrap();
    let mut hist = vec![0usize; dist.entries.len()];
    for i in idx {
        hist[i] += 1;
    }
    for (e, &h) in dist.entries.iter().zip(&hist) {
        let mean = shots as f64 * e.probability;
        let sd = (mean * (1.0 - e.probability)).sqrt();
        assert!((h as f64 - mean).abs() <= 3.0 * sd.max(1e-12), "{:?}: {h} vs {mean}", e.image.counts);
    }
    assert_eq!(sample_images(&dist, 50, 3).unwrap(), sample_images(&dist, 50, 3).unwrap());
    assert_ne!(sample_images(&dist, 50, 3).unwrap(), sample_images(&dist, 50, 4).unwrap());
    assert!(sample_indices(&dist, 0, 1).is_err());
}

fn mle_setup() -> (f64, f64, PixelGrid, f64) {
    let (c, l) = (0.2, 10.0);
    let grid = PixelGrid::tiling(l, 8).unwrap();
    let f = imaging_cfi(&image_distribution(&ring2(), &ModelParams::new(c, l).unwrap(), &grid).unwrap());
    (c, l, grid, f)
}

#[test]
fn likelihood_peaks_near_truth() {
    let (c, l, grid, _) = mle_setup();
    let dist = image_distribution(&ring2(), &ModelParams::new(c, l).unwrap(), &grid).unwrap();
    let images = sample_images(&dist, 5000, 11).unwrap();
    let c_grid = [0.1, 0.2, 0.6];
    let table = LikelihoodTable::build(&ring2(), l, &grid, &c_grid).unwrap();
    let r = table.estimate(&images).unwrap();
    assert!(r.loglik[1] > r.loglik[0] && r.loglik[1] > r.loglik[2]);
    assert!(table.estimate(&[AbsorptionImage::new(vec![2; 10])]).is_err());
}

#[test]
fn mle_error_within_three_crb_widths() {
    let (c, l, grid, f) = mle_setup();
    let shots = 10_000;
    let sigma = 1.0 / (shots as f64 * f).sqrt();
    let c_grid: Vec<f64> = (-12..=12).map(|i| c + 0.5 * sigma * i as f64).collect();
    let table = LikelihoodTable::build(&ring2(), l, &grid, &c_grid).unwrap();
    let dist = image_distribution(&ring2(), &ModelParams::new(c, l).unwrap(), &grid).unwrap();
    let inside = (0..100u64)
        .filter(|rep| {
            let idx = sample_indices(&dist, shots, 12345 + rep).unwrap();
            let r = table.estimate_indices(&idx).unwrap();
            (r.c_hat - c).abs() <= 3.0 * sigma
        })
        .count();
    assert!(inside >= 99, "{inside} of 100 within 3 sigma");
}

#[test]
fn pixelation_bounded_by_position_cfi() {
    let (c, l) = (0.2, 10.0);
    for spec in [ring2(), ground_state(BoundaryCondition::HardWall, 2).unwrap()] {
        let p = ModelParams::new(c, l).unwrap();
        let full = cfi(&spec, &p).unwrap();
        let mut last = 0.0;
        for n_p in [1, 2, 4, 8, 16] {
            let f = imaging_cfi(&image_distribution(&spec, &p, &PixelGrid::tiling(l, n_p).unwrap()).unwrap());
            assert!(f <= full * (1.0 + 1e-9), "{spec} N_p={n_p}: {f} > {full}");
            assert!(f >= last * (1.0 - 1e-9), "{spec} N_p={n_p}: {f} < {last}");
            last = f;
        }
    }
}

#[test]
fn grid_validation() {
    assert!(PixelGrid::new(0.0, 0.0, 4).is_err());
    assert!(PixelGrid::new(0.0, 1.0, 0).is_err());
    assert!(PixelGrid::tiling(-1.0, 3).is_err());
    assert!(matches!(enumerate_images(6, 40), Err(llfisher::Error::ResourceLimit(_))));
}
