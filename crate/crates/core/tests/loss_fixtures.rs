//! 2×2 loss fixtures: closed-form values worked out by hand, plus random
//! fixtures checked against a direct re-derivation written independently of
//! the library's windowed implementation.

use pointwarp::losses::{
    completion_losses, depth_loss, photometric_loss, smoothness_loss, ssim, CompletionWeights, DepthLossWeights,
    FeatureMap, SsimParams,
};
use pointwarp::Image;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const EXACT: f64 = 1e-12;
const C1: f64 = 1e-4;
const C2: f64 = 9e-4;

fn img(values: [[f64; 3]; 4]) -> Image<f64> {
    Image::from_vec(2, 2, 3, values.concat()).unwrap()
}

fn constant(v: f64) -> Image<f64> {
    img([[v; 3]; 4])
}

/// Mirror index without repeating the edge; on a 2-wide axis -1 → 1, 2 → 0.
fn mirror(i: i64, n: i64) -> usize {
    (if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    }) as usize
}

/// SSIM of channel `c` at pixel (x, y) over the 3×3 mirrored neighbourhood,
/// with two-pass variance.
fn ssim_at(a: &Image<f64>, b: &Image<f64>, x: usize, y: usize, c: usize) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (u, v) = (mirror(x as i64 + dx, 2), mirror(y as i64 + dy, 2));
            xs.push(a.get(u, v, c));
            ys.push(b.get(u, v, c));
        }
    }
    let n = xs.len() as f64;
    let (ma, mb) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let va = xs.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb = ys.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    let cov = xs.iter().zip(&ys).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    (2.0 * ma * mb + C1) * (2.0 * cov + C2) / ((ma * ma + mb * mb + C1) * (va + vb + C2))
}

fn pixels() -> impl Iterator<Item = (usize, usize)> {
    (0..2).flat_map(|y| (0..2).map(move |x| (x, y)))
}

fn ssim_ref(a: &Image<f64>, b: &Image<f64>) -> f64 {
    pixels()
        .map(|(x, y)| (0..3).map(|c| ssim_at(a, b, x, y, c)).sum::<f64>())
        .sum::<f64>()
        / 12.0
}

fn photometric_map_ref(a: &Image<f64>, b: &Image<f64>, alpha: f64) -> Vec<f64> {
    pixels()
        .map(|(x, y)| {
            (0..3)
                .map(|c| {
                    alpha / 2.0 * (1.0 - ssim_at(a, b, x, y, c))
                        + (1.0 - alpha) * (a.get(x, y, c) - b.get(x, y, c)).abs()
                })
                .sum::<f64>()
                / 3.0
        })
        .collect()
}

fn smoothness_ref(d: &Image<f64>, i: &Image<f64>) -> f64 {
    let guide = |p: (usize, usize), q: (usize, usize)| {
        (0..3)
            .map(|c| (i.get(p.0, p.1, c) - i.get(q.0, q.1, c)).abs())
            .sum::<f64>()
            / 3.0
    };
    let term =
        |p: (usize, usize), q: (usize, usize)| (d.get(p.0, p.1, 0) - d.get(q.0, q.1, 0)).abs() * (-guide(p, q)).exp();
    let x = (term((0, 0), (1, 0)) + term((0, 1), (1, 1))) / 2.0;
    let y = (term((0, 0), (0, 1)) + term((1, 0), (1, 1))) / 2.0;
    x + y
}

fn l1_ref(a: &Image<f64>, b: &Image<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / 12.0
}

fn random_2x2(rng: &mut StdRng) -> Image<f64> {
    Image::from_fn(2, 2, 3, |_, _, _| rng.random_range(0.0..1.0))
}

#[test]
fn completion_losses_closed_form() {
    // constant images: zero variance, so SSIM reduces to the luminance term
    let (target, generated) = (constant(0.2), constant(0.6));
    let features = [
        (
            FeatureMap::new(vec![2], vec![1.0, 2.0]).unwrap(),
            FeatureMap::new(vec![2], vec![4.0, 6.0]).unwrap(),
        ),
        (
            FeatureMap::new(vec![1, 3], vec![0.0, 0.0, 0.0]).unwrap(),
            FeatureMap::new(vec![1, 3], vec![1.0, 2.0, 2.0]).unwrap(),
        ),
    ];
    let b = completion_losses(0.8, 0.3, &target, &generated, &features, &CompletionWeights::default()).unwrap();
    let discriminator = 0.2 * 0.2 + 0.3 * 0.3;
    let generator = 1.0 - 0.2401 / 0.4001 + 0.4;
    let perceptual = 5.0 + 3.0;
    assert!((b.get("discriminator").unwrap() - discriminator).abs() < EXACT);
    assert!((b.get("generator").unwrap() - generator).abs() < EXACT);
    assert!((b.get("perceptual").unwrap() - perceptual).abs() < EXACT);
    assert!((b.total - (discriminator + 100.0 * generator + 100.0 * perceptual)).abs() < 1e-9 * b.total);
}

#[test]
fn depth_loss_closed_form() {
    let src = constant(0.5);
    let target = constant(0.9);
    let d = Image::from_vec(2, 2, 1, vec![1.0, 2.0, 1.0, 2.0]).unwrap();
    let w = DepthLossWeights::default();

    // perfect reconstruction: selected everywhere, zero photometric error;
    // smoothness: x steps of 1 under a flat guide, no y steps
    let l = depth_loss(&src, &src, &target, &d, &w).unwrap();
    assert_eq!(l.selected, vec![true; 4]);
    assert_eq!(l.breakdown.get("photometric"), Some(0.0));
    assert!((l.breakdown.get("smoothness").unwrap() - 1.0).abs() < EXACT);
    assert!((l.breakdown.total - 1e-3).abs() < EXACT);

    // reconstruction no better than the raw target: nothing selected
    let l = depth_loss(&src, &target, &target, &d, &w).unwrap();
    assert_eq!(l.selected, vec![false; 4]);
    assert_eq!(l.breakdown.get("photometric"), Some(0.0));

    // constant src vs constant recon 0.6: per pixel α/2·(1 - S) + (1 - α)·0.1
    let recon = constant(0.6);
    let s = (2.0 * 0.5 * 0.6 + C1) / (0.25 + 0.36 + C1);
    let per_pixel = 0.85 / 2.0 * (1.0 - s) + 0.15 * 0.1;
    let l = depth_loss(&src, &recon, &target, &d, &w).unwrap();
    assert_eq!(l.selected, vec![true; 4]);
    assert!((l.breakdown.get("photometric").unwrap() - per_pixel).abs() < EXACT);
}

#[test]
fn random_fixtures_match_direct_evaluation() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let (a, b, t) = (random_2x2(&mut rng), random_2x2(&mut rng), random_2x2(&mut rng));
        let d = Image::from_fn(2, 2, 1, |_, _, _| rng.random_range(0.2..3.0));
        let alpha = rng.random_range(0.0..1.0);

        let s = ssim(&a, &b, &SsimParams::photometric()).unwrap().mean;
        assert!((s - ssim_ref(&a, &b)).abs() < EXACT);

        let map = photometric_map_ref(&a, &b, alpha);
        let lib = photometric_loss(&a, &b, alpha).unwrap();
        for (x, y) in lib.map.data().iter().zip(&map) {
            assert!((x - y).abs() < EXACT);
        }

        assert!((smoothness_loss(&d, &a).unwrap() - smoothness_ref(&d, &a)).abs() < EXACT);

        let w = DepthLossWeights {
            alpha,
            ..DepthLossWeights::default()
        };
        let raw = photometric_map_ref(&a, &t, alpha);
        let selected: Vec<bool> = map.iter().zip(&raw).map(|(m, r)| m < r).collect();
        let masked = map
            .iter()
            .zip(&selected)
            .filter(|(_, s)| **s)
            .map(|(m, _)| m)
            .sum::<f64>()
            / 4.0;
        let l = depth_loss(&a, &b, &t, &d, &w).unwrap();
        assert_eq!(l.selected, selected);
        assert!((l.breakdown.total - (masked + 1e-3 * smoothness_ref(&d, &a))).abs() < EXACT);

        let (dr, df) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let c = completion_losses(dr, df, &a, &b, &[], &CompletionWeights::default()).unwrap();
        assert!((c.get("discriminator").unwrap() - ((dr - 1.0).powi(2) + df * df)).abs() < EXACT);
        assert!((c.get("generator").unwrap() - (1.0 - ssim_ref(&a, &b) + l1_ref(&a, &b))).abs() < EXACT);
    }
}
