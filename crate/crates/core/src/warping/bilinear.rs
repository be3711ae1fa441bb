use crate::image::Image;

/// Four-neighbour bilinear interpolation with zero padding: taps that fall
/// outside the image contribute zero, so the result is continuous in
/// `(u, v)` and fades to zero over the one-pixel band around the border.
/// Writes one value per channel into `out`.
pub fn bilinear_sample_into(image: &Image<f32>, u: f64, v: f64, out: &mut [f32]) {
    debug_assert_eq!(out.len(), image.channels());
    out.fill(0.0);
    if !(u.is_finite() && v.is_finite()) {
        return;
    }
    let (u0, v0) = (u.floor(), v.floor());
    let (fu, fv) = (u - u0, v - v0);
    let taps = [
        (u0, v0, (1.0 - fu) * (1.0 - fv)),
        (u0 + 1.0, v0, fu * (1.0 - fv)),
        (u0, v0 + 1.0, (1.0 - fu) * fv),
        (u0 + 1.0, v0 + 1.0, fu * fv),
    ];
    let (w, h) = (image.width() as f64, image.height() as f64);
    let inside: Vec<(&[f32], f64)> = taps
        .into_iter()
        .filter(|&(tu, tv, weight)| weight != 0.0 && tu >= 0.0 && tv >= 0.0 && tu < w && tv < h)
        .map(|(tu, tv, weight)| (image.pixel(tu as usize, tv as usize), weight))
        .collect();
    for (c, o) in out.iter_mut().enumerate() {
        *o = inside.iter().map(|(px, weight)| weight * f64::from(px[c])).sum::<f64>() as f32;
    }
}

/// Bilinear sample of a colour image at continuous pixel coordinates.
pub fn bilinear_sample(image: &Image<f32>, u: f64, v: f64) -> Vec<f32> {
    let mut out = vec![0.0; image.channels()];
    bilinear_sample_into(image, u, v, &mut out);
    out
}

/// True when at least one of the four bilinear taps at `(u, v)` lies inside
/// a `width`×`height` image.
pub fn footprint_overlaps(width: usize, height: usize, u: f64, v: f64) -> bool {
    u > -1.0 && v > -1.0 && u < width as f64 && v < height as f64
}
