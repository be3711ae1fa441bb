use crate::error::{Error, Result};
use crate::image::Image;

/// Mean absolute difference over all pixels and channels. For images in
/// `[0, 1]` the result lies in `[0, 1]`.
pub fn l1_metric(a: &Image<f64>, b: &Image<f64>) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch {
            what: "L1 operand",
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    if a.data().is_empty() {
        return Err(Error::invalid("L1 of empty images is undefined"));
    }
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.data().len() as f64)
}

/// L1 restricted to pixels where `mask` is set; `None` if the mask is empty.
pub fn masked_l1(a: &Image<f64>, b: &Image<f64>, mask: &[bool]) -> Result<Option<f64>> {
    if !a.same_shape(b) || mask.len() != a.width() * a.height() {
        return Err(Error::invalid("masked L1 operands disagree in shape"));
    }
    let ch = a.channels();
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        for c in 0..ch {
            sum += (a.data()[i * ch + c] - b.data()[i * ch + c]).abs();
        }
        n += ch;
    }
    Ok((n > 0).then(|| sum / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let zeros = Image::from_fn(4, 2, 3, |_, _, _| 0.0);
        let ones = Image::from_fn(4, 2, 3, |_, _, _| 1.0);
        let half = Image::from_fn(4, 2, 3, |u, _, _| if u < 2 { 0.0 } else { 1.0 });
        assert_eq!(l1_metric(&zeros, &zeros).unwrap(), 0.0);
        assert_eq!(l1_metric(&zeros, &ones).unwrap(), 1.0);
        assert_eq!(l1_metric(&half, &zeros).unwrap(), 0.5);
        assert!(l1_metric(&zeros, &Image::from_fn(4, 3, 3, |_, _, _| 0.0)).is_err());
    }

    #[test]
    fn masked() {
        let a = Image::from_fn(2, 1, 1, |u, _, _| u as f64);
        let b = Image::from_fn(2, 1, 1, |_, _, _| 0.0);
        assert_eq!(masked_l1(&a, &b, &[false, true]).unwrap(), Some(1.0));
        assert_eq!(masked_l1(&a, &b, &[false, false]).unwrap(), None);
    }
}
