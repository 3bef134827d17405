//! Reference correlation coefficients used to cross-check the library.

use num_rational::Ratio;

/// Pearson r from the raw-sum formula in plain f64.
pub fn pearson_raw(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Pearson r for integer data: r squared is exact, then one square root.
pub fn pearson_exact(xs: &[i64], ys: &[i64]) -> f64 {
    let n = xs.len() as i128;
    let sx: i128 = xs.iter().map(|&v| v as i128).sum();
    let sy: i128 = ys.iter().map(|&v| v as i128).sum();
    let sxx: i128 = xs.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let syy: i128 = ys.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let sxy: i128 = xs.iter().zip(ys).map(|(&a, &b)| (a as i128) * (b as i128)).sum();
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    let r2 = Ratio::new(cov * cov, vx * vy);
    let mag = (*r2.numer() as f64 / *r2.denom() as f64).sqrt();
    if cov < 0 { -mag } else { mag }
}

/// Tau-b by enumerating every pair.
pub fn kendall_pairs<T: PartialOrd>(xs: &[T], ys: &[T]) -> f64 {
    let n = xs.len();
    let (mut conc, mut disc, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i].partial_cmp(&xs[j]).unwrap();
            let dy = ys[i].partial_cmp(&ys[j]).unwrap();
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {}
                (Equal, _) => tie_x += 1,
                (_, Equal) => tie_y += 1,
                (a, b) if a == b => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let c = conc as f64;
    let d = disc as f64;
    (c - d) / (((c + d + tie_x as f64) * (c + d + tie_y as f64)) as f64).sqrt()
}
