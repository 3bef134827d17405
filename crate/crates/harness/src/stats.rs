use std::cmp::Ordering;

use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

fn check_pair<T: Float>(xs: &[T], ys: &[T]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::DegenerateInput(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(StatsError::DegenerateInput("need at least two observations".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value".into()));
    }
    Ok(())
}

fn mean<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b) / T::from(v.len()).expect("length fits the scalar type")
}

/// Product-moment correlation, computed from centered sums.
pub fn pearson<T: Float>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    check_pair(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

fn cmp<T: Float>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).expect("finite values are ordered")
}

/// Pairs tied within runs of equal keys in a sorted slice.
fn tied_pairs<T: Float>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev == Some(v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        prev = Some(v);
    }
    total + run * (run + 1) / 2
}

/// Merge sort on `v`, returning the number of inversions.
fn sort_counting_swaps<T: Float>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid], buf) + sort_counting_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if cmp(v[j], v[i]) == Ordering::Less {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Tie-corrected Kendall tau-b in O(n log n).
pub fn kendall_tau<T: Float>(xs: &[T], ys: &[T]) -> Result<T, StatsError> {
    check_pair(xs, ys)?;
    let n = xs.len() as u64;
    let mut pairs: Vec<(T, T)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp(a.0, b.0).then(cmp(a.1, b.1)));

    let pairs_total = n * (n - 1) / 2;
    let x_ties = tied_pairs(pairs.iter().map(|p| p.0));
    let mut joint = 0u64;
    let mut run = 0u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            joint += run * (run + 1) / 2;
            run = 0;
        }
    }
    joint += run * (run + 1) / 2;

    let mut ys_sorted: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let swaps = sort_counting_swaps(&mut ys_sorted, &mut Vec::with_capacity(xs.len()));
    let y_ties = tied_pairs(ys_sorted.iter().copied());

    if x_ties == pairs_total || y_ties == pairs_total {
        return Err(StatsError::DegenerateInput("all values tied".into()));
    }
    let f = |v: u64| T::from(v).expect("pair counts fit the scalar type");
    let num = f(pairs_total + joint) - f(x_ties) - f(y_ties) - f(2) * f(swaps);
    let den = (f(pairs_total - x_ties) * f(pairs_total - y_ties)).sqrt();
    Ok((num / den).max(-T::one()).min(T::one()))
}
