use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::report::ReportError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode<T> {
    /// Moving mean over `w` consecutive records in position order.
    SlidingWindow(usize),
    /// Bins `(0, g], (g, 2g], ...` of the given width.
    Grouped(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<T> {
    pub position: T,
    /// Inclusive lower and upper position covered by the point.
    pub start: T,
    pub end: T,
    pub em: T,
    pub count: usize,
}

fn mean<T: Float>(it: impl Iterator<Item = T>) -> (T, usize) {
    let (s, n) = it.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (s / T::from(n).expect("count fits the scalar type"), n)
}

/// Mean score as a function of answer position, from `(position, score)` points.
pub fn position_curve<T: Float>(points: &[(T, T)], mode: CurveMode<T>) -> Result<Vec<CurvePoint<T>>, ReportError> {
    if points.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    match mode {
        CurveMode::SlidingWindow(w) => {
            let w = w.clamp(1, sorted.len());
            Ok(sorted
                .windows(w)
                .map(|win| {
                    let (position, count) = mean(win.iter().map(|p| p.0));
                    CurvePoint { position, start: win[0].0, end: win[w - 1].0, em: mean(win.iter().map(|p| p.1)).0, count }
                })
                .collect())
        }
        CurveMode::Grouped(g) => {
            if !(g > T::zero()) {
                return Err(ReportError::InvalidMode("granularity must be positive".into()));
            }
            let bin = |p: T| (p / g).ceil().max(T::one()).to_i64().unwrap_or(i64::MAX) - 1;
            let mut out: Vec<CurvePoint<T>> = Vec::new();
            let mut i = 0;
            while i < sorted.len() {
                let b = bin(sorted[i].0);
                let j = i + sorted[i..].iter().take_while(|p| bin(p.0) == b).count();
                let start = T::from(b).expect("bin index fits") * g;
                let end = start + g;
                let (em, count) = mean(sorted[i..j].iter().map(|p| p.1));
                out.push(CurvePoint { position: (start + end) / T::from(2).expect("two"), start, end, em, count });
                i = j;
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouped_rows() {
        let pts: Vec<(f64, f64)> = (1..=100).map(|r| (r as f64, 1.0)).collect();
        let c = position_curve(&pts, CurveMode::Grouped(20.0)).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!((c[0].start, c[0].end, c[0].count), (0.0, 20.0, 20));
        assert!(c.iter().all(|p| p.em == 1.0));
    }

    #[test]
    fn wide_window_is_the_global_mean() {
        let pts = [(3.0f32, 1.0), (1.0, 0.0), (2.0, 1.0)];
        let c = position_curve(&pts, CurveMode::SlidingWindow(9)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].em - 2.0 / 3.0).abs() < 1e-6);
        assert_eq!(c[0].position, 2.0);
    }
}
