//! Data-parallel helpers with a sequential fallback.
//!
//! Reductions are computed as fixed-size chunk partial sums that are then
//! added in index order, so the result does not depend on the thread count
//! or on whether the `parallel` feature is enabled.

/// Number of items folded into one partial sum.
pub const CHUNK: usize = 4096;

/// Sum of `f` over `items`.
pub fn sum_by<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        parallel::sum_by(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential::sum_by(items, f)
    }
}

/// Number of items satisfying `pred`.
pub fn count_where<T, F>(items: &[T], pred: F) -> usize
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        parallel::count_where(items, pred)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential::count_where(items, pred)
    }
}

/// Order-preserving map.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        parallel::map_collect(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential::map_collect(items, f)
    }
}

pub mod sequential {
    use super::CHUNK;

    pub fn sum_by<T, F: Fn(&T) -> f64>(items: &[T], f: F) -> f64 {
        items
            .chunks(CHUNK)
            .map(|c| c.iter().map(&f).sum::<f64>())
            .fold(0.0, |acc, s| acc + s)
    }

    pub fn count_where<T, F: Fn(&T) -> bool>(items: &[T], pred: F) -> usize {
        items.iter().filter(|x| pred(x)).count()
    }

    pub fn map_collect<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
        items.iter().map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub mod parallel {
    use super::CHUNK;
    use rayon::prelude::*;

    pub fn sum_by<T, F>(items: &[T], f: F) -> f64
    where
        T: Sync,
        F: Fn(&T) -> f64 + Sync + Send,
    {
        let partial: Vec<f64> = items
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(&f).sum::<f64>())
            .collect();
        partial.into_iter().fold(0.0, |acc, s| acc + s)
    }

    pub fn count_where<T, F>(items: &[T], pred: F) -> usize
    where
        T: Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        items.par_iter().filter(|x| pred(x)).count()
    }

    pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_bitwise() {
        let xs: Vec<f64> = (0..100_003).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = sum_by(&xs, |x| x * x);
        let b = sequential::sum_by(&xs, |x| x * x);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let ys = map_collect(&xs, |x| x * 2);
        assert!(ys.iter().enumerate().all(|(i, &y)| y == 2 * i as u32));
        assert_eq!(count_where(&xs, |x| x % 2 == 0), 500);
    }
}
