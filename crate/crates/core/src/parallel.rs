//! Execution strategy for the data-parallel scans.
//!
//! With the `parallel` feature (default) [`Strategy::Parallel`] runs on the rayon
//! global pool. Without it, every strategy runs sequentially.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// Elements of `range` satisfying `pred`, in ascending order.
    pub fn filter_range<F>(self, range: Range<u64>, pred: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => range.into_par_iter().filter(|&x| pred(x)).collect(),
            _ => range.filter(|&x| pred(x)).collect(),
        }
    }

    /// `f` applied to every element of `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// `f` applied to every element of `range`, preserving order.
    pub fn map_range<R, F>(self, range: Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => range.into_par_iter().map(f).collect(),
            _ => range.map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let pred = |x: u64| x % 7 == 3;
        let a = Strategy::Sequential.filter_range(0..1000, pred);
        let b = Strategy::Parallel.filter_range(0..1000, pred);
        assert_eq!(a, b);
        let sq = Strategy::Parallel.map_range(0..100, |x| x * x);
        assert_eq!(sq[9], 81);
        assert_eq!(Strategy::Sequential.map(&[1, 2, 3], |x| x + 1), vec![2, 3, 4]);
    }
}
