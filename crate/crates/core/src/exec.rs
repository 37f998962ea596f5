//! Execution policy for the data-parallel loops in the crate.
//!
//! Every sweep (suite of closed-loop runs, controllability rank sweep,
//! model comparison) maps an independent function over a list of inputs.
//! With the `parallel` feature this is a rayon `par_iter`; without it, or when
//! [`Execution::Sequential`] is requested explicitly, it is a plain iterator.
//! Results are always returned in input order so both paths produce
//! identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// Map `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Map `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&xs, |x| x * x);
        let def = Execution::default().map(&xs, |x| x * x);
        assert_eq!(seq, def);
        assert_eq!(Execution::default().map_range(5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
