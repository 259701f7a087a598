/// How the trials of an experiment are executed. Results always come back
/// in trial order, so the choice never changes the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon's global pool; the same as `Sequential` when the crate is
    /// built without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Applies `f` to every trial index in `0..trials`.
    pub fn map<R, E, F>(self, trials: u64, f: F) -> Result<Vec<R>, E>
    where
        R: Send,
        E: Send,
        F: Fn(u64) -> Result<R, E> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..trials).into_par_iter().map(f).collect()
            }
            _ => (0..trials).map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let f = |i: u64| Ok::<_, ()>(i * i);
        let a = Execution::Parallel.map(1000, f).unwrap();
        let b = Execution::Sequential.map(1000, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }

    #[test]
    fn errors_propagate() {
        let r = Execution::Parallel.map(50, |i| if i == 17 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(17));
    }
}
