//! Execution policy for the data-parallel loops. With the `parallel` feature
//! off, [`Exec::Parallel`] silently runs sequentially.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// Whether work will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f)` collected in index order regardless of scheduling.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

impl fmt::Display for Exec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exec::Parallel => "parallel",
            Exec::Sequential => "sequential",
        })
    }
}

impl FromStr for Exec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "parallel" => Ok(Exec::Parallel),
            "sequential" => Ok(Exec::Sequential),
            other => Err(Error::Config {
                field: "exec".into(),
                reason: format!("unknown execution mode {other:?}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let par = Exec::Parallel.map_range(1000, |i| i * i);
        let seq = Exec::Sequential.map_range(1000, |i| i * i);
        assert_eq!(par, seq);
        assert_eq!("sequential".parse::<Exec>().unwrap(), Exec::Sequential);
        assert!("threads".parse::<Exec>().is_err());
    }
}
