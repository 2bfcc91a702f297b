//! Fine Wiener meshes, reproducible per `(seed, path_index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Brownian increments on `fine_steps` equal sub-steps of `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerMesh {
    pub seed: u64,
    pub path_index: u64,
    d: usize,
    t_final: f64,
    fine_steps: usize,
    /// Step-major: `increments[step * d + channel]`.
    increments: Vec<f64>,
}

/// Each path owns ChaCha stream `path_index` under key `seed`, drawn in
/// step-major, channel-minor order, so a path never depends on scheduling.
pub fn sample_mesh(
    seed: u64,
    path_index: u64,
    d: usize,
    t_final: f64,
    fine_steps: usize,
) -> Result<WienerMesh> {
    let mut mesh = WienerMesh {
        seed,
        path_index,
        d,
        t_final,
        fine_steps,
        increments: Vec::new(),
    };
    mesh.resample(seed, path_index)?;
    Ok(mesh)
}

impl WienerMesh {
    /// Zero-noise mesh, for tests and degenerate runs.
    pub fn zero(d: usize, t_final: f64, fine_steps: usize) -> Self {
        WienerMesh {
            seed: 0,
            path_index: 0,
            d,
            t_final,
            fine_steps,
            increments: vec![0.0; d * fine_steps],
        }
    }

    /// Mesh from explicit step-major increments.
    pub fn from_increments(d: usize, t_final: f64, increments: Vec<f64>) -> Result<Self> {
        if d == 0 || increments.is_empty() || !increments.len().is_multiple_of(d) {
            return Err(Error::Dimension(format!(
                "{} increments do not split into {d} channels",
                increments.len()
            )));
        }
        Ok(WienerMesh {
            seed: 0,
            path_index: 0,
            d,
            t_final,
            fine_steps: increments.len() / d,
            increments,
        })
    }

    /// Refills the increments in place for another path.
    pub fn resample(&mut self, seed: u64, path_index: u64) -> Result<()> {
        if self.fine_steps == 0 {
            return Err(Error::Config {
                field: "fine_steps".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.t_final.is_nan() || self.t_final <= 0.0 {
            return Err(Error::Config {
                field: "t_final".into(),
                reason: format!("must be positive, got {}", self.t_final),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        let sd = self.dt().sqrt();
        self.increments.clear();
        self.increments
            .extend((0..self.d * self.fine_steps).map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sd * z
            }));
        self.seed = seed;
        self.path_index = path_index;
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.fine_steps as f64
    }

    /// Increments of fine step `step`, one per channel.
    pub fn step(&self, step: usize) -> &[f64] {
        &self.increments[step * self.d..(step + 1) * self.d]
    }

    pub fn increment(&self, channel: usize, step: usize) -> f64 {
        self.increments[step * self.d + channel]
    }

    /// `W^channel` summed over fine steps `[start, end)`.
    pub fn total(&self, channel: usize, start: usize, end: usize) -> f64 {
        (start..end).map(|s| self.increment(channel, s)).sum()
    }
}
