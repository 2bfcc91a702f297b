//! Iterated Stratonovich integrals of the piecewise-linear path through the
//! fine mesh, accumulated with Chen's identity: a linear segment with
//! increment `Δ` has signature `exp(Δ)`, so level `k` updates as
//! `S'_k = Σ_j S_{k−j} ⊗ Δ^{⊗j} / j!`.
//!
//! Levels one and two coincide with midpoint sums; from level three on this
//! removes the quadrature bias of the midpoint rule.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::integrate::mesh::WienerMesh;
use crate::words::{words_up_to, Word};

/// Dense truncated signature. Level `k` is stored in base-`d` order, so the
/// word `l₁…l_k` sits at `Σ (l_i − 1) d^{k−i}`.
#[derive(Clone, Debug)]
pub struct SignatureAccumulator {
    d: usize,
    levels: Vec<Vec<f64>>,
    powers: Vec<Vec<f64>>,
}

impl SignatureAccumulator {
    pub fn new(d: usize, depth: usize) -> Self {
        let levels = (0..=depth).map(|k| vec![0.0; d.pow(k as u32)]).collect();
        let mut acc = SignatureAccumulator {
            d,
            levels,
            powers: Vec::new(),
        };
        acc.reset();
        acc
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn reset(&mut self) {
        for level in &mut self.levels {
            level.fill(0.0);
        }
        self.levels[0][0] = 1.0;
    }

    /// Appends a linear segment with increment `delta`.
    pub fn push(&mut self, delta: &[f64]) {
        debug_assert_eq!(delta.len(), self.d);
        let depth = self.depth();
        // powers[j] = Δ^{⊗j} / j!, reusing the buffers between calls.
        self.powers.resize_with(depth + 1, Vec::new);
        self.powers[0].clear();
        self.powers[0].push(1.0);
        for j in 1..=depth {
            let (done, rest) = self.powers.split_at_mut(j);
            let prev = &done[j - 1];
            let next = &mut rest[0];
            next.clear();
            for p in prev {
                next.extend(delta.iter().map(|x| p * x / j as f64));
            }
        }
        for k in (1..=depth).rev() {
            let (lower, upper) = self.levels.split_at_mut(k);
            let target = &mut upper[0];
            for j in 1..=k {
                let power = &self.powers[j];
                let block = power.len();
                for (i, s) in lower[k - j].iter().enumerate() {
                    if *s == 0.0 {
                        continue;
                    }
                    let row = &mut target[i * block..(i + 1) * block];
                    for (t, p) in row.iter_mut().zip(power) {
                        *t += s * p;
                    }
                }
            }
        }
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn get(&self, w: &Word) -> f64 {
        let index = w
            .as_slice()
            .iter()
            .fold(0, |acc, &l| acc * self.d + (l as usize - 1));
        self.levels[w.len()][index]
    }
}

/// Fine-step range `[start, end)` of a coarse interval, checked for alignment.
pub fn coarse_range(mesh: &WienerMesh, steps: usize, index: usize) -> Result<(usize, usize)> {
    if steps == 0 || !mesh.fine_steps().is_multiple_of(steps) {
        return Err(Error::Misaligned {
            start: index,
            end: index + 1,
            fine_steps: mesh.fine_steps(),
        });
    }
    let per = mesh.fine_steps() / steps;
    Ok((index * per, (index + 1) * per))
}

/// `J_w` for every `1 ≤ |w| ≤ depth` over fine steps `[start, end)`.
pub fn iterated_integrals(
    mesh: &WienerMesh,
    start: usize,
    end: usize,
    depth: usize,
) -> Result<BTreeMap<Word, f64>> {
    if start >= end || end > mesh.fine_steps() {
        return Err(Error::Misaligned {
            start,
            end,
            fine_steps: mesh.fine_steps(),
        });
    }
    if depth > 4 {
        return Err(Error::Unsupported(format!(
            "iterated integrals up to level 4, got {depth}"
        )));
    }
    let mut acc = SignatureAccumulator::new(mesh.d(), depth);
    for step in start..end {
        acc.push(mesh.step(step));
    }
    Ok(words_up_to(mesh.d(), depth)
        .into_iter()
        .map(|w| {
            let v = acc.get(&w);
            (w, v)
        })
        .collect())
}
