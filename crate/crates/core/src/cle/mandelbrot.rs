use std::collections::{HashSet, VecDeque};

use rand::{Rng as _, RngCore, SeedableRng};

use crate::error::{invalid, Result};
use crate::rng::Rng;

pub const MAX_MANDELBROT_DEPTH: usize = 12;

/// One uniform per dyadic square, addressable in any order. Sampling several
/// retention probabilities from the same field couples them monotonically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetentionField {
    seed: u64,
}

impl RetentionField {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn from_rng(rng: &mut Rng) -> Self {
        Self { seed: rng.random() }
    }

    /// Uniform in `[0, 1)` for square `(i, j)` of side `2^-level`.
    pub fn uniform(&self, level: usize, i: u32, j: u32) -> f64 {
        let mut r = Rng::seed_from_u64(self.seed);
        r.set_stream(level as u64);
        let side = 1u128 << level;
        r.set_word_pos(2 * (j as u128 * side + i as u128));
        (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Retained dyadic squares per level of the fractal percolation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadtreeSet {
    pub p: f64,
    pub depth: usize,
    /// `levels[n]` lists the retained squares `(i, j)` of side `2^-n`;
    /// level 0 is the unit square.
    pub levels: Vec<Vec<(u32, u32)>>,
}

impl QuadtreeSet {
    pub fn retained(&self, level: usize) -> &[(u32, u32)] {
        &self.levels[level]
    }

    /// Nothing survives at the final depth.
    pub fn is_empty(&self) -> bool {
        self.levels[self.depth].is_empty()
    }

    /// Area of the retained squares at the final depth.
    pub fn area(&self) -> f64 {
        self.levels[self.depth].len() as f64 / 4f64.powi(self.depth as i32)
    }
}

/// Fractal percolation driven by a given uniform field: a square of level
/// `n >= 1` is retained when its parent is and its uniform is below `p`.
pub fn sample_mandelbrot_with(p: f64, depth: usize, field: &RetentionField) -> Result<QuadtreeSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("retention probability must lie in [0, 1]"));
    }
    if depth > MAX_MANDELBROT_DEPTH {
        return Err(invalid(format!("depth is limited to {MAX_MANDELBROT_DEPTH}")));
    }
    let mut levels = vec![vec![(0u32, 0u32)]];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &(i, j) in &levels[level - 1] {
            for (ci, cj) in [(2 * i, 2 * j), (2 * i + 1, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j + 1)] {
                if field.uniform(level, ci, cj) < p {
                    next.push((ci, cj));
                }
            }
        }
        next.sort_unstable_by_key(|&(i, j)| (j, i));
        levels.push(next);
    }
    Ok(QuadtreeSet { p, depth, levels })
}

pub fn sample_mandelbrot(p: f64, depth: usize, rng: &mut Rng) -> Result<QuadtreeSet> {
    sample_mandelbrot_with(p, depth, &RetentionField::from_rng(rng))
}

/// Whether the retained squares at the final depth contain a chain of
/// edge-adjacent squares from the left side to the right side.
pub fn mandelbrot_crossing(qt: &QuadtreeSet) -> bool {
    let last = qt.retained(qt.depth);
    let side = 1u32 << qt.depth;
    let set: HashSet<(u32, u32)> = last.iter().copied().collect();
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let mut queue: VecDeque<(u32, u32)> = last.iter().copied().filter(|&(i, _)| i == 0).collect();
    seen.extend(queue.iter().copied());
    while let Some((i, j)) = queue.pop_front() {
        if i == side - 1 {
            return true;
        }
        let nbs = [(i.wrapping_add(1), j), (i.wrapping_sub(1), j), (i, j.wrapping_add(1)), (i, j.wrapping_sub(1))];
        for nb in nbs {
            if set.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    false
}

/// Probability that nothing survives to `depth`: each retained square has
/// Binomial(4, p) retained children, so the extinction probabilities obey
/// `q_n = (1 - p + p q_{n-1})^4` with `q_0 = 0`.
pub fn extinction_probability(p: f64, depth: usize) -> f64 {
    (0..depth).fold(0.0, |q, _| (1.0 - p + p * q).powi(4))
}
