use rayon::prelude::*;

use crate::export::compensated_sum;
use crate::paths::{BrownianStream, InitialLaw, TimeGrid};

/// Members per reduction chunk; fixed so sums do not depend on the thread count.
pub(crate) const CHUNK: usize = 256;
/// Drivers are kept in memory up to this many doubles, otherwise regenerated.
const CACHE_LIMIT: usize = 25_000_000;

/// Regenerable source of the member drivers `X0_j + W_j`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct MemberSource {
    pub grid: TimeGrid,
    pub drift: f64,
    pub volatility: f64,
    pub initial: InitialLaw,
    pub seed: u64,
    pub refinement: usize,
    pub members: usize,
}

impl MemberSource {
    pub fn x0(&self, j: usize) -> f64 {
        self.initial.sample(self.seed, j as u64)
    }

    pub fn stream(&self, j: usize) -> BrownianStream {
        BrownianStream::new(
            self.grid,
            self.drift,
            self.volatility,
            self.seed,
            j as u64,
            self.refinement,
        )
    }

    pub fn driver_into(&self, j: usize, out: &mut [f64]) {
        self.stream(j).fill(out);
        let x0 = self.x0(j);
        for v in out.iter_mut() {
            *v += x0;
        }
    }

    pub fn cache(&self) -> Option<Vec<Vec<f64>>> {
        if self.members.saturating_mul(self.grid.len()) > CACHE_LIMIT {
            return None;
        }
        Some(
            (0..self.members)
                .into_par_iter()
                .map(|j| {
                    let mut d = vec![0.0; self.grid.len()];
                    self.driver_into(j, &mut d);
                    d
                })
                .collect(),
        )
    }
}

/// Sums per-chunk partial curves in chunk order with compensation.
pub(crate) fn reduce_chunks(partials: &[Vec<f64>], len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| compensated_sum(partials.iter().map(|p| p[k])))
        .collect()
}

pub(crate) fn chunk_ranges(members: usize) -> Vec<std::ops::Range<usize>> {
    (0..members.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(members))
        .collect()
}
