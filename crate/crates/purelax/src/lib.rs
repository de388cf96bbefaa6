//! Purification of randomized decision rules on finite probability spaces.
//!
//! A randomized decision assigns each cell of a finite weighted space a
//! probability vector over that cell's actions. This crate rounds such
//! decisions to pure ones while preserving, within certified bounds, the
//! conditional expectations of a vector integrand over a coarse block
//! partition: each cell's mixture is first reduced to a small-support
//! convex combination, then block by block the remaining fractional mass
//! is walked to the vertices of the feasible set and the leftovers are
//! snapped. The same machinery relaxes and re-solves robust variational
//! problems, with an explicit suboptimality and feasibility slack for the
//! purified solution.

pub(crate) mod linalg;

pub mod caratheodory;
pub mod lp;
pub mod measure;
pub mod purify;
pub mod rvp;
pub mod scenarios;

use std::sync::OnceLock;

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Shared worker pool. `PURELAX_THREADS` caps the thread count; unset or
/// unparsable values fall back to the machine default.
pub(crate) fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var("PURELAX_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&t| t > 0);
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        builder
            .build()
            .expect("worker pool construction cannot fail with a valid thread count")
    })
}
