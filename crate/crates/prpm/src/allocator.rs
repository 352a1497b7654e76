//! Bounded intervention capacity.
//!
//! A pool of `R` interchangeable resources backs the replay loop: treating a
//! case blocks one resource for a sampled duration, and the resource frees
//! itself once simulated time reaches its release instant (inclusive, so a
//! release and a grant can share a timestamp). Durations come from a fixed,
//! truncated-normal, or truncated-exponential distribution; truncation
//! resamples a bounded number of times before clamping, keeping sampling
//! total without skewing the tails more than necessary.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

/// Simulated instant in epoch milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimTime(pub i64);

impl SimTime {
    pub fn from_datetime(t: chrono::DateTime<chrono::Utc>) -> SimTime {
        SimTime(t.timestamp_millis())
    }

    pub fn plus_seconds(self, seconds: f64) -> SimTime {
        SimTime(self.0 + (seconds * 1000.0).round() as i64)
    }
}

/// Treatment-duration distribution, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DurationDist {
    Fixed { seconds: f64 },
    Normal { mean: f64, std: f64, min: f64, max: f64 },
    Exponential { mean: f64, min: f64, max: f64 },
}

impl DurationDist {
    pub fn fixed_default() -> DurationDist {
        DurationDist::Fixed { seconds: 60.0 }
    }

    pub fn normal_default() -> DurationDist {
        DurationDist::Normal {
            mean: 30.0,
            std: 10.0,
            min: 1.0,
            max: 60.0,
        }
    }

    pub fn exponential_default() -> DurationDist {
        DurationDist::Exponential {
            mean: 30.0,
            min: 1.0,
            max: 60.0,
        }
    }
}

const TRUNCATION_RESAMPLES: usize = 64;

fn truncated(min: f64, max: f64, rng: &mut ChaCha8Rng, draw: impl Fn(&mut ChaCha8Rng) -> f64) -> f64 {
    let mut value = draw(rng);
    for _ in 0..TRUNCATION_RESAMPLES {
        if (min..=max).contains(&value) {
            return value;
        }
        value = draw(rng);
    }
    value.clamp(min, max)
}

/// Draw one treatment duration in seconds.
pub fn sample_duration(dist: &DurationDist, rng: &mut ChaCha8Rng) -> f64 {
    match *dist {
        DurationDist::Fixed { seconds } => seconds,
        DurationDist::Normal { mean, std, min, max } => {
            let normal = Normal::new(mean, std).expect("invalid normal parameters");
            truncated(min, max, rng, |r| normal.sample(r))
        }
        DurationDist::Exponential { mean, min, max } => {
            let exp = Exp::new(1.0 / mean).expect("invalid exponential mean");
            truncated(min, max, rng, |r| exp.sample(r))
        }
    }
}

/// One granted resource and when it frees up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub resource_id: usize,
    pub release_time: SimTime,
}

/// Fixed-capacity pool; at most `capacity` resources blocked at once.
#[derive(Debug, Clone)]
pub struct ResourcePool {
    capacity: usize,
    busy: BTreeMap<usize, SimTime>,
}

impl ResourcePool {
    pub fn new(capacity: usize) -> ResourcePool {
        ResourcePool {
            capacity,
            busy: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn busy_count(&self) -> usize {
        self.busy.len()
    }

    /// Free every resource whose release time has arrived (inclusive).
    /// Returns how many were released.
    pub fn release_due(&mut self, now: SimTime) -> usize {
        let before = self.busy.len();
        self.busy.retain(|_, release| *release > now);
        before - self.busy.len()
    }

    /// Release due resources, then grant the lowest free resource id for a
    /// freshly sampled duration, or `None` when saturated.
    pub fn try_acquire(
        &mut self,
        now: SimTime,
        dist: &DurationDist,
        rng: &mut ChaCha8Rng,
    ) -> Option<Grant> {
        self.release_due(now);
        if self.busy.len() >= self.capacity {
            return None;
        }
        let resource_id = (0..self.capacity)
            .find(|id| !self.busy.contains_key(id))
            .expect("free slot exists when busy < capacity");
        let release_time = now.plus_seconds(sample_duration(dist, rng));
        self.busy.insert(resource_id, release_time);
        Some(Grant {
            resource_id,
            release_time,
        })
    }
}

/// Convenience wrapper for replay configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub capacity: usize,
    pub duration: DurationDist,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            capacity: 1,
            duration: DurationDist::fixed_default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn idle_pool_grants_with_fixed_release() {
        let mut pool = ResourcePool::new(1);
        let grant = pool
            .try_acquire(SimTime(1_000), &DurationDist::fixed_default(), &mut rng(0))
            .unwrap();
        assert_eq!(grant.resource_id, 0);
        assert_eq!(grant.release_time, SimTime(61_000));
    }

    #[test]
    fn saturated_pool_refuses() {
        let mut pool = ResourcePool::new(1);
        let mut r = rng(0);
        let dist = DurationDist::fixed_default();
        pool.try_acquire(SimTime(0), &dist, &mut r).unwrap();
        assert!(pool.try_acquire(SimTime(50_000), &dist, &mut r).is_none());
    }

    #[test]
    fn release_is_inclusive_at_the_exact_instant() {
        let mut pool = ResourcePool::new(1);
        let mut r = rng(0);
        let dist = DurationDist::fixed_default();
        let grant = pool.try_acquire(SimTime(0), &dist, &mut r).unwrap();
        assert!(pool.try_acquire(grant.release_time, &dist, &mut r).is_some());
    }

    #[test]
    fn lowest_free_id_is_granted_first() {
        let mut pool = ResourcePool::new(3);
        let mut r = rng(0);
        let dist = DurationDist::Fixed { seconds: 10.0 };
        let a = pool.try_acquire(SimTime(0), &dist, &mut r).unwrap();
        let b = pool.try_acquire(SimTime(0), &dist, &mut r).unwrap();
        assert_eq!((a.resource_id, b.resource_id), (0, 1));
        // 0 and 1 release at t=10s; the next grant reuses 0.
        let c = pool.try_acquire(SimTime(10_000), &dist, &mut r).unwrap();
        assert_eq!(c.resource_id, 0);
    }

    #[test]
    fn fixed_duration_is_exact() {
        let mut r = rng(7);
        assert_eq!(
            sample_duration(&DurationDist::fixed_default(), &mut r),
            60.0
        );
    }

    #[test]
    fn stochastic_durations_respect_bounds() {
        let mut r = rng(99);
        for dist in [
            DurationDist::normal_default(),
            DurationDist::exponential_default(),
        ] {
            for _ in 0..2_000 {
                let d = sample_duration(&dist, &mut r);
                assert!((1.0..=60.0).contains(&d), "duration {d} out of [1, 60]");
            }
        }
    }

    #[test]
    fn extreme_truncation_falls_back_to_clamping() {
        // A normal centered far above the window almost never lands inside;
        // after the resample budget the draw clamps to the upper bound.
        let dist = DurationDist::Normal {
            mean: 1_000.0,
            std: 0.1,
            min: 1.0,
            max: 60.0,
        };
        assert_eq!(sample_duration(&dist, &mut rng(3)), 60.0);
    }

    #[test]
    fn seeded_normal_sample_is_pinned() {
        // Regression pin: captured once from ChaCha8Rng seed 42.
        let d = sample_duration(&DurationDist::normal_default(), &mut rng(42));
        assert_eq!(d, 34.77981238351022);
        assert!((1.0..=60.0).contains(&d));
    }

    #[test]
    fn capacity_is_never_exceeded_and_releases_match() {
        let mut pool = ResourcePool::new(4);
        let mut r = rng(5);
        let dist = DurationDist::exponential_default();
        let mut now = SimTime(0);
        let mut grants = 0usize;
        let mut releases = 0usize;
        for step in 0..5_000 {
            now = SimTime(now.0 + (step % 17) as i64 * 1_000);
            releases += pool.release_due(now);
            if pool.try_acquire(now, &dist, &mut r).is_some() {
                grants += 1;
            }
            assert!(pool.busy_count() <= pool.capacity());
        }
        releases += pool.release_due(SimTime(i64::MAX));
        assert_eq!(grants, releases);
        assert_eq!(pool.busy_count(), 0);
    }
}
