//! Seeded random instances.
//!
//! The stream is xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
//! A uniform draw on `[0, max]` takes the top 53 bits of one 64-bit output,
//! `u = (next_u64 >> 11) * 2^-53`, and returns `u * max`. Draw order:
//!
//! 1. customer coordinates, `x` then `y`, by customer index;
//! 2. site coordinates, same order;
//! 3. demand row-major, skipping the diagonal;
//! 4. fixed costs by site;
//! 5. capacities by site.
//!
//! Handling-cost matrices use their own stream (see
//! [`generate_handling_costs`]).

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::instance::{Instance, Matrix, Point, DEFAULT_ALPHA};

/// Upper end of the handling-cost interval used for benchmarks.
pub const HANDLING_MAX: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranges {
    pub coord_max: f64,
    pub demand_max: f64,
    pub fixed_max: f64,
    pub capacity_max: f64,
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            coord_max: 1e4,
            demand_max: 500.0,
            fixed_max: 5e5,
            capacity_max: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub ranges: Ranges,
    pub alpha: f64,
}

impl GenSpec {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            seed,
            ranges: Ranges::default(),
            alpha: DEFAULT_ALPHA,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Dimension(format!(
                "need at least one customer and one site, got n={} p={}",
                self.n, self.p
            )));
        }
        let r = &self.ranges;
        for (name, v) in [
            ("coord_max", r.coord_max),
            ("demand_max", r.demand_max),
            ("fixed_max", r.fixed_max),
            ("capacity_max", r.capacity_max),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Dimension(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

struct Stream(Xoshiro256PlusPlus);

impl Stream {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, max: f64) -> f64 {
        self.unit() * max
    }
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    let r = spec.ranges;
    let mut s = Stream::new(spec.seed);
    let point = |s: &mut Stream| {
        let x = s.uniform(r.coord_max);
        let y = s.uniform(r.coord_max);
        Point::new(x, y)
    };
    let customers: Vec<Point> = (0..spec.n).map(|_| point(&mut s)).collect();
    let sites: Vec<Point> = (0..spec.p).map(|_| point(&mut s)).collect();
    let mut demand = Matrix::zeros(spec.n, spec.n);
    for i in 0..spec.n {
        for j in 0..spec.n {
            if i != j {
                demand.set(i, j, s.uniform(r.demand_max));
            }
        }
    }
    let fixed: Vec<f64> = (0..spec.p).map(|_| s.uniform(r.fixed_max)).collect();
    let capacity: Vec<f64> = (0..spec.p).map(|_| s.uniform(r.capacity_max)).collect();
    Instance::from_coordinates(customers, sites, demand, fixed, capacity, spec.alpha)
}

/// Asymmetric handling costs `t[k][m]` uniform on `[0, max]`, drawn
/// row-major over off-diagonal entries; the diagonal is zero.
pub fn generate_handling_costs(p: usize, seed: u64, max: f64) -> Matrix {
    let mut s = Stream::new(seed);
    let mut t = Matrix::zeros(p, p);
    for k in 0..p {
        for m in 0..p {
            if k != m {
                t.set(k, m, s.uniform(max));
            }
        }
    }
    t
}
