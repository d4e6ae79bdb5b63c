//! Two-level planted benchmark graphs.
//!
//! `n` nodes split into `l1` communities, each split into `l2`
//! sub-communities. Every unordered pair gets an independent Bernoulli edge
//! whose probability is chosen so expected degrees hit the `z_*` targets:
//! `z_in1` within the sub-community, `z_in2` extra within the community,
//! `z_out` outside. Ground truth is emitted at both levels.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluation::GroundTruth;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkParams {
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub z_in1: u32,
    pub z_in2: u32,
    pub z_out: u32,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub graph: Graph,
    /// Fine level: one label per sub-community (`l1 * l2` groups).
    pub level1: GroundTruth,
    /// Coarse level: one label per community (`l1` groups).
    pub level2: GroundTruth,
    pub params: BenchmarkParams,
}

/// Expected in-sub/in-community/outside degrees as edge probabilities.
fn probabilities(p: &BenchmarkParams) -> Result<(f64, f64, f64)> {
    let sub = p.n / (p.l1 * p.l2);
    let comm = p.n / p.l1;
    let feas = |z: u32, pool: usize, what: &str| -> Result<f64> {
        if z == 0 {
            return Ok(0.0);
        }
        if pool == 0 {
            return Err(Error::InfeasibleDegree(format!(
                "{what} degree {z} requested but no candidate nodes exist"
            )));
        }
        let prob = z as f64 / pool as f64;
        if prob > 1.0 {
            return Err(Error::InfeasibleDegree(format!(
                "{what} degree {z} exceeds the {pool} available nodes"
            )));
        }
        Ok(prob)
    };
    Ok((
        feas(p.z_in1, sub - 1, "within-sub-community")?,
        feas(p.z_in2, comm - sub, "within-community")?,
        feas(p.z_out, p.n - comm, "outside-community")?,
    ))
}

pub fn generate_hierarchical_benchmark(params: BenchmarkParams) -> Result<Benchmark> {
    let p = &params;
    if p.l1 == 0 || p.l2 == 0 {
        return Err(Error::Config("l1 and l2 must be >= 1".into()));
    }
    if p.n == 0 || p.n % (p.l1 * p.l2) != 0 {
        return Err(Error::Config(format!(
            "n = {} must be a positive multiple of l1*l2 = {}",
            p.n,
            p.l1 * p.l2
        )));
    }
    let sub_size = p.n / (p.l1 * p.l2);
    let comm_size = p.n / p.l1;
    let (p_in1, p_in2, p_out) = probabilities(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // Fixed (i, j) scan order keeps the draw sequence seed-deterministic.
    for i in 0..p.n {
        for j in i + 1..p.n {
            let prob = if i / sub_size == j / sub_size {
                p_in1
            } else if i / comm_size == j / comm_size {
                p_in2
            } else {
                p_out
            };
            if prob > 0.0 && rng.random_bool(prob) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let graph = Graph::from_index_edges(p.n, &edges)?;
    let level1 = GroundTruth::from_pairs(
        (0..p.n).map(|i| (i.to_string(), (i / sub_size).to_string())),
    );
    let level2 = GroundTruth::from_pairs(
        (0..p.n).map(|i| (i.to_string(), (i / comm_size).to_string())),
    );
    Ok(Benchmark {
        graph,
        level1,
        level2,
        params,
    })
}
