#![allow(dead_code)]

use cellform_core::Instance;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid instance: rejection-samples bit matrices until every
/// invariant holds.
pub fn random_instance(rng: &mut impl Rng, max_m: usize, max_p: usize) -> Instance {
    loop {
        let m = rng.gen_range(2..=max_m);
        let p = rng.gen_range(2..=max_p);
        let density = rng.gen_range(0.2..0.6);
        let rows: Vec<Vec<bool>> = (0..p)
            .map(|_| (0..m).map(|_| rng.gen_bool(density)).collect())
            .collect();
        if let Ok(inst) = Instance::with_default_labels(&rows) {
            return inst;
        }
    }
}

pub fn corpus(seed: u64, n: usize, max_m: usize, max_p: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_instance(&mut rng, max_m, max_p)).collect()
}

pub fn instance_strategy(max_m: usize, max_p: usize) -> impl Strategy<Value = Instance> {
    (2..=max_m, 2..=max_p)
        .prop_flat_map(|(m, p)| proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), p))
        .prop_filter_map("constant column or empty part", |rows| {
            Instance::with_default_labels(&rows).ok()
        })
}

/// Pearson correlation straight from two 0/1 columns.
pub fn pearson(inst: &Instance, a: usize, b: usize) -> f64 {
    let p = inst.part_count() as f64;
    let x: Vec<f64> = (0..inst.part_count())
        .map(|i| f64::from(u8::from(inst.requires(i, a))))
        .collect();
    let y: Vec<f64> = (0..inst.part_count())
        .map(|i| f64::from(u8::from(inst.requires(i, b))))
        .collect();
    let mx = x.iter().sum::<f64>() / p;
    let my = y.iter().sum::<f64>() / p;
    let cov: f64 = x.iter().zip(&y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let vx: f64 = x.iter().map(|u| (u - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

/// Exceptional elements, voids and block area counted cell by cell,
/// without looking at individual pairs in score order.
pub fn count_by_blocks(inst: &Instance, machine_cell: &[usize], part_family: &[usize]) -> (usize, usize, usize, usize) {
    let n = machine_cell.iter().chain(part_family).copied().max().unwrap_or(0);
    let ue = inst.unity_count();
    let mut inside_ones = 0;
    let mut area = 0;
    for c in 1..=n {
        let machines: Vec<usize> = (0..machine_cell.len()).filter(|&j| machine_cell[j] == c).collect();
        let parts: Vec<usize> = (0..part_family.len()).filter(|&i| part_family[i] == c).collect();
        area += machines.len() * parts.len();
        for &i in &parts {
            inside_ones += machines.iter().filter(|&&j| inst.requires(i, j)).count();
        }
    }
    let ee = ue - inside_ones;
    let ve = area - inside_ones;
    (ue, ee, ve, area)
}
