#![allow(dead_code)]

use tsgd_core::numerics::RngState;

/// Squared mass of `g` restricted to `mask`, summed in descending-magnitude
/// order (ascending index on ties), matching the truncation's summation.
pub fn sorted_energy(g: &[f64], mask: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..g.len()).filter(|&i| mask[i]).collect();
    order.sort_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()).then(a.cmp(&b)));
    order.iter().map(|&i| g[i] * g[i]).sum()
}

/// Smallest cardinality over all `2^p` masks whose energy reaches
/// `(1 − ε²)‖g‖²`, with the set of minimal masks. `p ≤ 16`.
pub fn exhaustive_min_masks(g: &[f64], cut_rate: f64) -> (usize, Vec<Vec<bool>>) {
    let p = g.len();
    assert!(p <= 16);
    let total = sorted_energy(g, &vec![true; p]);
    let target = (1.0 - cut_rate) * total;
    let mut best = usize::MAX;
    let mut masks = Vec::new();
    for bits in 0u32..(1 << p) {
        let mask: Vec<bool> = (0..p).map(|i| bits >> i & 1 == 1).collect();
        let k = bits.count_ones() as usize;
        if k > best {
            continue;
        }
        let feasible = if cut_rate == 0.0 {
            // Every nonzero coordinate must be kept.
            g.iter().zip(&mask).all(|(x, &m)| m || *x == 0.0)
        } else {
            sorted_energy(g, &mask) >= target
        };
        if feasible {
            if k < best {
                best = k;
                masks.clear();
            }
            masks.push(mask);
        }
    }
    (best, masks)
}

/// A gradient of dimension `p` mixing Gaussian, heavy-tailed, tied and zero
/// coordinates.
pub fn random_gradient(rng: &mut RngState, p: usize) -> Vec<f64> {
    let style = rng.index(4);
    (0..p)
        .map(|_| match style {
            0 => rng.standard_normal(),
            1 => {
                let z = rng.standard_normal();
                z * (4.0 * rng.standard_normal()).exp()
            }
            2 => [0.0, 1.0, -1.0, 2.0, -0.5][rng.index(5)],
            _ => {
                if rng.uniform() < 0.5 {
                    0.0
                } else {
                    rng.standard_normal()
                }
            }
        })
        .collect()
}

pub fn random_cut_rate(rng: &mut RngState) -> f64 {
    match rng.index(10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.uniform(),
    }
}
