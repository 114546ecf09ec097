//! Per-link SPD embeddings: three graph Laplacians over the 2K radio nodes,
//! regularized and summed into one positive definite matrix per link.
//!
//! Nodes follow a canonical ego-first order: the embedded link's transmitter
//! and receiver sit at nodes 0 and 1, and neighbor pairs follow sorted by
//! their interference distance into the ego receiver. That makes embeddings
//! of congruent local geometries identical regardless of pair labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{dist, Layout};
use crate::spd::{SpdMatrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Diagonal shift added per graph; the summed matrix gains three times this.
    pub gamma_reg: f64,
    /// Divide edge weights by the field length, making embeddings comparable
    /// across field sizes.
    pub normalize_weights: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig { gamma_reg: 1e-2, normalize_weights: true }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_reg > 0.0) || !self.gamma_reg.is_finite() {
            return Err(Error::validation("gamma_reg must be positive and finite"));
        }
        Ok(())
    }
}

/// Pair indices in canonical order for link q: the ego pair first, then the
/// neighbors ascending by distance from their transmitter to the ego
/// receiver, ties broken by original index.
pub fn canonical_pair_order(layout: &Layout, q: usize) -> Vec<usize> {
    let mut neighbors: Vec<usize> = (0..layout.pair_count()).filter(|&i| i != q).collect();
    neighbors.sort_by(|&a, &b| {
        layout
            .cross_distance(a, q)
            .total_cmp(&layout.cross_distance(b, q))
            .then(a.cmp(&b))
    });
    let mut order = Vec::with_capacity(layout.pair_count());
    order.push(q);
    order.extend(neighbors);
    order
}

fn add_edge(l: &mut SymMatrix, a: usize, b: usize, w: f64) {
    l.add_sym(a, a, w);
    l.add_sym(b, b, w);
    l.add_sym(a, b, -w);
}

/// The three weighted graph Laplacians for link q, in canonical node order:
/// `[communication, interference, neighborhood]`.
///
/// - communication: the ego link itself (1 edge);
/// - interference: each neighbor transmitter into the ego receiver (K-1 edges);
/// - neighborhood: each neighbor's own link plus the ego transmitter into that
///   neighbor's receiver (2K-2 edges).
///
/// Edge weights are Euclidean distances, optionally divided by the field
/// length. Pair at canonical position j occupies nodes 2j (tx) and 2j+1 (rx).
pub fn link_graph_laplacians(
    layout: &Layout,
    q: usize,
    cfg: &EmbeddingConfig,
) -> Result<[SymMatrix; 3]> {
    cfg.validate()?;
    let k = layout.pair_count();
    if layout.tx.len() != layout.rx.len() {
        return Err(Error::DimensionMismatch { expected: layout.tx.len(), actual: layout.rx.len() });
    }
    if q >= k {
        return Err(Error::validation(format!("link index {q} out of range for {k} pairs")));
    }
    let scale = if cfg.normalize_weights {
        if !(layout.field_length_m > 0.0) || !layout.field_length_m.is_finite() {
            return Err(Error::validation("field length must be positive to normalize weights"));
        }
        layout.field_length_m
    } else {
        1.0
    };
    let w = |a: [f64; 2], b: [f64; 2]| dist(a, b) / scale;

    let order = canonical_pair_order(layout, q);
    let n = 2 * k;
    let mut com = SymMatrix::zeros(n);
    let mut int = SymMatrix::zeros(n);
    let mut nbr = SymMatrix::zeros(n);

    add_edge(&mut com, 0, 1, w(layout.tx[q], layout.rx[q]));
    for (j, &i) in order.iter().enumerate().skip(1) {
        add_edge(&mut int, 2 * j, 1, w(layout.tx[i], layout.rx[q]));
        add_edge(&mut nbr, 2 * j, 2 * j + 1, w(layout.tx[i], layout.rx[i]));
        add_edge(&mut nbr, 0, 2 * j + 1, w(layout.tx[q], layout.rx[i]));
    }
    Ok([com, int, nbr])
}

/// SPD embedding of link q: the three Laplacians summed, shifted by three
/// times `gamma_reg` on the diagonal.
pub fn embed_link(layout: &Layout, q: usize, cfg: &EmbeddingConfig) -> Result<SpdMatrix> {
    let [com, int, nbr] = link_graph_laplacians(layout, q, cfg)?;
    let mut s = com.add(&int)?.add(&nbr)?;
    for i in 0..s.dim() {
        s.add_sym(i, i, 3.0 * cfg.gamma_reg);
    }
    SpdMatrix::new(s)
}

/// Embeddings for every link of the layout, in link order.
pub fn embed_layout(layout: &Layout, cfg: &EmbeddingConfig) -> Result<Vec<SpdMatrix>> {
    (0..layout.pair_count()).map(|q| embed_link(layout, q, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_layout, SimConfig};
    use crate::spd::lem_sq;

    fn raw_cfg() -> EmbeddingConfig {
        EmbeddingConfig { gamma_reg: 1e-2, normalize_weights: false }
    }

    fn collinear_two_pair_layout() -> Layout {
        Layout {
            field_length_m: 500.0,
            tx: vec![[0.0, 0.0], [100.0, 0.0]],
            rx: vec![[10.0, 0.0], [110.0, 0.0]],
        }
    }

    #[test]
    fn two_pair_laplacian_matches_hand_computation() {
        let layout = collinear_two_pair_layout();
        let [com, int, nbr] = link_graph_laplacians(&layout, 0, &raw_cfg()).unwrap();
        let l_sum = com.add(&int).unwrap().add(&nbr).unwrap();
        #[rustfmt::skip]
        let expected = [
            120.0, -10.0,   0.0, -110.0,
            -10.0, 100.0, -90.0,    0.0,
              0.0, -90.0, 100.0,  -10.0,
           -110.0,   0.0, -10.0,  120.0,
        ];
        assert_eq!(l_sum.entries(), &expected[..]);

        let s = embed_link(&layout, 0, &raw_cfg()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let shift = if i == j { 3.0 * 0.01 } else { 0.0 };
                assert_eq!(s.get(i, j), expected[i * 4 + j] + shift);
            }
        }
    }

    #[test]
    fn second_link_of_the_hand_layout() {
        // for q=1 the canonical order flips the pairs, so pair 1 sits at nodes 0,1
        let layout = collinear_two_pair_layout();
        assert_eq!(canonical_pair_order(&layout, 1), vec![1, 0]);
        let s = embed_link(&layout, 1, &raw_cfg()).unwrap();
        // com edge (0,1) w=10; int edge (2,1) w=|tx0-rx1|=110;
        // nbr edges (2,3) w=10 and (0,3) w=|tx1-rx0|=90
        assert_eq!(s.get(0, 0), 10.0 + 90.0 + 0.03);
        assert_eq!(s.get(1, 1), 10.0 + 110.0 + 0.03);
        assert_eq!(s.get(2, 2), 110.0 + 10.0 + 0.03);
        assert_eq!(s.get(3, 3), 10.0 + 90.0 + 0.03);
        assert_eq!(s.get(0, 1), -10.0);
        assert_eq!(s.get(2, 1), -110.0);
        assert_eq!(s.get(2, 3), -10.0);
        assert_eq!(s.get(0, 3), -90.0);
        assert_eq!(s.get(0, 2), 0.0);
        assert_eq!(s.get(1, 3), 0.0);
    }

    #[test]
    fn laplacians_have_zero_row_sums_and_are_psd() {
        let cfg = SimConfig::default();
        let layout = generate_layout(&cfg, 11).unwrap();
        let ecfg = EmbeddingConfig::default();
        for q in [0, 4, 9] {
            let laps = link_graph_laplacians(&layout, q, &ecfg).unwrap();
            for l in &laps {
                let n = l.dim();
                for i in 0..n {
                    let row: f64 = (0..n).map(|j| l.get(i, j)).sum();
                    assert!(row.abs() <= 1e-12, "row sum {row}");
                }
            }
            let l_sum = laps[0].add(&laps[1]).unwrap().add(&laps[2]).unwrap();
            let eig = l_sum.sym_eig().unwrap();
            for &v in &eig.values {
                assert!(v >= -1e-9, "negative eigenvalue {v}");
            }
        }
    }

    #[test]
    fn embedding_is_rigid_motion_invariant() {
        let cfg = SimConfig::default();
        let layout = generate_layout(&cfg, 21).unwrap();
        let ecfg = EmbeddingConfig::default();
        let theta: f64 = 0.73;
        let (s, c) = theta.sin_cos();
        let map = |p: [f64; 2]| [c * p[0] - s * p[1] + 37.5, s * p[0] + c * p[1] - 12.25];
        let moved = Layout {
            field_length_m: layout.field_length_m,
            tx: layout.tx.iter().map(|&p| map(p)).collect(),
            rx: layout.rx.iter().map(|&p| map(p)).collect(),
        };
        for q in 0..layout.pair_count() {
            let a = embed_link(&layout, q, &ecfg).unwrap();
            let b = embed_link(&moved, q, &ecfg).unwrap();
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    assert!((a.get(i, j) - b.get(i, j)).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn embedding_is_invariant_under_pair_relabeling() {
        let cfg = SimConfig::default();
        let layout = generate_layout(&cfg, 33).unwrap();
        let ecfg = EmbeddingConfig::default();
        let perm = [7usize, 2, 9, 0, 5, 1, 8, 3, 6, 4];
        let permuted = Layout {
            field_length_m: layout.field_length_m,
            tx: perm.iter().map(|&i| layout.tx[i]).collect(),
            rx: perm.iter().map(|&i| layout.rx[i]).collect(),
        };
        for (new_q, &old_q) in perm.iter().enumerate() {
            let a = embed_link(&layout, old_q, &ecfg).unwrap();
            let b = embed_link(&permuted, new_q, &ecfg).unwrap();
            assert_eq!(a.entries(), b.entries());
        }
    }

    #[test]
    fn neighbor_ties_fall_back_to_original_index() {
        // neighbors 1 and 2 are both exactly 50 m from the ego receiver
        let layout = Layout {
            field_length_m: 500.0,
            tx: vec![[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]],
            rx: vec![[0.0, 0.0], [60.0, 0.0], [0.0, 60.0]],
        };
        assert_eq!(canonical_pair_order(&layout, 0), vec![0, 1, 2]);
    }

    #[test]
    fn congruent_local_geometries_embed_identically() {
        // two pairs relative to each other exactly as in the sim tests: both
        // views of the network are mirror images, so the embeddings coincide
        let layout = Layout {
            field_length_m: 500.0,
            tx: vec![[100.0, 100.0], [100.0, 200.0]],
            rx: vec![[110.0, 100.0], [110.0, 200.0]],
        };
        let ecfg = EmbeddingConfig::default();
        let a = embed_link(&layout, 0, &ecfg).unwrap();
        let b = embed_link(&layout, 1, &ecfg).unwrap();
        assert!(lem_sq(&a, &b).unwrap() <= 1e-9);
    }

    #[test]
    fn single_pair_layout_embeds() {
        let layout = Layout {
            field_length_m: 500.0,
            tx: vec![[10.0, 10.0]],
            rx: vec![[20.0, 10.0]],
        };
        let s = embed_link(&layout, 0, &raw_cfg()).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.get(0, 0), 10.0 + 0.03);
        assert_eq!(s.get(0, 1), -10.0);
    }

    #[test]
    fn embed_layout_matches_per_link_calls() {
        let cfg = SimConfig { pair_count: 4, ..SimConfig::default() };
        let layout = generate_layout(&cfg, 2).unwrap();
        let ecfg = EmbeddingConfig::default();
        let all = embed_layout(&layout, &ecfg).unwrap();
        assert_eq!(all.len(), 4);
        for (q, s) in all.iter().enumerate() {
            assert_eq!(s.dim(), 8);
            assert_eq!(s.entries(), embed_link(&layout, q, &ecfg).unwrap().entries());
        }
    }

    #[test]
    fn weight_normalization_scales_the_laplacian() {
        let cfg = SimConfig::default();
        let layout = generate_layout(&cfg, 5).unwrap();
        let raw = link_graph_laplacians(&layout, 0, &raw_cfg()).unwrap();
        let norm =
            link_graph_laplacians(&layout, 0, &EmbeddingConfig::default()).unwrap();
        let l = layout.field_length_m;
        for (a, b) in raw.iter().zip(&norm) {
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    let scaled = a.get(i, j) / l;
                    assert!((scaled - b.get(i, j)).abs() <= 1e-15 * scaled.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let layout = collinear_two_pair_layout();
        assert!(embed_link(&layout, 2, &raw_cfg()).is_err());
        let bad = EmbeddingConfig { gamma_reg: 0.0, normalize_weights: false };
        assert!(embed_link(&layout, 0, &bad).is_err());
    }
}
