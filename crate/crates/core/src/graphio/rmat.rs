use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph};

/// Quadrant probabilities of the recursive matrix sampler; `d = 1 - a - b - c`.
#[derive(Debug, Clone, Copy)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for RmatParams {
    fn default() -> Self {
        RmatParams { a: 0.57, b: 0.19, c: 0.19 }
    }
}

/// Samples a skewed graph over `vertices` vertices. The last vertex always
/// appears so the vertex count is exact.
pub fn rmat(vertices: u32, edges: usize, params: RmatParams, seed: u64) -> Graph {
    assert!(vertices > 0, "rmat needs at least one vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = 32 - (vertices - 1).leading_zeros();
    let mut out = Vec::with_capacity(edges + 1);
    while out.len() < edges {
        let (mut src, mut dst) = (0u32, 0u32);
        for l in (0..levels).rev() {
            let r: f64 = rng.gen();
            let (sb, db) = if r < params.a {
                (0, 0)
            } else if r < params.a + params.b {
                (0, 1)
            } else if r < params.a + params.b + params.c {
                (1, 0)
            } else {
                (1, 1)
            };
            src |= sb << l;
            dst |= db << l;
        }
        if src < vertices && dst < vertices {
            out.push(Edge::new(src, dst));
        }
    }
    if !out.iter().any(|e| e.src == vertices - 1 || e.dst == vertices - 1) {
        let src = rng.gen_range(0..vertices);
        out.push(Edge::new(src, vertices - 1));
    }
    Graph::from_edges(out, false)
}
