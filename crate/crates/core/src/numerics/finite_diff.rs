/// Finite-difference weights for derivatives of order `0..=max_order` at `x0`
/// from samples at `xs` (Fornberg's recursion). Works on arbitrary spacing.
///
/// Returns `w` with `w[m][j]` the weight of sample `j` for the `m`-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    assert!(n > max_order, "stencil too small for requested derivative");
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Applies derivative weights as Σ_j w_j (v_j − v_own), which returns
/// exactly 0 on constant data (the weights of a derivative sum to zero).
pub fn apply_weights(weights: &[f64], values: &[f64], own: usize) -> f64 {
    let v0 = values[own];
    weights
        .iter()
        .zip(values)
        .enumerate()
        .filter(|(j, _)| *j != own)
        .map(|(_, (w, v))| w * (v - v0))
        .sum()
}

/// Precomputed first/second derivative stencils for every node of a sampled
/// coordinate. Interior nodes use a centred 7-point stencil; the three nodes
/// at each end use the nearest 8 points, which keeps the second derivative
/// sixth order there as well.
#[derive(Debug, Clone)]
pub struct StencilDerivatives {
    stencils: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

impl StencilDerivatives {
    pub const MIN_NODES: usize = 8;

    pub fn new(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(
            n >= Self::MIN_NODES,
            "need at least {} nodes",
            Self::MIN_NODES
        );
        let stencils = (0..n)
            .map(|i| {
                let (start, width) = if i >= 3 && i + 3 < n {
                    (i - 3, 7)
                } else if i < 3 {
                    (0, 8)
                } else {
                    (n - 8, 8)
                };
                let w = fornberg_weights(xs[i], &xs[start..start + width], 2);
                (start, w[1].clone(), w[2].clone())
            })
            .collect();
        Self { stencils }
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn first(&self, i: usize, values: &[f64]) -> f64 {
        let (start, w1, _) = &self.stencils[i];
        apply_weights(w1, &values[*start..*start + w1.len()], i - start)
    }

    pub fn second(&self, i: usize, values: &[f64]) -> f64 {
        let (start, _, w2) = &self.stencils[i];
        apply_weights(w2, &values[*start..*start + w2.len()], i - start)
    }
}
