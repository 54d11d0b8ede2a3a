//! Affine pieces of `v^H y_j` over a real-vectorized beamformer block.

use crate::program::AffineExpr;
use crate::Cplx;

/// Position of a beamformer inside the program's variable vector; entry
/// `offset + 2 (j M + m)` is `Re y_j[m]`, the next one `Im y_j[m]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BeamBlock {
    pub offset: usize,
    pub num_antennas: usize,
}

impl BeamBlock {
    pub fn re(&self, j: usize, m: usize) -> usize {
        self.offset + 2 * (j * self.num_antennas + m)
    }

    /// `Re(v^H y_j)` and `Im(v^H y_j)`, each multiplied by `scale`.
    pub fn inner(&self, v: &[Cplx], j: usize, scale: f64) -> [AffineExpr; 2] {
        let mut re = AffineExpr::default();
        let mut im = AffineExpr::default();
        for (m, h) in v.iter().enumerate() {
            let a = self.re(j, m);
            re.terms.push((a, scale * h.re));
            re.terms.push((a + 1, scale * h.im));
            im.terms.push((a, -scale * h.im));
            im.terms.push((a + 1, scale * h.re));
        }
        [re, im]
    }

    /// Tangent of `|v^H y_j|^2` at a reference with `v^H y_j^r = g`:
    /// `2 Re(conj(g) v^H y_j) - |g|^2`, a global under-estimate.
    pub fn gain_tangent(&self, v: &[Cplx], j: usize, g: Cplx) -> AffineExpr {
        let [re, im] = self.inner(v, j, 2.0);
        re.scaled(g.re).plus(&im.scaled(g.im)).add_constant(-g.norm_sqr())
    }

    /// Components whose squared norm is `sum_j scale^2 |v^H y_j|^2` over `columns`.
    pub fn components(&self, v: &[Cplx], columns: impl IntoIterator<Item = usize>, scale: f64) -> Vec<AffineExpr> {
        columns.into_iter().flat_map(|j| self.inner(v, j, scale)).collect()
    }

    pub fn all(&self, num_columns: usize) -> impl Iterator<Item = usize> {
        self.offset..self.offset + 2 * self.num_antennas * num_columns
    }
}
