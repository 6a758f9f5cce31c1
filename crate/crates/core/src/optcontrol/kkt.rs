use crate::assembly::FeOperators;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Default cap on the order of explicitly materialized KKT matrices.
pub const KKT_DENSE_CAP: usize = 4000;

/// Symmetric saddle-point system
///
/// ```text
/// [ M_FF   M_FD        K_FFᵀ ] [ y_F ]   [ ybar_F ]
/// [ M_DF   M_DD + βI   K_FDᵀ ] [ u   ] = [ ybar_D ]
/// [ K_FF   K_FD        0     ] [ p_F ]   [ f_F    ]
/// ```
///
/// applied block by block from the stored sparse matrices.
#[derive(Debug, Clone)]
pub struct KktSystem<'a> {
    ops: &'a FeOperators,
    beta: f64,
    mdd_beta: CsrMatrix,
    kff_t: CsrMatrix,
    kfd_t: CsrMatrix,
    rhs: Vec<f64>,
}

impl<'a> KktSystem<'a> {
    pub fn new(ops: &'a FeOperators, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        let nd = ops.n_dirichlet();
        let mdd_beta = ops.m.dd.add_diagonal(&vec![beta; nd])?;
        let mut rhs = ops.ybar_vec.clone();
        rhs.extend_from_slice(ops.f_free());
        Ok(Self {
            ops,
            beta,
            mdd_beta,
            kff_t: ops.k.ff.transpose(),
            kfd_t: ops.k.fd.transpose(),
            rhs,
        })
    }

    pub fn ops(&self) -> &'a FeOperators {
        self.ops
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_free(&self) -> usize {
        self.ops.n_free()
    }

    pub fn n_dirichlet(&self) -> usize {
        self.ops.n_dirichlet()
    }

    /// `|F| + |D| + |F|`.
    pub fn dim(&self) -> usize {
        2 * self.n_free() + self.n_dirichlet()
    }

    /// `M_DD + βI`.
    pub fn mass_dd_beta(&self) -> &CsrMatrix {
        &self.mdd_beta
    }

    /// `(ybar_F, ybar_D, f_F)`.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Splits a KKT vector into `(y_F, u, p_F)`.
    pub fn split<'v>(&self, x: &'v [f64]) -> (&'v [f64], &'v [f64], &'v [f64]) {
        let (nf, nd) = (self.n_free(), self.n_dirichlet());
        (&x[..nf], &x[nf..nf + nd], &x[nf + nd..])
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let (nf, nd) = (self.n_free(), self.n_dirichlet());
        let (y, u, p) = self.split(x);
        let (oy, rest) = out.split_at_mut(nf);
        let (ou, op) = rest.split_at_mut(nd);
        let m = &self.ops.m;
        let k = &self.ops.k;

        m.ff.mul_vec_into(y, oy);
        m.fd.mul_vec_add(1.0, u, oy);
        self.kff_t.mul_vec_add(1.0, p, oy);

        m.df.mul_vec_into(y, ou);
        self.mdd_beta.mul_vec_add(1.0, u, ou);
        self.kfd_t.mul_vec_add(1.0, p, ou);

        k.ff.mul_vec_into(y, op);
        k.fd.mul_vec_add(1.0, u, op);
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply(x, &mut out);
        out
    }

    /// The full matrix in CSR form, refused beyond `cap` rows.
    pub fn to_csr(&self, cap: usize) -> Result<CsrMatrix> {
        let n = self.dim();
        if n > cap {
            return Err(Error::SizeCap {
                what: "KKT matrix",
                size: n,
                cap,
            });
        }
        let (nf, nd) = (self.n_free(), self.n_dirichlet());
        let mut t = Vec::new();
        let mut put = |a: &CsrMatrix, r0: usize, c0: usize| {
            t.extend(a.triplets().map(|(r, c, v)| (r + r0, c + c0, v)));
        };
        put(&self.ops.m.ff, 0, 0);
        put(&self.ops.m.fd, 0, nf);
        put(&self.kff_t, 0, nf + nd);
        put(&self.ops.m.df, nf, 0);
        put(&self.mdd_beta, nf, nf);
        put(&self.kfd_t, nf, nf + nd);
        put(&self.ops.k.ff, nf + nd, 0);
        put(&self.ops.k.fd, nf + nd, nf);
        Ok(CsrMatrix::from_triplets(n, n, &t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::ProblemData;
    use crate::graphs::{make_star, VertexKind};
    use crate::mesh::build_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn tiny() -> FeOperators {
        let g = Arc::new(make_star(2, VertexKind::Dirichlet).unwrap());
        let data = ProblemData::constant(0.1, 1.0, 1.0, 1.0).unwrap();
        FeOperators::assemble(Arc::new(build_mesh(g, 2).unwrap()), &data).unwrap()
    }

    #[test]
    fn zero_in_zero_out_and_beta_check() {
        let ops = tiny();
        let kkt = KktSystem::new(&ops, 0.1).unwrap();
        assert!(kkt.apply_vec(&vec![0.0; kkt.dim()]).iter().all(|v| *v == 0.0));
        assert!(KktSystem::new(&ops, 0.0).is_err());
        assert!(KktSystem::new(&ops, -1.0).is_err());
    }

    #[test]
    fn operator_is_symmetric() {
        let ops = tiny();
        let kkt = KktSystem::new(&ops, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = kkt.dim();
        for _ in 0..5 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = crate::linalg::dot(&kkt.apply_vec(&v), &w);
            let b = crate::linalg::dot(&v, &kkt.apply_vec(&w));
            assert!((a - b).abs() < 1e-12);
        }
        assert!(kkt.to_csr(100).unwrap().symmetry_defect() < 1e-15);
    }

    #[test]
    fn dense_matches_block_layout() {
        let ops = tiny();
        let beta = 0.1;
        let kkt = KktSystem::new(&ops, beta).unwrap();
        // star with 2 leaves, 2 intervals: 2 interior + centre free, 2 leaves
        assert_eq!((kkt.n_free(), kkt.n_dirichlet(), kkt.dim()), (3, 2, 8));
        let a = kkt.to_csr(100).unwrap().to_dense();
        let m = ops.mass.to_dense();
        let k = ops.system.to_dense();
        let (nf, nd) = (3, 2);
        for i in 0..8 {
            for j in 0..8 {
                // map KKT index to (block, DOF)
                let blk = |t: usize| if t < nf { (0, t) } else if t < nf + nd { (1, t) } else { (2, t - nf - nd) };
                let (bi, di) = blk(i);
                let (bj, dj) = blk(j);
                let want = match (bi, bj) {
                    (0 | 1, 0 | 1) => m[di][dj] + if bi == 1 && i == j { beta } else { 0.0 },
                    (0 | 1, 2) => k[dj][di],
                    (2, 0 | 1) => k[di][dj],
                    _ => 0.0,
                };
                assert!((a[i][j] - want).abs() < 1e-15, "({i},{j})");
            }
        }
        assert!(kkt.to_csr(7).is_err());
        let rhs = kkt.rhs();
        assert_eq!(&rhs[..5], &ops.ybar_vec[..]);
        assert_eq!(&rhs[5..], ops.f_free());
    }
}
