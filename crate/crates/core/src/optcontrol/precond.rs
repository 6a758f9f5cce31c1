//! Block-diagonal preconditioners for the KKT system.
//!
//! With `D_M = diag(M_FF)`, `D_SM = diag(M_DD + βI - M_DF D_M⁻¹ M_FD)` and
//! `KDK = K_FD D_SM⁻¹ K_FDᵀ`:
//!
//! - `sym`: `blkdiag(D_M, D_SM, (K_FF + N) D_M⁻¹ (K_FF + N))` with
//!   `N = D_KDK^{1/2} D_M^{1/2}`, `D_KDK = row_lump(KDK)`;
//! - `nonsym`: `blkdiag(D_M, D_SM, (K_FF + M_FF) M_FF⁻¹ (K_FF + KDK))`;
//! - `ideal`: exact mass block and exact Schur complement `S = B A⁻¹ Bᵀ`,
//!   dense and size-capped.

use std::fmt;
use std::str::FromStr;

use crate::assembly::FeOperators;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, FactorKind, Factorization};
use crate::par;

use super::kkt::KktSystem;

/// Largest `|F|` for which the ideal preconditioner forms `S` densely.
pub const IDEAL_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreconKind {
    None,
    Ideal,
    MatchedSymmetric,
    MatchedNonsymmetric,
}

impl PreconKind {
    pub fn name(self) -> &'static str {
        match self {
            PreconKind::None => "none",
            PreconKind::Ideal => "ideal",
            PreconKind::MatchedSymmetric => "sym",
            PreconKind::MatchedNonsymmetric => "nonsym",
        }
    }

    /// Whether the preconditioner is SPD (usable inside MINRES).
    pub fn is_spd(self) -> bool {
        !matches!(self, PreconKind::MatchedNonsymmetric)
    }
}

impl fmt::Display for PreconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreconKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PreconKind::None),
            "ideal" => Ok(PreconKind::Ideal),
            "sym" | "matched_symmetric" => Ok(PreconKind::MatchedSymmetric),
            "nonsym" | "matched_nonsymmetric" => Ok(PreconKind::MatchedNonsymmetric),
            other => Err(Error::InvalidInput(format!(
                "unknown preconditioner '{other}' (expected none|ideal|sym|nonsym)"
            ))),
        }
    }
}

enum Inner {
    Identity,
    Ideal {
        mass_block: Factorization,
        schur: Factorization,
    },
    Symmetric {
        n_diag: Vec<f64>,
        k_plus_n: Factorization,
    },
    Nonsymmetric {
        mff: CsrMatrix,
        k_plus_m: Factorization,
        k_plus_kdk: Factorization,
    },
}

pub struct Preconditioner {
    kind: PreconKind,
    nf: usize,
    nd: usize,
    d_m: Vec<f64>,
    d_sm: Vec<f64>,
    kdk: CsrMatrix,
    inner: Inner,
}

impl fmt::Debug for Preconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Preconditioner")
            .field("kind", &self.kind)
            .field("nf", &self.nf)
            .field("nd", &self.nd)
            .finish_non_exhaustive()
    }
}

/// `D_M`, `D_SM` and `KDK` shared by both matched preconditioners.
fn diagonal_parts(ops: &FeOperators, beta: f64) -> Result<(Vec<f64>, Vec<f64>, CsrMatrix)> {
    let d_m = ops.m.ff.diagonal();
    if let Some(i) = d_m.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::InvalidInput(format!("diag(M_FF) has nonpositive entry at {i}")));
    }
    let inv_dm: Vec<f64> = d_m.iter().map(|d| 1.0 / d).collect();
    let corr = ops.m.df.scale_cols(&inv_dm).matmul(&ops.m.fd)?;
    let mdd = ops.m.dd.diagonal();
    let corr_d = corr.diagonal();
    let d_sm: Vec<f64> = mdd.iter().zip(&corr_d).map(|(m, c)| m + beta - c).collect();
    if let Some(i) = d_sm.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "diagonal mass Schur complement D_SM has nonpositive entry {} at Dirichlet index {i}",
            d_sm[i]
        )));
    }
    let inv_dsm: Vec<f64> = d_sm.iter().map(|d| 1.0 / d).collect();
    let kdk = ops.k.fd.scale_cols(&inv_dsm).matmul(&ops.k.fd.transpose())?;
    Ok((d_m, d_sm, kdk))
}

fn matched_schur_error(e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { pivot } => Error::MatchedSchurNotSpd { pivot },
        other => other,
    }
}

/// `[[M_FF, M_FD], [M_DF, M_DD + βI]]`.
fn mass_block(kkt: &KktSystem) -> CsrMatrix {
    let ops = kkt.ops();
    let nf = kkt.n_free();
    let mut t: Vec<(usize, usize, f64)> = ops.m.ff.triplets().collect();
    t.extend(ops.m.fd.triplets().map(|(r, c, v)| (r, c + nf, v)));
    t.extend(ops.m.df.triplets().map(|(r, c, v)| (r + nf, c, v)));
    t.extend(kkt.mass_dd_beta().triplets().map(|(r, c, v)| (r + nf, c + nf, v)));
    let n = nf + kkt.n_dirichlet();
    CsrMatrix::from_triplets(n, n, &t)
}

/// Exact mass Schur complement `S_M = M_DD + βI - M_DF M_FF⁻¹ M_FD`, dense.
pub fn mass_schur_complement(ops: &FeOperators, beta: f64, cap: usize) -> Result<CsrMatrix> {
    let nd = ops.n_dirichlet();
    if nd > cap {
        return Err(Error::SizeCap {
            what: "mass Schur complement",
            size: nd,
            cap,
        });
    }
    let mff = Factorization::new(&ops.m.ff, FactorKind::Cholesky)?;
    let fd_cols = ops.m.fd.transpose();
    let cols: Vec<usize> = (0..nd).collect();
    let solved: Vec<Vec<f64>> = par::map_collect(&cols, |&j| {
        let mut col = vec![0.0; ops.n_free()];
        let (idx, val) = fd_cols.row(j);
        for (i, v) in idx.iter().zip(val) {
            col[*i] = *v;
        }
        mff.solve_in_place(&mut col);
        ops.m.df.mul_vec(&col)
    });
    let mdd = ops.m.dd.add_diagonal(&vec![beta; nd])?;
    Ok(CsrMatrix::from_dense_fn(nd, nd, |i, j| {
        mdd.get(i, j) - 0.5 * (solved[j][i] + solved[i][j])
    }))
}

impl Preconditioner {
    pub fn new(kind: PreconKind, kkt: &KktSystem) -> Result<Self> {
        let ops = kkt.ops();
        let (nf, nd) = (kkt.n_free(), kkt.n_dirichlet());
        if nd == 0 {
            return Err(Error::InvalidInput("no Dirichlet vertices: nothing to control".into()));
        }
        let beta = kkt.beta();
        let empty = || CsrMatrix::zeros(nf, nf);
        let pre = match kind {
            PreconKind::None => Self {
                kind,
                nf,
                nd,
                d_m: Vec::new(),
                d_sm: Vec::new(),
                kdk: empty(),
                inner: Inner::Identity,
            },
            PreconKind::Ideal => {
                if nf > IDEAL_CAP {
                    return Err(Error::SizeCap {
                        what: "ideal preconditioner Schur complement",
                        size: nf,
                        cap: IDEAL_CAP,
                    });
                }
                let a = mass_block(kkt);
                let mass_fact = Factorization::new(&a, FactorKind::Cholesky)?;
                // B = [K_FF K_FD]; column i of Bᵀ is row i of B
                let b = {
                    let mut t: Vec<(usize, usize, f64)> = ops.k.ff.triplets().collect();
                    t.extend(ops.k.fd.triplets().map(|(r, c, v)| (r, c + nf, v)));
                    CsrMatrix::from_triplets(nf, nf + nd, &t)
                };
                let rows: Vec<usize> = (0..nf).collect();
                let cols: Vec<Vec<f64>> = par::map_collect(&rows, |&i| {
                    let mut x = vec![0.0; nf + nd];
                    let (idx, val) = b.row(i);
                    for (c, v) in idx.iter().zip(val) {
                        x[*c] = *v;
                    }
                    mass_fact.solve_in_place(&mut x);
                    b.mul_vec(&x)
                });
                let s = CsrMatrix::from_dense_fn(nf, nf, |i, j| 0.5 * (cols[j][i] + cols[i][j]));
                let schur = Factorization::new(&s, FactorKind::Cholesky)?;
                Self {
                    kind,
                    nf,
                    nd,
                    d_m: ops.m.ff.diagonal(),
                    d_sm: Vec::new(),
                    kdk: empty(),
                    inner: Inner::Ideal {
                        mass_block: mass_fact,
                        schur,
                    },
                }
            }
            PreconKind::MatchedSymmetric => {
                let (d_m, d_sm, kdk) = diagonal_parts(ops, beta)?;
                let lumped = kdk.row_lump();
                let scale = lumped.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if let Some(i) = lumped.iter().position(|v| *v < -1e-14 * scale) {
                    return Err(Error::InvalidInput(format!(
                        "row-lumped K_FD D_SM^-1 K_FD^T has negative entry {} at free index {i}",
                        lumped[i]
                    )));
                }
                let n_diag: Vec<f64> = lumped
                    .iter()
                    .zip(&d_m)
                    .map(|(k, m)| k.max(0.0).sqrt() * m.sqrt())
                    .collect();
                let k_plus_n = Factorization::new(&ops.k.ff.add_diagonal(&n_diag)?, FactorKind::Cholesky)
                    .map_err(matched_schur_error)?;
                Self {
                    kind,
                    nf,
                    nd,
                    d_m,
                    d_sm,
                    kdk,
                    inner: Inner::Symmetric { n_diag, k_plus_n },
                }
            }
            PreconKind::MatchedNonsymmetric => {
                let (d_m, d_sm, kdk) = diagonal_parts(ops, beta)?;
                let k_plus_m = Factorization::new(&ops.k.ff.add(&ops.m.ff)?, FactorKind::Lu)?;
                let k_plus_kdk = Factorization::new(&ops.k.ff.transpose().add(&kdk)?, FactorKind::Lu)?;
                Self {
                    kind,
                    nf,
                    nd,
                    d_m,
                    d_sm,
                    kdk,
                    inner: Inner::Nonsymmetric {
                        mff: ops.m.ff.clone(),
                        k_plus_m,
                        k_plus_kdk,
                    },
                }
            }
        };
        Ok(pre)
    }

    pub fn kind(&self) -> PreconKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        2 * self.nf + self.nd
    }

    /// `diag(M_FF)` (empty for `none`).
    pub fn d_m(&self) -> &[f64] {
        &self.d_m
    }

    /// Diagonal mass Schur complement (matched kinds only).
    pub fn d_sm(&self) -> &[f64] {
        &self.d_sm
    }

    /// `K_FD D_SM⁻¹ K_FDᵀ` (matched kinds only, zero otherwise).
    pub fn kdk(&self) -> &CsrMatrix {
        &self.kdk
    }

    /// Diagonal of `N` for the symmetric matched preconditioner.
    pub fn n_diag(&self) -> Option<&[f64]> {
        match &self.inner {
            Inner::Symmetric { n_diag, .. } => Some(n_diag),
            _ => None,
        }
    }

    /// `z = P⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        assert_eq!(r.len(), self.dim());
        assert_eq!(z.len(), self.dim());
        let (nf, nd) = (self.nf, self.nd);
        z.copy_from_slice(r);
        let (z12, z3) = z.split_at_mut(nf + nd);
        match &self.inner {
            Inner::Identity => {}
            Inner::Ideal { mass_block, schur } => {
                mass_block.solve_in_place(z12);
                schur.solve_in_place(z3);
            }
            Inner::Symmetric { k_plus_n, .. } => {
                self.diagonal_blocks(z12);
                // ((K+N) D_M⁻¹ (K+N))⁻¹ = (K+N)⁻¹ D_M (K+N)⁻¹
                k_plus_n.solve_in_place(z3);
                z3.iter_mut().zip(&self.d_m).for_each(|(v, d)| *v *= d);
                k_plus_n.solve_in_place(z3);
            }
            Inner::Nonsymmetric {
                mff,
                k_plus_m,
                k_plus_kdk,
            } => {
                self.diagonal_blocks(z12);
                // ((K+M) M⁻¹ (Kᵀ+KDK))⁻¹ = (Kᵀ+KDK)⁻¹ M (K+M)⁻¹
                k_plus_m.solve_in_place(z3);
                let mut t = mff.mul_vec(z3);
                k_plus_kdk.solve_in_place(&mut t);
                z3.copy_from_slice(&t);
            }
        }
    }

    fn diagonal_blocks(&self, z12: &mut [f64]) {
        let (zf, zd) = z12.split_at_mut(self.nf);
        zf.iter_mut().zip(&self.d_m).for_each(|(v, d)| *v /= d);
        zd.iter_mut().zip(&self.d_sm).for_each(|(v, d)| *v /= d);
    }

    pub fn apply_vec(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        self.apply(r, &mut z);
        z
    }
}
