use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::assembly::FeOperators;
use crate::error::{Error, Result};
use crate::linalg::{dense_eigs, DEFAULT_EIG_CAP, FactorKind, Factorization};
use crate::mesh::build_mesh;
use crate::optcontrol::{mass_schur_complement, KktSystem, Preconditioner};
use crate::par;

use super::{fmt_f64, StudyConfig};

/// One eigenvalue of a probed operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigRecord {
    /// Preconditioner name, or `mass` for the mass-block approximation.
    pub probe: String,
    pub beta: f64,
    pub re: f64,
    pub im: f64,
}

/// Eigenvalues of `P⁻¹ A` for dense-assembled columns `apply(e_j)`.
fn spectrum(n: usize, apply: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Result<Vec<Complex64>> {
    if n > DEFAULT_EIG_CAP {
        return Err(Error::SizeCap {
            what: "eigenvalue probe",
            size: n,
            cap: DEFAULT_EIG_CAP,
        });
    }
    let idx: Vec<usize> = (0..n).collect();
    let cols: Vec<Vec<f64>> = par::map_collect(&idx, |&j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        apply(&e)
    });
    let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    dense_eigs(&dense, DEFAULT_EIG_CAP)
}

/// Spectra of the preconditioned KKT operator for every preconditioner in
/// `cfg.precons` and every β, plus the spectrum of
/// `blkdiag(M_FF, S_M)⁻¹ [[M_FF, M_FD], [M_DF, M_DD + βI]]` under the probe
/// name `mass`. Uses the first mesh level of the configuration.
pub fn eig_probe(cfg: &StudyConfig) -> Result<Vec<EigRecord>> {
    cfg.validate()?;
    let graph = cfg.build_graph()?;
    let mesh = Arc::new(build_mesh(graph, cfg.n_es[0])?);
    let ops = FeOperators::assemble(mesh, &cfg.data(cfg.betas[0])?)?;
    let mut out = Vec::new();
    par::with_jobs(cfg.jobs, || -> Result<()> {
        for &beta in &cfg.betas {
            let kkt = KktSystem::new(&ops, beta)?;
            for &kind in &cfg.precons {
                let pre = Preconditioner::new(kind, &kkt)?;
                let eigs = spectrum(kkt.dim(), |e| pre.apply_vec(&kkt.apply_vec(e)))?;
                out.extend(eigs.into_iter().map(|l| EigRecord {
                    probe: kind.name().to_string(),
                    beta,
                    re: l.re,
                    im: l.im,
                }));
            }
            for l in mass_block_spectrum(&ops, beta)? {
                out.push(EigRecord {
                    probe: "mass".to_string(),
                    beta,
                    re: l.re,
                    im: l.im,
                });
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn mass_block_spectrum(ops: &FeOperators, beta: f64) -> Result<Vec<Complex64>> {
    let (nf, nd) = (ops.n_free(), ops.n_dirichlet());
    let s_m = mass_schur_complement(ops, beta, DEFAULT_EIG_CAP)?;
    let mff = Factorization::new(&ops.m.ff, FactorKind::Cholesky)?;
    let sm = Factorization::new(&s_m, FactorKind::Cholesky)?;
    let mdd = ops.m.dd.add_diagonal(&vec![beta; nd])?;
    spectrum(nf + nd, |e| {
        let (ef, ed) = e.split_at(nf);
        let mut top = ops.m.ff.mul_vec(ef);
        ops.m.fd.mul_vec_add(1.0, ed, &mut top);
        let mut bottom = ops.m.df.mul_vec(ef);
        mdd.mul_vec_add(1.0, ed, &mut bottom);
        mff.solve_in_place(&mut top);
        sm.solve_in_place(&mut bottom);
        top.extend(bottom);
        top
    })
}

/// Extreme moduli of one probed spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub probe: String,
    pub beta: f64,
    pub count: usize,
    pub min_abs: f64,
    pub max_abs: f64,
    pub min_re: f64,
    pub max_re: f64,
}

/// Groups records by (probe, β) in first-seen order.
pub fn spectrum_summary(records: &[EigRecord]) -> Vec<SpectrumSummary> {
    let mut out: Vec<SpectrumSummary> = Vec::new();
    for r in records {
        let abs = r.re.hypot(r.im);
        match out.iter_mut().find(|s| s.probe == r.probe && s.beta == r.beta) {
            Some(s) => {
                s.count += 1;
                s.min_abs = s.min_abs.min(abs);
                s.max_abs = s.max_abs.max(abs);
                s.min_re = s.min_re.min(r.re);
                s.max_re = s.max_re.max(r.re);
            }
            None => out.push(SpectrumSummary {
                probe: r.probe.clone(),
                beta: r.beta,
                count: 1,
                min_abs: abs,
                max_abs: abs,
                min_re: r.re,
                max_re: r.re,
            }),
        }
    }
    out
}

pub fn write_eig_csv(path: &Path, records: &[EigRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["probe", "beta", "re", "im"])?;
    for r in records {
        w.write_record([r.probe.clone(), fmt_f64(r.beta), fmt_f64(r.re), fmt_f64(r.im)])?;
    }
    w.flush()?;
    Ok(())
}
