//! Multilevel setup and V-cycle application.
//!
//! `setup` runs the coarsening loop: strength graph, C/F selection, transfer
//! operators for the chosen method, Galerkin triple product, optional
//! filtering, and recursion until the coarsest level is small enough for a
//! dense factorization. The resulting `Hierarchy` is immutable and reentrant;
//! one V(1,1) cycle doubles as the preconditioner for the Krylov solvers.

use crate::error::{AmgError, Result};
use crate::krylov::Preconditioner;
use crate::linalg::{estimate_spectral_radius, DenseMatrix, LuFactors};
use crate::partition::{
    classical_strength, greedy_aggregate, rs_coarsen, symmetric_strength, CfSplitting,
};
use crate::problems::block_diag_prescale;
use crate::relaxation::{cff_sweep, ffc_sweep, RelaxConfig};
use crate::sparse::{triple_product, SparseMatrix};
use crate::transfer::{
    clair_restriction, clair_transfer, classical_interpolation, lair_patterns, lair_restriction,
    smooth_constraints, BuildStats, CoarsenType, ConstraintMode, RestrictionSource, TransferConfig,
    TransferOperator,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// lAIR restriction with classical interpolation.
    Lair,
    /// Constrained lAIR transfer operators.
    Clair,
    /// Classical Ruge-Stuben interpolation with R = P^T.
    ClassicalRs,
}

/// Strength measure used for coarsening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrengthKind {
    Classical,
    Symmetric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub transfer: TransferConfig,
    /// Strength threshold for coarsening.
    pub coarsen_theta: f64,
    pub coarsen_strength: StrengthKind,
    /// Second pass of Ruge-Stuben coarsening (FC path only).
    pub second_pass: bool,
    /// Pattern degree of the lAIR restriction.
    pub restriction_degree: usize,
    /// Drop tolerance for coarse-operator filtering.
    pub drop_tol: f64,
    /// Filter every coarse operator after the triple product.
    pub coarse_filter: bool,
    /// Pre-scale the input by the inverse of its block diagonal.
    pub prescale_block: Option<usize>,
    pub max_levels: usize,
    pub max_coarse: usize,
    /// Weighted FFC postsmoothing keeps the preconditioner symmetric.
    pub weighted_postsmoothing: bool,
    /// Override the per-level Arnoldi estimate of 1/rho(D^{-1} A).
    pub fixed_weight: Option<f64>,
}

impl SolverConfig {
    /// Constrained-lAIR defaults for symmetric problems: aggressive
    /// aggregation coarsening at theta 0.5, degree-2 pattern, smoothed
    /// constant constraint, R = P^T, CG acceleration.
    pub fn clair_symmetric() -> Self {
        SolverConfig {
            method: Method::Clair,
            transfer: TransferConfig {
                coarsen_type: CoarsenType::Agg,
                sparsity_degree: 2,
                interp_strength_theta: 0.5,
                constraints: ConstraintMode::Ones,
                constraint_smoothing_steps: 5,
                inverse_type: crate::transfer::InverseType::ExactLu,
                outer_iterations: 1,
                build_r_from: RestrictionSource::PTranspose,
            },
            coarsen_theta: 0.5,
            coarsen_strength: StrengthKind::Classical,
            second_pass: false,
            restriction_degree: 2,
            drop_tol: 1e-4,
            coarse_filter: false,
            prescale_block: None,
            max_levels: 30,
            max_coarse: 20,
            weighted_postsmoothing: true,
            fixed_weight: None,
        }
    }

    /// Constrained-lAIR settings for nonsymmetric problems: strength
    /// thresholds 0.25/0.05, R built from A^T, unweighted postsmoothing,
    /// block-diagonal prescaling of the input.
    pub fn clair_nonsymmetric() -> Self {
        let mut cfg = Self::clair_symmetric();
        cfg.transfer.interp_strength_theta = 0.05;
        cfg.transfer.build_r_from = RestrictionSource::TransposeOfA;
        cfg.coarsen_theta = 0.25;
        cfg.weighted_postsmoothing = false;
        cfg.prescale_block = Some(1);
        cfg
    }

    /// The high-complexity constrained variant: first-pass Ruge-Stuben
    /// coarsening instead of aggregation.
    pub fn clair_high_complexity() -> Self {
        let mut cfg = Self::clair_nonsymmetric();
        cfg.transfer.coarsen_type = CoarsenType::Fc;
        cfg.second_pass = false;
        cfg
    }

    /// lAIR defaults: first-pass Ruge-Stuben coarsening at theta 0.25,
    /// degree-2 restriction at interpolation strength 0.05, classical
    /// interpolation for P, coarse filtering at 1e-4, GMRES acceleration.
    pub fn lair_default() -> Self {
        SolverConfig {
            method: Method::Lair,
            transfer: TransferConfig {
                coarsen_type: CoarsenType::Fc,
                sparsity_degree: 2,
                interp_strength_theta: 0.05,
                constraints: ConstraintMode::None,
                constraint_smoothing_steps: 0,
                inverse_type: crate::transfer::InverseType::ExactLu,
                outer_iterations: 1,
                build_r_from: RestrictionSource::TransposeOfA,
            },
            coarsen_theta: 0.25,
            coarsen_strength: StrengthKind::Classical,
            second_pass: false,
            restriction_degree: 2,
            drop_tol: 1e-4,
            coarse_filter: true,
            prescale_block: None,
            max_levels: 30,
            max_coarse: 20,
            weighted_postsmoothing: true,
            fixed_weight: None,
        }
    }

    /// lAIR settings for nonsymmetric problems: second-pass coarsening,
    /// unweighted postsmoothing, block prescaling.
    pub fn lair_nonsymmetric() -> Self {
        let mut cfg = Self::lair_default();
        cfg.second_pass = true;
        cfg.weighted_postsmoothing = false;
        cfg.prescale_block = Some(1);
        cfg
    }

    /// Plain classical AMG baseline: Ruge-Stuben interpolation, R = P^T.
    pub fn classical_rs() -> Self {
        let mut cfg = Self::lair_default();
        cfg.method = Method::ClassicalRs;
        cfg.second_pass = true;
        cfg.coarse_filter = false;
        cfg
    }

    fn validate(&self) -> Result<()> {
        self.transfer.validate()?;
        if self.max_coarse == 0 || self.max_levels == 0 {
            return Err(AmgError::InvalidConfig(
                "max_coarse and max_levels must be positive".into(),
            ));
        }
        if self.restriction_degree < 1 {
            return Err(AmgError::InvalidConfig(
                "restriction degree must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.coarsen_theta) {
            return Err(AmgError::InvalidConfig(
                "coarsen theta must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One rung of the hierarchy; the coarsest operator lives separately with
/// its dense factorization.
#[derive(Debug, Clone)]
pub struct Level {
    pub a: SparseMatrix,
    pub p: TransferOperator,
    pub r: TransferOperator,
    pub splitting: CfSplitting,
    pub relax_weight: f64,
    /// Smoothed constraint vectors used to build this level's P, kept for
    /// diagnostics and the mode-fit checks.
    pub constraints: Option<DenseMatrix>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SetupStats {
    pub singular_fallbacks: usize,
    pub skipped_constraint_rows: usize,
    /// Levels built without mode constraints because no usable candidate
    /// survived coarsening (possible on strongly advective operators).
    pub constraint_disabled_levels: usize,
}

impl SetupStats {
    fn absorb(&mut self, s: BuildStats) {
        self.singular_fallbacks += s.singular_fallbacks;
        self.skipped_constraint_rows += s.skipped_constraint_rows;
    }
}

#[derive(Debug)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    pub coarse_a: SparseMatrix,
    coarse_lu: LuFactors,
    pub config: SolverConfig,
    pub stats: SetupStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySummary {
    pub levels: Vec<LevelSummary>,
    pub operator_complexity: f64,
    pub grid_complexity: f64,
}

/// Builds the multilevel hierarchy for `a` under the given configuration.
pub fn setup(a: &SparseMatrix, cfg: &SolverConfig) -> Result<Hierarchy> {
    cfg.validate()?;
    if a.n_rows() != a.n_cols() {
        return Err(AmgError::DimensionMismatch {
            context: "setup requires a square matrix",
            expected: a.n_rows(),
            got: a.n_cols(),
        });
    }
    let mut current = match cfg.prescale_block {
        Some(bs) => block_diag_prescale(a, bs)?,
        None => a.clone(),
    };
    let mut stats = SetupStats::default();
    let mut levels: Vec<Level> = Vec::new();
    // Constraint vectors inherited across levels by injection.
    let mut b_carry: Option<DenseMatrix> = match (&cfg.transfer.constraints, cfg.method) {
        (ConstraintMode::None, _) | (_, Method::Lair) | (_, Method::ClassicalRs) => None,
        (ConstraintMode::Ones, Method::Clair) => {
            Some(DenseMatrix::from_column(&vec![1.0; current.n_rows()]))
        }
        (ConstraintMode::Given(b), Method::Clair) => Some(b.clone()),
    };

    while current.n_rows() > cfg.max_coarse && levels.len() + 1 < cfg.max_levels {
        let n = current.n_rows();
        let weight = match cfg.fixed_weight {
            Some(w) => w,
            None => {
                let diag = current.diagonal();
                let dinv: Vec<f64> = diag
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        if d == 0.0 {
                            Err(AmgError::ZeroDiagonal(i))
                        } else {
                            Ok(1.0 / d)
                        }
                    })
                    .collect::<Result<_>>()?;
                let da = current.scale_rows(&dinv)?;
                let rho = estimate_spectral_radius(&da, 15)?;
                if rho <= 0.0 {
                    1.0
                } else {
                    1.0 / rho
                }
            }
        };

        // Coarsening.
        let use_agg = cfg.method == Method::Clair && cfg.transfer.coarsen_type == CoarsenType::Agg;
        let (splitting, coarsen_s) = if use_agg {
            let s = match cfg.coarsen_strength {
                StrengthKind::Classical => classical_strength(&current, cfg.coarsen_theta),
                StrengthKind::Symmetric => symmetric_strength(&current, cfg.coarsen_theta)?,
            };
            let (_, split) = greedy_aggregate(&s);
            (split, s)
        } else {
            let s = classical_strength(&current, cfg.coarsen_theta);
            (rs_coarsen(&s, cfg.second_pass), s)
        };
        if splitting.c_count() == 0 || splitting.c_count() == n {
            break; // coarsening stagnated; factor what we have
        }

        // Constraints for this level. Injection can hand us a dead candidate
        // on strongly advective operators; constraints are then dropped for
        // this level and below.
        let b_smoothed = match &b_carry {
            Some(b0) => {
                let smoothed = smooth_constraints(
                    &current,
                    b0,
                    cfg.transfer.constraint_smoothing_steps,
                    &splitting,
                    weight,
                )?;
                let dead =
                    (0..smoothed.n_cols()).any(|j| smoothed.column(j).iter().all(|&v| v == 0.0));
                if dead {
                    stats.constraint_disabled_levels += 1;
                    b_carry = None;
                    None
                } else {
                    Some(smoothed)
                }
            }
            None => None,
        };

        // Transfer operators.
        let (p, r) = match cfg.method {
            Method::Lair => {
                let p = classical_interpolation(&current, &coarsen_s, &splitting)?;
                let s_r = classical_strength(&current, cfg.transfer.interp_strength_theta);
                let patterns = lair_patterns(&s_r, &splitting, cfg.restriction_degree);
                let (r, st) = lair_restriction(&current, &splitting, &patterns)?;
                stats.absorb(st);
                (p, r)
            }
            Method::ClassicalRs => {
                let p = classical_interpolation(&current, &coarsen_s, &splitting)?;
                let r = TransferOperator {
                    matrix: p.matrix.transpose(),
                    splitting: splitting.clone(),
                };
                (p, r)
            }
            Method::Clair => {
                let s_interp = classical_strength(&current, cfg.transfer.interp_strength_theta);
                let (p, st) = clair_transfer(
                    &current,
                    &s_interp,
                    &splitting,
                    &cfg.transfer,
                    b_smoothed.as_ref(),
                )?;
                stats.absorb(st);
                let r = match cfg.transfer.build_r_from {
                    RestrictionSource::PTranspose => TransferOperator {
                        matrix: p.matrix.transpose(),
                        splitting: splitting.clone(),
                    },
                    RestrictionSource::TransposeOfA => {
                        let at = current.transpose();
                        let s_at = classical_strength(&at, cfg.transfer.interp_strength_theta);
                        let b_r = match &b_carry {
                            Some(b0) => Some(smooth_constraints(
                                &at,
                                b0,
                                cfg.transfer.constraint_smoothing_steps,
                                &splitting,
                                weight,
                            )?),
                            None => None,
                        };
                        let (r, st) =
                            clair_restriction(&at, &s_at, &splitting, &cfg.transfer, b_r.as_ref())?;
                        stats.absorb(st);
                        r
                    }
                };
                (p, r)
            }
        };

        let mut coarse = triple_product(&r.matrix, &current, &p.matrix)?;
        if cfg.coarse_filter {
            coarse = coarse.filter_small(cfg.drop_tol);
        }

        // Inject constraints to the coarse grid for the next level.
        b_carry = b_smoothed.as_ref().map(|b| {
            let c_points = splitting.c_points();
            let mut bc = DenseMatrix::zeros(c_points.len(), b.n_cols());
            for (ci, &c) in c_points.iter().enumerate() {
                for j in 0..b.n_cols() {
                    bc[(ci, j)] = b[(c, j)];
                }
            }
            bc
        });

        levels.push(Level {
            a: current,
            p,
            r,
            splitting,
            relax_weight: weight,
            constraints: b_smoothed,
        });
        current = coarse;
    }

    let coarse_lu = LuFactors::factor(&current.to_dense())?;
    Ok(Hierarchy {
        levels,
        coarse_a: current,
        coarse_lu,
        config: cfg.clone(),
        stats,
    })
}

impl Hierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn finest_n(&self) -> usize {
        self.levels
            .first()
            .map(|l| l.a.n_rows())
            .unwrap_or(self.coarse_a.n_rows())
    }

    /// One V(1,1) cycle: CFF presmoothing, restrict, recurse, correct, FFC
    /// postsmoothing; the coarsest level is solved directly.
    pub fn vcycle(&self, b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        self.cycle(0, b, x0)
    }

    fn relax_cfg(&self, level: usize) -> RelaxConfig {
        RelaxConfig {
            weight: self.levels[level].relax_weight,
            pattern: crate::relaxation::SweepPattern::Cff,
            weighted_postsmoothing: self.config.weighted_postsmoothing,
        }
    }

    fn cycle(&self, k: usize, b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        if k == self.levels.len() {
            return Ok(self.coarse_lu.solve_vec(b));
        }
        let lvl = &self.levels[k];
        let cfg = self.relax_cfg(k);
        let mut x = cff_sweep(&lvl.a, x0, b, &lvl.splitting, &cfg)?;
        let ax = lvl.a.spmv(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rc = lvl.r.matrix.spmv(&r)?;
        let ec = self.cycle(k + 1, &rc, &vec![0.0; rc.len()])?;
        let pe = lvl.p.matrix.spmv(&ec)?;
        for (xi, pi) in x.iter_mut().zip(&pe) {
            *xi += pi;
        }
        ffc_sweep(&lvl.a, &x, b, &lvl.splitting, &cfg)
    }

    /// Sum of operator nonzeros over all levels relative to the finest.
    pub fn operator_complexity(&self) -> f64 {
        let base = self
            .levels
            .first()
            .map(|l| l.a.nnz())
            .unwrap_or(self.coarse_a.nnz()) as f64;
        let total: usize =
            self.levels.iter().map(|l| l.a.nnz()).sum::<usize>() + self.coarse_a.nnz();
        total as f64 / base
    }

    pub fn grid_complexity(&self) -> f64 {
        let base = self.finest_n() as f64;
        let total: usize =
            self.levels.iter().map(|l| l.a.n_rows()).sum::<usize>() + self.coarse_a.n_rows();
        total as f64 / base
    }

    pub fn summary(&self) -> HierarchySummary {
        let mut levels: Vec<LevelSummary> = self
            .levels
            .iter()
            .map(|l| LevelSummary {
                n: l.a.n_rows(),
                nnz: l.a.nnz(),
            })
            .collect();
        levels.push(LevelSummary {
            n: self.coarse_a.n_rows(),
            nnz: self.coarse_a.nnz(),
        });
        HierarchySummary {
            levels,
            operator_complexity: self.operator_complexity(),
            grid_complexity: self.grid_complexity(),
        }
    }
}

impl Preconditioner for Hierarchy {
    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.vcycle(r, &vec![0.0; r.len()])
    }
}
