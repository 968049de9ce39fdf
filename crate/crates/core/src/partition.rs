//! Strength-of-connection graphs and coarse-grid selection.
//!
//! Two coarsening paths are provided: the classical Ruge-Stuben C/F splitting
//! (first pass, with an optional second pass) and greedy root-node
//! aggregation, which is considerably more aggressive. All tie-breaking is by
//! lowest index so that splittings are reproducible.

use crate::error::{AmgError, Result};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

/// Thresholded coupling graph. Stored values are the strength measures the
/// threshold was applied to, so downstream consumers can rank connections.
#[derive(Debug, Clone)]
pub struct StrengthMatrix {
    pub graph: SparseMatrix,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    C,
    F,
}

/// Partition of the degrees of freedom into C- and F-points, with aggregate
/// membership when aggregation coarsening produced it.
#[derive(Debug, Clone)]
pub struct CfSplitting {
    labels: Vec<Label>,
    c_count: usize,
    f_count: usize,
    /// Aggregate index per dof (aggregation path only). Aggregate i is the
    /// one rooted at the i-th C-point.
    pub aggregate_of: Option<Vec<usize>>,
    /// Coarse index for each C-point; usize::MAX at F-points.
    fine_to_coarse: Vec<usize>,
}

impl CfSplitting {
    pub fn from_labels(labels: Vec<Label>, aggregate_of: Option<Vec<usize>>) -> Self {
        let mut fine_to_coarse = vec![usize::MAX; labels.len()];
        let mut c_count = 0;
        for (i, &l) in labels.iter().enumerate() {
            if l == Label::C {
                fine_to_coarse[i] = c_count;
                c_count += 1;
            }
        }
        let f_count = labels.len() - c_count;
        if let Some(agg) = &aggregate_of {
            assert_eq!(agg.len(), labels.len());
        }
        CfSplitting {
            labels,
            c_count,
            f_count,
            aggregate_of,
            fine_to_coarse,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn c_count(&self) -> usize {
        self.c_count
    }

    pub fn f_count(&self) -> usize {
        self.f_count
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn is_c(&self, i: usize) -> bool {
        self.labels[i] == Label::C
    }

    /// Coarse index of C-point `i`.
    pub fn coarse_index(&self, i: usize) -> usize {
        debug_assert!(self.is_c(i));
        self.fine_to_coarse[i]
    }

    pub fn c_points(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_c(i)).collect()
    }

    pub fn f_points(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_c(i)).collect()
    }

    /// Splitting as 0/1 flags (0 = F, 1 = C) for JSON export.
    pub fn to_flags(&self) -> Vec<u8> {
        self.labels
            .iter()
            .map(|&l| if l == Label::C { 1 } else { 0 })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "n": self.n(),
            "c_count": self.c_count,
            "f_count": self.f_count,
            "labels": self.to_flags(),
            "aggregate_of": self.aggregate_of,
        })
        .to_string()
    }

    /// Panics if the partition is inconsistent; cheap enough to run after
    /// every coarsening call.
    pub fn validate(&self) {
        assert_eq!(self.c_count + self.f_count, self.n());
        if let Some(agg) = &self.aggregate_of {
            let n_agg = self.c_count;
            let mut root_seen = vec![false; n_agg];
            for (i, &a) in agg.iter().enumerate() {
                assert!(a < n_agg, "aggregate index out of range");
                if self.is_c(i) {
                    assert!(!root_seen[a], "aggregate has two roots");
                    root_seen[a] = true;
                }
            }
            assert!(root_seen.iter().all(|&s| s), "aggregate without a root");
        }
    }
}

/// Binary aggregate-membership operator: column i is nonzero exactly on the
/// dofs of aggregate i.
#[derive(Debug, Clone)]
pub struct AggregationOperator {
    pub matrix: SparseMatrix,
}

/// Classical strength measure: edge (i, j) is strong iff
/// -a_ij >= theta * max_{k != i}(-a_ik). Rows without negative off-diagonals
/// fall back to the absolute-value variant.
pub fn classical_strength(a: &SparseMatrix, theta: f64) -> StrengthMatrix {
    assert!(a.n_rows() == a.n_cols(), "strength needs a square matrix");
    assert!((0.0..=1.0).contains(&theta), "theta must be in [0, 1]");
    let n = a.n_rows();
    let mut triplets = Vec::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let mut max_neg = 0.0f64;
        let mut max_abs = 0.0f64;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                continue;
            }
            max_neg = max_neg.max(-v);
            max_abs = max_abs.max(v.abs());
        }
        if max_neg > 0.0 {
            let cutoff = theta * max_neg;
            for (&c, &v) in cols.iter().zip(vals) {
                if c != i && -v > 0.0 && -v >= cutoff {
                    triplets.push((i, c, -v));
                }
            }
        } else if max_abs > 0.0 {
            let cutoff = theta * max_abs;
            for (&c, &v) in cols.iter().zip(vals) {
                if c != i && v != 0.0 && v.abs() >= cutoff {
                    triplets.push((i, c, v.abs()));
                }
            }
        }
    }
    StrengthMatrix {
        graph: SparseMatrix::from_triplets(n, n, &triplets).unwrap(),
        theta,
    }
}

/// Smoothed-aggregation strength measure: |a_ij| >= theta * sqrt(|a_ii a_jj|).
pub fn symmetric_strength(a: &SparseMatrix, theta: f64) -> Result<StrengthMatrix> {
    assert!(a.n_rows() == a.n_cols(), "strength needs a square matrix");
    assert!((0.0..=1.0).contains(&theta), "theta must be in [0, 1]");
    let n = a.n_rows();
    let diag = a.diagonal();
    for (i, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(AmgError::ZeroDiagonal(i));
        }
    }
    let mut triplets = Vec::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i || v == 0.0 {
                continue;
            }
            let scale = (diag[i].abs() * diag[c].abs()).sqrt();
            if v.abs() >= theta * scale {
                triplets.push((i, c, v.abs() / scale));
            }
        }
    }
    Ok(StrengthMatrix {
        graph: SparseMatrix::from_triplets(n, n, &triplets).unwrap(),
        theta,
    })
}

const UNASSIGNED: u8 = 0;
const CPOINT: u8 = 1;
const FPOINT: u8 = 2;

/// Classical Ruge-Stuben C/F splitting driven by the transpose-neighbor
/// measure, with the optional second pass that promotes F-points until every
/// strongly connected F-F pair shares a strong C neighbor.
pub fn rs_coarsen(s: &StrengthMatrix, second_pass: bool) -> CfSplitting {
    let n = s.graph.n_rows();
    let st = s.graph.transpose();

    let mut state = vec![UNASSIGNED; n];
    // lambda_i = |S^T_i ∩ U| + 2 |S^T_i ∩ F|
    let mut lambda: Vec<i64> = (0..n).map(|i| st.row(i).0.len() as i64).collect();

    let mut remaining = n;
    while remaining > 0 {
        // Highest measure wins, lowest index on ties.
        let mut best = usize::MAX;
        let mut best_lambda = -1i64;
        for i in 0..n {
            if state[i] == UNASSIGNED && lambda[i] > best_lambda {
                best_lambda = lambda[i];
                best = i;
            }
        }
        if best_lambda <= 0 {
            // Nothing strongly influences anyone anymore; the rest become C.
            for st_i in state.iter_mut() {
                if *st_i == UNASSIGNED {
                    *st_i = CPOINT;
                }
            }
            break;
        }
        let c = best;
        state[c] = CPOINT;
        remaining -= 1;
        // Unassigned points that strongly depend on the new C-point become F.
        let (deps, _) = st.row(c);
        let mut new_f = Vec::new();
        for &j in deps {
            if state[j] == UNASSIGNED {
                state[j] = FPOINT;
                remaining -= 1;
                new_f.push(j);
            }
        }
        // New F-points make their unassigned strong influences more valuable.
        for &j in &new_f {
            let (infl, _) = s.graph.row(j);
            for &k in infl {
                if state[k] == UNASSIGNED {
                    lambda[k] += 2;
                }
            }
        }
        // Dependents of the new C-point lose one unassigned transpose-neighbor.
        for &j in deps {
            if state[j] == FPOINT && new_f.contains(&j) {
                let (infl, _) = s.graph.row(j);
                for &k in infl {
                    if state[k] == UNASSIGNED {
                        lambda[k] -= 1;
                    }
                }
            }
        }
    }

    let mut labels: Vec<Label> = state
        .iter()
        .map(|&v| if v == CPOINT { Label::C } else { Label::F })
        .collect();

    if second_pass {
        rs_second_pass(s, &mut labels);
    }

    let out = CfSplitting::from_labels(labels, None);
    out.validate();
    out
}

/// Second pass: every strongly connected F-F pair must share a strong
/// C-point. A violation tentatively promotes the neighbor; a second violation
/// for the same row promotes the row itself instead.
fn rs_second_pass(s: &StrengthMatrix, labels: &mut [Label]) {
    let n = labels.len();
    for i in 0..n {
        if labels[i] == Label::C {
            continue;
        }
        let (si, _) = s.graph.row(i);
        let mut tentative: Option<usize> = None;
        let mut promote_self = false;
        for &j in si {
            if labels[j] == Label::C || Some(j) == tentative {
                continue;
            }
            let (sj, _) = s.graph.row(j);
            let shares = sj
                .iter()
                .any(|&k| (labels[k] == Label::C || Some(k) == tentative) && si.contains(&k));
            if !shares {
                if tentative.is_some() {
                    promote_self = true;
                    break;
                }
                tentative = Some(j);
            }
        }
        if promote_self {
            labels[i] = Label::C;
        } else if let Some(j) = tentative {
            labels[j] = Label::C;
        }
    }
}

/// Greedy root-node aggregation. Phase 1 seeds aggregates from dofs whose
/// closed neighborhood is entirely unmarked (the seed becomes the root and
/// C-point); phase 2 attaches leftovers to the phase-1 aggregate of their
/// strongest connection; anything still unmarked becomes a singleton root.
pub fn greedy_aggregate(s: &StrengthMatrix) -> (AggregationOperator, CfSplitting) {
    let n = s.graph.n_rows();
    // Symmetrized adjacency; summing the two directions keeps mutual
    // connections ranked above one-sided ones in phase 2.
    let sym = {
        let st = s.graph.transpose();
        let mut t = Vec::new();
        for i in 0..n {
            let (c1, v1) = s.graph.row(i);
            for (&c, &v) in c1.iter().zip(v1) {
                t.push((i, c, v.abs()));
            }
            let (c2, v2) = st.row(i);
            for (&c, &v) in c2.iter().zip(v2) {
                t.push((i, c, v.abs()));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    };

    let mut aggregate = vec![usize::MAX; n];
    let mut roots = Vec::new();

    // Phase 1: seeds with fully unmarked closed neighborhoods.
    for i in 0..n {
        if aggregate[i] != usize::MAX {
            continue;
        }
        let (nbrs, _) = sym.row(i);
        if nbrs.iter().any(|&j| j != i && aggregate[j] != usize::MAX) {
            continue;
        }
        let agg = roots.len();
        aggregate[i] = agg;
        for &j in nbrs {
            if j != i {
                aggregate[j] = agg;
            }
        }
        roots.push(i);
    }

    // Phase 2: attach to the strongest phase-1 neighbor aggregate.
    let phase1 = aggregate.clone();
    for i in 0..n {
        if aggregate[i] != usize::MAX {
            continue;
        }
        let (nbrs, vals) = sym.row(i);
        let mut best: Option<(usize, f64)> = None;
        for (&j, &v) in nbrs.iter().zip(vals) {
            if j == i || phase1[j] == usize::MAX {
                continue;
            }
            let better = match best {
                None => true,
                Some((ba, bv)) => v > bv || (v == bv && phase1[j] < ba),
            };
            if better {
                best = Some((phase1[j], v));
            }
        }
        if let Some((agg, _)) = best {
            aggregate[i] = agg;
        }
    }

    // Phase 3: isolated leftovers become singleton roots.
    for i in 0..n {
        if aggregate[i] == usize::MAX {
            aggregate[i] = roots.len();
            roots.push(i);
        }
    }

    let labels: Vec<Label> = {
        let mut l = vec![Label::F; n];
        for &r in &roots {
            l[r] = Label::C;
        }
        l
    };

    // Coarse columns follow ascending C-point order; remap aggregate ids
    // (which follow seeding order) to match.
    let splitting = CfSplitting::from_labels(labels.clone(), None);
    let mut agg_to_coarse = vec![usize::MAX; roots.len()];
    for (agg, &r) in roots.iter().enumerate() {
        agg_to_coarse[agg] = splitting.coarse_index(r);
    }
    let aggregate_of: Vec<usize> = aggregate.iter().map(|&a| agg_to_coarse[a]).collect();

    let n_agg = roots.len();
    let triplets: Vec<(usize, usize, f64)> = aggregate_of
        .iter()
        .enumerate()
        .map(|(i, &a)| (i, a, 1.0))
        .collect();
    let matrix = SparseMatrix::from_triplets(n, n_agg, &triplets).unwrap();

    let splitting = CfSplitting::from_labels(labels, Some(aggregate_of));
    splitting.validate();
    (AggregationOperator { matrix }, splitting)
}
