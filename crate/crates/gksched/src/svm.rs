//! Kernel SVM on SPD embeddings: an SMO dual solver over a precomputed
//! log-Euclidean Gram matrix, bandwidth selection by grouped cross
//! validation, JSON model persistence, and schedule prediction.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::{embed_link, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::sched::strongest_link;
use crate::sim::{ChannelRealization, Layout, ScheduleDecision};
use crate::spd::{gram, gram_from_lem, kernel, lem_sq_matrix, KernelParams, SpdMatrix, SymMatrix};

pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BANDWIDTH_FACTORS: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_CV_FOLDS: usize = 5;

/// Labeled SPD training points; labels are +1 (activate) or -1 (stay silent).
#[derive(Debug, Clone)]
pub struct TrainSet {
    points: Vec<SpdMatrix>,
    labels: Vec<i8>,
}

impl TrainSet {
    pub fn new(points: Vec<SpdMatrix>, labels: Vec<i8>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("training set must not be empty"));
        }
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), actual: labels.len() });
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::validation("training points must share one dimension"));
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::validation("labels must be +1 or -1"));
        }
        Ok(TrainSet { points, labels })
    }

    pub fn points(&self) -> &[SpdMatrix] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (pos, self.labels.len() - pos)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmHyper {
    /// Soft-margin penalty before class balancing.
    pub c: f64,
    /// Stopping threshold on the maximal KKT violation gap.
    pub tol: f64,
    /// Cap on SMO pair updates.
    pub max_passes: usize,
    pub kernel: KernelParams,
    /// Scale each class's box to c * n / (2 * n_class), so classes pull with
    /// equal total weight.
    pub balanced: bool,
}

impl Default for SvmHyper {
    fn default() -> Self {
        SvmHyper {
            c: 100.0,
            tol: 1e-3,
            max_passes: 100_000,
            kernel: KernelParams { gamma_kernel: 1.0, exponent: Default::default() },
            balanced: true,
        }
    }
}

impl SvmHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::validation("c must be positive and finite"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::validation("tol must be positive and finite"));
        }
        if self.max_passes == 0 {
            return Err(Error::validation("max_passes must be at least 1"));
        }
        self.kernel.validate()
    }

    fn class_boxes(&self, pos: usize, neg: usize) -> (f64, f64) {
        if self.balanced && pos > 0 && neg > 0 {
            let n = (pos + neg) as f64;
            (self.c * n / (2.0 * pos as f64), self.c * n / (2.0 * neg as f64))
        } else {
            (self.c, self.c)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SupportVector {
    /// alpha_i * y_i
    coef: f64,
    point: SpdMatrix,
}

/// Trained classifier: decision value is the coefficient-weighted kernel sum
/// over the support vectors plus the bias.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmModel {
    schema_version: u32,
    dim: usize,
    kernel: KernelParams,
    bias: f64,
    support: Vec<SupportVector>,
}

/// Solver diagnostics for one training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub alphas: Vec<f64>,
    /// Per-sample box bound actually used.
    pub box_c: Vec<f64>,
    pub iterations: usize,
    /// Final maximal KKT violation gap.
    pub gap: f64,
    pub converged: bool,
    /// Final dual objective in minimization form, 1/2 a'Qa - sum(a); negate
    /// for the usual maximization value.
    pub objective: f64,
    /// Dual objective (minimization form) after every pair update.
    pub objective_trace: Vec<f64>,
    pub support_count: usize,
}

struct SmoSolution {
    alphas: Vec<f64>,
    bias: f64,
    iterations: usize,
    gap: f64,
    converged: bool,
    objective: f64,
    objective_trace: Vec<f64>,
}

/// First-order SMO over a precomputed kernel matrix: repeatedly picks the
/// maximal violating pair and minimizes the dual along it, keeping the
/// equality constraint intact.
fn solve_smo(k: &SymMatrix, y: &[f64], box_c: &[f64], tol: f64, max_passes: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let mut objective = 0.0;
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut gap;
    let mut bias;

    loop {
        let mut best_up = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        let mut best_low = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            let v = -y[t] * g[t];
            if ((y[t] > 0.0 && alpha[t] < box_c[t]) || (y[t] < 0.0 && alpha[t] > 0.0)) && v > best_up
            {
                best_up = v;
                i = t;
            }
            if ((y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < box_c[t]))
                && v < best_low
            {
                best_low = v;
                j = t;
            }
        }
        bias = match (i != usize::MAX, j != usize::MAX) {
            (true, true) => (best_up + best_low) / 2.0,
            (true, false) => best_up,
            (false, true) => best_low,
            (false, false) => 0.0,
        };
        if i == usize::MAX || j == usize::MAX {
            converged = true;
            gap = 0.0;
            break;
        }
        gap = best_up - best_low;
        if gap <= tol {
            converged = true;
            break;
        }
        if iterations >= max_passes {
            break;
        }
        iterations += 1;

        let curvature = k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j);
        let step_denom = curvature.max(1e-12);
        let cap_i = if y[i] > 0.0 { box_c[i] - alpha[i] } else { alpha[i] };
        let cap_j = if y[j] > 0.0 { alpha[j] } else { box_c[j] - alpha[j] };
        let s = (gap / step_denom).min(cap_i).min(cap_j);

        objective += -gap * s + 0.5 * curvature * s * s;
        trace.push(objective);

        alpha[i] = (alpha[i] + y[i] * s).clamp(0.0, box_c[i]);
        alpha[j] = (alpha[j] - y[j] * s).clamp(0.0, box_c[j]);
        for t in 0..n {
            g[t] += s * y[t] * (k.get(t, i) - k.get(t, j));
        }
    }

    SmoSolution { alphas: alpha, bias, iterations, gap, converged, objective, objective_trace: trace }
}

fn constant_model(dim: usize, kernel: KernelParams, label: i8) -> SvmModel {
    SvmModel {
        schema_version: MODEL_SCHEMA_VERSION,
        dim,
        kernel,
        bias: label as f64,
        support: Vec::new(),
    }
}

pub fn train(set: &TrainSet, hyper: &SvmHyper) -> Result<SvmModel> {
    train_traced(set, hyper).map(|(model, _)| model)
}

pub fn train_traced(set: &TrainSet, hyper: &SvmHyper) -> Result<(SvmModel, TrainReport)> {
    hyper.validate()?;
    let n = set.len();
    let (pos, neg) = set.class_counts();
    if pos == 0 || neg == 0 {
        let label = if pos > 0 { 1 } else { -1 };
        let model = constant_model(set.dim(), hyper.kernel, label);
        let report = TrainReport {
            alphas: vec![0.0; n],
            box_c: vec![hyper.c; n],
            iterations: 0,
            gap: 0.0,
            converged: true,
            objective: 0.0,
            objective_trace: Vec::new(),
            support_count: 0,
        };
        return Ok((model, report));
    }

    let k = gram(set.points(), &hyper.kernel)?;
    let y: Vec<f64> = set.labels().iter().map(|&l| l as f64).collect();
    let (c_pos, c_neg) = hyper.class_boxes(pos, neg);
    let box_c: Vec<f64> =
        set.labels().iter().map(|&l| if l == 1 { c_pos } else { c_neg }).collect();

    let sol = solve_smo(&k, &y, &box_c, hyper.tol, hyper.max_passes);

    let support: Vec<SupportVector> = sol
        .alphas
        .iter()
        .zip(set.points())
        .zip(&y)
        .filter(|((&a, _), _)| a > 0.0)
        .map(|((&a, p), &yy)| SupportVector { coef: a * yy, point: p.clone() })
        .collect();
    let model = SvmModel {
        schema_version: MODEL_SCHEMA_VERSION,
        dim: set.dim(),
        kernel: hyper.kernel,
        bias: sol.bias,
        support,
    };
    let support_count = model.support.len();
    let report = TrainReport {
        alphas: sol.alphas,
        box_c,
        iterations: sol.iterations,
        gap: sol.gap,
        converged: sol.converged,
        objective: sol.objective,
        objective_trace: sol.objective_trace,
        support_count,
    };
    Ok((model, report))
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn support_count(&self) -> usize {
        self.support.len()
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    #[cfg(test)]
    pub(crate) fn from_raw_parts(dim: usize, kernel: KernelParams, bias: f64) -> Self {
        SvmModel { schema_version: MODEL_SCHEMA_VERSION, dim, kernel, bias, support: Vec::new() }
    }

    pub fn decision_value(&self, x: &SpdMatrix) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.dim() });
        }
        let mut f = self.bias;
        for sv in &self.support {
            f += sv.coef * kernel(&sv.point, x, &self.kernel)?;
        }
        Ok(f)
    }

    /// +1 to activate, -1 to stay silent; the boundary itself activates.
    pub fn predict(&self, x: &SpdMatrix) -> Result<i8> {
        Ok(if self.decision_value(x)? >= 0.0 { 1 } else { -1 })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| Error::format(path, e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SvmModel> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let model: SvmModel = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::format(path, e.to_string()))?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::format(
                path,
                format!(
                    "unsupported schema version {} (expected {})",
                    model.schema_version, MODEL_SCHEMA_VERSION
                ),
            ));
        }
        model.kernel.validate()?;
        if model.support.iter().any(|sv| sv.point.dim() != model.dim) {
            return Err(Error::format(path, "support vector dimension mismatch".to_string()));
        }
        Ok(model)
    }
}

/// Classifies every link of the layout; if nothing would transmit, falls back
/// to the strongest direct link so the schedule is never empty.
pub fn predict_schedule(
    model: &SvmModel,
    layout: &Layout,
    ecfg: &EmbeddingConfig,
    ch: &ChannelRealization,
) -> Result<ScheduleDecision> {
    let k = layout.pair_count();
    let mut active = Vec::with_capacity(k);
    for q in 0..k {
        active.push(model.predict(&embed_link(layout, q, ecfg)?)? == 1);
    }
    let d = ScheduleDecision::new(active);
    if d.count_active() == 0 {
        return Ok(strongest_link(ch));
    }
    Ok(d)
}

fn median_of_upper_triangle(lem: &SymMatrix) -> Result<f64> {
    let n = lem.dim();
    if n < 2 {
        return Err(Error::validation("need at least two points for a pairwise median"));
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(lem.get(i, j));
        }
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    Ok(if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) })
}

/// Median of all pairwise squared log-Euclidean distances.
pub fn median_lem_sq(points: &[SpdMatrix]) -> Result<f64> {
    median_of_upper_triangle(&lem_sq_matrix(points)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvPoint {
    pub factor: f64,
    pub gamma: f64,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    /// Winning multiplier of the median-distance scale.
    pub factor: f64,
    /// Winning kernel bandwidth.
    pub gamma: f64,
    pub median_lem_sq: f64,
    pub fold_count: usize,
    /// Held-out accuracy of the winning bandwidth.
    pub mean_accuracy: f64,
    pub grid: Vec<CvPoint>,
}

/// Grouped K-fold bandwidth selection. Sample t goes to fold
/// `groups[t] % folds`, so samples sharing a group id never straddle the
/// train/test split. Candidate bandwidths are `factor * sqrt(median pairwise
/// squared distance)`; the first factor reaching the best held-out accuracy
/// wins.
pub fn cross_validate_bandwidth(
    set: &TrainSet,
    base: &SvmHyper,
    groups: &[usize],
    folds: usize,
    factors: &[f64],
) -> Result<CvReport> {
    base.validate()?;
    if groups.len() != set.len() {
        return Err(Error::DimensionMismatch { expected: set.len(), actual: groups.len() });
    }
    if folds < 2 {
        return Err(Error::validation("need at least two folds"));
    }
    if factors.is_empty() || factors.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(Error::validation("factors must be positive and finite"));
    }

    let lem = lem_sq_matrix(set.points())?;
    let med = median_of_upper_triangle(&lem)?;
    if !(med > 0.0) {
        return Err(Error::Numerical("pairwise distances are all zero".into()));
    }

    let n = set.len();
    let mut grid = Vec::with_capacity(factors.len());
    for &factor in factors {
        let gamma = factor * med.sqrt();
        let params = KernelParams { gamma_kernel: gamma, ..base.kernel };
        let full = gram_from_lem(&lem, &params)?;

        let mut correct = 0usize;
        let mut tested = 0usize;
        for fold in 0..folds {
            let train_idx: Vec<usize> = (0..n).filter(|&t| groups[t] % folds != fold).collect();
            let test_idx: Vec<usize> = (0..n).filter(|&t| groups[t] % folds == fold).collect();
            if test_idx.is_empty() || train_idx.is_empty() {
                continue;
            }
            let labels = set.labels();
            let pos = train_idx.iter().filter(|&&t| labels[t] == 1).count();
            let neg = train_idx.len() - pos;
            if pos == 0 || neg == 0 {
                let constant = if pos > 0 { 1i8 } else { -1i8 };
                correct += test_idx.iter().filter(|&&t| labels[t] == constant).count();
                tested += test_idx.len();
                continue;
            }

            let m = train_idx.len();
            let mut sub = SymMatrix::zeros(m);
            for a in 0..m {
                for b in a..m {
                    sub.set_sym(a, b, full.get(train_idx[a], train_idx[b]));
                }
            }
            let y: Vec<f64> = train_idx.iter().map(|&t| labels[t] as f64).collect();
            let (c_pos, c_neg) = base.class_boxes(pos, neg);
            let box_c: Vec<f64> =
                y.iter().map(|&yy| if yy > 0.0 { c_pos } else { c_neg }).collect();
            let sol = solve_smo(&sub, &y, &box_c, base.tol, base.max_passes);

            for &t in &test_idx {
                let mut f = sol.bias;
                for (a, &tr) in train_idx.iter().enumerate() {
                    if sol.alphas[a] > 0.0 {
                        f += sol.alphas[a] * y[a] * full.get(tr, t);
                    }
                }
                let predicted = if f >= 0.0 { 1i8 } else { -1i8 };
                if predicted == labels[t] {
                    correct += 1;
                }
                tested += 1;
            }
        }
        let accuracy = if tested == 0 { 0.0 } else { correct as f64 / tested as f64 };
        grid.push(CvPoint { factor, gamma, mean_accuracy: accuracy });
    }

    let best = grid
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.mean_accuracy.total_cmp(&b.mean_accuracy).then(ib.cmp(ia))
        })
        .map(|(_, p)| p.clone())
        .expect("grid is nonempty");
    Ok(CvReport {
        factor: best.factor,
        gamma: best.gamma,
        median_lem_sq: med,
        fold_count: folds,
        mean_accuracy: best.mean_accuracy,
        grid,
    })
}

/// Bandwidth selection followed by a full-set fit at the winning bandwidth.
pub fn train_with_cv(
    set: &TrainSet,
    base: &SvmHyper,
    groups: &[usize],
    folds: usize,
    factors: &[f64],
) -> Result<(SvmModel, CvReport)> {
    let cv = cross_validate_bandwidth(set, base, groups, folds, factors)?;
    let hyper = SvmHyper {
        kernel: KernelParams { gamma_kernel: cv.gamma, ..base.kernel },
        ..base.clone()
    };
    let model = train(set, &hyper)?;
    Ok((model, cv))
}
