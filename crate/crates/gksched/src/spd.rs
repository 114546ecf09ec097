//! Symmetric positive definite matrices, the log-Euclidean metric, and the
//! Gaussian kernel derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Dense symmetric matrix, full square row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries; both triangles must agree exactly.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: entries.len() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("matrix entries must be finite"));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::validation(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, entries: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = scale;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Sets entry (i, j) and its mirror (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
        self.entries[j * self.dim + i] = value;
    }

    /// Adds `value` to entry (i, j) and, when off-diagonal, to its mirror.
    pub fn add_sym(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] += value;
        if i != j {
            self.entries[j * self.dim + i] += value;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: other.dim });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymMatrix { dim: self.dim, entries })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: other.dim });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SymMatrix { dim: self.dim, entries })
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, entries: self.entries.iter().map(|x| x * factor).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Full eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Converges when the off-diagonal Frobenius mass drops below 1e-12 of the
    /// diagonal mass; at most 100 sweeps. Eigenvalues are returned descending.
    pub fn sym_eig(&self) -> Result<SymEigen> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }

        let mut converged = false;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            let mut diag = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x = a[i * n + j] * a[i * n + j];
                    if i == j {
                        diag += x;
                    } else {
                        off += x;
                    }
                }
            }
            if off.sqrt() <= JACOBI_REL_TOL * diag.sqrt() {
                converged = true;
                break;
            }

            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;

                    a[p * n + p] -= h;
                    a[q * n + q] += h;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for j in 0..n {
                        if j == p || j == q {
                            continue;
                        }
                        let ajp = a[j * n + p];
                        let ajq = a[j * n + q];
                        let njp = ajp - s * (ajq + tau * ajp);
                        let njq = ajq + s * (ajp - tau * ajq);
                        a[j * n + p] = njp;
                        a[p * n + j] = njp;
                        a[j * n + q] = njq;
                        a[q * n + j] = njq;
                    }
                    for j in 0..n {
                        let vjp = v[j * n + p];
                        let vjq = v[j * n + q];
                        v[j * n + p] = vjp - s * (vjq + tau * vjp);
                        v[j * n + q] = vjq + s * (vjp - tau * vjq);
                    }
                }
            }
        }
        if !converged {
            return Err(Error::Numerical("jacobi eigensolver did not converge".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
        let values: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
        let mut vectors = vec![0.0; n * n];
        for (col, &k) in order.iter().enumerate() {
            for row in 0..n {
                vectors[row * n + col] = v[row * n + k];
            }
        }
        Ok(SymEigen { dim: n, values, vectors })
    }

    /// Applies `f` to the eigenvalues and reassembles in the same eigenbasis.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let eig = self.sym_eig()?;
        let mapped: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
        Ok(eig.assemble(&mapped))
    }
}

/// Eigendecomposition of a symmetric matrix: column k of `vectors` pairs with
/// `values[k]`, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    /// U diag(values) U^T.
    pub fn reconstruct(&self) -> SymMatrix {
        self.assemble(&self.values)
    }

    fn assemble(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = 0.0;
                for k in 0..n {
                    sum += self.vectors[i * n + k] * values[k] * self.vectors[j * n + k];
                }
                entries[i * n + j] = sum;
                entries[j * n + i] = sum;
            }
        }
        SymMatrix { dim: n, entries }
    }
}

/// Symmetric positive definite matrix with its matrix logarithm cached at
/// construction, so metric and kernel evaluations never re-decompose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrix", into = "SymMatrix")]
pub struct SpdMatrix {
    sym: SymMatrix,
    log: SymMatrix,
    min_eigenvalue: f64,
}

impl SpdMatrix {
    pub fn new(sym: SymMatrix) -> Result<Self> {
        let eig = sym.sym_eig()?;
        let min = *eig.values.last().expect("non-empty spectrum");
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(min));
        }
        let logs: Vec<f64> = eig.values.iter().map(|&x| x.ln()).collect();
        let log = eig.assemble(&logs);
        Ok(SpdMatrix { sym, log, min_eigenvalue: min })
    }

    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(dim, entries)?)
    }

    pub fn dim(&self) -> usize {
        self.sym.dim
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn entries(&self) -> &[f64] {
        self.sym.entries()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sym.get(i, j)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// The cached matrix logarithm.
    pub fn log(&self) -> &SymMatrix {
        &self.log
    }
}

impl TryFrom<SymMatrix> for SpdMatrix {
    type Error = Error;

    fn try_from(sym: SymMatrix) -> Result<Self> {
        SpdMatrix::new(sym)
    }
}

impl From<SpdMatrix> for SymMatrix {
    fn from(spd: SpdMatrix) -> SymMatrix {
        spd.sym
    }
}

/// Matrix logarithm of an SPD matrix.
pub fn spd_log(s: &SpdMatrix) -> SymMatrix {
    s.log().clone()
}

/// Log-Euclidean metric: squared Frobenius norm of log(a) - log(b).
pub fn lem_sq(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    let la = a.log().entries();
    let lb = b.log().entries();
    let mut sum = 0.0;
    for (x, y) in la.iter().zip(lb) {
        let d = x - y;
        sum += d * d;
    }
    Ok(sum)
}

/// Exponent applied to the log-Euclidean distance inside the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelExponent {
    /// exp(-lem_sq / gamma^2), the Gaussian kernel on the log-matrix distance.
    #[default]
    SquaredNorm,
    /// exp(-lem_sq^2 / gamma^2), squaring the already-squared norm.
    LiteralFourthPower,
}

/// Gaussian log-Euclidean kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma_kernel: f64,
    #[serde(default)]
    pub exponent: KernelExponent,
}

impl KernelParams {
    pub fn new(gamma_kernel: f64) -> Result<Self> {
        let p = KernelParams { gamma_kernel, exponent: KernelExponent::SquaredNorm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_kernel > 0.0) || !self.gamma_kernel.is_finite() {
            return Err(Error::validation("gamma_kernel must be positive and finite"));
        }
        Ok(())
    }

    fn apply(&self, lem_sq: f64) -> f64 {
        let z = match self.exponent {
            KernelExponent::SquaredNorm => lem_sq,
            KernelExponent::LiteralFourthPower => lem_sq * lem_sq,
        };
        (-z / (self.gamma_kernel * self.gamma_kernel)).exp()
    }
}

/// Kernel value for a pair of SPD matrices.
pub fn kernel(a: &SpdMatrix, b: &SpdMatrix, params: &KernelParams) -> Result<f64> {
    params.validate()?;
    Ok(params.apply(lem_sq(a, b)?))
}

/// Pairwise squared log-Euclidean distances.
pub fn lem_sq_matrix(points: &[SpdMatrix]) -> Result<SymMatrix> {
    if points.is_empty() {
        return Err(Error::validation("empty point list"));
    }
    let n = points.len();
    let mut d = SymMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            d.set_sym(i, j, lem_sq(&points[i], &points[j])?);
        }
    }
    Ok(d)
}

/// Elementwise kernel applied to a distance matrix; unit diagonal.
pub fn gram_from_lem(distances: &SymMatrix, params: &KernelParams) -> Result<SymMatrix> {
    params.validate()?;
    let n = distances.dim();
    let mut g = SymMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_sym(i, j, params.apply(distances.get(i, j)));
        }
    }
    Ok(g)
}

/// Gram matrix of the Gaussian log-Euclidean kernel over a point list.
pub fn gram(points: &[SpdMatrix], params: &KernelParams) -> Result<SymMatrix> {
    gram_from_lem(&lem_sq_matrix(points)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random orthogonal matrix by Gram-Schmidt on a random Gaussian-ish matrix.
    pub(crate) fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
            let mut ok = true;
            for _ in 0..dim {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for c in &cols {
                    let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(c) {
                        *x -= dot * y;
                    }
                }
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    ok = false;
                    break;
                }
                for x in v.iter_mut() {
                    *x /= norm;
                }
                cols.push(v);
            }
            if ok {
                let mut q = vec![0.0; dim * dim];
                for (col, v) in cols.iter().enumerate() {
                    for row in 0..dim {
                        q[row * dim + col] = v[row];
                    }
                }
                return q;
            }
        }
    }

    /// Q diag(vals) Q^T assembled by plain loops.
    pub(crate) fn assemble_from(dim: usize, q: &[f64], vals: &[f64]) -> SymMatrix {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut sum = 0.0;
                for k in 0..dim {
                    sum += q[i * dim + k] * vals[k] * q[j * dim + k];
                }
                entries[i * dim + j] = sum;
            }
        }
        // force exact symmetry, assembly order may differ across triangles
        for i in 0..dim {
            for j in 0..i {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        SymMatrix::new(dim, entries).unwrap()
    }

    fn random_spd_with_log(
        dim: usize,
        rng: &mut ChaCha8Rng,
        log_min: f64,
        log_max: f64,
    ) -> (SpdMatrix, SymMatrix) {
        let q = random_orthogonal(dim, rng);
        let logs: Vec<f64> = (0..dim).map(|_| rng.gen_range(log_min..log_max)).collect();
        let vals: Vec<f64> = logs.iter().map(|&x| x.exp()).collect();
        let s = assemble_from(dim, &q, &vals);
        let expected_log = assemble_from(dim, &q, &logs);
        (SpdMatrix::new(s).unwrap(), expected_log)
    }

    #[test]
    fn rejects_bad_shapes_and_asymmetry() {
        assert!(SymMatrix::new(0, vec![]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, f64::NAN, f64::NAN, 1.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 2.0, 4.0]).is_ok());
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let eig = SymMatrix::identity(4).sym_eig().unwrap();
        for &v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }

        let mut d = SymMatrix::zeros(2);
        d.set_sym(0, 0, 1.0);
        d.set_sym(1, 1, 3.0);
        let eig = d.sym_eig().unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let dim = 6;
            let mut m = SymMatrix::zeros(dim);
            for i in 0..dim {
                for j in i..dim {
                    m.set_sym(i, j, rng.gen_range(-5.0..5.0));
                }
            }
            let eig = m.sym_eig().unwrap();
            let back = eig.reconstruct();
            let err = m.sub(&back).unwrap().frobenius_norm() / m.frobenius_norm().max(1.0);
            assert!(err < 1e-12, "reconstruction error {err}");

            // descending order
            for w in eig.values.windows(2) {
                assert!(w[0] >= w[1]);
            }

            // orthonormal eigenvectors
            let n = dim;
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n)
                        .map(|r| eig.vectors[r * n + a] * eig.vectors[r * n + b])
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn eig_matches_known_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let dim = 5;
            let q = random_orthogonal(dim, &mut rng);
            let mut vals: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..50.0)).collect();
            vals.sort_by(|a, b| b.total_cmp(a));
            let m = assemble_from(dim, &q, &vals);
            let eig = m.sym_eig().unwrap();
            for (got, want) in eig.values.iter().zip(&vals) {
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn spd_rejects_indefinite_and_singular() {
        // eigenvalues 3 and -1
        let m = SymMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(SpdMatrix::new(m), Err(Error::NotPositiveDefinite(_))));
        let z = SymMatrix::zeros(3);
        assert!(SpdMatrix::new(z).is_err());
    }

    #[test]
    fn log_of_identity_scales() {
        let s = SpdMatrix::new(SymMatrix::identity(4)).unwrap();
        assert!(s.log().frobenius_norm() < 1e-12);

        let e = SpdMatrix::new(SymMatrix::scaled_identity(3, std::f64::consts::E)).unwrap();
        let diff = e.log().sub(&SymMatrix::identity(3)).unwrap();
        assert!(diff.frobenius_norm() < 1e-12);
    }

    #[test]
    fn log_matches_known_value_and_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let (s, expected_log) = random_spd_with_log(6, &mut rng, -3.0, 3.0);
            let err = s.log().sub(&expected_log).unwrap().frobenius_norm();
            assert!(err < 1e-9, "log error {err}");

            let back = s.log().map_eigenvalues(f64::exp).unwrap();
            let rel = s.sym().sub(&back).unwrap().frobenius_norm() / s.sym().frobenius_norm();
            assert!(rel < 1e-8, "exp(log) roundtrip error {rel}");
        }
    }

    #[test]
    fn lem_identity_of_indiscernibles_and_known_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let (s, _) = random_spd_with_log(5, &mut rng, -2.0, 2.0);
        assert_eq!(lem_sq(&s, &s).unwrap(), 0.0);

        let i4 = SpdMatrix::new(SymMatrix::identity(4)).unwrap();
        let e4 = SpdMatrix::new(SymMatrix::scaled_identity(4, std::f64::consts::E)).unwrap();
        // log(e*I) - log(I) = I, squared Frobenius norm 4
        assert!((lem_sq(&i4, &e4).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lem_matches_scalar_reference_on_known_logs() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let (a, la) = random_spd_with_log(6, &mut rng, -2.0, 2.0);
            let (b, lb) = random_spd_with_log(6, &mut rng, -2.0, 2.0);
            let reference: f64 = la
                .entries()
                .iter()
                .zip(lb.entries())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let got = lem_sq(&a, &b).unwrap();
            assert!(
                (got - reference).abs() < 1e-8 * reference.max(1.0),
                "got {got}, reference {reference}"
            );
        }
    }

    #[test]
    fn lem_metric_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let (a, _) = random_spd_with_log(4, &mut rng, -2.0, 2.0);
            let (b, _) = random_spd_with_log(4, &mut rng, -2.0, 2.0);
            let (c, _) = random_spd_with_log(4, &mut rng, -2.0, 2.0);
            let dab = lem_sq(&a, &b).unwrap().sqrt();
            let dba = lem_sq(&b, &a).unwrap().sqrt();
            let dac = lem_sq(&a, &c).unwrap().sqrt();
            let dcb = lem_sq(&c, &b).unwrap().sqrt();
            assert!((dab - dba).abs() < 1e-12);
            assert!(dab >= 0.0);
            assert!(dab <= dac + dcb + 1e-9);
        }
    }

    #[test]
    fn lem_dimension_mismatch() {
        let a = SpdMatrix::new(SymMatrix::identity(3)).unwrap();
        let b = SpdMatrix::new(SymMatrix::identity(4)).unwrap();
        assert!(matches!(lem_sq(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kernel_unit_diagonal_range_and_known_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let params = KernelParams::new(2.0).unwrap();
        let i4 = SpdMatrix::new(SymMatrix::identity(4)).unwrap();
        let e4 = SpdMatrix::new(SymMatrix::scaled_identity(4, std::f64::consts::E)).unwrap();
        // lem_sq = 4, gamma^2 = 4
        let got = kernel(&i4, &e4, &params).unwrap();
        assert!((got - 0.36787944117144233).abs() < 1e-12);

        for _ in 0..20 {
            let (a, _) = random_spd_with_log(4, &mut rng, -2.0, 2.0);
            let (b, _) = random_spd_with_log(4, &mut rng, -2.0, 2.0);
            let k = kernel(&a, &b, &params).unwrap();
            assert!(k > 0.0 && k <= 1.0);
            assert_eq!(k, kernel(&b, &a, &params).unwrap());
            assert_eq!(kernel(&a, &a, &params).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_rejects_bad_gamma() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(-1.0).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
    }

    #[test]
    fn fourth_power_exponent_squares_the_distance() {
        let i4 = SpdMatrix::new(SymMatrix::identity(4)).unwrap();
        let e4 = SpdMatrix::new(SymMatrix::scaled_identity(4, std::f64::consts::E)).unwrap();
        let mut params = KernelParams::new(4.0).unwrap();
        params.exponent = KernelExponent::LiteralFourthPower;
        // lem_sq = 4, z = 16, gamma^2 = 16
        let got = kernel(&i4, &e4, &params).unwrap();
        assert!((got - 0.36787944117144233).abs() < 1e-12);
    }

    /// Cholesky with no pivoting; returns false if a pivot goes nonpositive.
    fn cholesky_ok(m: &SymMatrix) -> bool {
        let n = m.dim();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return false;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        true
    }

    #[test]
    fn gram_psd_symmetric_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let points: Vec<SpdMatrix> = (0..12)
            .map(|_| random_spd_with_log(4, &mut rng, -2.0, 2.0).0)
            .collect();
        for gamma in [0.5, 1.0, 2.0, 10.0] {
            let params = KernelParams::new(gamma).unwrap();
            let g = gram(&points, &params).unwrap();
            for i in 0..g.dim() {
                assert_eq!(g.get(i, i), 1.0);
            }
            let eig = g.sym_eig().unwrap();
            let max = eig.values[0];
            let min = *eig.values.last().unwrap();
            assert!(min >= -1e-8 * max, "gram min eig {min}");

            // independent PSD check: Cholesky after a tiny diagonal lift
            let lifted = g.add(&SymMatrix::scaled_identity(g.dim(), 1e-8)).unwrap();
            assert!(cholesky_ok(&lifted));
        }
    }

    #[test]
    fn gram_degenerate_cases() {
        let params = KernelParams::new(1.0).unwrap();
        let single = vec![SpdMatrix::new(SymMatrix::identity(3)).unwrap()];
        let g = gram(&single, &params).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), 1.0);

        let twin = vec![
            SpdMatrix::new(SymMatrix::scaled_identity(3, 2.0)).unwrap(),
            SpdMatrix::new(SymMatrix::scaled_identity(3, 2.0)).unwrap(),
        ];
        let g = gram(&twin, &params).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.get(i, j) - 1.0).abs() < 1e-15);
            }
        }

        assert!(gram(&[], &params).is_err());
    }

    #[test]
    fn spd_serde_roundtrip_preserves_log() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let (s, _) = random_spd_with_log(5, &mut rng, -2.0, 2.0);
        let json = serde_json::to_string(&s).unwrap();
        let back: SpdMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(s.entries(), back.entries());
        assert_eq!(s.log().entries(), back.log().entries());
    }
}
