//! Rank-revealing primitives shared by every reduction: thresholded SVD rank,
//! orthogonal row/column compressions and generalized eigenvalues.

mod qz;

use faer::Mat;
use nalgebra::{Complex, DMatrix, Scalar};

pub use qz::{generalized_eigenvalues, GeneralizedEigenvalues};

pub(crate) fn to_faer<T: Scalar + Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Element types whose singular values can be computed.
pub trait SvdScalar: Scalar + Copy {
    /// Singular values in decreasing order.
    fn singular_values(m: &DMatrix<Self>) -> Vec<f64>;
}

impl SvdScalar for f64 {
    fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
        to_faer(m).singular_values().expect("SVD did not converge")
    }
}

impl SvdScalar for Complex<f64> {
    fn singular_values(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
        to_faer(m).singular_values().expect("SVD did not converge")
    }
}

/// Singular values in decreasing order (empty for an empty matrix).
pub fn singular_values<T: SvdScalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    T::singular_values(m)
}

/// Threshold used for every rank decision.
///
/// A positive value is an absolute threshold on singular values. Zero selects
/// the default rule `max(rows, cols) * ε * σ₁`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(tol: f64) -> Self {
        assert!(tol >= 0.0 && tol.is_finite(), "tolerance must be nonnegative, got {tol}");
        Tolerance(tol)
    }

    /// The default machine-precision rule.
    pub fn default_rule() -> Self {
        Tolerance(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_default(self) -> bool {
        self.0 == 0.0
    }

    /// Effective threshold for a `rows × cols` matrix with largest singular value `sigma_max`.
    pub fn threshold(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        if self.0 > 0.0 {
            self.0
        } else if sigma_max == 0.0 {
            0.0
        } else {
            rows.max(cols) as f64 * f64::EPSILON * sigma_max
        }
    }
}

impl From<f64> for Tolerance {
    fn from(tol: f64) -> Self {
        Tolerance::new(tol)
    }
}

/// Numerical rank: number of singular values strictly above the effective threshold.
pub fn rank_svd<T: SvdScalar>(m: &DMatrix<T>, tol: Tolerance) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let thr = tol.threshold(rows, cols, sv[0]);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Result of an orthogonal row or column compression.
#[derive(Debug, Clone)]
pub struct Compression {
    /// The orthogonal factor (`Q` for rows, `Z` for columns).
    pub transform: DMatrix<f64>,
    /// `QᵀM` with rows past `rank` zeroed, or `MZ` with the leading
    /// `cols - rank` columns zeroed.
    pub compressed: DMatrix<f64>,
    pub rank: usize,
}

/// SVD with singular values in decreasing order. Returns `(U, σ, V)`; both
/// factors are square when `full_u` or `full_v` is set, thin otherwise.
pub(crate) fn sorted_svd(m: &DMatrix<f64>, full_u: bool, full_v: bool) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let fm = to_faer(m);
    let svd = if full_u || full_v { fm.svd() } else { fm.thin_svd() }.expect("SVD did not converge");
    let s = svd.S().column_vector();
    let sv = (0..s.nrows()).map(|i| s[i]).collect();
    (from_faer(svd.U()), sv, from_faer(svd.V()))
}

/// Orthogonal row compression: `QᵀM = [M₁; 0]` with `M₁` of full row rank.
pub fn row_compress(m: &DMatrix<f64>, tol: Tolerance) -> Compression {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Compression { transform: DMatrix::identity(rows, rows), compressed: m.clone(), rank: 0 };
    }
    let (u, sv, _) = sorted_svd(m, true, false);
    let thr = tol.threshold(rows, cols, sv[0]);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    let mut compressed = u.transpose() * m;
    compressed.rows_mut(rank, rows - rank).fill(0.0);
    Compression { transform: u, compressed, rank }
}

/// Orthogonal column compression: `MZ = [0, M₂]` with `M₂` of full column rank.
pub fn col_compress(m: &DMatrix<f64>, tol: Tolerance) -> Compression {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Compression { transform: DMatrix::identity(cols, cols), compressed: m.clone(), rank: 0 };
    }
    let (_, sv, v) = sorted_svd(m, false, true);
    let thr = tol.threshold(rows, cols, sv[0]);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    // Null-space directions first, range directions last (reversed so the
    // dominant direction ends up in the final column).
    let z = DMatrix::from_fn(cols, cols, |i, j| v[(i, cols - 1 - j)]);
    let mut compressed = m * &z;
    compressed.columns_mut(0, cols - rank).fill(0.0);
    Compression { transform: z, compressed, rank }
}

/// Orthogonal `Z` with `XZ` upper triangular (an RQ factorization of a square `X`).
pub(crate) fn rq_transform(x: &DMatrix<f64>) -> DMatrix<f64> {
    let k = x.nrows();
    debug_assert_eq!(k, x.ncols());
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    // XᵀP = Q₁R₁ gives X·(Q₁P) = P·R₁ᵀ·P, which is upper triangular.
    let f = DMatrix::from_fn(k, k, |i, j| x[(k - 1 - j, i)]);
    let q1 = f.qr().q();
    DMatrix::from_fn(k, k, |i, j| q1[(i, k - 1 - j)])
}

/// Sets the strictly lower triangle of a square block to zero.
pub(crate) fn clear_lower(m: &mut DMatrix<f64>, start: usize) {
    let n = m.nrows();
    for j in start..n {
        for i in (j + 1)..n {
            m[(i, j)] = 0.0;
        }
    }
}

/// Frobenius norm of `QᵀQ − I`.
pub fn orthogonality_residual(q: &DMatrix<f64>) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(n, n)).norm()
}
