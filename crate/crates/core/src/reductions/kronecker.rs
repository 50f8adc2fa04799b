use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::kernels::{col_compress, row_compress, Tolerance};
use crate::system::DescriptorSystem;

/// A rectangular pencil `M − λN`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPencil {
    m: DMatrix<f64>,
    n: DMatrix<f64>,
}

impl LinearPencil {
    pub fn new(m: DMatrix<f64>, n: DMatrix<f64>) -> Result<Self> {
        if m.shape() != n.shape() {
            return Err(Error::Dimension(format!("pencil parts differ in shape: {:?} vs {:?}", m.shape(), n.shape())));
        }
        Ok(LinearPencil { m, n })
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n(&self) -> &DMatrix<f64> {
        &self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        self.m.shape()
    }

    /// The reversed pencil `N − μM`, with `μ = 1/λ`. It has the same normal
    /// rank and Kronecker indices; its eigenvalues are the reciprocals.
    pub fn reversed(&self) -> LinearPencil {
        LinearPencil { m: self.n.clone(), n: self.m.clone() }
    }

    /// `M − λN` at a real point.
    pub fn at_real(&self, lambda: f64) -> DMatrix<f64> {
        &self.m - &self.n * lambda
    }

    /// `M − λN` at a complex point.
    pub fn at(&self, lambda: Complex<f64>) -> DMatrix<Complex<f64>> {
        self.m.map(|x| Complex::new(x, 0.0)) - self.n.map(|x| Complex::new(x, 0.0)) * lambda
    }
}

/// System matrix pencil `[[A − λE, B], [C, D]]`, of size `(n+p) × (n+m)`.
pub fn system_pencil(sys: &DescriptorSystem) -> LinearPencil {
    let (n, m, p) = (sys.order(), sys.inputs(), sys.outputs());
    let mut big_m = DMatrix::zeros(n + p, n + m);
    big_m.view_mut((0, 0), (n, n)).copy_from(sys.a());
    big_m.view_mut((0, n), (n, m)).copy_from(sys.b());
    big_m.view_mut((n, 0), (p, n)).copy_from(sys.c());
    big_m.view_mut((n, n), (p, m)).copy_from(sys.d());
    let mut big_n = DMatrix::zeros(n + p, n + m);
    big_n.view_mut((0, 0), (n, n)).copy_from(sys.e());
    LinearPencil { m: big_m, n: big_n }
}

/// Block-triangular Kronecker-like form `Qᵀ(M − λN)Z`.
///
/// The leading `m_r × n_r` block has full row normal rank (right Kronecker
/// structure and infinite eigenvalues), the middle `n_reg × n_reg` block is
/// regular and the trailing `m_l × n_l` block has full column normal rank.
#[derive(Debug, Clone)]
pub struct KroneckerStructure {
    pub m_r: usize,
    pub n_r: usize,
    pub n_reg: usize,
    pub m_l: usize,
    pub n_l: usize,
    pub q: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// Reduced `M`.
    pub m_tilde: DMatrix<f64>,
    /// Reduced `N`.
    pub n_tilde: DMatrix<f64>,
}

impl KroneckerStructure {
    pub fn normal_rank(&self) -> usize {
        self.m_r + self.n_reg + self.n_l
    }
}

pub fn pencil_normal_rank(structure: &KroneckerStructure) -> usize {
    structure.normal_rank()
}

struct Work {
    m: DMatrix<f64>,
    n: DMatrix<f64>,
    q: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl Work {
    /// Left-multiplies rows `[r0, r0+k)` by `Uᵀ` (columns from `c0` on) and accumulates `Q`.
    fn rows(&mut self, r0: usize, u: &DMatrix<f64>, c0: usize) {
        let k = u.nrows();
        let w = self.m.ncols() - c0;
        let ut = u.transpose();
        let mm = &ut * self.m.view((r0, c0), (k, w));
        self.m.view_mut((r0, c0), (k, w)).copy_from(&mm);
        let nn = &ut * self.n.view((r0, c0), (k, w));
        self.n.view_mut((r0, c0), (k, w)).copy_from(&nn);
        let qq = self.q.columns(r0, k) * u;
        self.q.columns_mut(r0, k).copy_from(&qq);
    }

    /// Right-multiplies columns `[c0, c0+k)` by `Z` (all rows) and accumulates `Z`.
    fn cols(&mut self, c0: usize, z: &DMatrix<f64>) {
        let k = z.nrows();
        let mm = self.m.columns(c0, k) * z;
        self.m.columns_mut(c0, k).copy_from(&mm);
        let nn = self.n.columns(c0, k) * z;
        self.n.columns_mut(c0, k).copy_from(&nn);
        let zz = self.z.columns(c0, k) * z;
        self.z.columns_mut(c0, k).copy_from(&zz);
    }
}

/// Reduces a pencil to Kronecker-like form by SVD-based compressions.
///
/// The right structure is split off from the top-left through the column
/// null space of `N`; the left structure is then split off from the bottom-right
/// through the row null space of what remains. The remaining middle block must
/// be square, otherwise the rank decisions were inconsistent.
pub fn kronecker_like(pencil: &LinearPencil, tol: Tolerance) -> Result<KroneckerStructure> {
    let (rows, cols) = pencil.shape();
    let mut w = Work {
        m: pencil.m.clone(),
        n: pencil.n.clone(),
        q: DMatrix::identity(rows, rows),
        z: DMatrix::identity(cols, cols),
    };

    // right structure
    let (mut r0, mut c0) = (0, 0);
    while c0 < cols {
        let ns = w.n.view((r0, c0), (rows - r0, cols - c0)).clone_owned();
        let comp = col_compress(&ns, tol);
        let kernel = (cols - c0) - comp.rank;
        if kernel == 0 {
            break;
        }
        w.cols(c0, &comp.transform);
        w.n.view_mut((r0, c0), (rows - r0, kernel)).fill(0.0);
        let m1 = w.m.view((r0, c0), (rows - r0, kernel)).clone_owned();
        let comp = row_compress(&m1, tol);
        w.rows(r0, &comp.transform, c0);
        w.m.view_mut((r0, c0), (rows - r0, kernel)).copy_from(&comp.compressed);
        r0 += comp.rank;
        c0 += kernel;
    }
    let (m_r, n_r) = (r0, c0);

    // left structure
    let (mut r1, mut c1) = (rows, cols);
    while r1 > r0 {
        let h = r1 - r0;
        let ns = w.n.view((r0, c0), (h, c1 - c0)).clone_owned();
        let comp = row_compress(&ns, tol);
        let kernel = h - comp.rank;
        if kernel == 0 {
            break;
        }
        w.rows(r0, &comp.transform, c0);
        w.n.view_mut((r1 - kernel, c0), (kernel, c1 - c0)).fill(0.0);
        let m2 = w.m.view((r1 - kernel, c0), (kernel, c1 - c0)).clone_owned();
        let comp = col_compress(&m2, tol);
        w.cols(c0, &comp.transform);
        w.m.view_mut((r1 - kernel, c0), (kernel, c1 - c0)).copy_from(&comp.compressed);
        r1 -= kernel;
        c1 -= comp.rank;
    }
    let (m_l, n_l) = (rows - r1, cols - c1);

    let (reg_rows, reg_cols) = (r1 - m_r, c1 - n_r);
    if reg_rows != reg_cols {
        return Err(Error::RankDecision(format!(
            "regular block is {reg_rows}×{reg_cols} (m_r={m_r}, n_r={n_r}, m_l={m_l}, n_l={n_l})"
        )));
    }
    Ok(KroneckerStructure { m_r, n_r, n_reg: reg_rows, m_l, n_l, q: w.q, z: w.z, m_tilde: w.m, n_tilde: w.n })
}
