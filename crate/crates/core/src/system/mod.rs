//! Descriptor realizations `G(λ) = C(λE − A)⁻¹B + D` and their algebra.

mod file;

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{bilinear, BilinearMap};
use crate::error::{Error, Result};
use crate::kernels::{rank_svd, Tolerance};

pub use file::{read_system, read_system_file, write_system, write_system_file};

/// Owned realization matrices `(A, E, B, C, D)` and the timing.
pub type Parts = (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, Timing);

/// Frequency variable of the system: `s` (Laplace) or `z` (Z-transform).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timing {
    Continuous,
    Discrete,
}

impl fmt::Display for Timing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Timing::Continuous => "continuous",
            Timing::Discrete => "discrete",
        })
    }
}

/// A descriptor realization `(A − λE, B, C, D)` of order `n` with `m` inputs and `p` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSystem {
    a: DMatrix<f64>,
    e: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    timing: Timing,
}

impl DescriptorSystem {
    /// Validates dimensions and builds the realization. Regularity of `A − λE`
    /// is not checked here; see [`DescriptorSystem::is_regular`].
    pub fn new(
        a: DMatrix<f64>,
        e: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        timing: Timing,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A must be square, got {}×{}", n, a.ncols())));
        }
        if e.shape() != (n, n) {
            return Err(Error::Dimension(format!("E must be {n}×{n}, got {}×{}", e.nrows(), e.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B row count {} ≠ n = {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C column count {} ≠ n = {n}", c.ncols())));
        }
        let (p, m) = (c.nrows(), b.ncols());
        if d.shape() != (p, m) {
            return Err(Error::Dimension(format!("D must be {p}×{m}, got {}×{}", d.nrows(), d.ncols())));
        }
        Ok(DescriptorSystem { a, e, b, c, d, timing })
    }

    /// Standard state-space system with `E = I`.
    pub fn standard(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        timing: Timing,
    ) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, DMatrix::identity(n, n), b, c, d, timing)
    }

    /// Order-zero system realizing the constant matrix `D`.
    pub fn static_gain(d: DMatrix<f64>, timing: Timing) -> Self {
        let (p, m) = d.shape();
        DescriptorSystem {
            a: DMatrix::zeros(0, 0),
            e: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, m),
            c: DMatrix::zeros(p, 0),
            d,
            timing,
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn timing(&self) -> Timing {
        self.timing
    }

    /// State dimension `n`.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    /// Number of inputs `m`.
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    /// Number of outputs `p`.
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `(A, E, B, C, D, timing)`.
    pub fn into_parts(self) -> Parts {
        (self.a, self.e, self.b, self.c, self.d, self.timing)
    }

    /// Randomized regularity test: `det(A − λ₀E)` is a polynomial in `λ₀`, so it
    /// is either identically zero or nonzero at almost every sample. The pencil
    /// is declared regular if `A − λ₀E` has full rank at any of three real samples.
    pub fn is_regular(&self, tol: Tolerance) -> bool {
        let n = self.order();
        if n == 0 {
            return true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let scale = (self.a.norm() / self.e.norm().max(f64::MIN_POSITIVE)).clamp(1e-3, 1e3);
        (0..3).any(|_| {
            let lambda = scale * rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            rank_svd(&(&self.a - &self.e * lambda), tol) == n
        })
    }

    /// Realization of `G₁(λ) − G₂(λ)` with block-diagonal pole pencil.
    pub fn subtract(&self, other: &DescriptorSystem) -> Result<DescriptorSystem> {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return Err(Error::Incompatible(format!(
                "cannot subtract a {}×{} system from a {}×{} system",
                other.outputs(),
                other.inputs(),
                self.outputs(),
                self.inputs()
            )));
        }
        if self.timing != other.timing {
            return Err(Error::Incompatible(format!("timing {} vs {}", self.timing, other.timing)));
        }
        let (n1, n2) = (self.order(), other.order());
        let n = n1 + n2;
        let (p, m) = (self.outputs(), self.inputs());
        let mut a = DMatrix::zeros(n, n);
        let mut e = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        e.view_mut((0, 0), (n1, n1)).copy_from(&self.e);
        e.view_mut((n1, n1), (n2, n2)).copy_from(&other.e);
        let mut b = DMatrix::zeros(n, m);
        b.view_mut((0, 0), (n1, m)).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, m)).copy_from(&other.b);
        let mut c = DMatrix::zeros(p, n);
        c.view_mut((0, 0), (p, n1)).copy_from(&self.c);
        c.view_mut((0, n1), (p, n2)).copy_from(&(-&other.c));
        let d = &self.d - &other.d;
        DescriptorSystem::new(a, e, b, c, d, self.timing)
    }

    /// Realization `(Aᵀ − λEᵀ, Cᵀ, Bᵀ, Dᵀ)` of `Gᵀ(λ)`.
    pub fn transpose(&self) -> DescriptorSystem {
        DescriptorSystem {
            a: self.a.transpose(),
            e: self.e.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
            timing: self.timing,
        }
    }

    /// Conjugate system `G~(z) = Gᵀ(1/z)` of a discrete-time system, built as the
    /// substitution `z → 1/z` applied to the transpose. The result has order `n + p`.
    pub fn conjugate(&self) -> Result<DescriptorSystem> {
        if self.timing != Timing::Discrete {
            return Err(Error::Unsupported("conjugation is only defined for discrete-time systems".into()));
        }
        bilinear(&self.transpose(), &BilinearMap::RECIPROCAL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::evalfr;
    use nalgebra::Complex;

    fn scalar_integrator() -> DescriptorSystem {
        DescriptorSystem::new(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.0),
            Timing::Discrete,
        )
        .unwrap()
    }

    fn random_system(n: usize, p: usize, m: usize, seed: u64) -> DescriptorSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = |rows, cols| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        DescriptorSystem::new(r(n, n), r(n, n), r(n, m), r(p, n), r(p, m), Timing::Discrete).unwrap()
    }

    #[test]
    fn static_system_construction() {
        let sys = DescriptorSystem::new(
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 3),
            DMatrix::zeros(2, 0),
            DMatrix::from_element(2, 3, 1.5),
            Timing::Continuous,
        )
        .unwrap();
        assert_eq!((sys.order(), sys.outputs(), sys.inputs()), (0, 2, 3));
        let g = evalfr(&sys, Complex::new(0.3, 0.7)).unwrap();
        assert!(g.iter().all(|x| *x == Complex::new(1.5, 0.0)));
    }

    #[test]
    fn dimension_errors_name_the_matrix() {
        let err = DescriptorSystem::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(3, 1),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(1, 1),
            Timing::Discrete,
        )
        .unwrap_err();
        assert!(err.to_string().contains("B row count"), "{err}");
        let err = DescriptorSystem::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(2, 1),
            Timing::Discrete,
        )
        .unwrap_err();
        assert!(err.to_string().contains("D must be"), "{err}");
    }

    #[test]
    fn integrator_evaluates_to_reciprocal() {
        let g = evalfr(&scalar_integrator(), Complex::new(2.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - Complex::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn regularity_examples() {
        assert!(scalar_integrator().is_regular(Tolerance::default_rule()));
        let singular = DescriptorSystem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(1, 1),
            Timing::Continuous,
        )
        .unwrap();
        assert!(!singular.is_regular(Tolerance::default_rule()));
        assert!(DescriptorSystem::static_gain(DMatrix::zeros(1, 1), Timing::Discrete).is_regular(Tolerance::default_rule()));

        // determinant oracle: random A with E = I has det(A - λ₀I) ≠ 0 at a random λ₀
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        assert!((&a - DMatrix::<f64>::identity(6, 6) * 0.123).determinant().abs() > 1e-8);
        let sys = DescriptorSystem::standard(a, DMatrix::zeros(6, 1), DMatrix::zeros(1, 6), DMatrix::zeros(1, 1), Timing::Continuous).unwrap();
        assert!(sys.is_regular(Tolerance::default_rule()));
    }

    #[test]
    fn subtract_algebra() {
        let r = random_system(4, 2, 3, 1);
        let s = random_system(5, 2, 3, 2);
        let diff = r.subtract(&s).unwrap();
        assert_eq!(diff.order(), 9);
        let z = Complex::new(0.37, 0.81);
        let lhs = evalfr(&diff, z).unwrap();
        let rhs = evalfr(&r, z).unwrap() - evalfr(&s, z).unwrap();
        assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));

        let zero = r.subtract(&r).unwrap();
        assert!(evalfr(&zero, z).unwrap().norm() <= 1e-12);

        assert!(r.subtract(&random_system(2, 3, 2, 3)).is_err());
        let mut cont = s.clone();
        cont.timing = Timing::Continuous;
        assert!(r.subtract(&cont).is_err());
    }

    #[test]
    fn transpose_algebra() {
        let r = random_system(4, 2, 3, 5);
        let t = r.transpose();
        assert_eq!((t.outputs(), t.inputs()), (3, 2));
        assert_eq!(t.transpose(), r);
        let z = Complex::new(-0.2, 0.6);
        let lhs = evalfr(&t, z).unwrap();
        let rhs = evalfr(&r, z).unwrap().transpose();
        assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        let st = DescriptorSystem::static_gain(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), Timing::Discrete);
        assert_eq!(st.transpose().d(), &DMatrix::from_row_slice(2, 1, &[1.0, 2.0]));
    }

    #[test]
    fn conjugate_algebra() {
        let g = scalar_integrator().conjugate().unwrap();
        let v = evalfr(&g, Complex::new(2.0, 0.0)).unwrap();
        assert!((v[(0, 0)] - Complex::new(2.0, 0.0)).norm() < 1e-14);

        let d = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let st = DescriptorSystem::static_gain(d.clone(), Timing::Discrete).conjugate().unwrap();
        let v = evalfr(&st, Complex::new(0.4, -1.3)).unwrap();
        assert!((v - d.transpose().map(|x| Complex::new(x, 0.0))).norm() < 1e-14);

        let r = random_system(4, 2, 3, 9);
        let conj = r.conjugate().unwrap();
        assert_eq!(conj.order(), 4 + 2);
        let z = Complex::new(0.9, 0.45);
        let lhs = evalfr(&conj, z).unwrap();
        let rhs = evalfr(&r, Complex::new(1.0, 0.0) / z).unwrap().transpose();
        assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));

        let mut cont = r;
        cont.timing = Timing::Continuous;
        assert!(matches!(cont.conjugate(), Err(Error::Unsupported(_))));
    }
}
