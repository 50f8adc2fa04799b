//! Frequency-variable substitutions and pointwise evaluation of `G(λ)`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{rank_svd, singular_values, Tolerance};
use crate::system::{DescriptorSystem, Timing};

type C64 = Complex<f64>;

/// Möbius substitution `λ = g(δ) = (aδ + b) / (cδ + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BilinearMap {
    /// `z → 1/z`.
    pub const RECIPROCAL: BilinearMap = BilinearMap { a: 0.0, b: 1.0, c: 1.0, d: 0.0 };
    pub const IDENTITY: BilinearMap = BilinearMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let map = BilinearMap { a, b, c, d };
        if map.determinant() == 0.0 {
            return Err(Error::DegenerateMap);
        }
        Ok(map)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_affine(&self) -> bool {
        self.c == 0.0 && self.d != 0.0
    }

    pub fn apply(&self, delta: C64) -> C64 {
        (delta * self.a + self.b) / (delta * self.c + self.d)
    }

    /// Coefficients drawn uniformly on `(0, 1)`, redrawn until `|ad − bc| > 0.1`.
    /// With `affine` set, `c = 0` and `d = 1`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, affine: bool) -> BilinearMap {
        loop {
            let a = rng.random::<f64>();
            let b = rng.random::<f64>();
            let (c, d) = if affine { (0.0, 1.0) } else { (rng.random::<f64>(), rng.random::<f64>()) };
            let map = BilinearMap { a, b, c, d };
            if map.determinant().abs() > 0.1 {
                return map;
            }
        }
    }
}

/// Realization of `G(g(δ))`.
///
/// The general form augments the state by the `m` inputs and needs no matrix
/// inversion. For an affine map with nonsingular `E` the order is kept.
pub fn bilinear(sys: &DescriptorSystem, map: &BilinearMap) -> Result<DescriptorSystem> {
    if map.determinant() == 0.0 {
        return Err(Error::DegenerateMap);
    }
    let (n, m, p) = (sys.order(), sys.inputs(), sys.outputs());
    let (a, e, b, c, d) = (sys.a(), sys.e(), sys.b(), sys.c(), sys.d());

    if map.is_affine() && rank_svd(e, Tolerance::default_rule()) == n {
        let scale = map.a / map.d;
        let shift = map.b / map.d;
        return DescriptorSystem::new(a - e * shift, e * scale, b.clone(), c.clone(), d.clone(), sys.timing());
    }

    let nt = n + m;
    let mut at = DMatrix::zeros(nt, nt);
    let mut et = DMatrix::zeros(nt, nt);
    at.view_mut((0, 0), (n, n)).copy_from(&(a * map.d - e * map.b));
    at.view_mut((0, n), (n, m)).copy_from(&(b * map.d));
    at.view_mut((n, n), (m, m)).fill_diagonal(-1.0);
    et.view_mut((0, 0), (n, n)).copy_from(&(e * map.a - a * map.c));
    et.view_mut((0, n), (n, m)).copy_from(&(b * -map.c));
    let mut bt = DMatrix::zeros(nt, m);
    bt.view_mut((n, 0), (m, m)).fill_diagonal(1.0);
    let mut ct = DMatrix::zeros(p, nt);
    ct.view_mut((0, 0), (p, n)).copy_from(c);
    ct.view_mut((0, n), (p, m)).copy_from(d);
    DescriptorSystem::new(at, et, bt, ct, DMatrix::zeros(p, m), sys.timing())
}

fn pole_error(lambda: C64) -> Error {
    Error::EvaluationAtPole { re: lambda.re, im: lambda.im }
}

/// `G(λ₀) = C(λ₀E − A)⁻¹B + D` by a dense LU factorization.
///
/// Real `λ₀` is handled in real arithmetic.
pub fn evalfr(sys: &DescriptorSystem, lambda: C64) -> Result<DMatrix<C64>> {
    let n = sys.order();
    let d = sys.d().map(|x| C64::new(x, 0.0));
    if n == 0 {
        return Ok(d);
    }
    let thresh = |pencil_norm: f64| 4.0 * n as f64 * f64::EPSILON * pencil_norm.max(f64::MIN_POSITIVE);
    if lambda.im == 0.0 {
        let pencil = sys.e() * lambda.re - sys.a();
        let tol = thresh(pencil.norm());
        let lu = pencil.lu();
        if lu.u().diagonal().iter().any(|u| u.abs() <= tol) {
            return Err(pole_error(lambda));
        }
        let x = lu.solve(sys.b()).ok_or_else(|| pole_error(lambda))?;
        return Ok(d + (sys.c() * x).map(|v| C64::new(v, 0.0)));
    }
    let pencil = sys.e().map(|x| C64::new(x, 0.0)) * lambda - sys.a().map(|x| C64::new(x, 0.0));
    let tol = thresh(pencil.norm());
    let lu = pencil.lu();
    if lu.u().diagonal().iter().any(|u| u.norm() <= tol) {
        return Err(pole_error(lambda));
    }
    let x = lu.solve(&sys.b().map(|x| C64::new(x, 0.0))).ok_or_else(|| pole_error(lambda))?;
    Ok(d + sys.c().map(|x| C64::new(x, 0.0)) * x)
}

/// Largest singular value of a complex matrix (0 for empty matrices).
pub fn max_singular_value(g: &DMatrix<C64>) -> f64 {
    singular_values(g).first().copied().unwrap_or(0.0)
}

/// Points on the stability boundary used by [`peak_gain`].
pub fn boundary_grid(timing: Timing, grid_size: usize, seed: u64) -> Vec<C64> {
    const RANDOM_POINTS: usize = 10;
    let mut pts = Vec::with_capacity(grid_size + RANDOM_POINTS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match timing {
        Timing::Continuous => {
            if grid_size > 0 {
                pts.push(C64::new(0.0, 0.0));
            }
            let k = grid_size.saturating_sub(1);
            for i in 0..k {
                let expo = if k == 1 { -6.0 } else { -6.0 + 12.0 * i as f64 / (k - 1) as f64 };
                pts.push(C64::new(0.0, 10f64.powf(expo)));
            }
            for _ in 0..RANDOM_POINTS {
                pts.push(C64::new(0.0, 10f64.powf(rng.random_range(-6.0..6.0))));
            }
        }
        Timing::Discrete => {
            for i in 0..grid_size {
                let theta = if grid_size == 1 { 0.0 } else { PI * i as f64 / (grid_size - 1) as f64 };
                pts.push(C64::from_polar(1.0, theta));
            }
            for _ in 0..RANDOM_POINTS {
                pts.push(C64::from_polar(1.0, rng.random_range(0.0..PI)));
            }
        }
    }
    pts
}

/// Grid lower bound on the L∞ norm: the largest `σ_max(G(λ))` over the
/// stability boundary. Points that hit a pole are skipped.
pub fn peak_gain(sys: &DescriptorSystem, grid_size: usize, seed: u64) -> Result<f64> {
    let mut best: Option<f64> = None;
    for lambda in boundary_grid(sys.timing(), grid_size, seed) {
        match evalfr(sys, lambda) {
            Ok(g) => {
                let s = max_singular_value(&g);
                best = Some(best.map_or(s, |b: f64| b.max(s)));
            }
            Err(Error::EvaluationAtPole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| Error::Unsupported("no evaluable point on the stability boundary".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_system(n: usize, p: usize, m: usize, timing: Timing, seed: u64) -> DescriptorSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = |rows, cols| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
        DescriptorSystem::new(r(n, n), r(n, n), r(n, m), r(p, n), r(p, m), timing).unwrap()
    }

    fn integrator() -> DescriptorSystem {
        DescriptorSystem::standard(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.0),
            Timing::Discrete,
        )
        .unwrap()
    }

    /// Explicit-inverse oracle for G(λ₀).
    fn inverse_oracle(sys: &DescriptorSystem, lambda: C64) -> DMatrix<C64> {
        let cplx = |m: &DMatrix<f64>| m.map(|x| C64::new(x, 0.0));
        let inv = (cplx(sys.e()) * lambda - cplx(sys.a())).try_inverse().unwrap();
        cplx(sys.c()) * inv * cplx(sys.b()) + cplx(sys.d())
    }

    #[test]
    fn evalfr_examples() {
        let st = DescriptorSystem::static_gain(DMatrix::from_element(2, 2, 3.0), Timing::Continuous);
        assert_eq!(evalfr(&st, C64::new(5.0, 1.0)).unwrap()[(1, 0)], C64::new(3.0, 0.0));
        let g = evalfr(&integrator(), C64::new(2.0, 0.0)).unwrap();
        assert_eq!(g[(0, 0)], C64::new(0.5, 0.0));
        assert!(matches!(evalfr(&integrator(), C64::new(0.0, 0.0)), Err(Error::EvaluationAtPole { .. })));
    }

    #[test]
    fn evalfr_matches_inverse_oracle() {
        for seed in 0..10 {
            let sys = random_system(8, 2, 3, Timing::Discrete, seed);
            for lambda in [C64::new(0.3, 0.0), C64::new(-0.4, 1.2)] {
                let g = evalfr(&sys, lambda).unwrap();
                let o = inverse_oracle(&sys, lambda);
                assert!((&g - &o).norm() <= 1e-12 * o.norm().max(1.0) * 1e2, "seed {seed}");
            }
        }
    }

    #[test]
    fn identity_map_preserves_response() {
        let sys = random_system(5, 2, 2, Timing::Continuous, 3);
        let t = bilinear(&sys, &BilinearMap::IDENTITY).unwrap();
        let z = C64::new(0.2, 0.9);
        let (g0, g1) = (evalfr(&sys, z).unwrap(), evalfr(&t, z).unwrap());
        assert!((&g0 - &g1).norm() <= 1e-10 * g0.norm().max(1.0));
    }

    #[test]
    fn reciprocal_map_on_integrator() {
        let t = bilinear(&integrator(), &BilinearMap::RECIPROCAL).unwrap();
        assert_eq!(t.order(), 2);
        let v = evalfr(&t, C64::new(3.0, 0.0)).unwrap();
        assert!((v[(0, 0)] - C64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn composition_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..20 {
            let sys = random_system(6, 2, 3, Timing::Discrete, seed);
            let map = BilinearMap::random(&mut rng, seed % 3 == 0);
            let t = bilinear(&sys, &map).unwrap();
            let delta = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let lhs = evalfr(&t, delta).unwrap();
            let rhs = evalfr(&sys, map.apply(delta)).unwrap();
            assert!((&lhs - &rhs).norm() <= 1e-9 * rhs.norm().max(1.0), "seed {seed}");
        }
    }

    #[test]
    fn affine_and_general_forms_agree() {
        let sys = random_system(5, 2, 2, Timing::Continuous, 12);
        let map = BilinearMap::new(0.7, 0.3, 0.0, 1.0).unwrap();
        let affine = bilinear(&sys, &map).unwrap();
        assert_eq!(affine.order(), 5);
        // same map with the general (augmented) construction forced by a singular-E detour
        let general = {
            let n = sys.order();
            let mut at = DMatrix::zeros(n + 2, n + 2);
            let mut et = DMatrix::zeros(n + 2, n + 2);
            at.view_mut((0, 0), (n, n)).copy_from(&(sys.a() - sys.e() * 0.3));
            at.view_mut((0, n), (n, 2)).copy_from(sys.b());
            at.view_mut((n, n), (2, 2)).fill_diagonal(-1.0);
            et.view_mut((0, 0), (n, n)).copy_from(&(sys.e() * 0.7));
            let mut bt = DMatrix::zeros(n + 2, 2);
            bt.view_mut((n, 0), (2, 2)).fill_diagonal(1.0);
            let mut ct = DMatrix::zeros(2, n + 2);
            ct.view_mut((0, 0), (2, n)).copy_from(sys.c());
            ct.view_mut((0, n), (2, 2)).copy_from(sys.d());
            DescriptorSystem::new(at, et, bt, ct, DMatrix::zeros(2, 2), sys.timing()).unwrap()
        };
        for delta in [C64::new(0.1, 0.5), C64::new(-1.3, 0.2)] {
            let (x, y) = (evalfr(&affine, delta).unwrap(), evalfr(&general, delta).unwrap());
            assert!((&x - &y).norm() <= 1e-9 * x.norm().max(1.0));
        }
    }

    #[test]
    fn singular_e_affine_map_uses_augmented_form() {
        let mut sys = random_system(4, 1, 1, Timing::Continuous, 2);
        let (a, mut e, b, c, d, t) = sys.clone().into_parts();
        e.row_mut(3).fill(0.0);
        sys = DescriptorSystem::new(a, e, b, c, d, t).unwrap();
        let map = BilinearMap::new(2.0, 0.5, 0.0, 1.0).unwrap();
        let out = bilinear(&sys, &map).unwrap();
        assert_eq!(out.order(), 5);
        let delta = C64::new(0.3, 0.4);
        let (x, y) = (evalfr(&out, delta).unwrap(), evalfr(&sys, map.apply(delta)).unwrap());
        assert!((&x - &y).norm() <= 1e-9 * y.norm().max(1.0));
    }

    #[test]
    fn degenerate_map_rejected() {
        assert_eq!(BilinearMap::new(1.0, 2.0, 2.0, 4.0), Err(Error::DegenerateMap));
        let bad = BilinearMap { a: 1.0, b: 1.0, c: 1.0, d: 1.0 };
        assert_eq!(bilinear(&integrator(), &bad), Err(Error::DegenerateMap));
    }

    #[test]
    fn random_map_contract() {
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(BilinearMap::random(&mut r1, false), BilinearMap::random(&mut r2, false));
        for _ in 0..1000 {
            let m = BilinearMap::random(&mut r1, false);
            assert!(m.determinant().abs() > 0.1);
            assert!([m.a, m.b, m.c, m.d].iter().all(|x| (0.0..1.0).contains(x)));
            let aff = BilinearMap::random(&mut r1, true);
            assert_eq!((aff.c, aff.d), (0.0, 1.0));
        }
    }

    #[test]
    fn peak_gain_examples() {
        let zero = DescriptorSystem::standard(
            DMatrix::from_element(2, 2, 0.1),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(1, 1),
            Timing::Continuous,
        )
        .unwrap();
        assert_eq!(peak_gain(&zero, 200, 0).unwrap(), 0.0);

        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        let st = DescriptorSystem::static_gain(d, Timing::Discrete);
        assert!((peak_gain(&st, 200, 0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn peak_gain_against_dense_grid() {
        // stable discrete system: A scaled to spectral radius < 1
        for seed in 0..5 {
            let base = random_system(6, 2, 2, Timing::Discrete, seed);
            let (a, _, b, c, d, t) = base.into_parts();
            let rho = a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sys = DescriptorSystem::standard(a * (0.8 / rho), b, c, d, t).unwrap();
            let coarse = peak_gain(&sys, 200, seed).unwrap();
            let dense = peak_gain(&sys, 20_000, seed).unwrap();
            assert!(coarse <= dense * (1.0 + 1e-12));
            assert!((dense - coarse) / dense < 0.05, "seed {seed}: {coarse} vs {dense}");
        }
    }

    #[test]
    fn peak_gain_nonzero_on_nonzero_systems() {
        for seed in 0..10 {
            let sys = random_system(4, 1, 1, Timing::Continuous, seed);
            assert!(peak_gain(&sys, 50, seed).unwrap() > 1e-6);
        }
    }

    #[test]
    fn grids_have_expected_shape() {
        let c = boundary_grid(Timing::Continuous, 200, 1);
        assert_eq!(c.len(), 210);
        assert_eq!(c[0], C64::new(0.0, 0.0));
        assert!((c[1].im - 1e-6).abs() < 1e-18 && (c[199].im - 1e6).abs() < 1e-6);
        let d = boundary_grid(Timing::Discrete, 200, 1);
        assert!(d.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15 && z.im >= -1e-15));
    }
}
