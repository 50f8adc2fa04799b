//! Orthogonal structural reductions of descriptor realizations.
//!
//! All rank decisions in one invocation use the same [`Tolerance`].

mod kronecker;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{clear_lower, row_compress, rq_transform, sorted_svd, Tolerance};
use crate::system::DescriptorSystem;

pub use kronecker::{kronecker_like, pencil_normal_rank, system_pencil, KroneckerStructure, LinearPencil};

/// Order bookkeeping of [`minimal_realization`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinimalizationReport {
    pub original_order: usize,
    pub removed_uncontrollable: usize,
    pub removed_unobservable: usize,
    pub removed_nondynamic: usize,
    pub final_order: usize,
}

/// Generalized controllability staircase on `(A − λE, B)`.
///
/// `E` is kept upper triangular while the subdiagonal blocks of `A` are row
/// compressed. On return the leading `k` states (the return value) form a
/// pair controllable at every finite eigenvalue, and `A`, `E` vanish below
/// them in the leading `k` columns with `B` zero in the trailing rows.
fn finite_staircase(
    a: &mut DMatrix<f64>,
    e: &mut DMatrix<f64>,
    b: &mut DMatrix<f64>,
    c: &mut DMatrix<f64>,
    t: &mut Transforms,
    tol: Tolerance,
) -> usize {
    let n = a.nrows();
    if n == 0 {
        return 0;
    }
    let q0 = e.clone().qr().q();
    let qt = q0.transpose();
    *a = &qt * &*a;
    *e = &qt * &*e;
    *b = &qt * &*b;
    t.q = &t.q * &q0;
    clear_lower(e, 0);

    let comp = row_compress(b, tol);
    if comp.rank == 0 {
        b.fill(0.0);
        return 0;
    }
    let ut = comp.transform.transpose();
    *a = &ut * &*a;
    *e = &ut * &*e;
    *b = comp.compressed;
    t.q = &t.q * &comp.transform;
    let z = rq_transform(e);
    *a = &*a * &z;
    *e = &*e * &z;
    *c = &*c * &z;
    t.z = &t.z * &z;
    clear_lower(e, 0);

    let mut done = comp.rank;
    let (mut pstart, mut psize) = (0, comp.rank);
    while done < n {
        let rest = n - done;
        let block = a.view((done, pstart), (rest, psize)).clone_owned();
        let comp = row_compress(&block, tol);
        if comp.rank == 0 {
            a.view_mut((done, pstart), (rest, psize)).fill(0.0);
            break;
        }
        let ut = comp.transform.transpose();
        let rows = &ut * a.view((done, pstart), (rest, n - pstart));
        a.view_mut((done, pstart), (rest, n - pstart)).copy_from(&rows);
        a.view_mut((done, pstart), (rest, psize)).copy_from(&comp.compressed);
        let e_rows = &ut * e.view((done, done), (rest, rest));
        e.view_mut((done, done), (rest, rest)).copy_from(&e_rows);
        let q_cols = t.q.columns(done, rest) * &comp.transform;
        t.q.columns_mut(done, rest).copy_from(&q_cols);

        let z = rq_transform(&e_rows);
        let a_cols = a.view((0, done), (n, rest)) * &z;
        a.view_mut((0, done), (n, rest)).copy_from(&a_cols);
        let e_cols = e.view((0, done), (n, rest)) * &z;
        e.view_mut((0, done), (n, rest)).copy_from(&e_cols);
        let c_cols = c.columns(done, rest) * &z;
        c.columns_mut(done, rest).copy_from(&c_cols);
        let z_cols = t.z.columns(done, rest) * &z;
        t.z.columns_mut(done, rest).copy_from(&z_cols);
        clear_lower(e, done);

        pstart = done;
        psize = comp.rank;
        done += comp.rank;
    }
    done
}

fn truncate(a: &DMatrix<f64>, e: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, k: usize) -> [DMatrix<f64>; 4] {
    [
        a.view((0, 0), (k, k)).clone_owned(),
        e.view((0, 0), (k, k)).clone_owned(),
        b.rows(0, k).clone_owned(),
        c.columns(0, k).clone_owned(),
    ]
}

/// Orthogonal `Q`, `Z` of one stage; the stage output is a truncation of
/// `Qᵀ(A − λE)Z`, `QᵀB`, `CZ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transforms {
    pub q: DMatrix<f64>,
    pub z: DMatrix<f64>,
}

impl Transforms {
    fn identity(n: usize) -> Self {
        Transforms { q: DMatrix::identity(n, n), z: DMatrix::identity(n, n) }
    }

    fn transposed(self) -> Self {
        Transforms { q: self.z, z: self.q }
    }

    /// Extends with the transforms of a stage applied to the leading block.
    fn then(mut self, inner: &Transforms) -> Self {
        let k = inner.q.nrows();
        let q = self.q.columns(0, k) * &inner.q;
        self.q.columns_mut(0, k).copy_from(&q);
        let z = self.z.columns(0, k) * &inner.z;
        self.z.columns_mut(0, k).copy_from(&z);
        self
    }
}

fn controllable_part(sys: &DescriptorSystem, tol: Tolerance) -> (DescriptorSystem, usize, Transforms) {
    let n = sys.order();
    let (mut a, mut e, mut b, mut c, d, timing) = sys.clone().into_parts();
    // Infinite structure first: the staircase of the swapped pencil E − μA is
    // controllable at μ = 0, i.e. at λ = ∞.
    let mut outer = Transforms::identity(n);
    let k = finite_staircase(&mut e, &mut a, &mut b, &mut c, &mut outer, tol);
    [a, e, b, c] = truncate(&a, &e, &b, &c, k);
    let mut inner = Transforms::identity(k);
    let k = finite_staircase(&mut a, &mut e, &mut b, &mut c, &mut inner, tol);
    let [a, e, b, c] = truncate(&a, &e, &b, &c, k);
    let out = DescriptorSystem::new(a, e, b, c, d, timing).expect("staircase preserves dimensions");
    (out, n - k, outer.then(&inner))
}

fn observable_part(sys: &DescriptorSystem, tol: Tolerance) -> (DescriptorSystem, usize, Transforms) {
    let (t, removed, tr) = controllable_part(&sys.transpose(), tol);
    (t.transpose(), removed, tr.transposed())
}

fn check_regular(sys: &DescriptorSystem) -> Result<()> {
    if sys.is_regular(Tolerance::default_rule()) {
        Ok(())
    } else {
        Err(Error::NonRegular)
    }
}

/// Removes the finite and infinite uncontrollable eigenvalues by orthogonal
/// equivalence. Returns the reduced system and the number of removed states.
pub fn ctrb_staircase(sys: &DescriptorSystem, tol: Tolerance) -> Result<(DescriptorSystem, usize)> {
    check_regular(sys)?;
    let (out, removed, _) = controllable_part(sys, tol);
    Ok((out, removed))
}

/// Dual of [`ctrb_staircase`]: removes unobservable eigenvalues.
pub fn obsv_staircase(sys: &DescriptorSystem, tol: Tolerance) -> Result<(DescriptorSystem, usize)> {
    check_regular(sys)?;
    let (out, removed, _) = observable_part(sys, tol);
    Ok((out, removed))
}

/// Eliminates non-dynamic modes by residualization.
///
/// In coordinates where `E = diag(Σ, 0)`, the invertible part of the block of
/// `A` acting on the kernel of `E` is eliminated through a Schur complement.
/// Any remaining kernel directions carry higher-order infinite poles and are kept.
pub fn remove_nondynamic(sys: &DescriptorSystem, tol: Tolerance) -> Result<(DescriptorSystem, usize)> {
    let (out, removed, _) = nondynamic_part(sys, tol)?;
    Ok((out, removed))
}

/// The residualization also reports its orthogonal transforms; the output is
/// a Schur complement of `Qᵀ(A − λE)Z`, `QᵀB`, `CZ`.
fn nondynamic_part(sys: &DescriptorSystem, tol: Tolerance) -> Result<(DescriptorSystem, usize, Transforms)> {
    let n = sys.order();
    if n == 0 {
        return Ok((sys.clone(), 0, Transforms::identity(0)));
    }
    let (u, sv, v) = sorted_svd(sys.e(), true, true);
    let thr = tol.threshold(n, n, sv[0]);
    let r = sv.iter().filter(|&&s| s > thr).count();
    if r == n {
        return Ok((sys.clone(), 0, Transforms::identity(n)));
    }
    let ut = u.transpose();
    let mut a = &ut * sys.a() * &v;
    let mut b = &ut * sys.b();
    let mut c = sys.c() * &v;
    let mut e = DMatrix::zeros(n, n);
    for i in 0..r {
        e[(i, i)] = sv[i];
    }

    let k0 = n - r;
    let a22 = a.view((r, r), (k0, k0)).clone_owned();
    let (u2, s2, v2) = sorted_svd(&a22, true, true);
    let thr2 = tol.threshold(k0, k0, s2[0]);
    let k = s2.iter().filter(|&&s| s > thr2).count();
    if k == 0 {
        return Ok((sys.clone(), 0, Transforms::identity(n)));
    }
    let u2t = u2.transpose();
    let rows = &u2t * a.rows(r, k0);
    a.rows_mut(r, k0).copy_from(&rows);
    let cols = a.columns(r, k0) * &v2;
    a.columns_mut(r, k0).copy_from(&cols);
    let rows = &u2t * b.rows(r, k0);
    b.rows_mut(r, k0).copy_from(&rows);
    let cols = c.columns(r, k0) * &v2;
    c.columns_mut(r, k0).copy_from(&cols);

    // keep = [0, r) ∪ [r + k, n), eliminated = [r, r + k) with A_ee = diag(s2[..k])
    let keep: Vec<usize> = (0..r).chain(r + k..n).collect();
    let elim: Vec<usize> = (r..r + k).collect();
    let pick = |m: &DMatrix<f64>, rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let all_m: Vec<usize> = (0..b.ncols()).collect();
    let all_p: Vec<usize> = (0..c.nrows()).collect();
    let inv = |m: DMatrix<f64>| DMatrix::from_fn(k, m.ncols(), |i, j| m[(i, j)] / s2[i]);

    let a_ke = pick(&a, &keep, &elim);
    let c_e = pick(&c, &all_p, &elim);
    let sinv_a_ek = inv(pick(&a, &elim, &keep));
    let sinv_b_e = inv(pick(&b, &elim, &all_m));

    let a_new = pick(&a, &keep, &keep) - &a_ke * &sinv_a_ek;
    let e_new = pick(&e, &keep, &keep);
    let b_new = pick(&b, &keep, &all_m) - &a_ke * &sinv_b_e;
    let c_new = pick(&c, &all_p, &keep) - &c_e * &sinv_a_ek;
    let d_new = sys.d() - &c_e * &sinv_b_e;
    let out = DescriptorSystem::new(a_new, e_new, b_new, c_new, d_new, sys.timing())?;
    let mut t = Transforms { q: u, z: v };
    let q = t.q.columns(r, k0) * &u2;
    t.q.columns_mut(r, k0).copy_from(&q);
    let z = t.z.columns(r, k0) * &v2;
    t.z.columns_mut(r, k0).copy_from(&z);
    Ok((out, k, t))
}

/// One stage of [`minimal_realization`].
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub system: DescriptorSystem,
    pub removed: usize,
    pub transforms: Transforms,
}

/// The stages of [`minimal_realization`] in order, each applied to the
/// output of the previous one.
pub fn minimal_realization_stages(sys: &DescriptorSystem, tol: Tolerance) -> Result<Vec<Stage>> {
    check_regular(sys)?;
    let (s1, r1, t1) = controllable_part(sys, tol);
    let (s2, r2, t2) = observable_part(&s1, tol);
    let (s3, r3, t3) = nondynamic_part(&s2, tol)?;
    Ok(vec![
        Stage { name: "controllable", system: s1, removed: r1, transforms: t1 },
        Stage { name: "observable", system: s2, removed: r2, transforms: t2 },
        Stage { name: "nondynamic", system: s3, removed: r3, transforms: t3 },
    ])
}

/// Minimal realization: controllable part, then observable part, then
/// residualization of non-dynamic modes.
pub fn minimal_realization(sys: &DescriptorSystem, tol: Tolerance) -> Result<(DescriptorSystem, MinimalizationReport)> {
    let mut stages = minimal_realization_stages(sys, tol)?;
    let report = MinimalizationReport {
        original_order: sys.order(),
        removed_uncontrollable: stages[0].removed,
        removed_unobservable: stages[1].removed,
        removed_nondynamic: stages[2].removed,
        final_order: stages[2].system.order(),
    };
    Ok((stages.pop().expect("three stages").system, report))
}
