//! Generalized eigenvalues of a square pencil `A − λE` via Hessenberg-triangular
//! reduction followed by single-shift complex QZ iterations.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Eigenvalues of a regular pencil: finite values plus a count of infinite ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigenvalues {
    pub finite: Vec<C64>,
    pub infinite: usize,
}

impl GeneralizedEigenvalues {
    pub fn len(&self) -> usize {
        self.finite.len() + self.infinite
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Computes the eigenvalues of `A − λE` for square `A`, `E` of equal size.
///
/// Infinite eigenvalues (from a rank-deficient `E`) are reported as a count.
/// A singular pencil shows up as an indeterminate `0/0` pair and is rejected.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<GeneralizedEigenvalues> {
    let n = a.nrows();
    if a.shape() != (n, n) || e.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "generalized eigenvalues need square A, E of equal size, got {:?} and {:?}",
            a.shape(),
            e.shape()
        )));
    }
    let anorm = a.norm();
    let enorm = e.norm();
    let pairs = qz_pairs(a, e)?;
    let atol = 100.0 * n as f64 * f64::EPSILON * anorm.max(f64::MIN_POSITIVE);
    let btol = n as f64 * f64::EPSILON * enorm;
    let mut out = GeneralizedEigenvalues { finite: Vec::with_capacity(n), infinite: 0 };
    for (alpha, beta) in pairs {
        if beta.norm() <= btol {
            if alpha.norm() <= atol {
                return Err(Error::NonRegular);
            }
            out.infinite += 1;
        } else {
            out.finite.push(alpha / beta);
        }
    }
    Ok(out)
}

fn real_givens(f: f64, g: f64) -> (f64, f64) {
    if g == 0.0 {
        (1.0, 0.0)
    } else {
        let r = f.hypot(g);
        (f / r, g / r)
    }
}

/// Reduces `(A, E)` to upper Hessenberg / upper triangular form by orthogonal
/// equivalence. Only the reduced pair is returned.
fn hessenberg_triangular(a: &DMatrix<f64>, e: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let qr = e.clone().qr();
    let mut h = qr.q().transpose() * a;
    let mut t = qr.r();
    super::clear_lower(&mut t, 0);

    for j in 0..n.saturating_sub(2) {
        for i in ((j + 2)..n).rev() {
            // zero h[i, j] with rows (i-1, i)
            let (c, s) = real_givens(h[(i - 1, j)], h[(i, j)]);
            for k in j..n {
                let (x, y) = (h[(i - 1, k)], h[(i, k)]);
                h[(i - 1, k)] = c * x + s * y;
                h[(i, k)] = -s * x + c * y;
            }
            h[(i, j)] = 0.0;
            for k in (i - 1)..n {
                let (x, y) = (t[(i - 1, k)], t[(i, k)]);
                t[(i - 1, k)] = c * x + s * y;
                t[(i, k)] = -s * x + c * y;
            }
            // restore triangularity of t with columns (i-1, i)
            let (p, q) = (t[(i, i - 1)], t[(i, i)]);
            if p != 0.0 {
                let r = p.hypot(q);
                let (c, s) = (q / r, p / r);
                for k in 0..=i {
                    let (x, y) = (t[(k, i - 1)], t[(k, i)]);
                    t[(k, i - 1)] = c * x - s * y;
                    t[(k, i)] = s * x + c * y;
                }
                t[(i, i - 1)] = 0.0;
                for k in 0..n {
                    let (x, y) = (h[(k, i - 1)], h[(k, i)]);
                    h[(k, i - 1)] = c * x - s * y;
                    h[(k, i)] = s * x + c * y;
                }
            }
        }
    }
    (h, t)
}

/// Complex rotation `[c s; -s̄ c]` that maps `(f, g)` to `(r, 0)`.
fn row_rotation(f: C64, g: C64) -> (f64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let norm = fnorm.hypot(gn);
    (fnorm / norm, (f / fnorm) * g.conj() / norm)
}

/// Rotation applied from the right on columns `(p, q)` that zeroes the entry
/// `a` in column `p` of a row holding `(a, b)`.
fn col_rotation(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    if an == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let bn = b.norm();
    if bn == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let norm = an.hypot(bn);
    (bn / norm, a.conj() * b / (bn * norm))
}

fn apply_rows(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: C64, cols: std::ops::RangeInclusive<usize>) {
    for k in cols {
        let (x, y) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = x * c + s * y;
        m[(q, k)] = -s.conj() * x + y * c;
    }
}

fn apply_cols(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: C64, rows: std::ops::RangeInclusive<usize>) {
    for k in rows {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = x * c - y * s.conj();
        m[(k, q)] = x * s + y * c;
    }
}

/// Eigenvalue of the trailing 2×2 pencil closest to `h22 / t22`.
fn wilkinson_shift(h: &DMatrix<C64>, t: &DMatrix<C64>, k: usize) -> C64 {
    let (h11, h12, h21, h22) = (h[(k - 1, k - 1)], h[(k - 1, k)], h[(k, k - 1)], h[(k, k)]);
    let (t11, t12, t22) = (t[(k - 1, k - 1)], t[(k - 1, k)], t[(k, k)]);
    let qa = t11 * t22;
    let qb = -(h11 * t22 + h22 * t11 - h21 * t12);
    let qc = h11 * h22 - h12 * h21;
    let target = h22 / t22;
    let disc = (qb * qb - qa * qc * 4.0).sqrt();
    let r1 = (-qb + disc) / (qa * 2.0);
    let r2 = (-qb - disc) / (qa * 2.0);
    let pick = if (r1 - target).norm() <= (r2 - target).norm() { r1 } else { r2 };
    if pick.re.is_finite() && pick.im.is_finite() {
        pick
    } else {
        target
    }
}

/// Returns the `(α, β)` pairs of the generalized Schur form of `(A, E)`.
pub(crate) fn qz_pairs(a: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<Vec<(C64, C64)>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (hr, tr) = hessenberg_triangular(a, e);
    let mut h = hr.map(|x| C64::new(x, 0.0));
    let mut t = tr.map(|x| C64::new(x, 0.0));
    let eps = f64::EPSILON;
    let atol = eps * h.norm();
    let btol = eps * t.norm();

    let mut pairs = Vec::with_capacity(n);
    let mut ihi = n - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    let max_iter = 40 * n.max(10);

    'outer: loop {
        if ihi == 0 {
            pairs.push((h[(0, 0)], t[(0, 0)]));
            break;
        }
        // locate the active block [ilo, ihi]
        let mut ilo = 0;
        for l in (1..=ihi).rev() {
            let local = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if h[(l, l - 1)].norm() <= (eps * local).max(atol) {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                ilo = l;
                break;
            }
        }
        if ilo == ihi {
            pairs.push((h[(ihi, ihi)], t[(ihi, ihi)]));
            ihi -= 1;
            since_deflation = 0;
            continue;
        }

        // a negligible diagonal entry of T yields an infinite eigenvalue
        for j in ilo..=ihi {
            if t[(j, j)].norm() <= btol {
                t[(j, j)] = C64::new(0.0, 0.0);
                for i in j..ihi {
                    let (c, s) = row_rotation(t[(i, i + 1)], t[(i + 1, i + 1)]);
                    apply_rows(&mut t, i, i + 1, c, s, (i + 1)..=ihi);
                    t[(i + 1, i + 1)] = C64::new(0.0, 0.0);
                    let first = if i > ilo { i - 1 } else { ilo };
                    apply_rows(&mut h, i, i + 1, c, s, first..=ihi);
                    if i > ilo {
                        let (c, s) = col_rotation(h[(i + 1, i - 1)], h[(i + 1, i)]);
                        apply_cols(&mut h, i - 1, i, c, s, ilo..=(i + 1));
                        apply_cols(&mut t, i - 1, i, c, s, ilo..=i);
                        h[(i + 1, i - 1)] = C64::new(0.0, 0.0);
                        t[(i, i - 1)] = C64::new(0.0, 0.0);
                    }
                }
                let (c, s) = col_rotation(h[(ihi, ihi - 1)], h[(ihi, ihi)]);
                apply_cols(&mut h, ihi - 1, ihi, c, s, ilo..=ihi);
                apply_cols(&mut t, ihi - 1, ihi, c, s, ilo..=ihi);
                h[(ihi, ihi - 1)] = C64::new(0.0, 0.0);
                t[(ihi, ihi - 1)] = C64::new(0.0, 0.0);
                pairs.push((h[(ihi, ihi)], C64::new(0.0, 0.0)));
                ihi -= 1;
                since_deflation = 0;
                continue 'outer;
            }
        }

        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence(iter));
        }
        let shift = if since_deflation.is_multiple_of(10) {
            let base = h[(ihi, ihi)] / t[(ihi, ihi)];
            let kick = (h[(ihi, ihi - 1)] / t[(ihi - 1, ihi - 1)]).norm();
            base + C64::new(0.75 * kick, 0.5 * kick)
        } else {
            wilkinson_shift(&h, &t, ihi)
        };

        // implicit single-shift sweep over [ilo, ihi]
        let (c, s) = row_rotation(h[(ilo, ilo)] - shift * t[(ilo, ilo)], h[(ilo + 1, ilo)]);
        apply_rows(&mut h, ilo, ilo + 1, c, s, ilo..=ihi);
        apply_rows(&mut t, ilo, ilo + 1, c, s, ilo..=ihi);
        for k in ilo..ihi {
            let (c, s) = col_rotation(t[(k + 1, k)], t[(k + 1, k + 1)]);
            apply_cols(&mut t, k, k + 1, c, s, ilo..=(k + 1));
            apply_cols(&mut h, k, k + 1, c, s, ilo..=(k + 2).min(ihi));
            t[(k + 1, k)] = C64::new(0.0, 0.0);
            if k + 2 <= ihi {
                let (c, s) = row_rotation(h[(k + 1, k)], h[(k + 2, k)]);
                apply_rows(&mut h, k + 1, k + 2, c, s, k..=ihi);
                apply_rows(&mut t, k + 1, k + 2, c, s, (k + 1)..=ihi);
                h[(k + 2, k)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(pairs)
}
