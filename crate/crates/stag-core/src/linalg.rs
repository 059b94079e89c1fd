use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    pub rank: usize,
    /// Ratio of the largest to the smallest retained singular value.
    pub cond: f64,
    /// Ratio of the largest to the smallest singular value, all of them.
    pub cond_full: f64,
}

/// Minimum-norm least squares by SVD; singular values below
/// `rcond·σ_max` are discarded.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> LstsqSolution {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let cut = rcond * smax;
    let utb = u.transpose() * b;
    let mut y = DVector::zeros(s.len());
    let mut rank = 0;
    let mut kept_min = f64::INFINITY;
    for i in 0..s.len() {
        if s[i] > cut && s[i] > 0.0 {
            y[i] = utb[i] / s[i];
            rank += 1;
            kept_min = kept_min.min(s[i]);
        }
    }
    LstsqSolution {
        x: vt.transpose() * y,
        rank,
        cond: if rank > 0 { smax / kept_min } else { f64::INFINITY },
        cond_full: if smin > 0.0 { smax / smin } else { f64::INFINITY },
    }
}

/// `min ‖Ax − b‖` subject to `Cx = d`, via the null space of `C`.
pub fn lstsq_eq(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
) -> DVector<f64> {
    let n = a.ncols();
    // particular solution of Cx = d and an orthonormal null-space basis
    let svd = c.clone().svd(true, true);
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = s.iter().filter(|&&x| x > 1e-13 * smax).count();
    let part = lstsq(c, d, 1e-13).x;
    let mut z = DMatrix::zeros(n, n - r);
    // rows of vt beyond r span the null space; vt is r_min×n so rebuild a
    // full basis from a QR of the complement when C has fewer rows than n
    let full = complete_basis(vt, r, n);
    for k in 0..n - r {
        z.set_column(k, &full.column(r + k));
    }
    let az = a * &z;
    let rhs = b - a * &part;
    let y = lstsq(&az, &rhs, 1e-14).x;
    part + z * y
}

fn complete_basis(vt: &DMatrix<f64>, r: usize, n: usize) -> DMatrix<f64> {
    // Gram-Schmidt of [rows of vt (first r), e_1, ..., e_n]
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    for i in 0..r {
        basis.push(vt.row(i).transpose());
    }
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            basis.push(v / nv);
        }
    }
    DMatrix::from_columns(&basis)
}

/// Square solve by LU; `None` when singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}
