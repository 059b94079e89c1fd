use cauchy_synth::CauchyDataSet;
use linkgeom::FrameField;
use nalgebra::{DMatrix, DVector};
use stag_core::linalg::lstsq;
use stag_core::series::{taylor_from_derivs, Series2};
use stag_core::{uniform_grid, TrigPoly, TrigVec3};

use crate::poly3::{heat_residual, monomial_index, monomials, n_monomials, Operator, TaylorSolution};
use crate::HeatJetError;

/// Local expansion of a Cauchy problem in `(p, q) = (θ − θ₀, σ)`: the
/// surface offset `Σ − Σ(θ₀, 0)`, its unit normal and the data `v|Σ = f`,
/// `N·∇v = g`.
#[derive(Clone, Debug)]
pub struct CauchySurface {
    pub base: [f64; 3],
    pub offset: [Series2; 3],
    pub normal: [Series2; 3],
    pub f: Series2,
    pub g: Series2,
}

fn taylor_p(poly: &TrigPoly, theta: f64, d: usize) -> Series2 {
    Series2::from_p(d, &taylor_from_derivs(&poly.eval_derivs(theta, d)))
}

fn taylor_vec(v: &TrigVec3, theta: f64, d: usize) -> [Series2; 3] {
    [0, 1, 2].map(|i| taylor_p(&v.0[i], theta, d))
}

fn p_deriv(s: &Series2, d: usize) -> Series2 {
    let mut out = Series2::zero(d);
    for i in 0..=d {
        out.set(i, 0, (i + 1) as f64 * s.get(i + 1, 0));
    }
    out
}

fn cross_s(a: &[Series2; 3], b: &[Series2; 3]) -> [Series2; 3] {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

fn dot_s(a: &[Series2; 3], b: &[Series2; 3]) -> Series2 {
    a[0].mul(&b[0]).add(&a[1].mul(&b[1])).add(&a[2].mul(&b[2]))
}

fn unit_s(w: &[Series2; 3]) -> [Series2; 3] {
    let inv = dot_s(w, w).inv_sqrt();
    [0, 1, 2].map(|i| w[i].mul(&inv))
}

fn q_times(s: &Series2) -> Series2 {
    s.mul(&Series2::q_var(s.deg()))
}

/// Ruled surface `φ + σk` with normal `(∂_θφ + σ∂_θk) × k / |·|`, expanded at
/// `θ₀` to total degree `d`.
fn ruled_surface(phi: &TrigVec3, k: &[Series2; 3], dk: &[Series2; 3], theta: f64, d: usize) -> ([f64; 3], [Series2; 3], [Series2; 3]) {
    let pd = phi.eval_derivs(theta, d + 1);
    let base = pd[0];
    let mut offset = [Series2::zero(d), Series2::zero(d), Series2::zero(d)];
    let mut tangent = offset.clone();
    for i in 0..3 {
        let comp: Vec<f64> = pd.iter().map(|v| v[i]).collect();
        let mut a = taylor_from_derivs(&comp[..=d]);
        a[0] = 0.0;
        offset[i] = Series2::from_p(d, &a).add(&q_times(&k[i]));
        let b = taylor_from_derivs(&comp[1..]);
        tangent[i] = Series2::from_p(d, &b).add(&q_times(&dk[i]));
    }
    let normal = unit_s(&cross_s(&tangent, k));
    (base, offset, normal)
}

/// Taylor polynomial of degree `d` solving the operator to order `d − 2`,
/// matching `f` to order `d` and `g` to order `d − 1` on the surface. The
/// conditions form a square system, block-triangular by degree.
pub fn solve_cauchy(
    surf: &CauchySurface,
    op: Operator,
    d: usize,
) -> Result<TaylorSolution, HeatJetError> {
    let mons = monomials(d);
    let nm = n_monomials(d);
    let pow = |s: &Series2| -> Vec<Series2> {
        let mut v = vec![Series2::constant(d, 1.0)];
        for i in 1..=d {
            v.push(v[i - 1].mul(s));
        }
        v
    };
    let px = pow(&surf.offset[0]);
    let py = pow(&surf.offset[1]);
    let pt = pow(&surf.offset[2]);
    let comp: Vec<Series2> = mons
        .iter()
        .map(|e| px[e[0]].mul(&py[e[1]]).mul(&pt[e[2]]))
        .collect();
    let comp_of = |e: [usize; 3]| -> &Series2 { &comp[monomial_index(e)] };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nm);
    let mut rhs = Vec::with_capacity(nm);
    for tot in 0..=d {
        for j in 0..=tot {
            let i = tot - j;
            rows.push(mons.iter().map(|&e| comp_of(e).get(i, j)).collect());
            rhs.push(surf.f.get(i, j));
        }
    }
    let normal_comp: Vec<Series2> = mons
        .iter()
        .map(|&e| {
            let mut s = Series2::zero(d);
            for ax in 0..3 {
                if e[ax] > 0 {
                    let mut lower = e;
                    lower[ax] -= 1;
                    s = s.add(&surf.normal[ax].mul(comp_of(lower)).scale(e[ax] as f64));
                }
            }
            s
        })
        .collect();
    for tot in 0..d {
        for j in 0..=tot {
            let i = tot - j;
            rows.push(normal_comp.iter().map(|s| s.get(i, j)).collect());
            rhs.push(surf.g.get(i, j));
        }
    }
    if d >= 2 {
        for e in monomials(d - 2) {
            let mut row = vec![0.0; nm];
            let [a, b, c] = e;
            let lap = [[a + 2, b, c], [a, b + 2, c]];
            let fac = [((a + 2) * (a + 1)) as f64, ((b + 2) * (b + 1)) as f64];
            let sgn = match op {
                Operator::Heat => -1.0,
                Operator::Laplace => 1.0,
            };
            for (m, f) in lap.iter().zip(fac) {
                row[monomial_index(*m)] += sgn * f;
            }
            match op {
                Operator::Heat => row[monomial_index([a, b, c + 1])] += (c + 1) as f64,
                Operator::Laplace => {
                    row[monomial_index([a, b, c + 2])] += ((c + 2) * (c + 1)) as f64
                }
            }
            rows.push(row);
            rhs.push(0.0);
        }
    }
    debug_assert_eq!(rows.len(), nm);
    let a = DMatrix::from_fn(nm, nm, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let sol = lstsq(&a, &b, 1e-13);
    if sol.rank < nm {
        return Err(HeatJetError::SingularSeriesSystem {
            rank: sol.rank,
            size: nm,
        });
    }
    Ok(TaylorSolution {
        base: surf.base,
        degree: d,
        operator: op,
        coeffs: sol.x.iter().copied().collect(),
        residual: None,
    })
}

/// Order test on the operator residual: the truncated series leaves a
/// homogeneous remainder of degree `d − 1`.
fn check_order(sol: &mut TaylorSolution, radius: f64) -> Result<(), HeatJetError> {
    let rep = heat_residual(sol, radius, 64);
    sol.residual = Some(rep);
    if let Some(o) = rep.order {
        let want = sol.degree as f64 - 1.0;
        if (o - want).abs() > 0.5 {
            return Err(HeatJetError::DegreeTooLow {
                degree: sol.degree,
                order: o,
            });
        }
    }
    Ok(())
}

/// Local expansion of the heat Cauchy problem on Σ at `θ₀`.
pub fn link_surface(
    frame: &FrameField,
    data: &CauchyDataSet,
    theta0: f64,
    degree: usize,
) -> CauchySurface {
    let d = degree;
    let k = taylor_vec(&frame.k_field, theta0, d + 1);
    let k_d: [Series2; 3] = k.clone().map(|s| trunc(&s, d));
    let dk = [0, 1, 2].map(|i| p_deriv(&k[i], d));
    let (base, offset, normal) = ruled_surface(&frame.curve.coeffs, &k_d, &dk, theta0, d);
    let beta = taylor_p(&data.beta, theta0, d);
    let k3 = k_d[2].clone();
    let f = taylor_p(&data.f0, theta0, d)
        .add(&q_times(&beta.mul(&k3)))
        .add(&q_times(&q_times(&taylor_p(&data.big_f, theta0, d))).scale(0.5));
    let n = taylor_vec(&frame.n_field, theta0, d);
    let t3 = taylor_p(&frame.t_field.0[2], theta0, d);
    let c = dot_s(&n, &dk).scale(frame.ds());
    let g = beta
        .mul(&normal[2])
        .add(&q_times(&taylor_p(&data.big_g, theta0, d).add(&beta.mul(&c).mul(&t3))));
    CauchySurface {
        base,
        offset,
        normal,
        f,
        g,
    }
}

fn trunc(s: &Series2, d: usize) -> Series2 {
    let mut out = Series2::zero(d);
    for i in 0..=d {
        for j in 0..=d - i {
            out.set(i, j, s.get(i, j));
        }
    }
    out
}

/// Truncated power-series solution of the heat Cauchy problem with data
/// `(f, g)` on Σ, centred at `φ(θ₀)`.
pub fn ck_series(
    frame: &FrameField,
    data: &CauchyDataSet,
    theta0: f64,
    degree: usize,
) -> Result<TaylorSolution, HeatJetError> {
    let mu = frame.at(theta0).mu();
    if mu <= 1e-6 {
        return Err(HeatJetError::CharacteristicSurface { theta: theta0, mu });
    }
    if degree < 2 {
        return Err(HeatJetError::DegreeTooLow {
            degree,
            order: f64::NAN,
        });
    }
    let surf = link_surface(frame, data, theta0, degree);
    let mut sol = solve_cauchy(&surf, Operator::Heat, degree)?;
    let radius = 0.25 * frame.sigma1.max(frame.rho1).max(1e-3);
    check_order(&mut sol, radius)?;
    Ok(sol)
}

/// Harmonic `h` near `Λ(θ₀)` with `h = 0` on the ruled surface
/// `Λ + σ k_Λ`, `k_Λ = (t × r)/|t × r|`, and `N·∇h = r·N` there, so that
/// `∇h = r` along `Λ`.
pub fn harmonic_gradient_potential(
    curve: &TrigVec3,
    r: &TrigVec3,
    theta0: f64,
    degree: usize,
) -> Result<TaylorSolution, HeatJetError> {
    let tangent = curve.deriv();
    let mut max_rt = 0.0f64;
    let mut min_cross = f64::INFINITY;
    for u in uniform_grid(1024) {
        let tv = tangent.eval(u);
        let rv = r.eval(u);
        let sp = (tv[0] * tv[0] + tv[1] * tv[1] + tv[2] * tv[2]).sqrt();
        let t = tv.map(|x| x / sp);
        max_rt = max_rt.max((t[0] * rv[0] + t[1] * rv[1] + t[2] * rv[2]).abs());
        let c = linkgeom::vec3::cross(t, rv);
        min_cross = min_cross.min(linkgeom::vec3::norm(c));
    }
    if max_rt > 1e-10 {
        return Err(HeatJetError::TangentialField { max: max_rt });
    }
    if min_cross < 1e-10 {
        return Err(HeatJetError::ParallelField { min: min_cross });
    }
    if degree < 2 {
        return Err(HeatJetError::DegreeTooLow {
            degree,
            order: f64::NAN,
        });
    }
    let d = degree;
    let tp = taylor_vec(&tangent, theta0, d + 1);
    let rs = taylor_vec(r, theta0, d + 1);
    let kl = unit_s(&cross_s(&tp, &rs));
    let k_d = kl.clone().map(|s| trunc(&s, d));
    let dk = [0, 1, 2].map(|i| p_deriv(&kl[i], d));
    let (base, offset, normal) = ruled_surface(curve, &k_d, &dk, theta0, d);
    let r_d = rs.map(|s| trunc(&s, d));
    let g = dot_s(&r_d, &normal);
    let surf = CauchySurface {
        base,
        offset,
        normal,
        f: Series2::zero(d),
        g,
    };
    let mut sol = solve_cauchy(&surf, Operator::Laplace, d)?;
    check_order(&mut sol, 0.05)?;
    Ok(sol)
}
