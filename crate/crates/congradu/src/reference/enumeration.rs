//! Brute-force enumeration and sampling maximizers used to validate the
//! closed-form oracles. Everything here is deliberately independent of the
//! `oracles` module: values are computed by support enumeration with
//! elementary per-support maximization, by dense one-dimensional grids, or by
//! feasible random sampling.

use crate::linalg::{Vector, Weights};
use rand::Rng;
use rand_distr::StandardNormal;

/// Visits every size-k subset of {0..n} in lexicographic order.
pub fn for_each_support<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    assert!(k <= n);
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// max { <a,x> : ||x||_2 = 1, ||x||_0 <= k } by support enumeration; on a
/// fixed support the maximum is ||a_S||_2 (Cauchy-Schwarz).
pub fn max_linear_sphere_l0(a: &Vector, k: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_support(a.len(), k.min(a.len()), |s| {
        let v = s.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt();
        if v > best {
            best = v;
        }
    });
    best
}

/// max { <a,x>^2 - s*||x||_0 : ||x||_2 = 1 } by enumeration over all nonempty
/// supports; on a fixed support the maximum of the quadratic term is
/// ||a_S||_2^2 and every coordinate counts toward the penalty.
pub fn max_sq_l0_penalized(a: &Vector, s: f64) -> f64 {
    let n = a.len();
    let mut best = f64::NEG_INFINITY;
    for k in 1..=n {
        for_each_support(n, k, |sup| {
            let v = sup.iter().map(|&i| a[i] * a[i]).sum::<f64>() - s * k as f64;
            if v > best {
                best = v;
            }
        });
    }
    best
}

/// Best sampled value of <a,x> - sum_i w_i |x_i| over the unit ball:
/// `samples` uniform draws from the ball plus the signed coordinate vertices.
pub fn sample_weighted_l1_penalized<R: Rng>(
    a: &Vector,
    w: &Weights,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let n = a.len();
    let value = |x: &Vector| {
        let mut v = 0.0;
        for i in 0..n {
            v += a[i] * x[i] - w[i] * x[i].abs();
        }
        v
    };
    let mut best = 0.0_f64; // x = 0 is feasible with value 0
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        best = best.max(value(&e));
        e[i] = -1.0;
        best = best.max(value(&e));
    }
    for _ in 0..samples {
        let x = sample_unit_ball(n, rng);
        best = best.max(value(&x));
    }
    best
}

/// Dual objective of the sphere-cap problem: g(lambda) = lambda*radius +
/// ||S_{lambda e}(a)||_2, minimized over a dense grid on [0, ||a||_inf].
pub fn l2_l1_dual_grid_min(a: &Vector, radius: f64, grid: usize) -> f64 {
    let hi = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut best = f64::INFINITY;
    for t in 0..=grid {
        let lam = hi * t as f64 / grid as f64;
        best = best.min(l2_l1_dual_value(a, radius, lam));
    }
    best
}

/// g(lambda) = lambda*radius + ||S_{lambda e}(a)||_2 at one multiplier.
pub fn l2_l1_dual_value(a: &Vector, radius: f64, lam: f64) -> f64 {
    let shrunk_sq = a
        .iter()
        .map(|v| {
            let t = v.abs() - lam;
            if t > 0.0 {
                t * t
            } else {
                0.0
            }
        })
        .sum::<f64>();
    lam * radius + shrunk_sq.sqrt()
}

/// Best sampled value of <a,x> over {||x||_2 <= 1} intersected with
/// {||x||_1 <= radius}: ball samples shrunk into the l1 ball.
pub fn sample_l2_l1_feasible<R: Rng>(
    a: &Vector,
    radius: f64,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let n = a.len();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut x = sample_unit_ball(n, rng);
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        if l1 > radius {
            x *= radius / l1;
        }
        best = best.max(a.dot(&x));
    }
    best
}

/// max { <a,x> : ||x||_2 = 1, x >= 0, ||x||_0 <= k } by support enumeration;
/// on a fixed support the optimum is ||(a_S)_+||_2 when any entry is
/// positive, else the single largest (least negative) coordinate.
pub fn max_linear_sphere_l0_nonneg(a: &Vector, k: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_support(a.len(), k.min(a.len()), |s| {
        let pos_sq: f64 = s
            .iter()
            .map(|&i| if a[i] > 0.0 { a[i] * a[i] } else { 0.0 })
            .sum();
        let v = if pos_sq > 0.0 {
            pos_sq.sqrt()
        } else {
            s.iter().map(|&i| a[i]).fold(f64::NEG_INFINITY, f64::max)
        };
        if v > best {
            best = v;
        }
    });
    best
}

/// max { <a,x> : x^T diag(d) x = 1, ||x||_0 <= k } by support enumeration;
/// substituting u = sqrt(d) x reduces each support to a sphere problem for
/// the scaled coefficients a_i / sqrt(d_i).
pub fn max_linear_ellipsoid_l0(a: &Vector, d: &Weights, k: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_support(a.len(), k.min(a.len()), |s| {
        let v = s.iter().map(|&i| a[i] * a[i] / d[i]).sum::<f64>().sqrt();
        if v > best {
            best = v;
        }
    });
    best
}

/// Uniform draw from the unit l2 ball (normal direction, radius u^(1/n)).
pub fn sample_unit_ball<R: Rng>(n: usize, rng: &mut R) -> Vector {
    loop {
        let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = x.norm();
        if norm > 1e-12 {
            let u: f64 = rng.random();
            return x * (u.powf(1.0 / n as f64) / norm);
        }
    }
}

/// Uniform draw from the unit sphere.
pub fn sample_unit_sphere<R: Rng>(n: usize, rng: &mut R) -> Vector {
    loop {
        let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = x.norm();
        if norm > 1e-12 {
            return x / norm;
        }
    }
}
