//! Dense linear-algebra helpers shared by the dynamics and analysis code.
//!
//! Conventions: Hamiltonians are Hermitian with entries in MHz; the
//! evolution operator over a time `t` in microseconds is
//! `exp(-i 2 pi H t)`. Eigendecomposition is the workhorse for dense
//! exponentials; a Lanczos action covers dimensions past the dense
//! threshold.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Hermitian eigendecomposition (ascending eigenvalues, eigenvectors as
/// columns satisfying `H v_k = e_k v_k`).
///
/// The backend's complex path returns vectors whose conjugation depends on
/// the input memory layout; the input is copied to row-major order and the
/// result conjugated so the convention here is fixed.
pub fn eigh(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let hs: Array2<C64> = if h.is_standard_layout() {
        h.to_owned()
    } else {
        h.as_standard_layout().to_owned()
    };
    let (vals, vecs) = (&hs).eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// `exp(-i 2 pi H t)` for Hermitian `H` via eigendecomposition.
pub fn evolution_operator(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh(h)?;
    Ok(evolution_from_eig(&vals, &vecs, t))
}

/// `exp(-i 2 pi E t)` from a precomputed eigendecomposition.
pub fn evolution_from_eig(vals: &Array1<f64>, vecs: &Array2<C64>, t: f64) -> Array2<C64> {
    let phases: Array1<C64> =
        vals.mapv(|e| C64::from_polar(1.0, -TWO_PI * e * t));
    let scaled = vecs * &phases.view().insert_axis(ndarray::Axis(0));
    scaled.dot(&vecs.t().mapv(|z| z.conj()))
}

/// Apply `exp(-i 2 pi H t)` to a single state via eigendecomposition.
pub fn evolve_state_eig(
    vals: &Array1<f64>,
    vecs: &Array2<C64>,
    state: ArrayView1<C64>,
    t: f64,
) -> Array1<C64> {
    let coeffs = vecs.t().mapv(|z| z.conj()).dot(&state);
    let rotated: Array1<C64> = coeffs
        .iter()
        .zip(vals.iter())
        .map(|(c, &e)| c * C64::from_polar(1.0, -TWO_PI * e * t))
        .collect();
    vecs.dot(&rotated)
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest entry of `U U^dag - 1`.
pub fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let prod = u.dot(&u.t().mapv(|z| z.conj()));
    let id = Array2::eye(n);
    max_abs_diff(&prod, &id)
}

pub fn hermiticity_deviation(h: &Array2<C64>) -> f64 {
    let hd = h.t().mapv(|z| z.conj());
    max_abs_diff(h, &hd)
}

pub fn hermitize(h: &Array2<C64>) -> Array2<C64> {
    let hd = h.t().mapv(|z| z.conj());
    (h + &hd).mapv(|z| z * 0.5)
}

/// Eigendecomposition of a unitary matrix into orthonormal eigenvectors and
/// phases in `(-pi, pi]`.
///
/// A unitary is normal, so it is simultaneously diagonalizable with the
/// Hermitian pair `(U + U^dag)/2` and `(U - U^dag)/2i`. The first is
/// diagonalized outright; degenerate clusters are resolved by diagonalizing
/// the second within each cluster. This keeps the eigenbasis orthonormal
/// even for degenerate phases, which a general non-symmetric solver does
/// not guarantee.
pub fn unitary_eig(u: &Array2<C64>, unitarity_tol: f64) -> Result<(Vec<f64>, Array2<C64>)> {
    let dev = unitarity_deviation(u);
    if dev > unitarity_tol {
        return Err(Error::Linalg(format!(
            "matrix is not unitary to {unitarity_tol:.1e}: deviation {dev:.3e}"
        )));
    }
    let n = u.nrows();
    let udag = u.t().mapv(|z| z.conj());
    let re = (u + &udag).mapv(|z| z * 0.5);
    let im = (u - &udag).mapv(|z| z * C64::new(0.0, -0.5));

    let (cvals, mut vecs) = eigh(&re)?;

    // cluster eigenvalues of the cosine part, then resolve each cluster with
    // the sine part
    let cluster_tol = 1e-9_f64.max(10.0 * unitarity_tol);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[end - 1]).abs() < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.slice(ndarray::s![.., start..end]).to_owned();
            let im_block = block.t().mapv(|z| z.conj()).dot(&im).dot(&block);
            let (_, rot) = eigh(&hermitize(&im_block))?;
            let rotated = block.dot(&rot);
            vecs.slice_mut(ndarray::s![.., start..end]).assign(&rotated);
        }
        start = end;
    }

    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let v = vecs.column(k);
        let cos_t = rayleigh(&re, v);
        let sin_t = rayleigh(&im, v);
        phases.push(sin_t.atan2(cos_t));
    }

    // reconstruction check
    let diag: Array1<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let scaled = &vecs * &diag.view().insert_axis(ndarray::Axis(0));
    let rebuilt = scaled.dot(&vecs.t().mapv(|z| z.conj()));
    let err = max_abs_diff(&rebuilt, u);
    if err > 1e-7 {
        return Err(Error::Linalg(format!(
            "unitary eigendecomposition failed to reconstruct input: error {err:.3e}"
        )));
    }
    Ok((phases, vecs))
}

fn rayleigh(h: &Array2<C64>, v: ndarray::ArrayView1<C64>) -> f64 {
    let hv = h.dot(&v);
    v.iter().zip(hv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Apply `exp(-i 2 pi t H)` to a vector with a Lanczos Krylov subspace,
/// for Hermitian `H` given as a matrix-vector action. Splits the time
/// interval until the subspace converges.
pub fn lanczos_expv(
    apply: &dyn Fn(ArrayView1<C64>) -> Array1<C64>,
    state: ArrayView1<C64>,
    t: f64,
    max_krylov: usize,
    tol: f64,
) -> Result<Array1<C64>> {
    let mut v = state.to_owned();
    let mut remaining = t;
    let mut step = t;
    let mut guard = 0;
    while remaining.abs() > 1e-15 * t.abs().max(1.0) {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::Linalg("lanczos step subdivision did not converge".into()));
        }
        let dt = if step.abs() > remaining.abs() { remaining } else { step };
        match lanczos_expv_step(apply, v.view(), dt, max_krylov, tol)? {
            Some(next) => {
                v = next;
                remaining -= dt;
            }
            None => {
                step /= 2.0;
            }
        }
    }
    Ok(v)
}

fn lanczos_expv_step(
    apply: &dyn Fn(ArrayView1<C64>) -> Array1<C64>,
    state: ArrayView1<C64>,
    dt: f64,
    max_krylov: usize,
    tol: f64,
) -> Result<Option<Array1<C64>>> {
    let n = state.len();
    let beta0 = norm(state);
    if beta0 == 0.0 {
        return Ok(Some(state.to_owned()));
    }
    let m_max = max_krylov.min(n);
    let mut basis: Vec<Array1<C64>> = Vec::with_capacity(m_max);
    basis.push(state.mapv(|z| z / beta0));
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    for j in 0..m_max {
        let mut w = apply(basis[j].view());
        let alpha = basis[j]
            .iter()
            .zip(w.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>();
        alphas.push(alpha);
        w = &w - &basis[j].mapv(|z| z * alpha);
        if j > 0 {
            let b = betas[j - 1];
            w = &w - &basis[j - 1].mapv(|z| z * b);
        }
        // full reorthogonalization keeps the basis numerically orthogonal
        for q in basis.iter() {
            let overlap: C64 = q.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
            w = &w - &q.mapv(|z| z * overlap);
        }
        let beta = norm(w.view());

        // converged or invariant subspace: evaluate the small exponential
        let m = j + 1;
        if beta < 1e-12 || m == m_max {
            let (est, combo) = small_exp(&alphas, &betas, dt, m)?;
            let accept = beta < 1e-12 || est * beta0 < tol;
            if accept {
                let mut out = Array1::zeros(n);
                for (k, q) in basis.iter().enumerate() {
                    out = out + q.mapv(|z| z * (combo[k] * beta0));
                }
                return Ok(Some(out));
            }
            return Ok(None);
        }
        betas.push(beta);
        basis.push(w.mapv(|z| z / beta));
    }
    Ok(None)
}

/// Exponential of the small tridiagonal projection; returns the magnitude of
/// the last coefficient (error estimate) and the first column of
/// `exp(-i 2 pi dt T)`.
fn small_exp(alphas: &[f64], betas: &[f64], dt: f64, m: usize) -> Result<(f64, Vec<C64>)> {
    let mut tm = Array2::<C64>::zeros((m, m));
    for k in 0..m {
        tm[[k, k]] = C64::new(alphas[k], 0.0);
        if k + 1 < m {
            tm[[k, k + 1]] = C64::new(betas[k], 0.0);
            tm[[k + 1, k]] = C64::new(betas[k], 0.0);
        }
    }
    let (vals, vecs) = eigh(&tm)?;
    let mut combo = vec![C64::new(0.0, 0.0); m];
    for c in 0..m {
        let phase = C64::from_polar(1.0, -TWO_PI * vals[c] * dt);
        let w = vecs[[0, c]].conj() * phase;
        for r in 0..m {
            combo[r] += vecs[[r, c]] * w;
        }
    }
    let est = combo[m - 1].norm();
    Ok((est, combo))
}

/// `exp(A)` for a general complex square matrix by scaling-and-squaring
/// with a Taylor series; intended for small dimensions where the LAPACK
/// call overhead of an eigendecomposition dominates.
pub fn small_expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let b = a.mapv(|z| z / C64::new(2f64.powi(s as i32), 0.0));
    let mut result = Array2::<C64>::eye(n);
    let mut term = Array2::<C64>::eye(n);
    for k in 1..=24 {
        term = term.dot(&b).mapv(|z| z / C64::new(k as f64, 0.0));
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

pub fn norm(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut Array1<C64>) {
    let n = norm(v.view());
    if n > 0.0 {
        v.mapv_inplace(|z| z / n);
    }
}

/// Frobenius inner product `<A, B> = tr(A^dag B)`.
pub fn frobenius_inner(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> Array2<C64> {
        // deterministic pseudo-random Hermitian matrix
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut h = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] = c(next(), next());
            }
        }
        hermitize(&h)
    }

    #[test]
    fn eigh_columns_are_eigenvectors_any_layout() {
        let h = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(-1.0, 0.0)]];
        for layout in [true, false] {
            let input = if layout { h.clone() } else { h.t().to_owned().reversed_axes().to_owned() };
            let (vals, vecs) = eigh(&input).unwrap();
            for k in 0..2 {
                let v = vecs.column(k).to_owned();
                let hv = h.dot(&v);
                let lv = v.mapv(|z| z * vals[k]);
                assert!(max_abs_diff(
                    &hv.clone().insert_axis(ndarray::Axis(1)),
                    &lv.insert_axis(ndarray::Axis(1))
                ) < 1e-12);
            }
        }
    }

    #[test]
    fn evolution_is_unitary_and_matches_phase() {
        let h = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        let u = evolution_operator(&h, 0.25).unwrap();
        assert!(unitarity_deviation(&u) < 1e-12);
        // e^{-i 2 pi * 1 * 0.25} = -i
        assert!((u[[0, 0]] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((u[[1, 1]] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn unitary_eig_reconstructs_degenerate_case() {
        // U with degenerate cosine but distinct phases +/- pi/2
        let h = random_hermitian(6, 7);
        let u = evolution_operator(&h, 0.1).unwrap();
        let (phases, vecs) = unitary_eig(&u, 1e-8).unwrap();
        assert_eq!(phases.len(), 6);
        assert!(unitarity_deviation(&vecs) < 1e-8);
    }

    #[test]
    fn unitary_eig_phase_matches_hamiltonian() {
        let h = array![[c(0.3, 0.0), c(0.1, 0.05)], [c(0.1, -0.05), c(-0.2, 0.0)]];
        let t = 0.2;
        let u = evolution_operator(&h, t).unwrap();
        let (mut phases, _) = unitary_eig(&u, 1e-10).unwrap();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (vals, _) = eigh(&h).unwrap();
        let mut expected: Vec<f64> = vals.iter().map(|e| -TWO_PI * e * t).collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (p, e) in phases.iter().zip(expected.iter()) {
            assert!((p - e).abs() < 1e-10, "phase {p} vs {e}");
        }
    }

    #[test]
    fn small_expm_matches_eigh_route() {
        let h = random_hermitian(8, 11);
        let t = 0.31;
        let a = h.mapv(|z| z * C64::new(0.0, -TWO_PI * t));
        let via_taylor = small_expm(&a);
        let via_eigh = evolution_operator(&h, t).unwrap();
        assert!(max_abs_diff(&via_taylor, &via_eigh) < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 40;
        let h = random_hermitian(n, 3);
        let apply = |v: ArrayView1<C64>| h.dot(&v);
        let mut psi0 = Array1::from_elem(n, c(1.0, 0.3));
        normalize(&mut psi0);
        let t = 0.7;
        let krylov = lanczos_expv(&apply, psi0.view(), t, 30, 1e-12).unwrap();
        let (vals, vecs) = eigh(&h).unwrap();
        let dense = evolve_state_eig(&vals, &vecs, psi0.view(), t);
        let err: f64 = krylov
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "krylov vs dense error {err}");
    }
}
