//! Laplacians, symmetric eigendecomposition, spectral responses, and
//! polynomial filter fitting.
//!
//! The Laplacian matrices are produced through the expression evaluator
//! (the degree matrix is A^2 ⊙ I), the eigensolver is a cyclic Jacobi
//! iteration, and filters are least-squares polynomial fits of a target
//! response over the eigenvalues of the normalized Laplacian.

use crate::graph::Graph;
use crate::matlang::{build::*, eval, Expr, PointwiseFn};
use ndarray::{Array1, Array2};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |M - M^T| reaches {0:e}")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("dimension mismatch: matrix is {matrix}, decomposition is over {decomp}")]
    DimensionMismatch { matrix: usize, decomp: usize },
    #[error("unknown filter `{0}`")]
    UnknownFilter(String),
}

/// Eigendecomposition M = U diag(lambda) U^T with ascending eigenvalues
/// and orthogonal U (columns are eigenvectors).
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub lambdas: Array1<f64>,
    pub u: Array2<f64>,
}

impl SpectralDecomp {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }
}

/// Expression computing the (normalized) Laplacian from A.
pub fn laplacian_expr(normalized: bool) -> Expr {
    let d = had(mm(a(), a()), i());
    if normalized {
        // I - D^(-1/2) A D^(-1/2); isolated nodes get a zero inverse root.
        let d_inv_sqrt = pw(PointwiseFn::RecipSqrt, d);
        sub(i(), mm(mm(d_inv_sqrt.clone(), a()), d_inv_sqrt))
    } else {
        sub(d, a())
    }
}

/// L = D - A, or the normalized L = I - D^(-1/2) A D^(-1/2), evaluated
/// through the expression interpreter.
pub fn laplacian(g: &Graph, normalized: bool) -> Array2<f64> {
    eval(&laplacian_expr(normalized), g)
        .expect("laplacian expression is well shaped")
        .as_matrix()
        .expect("laplacian expression yields a matrix")
        .clone()
}

/// Convergence threshold on the off-diagonal Frobenius norm.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let x = a[p * n + q];
            s += 2.0 * x * x;
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Requires `|M - M^T|` below 1e-9 elementwise; iterates sweeps until the
/// off-diagonal Frobenius norm falls below 1e-12, failing after 100 sweeps.
pub fn eig_sym(m: &Array2<f64>) -> Result<SpectralDecomp, SpectralError> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    if asym >= 1e-9 {
        return Err(SpectralError::NotSymmetric(asym));
    }

    // Flat row-major working copy; `a` is kept symmetric throughout.
    // Eigenvectors accumulate transposed (row e of `vt` is eigenvector e)
    // so rotations touch two contiguous rows instead of two strided
    // columns.
    let mut a: Vec<f64> = m.iter().copied().collect();
    let mut vt = vec![0.0f64; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }

    let mut converged = false;
    let mut off = off_diagonal_norm(&a, n);
    for sweep in 0..JACOBI_MAX_SWEEPS {
        if off < JACOBI_TOL {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // After a few sweeps, entries negligible against the
                // diagonal are zeroed outright instead of rotated.
                let small = 100.0 * apq.abs();
                if sweep >= 4 && app.abs() + small == app.abs() && aqq.abs() + small == aqq.abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                // Stable rotation choice (smaller angle root).
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // Rotate rows p and q contiguously, mirroring into the
                // columns. In-bounds by the loop ranges; unchecked access
                // keeps this O(n^3) kernel tight.
                unsafe {
                    let (rp, rq) = (p * n, q * n);
                    for k in 0..n {
                        if k != p && k != q {
                            let akp = *a.get_unchecked(rp + k);
                            let akq = *a.get_unchecked(rq + k);
                            let new_kp = akp - s * (akq + tau * akp);
                            let new_kq = akq + s * (akp - tau * akq);
                            *a.get_unchecked_mut(rp + k) = new_kp;
                            *a.get_unchecked_mut(k * n + p) = new_kp;
                            *a.get_unchecked_mut(rq + k) = new_kq;
                            *a.get_unchecked_mut(k * n + q) = new_kq;
                        }
                    }
                    for k in 0..n {
                        let vkp = *vt.get_unchecked(rp + k);
                        let vkq = *vt.get_unchecked(rq + k);
                        *vt.get_unchecked_mut(rp + k) = vkp - s * (vkq + tau * vkp);
                        *vt.get_unchecked_mut(rq + k) = vkq + s * (vkp - tau * vkq);
                    }
                }
            }
        }
        off = off_diagonal_norm(&a, n);
    }
    if !converged && off >= JACOBI_TOL {
        return Err(SpectralError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("eigenvalues are finite")
    });
    let lambdas = Array1::from_iter(order.iter().map(|&i| a[i * n + i]));
    let u = Array2::from_shape_fn((n, n), |(r, c)| vt[order[c] * n + r]);
    Ok(SpectralDecomp { lambdas, u })
}

/// phi_k = (U^T C U)_kk, ordered by ascending eigenvalue.
pub fn spectral_response(
    c: &Array2<f64>,
    d: &SpectralDecomp,
) -> Result<Array1<f64>, SpectralError> {
    let n = d.n();
    if c.dim() != (n, n) {
        return Err(SpectralError::DimensionMismatch {
            matrix: c.dim().0,
            decomp: n,
        });
    }
    let cu = c.dot(&d.u);
    let mut phi = Array1::zeros(n);
    for k in 0..n {
        phi[k] = d.u.column(k).dot(&cu.column(k));
    }
    Ok(phi)
}

/// Filter targets over the normalized-Laplacian spectrum [0, 2].
#[derive(Clone, Debug)]
pub enum FilterSpec {
    /// exp(-5 λ^2)
    Lowpass,
    /// 1 - exp(-5 λ^2)
    Highpass,
    /// exp(-50 (λ-1)^2), deliberately sharp.
    Bandpass,
    /// Piecewise-linear interpolation of tabulated (λ, Ω) samples.
    Custom(Vec<(f64, f64)>),
}

impl FilterSpec {
    pub fn parse(name: &str) -> Result<FilterSpec, SpectralError> {
        match name {
            "lowpass" => Ok(FilterSpec::Lowpass),
            "highpass" => Ok(FilterSpec::Highpass),
            "bandpass" => Ok(FilterSpec::Bandpass),
            other => Err(SpectralError::UnknownFilter(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterSpec::Lowpass => "lowpass",
            FilterSpec::Highpass => "highpass",
            FilterSpec::Bandpass => "bandpass",
            FilterSpec::Custom(_) => "custom",
        }
    }

    pub fn response(&self, lambda: f64) -> f64 {
        match self {
            FilterSpec::Lowpass => (-5.0 * lambda * lambda).exp(),
            FilterSpec::Highpass => 1.0 - (-5.0 * lambda * lambda).exp(),
            FilterSpec::Bandpass => (-50.0 * (lambda - 1.0) * (lambda - 1.0)).exp(),
            FilterSpec::Custom(points) => {
                let mut pts = points.clone();
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite filter samples"));
                if pts.is_empty() {
                    return 0.0;
                }
                if lambda <= pts[0].0 {
                    return pts[0].1;
                }
                for w in pts.windows(2) {
                    let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                    if lambda <= x1 {
                        if x1 == x0 {
                            return y1;
                        }
                        return y0 + (y1 - y0) * (lambda - x0) / (x1 - x0);
                    }
                }
                pts.last().unwrap().1
            }
        }
    }
}

/// Result of one polynomial filter fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    /// Monomial coefficients c_k of Σ c_k λ^k.
    pub coefficients: Vec<f64>,
    /// The assembled filter matrix Σ c_k L_n^k.
    pub fitted: Array2<f64>,
    /// 1 - SS_res/SS_tot of the assembled matrix's spectral response
    /// against the target, over the graph's eigenvalues.
    pub r2: f64,
    /// Set when the normal equations were rank-deficient (e.g. the degree
    /// reaches the number of distinct eigenvalues) and the pseudo-inverse
    /// fallback decided the fit.
    pub degenerate: bool,
}

impl FitResult {
    /// Report JSON `{filter, degree, coefficients, r2}` (plus a
    /// `degenerate` marker when the fallback was used).
    pub fn to_report(&self, filter: &FilterSpec, degree: usize) -> FitReport {
        FitReport {
            filter: filter.name().to_string(),
            degree,
            coefficients: self.coefficients.clone(),
            r2: self.r2,
            degenerate: self.degenerate.then_some(true),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub filter: String,
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<bool>,
}

/// Amortizes the eigendecomposition and the Laplacian power cache across
/// several fits on one graph.
pub struct FilterFitter {
    decomp: SpectralDecomp,
    /// Powers of (L_n - I); the shifted variable u = λ - 1 spans [-1, 1],
    /// which keeps the normal equations workable at degree ~20 where raw
    /// powers of λ on [0, 2] would lose the fit to rounding.
    shifted_powers: Vec<Array2<f64>>,
}

impl FilterFitter {
    pub fn new(g: &Graph) -> Result<FilterFitter, SpectralError> {
        let ln = laplacian(g, true);
        let decomp = eig_sym(&ln)?;
        let n = g.n();
        let mut shifted = ln;
        for i in 0..n {
            shifted[[i, i]] -= 1.0;
        }
        Ok(FilterFitter {
            decomp,
            shifted_powers: vec![Array2::eye(n), shifted],
        })
    }

    pub fn decomp(&self) -> &SpectralDecomp {
        &self.decomp
    }

    fn shifted_power(&mut self, k: usize) -> Array2<f64> {
        while self.shifted_powers.len() <= k {
            let last = self.shifted_powers.last().unwrap();
            let next = last.dot(&self.shifted_powers[1]);
            self.shifted_powers.push(next);
        }
        self.shifted_powers[k].clone()
    }

    /// Least-squares fit of degree `degree`. The 1-D problem is solved in
    /// the shifted basis by normal equations with an eigendecomposition
    /// pseudo-inverse; the reported coefficients are re-expanded to the
    /// plain monomial basis in λ.
    pub fn fit(&mut self, spec: &FilterSpec, degree: usize) -> Result<FitResult, SpectralError> {
        let lambdas = self.decomp.lambdas.clone();
        let n = lambdas.len();
        let m = degree + 1;
        let targets: Vec<f64> = lambdas.iter().map(|&l| spec.response(l)).collect();

        // Vandermonde in u = λ - 1.
        let mut vmat = Array2::zeros((n, m));
        for i in 0..n {
            let u = lambdas[i] - 1.0;
            let mut p = 1.0;
            for k in 0..m {
                vmat[[i, k]] = p;
                p *= u;
            }
        }
        let gram = vmat.t().dot(&vmat);
        let rhs = vmat.t().dot(&Array1::from(targets.clone()));

        // Pseudo-inverse through the symmetric eigendecomposition of the
        // Gram matrix; tiny eigenvalues are truncated.
        let gd = eig_sym(&gram)?;
        let mu_max = gd
            .lambdas
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let cutoff = mu_max * 1e-13;
        let mut truncated = false;
        let uty = gd.u.t().dot(&rhs);
        let mut scaled = Array1::zeros(m);
        for k in 0..m {
            if gd.lambdas[k].abs() > cutoff {
                scaled[k] = uty[k] / gd.lambdas[k];
            } else {
                truncated = true;
            }
        }
        let shifted_coeffs = gd.u.dot(&scaled);

        let distinct = count_distinct(&lambdas);
        let degenerate = truncated || degree >= distinct;

        // Assemble Σ c'_k (L_n - I)^k.
        let mut fitted = Array2::zeros((n, n));
        for k in 0..m {
            if shifted_coeffs[k] != 0.0 {
                fitted = fitted + self.shifted_power(k) * shifted_coeffs[k];
            }
        }

        // Re-expand Σ c'_k (λ-1)^k into Σ c_k λ^k via binomials.
        let mut coefficients = vec![0.0f64; m];
        for k in 0..m {
            let ck = shifted_coeffs[k];
            if ck == 0.0 {
                continue;
            }
            let mut binom = 1.0f64;
            for (j, slot) in coefficients.iter_mut().take(k + 1).enumerate() {
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                *slot += ck * sign * binom;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }

        // End-to-end score: response of the assembled matrix.
        let phi = spectral_response(&fitted, &self.decomp)?;
        let mean = targets.iter().sum::<f64>() / n as f64;
        let ss_tot: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
        let ss_res: f64 = targets
            .iter()
            .zip(phi.iter())
            .map(|(t, p)| (t - p) * (t - p))
            .sum();
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else if ss_res < 1e-18 {
            1.0
        } else {
            0.0
        };

        Ok(FitResult {
            coefficients,
            fitted,
            r2,
            degenerate,
        })
    }
}

fn count_distinct(lambdas: &Array1<f64>) -> usize {
    let mut sorted: Vec<f64> = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let mut count = if sorted.is_empty() { 0 } else { 1 };
    for w in sorted.windows(2) {
        if (w[1] - w[0]).abs() > 1e-9 {
            count += 1;
        }
    }
    count
}

/// One-shot fit on a graph's normalized Laplacian.
pub fn fit_filter(
    g: &Graph,
    spec: &FilterSpec,
    degree: usize,
) -> Result<FitResult, SpectralError> {
    FilterFitter::new(g)?.fit(spec, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, erdos_renyi, grid, Graph};

    fn max_abs(m: &Array2<f64>) -> f64 {
        m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    #[test]
    fn laplacian_of_an_edge() {
        let k2 = complete(2);
        let l = laplacian(&k2, false);
        assert_eq!(l[[0, 0]], 1.0);
        assert_eq!(l[[0, 1]], -1.0);
        // With unit degrees the normalized Laplacian coincides.
        assert_eq!(laplacian(&k2, true), l);
    }

    #[test]
    fn normalized_cycle_spectrum() {
        let d = eig_sym(&laplacian(&cycle(4), true)).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0];
        for (k, &e) in expected.iter().enumerate() {
            assert!((d.lambdas[k] - e).abs() < 1e-10, "eigenvalue {k}");
        }
    }

    #[test]
    fn unnormalized_cycle_spectrum() {
        let d = eig_sym(&laplacian(&cycle(4), false)).unwrap();
        let expected = [0.0, 2.0, 2.0, 4.0];
        for (k, &e) in expected.iter().enumerate() {
            assert!((d.lambdas[k] - e).abs() < 1e-10, "eigenvalue {k}");
        }
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let d = eig_sym(&Array2::eye(3)).unwrap();
        assert!(d.lambdas.iter().all(|&l| (l - 1.0).abs() < 1e-12));

        let m = Array2::from_diag(&Array1::from(vec![3.0, 1.0]));
        let d = eig_sym(&m).unwrap();
        assert!((d.lambdas[0] - 1.0).abs() < 1e-12);
        assert!((d.lambdas[1] - 3.0).abs() < 1e-12);
        // U permutes the coordinates.
        assert!((d.u[[1, 0]].abs() - 1.0).abs() < 1e-12);
        assert!((d.u[[0, 1]].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_asymmetric_input() {
        let mut m = Array2::zeros((2, 2));
        m[[0, 1]] = 1.0;
        assert!(matches!(eig_sym(&m), Err(SpectralError::NotSymmetric(_))));
    }

    #[test]
    fn decomposition_invariants_on_random_graphs() {
        for seed in 0..20 {
            let g = erdos_renyi(10 + (seed as usize % 5), 0.4, seed).unwrap();
            let ln = laplacian(&g, true);
            let d = eig_sym(&ln).unwrap();
            let n = g.n();
            let utu = d.u.t().dot(&d.u);
            assert!(max_abs(&(&utu - &Array2::<f64>::eye(n))) < 1e-8, "orthogonality");
            let recon = d.u.dot(&Array2::from_diag(&d.lambdas)).dot(&d.u.t());
            assert!(max_abs(&(&recon - &ln)) < 1e-8, "reconstruction");
            assert!(d.lambdas.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)));
        }
    }

    #[test]
    fn response_of_identity_and_laplacian_powers() {
        let g = grid(4, 4);
        let ln = laplacian(&g, true);
        let d = eig_sym(&ln).unwrap();
        let phi_i = spectral_response(&Array2::eye(16), &d).unwrap();
        assert!(phi_i.iter().all(|&x| (x - 1.0).abs() < 1e-10));

        let mut power = Array2::eye(16);
        for k in 1..=5 {
            power = power.dot(&ln);
            let phi = spectral_response(&power, &d).unwrap();
            for i in 0..16 {
                assert!(
                    (phi[i] - d.lambdas[i].powi(k)).abs() < 1e-8,
                    "lambda^{k} at index {i}"
                );
            }
        }
    }

    #[test]
    fn response_is_linear() {
        let g = erdos_renyi(8, 0.5, 2).unwrap();
        let d = eig_sym(&laplacian(&g, true)).unwrap();
        let c1 = laplacian(&g, false);
        let c2 = g.adjacency().clone();
        let combo = &c1 * 0.7 + &c2 * (-1.3);
        let lhs = spectral_response(&combo, &d).unwrap();
        let rhs = spectral_response(&c1, &d).unwrap() * 0.7
            + spectral_response(&c2, &d).unwrap() * (-1.3);
        for i in 0..8 {
            assert!((lhs[i] - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn response_dimension_mismatch() {
        let d = eig_sym(&laplacian(&cycle(4), true)).unwrap();
        assert!(matches!(
            spectral_response(&Array2::eye(5), &d),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_filter_fits_exactly() {
        let g = grid(4, 4);
        let fit = fit_filter(&g, &FilterSpec::Custom(vec![(0.0, 0.0), (2.0, 2.0)]), 1).unwrap();
        assert!((fit.r2 - 1.0).abs() < 1e-9);
        assert!(fit.coefficients[0].abs() < 1e-9, "c0 = {}", fit.coefficients[0]);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-9);
        assert!(!fit.degenerate);
    }

    #[test]
    fn degenerate_fit_is_flagged() {
        // K5's normalized Laplacian has two distinct eigenvalues.
        let fit = fit_filter(&complete(5), &FilterSpec::Lowpass, 3).unwrap();
        assert!(fit.degenerate);
        assert!(fit.r2 > 1.0 - 1e-9, "two points are interpolated exactly");
    }

    #[test]
    fn isolated_nodes_keep_the_normalized_laplacian_symmetric() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let ln = laplacian(&g, true);
        assert_eq!(ln[[2, 2]], 1.0);
        assert_eq!(ln[[2, 0]], 0.0);
        let d = eig_sym(&ln).unwrap();
        assert!(d.lambdas.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)));
    }

    #[test]
    fn lowpass_fit_on_a_small_grid_is_tight() {
        let g = grid(8, 8);
        let fit = fit_filter(&g, &FilterSpec::Lowpass, 10).unwrap();
        assert!(fit.r2 >= 0.99, "r2 = {}", fit.r2);
    }

    #[test]
    fn custom_filter_interpolates() {
        let f = FilterSpec::Custom(vec![(0.0, 1.0), (1.0, 0.0), (2.0, 1.0)]);
        assert_eq!(f.response(0.0), 1.0);
        assert_eq!(f.response(0.5), 0.5);
        assert_eq!(f.response(1.0), 0.0);
        assert_eq!(f.response(3.0), 1.0);
    }
}
