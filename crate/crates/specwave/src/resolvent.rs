//! Free-resolvent kernels on radial functions and limiting-absorption
//! diagnostics.
//!
//! The free operator H₀ = diag(−Δ+μ, Δ−μ) has resolvent blocks that reduce,
//! on s-wave functions with the spectral parametrization λ = μ + z², to the
//! one-dimensional Green kernels
//!
//!     upper  (−Δ − z²)^{-1}:      sin(z r_<) e^{iz r_>} / (4π z r s),
//!     lower  −(−Δ + 2μ + z²)^{-1}: −sinh(κ r_<) e^{−κ r_>} / (4π κ r s),
//!
//! with κ = √(2μ + z²), r_< = min(r,s), r_> = max(r,s). Both are evaluated
//! in the overflow-free two-exponential form (differences of decaying
//! exponentials in r±s), with a series branch for |z|(r+s) ≪ 1 so that z = 0
//! is an analytic limit rather than a division.
//!
//! `limiting_absorption_scan` probes the weighted resolvent norms
//! ‖⟨r⟩^{−σ}(H−(λ+iε))^{-1}⟨r⟩^{−σ}‖ as ε ↓ 0: on a finite ball the limit
//! is meaningful while ε stays well above the level spacing of the
//! discretized continuum, and the table exposes both the stabilization and
//! the |λ|^{−1/2} high-energy envelope.

use crate::error::{Result, SpecError};
use crate::grid::RadialGrid;
use crate::linalg::{weighted_opnorm2_power, LuFactors, C64};
use crate::operator::MatrixHamiltonian;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// Relative half-width of the band around |λ| = μ rejected by the scan
/// (threshold energies belong to the threshold machinery, not the LAP).
const LAP_BAND_TOL: f64 = 1e-6;

/// Phase threshold below which the upper kernel switches to its Taylor
/// series in z (relative accuracy ~(|z|(r+s))⁴/120 at the switch point).
const SMALL_PHASE: f64 = 1e-4;

/// Boundary side for real spectral parameters: the resolvent is evaluated
/// at z ± i0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    PlusI0,
    MinusI0,
}

/// Free-resolvent kernel pair at a point of the spectral parameter plane.
#[derive(Debug, Clone)]
pub struct ResolventKernel {
    /// Spectral parameter z (λ = μ + z²); real values carry a `side`.
    pub z: C64,
    /// Boundary side for real z; `None` for Im z > 0.
    pub side: Option<Side>,
    /// Threshold μ of the underlying operator.
    pub mu: f64,
    /// Kernel matrix of (−Δ − z²)^{-1} at the grid nodes.
    pub upper: Array2<C64>,
    /// Kernel matrix of −(−Δ + 2μ + z²)^{-1} (real and negative for real z).
    pub lower: Array2<C64>,
}

/// Upper kernel entry via (e^{iz(r+s)} − e^{iz|r−s|})/(8πiz·rs); both
/// exponents decay for Im z ≥ 0, so the form never overflows.
fn upper_entry(z: C64, r: f64, s: f64) -> C64 {
    let a = r + s;
    let b = (r - s).abs();
    let den = 8.0 * std::f64::consts::PI * r * s;
    if z.norm() * a <= SMALL_PHASE {
        // (e^{iza} − e^{izb})/(iz) = (a−b) + iz(a²−b²)/2 − z²(a³−b³)/6 − iz³(a⁴−b⁴)/24
        let iz = C64::new(0.0, 1.0) * z;
        let term1 = C64::new(a - b, 0.0);
        let term2 = 0.5 * iz * (a * a - b * b);
        let term3 = iz * iz * (a * a * a - b * b * b) / 6.0;
        let term4 = iz * iz * iz * (a * a * a * a - b * b * b * b) / 24.0;
        (term1 + term2 + term3 + term4) / den
    } else {
        let iz = C64::new(0.0, 1.0) * z;
        ((iz * a).exp() - (iz * b).exp()) / (iz * den)
    }
}

/// Lower kernel entry −(e^{−κ(r_>−r_<)} − e^{−κ(r_>+r_<)})/(8πκ·rs) with
/// Re κ > 0; real negative for real z.
fn lower_entry(kappa: C64, r: f64, s: f64) -> C64 {
    let a = r + s;
    let b = (r - s).abs();
    let den = 8.0 * std::f64::consts::PI * r * s;
    -((-kappa * b).exp() - (-kappa * a).exp()) / (kappa * den)
}

/// Radial (l = 0) reduction of the free matrix resolvent at spectral
/// parameter z. Real z requires a boundary `side`; Im z > 0 forbids one.
pub fn radial_free_resolvent(
    grid: &RadialGrid,
    mu: f64,
    z: C64,
    side: Option<Side>,
) -> Result<ResolventKernel> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(SpecError::Domain(format!(
            "threshold mu must be positive, got {mu}"
        )));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SpecError::Domain("spectral parameter must be finite".into()));
    }
    if z.im < 0.0 {
        return Err(SpecError::Domain(format!(
            "spectral parameter must have Im z ≥ 0 (the −i0 boundary value is \
             requested via the side flag), got z = {z}"
        )));
    }
    if z.im == 0.0 && side.is_none() {
        return Err(SpecError::Domain(
            "real spectral parameter needs a boundary side (+i0 / −i0)".into(),
        ));
    }
    if z.im > 0.0 && side.is_some() {
        return Err(SpecError::Domain(
            "boundary side only applies to real spectral parameters".into(),
        ));
    }
    let n = grid.n;
    // κ = √(2μ + z²), principal branch: Re κ > 0 whenever Im z ≥ 0 and
    // 2μ + z² avoids the negative real axis.
    let kappa = (C64::new(2.0 * mu, 0.0) + z * z).sqrt();
    let mut upper = Array2::<C64>::zeros((n, n));
    let mut lower = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let (r, s) = (grid.r[i], grid.r[j]);
            let up = upper_entry(z, r, s);
            let lo = lower_entry(kappa, r, s);
            upper[[i, j]] = up;
            upper[[j, i]] = up;
            lower[[i, j]] = lo;
            lower[[j, i]] = lo;
        }
    }
    // −i0 boundary values are the conjugates of the +i0 ones (for z real the
    // kernels are analytic in Im z > 0 and continuous up to the axis).
    if side == Some(Side::MinusI0) {
        upper.mapv_inplace(|w| w.conj());
        lower.mapv_inplace(|w| w.conj());
    }
    Ok(ResolventKernel {
        z,
        side,
        mu,
        upper,
        lower,
    })
}

/// One row of the limiting-absorption table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LapRow {
    pub lambda: f64,
    pub epsilon: f64,
    /// ‖⟨r⟩^{−σ}(H−(λ+iε))^{-1}⟨r⟩^{−σ}‖ in the weighted 2→2 norm.
    pub norm: f64,
}

/// Shared argument validation for the scans.
fn validate_scan(mu: f64, lambdas: &[f64], epsilons: &[f64], sigma: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(SpecError::Domain(format!(
            "threshold mu must be positive, got {mu}"
        )));
    }
    if !(sigma > 0.5) {
        return Err(SpecError::Domain(format!(
            "weight exponent must satisfy σ > 1/2, got {sigma}"
        )));
    }
    if lambdas.is_empty() || epsilons.is_empty() {
        return Err(SpecError::Domain(
            "scan needs at least one λ and one ε".into(),
        ));
    }
    for pair in epsilons.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(SpecError::Domain(
                "epsilons must be strictly decreasing".into(),
            ));
        }
    }
    if !(epsilons[epsilons.len() - 1] > 0.0) {
        return Err(SpecError::Domain("epsilons must be positive".into()));
    }
    for &lam in lambdas {
        if (lam.abs() - mu).abs() <= LAP_BAND_TOL * mu || lam.abs() < mu {
            return Err(SpecError::Domain(format!(
                "λ = {lam} lies inside the gap or on the threshold band |λ| ≈ μ = {mu}; \
                 the limiting-absorption scan needs |λ| > μ"
            )));
        }
    }
    Ok(())
}

/// Weighted resolvent norms along ε ↓ 0 rays at energies outside the gap.
///
/// For each (λ, ε) the norm ‖⟨r⟩^{−σ}(H−(λ+iε))^{-1}⟨r⟩^{−σ}‖_{2→2} is
/// computed from one LU factorization and a power iteration; rows are
/// emitted in the given (λ outer, ε inner) order.
pub fn limiting_absorption_scan(
    ham: &MatrixHamiltonian,
    lambdas: &[f64],
    epsilons: &[f64],
    sigma: f64,
) -> Result<Vec<LapRow>> {
    validate_scan(ham.mu, lambdas, epsilons, sigma)?;

    let nn = 2 * ham.n();
    let w2 = ham.w2();
    // ⟨r⟩^{−σ} on both components
    let d = {
        let mut d = Array1::<f64>::zeros(nn);
        for k in 0..ham.n() {
            let v = (1.0 + ham.grid.r[k] * ham.grid.r[k]).powf(-0.5 * sigma);
            d[k] = v;
            d[ham.n() + k] = v;
        }
        d
    };

    let mut rows = Vec::with_capacity(lambdas.len() * epsilons.len());
    for &lam in lambdas {
        for &eps in epsilons {
            let wpt = C64::new(lam, eps);
            let mut a = ham.h_complex();
            for k in 0..nn {
                a[[k, k]] -= wpt;
            }
            let lu = LuFactors::new(a)?;
            let apply = |f: &ndarray::ArrayView1<C64>| {
                let g = Array1::from_shape_fn(nn, |k| d[k] * f[k]);
                let u = lu.solve(&g.view()).expect("resolvent solve");
                Array1::from_shape_fn(nn, |k| d[k] * u[k])
            };
            let apply_adj = |f: &ndarray::ArrayView1<C64>| {
                let g = Array1::from_shape_fn(nn, |k| d[k] * f[k]);
                let u = lu.solve_adj(&g.view()).expect("resolvent adjoint solve");
                Array1::from_shape_fn(nn, |k| d[k] * u[k])
            };
            let norm = weighted_opnorm2_power(apply, apply_adj, &w2.view(), 1e-9, 300);
            rows.push(LapRow {
                lambda: lam,
                epsilon: eps,
                norm,
            });
        }
    }
    Ok(rows)
}

/// Weighted 2→2 norm of ⟨r⟩^{−σ}(B − shift)^{-1}⟨r⟩^{−σ} for a real
/// tridiagonal block B given by its bands, via Thomas solves and power
/// iteration (Bᴴ − conj(shift) is the transposed band pattern).
fn banded_block_norm(
    sub: &Array1<f64>,
    diag: &Array1<f64>,
    sup: &Array1<f64>,
    shift: C64,
    d: &Array1<f64>,
    w: &ndarray::ArrayView1<f64>,
) -> f64 {
    let n = diag.len();
    let sub_c = sub.mapv(|x| C64::new(x, 0.0));
    let sup_c = sup.mapv(|x| C64::new(x, 0.0));
    let diag_c = Array1::from_shape_fn(n, |k| C64::new(diag[k], 0.0) - shift);
    let diag_adj = Array1::from_shape_fn(n, |k| C64::new(diag[k], 0.0) - shift.conj());
    let apply = |f: &ndarray::ArrayView1<C64>| {
        let g = Array1::from_shape_fn(n, |k| d[k] * f[k]);
        let u = crate::linalg::tridiag_solve_c(&sub_c.view(), &diag_c.view(), &sup_c.view(), &g.view())
            .expect("banded resolvent solve");
        Array1::from_shape_fn(n, |k| d[k] * u[k])
    };
    let apply_adj = |f: &ndarray::ArrayView1<C64>| {
        let g = Array1::from_shape_fn(n, |k| d[k] * f[k]);
        let u = crate::linalg::tridiag_solve_c(&sup_c.view(), &diag_adj.view(), &sub_c.view(), &g.view())
            .expect("banded adjoint solve");
        Array1::from_shape_fn(n, |k| d[k] * u[k])
    };
    weighted_opnorm2_power(apply, apply_adj, w, 1e-9, 400)
}

/// Limiting-absorption scan for the free operator H₀ = diag(−Δ+μ, Δ−μ).
///
/// H₀ decouples into two tridiagonal blocks, so each (λ, ε) costs O(N)
/// Thomas solves instead of a dense 2N×2N factorization — this is what
/// makes the deep-ε stabilization window reachable: on a ball of radius R
/// the discretized continuum has level spacing ≈ 2π/R near λ = μ + 1, and
/// honest ε ladders must stay a factor ≳ 5 above it while the continuum
/// ε-convergence (rate ~ε^{min(1, σ−1/2)}) demands small ε.
pub fn free_lap_scan(
    grid: &RadialGrid,
    mu: f64,
    lambdas: &[f64],
    epsilons: &[f64],
    sigma: f64,
) -> Result<Vec<LapRow>> {
    validate_scan(mu, lambdas, epsilons, sigma)?;
    let (ldiag, lupper, llower) = crate::grid::radial_laplacian_bands(grid);
    // upper block  −Δ + μ  and lower block  Δ − μ = −(−Δ + μ)
    let up_diag = ldiag.mapv(|x| x + mu);
    let lo_diag = up_diag.mapv(|x| -x);
    let lo_sub = llower.mapv(|x| -x);
    let lo_sup = lupper.mapv(|x| -x);
    let d = Array1::from_shape_fn(grid.n, |k| {
        (1.0 + grid.r[k] * grid.r[k]).powf(-0.5 * sigma)
    });
    let mut rows = Vec::with_capacity(lambdas.len() * epsilons.len());
    for &lam in lambdas {
        for &eps in epsilons {
            let shift = C64::new(lam, eps);
            let nu = banded_block_norm(&llower, &up_diag, &lupper, shift, &d, &grid.w.view());
            let nl = banded_block_norm(&lo_sub, &lo_diag, &lo_sup, shift, &d, &grid.w.view());
            rows.push(LapRow {
                lambda: lam,
                epsilon: eps,
                norm: nu.max(nl),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, radial_laplacian, Spacing};
    use crate::linalg::{inv_c, weighted_opnorm2_dense};
    use crate::operator::assemble_hamiltonian;

    fn uniform(n: usize, r_max: f64) -> RadialGrid {
        build_grid(n, r_max, Spacing::Uniform).unwrap()
    }

    /// 3D angular-quadrature oracle: k(r,s) = (1/8π)∫_{−1}^{1} e^{izd}/d dt
    /// with d = √(r²+s²−2rst), by composite Simpson in the polar angle.
    fn angular_oracle(r: f64, s: f64, z: C64) -> C64 {
        let m = 20_000usize; // even panel count
        let h = std::f64::consts::PI / m as f64;
        let integrand = |theta: f64| -> C64 {
            let d = (r * r + s * s - 2.0 * r * s * theta.cos()).sqrt();
            (C64::new(0.0, 1.0) * z * d).exp() / d * theta.sin()
        };
        let mut acc = integrand(0.0) + integrand(std::f64::consts::PI);
        for k in 1..m {
            let wgt = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += wgt * integrand(k as f64 * h);
        }
        acc * h / 3.0 / (8.0 * std::f64::consts::PI)
    }

    #[test]
    fn upper_kernel_matches_the_angular_quadrature_oracle() {
        let grid = uniform(200, 10.0);
        let pairs = [(9usize, 59usize), (39, 119), (79, 159), (19, 179)];
        for z in [
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.5, 0.0),
        ] {
            let kern = radial_free_resolvent(&grid, 1.0, z, Some(Side::PlusI0)).unwrap();
            for &(i, j) in &pairs {
                let oracle = angular_oracle(grid.r[i], grid.r[j], z);
                let got = kern.upper[[i, j]];
                assert!(
                    (got - oracle).norm() <= 1e-6,
                    "kernel {got} vs oracle {oracle} at (r,s)=({},{}), z={z}",
                    grid.r[i],
                    grid.r[j]
                );
            }
        }
        // complex spectral parameter against the same oracle
        let z = C64::new(1.2, 0.7);
        let kern = radial_free_resolvent(&grid, 1.0, z, None).unwrap();
        for &(i, j) in &pairs {
            let oracle = angular_oracle(grid.r[i], grid.r[j], z);
            assert!((kern.upper[[i, j]] - oracle).norm() <= 1e-6);
        }
    }

    #[test]
    fn kernel_inverts_the_discrete_laplacian_on_interior_nodes() {
        let z = C64::new(1.3, 0.0);
        let mut defects = Vec::new();
        for n in [400usize, 800] {
            let grid = uniform(n, 20.0);
            let kern = radial_free_resolvent(&grid, 1.0, z, Some(Side::PlusI0)).unwrap();
            // smooth localized source
            let f = Array1::from_shape_fn(grid.n, |k| {
                let r = grid.r[k];
                C64::new((-(r - 3.0) * (r - 3.0) / 0.5).exp(), 0.0)
            });
            // φ = K W f
            let phi = Array1::from_shape_fn(grid.n, |i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..grid.n {
                    acc += kern.upper[[i, j]] * grid.w[j] * f[j];
                }
                acc
            });
            // (L − z²) φ − f on interior nodes, away from the wall where the
            // free kernel and the Dirichlet box disagree
            let lap = radial_laplacian(&grid);
            let mut defect = 0.0_f64;
            for i in 0..grid.n {
                if grid.r[i] > grid.r_max - 3.0 {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..grid.n {
                    if lap[[i, j]] != 0.0 {
                        acc += lap[[i, j]] * phi[j];
                    }
                }
                acc -= z * z * phi[i];
                defect = defect.max((acc - f[i]).norm());
            }
            defects.push(defect);
        }
        // second-order quadrature/stencil consistency: halving h divides the
        // defect by ~4
        assert!(
            defects[0] / defects[1] >= 3.0,
            "defect did not contract at second order: {defects:?}"
        );
        assert!(defects[1] <= 5e-2, "defect too large: {defects:?}");
    }

    #[test]
    fn lower_kernel_norms_decay_with_the_spectral_parameter() {
        let grid = uniform(300, 30.0);
        let mu = 1.0;
        let mut norms = Vec::new();
        for zr in [0.0, 1.0, 5.0, 10.0] {
            let kern =
                radial_free_resolvent(&grid, mu, C64::new(zr, 0.0), Some(Side::PlusI0)).unwrap();
            // operator on samples is kernel ∘ W
            let op = Array2::from_shape_fn((grid.n, grid.n), |(i, j)| {
                kern.lower[[i, j]] * grid.w[j]
            });
            // lower block is real and negative for real z
            for entry in kern.lower.iter() {
                assert_eq!(entry.im, 0.0);
                assert!(entry.re <= 0.0);
            }
            norms.push(weighted_opnorm2_dense(&op.view(), &grid.w.view()).unwrap());
        }
        for pair in norms.windows(2) {
            assert!(
                pair[1] < pair[0],
                "‖lower‖ must decrease along z: {norms:?}"
            );
        }
        // C/(1+|z|) envelope: at z=10 the norm has dropped well below the
        // z=0 value
        assert!(norms[3] <= norms[0] / 5.0, "norms {norms:?}");
    }

    #[test]
    fn conjugation_symmetry_between_the_boundary_sides_is_exact() {
        let grid = uniform(150, 12.0);
        let plus = radial_free_resolvent(&grid, 1.0, C64::new(2.0, 0.0), Some(Side::PlusI0))
            .unwrap();
        let minus = radial_free_resolvent(&grid, 1.0, C64::new(2.0, 0.0), Some(Side::MinusI0))
            .unwrap();
        for i in 0..grid.n {
            for j in 0..grid.n {
                assert_eq!(minus.upper[[i, j]], plus.upper[[i, j]].conj());
                assert_eq!(minus.lower[[i, j]], plus.lower[[i, j]].conj());
            }
        }
    }

    #[test]
    fn spectral_parameter_validation_rejects_bad_inputs() {
        let grid = uniform(32, 4.0);
        // real z without a side
        assert!(matches!(
            radial_free_resolvent(&grid, 1.0, C64::new(1.0, 0.0), None),
            Err(SpecError::Domain(_))
        ));
        // lower half plane
        assert!(matches!(
            radial_free_resolvent(&grid, 1.0, C64::new(1.0, -0.1), Some(Side::PlusI0)),
            Err(SpecError::Domain(_))
        ));
        // side with a genuinely complex z
        assert!(matches!(
            radial_free_resolvent(&grid, 1.0, C64::new(1.0, 0.5), Some(Side::PlusI0)),
            Err(SpecError::Domain(_))
        ));
        // nonpositive mu
        assert!(matches!(
            radial_free_resolvent(&grid, 0.0, C64::new(1.0, 0.0), Some(Side::PlusI0)),
            Err(SpecError::Domain(_))
        ));
    }

    #[test]
    fn first_resolvent_identity_holds_on_the_grid() {
        // Realized with the discrete resolvents (L − z²)^{-1}: the identity
        // is then conditioning-limited, which is what the 1e−8 budget means;
        // the closed-form kernels are tied to these inverses at O(h²) by the
        // interior-identity test above.
        let grid = uniform(240, 16.0);
        let lap = radial_laplacian(&grid);
        let z1 = C64::new(0.6, 0.5);
        let z2 = C64::new(1.1, 0.9);
        let resolvent = |z: C64| -> Array2<C64> {
            let a = Array2::from_shape_fn((grid.n, grid.n), |(i, j)| {
                let mut v = C64::new(lap[[i, j]], 0.0);
                if i == j {
                    v -= z * z;
                }
                v
            });
            inv_c(&a).unwrap()
        };
        let r1 = resolvent(z1);
        let r2 = resolvent(z2);
        let diff = &r1 - &r2;
        let prod = r1.dot(&r2);
        let factor = z1 * z1 - z2 * z2;
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for (d, p) in diff.iter().zip(prod.iter()) {
            num = num.max((d - factor * p).norm());
            den = den.max(d.norm());
        }
        assert!(num / den <= 1e-8, "relative identity defect {}", num / den);
    }

    #[test]
    fn lap_scan_stabilizes_and_tracks_the_high_energy_envelope() {
        let grid = uniform(600, 60.0);
        let mu = 1.0;
        let ham = assemble_hamiltonian(&grid, mu, None).unwrap();

        // stabilization at λ = 2μ as ε ↓ 0 (ε kept well above the level
        // spacing ≈ 2π/R of the discretized continuum)
        let rows = limiting_absorption_scan(&ham, &[2.0 * mu], &[0.8, 0.4, 0.2], 1.0).unwrap();
        let last = rows[rows.len() - 1].norm;
        let prev = rows[rows.len() - 2].norm;
        assert!(
            (last - prev).abs() / prev < 0.05,
            "norms did not stabilize: {rows:?}"
        );

        // |λ|^{−1/2} envelope: scaled norms bounded within a small factor
        let lams = [1.5 * mu, 3.0 * mu, 6.0 * mu, 10.0 * mu];
        let rows = limiting_absorption_scan(&ham, &lams, &[0.3], 1.0).unwrap();
        let scaled: Vec<f64> = rows.iter().map(|r| r.lambda.sqrt() * r.norm).collect();
        let mx = scaled.iter().cloned().fold(f64::MIN, f64::max);
        let mn = scaled.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            mx / mn <= 3.0,
            "scaled norms not uniformly bounded: {scaled:?}"
        );

        // threshold energy and bad arguments are domain errors
        assert!(matches!(
            limiting_absorption_scan(&ham, &[mu], &[0.1], 1.0),
            Err(SpecError::Domain(_))
        ));
        assert!(matches!(
            limiting_absorption_scan(&ham, &[2.0 * mu], &[0.1], 0.4),
            Err(SpecError::Domain(_))
        ));
        assert!(matches!(
            limiting_absorption_scan(&ham, &[2.0 * mu], &[0.1, 0.2], 1.0),
            Err(SpecError::Domain(_))
        ));
    }
}
