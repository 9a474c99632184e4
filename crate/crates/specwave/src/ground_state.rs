//! Ground-state profiles φ of the focusing NLS and the linearization
//! potentials they generate.
//!
//! The standing wave e^{itα²}φ(r) solves
//!
//!     α²φ − Δφ = φ^{2p+1},   φ > 0 radial, φ → 0 as r → ∞,
//!
//! which in the radial variable u = rφ becomes the separatrix problem
//!
//!     u″ = α²u − u^{2p+1}/r^{2p},   u(0) = 0,  u′(0) = φ(0) =: d.
//!
//! For d above the critical slope d* the trajectory crosses zero; below d*
//! it eventually regrows exponentially without crossing. `solve_ground_state`
//! brackets d* by bisection on those two behaviours, integrates the
//! separatrix with a fixed-step RK4 scheme, samples it on the grid (with an
//! e^{−αr} tail patch beyond the radius where the bracket width starts to
//! contaminate the trajectory), and finally polishes the samples with a
//! damped Newton iteration on the *discrete* boundary-value problem
//!
//!     Lφ + α²φ − |φ|^{2p}φ = 0
//!
//! (L the flux-form radial Laplacian of the grid). The returned profile is
//! therefore the exact discrete ground state to rounding accuracy: the
//! discrete L₋ = L + μ − φ^{2p} annihilates φ exactly, and — since φ > 0 is
//! then the Perron ground vector of a Jacobi-type matrix — the discrete L₋
//! is positive semidefinite, which is what the spectral-symmetry arguments
//! downstream consume.

use crate::error::{Result, SpecError};
use crate::grid::{apply_radial_laplacian, radial_laplacian_bands, RadialGrid};
use crate::linalg::tridiag_solve;
use crate::operator::PotentialPair;
use ndarray::Array1;

/// Relative bracket width at which the separatrix slope is considered
/// resolved (close to f64 resolution; the two branches are numerically
/// indistinguishable below this).
const BRACKET_REL: f64 = 1e-15;

/// RK4 step is δ = `STEP_SCALE`/α: the profile varies on the scale 1/α, so
/// the local truncation error per unit radius is O((αδ)⁴) ≈ 1e−13.
const STEP_SCALE: f64 = 5e-4;

/// Integrate classification probes out to r = `PROBE_SCALE`/α. Near the
/// resolved bracket both branches hug the separatrix until
/// r ≈ ln(1/BRACKET_REL)/(2α) ≈ 17/α and reveal themselves within a few
/// additional units of αr.
const PROBE_SCALE: f64 = 24.0;

/// Converged ground-state profile sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct SolitonProfile {
    /// Frequency parameter α > 0 of the standing wave e^{itα²}φ.
    pub alpha: f64,
    /// Nonlinearity power p > 0 (the power in |ψ|^{2p}ψ).
    pub p: f64,
    /// Samples φ(r_k) > 0 on the grid nodes, strictly decreasing.
    pub phi: Array1<f64>,
    /// φ(0), extrapolated quadratically from the three smallest nodes.
    pub phi0: f64,
    /// Max-norm of the discrete defect α²φ + Lφ − |φ|^{2p}φ over the nodes.
    pub residual: f64,
    /// Separatrix slope u′(0) = φ(0) found by shooting, before the grid
    /// polish; this is a continuum-accurate estimate of φ(0) independent of
    /// the grid resolution (diagnostic).
    pub slope0: f64,
}

/// Outcome of a single shooting probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// Trajectory crossed zero: initial slope above the separatrix.
    TooLarge,
    /// Trajectory regrew (or never turned over) while staying positive:
    /// initial slope below the separatrix.
    TooSmall,
}

/// Right-hand side of u″ = α²u − |u|^{2p}u/r^{2p}, written with the odd
/// extension |u|^{2p}u so probes that dip below zero remain meaningful.
#[derive(Clone, Copy)]
struct Rhs {
    alpha2: f64,
    two_p: f64,
    /// 2p as a small integer when it is one (fast path for powi).
    two_p_int: Option<i32>,
}

/// 2p as a small integer exponent when it is one (fast path for powi; also
/// keeps φ² bitwise equal to φ·φ so downstream identities are exact).
fn small_int_exponent(q: f64) -> Option<i32> {
    let rounded = q.round();
    if (q - rounded).abs() < 1e-12 && (1.0..=16.0).contains(&rounded) {
        Some(rounded as i32)
    } else {
        None
    }
}

/// |x|^q with the integer fast path.
#[inline]
fn abs_power(x: f64, q: f64, q_int: Option<i32>) -> f64 {
    let a = x.abs();
    match q_int {
        Some(k) => a.powi(k),
        None => a.powf(q),
    }
}

impl Rhs {
    fn new(alpha: f64, p: f64) -> Self {
        let two_p = 2.0 * p;
        Rhs {
            alpha2: alpha * alpha,
            two_p,
            two_p_int: small_int_exponent(two_p),
        }
    }

    #[inline]
    fn eval(&self, r: f64, u: f64) -> f64 {
        if r == 0.0 || u == 0.0 {
            return self.alpha2 * u;
        }
        let pow = abs_power(u / r, self.two_p, self.two_p_int);
        self.alpha2 * u - pow * u
    }
}

/// One classical RK4 step for (u, u′).
#[inline]
fn rk4_step(rhs: &Rhs, r: f64, u: f64, v: f64, h: f64) -> (f64, f64) {
    let k1u = v;
    let k1v = rhs.eval(r, u);
    let k2u = v + 0.5 * h * k1v;
    let k2v = rhs.eval(r + 0.5 * h, u + 0.5 * h * k1u);
    let k3u = v + 0.5 * h * k2v;
    let k3v = rhs.eval(r + 0.5 * h, u + 0.5 * h * k2u);
    let k4u = v + h * k3v;
    let k4v = rhs.eval(r + h, u + h * k3u);
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Classify an initial slope d = u′(0) as above or below the separatrix.
///
/// Crossing zero identifies the high branch immediately. The low branch is
/// recognized either by regrowth — the trajectory turned over (u′ < 0 seen),
/// and later doubles back above twice its running minimum with u′ > 0 — or
/// by reaching the probe radius still positive.
fn classify(rhs: &Rhs, d: f64, delta: f64, r_probe: f64) -> Branch {
    let mut r = 0.0;
    let mut u = 0.0;
    let mut v = d;
    let mut armed = false;
    let mut u_min = f64::INFINITY;
    while r < r_probe {
        let (nu, nv) = rk4_step(rhs, r, u, v, delta);
        r += delta;
        u = nu;
        v = nv;
        if !u.is_finite() {
            // overflow only happens on the exponentially regrowing branch
            return Branch::TooSmall;
        }
        if u <= 0.0 {
            return Branch::TooLarge;
        }
        if v < 0.0 {
            armed = true;
        }
        if armed {
            u_min = u_min.min(u);
            if v > 0.0 && u > 2.0 * u_min {
                return Branch::TooSmall;
            }
        }
    }
    Branch::TooSmall
}

/// Dense separatrix trajectory: u and u′ stored every δ starting at r = 0.
struct Trajectory {
    delta: f64,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl Trajectory {
    fn integrate(rhs: &Rhs, d: f64, delta: f64, r_end: f64) -> Trajectory {
        let steps = (r_end / delta).ceil() as usize + 1;
        let mut u = Vec::with_capacity(steps + 1);
        let mut du = Vec::with_capacity(steps + 1);
        u.push(0.0);
        du.push(d);
        let (mut cu, mut cv) = (0.0, d);
        let mut r = 0.0;
        for _ in 0..steps {
            let (nu, nv) = rk4_step(rhs, r, cu, cv, delta);
            r += delta;
            cu = nu;
            cv = nv;
            u.push(cu);
            du.push(cv);
        }
        Trajectory { delta, u, du }
    }

    /// Cubic Hermite interpolation of u(r).
    fn eval(&self, r: f64) -> f64 {
        let s = r / self.delta;
        let i = (s.floor() as usize).min(self.u.len() - 2);
        let t = s - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.u[i] * h00
            + self.delta * self.du[i] * h10
            + self.u[i + 1] * h01
            + self.delta * self.du[i + 1] * h11
    }
}

/// Quadratic Lagrange extrapolation to r = 0 from the three smallest nodes.
fn extrapolate_origin(r: &[f64], f: &[f64]) -> f64 {
    let (r0, r1, r2) = (r[0], r[1], r[2]);
    let (f0, f1, f2) = (f[0], f[1], f[2]);
    f0 * (r1 * r2) / ((r0 - r1) * (r0 - r2)) + f1 * (r0 * r2) / ((r1 - r0) * (r1 - r2))
        + f2 * (r0 * r1) / ((r2 - r0) * (r2 - r1))
}

/// Damped Newton polish of the grid samples toward the discrete ground
/// state: solves Lφ + α²φ − |φ|^{2p}φ = 0 with the grid's flux-form
/// Laplacian (tridiagonal Jacobian, Thomas solves). Returns the final
/// max-norm defect.
fn polish_on_grid(rhs: &Rhs, grid: &RadialGrid, phi: &mut Array1<f64>) -> Result<f64> {
    let n = grid.n;
    let (ldiag, lupper, llower) = radial_laplacian_bands(grid);
    let defect = |phi: &Array1<f64>| -> Array1<f64> {
        let mut f = Array1::<f64>::zeros(n);
        for k in 0..n {
            let mut acc = ldiag[k] * phi[k];
            if k > 0 {
                acc += llower[k - 1] * phi[k - 1];
            }
            if k + 1 < n {
                acc += lupper[k] * phi[k + 1];
            }
            // α²φ + Lφ − |φ|^{2p}φ, using rhs.eval(1, φ) = α²φ − |φ|^{2p}φ
            f[k] = acc + rhs.eval(1.0, phi[k]);
        }
        f
    };
    let phi_scale = phi.iter().cloned().fold(0.0_f64, f64::max).max(1e-30);
    let diag_scale = ldiag.iter().cloned().fold(0.0_f64, f64::max);
    let nl_scale = rhs.alpha2 + (rhs.two_p + 1.0) * (phi_scale).powf(rhs.two_p);
    let floor = 32.0 * f64::EPSILON * (diag_scale + nl_scale) * phi_scale;

    let mut f = defect(phi);
    let mut fnorm = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for _ in 0..60 {
        if fnorm <= floor {
            break;
        }
        // Jacobian: L + α² − (2p+1)|φ|^{2p} on the diagonal.
        let mut jd = Array1::<f64>::zeros(n);
        for k in 0..n {
            let pow = abs_power(phi[k], rhs.two_p, rhs.two_p_int);
            jd[k] = ldiag[k] + rhs.alpha2 - (rhs.two_p + 1.0) * pow;
        }
        let step = tridiag_solve(&llower.view(), &jd.view(), &lupper.view(), &f.view())?;
        // Damped update: halve until the defect does not increase.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &*phi - &(lambda * &step);
            let ft = defect(&trial);
            let ftn = ft.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if ftn < fnorm {
                *phi = trial;
                f = ft;
                fnorm = ftn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break; // stagnated at (or below) the rounding floor
        }
    }
    Ok(fnorm)
}

/// Solve the ground-state problem on the given grid.
///
/// `tol` bounds the max-norm of the discrete defect α²φ + Lφ − |φ|^{2p}φ of
/// the returned samples; the polish drives it to the rounding floor
/// (~‖L‖·φ(0)·ε), so any `tol` above that floor is attainable and `tol = 0`
/// reports a convergence error.
pub fn solve_ground_state(
    alpha: f64,
    p: f64,
    grid: &RadialGrid,
    tol: f64,
) -> Result<SolitonProfile> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(SpecError::Domain(format!(
            "ground state requires alpha > 0, got {alpha}"
        )));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(SpecError::Domain(format!(
            "ground state requires nonlinearity power p > 0, got {p}"
        )));
    }
    if tol < 0.0 || !tol.is_finite() {
        return Err(SpecError::Domain(format!(
            "ground state tolerance must be a finite non-negative number, got {tol}"
        )));
    }
    let rhs = Rhs::new(alpha, p);
    let delta = STEP_SCALE / alpha;
    let r_probe = PROBE_SCALE / alpha;

    // Bracket the separatrix slope. φ(0) scales like α^{1/p}·O(1).
    let scale = alpha.powf(1.0 / p);
    let mut lo = 0.05 * scale;
    let mut hi = 2.0 * scale;
    let mut history: Vec<(f64, &'static str)> = Vec::new();
    let mut guard = 0;
    while classify(&rhs, hi, delta, r_probe) == Branch::TooSmall {
        history.push((hi, "below"));
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(SpecError::Convergence(format!(
                "shooting bracket expansion failed: no sign-change branch up to u'(0) = {hi:.3e} \
                 (history: {history:?})"
            )));
        }
    }
    guard = 0;
    while classify(&rhs, lo, delta, r_probe) == Branch::TooLarge {
        history.push((lo, "above"));
        lo *= 0.5;
        guard += 1;
        if guard > 60 {
            return Err(SpecError::Convergence(format!(
                "shooting bracket expansion failed: no positive branch down to u'(0) = {lo:.3e} \
                 (history: {history:?})"
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= BRACKET_REL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(&rhs, mid, delta, r_probe) {
            Branch::TooLarge => hi = mid,
            Branch::TooSmall => lo = mid,
        }
    }
    let d_star = lo; // positive-branch side of the resolved bracket
    let width = (hi - lo).max(f64::EPSILON * d_star);

    // Dense separatrix trajectory out to the grid wall or probe radius.
    let r_store = grid.wall().min(r_probe);
    let traj = Trajectory::integrate(&rhs, d_star, delta, r_store);

    // Tail-patch radius: beyond r_p the bracket uncertainty, amplified like
    // e^{2αr}, would exceed ~1e−9 of the trajectory, so switch to the exact
    // far-field decay u(r) = u(r_p)e^{−α(r−r_p)} of the linearized equation.
    let r_half = (6.0 / alpha).min(0.75 * r_store);
    let c_est = traj.eval(r_half) * (alpha * r_half).exp();
    let arg = 2.0 * alpha * 1e-9 * c_est.max(f64::MIN_POSITIVE) / width;
    let mut r_p = if arg > 1.0 {
        arg.ln() / (2.0 * alpha)
    } else {
        r_half
    };
    r_p = r_p.clamp(r_half, r_store - 2.0 * delta);
    let u_p = traj.eval(r_p);

    // Sample on the grid.
    let mut phi = Array1::<f64>::zeros(grid.n);
    for k in 0..grid.n {
        let r = grid.r[k];
        let u = if r <= r_p {
            traj.eval(r)
        } else {
            u_p * (-alpha * (r - r_p)).exp()
        };
        phi[k] = u / r;
    }

    // Polish to the discrete ground state.
    let residual = polish_on_grid(&rhs, grid, &mut phi)?;
    if residual > tol {
        return Err(SpecError::Convergence(format!(
            "ground-state defect {residual:.3e} exceeds requested tolerance {tol:.3e} \
             (rounding floor of the discrete problem is ~{:.1e})",
            32.0 * f64::EPSILON * (4.0 / grid.steps[0].powi(2)) * d_star
        )));
    }

    // Invariants of the profile.
    for k in 0..grid.n {
        if !(phi[k] > 0.0) {
            return Err(SpecError::Invariant(format!(
                "ground state not positive at node {k} (r = {:.4}): {}",
                grid.r[k], phi[k]
            )));
        }
        if k > 0 && !(phi[k] < phi[k - 1]) {
            return Err(SpecError::Invariant(format!(
                "ground state not strictly decreasing at node {k} (r = {:.4})",
                grid.r[k]
            )));
        }
    }
    // Far field: log φ + αr + log r stays bounded (decay ~ e^{−αr}/r). Two
    // grid effects are removed before measuring the drift: the Dirichlet
    // wall forces the image form u ∝ e^{−αr}(1 − e^{−2α(wall−r)}), whose
    // log-dip at the last nodes is physical for the boundary-value problem,
    // and the discrete dispersion relation shifts the exponential rate by
    // O((αh)²·αR), which the budget absorbs.
    let tail_start = 0.5 * grid.r_max;
    let wall = grid.wall();
    let mut tmin = f64::INFINITY;
    let mut tmax = f64::NEG_INFINITY;
    for k in 0..grid.n {
        let r = grid.r[k];
        if r >= tail_start {
            let image = (-(-2.0 * alpha * (wall - r)).exp_m1()).max(f64::MIN_POSITIVE);
            let q = phi[k].ln() + alpha * r + r.ln() - image.ln();
            tmin = tmin.min(q);
            tmax = tmax.max(q);
        }
    }
    let h_max = grid.steps.iter().cloned().fold(0.0_f64, f64::max);
    let drift_budget = 2.0 + grid.r_max * alpha * (alpha * h_max).powi(2);
    if tmax - tmin > drift_budget {
        return Err(SpecError::Invariant(format!(
            "far-field envelope of log φ + αr + log r drifts by {:.3} (budget {:.3}); \
             profile is not an e^{{-αr}}/r decaying ground state on this grid",
            tmax - tmin,
            drift_budget
        )));
    }

    let phi0 = extrapolate_origin(
        &[grid.r[0], grid.r[1], grid.r[2]],
        &[phi[0], phi[1], phi[2]],
    );

    Ok(SolitonProfile {
        alpha,
        p,
        phi,
        phi0,
        residual,
        slope0: d_star,
    })
}

/// Matrix linearization potentials of the standing wave:
/// V₁ = (p+1)φ^{2p}, V₂ = p·φ^{2p}.
pub fn linearized_potentials(profile: &SolitonProfile, grid: &RadialGrid) -> Result<PotentialPair> {
    if profile.phi.len() != grid.n {
        return Err(SpecError::Shape(format!(
            "profile has {} samples but grid has {} nodes",
            profile.phi.len(),
            grid.n
        )));
    }
    if profile.phi.iter().any(|&x| !(x > 0.0)) {
        return Err(SpecError::Invariant(
            "linearization requires a strictly positive profile".into(),
        ));
    }
    let two_p = 2.0 * profile.p;
    let qi = small_int_exponent(two_p);
    let phi2p = profile.phi.mapv(|x| abs_power(x, two_p, qi));
    let v1 = phi2p.mapv(|x| (profile.p + 1.0) * x);
    let v2 = phi2p.mapv(|x| profile.p * x);
    PotentialPair::new(v1, v2, grid)
}

/// Check that the profile spans the kernel of L₋ = −Δ + μ − V₁ + V₂:
/// returns the weighted relative residual ‖L₋φ‖₂/‖φ‖₂ in L²(4πr²dr).
///
/// The linearization identifies μ with α²; any other μ is a consistency
/// error.
pub fn verify_lminus_kernel(profile: &SolitonProfile, grid: &RadialGrid, mu: f64) -> Result<f64> {
    let alpha2 = profile.alpha * profile.alpha;
    if (mu - alpha2).abs() > 1e-12 * alpha2.max(1.0) {
        return Err(SpecError::Consistency(format!(
            "mu = {mu} does not match alpha² = {alpha2}: the linearization fixes μ := α²"
        )));
    }
    if profile.phi.len() != grid.n {
        return Err(SpecError::Shape(format!(
            "profile has {} samples but grid has {} nodes",
            profile.phi.len(),
            grid.n
        )));
    }
    // V₁ − V₂ = φ^{2p}, so L₋φ = Lφ + μφ − |φ|^{2p}φ.
    let two_p = 2.0 * profile.p;
    let qi = small_int_exponent(two_p);
    let lphi = apply_radial_laplacian(grid, &profile.phi.view())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..grid.n {
        let resid =
            lphi[k] + mu * profile.phi[k] - abs_power(profile.phi[k], two_p, qi) * profile.phi[k];
        num += grid.w[k] * resid * resid;
        den += grid.w[k] * profile.phi[k] * profile.phi[k];
    }
    Ok((num / den).sqrt())
}
