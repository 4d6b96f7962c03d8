//! Direct time propagation, used as an independent check on every
//! asymptotic prediction.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};

use crate::asymptotics::{self, settle_density, AsymptoticDecomposition};
use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, Tolerances};
use crate::operator::{devectorize, trace_distance, vectorize, DensityMatrix, Operator, C64};

/// Tolerance on the trace and positivity of propagated states.
pub const STATE_TOL: f64 = 1e-9;
/// Default verification horizon in units of the inverse gap.
pub const HORIZON_GAPS: f64 = 30.0;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
    }
}

fn norm_1(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(a: &Mat<C64>, c: f64) -> Mat<C64> {
    faer::Scale(C64::new(c, 0.0)) * a
}

fn add_identity(a: &mut Mat<C64>, c: f64) {
    for i in 0..a.nrows() {
        a[(i, i)] += C64::new(c, 0.0);
    }
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13.
pub fn expm(a: MatRef<'_, C64>) -> Result<Mat<C64>> {
    let n = a.nrows();
    let a = a.to_owned();
    let norm = norm_1(a.as_ref());
    if !norm.is_finite() {
        return Err(Error::Overflow("matrix exponential".into()));
    }
    let a2 = &a * &a;
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b = pade_coefficients(m);
            let mut u = scaled(&crate::linalg::identity(n), b[1]);
            let mut v = scaled(&crate::linalg::identity(n), b[0]);
            let mut power = crate::linalg::identity(n);
            for k in 1..=m / 2 {
                power = &power * &a2;
                u += scaled(&power, b[2 * k + 1]);
                v += scaled(&power, b[2 * k]);
            }
            let u = &a * u;
            return pade_solve(&u, &v);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let a = scaled(&a, 0.5f64.powi(s));
    let b = pade_coefficients(13);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let mut inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    inner_u = &a6 * inner_u;
    inner_u += scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]);
    add_identity(&mut inner_u, b[1]);
    let u = &a * inner_u;
    let mut v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    v = &a6 * v;
    v += scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]);
    add_identity(&mut v, b[0]);
    let mut r = pade_solve(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.norm_max().is_finite() {
        Ok(r)
    } else {
        Err(Error::Overflow("matrix exponential".into()))
    }
}

fn pade_solve(u: &Mat<C64>, v: &Mat<C64>) -> Result<Mat<C64>> {
    let p = v + u;
    let q = v - u;
    let lu = q.partial_piv_lu();
    let r = lu.solve(&p);
    if r.norm_max().is_finite() {
        Ok(r)
    } else {
        Err(Error::Overflow("matrix exponential".into()))
    }
}

/// `exp(L t)` on vectorized operators.
#[derive(Clone, Debug)]
pub struct Propagator {
    t: f64,
    matrix: Mat<C64>,
}

impl Propagator {
    pub fn new(l: &Liouvillian, t: f64) -> Result<Self> {
        check_time(t)?;
        let a = faer::Scale(C64::new(t, 0.0)) * l.matrix().as_mat();
        Ok(Propagator {
            t,
            matrix: expm(a.as_ref())?,
        })
    }

    /// `exp(L^† t)` for observables.
    pub fn heisenberg(l: &Liouvillian, t: f64) -> Result<Self> {
        check_time(t)?;
        let a = faer::Scale(C64::new(t, 0.0)) * l.adjoint_matrix().as_mat();
        Ok(Propagator {
            t,
            matrix: expm(a.as_ref())?,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    /// Applies the propagator to an operator without validation.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let v = vectorize(x);
        if v.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: v.len(),
            });
        }
        let out = &self.matrix * v.as_col();
        devectorize(&crate::operator::SuperVector::from_col(out))
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        settle_density(self.apply(rho.as_operator())?, STATE_TOL, STATE_TOL)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// `exp(L t) rho` for `t >= 0`.
pub fn propagate(l: &Liouvillian, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    Propagator::new(l, t)?.apply_state(rho)
}

/// `exp(L^† t) X` for `t >= 0`.
pub fn heisenberg_propagate(l: &Liouvillian, x: &Operator, t: f64) -> Result<Operator> {
    Propagator::heisenberg(l, t)?.apply(x)
}

/// Verification horizon `30 / gap`, or `None` when nothing decays.
pub fn horizon(gap: f64) -> Option<f64> {
    (gap.is_finite() && gap > 0.0).then(|| HORIZON_GAPS / gap)
}

/// Trace distance between `exp(L t) rho` and the limit-set state at each
/// time; `times` must be sorted.
pub fn convergence_profile(
    l: &Liouvillian,
    rho: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let dec = asymptotics::decompose(l, &Tolerances::default())?;
    convergence_profile_with(l, &dec, rho, times)
}

/// As [`convergence_profile`] with a precomputed decomposition.
pub fn convergence_profile_with(
    l: &Liouvillian,
    dec: &AsymptoticDecomposition,
    rho: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidDensityMatrix("times must be sorted".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let evolved = Propagator::new(l, t)?.apply(rho.as_operator())?;
        let limit = dec.limit_operator(rho.as_operator(), t)?;
        out.push((t, trace_distance(&evolved, &limit)?));
    }
    Ok(out)
}

/// Least-squares slope of `ln(distance)` against time over the given samples.
pub fn log_slope(profile: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    num / den
}
