//! Worked examples with closed-form steady states and conserved quantities.

use crate::error::{Error, Result};
use crate::liouvillian::Model;
use crate::operator::{
    annihilation, embed, pauli_x, pauli_y, pauli_z, DensityMatrix, HilbertSpace, Operator, C64,
    I, ONE, ZERO,
};

/// A model together with analytic bases of its steady operators and
/// conserved quantities, listed in matching order so that
/// `Tr{J_a^† M_b} = delta_ab`.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub model: Model,
    pub analytic_m: Vec<Operator>,
    pub analytic_j: Vec<Operator>,
    pub notes: Vec<String>,
    /// Fock levels next to the cutoff excluded from conservation checks.
    pub interior_margin: usize,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn site(k: usize, op: &Operator, space: &HilbertSpace) -> Operator {
    embed(k, op, space).expect("catalog site in range")
}

/// One qubit with `F = Z`, `H = 0`.
pub fn dephasing() -> CatalogEntry {
    let space = HilbertSpace::qubits(1);
    let model = Model::new(space, Operator::zeros(2), vec![pauli_z()])
        .expect("valid model")
        .with_name("dephasing");
    let m: Vec<Operator> = (0..2).map(|k| Operator::matrix_unit(2, k, k)).collect();
    CatalogEntry {
        model,
        analytic_j: m.clone(),
        analytic_m: m,
        notes: vec!["pointer basis |0>, |1>; conserved quantities equal the steady states".into()],
        interior_margin: 0,
    }
}

/// `F = (I - Z1 Z2) X2 / 2`, the jump operator shared by the two-qubit models.
pub fn two_qubit_jump() -> Operator {
    let space = HilbertSpace::qubits(2);
    let id = Operator::identity(4);
    let zz = &site(0, &pauli_z(), &space) * &site(1, &pauli_z(), &space);
    &(&id - &zz).scale(c(0.5)) * &site(1, &pauli_x(), &space)
}

struct Paulis {
    id: Operator,
    x1: Operator,
    y1: Operator,
    z1: Operator,
    x2: Operator,
    y2: Operator,
    z2: Operator,
}

fn paulis() -> Paulis {
    let s = HilbertSpace::qubits(2);
    Paulis {
        id: Operator::identity(4),
        x1: site(0, &pauli_x(), &s),
        y1: site(0, &pauli_y(), &s),
        z1: site(0, &pauli_z(), &s),
        x2: site(1, &pauli_x(), &s),
        y2: site(1, &pauli_y(), &s),
        z2: site(1, &pauli_z(), &s),
    }
}

/// Steady operators `M_00, M_01, M_10, M_11` of the undriven two-qubit model.
fn two_qubit_m(p: &Paulis) -> [Operator; 4] {
    let m00 = (&(&p.id + &p.z1) * &(&p.id - &p.z2)).scale(c(0.25));
    let m11 = (&(&p.id - &p.z1) * &(&p.id + &p.z2)).scale(c(0.25));
    let m01 = (&(&p.x1 + &p.y1.scale(I)) * &(&p.x2 - &p.y2.scale(I))).scale(c(0.25));
    let m10 = m01.adjoint();
    [m00, m01, m10, m11]
}

fn two_qubit_j(p: &Paulis) -> [Operator; 4] {
    let j00 = (&p.id + &p.z1).scale(c(0.5));
    let j11 = &p.id - &j00;
    let j01 = (&(&p.x1 + &p.y1.scale(I)) * &p.x2).scale(c(0.5));
    let j10 = j01.adjoint();
    [j00, j01, j10, j11]
}

/// Two qubits with the sole jump operator `F = (I - Z1 Z2) X2 / 2`; the
/// steady operators span the `Psi+-` Bell subspace.
pub fn two_qubit() -> CatalogEntry {
    let p = paulis();
    let model = Model::new(HilbertSpace::qubits(2), Operator::zeros(4), vec![two_qubit_jump()])
        .expect("valid model")
        .with_name("two_qubit");
    CatalogEntry {
        model,
        analytic_m: two_qubit_m(&p).to_vec(),
        analytic_j: two_qubit_j(&p).to_vec(),
        notes: vec![
            "decoherence-free subspace spanned by |Psi+-><Psi+-|".into(),
            "Z1 is a conserved parity splitting Liouville space into four sectors".into(),
        ],
        interior_margin: 0,
    }
}

/// `zeta = sqrt(2 w^4 + 4 w^2 + 1)`.
pub fn driven_zeta(omega: f64) -> f64 {
    (2.0 * omega.powi(4) + 4.0 * omega * omega + 1.0).sqrt()
}

/// Factor state `[[1 + w^2, i w], [-i w, w^2]] / (1 + 2 w^2)` carried by
/// every steady operator of the driven model.
pub fn driven_factor_state(omega: f64) -> Operator {
    let w = omega;
    Operator::from_rows(&[
        vec![c(1.0 + w * w), C64::new(0.0, w)],
        vec![C64::new(0.0, -w), c(w * w)],
    ])
    .scale(c(1.0 / (1.0 + 2.0 * w * w)))
}

/// The unitary `(I + Z1 (X2 - I) + X2) / 2` that factors out the driven
/// model's noiseless subsystem.
pub fn driven_factor_unitary() -> Operator {
    let p = paulis();
    let inner = &(&p.id + &(&p.z1 * &(&p.x2 - &p.id))) + &p.x2;
    inner.scale(c(0.5))
}

/// The two-qubit model with drive `H = w X2`; a noiseless subsystem with a
/// two-dimensional factor state.
pub fn driven_two_qubit(omega: f64) -> CatalogEntry {
    let p = paulis();
    let zeta = driven_zeta(omega);
    let w = omega;
    let [m00, _, _, m11] = two_qubit_m(&p);
    let m01 = two_qubit_m(&p)[1].clone();
    let half_w = c(w / 2.0);
    let bar00 = (&m00 + &(&(&p.id + &p.z1) * &(&p.id.scale(c(w)) + &p.y2)).scale(half_w)).scale(c(1.0 / zeta));
    let bar11 = (&m11 + &(&(&p.id - &p.z1) * &(&p.id.scale(c(w)) - &p.y2)).scale(half_w)).scale(c(1.0 / zeta));
    let bar01 = (&m01
        + &(&(&p.x1 + &p.y1.scale(I)) * &(&p.x2.scale(c(w)) - &p.z2.scale(I))).scale(half_w))
        .scale(c(1.0 / zeta));
    let bar10 = bar01.adjoint();
    let norm = c(zeta / (2.0 * w * w + 1.0));
    let j: Vec<Operator> = two_qubit_j(&p).iter().map(|x| x.scale(norm)).collect();
    let h = p.x2.scale(c(w));
    let model = Model::new(HilbertSpace::qubits(2), h, vec![two_qubit_jump()])
        .expect("valid model")
        .with_name("driven_two_qubit");
    CatalogEntry {
        model,
        analytic_m: vec![bar00, bar01, bar10, bar11],
        analytic_j: j,
        notes: vec![
            format!("drive w = {w}, zeta = {zeta}"),
            "noiseless subsystem: n = 2, m = 2".into(),
        ],
        interior_margin: 0,
    }
}

/// `m!! = m (m - 2)!!` with `0!! = 1!! = 1`.
pub fn double_factorial(m: i64) -> Result<u128> {
    if m < 0 {
        return Err(Error::NegativeArgument(m));
    }
    let mut acc: u128 = 1;
    let mut k = m as u128;
    while k > 1 {
        acc = acc
            .checked_mul(k)
            .ok_or_else(|| Error::Overflow(format!("{m}!!")))?;
        k -= 2;
    }
    Ok(acc)
}

/// Falling factorial `(x)_n = x (x - 1) ... (x - n + 1)`, `(x)_0 = 1`.
pub fn falling_factorial(x: f64, n: usize) -> f64 {
    (0..n).map(|k| x - k as f64).product()
}

/// Ratio `j(n + d) / j(n)` at `n = d p + mu`, i.e. the `p`-th factor of
/// `j_mu_nu`.
fn j_factor(d: usize, mu: usize, nu: usize, p: usize) -> f64 {
    let s = nu - mu;
    let base = (d * p + nu) as f64;
    // (base + d)_s / (base)_s as a product of ratios
    let ratio: f64 = (0..s)
        .map(|k| (base + d as f64 - k as f64) / (base - k as f64))
        .product();
    2.0 / (1.0 + ratio)
}

/// `j_mu_nu(n)` for `n = d k + mu`, evaluated as a running product; zero
/// when `n` is not in the `mu` residue class.
pub fn j_munu(d: usize, mu: usize, nu: usize, n: usize) -> f64 {
    if n < mu || !(n - mu).is_multiple_of(d) || nu < mu {
        return 0.0;
    }
    (0..(n - mu) / d).map(|p| j_factor(d, mu, nu, p)).product()
}

/// Projector `Pi_mu` onto Fock levels `n = mu mod d`.
pub fn fock_projector(dim: usize, d: usize, mu: usize) -> Operator {
    let diag: Vec<C64> = (0..dim).map(|n| if n % d == mu { ONE } else { ZERO }).collect();
    Operator::diagonal(&diag)
}

pub fn fock_parity_projectors(dim: usize, d: usize) -> Vec<Operator> {
    (0..d).map(|mu| fock_projector(dim, d, mu)).collect()
}

/// Analytic conserved quantity `J_mu_nu` of `d`-photon absorption on a
/// truncated Fock space.
pub fn d_photon_j(d: usize, dim: usize, mu: usize, nu: usize) -> Operator {
    if mu == nu {
        return fock_projector(dim, d, mu);
    }
    if mu > nu {
        return d_photon_j(d, dim, nu, mu).adjoint();
    }
    let s = nu - mu;
    let norm = falling_factorial(nu as f64, s).sqrt();
    let mut j = Operator::zeros(dim);
    let mut n = mu;
    while n + s < dim {
        let amp = falling_factorial((n + s) as f64, s).sqrt();
        j.set(n, n + s, c(j_munu(d, mu, nu, n) * amp / norm));
        n += d;
    }
    j
}

/// Single mode with `F = a^d` on Fock levels `0..dim`.
pub fn d_photon(d: usize, dim: usize) -> Result<CatalogEntry> {
    if d == 0 {
        return Err(Error::InvalidSpace("photon number d must be positive".into()));
    }
    if dim <= d * d + d {
        return Err(Error::TruncationTooSmall(format!(
            "d = {d} needs more than {} Fock levels, got {dim}",
            d * d + d
        )));
    }
    let f = annihilation(dim).pow(d as u32);
    let model = Model::new(HilbertSpace::fock(dim)?, Operator::zeros(dim), vec![f])?
        .with_name(format!("d_photon_{d}"));
    let mut m = Vec::with_capacity(d * d);
    let mut j = Vec::with_capacity(d * d);
    for mu in 0..d {
        for nu in 0..d {
            m.push(Operator::matrix_unit(dim, mu, nu));
            j.push(d_photon_j(d, dim, mu, nu));
        }
    }
    Ok(CatalogEntry {
        model,
        analytic_m: m,
        analytic_j: j,
        notes: vec![
            format!("{d}-photon absorption, Fock cutoff {dim}"),
            format!("conserved quantities exact away from the top {} levels", 2 * d),
        ],
        interior_margin: 2 * d,
    })
}

/// Looks up a catalog entry by name with default parameters.
pub fn by_name(name: &str) -> Option<CatalogEntry> {
    match name {
        "dephasing" => Some(dephasing()),
        "two_qubit" => Some(two_qubit()),
        "driven_two_qubit" => Some(driven_two_qubit(1.0)),
        "two_photon" => d_photon(2, 20).ok(),
        "d_photon" => d_photon(3, 30).ok(),
        _ => None,
    }
}

pub const CATALOG_NAMES: [&str; 5] = ["dephasing", "two_qubit", "driven_two_qubit", "two_photon", "d_photon"];

/// Modified Bessel function `I_0` from its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
    }
}

const SERIES_REL: f64 = 1e-14;
pub const MAX_SERIES_TERMS: usize = 10_000;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `sum_n j(dn+mu) x^(dn+mu) / (dn+mu)!` scaled by `exp(-x)`.
fn coherent_series(d: usize, mu: usize, nu: usize, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if mu == 0 { 1.0 } else { 0.0 });
    }
    let lx = x.ln();
    let mut log_term = -x + mu as f64 * lx - ln_factorial(mu);
    let mut sum = 0.0;
    for n in 0..MAX_SERIES_TERMS {
        let term = log_term.exp();
        sum += term;
        let level = d * n + mu;
        if level as f64 > x && term <= SERIES_REL * sum {
            return Ok(sum);
        }
        let mut step = j_factor(d, mu, nu, n).ln() + d as f64 * lx;
        for k in 1..=d {
            step -= ((level + k) as f64).ln();
        }
        log_term += step;
    }
    Err(Error::NonConvergence(MAX_SERIES_TERMS))
}

/// Asymptotic coefficients `rho_mu_nu` of a coherent state `|alpha>` under
/// `d`-photon absorption, by direct summation of the series.
pub fn coherent_steady(d: usize, alpha: C64) -> Result<Operator> {
    if d == 0 {
        return Err(Error::InvalidSpace("photon number d must be positive".into()));
    }
    let x = alpha.norm_sqr();
    let mut rho = Operator::zeros(d);
    for mu in 0..d {
        for nu in mu..d {
            let s = nu - mu;
            let pre = alpha.conj().powi(s as i32) / falling_factorial(nu as f64, s).sqrt();
            let v = pre * coherent_series(d, mu, nu, x)?;
            rho.set(mu, nu, v);
            if nu != mu {
                rho.set(nu, mu, v.conj());
            }
        }
    }
    Ok(rho)
}

/// Diagonal coefficients from the closed discrete Fourier form
/// `rho_mu_mu = (1/d) sum_nu e^{-2 pi i mu nu / d} exp[|alpha|^2 (e^{2 pi i nu / d} - 1)]`.
pub fn coherent_diagonal(d: usize, alpha: C64) -> Vec<f64> {
    let x = alpha.norm_sqr();
    let w = 2.0 * std::f64::consts::PI / d as f64;
    (0..d)
        .map(|mu| {
            let s: C64 = (0..d)
                .map(|nu| {
                    let phase = C64::from_polar(1.0, -w * (mu * nu) as f64);
                    let e = (C64::from_polar(1.0, w * nu as f64) - ONE) * x;
                    phase * e.exp()
                })
                .sum();
            s.re / d as f64
        })
        .collect()
}

/// Default Fock cutoff for a coherent state, `|a|^2 + 10|a| + 20`.
pub fn coherent_cutoff(alpha: C64) -> usize {
    let a = alpha.norm();
    (a * a + 10.0 * a + 20.0).ceil() as usize
}

pub const COHERENT_TAIL_TOL: f64 = 1e-12;

/// Coherent state truncated to `dim` Fock levels and renormalized; the
/// discarded probability must stay below `1e-12`.
pub fn coherent_state(dim: usize, alpha: C64) -> Result<DensityMatrix> {
    let x = alpha.norm_sqr();
    let mut amp = Vec::with_capacity(dim);
    // c_n = exp(-x/2) alpha^n / sqrt(n!), built by recursion
    let mut cn = C64::new((-x / 2.0).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            cn = cn * alpha / (n as f64).sqrt();
        }
        amp.push(cn);
    }
    let kept: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
    let tail = 1.0 - kept;
    if tail > COHERENT_TAIL_TOL {
        return Err(Error::TruncationTooSmall(format!(
            "coherent state |{alpha}> loses {tail:.3e} beyond {dim} levels"
        )));
    }
    DensityMatrix::pure(&amp)
}
