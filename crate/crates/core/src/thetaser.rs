//! Lattice point enumeration, holomorphic theta series with spherical
//! polynomials, and the Siegel theta function of the signature (1,2) lattice.

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::Value;

use crate::discform::{weil_matrices, DiscriminantForm, GramLattice, IMat, WeilRep};
use crate::error::{Error, Result};
use crate::numth::{parse_rat, rat_to_f64, rint, Rat};
use crate::qexp::{Coeff, QSeries};

/// Eigenvalues of a real symmetric matrix (cyclic Jacobi), ascending.
pub fn sym_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// All `λ ∈ L + μ` with `Q(λ) <= maxnorm`, in lattice coordinates, sorted.
pub fn enumerate_vectors(l: &GramLattice, coset: &[Rat], maxnorm: &Rat) -> Result<Vec<Vec<Rat>>> {
    if !l.is_positive_definite() {
        return Err(Error::InvalidArgument("enumeration needs a positive definite lattice".into()));
    }
    let n = l.rank();
    if coset.len() != n {
        return Err(Error::InvalidArgument("coset vector has the wrong length".into()));
    }
    if maxnorm.is_negative() {
        return Ok(Vec::new());
    }
    // Q(x) = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)^2
    let mut q: Vec<Vec<f64>> = l.gram().iter().map(|r| r.iter().map(|&x| x as f64 / 2.0).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for m in k..n {
                q[k][m] -= q[k][i] * q[i][m];
            }
        }
    }
    let mu: Vec<f64> = coset.iter().map(rat_to_f64).collect();
    let bound = rat_to_f64(maxnorm) * (1.0 + 1e-9) + 1e-9;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(
        i: usize,
        budget: f64,
        q: &[Vec<f64>],
        mu: &[f64],
        x: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let n = q.len();
        let mut centre = 0.0;
        for j in i + 1..n {
            centre -= q[i][j] * (mu[j] + x[j] as f64);
        }
        let r = (budget.max(0.0) / q[i][i]).sqrt();
        // x_i + mu_i in [centre - r, centre + r]
        let lo = (centre - r - mu[i]).ceil() as i64;
        let hi = (centre + r - mu[i]).floor() as i64;
        for z in lo..=hi {
            x[i] = z;
            let d = mu[i] + z as f64 - centre;
            let rest = budget - q[i][i] * d * d;
            if rest < -1e-9 {
                continue;
            }
            if i == 0 {
                out.push(x.clone());
            } else {
                rec(i - 1, rest, q, mu, x, out);
            }
        }
    }
    let mut raw = Vec::new();
    rec(n - 1, bound, &q, &mu, &mut x, &mut raw);
    for z in raw {
        let v: Vec<Rat> = z.iter().zip(coset).map(|(&zi, m)| m + rint(zi)).collect();
        if &l.qform(&v) <= maxnorm {
            out.push(v);
        }
    }
    out.sort();
    Ok(out)
}

/// Inverse of an integer matrix over the rationals.
pub fn rat_inverse(m: &IMat) -> Result<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<Rat> = r.iter().map(|&x| rint(x)).collect();
            row.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| Error::DegenerateLattice("singular".into()))?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Homogeneous polynomial in lattice coordinates, harmonic for the Laplacian
/// `Σ (G⁻¹)_{ij} ∂_i ∂_j` of its lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalPoly {
    rank: usize,
    degree: u32,
    terms: Vec<(Vec<u32>, Rat)>,
}

impl SphericalPoly {
    pub fn constant(rank: usize) -> Self {
        Self { rank, degree: 0, terms: vec![(vec![0; rank], Rat::one())] }
    }

    pub fn new(l: &GramLattice, terms: Vec<(Vec<u32>, Rat)>) -> Result<Self> {
        let rank = l.rank();
        let terms: Vec<(Vec<u32>, Rat)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.iter().any(|(e, _)| e.len() != rank) {
            return Err(Error::InvalidArgument("monomial has the wrong number of variables".into()));
        }
        let degree = terms.first().map(|(e, _)| e.iter().sum()).unwrap_or(0);
        if terms.iter().any(|(e, _)| e.iter().sum::<u32>() != degree) {
            return Err(Error::InvalidArgument("polynomial is not homogeneous".into()));
        }
        let p = Self { rank, degree, terms };
        if !p.laplacian(l)?.is_empty() {
            return Err(Error::InvalidArgument("polynomial is not harmonic".into()));
        }
        Ok(p)
    }

    pub fn from_json(l: &GramLattice, v: &Value) -> Result<Self> {
        let arr = v.get("terms").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"terms\"".into()))?;
        let mut terms = Vec::new();
        for t in arr {
            let e = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term without \"exp\"".into()))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| Error::Parse("bad exponent".into())))
                .collect::<Result<Vec<u32>>>()?;
            let c = match t.get("coeff") {
                Some(Value::String(s)) => parse_rat(s)?,
                Some(Value::Number(n)) => rint(n.as_i64().ok_or_else(|| Error::Parse("bad coefficient".into()))?),
                _ => return Err(Error::Parse("term without \"coeff\"".into())),
            };
            terms.push((e, c));
        }
        Self::new(l, terms)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Nonzero terms of `Σ (G⁻¹)_{ij} ∂_i ∂_j p`.
    pub fn laplacian(&self, l: &GramLattice) -> Result<Vec<(Vec<u32>, Rat)>> {
        let ginv = rat_inverse(l.gram())?;
        let mut acc: std::collections::BTreeMap<Vec<u32>, Rat> = Default::default();
        for (e, c) in &self.terms {
            for i in 0..self.rank {
                for j in 0..self.rank {
                    if ginv[i][j].is_zero() {
                        continue;
                    }
                    let mut e2 = e.clone();
                    let mut f = c * &ginv[i][j];
                    if e2[i] == 0 {
                        continue;
                    }
                    f *= rint(e2[i] as i64);
                    e2[i] -= 1;
                    if e2[j] == 0 {
                        continue;
                    }
                    f *= rint(e2[j] as i64);
                    e2[j] -= 1;
                    *acc.entry(e2).or_insert_with(Rat::zero) += f;
                }
            }
        }
        Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.clone();
                for (xi, &k) in x.iter().zip(e) {
                    t *= crate::numth::rat_pow(xi, k);
                }
                t
            })
            .sum()
    }
}

/// Holomorphic theta series `Σ_{λ ∈ L + μ} p(λ) q^{Q(λ)}` over `L′/L`, weight
/// `rank/2 + deg p`.
pub fn theta_posdef(l: &GramLattice, p: &SphericalPoly, prec: &Rat) -> Result<QSeries> {
    let w = Rat::new(l.rank().into(), 2.into()) + rint(p.degree() as i64);
    theta_posdef_with(l, w, prec, |x| Coeff::Rat(p.eval(x)))
}

/// Theta series with an arbitrary coefficient function of the lattice vector.
pub fn theta_posdef_with(
    l: &GramLattice,
    weight: Rat,
    prec: &Rat,
    f: impl Fn(&[Rat]) -> Coeff + Sync,
) -> Result<QSeries> {
    if !prec.is_positive() {
        return Err(Error::InvalidArgument("theta precision must be positive".into()));
    }
    let df = DiscriminantForm::new(l)?;
    let den = (0..df.size()).fold(1i64, |acc, i| acc.lcm(&df.norm(i).denom().to_i64().unwrap()));
    let mut out = QSeries::zero(weight, df.group().clone(), den, prec.clone());
    let shells: Vec<Vec<(usize, i64, Coeff)>> = (0..df.size())
        .into_par_iter()
        .map(|c| {
            let vs = enumerate_vectors(l, df.rep(c), prec).unwrap();
            vs.iter()
                .filter_map(|v| {
                    let nq = l.qform(v);
                    if &nq >= prec {
                        return None;
                    }
                    let k = (nq * rint(den)).to_integer().to_i64().unwrap();
                    Some((c, k, f(v)))
                })
                .collect()
        })
        .collect();
    let mut acc: std::collections::BTreeMap<(usize, i64), Coeff> = Default::default();
    for shell in shells {
        for (c, k, v) in shell {
            let e = acc.entry((c, k)).or_insert_with(Coeff::zero);
            *e = e.add(&v);
        }
    }
    for ((c, k), v) in acc {
        out.set(c, k, v);
    }
    Ok(out)
}

/// A point of the upper half plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hpoint {
    pub x: f64,
    pub y: f64,
}

impl Hpoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!("({x}, {y}) is not in the upper half plane")));
        }
        Ok(Self { x, y })
    }

    pub fn c(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_c(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }
}

/// Parameters of the signature (1,2) Siegel theta function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiegelTheta12Params {
    pub z: Hpoint,
    pub dplus: u32,
    pub dminus: u32,
    /// Requested bound on the neglected tail.
    pub tol: f64,
    /// Largest admissible box size.
    pub max_box: i64,
}

impl SiegelTheta12Params {
    pub fn new(z: Hpoint, dplus: u32, dminus: u32) -> Result<Self> {
        if dplus > 1 {
            return Err(Error::InvalidArgument(format!(
                "d+ = {dplus}: only degrees 0 and 1 are harmonic on a rank one positive part"
            )));
        }
        Ok(Self { z, dplus, dminus, tol: 1e-12, max_box: 1 << 14 })
    }
}

/// Value of a truncated sum together with the bound on what was left out.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaValue {
    /// Indexed by coset: 0 for `b` even, 1 for `b` odd.
    pub value: Vec<Complex64>,
    pub tail_bound: f64,
    pub box_size: i64,
}

/// `Q(λ_z)`, `Q(λ_{z⊥})` and the polynomial coordinates `t = (λ, X_z)`,
/// `w = (az²+bz+c)/(√2 y)` of the form `[a, b, c]`.
pub fn form_data(a: f64, b: f64, c: f64, z: Hpoint) -> (f64, f64, f64, Complex64) {
    let (x, y) = (z.x, z.y);
    let n2 = x * x + y * y;
    let u = a * n2 + b * x + c;
    let zc = z.c();
    let w = a * zc * zc + b * zc + c;
    let qz = u * u / (4.0 * y * y);
    let qperp = -w.norm_sqr() / (4.0 * y * y);
    let s2y = std::f64::consts::SQRT_2 * y;
    (qz, qperp, u / s2y, w / s2y)
}

/// Gram matrix (in `(a, b, c)`) of the majorant `Q(λ_z) - Q(λ_{z⊥})`.
pub fn majorant_matrix(z: Hpoint) -> [[f64; 3]; 3] {
    let (x, y) = (z.x, z.y);
    let rows = [[x * x + y * y, x, 1.0], [x * x - y * y, x, 1.0], [2.0 * x * y, y, 0.0]];
    let mut m = [[0.0; 3]; 3];
    for r in &rows {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += r[i] * r[j] / (4.0 * y * y);
            }
        }
    }
    m
}

pub fn majorant_extremes(z: Hpoint) -> (f64, f64) {
    let m = majorant_matrix(z);
    let ev = sym_eigenvalues(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    (ev[0], ev[2])
}

/// Bound on `Σ_{‖x‖∞ > B} ‖x‖^deg exp(-α ‖x‖²)`-type tails over `Z³`, with
/// `|p| <= (2 λmax ‖x‖²)^{deg/2}`.
fn box_tail(b: i64, alpha: f64, lmax: f64, deg: u32) -> f64 {
    let mut s = 0.0;
    let mut k = b + 1;
    loop {
        let kf = k as f64;
        let shell = 24.0 * kf * kf + 2.0;
        let poly = (2.0 * lmax * 3.0 * kf * kf).powf(deg as f64 / 2.0);
        let t = shell * poly * (-alpha * kf * kf).exp();
        s += t;
        if t < 1e-18 * s.max(1e-300) || t == 0.0 || k > b + 100_000 {
            break;
        }
        k += 1;
    }
    s
}

/// `v^{s/2+d⁻} Σ_λ p(ψ(λ)) e(Q(λ_z) τ + Q(λ_{z⊥}) τ̄)` over `λ ∈ L′`, split by
/// coset, for the lattice of binary quadratic forms.
pub fn siegel_theta_12(params: &SiegelTheta12Params, tau: Complex64) -> Result<ThetaValue> {
    let v = tau.im;
    if !(v > 0.0) {
        return Err(Error::InvalidArgument("tau must lie in the upper half plane".into()));
    }
    let z = params.z;
    let (lmin, lmax) = majorant_extremes(z);
    let alpha = 2.0 * std::f64::consts::PI * v * lmin;
    let deg = params.dplus + params.dminus;
    let pre = v.powf(1.0 + params.dminus as f64);
    let mut b = ((-params.tol.ln()).max(1.0) / alpha).sqrt().ceil() as i64;
    b = b.max(1);
    let mut tail = pre * box_tail(b, alpha, lmax, deg);
    while tail > params.tol {
        if b >= params.max_box {
            return Err(Error::TailNotClosed { bound: tail, tol: params.tol });
        }
        b = (b + b / 4 + 1).min(params.max_box);
        tail = pre * box_tail(b, alpha, lmax, deg);
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let rows: Vec<[Complex64; 2]> = (-b..=b)
        .into_par_iter()
        .map(|a| {
            let mut acc = [Complex64::zero(); 2];
            for bb in -b..=b {
                for c in -b..=b {
                    let (qz, qp, t, w) = form_data(a as f64, bb as f64, c as f64, z);
                    let mut p = Complex64::new(t.powi(params.dplus as i32), 0.0);
                    if params.dminus > 0 {
                        p *= w.powu(params.dminus);
                    }
                    let arg = two_pi_i * (tau * qz + tau.conj() * qp);
                    acc[bb.rem_euclid(2) as usize] += p * arg.exp();
                }
            }
            acc
        })
        .collect();
    let mut value = vec![Complex64::zero(); 2];
    for r in rows {
        value[0] += r[0];
        value[1] += r[1];
    }
    for x in value.iter_mut() {
        *x *= pre;
    }
    Ok(ThetaValue { value, tail_bound: tail, box_size: b })
}

/// Maps the `b mod 2` indexing of [`siegel_theta_12`] to cosets of the
/// discriminant form of [`GramLattice::sig12`].
pub fn sig12_coset_index(df: &DiscriminantForm, parity: usize) -> usize {
    let b = if parity == 0 { rint(0) } else { Rat::new(1.into(), 2.into()) };
    df.coset_of(&[rint(0), b, rint(0)]).expect("coset representative")
}

/// `max_μ |Θ(-1/τ) - φ^{r+2d⁺-s-2d⁻} (ρ(S) Θ(τ))_μ|` with `φ = √τ`.
pub fn sig12_s_defect(params: &SiegelTheta12Params, tau: Complex64) -> Result<(f64, f64)> {
    let l = GramLattice::sig12();
    let df = DiscriminantForm::new(&l)?;
    let w: WeilRep = weil_matrices(&df, false);
    let t1 = siegel_theta_12(params, tau)?;
    let t2 = siegel_theta_12(params, -Complex64::one() / tau)?;
    let idx: Vec<usize> = (0..2).map(|p| sig12_coset_index(&df, p)).collect();
    let mut th = [Complex64::zero(); 2];
    for p in 0..2 {
        th[idx[p]] = t1.value[p];
    }
    let expo = 1.0 + 2.0 * params.dplus as f64 - 2.0 - 2.0 * params.dminus as f64;
    let phi = tau.sqrt().powf(expo);
    let mut worst: f64 = 0.0;
    for p in 0..2 {
        let mu = idx[p];
        let mut s = Complex64::zero();
        for nu in 0..2 {
            s += w.rho_s[mu][nu] * th[nu];
        }
        worst = worst.max((t2.value[p] - phi * s).norm());
    }
    Ok((worst, t1.tail_bound.max(t2.tail_bound)))
}

/// `max_μ |Θ(-1/τ) - φ^{rank} (ρ(S) Θ(τ))_μ|` for a holomorphic theta series
/// given by its coefficients, `φ = √τ`.
pub fn posdef_s_defect(l: &GramLattice, p: &SphericalPoly, tau: Complex64, prec: &Rat) -> Result<f64> {
    let th = theta_posdef(l, p, prec)?;
    let df = DiscriminantForm::new(l)?;
    let w = weil_matrices(&df, false);
    let a = th.eval(tau);
    let b = th.eval(-Complex64::one() / tau);
    let k = l.rank() as f64 + 2.0 * p.degree() as f64;
    let phi = tau.sqrt().powf(k);
    let mut worst: f64 = 0.0;
    for mu in 0..df.size() {
        let mut s = Complex64::zero();
        for nu in 0..df.size() {
            s += w.rho_s[mu][nu] * a[nu];
        }
        worst = worst.max((b[mu] - phi * s).norm());
    }
    Ok(worst)
}

/// Splitting `L ⊇ P ⊕ N` at a special point.
#[derive(Clone, Debug)]
pub struct SpecialSplit {
    /// Primitive generator of `P = L ∩ Qw`, lattice coordinates.
    pub p_vec: Vec<i64>,
    /// Basis of `N = L ∩ w⊥`.
    pub n_basis: Vec<Vec<i64>>,
    pub p_lattice: GramLattice,
    /// `N` with the negated form, positive definite.
    pub n_minus: GramLattice,
    pub index: u64,
}

fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Integer basis of `{x ∈ Zⁿ : r·x = 0}`.
fn integer_kernel(r: &[i64]) -> Vec<Vec<i64>> {
    let n = r.len();
    let mut row = r.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    // column operations on row, mirrored on the columns of u, until one entry remains
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| row[i] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let piv = *nz.iter().min_by_key(|&&i| row[i].abs()).unwrap();
        for &j in &nz {
            if j != piv {
                let f = row[j].div_euclid(row[piv]);
                row[j] -= f * row[piv];
                for k in 0..n {
                    u[k][j] -= f * u[k][piv];
                }
            }
        }
    }
    (0..n).filter(|&j| row[j] == 0).map(|j| (0..n).map(|k| u[k][j]).collect()).collect()
}

fn gram_of(l: &GramLattice, vs: &[Vec<i64>]) -> IMat {
    let g = l.gram();
    let n = l.rank();
    vs.iter()
        .map(|a| {
            vs.iter()
                .map(|b| {
                    let mut s = 0;
                    for i in 0..n {
                        for j in 0..n {
                            s += a[i] * g[i][j] * b[j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `P = L ∩ Qw` and `N = L ∩ w⊥` for a rational `w` with `Q(w) > 0` in a
/// lattice of signature `(1, s)`.
pub fn split_at_special_point(l: &GramLattice, w: &[Rat]) -> Result<SpecialSplit> {
    if l.signature().0 != 1 {
        return Err(Error::InvalidArgument("splitting needs a lattice of signature (1, s)".into()));
    }
    if w.len() != l.rank() || !l.qform(w).is_positive() {
        return Err(Error::InvalidArgument("special point must be a positive rational vector".into()));
    }
    let den = w.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let wi: Vec<i64> = w.iter().map(|x| (x * Rat::from_integer(den.clone())).to_integer().to_i64().unwrap()).collect();
    let g = gcd_vec(&wi);
    let p_vec: Vec<i64> = wi.iter().map(|x| x / g).collect();
    let gram = l.gram();
    let n = l.rank();
    let functional: Vec<i64> = (0..n).map(|j| (0..n).map(|i| p_vec[i] * gram[i][j]).sum()).collect();
    let n_basis = integer_kernel(&functional);
    if n_basis.len() != n - 1 {
        return Err(Error::DegenerateLattice("orthogonal complement has the wrong rank".into()));
    }
    let p_lattice = GramLattice::new(gram_of(l, std::slice::from_ref(&p_vec)))?;
    let gn = gram_of(l, &n_basis);
    let n_minus = GramLattice::new(gn.iter().map(|r| r.iter().map(|x| -x).collect()).collect())?;
    if !p_lattice.is_positive_definite() || !n_minus.is_positive_definite() {
        return Err(Error::DegenerateLattice("special point does not split into definite parts".into()));
    }
    let mut basis = vec![vec![0i64; n]; n];
    for r in 0..n {
        basis[r][0] = p_vec[r];
        for (k, nb) in n_basis.iter().enumerate() {
            basis[r][k + 1] = nb[r];
        }
    }
    let index = crate::discform::det(&basis).unsigned_abs() as u64;
    Ok(SpecialSplit { p_vec, n_basis, p_lattice, n_minus, index })
}

/// CM point of a positive definite form `[a, b, c]`.
pub fn cm_point(a: i64, b: i64, c: i64) -> Result<Hpoint> {
    let d = 4 * a * c - b * b;
    if a <= 0 || d <= 0 {
        return Err(Error::InvalidArgument(format!("[{a},{b},{c}] is not positive definite")));
    }
    Hpoint::new(-(b as f64) / (2.0 * a as f64), (d as f64).sqrt() / (2.0 * a as f64))
}

/// `Θ_P ⊗ v^{s/2+d⁻} conj(Θ_{N⁻})` pushed to `L′/L`, for the lattice of
/// binary quadratic forms at the special point of the form `[a, b, c]`, in the
/// `b mod 2` indexing. Also returns the coefficient truncation of both
/// factors.
pub fn split_theta_12(form: (i64, i64, i64), dplus: u32, dminus: u32, tau: Complex64, prec: i64) -> Result<Vec<Complex64>> {
    let l = GramLattice::sig12();
    let (a, b, c) = form;
    let w = vec![rint(a), Rat::new(b.into(), 2.into()), rint(c)];
    let sp = split_at_special_point(&l, &w)?;
    let z = cm_point(a, b, c)?;
    let v = tau.im;
    let df_l = DiscriminantForm::new(&l)?;
    let pv = sp.p_vec.clone();
    let nb = sp.n_basis.clone();
    let to_ambient_p = move |x: &[Rat]| -> Vec<Rat> { pv.iter().map(|&p| rint(p) * &x[0]).collect() };
    let to_ambient_n = move |x: &[Rat]| -> Vec<Rat> {
        (0..3).map(|r| rint(nb[0][r]) * &x[0] + rint(nb[1][r]) * &x[1]).collect()
    };
    let coords = |y: &[Rat]| -> (f64, f64, f64) { (rat_to_f64(&y[0]), 2.0 * rat_to_f64(&y[1]), rat_to_f64(&y[2])) };
    let tp = to_ambient_p.clone();
    let thp = theta_posdef_with(&sp.p_lattice, Rat::new((1 + 2 * dplus as i64).into(), 2.into()), &rint(prec), |x| {
        let (fa, fb, fc) = coords(&tp(x));
        let (_, _, t, _) = form_data(fa, fb, fc, z);
        Coeff::Num(Complex64::new(t.powi(dplus as i32), 0.0))
    })?;
    let tn = to_ambient_n.clone();
    let thn = theta_posdef_with(&sp.n_minus, rint(1 + dminus as i64), &rint(prec), |x| {
        let (fa, fb, fc) = coords(&tn(x));
        let (_, _, _, wz) = form_data(fa, fb, fc, z);
        // conjugated later together with the series
        Coeff::Num(wz.conj().powu(dminus))
    })?;
    let vp = thp.eval(tau);
    let vn = thn.eval(tau);
    let dfp = DiscriminantForm::new(&sp.p_lattice)?;
    let dfn = DiscriminantForm::new(&sp.n_minus)?;
    let mut out = vec![Complex64::zero(); 2];
    let pre = v.powf(1.0 + dminus as f64);
    for ip in 0..dfp.size() {
        for i_n in 0..dfn.size() {
            let ya = to_ambient_p(dfp.rep(ip));
            let yb = to_ambient_n(dfn.rep(i_n));
            let y: Vec<Rat> = ya.iter().zip(&yb).map(|(s, t)| s + t).collect();
            if let Ok(lc) = df_l.coset_of(&y) {
                let parity = (0..2).find(|&p| sig12_coset_index(&df_l, p) == lc).unwrap();
                out[parity] += vp[ip] * vn[i_n].conj() * pre;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat;
    use proptest::prelude::*;

    fn brute(l: &GramLattice, coset: &[Rat], maxnorm: &Rat) -> Vec<Vec<Rat>> {
        let n = l.rank();
        let m: Vec<Vec<f64>> = l.gram().iter().map(|r| r.iter().map(|&x| x as f64 / 2.0).collect()).collect();
        let lmin = sym_eigenvalues(&m)[0];
        let r = ((rat_to_f64(maxnorm) / lmin).sqrt()).ceil() as i64 + 2;
        let mut out = Vec::new();
        let total = (2 * r + 1).pow(n as u32);
        for mut idx in 0..total {
            let mut v = Vec::with_capacity(n);
            for i in 0..n {
                let shift = coset[i].round();
                v.push(&coset[i] - shift + rint(idx % (2 * r + 1) - r));
                idx /= 2 * r + 1;
            }
            if &l.qform(&v) <= maxnorm {
                out.push(v);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn a1_vectors() {
        let l = GramLattice::a1();
        let v = enumerate_vectors(&l, &[rint(0)], &rint(4)).unwrap();
        let xs: Vec<Rat> = v.iter().map(|x| x[0].clone()).collect();
        assert_eq!(xs, vec![rint(-2), rint(-1), rint(0), rint(1), rint(2)]);
        assert!(enumerate_vectors(&l, &[rat(1, 2)], &rat(1, 5)).unwrap().is_empty());
        let l2 = GramLattice::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(enumerate_vectors(&l2, &[rint(0), rint(0)], &rint(1)).unwrap().len(), 5);
        assert!(enumerate_vectors(&GramLattice::sig12(), &[rint(0), rint(0), rint(0)], &rint(1)).is_err());
    }

    #[test]
    fn enumeration_matches_box() {
        let grams: Vec<IMat> = vec![
            vec![vec![2]],
            vec![vec![2, -1], vec![-1, 2]],
            vec![vec![2, 1], vec![1, 4]],
            vec![vec![4, 1, 0], vec![1, 2, 1], vec![0, 1, 6]],
            vec![vec![6]],
        ];
        for g in grams {
            let l = GramLattice::new(g).unwrap();
            let df = DiscriminantForm::new(&l).unwrap();
            for c in 0..df.size() {
                let maxn = if l.rank() == 3 { rint(12) } else { rint(25) };
                let a = enumerate_vectors(&l, df.rep(c), &maxn).unwrap();
                let b = brute(&l, df.rep(c), &maxn);
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn theta_a1() {
        let l = GramLattice::a1();
        let th = theta_posdef(&l, &SphericalPoly::constant(1), &rint(10)).unwrap();
        assert_eq!(th.weight(), &rat(1, 2));
        assert_eq!(th.coeff(0, &rint(0)).unwrap(), Coeff::from(1));
        assert_eq!(th.coeff(0, &rint(1)).unwrap(), Coeff::from(2));
        assert_eq!(th.coeff(0, &rint(4)).unwrap(), Coeff::from(2));
        assert_eq!(th.coeff(1, &rat(1, 4)).unwrap(), Coeff::from(2));
        assert_eq!(th.coeff(1, &rat(9, 4)).unwrap(), Coeff::from(2));
        let px = SphericalPoly::new(&l, vec![(vec![1], rint(1))]).unwrap();
        assert!(theta_posdef(&l, &px, &rint(10)).unwrap().is_zero());
        assert!(theta_posdef(&l, &SphericalPoly::constant(1), &rint(0)).is_err());
    }

    #[test]
    fn harmonic_polys() {
        let l = GramLattice::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let p = SphericalPoly::new(&l, vec![(vec![2, 0], rint(1)), (vec![0, 2], rint(-1))]).unwrap();
        let th = theta_posdef(&l, &p, &rint(6)).unwrap();
        assert_eq!(th.coeff(0, &rint(1)).unwrap(), Coeff::zero());
        assert!(SphericalPoly::new(&l, vec![(vec![2, 0], rint(1))]).is_err());
        assert!(SphericalPoly::new(&l, vec![(vec![2, 0], rint(1)), (vec![1, 0], rint(1))]).is_err());
        let a2 = GramLattice::new(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        // x² - xy + y² is the norm form itself, not harmonic; xy... check via the Laplacian
        let q = SphericalPoly { rank: 2, degree: 2, terms: vec![(vec![2, 0], rint(1)), (vec![1, 1], rint(-1)), (vec![0, 2], rint(1))] };
        assert!(!q.laplacian(&a2).unwrap().is_empty());
        // x² + xy - ... a harmonic quadratic for A2: x² - y² works as G⁻¹ has equal diagonal
        assert!(SphericalPoly::new(&a2, vec![(vec![2, 0], rint(1)), (vec![0, 2], rint(-1))]).is_ok());
    }

    #[test]
    fn theta_tensor_matches_direct_sum() {
        let a1 = GramLattice::a1();
        let t = theta_posdef(&a1, &SphericalPoly::constant(1), &rint(4)).unwrap();
        let tt = crate::qexp::tensor_product(&t, &t).unwrap();
        let l2 = GramLattice::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let t2 = theta_posdef(&l2, &SphericalPoly::constant(2), &rint(4)).unwrap();
        assert_eq!(tt.group(), t2.group());
        assert_eq!(tt.max_diff(&t2).unwrap(), 0.0);
        assert_eq!(tt.prec(), t2.prec());
    }

    #[test]
    fn theta_t_transformation() {
        let l = GramLattice::new(vec![vec![2, 1], vec![1, 4]]).unwrap();
        let th = theta_posdef(&l, &SphericalPoly::constant(2), &rint(8)).unwrap();
        let df = DiscriminantForm::new(&l).unwrap();
        // every exponent on coset μ is ≡ Q(μ) mod 1
        for (c, k, _) in th.iter() {
            let e = th.exponent(k);
            assert_eq!(crate::discform::frac(&e), df.norm(c).clone());
        }
    }

    #[test]
    fn a1_s_transformation() {
        let l = GramLattice::a1();
        for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.8)] {
            let d = posdef_s_defect(&l, &SphericalPoly::constant(1), tau, &rint(60)).unwrap();
            assert!(d < 1e-10, "{d}");
        }
    }

    #[test]
    fn siegel_theta_real_at_i() {
        let p = SiegelTheta12Params::new(Hpoint::new(0.0, 1.0).unwrap(), 0, 0).unwrap();
        let t = siegel_theta_12(&p, Complex64::new(0.0, 1.0)).unwrap();
        for x in &t.value {
            assert!(x.im.abs() < 1e-12);
        }
        assert!(SiegelTheta12Params::new(Hpoint::new(0.0, 1.0).unwrap(), 2, 0).is_err());
    }

    #[test]
    fn siegel_theta_s_covariance() {
        for (z, tau) in [((0.0, 1.0), (0.0, 1.0)), ((0.2, 1.3), (0.3, 0.8))] {
            for (dp, dm) in [(0, 0), (1, 0), (0, 1)] {
                let mut p = SiegelTheta12Params::new(Hpoint::new(z.0, z.1).unwrap(), dp, dm).unwrap();
                p.tol = 1e-11;
                let (d, tail) = sig12_s_defect(&p, Complex64::new(tau.0, tau.1)).unwrap();
                assert!(d < 1e-8, "z={z:?} tau={tau:?} d=({dp},{dm}) defect {d} tail {tail}");
            }
        }
    }

    #[test]
    fn siegel_theta_modular_in_z() {
        // z -> z + 1 permutes the forms, so the value is unchanged
        let tau = Complex64::new(0.1, 0.9);
        let p1 = SiegelTheta12Params::new(Hpoint::new(0.2, 1.1).unwrap(), 0, 0).unwrap();
        let p2 = SiegelTheta12Params::new(Hpoint::new(1.2, 1.1).unwrap(), 0, 0).unwrap();
        let a = siegel_theta_12(&p1, tau).unwrap();
        let b = siegel_theta_12(&p2, tau).unwrap();
        for i in 0..2 {
            assert!((a.value[i] - b.value[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn special_point_at_i() {
        let l = GramLattice::sig12();
        let sp = split_at_special_point(&l, &[rint(1), rint(0), rint(1)]).unwrap();
        assert_eq!(sp.p_lattice.gram(), &vec![vec![2]]);
        assert_eq!(sp.n_minus.det(), 4);
        assert_eq!(sp.index, 2);
        assert_eq!(sp.p_lattice.rank() + sp.n_minus.rank(), 3);
        assert!(split_at_special_point(&l, &[rint(1), rint(0), rint(-1)]).is_err());
    }

    #[test]
    fn special_point_splitting_identity() {
        let tau = Complex64::new(0.0, 2.0);
        for (form, dp, dm) in [((1, 0, 1), 0, 0), ((1, 1, 1), 0, 0), ((1, 0, 1), 1, 0), ((2, 1, 3), 0, 1)] {
            let z = cm_point(form.0, form.1, form.2).unwrap();
            let mut p = SiegelTheta12Params::new(z, dp, dm).unwrap();
            p.tol = 1e-12;
            let direct = siegel_theta_12(&p, tau).unwrap();
            let split = split_theta_12(form, dp, dm, tau, 12).unwrap();
            for i in 0..2 {
                assert!((direct.value[i] - split[i]).norm() < 1e-8, "{form:?} {i}: {} vs {}", direct.value[i], split[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn enumeration_random_rank2(a in 1i64..4, b in -2i64..3, c in 1i64..4) {
            let g = vec![vec![2 * a, b], vec![b, 2 * c]];
            prop_assume!(4 * a * c - b * b > 0);
            let l = GramLattice::new(g).unwrap();
            let df = DiscriminantForm::new(&l).unwrap();
            for i in 0..df.size() {
                prop_assert_eq!(enumerate_vectors(&l, df.rep(i), &rint(10)).unwrap(), brute(&l, df.rep(i), &rint(10)));
            }
        }
    }
}
