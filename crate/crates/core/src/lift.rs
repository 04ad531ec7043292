//! The regularized higher Siegel theta lift in the signature (1,2) model of
//! binary quadratic forms, its Λ coefficient function, and numerical
//! diagnostics of the local Maaß form properties.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::classical::duke_jenkins;
use crate::classnum::cohen_coeff;
use crate::discform::GramLattice;
use crate::error::{Error, Result};
use crate::numth::{rat, rat_to_f64, rint, Rat};
use crate::qexp::{Coeff, CosetGroup, QSeries};
use crate::special::{family_params, hyp2f1_f64};
use crate::thetaser::{form_data, majorant_extremes, Hpoint};

/// Integral binary quadratic form `[a, b, c]`, identified with
/// `(a, b/2, c)` in the dual of the signature (1,2) lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bqf {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Bqf {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// `Q(z, 1) = az² + bz + c`.
    pub fn eval(&self, z: Hpoint) -> Complex64 {
        let zc = z.c();
        self.a as f64 * zc * zc + self.b as f64 * zc + self.c as f64
    }

    /// `a|z|² + bx + c`, vanishing exactly on the geodesic.
    pub fn geodesic_fn(&self, z: Hpoint) -> f64 {
        self.a as f64 * (z.x * z.x + z.y * z.y) + self.b as f64 * z.x + self.c as f64
    }

    /// Hyperbolic distance from `z` to the geodesic, `D > 0`.
    pub fn geodesic_distance(&self, z: Hpoint) -> f64 {
        let d = self.disc() as f64;
        (self.geodesic_fn(z).abs() / (d.sqrt() * z.y)).asinh()
    }

    pub fn lattice_coords(&self) -> Vec<Rat> {
        vec![rint(self.a), rat(self.b, 2), rint(self.c)]
    }

    pub fn coset(&self) -> usize {
        self.b.rem_euclid(2) as usize
    }

    pub fn norm_inf(&self) -> i64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

/// All forms of discriminant `d` with `|a|, |b|, |c| <= bound`, sorted.
pub fn forms_in_box(d: i64, bound: i64) -> Vec<Bqf> {
    let root = (d as f64).sqrt().round() as i64;
    let square = d >= 0 && root * root == d;
    let mut out: Vec<Bqf> = (-bound..=bound)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut v = Vec::new();
            if a == 0 {
                if square && root <= bound {
                    for b in if root == 0 { vec![0] } else { vec![-root, root] } {
                        for c in -bound..=bound {
                            v.push(Bqf::new(0, b, c));
                        }
                    }
                }
            } else {
                let m = 4 * a;
                for b in -bound..=bound {
                    let num = b * b - d;
                    if num % m == 0 {
                        let c = num / m;
                        if c.abs() <= bound {
                            v.push(Bqf::new(a, b, c));
                        }
                    }
                }
            }
            v
        })
        .collect();
    out.sort();
    out
}

/// Read-mostly cache of box enumerations keyed by `(D, B)`; enumeration
/// does not depend on the evaluation point.
type FormMap = HashMap<(i64, i64), Arc<Vec<Bqf>>>;

/// Per discriminant: the forms in the box and the box size.
type Enumeration = Vec<(i64, Arc<Vec<Bqf>>, i64)>;

#[derive(Clone, Default)]
pub struct FormCache {
    inner: Arc<RwLock<FormMap>>,
}

impl FormCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, d: i64, bound: i64) -> Arc<Vec<Bqf>> {
        if let Some(v) = self.inner.read().unwrap().get(&(d, bound)) {
            return v.clone();
        }
        let v = Arc::new(forms_in_box(d, bound));
        self.inner.write().unwrap().entry((d, bound)).or_insert(v).clone()
    }
}

/// One principal part coefficient `c⁺(μ, -m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalTerm {
    pub coset: usize,
    pub m: Rat,
    pub coeff: Rat,
}

impl PrincipalTerm {
    /// `D = 4m`.
    pub fn disc(&self) -> i64 {
        (&self.m * rint(4)).to_integer().to_i64().unwrap()
    }
}

/// Parameters of the lift in signature (1,2): `k = -1/2 + d⁺ + d⁻`,
/// `j = (ℓ + d⁺ + d⁻)/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftSpec {
    pub ell: u32,
    pub dplus: u32,
    pub dminus: u32,
    pub principal: Vec<PrincipalTerm>,
}

impl LiftSpec {
    pub fn new(ell: u32, dplus: u32, dminus: u32, principal: Vec<PrincipalTerm>) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidArgument(format!("ell = {ell} < 2")));
        }
        if !(ell + dplus + dminus).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "j = (ell + d+ + d-)/2 = ({ell} + {dplus} + {dminus})/2 is not an integer"
            )));
        }
        if dplus > 1 {
            return Err(Error::InvalidArgument(format!(
                "d+ = {dplus}: only degrees 0 and 1 are harmonic on the rank one positive part"
            )));
        }
        for t in &principal {
            if !t.m.is_positive() || t.coset > 1 {
                return Err(Error::InvalidArgument(format!("bad principal term {t:?}")));
            }
            let four_m = &t.m * rint(4);
            if !four_m.is_integer() {
                return Err(Error::PlusSpaceViolation(format!("4m = {four_m} is not an integer")));
            }
            // Q(λ) = -m on coset μ needs m ≡ -Q(μ) mod 1, i.e. 4m ≡ μ mod 4
            let dm = four_m.to_integer().to_i64().unwrap().rem_euclid(4);
            if dm as usize != t.coset {
                return Err(Error::PlusSpaceViolation(format!(
                    "principal exponent -{} does not occur on coset {}",
                    t.m, t.coset
                )));
            }
        }
        Ok(Self { ell, dplus, dminus, principal })
    }

    /// Input `f_{-2ℓ,N}(4τ) 𝓗_ℓ(τ)` in the vector-valued normalization.
    pub fn from_duke_jenkins(ell: u32, dplus: u32, dminus: u32, n: i64) -> Result<Self> {
        if !ell.is_multiple_of(2) {
            return Err(Error::PlusSpaceViolation(format!(
                "ell = {ell} is odd; the Cohen–Eisenstein series then lives on the dual discriminant form"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidArgument(format!("N = {n} < 1")));
        }
        let f = duke_jenkins(ell, n, 1)?;
        let mut acc: std::collections::BTreeMap<i64, Rat> = Default::default();
        for (_, i, a) in f.iter() {
            if i >= 0 {
                continue;
            }
            let a = a.as_rat().cloned().unwrap_or_else(Rat::zero);
            // q^{4i} q^n with 4i + n < 0
            for h in 0..(-4 * i) {
                let d = -(4 * i + h);
                let c = cohen_coeff(ell, h)?;
                if c.is_zero() {
                    continue;
                }
                *acc.entry(d).or_insert_with(Rat::zero) += &a * c;
            }
        }
        let principal = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, coeff)| PrincipalTerm { coset: d.rem_euclid(4) as usize, m: rat(d, 4), coeff })
            .collect();
        Self::new(ell, dplus, dminus, principal)
    }

    pub fn j(&self) -> u32 {
        (self.ell + self.dplus + self.dminus) / 2
    }

    pub fn k(&self) -> Rat {
        rat(-1, 2) + rint((self.dplus + self.dminus) as i64)
    }

    /// `j (j - ℓ - 3/2)`.
    pub fn eigenvalue_target(&self) -> f64 {
        let j = self.j() as f64;
        j * (j - self.ell as f64 - 1.5)
    }

    pub fn max_disc(&self) -> i64 {
        self.principal.iter().map(|t| t.disc()).max().unwrap_or(0)
    }

    pub fn discs(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.principal.iter().map(|t| t.disc()).collect();
        d.sort();
        d.dedup();
        d
    }

    /// `(4π)^{j+1-k-s/2-d⁻} j! Γ(s/2+d⁻+j) / (4 Γ(2-k+2j))`, `s = 2`.
    pub fn constant(&self) -> f64 {
        let (j, k, dm) = (self.j() as f64, rat_to_f64(&self.k()), self.dminus as f64);
        (4.0 * PI).powf(j + 1.0 - k - 1.0 - dm) * gamma(j + 1.0) * gamma(1.0 + dm + j) / (4.0 * gamma(2.0 - k + 2.0 * j))
    }
}

/// `conj(p(ψ(λ))) |Q(λ)|^{2j+1-k} / |Q(λ_{z⊥})|^{s/2+j+d⁻}
/// ₂F₁(1+j, s/2+d⁻+j; 2-k+2j; Q(λ)/Q(λ_{z⊥}))` for `s = 2`.
fn generic_term(q: &Bqf, z: Hpoint, ell: u32, dplus: u32, dminus: u32) -> Result<Complex64> {
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let k = -0.5 + (dplus + dminus) as f64;
    let dm = dminus as f64;
    let (_, qperp, t, w) = form_data(q.a as f64, q.b as f64, q.c as f64, z);
    let ql = -(q.disc() as f64) / 4.0;
    // t <= 1 with equality on the geodesic; clamp rounding overshoot
    let ratio = (ql / qperp).min(1.0);
    let f = hyp2f1_f64(1.0 + j, 1.0 + dm + j, 2.0 - k + 2.0 * j, ratio, 1e-16)?;
    let p = Complex64::new(t.powi(dplus as i32), 0.0) * w.conj().powu(dminus);
    Ok(p * ql.abs().powf(2.0 * j + 1.0 - k) / qperp.abs().powf(1.0 + j + dm) * f)
}

/// Result of a truncated evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftValue {
    pub re: f64,
    pub im: f64,
    /// A posteriori estimate of the neglected tail.
    pub tail_bound: f64,
    /// Box size used per discriminant.
    pub boxes: Vec<(i64, i64)>,
    pub nearest_geodesic_distance: f64,
}

impl LiftValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Evaluation options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftOptions {
    pub tol: f64,
    /// Hyperbolic guard distance around the exceptional geodesics; zero
    /// evaluates on them, which is finite when `d⁺ = d⁻ = 0`.
    pub guard: f64,
    pub max_box: i64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { tol: 1e-7, guard: 1e-3, max_box: 1 << 14 }
    }
}

/// Tail estimate for forms of discriminant `d` outside the box `bound`:
/// `|Q(z,1)|² >= 2y² λmin ‖x‖∞²` bounds each term, the shell count is the
/// observed count in `(B/2, B]`, doubled.
#[allow(clippy::too_many_arguments)]
fn tail_estimate(forms: &[Bqf], d: i64, bound: i64, z: Hpoint, lmin: f64, ell: u32, dplus: u32, dminus: u32) -> Result<f64> {
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let k = -0.5 + (dplus + dminus) as f64;
    let sigma = 1.0 + j + dminus as f64;
    let deg = (dplus + dminus) as f64;
    let e = 2.0 * sigma - deg;
    let y = z.y;
    let tb = d as f64 / (2.0 * lmin * (bound as f64).powi(2));
    if tb >= 0.5 || e <= 1.0 {
        return Ok(f64::INFINITY);
    }
    let f = hyp2f1_f64(1.0 + j, sigma, 2.0 - k + 2.0 * j, tb, 1e-14)?;
    // per form: m^{2j+1-k} (4y²)^σ (√2 y)^{-deg} |Q(z,1)|^{-(2σ-deg)} F(t_B)
    let m = d as f64 / 4.0;
    let g = m.powf(2.0 * j + 1.0 - k) * (4.0 * y * y).powf(sigma) * (2f64.sqrt() * y).powf(-deg) * f
        / (2.0 * y * y * lmin).powf(e / 2.0);
    let half = bound / 2;
    let shell = forms.iter().filter(|q| q.norm_inf() > half).count() as f64;
    let density = 2.0 * (shell / (bound - half) as f64).max(1.0);
    Ok(density * g * (bound as f64).powf(1.0 - e) / (e - 1.0))
}

/// Initial box covering every form whose geodesic passes within hyperbolic
/// distance `asinh(1)` of `z`.
fn initial_box(d: i64, lmin: f64) -> i64 {
    ((2.0 * d as f64 / lmin).sqrt().ceil() as i64 + 1).max(16)
}

/// Nearest geodesic among `forms` with distance computed exactly.
fn nearest(forms: &[Bqf], z: Hpoint) -> (f64, Option<Bqf>) {
    let mut best = (f64::INFINITY, None);
    for q in forms {
        let d = q.geodesic_distance(z);
        if d < best.0 {
            best = (d, Some(*q));
        }
    }
    best
}

/// Forms of each discriminant in `discs` with boxes grown geometrically
/// until the tail estimate at `z` is below `tol`.
fn enumerate_for(
    discs: &[(i64, f64)],
    z: Hpoint,
    opts: &LiftOptions,
    cache: &FormCache,
    ell: u32,
    dplus: u32,
    dminus: u32,
) -> Result<(Enumeration, f64)> {
    let (lmin, _) = majorant_extremes(z);
    let mut out = Vec::new();
    let mut tail = 0.0;
    let share = opts.tol / discs.len().max(1) as f64;
    for &(d, weight) in discs {
        let mut b = initial_box(d, lmin);
        loop {
            let forms = cache.get(d, b);
            let t = weight.abs() * tail_estimate(&forms, d, b, z, lmin, ell, dplus, dminus)?;
            if t <= share {
                out.push((d, forms, b));
                tail += t;
                break;
            }
            if b >= opts.max_box {
                return Err(Error::TailNotClosed { bound: t, tol: share });
            }
            b = (2 * b).min(opts.max_box);
        }
    }
    Ok((out, tail))
}

/// Evaluator for one lift specification, sharing enumerations across points.
#[derive(Clone)]
pub struct LiftEvaluator {
    pub spec: LiftSpec,
    pub opts: LiftOptions,
    cache: FormCache,
}

impl LiftEvaluator {
    pub fn new(spec: LiftSpec, opts: LiftOptions) -> Self {
        Self { spec, opts, cache: FormCache::new() }
    }

    fn weighted_discs(&self) -> Vec<(i64, f64)> {
        let c = self.spec.constant();
        let mut v: Vec<(i64, f64)> = Vec::new();
        for t in &self.spec.principal {
            let w = c * rat_to_f64(&t.coeff);
            match v.iter_mut().find(|x| x.0 == t.disc()) {
                Some(x) => x.1 = x.1.abs().max(w.abs()),
                None => v.push((t.disc(), w)),
            }
        }
        v.sort_by_key(|x| x.0);
        v
    }

    fn coeff_for(&self, q: &Bqf) -> f64 {
        let d = q.disc();
        self.spec
            .principal
            .iter()
            .filter(|t| t.disc() == d && t.coset == q.coset())
            .map(|t| rat_to_f64(&t.coeff))
            .sum()
    }

    /// Boxes closing the tail at `z`.
    pub fn boxes_at(&self, z: Hpoint) -> Result<Vec<(i64, i64)>> {
        let (e, _) = enumerate_for(&self.weighted_discs(), z, &self.opts, &self.cache, self.spec.ell, self.spec.dplus, self.spec.dminus)?;
        Ok(e.into_iter().map(|(d, _, b)| (d, b)).collect())
    }

    /// Truncated sum with prescribed boxes; guards against geodesics.
    pub fn eval_with_boxes(&self, z: Hpoint, boxes: &[(i64, i64)]) -> Result<(Complex64, f64)> {
        let c = self.spec.constant();
        let mut total = Complex64::zero();
        let mut dist = f64::INFINITY;
        for &(d, b) in boxes {
            let forms = self.cache.get(d, b);
            let (nd, _) = nearest(&forms, z);
            dist = dist.min(nd);
            if nd < self.opts.guard {
                return Err(Error::NearGeodesic { distance: nd, guard: self.opts.guard });
            }
            let part: Complex64 = forms
                .par_iter()
                .map(|q| -> Result<Complex64> {
                    let w = self.coeff_for(q);
                    if w == 0.0 {
                        return Ok(Complex64::zero());
                    }
                    Ok(generic_term(q, z, self.spec.ell, self.spec.dplus, self.spec.dminus)? * w)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum();
            total += part;
        }
        Ok((total * c, dist))
    }

    pub fn eval(&self, z: Hpoint) -> Result<LiftValue> {
        if self.spec.principal.is_empty() {
            return Ok(LiftValue { re: 0.0, im: 0.0, tail_bound: 0.0, boxes: vec![], nearest_geodesic_distance: f64::INFINITY });
        }
        let (e, tail) = enumerate_for(&self.weighted_discs(), z, &self.opts, &self.cache, self.spec.ell, self.spec.dplus, self.spec.dminus)?;
        let boxes: Vec<(i64, i64)> = e.iter().map(|(d, _, b)| (*d, *b)).collect();
        let (v, dist) = self.eval_with_boxes(z, &boxes)?;
        Ok(LiftValue { re: v.re, im: v.im, tail_bound: tail, boxes, nearest_geodesic_distance: dist })
    }
}

/// `Ψ(z)` with default options.
pub fn lift_eval(spec: &LiftSpec, z: Hpoint, opts: LiftOptions) -> Result<LiftValue> {
    LiftEvaluator::new(spec.clone(), opts).eval(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRoute {
    /// Lattice quantities `Q(λ)`, `Q(λ_{z⊥})` with the general prefactor.
    Generic,
    /// Forms `Q(z,1)` with the signature (1,2) prefactor.
    Specialized,
}

/// `(4π)^{1-r/2-d⁺} Γ(s/2+j+d⁻) Γ(2-r/2-d⁺+j) / (4 Γ(2-k+2j) Γ(2-r/2-d⁺))`.
pub fn lambda_prefactor_generic(ell: u32, dplus: u32, dminus: u32) -> f64 {
    let (r, s) = (1.0, 2.0);
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let k = -0.5 + (dplus + dminus) as f64;
    let (dp, dm) = (dplus as f64, dminus as f64);
    (4.0 * PI).powf(1.0 - r / 2.0 - dp) * gamma(s / 2.0 + j + dm) * gamma(2.0 - r / 2.0 - dp + j)
        / (4.0 * gamma(2.0 - k + 2.0 * j) * gamma(2.0 - r / 2.0 - dp))
}

/// `4^{(3d⁻-d⁺-ℓ-2)/2} π^{1/2-d⁺} Γ(j+1+d⁻) Γ(3/2-d⁺+j) / (Γ(ℓ+5/2) Γ(3/2-d⁺))`,
/// the generic prefactor rewritten for forms.
pub fn lambda_prefactor_specialized(ell: u32, dplus: u32, dminus: u32) -> f64 {
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let (l, dp, dm) = (ell as f64, dplus as f64, dminus as f64);
    4f64.powf((3.0 * dm - dp - l - 2.0) / 2.0) * PI.powf(0.5 - dp) * gamma(j + 1.0 + dm) * gamma(1.5 - dp + j)
        / (gamma(l + 2.5) * gamma(1.5 - dp))
}

/// `4^{3d⁻} π^{1/2-d⁺} Γ(j+1+d⁻) Γ(3/2-d⁺+j) / (Γ(ℓ+1/2) Γ(3/2-d⁺))` as
/// printed for the specialized display.
pub fn lambda_prefactor_printed(ell: u32, dplus: u32, dminus: u32) -> f64 {
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let (l, dp, dm) = (ell as f64, dplus as f64, dminus as f64);
    4f64.powf(3.0 * dm) * PI.powf(0.5 - dp) * gamma(j + 1.0 + dm) * gamma(1.5 - dp + j) / (gamma(l + 0.5) * gamma(1.5 - dp))
}

fn specialized_term(q: &Bqf, z: Hpoint, ell: u32, dplus: u32, dminus: u32) -> Result<Complex64> {
    let j = (ell + dplus + dminus) as f64 / 2.0;
    let d = q.disc() as f64;
    let qz = q.eval(z);
    let n2 = qz.norm_sqr();
    let y = z.y;
    let e = 2.0 + 2.0 * j + 2.0 * dminus as f64;
    let (a, b, c) = family_params(ell, dplus, dminus);
    let t = (d * y * y / n2).min(1.0);
    let f = hyp2f1_f64(rat_to_f64(&a), rat_to_f64(&b), rat_to_f64(&c), t, 1e-16)?;
    // conj(p(ψ(Q))) with t_z = (a|z|²+bx+c)/(√2 y) and w = Q(z,1)/(√2 y)
    let s2y = 2f64.sqrt() * y;
    let p = Complex64::new((q.geodesic_fn(z) / s2y).powi(dplus as i32), 0.0) * (qz / s2y).conj().powu(dminus);
    Ok(p * d.powf(ell as f64 + 1.5) * (y * y / n2).powf(e / 2.0) * f)
}

/// Coefficients of `q^D`, `1 <= D <= dmax`, of Λ at `z` as a scalar series
/// of weight `2j + 2 - k`.
#[allow(clippy::too_many_arguments)]
pub fn lambda_coeffs(
    ell: u32,
    dplus: u32,
    dminus: u32,
    z: Hpoint,
    dmax: i64,
    route: LambdaRoute,
    opts: &LiftOptions,
    cache: &FormCache,
) -> Result<(QSeries, f64)> {
    if dmax < 1 {
        return Err(Error::InvalidArgument("Dmax must be at least 1".into()));
    }
    let spec = LiftSpec::new(ell, dplus, dminus, vec![])?;
    let weight = rint(2 * spec.j() as i64 + 2) - spec.k();
    let discs: Vec<(i64, f64)> = (1..=dmax).filter(|d| matches!(d % 4, 0 | 1)).map(|d| (d, 1.0)).collect();
    let (lists, tail) = enumerate_for(&discs, z, opts, cache, ell, dplus, dminus)?;
    let l = GramLattice::sig12();
    let mut out = QSeries::zero(weight, CosetGroup::trivial(), 1, rint(dmax + 1));
    // finite on the geodesics when the Gauss value at t = 1 exists
    let regular = dplus + 2 * dminus == 0;
    for (d, forms, _) in lists {
        let (nd, _) = nearest(&forms, z);
        if nd < opts.guard && !regular {
            return Err(Error::NearGeodesic { distance: nd, guard: opts.guard });
        }
        let sum: Complex64 = forms
            .par_iter()
            .map(|q| match route {
                LambdaRoute::Generic => {
                    // Q(λ) from the lattice form must equal -D/4
                    debug_assert_eq!(l.qform(&q.lattice_coords()), rat(-d, 4));
                    generic_term(q, z, ell, dplus, dminus)
                }
                LambdaRoute::Specialized => specialized_term(q, z, ell, dplus, dminus),
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        let pre = match route {
            LambdaRoute::Generic => lambda_prefactor_generic(ell, dplus, dminus),
            LambdaRoute::Specialized => lambda_prefactor_specialized(ell, dplus, dminus),
        };
        out.set(0, d, Coeff::Num(sum * pre));
    }
    Ok((out, tail))
}

/// Heegner geodesics of the listed discriminants.
#[derive(Clone, Debug)]
pub struct GeodesicSet {
    discs: Vec<i64>,
}

impl GeodesicSet {
    pub fn new(discs: &[i64]) -> Result<Self> {
        if discs.iter().any(|&d| d <= 0) {
            return Err(Error::InvalidArgument("geodesic discriminants must be positive".into()));
        }
        Ok(Self { discs: discs.to_vec() })
    }

    /// Hyperbolic distance to the nearest geodesic and its form. Forms with
    /// `|a|z|²+bx+c| <= R` have `|Q(z,1)|² <= R² + Dy²`, which bounds the box.
    pub fn distance(&self, z: Hpoint) -> (f64, Option<Bqf>) {
        let (lmin, _) = majorant_extremes(z);
        let mut best = (f64::INFINITY, None);
        for &d in &self.discs {
            let b = initial_box(d, lmin);
            let r = nearest(&forms_in_box(d, b), z);
            if r.0 < best.0 {
                best = r;
            }
        }
        // boxes are exact up to distance asinh(1)
        if best.0 > 1f64.asinh() {
            best.0 = best.0.min(1f64.asinh());
        }
        best
    }
}

/// Output of the local Maaß form diagnostic at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMaassReport {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub laplacian_estimate: f64,
    pub rayleigh_ratio: f64,
    pub eigenvalue_target: f64,
    /// `(label, value)` of the candidate constants.
    pub candidates: Vec<(String, f64)>,
    pub matched_candidate: Option<String>,
    /// `|Ψ(Tz) - Ψ(z)|` and `|Ψ(Sz) - Ψ(z)|`.
    pub invariance_residuals: [f64; 2],
    pub nearest_geodesic_distance: f64,
    pub tail_bound: f64,
}

impl LocalMaassReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

pub fn eigenvalue_candidates(target: f64) -> Vec<(String, f64)> {
    vec![
        ("j(j-l-3/2)".into(), target),
        ("2 j(j-l-3/2)".into(), 2.0 * target),
        ("-2 j(j-l-3/2)".into(), -2.0 * target),
        ("1/2 j(j-l-3/2)".into(), 0.5 * target),
    ]
}

/// `-y² (∂²_x + ∂²_y) Ψ / Ψ` from a 5-point stencil with fixed boxes, the
/// invariance residuals under `T` and `S`, and the candidate match.
pub fn local_maass_diagnose(ev: &LiftEvaluator, z: Hpoint, h: f64) -> Result<LocalMaassReport> {
    let boxes = ev.boxes_at(z)?;
    let (v0, dist) = ev.eval_with_boxes(z, &boxes)?;
    if dist < 10.0 * h / z.y {
        return Err(Error::NearGeodesic { distance: dist, guard: 10.0 * h / z.y });
    }
    let at = |dx: f64, dy: f64| -> Result<f64> { Ok(ev.eval_with_boxes(Hpoint::new(z.x + dx, z.y + dy)?, &boxes)?.0.re) };
    let lap = (at(h, 0.0)? + at(-h, 0.0)? + at(0.0, h)? + at(0.0, -h)? - 4.0 * v0.re) / (h * h);
    let delta0 = -z.y * z.y * lap;
    let ratio = delta0 / v0.re;
    let target = ev.spec.eigenvalue_target();
    let candidates = eigenvalue_candidates(target);
    let matched = candidates.iter().find(|(_, c)| (ratio - c).abs() <= 1e-3 * c.abs().max(1.0)).map(|(n, _)| n.clone());
    let base = ev.eval(z)?;
    let tz = ev.eval(Hpoint::new(z.x + 1.0, z.y)?)?;
    let sz = ev.eval(Hpoint::from_c(-Complex64::new(1.0, 0.0) / z.c())?)?;
    Ok(LocalMaassReport {
        x: z.x,
        y: z.y,
        value: v0.re,
        laplacian_estimate: delta0,
        rayleigh_ratio: ratio,
        eigenvalue_target: target,
        candidates,
        matched_candidate: matched,
        invariance_residuals: [(tz.value() - base.value()).norm(), (sz.value() - base.value()).norm()],
        nearest_geodesic_distance: dist,
        tail_bound: base.tail_bound,
    })
}

/// One-sided behaviour of Ψ across a geodesic along its normal direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpScan {
    pub x: f64,
    pub y: f64,
    /// Difference of the extrapolated one-sided limits of Ψ.
    pub value_jump: f64,
    /// Difference of the extrapolated one-sided normal derivatives.
    pub derivative_jump: f64,
    /// Truncation error of the evaluations.
    pub truncation: f64,
}

/// Extrapolates `Ψ` and `∂_n Ψ` to the base point from each side using
/// quadratic fits through offsets `δ, 2δ, 3δ` along the unit direction `n`.
pub fn jump_scan(ev: &LiftEvaluator, z: Hpoint, n: (f64, f64), delta: f64) -> Result<JumpScan> {
    let norm = (n.0 * n.0 + n.1 * n.1).sqrt();
    let n = (n.0 / norm, n.1 / norm);
    // boxes valid at every offset point
    let mut boxes = ev.boxes_at(Hpoint::new(z.x + 3.0 * delta * n.0, z.y + 3.0 * delta * n.1)?)?;
    for b in ev.boxes_at(Hpoint::new(z.x - 3.0 * delta * n.0, z.y - 3.0 * delta * n.1)?)? {
        if let Some(x) = boxes.iter_mut().find(|x| x.0 == b.0) {
            x.1 = x.1.max(b.1);
        }
    }
    let mut tail: f64 = 0.0;
    let (lmin, _) = majorant_extremes(z);
    for &(d, b) in &boxes {
        let w = ev.weighted_discs().iter().find(|x| x.0 == d).map(|x| x.1).unwrap_or(0.0);
        let forms = ev.cache.get(d, b);
        tail += w.abs() * tail_estimate(&forms, d, b, z, lmin, ev.spec.ell, ev.spec.dplus, ev.spec.dminus)?;
    }
    let side = |sgn: f64| -> Result<(f64, f64)> {
        let mut f = [0.0; 3];
        for (i, fi) in f.iter_mut().enumerate() {
            let s = sgn * delta * (i + 1) as f64;
            *fi = ev.eval_with_boxes(Hpoint::new(z.x + s * n.0, z.y + s * n.1)?, &boxes)?.0.re;
        }
        let value = 3.0 * f[0] - 3.0 * f[1] + f[2];
        let deriv = (-2.5 * f[0] + 4.0 * f[1] - 1.5 * f[2]) / (sgn * delta);
        Ok((value, deriv))
    };
    let (vp, dp) = side(1.0)?;
    let (vm, dm) = side(-1.0)?;
    Ok(JumpScan { x: z.x, y: z.y, value_jump: (vp - vm).abs(), derivative_jump: (dp - dm).abs(), truncation: tail })
}

/// Row of a lift grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub value: Option<f64>,
    pub tail_bound: Option<f64>,
    pub nearest_geodesic_distance: f64,
}

/// Values on `[xmin, xmax] × [ymin, ymax]` with the given step, in row-major
/// order of `(y, x)`; points within the guard distance carry no value.
pub fn lift_grid(ev: &LiftEvaluator, xr: (f64, f64), yr: (f64, f64), step: f64) -> Result<Vec<GridRow>> {
    if !(step > 0.0) || xr.1 < xr.0 || yr.1 < yr.0 || yr.0 <= 0.0 {
        return Err(Error::InvalidArgument("bad grid".into()));
    }
    let nx = ((xr.1 - xr.0) / step + 1e-9).floor() as usize + 1;
    let ny = ((yr.1 - yr.0) / step + 1e-9).floor() as usize + 1;
    let geo = GeodesicSet::new(&ev.spec.discs())?;
    let pts: Vec<(f64, f64)> = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (xr.0 + ix as f64 * step, yr.0 + iy as f64 * step)))
        .collect();
    pts.par_iter()
        .map(|&(x, y)| {
            let z = Hpoint::new(x, y)?;
            let dist = if ev.spec.principal.is_empty() { f64::INFINITY } else { geo.distance(z).0 };
            match ev.eval(z) {
                Ok(v) => Ok(GridRow { x, y, value: Some(v.re), tail_bound: Some(v.tail_bound), nearest_geodesic_distance: dist }),
                Err(Error::NearGeodesic { .. }) => Ok(GridRow { x, y, value: None, tail_bound: None, nearest_geodesic_distance: dist }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut s = String::from("x,y,value,tail_bound,nearest_geodesic_distance\n");
    let f = |v: Option<f64>| v.map(|x| format!("{x:.15e}")).unwrap_or_else(|| "nan".into());
    for r in rows {
        s.push_str(&format!("{},{},{},{},{:.6e}\n", r.x, r.y, f(r.value), f(r.tail_bound), r.nearest_geodesic_distance));
    }
    s
}
