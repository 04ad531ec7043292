//! Class number relations, the bracket completion identity, and the Serre
//! duality pairing.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::classical::{basis_gamma0_4, theta_scalar, verify_in_space_upto};
use crate::classnum::{hurwitz_series, HurwitzTable};
use crate::error::{Error, Result};
use crate::numth::{lambda_k, rat_pow, rat_to_string, rint, sigma_k, Rat};
use crate::qexp::{rc_bracket, Coeff, QSeries};
use crate::report::RelationReport;

/// `Σ_{s ∈ Z} w(s) H(n - s²)` over all `s` with `s² <= n`.
fn theta_sum(t: &HurwitzTable, n: i64, w: impl Fn(i64) -> Rat) -> Rat {
    let mut acc = t.get(n) * w(0);
    let mut s = 1i64;
    while s * s <= n {
        acc += rint(2) * t.get(n - s * s) * w(s);
        s += 1;
    }
    acc
}

/// Both relations `Σ H(n-s²) + λ₁(n) = σ₁(n)/3` and
/// `Σ (4s²-n) H(n-s²) + λ₃(n) = 0` for odd `n <= nmax`.
pub fn check_mertens_relations(nmax: i64) -> Result<RelationReport> {
    if nmax < 1 {
        return Err(Error::InvalidArgument(format!("nmax = {nmax} < 1")));
    }
    let t = HurwitzTable::new(nmax as usize);
    let odd: Vec<i64> = (1..=nmax).step_by(2).collect();
    let res: Vec<(i64, Rat, Rat)> = odd
        .par_iter()
        .map(|&n| {
            let r1 = theta_sum(&t, n, |_| Rat::one()) + lambda_k(n, 1).unwrap() - sigma_k(n, 1).unwrap() / rint(3);
            let r2 = theta_sum(&t, n, |s| rint(4 * s * s - n)) + lambda_k(n, 3).unwrap();
            (n, r1, r2)
        })
        .collect();
    let mut rep = RelationReport::new("mertens: sum H(n-s^2) + lambda_1(n) = sigma_1(n)/3 and sum (4s^2-n) H(n-s^2) + lambda_3(n) = 0", format!("odd n <= {nmax}"));
    for (n, r1, r2) in res {
        rep.record_exact(n, r1.is_zero() && r2.is_zero(), format!("{}; {}", rat_to_string(&r1), rat_to_string(&r2)));
    }
    Ok(rep)
}

/// Classical `Σ H(4n-s²) + 2λ₁(n) = 2σ₁(n)` for `n <= nmax`. The variant
/// `Σ H(n-s²) - 2λ₁(n) = 2σ₁(n)` is evaluated too and its failures are noted
/// without affecting the status.
pub fn check_kronecker_hurwitz(nmax: i64) -> Result<RelationReport> {
    if nmax < 1 {
        return Err(Error::InvalidArgument(format!("nmax = {nmax} < 1")));
    }
    let t = HurwitzTable::new(4 * nmax as usize);
    let res: Vec<(i64, Rat, Rat)> = (1..=nmax)
        .into_par_iter()
        .map(|n| {
            let two_sigma = rint(2) * sigma_k(n, 1).unwrap();
            let lam = lambda_k(n, 1).unwrap();
            let classical = theta_sum(&t, 4 * n, |_| Rat::one()) + rint(2) * &lam - &two_sigma;
            let variant = theta_sum(&t, n, |_| Rat::one()) - rint(2) * &lam - &two_sigma;
            (n, classical, variant)
        })
        .collect();
    let mut rep = RelationReport::new("kronecker-hurwitz: sum H(4n-s^2) + 2 lambda_1(n) = 2 sigma_1(n)", format!("1 <= n <= {nmax}"));
    let mut bad = Vec::new();
    for (n, c, v) in &res {
        rep.record_exact(n, c.is_zero(), rat_to_string(c));
        if !v.is_zero() {
            bad.push(*n);
        }
    }
    if let Some(&n0) = bad.first() {
        let (_, _, v) = &res[(n0 - 1) as usize];
        let lhs = v + rint(2) * sigma_k(n0, 1)?;
        rep.note(format!(
            "convention mismatch: the form sum H(n-s^2) - 2 lambda_1(n) = 2 sigma_1(n) fails at {} of {} n; first n = {n0} with lhs {} against {}",
            bad.len(),
            res.len(),
            rat_to_string(&lhs),
            rat_to_string(&(rint(2) * sigma_k(n0, 1)?)),
        ));
    }
    Ok(rep)
}

/// Correction series added to `[𝓗, ϑ]_ν`.
///
/// With `literal = false`:
/// `2^{-2ν-1} C(2ν,ν) Σ_r (2 Σ_{m²-n²=r, m>n>=1} (m-n)^{2ν+1} + [r = t²] t^{2ν+1}) q^r`.
/// With `literal = true` the exponent on `(m-n)` is `2ν-1` and the second term
/// is `r^{2ν+1}` for every `r`.
pub fn mertens_correction(nu: u32, prec: i64, literal: bool) -> QSeries {
    let e_pair = if literal { 2 * nu as i64 - 1 } else { 2 * nu as i64 + 1 };
    let mut binom = Rat::one();
    for i in 0..nu as i64 {
        binom = binom * rint(2 * nu as i64 - i) / rint(i + 1);
    }
    let scale = binom / rat_pow(&rint(2), 2 * nu + 1);
    let pow = |x: i64, e: i64| -> Rat {
        if e >= 0 {
            rat_pow(&rint(x), e as u32)
        } else {
            Rat::one() / rat_pow(&rint(x), (-e) as u32)
        }
    };
    QSeries::from_fn(rint(2 * nu as i64 + 2), prec, |r| {
        if r == 0 {
            return Rat::zero();
        }
        let mut t = Rat::zero();
        // m - n = d, m + n = r/d, d < r/d, same parity
        for d in crate::numth::divisors(r as u64) {
            let d = d as i64;
            let e = r / d;
            if d < e && (e - d) % 2 == 0 {
                t += rint(2) * pow(d, e_pair);
            }
        }
        if literal {
            t += pow(r, 2 * nu as i64 + 1);
        } else {
            let s = (r as f64).sqrt().round() as i64;
            if s * s == r {
                t += pow(s, 2 * nu as i64 + 1);
            }
        }
        &scale * t
    })
}

/// `[𝓗, ϑ]_ν` plus the correction, to `q^prec`.
pub fn completed_bracket(nu: u32, prec: i64, literal: bool) -> Result<QSeries> {
    let h = hurwitz_series(prec);
    let th = theta_scalar(prec)?;
    let b = rc_bracket(&h, &th, nu)?;
    b.add(&mertens_correction(nu, prec, literal))
}

/// Checks the completion identity. For `ν >= 1` the completed bracket must
/// lie in `M_{2ν+2}(Γ0(4))` with exact residuals at every index below
/// `prec`; `ν = 0` checks the odd coefficients against `σ₁(n)/3` instead.
pub fn check_mertens_completion(nu: u32, prec: i64) -> Result<RelationReport> {
    if nu == 0 {
        if prec < 2 {
            return Err(Error::InsufficientPrecision { needed: "2".into(), have: prec.to_string() });
        }
        let f = completed_bracket(0, prec, false)?;
        let mut rep = RelationReport::new("completion nu=0: odd coefficients of H*theta + correction equal sigma_1(n)/3", format!("odd n < {prec}"));
        for n in (1..prec).step_by(2) {
            let r = f.rat_coeff(n)? - sigma_k(n, 1)? / rint(3);
            rep.record_exact(n, r.is_zero(), rat_to_string(&r));
        }
        rep.note("weight 2 completion is only quasimodular; coefficient identity checked instead of membership");
        return Ok(rep);
    }
    let k = 2 * nu + 2;
    let sturm = (k / 2) as i64;
    if prec < sturm + 2 {
        return Err(Error::InsufficientPrecision { needed: (sturm + 2).to_string(), have: prec.to_string() });
    }
    let basis = basis_gamma0_4(k, prec)?;
    let f = completed_bracket(nu, prec, false)?.with_weight(rint(k as i64));
    let mut rep = verify_in_space_upto(&f, &basis, prec - 1)?;
    rep.identity = format!("completion nu={nu}: [H,theta]_{nu} + correction in M_{k}(Gamma0(4))");
    let lit = completed_bracket(nu, prec, true)?.with_weight(rint(k as i64));
    let lit_rep = verify_in_space_upto(&lit, &basis, prec - 1)?;
    if lit_rep.passed() {
        rep.note("the variant with exponent 2nu-1 and r^(2nu+1) on every q^r also passes");
    } else {
        rep.note(format!(
            "the variant with exponent 2nu-1 and r^(2nu+1) on every q^r is not modular: first failing index {}",
            lit_rep.first_counterexample.unwrap_or_default()
        ));
    }
    Ok(rep)
}

/// `Σ_{h, n >= 0} c_g(h, n) c_f(h, -n)`: the constant term of `⟨f, g⟩`.
pub fn serre_pairing(g: &QSeries, f: &QSeries) -> Result<Coeff> {
    if g.group() != f.group() {
        return Err(Error::IncompatibleCosets(format!("{:?} vs {:?}", g.group(), f.group())));
    }
    if g.weight() + f.weight() != rint(2) {
        return Err(Error::InvalidArgument(format!(
            "weights {} and {} do not sum to 2",
            rat_to_string(g.weight()),
            rat_to_string(f.weight())
        )));
    }
    if !g.is_zero() && g.principal_min().is_negative() {
        return Err(Error::InvalidArgument("g has a pole at the cusp".into()));
    }
    if g.is_zero() {
        return Ok(Coeff::zero());
    }
    if f.prec() <= &Rat::zero() {
        return Err(Error::InsufficientPrecision { needed: "1/N".into(), have: rat_to_string(f.prec()) });
    }
    let depth = -f.principal_min();
    if depth.is_negative() {
        return Ok(Coeff::zero());
    }
    if g.prec() <= &depth {
        return Err(Error::InsufficientPrecision { needed: rat_to_string(&depth), have: rat_to_string(g.prec()) });
    }
    let mut acc = Coeff::zero();
    for (h, k, cf) in f.iter() {
        let e = f.exponent(k);
        if e.is_positive() {
            continue;
        }
        acc = acc.add(&cf.mul(&g.coeff(h, &-e)?));
    }
    Ok(acc)
}

/// `serre_pairing(Δ, f_{-10,N})` for `N = 1..=nmax`; nonexistent forms are
/// reported as failures.
pub fn check_serre_delta(nmax: i64) -> Result<RelationReport> {
    let mut rep = RelationReport::new("serre duality: pairing(Delta, f_{-10,N}) = 0", format!("1 <= N <= {nmax}"));
    let d = crate::classical::delta(nmax + 2)?;
    for n in 1..=nmax {
        match crate::classical::duke_jenkins(5, n, 1) {
            Ok(f) => match serre_pairing(&d, &f)? {
                Coeff::Rat(r) => rep.record_exact(format!("N={n}"), r.is_zero(), rat_to_string(&r)),
                Coeff::Num(z) => rep.record_numeric(format!("N={n}"), z.norm(), 0.0),
            },
            Err(e) => rep.fail(format!("N={n}"), format!("no such form: {e}")),
        }
    }
    Ok(rep)
}

/// Indices `r` where the two correction variants differ, with both values.
pub fn correction_variants(nu: u32, prec: i64) -> Vec<(i64, Rat, Rat)> {
    let a = mertens_correction(nu, prec, false);
    let b = mertens_correction(nu, prec, true);
    (0..prec)
        .filter_map(|r| {
            let x = a.rat_coeff(r).unwrap();
            let y = b.rat_coeff(r).unwrap();
            (x != y).then_some((r, x, y))
        })
        .collect()
}
