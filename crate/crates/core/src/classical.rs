//! Scalar modular forms for SL2(Z) and Γ0(4).

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numth::{bernoulli, rat, rat_to_string, rint, sigma_k, Rat};
use crate::qexp::QSeries;
use crate::report::RelationReport;

fn check_prec(prec: i64) -> Result<()> {
    if prec < 1 {
        Err(Error::InvalidArgument(format!("prec = {prec} < 1")))
    } else {
        Ok(())
    }
}

/// `E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) qⁿ` for even `k >= 4`.
pub fn eisenstein(k: u32, prec: i64) -> Result<QSeries> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("E_k needs even k >= 4, got {k}")));
    }
    check_prec(prec)?;
    let c = -rint(2 * k as i64) / bernoulli(k as usize);
    Ok(QSeries::from_fn(rint(k as i64), prec, |n| if n == 0 { Rat::one() } else { &c * sigma_k(n, k - 1).unwrap() }))
}

/// Coefficients of `Π_{n>=1} (1 - qⁿ)^e` below `q^len`.
fn eta_product(e: u32, len: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); len];
    if len == 0 {
        return p;
    }
    p[0] = BigInt::one();
    for n in 1..len {
        // multiply by (1 - q^n), e times
        for _ in 0..e {
            for i in (n..len).rev() {
                let t = p[i - n].clone();
                p[i] -= t;
            }
        }
    }
    p
}

/// `Δ = q Π (1 - qⁿ)^24`.
pub fn delta(prec: i64) -> Result<QSeries> {
    check_prec(prec)?;
    let p = eta_product(24, (prec - 1).max(0) as usize);
    let c: Vec<Rat> = p.into_iter().map(Rat::from_integer).collect();
    Ok(QSeries::scalar(rint(12), 1, &c, prec))
}

/// `Δ^c` for any integer `c`, known for exponents `< prec`.
pub fn delta_pow(c: i64, prec: i64) -> Result<QSeries> {
    if prec <= c {
        return Err(Error::InsufficientPrecision { needed: format!("{}", c + 1), have: prec.to_string() });
    }
    let len = (prec - c) as usize;
    let base = eta_product(24, len);
    let base = QSeries::scalar(Rat::zero(), 0, &base.into_iter().map(Rat::from_integer).collect::<Vec<_>>(), len as i64);
    let body = if c >= 0 { base.pow(c as u32)? } else { base.inverse()?.pow((-c) as u32)? };
    // shift by q^c
    let mut out = QSeries::zero(rint(12 * c), body.group().clone(), 1, rint(prec));
    for (_, k, v) in body.iter() {
        out.set(0, k + c, v.clone());
    }
    Ok(out)
}

/// `j = E4³/Δ`.
pub fn jay(prec: i64) -> Result<QSeries> {
    check_prec(prec)?;
    let e4 = eisenstein(4, prec + 1)?;
    e4.pow(3)?.mul(&delta_pow(-1, prec)?)?.truncate(&rint(prec))
}

/// `ϑ = Σ_{n ∈ Z} q^{n²}`.
pub fn theta_scalar(prec: i64) -> Result<QSeries> {
    check_prec(prec)?;
    let mut s = QSeries::zero(rat(1, 2), Default::default(), 1, rint(prec));
    s.set(0, 0, 1.into());
    let mut n = 1i64;
    while n * n < prec {
        s.set(0, n * n, 2.into());
        n += 1;
    }
    Ok(s)
}

/// `F = Σ_{n odd} σ₁(n) qⁿ`, weight 2 on Γ0(4).
pub fn f_weight2(prec: i64) -> Result<QSeries> {
    check_prec(prec)?;
    Ok(QSeries::from_fn(rint(2), prec, |n| if n % 2 == 1 { sigma_k(n, 1).unwrap() } else { Rat::zero() }))
}

/// The exponent `m` with `dim M_k = m + 1` style bookkeeping for weight `k`
/// (`m = ⌊k/12⌋`, minus one when `k ≡ 2 mod 12`).
pub fn dj_m(k: i64) -> i64 {
    let m = k.div_euclid(12);
    if k.rem_euclid(12) == 2 {
        m - 1
    } else {
        m
    }
}

/// Duke-Jenkins form `f_{-2ℓ,N} = q^{-N} + Σ_{n>m} c(n) qⁿ`, known below
/// `q^prec`.
pub fn duke_jenkins(ell: u32, n: i64, prec: i64) -> Result<QSeries> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("duke_jenkins needs ell >= 2, got {ell}")));
    }
    let k = -2 * ell as i64;
    let m = dj_m(k);
    if n < -m {
        return Err(Error::InvalidArgument(format!("f_{{{k},{n}}} does not exist: need N >= {}", -m)));
    }
    if prec <= -n {
        return Err(Error::InsufficientPrecision { needed: format!("{}", -n + 1), have: prec.to_string() });
    }
    // k = 12 m + k' with k' in {0,4,6,8,10,14}
    let kp = k - 12 * m;
    let (a0, b0) = match kp {
        0 => (0, 0),
        4 => (1, 0),
        6 => (0, 1),
        8 => (2, 0),
        10 => (1, 1),
        14 => (2, 1),
        _ => unreachable!("weight residue {kp}"),
    };
    // g_i = E4^{a0+3i} E6^{b0} Δ^{m-i}, leading term q^{m-i}
    let count = (n + m + 1) as usize;
    let mut basis = Vec::with_capacity(count);
    for i in 0..count as i64 {
        let c = m - i;
        let ext = prec - c + 1;
        let e4 = eisenstein(4, ext)?.pow((a0 + 3 * i) as u32)?;
        let e6 = eisenstein(6, ext)?.pow(b0)?;
        let g = e4.mul(&e6)?.mul(&delta_pow(c, prec)?)?.with_weight(rint(k));
        basis.push(g.truncate(&rint(prec))?);
    }
    // reduce g_{N+m} so that coefficients q^{-N+1}..q^m vanish
    let mut f = basis[count - 1].clone();
    let lead = f.rat_coeff(-n)?;
    if lead.is_zero() {
        return Err(Error::InvalidArgument("degenerate Duke-Jenkins basis".into()));
    }
    f = f.scale(&(Rat::one() / lead));
    for i in (0..count - 1).rev() {
        let e = m - i as i64;
        if e >= prec {
            continue;
        }
        let c = f.rat_coeff(e)?;
        if !c.is_zero() {
            let g = &basis[i];
            let gl = g.rat_coeff(e)?;
            f = f.sub(&g.scale(&(c / gl)))?;
        }
    }
    Ok(f)
}

/// A basis of `M_k(Γ)` for level 1 or 4.
#[derive(Clone, Debug)]
pub struct FormSpaceBasis {
    pub weight: u32,
    pub level: u32,
    pub basis: Vec<QSeries>,
    pub sturm: i64,
}

/// `(ϑ⁴)^a F^b` with `a + b = k/2`.
pub fn basis_gamma0_4(k: u32, prec: i64) -> Result<FormSpaceBasis> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Γ0(4) basis needs even k >= 2, got {k}")));
    }
    check_prec(prec)?;
    let t4 = theta_scalar(prec)?.pow(4)?;
    let f = f_weight2(prec)?;
    let h = k / 2;
    let mut basis = Vec::new();
    for b in 0..=h {
        let a = h - b;
        let mut m = t4.pow(a)?.mul(&f.pow(b)?)?;
        if a == 0 && b == 0 {
            m = m.truncate(&rint(prec))?;
        }
        basis.push(m.with_weight(rint(k as i64)));
    }
    Ok(FormSpaceBasis { weight: k, level: 4, basis, sturm: (k / 2) as i64 })
}

/// `E4^a E6^b` with `4a + 6b = k`.
pub fn basis_level1(k: u32, prec: i64) -> Result<FormSpaceBasis> {
    if k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("odd weight {k}")));
    }
    check_prec(prec)?;
    let e4 = eisenstein(4, prec)?;
    let e6 = eisenstein(6, prec)?;
    let mut basis = Vec::new();
    for b in 0..=(k / 6) {
        let rest = k - 6 * b;
        if rest.is_multiple_of(4) {
            let g = e4.pow(rest / 4)?.mul(&e6.pow(b)?)?;
            basis.push(g.truncate(&rint(prec))?.with_weight(rint(k as i64)));
        }
    }
    Ok(FormSpaceBasis { weight: k, level: 1, basis, sturm: (k / 12) as i64 })
}

/// Solves the square system `m x = rhs` exactly; `None` when singular.
pub fn solve_rat(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col].clone();
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &p;
                for c in col..n {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Coordinates of `f` in `basis` fitted on the first `dim` coefficients.
pub fn solve_coordinates(f: &QSeries, basis: &FormSpaceBasis) -> Result<Vec<Rat>> {
    let dim = basis.basis.len();
    let mut m = vec![vec![Rat::zero(); dim]; dim];
    let mut rhs = vec![Rat::zero(); dim];
    for n in 0..dim {
        for (j, g) in basis.basis.iter().enumerate() {
            m[n][j] = g.rat_coeff(n as i64)?;
        }
        rhs[n] = f.rat_coeff(n as i64)?;
    }
    solve_rat(m, rhs).ok_or_else(|| Error::InvalidArgument("basis is singular on its leading coefficients".into()))
}

/// Checks `f ∈ span(basis)` through the Sturm bound plus one coefficient.
pub fn verify_in_space(f: &QSeries, basis: &FormSpaceBasis) -> Result<RelationReport> {
    verify_in_space_upto(f, basis, basis.sturm + 1)
}

/// Checks the fitted combination against `f` for all indices `0..=upto`.
pub fn verify_in_space_upto(f: &QSeries, basis: &FormSpaceBasis, upto: i64) -> Result<RelationReport> {
    if upto < basis.sturm {
        return Err(Error::InvalidArgument(format!("check range {upto} below Sturm bound {}", basis.sturm)));
    }
    let need = rint(upto + 1);
    if f.prec() < &need || basis.basis.iter().any(|g| g.prec() < &need) {
        return Err(Error::InsufficientPrecision { needed: rat_to_string(&need), have: rat_to_string(f.prec()) });
    }
    if !f.is_zero() && f.principal_min().is_negative() {
        return Err(Error::InvalidArgument("series has negative exponents".into()));
    }
    if f.exp_den() != 1 {
        return Err(Error::InvalidArgument("series has fractional exponents".into()));
    }
    let coords = solve_coordinates(f, basis)?;
    let mut rep = RelationReport::new(
        format!("membership in M_{}(level {})", basis.weight, basis.level),
        format!("0..={upto} (Sturm bound {})", basis.sturm),
    );
    for n in 0..=upto {
        let mut v = f.rat_coeff(n)?;
        for (c, g) in coords.iter().zip(&basis.basis) {
            v -= c * g.rat_coeff(n)?;
        }
        rep.record_exact(n, v.is_zero(), rat_to_string(&v));
    }
    let cs: Vec<String> = coords.iter().map(rat_to_string).collect();
    rep.note(format!("coordinates: [{}]", cs.join(", ")));
    Ok(rep)
}

/// Dimension of `M_k(SL2(Z))`.
pub fn dim_level1(k: u32) -> usize {
    if k % 2 == 1 {
        0
    } else if k % 12 == 2 {
        (k / 12) as usize
    } else {
        (k / 12) as usize + 1
    }
}

/// Reads the integer coefficient `c(n)` of an exact scalar series as i64.
pub fn int_coeff(f: &QSeries, n: i64) -> Result<i64> {
    let r = f.rat_coeff(n)?;
    if !r.is_integer() {
        return Err(Error::InvalidArgument(format!("coefficient {} is not integral", rat_to_string(&r))));
    }
    r.to_integer().to_i64().ok_or_else(|| Error::InvalidArgument("coefficient overflows i64".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ramanujan tau by the direct product, independent of `eta_product`.
    fn tau_oracle(n: usize) -> Vec<i64> {
        let mut p = vec![0i128; n + 1];
        p[0] = 1;
        for k in 1..=n {
            for _ in 0..24 {
                for i in (k..=n).rev() {
                    p[i] -= p[i - k];
                }
            }
        }
        (0..n).map(|i| p[i] as i64).collect()
    }

    #[test]
    fn delta_coefficients() {
        let d = delta(12).unwrap();
        assert_eq!(int_coeff(&d, 1).unwrap(), 1);
        assert_eq!(int_coeff(&d, 2).unwrap(), -24);
        assert_eq!(int_coeff(&d, 3).unwrap(), 252);
        let t = tau_oracle(11);
        for n in 1..12 {
            assert_eq!(int_coeff(&d, n).unwrap(), t[(n - 1) as usize]);
        }
    }

    #[test]
    fn e4_cubed_minus_e6_squared() {
        let p = 30;
        let e4 = eisenstein(4, p).unwrap();
        let e6 = eisenstein(6, p).unwrap();
        let lhs = e4.pow(3).unwrap().sub(&e6.pow(2).unwrap()).unwrap();
        let rhs = delta(p).unwrap().scale(&rint(1728));
        assert_eq!(lhs.max_diff(&rhs).unwrap(), 0.0);
        assert_eq!(lhs.prec(), &rint(p));
    }

    #[test]
    fn jay_start() {
        let j = jay(4).unwrap();
        assert_eq!(int_coeff(&j, -1).unwrap(), 1);
        assert_eq!(int_coeff(&j, 0).unwrap(), 744);
        assert_eq!(int_coeff(&j, 1).unwrap(), 196884);
        assert_eq!(int_coeff(&j, 2).unwrap(), 21493760);
    }

    #[test]
    fn jacobi_four_squares() {
        let p = 30;
        let t4 = theta_scalar(p).unwrap().pow(4).unwrap();
        for n in 1..p {
            let s: i64 = crate::numth::divisors(n as u64).into_iter().filter(|d| d % 4 != 0).map(|d| d as i64).sum();
            assert_eq!(int_coeff(&t4, n).unwrap(), 8 * s);
        }
    }

    #[test]
    fn theta_and_f() {
        let t = theta_scalar(10).unwrap();
        let expect = [1, 2, 0, 0, 2, 0, 0, 0, 0, 2];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(int_coeff(&t, n as i64).unwrap(), *e);
        }
        let f = f_weight2(6).unwrap();
        assert_eq!(int_coeff(&f, 1).unwrap(), 1);
        assert_eq!(int_coeff(&f, 3).unwrap(), 4);
        assert_eq!(int_coeff(&f, 5).unwrap(), 6);
        assert_eq!(int_coeff(&f, 4).unwrap(), 0);
        assert!(eisenstein(5, 4).is_err());
        assert!(eisenstein(2, 4).is_err());
    }

    #[test]
    fn duke_jenkins_weight_minus_4() {
        let f = duke_jenkins(2, 1, 3).unwrap();
        assert_eq!(f.weight(), &rint(-4));
        assert_eq!(int_coeff(&f, -1).unwrap(), 1);
        assert_eq!(int_coeff(&f, 0).unwrap(), 504);
        assert_eq!(int_coeff(&f, 1).unwrap(), 73764);
        // independent: E4^2 times 1/Δ built by series inversion
        let e4 = eisenstein(4, 5).unwrap();
        let d = delta(6).unwrap();
        let dinv = QSeries::scalar(rint(0), 0, &(1..6).map(|n| d.rat_coeff(n).unwrap()).collect::<Vec<_>>(), 5)
            .inverse()
            .unwrap();
        let g = e4.pow(2).unwrap().mul(&dinv).unwrap();
        for n in 0..3 {
            assert_eq!(g.rat_coeff(n).unwrap(), f.rat_coeff(n - 1).unwrap());
        }
    }

    #[test]
    fn duke_jenkins_shape() {
        for ell in 2..=6u32 {
            let k = -2 * ell as i64;
            let m = dj_m(k);
            for n in (-m).max(0)..=10 {
                if n < -m {
                    continue;
                }
                let f = duke_jenkins(ell, n, m + 3).unwrap();
                assert_eq!(f.principal_min(), rint(-n), "ell {ell} N {n}");
                assert_eq!(f.rat_coeff(-n).unwrap(), rint(1));
                for e in -n + 1..=m {
                    assert!(f.rat_coeff(e).unwrap().is_zero(), "ell {ell} N {n} e {e}");
                }
            }
        }
        assert!(duke_jenkins(5, 1, 4).is_err());
        assert!(duke_jenkins(5, 2, 4).is_ok());
    }

    #[test]
    fn gamma0_4_membership() {
        let b = basis_gamma0_4(4, 8).unwrap();
        assert_eq!(b.basis.len(), 3);
        let t8 = theta_scalar(8).unwrap().pow(8).unwrap().with_weight(rint(4));
        let rep = verify_in_space(&t8, &b).unwrap();
        assert!(rep.passed());
        assert_eq!(solve_coordinates(&t8, &b).unwrap(), vec![rint(1), rint(0), rint(0)]);
        let junk = QSeries::scalar(rint(4), 0, &[rint(0), rint(1), rint(0), rint(5), rint(-2), rint(7)], 6);
        let rep = verify_in_space(&junk, &b).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.first_counterexample.as_deref(), Some("3"));
        assert_eq!(basis_gamma0_4(6, 8).unwrap().basis.len(), 4);
        assert!(verify_in_space(&t8.truncate(&rint(2)).unwrap(), &b).is_err());
    }

    #[test]
    fn level1_dimension() {
        for k in [4u32, 6, 8, 10, 12, 14, 24, 26] {
            assert_eq!(basis_level1(k, 10).unwrap().basis.len(), dim_level1(k), "k = {k}");
        }
        let d = delta(20).unwrap();
        let b = basis_level1(12, 20).unwrap();
        assert!(verify_in_space(&d, &b).unwrap().passed());
    }

    #[test]
    fn e4_e6_q_expansion() {
        let e4 = eisenstein(4, 3).unwrap();
        assert_eq!(e4.rat_coeff(1).unwrap(), rint(240));
        let e6 = eisenstein(6, 3).unwrap();
        assert_eq!(e6.rat_coeff(1).unwrap(), rint(-504));
    }
}
