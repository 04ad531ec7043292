//! Even lattices, discriminant forms, the Weil representation on `S` and `T`,
//! restriction and trace maps, and the Kohnen plus space dictionary.

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numth::{rat, rat_to_f64, rint, Rat};
use crate::qexp::{Coeff, CosetGroup, QSeries};

pub type IMat = Vec<Vec<i64>>;

/// Even lattice given by an integral Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramLattice {
    gram: IMat,
    signature: (usize, usize),
}

/// Exact determinant by fraction-free elimination.
pub fn det(m: &IMat) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Inertia `(positive, negative, zero)` of a rational symmetric matrix by
/// congruence diagonalisation.
pub fn inertia(m: &IMat) -> (usize, usize, usize) {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.iter().map(|r| r.iter().map(|&x| rint(x)).collect()).collect();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // row/col k += row/col j makes the pivot 2 a_kj
                for c in 0..n {
                    let t = a[j][c].clone();
                    a[k][c] += t;
                }
                for r in 0..n {
                    let t = a[r][j].clone();
                    a[r][k] += t;
                }
            } else {
                zero += 1;
                k += 1;
                continue;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
        for i in k + 1..n {
            a[k][i] = Rat::zero();
            a[i][k] = Rat::zero();
        }
        k += 1;
    }
    (pos, neg, zero)
}

impl GramLattice {
    pub fn new(gram: IMat) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::DegenerateLattice("empty Gram matrix".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument("Gram matrix is not square".into()));
            }
            if row[i] % 2 != 0 {
                return Err(Error::InvalidArgument(format!("odd diagonal entry {} (lattice not even)", row[i])));
            }
            for j in 0..n {
                if gram[j][i] != row[j] {
                    return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
                }
            }
        }
        if det(&gram) == 0 {
            return Err(Error::DegenerateLattice("Gram matrix is singular".into()));
        }
        let (p, q, _) = inertia(&gram);
        Ok(Self { gram, signature: (p, q) })
    }

    /// The signature (1,2) lattice of binary quadratic forms: `Q(v) = v1 v3 - v2²`.
    pub fn sig12() -> Self {
        Self::new(vec![vec![0, 0, 1], vec![0, -2, 0], vec![1, 0, 0]]).unwrap()
    }

    pub fn a1() -> Self {
        Self::new(vec![vec![2]]).unwrap()
    }

    pub fn gram(&self) -> &IMat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn det(&self) -> i128 {
        det(&self.gram)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature.1 == 0
    }

    /// `Q(v) = vᵀ G v / 2` for rational coordinates.
    pub fn qform(&self, v: &[Rat]) -> Rat {
        self.bilinear(v, v) / rint(2)
    }

    /// `(v, w) = vᵀ G w`.
    pub fn bilinear(&self, v: &[Rat], w: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g != 0 {
                    s += &v[i] * &w[j] * rint(g);
                }
            }
        }
        s
    }

    /// Lattice with Gram matrix `-G`.
    pub fn negated(&self) -> Self {
        Self::new(self.gram.iter().map(|r| r.iter().map(|x| -x).collect()).collect()).unwrap()
    }

    pub fn from_json(v: &Value) -> Result<(Self, bool)> {
        let rows = v.get("gram").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"gram\"".into()))?;
        let gram = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("gram row is not an array".into()))?
                    .iter()
                    .map(|x| x.as_i64().ok_or_else(|| Error::Parse("gram entry is not an integer".into())))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<IMat>>()?;
        let dual = v.get("dual").and_then(Value::as_bool).unwrap_or(false);
        Ok((Self::new(gram)?, dual))
    }
}

/// Smith form `P G Q = diag(d)`, with `Q⁻¹` tracked alongside.
struct Smith {
    d: Vec<i64>,
    q: IMat,
    qinv: IMat,
}

fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn smith(g: &IMat) -> Smith {
    let n = g.len();
    let mut a = g.clone();
    let mut q = identity(n);
    let mut qinv = identity(n);
    // column op: col j += f col i; Q right-multiplied, Q⁻¹ left-multiplied by the inverse
    let col_add = |a: &mut IMat, q: &mut IMat, qinv: &mut IMat, j: usize, i: usize, f: i64| {
        for r in 0..n {
            a[r][j] += f * a[r][i];
            q[r][j] += f * q[r][i];
        }
        for c in 0..n {
            qinv[i][c] -= f * qinv[j][c];
        }
    };
    let col_swap = |a: &mut IMat, q: &mut IMat, qinv: &mut IMat, i: usize, j: usize| {
        for r in 0..n {
            a[r].swap(i, j);
            q[r].swap(i, j);
        }
        qinv.swap(i, j);
    };
    for t in 0..n {
        loop {
            // smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            col_swap(&mut a, &mut q, &mut qinv, t, bj);
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let f = a[i][t].div_euclid(p);
                if f != 0 {
                    for c in 0..n {
                        a[i][c] -= f * a[t][c];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let f = a[t][j].div_euclid(p);
                if f != 0 {
                    col_add(&mut a, &mut q, &mut qinv, j, t, -f);
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }
    let d = (0..n).map(|i| a[i][i].abs()).collect();
    Smith { d, q, qinv }
}

/// Finite quadratic module `L′/L`.
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    lattice: GramLattice,
    group: CosetGroup,
    /// Smith invariants `> 1`, matching `group`.
    orders: Vec<i64>,
    /// Generators `Q e_i / d_i` in lattice coordinates.
    gens: Vec<Vec<Rat>>,
    /// Rows of `D Q⁻¹` restricted to the nontrivial invariants.
    coord_rows: Vec<Vec<i64>>,
    reps: Vec<Vec<Rat>>,
    norms: Vec<Rat>,
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

impl DiscriminantForm {
    pub fn new(lattice: &GramLattice) -> Result<Self> {
        let n = lattice.rank();
        let s = smith(lattice.gram());
        if s.d.contains(&0) {
            return Err(Error::DegenerateLattice("zero Smith invariant".into()));
        }
        let mut orders = Vec::new();
        let mut gens: Vec<Vec<Rat>> = Vec::new();
        let mut coord_rows = Vec::new();
        for i in 0..n {
            let d = s.d[i];
            if d > 1 {
                orders.push(d);
                gens.push((0..n).map(|r| rat(s.q[r][i], d)).collect());
                coord_rows.push(s.qinv[i].iter().map(|&x| x * d).collect());
            }
        }
        let group = CosetGroup::new(orders.iter().map(|&d| d as u64).collect());
        let mut reps = Vec::with_capacity(group.size());
        let mut norms = Vec::with_capacity(group.size());
        for idx in 0..group.size() {
            let t = group.to_tuple(idx);
            let mut v = vec![Rat::zero(); n];
            for (x, g) in t.iter().zip(&gens) {
                for r in 0..n {
                    v[r] += rint(*x as i64) * &g[r];
                }
            }
            norms.push(frac(&lattice.qform(&v)));
            reps.push(v);
        }
        Ok(Self { lattice: lattice.clone(), group, orders, gens, coord_rows, reps, norms })
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn group(&self) -> &CosetGroup {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.group.size()
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn generators(&self) -> &[Vec<Rat>] {
        &self.gens
    }

    pub fn rep(&self, idx: usize) -> &[Rat] {
        &self.reps[idx]
    }

    /// `Q(μ)` in `[0, 1)`.
    pub fn norm(&self, idx: usize) -> &Rat {
        &self.norms[idx]
    }

    /// `(μ, ν)` in `[0, 1)`.
    pub fn bilinear(&self, a: usize, b: usize) -> Rat {
        frac(&self.lattice.bilinear(&self.reps[a], &self.reps[b]))
    }

    pub fn neg(&self, idx: usize) -> usize {
        self.group.neg(idx)
    }

    /// Coset of a vector `y ∈ L′` given in lattice coordinates.
    pub fn coset_of(&self, y: &[Rat]) -> Result<usize> {
        let n = self.lattice.rank();
        // y ∈ L′ iff G y is integral
        for i in 0..n {
            let mut s = Rat::zero();
            for j in 0..n {
                s += rint(self.lattice.gram[i][j]) * &y[j];
            }
            if !s.is_integer() {
                return Err(Error::InvalidArgument("vector is not in the dual lattice".into()));
            }
        }
        let mut t = Vec::with_capacity(self.orders.len());
        for (row, &d) in self.coord_rows.iter().zip(&self.orders) {
            let mut s = Rat::zero();
            for j in 0..n {
                s += rint(row[j]) * &y[j];
            }
            let s = s.to_integer().to_i64().expect("coset coordinate");
            t.push(s.rem_euclid(d) as u64);
        }
        Ok(self.group.from_tuple(&t))
    }
}

/// `e(x) = exp(2πi x)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x)
}

pub type CMat = Vec<Vec<Complex64>>;

pub fn cmat_mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![Complex64::zero(); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] == Complex64::zero() {
                continue;
            }
            for j in 0..m {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn cmat_adjoint(a: &CMat) -> CMat {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn cmat_max_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm())).fold(0.0, f64::max)
}

pub fn cmat_identity(n: usize) -> CMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Complex64::one() } else { Complex64::zero() }).collect()).collect()
}

pub fn cmat_scale(a: &CMat, s: Complex64) -> CMat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

/// Weil representation matrices on `T` and `S`.
#[derive(Clone, Debug)]
pub struct WeilRep {
    pub dual: bool,
    pub signature: (usize, usize),
    pub rho_t: Vec<Complex64>,
    pub rho_s: CMat,
    negation: Vec<usize>,
}

/// Maximum defects of the defining relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeilChecks {
    pub unitary_s: f64,
    pub unitary_t: f64,
    pub braid: f64,
    pub center: f64,
}

impl WeilChecks {
    pub fn max(&self) -> f64 {
        self.unitary_s.max(self.unitary_t).max(self.braid).max(self.center)
    }
}

/// `ρ(T) e_μ = e(Q(μ)) e_μ`, `ρ(S) e_μ = e((s-r)/8)/√|L′/L| Σ_ν e(-(ν,μ)) e_ν`;
/// the dual representation replaces `Q` by `-Q` and swaps `r` and `s`.
pub fn weil_matrices(df: &DiscriminantForm, dual: bool) -> WeilRep {
    let (r, s) = df.lattice().signature();
    let sign = if dual { -1.0 } else { 1.0 };
    let n = df.size();
    let rho_t: Vec<Complex64> = (0..n).map(|i| e(sign * rat_to_f64(df.norm(i)))).collect();
    let pre = e(sign * (s as f64 - r as f64) / 8.0) / (n as f64).sqrt();
    let mut rho_s = vec![vec![Complex64::zero(); n]; n];
    for (nu, row) in rho_s.iter_mut().enumerate() {
        for (mu, x) in row.iter_mut().enumerate() {
            *x = pre * e(-sign * rat_to_f64(&df.bilinear(nu, mu)));
        }
    }
    let negation = (0..n).map(|i| df.neg(i)).collect();
    let signature = if dual { (s, r) } else { (r, s) };
    WeilRep { dual, signature, rho_t, rho_s, negation }
}

impl WeilRep {
    pub fn dim(&self) -> usize {
        self.rho_t.len()
    }

    pub fn t_matrix(&self) -> CMat {
        let n = self.dim();
        let mut m = vec![vec![Complex64::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.rho_t[i];
        }
        m
    }

    /// Unitarity, `(ST)³ = S²` and `S² e_μ = e((s-r)/4) e_{-μ}`.
    pub fn check(&self) -> WeilChecks {
        let n = self.dim();
        let id = cmat_identity(n);
        let s = &self.rho_s;
        let t = self.t_matrix();
        let unitary_s = cmat_max_diff(&cmat_mul(s, &cmat_adjoint(s)), &id);
        let unitary_t = self.rho_t.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        let s2 = cmat_mul(s, s);
        let st = cmat_mul(s, &t);
        let st3 = cmat_mul(&st, &cmat_mul(&st, &st));
        let braid = cmat_max_diff(&st3, &s2);
        let (r, sg) = self.signature;
        let z = e((sg as f64 - r as f64) / 4.0);
        let mut expect = vec![vec![Complex64::zero(); n]; n];
        for mu in 0..n {
            expect[self.negation[mu]][mu] = z;
        }
        let center = cmat_max_diff(&s2, &expect);
        WeilChecks { unitary_s, unitary_t, braid, center }
    }
}

/// A finite index sublattice `K ⊆ L`, given by the `L`-coordinates of a basis
/// of `K` (the columns of `basis`).
#[derive(Clone, Debug)]
pub struct Sublattice {
    pub l_form: DiscriminantForm,
    pub k_form: DiscriminantForm,
    pub basis: IMat,
    /// For each coset of `K′/K`: its class in `L′/L` when it lies in `L′`.
    k_to_l: Vec<Option<usize>>,
}

impl Sublattice {
    pub fn new(l: &GramLattice, basis: IMat) -> Result<Self> {
        let n = l.rank();
        if basis.len() != n || basis.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("sublattice basis has the wrong shape".into()));
        }
        if det(&basis) == 0 {
            return Err(Error::DegenerateLattice("sublattice basis is singular".into()));
        }
        // Gram of K: Bᵀ G B
        let g = l.gram();
        let mut gk = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0;
                for a in 0..n {
                    for b in 0..n {
                        s += basis[a][i] * g[a][b] * basis[b][j];
                    }
                }
                gk[i][j] = s;
            }
        }
        let k = GramLattice::new(gk)?;
        let l_form = DiscriminantForm::new(l)?;
        let k_form = DiscriminantForm::new(&k)?;
        let mut k_to_l = Vec::with_capacity(k_form.size());
        for idx in 0..k_form.size() {
            let u = k_form.rep(idx);
            let y: Vec<Rat> = (0..n).map(|r| (0..n).map(|c| rint(basis[r][c]) * &u[c]).sum()).collect();
            k_to_l.push(l_form.coset_of(&y).ok());
        }
        Ok(Self { l_form, k_form, basis, k_to_l })
    }

    pub fn index(&self) -> u64 {
        det(&self.basis).unsigned_abs() as u64
    }

    pub fn image(&self, k_coset: usize) -> Option<usize> {
        self.k_to_l[k_coset]
    }

    /// `(f_K)_μ = f_{μ + L}` for `μ ∈ L′/K`, zero otherwise.
    pub fn restrict(&self, f: &QSeries) -> Result<QSeries> {
        if f.group() != self.l_form.group() {
            return Err(Error::IncompatibleCosets("series is not over L′/L".into()));
        }
        let mut out = QSeries::zero(f.weight().clone(), self.k_form.group().clone(), f.exp_den(), f.prec().clone());
        for (kc, img) in self.k_to_l.iter().enumerate() {
            if let Some(lc) = img {
                for (c, k, v) in f.iter() {
                    if c == *lc {
                        out.set(kc, k, v.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(g^L)_{μ̄} = Σ_{μ ∈ L′/K, μ ↦ μ̄} g_μ`.
    pub fn trace(&self, g: &QSeries) -> Result<QSeries> {
        if g.group() != self.k_form.group() {
            return Err(Error::IncompatibleCosets("series is not over K′/K".into()));
        }
        let mut out = QSeries::zero(g.weight().clone(), self.l_form.group().clone(), g.exp_den(), g.prec().clone());
        let mut acc: std::collections::BTreeMap<(usize, i64), Coeff> = Default::default();
        for (c, k, v) in g.iter() {
            if let Some(lc) = self.k_to_l[c] {
                let e = acc.entry((lc, k)).or_insert_with(Coeff::zero);
                *e = e.add(v);
            }
        }
        for ((c, k), v) in acc {
            out.set(c, k, v);
        }
        Ok(out)
    }
}

/// Sum over cosets and exponents of `f_μ(e) g_μ(e)`, the coefficientwise
/// bilinear pairing used for adjointness checks.
pub fn coefficient_pairing(f: &QSeries, g: &QSeries) -> Result<Coeff> {
    if f.group() != g.group() {
        return Err(Error::IncompatibleCosets("pairing over different groups".into()));
    }
    let mut acc = Coeff::zero();
    for (c, k, v) in f.iter() {
        let e = f.exponent(k);
        if &e < g.prec() {
            acc = acc.add(&v.mul(&g.coeff(c, &e)?));
        }
    }
    Ok(acc)
}

/// Residue convention of the plus space: coefficients live on
/// `n ≡ 0, sign (mod 4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlusSign {
    /// `n ≡ 0, 1 (mod 4)`, e.g. `ϑ`, matching `A₁`.
    Plus,
    /// `n ≡ 0, 3 (mod 4)`, e.g. `𝓗`, matching `Q(x) = -x²/4`.
    Minus,
}

impl PlusSign {
    fn odd_residue(self) -> i64 {
        match self {
            PlusSign::Plus => 1,
            PlusSign::Minus => 3,
        }
    }
}

/// `f(τ) = Σ c(n) qⁿ ↦ f₀ e₀ + f₁ e₁` with `f_j = Σ_{n ≡ j·sign} c(n) q^{n/4}`.
pub fn plus_to_vector(f: &QSeries, sign: PlusSign) -> Result<QSeries> {
    if !f.is_scalar() || f.exp_den() != 1 {
        return Err(Error::InvalidArgument("plus space map needs a scalar series in integral powers".into()));
    }
    let odd = sign.odd_residue();
    let mut out = QSeries::zero(f.weight().clone(), CosetGroup::new(vec![2]), 4, f.prec() / rint(4));
    for (_, n, v) in f.iter() {
        let r = n.rem_euclid(4);
        let coset = if r == 0 {
            0
        } else if r == odd {
            1
        } else {
            return Err(Error::PlusSpaceViolation(format!("nonzero coefficient at q^{n}")));
        };
        out.set(coset, n, v.clone());
    }
    Ok(out)
}

/// Inverse of [`plus_to_vector`].
pub fn vector_to_plus(f: &QSeries, sign: PlusSign) -> Result<QSeries> {
    if f.group() != &CosetGroup::new(vec![2]) || 4 % f.exp_den() != 0 {
        return Err(Error::InvalidArgument("expected a series over Z/2 with exponents in (1/4)Z".into()));
    }
    let f = f.with_exp_den(4)?;
    let odd = sign.odd_residue();
    let mut out = QSeries::zero(f.weight().clone(), CosetGroup::trivial(), 1, f.prec() * rint(4));
    for (c, n, v) in f.iter() {
        let want = if c == 0 { 0 } else { odd };
        if n.rem_euclid(4) != want {
            return Err(Error::PlusSpaceViolation(format!("coset {c} carries exponent {n}/4")));
        }
        out.set(0, n, v.clone());
    }
    Ok(out)
}
