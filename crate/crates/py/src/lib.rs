//! Python bindings. Rationals cross the boundary as `"p/q"` strings and
//! structured results as JSON text.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use thetalift::classnum::{cohen_coeff, hurwitz_by_forms};
use thetalift::discform::{weil_matrices, DiscriminantForm, GramLattice};
use thetalift::lift::{lambda_coeffs, local_maass_diagnose, FormCache, LambdaRoute, LiftEvaluator, LiftOptions, LiftSpec};
use thetalift::numth::{parse_rat, rat_to_string};
use thetalift::relations::{check_kronecker_hurwitz, check_mertens_completion, check_mertens_relations};
use thetalift::special::hyp2f1_f64;
use thetalift::thetaser::{theta_posdef, Hpoint, SphericalPoly};

fn err(e: thetalift::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn point(x: f64, y: f64) -> PyResult<Hpoint> {
    Hpoint::new(x, y).map_err(err)
}

fn evaluator(ell: u32, dplus: u32, dminus: u32, n: i64, tol: f64, guard: f64) -> PyResult<LiftEvaluator> {
    let spec = LiftSpec::from_duke_jenkins(ell, dplus, dminus, n).map_err(err)?;
    Ok(LiftEvaluator::new(spec, LiftOptions { tol, guard, ..Default::default() }))
}

/// Hurwitz class number `H(n)`.
#[pyfunction]
fn hurwitz(n: i64) -> PyResult<String> {
    Ok(rat_to_string(&hurwitz_by_forms(n).map_err(err)?))
}

/// Cohen number `H(ℓ, n)`, the `n`-th coefficient of the weight `ℓ - 1/2` series.
#[pyfunction]
fn cohen(ell: u32, n: i64) -> PyResult<String> {
    Ok(rat_to_string(&cohen_coeff(ell, n).map_err(err)?))
}

/// JSON report for `mertens`, `kronecker` (both take `arg` as the bound) or
/// `completion` (`arg` is ν, `prec` the precision).
#[pyfunction]
#[pyo3(signature = (name, arg, prec=40))]
fn relation(name: &str, arg: i64, prec: i64) -> PyResult<String> {
    let rep = match name {
        "mertens" => check_mertens_relations(arg),
        "kronecker" => check_kronecker_hurwitz(arg),
        "completion" => check_mertens_completion(u32::try_from(arg).map_err(|e| PyValueError::new_err(e.to_string()))?, prec),
        _ => return Err(PyValueError::new_err(format!("unknown relation {name:?}"))),
    }
    .map_err(err)?;
    Ok(rep.to_json())
}

/// `(rho_t, rho_s)` of the Weil representation of the Gram matrix.
#[pyfunction]
#[pyo3(signature = (gram, dual=false))]
fn weil(gram: Vec<Vec<i64>>, dual: bool) -> PyResult<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let l = GramLattice::new(gram).map_err(err)?;
    let df = DiscriminantForm::new(&l).map_err(err)?;
    let w = weil_matrices(&df, dual);
    Ok((w.rho_t.clone(), w.rho_s.clone()))
}

/// Theta series of a positive definite Gram matrix below `q^prec`, as JSON.
#[pyfunction]
fn theta_series(gram: Vec<Vec<i64>>, prec: &str) -> PyResult<String> {
    let l = GramLattice::new(gram).map_err(err)?;
    let th = theta_posdef(&l, &SphericalPoly::constant(l.rank()), &parse_rat(prec).map_err(err)?).map_err(err)?;
    Ok(th.to_json().to_string())
}

#[pyfunction]
#[pyo3(signature = (a, b, c, z, tol=1e-15))]
fn hyp2f1(a: f64, b: f64, c: f64, z: f64, tol: f64) -> PyResult<f64> {
    hyp2f1_f64(a, b, c, z, tol).map_err(err)
}

/// `(value, tail_bound)` of the lift of `f_{-2ℓ,N}(4τ) 𝓗_ℓ` at `x + iy`.
#[pyfunction]
#[pyo3(signature = (ell, n, x, y, dplus=0, dminus=0, tol=1e-7, guard=1e-3))]
#[allow(clippy::too_many_arguments)]
fn lift_eval(ell: u32, n: i64, x: f64, y: f64, dplus: u32, dminus: u32, tol: f64, guard: f64) -> PyResult<(Complex64, f64)> {
    let ev = evaluator(ell, dplus, dminus, n, tol, guard)?;
    let v = ev.eval(point(x, y)?).map_err(err)?;
    Ok((v.value(), v.tail_bound))
}

/// Local Maaß form diagnostic as JSON.
#[pyfunction]
#[pyo3(signature = (ell, n, x, y, dplus=0, dminus=0, h=1e-3, tol=1e-7))]
#[allow(clippy::too_many_arguments)]
fn lift_diagnose(ell: u32, n: i64, x: f64, y: f64, dplus: u32, dminus: u32, h: f64, tol: f64) -> PyResult<String> {
    let ev = evaluator(ell, dplus, dminus, n, tol, 1e-3)?;
    Ok(local_maass_diagnose(&ev, point(x, y)?, h).map_err(err)?.to_json())
}

/// Coefficients of `q^D`, `1 <= D <= dmax`, of Λ at `x + iy`.
#[pyfunction]
#[pyo3(signature = (ell, x, y, dmax, dplus=0, dminus=0, route="generic", tol=1e-6))]
#[allow(clippy::too_many_arguments)]
fn lambda_series(ell: u32, x: f64, y: f64, dmax: i64, dplus: u32, dminus: u32, route: &str, tol: f64) -> PyResult<Vec<Complex64>> {
    let route = match route {
        "generic" => LambdaRoute::Generic,
        "specialized" => LambdaRoute::Specialized,
        _ => return Err(PyValueError::new_err(format!("unknown route {route:?}"))),
    };
    let opts = LiftOptions { tol, ..Default::default() };
    let (s, _) = lambda_coeffs(ell, dplus, dminus, point(x, y)?, dmax, route, &opts, &FormCache::new()).map_err(err)?;
    Ok((1..=dmax).map(|d| s.get(0, d).to_complex()).collect())
}

#[pymodule]
fn thetalift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hurwitz, m)?)?;
    m.add_function(wrap_pyfunction!(cohen, m)?)?;
    m.add_function(wrap_pyfunction!(relation, m)?)?;
    m.add_function(wrap_pyfunction!(weil, m)?)?;
    m.add_function(wrap_pyfunction!(theta_series, m)?)?;
    m.add_function(wrap_pyfunction!(hyp2f1, m)?)?;
    m.add_function(wrap_pyfunction!(lift_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lift_diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_series, m)?)?;
    Ok(())
}
