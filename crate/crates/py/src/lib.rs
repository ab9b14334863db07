//! Python bindings: the main series/solution types plus solve, series,
//! verification, character and multiplicity entry points.

use std::collections::HashMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qsys_core::combinat::{series_k_specialized, series_r_specialized, BinomialConvention};
use qsys_core::json::{
    family_to_json, parse_nu, report_to_json, series_from_json, series_to_json, spec_from_json,
};
use qsys_core::kr::{kr_canonical, kr_multiplicities, run_suite};
use qsys_core::liedata::{
    algebra, denominator_identity_check, normalized_character_y, DenominatorIdentity,
};
use qsys_core::qsolve::solve;
use qsys_core::rat::format_rat;
use qsys_core::{SolutionFamily, TruncatedSeries};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_convention(name: &str) -> PyResult<BinomialConvention> {
    BinomialConvention::parse(name)
        .ok_or_else(|| value_err(format!("unknown binomial convention `{name}`")))
}

/// A truncated multivariate power series with exact rational coefficients.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Series {
    inner: TruncatedSeries,
}

#[pymethods]
impl Series {
    #[getter]
    fn cutoff(&self) -> u32 {
        self.inner.cutoff()
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.inner.vars().names.clone()
    }

    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    /// Terms as `(exponent_dict, coefficient_string)` pairs in graded order.
    fn terms(&self) -> Vec<(HashMap<String, u32>, String)> {
        let names = &self.inner.vars().names;
        self.inner
            .terms_weighted_order()
            .into_iter()
            .map(|(e, c)| {
                let exp: HashMap<String, u32> = e
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(v, &x)| (names[v].clone(), x))
                    .collect();
                (exp, format_rat(c))
            })
            .collect()
    }

    /// Coefficient at the monomial given by `{var: exponent}`.
    fn coeff(&self, exp: HashMap<String, u32>) -> PyResult<String> {
        let vars = self.inner.vars();
        let mut e = qsys_core::Expo::zero(vars.len());
        for (name, x) in exp {
            let pos = vars
                .position(&name)
                .ok_or_else(|| value_err(format!("unknown variable `{name}`")))?;
            e.0[pos] = x;
        }
        Ok(format_rat(&self.inner.coeff(&e)))
    }

    fn to_json(&self) -> String {
        series_to_json(&self.inner).to_string()
    }

    fn __add__(&self, other: &Series) -> PyResult<Series> {
        Ok(Series {
            inner: self.inner.add(&other.inner).map_err(value_err)?,
        })
    }

    fn __sub__(&self, other: &Series) -> PyResult<Series> {
        Ok(Series {
            inner: self.inner.sub(&other.inner).map_err(value_err)?,
        })
    }

    fn __mul__(&self, other: &Series) -> PyResult<Series> {
        Ok(Series {
            inner: self.inner.mul(&other.inner).map_err(value_err)?,
        })
    }

    fn __eq__(&self, other: &Series) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Series({})", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// A solved Q-system family, indexed by labels like `"1"` or `"(1,2)"`.
#[pyclass(frozen)]
struct Family {
    inner: SolutionFamily,
}

#[pymethods]
impl Family {
    #[getter]
    fn cutoff(&self) -> u32 {
        self.inner.cutoff
    }

    fn indices(&self) -> Vec<String> {
        self.inner.spec.indices.iter().map(|i| i.label()).collect()
    }

    fn member(&self, label: &str) -> PyResult<Series> {
        let idx = qsys_core::SysIndex::parse(label)
            .ok_or_else(|| value_err(format!("bad index label `{label}`")))?;
        let member = self
            .inner
            .member(&idx)
            .ok_or_else(|| value_err(format!("no member at {label}")))?;
        Ok(Series {
            inner: member.clone(),
        })
    }

    fn to_json(&self) -> String {
        family_to_json(&self.inner).to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Family({} members, cutoff {})",
            self.inner.members.len(),
            self.inner.cutoff
        )
    }
}

/// Canonical solution of the KR-type system of `algebra` modulo the cutoff.
#[pyfunction]
fn solve_algebra(algebra_selector: &str, cutoff: u32) -> PyResult<Family> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    let fam = kr_canonical(&alg, cutoff).map_err(runtime_err)?;
    Ok(Family { inner: fam })
}

/// Solves a Q-system given as spec JSON (`kind`, `indices`, `D`, `G`).
#[pyfunction]
fn solve_spec(spec_json: &str, cutoff: u32) -> PyResult<Family> {
    let value: serde_json::Value = serde_json::from_str(spec_json).map_err(value_err)?;
    let spec = Arc::new(spec_from_json(&value).map_err(value_err)?);
    let fam = solve(&spec, cutoff).map_err(runtime_err)?;
    Ok(Family { inner: fam })
}

fn series_for(
    algebra_selector: &str,
    nu: &str,
    cutoff: u32,
    conv: &str,
    use_r: bool,
) -> PyResult<Series> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    let spec = alg.kr_matrices(cutoff.max(1) as usize);
    let nu = parse_nu(nu, &spec).map_err(value_err)?;
    let conv = parse_convention(conv)?;
    let series = if use_r {
        series_r_specialized(&spec, &nu, cutoff, conv)
    } else {
        series_k_specialized(&spec, &nu, cutoff, conv)
    }
    .map_err(runtime_err)?;
    Ok(Series { inner: series })
}

/// The series `K^ν` of `algebra` in the `y` variables.
#[pyfunction]
#[pyo3(signature = (algebra_selector, nu = "", cutoff = 8, convention = "type1"))]
fn series_k(algebra_selector: &str, nu: &str, cutoff: u32, convention: &str) -> PyResult<Series> {
    series_for(algebra_selector, nu, cutoff, convention, false)
}

/// The series `R^ν` of `algebra` in the `y` variables.
#[pyfunction]
#[pyo3(signature = (algebra_selector, nu = "", cutoff = 8, convention = "type1"))]
fn series_r(algebra_selector: &str, nu: &str, cutoff: u32, convention: &str) -> PyResult<Series> {
    series_for(algebra_selector, nu, cutoff, convention, true)
}

/// `∏_(α>0) (1 − y^α)` of the fixed-point subalgebra, as an exact polynomial.
#[pyfunction]
fn weyl_denominator(algebra_selector: &str) -> PyResult<Series> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    Ok(Series {
        inner: alg.weyl_denominator(),
    })
}

/// Normalized irreducible character of the dominant weight (Λ-coordinates).
#[pyfunction]
fn character(algebra_selector: &str, weight: Vec<i64>) -> PyResult<Series> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    let chi = normalized_character_y(&alg, &weight).map_err(runtime_err)?;
    Ok(Series { inner: chi })
}

/// Runs the verification suite; returns `(gating_ok, report_json)`.
#[pyfunction]
#[pyo3(signature = (algebra_selector, cutoff = 8, seed = 0))]
fn verify(algebra_selector: &str, cutoff: u32, seed: u64) -> PyResult<(bool, String)> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    let report = run_suite(&alg, cutoff, seed).map_err(runtime_err)?;
    Ok((report.gating_ok(), report_to_json(&report).to_string()))
}

/// Dominant-weight multiplicities of a tensor product of KR modules;
/// returns `(weight, multiplicity_string)` rows plus the same data as JSON.
#[pyfunction]
#[pyo3(signature = (algebra_selector, nu = "", cutoff = 8, convention = "type1"))]
fn decompose(
    algebra_selector: &str,
    nu: &str,
    cutoff: u32,
    convention: &str,
) -> PyResult<Vec<(Vec<i64>, String)>> {
    let alg = algebra(algebra_selector).map_err(value_err)?;
    let spec = alg.kr_matrices(cutoff.max(1) as usize);
    let nu = parse_nu(nu, &spec).map_err(value_err)?;
    let conv = parse_convention(convention)?;
    let rows = kr_multiplicities(&alg, &nu, cutoff, conv).map_err(runtime_err)?;
    Ok(rows
        .into_iter()
        .map(|(w, m)| (w, format_rat(&m)))
        .collect())
}

/// Checks one of the Weyl-denominator identities (`cn-bn`, `bn-dn`, `cn-dn`).
#[pyfunction]
fn denominator_identity(which: &str, n: usize) -> PyResult<bool> {
    let id = DenominatorIdentity::parse(which)
        .ok_or_else(|| value_err(format!("unknown identity `{which}`")))?;
    denominator_identity_check(id, n).map_err(runtime_err)
}

/// Parses series JSON back into a [`Series`].
#[pyfunction]
fn series_from_json_str(text: &str) -> PyResult<Series> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(value_err)?;
    Ok(Series {
        inner: series_from_json(&value).map_err(value_err)?,
    })
}

#[pymodule]
fn qsys_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_class::<Family>()?;
    m.add_function(wrap_pyfunction!(solve_algebra, m)?)?;
    m.add_function(wrap_pyfunction!(solve_spec, m)?)?;
    m.add_function(wrap_pyfunction!(series_k, m)?)?;
    m.add_function(wrap_pyfunction!(series_r, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_denominator, m)?)?;
    m.add_function(wrap_pyfunction!(character, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(denominator_identity, m)?)?;
    m.add_function(wrap_pyfunction!(series_from_json_str, m)?)?;
    Ok(())
}
