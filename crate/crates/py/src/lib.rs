//! Python bindings for the finsum library.
//!
//! Scalar results map to native Python types; structured reports
//! (refinements, traces, judgements) cross the boundary as JSON strings so
//! Python callers can `json.loads` them without a bespoke type layer.
//!
//! Build: `cargo build -p finsum-py --release`, then import the produced
//! cdylib as `finsum` (see python/smoke_test.py, which handles the
//! platform-specific rename).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use finsum_core::ground;
use finsum_core::ideals;
use finsum_core::katetov;
use finsum_core::partition;
use finsum_core::refine;
use finsum_core::search;
use finsum_core::separation;
use finsum_core::{Caps, Error, GroundSet, KatetovMap};

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::EnumerationTooLarge { .. } | Error::SearchTooLarge(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn ground_of(elements: Vec<u64>) -> PyResult<GroundSet> {
    GroundSet::from_values(elements).map_err(pyerr)
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn oracle_of(spec: &str) -> PyResult<ideals::OracleConfig> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let depth = |a: Option<&str>, default: usize| -> PyResult<usize> {
        a.map_or(Ok(default), |s| {
            s.parse()
                .map_err(|e| PyValueError::new_err(format!("bad depth: {e}")))
        })
    };
    match name {
        "summable" => {
            let threshold = match arg {
                None => num::BigRational::from_integer(10.into()),
                Some(raw) => {
                    let (n, d) = raw.split_once('/').unwrap_or((raw, "1"));
                    let n: num::BigInt = n
                        .parse()
                        .map_err(|e| PyValueError::new_err(format!("bad threshold: {e}")))?;
                    let d: num::BigInt = d
                        .parse()
                        .map_err(|e| PyValueError::new_err(format!("bad threshold: {e}")))?;
                    num::BigRational::new(n, d)
                }
            };
            Ok(ideals::OracleConfig::Summable { threshold })
        }
        "vdw" => Ok(ideals::OracleConfig::VanDerWaerden {
            ap_length: depth(arg, 5)?,
        }),
        "hindman" => Ok(ideals::OracleConfig::Hindman {
            fs_depth: depth(arg, 4)?,
        }),
        "folkman" => Ok(ideals::OracleConfig::Folkman {
            fs_depth: depth(arg, 4)?,
        }),
        other => Err(PyValueError::new_err(format!("unknown ideal {other:?}"))),
    }
}

/// A coloring table `[0, n) -> [0, m)` built from a named shape or an
/// explicit table.
#[pyclass(name = "Coloring", from_py_object)]
#[derive(Clone)]
struct PyColoring {
    inner: KatetovMap,
}

#[pymethods]
impl PyColoring {
    #[new]
    #[pyo3(signature = (table, codomain=None))]
    fn new(table: Vec<u64>, codomain: Option<u64>) -> PyResult<Self> {
        let m = codomain.unwrap_or_else(|| table.iter().max().map_or(1, |&v| v + 1));
        Ok(PyColoring {
            inner: KatetovMap::new(table, m).map_err(pyerr)?,
        })
    }

    #[staticmethod]
    fn identity(n: u64) -> Self {
        PyColoring {
            inner: KatetovMap::identity(n),
        }
    }

    #[staticmethod]
    fn log2(n: u64) -> Self {
        PyColoring {
            inner: KatetovMap::log2(n),
        }
    }

    #[staticmethod]
    fn modulo(n: u64, m: u64) -> PyResult<Self> {
        Ok(PyColoring {
            inner: KatetovMap::modulo(n, m).map_err(pyerr)?,
        })
    }

    #[staticmethod]
    fn block(n: u64, width: u64) -> PyResult<Self> {
        Ok(PyColoring {
            inner: KatetovMap::block(n, width).map_err(pyerr)?,
        })
    }

    fn domain_size(&self) -> u64 {
        self.inner.domain_size()
    }

    fn codomain_size(&self) -> u64 {
        self.inner.codomain_size()
    }

    fn eval(&self, x: u64) -> Option<u64> {
        self.inner.eval(x)
    }

    fn fiber(&self, v: u64) -> Vec<u64> {
        self.inner.fiber(v)
    }

    fn __repr__(&self) -> String {
        format!(
            "Coloring(domain={}, codomain={})",
            self.inner.domain_size(),
            self.inner.codomain_size()
        )
    }
}

/// FS(D): all nonempty subset sums, sorted and deduplicated.
#[pyfunction]
fn fs_set(elements: Vec<u64>) -> PyResult<Vec<u64>> {
    let d = ground_of(elements)?;
    Ok(ground::fs_set(&d, &Caps::default())
        .map_err(pyerr)?
        .values()
        .to_vec())
}

/// All decompositions of every FS value, as `{value: [[subset], …]}`.
#[pyfunction]
fn decompositions(py: Python<'_>, elements: Vec<u64>) -> PyResult<Py<pyo3::types::PyDict>> {
    let d = ground_of(elements)?;
    let table = ground::decompositions(&d, &Caps::default()).map_err(pyerr)?;
    let dict = pyo3::types::PyDict::new(py);
    for &x in table.entries().keys() {
        dict.set_item(x, table.subsets_of(x))?;
    }
    Ok(dict.unbind())
}

#[pyfunction]
fn is_sparse(elements: Vec<u64>) -> PyResult<bool> {
    ground::is_sparse(&ground_of(elements)?, &Caps::default()).map_err(pyerr)
}

#[pyfunction]
fn is_very_sparse(elements: Vec<u64>) -> PyResult<bool> {
    ground::is_very_sparse(&ground_of(elements)?, &Caps::default()).map_err(pyerr)
}

/// Greedy very-sparse subsequence: of a finite source list, or of the
/// ascending integers from `start` when `source` is an int.
#[pyfunction]
#[pyo3(signature = (source, length))]
fn greedy_very_sparse(source: Bound<'_, PyAny>, length: usize) -> PyResult<Vec<u64>> {
    let picked = if let Ok(start) = source.extract::<u64>() {
        ground::greedy_very_sparse(start.., length)
    } else {
        let items: Vec<u64> = source.extract()?;
        ground::greedy_very_sparse(items, length)
    };
    Ok(picked.map_err(pyerr)?.elements().to_vec())
}

/// Minimal `e` with `FS(E ∖ e) ⊆ FS(D ∖ d)`; returns `(e, surviving, vacuous)`.
#[pyfunction]
fn tail_shift(d: Vec<u64>, e: Vec<u64>, drop: u64) -> PyResult<(u64, usize, bool)> {
    let d = ground_of(d)?;
    let e = ground_of(e)?;
    let r = ground::tail_shift(&d, &e, drop, &Caps::default()).map_err(pyerr)?;
    Ok((r.shift, r.surviving, r.vacuous))
}

/// Least depth-`k` FS-witness inside `host`, or None.
#[pyfunction]
fn fs_witness(host: Vec<u64>, k: usize) -> PyResult<Option<Vec<u64>>> {
    let mut host = host;
    host.sort_unstable();
    host.dedup();
    let cap = host.last().copied().unwrap_or(0);
    Ok(search::fs_witness(&host, k, cap, &Caps::default())
        .map_err(pyerr)?
        .map(|w| w.ground.elements().to_vec()))
}

/// Longest AP in `host` as `(start, step, length)`.
#[pyfunction]
fn longest_ap(host: Vec<u64>) -> PyResult<(u64, u64, usize)> {
    let mut host = host;
    host.sort_unstable();
    host.dedup();
    let w = search::longest_ap(&host).map_err(pyerr)?;
    Ok((w.start, w.step, w.length))
}

/// Exact `Σ 1/(n+1)` as a `(numerator, denominator)` string pair.
#[pyfunction]
fn summable_weight(a: Vec<u64>) -> (String, String) {
    let w = ideals::summable_weight(&a);
    (w.numer().to_string(), w.denom().to_string())
}

/// Judge a set against an ideal oracle spec such as `"hindman:3"`;
/// returns the judgement as a JSON string.
#[pyfunction]
fn judge(a: Vec<u64>, ideal: &str) -> PyResult<String> {
    let mut a = a;
    a.sort_unstable();
    a.dedup();
    let cfg = oracle_of(ideal)?;
    let j = ideals::judge(&a, &cfg, &Caps::default()).map_err(pyerr)?;
    to_json(&j)
}

/// The unique cell index `k` with `x ∈ P_k` (2-adic valuation).
#[pyfunction]
fn partition_index(x: u64) -> PyResult<u32> {
    partition::partition_index(x).map_err(pyerr)
}

/// Per-cell FS census as a JSON string.
#[pyfunction]
fn h1_profile(elements: Vec<u64>) -> PyResult<String> {
    let p = partition::h1_profile(&ground_of(elements)?, &Caps::default()).map_err(pyerr)?;
    to_json(&p)
}

/// Diagonal refinement through a nested chain (head very sparse); JSON report.
#[pyfunction]
fn refine_fs1(chain: Vec<Vec<u64>>, target: usize) -> PyResult<String> {
    let chain: Vec<GroundSet> = chain.into_iter().map(ground_of).collect::<PyResult<_>>()?;
    let r = refine::refine_fs1(&chain, target, &Caps::default()).map_err(pyerr)?;
    to_json(&r)
}

/// Avoidance refinement; JSON report.
#[pyfunction]
fn refine_avoid(d: Vec<u64>, avoid: Vec<Vec<u64>>, target: usize) -> PyResult<String> {
    let d = ground_of(d)?;
    let avoid: Vec<Vec<u64>> = avoid
        .into_iter()
        .map(|mut a| {
            a.sort_unstable();
            a.dedup();
            a
        })
        .collect();
    let r = refine::refine_avoid(&d, &avoid, target, &Caps::default()).map_err(pyerr)?;
    to_json(&r)
}

/// Probe-based reduction-witness check; JSON report.
#[pyfunction]
fn katetov_verify(
    coloring: PyColoring,
    source: &str,
    target: &str,
    probes: Vec<Vec<u64>>,
) -> PyResult<String> {
    let source = oracle_of(source)?;
    let target = oracle_of(target)?;
    let r = katetov::verify_witness(&coloring.inner, &source, &target, &probes, &Caps::default())
        .map_err(pyerr)?;
    to_json(&r)
}

/// Judge every fiber at the given depth; JSON report.
#[pyfunction]
fn check_fibers(coloring: PyColoring, depth: usize) -> PyResult<String> {
    let r = separation::check_fibers(&coloring.inner, depth, &Caps::default()).map_err(pyerr)?;
    to_json(&r)
}

/// Build a separation trace; JSON.
#[pyfunction]
#[pyo3(signature = (coloring, stages, depths=None))]
fn build_separation(
    coloring: PyColoring,
    stages: usize,
    depths: Option<Vec<usize>>,
) -> PyResult<String> {
    let schedule = separation::Schedule::default_for(stages);
    let trace = separation::build_separation(
        &coloring.inner,
        &schedule,
        stages,
        depths.as_deref(),
        &Caps::default(),
    )
    .map_err(pyerr)?;
    to_json(&trace)
}

/// Re-verify a serialized separation trace; returns `(passed, report_json)`.
#[pyfunction]
fn verify_trace(trace_json: &str, coloring: PyColoring) -> PyResult<(bool, String)> {
    let trace: separation::SeparationTrace = serde_json::from_str(trace_json)
        .map_err(|e| PyValueError::new_err(format!("bad trace JSON: {e}")))?;
    let v = separation::verify_trace(&trace, &coloring.inner, &Caps::default());
    Ok((v.passed, to_json(&v)?))
}

#[pymodule]
fn finsum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyColoring>()?;
    m.add_function(wrap_pyfunction!(fs_set, m)?)?;
    m.add_function(wrap_pyfunction!(decompositions, m)?)?;
    m.add_function(wrap_pyfunction!(is_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(is_very_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_very_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(tail_shift, m)?)?;
    m.add_function(wrap_pyfunction!(fs_witness, m)?)?;
    m.add_function(wrap_pyfunction!(longest_ap, m)?)?;
    m.add_function(wrap_pyfunction!(summable_weight, m)?)?;
    m.add_function(wrap_pyfunction!(judge, m)?)?;
    m.add_function(wrap_pyfunction!(partition_index, m)?)?;
    m.add_function(wrap_pyfunction!(h1_profile, m)?)?;
    m.add_function(wrap_pyfunction!(refine_fs1, m)?)?;
    m.add_function(wrap_pyfunction!(refine_avoid, m)?)?;
    m.add_function(wrap_pyfunction!(katetov_verify, m)?)?;
    m.add_function(wrap_pyfunction!(check_fibers, m)?)?;
    m.add_function(wrap_pyfunction!(build_separation, m)?)?;
    m.add_function(wrap_pyfunction!(verify_trace, m)?)?;
    Ok(())
}
