use pyo3::prelude::*;

#[pymodule]
fn spin_geodesy_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
