//! Command-line descriptions of states and observables.
//!
//! States: a product of qubit kets over `0 1 + -` (e.g. `+1`, `00`), `ket:K`
//! for a basis state, `mixed` for `I/d`, or a matrix or ket given inline as
//! JSON (`[[re, im], ...]` for a ket) or read from `@file`.
//!
//! Observables: a Pauli string over `I X Y Z` (e.g. `IZ`), `proj:K`, or an
//! inline / `@file` matrix.

use lindblad_core::linalg::{self, CMat, CVec, C64};
use lindblad_core::operators::named;

use crate::error::CliError;
use crate::model_file::{matrix_from_data, MatrixData};

fn qubits_for(spec: &str, dim: usize) -> Option<usize> {
    let n = spec.chars().count();
    (n > 0 && n < usize::BITS as usize && 1usize << n == dim).then_some(n)
}

fn inline_json(spec: &str, what: &str) -> Result<Option<serde_json::Value>, CliError> {
    let text = if let Some(path) = spec.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| CliError::input(what, format!("{path}: {e}")))?
    } else if spec.trim_start().starts_with('[') {
        spec.to_string()
    } else {
        return Ok(None);
    };
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::input(what, format!("malformed JSON: {e}")))
}

fn parse_index(rest: &str, dim: usize, what: &str) -> Result<usize, CliError> {
    let k: usize = rest
        .parse()
        .map_err(|_| CliError::input(what, format!("bad basis index {rest:?}")))?;
    if k >= dim {
        return Err(CliError::input(what, format!("basis index {k} out of range for dimension {dim}")));
    }
    Ok(k)
}

pub fn parse_state(spec: &str, dim: usize) -> Result<CMat, CliError> {
    let what = "state";
    if let Some(v) = inline_json(spec, what)? {
        if let Ok(m) = serde_json::from_value::<MatrixData>(v.clone()) {
            return matrix_from_data(&m, dim, what);
        }
        let ket: Vec<[f64; 2]> = serde_json::from_value(v)
            .map_err(|_| CliError::input(what, "expected a matrix or a ket of [re, im] pairs"))?;
        if ket.len() != dim {
            return Err(CliError::input(what, format!("ket has length {}, expected {dim}", ket.len())));
        }
        let v = CVec::from_iterator(dim, ket.iter().map(|z| C64::new(z[0], z[1])));
        let n = v.norm();
        if !(n > 0.0) {
            return Err(CliError::input(what, "ket must be nonzero"));
        }
        return Ok(linalg::projector(&(v / C64::new(n, 0.0))));
    }
    if spec == "mixed" {
        return Ok(linalg::identity(dim) / C64::new(dim as f64, 0.0));
    }
    if let Some(rest) = spec.strip_prefix("ket:") {
        return Ok(linalg::projector(&named::ket(dim, parse_index(rest, dim, what)?)));
    }
    if qubits_for(spec, dim).is_some() {
        let mut v = CVec::from_element(1, C64::new(1.0, 0.0));
        for ch in spec.chars() {
            let f = match ch {
                '0' => named::ket(2, 0),
                '1' => named::ket(2, 1),
                '+' => named::plus(),
                '-' => named::minus(),
                _ => return Err(CliError::input(what, format!("unknown ket symbol {ch:?} in {spec:?}"))),
            };
            v = named::kron_vec(&v, &f);
        }
        return Ok(linalg::projector(&v));
    }
    Err(CliError::input(
        what,
        format!("cannot read {spec:?} as a state of dimension {dim} (use e.g. \"+1\", \"ket:0\", \"mixed\", inline JSON or @file)"),
    ))
}

pub fn parse_observable(spec: &str, dim: usize) -> Result<CMat, CliError> {
    let what = "observable";
    if let Some(v) = inline_json(spec, what)? {
        let m: MatrixData = serde_json::from_value(v)
            .map_err(|_| CliError::input(what, "expected a matrix of [re, im] pairs"))?;
        return matrix_from_data(&m, dim, what);
    }
    if let Some(rest) = spec.strip_prefix("proj:") {
        return Ok(linalg::projector(&named::ket(dim, parse_index(rest, dim, what)?)));
    }
    if qubits_for(spec, dim).is_some() {
        let mut m = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        for ch in spec.chars() {
            let f = match ch.to_ascii_uppercase() {
                'I' => linalg::identity(2),
                'X' => named::sigma_x(),
                'Y' => named::sigma_y(),
                'Z' => named::sigma_z(),
                _ => return Err(CliError::input(what, format!("unknown Pauli symbol {ch:?} in {spec:?}"))),
            };
            m = linalg::kron(&m, &f);
        }
        return Ok(m);
    }
    Err(CliError::input(
        what,
        format!("cannot read {spec:?} as an observable of dimension {dim} (use e.g. \"IZ\", \"proj:0\", inline JSON or @file)"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_kets() {
        let rho = parse_state("+1", 4).unwrap();
        let want = linalg::projector(&named::kron_vec(&named::plus(), &named::ket(2, 1)));
        assert!(linalg::max_abs_diff(&rho, &want) < 1e-15);
        assert!(parse_state("+1", 2).is_err());
        assert!(parse_state("0x", 4).is_err());
    }

    #[test]
    fn inline_forms() {
        let rho = parse_state("[[1,0],[0,1]]", 2).unwrap();
        // (1, i)/sqrt2
        assert!((rho[(0, 1)].im + 0.5).abs() < 1e-15);
        let m = parse_state("[[[1,0],[0,0]],[[0,0],[0,0]]]", 2).unwrap();
        assert_eq!(m[(0, 0)].re, 1.0);
        assert!(parse_state("[[1,0]]", 2).is_err());
    }

    #[test]
    fn basis_and_mixed() {
        assert_eq!(parse_state("ket:2", 3).unwrap()[(2, 2)].re, 1.0);
        assert!(parse_state("ket:3", 3).is_err());
        assert!((parse_state("mixed", 3).unwrap()[(1, 1)].re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_strings() {
        let z = parse_observable("IZ", 4).unwrap();
        assert_eq!(z[(1, 1)].re, -1.0);
        assert_eq!(z[(2, 2)].re, 1.0);
        assert!(parse_observable("Q", 2).is_err());
    }
}
