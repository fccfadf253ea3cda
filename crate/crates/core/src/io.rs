//! JSON forms of modules and root-module tables. Matrices are row-major
//! lists of exact field elements written as strings; vertices and arrow
//! endpoints are 1-based.

use serde::{Deserialize, Serialize};

use crate::cartan::{DatumFile, RootVector};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::functors::RootModuleTable;
use crate::matrix::Matrix;
use crate::module::{Algebra, AlgebraKind, Module};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrowJson {
    pub head: usize,
    pub tail: usize,
    pub copy: usize,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleJson {
    pub field: FieldSpec,
    pub algebra: AlgebraKind,
    pub datum: DatumFile,
    pub dims: Vec<usize>,
    pub eps: Vec<Vec<Vec<String>>>,
    /// Arrows of `Ω` in `(head, tail, copy)` order.
    pub arrows: Vec<ArrowJson>,
    /// Reversed arrows, present for preprojective modules only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reversed: Vec<ArrowJson>,
}

fn matrix_rows<F: Field>(m: &Matrix<F>) -> Vec<Vec<String>> {
    let f = m.field();
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| f.format(m.get(r, c))).collect()).collect()
}

fn parse_matrix<F: Field>(field: &F, rows: usize, cols: usize, data: &[Vec<String>]) -> Result<Matrix<F>> {
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch(format!("expected a {rows}x{cols} matrix")));
    }
    let entries = data.iter().flatten().map(|s| field.parse(s)).collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_vec(field, rows, cols, entries))
}

pub fn module_to_json<F: Field>(m: &Module<F>) -> ModuleJson {
    let alg = m.alg();
    let mut arrows = Vec::new();
    let mut reversed = Vec::new();
    for (idx, a) in alg.arrows().iter().enumerate() {
        let entry = ArrowJson { head: a.head + 1, tail: a.tail + 1, copy: a.copy + 1, matrix: matrix_rows(m.arrow(idx)) };
        if a.reversed {
            reversed.push(entry);
        } else {
            arrows.push(entry);
        }
    }
    ModuleJson {
        field: m.field().spec(),
        algebra: alg.kind(),
        datum: DatumFile::from_datum(alg.datum(), Some(alg.omega())),
        dims: m.dims().to_vec(),
        eps: (0..alg.n()).map(|i| matrix_rows(m.eps(i))).collect(),
        arrows,
        reversed,
    }
}

pub fn module_from_json<F: Field>(doc: &ModuleJson, field: &F) -> Result<Module<F>> {
    if doc.field != field.spec() {
        return Err(Error::InvalidField(format!("document is over {:?}, expected {:?}", doc.field, field.spec())));
    }
    let (datum, omega) = doc.datum.load()?;
    let omega = omega.ok_or_else(|| Error::InvalidOrientation("module document needs an orientation".into()))?;
    let alg = Algebra::new(datum, omega, doc.algebra);
    if doc.dims.len() != alg.n() || doc.eps.len() != alg.n() {
        return Err(Error::ShapeMismatch("one dimension and one loop matrix per vertex".into()));
    }
    let eps = (0..alg.n()).map(|i| parse_matrix(field, doc.dims[i], doc.dims[i], &doc.eps[i])).collect::<Result<Vec<_>>>()?;
    let mut keyed = Vec::new();
    for a in doc.arrows.iter().chain(&doc.reversed) {
        if a.head == 0 || a.tail == 0 || a.copy == 0 || a.head > alg.n() || a.tail > alg.n() {
            return Err(Error::InvalidVertex(a.head.max(a.tail)));
        }
        let key = (a.head - 1, a.tail - 1, a.copy - 1);
        if alg.arrow_index(key.0, key.1, key.2).is_none() {
            return Err(Error::ShapeMismatch(format!("no arrow {}->{} copy {} in the algebra", a.tail, a.head, a.copy)));
        }
        keyed.push((key, parse_matrix(field, doc.dims[key.0], doc.dims[key.1], &a.matrix)?));
    }
    let m = Module::from_parts(alg, field, doc.dims.clone(), eps, &keyed)?;
    let bad = m.check_relations();
    if !bad.is_empty() {
        return Err(Error::Parse(format!("module violates relations: {}", bad.join("; "))));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootModuleJson {
    pub beta: RootVector,
    pub module: ModuleJson,
}

pub fn root_table_to_json<F: Field>(table: &RootModuleTable<F>) -> Vec<RootModuleJson> {
    table.roots.iter().zip(&table.modules).map(|(beta, m)| RootModuleJson { beta: beta.clone(), module: module_to_json(m) }).collect()
}

/// Canonical compact JSON: object keys sorted, no insignificant
/// whitespace.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{named_datum, Orientation};
    use crate::field::{PrimeField, Rationals};
    use crate::functors::all_root_modules;
    use crate::pimod::{non_e_filtered_fixture, random_e_filtered};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trips() {
        let d = named_datum("B2").unwrap();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        let h = Algebra::h(&d, &o);
        let table = all_root_modules(&h, &Rationals).unwrap();
        for m in &table.modules {
            let doc = module_to_json(m);
            let text = canonical_json(&doc).unwrap();
            let back: ModuleJson = serde_json::from_str(&text).unwrap();
            assert_eq!(module_from_json(&back, &Rationals).unwrap(), *m);
        }
        let pi = Algebra::pi(&d, &o);
        let f = PrimeField::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_e_filtered(&pi, &f, &[0, 1, 0], &mut rng).unwrap();
        let doc = module_to_json(&m);
        assert_eq!(doc.reversed.len(), 1);
        assert_eq!(module_from_json(&doc, &f).unwrap(), m);
        assert!(module_from_json(&doc, &PrimeField::new(5).unwrap()).is_err());
        let fixture = module_to_json(&non_e_filtered_fixture(&pi, &f).unwrap());
        assert_eq!(fixture.reversed[0].matrix, vec![vec!["1".to_string(), "0".to_string()]]);
    }
}
