//! Matrix literal format shared by configs, instance files and golden files:
//! a row-major nested array of `[re, im]` pairs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{c, ComplexMatrix};

pub type Literal = Vec<Vec<[f64; 2]>>;

pub fn to_literal(m: &ComplexMatrix) -> Literal {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn from_literal(lit: &Literal) -> Result<ComplexMatrix, String> {
    let rows = lit.len();
    let cols = lit.first().map_or(0, Vec::len);
    if let Some((i, row)) = lit.iter().enumerate().find(|(_, row)| row.len() != cols) {
        return Err(format!("row {i} has {} entries, expected {cols}", row.len()));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| c(lit[i][j][0], lit[i][j][1])))
}

pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    to_literal(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
    let lit = Literal::deserialize(d)?;
    from_literal(&lit).map_err(D::Error::custom)
}

pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_literal).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        let lits = Vec::<Literal>::deserialize(d)?;
        lits.iter()
            .enumerate()
            .map(|(k, l)| from_literal(l).map_err(|e| D::Error::custom(format!("matrix {k}: {e}"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Holder {
        #[serde(with = "crate::literal")]
        m: ComplexMatrix,
    }

    #[test]
    fn literal_layout_is_row_major_pairs() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| c(i as f64, j as f64));
        let text = serde_json::to_string(&Holder { m }).unwrap();
        assert_eq!(text, r#"{"m":[[[0.0,0.0],[0.0,1.0]],[[1.0,0.0],[1.0,1.0]]]}"#);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = serde_json::from_str::<Holder>(r#"{"m":[[[1,0]],[[1,0],[2,0]]]}"#);
        assert!(err.is_err());
    }
}
