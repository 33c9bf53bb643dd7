//! Tabular microdata model: attribute roles, the record table and min-max
//! normalization of quasi-identifiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    QuasiIdentifier,
    Confidential,
    Ignored,
}

impl Role {
    /// Parses the role keywords used in roles files (`qi`, `confidential`, `ignore`).
    pub fn parse(s: &str) -> Option<Role> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qi" | "quasi-identifier" | "quasi_identifier" => Some(Role::QuasiIdentifier),
            "confidential" | "conf" => Some(Role::Confidential),
            "ignore" | "ignored" => Some(Role::Ignored),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Role::QuasiIdentifier => "qi",
            Role::Confidential => "confidential",
            Role::Ignored => "ignore",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub role: Role,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        AttributeSpec {
            name: name.into(),
            role,
        }
    }

    pub fn qi(name: impl Into<String>) -> Self {
        Self::new(name, Role::QuasiIdentifier)
    }

    pub fn confidential(name: impl Into<String>) -> Self {
        Self::new(name, Role::Confidential)
    }
}

/// Checks the role invariants and returns (QI column indices, confidential column index).
pub(crate) fn resolve_roles(specs: &[AttributeSpec]) -> Result<(Vec<usize>, usize)> {
    let qi: Vec<usize> = specs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role == Role::QuasiIdentifier)
        .map(|(i, _)| i)
        .collect();
    let conf: Vec<usize> = specs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role == Role::Confidential)
        .map(|(i, _)| i)
        .collect();
    if qi.is_empty() {
        return Err(Error::Roles("at least one quasi-identifier is required".into()));
    }
    if conf.len() != 1 {
        return Err(Error::Roles(format!(
            "exactly one confidential attribute is required, found {}",
            conf.len()
        )));
    }
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::Roles(format!("duplicate attribute name `{}`", s.name)));
        }
    }
    Ok((qi, conf[0]))
}

/// A microdata set: `n` records over an ordered list of attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    specs: Vec<AttributeSpec>,
    rows: Vec<Vec<f64>>,
    qi: Vec<usize>,
    confidential: usize,
}

impl Table {
    pub fn new(specs: Vec<AttributeSpec>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let (qi, confidential) = resolve_roles(&specs)?;
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != specs.len() {
                return Err(Error::RowWidth {
                    row: i,
                    found: row.len(),
                    expected: specs.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i,
                    column: specs[j].name.clone(),
                    value: row[j].to_string(),
                });
            }
        }
        Ok(Table {
            specs,
            rows,
            qi,
            confidential,
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn specs(&self) -> &[AttributeSpec] {
        &self.specs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Column indices of the quasi-identifiers, in header order.
    pub fn qi_columns(&self) -> &[usize] {
        &self.qi
    }

    pub fn confidential_column(&self) -> usize {
        self.confidential
    }

    pub fn confidential(&self, i: usize) -> f64 {
        self.rows[i][self.confidential]
    }

    pub fn confidential_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[self.confidential]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Number of attributes that are released (everything but `Ignored`).
    pub fn released_attribute_count(&self) -> usize {
        self.specs.iter().filter(|s| s.role != Role::Ignored).count()
    }

    /// Record indices sorted by (confidential value, index).
    pub fn confidential_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.confidential(a).total_cmp(&self.confidential(b)).then(a.cmp(&b)));
        order
    }
}

/// Per-QI min/max of the original table, frozen before anonymization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<usize>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn range(&self, qi_pos: usize) -> f64 {
        self.max[qi_pos] - self.min[qi_pos]
    }

    /// Maps a value of the `qi_pos`-th QI into [0, 1]; degenerate ranges map to 0.
    pub fn normalize(&self, qi_pos: usize, value: f64) -> f64 {
        let range = self.range(qi_pos);
        if range > 0.0 {
            (value - self.min[qi_pos]) / range
        } else {
            0.0
        }
    }

    pub fn normalized_row(&self, row: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .enumerate()
            .map(|(p, &c)| self.normalize(p, row[c]))
            .collect()
    }
}

pub fn minmax_params(table: &Table) -> NormalizationParams {
    let columns = table.qi_columns().to_vec();
    let mut min = vec![f64::INFINITY; columns.len()];
    let mut max = vec![f64::NEG_INFINITY; columns.len()];
    for row in table.rows() {
        for (p, &c) in columns.iter().enumerate() {
            min[p] = min[p].min(row[c]);
            max[p] = max[p].max(row[c]);
        }
    }
    NormalizationParams { columns, min, max }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs2() -> Vec<AttributeSpec> {
        vec![
            AttributeSpec::qi("a"),
            AttributeSpec::qi("b"),
            AttributeSpec::confidential("c"),
        ]
    }

    #[test]
    fn roles_require_one_confidential_and_a_qi() {
        let no_qi = vec![AttributeSpec::confidential("c")];
        assert!(matches!(Table::new(no_qi, vec![vec![1.0]]), Err(Error::Roles(_))));
        let two_conf = vec![
            AttributeSpec::qi("a"),
            AttributeSpec::confidential("b"),
            AttributeSpec::confidential("c"),
        ];
        assert!(matches!(
            Table::new(two_conf, vec![vec![1.0, 2.0, 3.0]]),
            Err(Error::Roles(_))
        ));
    }

    #[test]
    fn empty_and_ragged_tables_rejected() {
        assert!(matches!(Table::new(specs2(), vec![]), Err(Error::EmptyTable)));
        assert!(matches!(
            Table::new(specs2(), vec![vec![1.0, 2.0]]),
            Err(Error::RowWidth { row: 0, .. })
        ));
    }

    #[test]
    fn minmax_single_column() {
        let t = Table::new(
            vec![AttributeSpec::qi("a"), AttributeSpec::confidential("c")],
            vec![vec![0.0, 1.0], vec![10.0, 2.0]],
        )
        .unwrap();
        let p = minmax_params(&t);
        assert_eq!((p.min[0], p.max[0]), (0.0, 10.0));
        assert_eq!(p.normalize(0, 10.0), 1.0);
    }

    #[test]
    fn minmax_constant_column_normalizes_to_zero() {
        let t = Table::new(
            vec![AttributeSpec::qi("a"), AttributeSpec::confidential("c")],
            vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]],
        )
        .unwrap();
        let p = minmax_params(&t);
        assert_eq!((p.min[0], p.max[0]), (5.0, 5.0));
        for r in t.rows() {
            assert_eq!(p.normalized_row(r), vec![0.0]);
        }
    }

    #[test]
    fn minmax_columns_are_independent() {
        let t = Table::new(
            specs2(),
            vec![vec![0.0, -3.0, 1.0], vec![4.0, 7.0, 2.0], vec![2.0, 1.0, 3.0]],
        )
        .unwrap();
        let p = minmax_params(&t);
        assert_eq!(p.min, vec![0.0, -3.0]);
        assert_eq!(p.max, vec![4.0, 7.0]);
        assert_eq!(p.normalized_row(t.row(2)), vec![0.5, 0.4]);
    }

    #[test]
    fn confidential_order_breaks_ties_by_index() {
        let t = Table::new(
            specs2(),
            vec![
                vec![0.0, 0.0, 3.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 3.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(t.confidential_order(), vec![1, 3, 0, 2]);
    }
}
