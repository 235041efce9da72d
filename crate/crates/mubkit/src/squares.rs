//! Latin squares over the symbol set `{1, ..., s}`, the affine family of
//! mutually orthogonal squares for prime side, and the two extra squares
//! whose cells are constant along rows or columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareKind {
    Latin,
    RowSquare,
    ColumnSquare,
}

impl SquareKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SquareKind::Latin => "latin",
            SquareKind::RowSquare => "row_square",
            SquareKind::ColumnSquare => "column_square",
        }
    }
}

/// An `s x s` array over symbols `1..=s`. For `kind = Latin` every row and
/// column is a permutation of the symbols; the row square has constant
/// rows `cell(i, j) = i` and the column square constant columns
/// `cell(i, j) = j` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatinSquare {
    side: usize,
    kind: SquareKind,
    cells: Vec<Vec<u32>>,
}

impl LatinSquare {
    pub fn new(side: usize, kind: SquareKind, cells: Vec<Vec<u32>>) -> Result<Self> {
        if side < 2 {
            return Err(Error::SideTooSmall { side });
        }
        let invalid = |reason: &str| Error::InvalidSquare {
            side,
            kind: kind.as_str().to_string(),
            reason: reason.to_string(),
        };
        if cells.len() != side || cells.iter().any(|r| r.len() != side) {
            return Err(invalid("cell array is not side x side"));
        }
        if cells
            .iter()
            .flatten()
            .any(|&v| v < 1 || v as usize > side)
        {
            return Err(invalid("symbol out of range"));
        }
        match kind {
            SquareKind::Latin => {
                for i in 0..side {
                    let mut row_seen = vec![false; side];
                    let mut col_seen = vec![false; side];
                    for j in 0..side {
                        let rv = cells[i][j] as usize - 1;
                        let cv = cells[j][i] as usize - 1;
                        if row_seen[rv] {
                            return Err(invalid("repeated symbol in a row"));
                        }
                        if col_seen[cv] {
                            return Err(invalid("repeated symbol in a column"));
                        }
                        row_seen[rv] = true;
                        col_seen[cv] = true;
                    }
                }
            }
            SquareKind::RowSquare => {
                for (i, row) in cells.iter().enumerate() {
                    if row.iter().any(|&v| v as usize != i + 1) {
                        return Err(invalid("row square must have cell(i, j) = i"));
                    }
                }
            }
            SquareKind::ColumnSquare => {
                for row in &cells {
                    for (j, &v) in row.iter().enumerate() {
                        if v as usize != j + 1 {
                            return Err(invalid("column square must have cell(i, j) = j"));
                        }
                    }
                }
            }
        }
        Ok(Self { side, kind, cells })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn kind(&self) -> SquareKind {
        self.kind
    }

    /// Symbol at 0-based (row, col), still 1-based as a value.
    pub fn cell(&self, row: usize, col: usize) -> u32 {
        self.cells[row][col]
    }

    pub fn cells(&self) -> &[Vec<u32>] {
        &self.cells
    }

    /// All 0-based cells carrying `symbol` (1-based), in row-major order.
    /// For a Latin square or the column square this is one cell per row in
    /// ascending row order; for the row square it walks along the row.
    pub fn symbol_cells(&self, symbol: u32) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.side);
        for i in 0..self.side {
            for j in 0..self.side {
                if self.cells[i][j] == symbol {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        crate::jsonio::to_json_string(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: SquareWire = serde_json::from_str(s)?;
        LatinSquare::new(wire.side, wire.kind, wire.cells)
    }
}

#[derive(Deserialize)]
struct SquareWire {
    side: usize,
    kind: SquareKind,
    cells: Vec<Vec<u32>>,
}

pub(crate) fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// The affine family of mutually orthogonal Latin squares for prime side:
/// `L^(k)` has `cell(i, j) = ((k (i - 1) + (j - 1)) mod s) + 1` in 1-based
/// coordinates, for `k = 1..s-1`.
pub fn mols_prime(s: usize) -> Result<Vec<LatinSquare>> {
    if !is_prime(s) {
        return Err(Error::NotPrime { value: s });
    }
    (1..s)
        .map(|k| {
            let cells = (0..s)
                .map(|i| (0..s).map(|j| ((k * i + j) % s + 1) as u32).collect())
                .collect();
            LatinSquare::new(s, SquareKind::Latin, cells)
        })
        .collect()
}

/// True iff the `s^2` ordered pairs `(L_ij, M_ij)` are all distinct.
pub fn are_orthogonal(l: &LatinSquare, m: &LatinSquare) -> Result<bool> {
    if l.side() != m.side() {
        return Err(Error::SideMismatch {
            left: l.side(),
            right: m.side(),
        });
    }
    let s = l.side();
    let mut seen = vec![false; s * s];
    for i in 0..s {
        for j in 0..s {
            let idx = (l.cell(i, j) as usize - 1) * s + (m.cell(i, j) as usize - 1);
            if seen[idx] {
                return Ok(false);
            }
            seen[idx] = true;
        }
    }
    Ok(true)
}

/// The row square and the column square of side `s`.
pub fn extra_squares(s: usize) -> Result<(LatinSquare, LatinSquare)> {
    let row_cells = (0..s)
        .map(|i| vec![(i + 1) as u32; s])
        .collect();
    let col_cells = (0..s)
        .map(|_| (1..=s as u32).collect())
        .collect();
    Ok((
        LatinSquare::new(s, SquareKind::RowSquare, row_cells)?,
        LatinSquare::new(s, SquareKind::ColumnSquare, col_cells)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_family_matches_worked_table_at_s3() {
        let sqs = mols_prime(3).unwrap();
        assert_eq!(sqs.len(), 2);
        let expect = [[1, 2, 3], [2, 3, 1], [3, 1, 2]];
        for (i, row) in expect.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(sqs[0].cell(i, j), v);
            }
        }
    }

    #[test]
    fn s2_single_square() {
        let sqs = mols_prime(2).unwrap();
        assert_eq!(sqs.len(), 1);
        assert_eq!(sqs[0].cells(), &[vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn s5_all_pairs_orthogonal() {
        let sqs = mols_prime(5).unwrap();
        assert_eq!(sqs.len(), 4);
        for a in 0..sqs.len() {
            for b in (a + 1)..sqs.len() {
                assert!(are_orthogonal(&sqs[a], &sqs[b]).unwrap());
            }
        }
    }

    #[test]
    fn square_is_not_self_orthogonal() {
        let sqs = mols_prime(3).unwrap();
        assert!(!are_orthogonal(&sqs[0], &sqs[0]).unwrap());
    }

    #[test]
    fn extra_squares_layout_and_orthogonality() {
        let (row, col) = extra_squares(3).unwrap();
        assert_eq!(row.cells(), &[vec![1, 1, 1], vec![2, 2, 2], vec![3, 3, 3]]);
        assert_eq!(col.cells(), &[vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]]);
        assert!(are_orthogonal(&row, &col).unwrap());
        let l1 = &mols_prime(3).unwrap()[0];
        assert!(are_orthogonal(&row, l1).unwrap());
        assert!(are_orthogonal(&col, l1).unwrap());
    }

    #[test]
    fn full_family_pairwise_distinct_pairs_up_to_13() {
        for s in [2usize, 3, 5, 7, 11, 13] {
            let mut family = mols_prime(s).unwrap();
            let (row, col) = extra_squares(s).unwrap();
            family.push(row);
            family.push(col);
            assert_eq!(family.len(), s + 1);
            for a in 0..family.len() {
                for b in (a + 1)..family.len() {
                    assert!(
                        are_orthogonal(&family[a], &family[b]).unwrap(),
                        "pair ({a}, {b}) at s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_non_prime_and_mismatched_sides() {
        assert!(matches!(mols_prime(6), Err(Error::NotPrime { .. })));
        assert!(matches!(mols_prime(1), Err(Error::NotPrime { .. })));
        let a = &mols_prime(3).unwrap()[0];
        let b = &mols_prime(5).unwrap()[0];
        assert!(matches!(
            are_orthogonal(a, b),
            Err(Error::SideMismatch { .. })
        ));
    }

    #[test]
    fn invariant_checker_rejects_bad_squares() {
        assert!(LatinSquare::new(
            3,
            SquareKind::Latin,
            vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 1]],
        )
        .is_err());
        assert!(LatinSquare::new(
            3,
            SquareKind::Latin,
            vec![vec![1, 2, 3], vec![2, 3, 1], vec![1, 2, 3]],
        )
        .is_err());
        assert!(LatinSquare::new(2, SquareKind::Latin, vec![vec![1, 2], vec![2, 4]]).is_err());
        assert!(matches!(
            LatinSquare::new(1, SquareKind::Latin, vec![vec![1]]),
            Err(Error::SideTooSmall { .. })
        ));
    }

    #[test]
    fn symbol_cells_row_major() {
        let l1 = &mols_prime(3).unwrap()[0];
        assert_eq!(l1.symbol_cells(1), vec![(0, 0), (1, 2), (2, 1)]);
        let (row, _) = extra_squares(3).unwrap();
        assert_eq!(row.symbol_cells(2), vec![(1, 0), (1, 1), (1, 2)]);
    }

    #[test]
    fn json_round_trip() {
        let l = &mols_prime(3).unwrap()[1];
        let s = l.to_json_string();
        assert!(s.contains("\"side\":3"));
        assert!(s.contains("\"kind\":\"latin\""));
        let back = LatinSquare::from_json_str(&s).unwrap();
        assert_eq!(&back, l);
    }
}
