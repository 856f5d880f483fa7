//! Smith normal form over the integers and the abelianization it yields.

use serde::{Deserialize, Serialize};

/// `D = U A V` with `D` diagonal. Only `V` is kept: membership of a row
/// vector in the row lattice of `A` is decided by `v V` against `D`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    /// Nonzero diagonal entries `d_0 | d_1 | ...`, all positive.
    pub diagonal: Vec<i128>,
    pub v: Vec<Vec<i128>>,
}

pub fn smith_normal_form(a: &[Vec<i64>], cols: usize) -> SmithForm {
    let rows = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                let q = m[i][t].div_euclid(m[t][t]);
                if q != 0 {
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    m.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    add_col(&mut m, j, t, -q);
                    add_col(&mut v, j, t, -q);
                }
                if m[t][j] != 0 {
                    swap_cols(&mut m, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility: fold any entry not divisible by the pivot into row t
            let d = m[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % d != 0));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let x = m[i][j];
                        m[t][j] += x;
                    }
                }
                None => break,
            }
        }
        if m[t][t] < 0 {
            for j in t..cols {
                m[t][j] = -m[t][j];
            }
        }
        diagonal.push(m[t][t]);
        t += 1;
    }
    SmithForm { rows, cols, diagonal, v }
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// column `dst` += k * column `src`
fn add_col(m: &mut [Vec<i128>], dst: usize, src: usize, k: i128) {
    for row in m.iter_mut() {
        row[dst] += k * row[src];
    }
}

impl SmithForm {
    /// Whether `x` lies in the row lattice of the original matrix.
    pub fn in_row_lattice(&self, x: &[i64]) -> bool {
        let y: Vec<i128> = (0..self.cols)
            .map(|j| (0..self.cols).map(|i| i128::from(x[i]) * self.v[i][j]).sum())
            .collect();
        y.iter().enumerate().all(|(j, &yj)| match self.diagonal.get(j) {
            Some(&d) => yj % d == 0,
            None => yj == 0,
        })
    }

    /// Coordinates of `x` in the quotient by the row lattice; equal exactly
    /// when the two vectors differ by a lattice element.
    pub fn canonical_image(&self, x: &[i64]) -> Vec<i128> {
        (0..self.cols)
            .map(|j| {
                let y: i128 = (0..self.cols).map(|i| i128::from(x[i]) * self.v[i][j]).sum();
                match self.diagonal.get(j) {
                    Some(&d) => y.rem_euclid(d),
                    None => y,
                }
            })
            .collect()
    }

    pub fn abelian_invariants(&self) -> AbelianGroup {
        let torsion: Vec<u64> = self.diagonal.iter().filter(|&&d| d > 1).map(|&d| d as u64).collect();
        AbelianGroup { free_rank: self.cols - self.diagonal.len(), torsion }
    }
}

/// `Z^free_rank ⊕ Z/t_1 ⊕ ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl std::fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".into() } else { format!("Z^{}", self.free_rank) });
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
