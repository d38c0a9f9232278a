//! Product-form basis inverse: `B⁻¹ = E_k⁻¹ ⋯ E_1⁻¹`, starting from the
//! all-logical identity basis.

struct Eta {
    row: usize,
    pivot: f64,
    /// Off-pivot entries of the transformed entering column.
    entries: Vec<(usize, f64)>,
}

#[derive(Default)]
pub(super) struct EtaFile {
    etas: Vec<Eta>,
    nnz: usize,
}

impl EtaFile {
    pub fn clear(&mut self) {
        self.etas.clear();
        self.nnz = 0;
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Records the pivot that replaces basis position `row` by a column
    /// whose transformed image is `alpha`.
    pub fn push(&mut self, row: usize, alpha: &[f64], drop_tol: f64) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, a)| i != row && a.abs() > drop_tol)
            .map(|(i, &a)| (i, a))
            .collect();
        self.nnz += entries.len() + 1;
        self.etas.push(Eta {
            row,
            pivot: alpha[row],
            entries,
        });
    }

    /// `v <- B⁻¹ v`.
    pub fn ftran(&self, v: &mut [f64]) {
        for e in &self.etas {
            let vr = v[e.row];
            if vr == 0.0 {
                continue;
            }
            let t = vr / e.pivot;
            v[e.row] = t;
            for &(i, a) in &e.entries {
                v[i] -= a * t;
            }
        }
    }

    /// `y <- yᵀ B⁻¹`.
    pub fn btran(&self, y: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut s = y[e.row];
            for &(i, a) in &e.entries {
                s -= a * y[i];
            }
            y[e.row] = s / e.pivot;
        }
    }
}
