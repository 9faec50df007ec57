use super::StatsError;
use crate::Scalar;

/// Observed counts of an r×c cross-tabulation. All-zero rows and columns are
/// dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != cols) {
            return Err(StatsError::DegenerateTable);
        }
        let keep_cols: Vec<usize> = (0..cols)
            .filter(|&j| counts.iter().any(|r| r[j] > 0))
            .collect();
        let counts: Vec<Vec<u64>> = counts
            .into_iter()
            .filter(|r| r.iter().any(|&c| c > 0))
            .map(|r| keep_cols.iter().map(|&j| r[j]).collect())
            .collect();
        if counts.len() < 2 || keep_cols.len() < 2 {
            return Err(StatsError::DegenerateTable);
        }
        let total = counts.iter().flatten().sum();
        Ok(Self { counts, total })
    }

    /// Cross-tabulates two code vectors with `rows` and `cols` categories.
    pub fn from_codes(x: &[usize], y: &[usize], rows: usize, cols: usize) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch(x.len(), y.len()));
        }
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&a, &b) in x.iter().zip(y) {
            counts[a][b] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.counts.len(), self.counts[0].len())
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.shape().1)
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Pearson χ² with expected counts `rowSum·colSum/N`.
pub fn chi_square<T: Scalar>(table: &ContingencyTable) -> T {
    let n = T::of(table.total() as f64);
    let rows = table.row_sums();
    let cols = table.col_sums();
    let mut chi = T::zero();
    for (i, row) in table.counts().iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = T::of(rows[i] as f64) * T::of(cols[j] as f64) / n;
            let d = T::of(observed as f64) - expected;
            chi = chi + d * d / expected;
        }
    }
    chi
}

/// Cramér's V, `√(χ² / (N(k−1)))` with `k = min(r, c)`, clamped to [0, 1].
///
/// A 2×2 table uses the equivalent `|ad − bc| / √(R₁R₂C₁C₂)` on integer
/// products, which gives exactly 1 for a perfectly associated table.
pub fn cramers_v<T: Scalar>(table: &ContingencyTable) -> T {
    let (r, c) = table.shape();
    if (r, c) == (2, 2) {
        let m = table.counts();
        let cross = |a: u64, b: u64| u128::from(a) * u128::from(b);
        let num = cross(m[0][0], m[1][1]).abs_diff(cross(m[0][1], m[1][0]));
        let (rs, cs) = (table.row_sums(), table.col_sums());
        let den = (cross(rs[0], rs[1]) as f64 * cross(cs[0], cs[1]) as f64).sqrt();
        return T::of((num as f64 / den).min(1.0));
    }
    let k = T::of_usize(r.min(c));
    let n = T::of(table.total() as f64);
    (chi_square::<T>(table) / (n * (k - T::one())))
        .sqrt()
        .min(T::one())
}

/// Signed phi `(ad − bc)/√(row₁row₂col₁col₂)` of a 2×2 table; `None` otherwise.
pub fn signed_phi<T: Scalar>(table: &ContingencyTable) -> Option<T> {
    if table.shape() != (2, 2) {
        return None;
    }
    let c = table.counts();
    let f = |v: u64| T::of(v as f64);
    let num = f(c[0][0]) * f(c[1][1]) - f(c[0][1]) * f(c[1][0]);
    let rs = table.row_sums();
    let cs = table.col_sums();
    let den = (f(rs[0]) * f(rs[1]) * f(cs[0]) * f(cs[1])).sqrt();
    Some(num / den)
}
