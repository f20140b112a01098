use super::FeaturesError;

/// Row-major `n x d` matrix of finite 32-bit features; row `i` belongs to
/// sample `i` of the originating dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f32>) -> Result<Self, FeaturesError> {
        if data.len() != n * d {
            return Err(FeaturesError::DimensionHeaderMismatch(format!(
                "{} values for {n}x{d}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FeaturesError::NonFinite { row: i / d.max(1), col: i % d.max(1) });
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self, FeaturesError> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(FeaturesError::DimensionHeaderMismatch(format!("row of {} in {d}-dim matrix", bad.len())));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        (0..self.n).map(move |i| self.row(i))
    }

    /// New matrix holding the given rows, in order. Indices may repeat.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { n: indices.len(), d: self.d, data }
    }

    /// Appends a constant column.
    pub fn with_constant_column(&self, value: f32) -> Self {
        let d = self.d + 1;
        let mut data = Vec::with_capacity(self.n * d);
        for row in self.rows() {
            data.extend_from_slice(row);
            data.push(value);
        }
        Self { n: self.n, d, data }
    }
}
