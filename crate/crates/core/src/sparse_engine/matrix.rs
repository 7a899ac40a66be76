use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Sparse matrix kept in both compressed-row and compressed-column form.
///
/// Rows serve `a_rᵀx`; columns serve coordinate updates. Duplicate triplets
/// are summed and explicit zeros dropped, so both views hold the same `nnz`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    m: usize,
    n: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<T>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<T>,
}

fn compress<T: Scalar>(
    outer: usize,
    entries: &mut [(usize, usize, T)],
) -> (Vec<usize>, Vec<usize>, Vec<T>) {
    entries.sort_by_key(|a| (a.0, a.1));
    let mut ptr = vec![0usize; outer + 1];
    let mut idx = Vec::with_capacity(entries.len());
    let mut val = Vec::with_capacity(entries.len());
    for &(o, i, v) in entries.iter() {
        ptr[o + 1] += 1;
        idx.push(i);
        val.push(v);
    }
    for k in 0..outer {
        ptr[k + 1] += ptr[k];
    }
    (ptr, idx, val)
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn from_triplets(m: usize, n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|t| t.0 >= m || t.1 >= n) {
            return Err(Error::Config(format!("entry ({r}, {c}) outside a {m}×{n} matrix")));
        }
        if let Some(&(r, c, v)) = triplets.iter().find(|t| !t.2.is_finite()) {
            return Err(Error::Config(format!("entry ({r}, {c}) = {v} is not finite")));
        }
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != T::zero());
        let (row_ptr, row_idx, row_val) = compress(m, &mut merged.clone());
        let mut by_col: Vec<(usize, usize, T)> = merged.iter().map(|&(r, c, v)| (c, r, v)).collect();
        let (col_ptr, col_idx, col_val) = compress(n, &mut by_col);
        Ok(Self { m, n, row_ptr, row_idx, row_val, col_ptr, col_idx, col_val })
    }

    /// Row-major dense input.
    pub fn from_dense(m: usize, n: usize, a: &[T]) -> Result<Self> {
        let t: Vec<_> = (0..m)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, a[r * n + c]))
            .collect();
        Self::from_triplets(m, n, &t)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_val.len()
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.row_idx[a..b], &self.row_val[a..b])
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.col_idx[a..b], &self.col_val[a..b])
    }

    #[inline]
    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[T]) -> T {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.m).map(|r| self.row_dot(r, x)).collect()
    }

    /// `Aᵀy`.
    pub fn tmatvec(&self, y: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|j| {
                let (idx, val) = self.col(j);
                idx.iter().zip(val).map(|(&r, &v)| v * y[r]).sum()
            })
            .collect()
    }

    pub fn col_norm_sq(&self, j: usize) -> T {
        self.col(j).1.iter().map(|&v| v * v).sum()
    }

    /// Entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.m)
            .flat_map(|r| {
                let (idx, val) = self.row(r);
                idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
            })
            .collect()
    }

    /// Entries in column-major order.
    pub fn col_triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.n)
            .flat_map(|c| {
                let (idx, val) = self.col(c);
                idx.iter().zip(val).map(move |(&r, &v)| (r, c, v))
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            row_ptr: self.col_ptr.clone(),
            row_idx: self.col_idx.clone(),
            row_val: self.col_val.clone(),
            col_ptr: self.row_ptr.clone(),
            col_idx: self.row_idx.clone(),
            col_val: self.row_val.clone(),
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut a = vec![T::zero(); self.m * self.n];
        for (r, c, v) in self.triplets() {
            a[r * self.n + c] = v;
        }
        a
    }

    /// Random `m × n` matrix with `⌈density·m·n⌉` target entries uniform in
    /// `[−1, 1]`; every column receives at least one entry.
    pub fn random(m: usize, n: usize, density: f64, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 || !(density > 0.0 && density <= 1.0) {
            return Err(Error::Config("random matrix needs m, n ≥ 1 and density in (0, 1]".into()));
        }
        let mut rng = Stream::new(seed);
        let mut t = Vec::new();
        for c in 0..n {
            t.push((rng.index(m), c, T::lit(rng.uniform_in(-1.0, 1.0))));
        }
        let target = ((density * (m * n) as f64).ceil() as usize).saturating_sub(n);
        for _ in 0..target {
            t.push((rng.index(m), rng.index(n), T::lit(rng.uniform_in(-1.0, 1.0))));
        }
        Self::from_triplets(m, n, &t)
    }

    /// Reads the Matrix Market coordinate format (`real`, `integer` or
    /// `pattern`; `general` or `symmetric`), 1-based indices.
    pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let header = header?.to_ascii_lowercase();
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
            return Err(Error::Parse { line: 1, msg: "expected a coordinate MatrixMarket header".into() });
        }
        let pattern = match tokens[3] {
            "real" | "integer" | "double" => false,
            "pattern" => true,
            other => return Err(Error::Parse { line: 1, msg: format!("unsupported field '{other}'") }),
        };
        let symmetric = match tokens[4] {
            "general" => false,
            "symmetric" => true,
            other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry '{other}'") }),
        };
        let mut size: Option<(usize, usize, usize)> = None;
        let mut t = Vec::new();
        for (no, line) in lines {
            let line = line?;
            let s = line.trim();
            if s.is_empty() || s.starts_with('%') {
                continue;
            }
            let lineno = no + 1;
            let bad = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
            let f: Vec<&str> = s.split_whitespace().collect();
            match size {
                None => {
                    if f.len() != 3 {
                        return Err(bad("size line needs 'rows cols nnz'"));
                    }
                    let p = |k: usize| f[k].parse::<usize>().map_err(|_| bad("invalid size"));
                    size = Some((p(0)?, p(1)?, p(2)?));
                }
                Some((m, n, _)) => {
                    if f.len() < if pattern { 2 } else { 3 } {
                        return Err(bad("entry line too short"));
                    }
                    let r = f[0].parse::<usize>().map_err(|_| bad("invalid row index"))?;
                    let c = f[1].parse::<usize>().map_err(|_| bad("invalid column index"))?;
                    if r == 0 || c == 0 || r > m || c > n {
                        return Err(bad("index out of range (indices are 1-based)"));
                    }
                    let v = if pattern { 1.0 } else { f[2].parse::<f64>().map_err(|_| bad("invalid value"))? };
                    t.push((r - 1, c - 1, T::lit(v)));
                    if symmetric && r != c {
                        t.push((c - 1, r - 1, T::lit(v)));
                    }
                }
            }
        }
        let (m, n, declared) = size.ok_or(Error::Parse { line: 0, msg: "missing size line".into() })?;
        let stored = if symmetric { t.iter().filter(|e| e.0 >= e.1).count() } else { t.len() };
        if stored != declared {
            return Err(Error::Parse { line: 0, msg: format!("declared {declared} entries, found {stored}") });
        }
        Self::from_triplets(m, n, &t)
    }

    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.m, self.n, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {:e}", r + 1, c + 1, v.as_f64())?;
        }
        Ok(())
    }

    /// Little-endian dump: `u64 m, u64 n, u64 nnz`, then `nnz` records of
    /// `(u64 row, u64 col, f64 value)` in row-major order, 0-based.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for h in [self.m as u64, self.n as u64, self.nnz() as u64] {
            w.write_all(&h.to_le_bytes())?;
        }
        for (r, c, v) in self.triplets() {
            w.write_all(&(r as u64).to_le_bytes())?;
            w.write_all(&(c as u64).to_le_bytes())?;
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf)?;
            Ok(buf)
        };
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let nnz = u64::from_le_bytes(next(&mut r)?) as usize;
        let mut t = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let row = u64::from_le_bytes(next(&mut r)?) as usize;
            let col = u64::from_le_bytes(next(&mut r)?) as usize;
            let v = f64::from_le_bytes(next(&mut r)?);
            t.push((row, col, T::lit(v)));
        }
        Self::from_triplets(m, n, &t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix<f64> {
        SparseMatrix::from_triplets(3, 4, &[(0, 1, 2.0), (2, 3, -1.0), (1, 0, 4.0), (0, 1, 1.0), (2, 0, 0.5)])
            .unwrap()
    }

    #[test]
    fn views_agree() {
        let a = small();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.row(0), (&[1usize][..], &[3.0][..]));
        assert_eq!(a.col(0), (&[1usize, 2][..], &[4.0, 0.5][..]));
        let mut by_col = a.col_triplets();
        by_col.sort_by_key(|t| (t.0, t.1));
        assert_eq!(by_col, a.triplets());
        assert_eq!(a.transpose().transpose(), a);
        let total: usize = (0..4).map(|j| a.col_nnz(j)).sum();
        assert_eq!(total, a.nnz());
    }

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::<f64>::random(20, 30, 0.2, 7).unwrap();
        let d = a.to_dense();
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        let ax = a.matvec(&x);
        let aty = a.tmatvec(&y);
        for r in 0..20 {
            let want: f64 = (0..30).map(|c| d[r * 30 + c] * x[c]).sum();
            assert!((ax[r] - want).abs() < 1e-12);
        }
        for c in 0..30 {
            let want: f64 = (0..20).map(|r| d[r * 30 + c] * y[r]).sum();
            assert!((aty[c] - want).abs() < 1e-12);
        }
        assert!((0..30).all(|j| a.col_nnz(j) >= 1));
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = SparseMatrix::<f64>::random(5, 6, 0.4, 2).unwrap();
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let b = SparseMatrix::read_matrix_market(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matrix_market_symmetric_and_errors() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 3.0\n2 1 -1\n";
        let a = SparseMatrix::<f64>::read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.to_dense(), vec![3.0, -1.0, -1.0, 0.0]);
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(SparseMatrix::<f64>::read_matrix_market(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(SparseMatrix::<f64>::read_matrix_market(short.as_bytes()).is_err());
    }

    #[test]
    fn binary_layout() {
        let a = SparseMatrix::from_triplets(2, 3, &[(1, 2, 1.5)]).unwrap();
        let mut buf = Vec::new();
        a.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 24);
        assert_eq!(&buf[0..8], &2u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1u64.to_le_bytes());
        assert_eq!(&buf[40..48], &1.5f64.to_le_bytes());
        assert_eq!(SparseMatrix::<f64>::read_binary(&buf[..]).unwrap(), a);
    }
}
