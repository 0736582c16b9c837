//! Skeleton (coin) matrices `C ∈ U(2d)`.
//!
//! Rows and columns follow the alphabet order of [`crate::graph::Letter`]:
//! `a_1, ..., a_d, a_1^{-1}, ..., a_d^{-1}`. Entry `(τ, σ)` is the amplitude
//! for coin state `σ` to be rotated into `τ`; the walker then steps along `τ`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Letter, MAX_D};

/// Tolerance for unitarity and balancedness checks.
pub const COIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonMatrix {
    d: usize,
    /// Row-major `2d × 2d`.
    entries: Vec<Complex64>,
}

impl SkeletonMatrix {
    /// Wraps a row-major `2d × 2d` matrix after checking unitarity.
    pub fn from_entries(d: usize, entries: Vec<Complex64>) -> Result<Self> {
        if d == 0 || d > MAX_D {
            return Err(Error::InvalidCoin(format!("d must be in 1..={MAX_D}, got {d}")));
        }
        let n = 2 * d;
        if entries.len() != n * n {
            return Err(Error::InvalidCoin(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidCoin("non-finite entry".into()));
        }
        let c = SkeletonMatrix { d, entries };
        let residual = c.unitarity_residual();
        if residual >= COIN_TOLERANCE {
            return Err(Error::InvalidCoin(format!(
                "matrix is not unitary: max |CC* - I| = {residual:.3e}"
            )));
        }
        Ok(c)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Size of the coin space, `2d`.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.d
    }

    #[inline]
    pub fn entry(&self, row: Letter, col: Letter) -> Complex64 {
        self.entries[row.index() * self.dim() + col.index()]
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `max_{ij} |(CC*)_{ij} - δ_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.entries[i * n + k] * self.entries[j * n + k].conj();
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// `max_{τσ} ||C_{τσ}| - 1/√(2d)|`.
    pub fn balance_deviation(&self) -> f64 {
        let target = 1.0 / (self.dim() as f64).sqrt();
        self.entries
            .iter()
            .map(|z| (z.norm() - target).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_deviation() < COIN_TOLERANCE
    }

    /// The phase `α_{τσ}` with `C_{τσ} = e^{iα_{τσ}}/√(2d)`, in `(-π, π]`.
    pub fn phase_of_entry(&self, row: Letter, col: Letter) -> Result<f64> {
        let deviation = self.balance_deviation();
        if deviation >= COIN_TOLERANCE {
            return Err(Error::NotBalanced { deviation });
        }
        let z = self.entry(row, col);
        let mut a = z.im.atan2(z.re);
        if a <= -PI {
            a += 2.0 * PI;
        }
        Ok(a)
    }

    /// All phases, row-major. Fails unless balanced.
    pub fn phases(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for r in Letter::all(self.d) {
            for c in Letter::all(self.d) {
                out.push(self.phase_of_entry(r, c)?);
            }
        }
        Ok(out)
    }

    /// For real balanced coins (all entries `±1/√(2d)`), the row-major mask of
    /// entries carrying phase `π`. `None` for any other coin.
    ///
    /// Path amplitudes of such coins are signs, so class sums are integers.
    pub fn pi_phase_mask(&self) -> Option<Vec<bool>> {
        let target = 1.0 / (self.dim() as f64).sqrt();
        self.entries
            .iter()
            .map(|z| {
                if z.im.abs() >= COIN_TOLERANCE {
                    None
                } else if (z.re - target).abs() < COIN_TOLERANCE {
                    Some(false)
                } else if (z.re + target).abs() < COIN_TOLERANCE {
                    Some(true)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Reads `2d` rows of `2d` comma-separated `re,im` pairs.
    ///
    /// Blank lines and lines starting with `#` are skipped. `d` is inferred
    /// from the number of rows.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidCoin(format!("line {}: cannot parse `{}` as a number", lineno + 1, s.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidCoin(format!("need an even, nonzero number of rows, got {n}")));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != 2 * n {
                return Err(Error::InvalidCoin(format!(
                    "row {} has {} numbers, expected {} ({} re,im pairs)",
                    i + 1,
                    row.len(),
                    2 * n,
                    n
                )));
            }
            entries.extend(row.chunks(2).map(|p| Complex64::new(p[0], p[1])));
        }
        SkeletonMatrix::from_entries(n / 2, entries)
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })?;
        SkeletonMatrix::from_csv_str(&text)
    }

    /// Inverse of [`SkeletonMatrix::from_csv_str`], full precision.
    pub fn to_csv_string(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = self.entries[i * n + j];
                    format!("{:?},{:?}", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Discrete Fourier coin `C_{jk} = e^{-iπjk/d}/√(2d)`, `j, k ∈ {0, ..., 2d-1}`.
pub fn make_fourier_coin(d: usize) -> Result<SkeletonMatrix> {
    if d == 0 {
        return Err(Error::InvalidCoin("d must be at least 1".into()));
    }
    let n = 2 * d;
    let scale = 1.0 / (n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            // reduce jk mod 2d first so the angle stays small and exact
            let m = (j * k) % n;
            entries.push(Complex64::from_polar(scale, -PI * m as f64 / d as f64));
        }
    }
    SkeletonMatrix::from_entries(d, entries)
}

/// Real Hadamard coin with entries `±1/√(2d)`, defined when `d` is a power of two.
///
/// `d = 1` gives `[[1, 1], [1, -1]]/√2`. `d = 2` gives `(J - 2I)/2`: `-1/2` on the
/// diagonal and `1/2` elsewhere, so a step that keeps its direction picks up a
/// sign. Larger sizes are Kronecker products of the `4×4` matrix (times one
/// `2×2` factor when `2d` is an odd power of two).
pub fn make_hadamard_coin(d: usize) -> Result<SkeletonMatrix> {
    if d == 0 || !d.is_power_of_two() || d > MAX_D {
        return Err(Error::InvalidCoin(format!(
            "Hadamard coins are constructed for d a power of two, got d = {d}"
        )));
    }
    let h2: Vec<Vec<i8>> = vec![vec![1, 1], vec![1, -1]];
    let h4: Vec<Vec<i8>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { -1 } else { 1 }).collect())
        .collect();

    let log = (2 * d).trailing_zeros();
    let mut h: Vec<Vec<i8>> = if log % 2 == 1 { h2 } else { vec![vec![1]] };
    for _ in 0..log / 2 {
        h = kronecker(&h, &h4);
    }
    let n = 2 * d;
    debug_assert_eq!(h.len(), n);
    let scale = 1.0 / (n as f64).sqrt();
    let entries = h
        .iter()
        .flat_map(|row| row.iter().map(move |&s| Complex64::new(s as f64 * scale, 0.0)))
        .collect();
    SkeletonMatrix::from_entries(d, entries)
}

fn kronecker(a: &[Vec<i8>], b: &[Vec<i8>]) -> Vec<Vec<i8>> {
    let (na, nb) = (a.len(), b.len());
    (0..na * nb)
        .map(|i| (0..na * nb).map(|j| a[i / nb][j / nb] * b[i % nb][j % nb]).collect())
        .collect()
}

/// How a coin is selected from the command line or a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinSpec {
    Fourier,
    Hadamard,
    /// CSV file of `re,im` pairs.
    File(String),
}

impl CoinSpec {
    pub fn build(&self, d: usize) -> Result<SkeletonMatrix> {
        let c = match self {
            CoinSpec::Fourier => make_fourier_coin(d)?,
            CoinSpec::Hadamard => make_hadamard_coin(d)?,
            CoinSpec::File(path) => SkeletonMatrix::from_csv_file(Path::new(path))?,
        };
        if c.d() != d {
            return Err(Error::DimensionMismatch { coin: c.dim(), graph: 2 * d });
        }
        Ok(c)
    }
}

impl fmt::Display for CoinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoinSpec::Fourier => f.write_str("fourier"),
            CoinSpec::Hadamard => f.write_str("hadamard"),
            CoinSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

impl FromStr for CoinSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(CoinSpec::Fourier),
            "hadamard" => Ok(CoinSpec::Hadamard),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(CoinSpec::File(path.to_owned())),
                _ if other.ends_with(".csv") => Ok(CoinSpec::File(other.to_owned())),
                _ => Err(Error::param(
                    "coin",
                    format!("expected `fourier`, `hadamard` or `file:<path.csv>`, got `{other}`"),
                )),
            },
        }
    }
}
