//! Periodic pseudospectral substrate: grids, transforms, inner products,
//! and Fourier-multiplier application.
//!
//! Conventions (all physical quantities flow through these):
//! * domain [-L/2, L/2), nodes x_j = -L/2 + j h, h = L/N;
//! * frequencies xi_k = 2 pi k / L with k in [-N/2, N/2), fft bin order;
//! * forward transform unnormalized, inverse carries 1/N;
//! * `inner(u, v) = h * sum u_j conj(v_j)`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Relativistic kinetic symbol sigma_c(xi) of sqrt(-c^2 d_xx + c^4/4) - c^2/2,
/// evaluated in the rationalized form `c^2 xi^2 / (sqrt(c^2 xi^2 + c^4/4) + c^2/2)`
/// which keeps full precision for |xi| << c. `c = inf` degenerates to xi^2.
pub fn hc_symbol(xi: f64, c: f64) -> f64 {
    if c.is_infinite() {
        return xi * xi;
    }
    let c2 = c * c;
    let num = c2 * xi * xi;
    num / ((num + 0.25 * c2 * c2).sqrt() + 0.5 * c2)
}

/// Rationalized difference `xi^2 - sigma_c(xi) = xi^4 / (sqrt(c^2 xi^2 + c^4/4) + c^2/2 + xi^2)`,
/// exact to round-off where the naive subtraction loses every digit.
pub fn hc_symbol_gap(xi: f64, c: f64) -> f64 {
    if c.is_infinite() {
        return 0.0;
    }
    let c2 = c * c;
    let x2 = xi * xi;
    x2 * x2 / ((c2 * x2 + 0.25 * c2 * c2).sqrt() + 0.5 * c2 + x2)
}

/// Uniform periodic grid with cached FFT plans. Two grids are "the same"
/// when their (L, N) agree; the plans are shared, immutable, and thread-safe.
#[derive(Clone)]
pub struct Grid {
    length: f64,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.n == other.n
    }
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Grid> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::GridLength { length });
        }
        if n == 0 || n % 2 != 0 {
            return Err(Error::GridSize { n });
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            length,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    /// Default production grid: L = 80, N = 4096.
    pub fn default_grid() -> Grid {
        Grid::new(80.0, 4096).expect("default grid parameters are valid")
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Node x_j = -L/2 + j h.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + self.spacing() * j as f64
    }

    /// Frequency of fft bin k (bins [0, N/2) positive, [N/2, N) negative;
    /// the single Nyquist bin sits at -N/2).
    pub fn xi(&self, k: usize) -> f64 {
        let kk = if k < self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        };
        2.0 * std::f64::consts::PI * kk / self.length
    }

    pub fn nyquist_bin(&self) -> usize {
        self.n / 2
    }

    /// Forward DFT, unnormalized.
    pub fn fft(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse DFT with the 1/N normalization.
    pub fn ifft(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for z in &mut buf {
            *z *= s;
        }
        buf
    }

    fn ifft_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for z in buf {
            *z *= s;
        }
    }
}

/// Complex samples on a grid. Value-semantic; cloning copies the samples
/// and shares the FFT plans.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Field {
        Field {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.n() {
            return Err(Error::FieldLength {
                expected: grid.n(),
                actual: values.len(),
            });
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Field {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Field {
        Field::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Reassemble from a spectrum (fft bin order).
    pub fn from_spectrum(grid: &Grid, hat: &[Complex64]) -> Result<Field> {
        if hat.len() != grid.n() {
            return Err(Error::FieldLength {
                expected: grid.n(),
                actual: hat.len(),
            });
        }
        Ok(Field {
            grid: grid.clone(),
            values: grid.ifft(hat),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.fft(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when |Im u_j| <= tol * max|u| and Re u_j >= -tol * max|u| for all j.
    pub fn is_real_nonneg(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.values
            .iter()
            .all(|z| z.im.abs() <= tol * scale && z.re >= -tol * scale)
    }

    /// Drop imaginary parts.
    pub fn into_real(mut self) -> Field {
        for z in &mut self.values {
            z.im = 0.0;
        }
        self
    }

    /// Even part about x = 0: (u(x) + u(-x)) / 2. On the grid the reflection
    /// of node j is node (N - j) mod N.
    pub fn evenized(&self) -> Field {
        let n = self.grid.n();
        let v = &self.values;
        let values = (0..n).map(|j| 0.5 * (v[j] + v[(n - j) % n])).collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        let values = self.values.iter().map(|z| z * a).collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale_complex(&self, a: Complex64) -> Field {
        let values = self.values.iter().map(|z| z * a).collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl std::ops::Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "field addition across distinct grids");
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a + b)
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl std::ops::Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "field subtraction across distinct grids");
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a - b)
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }
}

fn same_grid(u: &Field, v: &Field) -> Result<()> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch {
            left_length: u.grid.length(),
            left_n: u.grid.n(),
            right_length: v.grid.length(),
            right_n: v.grid.n(),
        });
    }
    Ok(())
}

/// Discrete sesquilinear form h * sum u_j conj(v_j): the quadrature rule for
/// the L^2 pairing. Conjugate-linear in the second slot.
pub fn inner(u: &Field, v: &Field) -> Result<Complex64> {
    same_grid(u, v)?;
    let h = u.grid.spacing();
    let s: Complex64 = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(h * s)
}

/// sqrt(inner(u, u)).
pub fn norm_l2(u: &Field) -> f64 {
    let h = u.grid.spacing();
    let s: f64 = u.values.iter().map(|z| z.norm_sqr()).sum();
    (h * s).sqrt()
}

/// Parseval quadratic form (h/N) * sum sym(xi_k) |u_hat_k|^2 for a real symbol.
pub fn symbol_quadratic(u: &Field, sym: impl Fn(f64) -> f64) -> f64 {
    let hat = u.spectrum();
    let w = u.grid.spacing() / u.grid.n() as f64;
    let s: f64 = hat
        .iter()
        .enumerate()
        .map(|(k, z)| sym(u.grid.xi(k)) * z.norm_sqr())
        .sum();
    w * s
}

/// Sobolev norm with weight (1 + xi^2)^s.
pub fn sobolev_norm(u: &Field, s: f64) -> f64 {
    symbol_quadratic(u, |xi| (1.0 + xi * xi).powf(s)).sqrt()
}

/// Apply a custom real even symbol as a Fourier multiplier.
pub fn apply_symbol(u: &Field, sym: impl Fn(f64) -> f64) -> Result<Field> {
    let grid = &u.grid;
    let mut hat = u.spectrum();
    for (k, z) in hat.iter_mut().enumerate() {
        let s = sym(grid.xi(k));
        if !s.is_finite() {
            return Err(Error::NonFiniteSymbol { xi: grid.xi(k) });
        }
        *z *= s;
    }
    grid.ifft_in_place(&mut hat);
    Field::from_values(grid, hat)
}

/// The named multipliers of the model. All symbols are real and even except
/// `Dx`, the spectral derivative i*xi (whose Nyquist bin is zeroed to avoid
/// the asymmetric lone mode).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// sigma_c(xi)
    Hc { c: f64 },
    /// sqrt(sigma_c(xi))
    SqrtHc { c: f64 },
    /// 1 + sigma_c(xi), the weight of the modulation norm
    WeightOnePlusHc { c: f64 },
    /// spectral derivative i xi
    Dx,
    /// |xi|^s
    AbsDxPow { s: f64 },
    /// indicator of |xi| <= cutoff
    LowPass { cutoff: f64 },
    /// indicator of |xi| > cutoff
    HighPass { cutoff: f64 },
}

impl Multiplier {
    pub fn symbol(&self, xi: f64) -> Complex64 {
        match *self {
            Multiplier::Hc { c } => hc_symbol(xi, c).into(),
            Multiplier::SqrtHc { c } => hc_symbol(xi, c).sqrt().into(),
            Multiplier::WeightOnePlusHc { c } => (1.0 + hc_symbol(xi, c)).into(),
            Multiplier::Dx => Complex64::new(0.0, xi),
            Multiplier::AbsDxPow { s } => xi.abs().powf(s).into(),
            Multiplier::LowPass { cutoff } => f64::from(u8::from(xi.abs() <= cutoff)).into(),
            Multiplier::HighPass { cutoff } => f64::from(u8::from(xi.abs() > cutoff)).into(),
        }
    }

    /// Odd-order derivative-like symbols zero the lone Nyquist mode.
    fn zeroes_nyquist(&self) -> bool {
        matches!(self, Multiplier::Dx)
    }
}

/// Apply a named multiplier: inverse-transform(sym(xi_k) * u_hat_k).
pub fn apply_multiplier(u: &Field, m: Multiplier) -> Result<Field> {
    let grid = &u.grid;
    let mut hat = u.spectrum();
    for (k, z) in hat.iter_mut().enumerate() {
        if m.zeroes_nyquist() && k == grid.nyquist_bin() {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let s = m.symbol(grid.xi(k));
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFiniteSymbol { xi: grid.xi(k) });
        }
        *z *= s;
    }
    grid.ifft_in_place(&mut hat);
    Field::from_values(grid, hat)
}

/// Worst margins of the three symbol bounds over a sample set:
/// sigma >= xi^2/2 on |xi| <= c delta, sigma >= (c delta / 2)|xi| on |xi| >= c delta,
/// sigma <= xi^2 everywhere. Margins are (bound satisfied) - 0, so >= 0 is clean.
#[derive(Clone, Copy, Debug)]
pub struct SymbolBoundsReport {
    pub worst_low_margin: f64,
    pub worst_high_margin: f64,
    pub worst_upper_margin: f64,
    pub samples: usize,
}

/// Check the kinetic-symbol bounds on a sample list; the first violation
/// (beyond a 1e-13 relative rounding allowance) is an error naming xi, c, delta.
pub fn symbol_bounds_check(c: f64, delta: f64, xi_samples: &[f64]) -> Result<SymbolBoundsReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            constraint: "c > 0".to_string(),
        });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            constraint: "delta in (0, 1]".to_string(),
        });
    }
    let cutoff = c * delta;
    let mut report = SymbolBoundsReport {
        worst_low_margin: f64::INFINITY,
        worst_high_margin: f64::INFINITY,
        worst_upper_margin: f64::INFINITY,
        samples: xi_samples.len(),
    };
    for &xi in xi_samples {
        let sigma = hc_symbol(xi, c);
        let scale = (xi * xi).max(1.0);
        let tol = 1e-13 * scale;
        if xi.abs() <= cutoff {
            let margin = sigma - 0.5 * xi * xi;
            report.worst_low_margin = report.worst_low_margin.min(margin);
            if margin < -tol {
                return Err(Error::SymbolBound {
                    bound: "sigma >= xi^2/2 on |xi| <= c*delta",
                    xi,
                    c,
                    delta,
                    margin,
                });
            }
        }
        if xi.abs() >= cutoff {
            let margin = sigma - 0.5 * cutoff * xi.abs();
            report.worst_high_margin = report.worst_high_margin.min(margin);
            if margin < -tol {
                return Err(Error::SymbolBound {
                    bound: "sigma >= (c*delta/2)|xi| on |xi| >= c*delta",
                    xi,
                    c,
                    delta,
                    margin,
                });
            }
        }
        let margin = xi * xi - sigma;
        report.worst_upper_margin = report.worst_upper_margin.min(margin);
        if margin < -tol {
            return Err(Error::SymbolBound {
                bound: "sigma <= xi^2",
                xi,
                c,
                delta,
                margin,
            });
        }
    }
    Ok(report)
}
