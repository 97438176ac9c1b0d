use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{check_finite, Error, Result};

/// A time series of points in `R^p`, stored row-major (one point per row).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSeries {
    dim: usize,
    data: Vec<f64>,
}

impl PointSeries {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} values do not split into points of dimension {dim}",
                data.len()
            )));
        }
        check_finite("point series", &data)?;
        Ok(Self { dim, data })
    }

    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Scalar function `f` with `<phi(x), phi(y)> = f(<x, y>)`.
#[derive(Clone)]
pub enum Kernel {
    Linear,
    /// `(t + offset)^degree`; degree 2 with offset 0 is the lift `x -> x (x) x`.
    Polynomial { degree: u32, offset: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => write!(f, "Linear"),
            Kernel::Polynomial { degree, offset } => {
                write!(f, "Polynomial {{ degree: {degree}, offset: {offset} }}")
            }
            Kernel::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Kernel {
    pub fn quadratic() -> Self {
        Kernel::Polynomial {
            degree: 2,
            offset: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Kernel::Linear => t,
            Kernel::Polynomial { degree, offset } => (t + offset).powi(*degree as i32),
            Kernel::Custom(f) => f(t),
        }
    }

    pub fn is_homogeneous_quadratic(&self) -> bool {
        matches!(self, Kernel::Polynomial { degree: 2, offset } if *offset == 0.0)
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Linear => "linear".into(),
            Kernel::Polynomial { degree, offset } if *offset == 0.0 => format!("poly{degree}"),
            Kernel::Polynomial { degree, offset } => format!("poly{degree}+{offset}"),
            Kernel::Custom(_) => "custom".into(),
        }
    }
}

/// Index-addressable right-hand side.
///
/// For the degree-2 kernel, index `i * p^2 + a * p + c` addresses pair
/// `(a, c)` of block `i`.
pub trait TargetAccess: Send + Sync {
    fn len(&self) -> usize;
    fn get(&self, index: usize) -> f64;
}

impl TargetAccess for Vec<f64> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn get(&self, index: usize) -> f64 {
        self[index]
    }
}

#[derive(Clone)]
pub enum Target {
    /// `b = [phi(c^1); ...; phi(c^n)]` with `c^i` the point after block `i`.
    LiftedSeries,
    Explicit(Arc<dyn TargetAccess>),
}

/// Kernel autoregression instance.
///
/// Block `i` (0-based, `i < n`) has columns `l = 0..d` holding the point
/// `i + d - 1 - l`, so `C^i` column `l` is that point.
pub struct KernelARProblem {
    series: PointSeries,
    n: usize,
    d: usize,
    kernel: Kernel,
    target: Target,
    target_reads: AtomicU64,
}

impl fmt::Debug for KernelARProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelARProblem")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("p", &self.series.dim())
            .field("kernel", &self.kernel)
            .finish()
    }
}

impl KernelARProblem {
    /// Lifted-series target; `series` holds `n + d` points.
    pub fn autoregressive(series: PointSeries, d: usize, kernel: Kernel) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("lag order must be positive".into()));
        }
        if series.len() < d + 1 {
            return Err(Error::SeriesTooShort {
                needed: d + 1,
                actual: series.len(),
            });
        }
        let n = series.len() - d;
        Ok(Self {
            series,
            n,
            d,
            kernel,
            target: Target::LiftedSeries,
            target_reads: AtomicU64::new(0),
        })
    }

    /// Arbitrary target of length `n * p'`; `series` holds `n + d - 1` points.
    /// Only the degree-2 kernel gives index-addressable rows.
    pub fn with_target(
        series: PointSeries,
        d: usize,
        kernel: Kernel,
        target: Arc<dyn TargetAccess>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("lag order must be positive".into()));
        }
        if series.len() < d {
            return Err(Error::SeriesTooShort {
                needed: d,
                actual: series.len(),
            });
        }
        if !kernel.is_homogeneous_quadratic() {
            return Err(Error::InvalidParameter(
                "explicit targets require the degree-2 polynomial kernel".into(),
            ));
        }
        let n = series.len() - d + 1;
        let p = series.dim();
        if target.len() != n * p * p {
            return Err(Error::DimensionMismatch {
                context: "kernel target",
                expected: n * p * p,
                actual: target.len(),
            });
        }
        Ok(Self {
            series,
            n,
            d,
            kernel,
            target: Target::Explicit(target),
            target_reads: AtomicU64::new(0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.series.dim()
    }

    pub fn series(&self) -> &PointSeries {
        &self.series
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    /// Point in column `l` of block `i`.
    pub fn block_point(&self, i: usize, l: usize) -> &[f64] {
        self.series.point(i + self.d - 1 - l)
    }

    /// `c^i` of the lifted-series target.
    pub fn target_point(&self, i: usize) -> Option<&[f64]> {
        match self.target {
            Target::LiftedSeries => Some(self.series.point(i + self.d)),
            Target::Explicit(_) => None,
        }
    }

    /// Degree-2 target entry for block `i`, pair `(a, c)`; counted.
    pub fn read_target(&self, i: usize, a: usize, c: usize) -> f64 {
        self.target_reads.fetch_add(1, Ordering::Relaxed);
        self.peek_target(i, a, c)
    }

    /// Uncounted access, for verification only.
    pub fn peek_target(&self, i: usize, a: usize, c: usize) -> f64 {
        let p = self.p();
        match &self.target {
            Target::LiftedSeries => {
                let ci = self.series.point(i + self.d);
                ci[a] * ci[c]
            }
            Target::Explicit(t) => t.get(i * p * p + a * p + c),
        }
    }

    pub fn target_reads(&self) -> u64 {
        self.target_reads.load(Ordering::Relaxed)
    }
}

/// Row index of pair `(a, c)` in block `i`.
pub fn encode_row(p: usize, i: usize, a: usize, c: usize) -> usize {
    i * p * p + a * p + c
}

/// Inverse of [`encode_row`].
pub fn decode_row(p: usize, row: usize) -> (usize, usize, usize) {
    let pp = p * p;
    (row / pp, (row % pp) / p, row % p)
}
