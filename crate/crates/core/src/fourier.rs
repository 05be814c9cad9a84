//! Fourier transform on `l^2(G)`.
//!
//! The forward transform is unnormalized, `f^(chi) = sum_a f(a) chi(a)`.
//! [`dft_naive`] evaluates that sum directly and is the oracle for the
//! fast path. [`FftPlan`] factors the transform as a tensor product of 1-D
//! DFTs, one per cyclic factor, giving `O(N * sum_j d_j)` work for general
//! factors and `O(N log N)` when every factor is a power of two.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{unit_root, GroupSpec};

/// A complex-valued function on a group (or on its dual; the encodings agree).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    group: GroupSpec,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: GroupSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.size() {
            return Err(Error::LengthMismatch {
                expected: group.size(),
                got: values.len(),
            });
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "function values must be finite".into(),
            ));
        }
        Ok(Self { group, values })
    }

    pub fn zeros(group: GroupSpec) -> Self {
        let n = group.size();
        Self {
            group,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Indicator of the element with index `a`.
    pub fn delta(group: GroupSpec, a: usize) -> Self {
        let mut f = Self::zeros(group);
        f.values[a] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Direct `O(N^2)` evaluation of `f^(chi) = sum_a f(a) chi(a)`.
pub fn dft_naive(f: &GroupFunction) -> GroupFunction {
    let g = f.group();
    let n = g.size();
    let values = (0..n)
        .map(|chi| {
            f.values
                .iter()
                .enumerate()
                .map(|(a, &v)| v * g.char_value_index(chi, a))
                .sum()
        })
        .collect();
    GroupFunction {
        group: g.clone(),
        values,
    }
}

#[derive(Clone, Debug)]
enum AxisKernel {
    Butterfly2,
    /// Iterative radix-2 with `twiddles[k] = exp(2 pi i k / d)`, `k < d/2`.
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<usize>,
    },
    /// Direct `O(d^2)` kernel with `roots[k] = exp(2 pi i k / d)`.
    Direct {
        roots: Vec<Complex64>,
    },
}

#[derive(Clone, Debug)]
struct Axis {
    len: usize,
    stride: usize,
    kernel: AxisKernel,
}

/// Precomputed per-axis twiddle tables for one group.
#[derive(Clone, Debug)]
pub struct FftPlan {
    group: GroupSpec,
    axes: Vec<Axis>,
}

impl FftPlan {
    pub fn new(group: &GroupSpec) -> Self {
        let axes = group
            .orders()
            .iter()
            .zip(group.strides())
            .map(|(&d, &stride)| Axis {
                len: d,
                stride,
                kernel: kernel_for(d),
            })
            .collect();
        Self {
            group: group.clone(),
            axes,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn forward(&self, f: &GroupFunction) -> Result<GroupFunction> {
        if f.group != self.group {
            return Err(Error::GroupMismatch);
        }
        let mut values = f.values.clone();
        self.forward_in_place(&mut values, &mut Vec::new());
        Ok(GroupFunction {
            group: self.group.clone(),
            values,
        })
    }

    /// `f(a) = (1/N) sum_chi f^(chi) conj(chi(a))`.
    pub fn inverse(&self, fhat: &GroupFunction) -> Result<GroupFunction> {
        if fhat.group != self.group {
            return Err(Error::GroupMismatch);
        }
        let mut values: Vec<Complex64> = fhat.values.iter().map(|v| v.conj()).collect();
        self.forward_in_place(&mut values, &mut Vec::new());
        let scale = 1.0 / self.group.size() as f64;
        for v in &mut values {
            *v = v.conj() * scale;
        }
        Ok(GroupFunction {
            group: self.group.clone(),
            values,
        })
    }

    /// Forward transform of `data` in place; `scratch` is reused across calls.
    ///
    /// Panics if `data.len()` differs from the group size.
    pub fn forward_in_place(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(data.len(), self.group.size(), "buffer length mismatch");
        for axis in &self.axes {
            axis.apply(data, scratch);
        }
    }

    /// Perturbs one twiddle factor of `axis`. Fault injection for self-tests.
    #[doc(hidden)]
    pub fn corrupt_twiddle(&mut self, axis: usize) {
        let ax = &mut self.axes[axis];
        let bump = Complex64::new(1e-3, 0.0);
        match &mut ax.kernel {
            AxisKernel::Butterfly2 => {
                ax.kernel = AxisKernel::Direct {
                    roots: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0) + bump],
                };
            }
            AxisKernel::Radix2 { twiddles, .. } => {
                let k = twiddles.len() - 1;
                twiddles[k] += bump;
            }
            AxisKernel::Direct { roots } => roots[1] += bump,
        }
    }
}

fn kernel_for(d: usize) -> AxisKernel {
    let n = d as u64;
    if d == 2 {
        AxisKernel::Butterfly2
    } else if d.is_power_of_two() {
        let bits = d.trailing_zeros();
        AxisKernel::Radix2 {
            twiddles: (0..d as u64 / 2).map(|k| unit_root(k, n)).collect(),
            bitrev: (0..d)
                .map(|i| i.reverse_bits() >> (usize::BITS - bits))
                .collect(),
        }
    } else {
        AxisKernel::Direct {
            roots: (0..n).map(|k| unit_root(k, n)).collect(),
        }
    }
}

impl Axis {
    fn apply(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let (d, s) = (self.len, self.stride);
        let block = d * s;
        if let AxisKernel::Butterfly2 = self.kernel {
            for start in (0..data.len()).step_by(block) {
                for i in start..start + s {
                    let (x0, x1) = (data[i], data[i + s]);
                    data[i] = x0 + x1;
                    data[i + s] = x0 - x1;
                }
            }
            return;
        }
        scratch.resize(2 * d, Complex64::new(0.0, 0.0));
        let (line, out) = scratch.split_at_mut(d);
        for start in (0..data.len()).step_by(block) {
            for i in start..start + s {
                for (k, x) in line.iter_mut().enumerate() {
                    *x = data[i + k * s];
                }
                self.transform_line(line, out);
                for (k, &y) in out.iter().enumerate() {
                    data[i + k * s] = y;
                }
            }
        }
    }

    fn transform_line(&self, line: &[Complex64], out: &mut [Complex64]) {
        let d = self.len;
        match &self.kernel {
            AxisKernel::Butterfly2 => {
                out[0] = line[0] + line[1];
                out[1] = line[0] - line[1];
            }
            AxisKernel::Direct { roots } => {
                for (t, y) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut k = 0;
                    for &x in line {
                        acc += x * roots[k];
                        k += t;
                        if k >= d {
                            k -= d;
                        }
                    }
                    *y = acc;
                }
            }
            AxisKernel::Radix2 { twiddles, bitrev } => {
                for (k, y) in out.iter_mut().enumerate() {
                    *y = line[bitrev[k]];
                }
                let mut half = 1;
                while half < d {
                    let step = d / (2 * half);
                    for start in (0..d).step_by(2 * half) {
                        for k in 0..half {
                            let w = twiddles[k * step];
                            let u = out[start + k];
                            let v = out[start + k + half] * w;
                            out[start + k] = u + v;
                            out[start + k + half] = u - v;
                        }
                    }
                    half *= 2;
                }
            }
        }
    }
}

/// Fast transform; builds a throwaway plan.
pub fn fft_fast(f: &GroupFunction) -> GroupFunction {
    FftPlan::new(f.group())
        .forward(f)
        .expect("plan built for this group")
}

pub fn inverse_fft(fhat: &GroupFunction) -> GroupFunction {
    FftPlan::new(fhat.group())
        .inverse(fhat)
        .expect("plan built for this group")
}

/// `(f * g)(a) = sum_b f(a b^{-1}) g(b)`, evaluated directly.
pub fn convolve(f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    if f.group != g.group {
        return Err(Error::GroupMismatch);
    }
    let grp = &f.group;
    let values = (0..grp.size())
        .map(|a| {
            (0..grp.size())
                .map(|b| f.values[grp.div_index(a, b)] * g.values[b])
                .sum()
        })
        .collect();
    Ok(GroupFunction {
        group: grp.clone(),
        values,
    })
}
