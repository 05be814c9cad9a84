//! Equal-width histograms of eigenvalue samples.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub part: String,
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub re: Vec<Bin>,
    /// Present only when the samples have a nonzero imaginary part.
    pub im: Option<Vec<Bin>>,
}

fn bin_counts(part: &str, xs: &[f64], bins: usize) -> Vec<Bin> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let k = if width > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| Bin {
            part: part.to_string(),
            bin: k,
            lower: lo + k as f64 * width,
            upper: if k + 1 == bins {
                hi
            } else {
                lo + (k + 1) as f64 * width
            },
            count,
        })
        .collect()
}

/// Bins the real parts over `[min, max]` (and the imaginary parts, for
/// genuinely complex samples).
pub fn emit_histogram(samples: &[Complex64], bins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if samples
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let scale = samples.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let complex = samples.iter().any(|z| z.im.abs() > 1e-9 * scale);
    let im = complex.then(|| {
        let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
        bin_counts("im", &im, bins)
    });
    Ok(Histogram {
        re: bin_counts("re", &re, bins),
        im,
    })
}

impl Histogram {
    /// CSV with columns `part,bin,lower,upper,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for b in self.re.iter().chain(self.im.iter().flatten()) {
            out.serialize(b)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads `re_lambda` and `im_lambda` columns from a spectrum or pooled
/// eigenvalue CSV; other columns are ignored.
pub fn read_eigenvalues_csv<R: Read>(r: R) -> Result<Vec<Complex64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("missing CSV column {name:?}")))
    };
    let (ire, iim) = (col("re_lambda")?, col("im_lambda")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            let field = rec.get(i).unwrap_or("");
            field
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number {field:?}")))
        };
        out.push(Complex64::new(parse(ire)?, parse(iim)?));
    }
    Ok(out)
}
