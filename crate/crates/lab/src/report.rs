//! Shared pieces of the JSON/CSV reports: slope fits, rank correlation and
//! an output directory that removes its files when a command fails.

use std::path::{Path, PathBuf};

use harmap_core::constructions::fit_line;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LabError, LabResult};

/// Carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// A least-squares slope with a 95% confidence interval from the residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub intercept: f64,
    /// `None` with fewer than three points.
    pub stderr: Option<f64>,
    pub ci95: Option<[f64; 2]>,
    pub points: usize,
}

/// Fits `ln y = slope·ln x + c` over the pairs with `x, y > 0`; `None`
/// with fewer than two usable pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<Slope> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let n = lx.len();
    if n < 2 || lx.iter().all(|v| *v == lx[0]) {
        return None;
    }
    let (value, intercept, se) = fit_line(&lx, &ly);
    let (stderr, ci95) = if n > 2 && se.is_finite() {
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        (Some(se), Some([value - t * se, value + t * se]))
    } else {
        (None, None)
    };
    Some(Slope {
        value,
        intercept,
        stderr,
        ci95,
        points: n,
    })
}

/// Ranks starting at 1, ties sharing their mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; `None` for fewer than two points or a
/// constant sample.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let m = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - m) * (b - m);
        sxx += (a - m) * (a - m);
        syy += (b - m) * (b - m);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassCount {
    pub passed: usize,
    pub total: usize,
}

impl PassCount {
    pub fn of(flags: impl IntoIterator<Item = bool>) -> Self {
        let mut c = PassCount { passed: 0, total: 0 };
        for f in flags {
            c.total += 1;
            c.passed += f as usize;
        }
        c
    }

    pub fn all(&self) -> bool {
        self.passed == self.total
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes records with a fixed header; `None` cells stay empty.
pub fn to_csv(header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Output directory for one command. Files are written only after all
/// computation is done; [`Outputs::discard`] removes whatever was written.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> LabResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> LabResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| LabError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn discard(self) {
        for p in self.written {
            let _ = std::fs::remove_file(p);
        }
    }

    /// Writes all files, removing the earlier ones if a later write fails.
    pub fn write_all(mut self, files: &[(&str, String)]) -> LabResult<Vec<PathBuf>> {
        for (name, contents) in files {
            if let Err(e) = self.write(name, contents) {
                self.discard();
                return Err(e);
            }
        }
        Ok(self.written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        let s = log_log_slope(&x, &y).unwrap();
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!(s.stderr.unwrap() < 1e-10);
        let ci = s.ci95.unwrap();
        assert!(ci[0] <= s.value && s.value <= ci[1]);
        assert!(log_log_slope(&[1.0], &[2.0]).is_none());
        let two = log_log_slope(&[1.0, 2.0, 0.0], &[1.0, 4.0, 5.0]).unwrap();
        assert_eq!(two.points, 2);
        assert!(two.ci95.is_none());
    }

    #[test]
    fn ci_widens_with_noise() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y = [1.0, 2.2, 3.7, 8.5, 15.0];
        let s = log_log_slope(&x, &y).unwrap();
        let ci = s.ci95.unwrap();
        // t(0.975, 3 dof) = 3.182.
        let half = 3.182_446_305_284_263 * s.stderr.unwrap();
        assert!((ci[1] - s.value - half).abs() < 1e-9);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[2.0, 3.0]), None);
        // Ties get mean ranks: ranks (1.5, 1.5, 3) against (1, 2, 3).
        let r = spearman(&[5.0, 5.0, 7.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let s = to_csv(&["a", "b"], &[vec![Some(0.5), None]]);
        assert_eq!(s, "a,b\n0.5,\n");
    }

    #[test]
    fn outputs_discard_removes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::new(dir.path()).unwrap();
        let p = o.write("x.txt", "1").unwrap();
        assert!(p.exists());
        o.discard();
        assert!(!p.exists());
    }
}
