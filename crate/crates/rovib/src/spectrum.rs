//! Frequency-ordered spectra: (frequency, signal, optional uncertainty)
//! samples with unit metadata, CSV round-tripping and reproducible synthetic
//! noise.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Ordered spectrum samples. `meta` is echoed into the CSV `#` header.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub nu: Vec<f64>,
    pub signal: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    /// Unit of the frequency axis (e.g. "MHz", "cm-1"); appears in the
    /// frequency column header.
    pub freq_unit: String,
    pub meta: BTreeMap<String, String>,
}

impl Spectrum {
    pub fn new(nu: Vec<f64>, signal: Vec<f64>, freq_unit: &str) -> Result<Self> {
        if nu.len() != signal.len() {
            return Err(Error::invalid("spectrum: frequency/signal length mismatch"));
        }
        if nu.len() < 2 {
            return Err(Error::invalid("spectrum needs at least 2 samples"));
        }
        if nu.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("spectrum frequencies must be strictly increasing"));
        }
        Ok(Spectrum {
            nu,
            signal,
            sigma: None,
            freq_unit: freq_unit.to_string(),
            meta: BTreeMap::new(),
        })
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.nu.len() {
            return Err(Error::invalid("spectrum: sigma length mismatch"));
        }
        self.sigma = Some(sigma);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nu[0], *self.nu.last().unwrap())
    }

    /// Copy with zero-mean Gaussian noise of absolute width `sigma` added to
    /// the signal. Deterministic in `seed`; both are recorded in `meta` and
    /// the per-point uncertainty column is set to `sigma`.
    pub fn add_gaussian_noise(&self, sigma: f64, seed: u64) -> Spectrum {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
        let mut out = self.clone();
        for s in out.signal.iter_mut() {
            *s += normal.sample(&mut rng);
        }
        out.sigma = Some(vec![sigma; out.nu.len()]);
        out.meta.insert("noise_sigma".to_string(), format!("{sigma}"));
        out.meta.insert("noise_seed".to_string(), format!("{seed}"));
        out
    }

    /// Write as CSV: `# key: value` metadata lines, then a header naming the
    /// frequency unit, then the samples.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# freq_unit: {}", self.freq_unit)?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        let head = format!("nu_{}", self.freq_unit);
        match &self.sigma {
            Some(_) => writeln!(w, "{head},signal,sigma")?,
            None => writeln!(w, "{head},signal")?,
        }
        for i in 0..self.nu.len() {
            match &self.sigma {
                Some(s) => writeln!(w, "{},{},{}", self.nu[i], self.signal[i], s[i])?,
                None => writeln!(w, "{},{}", self.nu[i], self.signal[i])?,
            }
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Spectrum> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::read_csv_str(&path.display().to_string(), &text)
    }

    pub fn read_csv_str(path: &str, text: &str) -> Result<Spectrum> {
        let err = |line: usize, message: String| Error::FileFormat {
            path: path.to_string(),
            line,
            message,
        };
        let mut meta = BTreeMap::new();
        let mut freq_unit = String::new();
        let mut nu = Vec::new();
        let mut signal = Vec::new();
        let mut sigma: Vec<f64> = Vec::new();
        let mut saw_header = false;
        let mut has_sigma = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    let (k, v) = (k.trim().to_string(), v.trim().to_string());
                    if k == "freq_unit" {
                        freq_unit = v;
                    } else {
                        meta.insert(k, v);
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if !saw_header {
                if !(cols.len() == 2 || cols.len() == 3) || !cols[0].starts_with("nu_") {
                    return Err(err(
                        lineno,
                        format!("expected header `nu_<unit>,signal[,sigma]`, got `{line}`"),
                    ));
                }
                if freq_unit.is_empty() {
                    freq_unit = cols[0][3..].to_string();
                }
                has_sigma = cols.len() == 3;
                saw_header = true;
                continue;
            }
            let want = if has_sigma { 3 } else { 2 };
            if cols.len() != want {
                return Err(err(lineno, format!("expected {want} columns, got {}", cols.len())));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(lineno, format!("bad number `{s}`")))
            };
            nu.push(parse(cols[0])?);
            signal.push(parse(cols[1])?);
            if has_sigma {
                sigma.push(parse(cols[2])?);
            }
        }
        if nu.is_empty() {
            return Err(err(0, "no data rows".to_string()));
        }
        let mut spec = Spectrum::new(nu, signal, &freq_unit)?;
        if has_sigma {
            spec = spec.with_sigma(sigma)?;
        }
        spec.meta = meta;
        Ok(spec)
    }
}
