//! The TOML run configuration.
//!
//! ```toml
//! [system]
//! kind = "constant"            # constant | fourier | tabulated | ellipsoid
//! period = 2.0                 # brake period; or `base_length` for half of it
//! matrix = [[1.5708, 0.0], [0.0, 1.5708]]
//!
//! [scheme]
//! m_max = 120
//! ```
//!
//! Matrices are row-major, either as a list of rows or as one flat list.
//! Several systems for `jump` go in `[[systems]]` tables instead.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use maslov_lab::brake::EllipsoidModel;
use maslov_lab::coefficient::{CoefficientPath, FourierTerm};
use maslov_lab::index::galerkin::{DPolicy, TruncationScheme};
use maslov_lab::symplectic::Mat;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixSpec {
    pub fn to_mat(&self) -> Result<Mat> {
        match self {
            MatrixSpec::Rows(rows) => {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    bail!("matrix rows must form a non-empty square");
                }
                Ok(Mat::from_fn(d, d, |i, j| rows[i][j]))
            }
            MatrixSpec::Flat(v) => {
                let d = (v.len() as f64).sqrt().round() as usize;
                if d == 0 || d * d != v.len() {
                    bail!("flat matrix has {} entries, not a square number", v.len());
                }
                Ok(Mat::from_row_slice(d, d, v))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub frequency: f64,
    pub cos: Option<MatrixSpec>,
    pub sin: Option<MatrixSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Constant {
        period: Option<f64>,
        base_length: Option<f64>,
        matrix: MatrixSpec,
    },
    Fourier {
        period: Option<f64>,
        base_length: Option<f64>,
        constant: MatrixSpec,
        #[serde(default)]
        terms: Vec<TermSpec>,
    },
    Tabulated {
        period: Option<f64>,
        base_length: Option<f64>,
        times: Vec<f64>,
        values: Vec<MatrixSpec>,
    },
    Ellipsoid {
        radii: Vec<f64>,
    },
}

fn half_length(period: Option<f64>, base_length: Option<f64>) -> Result<f64> {
    let l = match (period, base_length) {
        (Some(_), Some(_)) => bail!("give either `period` or `base_length`, not both"),
        (Some(p), None) => 0.5 * p,
        (None, Some(l)) => l,
        (None, None) => bail!("the system needs a `period` or a `base_length`"),
    };
    if !(l.is_finite() && l > 0.0) {
        bail!("period must be positive");
    }
    Ok(l)
}

impl SystemSpec {
    pub fn ellipsoid(&self) -> Result<EllipsoidModel> {
        match self {
            SystemSpec::Ellipsoid { radii } => Ok(EllipsoidModel::new(radii.clone())?),
            _ => bail!("this command needs an ellipsoid system"),
        }
    }

    /// The coefficient path, certified brake symmetric.
    pub fn coefficient(&self) -> Result<Arc<CoefficientPath>> {
        let mut c = match self {
            SystemSpec::Constant { period, base_length, matrix } => {
                CoefficientPath::constant(matrix.to_mat()?, half_length(*period, *base_length)?)?
            }
            SystemSpec::Fourier { period, base_length, constant, terms } => {
                let c0 = constant.to_mat()?;
                let d = c0.nrows();
                let zero = || Mat::zeros(d, d);
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(FourierTerm {
                            frequency: t.frequency,
                            cos: t.cos.as_ref().map(MatrixSpec::to_mat).transpose()?.unwrap_or_else(zero),
                            sin: t.sin.as_ref().map(MatrixSpec::to_mat).transpose()?.unwrap_or_else(zero),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                CoefficientPath::fourier(c0, terms, half_length(*period, *base_length)?)?
            }
            SystemSpec::Tabulated { period, base_length, times, values } => {
                let values = values.iter().map(MatrixSpec::to_mat).collect::<Result<Vec<_>>>()?;
                CoefficientPath::tabulated(times.clone(), values, half_length(*period, *base_length)?)?
            }
            SystemSpec::Ellipsoid { .. } => bail!("ellipsoids have one coefficient per orbit; use the `ellipsoid` command"),
        };
        c.validate_brake_symmetry().context("coefficient is not brake symmetric")?;
        Ok(Arc::new(c))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub m_start: Option<usize>,
    pub m_step: Option<usize>,
    pub m_max: Option<usize>,
    pub window: Option<usize>,
    /// Fixed d-window; automatic when absent.
    pub d: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub systems: Vec<SystemSpec>,
    #[serde(default)]
    pub scheme: SchemeSpec,
    /// Largest iterate for `iterate` and `bott-check`.
    pub k_max: Option<usize>,
    /// Largest `R` searched by `jump`.
    pub r_max: Option<i64>,
    /// Largest iterate tabulated by `ellipsoid`.
    pub m_max_orbits: Option<usize>,
    /// Number of sample angles in the periodic ω-scan of `indices`.
    pub scan_points: Option<usize>,
    /// Corpus size for `selftest`.
    pub corpus_size: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.system.is_some() && !self.systems.is_empty() {
            bail!("give either [system] or [[systems]], not both");
        }
        if let Some(d) = self.scheme.d {
            if !(d.is_finite() && d > 0.0) {
                bail!("scheme.d must be positive");
            }
        }
        for (name, v) in [("m_max", self.scheme.m_max), ("window", self.scheme.window), ("m_step", self.scheme.m_step)] {
            if v == Some(0) {
                bail!("scheme.{name} must be positive");
            }
        }
        if self.k_max == Some(0) || self.m_max_orbits == Some(0) || self.scan_points == Some(0) {
            bail!("iteration bounds must be positive");
        }
        Ok(())
    }

    /// The single system, or the first of `[[systems]]`.
    pub fn single(&self) -> Result<&SystemSpec> {
        match (&self.system, self.systems.as_slice()) {
            (Some(s), _) => Ok(s),
            (None, [s]) => Ok(s),
            (None, []) => bail!("the config has no [system]"),
            (None, _) => bail!("this command takes one system, the config has {}", self.systems.len()),
        }
    }

    pub fn all_systems(&self) -> Vec<&SystemSpec> {
        match &self.system {
            Some(s) => vec![s],
            None => self.systems.iter().collect(),
        }
    }

    pub fn scheme(&self, m_max_flag: Option<usize>) -> TruncationScheme {
        let mut s = TruncationScheme::default();
        s.m_start = self.scheme.m_start;
        if let Some(v) = self.scheme.m_step {
            s.m_step = v;
        }
        if let Some(v) = m_max_flag.or(self.scheme.m_max) {
            s.m_max = v;
        }
        if let Some(v) = self.scheme.window {
            s.window = v;
        }
        if let Some(d) = self.scheme.d {
            s.d = DPolicy::Fixed(d);
        }
        s
    }
}
