//! Flat `key = value` run configuration.
//!
//! ```text
//! # fractional order and nonlocal strength
//! alpha = 0.5
//! lambda = 0.5
//! T = 1.0
//! K = 64
//! N = 24
//! conductivity = shifted_sine
//! u0 = sinpi
//! source = none
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlocal::Conductivity;
use crate::spectral::SpatialFunction;
use crate::stepper::{
    HistoryForm, InitialState, Linearization, PicardOptions, ProblemConfig, SourceTerm,
};
use crate::time_fractional::{FractionalOrder, TimeGrid};
use crate::verify::{StudySetup, TimeProfile};

const KNOWN_KEYS: [&str; 16] = [
    "alpha",
    "lambda",
    "T",
    "K",
    "N",
    "conductivity",
    "u0",
    "source",
    "picard_tol",
    "picard_max_iter",
    "nonlocal_alpha0_factor",
    "linearization",
    "history_form",
    "quadrature_points",
    "hypothesis_range",
    "hypothesis_samples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialPreset {
    /// `sin(πx)`
    SinPi,
    /// `φ_0 = L_0 - L_2`
    Phi0,
    /// `(1 - x²)²`
    Bump,
    /// `w(0) φ` of the manufactured solution
    Exact,
}

impl FromStr for InitialPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinpi" => Ok(Self::SinPi),
            "phi0" => Ok(Self::Phi0),
            "bump" => Ok(Self::Bump),
            "exact" => Ok(Self::Exact),
            other => Err(Error::Config(format!(
                "u0: unknown preset '{other}' (sinpi | phi0 | bump | exact)"
            ))),
        }
    }
}

impl fmt::Display for InitialPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SinPi => "sinpi",
            Self::Phi0 => "phi0",
            Self::Bump => "bump",
            Self::Exact => "exact",
        })
    }
}

/// Manufactured solutions `w(t) sin(πx)` selectable as forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourcePreset {
    None,
    /// `t² sin(πx)`
    MmsT2,
    /// `t³ sin(πx)`
    MmsT3,
    /// `(1 + t) sin(πx)`; the L1 operator is exact in time for it
    Mms1pT,
    /// `(1 + t²) sin(πx)`
    Mms1pT2,
}

impl SourcePreset {
    pub fn time_profile(self) -> Option<TimeProfile> {
        match self {
            Self::None => None,
            Self::MmsT2 => Some(TimeProfile::t_squared()),
            Self::MmsT3 => Some(TimeProfile::t_cubed()),
            Self::Mms1pT => Some(TimeProfile::one_plus_t()),
            Self::Mms1pT2 => Some(TimeProfile::one_plus_t_squared()),
        }
    }
}

impl FromStr for SourcePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "mms_t2_sinpi" => Ok(Self::MmsT2),
            "mms_t3_sinpi" => Ok(Self::MmsT3),
            "mms_1pt_sinpi" => Ok(Self::Mms1pT),
            "mms_1pt2_sinpi" => Ok(Self::Mms1pT2),
            other => Err(Error::Config(format!(
                "source: unknown preset '{other}' (none | mms_t2_sinpi | mms_t3_sinpi | mms_1pt_sinpi | mms_1pt2_sinpi)"
            ))),
        }
    }
}

impl fmt::Display for SourcePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::MmsT2 => "mms_t2_sinpi",
            Self::MmsT3 => "mms_t3_sinpi",
            Self::Mms1pT => "mms_1pt_sinpi",
            Self::Mms1pT2 => "mms_1pt2_sinpi",
        })
    }
}

/// A parsed configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(rename = "K")]
    pub steps: usize,
    #[serde(rename = "N")]
    pub degree: usize,
    pub conductivity: String,
    pub u0: String,
    pub source: String,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub nonlocal_alpha0_factor: bool,
    pub linearization: String,
    pub history_form: String,
    pub quadrature_points: usize,
    pub hypothesis_range: f64,
    pub hypothesis_samples: usize,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{raw}'")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true/false, got '{raw}'"
        ))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if value.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: key '{key}' has no value",
                    lineno + 1
                )));
            }
            if map
                .insert(key.to_string(), (lineno + 1, value.to_string()))
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }

        let required = |key: &str| -> Result<&str> {
            map.get(key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
        };
        let optional = |key: &str| map.get(key).map(|(_, v)| v.as_str());

        let degree: usize = parse_value("N", required("N")?)?;
        let cfg = Self {
            alpha: parse_value("alpha", required("alpha")?)?,
            lambda: parse_value("lambda", required("lambda")?)?,
            final_time: parse_value("T", required("T")?)?,
            steps: parse_value("K", required("K")?)?,
            degree,
            conductivity: required("conductivity")?.to_string(),
            u0: required("u0")?.to_string(),
            source: optional("source").unwrap_or("none").to_string(),
            picard_tol: optional("picard_tol")
                .map(|v| parse_value("picard_tol", v))
                .transpose()?
                .unwrap_or(1e-12),
            picard_max_iter: optional("picard_max_iter")
                .map(|v| parse_value("picard_max_iter", v))
                .transpose()?
                .unwrap_or(50),
            nonlocal_alpha0_factor: optional("nonlocal_alpha0_factor")
                .map(|v| parse_bool("nonlocal_alpha0_factor", v))
                .transpose()?
                .unwrap_or(true),
            linearization: optional("linearization").unwrap_or("picard").to_string(),
            history_form: optional("history_form").unwrap_or("convex").to_string(),
            quadrature_points: optional("quadrature_points")
                .map(|v| parse_value("quadrature_points", v))
                .transpose()?
                .unwrap_or(crate::spectral::default_quadrature_points(degree)),
            hypothesis_range: optional("hypothesis_range")
                .map(|v| parse_value("hypothesis_range", v))
                .transpose()?
                .unwrap_or(10.0),
            hypothesis_samples: optional("hypothesis_samples")
                .map(|v| parse_value("hypothesis_samples", v))
                .transpose()?
                .unwrap_or(2001),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let finite = [
            ("alpha", self.alpha),
            ("lambda", self.lambda),
            ("T", self.final_time),
            ("picard_tol", self.picard_tol),
            ("hypothesis_range", self.hypothesis_range),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{key}: value must be finite")));
            }
        }
        FractionalOrder::new(self.alpha).map_err(|e| Error::Config(format!("alpha: {e}")))?;
        TimeGrid::new(self.final_time, self.steps)
            .map_err(|e| Error::Config(format!("T/K: {e}")))?;
        if self.degree < 2 {
            return Err(Error::Config("N: must be >= 2".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("lambda: must be >= 0".into()));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Config("picard_tol: must be positive".into()));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::Config("picard_max_iter: must be >= 1".into()));
        }
        if !(self.hypothesis_range > 0.0) || self.hypothesis_samples < 2 {
            return Err(Error::Config(
                "hypothesis_range must be positive and hypothesis_samples >= 2".into(),
            ));
        }
        Conductivity::by_name(&self.conductivity)?;
        let u0: InitialPreset = self.u0.parse()?;
        let source: SourcePreset = self.source.parse()?;
        if u0 == InitialPreset::Exact && source == SourcePreset::None {
            return Err(Error::Config(
                "u0: 'exact' requires a manufactured source".into(),
            ));
        }
        self.linearization()?;
        self.history_form()?;
        if self.quadrature_points < self.degree + 2 {
            return Err(Error::Config(format!(
                "quadrature_points: need at least N + 2 = {}",
                self.degree + 2
            )));
        }
        Ok(())
    }

    pub fn linearization(&self) -> Result<Linearization> {
        match self.linearization.as_str() {
            "picard" => Ok(Linearization::Picard),
            "lagged" => Ok(Linearization::Lagged),
            other => Err(Error::Config(format!(
                "linearization: unknown value '{other}' (picard | lagged)"
            ))),
        }
    }

    pub fn history_form(&self) -> Result<HistoryForm> {
        match self.history_form.as_str() {
            "convex" => Ok(HistoryForm::Convex),
            "difference" => Ok(HistoryForm::Difference),
            other => Err(Error::Config(format!(
                "history_form: unknown value '{other}' (convex | difference)"
            ))),
        }
    }

    pub fn order(&self) -> FractionalOrder {
        FractionalOrder::new(self.alpha).expect("checked at parse time")
    }

    pub fn conductivity(&self) -> Conductivity {
        Conductivity::by_name(&self.conductivity).expect("checked at parse time")
    }

    pub fn source_preset(&self) -> SourcePreset {
        self.source.parse().expect("checked at parse time")
    }

    pub fn initial_preset(&self) -> InitialPreset {
        self.u0.parse().expect("checked at parse time")
    }

    /// Study description when the source is a manufactured solution.
    pub fn study_setup(&self) -> Result<StudySetup> {
        let time = self.source_preset().time_profile().ok_or_else(|| {
            Error::Config("convergence studies need a manufactured source (source = mms_*)".into())
        })?;
        let mut setup = StudySetup::new(
            self.order(),
            self.lambda,
            self.conductivity(),
            time,
            SpatialFunction::sin_pi(),
        );
        setup.final_time = self.final_time;
        setup.steps = self.steps;
        setup.degree = self.degree;
        setup.picard = PicardOptions {
            tol: self.picard_tol,
            max_iter: self.picard_max_iter,
        };
        setup.nonlocal_alpha0_factor = self.nonlocal_alpha0_factor;
        setup.linearization = self.linearization()?;
        setup.history_form = self.history_form()?;
        Ok(setup)
    }

    /// The solver configuration this file describes.
    pub fn problem(&self) -> Result<ProblemConfig> {
        let source = self.source_preset();
        let mms = match source.time_profile() {
            Some(time) => Some(crate::verify::manufactured_source(
                self.order(),
                self.lambda,
                self.conductivity(),
                time,
                SpatialFunction::sin_pi(),
            )?),
            None => None,
        };
        let initial = match self.initial_preset() {
            InitialPreset::SinPi => SpatialFunction::sin_pi(),
            InitialPreset::Phi0 => SpatialFunction::basis(0),
            InitialPreset::Bump => SpatialFunction::bump(),
            InitialPreset::Exact => mms
                .as_ref()
                .expect("exact u0 requires a source, checked at parse time")
                .exact(0.0),
        };
        let mut cfg = ProblemConfig::new(
            self.order(),
            self.lambda,
            TimeGrid::new(self.final_time, self.steps)?,
            self.degree,
            self.conductivity(),
            InitialState::Function(initial),
        );
        if let Some(m) = mms {
            cfg = cfg.with_source(Arc::new(m) as Arc<dyn SourceTerm>);
        }
        cfg.picard = PicardOptions {
            tol: self.picard_tol,
            max_iter: self.picard_max_iter,
        };
        cfg.nonlocal_alpha0_factor = self.nonlocal_alpha0_factor;
        cfg.linearization = self.linearization()?;
        cfg.history_form = self.history_form()?;
        cfg.quadrature_points = Some(self.quadrature_points);
        Ok(cfg)
    }

    /// Canonical `key = value` text; parses back to an equal config.
    pub fn to_text(&self) -> String {
        format!(
            "alpha = {:?}\nlambda = {:?}\nT = {:?}\nK = {}\nN = {}\nconductivity = {}\nu0 = {}\nsource = {}\npicard_tol = {:?}\npicard_max_iter = {}\nnonlocal_alpha0_factor = {}\nlinearization = {}\nhistory_form = {}\nquadrature_points = {}\nhypothesis_range = {:?}\nhypothesis_samples = {}\n",
            self.alpha,
            self.lambda,
            self.final_time,
            self.steps,
            self.degree,
            self.conductivity,
            self.u0,
            self.source,
            self.picard_tol,
            self.picard_max_iter,
            self.nonlocal_alpha0_factor,
            self.linearization,
            self.history_form,
            self.quadrature_points,
            self.hypothesis_range,
            self.hypothesis_samples,
        )
    }
}
