//! Flat `key = value` configuration. Layers, later wins: built-in
//! defaults, a saved manifest, a config file, command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gm_exterior::{parse_rational, BigRational, ExactExponentSet, Exponent, ExponentSet, SystemKind};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

pub const KEYS: [&str; 16] =
    ["N", "kind", "p", "q", "m", "s", "k", "lambda", "rho0", "r0", "R", "n", "tol", "max_iter", "damping", "window"];

pub const EXPONENT_KEYS: [&str; 5] = ["p", "q", "m", "s", "k"];

fn canonical(key: &str) -> Option<&'static str> {
    match key {
        "dim" => Some("N"),
        "max-iter" => Some("max_iter"),
        _ => KEYS.iter().copied().find(|k| *k == key),
    }
}

/// Raw key/value layer, validated only when resolved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer(BTreeMap<&'static str, String>);

impl Layer {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = canonical(key).ok_or_else(|| CliError::config(format!("unknown key `{key}`")))?;
        self.0.insert(key, value.into().trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    pub fn overlay(&mut self, other: &Layer) {
        for (k, v) in &other.0 {
            self.0.insert(k, v.clone());
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Layer, CliError> {
        let mut layer = Layer::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("{origin}:{}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            if layer.get(canonical(key).unwrap_or(key)).is_some() {
                return Err(CliError::config(format!("{origin}:{}: duplicate key `{key}`", no + 1)));
            }
            layer.set(key, value).map_err(|e| CliError::config(format!("{origin}:{}: {e}", no + 1)))?;
        }
        Ok(layer)
    }

    pub fn read(path: &Path) -> Result<Layer, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }
}

/// Fully resolved run configuration. Exponents keep their text so exact
/// classification sees what the user wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub dim: u32,
    pub kind: String,
    pub p: String,
    pub q: String,
    pub m: String,
    pub s: String,
    pub k: String,
    /// `auto` (half the box threshold) or a number.
    pub lambda: String,
    pub rho0: f64,
    pub r0: f64,
    #[serde(rename = "R")]
    pub r_outer: f64,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Fitting window; `None` means `[10 r0, R/10]`.
    pub window: Option<(f64, f64)>,
}

pub fn defaults() -> Layer {
    let mut layer = Layer::default();
    for (k, v) in [
        ("N", "3"),
        ("kind", "GM"),
        ("lambda", "auto"),
        ("rho0", "1"),
        ("r0", "1"),
        ("R", "1e8"),
        ("n", "4097"),
        ("tol", "1e-10"),
        ("max_iter", "500"),
        ("damping", "0.5"),
    ] {
        layer.set(k, v).expect("default keys are known");
    }
    layer
}

fn number<T: std::str::FromStr>(layer: &Layer, key: &str) -> Result<T, CliError> {
    let text = layer.required(key)?;
    text.parse().map_err(|_| CliError::config(format!("`{key}`: cannot parse `{text}`")))
}

fn positive(layer: &Layer, key: &str) -> Result<f64, CliError> {
    let x: f64 = number(layer, key)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::config(format!("`{key}` must be positive, got {x}")))
    }
}

pub fn rational(key: &str, text: &str) -> Result<BigRational, CliError> {
    parse_rational(text).ok_or_else(|| CliError::config(format!("`{key}`: `{text}` is not a number")))
}

pub fn parse_window(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::config(format!("window `{text}` is not `lo:hi` with 0 < lo < hi"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if lo > 0.0 && hi > lo && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

impl RunConfig {
    pub fn resolve(layer: &Layer) -> Result<Self, CliError> {
        let mut full = defaults();
        full.overlay(layer);
        let layer = &full;
        for key in EXPONENT_KEYS {
            rational(key, layer.required(key)?)?;
        }
        let kind = layer.required("kind")?.to_string();
        kind.parse::<SystemKind>().map_err(|e| CliError::config(e.to_string()))?;
        let lambda = layer.required("lambda")?.to_string();
        if lambda != "auto" {
            let l = rational("lambda", &lambda)?;
            if l < BigRational::from_int(0) {
                return Err(CliError::config(format!("lambda = {lambda} is negative")));
            }
        }
        let damping: f64 = number(layer, "damping")?;
        if !(damping > 0.0 && damping <= 1.0) {
            return Err(CliError::config(format!("damping {damping} is not in (0, 1]")));
        }
        let config = RunConfig {
            dim: number(layer, "N")?,
            kind,
            p: layer.required("p")?.into(),
            q: layer.required("q")?.into(),
            m: layer.required("m")?.into(),
            s: layer.required("s")?.into(),
            k: layer.required("k")?.into(),
            lambda,
            rho0: positive(layer, "rho0")?,
            r0: positive(layer, "r0")?,
            r_outer: positive(layer, "R")?,
            n: number(layer, "n")?,
            tol: positive(layer, "tol")?,
            max_iter: number(layer, "max_iter")?,
            damping,
            window: layer.get("window").map(parse_window).transpose()?,
        };
        config.exact()?;
        Ok(config)
    }

    /// Round-trips through [`RunConfig::resolve`].
    pub fn to_layer(&self) -> Layer {
        let mut layer = Layer::default();
        let mut put = |k: &str, v: String| layer.set(k, v).expect("known key");
        put("N", self.dim.to_string());
        put("kind", self.kind.clone());
        put("p", self.p.clone());
        put("q", self.q.clone());
        put("m", self.m.clone());
        put("s", self.s.clone());
        put("k", self.k.clone());
        put("lambda", self.lambda.clone());
        put("rho0", self.rho0.to_string());
        put("r0", self.r0.to_string());
        put("R", self.r_outer.to_string());
        put("n", self.n.to_string());
        put("tol", self.tol.to_string());
        put("max_iter", self.max_iter.to_string());
        put("damping", self.damping.to_string());
        if let Some((lo, hi)) = self.window {
            put("window", format!("{lo}:{hi}"));
        }
        layer
    }

    pub fn system_kind(&self) -> SystemKind {
        self.kind.parse().expect("kind validated on resolve")
    }

    /// Exact exponents; `λ = 0` when it is `auto`, which classification
    /// does not look at.
    pub fn exact(&self) -> Result<ExactExponentSet, CliError> {
        let lambda = match self.lambda.as_str() {
            "auto" => BigRational::from_int(0),
            text => rational("lambda", text)?,
        };
        ExponentSet::new(
            self.dim,
            rational("p", &self.p)?,
            rational("q", &self.q)?,
            rational("m", &self.m)?,
            rational("s", &self.s)?,
            rational("k", &self.k)?,
            lambda,
            self.system_kind(),
        )
        .map_err(|e| CliError::library(&e))
    }

    pub fn fixed_lambda(&self) -> Option<f64> {
        (self.lambda != "auto").then(|| parse_rational(&self.lambda).expect("validated").to_f64())
    }
}

/// Parameter flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// `key = value` file; flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Space dimension
    #[arg(long = "N", visible_alias = "dim", value_name = "N")]
    pub dim: Option<String>,
    /// GM, NEG_ACTIVATOR, NEG_BOTH or MIXED
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Source strength, or `auto` for half the box threshold
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Amplitude of the source `rho = rho0 r^-k`
    #[arg(long)]
    pub rho0: Option<String>,
    /// Inner radius
    #[arg(long)]
    pub r0: Option<String>,
    /// Truncation radius
    #[arg(long = "R", value_name = "R")]
    pub r_outer: Option<String>,
    /// Grid nodes
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// Picard damping in (0, 1]
    #[arg(long)]
    pub damping: Option<String>,
    /// Fitting window `lo:hi`
    #[arg(long)]
    pub window: Option<String>,
}

impl ParamArgs {
    /// Config file first, then flags.
    pub fn layer(&self) -> Result<Layer, CliError> {
        let mut layer = match &self.config {
            Some(path) => Layer::read(path)?,
            None => Layer::default(),
        };
        let flags = [
            ("N", &self.dim),
            ("kind", &self.kind),
            ("p", &self.p),
            ("q", &self.q),
            ("m", &self.m),
            ("s", &self.s),
            ("k", &self.k),
            ("lambda", &self.lambda),
            ("rho0", &self.rho0),
            ("r0", &self.r0),
            ("R", &self.r_outer),
            ("n", &self.n),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("damping", &self.damping),
            ("window", &self.window),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                layer.set(key, v.as_str())?;
            }
        }
        Ok(layer)
    }
}
