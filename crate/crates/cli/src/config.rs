//! JSON run configuration (schema `lieflow/1`) and its translation into
//! library types.
//!
//! Configs are validated strictly: the `schema` key must match, unknown
//! keys are rejected, and structural problems (missing fields, wrong
//! lengths, malformed JSON) are reported with serde's line/column
//! diagnostics and exit code 2. Numeric admissibility (nonnegative killing
//! rate, positive-semidefinite diffusion, chart radii, …) is delegated to
//! the library and reported with the module error name and exit code 1.

use lieflow::error::LieflowError;
use lieflow::fourier::{
    forward_ft_real, random_real_bandlimited, required_resolution, FourierCoefficients,
};
use lieflow::generator::{CharField, Characteristics, LevyAtom, LevyMeasure, SmallJumpDensity};
use lieflow::group::{AlgebraVector, Chart, GroupElement, GroupId};
use lieflow::linalg::CMat;
use lieflow::rep::{rep_matrix, Irrep, Weight};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA: &str = "lieflow/1";

/// CLI failure modes. `Config` maps to exit code 2 (validation), the rest
/// to exit code 1 (computation / environment).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("error[{name}]: {source}", name = error_name(source))]
    Compute {
        #[from]
        source: LieflowError,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Stable module error name used in diagnostics.
pub fn error_name(e: &LieflowError) -> &'static str {
    use LieflowError::*;
    match e {
        GroupMismatch { .. } => "GroupMismatch",
        OutOfChart { .. } => "OutOfChart",
        NonFinite => "NonFinite",
        InvalidChart { .. } => "InvalidChart",
        AtomAtIdentity { .. } => "AtomAtIdentity",
        InfiniteJumpMass => "InfiniteJumpMass",
        InvalidDensity { .. } => "InvalidDensity",
        NonConstantCharacteristics { .. } => "NonConstantCharacteristics",
        InvalidCharacteristics { .. } => "InvalidCharacteristics",
        NegativeTime { .. } => "NegativeTime",
        MissingWeight { .. } => "MissingWeight",
        ResolutionTooLow { .. } => "ResolutionTooLow",
        SeparationViolated { .. } => "SeparationViolated",
        InvalidTestFunction { .. } => "InvalidTestFunction",
        PointNotOnGrid => "PointNotOnGrid",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Torus { dim: usize },
    Su2,
}

impl GroupSpec {
    pub fn id(&self) -> GroupId {
        match self {
            GroupSpec::Torus { dim } => GroupId::Torus { dim: *dim },
            GroupSpec::Su2 => GroupId::Su2,
        }
    }

    pub fn of(group: GroupId) -> Self {
        match group {
            GroupId::Torus { dim } => GroupSpec::Torus { dim },
            GroupId::Su2 => GroupSpec::Su2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    /// Jump target in exponential coordinates.
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub intensity: f64,
    pub power: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

fn default_modulation() -> f64 {
    1.0
}

/// Constant characteristics block. Variable (σ-dependent) coefficient
/// fields are a library-level feature; the CLI drives constant operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicsSpec {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_modulation")]
    pub modulation: f64,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
}

/// One stored coefficient matrix (split into real and imaginary parts so
/// the JSON stays plain).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEntry {
    pub weight: Vec<i64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Round-trippable coefficient JSON: produced by `evolve`, accepted back
/// as an inline function spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffJson {
    pub group: GroupSpec,
    pub max_norm: f64,
    pub entries: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedFunction {
    /// Builtin name: one, cos_theta, sin_theta, triangle, exp_cos,
    /// matrix_coeff (with weight/row/col), random (with seed/decay_power).
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFunction {
    pub coefficients: CoeffJson,
}

/// A test-function spec: either a named builtin or inline coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(NamedFunction),
    Inline(InlineFunction),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub group: GroupSpec,
    pub max_weight_norm: f64,
    #[serde(default)]
    pub chart_radius: Option<f64>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub characteristics: Option<CharacteristicsSpec>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
}

/// Parse and validate a config file. Returns the typed config together
/// with the raw JSON value (hashed into every artifact header).
pub fn load_config(path: &Path) -> Result<(RunConfig, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if config.schema != SCHEMA {
        return Err(CliError::Config(format!(
            "unsupported schema {:?} (field `schema`), expected {SCHEMA:?}",
            config.schema
        )));
    }
    if let GroupSpec::Torus { dim } = config.group {
        if !(1..=3).contains(&dim) {
            return Err(CliError::Config(format!(
                "field `group.dim`: torus dimension {dim} outside supported range 1..=3"
            )));
        }
    }
    if !(config.max_weight_norm >= 0.0) {
        return Err(CliError::Config(
            "field `max_weight_norm` must be nonnegative".to_string(),
        ));
    }
    let value: serde_json::Value = serde_json::from_str(&text).expect("parsed above");
    Ok((config, value))
}

impl RunConfig {
    pub fn group_id(&self) -> GroupId {
        self.group.id()
    }

    pub fn chart(&self) -> Result<Chart, CliError> {
        match self.chart_radius {
            Some(r) => Ok(Chart::new(r)?),
            None => Ok(Chart::default_for(self.group_id())),
        }
    }

    /// Transform resolution: explicit, or the exactness threshold for
    /// `max_weight_norm`.
    pub fn transform_resolution(&self) -> usize {
        self.resolution
            .unwrap_or_else(|| required_resolution(self.group_id(), self.max_weight_norm))
    }

    /// Seed precedence: explicit flag, then LIEFLOW_SEED, then config.
    pub fn effective_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Ok(v) = std::env::var("LIEFLOW_SEED") {
            return v.parse::<u64>().map_err(|_| {
                CliError::Config(format!("LIEFLOW_SEED must be an unsigned integer, got {v:?}"))
            });
        }
        Ok(self.seed.unwrap_or(0))
    }

    /// Build the configured operator characteristics. `validated` runs the
    /// admissibility check; pass false to drive deliberately inadmissible
    /// operators through the PMP verifier.
    pub fn characteristics(&self, validated: bool) -> Result<Characteristics, CliError> {
        let spec = self.characteristics.as_ref().ok_or_else(|| {
            CliError::Config("missing `characteristics` block for this subcommand".to_string())
        })?;
        let group = self.group_id();
        let dim = group.algebra_dim();
        let b = spec.b.clone().unwrap_or_else(|| vec![0.0; dim]);
        if b.len() != dim {
            return Err(CliError::Config(format!(
                "field `characteristics.b`: expected {dim} entries, got {}",
                b.len()
            )));
        }
        let a = spec.a.clone().unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
        if a.len() != dim || a.iter().any(|row| row.len() != dim) {
            return Err(CliError::Config(format!(
                "field `characteristics.a`: expected a {dim}x{dim} matrix"
            )));
        }
        let mut atoms = Vec::with_capacity(spec.atoms.len());
        for (i, atom) in spec.atoms.iter().enumerate() {
            if atom.point.len() != dim {
                return Err(CliError::Config(format!(
                    "field `characteristics.atoms[{i}].point`: expected {dim} coordinates, got {}",
                    atom.point.len()
                )));
            }
            let v = AlgebraVector::new(group, atom.point.clone())?;
            atoms.push(LevyAtom {
                point: GroupElement::exp(&v),
                weight: atom.weight,
            });
        }
        let density = spec.density.as_ref().map(|d| {
            SmallJumpDensity::new(d.intensity, d.power, d.inner_radius, d.outer_radius)
        });
        let mut chars = Characteristics::constant(
            group,
            spec.c,
            b,
            a,
            LevyMeasure { atoms, density },
        );
        chars.chart = self.chart()?;
        chars.modulation = CharField::Const(spec.modulation);
        if validated {
            chars.validate()?;
        }
        Ok(chars)
    }

    /// Materialize one function spec as Fourier coefficients.
    pub fn build_function(&self, spec: &FunctionSpec, seed: u64) -> Result<FourierCoefficients, CliError> {
        let group = self.group_id();
        match spec {
            FunctionSpec::Inline(inline) => {
                let c = &inline.coefficients;
                if c.group.id() != group {
                    return Err(CliError::Config(format!(
                        "inline coefficients are for {}, config group is {}",
                        c.group.id(),
                        group
                    )));
                }
                if c.max_norm > self.max_weight_norm + 1e-12 {
                    return Err(CliError::Config(format!(
                        "inline coefficients declare max_norm {} above the config max_weight_norm {}",
                        c.max_norm, self.max_weight_norm
                    )));
                }
                let mut f = FourierCoefficients::zero(group, c.max_norm);
                for entry in &c.entries {
                    let w = Weight::new(entry.weight.clone());
                    if w.norm() > c.max_norm + 1e-12 {
                        return Err(CliError::Config(format!(
                            "coefficient weight {w} exceeds max_norm {}",
                            c.max_norm
                        )));
                    }
                    let ir = Irrep::new(group, w.clone())?;
                    let d = ir.dim();
                    if entry.re.len() != d
                        || entry.im.len() != d
                        || entry.re.iter().any(|r| r.len() != d)
                        || entry.im.iter().any(|r| r.len() != d)
                    {
                        return Err(CliError::Config(format!(
                            "coefficient matrix for weight {w} must be {d}x{d}"
                        )));
                    }
                    let mut m = CMat::zeros(d, d);
                    for r in 0..d {
                        for s in 0..d {
                            m[(r, s)] = Complex64::new(entry.re[r][s], entry.im[r][s]);
                        }
                    }
                    f.insert(w, m);
                }
                Ok(f)
            }
            FunctionSpec::Named(named) => self.build_named(named, seed),
        }
    }

    fn build_named(&self, named: &NamedFunction, seed: u64) -> Result<FourierCoefficients, CliError> {
        let group = self.group_id();
        let torus_only = |name: &str| {
            CliError::Config(format!("function `{name}` is only defined on torus groups"))
        };
        match named.name.as_str() {
            "one" => Ok(FourierCoefficients::constant(group, 1.0)),
            "cos_theta" => match group {
                GroupId::Torus { .. } => Ok(forward_ft_real(
                    |g: &GroupElement| g.angles()[0].cos(),
                    group,
                    1.0,
                    5,
                )),
                GroupId::Su2 => Err(torus_only("cos_theta")),
            },
            "sin_theta" => match group {
                GroupId::Torus { .. } => Ok(forward_ft_real(
                    |g: &GroupElement| g.angles()[0].sin(),
                    group,
                    1.0,
                    5,
                )),
                GroupId::Su2 => Err(torus_only("sin_theta")),
            },
            "triangle" => match group {
                GroupId::Torus { dim: 1 } => Ok(forward_ft_real(
                    |g: &GroupElement| {
                        let t = g.angles()[0];
                        if t <= std::f64::consts::PI {
                            t
                        } else {
                            2.0 * std::f64::consts::PI - t
                        }
                    },
                    group,
                    self.max_weight_norm,
                    self.transform_resolution(),
                )),
                _ => Err(CliError::Config(
                    "function `triangle` is only defined on the 1-torus".to_string(),
                )),
            },
            "exp_cos" => match group {
                GroupId::Torus { dim: 1 } => Ok(forward_ft_real(
                    |g: &GroupElement| g.angles()[0].cos().exp(),
                    group,
                    self.max_weight_norm,
                    self.transform_resolution(),
                )),
                _ => Err(CliError::Config(
                    "function `exp_cos` is only defined on the 1-torus".to_string(),
                )),
            },
            "matrix_coeff" => {
                let label = named.weight.clone().ok_or_else(|| {
                    CliError::Config("function `matrix_coeff` requires a `weight`".to_string())
                })?;
                let row = named.row.unwrap_or(0);
                let col = named.col.unwrap_or(0);
                let w = Weight::new(label);
                let ir = Irrep::new(group, w.clone())?;
                let d = ir.dim();
                if row >= d || col >= d {
                    return Err(CliError::Config(format!(
                        "matrix_coeff indices ({row},{col}) outside weight {w} dimension {d}"
                    )));
                }
                let scale = (d as f64).sqrt();
                let norm = w.norm();
                Ok(forward_ft_real(
                    |g: &GroupElement| scale * rep_matrix(&ir, g)[(row, col)].re,
                    group,
                    norm,
                    required_resolution(group, norm),
                ))
            }
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(named.seed.unwrap_or(seed));
                Ok(random_real_bandlimited(
                    group,
                    self.max_weight_norm,
                    named.decay_power.unwrap_or(4.0),
                    &mut rng,
                ))
            }
            other => Err(CliError::Config(format!(
                "unknown function name {other:?} (expected one, cos_theta, sin_theta, triangle, exp_cos, matrix_coeff, random, or inline coefficients)"
            ))),
        }
    }
}

/// Serialize coefficients into the round-trippable inline form (entries in
/// deterministic weight order).
pub fn coefficients_to_json(f: &FourierCoefficients) -> InlineFunction {
    let entries = f
        .coeffs
        .iter()
        .map(|(w, m)| {
            let d = m.nrows();
            let mut re = vec![vec![0.0; d]; d];
            let mut im = vec![vec![0.0; d]; d];
            for r in 0..d {
                for s in 0..d {
                    re[r][s] = m[(r, s)].re;
                    im[r][s] = m[(r, s)].im;
                }
            }
            CoeffEntry {
                weight: w.label.clone(),
                re,
                im,
            }
        })
        .collect();
    InlineFunction {
        coefficients: CoeffJson {
            group: GroupSpec::of(f.group),
            max_norm: f.max_norm,
            entries,
        },
    }
}
