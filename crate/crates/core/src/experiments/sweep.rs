//! Declarative parameter sweeps over the rationality level and the site-2
//! loss, producing plot-ready tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{Cell, Table};
use super::spaces::{BuiltinSpace, REFERENCE_BUDGET};
use crate::error::{GameError, Result};
use crate::game::{SecurityGame, StrategySpace};
use crate::inefficiency::poqa;
use crate::quantal::{classify_loss_case, defender_response, pne_limit, sigma_lambda_derivative, LossCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    LambdaSweep,
    LossSweep,
    PoqaSweep,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::LambdaSweep => "lambda_sweep",
            SweepKind::LossSweep => "loss_sweep",
            SweepKind::PoqaSweep => "poqa_sweep",
        }
    }
}

/// A reference space by name, or an explicit list of site-1 investments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Builtin(BuiltinSpace),
    Explicit(Vec<f64>),
}

impl SpaceRef {
    fn build(&self, budget: f64, loss: f64) -> Result<StrategySpace<f64>> {
        match self {
            SpaceRef::Builtin(b) => b.build(loss),
            SpaceRef::Explicit(r) => StrategySpace::new(budget, r.iter().copied()),
        }
    }

    fn depends_on_loss(&self) -> bool {
        matches!(self, SpaceRef::Builtin(b) if b.depends_on_loss())
    }
}

/// A parameter grid: one value, an explicit list, or a log-spaced range
/// (optionally preceded by zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Fixed(f64),
    Values(Vec<f64>),
    LogRange {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        include_zero: bool,
    },
}

impl Grid {
    pub fn log_range(start: f64, stop: f64, count: usize) -> Self {
        Grid::LogRange { start, stop, count, include_zero: false }
    }

    /// Expands the grid, checking it is non-empty, finite and strictly increasing.
    pub fn values(&self, path: &str) -> Result<Vec<f64>> {
        let values = match self {
            Grid::Fixed(x) => vec![*x],
            Grid::Values(v) => v.clone(),
            Grid::LogRange { start, stop, count, include_zero } => {
                if !(*start > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                    return Err(GameError::config(path, format!(
                        "log range needs 0 < start <= stop, got {start}..{stop}"
                    )));
                }
                if *count == 0 {
                    return Err(GameError::config(path, "log range count must be at least 1"));
                }
                let mut v = Vec::with_capacity(count + 1);
                if *include_zero {
                    v.push(0.0);
                }
                v.extend(log_space(*start, *stop, *count));
                v
            }
        };
        if values.is_empty() {
            return Err(GameError::config(path, "grid is empty"));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(GameError::config(path, format!("grid value {x} is not finite")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(GameError::config(path, format!(
                "grid must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(values)
    }
}

/// `count` log-spaced points from `start` to `stop`, endpoints exact.
pub fn log_space(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (start.log10(), stop.log10());
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| match i {
            0 => start,
            i if i == count - 1 => stop,
            i => 10f64.powf(a + step * i as f64),
        })
        .collect()
}

/// A fully resolved sweep description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub space: SpaceRef,
    #[serde(rename = "R")]
    pub budget: f64,
    #[serde(rename = "A")]
    pub loss: Grid,
    pub lambda: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl SweepSpec {
    /// Reference configuration for each kind.
    pub fn default_for(kind: SweepKind) -> Self {
        let (space, loss, lambda) = match kind {
            SweepKind::LambdaSweep => (
                BuiltinSpace::C,
                Grid::Fixed(1.0),
                Grid::LogRange { start: 1e-3, stop: 1e4, count: 100, include_zero: true },
            ),
            SweepKind::LossSweep => (
                BuiltinSpace::A,
                Grid::Values(vec![0.5, 0.75, 1.0, 1.25, 1.5]),
                Grid::log_range(1.0, 1e3, 50),
            ),
            SweepKind::PoqaSweep => (
                BuiltinSpace::C,
                Grid::Values(vec![0.5, 1.0, 1.5]),
                Grid::log_range(10.0, 1e4, 60),
            ),
        };
        SweepSpec {
            kind,
            space: SpaceRef::Builtin(space),
            budget: REFERENCE_BUDGET,
            loss,
            lambda,
            output_path: None,
        }
    }

    /// Checks every field, returning the expanded `(losses, lambdas)` grids.
    pub fn validate(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(GameError::config("R", format!("budget must be positive, got {}", self.budget)));
        }
        if matches!(self.space, SpaceRef::Builtin(_)) && self.budget != REFERENCE_BUDGET {
            return Err(GameError::config("R", format!(
                "reference spaces are defined for R = {REFERENCE_BUDGET}, got {}",
                self.budget
            )));
        }
        let losses = self.loss.values("A")?;
        if let Some(a) = losses.iter().find(|a| **a <= 0.0) {
            return Err(GameError::config("A", format!("loss must be positive, got {a}")));
        }
        let lambdas = self.lambda.values("lambda")?;
        if let Some(l) = lambdas.iter().find(|l| **l < 0.0) {
            return Err(GameError::config("lambda", format!("lambda must be >= 0, got {l}")));
        }
        for &a in &losses {
            self.space
                .build(self.budget, a)
                .map_err(|e| GameError::config("space", e.to_string()))?;
        }
        match self.kind {
            SweepKind::LambdaSweep if losses.len() != 1 => {
                return Err(GameError::config("A", "lambda sweep needs a single loss value"));
            }
            SweepKind::LossSweep
                if !matches!(self.space, SpaceRef::Builtin(BuiltinSpace::A | BuiltinSpace::B)) =>
            {
                return Err(GameError::config("space", "loss sweep needs reference space A or B"));
            }
            _ => {}
        }
        Ok((losses, lambdas))
    }
}

/// Partial sweep description as read from a JSON config file. Unset fields
/// fall back to [`SweepSpec::default_for`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub kind: Option<SweepKind>,
    #[serde(default)]
    pub space: Option<SpaceRef>,
    #[serde(default, rename = "R")]
    pub budget: Option<f64>,
    #[serde(default, rename = "A", alias = "A_values", alias = "A_fixed")]
    pub loss: Option<Grid>,
    #[serde(default, alias = "lambda_values", alias = "lambda_fixed")]
    pub lambda: Option<Grid>,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: Option<super::output::OutputFormat>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GameError::config("<config>", e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GameError::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills unset fields from the defaults for `kind` and validates.
    pub fn resolve(&self, kind: SweepKind) -> Result<SweepSpec> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(GameError::config("kind", format!(
                    "config describes {} but {} was requested",
                    k.as_str(),
                    kind.as_str()
                )));
            }
        }
        let mut spec = SweepSpec::default_for(kind);
        if let Some(s) = &self.space {
            spec.space = s.clone();
        }
        if let Some(r) = self.budget {
            spec.budget = r;
        }
        if let Some(a) = &self.loss {
            spec.loss = a.clone();
        }
        if let Some(l) = &self.lambda {
            spec.lambda = l.clone();
        }
        if self.output_path.is_some() {
            spec.output_path = self.output_path.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceDescription {
    pub name: Option<String>,
    /// Site-1 investments at the first loss of the grid.
    pub site1: Vec<f64>,
    pub labels: Vec<String>,
    /// Whether the menu is rebuilt per loss.
    pub rebuilt_per_loss: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub tool: String,
    pub version: String,
    pub kind: SweepKind,
    #[serde(rename = "R")]
    pub budget: f64,
    #[serde(rename = "A")]
    pub losses: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub space: SpaceDescription,
    pub curves: String,
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub table: Table,
}

impl SweepResult {
    /// Names of the per-strategy probability columns.
    pub fn sigma_columns(&self) -> Vec<&str> {
        self.table
            .columns
            .iter()
            .map(String::as_str)
            .filter(|c| c.starts_with("sigma_r"))
            .collect()
    }
}

fn metadata(spec: &SweepSpec, losses: &[f64], lambdas: &[f64], space: &StrategySpace<f64>) -> SweepMetadata {
    let mut notes = Vec::new();
    if let SpaceRef::Builtin(b) = &spec.space {
        if b.depends_on_loss() {
            notes.push("r3 = ((R - ln A)/2, (R + ln A)/2) is rebuilt for every loss A".to_owned());
        }
        if spec.kind == SweepKind::PoqaSweep && *b == BuiltinSpace::C {
            notes.push("space C is used for the PoQA figure because it is the only loss-independent space; this choice is an inference".to_owned());
        }
    }
    SweepMetadata {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        kind: spec.kind,
        budget: spec.budget,
        losses: losses.to_vec(),
        lambdas: lambdas.to_vec(),
        space: SpaceDescription {
            name: match &spec.space {
                SpaceRef::Builtin(b) => Some(b.to_string()),
                SpaceRef::Explicit(_) => None,
            },
            site1: space.iter().map(|a| a.site1).collect(),
            labels: space.labels().to_vec(),
            rebuilt_per_loss: spec.space.depends_on_loss(),
        },
        curves: "p1(r) = exp(-r), p2(R - r) = exp(-(R - r))".to_owned(),
        notes,
        seed: None,
        generated_at: chrono::Utc::now().to_rfc3339(),
    }
}

fn require_kind(spec: &SweepSpec, kind: SweepKind) -> Result<()> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(GameError::config("kind", format!("expected {}, got {}", kind.as_str(), spec.kind.as_str())))
    }
}

/// `sigma` over the space and `d sigma / d lambda` of the best listed
/// strategy for every `lambda` in the grid.
pub fn run_lambda_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_kind(spec, SweepKind::LambdaSweep)?;
    let (losses, lambdas) = spec.validate()?;
    let loss = losses[0];
    let game = SecurityGame::exponential(spec.budget, loss)?;
    let space = spec.space.build(spec.budget, loss)?;
    let best = pne_limit(&game, &space)?[0];

    let mut columns = vec!["lambda".to_owned()];
    columns.extend(space.labels().iter().map(|l| format!("sigma_{l}")));
    columns.push("dsigma_opt_dlambda".to_owned());
    let mut table = Table::new(columns);

    let rows: Vec<Vec<Cell>> = lambdas
        .par_iter()
        .map(|&lambda| -> Result<Vec<Cell>> {
            let sigma = defender_response(&game, &space, lambda)?;
            let slope = sigma_lambda_derivative(&game, &space, lambda)?[best];
            let mut row = vec![Cell::Float(lambda)];
            row.extend(sigma.probabilities().iter().map(|&p| Cell::Float(p)));
            row.push(Cell::Float(slope));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    rows.into_iter().for_each(|r| table.push(r));

    let mut meta = metadata(spec, &losses, &lambdas, &space);
    meta.notes.push(format!("dsigma_opt_dlambda is taken at {}", space.labels()[best]));
    Ok(SweepResult { metadata: meta, table })
}

/// `sigma(r3)` for every `(A, lambda)` pair, with the space rebuilt per `A`.
/// A case-condition violation is reported in the row, not raised.
pub fn run_loss_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_kind(spec, SweepKind::LossSweep)?;
    let (losses, lambdas) = spec.validate()?;
    let builtin = match spec.space {
        SpaceRef::Builtin(b) => b,
        SpaceRef::Explicit(_) => unreachable!("validated above"),
    };
    let expected = match builtin {
        BuiltinSpace::A => LossCase::SiteOneDominant,
        _ => LossCase::SiteTwoDominant,
    };
    let mut table = Table::new(["A", "lambda", "sigma_opt", "case_condition_ok"]);
    let pairs: Vec<(f64, f64)> = losses
        .iter()
        .flat_map(|&a| lambdas.iter().map(move |&l| (a, l)))
        .collect();
    let rows: Vec<Vec<Cell>> = pairs
        .par_iter()
        .map(|&(a, lambda)| -> Result<Vec<Cell>> {
            let game = SecurityGame::exponential(spec.budget, a)?;
            let space = builtin.build(a)?;
            let case_ok = matches!(classify_loss_case(&game, &space), Ok(c) if c.case() == expected);
            let sigma = defender_response(&game, &space, lambda)?.get(BuiltinSpace::OPTIMAL_INDEX);
            Ok(vec![a.into(), lambda.into(), sigma.into(), case_ok.into()])
        })
        .collect::<Result<_>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    let space = builtin.build(losses[0])?;
    Ok(SweepResult { metadata: metadata(spec, &losses, &lambdas, &space), table })
}

/// PoQA, its logarithm and its bound for every `(lambda, A)` pair.
pub fn run_poqa_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_kind(spec, SweepKind::PoqaSweep)?;
    let (losses, lambdas) = spec.validate()?;
    let mut table = Table::new(["lambda", "A", "poqa", "ln_poqa", "bound"]);
    let pairs: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| losses.iter().map(move |&a| (l, a)))
        .collect();
    let rows: Vec<Vec<Cell>> = pairs
        .par_iter()
        .map(|&(lambda, a)| -> Result<Vec<Cell>> {
            let game = SecurityGame::exponential(spec.budget, a)?;
            let space = spec.space.build(spec.budget, a)?;
            let report = poqa(&game, &space, lambda)?;
            let bound = report.bound.unwrap_or(f64::NAN);
            Ok(vec![lambda.into(), a.into(), report.value.into(), report.value.ln().into(), bound.into()])
        })
        .collect::<Result<_>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    let space = spec.space.build(spec.budget, losses[0])?;
    Ok(SweepResult { metadata: metadata(spec, &losses, &lambdas, &space), table })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.kind {
        SweepKind::LambdaSweep => run_lambda_sweep(spec),
        SweepKind::LossSweep => run_loss_sweep(spec),
        SweepKind::PoqaSweep => run_poqa_sweep(spec),
    }
}
