//! Flat dotted key-value scenario files, e.g.
//!
//! ```text
//! scenario.kind = conformal_torus
//! grid.n = 64
//! eigen.p = 2
//! flow.kappa = 0.5
//! init.u0.cos_x = 0.2
//! ```
//!
//! Every constraint is validated at parse time: exponent balance and b >= 0
//! through the eigen constructor, SPD of the initial metric through the
//! metric constructor, and positivity of the homothety factor over the whole
//! horizon for the analytic family.

use crate::CliError;
use pqflow_core::diffgeo::{Grid, MetricField, ScalarField, SymTensorField};
use pqflow_core::geomflow::{einstein_c, CoupledState, EinsteinParams, FlowConfig, Stepper};
use pqflow_core::pqeigen::EigenParams;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    ConformalTorus,
    GeneralTorus,
    Circle,
    EinsteinAnalytic,
}

/// Single-frequency Fourier modes used for initial data.
#[derive(Clone, Copy, Debug, Default)]
pub struct Modes {
    pub mean: f64,
    pub cos_x: f64,
    pub sin_x: f64,
    pub cos_y: f64,
    pub sin_y: f64,
    pub cos_xy: f64,
}

impl Modes {
    fn eval(&self, x: f64, y: f64, l1: f64, l2: f64) -> f64 {
        let tx = TAU * x / l1;
        let ty = TAU * y / l2;
        self.mean
            + self.cos_x * tx.cos()
            + self.sin_x * tx.sin()
            + self.cos_y * ty.cos()
            + self.sin_y * ty.sin()
            + self.cos_xy * (tx + ty).cos()
    }

    fn has_y_modes(&self) -> bool {
        self.cos_y != 0.0 || self.sin_y != 0.0 || self.cos_xy != 0.0
    }

    pub fn field(&self, grid: Grid<f64>, l1: f64, l2: f64) -> ScalarField<f64> {
        ScalarField::from_fn(grid, |x, y| self.eval(x, y, l1, l2))
    }
}

#[derive(Clone, Debug)]
pub struct EinsteinSpec {
    pub a: f64,
    pub m: usize,
    pub lambda0: f64,
    pub vol0: f64,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: Kind,
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub u0: Modes,
    pub gxx: Modes,
    pub gxy: Modes,
    pub gyy: Modes,
    pub phi: Modes,
    pub flow: FlowConfig<f64>,
    pub eigen: EigenParams<f64>,
    pub einstein: Option<EinsteinSpec>,
    pub csv_out: Option<PathBuf>,
    pub fields_out: Option<PathBuf>,
}

fn parse_map(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Parse(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Parse(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

struct Take {
    map: BTreeMap<String, String>,
}

impl Take {
    fn str(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("`{key}`: not a number: {v}"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| CliError::Parse(format!("`{key}`: not an integer: {v}"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| CliError::Parse(format!("`{key}`: not an integer: {v}"))),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.map.remove(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(CliError::Parse(format!("`{key}`: expected true or false, got {v}"))),
        }
    }

    fn modes(&mut self, prefix: &str, mean: f64) -> Result<Modes, CliError> {
        Ok(Modes {
            mean: self.f64(&format!("{prefix}.mean"), mean)?,
            cos_x: self.f64(&format!("{prefix}.cos_x"), 0.0)?,
            sin_x: self.f64(&format!("{prefix}.sin_x"), 0.0)?,
            cos_y: self.f64(&format!("{prefix}.cos_y"), 0.0)?,
            sin_y: self.f64(&format!("{prefix}.sin_y"), 0.0)?,
            cos_xy: self.f64(&format!("{prefix}.cos_xy"), 0.0)?,
        })
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let mut t = Take { map: parse_map(text)? };

        let kind = match t.str("scenario.kind").as_deref() {
            Some("conformal_torus") => Kind::ConformalTorus,
            Some("general_torus") => Kind::GeneralTorus,
            Some("circle") => Kind::Circle,
            Some("einstein_analytic") => Kind::EinsteinAnalytic,
            Some(other) => return Err(CliError::Parse(format!("unknown scenario.kind `{other}`"))),
            None => return Err(CliError::Parse("missing scenario.kind".into())),
        };

        let n = t.usize("grid.n", 64)?;
        let l1 = t.f64("grid.l1", TAU)?;
        let l2 = t.f64("grid.l2", l1)?;

        let u0 = t.modes("init.u0", 0.0)?;
        let gxx = t.modes("init.gxx", 1.0)?;
        let gxy = t.modes("init.gxy", 0.0)?;
        let gyy = t.modes("init.gyy", 1.0)?;
        let phi = t.modes("init.phi", 0.0)?;

        let kappa = t.f64("flow.kappa", 0.0)?;
        let normalized = t.bool("flow.normalized", false)?;
        let t_end = t.f64("flow.t_end", 0.1)?;
        let mut flow = FlowConfig::new(kappa, normalized, t_end).map_err(parse_err)?;
        flow.dt_safety = t.f64("flow.dt_safety", 0.25)?;
        flow.records = t.usize("flow.records", 20)?;
        flow.stepper = match t.str("flow.stepper").as_deref() {
            None | Some("rk4") => Stepper::Rk4,
            Some("euler") => Stepper::Euler,
            Some(other) => return Err(CliError::Parse(format!("unknown flow.stepper `{other}`"))),
        };
        flow.validate().map_err(parse_err)?;

        let p = t.f64("eigen.p", 2.0)?;
        let q = t.f64("eigen.q", p)?;
        let a = t.f64("eigen.a", p / 2.0 - 1.0)?;
        let delta = t.f64("eigen.delta", 1e-8)?;
        let eigen = EigenParams::new(p, q, a)
            .and_then(|e| e.with_delta(delta))
            .map_err(parse_err)?
            .with_tolerance(t.f64("eigen.tol_kkt", 1e-6)?, t.usize("eigen.max_iters", 50_000)?)
            .with_seed(t.u64("scenario.seed", 0)?);

        let einstein = if kind == Kind::EinsteinAnalytic {
            let spec = EinsteinSpec {
                a: t.f64("einstein.a", 1.0)?,
                m: t.usize("einstein.m", 2)?,
                lambda0: t.f64("einstein.lambda0", 1.0)?,
                vol0: t.f64("einstein.vol0", 1.0)?,
            };
            if spec.m == 0 || spec.lambda0 <= 0.0 || spec.vol0 <= 0.0 {
                return Err(CliError::Parse("einstein.m, lambda0, vol0 must be positive".into()));
            }
            if (eigen.p() - eigen.q()).abs() > 1e-12 {
                return Err(CliError::Parse("einstein_analytic requires p = q".into()));
            }
            Some(spec)
        } else {
            None
        };

        let csv_out = t.str("output.csv").map(PathBuf::from);
        let fields_out = t.str("output.fields").map(PathBuf::from);

        if let Some(key) = t.map.keys().next() {
            return Err(CliError::Parse(format!("unknown key `{key}`")));
        }

        let scenario = Scenario {
            kind,
            n,
            l1,
            l2,
            u0,
            gxx,
            gxy,
            gyy,
            phi,
            flow,
            eigen,
            einstein,
            csv_out,
            fields_out,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.kind == Kind::Circle {
            for (name, m) in [("init.u0", &self.u0), ("init.phi", &self.phi)] {
                if m.has_y_modes() {
                    return Err(CliError::Parse(format!("{name}: y-modes on a circle scenario")));
                }
            }
        }
        if let Some(spec) = &self.einstein {
            let params = self.einstein_params(spec);
            // homothety factor must stay positive over the whole horizon
            einstein_c(self.flow.t_end, &params).map_err(parse_err)?;
        } else {
            // SPD and curvature checks through actual construction
            self.initial_state().map_err(|e| CliError::Parse(format!("initial data: {e}")))?;
        }
        Ok(())
    }

    fn einstein_params(&self, spec: &EinsteinSpec) -> EinsteinParams<f64> {
        EinsteinParams {
            a: spec.a,
            kappa: self.flow.kappa,
            m: spec.m,
            p: self.eigen.p(),
            t_max: self.flow.t_end,
        }
    }

    pub fn einstein_params_checked(&self) -> Option<EinsteinParams<f64>> {
        self.einstein.as_ref().map(|s| self.einstein_params(s))
    }

    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        match self.kind {
            Kind::Circle => Grid::circle(self.n, self.l1).map_err(parse_err),
            _ => Grid::torus(self.n, self.l1, self.l2).map_err(parse_err),
        }
    }

    /// Materializes the initial coupled state (not valid for the analytic
    /// Einstein family, which never builds a grid metric).
    pub fn initial_state(&self) -> Result<CoupledState<f64>, CliError> {
        if self.kind == Kind::EinsteinAnalytic {
            return Err(CliError::Parse(
                "einstein_analytic is closed-form only; no grid state".into(),
            ));
        }
        let grid = self.grid()?;
        let g = match self.kind {
            Kind::GeneralTorus => {
                let mut tensor = SymTensorField::zeros(grid);
                let fx = self.gxx.field(grid, self.l1, self.l2);
                let fxy = self.gxy.field(grid, self.l1, self.l2);
                let fy = self.gyy.field(grid, self.l1, self.l2);
                tensor.xx.copy_from_slice(fx.values());
                tensor.xy.copy_from_slice(fxy.values());
                tensor.yy.copy_from_slice(fy.values());
                MetricField::new(tensor).map_err(parse_err)?
            }
            _ => {
                let u0 = self.u0.field(grid, self.l1, self.l2);
                MetricField::conformal(&u0).map_err(parse_err)?
            }
        };
        let phi = self.phi.field(grid, self.l1, self.l2);
        CoupledState::new(g, phi, 0.0).map_err(parse_err)
    }
}

fn parse_err(e: pqflow_core::Error) -> CliError {
    CliError::Parse(e.to_string())
}
