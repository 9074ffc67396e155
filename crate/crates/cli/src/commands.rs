//! The subcommands. Each returns the text of its machine output; the caller
//! decides whether it goes to a file or stdout.

use std::str::FromStr;

use kepler_geom::calabi_families::{moment_polytope, AnsatzFamily};
use kepler_geom::flows::{
    conifold_fixed_point, family_fixed_point, flow_residual, flow_step, flow_step_unchecked, Direction, FlowState,
    Scheme, TraceRow,
};
use kepler_geom::metrics::{kepler_hermitian, metric_from_profile, ConifoldProfile, DeformedProfile, HermitianForm};
use kepler_geom::numkit::{hermitian_eigenvalues, Grid1D, C64};
use kepler_geom::regularization::{integrate_regularized, LCState};
use kepler_geom::structures::ConifoldPoint;
use kepler_geom::toric_hessian::{csc_profile, einstein_profile, scalar_curvature, un_hermitian, BProfile, UProfile};
use kepler_geom::GeomError;
use serde_json::{json, Value};

use crate::config::{Config, Target};
use crate::error::{CliError, CliResult};

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// `"1+2i, 0.5, -i"` → complex coordinates.
pub fn parse_point(text: &str) -> CliResult<Vec<C64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            C64::from_str(s).map_err(|_| CliError::Usage(format!("cannot parse `{s}` as a complex number")))
        })
        .collect()
}

fn parse_reals(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("{what}: cannot parse `{s}`"))))
        .collect()
}

/// `"lo:hi:count"`.
pub fn parse_grid(text: &str) -> CliResult<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("grid `{text}` is not lo:hi:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    let k = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    if !(lo < hi) || k < 2 {
        return Err(bad());
    }
    Ok((lo, hi, k))
}

fn complex_json(z: &C64) -> Value {
    json!([z.re, z.im])
}

/// Completes chart coordinates `w₁..wₙ` with `w₀ = √(a − Σw²)`.
fn quadric_point(chart: &[C64], a: f64) -> CliResult<ConifoldPoint> {
    let s: C64 = chart.iter().map(|z| z * z).sum();
    let mut w = vec![(C64::new(a, 0.0) - s).sqrt()];
    w.extend_from_slice(chart);
    Ok(ConifoldPoint::new(w, C64::new(a, 0.0))?)
}

fn expect_dim(point: &[C64], dim: usize, family: &str) -> CliResult<()> {
    if point.len() != dim {
        return Err(CliError::Usage(format!("{family} expects {dim} coordinates, got {}", point.len())));
    }
    Ok(())
}

fn toric_profile(target: &Target) -> CliResult<Box<dyn UProfile>> {
    use kepler_geom::calabi_families::FamilyKind;
    Ok(match *target {
        Target::Family(FamilyKind::UnRf { n, b }) => Box::new(BProfile::new(n, b)?),
        Target::Einstein { n, lambda, c1, interval } => Box::new(einstein_profile(n, lambda, c1, interval)?),
        Target::Csc { n, r, c1, c2, interval } => Box::new(csc_profile(n, r, c1, c2, interval)?),
        _ => return Err(CliError::Usage("needs a UN_RF, EINSTEIN or CSC config".into())),
    })
}

pub fn eval_metric(config: &Config, point: &str) -> CliResult<String> {
    let target = config.target()?;
    let z = parse_point(point)?;
    let h: HermitianForm = match &target {
        Target::Family(kind) => {
            let f = AnsatzFamily::new(*kind)?;
            expect_dim(&z, f.dim(), &config.family)?;
            f.hermitian(&z)?
        }
        Target::Kepler { n } => {
            expect_dim(&z, *n, &config.family)?;
            kepler_hermitian(&quadric_point(&z, 0.0)?)?
        }
        Target::Conifold { n, c, c1 } => {
            expect_dim(&z, *n, &config.family)?;
            metric_from_profile(&ConifoldProfile::new(*n, *c, *c1)?, &quadric_point(&z, 0.0)?)?
        }
        Target::Deformed { n, a, c } => {
            expect_dim(&z, *n, &config.family)?;
            metric_from_profile(&DeformedProfile::new(*n, *a, *c)?, &quadric_point(&z, *a)?)?
        }
        Target::Einstein { n, .. } | Target::Csc { n, .. } => {
            expect_dim(&z, *n, &config.family)?;
            un_hermitian(toric_profile(&target)?.as_ref(), &z)?
        }
    };
    let m = h.dim();
    let rows: Vec<Value> = (0..m).map(|i| Value::Array((0..m).map(|j| complex_json(&h[(i, j)])).collect())).collect();
    let eig = hermitian_eigenvalues(&h);
    let out = json!({
        "family": config.family,
        "point": z.iter().map(complex_json).collect::<Vec<_>>(),
        "matrix": rows,
        "eigenvalues": eig,
        "min_eigenvalue": eig.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_eigenvalue": eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "hermitian_defect": h.hermitian_defect(),
    });
    Ok(serde_json::to_string_pretty(&out).expect("json"))
}

/// Circular orbit at energy `e`: `ζ = √ρ`, `Ω = 2i` with `ρ = −1/(2E)`.
pub fn circular_init(e: f64) -> LCState {
    LCState::new((-0.5 / e).sqrt(), 0.0, 0.0, 2.0)
}

pub fn orbit(e: f64, init: Option<&str>, periods: f64, steps_per_period: usize) -> CliResult<String> {
    if !(e < 0.0) {
        return Err(GeomError::Domain(format!("the regularized flow needs E < 0, got {e}")).into());
    }
    let init = match init {
        None => circular_init(e),
        Some(text) => match parse_reals(text, "init")?.as_slice() {
            [a, b, c, d] => LCState::new(*a, *b, *c, *d),
            _ => return Err(CliError::Usage("init takes four values ξ,η,ω,χ".into())),
        },
    };
    if steps_per_period == 0 || !(periods >= 0.0) {
        return Err(CliError::Usage("steps and periods must be positive".into()));
    }
    let period = std::f64::consts::TAU / (-e / 2.0).sqrt();
    let rows = integrate_regularized(e, &init, periods * period, Some(period / steps_per_period as f64))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(csv_err)?;
    }
    csv_text(w)
}

pub fn polytope(config: &Config) -> CliResult<String> {
    match config.target()? {
        Target::Family(kind) => {
            AnsatzFamily::new(kind)?;
            Ok(serde_json::to_string_pretty(&moment_polytope(kind).to_json()).expect("json"))
        }
        _ => Err(CliError::Usage(format!("{} has no moment polytope", config.family))),
    }
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub nodes: usize,
    pub range: Option<(f64, f64)>,
    pub steps: usize,
    /// Step as a fraction of the forward-time stability bound.
    pub ds_factor: f64,
    pub scheme: Scheme,
    pub direction: Direction,
    /// Relative height of a bump added to the fixed point.
    pub perturb: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            nodes: 128,
            range: None,
            steps: 100,
            ds_factor: 0.5,
            scheme: Scheme::Euler,
            direction: Direction::Forward,
            perturb: 0.0,
        }
    }
}

pub struct FlowOutput {
    pub trace_csv: String,
    pub profile_json: String,
}

fn fixed_point(config: &Config, opts: &FlowOptions) -> CliResult<FlowState> {
    let grid = |def: (f64, f64)| {
        let (a, b) = opts.range.unwrap_or(def);
        Grid1D::uniform(a, b, opts.nodes)
    };
    Ok(match config.target()? {
        Target::Family(kind) => family_fixed_point(&AnsatzFamily::new(kind)?, grid((0.3, 1.0))?)?,
        Target::Conifold { n, c, c1 } => conifold_fixed_point(n, c, c1, grid((1.0, 2.0))?)?,
        _ => return Err(CliError::Usage(format!("{} has no flow fixed point", config.family))),
    })
}

pub fn flow(config: &Config, opts: &FlowOptions) -> CliResult<FlowOutput> {
    if !(opts.ds_factor > 0.0) {
        return Err(CliError::Usage("ds factor must be positive".into()));
    }
    let reference = fixed_point(config, opts)?.with_direction(opts.direction);
    let mut state = reference.clone();
    if opts.perturb != 0.0 {
        let x = state.grid.nodes();
        let (lo, hi) = (x[2], x[x.len() - 3]);
        state.perturb(opts.perturb, 0.5 * (lo + hi), 0.3 * (hi - lo))?;
    }
    // the printed direction has no stable step; reuse the forward bound as a scale
    let ds = opts.ds_factor * state.clone().with_direction(Direction::Forward).stability_bound()?;
    let mut trace = vec![TraceRow {
        step: 0,
        time: 0.0,
        residual: flow_residual(&state)?,
        max_perturbation: state.deviation(&reference),
    }];
    for k in 1..=opts.steps {
        state = match opts.direction {
            Direction::Forward => flow_step(&state, ds, opts.scheme)?,
            Direction::Printed => flow_step_unchecked(&state, ds, opts.scheme)?,
        };
        trace.push(TraceRow {
            step: k,
            time: k as f64 * ds,
            residual: flow_residual(&state)?,
            max_perturbation: state.deviation(&reference),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &trace {
        w.serialize(row).map_err(csv_err)?;
    }
    let profile = json!({
        "family": config.family,
        "flow": state.kind,
        "direction": state.direction,
        "scheme": opts.scheme,
        "lambda": state.lambda,
        "c1": state.c1,
        "steps": opts.steps,
        "ds": ds,
        "nodes": state.grid.nodes(),
        "values": state.values,
    });
    Ok(FlowOutput { trace_csv: csv_text(w)?, profile_json: serde_json::to_string_pretty(&profile).expect("json") })
}

/// Scalar curvature three ways at `yᵢ = t/n` for `t` on the grid.
pub fn curvature(config: &Config, grid: &str) -> CliResult<String> {
    let p = toric_profile(&config.target()?)?;
    let (lo, hi, k) = parse_grid(grid)?;
    let n = p.n();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=n).map(|i| format!("y_{i}")).collect();
    header.extend(["R_closed", "R_abreu", "R_logdet"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..k {
        let t = lo + (hi - lo) * i as f64 / (k - 1) as f64;
        let y = vec![t / n as f64; n];
        let s = scalar_curvature(p.as_ref(), &y)?;
        let mut rec: Vec<String> = y.iter().map(|v| v.to_string()).collect();
        rec.extend([s.closed, s.abreu, s.logdet].map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_text(w)
}
