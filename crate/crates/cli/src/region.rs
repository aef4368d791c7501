use isac_core::channels::{quantize_gaussian, simplex_grid, Alphabet, ChannelConfig, ClosedForm, GaussianSpec, InputDistribution};
use isac_core::exponent::TrivialCorner;
use isac_core::iid::{rate_probability_region, symbol_rocs, waterfill};
use isac_core::region_fixed::{gaussian_region, mimo_region, open_unit_grid, sweep_region, RegionEntry};
use serde_json::{json, Value};

use crate::cli::{Command, RegionFixedArgs, RegionIidArgs, Units};
use crate::output::{num, Run};
use crate::{CliError, CliResult};

const MAX_GRID_POINTS: f64 = 2e6;

/// Number of simplex steps `m = 1/step`.
pub fn simplex_steps(step: f64) -> CliResult<usize> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Usage(format!("--grid-t {step} must be in (0, 1]")));
    }
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!("--grid-t {step} does not divide 1 into whole steps")));
    }
    Ok(m as usize)
}

fn input_grid(k: usize, step: f64) -> CliResult<Vec<InputDistribution>> {
    let m = simplex_steps(step)?;
    // C(m + k − 1, k − 1) compositions.
    let size = (1..k).fold(1.0, |acc, i| acc * (m + i) as f64 / i as f64);
    if size > MAX_GRID_POINTS {
        return Err(CliError::Usage(format!(
            "--grid-t {step} over {k} inputs gives {size:.0} distributions; use a coarser step"
        )));
    }
    Ok(simplex_grid(k, m))
}

fn measure_headers(units: Units) -> [String; 3] {
    let s = units.suffix();
    [format!("rate_{s}"), format!("e_fa_{s}"), format!("e_md_{s}")]
}

fn write_px_grid(run: &mut Run, inputs: &Alphabet, grid: &[InputDistribution]) -> CliResult<()> {
    let mut header = vec!["pX_index".to_string()];
    header.extend(inputs.labels().iter().map(|l| format!("p_{l}")));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, px)| std::iter::once(i.to_string()).chain(px.weights().iter().map(|&w| num(w))).collect())
        .collect();
    run.csv("px_grid.csv", &header, &rows)
}

fn corner_tag(c: TrivialCorner) -> &'static str {
    match c {
        TrivialCorner::FalseAlarmZero => "corner_fa0",
        TrivialCorner::MissedDetectionZero => "corner_md0",
    }
}

/// `[pX_index, u, tau, rate, e_fa, e_md, tag]`; extra columns follow `tag`.
fn entry_row(e: &RegionEntry, units: Units) -> Vec<String> {
    match e {
        RegionEntry::Interior(p) => vec![
            p.px_index.to_string(),
            num(p.u),
            num(p.tau),
            num(units.scale(p.rate)),
            num(units.scale(p.e_fa)),
            num(units.scale(p.e_md)),
            "interior".into(),
        ],
        RegionEntry::Corner { px_index, rate, corner } => {
            let (fa, md) = match corner {
                TrivialCorner::FalseAlarmZero => (0.0, f64::INFINITY),
                TrivialCorner::MissedDetectionZero => (f64::INFINITY, 0.0),
            };
            vec![
                px_index.to_string(),
                String::new(),
                String::new(),
                num(units.scale(*rate)),
                num(fa),
                num(md),
                corner_tag(*corner).into(),
            ]
        }
        RegionEntry::TimeShare { point, .. } => vec![
            point.px_index.to_string(),
            num(point.u),
            num(point.tau),
            num(units.scale(point.rate)),
            num(units.scale(point.e_fa)),
            num(units.scale(point.e_md)),
            "timeshare".into(),
        ],
    }
}

pub fn region_fixed(a: &RegionFixedArgs, config: &ChannelConfig, run: &mut Run) -> CliResult<Command> {
    if a.grid_u == 0 {
        return Err(CliError::Usage("--grid-u must be at least 1".into()));
    }
    let units = a.common.units;
    let u = open_unit_grid(a.grid_u);
    let [rate_h, fa_h, md_h] = measure_headers(units);
    match (config.closed_form(), a.generic) {
        (Some(ClosedForm::ScalarFixed { h, powers }), false) => {
            let mut ug = vec![0.0];
            ug.extend(&u);
            ug.push(1.0);
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for p in powers {
                let g = gaussian_region(h, p, &ug)?;
                for pt in &g.points {
                    rows.push(vec![
                        String::new(),
                        num(pt.u),
                        num(pt.tau),
                        num(units.scale(pt.rate)),
                        num(units.scale(pt.e_fa)),
                        num(units.scale(pt.e_md)),
                        "interior".into(),
                        num(p),
                    ]);
                }
                summary.push(json!({
                    "power": p,
                    "rate_max": units.scale(g.rate_max),
                    "intercept": units.scale(g.intercept),
                }));
            }
            let header = ["pX_index", "u", "tau", &rate_h, &fa_h, &md_h, "tag", "power"].map(String::from);
            run.csv("region_fixed.csv", &header, &rows)?;
            run.json("summary.json", &json!({ "units": units.suffix(), "curves": summary }))?;
        }
        (Some(ClosedForm::VectorFixed { h0, h1, h_tilde, power }), false) => {
            let k = a.grid_lambda.max(1);
            let mix: Vec<f64> = (0..k).map(|i| if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 }).collect();
            let designs = mimo_region(&h0, &h1, &h_tilde, power, &u, &mix)?;
            let rows: Vec<Vec<String>> = designs
                .iter()
                .map(|d| {
                    vec![
                        String::new(),
                        num(d.u),
                        num(d.e_fa - d.e_md),
                        num(units.scale(d.rate)),
                        num(units.scale(d.e_fa)),
                        num(units.scale(d.e_md)),
                        "interior".into(),
                        num(d.lambda),
                        num(d.trace_gamma_sigma),
                    ]
                })
                .collect();
            let header = ["pX_index", "u", "tau", &rate_h, &fa_h, &md_h, "tag", "lambda", "trace_sigma"].map(String::from);
            run.csv("region_fixed.csv", &header, &rows)?;
            let covs: Vec<Value> = designs
                .iter()
                .filter(|d| d.u == u[0])
                .map(|d| json!({ "lambda": d.lambda, "sigma_x": d.sigma_x, "rate": units.scale(d.rate) }))
                .collect();
            run.json("covariances.json", &json!({ "units": units.suffix(), "designs": covs }))?;
        }
        _ => {
            let mut channels = Vec::new();
            match config.gaussian_specs() {
                Some((specs, q)) => {
                    for spec in specs {
                        let power = match spec {
                            GaussianSpec::ScalarFixedState { power, .. } => Some(power),
                            _ => None,
                        };
                        channels.push((power, quantize_gaussian(&spec, q)?));
                    }
                }
                None => channels.push((None, config.build()?)),
            }
            let with_power = channels[0].0.is_some();
            let inputs = channels[0].1 .0.inputs().clone();
            let grid = input_grid(inputs.len(), a.grid_t)?;
            let mut rows = Vec::new();
            for (power, (pair, comm)) in &channels {
                for e in sweep_region(pair, comm, &grid, &u)? {
                    let mut r = entry_row(&e, units);
                    if let Some(p) = power {
                        r.push(num(*p));
                    }
                    rows.push(r);
                }
            }
            let mut header: Vec<String> = ["pX_index", "u", "tau", &rate_h, &fa_h, &md_h, "tag"].map(String::from).into();
            if with_power {
                header.push("power".into());
            }
            run.csv("region_fixed.csv", &header, &rows)?;
            write_px_grid(run, &inputs, &grid)?;
        }
    }
    Ok(Command::RegionFixed(a.clone()))
}

pub fn region_iid(a: &RegionIidArgs, config: &ChannelConfig, run: &mut Run) -> CliResult<Command> {
    if !(a.delta > 0.0 && a.delta.is_finite()) {
        return Err(CliError::Usage(format!("--delta {} must be positive", a.delta)));
    }
    let units = a.common.units;
    let (pair, comm) = config.build()?;
    let grid = input_grid(pair.inputs().len(), a.grid_t)?;
    let rocs = symbol_rocs(&pair)?;
    let mut rows = Vec::new();
    let mut allocations = Vec::new();
    let mut per_alpha = Vec::new();
    let mut capacity: Option<(usize, f64)> = None;
    for &alpha in &a.alpha {
        let pts = rate_probability_region(&pair, &comm, &grid, alpha)?;
        let cap = pts
            .iter()
            .max_by(|x, y| x.rate.total_cmp(&y.rate))
            .map(|p| (p.px_index, p.rate))
            .expect("nonempty grid");
        capacity.get_or_insert(cap);
        for p in &pts {
            let wf = waterfill(&p.p_x, &rocs, alpha, a.delta)?.averaged_detection();
            rows.push(vec![
                p.px_index.to_string(),
                num(alpha),
                num(units.scale(p.rate)),
                num(p.beta),
                u8::from(p.flat).to_string(),
                u8::from(p.on_boundary).to_string(),
                num(wf),
            ]);
            if p.on_boundary {
                allocations.push(json!({
                    "alpha": alpha,
                    "px_index": p.px_index,
                    "rate": units.scale(p.rate),
                    "beta": p.beta,
                    "allocation": p.allocation,
                }));
            }
        }
        per_alpha.push(json!({
            "alpha": alpha,
            "beta_at_capacity": pts[cap.0].beta,
            "beta_max": pts.iter().map(|p| p.beta).fold(f64::NEG_INFINITY, f64::max),
        }));
    }
    let rate_h = format!("rate_{}", units.suffix());
    let header = ["pX_index", "alpha", &rate_h, "beta", "flat_flag", "on_boundary", "beta_waterfill"].map(String::from);
    run.csv("region_iid.csv", &header, &rows)?;
    write_px_grid(run, pair.inputs(), &grid)?;
    run.json("allocations.json", &Value::Array(allocations))?;
    let (ci, c) = capacity.expect("at least one alpha");
    run.json(
        "summary.json",
        &json!({
            "units": units.suffix(),
            "capacity": units.scale(c),
            "capacity_px_index": ci,
            "capacity_p_x": grid[ci].weights(),
            "alphas": per_alpha,
        }),
    )?;
    Ok(Command::RegionIid(a.clone()))
}
