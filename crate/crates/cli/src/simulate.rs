use isac_core::channels::{BinaryStatePair, ChannelConfig, InputDistribution};
use isac_core::exponent::TiltedFamily;
use isac_core::iid::{allocation_oracle, symbol_rocs, Allocation};
use isac_core::montecarlo::{simulate_fixed_state, simulate_iid, ExponentFit, SamplingMode, SimConfig};
use serde_json::{json, Value};

use crate::cli::{Command, Mode, Sampling, SimulateArgs, Units};
use crate::output::{num, opt_num, Run};
use crate::{CliError, CliResult};

fn fit_json(fit: &ExponentFit, units: Units) -> Value {
    json!({
        "status": fit.status,
        "exponent": fit.exponent.map(|e| units.scale(e)),
        "std_error": fit.std_error.map(|e| units.scale(e)),
        "n_used": fit.n_used,
        "n_excluded": fit.n_excluded,
    })
}

/// Picks one allocation from a `region-iid` file, or reads a bare allocation.
fn select_allocation(a: &SimulateArgs, doc: &Value) -> CliResult<Allocation> {
    let usage = |m: String| CliError::Usage(format!("allocation file: {m}"));
    let parse = |v: &Value| serde_json::from_value::<Allocation>(v.clone()).map_err(|e| usage(e.to_string()));
    let Some(list) = doc.as_array() else {
        return parse(doc);
    };
    let matches: Vec<&Value> = list
        .iter()
        .filter(|e| {
            a.alpha.is_none_or(|al| e["alpha"].as_f64().is_some_and(|v| (v - al).abs() <= 1e-12))
                && a.px_index.is_none_or(|i| e["px_index"].as_u64() == Some(i as u64))
        })
        .collect();
    match matches.as_slice() {
        [one] => parse(&one["allocation"]),
        [] => Err(usage("no entry matches --alpha and --px-index".into())),
        many => Err(usage(format!("{} entries match; narrow with --alpha and --px-index", many.len()))),
    }
}

fn resolve_allocation(a: &SimulateArgs, pair: &BinaryStatePair, px: &InputDistribution) -> CliResult<Allocation> {
    if let Some(al) = &a.resolved_allocation {
        return Ok(al.clone());
    }
    if let Some(path) = &a.allocation {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read allocation `{}`: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&src)
            .map_err(|e| CliError::Usage(format!("allocation `{}`: {e}", path.display())))?;
        return select_allocation(a, &doc);
    }
    let alpha = a
        .alpha
        .ok_or_else(|| CliError::Usage("iid mode needs --allocation or --alpha".into()))?;
    Ok(allocation_oracle(px, &symbol_rocs(pair)?, alpha)?)
}

pub fn simulate(a: &SimulateArgs, config: &ChannelConfig, run: &mut Run) -> CliResult<Command> {
    let units = a.common.units;
    let (pair, comm) = config.build()?;
    let px = match &a.px {
        Some(w) => InputDistribution::new(w.clone())?,
        None => InputDistribution::uniform(pair.inputs().len()),
    };
    let sampling = match a.sampling {
        Sampling::Counts => SamplingMode::Counts,
        Sampling::PerSymbol => SamplingMode::PerSymbol,
    };
    let mut recorded = a.clone();
    match a.mode {
        Mode::Fixed => {
            let tf = TiltedFamily::new(&pair, &px)?;
            let (tau, u) = match a.tau {
                Some(t) => (t, None),
                None if (0.0..=1.0).contains(&a.u) => (tf.kappa0_prime(a.u), Some(a.u)),
                None => return Err(CliError::Usage(format!("--u {} is not in [0, 1]", a.u))),
            };
            let mut cfg = SimConfig::new(a.seed, a.trials, a.n.clone(), px)?;
            cfg.sampling = sampling;
            let res = simulate_fixed_state(&pair, &cfg, tau)?;
            let rows: Vec<Vec<String>> = res
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.state.to_string(),
                        r.estimate.trials.to_string(),
                        r.estimate.errors.to_string(),
                        num(r.estimate.p_hat),
                        num(r.estimate.ci_lo),
                        num(r.estimate.ci_hi),
                        opt_num(r.bound),
                    ]
                })
                .collect();
            let header = ["n", "state", "trials", "errors", "p_hat", "ci_lo", "ci_hi", "bound"].map(String::from);
            run.csv("mc.csv", &header, &rows)?;
            run.json(
                "fit.json",
                &json!({
                    "units": units.suffix(),
                    "tau": tau,
                    "u": u,
                    "theory": res.theory.map(|(fa, md)| json!({ "e_fa": units.scale(fa), "e_md": units.scale(md) })),
                    "fit_fa": fit_json(&res.fit_fa, units),
                    "fit_md": fit_json(&res.fit_md, units),
                }),
            )?;
        }
        Mode::Iid => {
            let allocation = resolve_allocation(a, &pair, &px)?;
            let composition = InputDistribution::new(allocation.p_x.clone())?;
            let mut cfg = SimConfig::new(a.seed, a.trials, a.n.clone(), composition)?;
            cfg.sampling = sampling;
            let res = simulate_iid(&pair, &comm, &cfg, &allocation)?;
            let rows: Vec<Vec<String>> = res
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.false_alarm.trials.to_string(),
                        r.false_alarm.errors.to_string(),
                        num(r.false_alarm.p_hat),
                        num(r.expected_p_fa),
                        r.detection.trials.to_string(),
                        r.detection.errors.to_string(),
                        num(r.detection.p_hat),
                        num(r.expected_p_d),
                    ]
                })
                .collect();
            let header = [
                "n",
                "s0_uses",
                "false_alarms",
                "p_fa_hat",
                "expected_p_fa",
                "s1_uses",
                "detections",
                "p_d_hat",
                "expected_p_d",
            ]
            .map(String::from);
            run.csv("iid.csv", &header, &rows)?;
            run.json("allocation.json", &serde_json::to_value(&allocation).expect("allocations serialize"))?;
            recorded.resolved_allocation = Some(allocation);
        }
    }
    Ok(Command::Simulate(recorded))
}
