use isac_core::channels::{ChannelConfig, ClosedForm};
use isac_core::iid::{default_gaussian_thresholds, gaussian_roc, roc_from_likelihoods, RocCurve, ThresholdTest};
use isac_core::Error;

use crate::cli::{Command, RocArgs};
use crate::output::{num, Run};
use crate::CliResult;

fn rule(t: &ThresholdTest) -> (&'static str, String) {
    match t {
        ThresholdTest::Never => ("never", String::new()),
        ThresholdTest::Always => ("always", String::new()),
        ThresholdTest::AtLeast { tau } => ("lr_at_least", num(*tau)),
    }
}

pub fn roc(a: &RocArgs, config: &ChannelConfig, run: &mut Run) -> CliResult<Command> {
    let (pair, _) = config.build()?;
    let inputs = pair.inputs();
    let x = inputs
        .index_of(&a.symbol)
        .or_else(|| a.symbol.parse::<usize>().ok().filter(|&i| i < inputs.len()))
        .ok_or_else(|| {
            Error::domain(
                "symbol",
                format!("`{}` is not one of {:?} or an index below {}", a.symbol, inputs.labels(), inputs.len()),
            )
        })?;
    let curve: RocCurve = match config.closed_form() {
        // Sensing output N(S·x, σ_s²) on inputs {0, 1}: symbol 1 separates the means by 1/σ_s.
        Some(ClosedForm::ScalarIid { sigma_s2, .. }) if x == 1 => {
            let s = sigma_s2.sqrt();
            gaussian_roc(s, &default_gaussian_thresholds(s, a.samples))?
        }
        Some(ClosedForm::ScalarIid { .. }) => roc_from_likelihoods(&[1.0], &[1.0])?,
        _ => roc_from_likelihoods(pair.p0().row(x), pair.p1().row(x))?,
    };
    let rows: Vec<Vec<String>> = curve
        .vertices()
        .iter()
        .zip(curve.tests())
        .enumerate()
        .map(|(k, (&(fa, d), t))| {
            let (r, tau) = rule(t);
            vec![
                k.to_string(),
                num(fa),
                num(d),
                curve.slopes().get(k).map(|&s| num(s)).unwrap_or_default(),
                r.into(),
                tau,
            ]
        })
        .collect();
    let header = ["vertex", "p_fa", "p_d", "slope_right", "rule", "lr_threshold"].map(String::from);
    run.csv("roc.csv", &header, &rows)?;
    Ok(Command::Roc(a.clone()))
}
