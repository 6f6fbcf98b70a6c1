use gfic_mc::named::{run_named, LagExog, NamedDesign};
use gfic_mc::{CellResult, McResult};

use crate::{CliError, Format, RunConfig};

fn progress(c: &CellResult) {
    eprintln!(
        "cell {} [{}]: {} ok, {} failed",
        c.index, c.label, c.reps_ok, c.reps_failed
    );
    for e in &c.failure_examples {
        eprintln!("  failure: {e}");
    }
}

pub fn simulate(cfg: &RunConfig, design: NamedDesign) -> Result<McResult, CliError> {
    let sink = &mut progress;
    if cfg.fine {
        if design != NamedDesign::LagExog {
            return Err(CliError::Config(
                "--fine applies to the lag-exog design only".into(),
            ));
        }
        return Ok(LagExog::default().fine().apply(&cfg.overrides).run(sink)?);
    }
    Ok(run_named(design, &cfg.overrides, sink)?)
}

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let design = cfg.design.ok_or_else(|| {
        CliError::Config("`simulate` needs --design (table1, lag-exog, refe or slopehet)".into())
    })?;
    let r = simulate(cfg, design)?;
    match cfg.format {
        Format::Json => Ok(r.to_json()? + "\n"),
        Format::Csv => {
            // a file destination also gets the JSON summary alongside
            if let Some(p) = &cfg.out {
                std::fs::write(p.with_extension("json"), r.to_json()? + "\n")?;
            }
            Ok(r.to_csv_string()?)
        }
    }
}
