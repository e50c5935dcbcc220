use std::fs::File;
use std::io::BufWriter;

use ankle_core::io::degrees_exact;
use ankle_core::mechkin::MechanismParams;
use ankle_core::reparam::{check_containment, configuration_space_scan, Containment, OperationalRegion};

use crate::args::{ArchArg, ValidateArgs};
use crate::region::{design_params, load_design_for, resolve_region};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidateOutcome {
    Contained { min_margin: f64 },
    /// First failing grid pose, in degrees; `leg` is 1-based.
    Violated { roll_deg: f64, pitch_deg: f64, leg: usize, margin: f64 },
}

impl ValidateOutcome {
    pub fn into_result(self) -> Result<(), CliError> {
        match self {
            ValidateOutcome::Contained { .. } => Ok(()),
            ValidateOutcome::Violated { .. } => Err(CliError::Domain("region not contained".into())),
        }
    }
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<ValidateOutcome, CliError> {
    if args.arch != ArchArg::Rsu {
        return Err(CliError::Input("validate applies to RSU designs".into()));
    }
    let design = load_design_for(args.arch, &args.params)?;
    let resolved = resolve_region(&args.region)?
        .ok_or_else(|| CliError::Input("pass --region <config> or --square <deg>".into()))?;
    let region = resolved.region;
    let MechanismParams::Rsu(params) = design_params(&design, Some(&resolved), None)? else {
        unreachable!("architecture checked above");
    };
    if design.free_params().is_some() {
        println!(
            "realized crank [{:.6}, {:.6}] mm, rod [{:.6}, {:.6}] mm",
            params.crank[0], params.crank[1], params.rod[0], params.rod[1]
        );
    }
    if let Some(path) = &args.out {
        if !(args.window > 0.0 && args.window < 180.0) {
            return Err(CliError::Input("--window must lie in (0, 180) degrees".into()));
        }
        let window = OperationalRegion::square_degrees(args.window, region.step.to_degrees()).map_err(CliError::input)?;
        let map = configuration_space_scan(&params, &window);
        let file = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        map.write_csv(BufWriter::new(file))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let (r, p) = (region.roll, region.pitch);
    let describe = format!(
        "{} grid poses in roll [{}, {}] x pitch [{}, {}] deg",
        region.grid().len(),
        degrees_exact(r.lo),
        degrees_exact(r.hi),
        degrees_exact(p.lo),
        degrees_exact(p.hi)
    );
    let outcome = match check_containment(&params, &region) {
        Containment::Contained { min_margin } => {
            println!("CONTAINED: {describe}, min margin {min_margin:.3e}");
            ValidateOutcome::Contained { min_margin }
        }
        Containment::Violated { pose, leg, margin } => {
            let (roll_deg, pitch_deg) = (degrees_exact(pose.roll), degrees_exact(pose.pitch));
            println!(
                "VIOLATED: leg {leg} unsolvable at roll {roll_deg} deg, pitch {pitch_deg} deg (margin {margin:.3e}); {describe}"
            );
            ValidateOutcome::Violated { roll_deg, pitch_deg, leg, margin }
        }
    };
    Ok(outcome)
}
