use std::io::Write;

use microagg::io::{format_roles, write_csv};
use microagg::{achieved_correlation, synth_generate, SynthConfig};

use crate::{emit, io_failure, Failure, SynthArgs};

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = SynthConfig::new(args.n, args.qi, args.rho, args.seed);
    let table = synth_generate(&cfg)?;
    write_csv(&table, &args.output)?;
    if let Some(path) = &args.roles {
        std::fs::write(path, format_roles(table.specs())).map_err(|e| io_failure(&path.display().to_string(), e))?;
    }
    emit(
        out,
        format_args!(
            "wrote {} records ({} QIs) to {}; achieved correlation {:.4} (target {})",
            table.n(),
            args.qi,
            args.output.display(),
            achieved_correlation(&table),
            args.rho
        ),
    )
}
