//! `export-data`: a case's task datasets as CSV plus the schema file.

use replayforge_core::scenario::{build_tasks, export_tasks, SequenceSpec};

use crate::config::base_seed;
use crate::{ExportArgs, Failure};

pub fn cmd_export_data(args: &ExportArgs) -> Result<(), Failure> {
    let seed = match args.seed {
        Some(s) => s,
        None => base_seed()?,
    };
    let spec = SequenceSpec::from_case(args.case, args.samples, seed)
        .and_then(|s| s.validate().map(|()| s))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let tasks = build_tasks(&spec).map_err(|e| Failure::Runtime(e.to_string()))?;
    let paths = export_tasks(&tasks, &args.out).map_err(|e| Failure::Runtime(e.to_string()))?;
    for p in &paths {
        println!("{}", p.display());
    }
    eprintln!("wrote {} task files and a schema to {}", tasks.len(), args.out.display());
    Ok(())
}
