pub mod couple;
pub mod fig3;
pub mod fig4;
pub mod generate;
pub mod simulate;

use std::path::Path;

use crate::error::CliError;

/// Writes an artifact file, creating the output directory if needed.
pub fn write_artifact(out_dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join(name), contents)?;
    Ok(())
}
