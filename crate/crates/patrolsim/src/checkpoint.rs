//! GAN checkpoints: a JSON document holding a format tag, a version and the
//! full model (both networks, BN running statistics and Adam moments), so a
//! loaded model samples exactly like the one that was saved.

use std::path::Path;

use patrolsim_core::gan::GanModel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT: &str = "patrolsim-gan-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: GanModel,
}

pub fn to_json(model: &GanModel) -> String {
    #[derive(Serialize)]
    struct Borrowed<'a> {
        format: &'a str,
        version: u32,
        model: &'a GanModel,
    }
    serde_json::to_string(&Borrowed { format: FORMAT, version: VERSION, model }).expect("model serializes")
}

pub fn from_json(text: &str) -> Result<GanModel> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| CliError::data(format!("checkpoint: {e}")))?;
    if env.format != FORMAT {
        return Err(CliError::data(format!("not a checkpoint: format {:?}", env.format)));
    }
    if env.version != VERSION {
        return Err(CliError::data(format!("checkpoint version {} is not supported (expected {VERSION})", env.version)));
    }
    Ok(env.model)
}

pub fn save(model: &GanModel, path: &Path) -> Result<()> {
    crate::reports::write(path, to_json(model).as_bytes())
}

pub fn load(path: &Path) -> Result<GanModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    from_json(&text)
}
