//! Masker fixtures: a JSON descriptor next to two binary containers.
//!
//! ```text
//! <dir>/descriptor.json   MaskerDescriptor
//! <dir>/unitary.qdtc      M over [C, S] -> [A, B]
//! <dir>/safe_state.qdtc   ω_S over [S]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Family, Masker};
use crate::qudit::{read_container, write_container, Container};
use crate::{Error, Result};

pub const DESCRIPTOR_FILE: &str = "descriptor.json";
pub const UNITARY_FILE: &str = "unitary.qdtc";
pub const SAFE_FILE: &str = "safe_state.qdtc";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskerDescriptor {
    pub family: Family,
    pub d: usize,
    pub share_names: [String; 2],
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn export_masker(m: &Masker, dir: &Path) -> Result<MaskerDescriptor> {
    std::fs::create_dir_all(dir)?;
    let desc = MaskerDescriptor {
        family: m.family(),
        d: m.d().get(),
        share_names: m.share_names().clone(),
        inputs: m.unitary().in_register().labels().to_vec(),
        outputs: m.unitary().out_register().labels().to_vec(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(DESCRIPTOR_FILE))?), &desc)?;
    write_container(
        &mut BufWriter::new(File::create(dir.join(UNITARY_FILE))?),
        &Container::Unitary(m.unitary().clone()),
    )?;
    write_container(
        &mut BufWriter::new(File::create(dir.join(SAFE_FILE))?),
        &Container::Density(m.safe_state().clone()),
    )?;
    Ok(desc)
}

pub fn import_masker(dir: &Path) -> Result<Masker> {
    let desc: MaskerDescriptor = serde_json::from_reader(BufReader::new(File::open(dir.join(DESCRIPTOR_FILE))?))?;
    let unitary = match read_container(&mut BufReader::new(File::open(dir.join(UNITARY_FILE))?))? {
        Container::Unitary(u) => u,
        _ => return Err(Error::Format(format!("{UNITARY_FILE} does not hold a unitary"))),
    };
    let safe = match read_container(&mut BufReader::new(File::open(dir.join(SAFE_FILE))?))? {
        Container::Density(r) => r,
        _ => return Err(Error::Format(format!("{SAFE_FILE} does not hold a density operator"))),
    };
    let m = Masker::new(desc.family, unitary, safe)?;
    if m.d().get() != desc.d {
        return Err(Error::Format(format!("descriptor says d = {}, unitary has d = {}", desc.d, m.d())));
    }
    let names = [desc.share_names[0].as_str(), desc.share_names[1].as_str()];
    Ok(m.with_share_names(names))
}
