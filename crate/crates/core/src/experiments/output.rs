use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::TrialRecord;
use crate::error::Error;
use crate::logvalue::format_g12;

pub const CSV_HEADER: &str =
    "n,alpha,trial,seed,empty,P_Y,target,dev_pressure,rho_spec,rho_reg,dev_escape,phi,psi,mu_hole";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// One line per record, floats in `%.12g` style, so equal records give equal
/// bytes.
pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let floats = [
            r.p_y,
            r.target,
            r.dev_pressure,
            r.rho_spec,
            r.rho_reg,
            r.dev_escape,
            r.phi,
            r.psi,
            r.mu_hole,
        ];
        s.push_str(&format!(
            "{},{},{},{},{}",
            r.n,
            format_g12(r.alpha),
            r.trial,
            r.seed,
            u8::from(r.empty)
        ));
        for x in floats {
            s.push(',');
            s.push_str(&format_g12(x));
        }
        s.push('\n');
    }
    s
}

pub fn write_records_csv(records: &[TrialRecord], path: &Path) -> Result<(), Error> {
    fs::write(path, records_csv(records)).map_err(io_err(path))
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    writeln!(f).map_err(io_err(path))
}
