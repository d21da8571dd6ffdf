//! File formats owned by the calibration step.
//!
//! Calibration points are CSV with columns `rh_frac,temp_c,observed_cr_um_yr`.
//! Calibrated parameters are a flat JSON object with keys `C`, `n`, `Ea`,
//! `R_gas`, `residual_norm` and `converged`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::{CalibrationPoint, CalibrationResult};
use crate::error::{CoreError, Result};
use crate::model::ModelParams;

pub const POINTS_HEADER: [&str; 3] = ["rh_frac", "temp_c", "observed_cr_um_yr"];

pub fn read_points<R: Read>(reader: R) -> Result<Vec<CalibrationPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != POINTS_HEADER {
        return Err(CoreError::Format(format!(
            "expected header {}, got {}",
            POINTS_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize().map(|row| row.map_err(CoreError::from)).collect()
}

pub fn read_points_file(path: impl AsRef<Path>) -> Result<Vec<CalibrationPoint>> {
    read_points(BufReader::new(File::open(path)?))
}

pub fn write_points<W: Write>(writer: W, points: &[CalibrationPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for p in points {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_points_file(path: impl AsRef<Path>, points: &[CalibrationPoint]) -> Result<()> {
    write_points(BufWriter::new(File::create(path)?), points)
}

/// On-disk form of a calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsDocument {
    #[serde(rename = "C")]
    pub c: f64,
    pub n: f64,
    #[serde(rename = "Ea")]
    pub ea: f64,
    #[serde(rename = "R_gas")]
    pub r_gas: f64,
    pub residual_norm: f64,
    pub converged: bool,
}

impl From<&CalibrationResult> for ParamsDocument {
    fn from(r: &CalibrationResult) -> Self {
        Self {
            c: r.params.c,
            n: r.params.n,
            ea: r.params.ea,
            r_gas: r.params.r_gas,
            residual_norm: r.residual_norm,
            converged: r.converged,
        }
    }
}

impl ParamsDocument {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            c: self.c,
            n: self.n,
            ea: self.ea,
            r_gas: self.r_gas,
        }
    }
}

pub fn write_params_file(path: impl AsRef<Path>, doc: &ParamsDocument) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, doc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a parameter file; only the model keys are required.
pub fn read_params_file(path: impl AsRef<Path>) -> Result<ModelParams> {
    #[derive(Deserialize)]
    struct Keys {
        #[serde(rename = "C")]
        c: f64,
        n: f64,
        #[serde(rename = "Ea")]
        ea: f64,
        #[serde(rename = "R_gas")]
        r_gas: f64,
    }
    let k: Keys = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let params = ModelParams {
        c: k.c,
        n: k.n,
        ea: k.ea,
        r_gas: k.r_gas,
    };
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_header_is_enforced() {
        let bad = "rh,temp_c,observed_cr_um_yr\n0.5,20,1\n";
        assert!(matches!(read_points(bad.as_bytes()), Err(CoreError::Format(_))));
        let good = "rh_frac,temp_c,observed_cr_um_yr\n0.5,20,1\n0.6,21,2\n";
        let pts = read_points(good.as_bytes()).unwrap();
        assert_eq!(pts, vec![CalibrationPoint::new(0.5, 20.0, 1.0), CalibrationPoint::new(0.6, 21.0, 2.0)]);
    }

    #[test]
    fn params_document_has_flat_keys() {
        let doc = ParamsDocument {
            c: 1.5e10,
            n: 2.25,
            ea: 50_000.0,
            r_gas: 8.314,
            residual_norm: 0.5,
            converged: true,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.json");
        write_params_file(&path, &doc).unwrap();
        let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let mut keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["C", "Ea", "R_gas", "converged", "n", "residual_norm"]);
        assert_eq!(read_params_file(&path).unwrap(), doc.params());
    }
}
