//! Flat CSV (`nu,gamma0,rho,psi`) and JSON storage of a grid, its noise
//! profile and one spectrum.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use super::{FrequencyGrid, NoiseProfile, SignalSpectrum};
use crate::error::{check_len, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub grid: FrequencyGrid,
    pub noise: NoiseProfile,
    pub spectrum: SignalSpectrum,
}

#[derive(Serialize, Deserialize)]
struct Row {
    nu: f64,
    gamma0: f64,
    rho: f64,
    psi: f64,
}

impl SpectrumTable {
    pub fn new(grid: FrequencyGrid, noise: NoiseProfile, spectrum: SignalSpectrum) -> Result<Self> {
        check_len("noise profile", grid.len(), noise.len())?;
        check_len("spectrum", grid.len(), spectrum.len())?;
        Ok(Self {
            grid,
            noise,
            spectrum,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for k in 0..self.grid.len() {
            w.serialize(Row {
                nu: self.grid.freqs()[k],
                gamma0: self.noise.gamma0()[k],
                rho: self.spectrum.rho()[k],
                psi: self.spectrum.psi()[k],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV form. Band centre and width are inferred from the
    /// frequency column.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let (mut nu, mut gamma0, mut rho, mut psi) = (vec![], vec![], vec![], vec![]);
        for row in r.deserialize() {
            let row: Row = row?;
            nu.push(row.nu);
            gamma0.push(row.gamma0);
            rho.push(row.rho);
            psi.push(row.psi);
        }
        Self::new(
            FrequencyGrid::from_freqs(nu)?,
            NoiseProfile::new(gamma0)?,
            SignalSpectrum::new(rho, psi)?,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        Self::new(t.grid, t.noise, t.spectrum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn table(vals: &[(f64, f64, f64)]) -> SpectrumTable {
        let n = vals.len();
        SpectrumTable::new(
            FrequencyGrid::new(0.25, 0.3, n).unwrap(),
            NoiseProfile::new(vals.iter().map(|v| v.0).collect()).unwrap(),
            SignalSpectrum::new(
                vals.iter().map(|v| v.1).collect(),
                vals.iter().map(|v| v.2).collect(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn csv_and_json_roundtrip_exactly(
            vals in proptest::collection::vec((1e-6f64..1e3, 0.0f64..1e3, -PI..PI), 1..40)
        ) {
            let t = table(&vals);
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            prop_assert!(text.starts_with("nu,gamma0,rho,psi\n"));
            let back = SpectrumTable::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.grid.freqs(), t.grid.freqs());
            prop_assert_eq!(&back.noise, &t.noise);
            prop_assert_eq!(&back.spectrum, &t.spectrum);
            let json = SpectrumTable::from_json(&t.to_json().unwrap()).unwrap();
            prop_assert_eq!(json, t);
        }
    }
}
