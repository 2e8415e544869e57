//! File formats: JSON states and matrices, CSV tallies and results, and a
//! raw little-endian binary form for density matrices.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major lists of
//! rows. A state file is recognised by its keys: `sectors` (pure), `gamma`
//! (mixed equatorial) or `density` (general density matrix).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::measurement::OutcomeCounts;
use crate::spectrum::GeneratorSpectrum;
use crate::states::{mixed_es, DensityMatrix, MixedES, PureState};

/// Serde adapter for complex matrices as nested `[re, im]` rows.
pub mod complex_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Parse("matrix rows have unequal lengths".into()));
        }
        Ok(CMat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }
}

/// Serde adapter for complex vectors as `[re, im]` lists.
pub mod complex_vector {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
        let items: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        items.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVec, D::Error> {
        let items: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(CVec::from_iterator(items.len(), items.iter().map(|p| c(p[0], p[1]))))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedFile {
    pub spectrum: GeneratorSpectrum,
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(with = "complex_matrix")]
    pub gamma: CMat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub spectrum: GeneratorSpectrum,
    #[serde(with = "complex_matrix")]
    pub density: CMat,
}

impl From<&MixedES> for MixedFile {
    fn from(m: &MixedES) -> Self {
        Self {
            spectrum: m.spectrum().clone(),
            p: m.probabilities().to_vec(),
            beta: m.betas().to_vec(),
            gamma: m.gamma().clone(),
        }
    }
}

/// Any state the command line accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Mixed(MixedES),
    Density { spectrum: GeneratorSpectrum, rho: DensityMatrix },
}

impl StateInput {
    pub fn spectrum(&self) -> &GeneratorSpectrum {
        match self {
            StateInput::Pure(s) => s.spectrum(),
            StateInput::Mixed(m) => m.spectrum(),
            StateInput::Density { spectrum, .. } => spectrum,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateInput::Pure(s) => s.to_density(),
            StateInput::Mixed(m) => m.to_density(),
            StateInput::Density { rho, .. } => rho.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StateInput::Pure(_) => "pure",
            StateInput::Mixed(_) => "mixed_es",
            StateInput::Density { .. } => "density",
        }
    }
}

pub fn parse_state(text: &str) -> Result<StateInput> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("state file must be a JSON object".into()))?;
    if obj.contains_key("sectors") {
        Ok(StateInput::Pure(serde_json::from_value(value)?))
    } else if obj.contains_key("gamma") {
        let f: MixedFile = serde_json::from_value(value)?;
        Ok(StateInput::Mixed(mixed_es(&f.spectrum, &f.p, &f.beta, &f.gamma)?))
    } else if obj.contains_key("density") {
        let f: DensityFile = serde_json::from_value(value)?;
        if f.density.nrows() != f.spectrum.dim() {
            return Err(Error::DimensionMismatch { expected: f.spectrum.dim(), got: f.density.nrows() });
        }
        Ok(StateInput::Density { rho: DensityMatrix::new(f.density)?, spectrum: f.spectrum })
    } else {
        Err(Error::Parse("state file needs one of the keys sectors, gamma, density".into()))
    }
}

pub fn read_state(path: &Path) -> Result<StateInput> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_to_json(state: &StateInput) -> Result<String> {
    Ok(match state {
        StateInput::Pure(s) => serde_json::to_string_pretty(s)?,
        StateInput::Mixed(m) => serde_json::to_string_pretty(&MixedFile::from(m))?,
        StateInput::Density { spectrum, rho } => {
            serde_json::to_string_pretty(&DensityFile { spectrum: spectrum.clone(), density: rho.matrix().clone() })?
        }
    })
}

/// Row-major little-endian `f64` pairs, no header; the dimension follows
/// from the byte count.
pub fn write_matrix_bin<W: Write>(mut w: W, m: &CMat) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].re.to_le_bytes())?;
            w.write_all(&m[(i, j)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_bin<R: Read>(mut r: R) -> Result<CMat> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse(format!("{} bytes is not a whole number of complex values", bytes.len())));
    }
    let count = bytes.len() / 16;
    let dim = (count as f64).sqrt().round() as usize;
    if dim * dim != count {
        return Err(Error::Parse(format!("{count} complex values do not form a square matrix")));
    }
    let value = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(CMat::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        c(value(k), value(k + 1))
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct CountRow {
    sector: u32,
    parity: i8,
    count: u64,
}

/// `sector,parity,count`; the zero sector is written as sector 0, parity 0.
pub fn write_counts<W: Write>(w: W, counts: &OutcomeCounts) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (k, &n) in counts.labels.iter().enumerate() {
        out.serialize(CountRow { sector: n, parity: 1, count: counts.plus[k] })?;
        out.serialize(CountRow { sector: n, parity: -1, count: counts.minus[k] })?;
    }
    out.serialize(CountRow { sector: 0, parity: 0, count: counts.zero_count })?;
    out.flush()?;
    Ok(())
}

pub fn read_counts<R: Read>(r: R) -> Result<OutcomeCounts> {
    let mut labels: Vec<u32> = Vec::new();
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: CountRow = row?;
        if row.parity != 0 && !labels.contains(&row.sector) {
            labels.push(row.sector);
        }
        rows.push(row);
    }
    let mut counts = OutcomeCounts::empty(labels.clone());
    for row in rows {
        match row.parity {
            0 => counts.zero_count += row.count,
            1 | -1 => {
                let k = labels.iter().position(|&n| n == row.sector).expect("label collected above");
                if row.parity == 1 {
                    counts.plus[k] += row.count;
                } else {
                    counts.minus[k] += row.count;
                }
            }
            p => return Err(Error::Parse(format!("parity must be 1, -1 or 0, got {p}"))),
        }
    }
    Ok(counts)
}

/// `trial,theta_hat`.
pub fn write_estimates<W: Write>(w: W, theta_hats: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "theta_hat"])?;
    for (t, v) in theta_hats.iter().enumerate() {
        out.write_record([t.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Generic writer for a header plus rows of floats.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r.iter().map(f64::to_string))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_spectrum, sz_spectrum};
    use crate::states::{equatorial, noon};

    #[test]
    fn pure_state_round_trip() {
        let s = equatorial(&sz_spectrum(4).unwrap(), &[0.25, 0.75], &[0.1, -0.2], &[0.0, 0.3]).unwrap();
        let text = state_to_json(&StateInput::Pure(s.clone())).unwrap();
        assert_eq!(parse_state(&text).unwrap(), StateInput::Pure(s));
    }

    #[test]
    fn state_file_layout() {
        let text = r#"{"spectrum": {"sectors": [{"n": 1, "g": 1.0}], "zero_sector": 0},
                       "sectors": [{"p": 1.0, "phi": 0.0, "alpha": 1.5707963267948966, "beta": 0.0}],
                       "zero_amp": [0.0, 0.0]}"#;
        let s = parse_state(text).unwrap();
        assert_eq!(s.kind(), "pure");
        let bad = text.replace("\"p\": 1.0", "\"p\": 0.7");
        assert!(matches!(parse_state(&bad), Err(Error::Parse(_))));
        assert!(matches!(parse_state("{\"x\": 1}"), Err(Error::Parse(_))));
    }

    #[test]
    fn mixed_and_density_round_trip() {
        let spec = build_spectrum(&[1.0, 2.0, -1.0, -2.0]).unwrap();
        let m = MixedES::dephased(&spec, &[0.4, 0.6], &[0.0, 1.0]).unwrap();
        let text = state_to_json(&StateInput::Mixed(m.clone())).unwrap();
        assert_eq!(parse_state(&text).unwrap(), StateInput::Mixed(m.clone()));
        let d = StateInput::Density { spectrum: spec, rho: m.to_density() };
        let text = state_to_json(&d).unwrap();
        let back = parse_state(&text).unwrap();
        assert_eq!(back.to_density(), d.to_density());
    }

    #[test]
    fn binary_round_trip() {
        let rho = noon(4).unwrap().to_density().into_matrix();
        let mut buf = Vec::new();
        write_matrix_bin(&mut buf, &rho).unwrap();
        assert_eq!(buf.len(), 25 * 16);
        assert_eq!(read_matrix_bin(buf.as_slice()).unwrap(), rho);
        assert!(read_matrix_bin(&buf[..48]).is_err());
    }

    #[test]
    fn counts_round_trip() {
        let counts = OutcomeCounts { labels: vec![1, 2], plus: vec![5, 7], minus: vec![0, 3], zero_count: 2 };
        let mut buf = Vec::new();
        write_counts(&mut buf, &counts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sector,parity,count\n1,1,5\n1,-1,0\n"));
        assert_eq!(read_counts(buf.as_slice()).unwrap(), counts);
    }

    #[test]
    fn estimates_csv() {
        let mut buf = Vec::new();
        write_estimates(&mut buf, &[0.1, 0.25]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial,theta_hat\n0,0.1\n1,0.25\n");
    }
}
