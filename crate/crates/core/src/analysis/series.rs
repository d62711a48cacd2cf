use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::NormSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub name: String,
    pub values: Vec<f64>,
}

/// Norm time series. Columns keep their insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub lambda_big: Vec<f64>,
    pub tracks: Vec<Track>,
    pub blowup: Vec<bool>,
    /// run id of the producing configuration
    pub metadata: String,
}

pub fn lm_name(m: f64) -> String {
    format!("L{m}")
}

impl NormSeries {
    pub fn new(metadata: impl Into<String>, names: &[&str]) -> Self {
        Self {
            metadata: metadata.into(),
            tracks: names.iter().map(|n| Track { name: n.to_string(), values: Vec::new() }).collect(),
            ..Self::default()
        }
    }

    /// Empty series with the simulation columns for the given L^m list.
    pub fn for_run(m_list: &[f64], weighted: bool, run_id: String) -> Self {
        let mut names: Vec<String> = Vec::new();
        if m_list.contains(&1.0) {
            names.push("L1".into());
        }
        names.extend(["L2", "H1_seminorm", "energy", "Linf"].map(String::from));
        for &m in m_list {
            if m != 1.0 && m != 2.0 {
                names.push(lm_name(m));
            }
        }
        if weighted {
            names.extend(["weighted_L2", "weighted_H1", "weighted_saturated"].map(String::from));
        }
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Self::new(run_id, &refs)
    }

    /// Series from explicit columns, mainly for synthetic data.
    pub fn from_columns(times: Vec<f64>, lambda_big: Vec<f64>, tracks: Vec<(&str, Vec<f64>)>) -> Result<Self> {
        let len = times.len();
        if lambda_big.len() != len || tracks.iter().any(|(_, v)| v.len() != len) {
            return Err(Error::Parse("columns of unequal length".into()));
        }
        if lambda_big.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("Lambda must be strictly increasing".into()));
        }
        Ok(Self {
            times,
            lambda_big,
            tracks: tracks.into_iter().map(|(n, v)| Track { name: n.to_string(), values: v }).collect(),
            blowup: vec![false; len],
            metadata: String::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn track(&self, name: &str) -> Option<&[f64]> {
        self.tracks.iter().find(|t| t.name == name).map(|t| t.values.as_slice())
    }

    pub fn blew_up(&self) -> bool {
        self.blowup.iter().any(|&b| b)
    }

    pub fn push(&mut self, s: &NormSample, blowup: bool) {
        self.times.push(s.t);
        self.lambda_big.push(s.big_lambda);
        self.blowup.push(blowup);
        for track in &mut self.tracks {
            let v = match track.name.as_str() {
                "L2" => s.l2,
                "H1_seminorm" => s.h1_seminorm,
                "energy" => s.energy,
                "Linf" => s.linf,
                "weighted_L2" => s.weighted.as_ref().map_or(f64::NAN, |w| w.l2),
                "weighted_H1" => s.weighted.as_ref().map_or(f64::NAN, |w| w.h1),
                "weighted_saturated" => s.weighted.as_ref().map_or(f64::NAN, |w| f64::from(u8::from(w.saturated || w.truncated))),
                name => s.lm.iter().find(|(m, _)| lm_name(*m) == name).map_or(f64::NAN, |(_, v)| *v),
            };
            track.values.push(v);
        }
    }

    /// CSV with a `# run <id>` comment line, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.metadata.is_empty() {
            let _ = writeln!(out, "# run {}", self.metadata);
        }
        out.push_str("t,Lambda_t");
        for t in &self.tracks {
            out.push(',');
            out.push_str(&t.name);
        }
        out.push_str(",blowup_flag\n");
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e},{:.16e}", self.times[i], self.lambda_big[i]);
            for t in &self.tracks {
                let _ = write!(out, ",{:.16e}", t.values[i]);
            }
            let _ = writeln!(out, ",{}", u8::from(self.blowup[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = String::new();
        let mut lines = text.lines().filter(|l| {
            if let Some(id) = l.strip_prefix("# run ") {
                metadata = id.trim().to_string();
            }
            !l.starts_with('#') && !l.trim().is_empty()
        });
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty series file".into()))?.split(',').map(str::trim).collect();
        if header.len() < 2 || header[0] != "t" || header[1] != "Lambda_t" {
            return Err(Error::Parse("series header must start with t,Lambda_t".into()));
        }
        let flag_col = header.iter().position(|&h| h == "blowup_flag");
        let names: Vec<(usize, &str)> = header.iter().enumerate().skip(2).filter(|(i, _)| Some(*i) != flag_col).map(|(i, h)| (i, *h)).collect();
        let mut s = Self { tracks: names.iter().map(|(_, n)| Track { name: n.to_string(), values: Vec::new() }).collect(), ..Self::default() };
        for (row, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != header.len() {
                return Err(Error::Parse(format!("row {} has {} cells, expected {}", row + 1, cells.len(), header.len())));
            }
            let num = |c: &str| c.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad number `{c}`", row + 1)));
            s.times.push(num(cells[0])?);
            s.lambda_big.push(num(cells[1])?);
            for (k, (i, _)) in names.iter().enumerate() {
                s.tracks[k].values.push(num(cells[*i])?);
            }
            s.blowup.push(flag_col.is_some_and(|c| cells[c] == "1"));
        }
        s.metadata = metadata;
        Ok(s)
    }
}
