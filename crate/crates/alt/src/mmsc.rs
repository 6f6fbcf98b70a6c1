use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{AltError, JResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MmscFlavor {
    Bic,
    Aic,
    Hq,
}

impl MmscFlavor {
    pub const ALL: [MmscFlavor; 3] = [MmscFlavor::Bic, MmscFlavor::Aic, MmscFlavor::Hq];

    /// Penalty per overidentifying restriction.
    pub fn kappa(self, n: usize) -> Result<f64, AltError> {
        let need = match self {
            MmscFlavor::Bic => 2,
            MmscFlavor::Aic => 1,
            MmscFlavor::Hq => 3,
        };
        if n < need {
            return Err(AltError::InvalidSampleSize {
                n,
                flavor: self,
                need,
            });
        }
        let nf = n as f64;
        Ok(match self {
            MmscFlavor::Bic => nf.ln(),
            MmscFlavor::Aic => 2.0,
            MmscFlavor::Hq => 2.01 * nf.ln().ln(),
        })
    }
}

impl fmt::Display for MmscFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MmscFlavor::Bic => "gmm-bic",
            MmscFlavor::Aic => "gmm-aic",
            MmscFlavor::Hq => "gmm-hq",
        })
    }
}

impl FromStr for MmscFlavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().trim_start_matches("gmm-") {
            "bic" => Ok(MmscFlavor::Bic),
            "aic" => Ok(MmscFlavor::Aic),
            "hq" => Ok(MmscFlavor::Hq),
            _ => Err(format!(
                "unknown MMSC flavor `{s}` (expected bic, aic or hq)"
            )),
        }
    }
}

/// `J - (|c| - |b|) κ_n`, with `|b|` the number of estimated parameters.
pub fn mmsc(j: &JResult, n: usize, flavor: MmscFlavor) -> Result<f64, AltError> {
    Ok(j.j_stat - j.df as f64 * flavor.kappa(n)?)
}

/// Index of the smallest criterion; ties go to the earlier candidate.
pub fn mmsc_select(js: &[JResult], n: usize, flavor: MmscFlavor) -> Result<usize, AltError> {
    if js.is_empty() {
        return Err(AltError::EmptyCandidates);
    }
    let mut best = (0, f64::INFINITY);
    for (i, j) in js.iter().enumerate() {
        let v = mmsc(j, n, flavor)?;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < best.1 {
            best = (i, v);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gfic_dpanel::{DpanelSpec, Exog};
    use nalgebra::DVector;

    fn jr(j_stat: f64, df: usize) -> JResult {
        JResult {
            spec: DpanelSpec::new(1, Exog::Predetermined, "x"),
            j_stat,
            df,
            p_value: 0.5,
            n_moments: 2 + df,
            n_params: 2,
            beta: DVector::zeros(2),
        }
    }

    #[test]
    fn score_arithmetic() {
        assert!(
            (mmsc(&jr(5.0, 2), 100, MmscFlavor::Bic).unwrap() - (5.0 - 2.0 * 100f64.ln())).abs()
                < 1e-12
        );
        assert!((mmsc(&jr(5.0, 2), 100, MmscFlavor::Bic).unwrap() + 4.2103).abs() < 1e-4);
        for n in [3, 50, 10_000] {
            assert_eq!(mmsc(&jr(5.0, 2), n, MmscFlavor::Aic).unwrap(), 1.0);
            for f in MmscFlavor::ALL {
                assert_eq!(mmsc(&jr(0.0, 0), n, f).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn penalty_ordering() {
        for n in 8..5000 {
            assert!(MmscFlavor::Bic.kappa(n).unwrap() > MmscFlavor::Aic.kappa(n).unwrap());
        }
        for n in 16..5000 {
            let hq = MmscFlavor::Hq.kappa(n).unwrap();
            assert!(
                hq > MmscFlavor::Aic.kappa(n).unwrap() && hq < MmscFlavor::Bic.kappa(n).unwrap()
            );
        }
    }

    #[test]
    fn small_samples_rejected() {
        assert!(MmscFlavor::Hq.kappa(2).is_err());
        assert!(MmscFlavor::Bic.kappa(1).is_err());
    }

    #[test]
    fn flavor_round_trip() {
        for f in MmscFlavor::ALL {
            assert_eq!(f.to_string().parse::<MmscFlavor>().unwrap(), f);
        }
    }
}
