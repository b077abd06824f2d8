//! Radial potential V on the closed ball.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Radial potential specification. General continuous V is represented by
/// its radial profile only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant { value: f64 },
    /// V(r) = sum_k coeffs[k] r^k.
    PolynomialRadial { coeffs: Vec<f64> },
    /// Piecewise-linear interpolation of (r, v) samples; clamped outside.
    Table { samples: Vec<(f64, f64)> },
}

impl PotentialSpec {
    pub fn constant(v: f64) -> Self {
        PotentialSpec::Constant { value: v }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::PolynomialRadial { coeffs } => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * r + c;
                }
                acc
            }
            PotentialSpec::Table { samples } => {
                if samples.is_empty() {
                    return 0.0;
                }
                if r <= samples[0].0 {
                    return samples[0].1;
                }
                for w in samples.windows(2) {
                    let ((r0, v0), (r1, v1)) = (w[0], w[1]);
                    if r <= r1 {
                        let t = (r - r0) / (r1 - r0);
                        return v0 + t * (v1 - v0);
                    }
                }
                samples.last().unwrap().1
            }
        }
    }

    /// Validate evaluability and boundedness on [0, rho].
    pub fn validate(&self, rho: f64) -> Result<()> {
        match self {
            PotentialSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid_arg("potential", "constant must be finite"));
                }
            }
            PotentialSpec::PolynomialRadial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid_arg(
                        "potential",
                        "polynomial needs at least one finite coefficient",
                    ));
                }
            }
            PotentialSpec::Table { samples } => {
                if samples.len() < 2 {
                    return Err(Error::invalid_arg("potential", "table needs >= 2 samples"));
                }
                for w in samples.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::invalid_arg(
                            "potential",
                            "table radii must increase strictly",
                        ));
                    }
                }
                if samples.iter().any(|(r, v)| !r.is_finite() || !v.is_finite()) {
                    return Err(Error::invalid_arg("potential", "table entries must be finite"));
                }
                if samples.last().unwrap().0 < rho {
                    return Err(Error::invalid_arg(
                        "potential",
                        format!("table must cover [0, {rho}]"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Radii in [0, 0.95 rho] where V < 0, by sign scan on a uniform grid.
    pub fn negativity_radii(&self, rho: f64, scan_points: usize) -> Vec<f64> {
        let m = scan_points.max(16);
        (0..m)
            .map(|i| 0.95 * rho * i as f64 / (m - 1) as f64)
            .filter(|&r| self.eval(r) < 0.0)
            .collect()
    }

    /// Parse the CLI grammar: `const:<v>`, `poly:<c0>,<c1>,...`,
    /// `table:<r0>:<v0>,<r1>:<v1>,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: String| Error::invalid_arg("potential", m);
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected kind:data, got `{s}`")))?;
        match kind {
            "const" => {
                let v: f64 = rest
                    .parse()
                    .map_err(|_| bad(format!("bad constant `{rest}`")))?;
                Ok(PotentialSpec::Constant { value: v })
            }
            "poly" => {
                let coeffs: std::result::Result<Vec<f64>, _> =
                    rest.split(',').map(str::parse).collect();
                Ok(PotentialSpec::PolynomialRadial {
                    coeffs: coeffs.map_err(|_| bad(format!("bad coefficients `{rest}`")))?,
                })
            }
            "table" => {
                let mut samples = Vec::new();
                for item in rest.split(',') {
                    let (r, v) = item
                        .split_once(':')
                        .ok_or_else(|| bad(format!("bad table entry `{item}`")))?;
                    samples.push((
                        r.parse().map_err(|_| bad(format!("bad radius `{r}`")))?,
                        v.parse().map_err(|_| bad(format!("bad value `{v}`")))?,
                    ));
                }
                Ok(PotentialSpec::Table { samples })
            }
            other => Err(bad(format!("unknown potential kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialSpec::Constant { value } => write!(f, "const:{value}"),
            PotentialSpec::PolynomialRadial { coeffs } => {
                write!(f, "poly:")?;
                for (i, c) in coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            PotentialSpec::Table { samples } => {
                write!(f, "table:")?;
                for (i, (r, v)) in samples.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{r}:{v}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let v = PotentialSpec::parse("const:-1").unwrap();
        assert_eq!(v.eval(0.3), -1.0);
        let v = PotentialSpec::parse("poly:-0.25,0,1").unwrap();
        assert_eq!(v.eval(0.5), 0.0);
        assert!(v.eval(0.0) < 0.0 && v.eval(0.9) > 0.0);
        let v = PotentialSpec::parse("table:0:1,1:2").unwrap();
        assert!((v.eval(0.5) - 1.5).abs() < 1e-15);
        assert!(PotentialSpec::parse("junk").is_err());
        assert!(PotentialSpec::parse("poly:a,b").is_err());
    }

    #[test]
    fn negativity_scan() {
        let v = PotentialSpec::parse("poly:-0.25,0,1").unwrap(); // r^2 - 1/4
        let neg = v.negativity_radii(1.0, 200);
        assert!(!neg.is_empty());
        assert!(neg.iter().all(|&r| r < 0.5));
        let pos = PotentialSpec::constant(1.0);
        assert!(pos.negativity_radii(1.0, 200).is_empty());
    }

    #[test]
    fn roundtrip_display() {
        for s in ["const:-1", "poly:-0.25,0,1", "table:0:1,0.5:0,1:2"] {
            let v = PotentialSpec::parse(s).unwrap();
            let v2 = PotentialSpec::parse(&v.to_string()).unwrap();
            assert_eq!(v, v2);
        }
    }
}
