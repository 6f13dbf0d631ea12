//! Envelope functions h(r) bounding the tail |V − τ²| ≤ h(r)/(1+r).
//!
//! Every family is normalized to be non-decreasing with
//! h(1) ≤ h(r) ≤ 1 + r^{1/10}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_POW_ALPHA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Envelope {
    /// 1 + log(1 + r), clamped.
    Log,
    /// 1 + r^alpha with 0 < alpha ≤ 1/10.
    Pow { alpha: f64 },
    /// Piecewise-linear table of (r, h) pairs, constant beyond the ends.
    Custom { table: Vec<(f64, f64)> },
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope::Log
    }
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        match self {
            Envelope::Log => Ok(()),
            Envelope::Pow { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidParameter(format!("envelope alpha = {alpha} must be positive")));
                }
                if *alpha > MAX_POW_ALPHA {
                    return Err(Error::InvalidParameter(format!(
                        "envelope alpha = {alpha} exceeds 1/10: h must satisfy the normalization h(r) <= 1 + r^(1/10)"
                    )));
                }
                Ok(())
            }
            Envelope::Custom { table } => {
                if table.len() < 2 {
                    return Err(Error::InvalidParameter("custom envelope needs at least two points".into()));
                }
                for w in table.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidParameter("custom envelope radii must increase".into()));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::InvalidParameter("custom envelope must be non-decreasing".into()));
                    }
                }
                if table.iter().any(|&(_, h)| !(h > 0.0)) {
                    return Err(Error::InvalidParameter("custom envelope must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// The family as given, before normalization.
    pub fn raw(&self, r: f64) -> f64 {
        match self {
            Envelope::Log => 1.0 + (1.0 + r).ln(),
            Envelope::Pow { alpha } => 1.0 + r.powf(*alpha),
            Envelope::Custom { table } => {
                let first = table[0];
                let last = table[table.len() - 1];
                if r <= first.0 {
                    return first.1;
                }
                if r >= last.0 {
                    return last.1;
                }
                let i = table.partition_point(|p| p.0 <= r);
                let (r0, h0) = table[i - 1];
                let (r1, h1) = table[i];
                h0 + (h1 - h0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Normalized envelope: max(h(r), h(1)) capped by 1 + r^{1/10}.
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.raw(r).max(self.raw(1.0));
        h.min(1.0 + r.max(0.0).powf(MAX_POW_ALPHA))
    }

    /// Allowed tail deviation h(r)/(1+r).
    pub fn bound(&self, r: f64) -> f64 {
        self.eval(r) / (1.0 + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_alpha_above_tenth_rejected() {
        let err = Envelope::Pow { alpha: 0.2 }.validate().unwrap_err();
        assert!(err.to_string().contains("1/10"));
        assert!(Envelope::Pow { alpha: 0.1 }.validate().is_ok());
    }

    #[test]
    fn normalized_is_monotone_and_capped() {
        for env in [Envelope::Log, Envelope::Pow { alpha: 0.1 }, Envelope::Pow { alpha: 0.05 }] {
            let mut prev = 0.0;
            for i in 1..2000 {
                let r = i as f64 * 5.0;
                let h = env.eval(r);
                assert!(h >= prev);
                assert!(h <= 1.0 + r.powf(0.1) + 1e-15);
                assert!(h > 0.0);
                prev = h;
            }
        }
    }

    #[test]
    fn custom_table_interpolates() {
        let env = Envelope::Custom { table: vec![(1.0, 1.0), (11.0, 2.0)] };
        env.validate().unwrap();
        assert!((env.raw(6.0) - 1.5).abs() < 1e-15);
        assert_eq!(env.raw(100.0), 2.0);
        let bad = Envelope::Custom { table: vec![(1.0, 2.0), (2.0, 1.0)] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let e: Envelope = serde_json::from_str(r#"{"family":"pow","alpha":0.1}"#).unwrap();
        assert_eq!(e, Envelope::Pow { alpha: 0.1 });
        let e: Envelope = serde_json::from_str(r#"{"family":"log"}"#).unwrap();
        assert_eq!(e, Envelope::Log);
    }
}
