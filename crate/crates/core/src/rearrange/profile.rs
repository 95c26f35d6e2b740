use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// Constant `value[i]` on `[t[i], t[i+1])`.
    Step,
    /// Linear interpolation between breakpoints.
    Linear,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Step => "step",
            ProfileKind::Linear => "linear",
        })
    }
}

/// Function on `[0, inf)` given by breakpoints. Beyond the last breakpoint the
/// final value is returned; before the first, the first value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    kind: ProfileKind,
    t: Vec<f64>,
    values: Vec<f64>,
}

impl Profile1D {
    pub fn new(kind: ProfileKind, t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != values.len() {
            return Err(Error::arg(format!(
                "profile needs matching nonempty columns, got {} and {}",
                t.len(),
                values.len()
            )));
        }
        if !(t[0].is_finite() && t[0] >= 0.0) {
            return Err(Error::arg(format!("breakpoint {} is negative", t[0])));
        }
        if let Some(w) = t
            .windows(2)
            .position(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::arg(format!(
                "breakpoints must increase strictly ({} then {})",
                t[w],
                t[w + 1]
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeValue { index, value });
        }
        Ok(Self { kind, t, values })
    }

    pub(crate) fn from_parts_unchecked(kind: ProfileKind, t: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(Self::new(kind, t.clone(), values.clone()).is_ok());
        Self { kind, t, values }
    }

    pub fn zero() -> Self {
        Self {
            kind: ProfileKind::Step,
            t: vec![0.0],
            values: vec![0.0],
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last_breakpoint(&self) -> f64 {
        *self.t.last().expect("nonempty")
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        // index of the last breakpoint <= t
        let i = self.t.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        let i = i - 1;
        if i + 1 == self.t.len() {
            return self.values[i];
        }
        match self.kind {
            ProfileKind::Step => self.values[i],
            ProfileKind::Linear => {
                let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
                self.values[i] + w * (self.values[i + 1] - self.values[i])
            }
        }
    }

    /// Measure of `{t >= 0 : p(t) > alpha}` for a nonincreasing step profile.
    pub fn superlevel_length(&self, alpha: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.t.len() {
            if self.values[i] > alpha {
                match self.t.get(i + 1) {
                    Some(next) => total += next - self.t[i],
                    None => return f64::INFINITY,
                }
            }
        }
        total
    }

    /// Two-column text table preceded by `# profile step|linear`.
    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# profile {}", self.kind)?;
        writeln!(w, "# t value")?;
        for (t, v) in self.t.iter().zip(&self.values) {
            writeln!(w, "{t:.16e} {v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_table(&self) -> String {
        let mut buf = Vec::new();
        self.write_table(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_table<R: BufRead>(r: R) -> Result<Self> {
        let mut kind = None;
        let mut t = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut words = rest.split_whitespace();
                if words.next() == Some("profile") {
                    kind = Some(match words.next() {
                        Some("step") => ProfileKind::Step,
                        Some("linear") => ProfileKind::Linear,
                        other => {
                            return Err(Error::Format(format!("unknown profile kind {other:?}")))
                        }
                    });
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Format(format!(
                    "line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}: {s:?}", lineno + 1)))
            };
            t.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        let kind = kind.ok_or_else(|| Error::Format("missing '# profile' header".into()))?;
        Self::new(kind, t, values).map_err(|e| Error::Format(e.to_string()))
    }
}
