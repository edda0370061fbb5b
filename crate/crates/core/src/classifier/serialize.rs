//! Line-based text format for trained models.
//!
//! ```text
//! ctxrec-model 1
//! label WALKING
//! sensors acc
//! cost 0.1
//! trivial 0
//! fallback 0
//! dim 26
//! means <26 values>
//! stds <26 values>
//! masked <26 values of 0 or 1>
//! weights <26 values>
//! intercept -0.25
//! end
//! ```
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so a save/load cycle is exact.

use std::io::{BufRead, Write};

use super::grid::CostSelection;
use super::logistic::LinearModel;
use super::model::{FittedLinear, SensorModel};
use super::standardize::Standardizer;
use super::ClassifierError;
use crate::sensor::Sensor;

pub const MODEL_HEADER: &str = "ctxrec-model";
pub const FORMAT_VERSION: u32 = 1;

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_model<W: Write>(model: &SensorModel, out: &mut W) -> std::io::Result<()> {
    let f = &model.fitted;
    writeln!(out, "{MODEL_HEADER} {FORMAT_VERSION}")?;
    writeln!(out, "label {}", model.label)?;
    let sensors: Vec<&str> = model.sensors.iter().map(|s| s.short_name()).collect();
    writeln!(out, "sensors {}", sensors.join(" "))?;
    writeln!(out, "cost {}", f.model.cost)?;
    writeln!(out, "trivial {}", u8::from(f.trivial))?;
    writeln!(out, "fallback {}", u8::from(f.selection.fallback))?;
    writeln!(out, "dim {}", f.model.dim())?;
    writeln!(out, "means {}", join(f.standardizer.means.iter().copied()))?;
    writeln!(out, "stds {}", join(f.standardizer.stds.iter().copied()))?;
    writeln!(
        out,
        "masked {}",
        f.standardizer
            .fully_masked
            .iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(" ")
    )?;
    writeln!(out, "weights {}", join(f.model.weights.iter().copied()))?;
    writeln!(out, "intercept {}", f.model.intercept)?;
    writeln!(out, "end")
}

pub fn model_to_string(model: &SensorModel) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("model text is utf-8")
}

/// Reads `key value...` lines while tracking line numbers for errors.
pub struct LineReader<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> LineReader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner, line: 0 }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn error(&self, message: impl Into<String>) -> ClassifierError {
        ClassifierError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    /// Next non-blank line.
    pub fn next_line(&mut self) -> Result<String, ClassifierError> {
        loop {
            let mut buf = String::new();
            let n = self
                .inner
                .read_line(&mut buf)
                .map_err(|e| self.error(e.to_string()))?;
            if n == 0 {
                self.line += 1;
                return Err(self.error("unexpected end of input"));
            }
            self.line += 1;
            let t = buf.trim();
            if !t.is_empty() {
                return Ok(t.to_string());
            }
        }
    }

    /// Value text of the next line, which must start with `key`.
    pub fn expect(&mut self, key: &str) -> Result<String, ClassifierError> {
        let line = self.next_line()?;
        let (k, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        if k != key {
            return Err(self.error(format!("expected `{key}`, found `{k}`")));
        }
        Ok(rest.trim().to_string())
    }

    pub fn expect_f64(&mut self, key: &str) -> Result<f64, ClassifierError> {
        let v = self.expect(key)?;
        v.parse().map_err(|_| self.error(format!("invalid number `{v}`")))
    }

    pub fn expect_usize(&mut self, key: &str) -> Result<usize, ClassifierError> {
        let v = self.expect(key)?;
        v.parse().map_err(|_| self.error(format!("invalid count `{v}`")))
    }

    pub fn expect_flag(&mut self, key: &str) -> Result<bool, ClassifierError> {
        match self.expect(key)?.as_str() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.error(format!("invalid flag `{other}`"))),
        }
    }

    pub fn expect_vec(&mut self, key: &str, len: usize) -> Result<Vec<f64>, ClassifierError> {
        let v = self.expect(key)?;
        let parsed: Result<Vec<f64>, _> = v.split_whitespace().map(str::parse).collect();
        let parsed = parsed.map_err(|_| self.error(format!("invalid number list for `{key}`")))?;
        if parsed.len() != len {
            return Err(self.error(format!(
                "`{key}` has {} values, expected {len}",
                parsed.len()
            )));
        }
        Ok(parsed)
    }

    pub fn expect_header(&mut self, header: &str) -> Result<(), ClassifierError> {
        let v = self.expect(header)?;
        let version: u32 = v
            .parse()
            .map_err(|_| self.error(format!("invalid format version `{v}`")))?;
        if version != FORMAT_VERSION {
            return Err(self.error(format!("unsupported format version {version}")));
        }
        Ok(())
    }
}

pub fn read_model_from<R: BufRead>(r: &mut LineReader<R>) -> Result<SensorModel, ClassifierError> {
    r.expect_header(MODEL_HEADER)?;
    let label = r.expect("label")?;
    if label.is_empty() {
        return Err(r.error("empty label"));
    }
    let sensors_text = r.expect("sensors")?;
    let sensors: Vec<Sensor> = sensors_text
        .split_whitespace()
        .map(|s| s.parse::<Sensor>().map_err(|e| r.error(e.to_string())))
        .collect::<Result<_, _>>()?;
    let cost = r.expect_f64("cost")?;
    let trivial = r.expect_flag("trivial")?;
    let fallback = r.expect_flag("fallback")?;
    let dim = r.expect_usize("dim")?;
    let expected: usize = sensors.iter().map(|s| s.dim()).sum();
    if dim != expected {
        return Err(r.error(format!("dim {dim} does not match sensors ({expected})")));
    }
    let means = r.expect_vec("means", dim)?;
    let stds = r.expect_vec("stds", dim)?;
    if stds.iter().any(|&s| !(s > 0.0)) {
        return Err(r.error("standard deviations must be positive"));
    }
    let masked = r.expect_vec("masked", dim)?;
    let weights = r.expect_vec("weights", dim)?;
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(r.error("weights must be finite"));
    }
    let intercept = r.expect_f64("intercept")?;
    r.expect("end")?;
    Ok(SensorModel {
        label,
        sensors,
        fitted: FittedLinear {
            standardizer: Standardizer {
                means,
                stds,
                fully_masked: masked.iter().map(|&m| m != 0.0).collect(),
            },
            model: LinearModel {
                weights,
                intercept,
                cost,
            },
            selection: CostSelection {
                cost,
                fallback,
                validation_f1: Vec::new(),
            },
            trivial,
        },
    })
}

pub fn read_model<R: BufRead>(input: R) -> Result<SensorModel, ClassifierError> {
    read_model_from(&mut LineReader::new(input))
}

pub fn model_from_str(text: &str) -> Result<SensorModel, ClassifierError> {
    read_model(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SensorModel {
        SensorModel {
            label: "WALKING".into(),
            sensors: vec![Sensor::Loc],
            fitted: FittedLinear {
                standardizer: Standardizer {
                    means: (0..17).map(|i| i as f64 * 0.1 + 1e-17).collect(),
                    stds: (0..17).map(|i| 1.0 / (i as f64 + 3.0)).collect(),
                    fully_masked: (0..17).map(|i| i == 4).collect(),
                },
                model: LinearModel {
                    weights: (0..17).map(|i| (i as f64).sin() * 1e-5).collect(),
                    intercept: -std::f64::consts::PI,
                    cost: 0.01,
                },
                selection: CostSelection {
                    cost: 0.01,
                    fallback: false,
                    validation_f1: Vec::new(),
                },
                trivial: false,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let text = model_to_string(&m);
        assert_eq!(model_from_str(&text).unwrap(), m);
        assert_eq!(model_to_string(&model_from_str(&text).unwrap()), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = model_to_string(&sample()).replace("dim 17", "dim 16");
        match model_from_str(&text) {
            Err(ClassifierError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let bad = model_to_string(&sample()).replace("ctxrec-model 1", "ctxrec-model 9");
        assert!(model_from_str(&bad).is_err());
    }
}
