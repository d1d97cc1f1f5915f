//! Text serialization of trained models.
//!
//! Line-oriented key/value format, one record per line:
//!
//! ```text
//! proxyopt-mlp 1
//! layers <n0> <n1> ... <nL>
//! input_center <d values>
//! input_halfrange <d values>
//! target_mean <value>
//! target_std <value>
//! weights<l> <out*in values, row-major>
//! biases<l> <out values>
//! ```
//!
//! Numbers are written with 17 significant digits, which round-trips f64
//! bit-exactly.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::fmt_f64;

use super::{MlpModel, NormalizationSpec};

const MAGIC: &str = "proxyopt-mlp";
const VERSION: u32 = 1;

impl MlpModel {
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("writing model", e);
        writeln!(w, "{MAGIC} {VERSION}").map_err(io)?;
        writeln!(
            w,
            "layers {}",
            self.layer_sizes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )
        .map_err(io)?;
        writeln!(w, "input_center {}", join_f64(&self.norm.input_center)).map_err(io)?;
        writeln!(w, "input_halfrange {}", join_f64(&self.norm.input_halfrange)).map_err(io)?;
        writeln!(w, "target_mean {}", fmt_f64(self.norm.target_mean)).map_err(io)?;
        writeln!(w, "target_std {}", fmt_f64(self.norm.target_std)).map_err(io)?;
        for (l, (wm, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let flat: Vec<f64> = wm.iter().copied().collect();
            writeln!(w, "weights{l} {}", join_f64(&flat)).map_err(io)?;
            writeln!(w, "biases{l} {}", join_f64(b.as_slice().unwrap())).map_err(io)?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<MlpModel> {
        let mut lines = r.lines().enumerate();
        let mut next_line = |key: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    reason: format!("missing `{key}` record"),
                }),
            }
        };

        let (ln, header) = next_line("header")?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(Error::Parse {
                line: ln,
                reason: "not a proxyopt model file".to_string(),
            });
        }
        let version: u32 = parse_field(parts.next(), ln, "version")?;
        if version != VERSION {
            return Err(Error::Parse {
                line: ln,
                reason: format!("unsupported version {version}"),
            });
        }

        let (ln, line) = next_line("layers")?;
        let layer_sizes = parse_record::<usize>(&line, "layers", ln)?;
        if layer_sizes.len() < 3 {
            return Err(Error::Parse {
                line: ln,
                reason: "need at least 3 layer sizes".to_string(),
            });
        }

        let (ln, line) = next_line("input_center")?;
        let input_center = parse_record::<f64>(&line, "input_center", ln)?;
        let (ln, line) = next_line("input_halfrange")?;
        let input_halfrange = parse_record::<f64>(&line, "input_halfrange", ln)?;
        let (ln, line) = next_line("target_mean")?;
        let target_mean = parse_record::<f64>(&line, "target_mean", ln)?[0];
        let (ln, line) = next_line("target_std")?;
        let target_std = parse_record::<f64>(&line, "target_std", ln)?[0];

        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_sizes.len() - 1 {
            let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
            let (ln, line) = next_line("weights")?;
            let flat = parse_record::<f64>(&line, &format!("weights{l}"), ln)?;
            if flat.len() != rows * cols {
                return Err(Error::Parse {
                    line: ln,
                    reason: format!("weights{l}: expected {} values, got {}", rows * cols, flat.len()),
                });
            }
            weights.push(
                Array2::from_shape_vec((rows, cols), flat)
                    .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
            );
            let (ln, line) = next_line("biases")?;
            let b = parse_record::<f64>(&line, &format!("biases{l}"), ln)?;
            if b.len() != rows {
                return Err(Error::Parse {
                    line: ln,
                    reason: format!("biases{l}: expected {rows} values, got {}", b.len()),
                });
            }
            biases.push(Array1::from_vec(b));
        }

        Ok(MlpModel {
            layer_sizes,
            weights,
            biases,
            norm: NormalizationSpec {
                input_center,
                input_halfrange,
                target_mean,
                target_std,
            },
        })
    }

    /// FNV-1a over the raw parameter bits; used to verify that two runs saw
    /// the identical trained proxy.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |v: f64| {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for w in &self.weights {
            w.iter().for_each(|&v| feed(v));
        }
        for b in &self.biases {
            b.iter().for_each(|&v| feed(v));
        }
        self.norm.input_center.iter().for_each(|&v| feed(v));
        self.norm.input_halfrange.iter().for_each(|&v| feed(v));
        feed(self.norm.target_mean);
        feed(self.norm.target_std);
        h
    }
}

fn join_f64(vals: &[f64]) -> String {
    vals.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ")
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse {
            line,
            reason: format!("missing {name}"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line,
            reason: format!("bad {name}"),
        })
}

fn parse_record<T: std::str::FromStr>(line: &str, key: &str, ln: usize) -> Result<Vec<T>> {
    let mut parts = line.split_whitespace();
    let found = parts.next().unwrap_or("");
    if found != key {
        return Err(Error::Parse {
            line: ln,
            reason: format!("expected `{key}`, found `{found}`"),
        });
    }
    let vals: std::result::Result<Vec<T>, _> = parts.map(|p| p.parse()).collect();
    let vals = vals.map_err(|_| Error::Parse {
        line: ln,
        reason: format!("bad value in `{key}`"),
    })?;
    if vals.is_empty() {
        return Err(Error::Parse {
            line: ln,
            reason: format!("empty `{key}` record"),
        });
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::super::build_mlp;
    use super::*;

    #[test]
    fn save_load_bit_exact() {
        let mut m = build_mlp(&[2, 15, 50, 15, 1], 9).unwrap();
        m.norm.target_mean = 123.456789;
        m.norm.target_std = 0.000123;
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let loaded = MlpModel::load(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(m, loaded);
        assert_eq!(m.checksum(), loaded.checksum());
    }

    #[test]
    fn load_rejects_garbage() {
        let bad = b"not a model\n";
        assert!(MlpModel::load(std::io::BufReader::new(&bad[..])).is_err());

        let truncated = b"proxyopt-mlp 1\nlayers 2 4 1\n";
        assert!(MlpModel::load(std::io::BufReader::new(&truncated[..])).is_err());
    }

    #[test]
    fn checksum_distinguishes_models() {
        let a = build_mlp(&[2, 4, 1], 1).unwrap();
        let b = build_mlp(&[2, 4, 1], 2).unwrap();
        assert_ne!(a.checksum(), b.checksum());
    }
}
