use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Layer sizes of a replica network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicaArchitecture {
    pub input_size: usize,
    pub fc_sizes: [usize; 2],
    pub lstm_units: usize,
    pub lstm_layers: usize,
    pub decoder_units: usize,
    pub output_size: usize,
}

impl ReplicaArchitecture {
    /// Head-direction replica: 37 inputs, 37 units, 12-unit decoder, one output pair.
    pub fn hdcn() -> Self {
        Self::uniform(37, 37, 12, 2)
    }

    /// Grid-cell replica: 111 inputs, 111 units, 37-unit decoder, three output pairs.
    pub fn gcn() -> Self {
        Self::uniform(111, 111, 37, 6)
    }

    /// Two FC layers and three recurrent layers of `h` units each.
    pub fn uniform(input_size: usize, h: usize, decoder_units: usize, output_size: usize) -> Self {
        Self {
            input_size,
            fc_sizes: [h, h],
            lstm_units: h,
            lstm_layers: 3,
            decoder_units,
            output_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            self.input_size,
            self.fc_sizes[0],
            self.fc_sizes[1],
            self.lstm_units,
            self.lstm_layers,
            self.decoder_units,
            self.output_size,
        ];
        if sizes.contains(&0) {
            return Err(Error::InvalidParams("every layer needs at least one unit".into()));
        }
        if self.output_size % 2 != 0 {
            return Err(Error::InvalidParams("outputs come in (num, den) pairs".into()));
        }
        Ok(())
    }

    /// Named tensors in storage order.
    pub fn layout(&self) -> Vec<TensorSpec> {
        let h = self.lstm_units;
        let [f1, f2] = self.fc_sizes;
        let mut out = Vec::new();
        let mut push = |name: String, rows: usize, cols: usize| out.push(TensorSpec { name, rows, cols });
        push("fc1.weight".into(), f1, self.input_size);
        push("fc1.bias".into(), f1, 1);
        push("fc2.weight".into(), f2, f1);
        push("fc2.bias".into(), f2, 1);
        for l in 0..self.lstm_layers {
            let input = if l == 0 { f2 } else { h };
            push(format!("lstm{l}.w_ih"), 4 * h, input);
            push(format!("lstm{l}.w_hh"), 4 * h, h);
            push(format!("lstm{l}.bias"), 4 * h, 1);
        }
        push("decoder.weight".into(), self.decoder_units, h);
        push("decoder.bias".into(), self.decoder_units, 1);
        push("output.weight".into(), self.output_size, self.decoder_units);
        push("output.bias".into(), self.output_size, 1);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().iter().map(TensorSpec::len).sum()
    }

    /// Compares two architectures tensor by tensor and names the first difference.
    pub fn check_matches(&self, declared: &ReplicaArchitecture) -> Result<()> {
        let (mine, theirs) = (self.layout(), declared.layout());
        for (a, b) in mine.iter().zip(&theirs) {
            if a != b {
                return Err(Error::Shape {
                    what: format!("layer {} ({}x{} declared {}x{})", a.name, a.rows, a.cols, b.rows, b.cols),
                    expected: a.len(),
                    found: b.len(),
                });
            }
        }
        if mine.len() != theirs.len() {
            return Err(Error::shape("tensor count", mine.len(), theirs.len()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Offsets of every tensor inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Dense {
    pub w: usize,
    pub b: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Recurrent {
    pub w_ih: usize,
    pub w_hh: usize,
    pub b: usize,
    pub input: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Offsets {
    pub fc: [Dense; 2],
    pub lstm: Vec<Recurrent>,
    pub decoder: Dense,
    pub output: Dense,
}

impl Offsets {
    pub fn of(arch: &ReplicaArchitecture) -> Self {
        let h = arch.lstm_units;
        let mut at = 0;
        let mut dense = |rows: usize, cols: usize| {
            let d = Dense { w: at, b: at + rows * cols, rows, cols };
            at += rows * cols + rows;
            d
        };
        let fc = [
            dense(arch.fc_sizes[0], arch.input_size),
            dense(arch.fc_sizes[1], arch.fc_sizes[0]),
        ];
        let mut lstm = Vec::with_capacity(arch.lstm_layers);
        for l in 0..arch.lstm_layers {
            let input = if l == 0 { arch.fc_sizes[1] } else { h };
            let w_ih = at;
            let w_hh = w_ih + 4 * h * input;
            let b = w_hh + 4 * h * h;
            at = b + 4 * h;
            lstm.push(Recurrent { w_ih, w_hh, b, input });
        }
        let mut dense = |rows: usize, cols: usize| {
            let d = Dense { w: at, b: at + rows * cols, rows, cols };
            at += rows * cols + rows;
            d
        };
        let decoder = dense(arch.decoder_units, h);
        let output = dense(arch.output_size, arch.decoder_units);
        Self { fc, lstm, decoder, output }
    }
}

/// Flat parameter vector plus the architecture that gives it meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaWeights<T = f32> {
    arch: ReplicaArchitecture,
    params: Vec<T>,
    pub(crate) offsets: Offsets,
}

impl<T: Float> ReplicaWeights<T> {
    pub fn zeros(arch: ReplicaArchitecture) -> Result<Self> {
        arch.validate()?;
        let params = alloc::vec![T::zero(); arch.parameter_count()];
        let offsets = Offsets::of(&arch);
        Ok(Self { arch, params, offsets })
    }

    /// Uniform `±1/√fan_in` weights, zero biases except the forget gate at +1.
    pub fn init(arch: ReplicaArchitecture, seed: u64) -> Result<Self> {
        let mut w = Self::zeros(arch)?;
        let mut rng = SplitMix64::new(seed);
        let layout = w.arch.layout();
        let h = w.arch.lstm_units;
        let mut at = 0;
        for t in &layout {
            let block = &mut w.params[at..at + t.len()];
            if t.cols > 1 {
                let bound = 1.0 / (t.cols as f64).sqrt();
                for p in block.iter_mut() {
                    *p = T::from(rng.uniform(-bound, bound)).unwrap();
                }
            } else if t.name.starts_with("lstm") {
                block[h..2 * h].iter_mut().for_each(|p| *p = T::one());
            }
            at += t.len();
        }
        Ok(w)
    }

    pub fn from_params(arch: ReplicaArchitecture, params: Vec<T>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.parameter_count() {
            return Err(Error::shape("parameter vector", arch.parameter_count(), params.len()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("weights".into()));
        }
        let offsets = Offsets::of(&arch);
        Ok(Self { arch, params, offsets })
    }

    pub fn arch(&self) -> &ReplicaArchitecture {
        &self.arch
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// Slice of one named tensor.
    pub fn tensor(&self, name: &str) -> Option<&[T]> {
        let mut at = 0;
        for t in self.arch.layout() {
            if t.name == name {
                return Some(&self.params[at..at + t.len()]);
            }
            at += t.len();
        }
        None
    }

    /// Element-wise conversion, e.g. f32 weights to f64 for gradient checks.
    pub fn cast<U: Float>(&self) -> ReplicaWeights<U> {
        ReplicaWeights {
            arch: self.arch.clone(),
            params: self.params.iter().map(|&p| U::from(p).unwrap()).collect(),
            offsets: self.offsets.clone(),
        }
    }
}
