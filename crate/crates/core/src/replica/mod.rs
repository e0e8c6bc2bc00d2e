//! The learned replica of the attractor networks.
//!
//! Architecture (HDCN: `h = 37`, 12 decoder units, 2 outputs; GCN: `h = 111`,
//! 37 decoder units, 6 outputs):
//!
//! ```text
//! x ─ FC(h, relu) ─ FC(h, relu) ─ LSTM(h) ─ LSTM(h) ─ LSTM(h) ─ Dense(tanh) ─ Dense(linear) ─ y
//! ```
//!
//! The cell equations are written out on [`forward_step`]'s implementation. Gate
//! blocks in `w_ih`, `w_hh` and `bias` are stacked as input, forget, cell, output.
//! Every weight matrix is row-major with one row per output unit. Outputs are
//! `(num, den)` pairs decoded with `atan2(num, den)`.
//!
//! Networks are generic over the float type: training and weight files use `f32`,
//! gradient checks use `f64`.

mod adam;
mod arch;
mod bptt;
mod net;
mod ops;
mod train;

pub use adam::{adam_step, global_norm, AdamConfig, OptimizerState};
pub use arch::{ReplicaArchitecture, ReplicaWeights, TensorSpec};
pub use bptt::{bptt_gradients, sequence_loss, Bptt};
pub use net::{decode_output, forward_sequence, forward_step, HiddenState, Replica};
pub use train::{
    evaluate_loss, train, train_from, EpochLog, EpochSource, Regenerate, Sample, TrainConfig, TrainLog,
    TrainOutcome,
};
