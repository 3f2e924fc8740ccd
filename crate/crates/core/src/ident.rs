//! NARX black-box identification with a single-hidden-layer network.
//!
//! The discrete map `y(k) = F[y(k-1..k-n); u(k-1..k-m)]` is approximated by a
//! multilayer perceptron with one hidden layer (tanh) and a linear output
//! neuron. Training runs in series-parallel form (measured outputs as
//! regressors, one-step prediction); simulation runs in parallel form
//! (`free_run`, the model feeding back its own outputs).
//!
//! Pulse widths are normalized by 400 us and angles by pi/2 rad so weights
//! stay portable across sessions. Training is plain mini-batch Adam on the
//! mean squared one-step error, deterministic for a fixed seed, keeping the
//! weights of the best validation epoch (chronological tail split).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pulse-width normalization constant (us).
pub const INPUT_SCALE: f64 = 400.0;
/// Angle normalization constant (rad).
pub const OUTPUT_SCALE: f64 = std::f64::consts::FRAC_PI_2;
/// Identification sampling period (s).
pub const IDENT_TS: f64 = 0.02;

/// Hidden-layer activation. `Linear` exists for convex training fixtures;
/// identified models use `Tanh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Linear => 1.0,
        }
    }
}

/// Serialized format marker for persisted models.
const MODEL_FORMAT: &str = "nmeskit-narx";
const MODEL_VERSION: u32 = 1;

/// A trained NARX model: lag orders, normalization, and network weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarxModel {
    pub lag_m: usize,
    pub lag_n: usize,
    pub hidden_size: usize,
    pub activation: Activation,
    /// Divisor applied to pulse widths before they enter the network.
    pub input_scale: f64,
    /// Divisor applied to angles before they enter the network.
    pub output_scale: f64,
    /// Sampling period of the training data (s).
    pub sample_time_s: f64,
    /// Hidden weights, row-major `hidden_size x (lag_n + lag_m)`.
    pub w_in: Vec<f64>,
    /// Hidden biases, `hidden_size`.
    pub b_in: Vec<f64>,
    /// Output weights, `hidden_size`.
    pub w_out: Vec<f64>,
    /// Output bias.
    pub b_out: f64,
}

impl NarxModel {
    /// Number of regressors: past outputs then past inputs.
    pub fn feature_len(&self) -> usize {
        self.lag_n + self.lag_m
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden_size * self.feature_len() + 2 * self.hidden_size + 1
    }

    /// Fresh model with uniform `+-sqrt(6/(fan_in+fan_out))` weights.
    pub fn new_random(
        lag_m: usize,
        lag_n: usize,
        hidden_size: usize,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let features = lag_n + lag_m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound_in = (6.0 / (features + hidden_size) as f64).sqrt();
        let bound_out = (6.0 / (hidden_size + 1) as f64).sqrt();
        let w_in = (0..hidden_size * features)
            .map(|_| rng.gen_range(-bound_in..bound_in))
            .collect();
        let w_out = (0..hidden_size)
            .map(|_| rng.gen_range(-bound_out..bound_out))
            .collect();
        Self {
            lag_m,
            lag_n,
            hidden_size,
            activation,
            input_scale: INPUT_SCALE,
            output_scale: OUTPUT_SCALE,
            sample_time_s: IDENT_TS,
            w_in,
            b_in: vec![0.0; hidden_size],
            w_out,
            b_out: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag_m < 1 || self.lag_n < 1 || self.hidden_size < 1 {
            return Err(Error::InvalidParameter(
                "lag orders and hidden size must be >= 1".into(),
            ));
        }
        let features = self.feature_len();
        if self.w_in.len() != self.hidden_size * features
            || self.b_in.len() != self.hidden_size
            || self.w_out.len() != self.hidden_size
        {
            return Err(Error::InvalidParameter("weight shape mismatch".into()));
        }
        let all_finite = self
            .w_in
            .iter()
            .chain(&self.b_in)
            .chain(&self.w_out)
            .chain(std::iter::once(&self.b_out))
            .all(|w| w.is_finite());
        if !all_finite {
            return Err(Error::NonFinite("model weights".into()));
        }
        if self.input_scale <= 0.0 || self.output_scale <= 0.0 || self.sample_time_s <= 0.0 {
            return Err(Error::InvalidParameter(
                "normalization scales and sample time must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn normalize_input(&self, u: f64) -> f64 {
        u / self.input_scale
    }

    pub fn normalize_output(&self, y: f64) -> f64 {
        y / self.output_scale
    }

    pub fn denormalize_output(&self, y: f64) -> f64 {
        y * self.output_scale
    }

    /// Network output in normalized units for a normalized feature row.
    fn forward_normalized(&self, features: &[f64]) -> f64 {
        let n_features = self.feature_len();
        let mut acc = self.b_out;
        for j in 0..self.hidden_size {
            let row = &self.w_in[j * n_features..(j + 1) * n_features];
            let mut z = self.b_in[j];
            for (w, x) in row.iter().zip(features) {
                z += w * x;
            }
            acc += self.w_out[j] * self.activation.apply(z);
        }
        acc
    }

    /// One-step prediction (rad) from a normalized feature row.
    pub fn forward(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_len() {
            return Err(Error::DimensionMismatch {
                got: features.len(),
                expected: self.feature_len(),
            });
        }
        Ok(self.denormalize_output(self.forward_normalized(features)))
    }

    /// All weights flattened as `[w_in, b_in, w_out, b_out]`; the order the
    /// gradient vector uses.
    pub fn weights_flat(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.parameter_count());
        w.extend_from_slice(&self.w_in);
        w.extend_from_slice(&self.b_in);
        w.extend_from_slice(&self.w_out);
        w.push(self.b_out);
        w
    }

    pub fn set_weights_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                got: flat.len(),
                expected: self.parameter_count(),
            });
        }
        let nw = self.w_in.len();
        let nb = self.b_in.len();
        let no = self.w_out.len();
        self.w_in.copy_from_slice(&flat[..nw]);
        self.b_in.copy_from_slice(&flat[nw..nw + nb]);
        self.w_out.copy_from_slice(&flat[nw + nb..nw + nb + no]);
        self.b_out = flat[nw + nb + no];
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let doc: ModelDocument = serde_json::from_str(&text)
            .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format marker {:?}",
                doc.format
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                doc.version
            )));
        }
        doc.model.validate()?;
        Ok(doc.model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: NarxModel,
}

/// Normalized regression rows in series-parallel form: row `k` holds
/// `[y(k-1..k-n), u(k-1..k-m)]` with target `y(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSet {
    pub lag_m: usize,
    pub lag_n: usize,
    /// Row-major `rows x (lag_n + lag_m)`.
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
}

impl RegressionSet {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn cols(&self) -> usize {
        self.lag_n + self.lag_m
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let c = self.cols();
        &self.features[k * c..(k + 1) * c]
    }

    /// Concatenates sets built per session; rows never bridge session
    /// boundaries because each set was built from one contiguous series.
    pub fn pool(sets: &[RegressionSet]) -> Result<RegressionSet> {
        let first = sets.first().ok_or_else(|| {
            Error::InvalidParameter("cannot pool an empty list of regression sets".into())
        })?;
        let (lag_m, lag_n) = (first.lag_m, first.lag_n);
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for s in sets {
            if s.lag_m != lag_m || s.lag_n != lag_n {
                return Err(Error::InvalidParameter(
                    "pooled regression sets must share lag orders".into(),
                ));
            }
            features.extend_from_slice(&s.features);
            targets.extend_from_slice(&s.targets);
        }
        Ok(RegressionSet {
            lag_m,
            lag_n,
            features,
            targets,
        })
    }
}

/// Builds the normalized regression set from one contiguous session series.
pub fn build_regression_set(
    u: &[f64],
    y: &[f64],
    lag_m: usize,
    lag_n: usize,
) -> Result<RegressionSet> {
    if lag_m < 1 || lag_n < 1 {
        return Err(Error::InvalidParameter("lag orders must be >= 1".into()));
    }
    if u.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: y.len(),
        });
    }
    let start = lag_m.max(lag_n);
    if y.len() < start + 1 {
        return Err(Error::SeriesTooShort {
            len: y.len(),
            min: start + 1,
        });
    }
    let cols = lag_n + lag_m;
    let rows = y.len() - start;
    let mut features = Vec::with_capacity(rows * cols);
    let mut targets = Vec::with_capacity(rows);
    for k in start..y.len() {
        for i in 1..=lag_n {
            features.push(y[k - i] / OUTPUT_SCALE);
        }
        for i in 1..=lag_m {
            features.push(u[k - i] / INPUT_SCALE);
        }
        targets.push(y[k] / OUTPUT_SCALE);
    }
    Ok(RegressionSet {
        lag_m,
        lag_n,
        features,
        targets,
    })
}

/// Training hyperparameters. `hidden_size` fixes the network shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Chronological tail fraction held out for validation.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_size: 250,
            learning_rate: 1e-3,
            max_epochs: 500,
            batch_size: 64,
            validation_fraction: 0.2,
            patience: 25,
            seed: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_size < 1 || self.max_epochs < 1 || self.batch_size < 1 || self.patience < 1
        {
            return Err(Error::InvalidParameter(
                "training counts must be positive".into(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Per-epoch losses on normalized targets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub train_rows: usize,
    pub val_rows: usize,
    pub warnings: Vec<String>,
}

/// Mean squared error of the model on the given rows (normalized units).
pub fn batch_loss(model: &NarxModel, data: &RegressionSet, indices: &[usize]) -> f64 {
    let mut acc = 0.0;
    for &k in indices {
        let r = model.forward_normalized(data.row(k)) - data.targets[k];
        acc += r * r;
    }
    acc / indices.len() as f64
}

/// Loss and its analytic gradient over the given rows, flattened in
/// `weights_flat` order.
pub fn batch_gradient(
    model: &NarxModel,
    data: &RegressionSet,
    indices: &[usize],
) -> (f64, Vec<f64>) {
    let features = model.feature_len();
    let hidden = model.hidden_size;
    let mut grad = vec![0.0; model.parameter_count()];
    let (g_w_in, rest) = grad.split_at_mut(hidden * features);
    let (g_b_in, rest) = rest.split_at_mut(hidden);
    let (g_w_out, g_b_out) = rest.split_at_mut(hidden);

    let mut h = vec![0.0; hidden];
    let mut loss = 0.0;
    let inv_n = 1.0 / indices.len() as f64;

    for &k in indices {
        let x = data.row(k);
        let mut y = model.b_out;
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &model.w_in[j * features..(j + 1) * features];
            let mut z = model.b_in[j];
            for (w, xi) in row.iter().zip(x) {
                z += w * xi;
            }
            *hj = model.activation.apply(z);
            y += model.w_out[j] * *hj;
        }
        let r = y - data.targets[k];
        loss += r * r * inv_n;

        let dy = 2.0 * r * inv_n;
        g_b_out[0] += dy;
        for j in 0..hidden {
            g_w_out[j] += dy * h[j];
            let dz = dy * model.w_out[j] * model.activation.derivative_from_output(h[j]);
            g_b_in[j] += dz;
            let g_row = &mut g_w_in[j * features..(j + 1) * features];
            for (g, xi) in g_row.iter_mut().zip(x) {
                *g += dz * xi;
            }
        }
    }
    (loss, grad)
}

/// Trains a tanh-hidden-layer model; see [`train_with_activation`].
pub fn train(data: &RegressionSet, cfg: &TrainConfig) -> Result<(NarxModel, TrainReport)> {
    train_with_activation(data, cfg, Activation::Tanh)
}

/// Mini-batch Adam on the one-step MSE, returning the weights of the best
/// validation epoch. Deterministic for a fixed `cfg.seed`.
pub fn train_with_activation(
    data: &RegressionSet,
    cfg: &TrainConfig,
    activation: Activation,
) -> Result<(NarxModel, TrainReport)> {
    cfg.validate()?;
    let rows = data.rows();
    if rows <= cfg.batch_size {
        return Err(Error::SeriesTooShort {
            len: rows,
            min: cfg.batch_size + 1,
        });
    }

    let val_rows = ((rows as f64 * cfg.validation_fraction).round() as usize).clamp(1, rows - 1);
    let train_rows = rows - val_rows;
    let train_idx: Vec<usize> = (0..train_rows).collect();
    let val_idx: Vec<usize> = (train_rows..rows).collect();

    let mut warnings = Vec::new();
    let target_mean = data.targets[..train_rows].iter().sum::<f64>() / train_rows as f64;
    let target_var = data.targets[..train_rows]
        .iter()
        .map(|t| (t - target_mean).powi(2))
        .sum::<f64>()
        / train_rows as f64;
    if target_var < 1e-15 {
        let msg = "training targets have (near-)zero variance".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let mut model = NarxModel::new_random(data.lag_m, data.lag_n, cfg.hidden_size, activation, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    let n_params = model.parameter_count();
    let mut weights = model.weights_flat();
    let mut adam_m = vec![0.0; n_params];
    let mut adam_v = vec![0.0; n_params];
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut adam_t = 0u64;

    let mut order = train_idx.clone();
    let mut epochs = Vec::with_capacity(cfg.max_epochs);
    let mut best_weights = weights.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stall = 0;

    for epoch in 0..cfg.max_epochs {
        shuffle(&mut order, &mut rng);
        for batch in order.chunks(cfg.batch_size) {
            model.set_weights_flat(&weights)?;
            let (_, grad) = batch_gradient(&model, data, batch);
            adam_t += 1;
            let corr1 = 1.0 - beta1.powi(adam_t as i32);
            let corr2 = 1.0 - beta2.powi(adam_t as i32);
            for i in 0..n_params {
                adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
                adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
                let m_hat = adam_m[i] / corr1;
                let v_hat = adam_v[i] / corr2;
                weights[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + eps);
            }
        }
        model.set_weights_flat(&weights)?;
        let train_mse = batch_loss(&model, data, &train_idx);
        let val_mse = batch_loss(&model, data, &val_idx);
        epochs.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });

        if val_mse < best_val {
            best_val = val_mse;
            best_epoch = epoch;
            best_weights.copy_from_slice(&weights);
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.patience {
                break;
            }
        }
    }

    model.set_weights_flat(&best_weights)?;
    Ok((
        model,
        TrainReport {
            epochs,
            best_epoch,
            best_val_mse: best_val,
            train_rows,
            val_rows,
            warnings,
        },
    ))
}

/// Fisher-Yates with the caller's RNG; `rand`'s shuffle would work too but
/// this keeps the draw sequence explicit and stable.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

/// Parallel-form simulation: the model feeds back its own outputs.
///
/// `y_init` seeds the first `lag_n` outputs (rad). When `lag_m > lag_n` the
/// positions before `max(lag_m, lag_n)` repeat the last seed value, since no
/// input history exists for them. Aborts if a predicted angle leaves
/// `(-pi, pi)`, which is physically impossible for a knee.
pub fn free_run(model: &NarxModel, u: &[f64], y_init: &[f64]) -> Result<Vec<f64>> {
    model.validate()?;
    if y_init.len() != model.lag_n {
        return Err(Error::DimensionMismatch {
            got: y_init.len(),
            expected: model.lag_n,
        });
    }
    if u.len() < model.lag_m {
        return Err(Error::SeriesTooShort {
            len: u.len(),
            min: model.lag_m,
        });
    }
    let start = model.lag_m.max(model.lag_n);
    let n = u.len();
    let mut y_hat = Vec::with_capacity(n);
    y_hat.extend_from_slice(y_init);
    while y_hat.len() < start.min(n) {
        y_hat.push(*y_init.last().unwrap());
    }

    let mut features = vec![0.0; model.feature_len()];
    for k in start..n {
        for i in 1..=model.lag_n {
            features[i - 1] = model.normalize_output(y_hat[k - i]);
        }
        for i in 1..=model.lag_m {
            features[model.lag_n + i - 1] = model.normalize_input(u[k - i]);
        }
        let y = model.denormalize_output(model.forward_normalized(&features));
        if !y.is_finite() || y.abs() > std::f64::consts::PI {
            return Err(Error::Diverged {
                t: k as f64 * model.sample_time_s,
                theta: y,
            });
        }
        y_hat.push(y);
    }
    y_hat.truncate(n);
    Ok(y_hat)
}

/// Goodness-of-fit of one series against another.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitMetrics {
    /// Pearson correlation; `None` when either series is constant.
    pub pearson: Option<f64>,
    /// `1 - SS_res/SS_tot`; `None` when the reference series is constant.
    pub r_squared: Option<f64>,
    pub mse: f64,
}

/// Pearson correlation, coefficient of determination, and mean squared error
/// of `y_hat` against `y`.
pub fn fit_metrics(y: &[f64], y_hat: &[f64]) -> Result<FitMetrics> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, min: 1 });
    }
    let n = y.len() as f64;
    let mean_y = y.iter().sum::<f64>() / n;
    let mean_h = y_hat.iter().sum::<f64>() / n;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut var_h = 0.0;
    let mut cov = 0.0;
    for (a, b) in y.iter().zip(y_hat) {
        ss_res += (a - b) * (a - b);
        ss_tot += (a - mean_y) * (a - mean_y);
        var_h += (b - mean_h) * (b - mean_h);
        cov += (a - mean_y) * (b - mean_h);
    }
    let mse = ss_res / n;
    let pearson = if ss_tot > 0.0 && var_h > 0.0 {
        Some(cov / (ss_tot.sqrt() * var_h.sqrt()))
    } else {
        None
    };
    let r_squared = if ss_tot > 0.0 {
        Some(1.0 - ss_res / ss_tot)
    } else {
        None
    };
    Ok(FitMetrics {
        pearson,
        r_squared,
        mse,
    })
}
