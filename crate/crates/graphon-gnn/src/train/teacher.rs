//! Teacher-student data generation on graphon-sampled graphs.
//!
//! A frozen teacher network labels inputs drawn from a signal family:
//! each sample gets a fresh stochastic graph, an input signal read off at
//! the grid points (optionally with additive per-node noise), and the
//! teacher's output on that graph as the target.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gnn::{gnn_forward, Activation, ParamTensor};
use crate::graphon::{sample_stochastic, Graphon, GraphonSignal};
use crate::seed;
use crate::train::{
    grad_distance_estimate, Dataset, GradDistanceEstimate, GrowingTask, Sample, SgdOptions,
    SignalPairSource,
};

#[derive(Debug, Clone, PartialEq)]
enum SignalShape {
    /// The same signal for every sample; randomness then comes from the
    /// graphs (and noise, if any) alone.
    Fixed(GraphonSignal),
    /// Fresh smooth signal per sample with coefficients drawn uniformly:
    /// offset in [-1/4, 1/4), slope and sine amplitude in [-1/2, 1/2).
    /// Every draw has Lipschitz constant below 1.
    RandomSmooth,
}

/// Input-signal distribution for dataset generation: a signal shape plus
/// an additive per-node uniform noise half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFamily {
    shape: SignalShape,
    noise: f64,
}

impl SignalFamily {
    pub fn fixed(signal: GraphonSignal) -> Self {
        SignalFamily { shape: SignalShape::Fixed(signal), noise: 0.0 }
    }

    pub fn random_smooth() -> Self {
        SignalFamily { shape: SignalShape::RandomSmooth, noise: 0.0 }
    }

    pub fn with_noise(mut self, noise: f64) -> Result<Self> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::config(format!("noise must be finite and >= 0, got {noise}")));
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Draws the sample's underlying signal (noise is applied separately,
    /// at the grid points). Consumes the rng in a fixed field order, so a
    /// given stream always yields the same signal.
    pub fn draw_shape(&self, rng: &mut ChaCha8Rng) -> GraphonSignal {
        match &self.shape {
            SignalShape::Fixed(signal) => signal.clone(),
            SignalShape::RandomSmooth => {
                let offset = rng.gen_range(-0.25..0.25);
                let slope = rng.gen_range(-0.5..0.5);
                let sine_amp = rng.gen_range(-0.5..0.5);
                GraphonSignal::Smooth { offset, slope, sine_amp }
            }
        }
    }

    /// Parses `{"family": ..., ..., "noise": <optional>}`. The family is
    /// either `"random_smooth"` or any fixed signal family accepted by
    /// [`GraphonSignal::from_json_value`]; unknown keys are rejected.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("signal family must be a JSON object"))?;
        let mut rest = obj.clone();
        let noise = match rest.remove("noise") {
            None => 0.0,
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::config(format!("noise must be a number, got {v}")))?,
        };
        let family = rest
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("signal family needs a string \"family\" key"))?;
        let base = if family == "random_smooth" {
            if rest.len() != 1 {
                let extra: Vec<&str> =
                    rest.keys().filter(|k| *k != "family").map(String::as_str).collect();
                return Err(Error::config(format!(
                    "unknown signal family key(s): {}",
                    extra.join(", ")
                )));
            }
            SignalFamily::random_smooth()
        } else {
            SignalFamily::fixed(GraphonSignal::from_json_value(&Value::Object(rest))?)
        };
        base.with_noise(noise)
    }
}

/// A graphon, a frozen teacher, and an input family: everything needed to
/// produce labeled epochs at any graph size, plus the signal pairs the
/// gradient-distance estimator consumes.
#[derive(Debug, Clone)]
pub struct TeacherStudentTask {
    graphon: Graphon,
    teacher: ParamTensor,
    hidden: Activation,
    readout: Activation,
    input: SignalFamily,
    samples_per_epoch: usize,
}

impl TeacherStudentTask {
    pub fn new(
        graphon: Graphon,
        teacher: ParamTensor,
        hidden: Activation,
        readout: Activation,
        input: SignalFamily,
        samples_per_epoch: usize,
    ) -> Result<Self> {
        if teacher.input_dim() != 1 {
            return Err(Error::config(format!(
                "teacher must take one input feature (inputs are scalar signals), got {}",
                teacher.input_dim()
            )));
        }
        if samples_per_epoch == 0 {
            return Err(Error::config("samples_per_epoch must be >= 1"));
        }
        Ok(TeacherStudentTask { graphon, teacher, hidden, readout, input, samples_per_epoch })
    }

    pub fn graphon(&self) -> &Graphon {
        &self.graphon
    }

    pub fn teacher(&self) -> &ParamTensor {
        &self.teacher
    }

    pub fn samples_per_epoch(&self) -> usize {
        self.samples_per_epoch
    }
}

/// Generates `m_samples` labeled samples at graph size `n`: per sample a
/// fresh stochastic graph, an input drawn from `family` (noise included),
/// and the teacher's output on that graph as the target. Deterministic
/// per `(n, seed_value)`.
#[allow(clippy::too_many_arguments)]
pub fn teacher_student_dataset(
    graphon: &Graphon,
    teacher: &ParamTensor,
    hidden: Activation,
    readout: Activation,
    n: usize,
    m_samples: usize,
    family: &SignalFamily,
    seed_value: u64,
) -> Result<Dataset> {
    if m_samples == 0 {
        return Err(Error::config("m_samples must be >= 1"));
    }
    let template = graphon.template_graph(n)?;
    let mut samples = Vec::with_capacity(m_samples);
    for j in 0..m_samples as u64 {
        let graph = sample_stochastic(&template, seed::derive(seed_value, &[seed::tag::GRAPH, j]))?;
        let signal = family.draw_shape(&mut seed::stream(seed_value, &[seed::tag::SIGNAL, j]));
        let mut values = signal.sample(n)?;
        if family.noise() > 0.0 {
            let mut rng = seed::stream(seed_value, &[seed::tag::NOISE, j]);
            let half_width = family.noise();
            for v in &mut values {
                *v += rng.gen_range(-half_width..half_width);
            }
        }
        let x = DMatrix::from_column_slice(n, 1, &values);
        let gso = graph.gso();
        let (y, _) = gnn_forward(teacher, &gso, &x, hidden, readout)?;
        samples.push(Sample { gso: Some(gso), x, y });
    }
    Dataset::new(samples)
}

impl GrowingTask for TeacherStudentTask {
    fn sample_epoch(&self, n: usize, seed_value: u64) -> Result<Dataset> {
        teacher_student_dataset(
            &self.graphon,
            &self.teacher,
            self.hidden,
            self.readout,
            n,
            self.samples_per_epoch,
            &self.input,
            seed_value,
        )
    }

    fn grad_distance(
        &self,
        params: &ParamTensor,
        opts: &SgdOptions,
        n: usize,
        ref_n: usize,
        trials: usize,
        seed_value: u64,
    ) -> Result<Option<GradDistanceEstimate>> {
        grad_distance_estimate(
            params,
            &self.graphon,
            n,
            ref_n,
            trials,
            self,
            opts.hidden,
            opts.readout,
            opts.loss,
            seed_value,
        )
        .map(Some)
    }
}

impl SignalPairSource for TeacherStudentTask {
    /// Input: a fresh (noise-free) signal from the family, which is
    /// evaluable at any size. Label: the teacher's output on the
    /// reference graph, read back as per-feature step signals so smaller
    /// graphs subsample it consistently.
    fn draw_pair(
        &self,
        ref_gso: &DMatrix<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<GraphonSignal>, Vec<GraphonSignal>)> {
        let x_sig = self.input.draw_shape(rng);
        let ref_n = ref_gso.nrows();
        let x = DMatrix::from_column_slice(ref_n, 1, &x_sig.sample(ref_n)?);
        let (y, _) = gnn_forward(&self.teacher, ref_gso, &x, self.hidden, self.readout)?;
        let y_sigs = (0..y.ncols())
            .map(|c| GraphonSignal::step(y.column(c).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok((vec![x_sig], y_sigs))
    }
}

#[cfg(test)]
pub(crate) fn test_task(samples_per_epoch: usize) -> TeacherStudentTask {
    use crate::gnn::project_nonamplifying;
    let raw = ParamTensor::random_init(&[1, 3, 1], 2, 1234).unwrap();
    let teacher = project_nonamplifying(&raw, 0.0).unwrap();
    TeacherStudentTask::new(
        Graphon::Additive,
        teacher,
        Activation::Tanh,
        Activation::Identity,
        SignalFamily::random_smooth(),
        samples_per_epoch,
    )
    .unwrap()
}
