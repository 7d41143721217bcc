//! Instrument transformer, control cable/burden and IED stages.
//!
//! Magnitudes are per-unit and angles radians throughout; accuracy-region
//! polygons are the one place angles appear in minutes, matching how the
//! regions are published.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::GmmParams;
use crate::error::{Error, Result};

const MINUTES_PER_RADIAN: f64 = 180.0 * 60.0 / std::f64::consts::PI;

pub fn minutes_to_radians(minutes: f64) -> f64 {
    minutes / MINUTES_PER_RADIAN
}

pub fn radians_to_minutes(radians: f64) -> f64 {
    radians * MINUTES_PER_RADIAN
}

/// Ground-truth phasor sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: f64,
    pub v_true: f64,
    pub delta_v_true: f64,
    pub i_true: f64,
    pub delta_i_true: f64,
}

impl TruthRecord {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.t, self.v_true, self.delta_v_true, self.i_true, self.delta_i_true]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("truth record has non-finite values"));
        }
        if self.v_true < 0.0 || self.i_true < 0.0 {
            return Err(Error::invalid("truth magnitudes must be non-negative"));
        }
        Ok(())
    }

    pub fn as_phasors(&self) -> PhasorReading {
        PhasorReading {
            v: self.v_true,
            delta_v: self.delta_v_true,
            i: self.i_true,
            delta_i: self.delta_i_true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformerKind {
    Vt,
    Ct,
}

/// Accuracy-class parallelogram in (ratio correction factor, phase angle
/// minutes) coordinates. Vertices are ordered around the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRegion {
    pub kind: TransformerKind,
    pub class_value: f64,
    pub vertices: [(f64, f64); 4],
}

/// Accuracy classes shipped with standard-derived default regions.
pub const STANDARD_CLASSES: [f64; 3] = [0.3, 0.6, 1.2];

/// Minutes of phase angle per unit of correction factor in the transformer
/// correction factor relation TCF = RCF ± γ/2600.
const TCF_MINUTES: f64 = 2600.0;

const GEOMETRY_TOL: f64 = 1e-9;

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

impl AccuracyRegion {
    /// Region bounded by RCF ∈ [1−c/100, 1+c/100] and TCF in the same band,
    /// with TCF = RCF + γ/2600 for VTs and TCF = RCF − γ/2600 for CTs.
    pub fn standard(kind: TransformerKind, class_value: f64) -> Result<Self> {
        if !(class_value > 0.0 && class_value.is_finite()) {
            return Err(Error::invalid(format!("accuracy class {class_value} must be > 0")));
        }
        let a = class_value / 100.0;
        let g = 2.0 * a * TCF_MINUTES;
        let (lo, hi) = (1.0 - a, 1.0 + a);
        let vertices = match kind {
            TransformerKind::Vt => [(lo, 0.0), (hi, -g), (hi, 0.0), (lo, g)],
            TransformerKind::Ct => [(lo, -g), (hi, 0.0), (hi, g), (lo, 0.0)],
        };
        let region = Self {
            kind,
            class_value,
            vertices,
        };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        if v.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("accuracy region has non-finite vertices"));
        }
        let edges = [sub(v[1], v[0]), sub(v[2], v[1]), sub(v[3], v[2]), sub(v[0], v[3])];
        let opposite =
            |a: (f64, f64), b: (f64, f64)| (a.0 + b.0).abs() <= GEOMETRY_TOL && (a.1 + b.1).abs() <= GEOMETRY_TOL;
        if !opposite(edges[0], edges[2]) || !opposite(edges[1], edges[3]) {
            return Err(Error::invalid("accuracy region is not a parallelogram"));
        }
        if cross(edges[0], edges[1]).abs() <= GEOMETRY_TOL * GEOMETRY_TOL {
            return Err(Error::invalid("accuracy region is degenerate"));
        }
        if !self.contains(1.0, 0.0) {
            return Err(Error::invalid("accuracy region must contain RCF = 1, angle = 0"));
        }
        Ok(())
    }

    /// Whether (rcf, angle in minutes) lies inside or on the boundary.
    pub fn contains(&self, rcf: f64, minutes: f64) -> bool {
        let p = (rcf, minutes);
        let v = &self.vertices;
        let mut sign = 0.0;
        for i in 0..4 {
            let c = cross(sub(v[(i + 1) % 4], v[i]), sub(p, v[i]));
            if c.abs() <= 1e-15 {
                continue;
            }
            if sign == 0.0 {
                sign = c.signum();
            } else if c.signum() != sign {
                return false;
            }
        }
        true
    }

    fn centroid(&self) -> (f64, f64) {
        let (sx, sy) = self.vertices.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        (sx / 4.0, sy / 4.0)
    }
}

/// Persistent transformer miscalibration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystematicError {
    /// RCF − 1.
    pub ratio_dev: f64,
    /// Phase displacement, radians.
    pub angle_dev: f64,
}

impl SystematicError {
    pub fn rcf(&self) -> f64 {
        1.0 + self.ratio_dev
    }

    pub fn angle_minutes(&self) -> f64 {
        radians_to_minutes(self.angle_dev)
    }
}

/// Uniform draw over the interior of `region`.
pub fn sample_systematic_error<R: Rng + ?Sized>(region: &AccuracyRegion, rng: &mut R) -> Result<SystematicError> {
    region.validate()?;
    let v = &region.vertices;
    let (u, w): (f64, f64) = (rng.random(), rng.random());
    let e1 = sub(v[1], v[0]);
    let e3 = sub(v[3], v[0]);
    let rcf = v[0].0 + u * e1.0 + w * e3.0;
    let minutes = v[0].1 + u * e1.1 + w * e3.1;
    Ok(SystematicError {
        ratio_dev: rcf - 1.0,
        angle_dev: minutes_to_radians(minutes),
    })
}

/// Systematic error at the region's centre.
pub fn centre_systematic_error(region: &AccuracyRegion) -> SystematicError {
    let (rcf, minutes) = region.centroid();
    SystematicError {
        ratio_dev: rcf - 1.0,
        angle_dev: minutes_to_radians(minutes),
    }
}

/// Gaussian with possibly non-zero mean; std = 0 gives a constant offset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: f64,
    pub std: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        let g = Self { mean, std };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !(self.std >= 0.0 && self.std.is_finite()) {
            return Err(Error::invalid(format!(
                "gaussian (mean {}, std {}) needs finite mean and std >= 0",
                self.mean, self.std
            )));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.std * z
    }
}

fn draw_zero_mean<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std * z
}

fn draw_optional<R: Rng + ?Sized>(gmm: &Option<GmmParams>, rng: &mut R) -> f64 {
    gmm.as_ref().map_or(0.0, |g| g.draw(rng))
}

/// Per-sample noise of the transformer, cable and IED stages. An absent
/// mixture disables that random term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageNoiseConfig {
    pub vt_random: Option<GmmParams>,
    pub vt_angle_random: Option<GmmParams>,
    pub ct_random: Option<GmmParams>,
    pub ct_angle_random: Option<GmmParams>,
    pub cable_v: GaussianSpec,
    pub cable_angle_v: GaussianSpec,
    pub cable_i: GaussianSpec,
    pub cable_angle_i: GaussianSpec,
    pub ied_v: f64,
    pub ied_p: f64,
    pub ied_q: f64,
}

impl StageNoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for g in [&self.cable_v, &self.cable_angle_v, &self.cable_i, &self.cable_angle_i] {
            g.validate()?;
        }
        for (name, s) in [("ied_v", self.ied_v), ("ied_p", self.ied_p), ("ied_q", self.ied_q)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("{name} std {s} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Voltage and current magnitude/angle at one stage output.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasorReading {
    pub v: f64,
    pub delta_v: f64,
    pub i: f64,
    pub delta_i: f64,
}

impl PhasorReading {
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.delta_v.is_finite() && self.i.is_finite() && self.delta_i.is_finite()
    }
}

/// Composite transformer errors: ratio errors multiply, angle errors add.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformerErrors {
    pub vt_ratio: f64,
    pub vt_angle: f64,
    pub ct_ratio: f64,
    pub ct_angle: f64,
}

impl TransformerErrors {
    /// Systematic terms plus one random draw each.
    pub fn draw<R: Rng + ?Sized>(
        vt_sys: &SystematicError,
        ct_sys: &SystematicError,
        noise: &StageNoiseConfig,
        rng: &mut R,
    ) -> Self {
        Self {
            vt_ratio: vt_sys.ratio_dev + draw_optional(&noise.vt_random, rng),
            vt_angle: vt_sys.angle_dev + draw_optional(&noise.vt_angle_random, rng),
            ct_ratio: ct_sys.ratio_dev + draw_optional(&noise.ct_random, rng),
            ct_angle: ct_sys.angle_dev + draw_optional(&noise.ct_angle_random, rng),
        }
    }

    pub fn apply(&self, truth: &TruthRecord) -> PhasorReading {
        PhasorReading {
            v: truth.v_true * (1.0 + self.vt_ratio),
            delta_v: truth.delta_v_true + self.vt_angle,
            i: truth.i_true * (1.0 + self.ct_ratio),
            delta_i: truth.delta_i_true + self.ct_angle,
        }
    }
}

/// Stage-1 output of the VT and CT.
pub fn apply_transformer<R: Rng + ?Sized>(
    truth: &TruthRecord,
    vt_sys: &SystematicError,
    ct_sys: &SystematicError,
    noise: &StageNoiseConfig,
    rng: &mut R,
) -> Result<PhasorReading> {
    truth.validate()?;
    Ok(TransformerErrors::draw(vt_sys, ct_sys, noise, rng).apply(truth))
}

/// Additive cable and burden errors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CableErrors {
    pub v: f64,
    pub delta_v: f64,
    pub i: f64,
    pub delta_i: f64,
}

impl CableErrors {
    pub fn draw<R: Rng + ?Sized>(noise: &StageNoiseConfig, rng: &mut R) -> Self {
        Self {
            v: noise.cable_v.draw(rng),
            delta_v: noise.cable_angle_v.draw(rng),
            i: noise.cable_i.draw(rng),
            delta_i: noise.cable_angle_i.draw(rng),
        }
    }

    pub fn apply(&self, stage1: &PhasorReading) -> PhasorReading {
        PhasorReading {
            v: stage1.v + self.v,
            delta_v: stage1.delta_v + self.delta_v,
            i: stage1.i + self.i,
            delta_i: stage1.delta_i + self.delta_i,
        }
    }
}

/// Stage-2 output after control cables and burdens.
pub fn apply_cable_burden<R: Rng + ?Sized>(
    stage1: &PhasorReading,
    noise: &StageNoiseConfig,
    rng: &mut R,
) -> Result<PhasorReading> {
    if !stage1.is_finite() {
        return Err(Error::invalid("stage-1 values must be finite"));
    }
    Ok(CableErrors::draw(noise, rng).apply(stage1))
}

/// IED outputs: noisy voltage and power, plus the noise-free powers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IedOutput {
    pub v3: f64,
    pub p3: f64,
    pub q3: f64,
    pub p2: f64,
    pub q2: f64,
}

/// Active and reactive power from a voltage/current phasor pair.
pub fn complex_power(reading: &PhasorReading) -> (f64, f64) {
    let s = reading.v * reading.i;
    let (sin, cos) = (reading.delta_v - reading.delta_i).sin_cos();
    (s * cos, s * sin)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IedErrors {
    pub v: f64,
    pub p: f64,
    pub q: f64,
}

impl IedErrors {
    pub fn draw<R: Rng + ?Sized>(noise: &StageNoiseConfig, rng: &mut R) -> Self {
        Self {
            v: draw_zero_mean(noise.ied_v, rng),
            p: draw_zero_mean(noise.ied_p, rng),
            q: draw_zero_mean(noise.ied_q, rng),
        }
    }

    pub fn apply(&self, stage2: &PhasorReading) -> IedOutput {
        let (p2, q2) = complex_power(stage2);
        IedOutput {
            v3: stage2.v + self.v,
            p3: p2 + self.p,
            q3: q2 + self.q,
            p2,
            q2,
        }
    }
}

pub fn ied_compute<R: Rng + ?Sized>(
    stage2: &PhasorReading,
    noise: &StageNoiseConfig,
    rng: &mut R,
) -> Result<IedOutput> {
    if !stage2.is_finite() {
        return Err(Error::invalid("stage-2 values must be finite"));
    }
    Ok(IedErrors::draw(noise, rng).apply(stage2))
}
