//! Engineered decoherence on a system/environment spin pair.
//!
//! Qubit 0 is the system, qubit 1 the environment. Times are in ms,
//! frequencies in Hz, kick rates in kicks per ms and kick angles in degrees.
//! The Hamiltonian `pi (nu_s Zs + nu_e Ze + J/2 Zs Ze)` is diagonal, so free
//! evolution is a phase per basis state. Each trajectory draws one kick
//! realization and evolves both environment basis states under it; their
//! average is the exact result for a maximally mixed environment.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c, C64, ZERO};
use crate::rng::stream;

pub const DEFAULT_J_HZ: f64 = 209.2;
pub const DEFAULT_TRAJECTORIES: usize = 200;
/// Lower edge of the log-linear fit window.
pub const FIT_FLOOR: f64 = 0.05;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KickAxis {
    #[default]
    X,
    Y,
    RandomTransverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KickTiming {
    /// Kicks at `k / gamma`, `k = 1, 2, ...`.
    #[default]
    Regular,
    /// Exponential waiting times with mean `1 / gamma`.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub nu_s: f64,
    pub nu_e: f64,
    pub j: f64,
    pub gamma: f64,
    pub kick_range: [f64; 2],
    pub kick_axis: KickAxis,
    pub kick_timing: KickTiming,
    pub seed: u64,
    pub total_time: f64,
    pub trajectories: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            nu_s: 0.0,
            nu_e: 0.0,
            j: DEFAULT_J_HZ,
            gamma: 0.0,
            kick_range: [0.0, 1.0],
            kick_axis: KickAxis::X,
            kick_timing: KickTiming::Regular,
            seed: 0,
            total_time: 100.0,
            trajectories: DEFAULT_TRAJECTORIES,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu_s, self.nu_e, self.j, self.gamma, self.total_time]
            .iter()
            .chain(self.kick_range.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-negative".into()));
        }
        if self.kick_range[0] > self.kick_range[1] {
            return Err(Error::InvalidParameter("kick range must satisfy lo <= hi".into()));
        }
        if self.total_time <= 0.0 {
            return Err(Error::InvalidParameter("total_time must be positive".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidParameter("need at least one trajectory".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    None,
    #[default]
    Cpmg,
    Udd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseAxis {
    #[default]
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    pub kind: SequenceKind,
    pub n_pulses: usize,
    /// Cycle time in ms; also the sampling interval.
    pub cycle_time: f64,
    pub pulse_axis: PulseAxis,
}

impl PulseSequence {
    pub fn new(kind: SequenceKind, n_pulses: usize, cycle_time: f64) -> Self {
        Self {
            kind,
            n_pulses,
            cycle_time,
            pulse_axis: PulseAxis::X,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cycle_time > 0.0 && self.cycle_time.is_finite()) {
            return Err(Error::InvalidParameter("cycle_time must be positive".into()));
        }
        if self.kind != SequenceKind::None && self.n_pulses == 0 {
            return Err(Error::InvalidParameter("decoupling needs at least one pulse".into()));
        }
        Ok(())
    }

    /// Pulse instants within one cycle, strictly increasing in `(0, t_c)`.
    pub fn pulse_times(&self) -> Vec<f64> {
        let n = self.n_pulses;
        let tc = self.cycle_time;
        match self.kind {
            SequenceKind::None => Vec::new(),
            SequenceKind::Cpmg => (1..=n).map(|j| (j as f64 - 0.5) * tc / n as f64).collect(),
            SequenceKind::Udd => (1..=n)
                .map(|j| tc * (PI * j as f64 / (2.0 * (n + 1) as f64)).sin().powi(2))
                .collect(),
        }
    }

    fn pulses_per_cycle(&self) -> usize {
        match self.kind {
            SequenceKind::None => 0,
            _ => self.n_pulses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T2Fit {
    /// Fitted decay rate `1/T2` in 1/ms.
    pub rate: f64,
    /// `T2` in ms; infinite (serialized as null) when the rate is not positive.
    pub t2: f64,
    /// RMS deviation of `log M_x` from the fitted line.
    pub residual: f64,
    /// Samples `[0, end)` used in the fit.
    pub window_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRecord {
    pub times: Vec<f64>,
    pub mx: Vec<f64>,
    pub t2_fit: Option<T2Fit>,
}

/// OLS fit of `log M_x` on the leading samples with `M_x > FIT_FLOOR`.
pub fn fit_t2(times: &[f64], mx: &[f64]) -> Option<T2Fit> {
    let end = mx.iter().position(|&m| !(m > FIT_FLOOR)).unwrap_or(mx.len());
    if end < MIN_FIT_POINTS {
        return None;
    }
    let t = &times[..end];
    let y: Vec<f64> = mx[..end].iter().map(|m| m.ln()).collect();
    let nf = end as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let sxx: f64 = t.iter().map(|ti| (ti - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(&y).map(|(ti, yi)| (ti - tm) * (yi - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let residual = (t
        .iter()
        .zip(&y)
        .map(|(ti, yi)| (yi - intercept - slope * ti).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    let rate = -slope;
    Some(T2Fit {
        rate,
        t2: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
        residual,
        window_end: end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Kick,
    Pulse,
}

/// Per-trajectory result: `<sigma_x^s>` at each sample and the worst
/// deviation of the state norm from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mx: Vec<f64>,
    pub norm_defect: f64,
}

struct Propagator {
    energies: [f64; 4],
    /// Phase factors for the most recent step length; regular kick trains
    /// reuse the same step.
    cache: (f64, [C64; 4]),
    pulse: [[C64; 2]; 2],
    sign_flip: bool,
}

/// 2x2 rotation `exp(-i angle (cos phi X + sin phi Y) / 2)`.
fn transverse_rotation(angle: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, co) = (angle / 2.0).sin_cos();
    let off = c(0.0, -s) * C64::from_polar(1.0, -phi);
    let off_conj = c(0.0, -s) * C64::from_polar(1.0, phi);
    [[c(co, 0.0), off], [off_conj, c(co, 0.0)]]
}

fn apply_on(psi: &mut [C64; 4], m: &[[C64; 2]; 2], qubit: usize) {
    let pairs: [(usize, usize); 2] = if qubit == 0 { [(0, 2), (1, 3)] } else { [(0, 1), (2, 3)] };
    for (a, b) in pairs {
        let (x, y) = (psi[a], psi[b]);
        psi[a] = m[0][0] * x + m[0][1] * y;
        psi[b] = m[1][0] * x + m[1][1] * y;
    }
}

impl Propagator {
    fn new(cfg: &NoiseConfig, seq: &PulseSequence) -> Self {
        // Hz -> rad/ms
        let k = PI / 1000.0;
        let energies = [0usize, 1, 2, 3].map(|idx| {
            let zs = if idx & 2 == 0 { 1.0 } else { -1.0 };
            let ze = if idx & 1 == 0 { 1.0 } else { -1.0 };
            k * (cfg.nu_s * zs + cfg.nu_e * ze + cfg.j / 2.0 * zs * ze)
        });
        let phi = match seq.pulse_axis {
            PulseAxis::X => 0.0,
            PulseAxis::Y => PI / 2.0,
        };
        // A pi_y pulse inverts sigma_x; with an odd count per cycle the
        // sampled signal is reported in the toggling frame.
        let sign_flip = seq.pulse_axis == PulseAxis::Y && seq.pulses_per_cycle() % 2 == 1;
        Self {
            energies,
            cache: (0.0, [C64::new(1.0, 0.0); 4]),
            pulse: transverse_rotation(PI, phi),
            sign_flip,
        }
    }

    fn free(&mut self, psi: &mut [C64; 4], dt: f64) {
        if dt == 0.0 {
            return;
        }
        if self.cache.0 != dt {
            self.cache = (dt, self.energies.map(|e| C64::from_polar(1.0, -e * dt)));
        }
        for (amp, f) in psi.iter_mut().zip(self.cache.1) {
            *amp *= f;
        }
    }
}

fn mx_of(psi: &[C64; 4]) -> f64 {
    2.0 * (psi[0].conj() * psi[2] + psi[1].conj() * psi[3]).re
}

fn kick_schedule<R: Rng>(cfg: &NoiseConfig, rng: &mut R) -> Vec<(f64, [[C64; 2]; 2])> {
    if cfg.gamma <= 0.0 {
        return Vec::new();
    }
    let [lo, hi] = cfg.kick_range;
    let draw = |rng: &mut R| {
        let angle = if hi > lo { rng.random_range(lo..=hi) } else { lo }.to_radians();
        let phi = match cfg.kick_axis {
            KickAxis::X => 0.0,
            KickAxis::Y => PI / 2.0,
            KickAxis::RandomTransverse => rng.random_range(0.0..2.0 * PI),
        };
        transverse_rotation(angle, phi)
    };
    let mut out = Vec::new();
    match cfg.kick_timing {
        KickTiming::Regular => {
            let count = (cfg.total_time * cfg.gamma).floor() as usize;
            for k in 1..=count {
                let t = k as f64 / cfg.gamma;
                out.push((t, draw(rng)));
            }
        }
        KickTiming::Poisson => {
            let exp = Exp::new(cfg.gamma).expect("positive rate");
            let mut t = exp.sample(rng);
            while t <= cfg.total_time {
                out.push((t, draw(rng)));
                t += exp.sample(rng);
            }
        }
    }
    out
}

fn sample_count(cfg: &NoiseConfig, seq: &PulseSequence) -> usize {
    (cfg.total_time / seq.cycle_time + 1e-9).floor() as usize + 1
}

/// One kick realization, indexed for reproducible parallel runs.
pub fn trajectory(cfg: &NoiseConfig, seq: &PulseSequence, index: u64) -> Result<Trajectory> {
    cfg.validate()?;
    seq.validate()?;
    let mut rng = stream(cfg.seed, index);
    let kicks = kick_schedule(cfg, &mut rng);
    let mut prop = Propagator::new(cfg, seq);
    let samples = sample_count(cfg, seq);
    let pulse_offsets = seq.pulse_times();

    // Merge pulses and kicks into one time-ordered list; on ties the pulse
    // goes first. Samples fall on cycle boundaries.
    let mut events: Vec<(f64, Event, usize)> = Vec::new();
    for cycle in 0..samples - 1 {
        let base = cycle as f64 * seq.cycle_time;
        events.extend(pulse_offsets.iter().map(|&t| (base + t, Event::Pulse, 0)));
    }
    events.extend(kicks.iter().enumerate().map(|(i, &(t, _))| (t, Event::Kick, i)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 == Event::Kick).cmp(&(b.1 == Event::Kick))));

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut mx = vec![0.0; samples];
    let mut norm_defect: f64 = 0.0;
    for env in 0..2 {
        let mut psi = [ZERO; 4];
        psi[env] = c(s, 0.0);
        psi[2 + env] = c(s, 0.0);
        let mut now = 0.0;
        let mut next = events.iter().peekable();
        for (k, slot) in mx.iter_mut().enumerate() {
            let t_sample = k as f64 * seq.cycle_time;
            while let Some(&&(t, kind, idx)) = next.peek() {
                if t > t_sample {
                    break;
                }
                prop.free(&mut psi, t - now);
                now = t;
                match kind {
                    Event::Pulse => apply_on(&mut psi, &prop.pulse, 0),
                    Event::Kick => apply_on(&mut psi, &kicks[idx].1, 1),
                }
                next.next();
            }
            prop.free(&mut psi, t_sample - now);
            now = t_sample;
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            norm_defect = norm_defect.max((norm - 1.0).abs());
            let value = if prop.sign_flip && k % 2 == 1 { -mx_of(&psi) } else { mx_of(&psi) };
            *slot += 0.5 * value;
        }
    }
    Ok(Trajectory { mx, norm_defect })
}

/// Trajectory-averaged transverse magnetization and its `T2` fit.
pub fn simulate_decay(cfg: &NoiseConfig, seq: &PulseSequence) -> Result<DecayRecord> {
    cfg.validate()?;
    seq.validate()?;
    // Without kicks every trajectory is identical.
    let runs = if cfg.gamma == 0.0 { 1 } else { cfg.trajectories };
    let trajectories: Vec<Trajectory> = (0..runs as u64)
        .into_par_iter()
        .map(|i| trajectory(cfg, seq, i))
        .collect::<Result<_>>()?;
    let samples = sample_count(cfg, seq);
    let mut mx = vec![0.0; samples];
    for t in &trajectories {
        for (acc, v) in mx.iter_mut().zip(&t.mx) {
            *acc += v;
        }
    }
    for v in &mut mx {
        *v /= runs as f64;
    }
    let times: Vec<f64> = (0..samples).map(|k| k as f64 * seq.cycle_time).collect();
    let t2_fit = fit_t2(&times, &mx);
    Ok(DecayRecord { times, mx, t2_fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub fit: Option<T2Fit>,
}

impl GammaPoint {
    pub fn rate(&self) -> Option<f64> {
        self.fit.map(|f| f.rate)
    }
}

/// Decay rate for each kick rate, other settings held fixed.
pub fn t2_vs_gamma(cfg: &NoiseConfig, seq: &PulseSequence, gammas: &[f64]) -> Result<Vec<GammaPoint>> {
    gammas
        .iter()
        .map(|&gamma| {
            let run = NoiseConfig { gamma, ..cfg.clone() };
            Ok(GammaPoint {
                gamma,
                fit: simulate_decay(&run, seq)?.t2_fit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSpectrum {
    /// Pulse spacings in ms for the entries of `omegas`.
    pub taus: Vec<f64>,
    /// `pi / tau` in rad/ms.
    pub omegas: Vec<f64>,
    /// `pi^2 / (4 T2)` in 1/ms; a negative fitted rate is reported as 0.
    pub s_values: Vec<f64>,
    /// Spacings whose fit failed.
    pub gaps: Vec<f64>,
}

impl NoiseSpectrum {
    /// Trapezoid area over the sorted frequency grid.
    pub fn area(&self) -> f64 {
        let mut pts: Vec<(f64, f64)> = self.omegas.iter().copied().zip(self.s_values.iter().copied()).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
    }
}

/// CPMG filter spectroscopy: pulse spacing `tau`, two pulses per cycle of
/// length `2 tau`, repeated to `cfg.total_time`.
pub fn noise_spectrum(cfg: &NoiseConfig, taus: &[f64]) -> Result<NoiseSpectrum> {
    let mut out = NoiseSpectrum {
        taus: Vec::new(),
        omegas: Vec::new(),
        s_values: Vec::new(),
        gaps: Vec::new(),
    };
    for &tau in taus {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        let seq = PulseSequence::new(SequenceKind::Cpmg, 2, 2.0 * tau);
        match simulate_decay(cfg, &seq)?.t2_fit {
            Some(fit) => {
                out.taus.push(tau);
                out.omegas.push(PI / tau);
                out.s_values.push(PI * PI / 4.0 * fit.rate.max(0.0));
            }
            None => out.gaps.push(tau),
        }
    }
    Ok(out)
}
