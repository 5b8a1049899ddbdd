//! Diagnostics of a trajectory: center of mass, energy, the sampled time
//! series and the fits used to characterise damping and relaxation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::AbortReason;
use crate::field::WaveField;
use crate::grid::Spectral;
use crate::potential::ComplexPotential;
use crate::scalar::Real;

/// `integral x |psi|^2 / integral |psi|^2`.
pub fn center_of_mass<T: Real>(field: &WaveField<T>) -> Result<T> {
    let norm = field.norm();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::Degenerate(format!("center of mass of a field with norm {norm}")));
    }
    Ok(field.moment(|x| x) / norm)
}

/// `integral |psi_x|^2/2 + V |psi|^2 + sigma/2 |psi|^4`, kinetic part
/// evaluated spectrally. Conserved only when `W == 0` and `sigma` is constant.
pub fn energy<T: Real>(field: &WaveField<T>, potential: &ComplexPotential<T>, sigma: T) -> T {
    let grid = field.grid();
    let n = T::of_usize(grid.len());
    let mut spectral = Spectral::new(grid);
    let mut hat = field.values().to_vec();
    spectral.forward(&mut hat);
    let half = T::lit(0.5);
    let kinetic = hat
        .iter()
        .zip(grid.k())
        .map(|(z, &k)| half * k * k * z.norm_sqr())
        .sum::<T>()
        * grid.dx()
        / n;
    let local = field
        .values()
        .iter()
        .zip(potential.v())
        .map(|(z, &v)| {
            let rho = z.norm_sqr();
            v * rho + half * sigma * rho * rho
        })
        .sum::<T>()
        * grid.dx();
    kinetic + local
}

/// One row of the sampled trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    pub x_c: f64,
    pub peak_density: f64,
    pub peak_amplitude: f64,
    pub sigma_t: f64,
    /// `2 integral W |psi|^2 dx` at `t`.
    pub gain: f64,
    /// Time integral of `gain` from the start of the run, exact along the
    /// split trajectory (see [`crate::evolve::StepStats::gain_step`]).
    pub gain_integral: f64,
    /// The same integral by the trapezoid rule on every step.
    pub gain_trapezoid: f64,
}

/// Column-oriented trajectory sampled every `sample_every` steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    pub x_c: Vec<f64>,
    pub peak_density: Vec<f64>,
    pub peak_amplitude: Vec<f64>,
    pub sigma_t: Vec<f64>,
    pub gain: Vec<f64>,
    pub gain_integral: Vec<f64>,
    pub gain_trapezoid: Vec<f64>,
    /// Set when the run stopped before its horizon.
    pub aborted: Option<AbortReason>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: Sample) {
        self.t.push(s.t);
        self.norm.push(s.norm);
        self.x_c.push(s.x_c);
        self.peak_density.push(s.peak_density);
        self.peak_amplitude.push(s.peak_amplitude);
        self.sigma_t.push(s.sigma_t);
        self.gain.push(s.gain);
        self.gain_integral.push(s.gain_integral);
        self.gain_trapezoid.push(s.gain_trapezoid);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            t: self.t[i],
            norm: self.norm[i],
            x_c: self.x_c[i],
            peak_density: self.peak_density[i],
            peak_amplitude: self.peak_amplitude[i],
            sigma_t: self.sigma_t[i],
            gain: self.gain[i],
            gain_integral: self.gain_integral[i],
            gain_trapezoid: self.gain_trapezoid[i],
        }
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Sample spacing, assuming uniform sampling.
    pub fn spacing(&self) -> Option<f64> {
        (self.len() >= 2).then(|| self.t[1] - self.t[0])
    }

    /// Index range `[lo, hi)` of samples with `t_lo <= t <= t_hi`.
    pub fn window(&self, t_lo: f64, t_hi: f64) -> std::ops::Range<usize> {
        let lo = self.t.partition_point(|&t| t < t_lo);
        let hi = self.t.partition_point(|&t| t <= t_hi);
        lo..hi.max(lo)
    }

    /// Relative mismatch between the norm change and the integrated gain on
    /// each sampled interval: `|dN/dt - <2 int W |psi|^2>| / max(|dN/dt|, 1e-12)`,
    /// with the gain integrated exactly along the split trajectory.
    pub fn balance_errors(&self) -> Vec<f64> {
        self.balance_against(&self.gain_integral)
    }

    /// As [`TimeSeries::balance_errors`] with the gain integrated by the
    /// trapezoid rule, which adds the `O(dt^2)` splitting error.
    pub fn balance_errors_trapezoid(&self) -> Vec<f64> {
        self.balance_against(&self.gain_trapezoid)
    }

    fn balance_against(&self, integral: &[f64]) -> Vec<f64> {
        (1..self.len())
            .map(|i| {
                let dt = self.t[i] - self.t[i - 1];
                let dn = (self.norm[i] - self.norm[i - 1]) / dt;
                let g = (integral[i] - integral[i - 1]) / dt;
                (dn - g).abs() / dn.abs().max(1e-12)
            })
            .collect()
    }
}

/// Centered moving average over `width` samples; only points with a full
/// window are returned, as `(t, value)` pairs.
pub fn moving_average(t: &[f64], y: &[f64], width: usize) -> (Vec<f64>, Vec<f64>) {
    let width = width.max(1);
    if y.len() < width {
        return (Vec::new(), Vec::new());
    }
    let mut prefix = Vec::with_capacity(y.len() + 1);
    prefix.push(0.0);
    for v in y {
        prefix.push(prefix.last().unwrap() + v);
    }
    let half = width / 2;
    let count = y.len() - width + 1;
    let ts = (0..count).map(|i| t[i + half]).collect();
    let ys = (0..count).map(|i| (prefix[i + width] - prefix[i]) / width as f64).collect();
    (ts, ys)
}

fn samples_per(series: &TimeSeries, period: f64) -> usize {
    match series.spacing() {
        Some(h) if h > 0.0 && period > 0.0 => ((period / h).round() as usize).max(1),
        _ => 1,
    }
}

/// Exponential envelope fitted to the oscillation extrema of `x_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Envelope decay rate `xi_c`.
    pub rate: f64,
    /// Envelope at `t = 0`.
    pub amplitude: f64,
    pub rms_residual: f64,
    pub extrema: usize,
}

/// Extrema of `|x_c|` in the window, refined by a parabola through the
/// three samples around each local maximum. Consecutive extrema of the same
/// sign are merged, keeping the larger one.
pub fn envelope_extrema(series: &TimeSeries, t_lo: f64, t_hi: f64) -> Vec<(f64, f64)> {
    let r = series.window(t_lo, t_hi);
    let (t, x) = (&series.t[r.clone()], &series.x_c[r]);
    let mut out: Vec<(f64, f64, bool)> = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        let (y0, y1, y2) = (x[i - 1].abs(), x[i].abs(), x[i + 1].abs());
        if !(y1 >= y0 && y1 > y2) || x[i - 1].signum() != x[i + 1].signum() {
            continue;
        }
        let curv = y0 - 2.0 * y1 + y2;
        let (dt, peak) = if curv < 0.0 {
            let d = 0.5 * (y0 - y2) / curv;
            (d, y1 - 0.25 * (y0 - y2) * d)
        } else {
            (0.0, y1)
        };
        let h = t[i + 1] - t[i];
        let positive = x[i] > 0.0;
        match out.last_mut() {
            Some(last) if last.2 == positive => {
                if peak > last.1 {
                    *last = (t[i] + dt * h, peak, positive);
                }
            }
            _ => out.push((t[i] + dt * h, peak, positive)),
        }
    }
    out.into_iter().map(|(t, y, _)| (t, y)).collect()
}

/// Fit `|x_c(t)| ~ x0 exp(-xi_c t)` through the envelope extrema in `[t_lo, t_hi]`.
pub fn fit_envelope_decay(series: &TimeSeries, t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    let ext: Vec<(f64, f64)> = envelope_extrema(series, t_lo, t_hi).into_iter().filter(|e| e.1 > 0.0).collect();
    if ext.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} oscillation extrema in [{t_lo}, {t_hi}], need at least 4",
            ext.len()
        )));
    }
    let ts: Vec<f64> = ext.iter().map(|e| e.0).collect();
    let ls: Vec<f64> = ext.iter().map(|e| e.1.ln()).collect();
    let (slope, icept) = linear_fit(&ts, &ls);
    let rms = (ts.iter().zip(&ls).map(|(t, l)| (l - icept - slope * t).powi(2)).sum::<f64>() / ts.len() as f64).sqrt();
    Ok(DecayFit { rate: -slope, amplitude: icept.exp(), rms_residual: rms, extrema: ext.len() })
}

/// Ordinary least-squares line, returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `A0 + (exp(-beta t) - 1) / gamma_fit` fitted to the smoothed peak density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakRelaxationFit {
    #[serde(rename = "A0")]
    pub a0: f64,
    pub beta: f64,
    pub gamma_fit: f64,
    pub rms_residual: f64,
    /// Long-time limit of the model, `A0 - 1/gamma_fit`.
    pub asymptote: f64,
    /// The data carry no relaxation; only `a0` is meaningful.
    pub degenerate: bool,
}

fn relaxation_model(p: &[f64; 3], t: f64) -> (f64, [f64; 3]) {
    // parametrised by c = 1/gamma_fit so a vanishing offset stays finite
    let [a0, beta, c] = *p;
    let e = (-beta * t).exp();
    (a0 + c * (e - 1.0), [1.0, -c * t * e, e - 1.0])
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][c] = r[row];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Levenberg-Marquardt on the three-parameter relaxation model.
fn levenberg_marquardt(t: &[f64], y: &[f64], start: [f64; 3]) -> Result<([f64; 3], f64)> {
    let sse = |p: &[f64; 3]| t.iter().zip(y).map(|(&t, &y)| (y - relaxation_model(p, t).0).powi(2)).sum::<f64>();
    let mut p = start;
    let mut cost = sse(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&t, &y) in t.iter().zip(y) {
            let (f, g) = relaxation_model(&p, t);
            for a in 0..3 {
                jtr[a] += g[a] * (y - f);
                for b in 0..3 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve3(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let c = sse(&trial);
            if c.is_finite() && c <= cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-14 || step.iter().zip(&p).all(|(s, v)| s.abs() <= 1e-12 * v.abs().max(1e-12)) {
                    return Ok((p, cost));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left: a stationary point of the cost
            return Ok((p, cost));
        }
    }
    Err(Error::Fit { message: "Levenberg-Marquardt hit its iteration cap".into(), last: p.to_vec() })
}

/// Fit the relaxation model to the peak density in `[t_lo, t_hi]`, after a
/// moving average over `period`.
pub fn fit_peak_relaxation(series: &TimeSeries, t_lo: f64, t_hi: f64, period: f64) -> Result<PeakRelaxationFit> {
    let r = series.window(t_lo, t_hi);
    let width = samples_per(series, period);
    let (t, y) = moving_average(&series.t[r.clone()], &series.peak_density[r], width);
    if t.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} smoothed samples in [{t_lo}, {t_hi}], need at least 8",
            t.len()
        )));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1e-300) {
        return Ok(PeakRelaxationFit {
            a0: mean,
            beta: f64::NAN,
            gamma_fit: f64::INFINITY,
            rms_residual: 0.0,
            asymptote: mean,
            degenerate: true,
        });
    }

    // starting point: for fixed beta the model is linear in (A0, c), so scan
    // beta on a log grid and keep the best linear solve
    let span = (t[t.len() - 1] - t[0]).max(1e-12);
    let mut best: Option<([f64; 3], f64)> = None;
    for i in 0..=80 {
        let beta = 1e-3 / span * 10f64.powf(i as f64 * 7.0 / 80.0);
        let basis: Vec<f64> = t.iter().map(|&t| (-beta * t).exp() - 1.0).collect();
        let (c, a0) = linear_fit(&basis, &y);
        let p = [a0, beta, c];
        let cost: f64 = t.iter().zip(&y).map(|(&t, &y)| (y - relaxation_model(&p, t).0).powi(2)).sum();
        if best.is_none_or(|b| cost < b.1) {
            best = Some((p, cost));
        }
    }
    let (start, _) = best.expect("scan is non-empty");
    let (p, cost) = levenberg_marquardt(&t, &y, start)?;
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit { message: "non-finite parameters".into(), last: p.to_vec() });
    }
    let [a0, beta, c] = p;
    Ok(PeakRelaxationFit {
        a0,
        beta,
        gamma_fit: 1.0 / c,
        rms_residual: (cost / t.len() as f64).sqrt(),
        asymptote: a0 - c,
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fate {
    #[serde(rename = "NESS")]
    Ness,
    #[serde(rename = "decay")]
    Decay,
    #[serde(rename = "collapse")]
    Collapse,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Fate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ness => "NESS",
            Self::Decay => "decay",
            Self::Collapse => "collapse",
            Self::Undetermined => "undetermined",
        }
    }
}

impl std::fmt::Display for Fate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Fate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ness" => Ok(Self::Ness),
            "decay" => Ok(Self::Decay),
            "collapse" => Ok(Self::Collapse),
            "undetermined" => Ok(Self::Undetermined),
            _ => Err(Error::Config(format!("unknown fate label {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FateThresholds {
    /// `|slope|` of the smoothed peak amplitude below this is stationary.
    pub slope_tol: f64,
    /// Trailing fraction of the run used for the trend.
    pub window_fraction: f64,
    /// Moving-average width in time units.
    pub smoothing_period: f64,
    /// Runs shorter than twice this are undetermined.
    pub transient: f64,
}

impl Default for FateThresholds {
    fn default() -> Self {
        Self { slope_tol: 1e-6, window_fraction: 0.25, smoothing_period: std::f64::consts::TAU, transient: 100.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FateReport {
    pub fate: Fate,
    /// Late-window slope of the smoothed peak amplitude (NaN if not measured).
    pub slope: f64,
}

/// Late-time trend of the smoothed peak amplitude.
pub fn classify_fate(series: &TimeSeries, th: &FateThresholds) -> FateReport {
    if series.aborted.is_some_and(|a| a.is_collapse()) {
        return FateReport { fate: Fate::Collapse, slope: f64::NAN };
    }
    let undetermined = FateReport { fate: Fate::Undetermined, slope: f64::NAN };
    if series.aborted.is_some() || series.duration() < 2.0 * th.transient || series.len() < 4 {
        return undetermined;
    }
    let t_end = series.t[series.len() - 1];
    let t_start = t_end - th.window_fraction * series.duration();
    let width = samples_per(series, th.smoothing_period);
    let (t, y) = moving_average(&series.t, &series.peak_amplitude, width);
    let lo = t.partition_point(|&s| s < t_start);
    if t.len() - lo < 3 {
        return undetermined;
    }
    let (slope, _) = linear_fit(&t[lo..], &y[lo..]);
    let fate = if !slope.is_finite() {
        Fate::Undetermined
    } else if slope.abs() < th.slope_tol {
        Fate::Ness
    } else if slope < 0.0 {
        Fate::Decay
    } else {
        Fate::Collapse
    };
    FateReport { fate, slope }
}
