//! Digital Butterworth low-pass filter as a cascade of second-order sections.
//!
//! Each section is the bilinear transform (prewarped at the cutoff) of one
//! conjugate pole pair of the analog prototype. Odd orders add one first-order
//! section for the real pole.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One transposed direct-form II section, `a0` normalised to 1.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    z1: f64,
    z2: f64,
}

impl Biquad {
    pub fn new(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Self {
        Biquad { b0, b1, b2, a1, a2, z1: 0.0, z2: 0.0 }
    }

    /// Low-pass section with quality factor `q`, prewarped so that the cutoff is
    /// exact: `w0` is the normalised cutoff in radians per sample.
    fn lowpass(w0: f64, q: f64) -> Self {
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b0 = (1.0 - cos) * 0.5 / a0;
        Biquad::new(b0, 2.0 * b0, b0, -2.0 * cos / a0, (1.0 - alpha) / a0)
    }

    /// First-order low-pass section (`b2 = a2 = 0`).
    fn lowpass_first_order(w0: f64) -> Self {
        let k = (w0 / 2.0).tan();
        let b0 = k / (1.0 + k);
        Biquad::new(b0, b0, 0.0, (k - 1.0) / (k + 1.0), 0.0)
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn reset(&mut self) {
        self.z1 = 0.0;
        self.z2 = 0.0;
    }

    /// Sets the state to the steady state for a constant input `x`, assuming unit DC gain.
    fn prime(&mut self, x: f64) {
        self.z2 = (self.b2 - self.a2) * x;
        self.z1 = (self.b1 - self.a1) * x + self.z2;
    }

    /// Complex response at `omega` radians per sample as (re, im).
    fn response(&self, omega: f64) -> (f64, f64) {
        // z^-1 = e^{-j omega}
        let (s1, c1) = omega.sin_cos();
        let (s2, c2) = (2.0 * omega).sin_cos();
        let num = (self.b0 + self.b1 * c1 + self.b2 * c2, -(self.b1 * s1 + self.b2 * s2));
        let den = (1.0 + self.a1 * c1 + self.a2 * c2, -(self.a1 * s1 + self.a2 * s2));
        let d = den.0 * den.0 + den.1 * den.1;
        ((num.0 * den.0 + num.1 * den.1) / d, (num.1 * den.0 - num.0 * den.1) / d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ButterworthLowpass {
    sections: Vec<Biquad>,
    sample_rate_hz: f64,
}

impl ButterworthLowpass {
    pub fn design(order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("filter order must be at least 1".into()));
        }
        if !(cutoff_hz > 0.0) {
            return Err(Error::Config(format!("cutoff must be positive, got {cutoff_hz}")));
        }
        if !(sample_rate_hz > 2.0 * cutoff_hz) {
            return Err(Error::NyquistViolation { cutoff_hz, rate_hz: sample_rate_hz });
        }
        let w0 = 2.0 * PI * cutoff_hz / sample_rate_hz;
        let mut sections: Vec<Biquad> = (0..order / 2)
            .map(|k| {
                let angle = (2 * k + 1) as f64 * PI / (2 * order) as f64;
                Biquad::lowpass(w0, 1.0 / (2.0 * angle.sin()))
            })
            .collect();
        if order % 2 == 1 {
            sections.push(Biquad::lowpass_first_order(w0));
        }
        Ok(ButterworthLowpass { sections, sample_rate_hz })
    }

    pub fn order(&self) -> usize {
        self.sections.iter().map(|s| if s.b2 == 0.0 && s.a2 == 0.0 { 1 } else { 2 }).sum()
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.sections.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn reset(&mut self) {
        self.sections.iter_mut().for_each(Biquad::reset);
    }

    /// Puts every section in the steady state for constant input `x`, so a signal
    /// starting at `x` produces no start-up transient.
    pub fn prime(&mut self, x: f64) {
        self.sections.iter_mut().for_each(|s| s.prime(x));
    }

    /// Magnitude of the frequency response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let (re, im) = self.sections.iter().fold((1.0, 0.0), |(re, im), s| {
            let (r, i) = s.response(omega);
            (re * r - im * i, re * i + im * r)
        });
        re.hypot(im)
    }

    pub fn filter(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.process(x)).collect()
    }
}
