use serde::{Deserialize, Serialize};

use super::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampKind {
    Constant,
    Linear,
    LogLinear,
}

/// One ramp segment over [t_start, t_end].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: RampKind,
    pub t_start: f64,
    pub t_end: f64,
    pub v_start: f64,
    pub v_end: f64,
}

impl Segment {
    fn validate(&self) -> Result<(), DynamicsError> {
        let nums = [self.t_start, self.t_end, self.v_start, self.v_end];
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Schedule("segment contains non-finite values".into()));
        }
        if self.t_end <= self.t_start {
            return Err(DynamicsError::Schedule(format!(
                "segment end {:e} not after start {:e}",
                self.t_end, self.t_start
            )));
        }
        match self.kind {
            RampKind::Constant => {
                if self.v_start != self.v_end {
                    return Err(DynamicsError::Schedule(
                        "constant segment with differing endpoint values".into(),
                    ));
                }
            }
            RampKind::LogLinear => {
                if self.v_start * self.v_end <= 0.0 {
                    return Err(DynamicsError::Schedule(
                        "log-linear segment needs nonzero endpoints of equal sign".into(),
                    ));
                }
            }
            RampKind::Linear => {}
        }
        Ok(())
    }

    fn eval(&self, t: f64) -> f64 {
        let s = (t - self.t_start) / (self.t_end - self.t_start);
        // exact endpoint values, as promised by the schedule contract
        if s <= 0.0 {
            return self.v_start;
        }
        if s >= 1.0 {
            return self.v_end;
        }
        match self.kind {
            RampKind::Constant => self.v_start,
            RampKind::Linear => self.v_start + (self.v_end - self.v_start) * s,
            RampKind::LogLinear => {
                let sign = self.v_start.signum();
                let l0 = self.v_start.abs().ln();
                let l1 = self.v_end.abs().ln();
                sign * (l0 + (l1 - l0) * s).exp()
            }
        }
    }
}

/// Deterministic, piecewise time profile of one scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    segments: Vec<Segment>,
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Self {
            segments: vec![Segment {
                kind: RampKind::Constant,
                t_start: 0.0,
                t_end: f64::MAX,
                v_start: value,
                v_end: value,
            }],
        }
    }

    /// Segments must be contiguous and ordered.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, DynamicsError> {
        if segments.is_empty() {
            return Err(DynamicsError::Schedule("schedule needs at least one segment".into()));
        }
        for seg in &segments {
            seg.validate()?;
        }
        for pair in segments.windows(2) {
            if pair[1].t_start != pair[0].t_end {
                return Err(DynamicsError::Schedule(format!(
                    "segments not contiguous: {:e} then {:e}",
                    pair[0].t_end, pair[1].t_start
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn single(kind: RampKind, t_start: f64, t_end: f64, v_start: f64, v_end: f64) -> Result<Self, DynamicsError> {
        Self::from_segments(vec![Segment { kind, t_start, t_end, v_start, v_end }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True when the schedule is defined over the whole window.
    pub fn covers(&self, t0: f64, t1: f64) -> bool {
        self.segments.first().map(|s| s.t_start <= t0).unwrap_or(false)
            && self.segments.last().map(|s| s.t_end >= t1).unwrap_or(false)
    }

    /// Evaluate at `t`; values clamp to the nearest segment endpoint outside
    /// the covered span.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut seg = &self.segments[0];
        for s in &self.segments {
            if t >= s.t_start {
                seg = s;
            } else {
                break;
            }
        }
        seg.eval(t)
    }
}
