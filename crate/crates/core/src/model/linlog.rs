/// Luma to log-intensity map: linear below the knee, natural log above,
/// joined continuously at the knee.
#[derive(Debug, Clone, Copy)]
pub struct LinLog {
    knee: f64,
    slope: f64,
}

impl LinLog {
    pub fn new(knee: f64) -> Self {
        Self {
            knee,
            slope: knee.ln() / knee,
        }
    }

    #[inline(always)]
    pub fn apply(&self, y: f64) -> f64 {
        if y < self.knee {
            y * self.slope
        } else {
            y.ln()
        }
    }
}

/// [`LinLog`] with an explicit knee, for one-off conversions.
pub fn lin_log(y: f64, knee: f64) -> f64 {
    LinLog::new(knee).apply(y)
}
