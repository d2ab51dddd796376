use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no circular geodesic at r = {radius}: need 2r > 3r0 (r0 = {r0})")]
    NoCircularOrbit { radius: f64, r0: f64 },

    #[error("degenerate indicial coefficient: P_{n} = 0")]
    DegenerateIndicial { n: usize },

    #[error("series phase not converged after N = {}", history.last().map(|h| h.0).unwrap_or(0))]
    SeriesNonConvergence { history: Vec<(usize, f64)> },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("Wronskian drift {drift:e} exceeds {limit:e}")]
    WronskianDrift { drift: f64, limit: f64 },

    #[error("matching configuration error: {0}")]
    Configuration(String),

    #[error("mode solve failed (l = {l}, omega = {omega}): {source}")]
    Mode {
        l: u32,
        omega: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("omega_{sign} vanishes for (l, m) = ({l}, {m}) at E = {energy}")]
    IntegrableEndpoint {
        l: u32,
        m: i32,
        sign: char,
        energy: f64,
    },

    #[error("omega^2 = {} <= l(l+1) = {}: outside the scattering regime", omega * omega, l * (l + 1))]
    OutOfRegime { omega: f64, l: u32 },

    #[error("plane-wave matching residual {residual:e} exceeds {limit:e}")]
    MatchingAccuracy { residual: f64, limit: f64 },

    #[error("insufficient data: {surviving} samples survive, {required} required")]
    InsufficientData { surviving: usize, required: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_mode(self, l: u32, omega: f64) -> Self {
        match self {
            e @ Error::Mode { .. } => e,
            e => Error::Mode {
                l,
                omega,
                source: Box::new(e),
            },
        }
    }
}
