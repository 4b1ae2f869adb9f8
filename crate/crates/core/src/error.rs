use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("field is singular at z = {z}")]
    Singularity { z: f64 },

    #[error("z = {z} lies outside the field domain [{min}, {max}]")]
    OutOfRange { z: f64, min: f64, max: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("wrong field profile: expected {expected}, found {found}")]
    ProfileType {
        expected: &'static str,
        found: &'static str,
    },

    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    Convergence { terms: usize, last_term: f64 },

    #[error(
        "quadrature did not reach tolerance: estimated error {error:e}, worst subinterval [{worst_lo}, {worst_hi}]"
    )]
    Quadrature {
        error: f64,
        worst_lo: f64,
        worst_hi: f64,
    },

    #[error("integration stopped at z = {last_z}: {reason}")]
    Integration { last_z: f64, reason: String },

    #[error("no sign change of h in [{lo}, {hi}]")]
    NotFound { lo: f64, hi: f64 },

    #[error("z = {z} is not an image plane: |h| = {h:e} exceeds {tol:e}")]
    NotImagePlane { z: f64, h: f64, tol: f64 },

    #[error("lens is afocal between the given planes (g' = {g_prime:e})")]
    Afocal { g_prime: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("sampling violation in {factor}: phase step {value} rad exceeds pi")]
    Aliasing { factor: &'static str, value: f64 },

    #[error("|h| = {h:e} is below the image-plane threshold; use propagate_to_image")]
    ImagePlaneRequired { h: f64 },

    #[error("degenerate magnification: |g| = {g:e}")]
    DegenerateMagnification { g: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
