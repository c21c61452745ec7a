use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing tight-binding parameter `{0}`")]
    MissingChannel(String),

    #[error("parameter table line {line}: {msg}")]
    TableSyntax { line: usize, msg: String },

    #[error("invalid crystal: {0}")]
    InvalidCrystal(String),

    #[error("box extent {extent:.4} nm along axis {axis} is smaller than the minimum of {min:.4} nm")]
    BoxTooSmall { axis: usize, extent: f64, min: f64 },

    #[error(
        "donor position ({:.5}, {:.5}, {:.5}) nm is not a lattice site; nearest site is ({:.5}, {:.5}, {:.5}) nm",
        given[0], given[1], given[2], nearest[0], nearest[1], nearest[2]
    )]
    DonorOffSite { given: [f64; 3], nearest: [f64; 3] },

    #[error("donor position lies outside the box or on its surface")]
    DonorOutsideBox,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension {dim} exceeds the dense solver cap of {cap}")]
    DenseTooLarge { dim: usize, cap: usize },

    #[error("invalid solver input: {0}")]
    InvalidSolverInput(String),

    #[error("central-cell bracket failure: target {target:.6} eV outside achievable binding range [{lo:.6}, {hi:.6}] eV")]
    BracketFailure { target: f64, lo: f64, hi: f64 },

    #[error("states are not a Kramers pair: splitting {split:.3e} eV")]
    NotKramersPair { split: f64 },

    #[error("|B| = 0: g-factor undefined")]
    ZeroField,

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("state is not donor-like: valley leakage {0:.3}")]
    NotDonorLike(f64),

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("binary format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
