use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("fit deviation {deviation:.3e} exceeds tolerance {tol:.3e} at degree {degree}")]
    FitToleranceExceeded { deviation: f64, tol: f64, degree: usize },
    #[error("curve reaches t = {min_t:.3e} <= 0")]
    NonPositiveTime { min_t: f64 },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("curve is not regular: min |phi'| = {min_speed:.3e}")]
    DegenerateCurve { min_speed: f64 },
    #[error("degenerate horizontal point near theta = {theta:.6} (|dt3| = {slope:.3e})")]
    DegenerateHorizontalPoint { theta: f64, slope: f64 },
    #[error("label references interval {index}, which is not a positive interval")]
    LabelOutOfRange { index: usize },
    #[error("no sliding field found: {0}")]
    SlidingFieldFailure(String),
    #[error("tube self-intersects after {retries} radius halvings")]
    TubeSelfIntersection { retries: usize },
    #[error("inverse tube map diverged at ({x:.4}, {y:.4}, {t:.4})")]
    InverseDiverged { x: f64, y: f64, t: f64 },
}
