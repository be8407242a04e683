use thiserror::Error;

use crate::geodesic::GeodesicTrace;
use crate::mediatrix::MediatrixCurve;
use crate::surface::ChartPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("point {point:?} outside the domain of the {chart} chart")]
    Domain { point: ChartPoint, chart: &'static str },

    #[error("geodesic integration failed at arc length {arc_length:.6}: {reason}")]
    Integration {
        arc_length: f64,
        reason: String,
        partial: Box<GeodesicTrace>,
    },

    #[error("distance field does not cover {point:?} (nearest fan sample at {gap:.3e}, h_cover {h_cover:.3e})")]
    Coverage { point: ChartPoint, gap: f64, h_cover: f64 },

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error("degenerate minimizing direction set at {0:?}")]
    Degenerate(ChartPoint),

    #[error("direction sets too close at {point:?}: separation {separation:.3e} < {floor:.3e}")]
    Separation {
        point: ChartPoint,
        separation: f64,
        floor: f64,
    },

    #[error("projection onto the mediatrix failed: {0}")]
    Projection(String),

    #[error("mediatrix trace aborted after {} points: {reason}", .partial.points.len())]
    Trace {
        reason: String,
        partial: Box<MediatrixCurve>,
    },

    #[error("mediatrix trace did not close after {} points", .partial.points.len())]
    NonClosure { partial: Box<MediatrixCurve> },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("scenario {name}: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
