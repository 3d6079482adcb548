//! Read-only JSON API over a frozen artifact bundle.

pub mod api;
pub mod bundle;
pub mod error;
pub mod map2d;
pub mod queries;

pub use api::{router, serve, AppState, SharedState, DIGEST_HEADER};
pub use bundle::{Bundle, BundleError, BundleManifest, BundleOptions, MANIFEST_FILE};
pub use error::{ApiError, ErrorCode};
