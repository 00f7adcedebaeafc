//! Headless batch commands and a single-client request/response service
//! around an [`workcell_core::toolbox::EditSession`].

pub mod cli;
pub mod protocol;
pub mod server;
pub mod service;

pub use protocol::{ErrorCode, Request, Response};
pub use service::{Reply, Service};
