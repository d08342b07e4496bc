//! File formats, render requests, the HTTP service and the command line.

pub mod cli;
pub mod params_file;
pub mod request;
pub mod score_file;
pub mod service;
pub mod wav;
