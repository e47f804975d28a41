//! Front ends for `sfg-core`: the `sfg` command and its HTTP service.
//!
//! Both go through [`app`], so a graph posted to `/api/transfer` yields the
//! same bytes as `sfg compute --format structured` on the same file.

pub mod app;
pub mod service;
