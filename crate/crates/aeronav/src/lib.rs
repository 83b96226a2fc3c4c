//! Host-side companion to `aeronav-core`: scenario and log storage, the
//! chat-completions gateway with record/replay, model-backed policies and
//! the six-module agent, the batch runner, reports and the control service.

pub mod store;
pub mod gateway;
pub mod agent;
pub mod lmm_policy;
pub mod prompts;
pub mod runner;
pub mod reports;
pub mod svg;
pub mod service;
